use std::collections::{BTreeMap, BTreeSet};

use super::spec::{covers, PipelineSpec};
use super::PipelineError;

/// Stage dependency graph. Edges are derived from out/dep matching: A→B
/// when an out of A is a dep of B, lies inside a dep directory of B, or
/// contains a dep of B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    edges: BTreeSet<(String, String)>,
    order: Vec<String>,
}

impl Dag {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    /// Topological order, ties broken by stage name.
    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn predecessors(&self, stage: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(_, b)| b == stage)
            .map(|(a, _)| a.as_str())
            .collect()
    }

    /// `stage` and every stage it transitively depends on.
    pub fn ancestors_inclusive(&self, stage: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![stage.to_string()];
        while let Some(s) = stack.pop() {
            if seen.insert(s.clone()) {
                stack.extend(self.predecessors(&s).into_iter().map(str::to_string));
            }
        }
        seen
    }

    /// `stage` and every stage that transitively depends on it.
    pub fn descendants_inclusive(&self, stage: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![stage.to_string()];
        while let Some(s) = stack.pop() {
            if seen.insert(s.clone()) {
                stack.extend(
                    self.edges
                        .iter()
                        .filter(|(a, _)| *a == s)
                        .map(|(_, b)| b.clone()),
                );
            }
        }
        seen
    }

    /// Longest-path rank of every stage; sources have rank 0.
    pub fn ranks(&self) -> BTreeMap<String, usize> {
        let mut rank = BTreeMap::new();
        for s in &self.order {
            let r = self
                .predecessors(s)
                .iter()
                .map(|p| rank[*p] + 1)
                .max()
                .unwrap_or(0);
            rank.insert(s.clone(), r);
        }
        rank
    }
}

pub fn build_dag(spec: &PipelineSpec) -> Result<Dag, PipelineError> {
    let nodes: Vec<String> = spec.stages.iter().map(|s| s.name.clone()).collect();
    let mut edges = BTreeSet::new();
    for a in &spec.stages {
        for b in &spec.stages {
            if a.name == b.name {
                continue;
            }
            let linked = a
                .outs
                .iter()
                .any(|o| b.deps.iter().any(|d| covers(o, d) || covers(d, o)));
            if linked {
                edges.insert((a.name.clone(), b.name.clone()));
            }
        }
    }

    let mut indegree: BTreeMap<&str, usize> = nodes.iter().map(|n| (n.as_str(), 0)).collect();
    for (_, b) in &edges {
        *indegree
            .get_mut(b.as_str())
            .expect("edge endpoint is a stage") += 1;
    }
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for (_, b) in edges.iter().filter(|(a, _)| a == n) {
            let d = indegree
                .get_mut(b.as_str())
                .expect("edge endpoint is a stage");
            *d -= 1;
            if *d == 0 {
                ready.insert(b.as_str());
            }
        }
    }
    if order.len() < nodes.len() {
        let left: BTreeSet<&str> = indegree
            .iter()
            .filter(|(_, d)| **d > 0)
            .map(|(n, _)| *n)
            .collect();
        return Err(PipelineError::CycleDetected(find_cycle(&left, &edges)));
    }
    Ok(Dag {
        nodes,
        edges,
        order,
    })
}

/// A cycle among the stages Kahn's algorithm could not schedule, rotated
/// to start at its lexicographically smallest stage.
fn find_cycle(left: &BTreeSet<&str>, edges: &BTreeSet<(String, String)>) -> Vec<String> {
    // every unscheduled stage keeps an unscheduled predecessor, so walking
    // predecessors must eventually revisit a stage
    let pred = |n: &str| -> &str {
        edges
            .iter()
            .find(|(a, b)| b == n && left.contains(a.as_str()))
            .map(|(a, _)| a.as_str())
            .expect("unscheduled stage has an unscheduled predecessor")
    };
    let mut path: Vec<&str> = Vec::new();
    let mut cur = *left.first().expect("a cycle leaves stages unscheduled");
    while !path.contains(&cur) {
        path.push(cur);
        cur = pred(cur);
    }
    let pos = path.iter().position(|p| *p == cur).expect("revisited");
    let mut cycle: Vec<&str> = path[pos..].to_vec();
    cycle.reverse();
    let start = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, n)| **n)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle.rotate_left(start);
    let mut out: Vec<String> = cycle.iter().map(|s| s.to_string()).collect();
    out.push(out[0].clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::parse_pipeline;

    fn dag(text: &str) -> Result<Dag, PipelineError> {
        build_dag(&parse_pipeline(text).unwrap())
    }

    #[test]
    fn simple_edge() {
        let d = dag("stages:\n  B:\n    cmd: b\n    deps: [x]\n  A:\n    cmd: a\n    outs: [x]\n")
            .unwrap();
        assert_eq!(d.order(), ["A", "B"]);
        assert!(d.edges().contains(&("A".to_string(), "B".to_string())));
    }

    #[test]
    fn two_cycle() {
        let e = dag("stages:\n  A:\n    cmd: a\n    deps: [y]\n    outs: [x]\n  B:\n    cmd: b\n    deps: [x]\n    outs: [y]\n")
            .unwrap_err();
        assert_eq!(
            e,
            PipelineError::CycleDetected(vec!["A".into(), "B".into(), "A".into()])
        );
    }

    #[test]
    fn cycle_behind_a_source() {
        // Z feeds a 3-cycle C→D→E→C; the reported path is the cycle only
        let text = "stages:\n  Z:\n    cmd: z\n    outs: [z]\n  \
            C:\n    cmd: c\n    deps: [z, e]\n    outs: [c]\n  \
            D:\n    cmd: d\n    deps: [c]\n    outs: [d]\n  \
            E:\n    cmd: e\n    deps: [d]\n    outs: [e]\n  \
            W:\n    cmd: w\n    deps: [d]\n";
        assert_eq!(
            dag(text).unwrap_err(),
            PipelineError::CycleDetected(vec!["C".into(), "D".into(), "E".into(), "C".into()])
        );
    }

    #[test]
    fn four_stage_order_and_lexicographic_ties() {
        let text = "stages:\n  Prepare:\n    cmd: c\n    deps: [p]\n    outs: [q]\n  \
            Preprocess:\n    cmd: b\n    deps: [n]\n    outs: [p]\n  \
            DICOM2NIFTI:\n    cmd: a\n    outs: [n]\n  \
            zeta:\n    cmd: z\n  alpha:\n    cmd: y\n";
        let d = dag(text).unwrap();
        assert_eq!(
            d.order(),
            ["DICOM2NIFTI", "Preprocess", "Prepare", "alpha", "zeta"]
        );
    }

    #[test]
    fn directory_deps_link() {
        let d = dag("stages:\n  A:\n    cmd: a\n    outs: [data/a/x.bin]\n  B:\n    cmd: b\n    deps: [data/a]\n").unwrap();
        assert_eq!(d.edges().len(), 1);
    }

    #[test]
    fn diamond_ranks() {
        let text = "stages:\n  A:\n    cmd: a\n    outs: [a]\n  B:\n    cmd: b\n    deps: [a]\n    outs: [b]\n  \
            C:\n    cmd: c\n    deps: [a]\n    outs: [c]\n  D:\n    cmd: d\n    deps: [b, c]\n";
        let r = dag(text).unwrap().ranks();
        assert_eq!((r["A"], r["B"], r["C"], r["D"]), (0, 1, 1, 2));
    }
}
