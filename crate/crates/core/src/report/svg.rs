use std::collections::BTreeMap;
use std::fmt::Write;

use super::escape;
use crate::pipeline::Dag;

const NODE_W: usize = 150;
const NODE_H: usize = 36;
const COL_GAP: usize = 60;
const ROW_GAP: usize = 24;
const MARGIN: usize = 16;

/// Layered left-to-right drawing: one column per rank, stages sorted by
/// name within a column.
pub fn render_dag_svg(dag: &Dag) -> String {
    let ranks = dag.ranks();
    let mut columns: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (name, r) in &ranks {
        columns.entry(*r).or_default().push(name);
    }
    let mut pos: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (r, names) in columns.iter_mut() {
        names.sort();
        for (row, n) in names.iter().enumerate() {
            let x = MARGIN + r * (NODE_W + COL_GAP);
            let y = MARGIN + row * (NODE_H + ROW_GAP);
            pos.insert(n, (x, y));
        }
    }
    let cols = columns.len().max(1);
    let rows = columns.values().map(Vec::len).max().unwrap_or(0).max(1);
    let width = 2 * MARGIN + cols * NODE_W + (cols - 1) * COL_GAP;
    let height = 2 * MARGIN + rows * NODE_H + (rows - 1) * ROW_GAP;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" class=\"dag\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" role=\"img\" aria-label=\"pipeline stages\">"
    );
    s.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" \
         markerHeight=\"8\" orient=\"auto-start-reverse\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#555\"/></marker></defs>\n",
    );
    for (from, to) in dag.edges() {
        let (fx, fy) = pos[from.as_str()];
        let (tx, ty) = pos[to.as_str()];
        let (x1, y1) = (fx + NODE_W, fy + NODE_H / 2);
        let (x2, y2) = (tx, ty + NODE_H / 2);
        let mid = (x1 + x2) / 2;
        let _ = writeln!(
            s,
            "<path class=\"edge\" data-from=\"{}\" data-to=\"{}\" d=\"M {x1} {y1} C {mid} {y1}, {mid} {y2}, {x2} {y2}\" \
             fill=\"none\" stroke=\"#555\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\"/>",
            escape(from),
            escape(to)
        );
    }
    for (name, (x, y)) in &pos {
        let label: String = if name.chars().count() > 20 {
            name.chars().take(19).chain(['…']).collect()
        } else {
            name.to_string()
        };
        let _ = writeln!(
            s,
            "<g class=\"node\" data-stage=\"{n}\"><title>{n}</title><rect x=\"{x}\" y=\"{y}\" width=\"{NODE_W}\" \
             height=\"{NODE_H}\" rx=\"6\" fill=\"#eef3fb\" stroke=\"#3b6db3\"/><text x=\"{tx}\" y=\"{ty}\" \
             text-anchor=\"middle\" dominant-baseline=\"middle\" font-size=\"13\">{l}</text></g>",
            n = escape(name),
            l = escape(&label),
            tx = x + NODE_W / 2,
            ty = y + NODE_H / 2,
        );
    }
    s.push_str("</svg>");
    s
}
