use aimp_core::pipeline::{build_dag, parse_pipeline, PipelineError};

fn pipeline(stages: &[(&str, &str, &str)]) -> String {
    let mut s = String::from("stages:\n");
    for (name, dep, out) in stages {
        s.push_str(&format!(
            "  {name}:\n    cmd: touch {out}\n    deps: [{dep}]\n    outs: [{out}]\n"
        ));
    }
    s
}

const DIAMOND: [(&str, &str, &str); 5] = [
    ("Fetch", "raw", "a"),
    ("Left", "a", "b"),
    ("Right", "a", "c"),
    ("Also", "a", "e"),
    ("Join", "b", "d"),
];

#[test]
fn order_is_stable_across_invocations() {
    let spec = parse_pipeline(&pipeline(&DIAMOND)).unwrap();
    let first = build_dag(&spec).unwrap().order().to_vec();
    assert_eq!(first[0], "Fetch");
    for _ in 0..10 {
        assert_eq!(build_dag(&spec).unwrap().order(), first.as_slice());
    }
}

#[test]
fn order_ignores_declaration_order() {
    let forward = parse_pipeline(&pipeline(&DIAMOND)).unwrap();
    let mut reversed = DIAMOND;
    reversed.reverse();
    let backward = parse_pipeline(&pipeline(&reversed)).unwrap();
    assert_eq!(
        build_dag(&forward).unwrap().order(),
        build_dag(&backward).unwrap().order()
    );
}

#[test]
fn every_edge_points_forward() {
    let spec = parse_pipeline(&pipeline(&DIAMOND)).unwrap();
    let dag = build_dag(&spec).unwrap();
    let pos = |n: &str| dag.order().iter().position(|s| s == n).unwrap();
    for (from, to) in dag.edges() {
        assert!(pos(from) < pos(to), "{from} -> {to}");
    }
}

#[test]
fn cycle_is_named() {
    let spec = parse_pipeline(&pipeline(&[("A", "y", "x"), ("B", "x", "y")])).unwrap();
    match build_dag(&spec) {
        Err(PipelineError::CycleDetected(path)) => {
            assert_eq!(path.first(), path.last());
            assert!(path.contains(&"A".to_string()) && path.contains(&"B".to_string()));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn two_producers_of_one_out_are_rejected() {
    let text = pipeline(&[("A", "raw", "shared"), ("B", "raw", "shared")]);
    match parse_pipeline(&text) {
        Err(PipelineError::DuplicateOut {
            path,
            first,
            second,
        }) => {
            assert_eq!(path, "shared");
            assert_eq!((first.as_str(), second.as_str()), ("A", "B"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn nested_outs_count_as_the_same_producer_target() {
    let text = pipeline(&[("A", "raw", "data"), ("B", "raw", "data/inner")]);
    assert!(matches!(
        parse_pipeline(&text),
        Err(PipelineError::DuplicateOut { .. })
    ));
}
