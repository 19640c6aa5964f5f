use super::*;
use crate::dcat::turtle::parse_turtle;
use proptest::prelude::*;

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn ex_graph() -> ProvGraph {
    let mut g = ProvGraph::with_default_prefixes();
    g.add_prefix("ex", "http://example.org/").unwrap();
    g
}

/// Data collection of one patient case: collected by a provider,
/// anonymized by a software agent, uploaded to the repository.
pub(crate) fn collection_graph() -> ProvGraph {
    let mut g = ex_graph();
    let nodes = [
        ("ex:patient1", ProvClass::PatientRecord),
        ("ex:clin1", ProvClass::ClinicalAttributeValue),
        ("ex:img1", ProvClass::ImagingAttributeValue),
        ("ex:study1", ProvClass::ImageStudy),
        ("ex:series1", ProvClass::ImageSeries),
        ("ex:collect", ProvClass::DataCollection),
        ("ex:anon", ProvClass::Anonymization),
        ("ex:upload", ProvClass::DataUpload),
        ("ex:hospital", ProvClass::Organization),
        ("ex:anonymizer", ProvClass::SoftwareAgent),
    ];
    for (id, class) in nodes {
        g.add_node(ProvNode::new(iri(id), class)).unwrap();
    }
    g.set_attribute(
        &iri("ex:clin1"),
        iri("ex:psa"),
        Literal::decimal(6.4).unwrap(),
    )
    .unwrap();
    g.set_attribute(
        &iri("ex:series1"),
        iri("ex:modality"),
        Literal::string("MR"),
    )
    .unwrap();
    let edges = [
        (
            "ex:patient1",
            Relation::HasClinicalAttributeValue,
            "ex:clin1",
        ),
        ("ex:patient1", Relation::HasImageAttributeValue, "ex:img1"),
        ("ex:study1", Relation::WasDerivedFrom, "ex:patient1"),
        ("ex:series1", Relation::WasDerivedFrom, "ex:study1"),
        ("ex:patient1", Relation::WasGeneratedBy, "ex:collect"),
        ("ex:collect", Relation::WasAssociatedWith, "ex:hospital"),
        ("ex:anon", Relation::Used, "ex:series1"),
        ("ex:anon", Relation::WasPerformedBy, "ex:anonymizer"),
        ("ex:upload", Relation::Used, "ex:series1"),
    ];
    for (s, p, o) in edges {
        g.add_edge(ProvEdge::new(iri(s), p, iri(o))).unwrap();
    }
    g
}

/// Curation of the same series: a segmentation produces a mask.
pub(crate) fn curation_graph() -> ProvGraph {
    let mut g = ex_graph();
    g.add_node(
        ProvNode::new(iri("ex:series1"), ProvClass::ImageSeries)
            .with_attr(iri("ex:modality"), Literal::string("MR")),
    )
    .unwrap();
    g.add_node(ProvNode::new(iri("ex:seg"), ProvClass::DataCuration))
        .unwrap();
    g.add_node(ProvNode::new(iri("ex:mask"), ProvClass::SegmentationMask))
        .unwrap();
    g.add_node(ProvNode::new(iri("ex:radiologist"), ProvClass::Person))
        .unwrap();
    for (s, p, o) in [
        ("ex:seg", Relation::Used, "ex:series1"),
        ("ex:mask", Relation::WasGeneratedBy, "ex:seg"),
        ("ex:mask", Relation::WasDerivedFrom, "ex:series1"),
        ("ex:seg", Relation::WasAssociatedWith, "ex:radiologist"),
    ] {
        g.add_edge(ProvEdge::new(iri(s), p, iri(o))).unwrap();
    }
    g
}

#[test]
fn add_node_to_empty_graph() {
    let mut g = ex_graph();
    g.add_node(ProvNode::new(iri("ex:p1"), ProvClass::PatientRecord))
        .unwrap();
    assert_eq!(g.nodes().len(), 1);
    assert_eq!(g.edges().len(), 0);
}

#[test]
fn add_node_duplicate_id() {
    let mut g = ex_graph();
    g.add_node(ProvNode::new(iri("ex:p1"), ProvClass::PatientRecord))
        .unwrap();
    let err = g
        .add_node(ProvNode::new(iri("ex:p1"), ProvClass::ImageStudy))
        .unwrap_err();
    assert_eq!(err, GraphError::DuplicateId(iri("ex:p1")));
    // prefixed and absolute spellings name the same node
    let err = g
        .add_node(ProvNode::new(
            iri("http://example.org/p1"),
            ProvClass::ImageStudy,
        ))
        .unwrap_err();
    assert!(matches!(err, GraphError::DuplicateId(_)));
}

#[test]
fn add_activity_next_to_entity() {
    let mut g = ex_graph();
    g.add_node(ProvNode::new(iri("ex:p1"), ProvClass::PatientRecord))
        .unwrap();
    g.add_node(ProvNode::new(iri("ex:act1"), ProvClass::Anonymization))
        .unwrap();
    assert_eq!(g.nodes().len(), 2);
}

#[test]
fn add_node_with_unknown_prefix() {
    let mut g = ProvGraph::new();
    let err = g
        .add_node(ProvNode::new(iri("ex:p1"), ProvClass::PatientRecord))
        .unwrap_err();
    assert!(matches!(
        err,
        GraphError::Term(TermError::UnresolvablePrefix(_))
    ));
}

#[test]
fn add_edge_domain_and_range() {
    let mut g = ex_graph();
    g.add_node(ProvNode::new(iri("ex:p1"), ProvClass::PatientRecord))
        .unwrap();
    g.add_node(ProvNode::new(iri("ex:act1"), ProvClass::Anonymization))
        .unwrap();
    g.add_edge(ProvEdge::new(iri("ex:act1"), Relation::Used, iri("ex:p1")))
        .unwrap();

    let err = g
        .add_edge(ProvEdge::new(iri("ex:p1"), Relation::Used, iri("ex:act1")))
        .unwrap_err();
    assert_eq!(
        err,
        GraphError::RelationDomainViolation {
            predicate: Relation::Used,
            expected: Base::Activity,
            actual: Base::Entity,
        }
    );

    let err = g
        .add_edge(ProvEdge::new(iri("ex:act1"), Relation::Used, iri("ex:p1")))
        .unwrap_err();
    assert!(matches!(err, GraphError::DuplicateEdge(_)));

    let err = g
        .add_edge(ProvEdge::new(
            iri("ex:act1"),
            Relation::Used,
            iri("ex:ghost"),
        ))
        .unwrap_err();
    assert_eq!(err, GraphError::UnknownNode(iri("ex:ghost")));
}

#[test]
fn mask_generated_by_segmentation() {
    let mut g = ex_graph();
    g.add_node(ProvNode::new(iri("ex:mask"), ProvClass::SegmentationMask))
        .unwrap();
    g.add_node(ProvNode::new(iri("ex:seg"), ProvClass::DataCuration))
        .unwrap();
    g.add_edge(ProvEdge::new(
        iri("ex:mask"),
        Relation::WasGeneratedBy,
        iri("ex:seg"),
    ))
    .unwrap();
    assert!(g.validate().is_valid());
}

#[test]
fn validate_reports_dangling_edges() {
    let mut g = ex_graph();
    g.add_node(ProvNode::new(iri("ex:p1"), ProvClass::PatientRecord))
        .unwrap();
    g.add_node(ProvNode::new(iri("ex:act1"), ProvClass::Anonymization))
        .unwrap();
    g.add_node(ProvNode::new(iri("ex:bot"), ProvClass::SoftwareAgent))
        .unwrap();
    g.add_edge(ProvEdge::new(iri("ex:act1"), Relation::Used, iri("ex:p1")))
        .unwrap();
    g.add_edge(ProvEdge::new(
        iri("ex:act1"),
        Relation::WasAssociatedWith,
        iri("ex:bot"),
    ))
    .unwrap();
    assert_eq!(g.validate(), ValidationReport::default());

    let mut nodes = g.nodes().to_vec();
    let mut edges = g.edges().to_vec();
    edges.push(ProvEdge::new(
        iri("ex:act1"),
        Relation::Used,
        iri("ex:ghost"),
    ));
    let broken = ProvGraph::from_parts(g.prefixes().clone(), nodes.clone(), edges.clone());
    assert_eq!(
        broken.validate().violations,
        vec![Violation::UnknownNode(iri("ex:ghost"))]
    );

    nodes.push(ProvNode::new(iri("zz:x"), ProvClass::Script));
    edges.push(ProvEdge::new(iri("ex:p1"), Relation::Used, iri("ex:act1")));
    let broken = ProvGraph::from_parts(g.prefixes().clone(), nodes, edges);
    let v = broken.validate().violations;
    assert!(v.contains(&Violation::UnresolvablePrefix(iri("zz:x"))));
    assert_eq!(
        v.iter()
            .filter(|x| matches!(x, Violation::RelationDomainViolation { .. }))
            .count(),
        2
    );
}

#[test]
fn turtle_single_node() {
    let mut g = ProvGraph::new();
    g.add_prefix("aimp", vocab::AIMP).unwrap();
    g.add_prefix("ex", "http://example.org/").unwrap();
    g.add_node(ProvNode::new(iri("ex:p1"), ProvClass::PatientRecord))
        .unwrap();
    assert_eq!(
        g.to_turtle().unwrap(),
        "@prefix aimp: <https://w3id.org/aimp/> .\n@prefix ex: <http://example.org/> .\n\nex:p1 a aimp:PatientRecord .\n"
    );
}

#[test]
fn turtle_empty_graph_is_prefixes_only() {
    let text = ProvGraph::with_default_prefixes().to_turtle().unwrap();
    assert!(text.lines().all(|l| l.starts_with("@prefix")));
    assert!(parse_turtle(&text).unwrap().triples.is_empty());
}

#[test]
fn turtle_rejects_invalid_graph() {
    let g = ProvGraph::from_parts(
        vocab::default_prefixes(),
        vec![],
        vec![ProvEdge::new(iri("aimp:a"), Relation::Used, iri("aimp:b"))],
    );
    assert!(matches!(g.to_turtle(), Err(GraphError::InvalidGraph(_))));
    assert!(matches!(
        g.to_canonical_json(),
        Err(GraphError::InvalidGraph(_))
    ));
}

#[test]
fn turtle_round_trips_fixture_graphs() {
    for g in [collection_graph(), curation_graph()] {
        let text = g.to_turtle().unwrap();
        let doc = parse_turtle(&text).unwrap();
        assert_eq!(doc.triple_set(), g.to_turtle_doc().triple_set());
        let back = ProvGraph::from_turtle_doc(&doc).unwrap();
        assert_eq!(back, g);
    }
}

#[test]
fn from_turtle_rejects_unknown_vocabulary() {
    let doc = parse_turtle("@prefix ex: <http://example.org/> . ex:a a ex:Unicorn .").unwrap();
    assert!(matches!(
        ProvGraph::from_turtle_doc(&doc),
        Err(GraphError::Decode(_))
    ));
    let doc = parse_turtle(
        "@prefix prov: <http://www.w3.org/ns/prov#> . @prefix ex: <http://example.org/> .\n\
         ex:a a prov:Person . ex:b a prov:Person . ex:a ex:knows ex:b .",
    )
    .unwrap();
    assert!(matches!(
        ProvGraph::from_turtle_doc(&doc),
        Err(GraphError::Decode(_))
    ));
}

#[test]
fn canonical_json_is_deterministic_and_loads_back() {
    let g = collection_graph();
    let a = g.to_canonical_json().unwrap();
    let b = g.to_canonical_json().unwrap();
    assert_eq!(a, b);
    let back = ProvGraph::from_canonical_json(&a).unwrap();
    assert_eq!(back.to_canonical_json().unwrap(), a);
}

#[test]
fn merge_identity_and_idempotence() {
    let g = collection_graph();
    assert_eq!(ProvGraph::merge(&g, &ProvGraph::new()).unwrap(), g);
    assert_eq!(ProvGraph::merge(&g, &g).unwrap(), g);
}

#[test]
fn merge_collection_and_curation_shares_series() {
    let a = collection_graph();
    let b = curation_graph();
    let m = ProvGraph::merge(&a, &b).unwrap();
    // 10 + 4 nodes, ex:series1 counted once
    assert_eq!(m.nodes().len(), 13);
    assert_eq!(m.edges().len(), 9 + 4);
    assert!(m.validate().is_valid());
    let series: Vec<_> = m.nodes_of_class(ProvClass::ImageSeries).collect();
    assert_eq!(series.len(), 1);
}

#[test]
fn merge_conflicts() {
    let a = collection_graph();
    let mut b = ex_graph();
    b.add_node(
        ProvNode::new(iri("ex:series1"), ProvClass::ImageSeries)
            .with_attr(iri("ex:modality"), Literal::string("CT")),
    )
    .unwrap();
    assert_eq!(
        ProvGraph::merge(&a, &b).unwrap_err(),
        GraphError::AttributeConflict {
            id: iri("ex:series1"),
            key: iri("ex:modality")
        }
    );

    let mut c = ProvGraph::new();
    c.add_prefix("ex", "http://other.org/").unwrap();
    assert!(matches!(
        ProvGraph::merge(&a, &c),
        Err(GraphError::PrefixConflict { .. })
    ));
}

#[test]
fn every_relation_rejects_its_inverted_form() {
    fn sample(base: Base) -> ProvClass {
        match base {
            Base::Entity => ProvClass::Script,
            Base::Activity => ProvClass::StageExecution,
            Base::Agent => ProvClass::SoftwareAgent,
        }
    }
    for rel in Relation::ALL {
        let (domain, range) = rel.signature();
        let mut g = ex_graph();
        g.add_node(ProvNode::new(iri("ex:s"), sample(domain)))
            .unwrap();
        g.add_node(ProvNode::new(iri("ex:o"), sample(range)))
            .unwrap();
        g.add_edge(ProvEdge::new(iri("ex:s"), *rel, iri("ex:o")))
            .unwrap();
        if domain != range {
            assert!(
                matches!(
                    g.add_edge(ProvEdge::new(iri("ex:o"), *rel, iri("ex:s"))),
                    Err(GraphError::RelationDomainViolation { .. })
                ),
                "{rel} accepted an inverted edge"
            );
        } else {
            // symmetric signature: invert by swapping the object for another base
            let other = if domain == Base::Entity {
                Base::Agent
            } else {
                Base::Entity
            };
            g.add_node(ProvNode::new(iri("ex:x"), sample(other)))
                .unwrap();
            assert!(matches!(
                g.add_edge(ProvEdge::new(iri("ex:x"), *rel, iri("ex:s"))),
                Err(GraphError::RelationDomainViolation { .. })
            ));
        }
    }
}

type GraphOps = (Vec<(usize, usize)>, Vec<(usize, usize, usize)>);

/// Generates a random valid graph as the sequence of operations that
/// builds it.
fn arb_graph_ops() -> impl Strategy<Value = GraphOps> {
    let nodes = prop::collection::vec((0usize..40, 0..ProvClass::ALL.len()), 1..25);
    let edges = prop::collection::vec((0usize..40, 0..Relation::ALL.len(), 0usize..40), 0..60);
    (nodes, edges)
}

fn build(nodes: &[(usize, usize)], edges: &[(usize, usize, usize)]) -> ProvGraph {
    let mut g = ex_graph();
    for (id, class) in nodes {
        let _ = g.add_node(
            ProvNode::new(iri(&format!("ex:n{id}")), ProvClass::ALL[*class])
                .with_attr(iri("ex:label"), Literal::integer(*id as i64)),
        );
    }
    for (s, r, o) in edges {
        let _ = g.add_edge(ProvEdge::new(
            iri(&format!("ex:n{s}")),
            Relation::ALL[*r],
            iri(&format!("ex:n{o}")),
        ));
    }
    g
}

proptest! {
    #[test]
    fn construction_implies_validity((nodes, edges) in arb_graph_ops()) {
        let g = build(&nodes, &edges);
        prop_assert!(g.validate().is_valid());
        let text = g.to_turtle().unwrap();
        let doc = parse_turtle(&text).unwrap();
        prop_assert_eq!(doc.triple_set(), g.to_turtle_doc().triple_set());
    }

    #[test]
    fn canonical_json_ignores_insertion_order(
        (nodes, edges) in arb_graph_ops(),
        seed in any::<u64>(),
    ) {
        let g = build(&nodes, &edges);
        // rebuild from the accepted nodes/edges in a shuffled order
        let mut ns = g.nodes().to_vec();
        let mut es = g.edges().to_vec();
        let mut state = seed | 1;
        let mut next = || { state ^= state << 13; state ^= state >> 7; state ^= state << 17; state as usize };
        for i in (1..ns.len()).rev() { let j = next() % (i + 1); ns.swap(i, j); }
        for i in (1..es.len()).rev() { let j = next() % (i + 1); es.swap(i, j); }
        let mut h = ex_graph();
        for n in ns { h.add_node(n).unwrap(); }
        for e in es { h.add_edge(e).unwrap(); }
        prop_assert_eq!(g.to_canonical_json().unwrap(), h.to_canonical_json().unwrap());
    }

    #[test]
    fn merge_associative_and_idempotent(
        a in arb_graph_ops(), b in arb_graph_ops(), c in arb_graph_ops(),
    ) {
        // node classes are keyed by id so that merges never conflict
        let fix = |(n, e): GraphOps| {
            let n: Vec<_> = n.into_iter().map(|(id, _)| (id, id % ProvClass::ALL.len())).collect();
            build(&n, &e)
        };
        let (a, b, c) = (fix(a), fix(b), fix(c));
        let left = ProvGraph::merge(&ProvGraph::merge(&a, &b).unwrap(), &c).unwrap();
        let right = ProvGraph::merge(&a, &ProvGraph::merge(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(&ProvGraph::merge(&left, &left).unwrap(), &left);
        prop_assert!(left.validate().is_valid());
    }
}
