use std::collections::BTreeMap;

use aimp_core::dcat::turtle::{RDF_TYPE, XSD_DECIMAL, XSD_INTEGER};
use aimp_core::dcat::{emit_turtle, parse_turtle, RdfLiteral, Term, Triple, TurtleDoc};
use aimp_core::provgraph::{Iri, Literal, ProvClass, ProvEdge, ProvGraph, ProvNode, Relation};
use proptest::prelude::*;

const NAMESPACES: [(&str, &str); 3] = [
    ("ex", "http://ex.org/"),
    ("exa", "http://ex.org/a/"),
    ("urn", "urn:x:"),
];

fn arb_iri() -> impl Strategy<Value = String> {
    (0..NAMESPACES.len(), "[A-Za-z0-9_.~#/%-]{0,12}")
        .prop_map(|(i, local)| format!("{}{local}", NAMESPACES[i].1))
}

fn arb_lexical() -> impl Strategy<Value = String> {
    let ch = prop_oneof![
        4 => any::<char>().prop_filter("control", |c| !c.is_control()),
        1 => prop::sample::select(vec!['"', '\\', '\n', '\t', '\r', '\'', '#', '.', ';', ',']),
    ];
    prop::collection::vec(ch, 0..24).prop_map(|cs| cs.into_iter().collect())
}

fn arb_literal() -> impl Strategy<Value = RdfLiteral> {
    prop_oneof![
        arb_lexical().prop_map(RdfLiteral::string),
        (arb_lexical(), "[a-z]{2,3}(-[A-Z0-9]{2,4})?").prop_map(|(l, t)| RdfLiteral::lang(l, t)),
        any::<i64>().prop_map(|v| RdfLiteral::typed(v.to_string(), XSD_INTEGER)),
        (any::<i32>(), 0u32..1000)
            .prop_map(|(a, b)| RdfLiteral::typed(format!("{a}.{b}"), XSD_DECIMAL)),
        (arb_lexical(), arb_iri()).prop_map(|(l, d)| RdfLiteral::typed(l, d)),
    ]
}

fn arb_subject() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => arb_iri().prop_map(Term::Iri),
        1 => "[a-z][a-z0-9]{0,5}".prop_map(Term::Blank),
    ]
}

fn arb_object() -> impl Strategy<Value = Term> {
    prop_oneof![arb_subject(), arb_literal().prop_map(Term::Literal)]
}

fn arb_predicate() -> impl Strategy<Value = String> {
    prop_oneof![1 => Just(RDF_TYPE.to_string()), 4 => arb_iri()]
}

fn arb_doc() -> impl Strategy<Value = TurtleDoc> {
    let prefixes = prop::collection::vec(any::<bool>(), NAMESPACES.len());
    let triples = prop::collection::vec((arb_subject(), arb_predicate(), arb_object()), 0..30);
    (prefixes, triples).prop_map(|(use_prefix, triples)| TurtleDoc {
        prefixes: NAMESPACES
            .iter()
            .zip(use_prefix)
            .filter(|(_, used)| *used)
            .map(|((p, ns), _)| (p.to_string(), ns.to_string()))
            .collect::<BTreeMap<_, _>>(),
        triples: triples
            .into_iter()
            .map(|(s, p, o)| Triple::new(s, p, o))
            .collect(),
    })
}

fn arb_graph() -> impl Strategy<Value = ProvGraph> {
    let nodes = prop::collection::vec((0usize..30, 0..ProvClass::ALL.len(), arb_lexical()), 1..20);
    let edges = prop::collection::vec((0usize..30, 0..Relation::ALL.len(), 0usize..30), 0..40);
    (nodes, edges).prop_map(|(nodes, edges)| {
        let mut g = ProvGraph::with_default_prefixes();
        g.add_prefix("ex", "http://example.org/").unwrap();
        let id = |n: usize| Iri::new(format!("ex:n{n}")).unwrap();
        for (n, class, label) in nodes {
            let _ = g.add_node(
                ProvNode::new(id(n), ProvClass::ALL[class])
                    .with_attr(Iri::new("ex:label").unwrap(), Literal::string(label))
                    .with_attr(Iri::new("ex:rank").unwrap(), Literal::integer(n as i64)),
            );
        }
        for (s, r, o) in edges {
            let _ = g.add_edge(ProvEdge::new(id(s), Relation::ALL[r], id(o)));
        }
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn emitted_documents_parse_to_the_same_triples(doc in arb_doc()) {
        let text = emit_turtle(&doc);
        let back = parse_turtle(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back.triple_set(), doc.triple_set());
        prop_assert_eq!(emit_turtle(&back), text);
    }

    #[test]
    fn provenance_graphs_serialize_to_parseable_turtle(g in arb_graph()) {
        let text = g.to_turtle().unwrap();
        let doc = parse_turtle(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(doc.triple_set(), g.to_turtle_doc().triple_set());
        prop_assert!(g.validate().is_valid());
    }
}
