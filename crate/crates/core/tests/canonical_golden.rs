use aimp_core::canonical;
use aimp_core::cas::hash_bytes;
use aimp_core::provgraph::{Iri, Literal, ProvClass, ProvEdge, ProvGraph, ProvNode, Relation};

fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

fn fixed_graph() -> ProvGraph {
    let mut g = ProvGraph::with_default_prefixes();
    g.add_prefix("ex", "http://example.org/").unwrap();
    g.add_node(
        ProvNode::new(iri("ex:series1"), ProvClass::ImageSeries)
            .with_attr(iri("ex:modality"), Literal::string("MR"))
            .with_attr(iri("ex:note"), Literal::string("T2w \"axial\" ≥ 3 mm, ü")),
    )
    .unwrap();
    g.add_node(ProvNode::new(iri("ex:mask1"), ProvClass::SegmentationMask))
        .unwrap();
    g.add_node(
        ProvNode::new(iri("ex:seg"), ProvClass::DataCuration)
            .with_attr(iri("ex:dice"), Literal::decimal(0.812).unwrap())
            .with_attr(iri("ex:epochs"), Literal::integer(2)),
    )
    .unwrap();
    g.add_node(ProvNode::new(iri("ex:radiologist"), ProvClass::Person))
        .unwrap();
    for (s, r, o) in [
        ("ex:seg", Relation::Used, "ex:series1"),
        ("ex:mask1", Relation::WasGeneratedBy, "ex:seg"),
        ("ex:seg", Relation::WasAssociatedWith, "ex:radiologist"),
    ] {
        g.add_edge(ProvEdge::new(iri(s), r, iri(o))).unwrap();
    }
    g
}

#[test]
fn graph_digest_matches_reference() {
    let bytes = fixed_graph().to_canonical_json().unwrap();
    assert_eq!(hash_bytes(&bytes).sha256_hex(), GRAPH_SHA256);
}

#[test]
fn canonical_form_is_a_fixed_point() {
    let bytes = fixed_graph().to_canonical_json().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(canonical::to_vec(&v), bytes);
    assert_eq!(canonical::sha256_hex(&v), GRAPH_SHA256);
}

#[test]
fn object_digests_match_reference_vectors() {
    let empty = hash_bytes(b"");
    assert_eq!(empty.md5_hex(), "d41d8cd98f00b204e9800998ecf8427e");
    assert_eq!(
        empty.sha256_hex(),
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    );
    let abc = hash_bytes(b"abc");
    assert_eq!(abc.md5_hex(), "900150983cd24fb0d6963f7d28e17f72");
    assert_eq!(
        abc.sha256_hex(),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
}

const GRAPH_SHA256: &str = "32b60836dcf1e6d567a79263e6bd76cfe2bddfbdc1f4dc6272378d4fbf419e22";
