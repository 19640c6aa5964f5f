use std::time::Duration;

use aimp_core::dcat::{
    descriptor_from_triples, descriptors_to_turtle, harvest, parse_turtle, validate_descriptor,
    HarvestError, HarvestOptions, TurtleError,
};
use aimp_testkit::{sample_fdp, MockFdp};

fn opts() -> HarvestOptions {
    HarvestOptions {
        timeout: Duration::from_secs(5),
        ..HarvestOptions::default()
    }
}

#[test]
fn catalog_yields_every_dataset() {
    let fdp = sample_fdp();
    let result = harvest(&fdp.url("/catalog/procancer"), &opts()).unwrap();
    let ids: Vec<_> = result
        .descriptors
        .iter()
        .map(|h| h.descriptor.id.as_str())
        .collect();
    assert_eq!(
        ids,
        [fdp.url("/dataset/followup"), fdp.url("/dataset/mpmri")]
    );
    for h in &result.descriptors {
        assert!(
            validate_descriptor(&h.descriptor).is_empty(),
            "{:?}",
            h.descriptor
        );
        assert!(h.source_url.starts_with(fdp.base()));
    }
}

#[test]
fn cohort_size_survives_unchanged() {
    let fdp = sample_fdp();
    let result = harvest(&fdp.url("/dataset/mpmri"), &opts()).unwrap();
    let d = &result.descriptors[0].descriptor;
    let patients = d.health_value("numberOfPatients").unwrap();
    assert_eq!(patients.as_i64(), Some(14300));
    assert_eq!(patients.lexical(), "14300");
    assert_eq!(d.publisher.name, "Imaging Consortium");
    assert_eq!(d.health_ext["sequenceTypes"].len(), 3);
    let checksum = d.distributions[0].checksum.as_ref().unwrap();
    assert_eq!(checksum.hex(), "900150983cd24fb0d6963f7d28e17f72");

    let text = descriptors_to_turtle(std::slice::from_ref(d));
    let back = descriptor_from_triples(&parse_turtle(&text).unwrap()).unwrap();
    assert_eq!(&back.descriptors[0], d);
}

#[test]
fn requests_ask_for_turtle() {
    let fdp = sample_fdp();
    harvest(&fdp.url("/dataset/followup"), &opts()).unwrap();
    let seen = fdp.requests();
    assert!(!seen.is_empty());
    for r in seen {
        assert!(r.header("Accept").unwrap().contains("text/turtle"), "{r:?}");
    }
}

#[test]
fn redirects_are_followed() {
    let fdp = sample_fdp();
    let result = harvest(&fdp.url("/fdp"), &opts()).unwrap();
    assert_eq!(result.descriptors.len(), 2);
}

#[test]
fn missing_document_is_an_http_error() {
    let fdp = sample_fdp();
    match harvest(&fdp.url("/dataset/nope"), &opts()) {
        Err(HarvestError::HttpStatus { status: 404, url }) => {
            assert!(url.ends_with("/dataset/nope"))
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn html_body_is_a_syntax_error() {
    let fdp = sample_fdp();
    match harvest(&fdp.url("/html"), &opts()) {
        Err(HarvestError::Syntax {
            source: TurtleError::Syntax { line, .. },
            ..
        }) => assert_eq!(line, 1),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unreachable_host_is_a_network_error() {
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let err = harvest(&format!("http://127.0.0.1:{port}/catalog"), &opts()).unwrap_err();
    assert!(matches!(err, HarvestError::Network { .. }), "{err:?}");
}

#[test]
fn server_errors_are_retried() {
    let fdp = MockFdp::builder()
        .raw("/flaky", 503, "text/plain", "busy")
        .start();
    let opts = HarvestOptions {
        retries: 2,
        ..opts()
    };
    assert!(matches!(
        harvest(&fdp.url("/flaky"), &opts),
        Err(HarvestError::HttpStatus { status: 503, .. })
    ));
    assert_eq!(fdp.requests().len(), 3);
}
