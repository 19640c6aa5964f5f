use std::fs;
use std::path::Path;
use std::time::Duration;

use aimp_core::cas::Store;
use aimp_core::dcat::{harvest, HarvestOptions, HarvestedDescriptor};
use aimp_core::passport::{
    assemble_at, lineage_graph, training_record, ManualMetadata, ModelPassport, MANUAL_FILE,
};
use aimp_core::pipeline::{
    parse_pipeline, run_pipeline, LockFile, RunOptions, LOCK_FILE, PIPELINE_FILE,
};
use aimp_core::report::{render, RenderOptions};
use aimp_testkit::sample_fdp;
use html5ever::tendril::TendrilSink;
use html5ever::tree_builder::TreeBuilderOpts;
use html5ever::{parse_document, ParseOpts};
use markup5ever_rcdom::RcDom;
use walkdir::WalkDir;

const STAGES: [&str; 4] = ["DICOM2NIFTI", "Preprocess", "Prepare", "Train"];

fn copy_demo(to: &Path) {
    let demo = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo");
    for entry in WalkDir::new(&demo) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(&demo).unwrap();
        let target = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).unwrap();
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

fn demo_passport(datasets: Vec<HarvestedDescriptor>) -> (tempfile::TempDir, ModelPassport) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    copy_demo(root);
    let spec = parse_pipeline(&fs::read_to_string(root.join(PIPELINE_FILE)).unwrap()).unwrap();
    let store = Store::new(root.join(".aimp"));
    let outcome = run_pipeline(&spec, root, &store, &RunOptions::default()).unwrap();
    assert!(outcome.failure.is_none(), "{:?}", outcome.failure);
    let lock = LockFile::load(&root.join(LOCK_FILE)).unwrap().unwrap();
    let manual =
        ManualMetadata::parse(&fs::read_to_string(root.join(MANUAL_FILE)).unwrap()).unwrap();
    let training = training_record(&spec, &lock, &store, root).unwrap();
    let graph = lineage_graph(&spec, &lock, &datasets, &training, &manual).unwrap();
    let p = assemble_at(
        datasets,
        graph,
        lock,
        training,
        manual,
        "2026-01-01T00:00:00.000Z".into(),
    )
    .unwrap();
    (dir, p)
}

fn harvested() -> Vec<HarvestedDescriptor> {
    let fdp = sample_fdp();
    let opts = HarvestOptions {
        timeout: Duration::from_secs(5),
        ..HarvestOptions::default()
    };
    harvest(&fdp.url("/dataset/mpmri"), &opts)
        .unwrap()
        .descriptors
}

fn html_errors(html: &str) -> Vec<String> {
    let opts = ParseOpts {
        tree_builder: TreeBuilderOpts {
            exact_errors: true,
            ..TreeBuilderOpts::default()
        },
        ..ParseOpts::default()
    };
    let dom = parse_document(RcDom::default(), opts).one(html);
    let errors = dom.errors.borrow().iter().map(|e| e.to_string()).collect();
    errors
}

#[test]
fn html_is_well_formed_and_complete() {
    let (_dir, p) = demo_passport(harvested());
    let html = render(&p, &RenderOptions::html()).unwrap();
    assert!(html.starts_with("<!DOCTYPE html>"));
    assert_eq!(html_errors(&html), Vec::<String>::new());
    for stage in STAGES {
        assert!(html.contains(&format!("data-stage=\"{stage}\"")), "{stage}");
    }
    for e in &p.training.evaluations {
        assert!(html.contains(&e.metric_name));
        assert!(html.contains(&e.value));
    }
    assert!(html.contains("14300"));
    assert!(html.contains(&p.identity));
    for needle in ["<script", "<link", "src=\"http", "@import"] {
        assert!(!html.contains(needle), "{needle}");
    }
}

#[test]
fn rendering_is_deterministic() {
    let (_a, p) = demo_passport(harvested());
    let first = render(&p, &RenderOptions::html()).unwrap();
    for _ in 0..3 {
        assert_eq!(render(&p, &RenderOptions::html()).unwrap(), first);
    }
    let reloaded = ModelPassport::load(&p.to_canonical_json().unwrap()).unwrap();
    assert_eq!(render(&reloaded, &RenderOptions::html()).unwrap(), first);
    assert_eq!(
        render(&reloaded, &RenderOptions::markdown()).unwrap(),
        render(&p, &RenderOptions::markdown()).unwrap()
    );
}

#[test]
fn graph_can_be_left_out() {
    let (_dir, p) = demo_passport(Vec::new());
    let opts = RenderOptions {
        include_graph_svg: false,
        ..RenderOptions::html()
    };
    let html = render(&p, &opts).unwrap();
    assert!(!html.contains("<svg"));
    assert_eq!(html_errors(&html), Vec::<String>::new());
    for stage in STAGES {
        assert!(html.contains(stage));
    }
}

#[test]
fn markdown_without_datasets() {
    let (_dir, p) = demo_passport(Vec::new());
    let md = render(&p, &RenderOptions::markdown()).unwrap();
    assert!(md.contains("none recorded"));
    for stage in STAGES {
        assert!(md.contains(stage));
    }
    assert!(md.contains("Dice"));
    assert!(md.contains(&p.training.evaluations[0].value));
}

#[test]
fn inconsistent_passport_is_not_rendered() {
    let (_dir, mut p) = demo_passport(Vec::new());
    p.manual.owner.push_str(" (edited)");
    assert!(render(&p, &RenderOptions::html()).is_err());
}
