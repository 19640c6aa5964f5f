#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use walkdir::WalkDir;

pub const STAGES: [&str; 4] = ["DICOM2NIFTI", "Preprocess", "Prepare", "Train"];

#[derive(Debug)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    pub fn all(&self) -> String {
        format!("{}{}", self.stdout, self.stderr)
    }
}

pub fn aimp_env(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aimp"));
    cmd.current_dir(dir).args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn aimp");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn aimp(dir: &Path, args: &[&str]) -> Output {
    aimp_env(dir, args, &[])
}

pub fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

/// A fresh copy of the demo workspace, without any run outputs.
pub fn demo_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_tree(&demo_dir(), dir.path());
    dir
}

pub fn copy_tree(from: &Path, to: &Path) {
    for entry in WalkDir::new(from) {
        let entry = entry.unwrap();
        let target = to.join(entry.path().strip_prefix(from).unwrap());
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).unwrap();
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// How often the demo script of `stage` has run in `dir`.
pub fn invocations(dir: &Path, stage: &str) -> usize {
    fs::read_to_string(dir.join(".counts").join(stage))
        .map(|s| s.lines().count())
        .unwrap_or(0)
}

pub fn counts(dir: &Path) -> Vec<usize> {
    STAGES.iter().map(|s| invocations(dir, s)).collect()
}

pub fn flip_byte(path: &Path, at: usize) {
    let mut data = fs::read(path).unwrap();
    let i = at % data.len();
    data[i] ^= 0x01;
    fs::write(path, data).unwrap();
}

/// Runs the demo and builds its passport; returns the passport path.
pub fn built_demo(dir: &Path) -> PathBuf {
    let run = aimp(dir, &["run"]);
    assert_eq!(run.code, 0, "{run:?}");
    let build = aimp(dir, &["passport", "build"]);
    assert_eq!(build.code, 0, "{build:?}");
    dir.join("unet.passport.json")
}

pub fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}
