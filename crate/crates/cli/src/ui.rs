use std::io::Write;

use serde_json::Value;

/// Human output goes to stdout, or to stderr when stdout is reserved for JSON.
pub struct Ui {
    json: bool,
}

impl Ui {
    pub fn new(json: bool) -> Self {
        Self { json }
    }

    pub fn say(&self, line: impl AsRef<str>) {
        if self.json {
            eprintln!("{}", line.as_ref());
        } else {
            println!("{}", line.as_ref());
        }
    }

    pub fn warn(&self, line: impl AsRef<str>) {
        eprintln!("warning: {}", line.as_ref());
    }

    pub fn error(&self, line: impl AsRef<str>) {
        eprintln!("error: {}", line.as_ref());
    }

    /// The machine-readable result, when `--json` is set.
    pub fn document(&self, v: &Value) {
        if self.json {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(&aimp_core::canonical::to_vec(v));
            let _ = out.write_all(b"\n");
        }
    }
}
