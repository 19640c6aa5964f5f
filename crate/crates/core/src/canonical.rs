//! Canonical JSON encoding.
//!
//! Object keys are sorted bytewise, there is no insignificant whitespace and
//! output is UTF-8. Every hash in the crate that is computed over a structured
//! document goes through [`to_vec`], so this encoding is part of the on-disk
//! contract and must not change.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Encode a JSON value canonically.
pub fn to_vec(value: &Value) -> Vec<u8> {
    let mut out = Vec::with_capacity(256);
    write_value(value, &mut out);
    out
}

/// Serialize any value to canonical JSON bytes.
pub fn to_canonical<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let v = serde_json::to_value(value)?;
    Ok(to_vec(&v))
}

/// Lowercase hex sha256 of the canonical encoding.
pub fn sha256_hex(value: &Value) -> String {
    hex::encode(Sha256::digest(to_vec(value)))
}

fn write_value(value: &Value, out: &mut Vec<u8>) {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push(b'{');
            for (i, (k, v)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_string(k, out);
                out.push(b':');
                write_value(v, out);
            }
            out.push(b'}');
        }
        Value::Array(items) => {
            out.push(b'[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(v, out);
            }
            out.push(b']');
        }
        Value::String(s) => write_string(s, out),
        // serde_json already prints numbers in shortest round-trip form.
        other => out.extend_from_slice(other.to_string().as_bytes()),
    }
}

fn write_string(s: &str, out: &mut Vec<u8>) {
    out.push(b'"');
    for c in s.chars() {
        match c {
            '"' => out.extend_from_slice(b"\\\""),
            '\\' => out.extend_from_slice(b"\\\\"),
            '\n' => out.extend_from_slice(b"\\n"),
            '\r' => out.extend_from_slice(b"\\r"),
            '\t' => out.extend_from_slice(b"\\t"),
            '\u{8}' => out.extend_from_slice(b"\\b"),
            '\u{c}' => out.extend_from_slice(b"\\f"),
            c if (c as u32) < 0x20 => {
                out.extend_from_slice(format!("\\u{:04x}", c as u32).as_bytes());
            }
            c => {
                let mut buf = [0u8; 4];
                out.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
            }
        }
    }
    out.push(b'"');
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_sorted_bytewise_and_compact() {
        let v = json!({"b": 1, "a": [true, null, "x"], "Z": {"y": 2, "x": 1}});
        assert_eq!(
            String::from_utf8(to_vec(&v)).unwrap(),
            r#"{"Z":{"x":1,"y":2},"a":[true,null,"x"],"b":1}"#
        );
    }

    #[test]
    fn escapes_controls_and_keeps_unicode() {
        let v = json!({"k": "a\"b\\c\n\u{1}é"});
        assert_eq!(
            String::from_utf8(to_vec(&v)).unwrap(),
            "{\"k\":\"a\\\"b\\\\c\\n\\u0001é\"}"
        );
    }

    #[test]
    fn reparse_is_identity() {
        let v = json!({"z": [1, 2.5, -3], "m": {"é": "ü", "e": ""}});
        let bytes = to_vec(&v);
        let back: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, v);
        assert_eq!(to_vec(&back), bytes);
    }
}
