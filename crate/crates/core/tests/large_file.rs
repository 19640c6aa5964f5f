//! Kept in its own test binary so no other test shares the process
//! whose peak memory is measured.

use std::fs;
use std::time::Instant;

use aimp_core::cas::{hash_file, Store};

const SIZE: u64 = 100 * 1024 * 1024;
const ZEROS_SHA256: &str = "20492a4d0d84f8beb1767f6616229f85d44c2827b64bdbfb260ee12fa1109e0e";
const ZEROS_MD5: &str = "2f282b84e7e608d5852449ed940bfc51";

fn peak_rss_kib() -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

#[test]
fn hundred_mebibytes_hash_in_bounded_memory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.bin");
    fs::File::create(&path).unwrap().set_len(SIZE).unwrap();

    // resets the peak on Linux; elsewhere the measurement is skipped
    let _ = fs::write("/proc/self/clear_refs", "5");
    let before = peak_rss_kib();
    let started = Instant::now();
    let r = hash_file(&path).unwrap();
    let elapsed = started.elapsed();
    let after = peak_rss_kib();

    assert_eq!(r.sha256_hex(), ZEROS_SHA256);
    assert_eq!(r.md5_hex(), ZEROS_MD5);
    assert_eq!(r.size, SIZE);
    if let (Some(b), Some(a)) = (before, after) {
        let grown = a.saturating_sub(b);
        assert!(grown < 16 * 1024, "peak RSS grew by {grown} KiB");
    }
    assert!(elapsed.as_secs() < 60, "{elapsed:?}");

    // the probe must be able to see a 32 MiB allocation
    if let Some(b) = after {
        let ballast = vec![1u8; 32 * 1024 * 1024];
        let seen = peak_rss_kib().unwrap().saturating_sub(b);
        assert!(ballast.iter().step_by(4096).all(|&x| x == 1));
        assert!(seen >= 24 * 1024, "peak RSS probe saw only {seen} KiB");
    }

    let store = Store::new(dir.path().join("objects"));
    let stored = store.put_file(&path).unwrap();
    assert_eq!(stored, r);
    assert!(store.verify().unwrap().is_empty());
}
