//! Every program under `examples/` builds and runs to completion.

use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: [&str; 10] = [
    "sieve_factor",
    "selberg_weights",
    "mertens_sums",
    "identities",
    "remainders",
    "h_profile",
    "zero_intervals",
    "lambda_iteration",
    "segment_cache",
    "verification_report",
];

fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_mlab")).parent().unwrap().join("examples")
}

#[test]
fn every_example_runs() {
    let status = Command::new(env!("CARGO"))
        .args(["build", "--quiet", "--examples", "--profile", "test", "--manifest-path"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/Cargo.toml"))
        .status()
        .unwrap();
    assert!(status.success());
    for name in EXAMPLES {
        let out = Command::new(examples_dir().join(name)).env_remove("MLAB_CACHE").output().unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
    }
}

#[test]
fn list_covers_the_directory() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/examples");
    let mut found: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    found.sort();
    let mut listed: Vec<String> = EXAMPLES.iter().map(|s| s.to_string()).collect();
    listed.sort();
    assert_eq!(found, listed);
}
