use std::fs;

use jumpmix::chain::{hypercube_walk, lazy_cycle_walk};
use jumpmix::io::{load_matrix, load_permutation, matrix_to_csv, permutation_to_line};
use jumpmix::{Error, Permutation};

#[test]
fn matrix_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for p in [lazy_cycle_walk(7).unwrap(), hypercube_walk(3).unwrap()] {
        let path = dir.path().join("p.csv");
        fs::write(&path, matrix_to_csv(&p)).unwrap();
        let (loaded, report) = load_matrix(&path).unwrap();
        assert_eq!(loaded, p);
        assert!(report.all_passed());
    }
}

#[test]
fn loader_reports_assumption_failures_separately() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("blocks.csv");
    fs::write(&path, "# two blocks\n0.5,0.5,0,0\n0.5,0.5,0,0\n0,0,0.5,0.5\n0,0,0.5,0.5\n").unwrap();
    let (_, report) = load_matrix(&path).unwrap();
    assert!(!report.irreducible.passed);
    assert!(report.positive_diagonal.passed && report.doubly_stochastic.passed);

    fs::write(&path, "0.5,0.4\n0.5,0.5\n").unwrap();
    assert!(matches!(load_matrix(&path), Err(Error::Structural(_))));
}

#[test]
fn permutation_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.txt");
    let f = Permutation::random(40, 9);
    fs::write(&path, permutation_to_line(&f)).unwrap();
    assert_eq!(load_permutation(&path).unwrap(), f);

    fs::write(&path, "0 1 1\n").unwrap();
    assert!(load_permutation(&path).is_err());
    assert!(matches!(load_permutation(&dir.path().join("missing")), Err(Error::Io(_))));
}
