//! Sweep determinism, CSV and JSON round trips, and the rendered report.

use qipm_core::svm;
use qipm_lab::format::{read_document, write_document, DatasetFile, Document, InstanceFile};
use qipm_lab::report::{render, REFERENCE_EXPONENTS};
use qipm_lab::sweep::{read_csv, run_seed, sweep, write_csv, RunRecord, SweepConfig, CSV_HEADER};

fn small() -> SweepConfig {
    SweepConfig {
        n_values: vec![4, 8],
        per_cell: 2,
        p_grid: vec![0.0, 0.5],
        timing: false,
        workers: Some(2),
        ..SweepConfig::default()
    }
}

fn csv_bytes(records: &[RunRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).unwrap();
    buf
}

#[test]
fn sweep_is_reproducible_and_ordered() {
    let cfg = small();
    let a = sweep(&cfg).unwrap();
    assert_eq!(a.len(), 8);
    let b = sweep(&SweepConfig { workers: Some(1), ..cfg.clone() }).unwrap();
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    for w in a.windows(2) {
        let key = |r: &RunRecord| (r.n, r.p.to_bits(), r.seed);
        assert!(key(&w[0]) <= key(&w[1]));
    }
    for r in &a {
        assert!(r.converged, "{r:?}");
        assert_eq!(r.m, 2 * r.n);
        assert_eq!(r.wall_time, 0.0);
        assert!(r.cost_metric > 0.0 && r.kappa_max >= 1.0 && r.zeta_max >= 1.0);
    }
    let seeds: std::collections::BTreeSet<u64> = a.iter().map(|r| r.seed).collect();
    assert_eq!(seeds.len(), a.len());
    assert_eq!(a[0].seed.min(a[1].seed), run_seed(0, 4, 0, 0).min(run_seed(0, 4, 0, 1)));
}

#[test]
fn single_instance_cell() {
    let cfg = SweepConfig {
        n_values: vec![4],
        per_cell: 1,
        p_grid: vec![0.2],
        ..small()
    };
    let recs = sweep(&cfg).unwrap();
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0].seed, run_seed(0, 4, 0, 0));
}

#[test]
fn invalid_sweeps_are_rejected() {
    for cfg in [
        SweepConfig { n_values: vec![], ..small() },
        SweepConfig { per_cell: 0, ..small() },
        SweepConfig { p_grid: vec![1.5], ..small() },
        SweepConfig { epsilon: 0.0, ..small() },
        SweepConfig { c: -1.0, ..small() },
    ] {
        assert!(sweep(&cfg).is_err());
    }
}

#[test]
fn csv_round_trip_keeps_nan() {
    let mut recs = sweep(&SweepConfig { n_values: vec![4], p_grid: vec![0.0], ..small() }).unwrap();
    recs[0].converged = false;
    recs[0].cost_metric = f64::NAN;
    let bytes = csv_bytes(&recs);
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert!(!text.contains('\r'));
    let back = read_csv(bytes.as_slice()).unwrap();
    assert_eq!(back.len(), recs.len());
    assert!(back[0].cost_metric.is_nan());
    assert_eq!(back[1], recs[1]);
    assert_eq!(csv_bytes(&back), bytes);
    assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
}

#[test]
fn report_is_deterministic_and_cites_references() {
    let recs = sweep(&small()).unwrap();
    let text = render(&recs);
    assert_eq!(text, render(&recs));
    let line = text.lines().find(|l| l.starts_with("cost_metric: ")).unwrap();
    assert!(line.starts_with("cost_metric: exponent b="), "{line}");
    assert!(line.contains(" ci95=[") && line.contains(" n=8 "), "{line}");
    for (name, b, lo, hi) in REFERENCE_EXPONENTS {
        assert!(text.contains(&format!("{name}: b={b:.3} ci95=[{lo:.3},{hi:.3}]")));
    }
    assert!(text.contains("2.591"));
    assert!(text.contains("fraction with |difference| <= 0.05"));
}

#[test]
fn empty_report_says_no_data() {
    let text = render(&[]);
    assert!(text.contains("cost_metric: no data"));
    assert_eq!(text.matches("no data").count(), 6);
}

#[test]
fn documents_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = svm::generate(3, 7, 0.1, 5).unwrap();
    let path = dir.path().join("data.json");
    let doc = Document::Svm(DatasetFile::from_dataset(&train));
    write_document(&path, &doc).unwrap();
    let back = read_document(&path).unwrap();
    assert_eq!(back, doc);
    let Document::Svm(f) = back else { panic!("kind") };
    assert_eq!(f.to_dataset().unwrap(), train);

    let inst = svm::to_socp(&train, 1.0).unwrap();
    let x0 = qipm_core::ipm::initial_point(&inst, None).unwrap().x().clone();
    let doc = Document::Socp(InstanceFile::from_instance(&inst, Some(&x0)));
    write_document(&path, &doc).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"kind\": \"socp\""));
    let Document::Socp(f) = read_document(&path).unwrap() else { panic!("kind") };
    let (again, hint) = f.to_instance().unwrap();
    assert_eq!(again.a(), inst.a());
    assert_eq!(again.b(), inst.b());
    assert_eq!(again.c(), inst.c());
    assert_eq!(hint.unwrap(), x0);
}
