use super::*;
use crate::purity::{trotter_sweep, DEFAULT_P_GRID};
use crate::spectra::{kron, HermitianOperator, KronLevel};

fn id_tensor_sigma(sigma: &[f64]) -> HermitianOperator {
    let ia = HermitianOperator::identity(BipartiteDims::single(2, 1));
    let s = HermitianOperator::from_real_diagonal(BipartiteDims::single(1, sigma.len()), sigma)
        .unwrap();
    kron(&ia, &s, KronLevel::AB).unwrap()
}

fn small(kind: GapKind, trials: usize) -> CampaignConfig {
    let mut cfg = CampaignConfig::new(kind, trials, BipartiteDims::single(2, 2), 5);
    cfg.restarts = 4;
    cfg
}

#[test]
fn local_sweep_csv_has_zero_gaps() {
    let opts = SearchOptions::default().with_restarts(4);
    let sweep = trotter_sweep(&id_tensor_sigma(&[0.4, 0.9]), &DEFAULT_P_GRID, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    emit_sweep_csv(&sweep.rows, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), DEFAULT_P_GRID.len() + 1);
    let back = read_sweep_csv(&path).unwrap();
    assert_eq!(back.len(), DEFAULT_P_GRID.len());
    for (a, b) in back.iter().zip(&sweep.rows) {
        assert!(a.gap.abs() <= 1e-12, "{a:?}");
        for (x, y) in [
            (a.p, b.p),
            (a.h_p, b.h_p),
            (a.h_p_pow_inv, b.h_p_pow_inv),
            (a.exp_g, b.exp_g),
        ] {
            assert!((x - y).abs() <= 1e-11 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn csv_keeps_twelve_digits() {
    let row = SweepRow {
        p: 0.1,
        h_p: std::f64::consts::PI,
        h_p_pow_inv: 1.0 / 3.0,
        exp_g: 2e-7,
        gap: -1.234567890123456e-5,
    };
    let text = sweep_csv(&[row]);
    assert_eq!(text.lines().next(), Some(SWEEP_HEADER));
    assert!(text.contains("3.14159265359e0"), "{text}");
}

#[test]
fn csv_reader_names_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, format!("{SWEEP_HEADER}\n1,2,3\n")).unwrap();
    let err = read_sweep_csv(&path).unwrap_err();
    assert!(
        matches!(err, Error::Schema { ref field, .. } if field == "row[0]"),
        "{err}"
    );
}

#[test]
fn campaigns_are_deterministic_and_replay() {
    let cfg = small(GapKind::GSubadd, 3);
    let a = gap_search(&cfg).unwrap();
    let b = gap_search(&cfg).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    for (i, r) in a.iter().enumerate() {
        assert_eq!(r.trial, i);
        assert!(!r.violation, "{r:?}");
        assert!((replay(&cfg, r).unwrap() - r.gap.gap).abs() <= 1e-9);
    }
}

#[test]
fn werner_holevo_campaign_flags_violation() {
    let mut cfg = small(GapKind::NuMult, 1);
    cfg.q = 5.0;
    cfg.werner_holevo = Some(3);
    let recs = gap_search(&cfg).unwrap();
    assert!(recs[0].violation, "{:?}", recs[0].gap);
    assert!(recs[0].transport.as_ref().unwrap().get("witness").is_some());
    assert!((replay(&cfg, &recs[0]).unwrap() - recs[0].gap.gap).abs() <= 1e-9);
}

#[test]
fn campaign_rejects_unsupported_dims() {
    let mut cfg = small(GapKind::StrongSuperadd, 1);
    cfg.dims = BipartiteDims::single(2, 3);
    assert!(matches!(gap_search(&cfg), Err(Error::Unsupported(_))));
    let mut cfg = small(GapKind::NuMult, 1);
    cfg.q = 1.0;
    assert!(matches!(gap_search(&cfg), Err(Error::Parameter(_))));
}

#[test]
fn timings_are_opt_in() {
    let cfg = small(GapKind::GSubadd, 1);
    let recs = gap_search(&cfg).unwrap();
    assert!(!serde_json::to_string(&recs)
        .unwrap()
        .contains("wall_time_ms"));
}

#[test]
fn artifact_carries_config() {
    let config = RunConfig {
        command: "g".into(),
        seed: 9,
        restarts: 3,
        tol: None,
        dims: BipartiteDims::single(2, 2),
        input: None,
        output: None,
        params: Map::new(),
    };
    let text = artifact(&config, json!({"value": 1.0}));
    assert!(text.ends_with('\n'));
    let v: Value = serde_json::from_str(&text).unwrap();
    let back: RunConfig = serde_json::from_value(v["config"].clone()).unwrap();
    assert_eq!(back, config);
}
