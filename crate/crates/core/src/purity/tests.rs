use super::*;
use crate::spectra::{kron, partial_trace, KronLevel, Subsystem};
use crate::spectra::{DensityMatrix, PureStateVector};

fn opts() -> SearchOptions {
    SearchOptions::default().with_restarts(8).with_seed(2)
}

fn random_m(dims: BipartiteDims, seed: u64) -> HermitianOperator {
    match sample::sample(sample::SampleKind::FilterM, dims, seed) {
        sample::Sample::Operator(h) => h,
        _ => unreachable!(),
    }
}

fn id_tensor_sigma(da: usize, sigma: &[f64]) -> HermitianOperator {
    let ia = HermitianOperator::identity(BipartiteDims::single(da, 1));
    let s = HermitianOperator::from_real_diagonal(BipartiteDims::single(1, sigma.len()), sigma)
        .unwrap();
    kron(&ia, &s, KronLevel::AB).unwrap()
}

#[test]
fn identity_channel_is_pure() {
    for q in [1.0, 1.5, 2.0, 5.0, f64::INFINITY] {
        let v = nu_q(&KrausChannel::identity(3), q, &opts()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12, "q={q}: {v}");
    }
}

#[test]
fn werner_holevo_outputs() {
    let ch = werner_holevo_channel(3).unwrap();
    assert!(ch.is_trace_preserving());
    let mut rng = sample::rng_for(4, 0);
    let phi = sample::haar_vector(&mut rng, 3);
    let out = ch.apply(&(&phi * phi.adjoint())).unwrap();
    let ev = eigh_matrix(&out).unwrap().eigenvalues;
    for (got, want) in ev.iter().zip([0.5, 0.5, 0.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    // (𝕀 − Φᵀ)/2 for the same input.
    let expected = (CMat::identity(3, 3) - (&phi * phi.adjoint()).transpose()) * c(0.5, 0.0);
    assert!((out - expected).camax() < 1e-12);
    let v = nu_q(&ch, 5.0, &opts()).unwrap().value;
    assert!((v - 2f64.powf(-0.8)).abs() < 1e-9, "{v}");
    let qubit = nu_q(&werner_holevo_channel(2).unwrap(), 3.0, &opts())
        .unwrap()
        .value;
    assert!((qubit - 1.0).abs() < 1e-10);
    assert!(werner_holevo_channel(1).is_err());
}

#[test]
fn filter_channel_matches_direct_formula() {
    let dims = BipartiteDims::single(2, 3);
    let m = random_m(dims, 11);
    let p = 0.4;
    let ch = filter_channel(&m, p).unwrap();
    assert_eq!(ch.elements().len(), 2);
    let mp = matrix_fn_raw(m.matrix(), MatrixFunction::Power(p)).unwrap();
    assert!((ch.effect() - mp).camax() < 1e-9);
    let mut rng = sample::rng_for(12, 0);
    let psi = sample::haar_pure(&mut rng, dims).projector();
    let k = matrix_fn_raw(m.matrix(), MatrixFunction::Power(p / 2.0)).unwrap();
    let sandwiched = DensityMatrix::from_unnormalized(dims, &k * psi.matrix() * &k).unwrap();
    let scale = (&k * psi.matrix() * &k).trace().re;
    let direct = partial_trace(&sandwiched, Subsystem::A, 0).unwrap();
    let via_kraus = ch.apply(psi.matrix()).unwrap();
    assert!((via_kraus.clone() - direct.matrix() * c(scale, 0.0)).camax() < 1e-10);
    assert!(via_kraus.trace().re <= 1.0 + 1e-12);
}

#[test]
fn identity_filter_has_two_elements() {
    let m = HermitianOperator::identity(BipartiteDims::single(2, 2));
    let ch = filter_channel(&m, 0.5).unwrap();
    assert_eq!(ch.elements().len(), 2);
    assert!(ch.is_trace_preserving());
}

#[test]
fn filter_rejects_bad_inputs() {
    let m = HermitianOperator::identity(BipartiteDims::single(2, 2));
    assert!(matches!(
        FilterOp::new(m.clone(), 1.0),
        Err(Error::Domain(_))
    ));
    assert!(matches!(h_p(&m, 0.0, &opts()), Err(Error::Domain(_))));
    assert!(matches!(h_p(&m, 1.5, &opts()), Err(Error::Domain(_))));
    let big = m.scale(1.1);
    assert!(matches!(FilterOp::new(big, 0.5), Err(Error::Domain(_))));
}

#[test]
fn h_p_trivial_cases() {
    let dims = BipartiteDims::single(2, 2);
    for p in [1.0, 0.5, 0.1] {
        let one = h_p(&HermitianOperator::identity(dims), p, &opts()).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
        let m = id_tensor_sigma(2, &[0.3, 0.8]);
        let v = h_p(&m, p, &opts()).unwrap().value;
        assert!((v - 0.8f64.powf(p)).abs() < 1e-10, "p={p}: {v}");
    }
}

#[test]
fn h_p_equals_output_purity() {
    for (seed, p) in [(1, 0.2), (2, 0.5), (3, 0.8)] {
        let m = random_m(BipartiteDims::single(2, 2), seed);
        let r = purity_duality_check(&m, p, &opts()).unwrap();
        assert!(r.agree, "{r:?}");
    }
}

#[test]
fn sweep_on_local_operator_is_exact() {
    let m = id_tensor_sigma(2, &[0.3, 0.8]);
    let s = trotter_sweep(&m, &DEFAULT_P_GRID, &opts()).unwrap();
    assert_eq!(s.rows.len(), DEFAULT_P_GRID.len());
    for r in &s.rows {
        assert!(r.gap.abs() < 1e-9, "{r:?}");
    }
}

#[test]
fn sweep_converges_monotonically() {
    let m = random_m(BipartiteDims::single(2, 2), 21);
    let s = trotter_sweep(&m, &DEFAULT_P_GRID, &opts()).unwrap();
    assert!(s.monotone, "{:?}", s.rows);
    assert!(s.min_gap >= -1e-8, "{}", s.min_gap);
    assert!(s.final_gap <= 1e-3, "{}", s.final_gap);
}

#[test]
fn sweep_rejects_bad_grids() {
    let m = HermitianOperator::identity(BipartiteDims::single(2, 2));
    assert!(matches!(
        trotter_sweep(&m, &[], &opts()),
        Err(Error::Parameter(_))
    ));
    assert!(trotter_sweep(&m, &[0.1, 0.5], &opts()).is_err());
}

#[test]
fn embedding_preserves_output_purity() {
    let wh = werner_holevo_channel(3).unwrap();
    let emb = embed_channel_as_filter(&wh, 0.5).unwrap();
    let u = &emb.unitary;
    let n = u.nrows();
    assert!((u.adjoint() * u - CMat::identity(n, n)).camax() < 1e-10);
    let v = nu_q(&emb.filter.channel().unwrap(), 5.0, &opts())
        .unwrap()
        .value;
    assert!((v - 2f64.powf(0.2) / 2.0).abs() < 1e-6, "{v}");

    let id = embed_channel_as_filter(&KrausChannel::identity(2), 0.5).unwrap();
    for q in [1.5, 2.0, 5.0] {
        let v = nu_q(&id.filter.channel().unwrap(), q, &opts())
            .unwrap()
            .value;
        assert!((v - 1.0).abs() < 1e-9);
    }
}

#[test]
fn embedding_rejects_non_square() {
    let m = random_m(BipartiteDims::single(2, 2), 3);
    let ch = filter_channel(&m, 0.5).unwrap();
    assert!(matches!(
        embed_channel_as_filter(&ch, 0.5),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn general_filter_reduces_to_coupled_case() {
    let dims = BipartiteDims::single(2, 2);
    let one = general_filter_purity(&HermitianOperator::identity(dims), 3.0, &opts()).unwrap();
    assert!((one.value - 1.0).abs() < 1e-12);
    let m = random_m(dims, 5);
    let p = 0.5;
    let x = HermitianOperator::new(
        dims,
        matrix_fn_raw(m.matrix(), MatrixFunction::Power(p / 2.0)).unwrap(),
    )
    .unwrap();
    let gen = general_filter_purity(&x, 2.0, &opts()).unwrap().value;
    let hp = h_p(&m, p, &opts()).unwrap().value;
    assert!((gen - hp).abs() < 1e-6, "{gen} vs {hp}");
}

#[test]
fn werner_holevo_multiplicativity_violation() {
    let wh = werner_holevo_channel(3).unwrap();
    let r = multiplicativity_gap(&wh, &wh, 5.0, &opts()).unwrap();
    // Output on the maximally entangled input: spectrum {1/3, 1/12 ×8}.
    let joint: f64 = (3f64.powi(-5) + 8.0 * 12f64.powi(-5)).powf(0.2);
    let expected = 2.0 * 2f64.powf(-0.8).ln() - joint.ln();
    assert!(r.gap.gap <= expected + 1e-9, "{:?}", r.gap);
    assert!(r.gap.gap < -1e-3);
    let witness = PureStateVector::maximally_entangled(3);
    let at = output_norm(&wh.tensor(&wh), 5.0, witness.amplitudes());
    assert!((at - joint).abs() < 1e-12);
}

#[test]
fn identity_pair_is_multiplicative() {
    let id = KrausChannel::identity(2);
    let r = multiplicativity_gap(&id, &id, 2.0, &opts()).unwrap();
    assert!(r.gap.gap.abs() < 1e-12);
}

#[test]
fn channel_json_round_trip() {
    let wh = werner_holevo_channel(3).unwrap();
    let text = wh.to_json().to_string();
    assert_eq!(KrausChannel::from_json(&text).unwrap(), wh);
    let bad = r#"{"kraus":[[[[1,0]]]],"in_dim":2,"out_dim":1}"#;
    let err = KrausChannel::from_json(bad).unwrap_err();
    assert!(
        matches!(err, Error::Schema { ref field, .. } if field == "kraus[0]"),
        "{err}"
    );
}
