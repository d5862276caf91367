use eofkit::duality::{conjugate_e, dual_lower_bound, g_direct, g_eigen, g_subadditivity_gap};
use eofkit::optim::SearchOptions;
use eofkit::purity::{
    embed_channel_as_filter, multiplicativity_gap, nu_q, purity_duality_check, trotter_sweep,
    KrausChannel, DEFAULT_P_GRID,
};
use eofkit::roof::{
    ensemble_from_mixing, eof_roof, wootters_eof, Ensemble, RoofOptions, RoofParameterization,
};
use eofkit::spectra::{
    eigh, eigh_matrix, kron_states, kron_sum, partial_trace, regroup_state, sample, schatten_norm,
    von_neumann_entropy, BipartiteDims, CMat, DensityMatrix, HermitianOperator, Subsystem, C64,
};
use proptest::prelude::*;

fn search() -> SearchOptions {
    SearchOptions::default().with_restarts(6).with_seed(1)
}

fn roof() -> RoofOptions {
    RoofOptions::default().with_restarts(8).with_seed(1)
}

fn qubits() -> BipartiteDims {
    BipartiteDims::single(2, 2)
}

fn density(dims: BipartiteDims, seed: u64) -> DensityMatrix {
    sample::ginibre_density(&mut sample::rng_for(seed, 0), dims)
}

fn hermitian(dims: BipartiteDims, seed: u64) -> HermitianOperator {
    sample::hermitian(&mut sample::rng_for(seed, 1), dims)
}

fn filter_m(dims: BipartiteDims, seed: u64) -> HermitianOperator {
    sample::filter_m(&mut sample::rng_for(seed, 2), dims)
}

/// Kraus elements from the first `d` columns of a Haar unitary on `d·k`.
fn random_channel(d: usize, k: usize, seed: u64) -> KrausChannel {
    let u = sample::haar_unitary(&mut sample::rng_for(seed, 3), d * k);
    let elements = (0..k)
        .map(|i| u.view((i * d, 0), (d, d)).into_owned())
        .collect();
    KrausChannel::new(elements).unwrap()
}

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

fn costly() -> ProptestConfig {
    ProptestConfig::with_cases(12)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn eigh_reconstructs(seed in any::<u64>(), k in 0usize..4) {
        let dims = [(2, 2), (3, 3), (3, 9), (9, 9)][k];
        let h = hermitian(BipartiteDims::single(dims.0, dims.1), seed);
        let s = eigh(&h).unwrap();
        let norm = h.matrix().norm();
        prop_assert!((s.reconstruct() - h.matrix()).norm() <= 1e-10 * norm);
    }

    #[test]
    fn partial_trace_is_a_state(seed in any::<u64>(), b in 2usize..4) {
        let rho = density(BipartiteDims::single(2, b), seed);
        for side in [Subsystem::A, Subsystem::B] {
            let red = partial_trace(&rho, side, 0).unwrap();
            prop_assert!((red.trace() - 1.0).abs() < 1e-12);
            prop_assert!(red.spectrum().unwrap().min() > -1e-12);
        }
    }

    #[test]
    fn schatten_norms_decrease_in_q(seed in any::<u64>()) {
        let rho = density(qubits(), seed);
        let qs = [1.0, 1.5, 2.0, 3.0, 5.0, 10.0, f64::INFINITY];
        let norms: Vec<f64> = qs.iter().map(|&q| schatten_norm(rho.matrix(), q).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        prop_assert!(norms.iter().all(|&n| norms[6] <= n + 1e-12));
    }

    #[test]
    fn kron_sum_spectrum_is_pairwise_sums(seed in any::<u64>(), a in 1usize..3, b in 1usize..3) {
        let dims = BipartiteDims::single(a, b);
        let x1 = hermitian(dims, seed);
        let x2 = hermitian(dims, seed ^ 0x55);
        let got = eigh(&kron_sum(&x1, &x2).unwrap()).unwrap().eigenvalues;
        let e1 = eigh(&x1).unwrap().eigenvalues;
        let e2 = eigh(&x2).unwrap().eigenvalues;
        let mut want: Vec<f64> = e1.iter().flat_map(|u| e2.iter().map(move |v| u + v)).collect();
        want.sort_by(f64::total_cmp);
        let mut got: Vec<f64> = got.to_vec();
        got.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_is_additive(seed in any::<u64>()) {
        let r1 = density(qubits(), seed);
        let r2 = density(qubits(), seed ^ 0xabc);
        let joint = von_neumann_entropy(&kron_states(&r1, &r2).unwrap()).unwrap();
        let sum = von_neumann_entropy(&r1).unwrap() + von_neumann_entropy(&r2).unwrap();
        prop_assert!((joint - sum).abs() < 1e-9);
    }

    #[test]
    fn weak_duality(seed in any::<u64>()) {
        let rho = density(qubits(), seed);
        let x = hermitian(qubits(), seed ^ 7);
        let bound = dual_lower_bound(&rho, &x, &search()).unwrap();
        prop_assert!(bound <= wootters_eof(&rho).unwrap() + 1e-6);
    }
}

proptest! {
    #![proptest_config(costly())]

    #[test]
    fn roof_brackets_closed_form(seed in any::<u64>()) {
        let rho = density(qubits(), seed);
        let r = eof_roof(&rho, &roof()).unwrap();
        let exact = wootters_eof(&rho).unwrap();
        prop_assert!(r.value >= exact - 1e-6);
        let rank = rho.rank().unwrap();
        let start = ensemble_from_mixing(&rho, &RoofParameterization::eigen(rank, rank * rank).unwrap())
            .unwrap()
            .average_entanglement();
        prop_assert!(r.value <= start + 1e-12);
        prop_assert!(r.ensemble.realizes(&rho));
    }

    #[test]
    fn roof_is_subadditive_on_products(seed in any::<u64>()) {
        let r1 = density(qubits(), seed);
        let r2 = density(qubits(), seed ^ 0x99);
        let e1 = eof_roof(&r1, &roof()).unwrap();
        let e2 = eof_roof(&r2, &roof()).unwrap();
        let product = e1.ensemble.grouped_product(&e2.ensemble).unwrap();
        let joint = regroup_state(&kron_states(&r1, &r2).unwrap()).unwrap();
        prop_assert!(product.realizes(&joint));
        prop_assert!(product.average_entanglement() <= e1.value + e2.value + 1e-4);
    }

    #[test]
    fn roof_bounds_are_convex(seed in any::<u64>(), t in 0.05f64..0.95) {
        let r1 = density(qubits(), seed);
        let r2 = density(qubits(), seed ^ 0x77);
        let e1 = eof_roof(&r1, &roof()).unwrap();
        let e2 = eof_roof(&r2, &roof()).unwrap();
        let mix = DensityMatrix::mixture(&[(t, &r1), (1.0 - t, &r2)]).unwrap();
        let merged = Ensemble::new(
            e1.ensemble.members().iter().map(|(w, s)| (t * w, s.clone()))
                .chain(e2.ensemble.members().iter().map(|(w, s)| ((1.0 - t) * w, s.clone())))
                .collect(),
        )
        .unwrap();
        prop_assert!(merged.realizes(&mix));
        let bound = t * e1.value + (1.0 - t) * e2.value;
        prop_assert!((merged.average_entanglement() - bound).abs() < 1e-9);
        prop_assert!(wootters_eof(&mix).unwrap() <= bound + 1e-4);
    }

    #[test]
    fn larger_cardinality_never_hurts(seed in any::<u64>()) {
        let rho = density(qubits(), seed);
        let rank = rho.rank().unwrap();
        let small = eof_roof(&rho, &roof().with_cardinality(rank)).unwrap().value;
        let large = eof_roof(&rho, &roof().with_cardinality(rank * rank)).unwrap().value;
        prop_assert!(large <= small + 1e-6, "{large} > {small}");
    }

    #[test]
    fn conjugate_shifts_with_identity(seed in any::<u64>(), shift in -3.0f64..3.0) {
        let x = hermitian(qubits(), seed);
        let base = conjugate_e(&x, &search()).unwrap().value;
        let moved = conjugate_e(&x.shift(shift), &search()).unwrap().value;
        prop_assert!((moved - base - shift).abs() < 1e-9);
    }

    #[test]
    fn conjugate_is_convex(seed in any::<u64>(), t in 0.0f64..1.0) {
        let x1 = hermitian(qubits(), seed);
        let x2 = hermitian(qubits(), seed ^ 0x1234);
        let mid = HermitianOperator::new(
            qubits(),
            x1.matrix() * C64::new(t, 0.0) + x2.matrix() * C64::new(1.0 - t, 0.0),
        )
        .unwrap();
        let f = |x: &HermitianOperator| conjugate_e(x, &search()).unwrap().value;
        prop_assert!(f(&mid) <= t * f(&x1) + (1.0 - t) * f(&x2) + 1e-6);
    }

    #[test]
    fn g_forms_agree(seed in any::<u64>(), wide in any::<bool>(), singular in any::<bool>()) {
        let dims = if wide { BipartiteDims::single(2, 3) } else { qubits() };
        let mut m = filter_m(dims, seed);
        if singular {
            let s = eigh(&m).unwrap();
            let kept = s.apply(|x| if x == s.min() { 0.0 } else { x });
            m = HermitianOperator::new(dims, kept).unwrap();
        }
        let d = g_direct(&m, &search()).unwrap().value.to_f64();
        let e = g_eigen(&m, &search()).unwrap().value.to_f64();
        prop_assert!((d - e).abs() <= 1e-6, "{d} vs {e}");
    }

    #[test]
    fn g_is_monotone(seed in any::<u64>(), t in 0.01f64..1.0) {
        let m1 = filter_m(qubits(), seed);
        // M₂ − M₁ = t(𝕀 − M₁)/(1 + t) ≥ 0 and M₂ ≤ 𝕀.
        let m2 = HermitianOperator::new(
            qubits(),
            (m1.matrix() + CMat::identity(4, 4) * C64::new(t, 0.0)) * C64::new(1.0 / (1.0 + t), 0.0),
        )
        .unwrap();
        let g1 = g_eigen(&m1, &search()).unwrap().value.to_f64();
        let g2 = g_eigen(&m2, &search()).unwrap().value.to_f64();
        prop_assert!(g1 <= g2 + 1e-8);
    }

    #[test]
    fn g_is_superadditive(seed in any::<u64>()) {
        let m1 = filter_m(qubits(), seed);
        let m2 = filter_m(qubits(), seed ^ 0xf00d);
        let r = g_subadditivity_gap(&m1, &m2, &search()).unwrap();
        prop_assert!(r.gap.lhs >= r.gap.rhs - 1e-4, "{:?}", r.gap);
    }

    #[test]
    fn h_p_is_output_purity(seed in any::<u64>(), k in 0usize..3) {
        let p = [0.2, 0.5, 0.8][k];
        let r = purity_duality_check(&filter_m(qubits(), seed), p, &search()).unwrap();
        prop_assert!(r.difference.abs() <= 1e-6, "{r:?}");
    }

    #[test]
    fn trotter_sweep_is_monotone(seed in any::<u64>()) {
        let s = trotter_sweep(&filter_m(qubits(), seed), &DEFAULT_P_GRID, &search()).unwrap();
        prop_assert!(s.monotone);
        prop_assert!(s.final_gap <= 1e-3);
    }

    #[test]
    fn embedding_keeps_output_purity(seed in any::<u64>(), d in 2usize..4, k in 0usize..3) {
        let q = [1.2, 2.0, 5.0][k];
        let ch = random_channel(d, 2, seed);
        let emb = embed_channel_as_filter(&ch, 1.0 - 1.0 / q).unwrap();
        let direct = nu_q(&ch, q, &search()).unwrap().value;
        let via = nu_q(&emb.filter.channel().unwrap(), q, &search()).unwrap().value;
        prop_assert!((direct - via).abs() <= 1e-6, "{direct} vs {via}");
    }

    #[test]
    fn products_bound_joint_purity(seed in any::<u64>(), q in 1.1f64..6.0) {
        let l1 = random_channel(2, 2, seed);
        let l2 = random_channel(2, 3, seed ^ 3);
        let r = multiplicativity_gap(&l1, &l2, q, &search()).unwrap();
        prop_assert!(r.joint.value >= r.single[0].value * r.single[1].value - 1e-6);
    }

    #[test]
    fn output_purity_decreases_in_q(seed in any::<u64>()) {
        let ch = random_channel(2, 2, seed);
        let vals: Vec<f64> = [1.0, 1.5, 2.0, 4.0, f64::INFINITY]
            .iter()
            .map(|&q| nu_q(&ch, q, &search()).unwrap().value)
            .collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9, "{vals:?}");
        }
    }
}

#[test]
fn sampled_channels_are_trace_preserving() {
    let ch = random_channel(3, 2, 4);
    assert!(ch.is_trace_preserving());
    let e = eigh_matrix(&ch.effect()).unwrap();
    assert!((e.max() - 1.0).abs() < 1e-12 && (e.min() - 1.0).abs() < 1e-12);
}
