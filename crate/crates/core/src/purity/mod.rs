//! `h_p(M) = max_τ ‖M^{p/2}(𝕀⊗τ)^p M^{p/2}‖`, maximal output purity
//! `ν_q(Λ) = max_φ ‖Λ(Φ)‖_q`, filtering channels, the embedding of a
//! generic channel as a filter, and multiplicativity gaps.

mod channel;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use channel::{
    filter_channel, werner_holevo_channel, FilterOp, KrausChannel, ToChannel, FILTER_TOL, KRAUS_TOL,
};

use crate::duality::{g_eigen, AdditivityGap, GapDirection, TauMap, TauProblem};
use crate::error::{Error, Result};
use crate::optim::{self, Geometry, SearchOptions, Settings};
use crate::spectra::{
    c, eigh_matrix, matrix_fn_raw, sample, schatten_norm, symmetrize, BipartiteDims, CMat, CVec,
    HermitianOperator, MatrixFunction,
};

/// Default `p` grid for [`trotter_sweep`].
pub const DEFAULT_P_GRID: [f64; 10] = [1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];

#[derive(Debug, Clone)]
pub struct HpResult {
    pub value: f64,
    /// `ln(h_p)/p`, kept separately for small `p`.
    pub log_root: f64,
    pub tau: CMat,
    pub boundary: bool,
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("p = {p} must lie in (0, 1]")));
    }
    Ok(())
}

fn hp_problem(m: &HermitianOperator, p: f64) -> Result<TauProblem> {
    m.dims().require_single("h_p")?;
    channel::require_unit_interval(m.matrix(), "h_p")?;
    check_p(p)?;
    Ok(TauProblem {
        dim_a: m.dims().dim_a,
        dim_b: m.dims().dim_b,
        map: TauMap::Power(p),
        kernel: Some(matrix_fn_raw(m.matrix(), MatrixFunction::Power(p / 2.0))?),
        base: None,
        subspace: None,
    })
}

fn hp_with_warm(
    m: &HermitianOperator,
    p: f64,
    warm: &[CMat],
    opts: &SearchOptions,
) -> Result<HpResult> {
    let best = hp_problem(m, p)?.maximize(warm, opts);
    let excess = excess_lambda(m, p, &best.tau)?;
    Ok(HpResult {
        value: 1.0 + excess,
        log_root: excess.ln_1p() / p,
        tau: best.tau,
        boundary: best.boundary,
    })
}

/// `λ_max(K F K) − 1` with `K = M^{p/2}`, `F = 𝕀 ⊗ τ^p`, expanded in
/// `K − 𝕀` and `F − 𝕀` so that `ln(λ)/p` keeps its accuracy as `p → 0`.
fn excess_lambda(m: &HermitianOperator, p: f64, tau: &CMat) -> Result<f64> {
    let near_one = |x: f64, e: f64| {
        if x > 0.0 {
            (e * x.ln()).exp_m1()
        } else {
            -1.0
        }
    };
    let ek = eigh_matrix(m.matrix())?.apply(|x| near_one(x, p / 2.0));
    let et = eigh_matrix(&symmetrize(tau))?.apply(|x| near_one(x, p));
    let da = m.dims().dim_a;
    let ef = CMat::identity(da, da).kronecker(&et);
    let d = &ef + &ek * c(2.0, 0.0) + &ek * &ek + &ek * &ef + &ef * &ek + &ek * &ef * &ek;
    Ok(eigh_matrix(&symmetrize(&d))?.max())
}

pub fn h_p(m: &HermitianOperator, p: f64, opts: &SearchOptions) -> Result<HpResult> {
    hp_with_warm(m, p, &[], opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub h_p: f64,
    pub h_p_pow_inv: f64,
    pub exp_g: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PuritySweep {
    pub rows: Vec<SweepRow>,
    pub g: f64,
    /// `h_p^{1/p}` does not increase down the grid (within `1e−8`).
    pub monotone: bool,
    pub min_gap: f64,
    pub final_gap: f64,
}

/// `h_p^{1/p}` along a descending grid next to `exp g(M)`.
///
/// Each `p` is warm-started from the optimal `τ` of `g` and of its
/// neighbours on the grid (one pass down, one pass up).
pub fn trotter_sweep(
    m: &HermitianOperator,
    p_grid: &[f64],
    opts: &SearchOptions,
) -> Result<PuritySweep> {
    if p_grid.is_empty() {
        return Err(Error::param("p grid is empty"));
    }
    for &p in p_grid {
        check_p(p)?;
    }
    if p_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("p grid must be strictly descending"));
    }
    let g = g_eigen(m, opts)?;
    let g_value = g.value.to_f64();
    let g_tau = g.argmax_tau.map(|t| t.matrix().clone());

    let mut results: Vec<HpResult> = Vec::with_capacity(p_grid.len());
    for (i, &p) in p_grid.iter().enumerate() {
        let mut warm: Vec<CMat> = g_tau.iter().cloned().collect();
        if i > 0 {
            warm.push(results[i - 1].tau.clone());
        }
        results.push(hp_with_warm(m, p, &warm, opts)?);
    }
    for i in (0..p_grid.len().saturating_sub(1)).rev() {
        let warm = [results[i + 1].tau.clone(), results[i].tau.clone()];
        let again = hp_with_warm(m, p_grid[i], &warm, &opts.with_restarts(0))?;
        if again.log_root > results[i].log_root {
            results[i] = again;
        }
    }

    let exp_g = g_value.exp();
    let rows: Vec<SweepRow> = p_grid
        .iter()
        .zip(&results)
        .map(|(&p, r)| {
            let root = r.log_root.exp();
            SweepRow {
                p,
                h_p: r.value,
                h_p_pow_inv: root,
                exp_g,
                gap: root - exp_g,
            }
        })
        .collect();
    let monotone = rows
        .windows(2)
        .all(|w| w[1].h_p_pow_inv <= w[0].h_p_pow_inv + 1e-8);
    let min_gap = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let final_gap = rows.last().map(|r| r.gap).unwrap_or(f64::NAN);
    Ok(PuritySweep {
        rows,
        g: g_value,
        monotone,
        min_gap,
        final_gap,
    })
}

#[derive(Debug, Clone)]
pub struct NuResult {
    pub value: f64,
    /// Maximizing input vector.
    pub witness: CVec,
}

/// `ln ‖Λ(Φ)‖_q` and its Euclidean gradient in `φ`.
fn log_output_norm(ch: &KrausChannel, q: f64, phi: &CVec) -> (f64, CVec) {
    let rho = phi * phi.adjoint();
    let out = crate::spectra::symmetrize(&ch.apply(&rho).expect("input dims match"));
    let s = eigh_matrix(&out).expect("output diagonalizes");
    let top = s.max();
    if !(top > 0.0) {
        return (f64::NEG_INFINITY, CVec::zeros(phi.len()));
    }
    let (value, weight) = if q.is_infinite() {
        let v = s.top_vector();
        (top.ln(), &v * v.adjoint() * c(1.0 / top, 0.0))
    } else {
        let sum: f64 = s
            .eigenvalues
            .iter()
            .map(|&x| (x.max(0.0) / top).powf(q))
            .sum();
        let value = top.ln() + sum.ln() / q;
        let w = s.apply(|x| (x.max(0.0) / top).powf(q - 1.0) / (top * sum));
        (value, w)
    };
    let mut grad = CVec::zeros(phi.len());
    for a in ch.elements() {
        grad += a.adjoint() * (&weight * (a * phi));
    }
    (value, grad * c(2.0, 0.0))
}

/// `ν_q(Λ)`: the largest Schatten `q`-norm of an output on a pure input.
pub fn nu_q(ch: &KrausChannel, q: f64, opts: &SearchOptions) -> Result<NuResult> {
    nu_q_seeded(ch, q, &[], opts)
}

/// [`nu_q`] with extra deterministic starting inputs.
pub fn nu_q_seeded(
    ch: &KrausChannel,
    q: f64,
    seeds: &[CVec],
    opts: &SearchOptions,
) -> Result<NuResult> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::domain(format!("q = {q} must be >= 1")));
    }
    let n = ch.in_dim();
    let effect = eigh_matrix(&crate::spectra::symmetrize(&ch.effect()))?;
    if q == 1.0 {
        return Ok(NuResult {
            value: effect.max(),
            witness: effect.top_vector(),
        });
    }
    let mut starts = vec![effect.top_vector()];
    for s in seeds {
        if s.len() != n {
            return Err(Error::shape(format!(
                "seed has length {}, expected {n}",
                s.len()
            )));
        }
        if s.norm() > 0.0 {
            starts.push(s.unscale(s.norm()));
        }
    }
    let fixed = starts.len();
    let settings = Settings {
        max_iter: opts.max_iter,
        grad_tol: 1e-11,
        f_tol: 1e-16,
        patience: 6,
        memory: 12,
    };
    let runs = optim::run_restarts(
        fixed + opts.restarts,
        opts.seed,
        |i, rng: &mut ChaCha8Rng| {
            let phi0 = if i < fixed {
                starts[i].clone()
            } else {
                sample::haar_vector(rng, n)
            };
            let out = optim::minimize(
                Geometry::Stiefel,
                CMat::from_column_slice(n, 1, phi0.as_slice()),
                |x| {
                    let phi: CVec = x.column(0).into_owned();
                    let (v, g) = log_output_norm(ch, q, &phi);
                    (-v, CMat::from_column_slice(n, 1, (-g).as_slice()))
                },
                &settings,
            );
            let phi: CVec = out.point.column(0).into_owned();
            let phi = phi.unscale(phi.norm());
            let value = output_norm(ch, q, &phi);
            (value, phi)
        },
    );
    let best = optim::argmax_by_key(&runs, |r| r.0).expect("at least one start");
    let (value, witness) = runs[best].clone();
    Ok(NuResult { value, witness })
}

/// `‖Λ(|φ⟩⟨φ|)‖_q` for a unit vector `φ`.
pub fn output_norm(ch: &KrausChannel, q: f64, phi: &CVec) -> f64 {
    let out = ch.apply(&(phi * phi.adjoint())).expect("input dims match");
    schatten_norm(&crate::spectra::symmetrize(&out), q).expect("q >= 1")
}

#[derive(Debug, Clone, Serialize)]
pub struct PurityDualityReport {
    pub p: f64,
    pub q: f64,
    pub h_p: f64,
    pub nu_q: f64,
    pub difference: f64,
    pub agree: bool,
}

/// `h_p(M)` against `ν_q` of the filter channel at `q = 1/(1−p)`.
pub fn purity_duality_check(
    m: &HermitianOperator,
    p: f64,
    opts: &SearchOptions,
) -> Result<PurityDualityReport> {
    let filter = FilterOp::new(m.clone(), p)?;
    let q = filter.conjugate_index();
    let hp = h_p(m, p, opts)?.value;
    let nu = nu_q(&filter.channel()?, q, opts)?.value;
    let difference = hp - nu;
    Ok(PurityDualityReport {
        p,
        q,
        h_p: hp,
        nu_q: nu,
        difference,
        agree: difference.abs() <= 1e-6,
    })
}

/// `ν_q` with `X` in place of `M^{p/2}`: `max_φ ‖Tr_A[XΦX]‖_q`.
pub fn general_filter_purity(
    x: &HermitianOperator,
    q: f64,
    opts: &SearchOptions,
) -> Result<NuResult> {
    x.dims().require_single("general_filter_purity")?;
    channel::require_unit_interval(x.matrix(), "general filter")?;
    let ch = channel::block_row_channel(x.matrix(), x.dims().dim_a, x.dims().dim_b)?;
    nu_q(&ch, q, opts)
}

/// A channel rewritten as a filter with a partial isometry.
#[derive(Debug, Clone)]
pub struct EmbeddedFilter {
    /// `M = U Σ U†` with `Σ = |0⟩⟨0| ⊗ 𝕀`; dims `k × d` for `k` Kraus
    /// elements on a `d`-dimensional system.
    pub filter: FilterOp,
    pub unitary: CMat,
}

/// Completes the orthonormal columns of `v` to a unitary, trying the
/// standard basis vectors in order.
fn complete_unitary(v: &CMat) -> CMat {
    let n = v.nrows();
    let mut cols: Vec<CVec> = (0..v.ncols()).map(|j| v.column(j).into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut u = CVec::zeros(n);
        u[e] = c(1.0, 0.0);
        for _ in 0..2 {
            for b in &cols {
                let proj = b.dotc(&u);
                u -= b * proj;
            }
        }
        let norm = u.norm();
        if norm > 1e-8 {
            cols.push(u.unscale(norm));
        }
    }
    CMat::from_columns(&cols)
}

/// Stinespring form `V|j⟩ = Σᵢ |i⟩ ⊗ Aᵢ|j⟩` of a trace-preserving channel
/// on `C^d`, extended to a unitary `U`; the filter uses `M = VV†`, a
/// projector, so `M^{p/2} = M` for every `p`.
pub fn embed_channel_as_filter(ch: &KrausChannel, p: f64) -> Result<EmbeddedFilter> {
    let d = ch.in_dim();
    if ch.out_dim() != d {
        return Err(Error::Unsupported(format!(
            "embedding needs a channel from C^{d} to itself, got output dim {}",
            ch.out_dim()
        )));
    }
    if !ch.is_trace_preserving() {
        return Err(Error::Unsupported(
            "embedding needs a trace-preserving channel".into(),
        ));
    }
    let k = ch.elements().len();
    let mut v = CMat::zeros(k * d, d);
    for (i, a) in ch.elements().iter().enumerate() {
        v.rows_mut(i * d, d).copy_from(a);
    }
    let unitary = complete_unitary(&v);
    let m = crate::spectra::symmetrize(&(&v * v.adjoint()));
    let m = HermitianOperator::new(BipartiteDims::single(k, d), m)?;
    Ok(EmbeddedFilter {
        filter: FilterOp::new(m, p)?,
        unitary,
    })
}

#[derive(Debug, Clone)]
pub struct MultiplicativityReport {
    /// `lhs = ln ν_q(Λ₁ ⊠ Λ₂)`, `rhs = ln ν_q(Λ₁) + ln ν_q(Λ₂)`.
    pub gap: AdditivityGap,
    pub single: [NuResult; 2],
    pub joint: NuResult,
    pub q: f64,
}

/// Log-domain comparison of `ν_q(Λ₁ ⊠ Λ₂)` with `ν_q(Λ₁) ν_q(Λ₂)`. The
/// joint search is seeded with the product of the single-copy maximizers
/// and, for equal input dims, the maximally entangled input.
pub fn multiplicativity_gap(
    l1: &impl ToChannel,
    l2: &impl ToChannel,
    q: f64,
    opts: &SearchOptions,
) -> Result<MultiplicativityReport> {
    let (c1, c2) = (l1.to_channel()?, l2.to_channel()?);
    let n1 = nu_q(&c1, q, opts)?;
    let n2 = nu_q(&c2, q, opts)?;
    let joint_ch = c1.tensor(&c2);
    let mut seeds = vec![n1.witness.kronecker(&n2.witness)];
    if c1.in_dim() == c2.in_dim() {
        seeds.push(maximally_entangled_input(c1.in_dim()));
    }
    let joint = nu_q_seeded(&joint_ch, q, &seeds, opts)?;
    let gap = AdditivityGap::new(
        joint.value.ln(),
        n1.value.ln() + n2.value.ln(),
        GapDirection::MultiplicativityOfNu,
        true,
    );
    Ok(MultiplicativityReport {
        gap,
        single: [n1, n2],
        joint,
        q,
    })
}

/// `Σₖ |k⟩|k⟩/√d` on `C^d ⊗ C^d`.
pub fn maximally_entangled_input(d: usize) -> CVec {
    let mut v = CVec::zeros(d * d);
    let s = 1.0 / (d as f64).sqrt();
    for k in 0..d {
        v[k * d + k] = c(s, 0.0);
    }
    v
}

#[cfg(test)]
mod tests;
