//! The conjugate functional `E*`, the function `g(M) = E*(log M)` and the
//! checks built on them.
//!
//! `g` is available in two forms: the direct pure-state maximization of
//! `Tr[Ψ log M] − E(Ψ)` and the max-eigenvalue form
//! `max_τ λ_max(log M + 𝕀 ⊗ log τ)`. Singular `M` is handled by restricting
//! to its range; `M = 0` gives [`ExtReal::NegInfinity`].

mod conjugate;
mod tau;

use serde::{Serialize, Serializer};

pub(crate) use conjugate::ConjugateProblem;
pub use conjugate::{conjugate_e, conjugate_e_seeded, ConjugateResult};
pub(crate) use tau::{TauMap, TauProblem};

use crate::error::{Error, Result};
pub use crate::optim::SearchOptions;
use crate::roof::{
    apply_on_a, apply_on_b, eof_roof, smaller_reduction, wootters_eof, Ensemble, RoofOptions,
};
use crate::spectra::{
    c, eigh_matrix, grouping_permutation, kron_mat, log_restricted, partial_trace, regroup_matrix,
    regroup_vector, ungroup_vector, BipartiteDims, CMat, CVec, DensityMatrix, HermitianOperator,
    PureStateVector, Subsystem, RANK_TOL,
};

/// A real number or `−∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInfinity,
    Finite(f64),
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::NegInfinity => None,
        }
    }

    /// As an `f64`, with `−∞` mapped to `f64::NEG_INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

impl std::ops::Add for ExtReal {
    type Output = ExtReal;

    fn add(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::NegInfinity,
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            ExtReal::Finite(v) => s.serialize_f64(v),
            ExtReal::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GMethod {
    Direct,
    Eigen,
}

#[derive(Debug, Clone)]
pub struct GEvalResult {
    pub value: ExtReal,
    /// Optimal `τ` on the B side of the cut (for two-copy input, on
    /// `B_I B_II`). For the direct form this is the B reduction of the
    /// maximizing state.
    pub argmax_tau: Option<DensityMatrix>,
    /// Maximizing pure state in the input's own index order.
    pub argmax_state: Option<PureStateVector>,
    /// The optimal `τ` is numerically rank deficient.
    pub boundary: bool,
    pub method: GMethod,
}

impl GEvalResult {
    fn neg_infinity(method: GMethod) -> Self {
        Self {
            value: ExtReal::NegInfinity,
            argmax_tau: None,
            argmax_state: None,
            boundary: false,
            method,
        }
    }
}

/// `log M` read on the range of `M`, in the index order of a single
/// bipartite cut.
struct LogForm {
    /// Original dims (one or two copies).
    dims: BipartiteDims,
    cut: BipartiteDims,
    x: CMat,
    support: Option<CMat>,
}

fn require_psd(m: &HermitianOperator, what: &str) -> Result<()> {
    let s = eigh_matrix(m.matrix())?;
    if s.min() < -RANK_TOL {
        return Err(Error::domain(format!(
            "{what}: operator has eigenvalue {:.3e} < 0",
            s.min()
        )));
    }
    Ok(())
}

fn permute_rows(q: &CMat, perm: &[usize]) -> CMat {
    let mut out = CMat::zeros(q.nrows(), q.ncols());
    for (old, &new) in perm.iter().enumerate() {
        out.set_row(new, &q.row(old));
    }
    out
}

impl LogForm {
    /// `None` when `M = 0`.
    fn of(m: &HermitianOperator) -> Result<Option<Self>> {
        require_psd(m, "g")?;
        let dims = m.dims();
        let rl = log_restricted(m.matrix())?;
        if rl.rank() == 0 {
            return Ok(None);
        }
        let x = rl.embedded();
        let support = rl.rank_deficient.then(|| rl.support.clone());
        Self::assemble(dims, x, support).map(Some)
    }

    /// `log(M₁ ⊠ M₂) = log M₁ ⊠ 𝕀 + 𝕀 ⊠ log M₂` on `ran M₁ ⊠ ran M₂`.
    fn of_product(m1: &HermitianOperator, m2: &HermitianOperator) -> Result<Option<Self>> {
        let (d1, d2) = (m1.dims(), m2.dims());
        if d1.copies != 1 || d1 != d2 {
            return Err(Error::shape(
                "product needs two single-copy operators with equal dims",
            ));
        }
        require_psd(m1, "g")?;
        require_psd(m2, "g")?;
        let (r1, r2) = (log_restricted(m1.matrix())?, log_restricted(m2.matrix())?);
        if r1.rank() == 0 || r2.rank() == 0 {
            return Ok(None);
        }
        let n = d1.total();
        let id = CMat::identity(n, n);
        let x = kron_mat(&r1.embedded(), &id) + kron_mat(&id, &r2.embedded());
        let support =
            (r1.rank_deficient || r2.rank_deficient).then(|| kron_mat(&r1.support, &r2.support));
        Self::assemble(d1.with_copies(2)?, x, support).map(Some)
    }

    fn assemble(dims: BipartiteDims, x: CMat, support: Option<CMat>) -> Result<Self> {
        if dims.copies == 1 {
            return Ok(Self {
                dims,
                cut: dims,
                x,
                support,
            });
        }
        let perm = grouping_permutation(dims);
        Ok(Self {
            dims,
            cut: dims.grouped(),
            x: regroup_matrix(&x, dims)?,
            support: support.map(|q| permute_rows(&q, &perm)),
        })
    }

    fn to_cut(&self, v: &CVec) -> Result<CVec> {
        if self.dims.copies == 1 {
            Ok(v.clone())
        } else {
            regroup_vector(v, self.dims)
        }
    }

    fn state_from_cut(&self, v: &CVec) -> Result<PureStateVector> {
        let v = if self.dims.copies == 1 {
            v.clone()
        } else {
            ungroup_vector(v, self.dims)?
        };
        PureStateVector::normalized(self.dims, v)
    }

    fn tau_of(&self, psi_cut: &CVec) -> DensityMatrix {
        let red = crate::spectra::reduce_vector_to_b(psi_cut, self.cut.dim_a, self.cut.dim_b);
        DensityMatrix::from_parts_unchecked(BipartiteDims::single(1, self.cut.dim_b), red)
    }

    fn direct(&self, seeds: &[CVec], opts: &SearchOptions) -> Result<GEvalResult> {
        let problem = ConjugateProblem {
            dims: self.cut,
            x: &self.x,
            subspace: self.support.as_ref(),
        };
        let seeds: Vec<CVec> = seeds
            .iter()
            .map(|s| self.to_cut(s))
            .collect::<Result<_>>()?;
        let (value, psi) = problem.maximize(&seeds, opts);
        let tau = self.tau_of(&psi);
        let boundary = tau.spectrum()?.min() < 1e-8;
        Ok(GEvalResult {
            value: ExtReal::Finite(value),
            argmax_tau: Some(tau),
            argmax_state: Some(self.state_from_cut(&psi)?),
            boundary,
            method: GMethod::Direct,
        })
    }

    fn eigen(&self, warm: &[CMat], opts: &SearchOptions) -> Result<GEvalResult> {
        let problem = TauProblem {
            dim_a: self.cut.dim_a,
            dim_b: self.cut.dim_b,
            map: TauMap::Log,
            kernel: None,
            base: Some(self.x.clone()),
            subspace: self.support.clone(),
        };
        let best = problem.maximize(warm, opts);
        Ok(GEvalResult {
            value: ExtReal::Finite(best.score),
            argmax_tau: Some(DensityMatrix::from_parts_unchecked(
                BipartiteDims::single(1, self.cut.dim_b),
                best.tau,
            )),
            argmax_state: Some(self.state_from_cut(&best.vector)?),
            boundary: best.boundary,
            method: GMethod::Eigen,
        })
    }
}

/// `g(M)` as the maximum of `Tr[Ψ log M] − E(Ψ)` over pure states on the
/// range of `M`. Two-copy `M` is evaluated across the grouped cut
/// `A_I A_II | B_I B_II`.
pub fn g_direct(m: &HermitianOperator, opts: &SearchOptions) -> Result<GEvalResult> {
    g_direct_seeded(m, &[], opts)
}

/// [`g_direct`] with extra starting states, given in the index order of `m`.
pub fn g_direct_seeded(
    m: &HermitianOperator,
    seeds: &[CVec],
    opts: &SearchOptions,
) -> Result<GEvalResult> {
    match LogForm::of(m)? {
        None => Ok(GEvalResult::neg_infinity(GMethod::Direct)),
        Some(lf) => lf.direct(seeds, opts),
    }
}

/// `g(M)` as `max_τ λ_max(log M + 𝕀 ⊗ log τ)`, read on the range of `M`.
pub fn g_eigen(m: &HermitianOperator, opts: &SearchOptions) -> Result<GEvalResult> {
    match LogForm::of(m)? {
        None => Ok(GEvalResult::neg_infinity(GMethod::Eigen)),
        Some(lf) => lf.eigen(&[], opts),
    }
}

/// `λ_max(log M + 𝕀 ⊗ log τ)` on the range of `M` at a given full-rank `τ`.
pub fn eigen_objective(m: &HermitianOperator, tau: &DensityMatrix) -> Result<ExtReal> {
    m.dims().require_single("eigen_objective")?;
    let Some(lf) = LogForm::of(m)? else {
        return Ok(ExtReal::NegInfinity);
    };
    let db = m.dims().dim_b;
    if tau.dim() != db {
        return Err(Error::shape(format!(
            "tau has dim {}, expected {db}",
            tau.dim()
        )));
    }
    let log_tau = crate::spectra::matrix_fn_raw(tau.matrix(), crate::spectra::MatrixFunction::Log)?;
    let lifted = CMat::identity(m.dims().dim_a, m.dims().dim_a).kronecker(&log_tau);
    let full = &lf.x + lifted;
    let local = match &lf.support {
        Some(q) => q.adjoint() * full * q,
        None => full,
    };
    Ok(ExtReal::Finite(
        eigh_matrix(&crate::spectra::symmetrize(&local))?.max(),
    ))
}

fn require_matching(rho: &DensityMatrix, x: &HermitianOperator) -> Result<()> {
    rho.dims().require_single("dual bound")?;
    if rho.dims() != x.dims() {
        return Err(Error::shape(format!(
            "state dims {:?} differ from operator dims {:?}",
            rho.dims(),
            x.dims()
        )));
    }
    Ok(())
}

/// `Tr[ρX] − E*(X)`. Since the conjugate value is an achieved point it can
/// only be underestimated, so this bound is sound up to search error.
pub fn dual_lower_bound(
    rho: &DensityMatrix,
    x: &HermitianOperator,
    opts: &SearchOptions,
) -> Result<f64> {
    require_matching(rho, x)?;
    Ok(rho.expectation(x) - conjugate_e(x, opts)?.value)
}

#[derive(Debug, Clone)]
pub struct DualEstimate {
    pub value: f64,
    pub x: HermitianOperator,
    pub conjugate_value: f64,
    pub cap: f64,
}

/// Derivative of the ensemble-average entanglement with respect to `ρ`
/// along the ensemble's own parameterization `ψ̃ᵢ = √ρ wᵢ`. At a roof
/// optimum of a full-rank state this is a gradient of `E_F`.
pub(crate) fn envelope_gradient(rho: &DensityMatrix, ensemble: &Ensemble) -> Result<CMat> {
    let dims = rho.dims();
    let s = rho.spectrum()?;
    if s.min() <= 0.0 {
        return Err(Error::param("envelope gradient needs a full-rank state"));
    }
    let inv_sqrt = s.apply(|l| 1.0 / l.sqrt());
    let n = rho.dim();
    let mut y = CMat::zeros(n, n);
    for (p, psi) in ensemble.members() {
        let tilde = psi.amplitudes() * c(p.sqrt(), 0.0);
        let w = &inv_sqrt * &tilde;
        let red = smaller_reduction(psi.amplitudes(), dims);
        let log_red = eigh_matrix(&red)?.apply(|m| m.max(1e-300).ln());
        let g = if dims.dim_a <= dims.dim_b {
            apply_on_a(&log_red, &tilde, dims)
        } else {
            apply_on_b(&log_red, &tilde, dims)
        };
        y -= w * g.adjoint();
    }
    let z = &y + y.adjoint();
    let basis = &s.eigenvectors;
    let mut zp = basis.adjoint() * z * basis;
    let roots: Vec<f64> = s.eigenvalues.iter().map(|l| l.sqrt()).collect();
    for j in 0..n {
        for k in 0..n {
            zp[(j, k)] /= c(roots[j] + roots[k], 0.0);
        }
    }
    Ok(crate::spectra::symmetrize(&(basis * zp * basis.adjoint())))
}

/// Shifts `X` so its spectrum is centred on zero (the dual value is
/// invariant under `X → X + c𝕀`) and clips eigenvalues to `[−cap, cap]`.
fn center_and_clip(x: &CMat, cap: f64) -> Result<CMat> {
    let s = eigh_matrix(x)?;
    let mid = 0.5 * (s.max() + s.min());
    Ok(s.apply(|l| (l - mid).clamp(-cap, cap)))
}

/// Largest dual value `Tr[ρX] − E*(X)` found over `‖X‖_∞ ≤ cap`.
///
/// Candidates are `X = 0`, envelope gradients of the roof at
/// `(1−ε)ρ + ε𝕀/d` for a ladder of `ε`, and a few supergradient steps
/// `X ← X + t(ρ − Ψ*)` from the best of those, where `Ψ*` is the current
/// conjugate maximizer.
pub fn fhat_dual_estimate(
    rho: &DensityMatrix,
    cap: f64,
    opts: &SearchOptions,
) -> Result<DualEstimate> {
    rho.dims().require_single("fhat_dual_estimate")?;
    if !(cap > 0.0) {
        return Err(Error::param(format!(
            "norm cap must be positive, got {cap}"
        )));
    }
    let dims = rho.dims();
    let mut best = DualEstimate {
        value: 0.0,
        x: HermitianOperator::zeros(dims),
        conjugate_value: 0.0,
        cap,
    };
    let evaluate = |x: CMat, seeds: &[CVec]| -> Result<(f64, HermitianOperator, ConjugateResult)> {
        let x = HermitianOperator::new(dims, x)?;
        let conj = conjugate_e_seeded(&x, seeds, opts)?;
        Ok((rho.expectation(&x) - conj.value, x, conj))
    };

    let roof_opts = RoofOptions::default()
        .with_restarts(opts.restarts)
        .with_seed(opts.seed);
    let full_rank = rho.spectrum()?.min() > 1e-8;
    let mut ladder: Vec<f64> = vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    if full_rank {
        ladder.insert(0, 0.0);
    }
    let mixed = DensityMatrix::maximally_mixed(dims);
    let mut best_conj: Option<ConjugateResult> = None;
    for eps in ladder {
        let reg = if eps == 0.0 {
            rho.clone()
        } else {
            DensityMatrix::mixture(&[(1.0 - eps, rho), (eps, &mixed)])?
        };
        let roof = eof_roof(&reg, &roof_opts)?;
        let Ok(grad) = envelope_gradient(&reg, &roof.ensemble) else {
            continue;
        };
        let seeds: Vec<CVec> = roof
            .ensemble
            .members()
            .iter()
            .map(|(_, s)| s.amplitudes().clone())
            .collect();
        let (value, x, conj) = evaluate(center_and_clip(&grad, cap)?, &seeds)?;
        if value > best.value {
            best = DualEstimate {
                value,
                x,
                conjugate_value: conj.value,
                cap,
            };
            best_conj = Some(conj);
        }
    }

    if let Some(mut conj) = best_conj {
        for _ in 0..4 {
            let step_dir = rho.matrix() - conj.argmax_state.projector().matrix();
            let mut improved = false;
            for t in [1.0, 0.1, 0.01] {
                let trial = best.x.matrix() + &step_dir * c(t, 0.0);
                let seeds = [conj.argmax_state.amplitudes().clone()];
                let (value, x, next) = evaluate(center_and_clip(&trial, cap)?, &seeds)?;
                if value > best.value {
                    best = DualEstimate {
                        value,
                        x,
                        conjugate_value: next.value,
                        cap,
                    };
                    conj = next;
                    improved = true;
                    break;
                }
            }
            if !improved {
                break;
            }
        }
    }
    Ok(best)
}

/// `M = exp(X) / ‖exp(X)‖_∞`, the operator form of a dual candidate.
/// Positive rescaling of `M` shifts `g` and `Tr[ρ log M]` equally.
pub fn operator_form(x: &HermitianOperator) -> Result<HermitianOperator> {
    let s = eigh_matrix(x.matrix())?;
    let top = s.max();
    HermitianOperator::new(x.dims(), s.apply(|l| (l - top).exp()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Report {
    pub conjugate_value: f64,
    /// `E*(X) − (Tr[Ψᵢ X] − E(Ψᵢ))` per member; non-negative by construction.
    pub defects: Vec<f64>,
    pub max_defect: f64,
    pub members_optimal: bool,
    /// `Tr[τX] − Ē − E*(X)` with `Ē` the ensemble's average entanglement.
    pub dual_residual: f64,
    pub dual_attained: bool,
    pub tol: f64,
}

/// Checks that every member of `ensemble` attains the conjugate maximum at
/// `x_opt`, and that `Tr[τ x_opt] − Ē` equals `E*(x_opt)`.
pub fn check_prop1_ensemble(
    tau: &DensityMatrix,
    x_opt: &HermitianOperator,
    ensemble: &Ensemble,
    tol: f64,
    opts: &SearchOptions,
) -> Result<Prop1Report> {
    require_matching(tau, x_opt)?;
    if ensemble.dims() != tau.dims() || !ensemble.realizes(tau) {
        return Err(Error::param(format!(
            "ensemble does not reconstruct the state (max deviation {:.3e})",
            ensemble.reconstruction_error(tau)
        )));
    }
    let seeds: Vec<CVec> = ensemble
        .members()
        .iter()
        .map(|(_, s)| s.amplitudes().clone())
        .collect();
    let conj = conjugate_e_seeded(x_opt, &seeds, opts)?;
    let mut defects = Vec::with_capacity(ensemble.len());
    for (_, psi) in ensemble.members() {
        let member = x_opt.expectation(psi) - crate::roof::pure_entanglement(psi)?;
        defects.push(conj.value - member);
    }
    let max_defect = defects.iter().cloned().fold(0.0, f64::max);
    let dual_residual = tau.expectation(x_opt) - ensemble.average_entanglement() - conj.value;
    Ok(Prop1Report {
        conjugate_value: conj.value,
        members_optimal: defects.iter().all(|d| d.abs() <= tol),
        max_defect,
        dual_attained: dual_residual.abs() <= tol,
        dual_residual,
        defects,
        tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapDirection {
    SubadditivityOfG,
    StrongSuperadditivityOfEof,
    /// The reverse reading `E_F(ρ_I) + E_F(ρ_II) ≥ E_F(ρ)`.
    StrongSubadditivityOfEof,
    MultiplicativityOfNu,
}

/// A two-sided comparison whose `gap` is negative exactly when the
/// inequality named by `direction` fails: `rhs − lhs` for subadditivity of
/// `g`, multiplicativity of `ν_q` and strong subadditivity, `lhs − rhs` for
/// strong superadditivity (where `lhs` is the joint `E_F`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdditivityGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub direction: GapDirection,
    /// Both sides come from searches rather than a closed form.
    pub estimated: bool,
}

impl AdditivityGap {
    pub fn new(lhs: f64, rhs: f64, direction: GapDirection, estimated: bool) -> Self {
        let gap = match direction {
            GapDirection::StrongSuperadditivityOfEof => lhs - rhs,
            _ => rhs - lhs,
        };
        Self {
            lhs,
            rhs,
            gap,
            direction,
            estimated,
        }
    }

    pub fn violated(&self, tol: f64) -> bool {
        self.gap < -tol
    }
}

#[derive(Debug, Clone)]
pub struct GSubadditivity {
    pub gap: AdditivityGap,
    pub single: [GEvalResult; 2],
    pub joint: GEvalResult,
}

/// Compares `g(M₁ ⊠ M₂)` (lhs) with `g(M₁) + g(M₂)` (rhs). The joint
/// search is always seeded with the product of the single-copy maximizers,
/// so `lhs ≥ rhs` up to the accuracy of the single-copy values.
pub fn g_subadditivity_gap(
    m1: &HermitianOperator,
    m2: &HermitianOperator,
    opts: &SearchOptions,
) -> Result<GSubadditivity> {
    m1.dims().require_single("g_subadditivity_gap")?;
    m2.dims().require_single("g_subadditivity_gap")?;
    let g1 = g_direct(m1, opts)?;
    let g2 = g_direct(m2, opts)?;
    let Some(lf) = LogForm::of_product(m1, m2)? else {
        return Err(Error::param(
            "g is -inf on a zero operator; the gap is undefined",
        ));
    };
    let mut seeds = Vec::new();
    if let (Some(a), Some(b)) = (&g1.argmax_state, &g2.argmax_state) {
        seeds.push(a.amplitudes().kronecker(b.amplitudes()));
    }
    let joint = lf.direct(&seeds, opts)?;
    let (v1, v2) = (g1.value.to_f64(), g2.value.to_f64());
    let gap = AdditivityGap::new(
        joint.value.to_f64(),
        v1 + v2,
        GapDirection::SubadditivityOfG,
        true,
    );
    Ok(GSubadditivity {
        gap,
        single: [g1, g2],
        joint,
    })
}

/// How the single-copy terms of the strong-superadditivity gap are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReductionMode {
    /// Closed form; each copy must be 2⊗2.
    #[default]
    Exact,
    /// Convex-roof search for the reductions as well.
    BothEstimated,
}

#[derive(Debug, Clone)]
pub struct SsaReport {
    pub gap: AdditivityGap,
    pub reductions: [f64; 2],
    pub joint: f64,
    pub ensemble: Ensemble,
}

impl SsaReport {
    /// The same numbers read as strong subadditivity.
    pub fn reverse(&self) -> AdditivityGap {
        AdditivityGap::new(
            self.gap.lhs,
            self.gap.rhs,
            GapDirection::StrongSubadditivityOfEof,
            self.gap.estimated,
        )
    }
}

/// `E_F(ρ)` across `A_I A_II | B_I B_II` (lhs, roof search) against
/// `E_F(ρ_I) + E_F(ρ_II)` (rhs); `gap = lhs − rhs`. The roof value is an
/// upper estimate, so a negative gap is a candidate violation only.
pub fn strong_superadditivity_gap(
    rho: &DensityMatrix,
    mode: ReductionMode,
    roof: &RoofOptions,
) -> Result<SsaReport> {
    let dims = rho.dims();
    if dims.copies != 2 {
        return Err(Error::shape(
            "strong superadditivity needs a two-copy state",
        ));
    }
    let r1 = partial_trace(rho, Subsystem::Copy, 1)?;
    let r2 = partial_trace(rho, Subsystem::Copy, 0)?;
    let reductions = match mode {
        ReductionMode::Exact => {
            if dims.dim_a != 2 || dims.dim_b != 2 {
                return Err(Error::Unsupported(format!(
                    "exact reductions need 2x2 copies, got {}x{}",
                    dims.dim_a, dims.dim_b
                )));
            }
            [wootters_eof(&r1)?, wootters_eof(&r2)?]
        }
        ReductionMode::BothEstimated => [eof_roof(&r1, roof)?.value, eof_roof(&r2, roof)?.value],
    };
    let grouped = crate::spectra::regroup_state(rho)?;
    let joint = eof_roof(&grouped, roof)?;
    let gap = AdditivityGap::new(
        joint.value,
        reductions[0] + reductions[1],
        GapDirection::StrongSuperadditivityOfEof,
        mode == ReductionMode::BothEstimated,
    );
    Ok(SsaReport {
        gap,
        reductions,
        joint: joint.value,
        ensemble: joint.ensemble,
    })
}

#[derive(Debug, Clone)]
pub struct Prop2Report {
    pub ssa: AdditivityGap,
    pub g: AdditivityGap,
    pub ssa_violated: bool,
    pub g_violated: bool,
    /// An SSA violation beyond `tol` comes with a `g` violation beyond `tol/2`.
    pub transport_holds: bool,
    pub signs_agree: bool,
    pub tol: f64,
}

/// Compares the strong-superadditivity gap of `rho` with the subadditivity
/// gap of `g` at `M₁ ⊠ M₂`.
pub fn check_prop2_transport(
    rho: &DensityMatrix,
    m1: &HermitianOperator,
    m2: &HermitianOperator,
    tol: f64,
    mode: ReductionMode,
    roof: &RoofOptions,
    opts: &SearchOptions,
) -> Result<Prop2Report> {
    let dims = rho.dims();
    if dims.copies != 2 || m1.dims() != dims.with_copies(1)? || m2.dims() != m1.dims() {
        return Err(Error::shape(
            "transport check needs a two-copy state and single-copy operators of matching dims",
        ));
    }
    let ssa = strong_superadditivity_gap(rho, mode, roof)?.gap;
    let g = g_subadditivity_gap(m1, m2, opts)?.gap;
    let ssa_violated = ssa.violated(tol);
    let g_violated = g.violated(tol / 2.0);
    Ok(Prop2Report {
        ssa,
        g,
        ssa_violated,
        g_violated,
        transport_holds: !ssa_violated || g_violated,
        signs_agree: ssa_violated == g_violated,
        tol,
    })
}

/// Operator-form dual candidates for the two reductions of `rho`.
pub fn reduction_candidates(
    rho: &DensityMatrix,
    cap: f64,
    opts: &SearchOptions,
) -> Result<[HermitianOperator; 2]> {
    let r1 = partial_trace(rho, Subsystem::Copy, 1)?;
    let r2 = partial_trace(rho, Subsystem::Copy, 0)?;
    let x1 = fhat_dual_estimate(&r1, cap, opts)?.x;
    let x2 = fhat_dual_estimate(&r2, cap, opts)?.x;
    Ok([operator_form(&x1)?, operator_form(&x2)?])
}
