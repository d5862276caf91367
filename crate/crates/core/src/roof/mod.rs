//! Pure-state entanglement and the convex-roof entanglement of formation.
//!
//! Every ensemble realizing `ρ = Σ λ_k |e_k⟩⟨e_k|` (rank `R`) with `N`
//! members arises from an `N × R` isometry `V` through the unnormalized
//! vectors `|ψ̃ᵢ⟩ = Σ_k V_ik √λ_k |e_k⟩`. The roof search minimizes the
//! ensemble-average entanglement over that Stiefel manifold.

mod wootters;

pub use wootters::{concurrence, wootters_eof};

use crate::error::{Error, Result};
use crate::optim::{self, Geometry, Settings};
use crate::spectra::{
    c, eigh_matrix, reduce_vector_to_a, reduce_vector_to_b, BipartiteDims, CMat, CVec,
    DensityMatrix, PureStateVector, RANK_TOL,
};

/// `−x ln x − (1−x) ln(1−x)`.
pub fn binary_entropy(x: f64) -> f64 {
    crate::spectra::entropy_of_probabilities(&[x, 1.0 - x])
}

/// Reduced state of `v` on the smaller party (A on ties).
pub(crate) fn smaller_reduction(v: &CVec, dims: BipartiteDims) -> CMat {
    if dims.dim_a <= dims.dim_b {
        reduce_vector_to_a(v, dims.dim_a, dims.dim_b)
    } else {
        reduce_vector_to_b(v, dims.dim_a, dims.dim_b)
    }
}

/// Entanglement entropy of a normalized single-copy vector.
pub(crate) fn vector_entanglement(v: &CVec, dims: BipartiteDims) -> f64 {
    let red = smaller_reduction(v, dims);
    crate::spectra::matrix_entropy(&red).expect("reduced state diagonalizes")
}

/// `E(Ψ) = S(Tr_A Ψ)`, computed on the smaller reduction; both reductions
/// share their non-zero spectrum.
pub fn pure_entanglement(psi: &PureStateVector) -> Result<f64> {
    psi.dims().require_single("pure_entanglement")?;
    Ok(vector_entanglement(psi.amplitudes(), psi.dims()))
}

/// Weighted list of pure states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, PureStateVector)>,
}

impl Ensemble {
    pub const WEIGHT_TOL: f64 = 1e-10;
    pub const RECONSTRUCTION_TOL: f64 = 1e-8;

    pub fn new(members: Vec<(f64, PureStateVector)>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::param("ensemble has no members"))?;
        let dims = first.1.dims();
        if members.iter().any(|(_, s)| s.dims() != dims) {
            return Err(Error::shape("ensemble members have different dims"));
        }
        if let Some((w, _)) = members.iter().find(|(w, _)| !(*w >= 0.0)) {
            return Err(Error::param(format!("negative ensemble weight {w}")));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > Self::WEIGHT_TOL {
            return Err(Error::param(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureStateVector)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dims(&self) -> BipartiteDims {
        self.members[0].1.dims()
    }

    /// `Σ pᵢ Ψᵢ`.
    pub fn density(&self) -> CMat {
        let n = self.dims().total();
        let mut acc = CMat::zeros(n, n);
        for (w, s) in &self.members {
            let v = s.amplitudes();
            acc += v * v.adjoint() * c(*w, 0.0);
        }
        acc
    }

    /// Largest entry of `|Σ pᵢ Ψᵢ − ρ|`.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        if self.dims() != rho.dims() {
            return f64::INFINITY;
        }
        (self.density() - rho.matrix()).camax()
    }

    pub fn realizes(&self, rho: &DensityMatrix) -> bool {
        self.reconstruction_error(rho) <= Self::RECONSTRUCTION_TOL
    }

    /// `Σ pᵢ E(Ψᵢ)`.
    pub fn average_entanglement(&self) -> f64 {
        self.members
            .iter()
            .map(|(w, s)| w * vector_entanglement(s.amplitudes(), s.dims()))
            .sum()
    }

    /// Ensemble of `ρ₁ ⊗ ρ₂` built from all member pairs, with A parties
    /// and B parties grouped: dims `(dA₁ dA₂) × (dB₁ dB₂)`.
    pub fn grouped_product(&self, other: &Ensemble) -> Result<Ensemble> {
        let (d1, d2) = (self.dims(), other.dims());
        if d1.copies != 1 || d2.copies != 1 {
            return Err(Error::shape("grouped product of multi-copy ensembles"));
        }
        let dims = BipartiteDims::single(d1.dim_a * d2.dim_a, d1.dim_b * d2.dim_b);
        let mut members = Vec::with_capacity(self.len() * other.len());
        for (w1, s1) in &self.members {
            for (w2, s2) in &other.members {
                let mut v = CVec::zeros(dims.total());
                let (a1, b1) = (d1.dim_a, d1.dim_b);
                let (a2, b2) = (d2.dim_a, d2.dim_b);
                for i1 in 0..a1 {
                    for j1 in 0..b1 {
                        let x = s1.amplitudes()[i1 * b1 + j1];
                        for i2 in 0..a2 {
                            for j2 in 0..b2 {
                                let y = s2.amplitudes()[i2 * b2 + j2];
                                let a = i1 * a2 + i2;
                                let b = j1 * b2 + j2;
                                v[a * dims.dim_b + b] = x * y;
                            }
                        }
                    }
                }
                members.push((w1 * w2, PureStateVector::normalized(dims, v)?));
            }
        }
        Ensemble::new(members)
    }
}

/// `N × R` isometry indexing ensembles of a rank-`R` state.
#[derive(Debug, Clone)]
pub struct RoofParameterization {
    pub rank: usize,
    pub cardinality: usize,
    pub mixing: CMat,
}

impl RoofParameterization {
    pub const ISOMETRY_TOL: f64 = 1e-8;

    pub fn new(mixing: CMat) -> Result<Self> {
        let (n, r) = mixing.shape();
        if n < r {
            return Err(Error::param(format!(
                "cardinality {n} is below the rank {r}"
            )));
        }
        let defect = (mixing.adjoint() * &mixing - CMat::identity(r, r)).camax();
        if defect > Self::ISOMETRY_TOL {
            return Err(Error::param(format!(
                "mixing matrix is not an isometry (defect {defect:.3e})"
            )));
        }
        Ok(Self {
            rank: r,
            cardinality: n,
            mixing,
        })
    }

    /// `[𝕀_R; 0]`, which yields the eigen-ensemble.
    pub fn eigen(rank: usize, cardinality: usize) -> Result<Self> {
        let mut m = CMat::zeros(cardinality, rank);
        for k in 0..rank.min(cardinality) {
            m[(k, k)] = c(1.0, 0.0);
        }
        Self::new(m)
    }
}

/// Eigen-data of `ρ` restricted to its support: columns `√λ_k |e_k⟩`.
struct WeightedSupport {
    dims: BipartiteDims,
    columns: CMat,
}

impl WeightedSupport {
    fn new(rho: &DensityMatrix) -> Result<Self> {
        let s = rho.spectrum()?;
        let r = s.rank(RANK_TOL);
        let n = rho.dim();
        let mut columns = CMat::zeros(n, r);
        for k in 0..r {
            let w = s.eigenvalues[k].sqrt();
            columns.set_column(k, &(s.eigenvectors.column(k) * c(w, 0.0)));
        }
        Ok(Self {
            dims: rho.dims(),
            columns,
        })
    }

    fn rank(&self) -> usize {
        self.columns.ncols()
    }

    /// Unnormalized member vectors as columns: `U Vᵀ`.
    fn members(&self, v: &CMat) -> CMat {
        &self.columns * v.transpose()
    }

    /// `Σᵢ pᵢ E(ψᵢ)` and its Euclidean gradient with respect to `V`.
    fn objective(&self, v: &CMat) -> (f64, CMat) {
        let psi = self.members(v);
        let dims = self.dims;
        let reduce_a = dims.dim_a <= dims.dim_b;
        let mut value = 0.0;
        let mut grad_psi = CMat::zeros(psi.nrows(), psi.ncols());
        for i in 0..psi.ncols() {
            let col: CVec = psi.column(i).into_owned();
            let p = col.norm_squared();
            if p < 1e-300 {
                continue;
            }
            let red = if reduce_a {
                reduce_vector_to_a(&col, dims.dim_a, dims.dim_b)
            } else {
                reduce_vector_to_b(&col, dims.dim_a, dims.dim_b)
            };
            let s = eigh_matrix(&red).expect("reduced state diagonalizes");
            // p·S(ρ̃/p) = −Tr ρ̃ ln ρ̃ + p ln p
            let mut ent = p * p.ln();
            for &mu in &s.eigenvalues {
                if mu > 0.0 {
                    ent -= mu * mu.ln();
                }
            }
            value += ent;
            // ∂/∂ψ̃* = −(ln(ρ̃/p) ⊗ 𝕀) ψ̃ (or 𝕀 ⊗ ln on the B side)
            let log_red = s.apply(|mu| (mu.max(1e-300) / p).ln());
            let g = if reduce_a {
                apply_on_a(&log_red, &col, dims)
            } else {
                apply_on_b(&log_red, &col, dims)
            };
            grad_psi.set_column(i, &(g * c(-2.0, 0.0)));
        }
        // ψ̃_ij = Σ_k U_jk V_ik  ⇒  G_V = G_ψᵀ Ū
        let grad_v = grad_psi.transpose() * self.columns.conjugate();
        (value, grad_v)
    }

    fn ensemble(&self, v: &CMat) -> Result<Ensemble> {
        let psi = self.members(v);
        let mut members = Vec::new();
        for i in 0..psi.ncols() {
            let col: CVec = psi.column(i).into_owned();
            let p = col.norm_squared();
            if p < 1e-12 {
                continue;
            }
            members.push((p, PureStateVector::normalized(self.dims, col)?));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        for m in &mut members {
            m.0 /= total;
        }
        Ensemble::new(members)
    }
}

/// `(X ⊗ 𝕀) v` for `X` on `H_A`.
pub(crate) fn apply_on_a(x: &CMat, v: &CVec, dims: BipartiteDims) -> CVec {
    let (da, db) = (dims.dim_a, dims.dim_b);
    let mut out = CVec::zeros(v.len());
    for i in 0..da {
        for j in 0..da {
            let xij = x[(i, j)];
            if xij == c(0.0, 0.0) {
                continue;
            }
            for b in 0..db {
                out[i * db + b] += xij * v[j * db + b];
            }
        }
    }
    out
}

/// `(𝕀 ⊗ X) v` for `X` on `H_B`.
pub(crate) fn apply_on_b(x: &CMat, v: &CVec, dims: BipartiteDims) -> CVec {
    let (da, db) = (dims.dim_a, dims.dim_b);
    let mut out = CVec::zeros(v.len());
    for a in 0..da {
        let block = v.rows(a * db, db);
        out.rows_mut(a * db, db).copy_from(&(x * block));
    }
    out
}

/// Members `|ψ̃ᵢ⟩ = Σ_k V_ik √λ_k |e_k⟩` normalized to `(pᵢ, ψᵢ)`;
/// members with `pᵢ < 1e−12` are dropped.
pub fn ensemble_from_mixing(rho: &DensityMatrix, v: &RoofParameterization) -> Result<Ensemble> {
    let support = WeightedSupport::new(rho)?;
    if support.rank() != v.rank {
        return Err(Error::param(format!(
            "mixing matrix has {} columns but the state has rank {}",
            v.rank,
            support.rank()
        )));
    }
    support.ensemble(&v.mixing)
}

#[derive(Debug, Clone)]
pub struct RoofOptions {
    /// Ensemble size; defaults to `rank²`.
    pub cardinality: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    /// Convergence flag threshold on the last improvement.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            cardinality: None,
            restarts: 32,
            seed: 0,
            tol: 1e-8,
            max_iter: 5000,
        }
    }
}

impl RoofOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_cardinality(mut self, n: usize) -> Self {
        self.cardinality = Some(n);
        self
    }
}

#[derive(Debug, Clone)]
pub struct RoofResult {
    /// Achieved ensemble average, an upper bound on `E_F(ρ)`.
    pub value: f64,
    pub ensemble: Ensemble,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Upper bound on the entanglement of formation from multi-restart descent
/// over `N × R` isometries. Restart 0 starts from the eigen-ensemble, so the
/// result never exceeds the eigen-ensemble average.
pub fn eof_roof(rho: &DensityMatrix, opts: &RoofOptions) -> Result<RoofResult> {
    rho.dims().require_single("eof_roof")?;
    let support = WeightedSupport::new(rho)?;
    let r = support.rank();
    let n = opts.cardinality.unwrap_or(r * r).max(1);
    if n < r {
        return Err(Error::param(format!(
            "cardinality {n} is below the rank {r}"
        )));
    }
    if r == 1 {
        let ensemble = support.ensemble(&CMat::identity(1, 1))?;
        let value = ensemble.average_entanglement();
        return Ok(RoofResult {
            value,
            ensemble,
            restarts_used: 0,
            converged: true,
        });
    }

    let restarts = opts.restarts.max(1);
    let settings = Settings {
        max_iter: opts.max_iter,
        grad_tol: 1e-10,
        f_tol: 1e-15,
        patience: 8,
        memory: 16,
    };
    let runs = optim::run_restarts(restarts, opts.seed, |idx, rng| {
        let v0 = if idx == 0 {
            RoofParameterization::eigen(r, n).expect("valid").mixing
        } else {
            crate::spectra::sample::haar_unitary(rng, n)
                .columns(0, r)
                .into_owned()
        };
        optim::minimize(Geometry::Stiefel, v0, |v| support.objective(v), &settings)
    });
    let best = optim::argmax_by_key(&runs, |o| -o.value).expect("at least one restart");
    let out = &runs[best];
    let ensemble = support.ensemble(&out.point)?;
    Ok(RoofResult {
        value: ensemble.average_entanglement(),
        ensemble,
        restarts_used: restarts,
        converged: out.converged || out.last_improvement.abs() < opts.tol,
    })
}
