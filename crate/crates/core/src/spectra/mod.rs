//! Dense Hermitian linear algebra and quantum-state primitives.
//!
//! Index convention: within one copy amplitudes are A-major, i.e. basis
//! state `|a⟩|b⟩` sits at index `a * dim_b + b`. Across two copies the
//! copy-I index is major: `|a1 b1⟩|a2 b2⟩` sits at
//! `(a1 * dim_b + b1) * dim_a * dim_b + (a2 * dim_b + b2)`.
//!
//! All logarithms are natural, so one ebit is `ln 2 ≈ 0.6931`.

pub mod json;
mod linalg;
pub mod sample;

pub use linalg::*;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Tolerance on `entries - entries†` accepted when checking Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues at or below this count as zero when taking supports and ranks.
pub const RANK_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// The A–B split of one Hilbert-space copy together with the number of
/// I–II copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    #[serde(rename = "dA")]
    pub dim_a: usize,
    #[serde(rename = "dB")]
    pub dim_b: usize,
    pub copies: usize,
}

impl BipartiteDims {
    pub fn new(dim_a: usize, dim_b: usize, copies: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::shape(format!(
                "party dimensions must be positive, got {dim_a}x{dim_b}"
            )));
        }
        if !(1..=2).contains(&copies) {
            return Err(Error::shape(format!("copies must be 1 or 2, got {copies}")));
        }
        Ok(Self {
            dim_a,
            dim_b,
            copies,
        })
    }

    /// Single-copy `dA ⊗ dB`.
    pub fn single(dim_a: usize, dim_b: usize) -> Self {
        assert!(dim_a > 0 && dim_b > 0, "party dimensions must be positive");
        Self {
            dim_a,
            dim_b,
            copies: 1,
        }
    }

    /// Dimension of one copy, `dA · dB`.
    pub fn copy_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Total Hilbert-space dimension `(dA · dB)^copies`.
    pub fn total(&self) -> usize {
        self.copy_dim().pow(self.copies as u32)
    }

    pub fn with_copies(&self, copies: usize) -> Result<Self> {
        Self::new(self.dim_a, self.dim_b, copies)
    }

    /// The single-copy dims obtained by grouping both A parties and both B
    /// parties of a two-copy space: `(dA², dB²)`.
    pub fn grouped(&self) -> Self {
        Self::single(
            self.dim_a.pow(self.copies as u32),
            self.dim_b.pow(self.copies as u32),
        )
    }

    pub(crate) fn require_single(&self, what: &str) -> Result<()> {
        if self.copies != 1 {
            return Err(Error::shape(format!(
                "{what} needs a single-copy operand, got copies = {}",
                self.copies
            )));
        }
        Ok(())
    }

    pub(crate) fn require_size(&self, rows: usize, cols: usize) -> Result<()> {
        let n = self.total();
        if rows != n || cols != n {
            return Err(Error::shape(format!(
                "matrix is {rows}x{cols} but dims {}x{} (copies {}) require {n}x{n}",
                self.dim_a, self.dim_b, self.copies
            )));
        }
        Ok(())
    }
}

/// Bounded Hermitian operator over a declared [`BipartiteDims`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dims: BipartiteDims,
    entries: CMat,
}

impl HermitianOperator {
    /// Wraps `m`, replacing it by `(m + m†)/2` so the result is Hermitian to
    /// machine precision.
    pub fn new(dims: BipartiteDims, m: CMat) -> Result<Self> {
        dims.require_size(m.nrows(), m.ncols())?;
        Ok(Self {
            dims,
            entries: symmetrize(&m),
        })
    }

    /// Like [`HermitianOperator::new`] but rejects inputs whose Hermitian
    /// defect exceeds `tol`.
    pub fn new_checked(dims: BipartiteDims, m: CMat, tol: f64) -> Result<Self> {
        dims.require_size(m.nrows(), m.ncols())?;
        let defect = hermitian_defect(&m);
        if defect > tol {
            return Err(Error::param(format!(
                "matrix is not Hermitian: max |m - m†| = {defect:.3e} > {tol:.1e}"
            )));
        }
        Self::new(dims, m)
    }

    pub fn zeros(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self {
            dims,
            entries: CMat::zeros(n, n),
        }
    }

    pub fn identity(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self {
            dims,
            entries: CMat::identity(n, n),
        }
    }

    pub fn from_real_diagonal(dims: BipartiteDims, diag: &[f64]) -> Result<Self> {
        dims.require_size(diag.len(), diag.len())?;
        let v = CVec::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0)));
        Ok(Self {
            dims,
            entries: CMat::from_diagonal(&v),
        })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn into_matrix(self) -> CMat {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dims: self.dims,
            entries: self.entries.map(|z| z * s),
        }
    }

    /// `self + s·𝕀`.
    pub fn shift(&self, s: f64) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..entries.nrows() {
            entries[(i, i)] += s;
        }
        Self {
            dims: self.dims,
            entries,
        }
    }

    /// Expectation value `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, psi: &PureStateVector) -> f64 {
        expectation(&self.entries, psi.amplitudes())
    }

    pub fn with_dims(&self, dims: BipartiteDims) -> Result<Self> {
        dims.require_size(self.entries.nrows(), self.entries.ncols())?;
        Ok(Self {
            dims,
            entries: self.entries.clone(),
        })
    }
}

/// A normalized quantum state: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    entries: CMat,
}

impl DensityMatrix {
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    pub fn new(dims: BipartiteDims, m: CMat) -> Result<Self> {
        dims.require_size(m.nrows(), m.ncols())?;
        let defect = hermitian_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::param(format!(
                "density matrix is not Hermitian (defect {defect:.3e})"
            )));
        }
        let m = symmetrize(&m);
        let tr = m.trace().re;
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::param(format!("density matrix has trace {tr}")));
        }
        let min = eigh_matrix(&m)?.min();
        if min < -Self::POSITIVITY_TOL {
            return Err(Error::param(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { dims, entries: m })
    }

    /// Divides a PSD matrix by its trace before validating.
    pub fn from_unnormalized(dims: BipartiteDims, m: CMat) -> Result<Self> {
        let tr = m.trace().re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::param(format!(
                "cannot normalize matrix with trace {tr}"
            )));
        }
        Self::new(dims, m / c(tr, 0.0))
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self {
            dims,
            entries: CMat::identity(n, n) / c(n as f64, 0.0),
        }
    }

    pub fn from_real_diagonal(dims: BipartiteDims, diag: &[f64]) -> Result<Self> {
        dims.require_size(diag.len(), diag.len())?;
        let v = CVec::from_iterator(diag.len(), diag.iter().map(|&x| c(x, 0.0)));
        Self::new(dims, CMat::from_diagonal(&v))
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights are renormalized.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::param("mixture of zero states"))?;
        let dims = first.1.dims;
        let n = dims.total();
        let mut acc = CMat::zeros(n, n);
        let mut total = 0.0;
        for (w, rho) in parts {
            if rho.dims != dims {
                return Err(Error::shape("mixture components have different dims"));
            }
            if *w < 0.0 {
                return Err(Error::param("negative mixture weight"));
            }
            acc += rho.matrix() * c(*w, 0.0);
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::param("mixture weights sum to zero"));
        }
        Self::from_unnormalized(dims, acc)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn as_operator(&self) -> HermitianOperator {
        HermitianOperator {
            dims: self.dims,
            entries: self.entries.clone(),
        }
    }

    /// `Tr[ρ X]`.
    pub fn expectation(&self, x: &HermitianOperator) -> f64 {
        trace_product(&self.entries, x.matrix())
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        eigh_matrix(&self.entries)
    }

    /// Number of eigenvalues above [`RANK_TOL`].
    pub fn rank(&self) -> Result<usize> {
        Ok(self.spectrum()?.rank(RANK_TOL))
    }

    pub fn purity(&self) -> f64 {
        trace_product(&self.entries, &self.entries)
    }

    pub fn with_dims(&self, dims: BipartiteDims) -> Result<Self> {
        dims.require_size(self.entries.nrows(), self.entries.ncols())?;
        Ok(Self {
            dims,
            entries: self.entries.clone(),
        })
    }

    /// Skips validation; the caller guarantees the invariants.
    pub(crate) fn from_parts_unchecked(dims: BipartiteDims, entries: CMat) -> Self {
        Self { dims, entries }
    }
}

/// Normalized state vector; `projector()` gives `Ψ = |ψ⟩⟨ψ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    dims: BipartiteDims,
    amplitudes: CVec,
}

impl PureStateVector {
    pub const NORM_TOL: f64 = 1e-12;

    pub fn new(dims: BipartiteDims, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::shape(format!(
                "vector has {} amplitudes, dims require {}",
                amplitudes.len(),
                dims.total()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::param(format!("state vector has norm {norm}")));
        }
        Ok(Self { dims, amplitudes })
    }

    /// Normalizes `v` first; fails on the zero vector.
    pub fn normalized(dims: BipartiteDims, v: CVec) -> Result<Self> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::param("cannot normalize zero vector"));
        }
        Self::new(dims, v.unscale(norm))
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dims: BipartiteDims, index: usize) -> Result<Self> {
        let n = dims.total();
        if index >= n {
            return Err(Error::shape(format!(
                "basis index {index} out of range {n}"
            )));
        }
        let mut v = CVec::zeros(n);
        v[index] = c(1.0, 0.0);
        Ok(Self {
            dims,
            amplitudes: v,
        })
    }

    /// `Σ_k |k⟩|k⟩ / √d` on a `d ⊗ d` single copy.
    pub fn maximally_entangled(d: usize) -> Self {
        let dims = BipartiteDims::single(d, d);
        let mut v = CVec::zeros(d * d);
        let amp = 1.0 / (d as f64).sqrt();
        for k in 0..d {
            v[k * d + k] = c(amp, 0.0);
        }
        Self {
            dims,
            amplitudes: v,
        }
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn bell() -> Self {
        Self::maximally_entangled(2)
    }

    /// `|a⟩ ⊗ |b⟩` for normalized factors.
    pub fn product(a: &CVec, b: &CVec) -> Result<Self> {
        let dims = BipartiteDims::single(a.len(), b.len());
        Self::normalized(dims, kron_vec(a, b))
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVec {
        self.amplitudes
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            dims: self.dims,
            entries: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn with_dims(&self, dims: BipartiteDims) -> Result<Self> {
        Self::new(dims, self.amplitudes.clone())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureStateVector) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Eigendecomposition with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns aligned with `eigenvalues`.
    pub eigenvectors: CMat,
}

impl Spectrum {
    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > tol).count()
    }

    pub fn top_vector(&self) -> CVec {
        self.eigenvectors.column(0).into_owned()
    }

    /// `V diag(f(λ)) V†`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut scaled = self.eigenvectors.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= fl;
            }
        }
        symmetrize(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|l| l)
    }
}
