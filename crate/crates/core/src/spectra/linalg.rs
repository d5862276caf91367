use nalgebra::linalg::SymmetricEigen;
use serde::{Deserialize, Serialize};

use super::{c, BipartiteDims, CMat, CVec, DensityMatrix, HermitianOperator, Spectrum, RANK_TOL};
use crate::error::{Error, Result};

/// `(m + m†)/2`.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// `max |m − m†|` entrywise.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `Re ⟨v|m|v⟩`.
pub fn expectation(m: &CMat, v: &CVec) -> f64 {
    v.dotc(&(m * v)).re
}

/// `Re Tr[a b]` computed without forming the product.
pub fn trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

const EIGH_MAX_SWEEPS: usize = 10_000;

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn eigh_matrix(m: &CMat) -> Result<Spectrum> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, EIGH_MAX_SWEEPS).ok_or(
        Error::Decomposition {
            dim: n,
            norm: m.norm(),
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

pub fn eigh(h: &HermitianOperator) -> Result<Spectrum> {
    eigh_matrix(h.matrix())
}

/// Largest eigenvalue and a unit eigenvector for it.
pub fn top_eigenpair(m: &CMat) -> Result<(f64, CVec)> {
    let s = eigh_matrix(m)?;
    Ok((s.max(), s.top_vector()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MatrixFunction {
    Log,
    Exp,
    Power(f64),
}

/// Spectral calculus `f(h) = V diag(f(λ)) V†`.
///
/// `Log` and negative powers need a strictly positive spectrum; use
/// [`log_restricted`] for singular PSD input. Non-negative powers accept
/// eigenvalues down to `-RANK_TOL`, clamping them at zero.
pub fn matrix_fn(h: &HermitianOperator, f: MatrixFunction) -> Result<HermitianOperator> {
    let m = matrix_fn_raw(h.matrix(), f)?;
    Ok(HermitianOperator::new(h.dims(), m).expect("shape preserved"))
}

pub fn matrix_fn_raw(m: &CMat, f: MatrixFunction) -> Result<CMat> {
    let s = eigh_matrix(m)?;
    match f {
        MatrixFunction::Exp => Ok(s.apply(f64::exp)),
        MatrixFunction::Log => {
            let min = s.min();
            if min <= 0.0 {
                return Err(Error::domain(format!(
                    "log of operator with eigenvalue {min:.3e} <= 0"
                )));
            }
            Ok(s.apply(f64::ln))
        }
        MatrixFunction::Power(t) => {
            let min = s.min();
            if t < 0.0 && min <= 0.0 {
                return Err(Error::domain(format!(
                    "negative power {t} of operator with eigenvalue {min:.3e} <= 0"
                )));
            }
            if min < -RANK_TOL {
                return Err(Error::domain(format!(
                    "fractional power of operator with negative eigenvalue {min:.3e}"
                )));
            }
            if t == 0.0 {
                // Support projector convention: 0^0 = 0.
                return Ok(s.apply(|l| if l > RANK_TOL { 1.0 } else { 0.0 }));
            }
            Ok(s.apply(|l| if l > 0.0 { l.powf(t) } else { 0.0 }))
        }
    }
}

/// Logarithm of a PSD operator read on its support.
///
/// Eigenvalues at or below `RANK_TOL` are dropped. `support` is an isometry
/// whose columns span the range and `log_block` is `log M` in that basis;
/// any state with weight outside the range gets `Tr[ρ log M] = −∞`.
#[derive(Debug, Clone)]
pub struct RestrictedLog {
    pub support: CMat,
    pub log_block: CMat,
    /// True when the operator is singular (the complement is non-trivial).
    pub rank_deficient: bool,
}

impl RestrictedLog {
    pub fn rank(&self) -> usize {
        self.support.ncols()
    }

    /// `log M` lifted back to the full space with zeros on the kernel.
    /// Only meaningful for vectors supported on the range.
    pub fn embedded(&self) -> CMat {
        &self.support * &self.log_block * self.support.adjoint()
    }
}

pub fn log_restricted(m: &CMat) -> Result<RestrictedLog> {
    let s = eigh_matrix(m)?;
    if s.min() < -RANK_TOL {
        return Err(Error::domain(format!(
            "log of operator with negative eigenvalue {:.3e}",
            s.min()
        )));
    }
    let r = s.rank(RANK_TOL);
    let n = m.nrows();
    let support = s.eigenvectors.columns(0, r).into_owned();
    let diag = CVec::from_iterator(r, s.eigenvalues[..r].iter().map(|&l| c(l.ln(), 0.0)));
    Ok(RestrictedLog {
        support,
        log_block: CMat::from_diagonal(&diag),
        rank_deficient: r < n,
    })
}

pub fn kron_mat(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

/// Which tensor product a Kronecker product represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KronLevel {
    /// `⊗`: an operator on `H_A` with one on `H_B`.
    AB,
    /// `⊠`: two single-copy operators on copies I and II.
    Copies,
}

/// Kronecker product with dims bookkeeping.
///
/// At `AB` level `x` must live on `H_A` alone (dims `dA × 1`) and `y` on
/// `H_B` alone (`1 × dB`). At `Copies` level both must be single-copy with
/// identical dims.
pub fn kron(
    x: &HermitianOperator,
    y: &HermitianOperator,
    level: KronLevel,
) -> Result<HermitianOperator> {
    let (dx, dy) = (x.dims(), y.dims());
    let dims = match level {
        KronLevel::AB => {
            if dx.copies != 1 || dy.copies != 1 || dx.dim_b != 1 || dy.dim_a != 1 {
                return Err(Error::shape(
                    "AB-level kron needs an H_A operator and an H_B operator",
                ));
            }
            BipartiteDims::single(dx.dim_a, dy.dim_b)
        }
        KronLevel::Copies => {
            if dx.copies != 1 || dy.copies != 1 {
                return Err(Error::shape(
                    "copy-level kron of operators that already span two copies",
                ));
            }
            if dx != dy {
                return Err(Error::shape(
                    "copy-level kron of operators with different dims",
                ));
            }
            dx.with_copies(2)?
        }
    };
    HermitianOperator::new(dims, kron_mat(x.matrix(), y.matrix()))
}

/// Two-copy product state `ρ₁ ⊠ ρ₂`.
pub fn kron_states(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<DensityMatrix> {
    let (d1, d2) = (r1.dims(), r2.dims());
    if d1.copies != 1 || d1 != d2 {
        return Err(Error::shape(
            "kron_states needs two single-copy states of equal dims",
        ));
    }
    Ok(DensityMatrix::from_parts_unchecked(
        d1.with_copies(2)?,
        kron_mat(r1.matrix(), r2.matrix()),
    ))
}

/// Kronecker sum `X₁ ⊠ 𝕀 + 𝕀 ⊠ X₂`.
pub fn kron_sum(x1: &HermitianOperator, x2: &HermitianOperator) -> Result<HermitianOperator> {
    let (d1, d2) = (x1.dims(), x2.dims());
    if d1.copies != 1 || d2.copies != 1 || d1 != d2 {
        return Err(Error::shape(
            "kron_sum needs two single-copy operators of identical dims",
        ));
    }
    let n = d1.total();
    let id = CMat::identity(n, n);
    let z = kron_mat(x1.matrix(), &id) + kron_mat(&id, x2.matrix());
    HermitianOperator::new(d1.with_copies(2)?, z)
}

/// Traces out the factors flagged in `traced` from an operator on
/// `⊗_k C^{factors[k]}` (first factor most significant).
pub fn trace_out(m: &CMat, factors: &[usize], traced: &[bool]) -> CMat {
    assert_eq!(factors.len(), traced.len());
    let total: usize = factors.iter().product();
    assert_eq!(m.nrows(), total, "operator size does not match factor list");
    let kept: usize = factors
        .iter()
        .zip(traced)
        .filter(|(_, &t)| !t)
        .map(|(d, _)| d)
        .product();
    let mut out = CMat::zeros(kept, kept);
    let digits = |mut idx: usize| -> Vec<usize> {
        let mut ds = vec![0; factors.len()];
        for k in (0..factors.len()).rev() {
            ds[k] = idx % factors[k];
            idx /= factors[k];
        }
        ds
    };
    let split = |ds: &[usize]| -> (usize, usize) {
        let (mut keep, mut gone) = (0, 0);
        for (k, &d) in ds.iter().enumerate() {
            if traced[k] {
                gone = gone * factors[k] + d;
            } else {
                keep = keep * factors[k] + d;
            }
        }
        (keep, gone)
    };
    let coords: Vec<(usize, usize)> = (0..total).map(|i| split(&digits(i))).collect();
    for i in 0..total {
        let (ki, gi) = coords[i];
        for j in 0..total {
            let (kj, gj) = coords[j];
            if gi == gj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    out
}

/// Subsystem removed by [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
    /// A whole I or II copy of a two-copy state.
    Copy,
}

/// Partial trace of a state.
///
/// Single-copy input accepts `A` or `B` (copy index 0) and returns the
/// reduction on the other party, with dims `1 × dB` or `dA × 1`. Two-copy
/// input accepts `Copy` with index 0 (trace out copy I) or 1 (trace out
/// copy II) and returns the single-copy state of the other copy.
pub fn partial_trace(
    rho: &DensityMatrix,
    subsystem: Subsystem,
    copy_index: usize,
) -> Result<DensityMatrix> {
    let d = rho.dims();
    let (out, dims) = match (d.copies, subsystem) {
        (1, Subsystem::A) | (1, Subsystem::B) => {
            if copy_index != 0 {
                return Err(Error::shape(format!(
                    "copy index {copy_index} on a single-copy state"
                )));
            }
            let trace_a = subsystem == Subsystem::A;
            let m = trace_out(rho.matrix(), &[d.dim_a, d.dim_b], &[trace_a, !trace_a]);
            let dims = if trace_a {
                BipartiteDims::single(1, d.dim_b)
            } else {
                BipartiteDims::single(d.dim_a, 1)
            };
            (m, dims)
        }
        (2, Subsystem::Copy) => {
            if copy_index > 1 {
                return Err(Error::shape(format!(
                    "copy index {copy_index} out of range"
                )));
            }
            let n = d.copy_dim();
            let m = trace_out(rho.matrix(), &[n, n], &[copy_index == 0, copy_index == 1]);
            (m, d.with_copies(1)?)
        }
        (copies, sub) => {
            return Err(Error::shape(format!(
                "cannot trace out {sub:?} from a state with {copies} copies"
            )))
        }
    };
    Ok(DensityMatrix::from_parts_unchecked(dims, symmetrize(&out)))
}

/// Reduced state on `H_B` of a single-copy vector: `Tr_A |ψ⟩⟨ψ|`.
pub fn reduce_vector_to_b(psi: &CVec, dim_a: usize, dim_b: usize) -> CMat {
    let mut out = CMat::zeros(dim_b, dim_b);
    for a in 0..dim_a {
        let block = psi.rows(a * dim_b, dim_b);
        out += block * block.adjoint();
    }
    out
}

/// Reduced state on `H_A` of a single-copy vector: `Tr_B |ψ⟩⟨ψ|`.
pub fn reduce_vector_to_a(psi: &CVec, dim_a: usize, dim_b: usize) -> CMat {
    let mut out = CMat::zeros(dim_a, dim_a);
    for i in 0..dim_a {
        for j in i..dim_a {
            let mut acc = c(0.0, 0.0);
            for b in 0..dim_b {
                acc += psi[i * dim_b + b] * psi[j * dim_b + b].conj();
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc.conj();
        }
    }
    out
}

/// Index permutation taking the two-copy order `(a1 b1 a2 b2)` to the
/// grouped order `(a1 a2 b1 b2)`: `perm[old] = new`.
pub fn grouping_permutation(dims: BipartiteDims) -> Vec<usize> {
    let (da, db) = (dims.dim_a, dims.dim_b);
    let n = dims.copy_dim();
    let mut perm = vec![0; n * n];
    for a1 in 0..da {
        for b1 in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let old = (a1 * db + b1) * n + (a2 * db + b2);
                    let new = (a1 * da + a2) * db * db + (b1 * db + b2);
                    perm[old] = new;
                }
            }
        }
    }
    perm
}

/// Re-indexes a two-copy operator onto the grouped bipartition
/// `A_I A_II | B_I B_II`.
pub fn regroup_matrix(m: &CMat, dims: BipartiteDims) -> Result<CMat> {
    if dims.copies != 2 {
        return Err(Error::shape("regrouping needs a two-copy operator"));
    }
    dims.require_size(m.nrows(), m.ncols())?;
    let perm = grouping_permutation(dims);
    let n = perm.len();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

pub fn regroup_vector(v: &CVec, dims: BipartiteDims) -> Result<CVec> {
    if dims.copies != 2 || v.len() != dims.total() {
        return Err(Error::shape("regrouping needs a two-copy vector"));
    }
    let perm = grouping_permutation(dims);
    let mut out = CVec::zeros(v.len());
    for (old, &new) in perm.iter().enumerate() {
        out[new] = v[old];
    }
    Ok(out)
}

/// Inverse of [`regroup_vector`].
pub fn ungroup_vector(v: &CVec, dims: BipartiteDims) -> Result<CVec> {
    if dims.copies != 2 || v.len() != dims.total() {
        return Err(Error::shape("ungrouping needs a two-copy vector"));
    }
    let perm = grouping_permutation(dims);
    let mut out = CVec::zeros(v.len());
    for (old, &new) in perm.iter().enumerate() {
        out[old] = v[new];
    }
    Ok(out)
}

pub fn regroup_state(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let m = regroup_matrix(rho.matrix(), rho.dims())?;
    Ok(DensityMatrix::from_parts_unchecked(rho.dims().grouped(), m))
}

pub fn regroup_operator(h: &HermitianOperator) -> Result<HermitianOperator> {
    let m = regroup_matrix(h.matrix(), h.dims())?;
    HermitianOperator::new(h.dims().grouped(), m)
}

/// Schatten q-norm `(Σ σᵢ^q)^{1/q}`; `q = f64::INFINITY` gives the operator
/// norm. Hermitian input is handled through its eigenvalues.
pub fn schatten_norm(m: &CMat, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::domain(format!(
            "Schatten index q = {q} must be >= 1"
        )));
    }
    let sv: Vec<f64> = if m.is_square() && hermitian_defect(m) <= 1e-12 {
        eigh_matrix(&symmetrize(m))?
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .collect()
    } else {
        m.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    Ok(schatten_from_singular_values(&sv, q))
}

pub fn schatten_from_singular_values(sv: &[f64], q: f64) -> f64 {
    let top = sv.iter().fold(0.0f64, |m, &s| m.max(s.abs()));
    if q.is_infinite() || top == 0.0 {
        return top;
    }
    // Factor out the largest value so high powers do not underflow.
    let sum: f64 = sv.iter().map(|s| (s.abs() / top).powf(q)).sum();
    top * sum.powf(1.0 / q)
}

/// Shannon entropy in nats of a probability vector, `0 ln 0 = 0`.
pub fn entropy_of_probabilities(ps: &[f64]) -> f64 {
    ps.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

/// `S(ρ) = −Tr ρ ln ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    matrix_entropy(rho.matrix())
}

/// Entropy of a PSD matrix read through its eigenvalues, with tiny negative
/// round-off clamped to zero.
pub fn matrix_entropy(m: &CMat) -> Result<f64> {
    let s = eigh_matrix(m)?;
    let ps: Vec<f64> = s.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    Ok(entropy_of_probabilities(&ps))
}
