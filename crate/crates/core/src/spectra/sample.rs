//! Seeded random states and operators.
//!
//! Every sampler takes its randomness explicitly; the `*_seeded` helpers
//! build a fresh ChaCha stream from a `u64` seed so identical seeds give
//! identical objects.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    c, eigh_matrix, BipartiteDims, CMat, CVec, DensityMatrix, HermitianOperator, PureStateVector,
};

/// Lower clip for the spectrum of sampled filter operators `M`.
pub const FILTER_EPS: f64 = 1e-6;

/// Deterministic generator for `(seed, stream)`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> super::C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Unit vector drawn from the unitarily invariant measure on `C^n`.
pub fn haar_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.norm();
        if norm > 1e-300 {
            return v.unscale(norm);
        }
    }
}

pub fn haar_pure<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims) -> PureStateVector {
    PureStateVector::new(dims, haar_vector(rng, dims.total())).expect("normalized by construction")
}

/// Induced (Ginibre) measure: `ρ = G G† / Tr(G G†)` with `G` of size
/// `d × rank`. `rank = d` gives full-rank states almost surely.
pub fn ginibre_density_rank<R: Rng + ?Sized>(
    rng: &mut R,
    dims: BipartiteDims,
    rank: usize,
) -> DensityMatrix {
    let n = dims.total();
    let g = gaussian_matrix(rng, n, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_parts_unchecked(dims, super::symmetrize(&(m / c(tr, 0.0))))
}

pub fn ginibre_density<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims) -> DensityMatrix {
    ginibre_density_rank(rng, dims, dims.total())
}

/// GUE-distributed Hermitian operator, `(G + G†)/2`.
pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims) -> HermitianOperator {
    let n = dims.total();
    let g = gaussian_matrix(rng, n, n);
    HermitianOperator::new(dims, g).expect("square by construction")
}

/// Random `0 < M ≤ 𝕀`: a GUE draw scaled to unit operator norm, mapped by
/// `x ↦ (x + 1)/2` and clipped to `[FILTER_EPS, 1]`.
pub fn filter_m<R: Rng + ?Sized>(rng: &mut R, dims: BipartiteDims) -> HermitianOperator {
    let h = hermitian(rng, dims);
    let s = eigh_matrix(h.matrix()).expect("GUE sample diagonalizes");
    let scale = s
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()))
        .max(1e-300);
    let m = s.apply(|l| (0.5 * (l / scale + 1.0)).clamp(FILTER_EPS, 1.0));
    HermitianOperator::new(dims, m).expect("square by construction")
}

/// Haar-random unitary (QR of a Ginibre matrix with phase correction).
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = gaussian_matrix(rng, n, n);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    HaarPure,
    GinibreDensity,
    Hermitian,
    FilterM,
}

#[derive(Debug, Clone)]
pub enum Sample {
    Pure(PureStateVector),
    Density(DensityMatrix),
    Operator(HermitianOperator),
}

/// Seeded dispatch over the samplers above.
pub fn sample(kind: SampleKind, dims: BipartiteDims, seed: u64) -> Sample {
    let mut rng = rng_for(seed, 0);
    match kind {
        SampleKind::HaarPure => Sample::Pure(haar_pure(&mut rng, dims)),
        SampleKind::GinibreDensity => Sample::Density(ginibre_density(&mut rng, dims)),
        SampleKind::Hermitian => Sample::Operator(hermitian(&mut rng, dims)),
        SampleKind::FilterM => Sample::Operator(filter_m(&mut rng, dims)),
    }
}
