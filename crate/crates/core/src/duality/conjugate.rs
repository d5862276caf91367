//! `E*(X) = max_ψ ⟨ψ|X|ψ⟩ − E(ψ)` by multi-restart ascent on the unit
//! sphere, optionally restricted to a subspace.

use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::optim::SearchOptions;
use crate::optim::{self, Geometry, Settings};
use crate::roof::{apply_on_a, apply_on_b, smaller_reduction, vector_entanglement};
use crate::spectra::{
    c, eigh_matrix, expectation, sample, BipartiteDims, CMat, CVec, HermitianOperator,
    PureStateVector,
};

#[derive(Debug, Clone)]
pub struct ConjugateResult {
    pub value: f64,
    pub argmax_state: PureStateVector,
    pub restarts_used: usize,
}

/// `⟨ψ|X|ψ⟩ − E(ψ)` over unit `ψ = Q z`, where `Q` is an isometry onto
/// the allowed subspace (the whole space when `None`).
pub(crate) struct ConjugateProblem<'a> {
    pub dims: BipartiteDims,
    pub x: &'a CMat,
    pub subspace: Option<&'a CMat>,
}

impl ConjugateProblem<'_> {
    fn lift(&self, z: &CVec) -> CVec {
        match self.subspace {
            Some(q) => q * z,
            None => z.clone(),
        }
    }

    fn local_dim(&self) -> usize {
        self.subspace.map_or(self.dims.total(), |q| q.ncols())
    }

    pub fn value_of(&self, psi: &CVec) -> f64 {
        expectation(self.x, psi) - vector_entanglement(psi, self.dims)
    }

    /// Negated objective and its Euclidean gradient in the local coordinates.
    fn negated(&self, zmat: &CMat) -> (f64, CMat) {
        let z: CVec = zmat.column(0).into_owned();
        let psi = self.lift(&z);
        let xpsi = self.x * &psi;
        let red = smaller_reduction(&psi, self.dims);
        let s = eigh_matrix(&red).expect("reduced state diagonalizes");
        let ent: f64 = s
            .eigenvalues
            .iter()
            .filter(|&&m| m > 0.0)
            .map(|&m| -m * m.ln())
            .sum();
        let value = psi.dotc(&xpsi).re - ent;
        // ∂(−Tr ρ ln ρ)/∂ψ* = −((ln ρ + 𝕀) ⊗ 𝕀) ψ on the reduced side.
        let log_red = s.apply(|m| m.max(1e-300).ln() + 1.0);
        let ent_grad = if self.dims.dim_a <= self.dims.dim_b {
            apply_on_a(&log_red, &psi, self.dims)
        } else {
            apply_on_b(&log_red, &psi, self.dims)
        };
        // minimize −value: ∂/∂ψ* = −Xψ − (ln ρ + 𝕀)ψ
        let g_psi = (xpsi + ent_grad) * c(-2.0, 0.0);
        let g = match self.subspace {
            Some(q) => q.adjoint() * g_psi,
            None => g_psi,
        };
        (-value, CMat::from_column_slice(g.len(), 1, g.as_slice()))
    }

    /// Deterministic starting points: top eigenvector of the (restricted)
    /// `X` and the product of its leading Schmidt pair.
    fn default_seeds(&self) -> Vec<CVec> {
        let local = match self.subspace {
            Some(q) => q.adjoint() * self.x * q,
            None => self.x.clone(),
        };
        let Ok(s) = eigh_matrix(&local) else {
            return Vec::new();
        };
        let top = s.top_vector();
        let mut seeds = vec![top.clone()];
        if let Some(prod) = leading_product(&self.lift(&top), self.dims) {
            let z = match self.subspace {
                Some(q) => q.adjoint() * prod,
                None => prod,
            };
            if z.norm() > 1e-6 {
                seeds.push(z.unscale(z.norm()));
            }
        }
        seeds
    }

    fn run(&self, z0: CVec, settings: &Settings) -> (f64, CVec) {
        let n = self.local_dim();
        let out = optim::minimize(
            Geometry::Stiefel,
            CMat::from_column_slice(n, 1, z0.as_slice()),
            |z| self.negated(z),
            settings,
        );
        let z: CVec = out.point.column(0).into_owned();
        let psi = self.lift(&z);
        let psi = psi.unscale(psi.norm());
        (self.value_of(&psi), psi)
    }

    /// Best value over default seeds, `extra` full-space seeds and
    /// `opts.restarts` random starts.
    pub fn maximize(&self, extra: &[CVec], opts: &SearchOptions) -> (f64, CVec) {
        let mut starts: Vec<CVec> = self.default_seeds();
        for e in extra {
            let z = match self.subspace {
                Some(q) => q.adjoint() * e,
                None => e.clone(),
            };
            if z.norm() > 1e-12 {
                starts.push(z.unscale(z.norm()));
            }
        }
        let fixed = starts.len();
        let n = self.local_dim();
        let settings = conjugate_settings(opts);
        let runs = optim::run_restarts(
            fixed + opts.restarts,
            opts.seed,
            |i, rng: &mut ChaCha8Rng| {
                let z0 = if i < fixed {
                    starts[i].clone()
                } else {
                    sample::haar_vector(rng, n)
                };
                self.run(z0, &settings)
            },
        );
        let best = optim::argmax_by_key(&runs, |r| r.0).expect("at least one start");
        runs[best].clone()
    }
}

fn conjugate_settings(opts: &SearchOptions) -> Settings {
    Settings {
        max_iter: opts.max_iter,
        grad_tol: 1e-11,
        f_tol: 1e-16,
        patience: 6,
        memory: 12,
    }
}

/// Normalized product of the leading Schmidt vectors of `psi`.
pub(crate) fn leading_product(psi: &CVec, dims: BipartiteDims) -> Option<CVec> {
    let (da, db) = (dims.dim_a, dims.dim_b);
    let coeff = CMat::from_fn(da, db, |a, b| psi[a * db + b]);
    let svd = coeff.svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let mut best = 0;
    for k in 1..svd.singular_values.len() {
        if svd.singular_values[k] > svd.singular_values[best] {
            best = k;
        }
    }
    let a: CVec = u.column(best).into_owned();
    let b: CVec = vt.row(best).transpose();
    Some(a.kronecker(&b))
}

/// The conjugate functional at `X`: a maximizing pure state and its value,
/// which is an achieved point and hence a lower bound on the true maximum.
pub fn conjugate_e(x: &HermitianOperator, opts: &SearchOptions) -> Result<ConjugateResult> {
    conjugate_e_seeded(x, &[], opts)
}

/// [`conjugate_e`] with additional deterministic starting vectors.
pub fn conjugate_e_seeded(
    x: &HermitianOperator,
    seeds: &[CVec],
    opts: &SearchOptions,
) -> Result<ConjugateResult> {
    x.dims().require_single("conjugate_e")?;
    let problem = ConjugateProblem {
        dims: x.dims(),
        x: x.matrix(),
        subspace: None,
    };
    let (value, psi) = problem.maximize(seeds, opts);
    Ok(ConjugateResult {
        value,
        argmax_state: PureStateVector::normalized(x.dims(), psi)?,
        restarts_used: opts.restarts,
    })
}
