//! Maximization of `λ_max(Q† (B + K (𝕀 ⊗ f(τ)) K) Q)` over density
//! matrices `τ` on `H_B`.
//!
//! With `f = log`, `K = 𝕀` and `B = log M` this is the max-eigenvalue form
//! of `g`; with `f(x) = x^p`, `K = M^{p/2}` and `B = 0` it is `h_p`. Both
//! admit a monotone alternation: take the top eigenvector `v`, form
//! `Ω = Tr_A |Kv⟩⟨Kv|`, and move to `τ ∝ Ω` (logarithm) or `τ ∝ Ω^q`
//! (powers). A Riemannian polish on `τ = YY†`, `‖Y‖_F = 1` follows.

use rand_chacha::ChaCha8Rng;

use crate::optim::{self, Geometry, SearchOptions, Settings};
use crate::spectra::{c, eigh_matrix, reduce_vector_to_b, sample, CMat, CVec, Spectrum};

/// Eigenvalues of `τ` are floored here before `log` or derivatives.
const EIGEN_FLOOR: f64 = 1e-14;
const BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TauMap {
    Log,
    Power(f64),
}

impl TauMap {
    fn value(&self, x: f64) -> f64 {
        match *self {
            TauMap::Log => x.max(EIGEN_FLOOR).ln(),
            TauMap::Power(p) => x.max(0.0).powf(p),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        let x = x.max(EIGEN_FLOOR);
        match *self {
            TauMap::Log => 1.0 / x,
            TauMap::Power(p) => p * x.powf(p - 1.0),
        }
    }

    fn divided_difference(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.max(EIGEN_FLOOR), y.max(EIGEN_FLOOR));
        if (x - y).abs() <= 1e-10 * x.max(y) {
            self.derivative(0.5 * (x + y))
        } else {
            (self.value(x) - self.value(y)) / (x - y)
        }
    }
}

pub(crate) struct TauProblem {
    pub dim_a: usize,
    pub dim_b: usize,
    pub map: TauMap,
    /// `K`; identity when `None`.
    pub kernel: Option<CMat>,
    /// `B`; zero when `None`.
    pub base: Option<CMat>,
    /// Isometry `Q` onto the allowed subspace; everything when `None`.
    pub subspace: Option<CMat>,
}

#[derive(Debug, Clone)]
pub(crate) struct TauPoint {
    /// `λ_max` for logarithms, `(1/p) ln λ_max` for powers.
    pub score: f64,
    pub tau: CMat,
    /// Top eigenvector lifted to the full space.
    pub vector: CVec,
    pub boundary: bool,
}

struct Evaluation {
    lambda: f64,
    /// `K Q v`
    w: CVec,
    /// `Q v`
    vector: CVec,
    tau_spec: Spectrum,
}

impl TauProblem {
    fn evaluate(&self, tau: &CMat) -> Evaluation {
        let tau_spec = eigh_matrix(tau).expect("tau diagonalizes");
        let ftau = tau_spec.apply(|x| self.map.value(x));
        let lifted = CMat::identity(self.dim_a, self.dim_a).kronecker(&ftau);
        let mut a = match &self.kernel {
            Some(k) => k * lifted * k,
            None => lifted,
        };
        if let Some(b) = &self.base {
            a += b;
        }
        let local = match &self.subspace {
            Some(q) => q.adjoint() * a * q,
            None => a,
        };
        let local = crate::spectra::symmetrize(&local);
        let s = eigh_matrix(&local).expect("operator diagonalizes");
        let v = s.top_vector();
        let vector = match &self.subspace {
            Some(q) => q * v,
            None => v,
        };
        let w = match &self.kernel {
            Some(k) => k * &vector,
            None => vector.clone(),
        };
        Evaluation {
            lambda: s.max(),
            w,
            vector,
            tau_spec,
        }
    }

    fn score_of(&self, lambda: f64) -> f64 {
        match self.map {
            TauMap::Log => lambda,
            TauMap::Power(p) => {
                if lambda > 0.0 {
                    lambda.ln() / p
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    fn omega(&self, ev: &Evaluation) -> CMat {
        reduce_vector_to_b(&ev.w, self.dim_a, self.dim_b)
    }

    /// Gradient of `λ_max` with respect to `τ` (Hermitian, `dλ = Tr[G dτ]`).
    fn lambda_gradient(&self, ev: &Evaluation) -> CMat {
        let omega = self.omega(ev);
        let w = &ev.tau_spec.eigenvectors;
        let mu = &ev.tau_spec.eigenvalues;
        let mut inner = w.adjoint() * omega * w;
        for j in 0..mu.len() {
            for k in 0..mu.len() {
                inner[(j, k)] *= c(self.map.divided_difference(mu[j], mu[k]), 0.0);
            }
        }
        w * inner * w.adjoint()
    }

    fn point(&self, tau: CMat) -> TauPoint {
        let ev = self.evaluate(&tau);
        TauPoint {
            score: self.score_of(ev.lambda),
            boundary: ev.tau_spec.min() < BOUNDARY_TOL,
            vector: ev.vector,
            tau,
        }
    }

    fn alternate(&self, tau0: CMat, max_iter: usize) -> CMat {
        let mut tau = tau0;
        let mut ev = self.evaluate(&tau);
        let mut score = self.score_of(ev.lambda);
        for _ in 0..max_iter {
            let omega = self.omega(&ev);
            let next = match self.map {
                TauMap::Log => omega,
                TauMap::Power(p) => {
                    let s = eigh_matrix(&omega).expect("reduced state diagonalizes");
                    let top = s.max();
                    if p >= 1.0 - 1e-12 {
                        // q = ∞: the Hölder maximizer is the top eigenprojector.
                        let v = s.top_vector();
                        &v * v.adjoint()
                    } else {
                        let q = 1.0 / (1.0 - p);
                        s.apply(|x| (x.max(0.0) / top).powf(q))
                    }
                }
            };
            let tr = next.trace().re;
            if !(tr > 0.0) {
                break;
            }
            let next = next.unscale(tr);
            let next_ev = self.evaluate(&next);
            let next_score = self.score_of(next_ev.lambda);
            if !(next_score > score) {
                break;
            }
            let gain = next_score - score;
            tau = next;
            ev = next_ev;
            score = next_score;
            if gain <= 1e-15 * score.abs().max(1.0) {
                break;
            }
        }
        tau
    }

    fn polish(&self, tau0: &CMat, max_iter: usize) -> CMat {
        let db = self.dim_b;
        let s = eigh_matrix(tau0).expect("tau diagonalizes");
        let y0 = s.apply(|x| x.max(0.0).sqrt());
        let y0 = CMat::from_column_slice(db * db, 1, y0.as_slice());
        let settings = Settings {
            max_iter,
            grad_tol: 1e-12,
            f_tol: 1e-16,
            patience: 6,
            memory: 10,
        };
        let out = optim::minimize(
            Geometry::Stiefel,
            y0,
            |yv| {
                let y = CMat::from_column_slice(db, db, yv.as_slice());
                let tau = crate::spectra::symmetrize(&(&y * y.adjoint()));
                let ev = self.evaluate(&tau);
                let score = self.score_of(ev.lambda);
                if !score.is_finite() {
                    return (f64::INFINITY, CMat::zeros(db * db, 1));
                }
                let scale = match self.map {
                    TauMap::Log => 1.0,
                    TauMap::Power(p) => 1.0 / (p * ev.lambda),
                };
                let g = self.lambda_gradient(&ev) * &y * c(-2.0 * scale, 0.0);
                (-score, CMat::from_column_slice(db * db, 1, g.as_slice()))
            },
            &settings,
        );
        let y = CMat::from_column_slice(db, db, out.point.as_slice());
        let tau = crate::spectra::symmetrize(&(&y * y.adjoint()));
        let tr = tau.trace().re;
        tau.unscale(tr)
    }

    fn refine(&self, tau0: CMat, max_iter: usize) -> TauPoint {
        let alt = self.alternate(tau0, max_iter);
        let polished = self.polish(&alt, max_iter);
        // A second alternation pass cleans up after the polish.
        let again = self.alternate(polished, max_iter);
        let candidates = [self.point(alt), self.point(again)];
        let best = optim::argmax_by_key(&candidates, |p| p.score).unwrap_or(0);
        candidates[best].clone()
    }

    /// Best point over the maximally mixed start, `warm` starts and
    /// `opts.restarts` random full-rank starts.
    pub fn maximize(&self, warm: &[CMat], opts: &SearchOptions) -> TauPoint {
        let db = self.dim_b;
        let mut starts = vec![CMat::identity(db, db).unscale(db as f64)];
        starts.extend(warm.iter().cloned());
        let fixed = starts.len();
        let runs = optim::run_restarts(
            fixed + opts.restarts,
            opts.seed,
            |i, rng: &mut ChaCha8Rng| {
                let tau0 = if i < fixed {
                    starts[i].clone()
                } else {
                    let g = sample::gaussian_matrix(rng, db, db);
                    let t = &g * g.adjoint();
                    let tr = t.trace().re;
                    t.unscale(tr)
                };
                self.refine(tau0, opts.max_iter)
            },
        );
        let best = optim::argmax_by_key(&runs, |p| p.score).expect("at least one start");
        runs[best].clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{matrix_fn_raw, BipartiteDims, MatrixFunction};

    fn problem_for(m: &CMat, map: TauMap) -> TauProblem {
        match map {
            TauMap::Log => TauProblem {
                dim_a: 2,
                dim_b: 2,
                map,
                kernel: None,
                base: Some(matrix_fn_raw(m, MatrixFunction::Log).unwrap()),
                subspace: None,
            },
            TauMap::Power(p) => TauProblem {
                dim_a: 2,
                dim_b: 2,
                map,
                kernel: Some(matrix_fn_raw(m, MatrixFunction::Power(p / 2.0)).unwrap()),
                base: None,
                subspace: None,
            },
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = sample::rng_for(5, 0);
        let m = match sample::sample(sample::SampleKind::FilterM, BipartiteDims::single(2, 2), 4) {
            sample::Sample::Operator(h) => h.into_matrix(),
            _ => unreachable!(),
        };
        for map in [TauMap::Log, TauMap::Power(0.3)] {
            let problem = problem_for(&m, map);
            let g = sample::gaussian_matrix(&mut rng, 2, 2);
            let tau = (&g * g.adjoint()).unscale((&g * g.adjoint()).trace().re);
            let d = crate::spectra::symmetrize(&sample::gaussian_matrix(&mut rng, 2, 2));
            let ev = problem.evaluate(&tau);
            let grad = problem.lambda_gradient(&ev);
            let h = 1e-6;
            let up = problem.evaluate(&(&tau + &d * c(h, 0.0))).lambda;
            let down = problem.evaluate(&(&tau - &d * c(h, 0.0))).lambda;
            let fd = (up - down) / (2.0 * h);
            let analytic = crate::spectra::trace_product(&grad, &d);
            assert!((fd - analytic).abs() < 1e-6, "{map:?}: {fd} vs {analytic}");
        }
    }

    #[test]
    fn product_operator_reaches_boundary() {
        // log(M_A ⊗ M_B): the optimum puts τ on the top eigenvector of M_B.
        let ma = CMat::from_diagonal(&CVec::from_vec(vec![c(0.5, 0.0), c(0.25, 0.0)]));
        let mb = CMat::from_diagonal(&CVec::from_vec(vec![c(0.2, 0.0), c(0.8, 0.0)]));
        let m = ma.kronecker(&mb);
        let best = problem_for(&m, TauMap::Log).maximize(&[], &SearchOptions::default());
        let expected = 0.5f64.ln() + 0.8f64.ln();
        assert!(
            (best.score - expected).abs() < 1e-9,
            "{} vs {expected}",
            best.score
        );
        assert!(best.boundary);
    }
}
