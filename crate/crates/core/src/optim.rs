//! Local descent on matrix manifolds and a deterministic multi-restart
//! driver.
//!
//! Points and gradients are complex matrices. The objective returns its
//! value together with the Euclidean gradient `G` for the real inner
//! product `⟨A, B⟩ = Re Tr(A† B)`, so that `df = ⟨G, dX⟩`. For a function
//! of complex variables this is `2 ∂f/∂X*`.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::spectra::{c, eigh_matrix, CMat};

/// Search space of the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    /// `{V : V†V = 𝕀}`; with one column this is the unit sphere.
    Stiefel,
    /// Unconstrained complex matrices.
    Euclidean,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub max_iter: usize,
    /// Stop once the Riemannian gradient norm drops below this.
    pub grad_tol: f64,
    /// Stop after `patience` consecutive iterations improving by less than
    /// `f_tol · max(1, |f|)`.
    pub f_tol: f64,
    pub patience: usize,
    pub memory: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            grad_tol: 1e-9,
            f_tol: 1e-14,
            patience: 5,
            memory: 12,
        }
    }
}

impl Settings {
    pub fn with_max_iter(mut self, n: usize) -> Self {
        self.max_iter = n;
        self
    }

    pub fn with_grad_tol(mut self, tol: f64) -> Self {
        self.grad_tol = tol;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub point: CMat,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Improvement achieved by the final accepted step.
    pub last_improvement: f64,
}

/// Budget shared by the multi-start searches built on [`minimize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Random starts on top of the deterministic ones.
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            max_iter: 3000,
            tol: 1e-9,
        }
    }
}

impl SearchOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

pub(crate) fn inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

impl Geometry {
    /// Projection of an ambient vector onto the tangent space at `x`.
    pub fn project(&self, x: &CMat, g: &CMat) -> CMat {
        match self {
            Geometry::Euclidean => g.clone(),
            Geometry::Stiefel => {
                let xg = x.adjoint() * g;
                let sym = (&xg + xg.adjoint()) * c(0.5, 0.0);
                g - x * sym
            }
        }
    }

    /// Polar retraction `Y (Y†Y)^{-1/2}` with `Y = x + step`.
    pub fn retract(&self, x: &CMat, step: &CMat) -> CMat {
        let y = x + step;
        match self {
            Geometry::Euclidean => y,
            Geometry::Stiefel => orthonormalize(&y),
        }
    }
}

/// Nearest isometry to `y` (polar factor). Falls back to the input when the
/// Gram matrix is numerically singular.
pub fn orthonormalize(y: &CMat) -> CMat {
    let gram = y.adjoint() * y;
    match eigh_matrix(&gram) {
        Ok(s) if s.min() > 1e-300 => y * s.apply(|l| 1.0 / l.sqrt()),
        _ => {
            let qr = y.clone().qr();
            qr.q().columns(0, y.ncols()).into_owned()
        }
    }
}

/// Minimizes `f` starting at `x0` with Riemannian L-BFGS and Armijo
/// backtracking. Vector transport is projection onto the new tangent space.
pub fn minimize<F>(geometry: Geometry, x0: CMat, mut f: F, settings: &Settings) -> Outcome
where
    F: FnMut(&CMat) -> (f64, CMat),
{
    let mut x = match geometry {
        Geometry::Stiefel => orthonormalize(&x0),
        Geometry::Euclidean => x0,
    };
    let (mut fx, egrad) = f(&x);
    let mut grad = geometry.project(&x, &egrad);
    let mut history: Vec<(CMat, CMat, f64)> = Vec::new();
    let mut stall = 0;
    let mut last_improvement = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iter {
        let gnorm = inner(&grad, &grad).sqrt();
        if !gnorm.is_finite() {
            break;
        }
        if gnorm <= settings.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut dir = lbfgs_direction(&grad, &history);
        let mut slope = inner(&grad, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir = -grad.clone();
            slope = -gnorm * gnorm;
        }
        let mut t = if history.is_empty() {
            (1.0 / gnorm).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            let step = &dir * c(t, 0.0);
            let xn = geometry.retract(&x, &step);
            let (fn_, gn) = f(&xn);
            if fn_.is_finite() && fn_ <= fx + 1e-4 * t * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            t *= 0.5;
        }

        let Some((xn, fn_, egn)) = accepted else {
            if history.is_empty() {
                // Steepest descent cannot make progress: numerically stationary.
                converged = true;
                break;
            }
            history.clear();
            continue;
        };

        let gn = geometry.project(&xn, &egn);
        let s = geometry.project(&xn, &(&dir * c(t, 0.0)));
        let y = &gn - geometry.project(&xn, &grad);
        let sy = inner(&s, &y);
        let mut moved: Vec<(CMat, CMat, f64)> = history
            .into_iter()
            .map(|(s0, y0, _)| {
                let s1 = geometry.project(&xn, &s0);
                let y1 = geometry.project(&xn, &y0);
                let r = inner(&s1, &y1);
                (s1, y1, r)
            })
            .filter(|(_, _, r)| *r > 1e-300)
            .collect();
        if sy > 1e-300 {
            moved.push((s, y, sy));
            if moved.len() > settings.memory {
                moved.remove(0);
            }
        }
        history = moved;

        let improvement = fx - fn_;
        last_improvement = improvement;
        x = xn;
        fx = fn_;
        grad = gn;
        if improvement <= settings.f_tol * fx.abs().max(1.0) {
            stall += 1;
            if stall >= settings.patience {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }

    Outcome {
        point: x,
        value: fx,
        iterations,
        converged,
        last_improvement,
    }
}

fn lbfgs_direction(grad: &CMat, history: &[(CMat, CMat, f64)]) -> CMat {
    let mut q = grad.clone();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, sy) in history.iter().rev() {
        let a = inner(s, &q) / sy;
        q -= y * c(a, 0.0);
        alphas.push(a);
    }
    if let Some((_, y, sy)) = history.last() {
        q *= c(sy / inner(y, y), 0.0);
    }
    for ((s, y, sy), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = inner(y, &q) / sy;
        q += s * c(a - b, 0.0);
    }
    -q
}

/// Runs `job` for restart indices `0..restarts` concurrently, each with its
/// own stream `(seed, index)`, and returns results in index order.
pub fn run_restarts<T, J>(restarts: usize, seed: u64, job: J) -> Vec<T>
where
    T: Send,
    J: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = crate::spectra::sample::rng_for(seed, i as u64);
            job(i, &mut rng)
        })
        .collect()
}

/// Index of the largest key; ties go to the lowest index.
pub fn argmax_by_key<T>(items: &[T], key: impl Fn(&T) -> f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, it) in items.iter().enumerate() {
        let k = key(it);
        if k.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if k <= b => {}
            _ => best = Some((i, k)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{expectation, sample, CVec};

    #[test]
    fn sphere_descent_finds_smallest_eigenvalue() {
        let mut rng = sample::rng_for(3, 0);
        let h = sample::gaussian_matrix(&mut rng, 6, 6);
        let h = crate::spectra::symmetrize(&h);
        let spec = eigh_matrix(&h).unwrap();
        let x0 = CMat::from_column_slice(6, 1, sample::haar_vector(&mut rng, 6).as_slice());
        let out = minimize(
            Geometry::Stiefel,
            x0,
            |x| {
                let v: CVec = x.column(0).into_owned();
                let hv = &h * &v;
                (
                    expectation(&h, &v),
                    CMat::from_column_slice(6, 1, (hv * c(2.0, 0.0)).as_slice()),
                )
            },
            &Settings::default(),
        );
        assert!(
            (out.value - spec.min()).abs() < 1e-10,
            "{} vs {}",
            out.value,
            spec.min()
        );
    }

    #[test]
    fn euclidean_quadratic() {
        let target = CMat::from_fn(2, 2, |i, j| c(i as f64, j as f64));
        let out = minimize(
            Geometry::Euclidean,
            CMat::zeros(2, 2),
            |x| {
                let d = x - &target;
                (inner(&d, &d), d * c(2.0, 0.0))
            },
            &Settings::default(),
        );
        assert!(out.value < 1e-18);
    }

    #[test]
    fn restarts_are_ordered_and_deterministic() {
        use rand::Rng;
        let a = run_restarts(16, 9, |i, rng| (i, rng.random::<u64>()));
        let b = run_restarts(16, 9, |i, rng| (i, rng.random::<u64>()));
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(k, (i, _))| k == *i));
    }

    #[test]
    fn argmax_tie_break_lowest_index() {
        assert_eq!(argmax_by_key(&[1.0, 3.0, 3.0, 2.0], |x| *x), Some(1));
        assert_eq!(argmax_by_key::<f64>(&[], |x| *x), None);
    }
}
