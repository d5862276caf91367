use super::binary_entropy;
use crate::error::{Error, Result};
use crate::spectra::{c, eigh_matrix, CMat, DensityMatrix, RANK_TOL};

/// `σ_y ⊗ σ_y` in the computational basis.
fn sigma_yy() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 3)] = c(-1.0, 0.0);
    m[(1, 2)] = c(1.0, 0.0);
    m[(2, 1)] = c(1.0, 0.0);
    m[(3, 0)] = c(-1.0, 0.0);
    m
}

fn require_two_qubit(rho: &DensityMatrix) -> Result<()> {
    let d = rho.dims();
    if d.dim_a != 2 || d.dim_b != 2 || d.copies != 1 {
        return Err(Error::shape(format!(
            "closed-form EoF needs a single-copy 2x2 state, got {}x{} with {} copies",
            d.dim_a, d.dim_b, d.copies
        )));
    }
    Ok(())
}

/// Concurrence `max(0, l1 − l2 − l3 − l4)` where `lᵢ` are the square roots
/// of the eigenvalues of `√ρ ρ̃ √ρ`, `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho)?;
    let s = eigh_matrix(rho.matrix())?;
    let sqrt_rho = s.apply(|l| l.max(0.0).sqrt());
    let yy = sigma_yy();
    let flipped = &yy * rho.matrix().conjugate() * &yy;
    let sym = &sqrt_rho * flipped * &sqrt_rho;
    let ev = eigh_matrix(&crate::spectra::symmetrize(&sym))?;
    let l: Vec<f64> = ev.eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).collect();
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Closed-form entanglement of formation of a two-qubit state, in nats.
pub fn wootters_eof(rho: &DensityMatrix) -> Result<f64> {
    let conc = concurrence(rho)?;
    if conc <= RANK_TOL {
        return Ok(0.0);
    }
    let x = 0.5 * (1.0 + (1.0 - conc * conc).max(0.0).sqrt());
    Ok(binary_entropy(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{BipartiteDims, PureStateVector};

    fn werner_like(w: f64) -> DensityMatrix {
        let bell = PureStateVector::bell().projector();
        let mixed = DensityMatrix::maximally_mixed(BipartiteDims::single(2, 2));
        DensityMatrix::mixture(&[(w, &bell), (1.0 - w, &mixed)]).unwrap()
    }

    #[test]
    fn bell_is_one_ebit() {
        let rho = PureStateVector::bell().projector();
        assert!((concurrence(&rho).unwrap() - 1.0).abs() < 1e-10);
        assert!((wootters_eof(&rho).unwrap() - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn werner_like_closed_form() {
        // Bell fidelity 0.85 gives C = 2F − 1 = 0.7.
        let rho = werner_like(0.8);
        assert!((concurrence(&rho).unwrap() - 0.7).abs() < 1e-10);
        let x: f64 = 0.5 * (1.0 + 0.51f64.sqrt());
        let expected = -x * x.ln() - (1.0 - x) * (1.0 - x).ln();
        assert!((wootters_eof(&rho).unwrap() - expected).abs() < 1e-10);
        assert!((expected - 0.41026).abs() < 5e-5);
    }

    #[test]
    fn separable_bell_diagonal_is_zero() {
        // Bell-diagonal with largest weight exactly 1/2.
        let dims = BipartiteDims::single(2, 2);
        let diag = DensityMatrix::from_real_diagonal(dims, &[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(wootters_eof(&diag).unwrap(), 0.0);
        assert_eq!(wootters_eof(&werner_like(1.0 / 3.0)).unwrap(), 0.0);
    }

    #[test]
    fn rejects_wrong_dims() {
        let rho = DensityMatrix::maximally_mixed(BipartiteDims::single(2, 3));
        assert!(matches!(wootters_eof(&rho), Err(Error::Shape(_))));
    }
}
