//! Expectation values, variances, covariances, quantum Fisher information,
//! Wigner–Yanase skew information, and the Popoviciu variance bound.
//!
//! All operators in scope are diagonal in the spectral basis, so first and
//! second moments reduce to sums over the classical distribution a state
//! induces on the grid. The information measures need the eigendecomposition
//! of the density matrix and are computed from it directly.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Error;
use crate::observables::CollectiveOperator;
use crate::spectral::LocalObservable;
use crate::states::{eigensystem, DensityState, EigenSystem, PureState};
use crate::Result;

/// Mean and variance of one operator on one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub mean: f64,
    pub variance: f64,
}

/// Anything that induces a classical probability distribution on the
/// spectral grid: pure states via `|amplitude|²`, mixed states via the
/// matrix diagonal.
pub trait SpectralDistribution {
    fn obs(&self) -> &LocalObservable;
    fn party_count(&self) -> usize;
    fn distribution(&self) -> Vec<f64>;
}

impl SpectralDistribution for PureState {
    fn obs(&self) -> &LocalObservable {
        PureState::obs(self)
    }

    fn party_count(&self) -> usize {
        PureState::party_count(self)
    }

    fn distribution(&self) -> Vec<f64> {
        self.probabilities()
    }
}

impl SpectralDistribution for DensityState {
    fn obs(&self) -> &LocalObservable {
        DensityState::obs(self)
    }

    fn party_count(&self) -> usize {
        DensityState::party_count(self)
    }

    fn distribution(&self) -> Vec<f64> {
        self.diagonal_probabilities()
    }
}

fn check_compat<T: SpectralDistribution>(state: &T, op: &CollectiveOperator) -> Result<()> {
    if state.obs() != op.obs() || state.party_count() != op.party_count() {
        return Err(Error::DimensionMismatch(
            "state and operator must share observable and party count".into(),
        ));
    }
    Ok(())
}

/// Mean and variance of a diagonal operator; the variance is clamped to be
/// non-negative (rounding can produce tiny negatives).
pub fn moments<T: SpectralDistribution>(
    state: &T,
    op: &CollectiveOperator,
) -> Result<MomentReport> {
    check_compat(state, op)?;
    let p = state.distribution();
    let mut mean = 0.0;
    let mut second = 0.0;
    for (w, prob) in op.weights().iter().zip(&p) {
        mean += w * prob;
        second += w * w * prob;
    }
    let variance = (second - mean * mean).max(0.0);
    Ok(MomentReport { mean, variance })
}

/// Variance `⟨Ô²⟩ - ⟨Ô⟩²` of a diagonal operator.
pub fn variance<T: SpectralDistribution>(state: &T, op: &CollectiveOperator) -> Result<f64> {
    Ok(moments(state, op)?.variance)
}

/// Covariance `⟨Ô₁Ô₂⟩ - ⟨Ô₁⟩⟨Ô₂⟩` of two commuting diagonal operators.
pub fn covariance<T: SpectralDistribution>(
    state: &T,
    op1: &CollectiveOperator,
    op2: &CollectiveOperator,
) -> Result<f64> {
    check_compat(state, op1)?;
    check_compat(state, op2)?;
    let p = state.distribution();
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    let mut cross = 0.0;
    for ((w1, w2), prob) in op1.weights().iter().zip(op2.weights()).zip(&p) {
        m1 += w1 * prob;
        m2 += w2 * prob;
        cross += w1 * w2 * prob;
    }
    Ok(cross - m1 * m2)
}

/// Per-party variances `Δ(H_1), …, Δ(H_n)` in one grid pass.
pub fn local_variances<T: SpectralDistribution>(state: &T) -> Vec<f64> {
    let grid = crate::spectral::Grid::new(state.obs().dim(), state.party_count())
        .expect("state was constructed within the grid cap");
    let spectrum = state.obs().spectrum().to_vec();
    let p = state.distribution();
    let n = state.party_count();
    let mut mean = vec![0.0; n];
    let mut second = vec![0.0; n];
    grid.for_each_point(|flat, digits| {
        let prob = p[flat];
        for (i, &idx) in digits.iter().enumerate() {
            let lam = spectrum[idx];
            mean[i] += lam * prob;
            second[i] += lam * lam * prob;
        }
    });
    (0..n)
        .map(|i| (second[i] - mean[i] * mean[i]).max(0.0))
        .collect()
}

/// Matrix of `⟨e_i| Ô |e_j⟩` for a diagonal operator in the eigenbasis of a
/// density matrix.
fn operator_in_eigenbasis(es: &EigenSystem, op: &CollectiveOperator) -> DMatrix<Complex64> {
    let v = &es.eigenvectors;
    let mut weighted = v.clone();
    for (row, &w) in op.weights().iter().enumerate() {
        for c in 0..weighted.ncols() {
            weighted[(row, c)] *= w;
        }
    }
    v.adjoint() * weighted
}

/// Quantum Fisher information from a precomputed eigendecomposition:
/// `2 Σ_{λ_i+λ_j > cutoff} (λ_i-λ_j)²/(λ_i+λ_j) |⟨i|Ô|j⟩|²`, both indices
/// ranging over all eigenvectors.
pub fn qfi_with_eigensystem(es: &EigenSystem, op: &CollectiveOperator, zero_tol: f64) -> f64 {
    let elems = operator_in_eigenbasis(es, op);
    let lam: Vec<f64> = es.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    let cutoff = zero_tol * lam[0];
    let dim = lam.len();
    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let sum = lam[i] + lam[j];
            if sum <= cutoff {
                continue;
            }
            let diff = lam[i] - lam[j];
            if diff == 0.0 {
                continue;
            }
            total += diff * diff / sum * elems[(i, j)].norm_sqr();
        }
    }
    2.0 * total
}

/// Quantum Fisher information of a density state for phase generation by a
/// diagonal operator. Eigenvalue pairs whose sum falls below
/// `zero_tol · λ_max` are excluded.
pub fn qfi(rho: &DensityState, op: &CollectiveOperator, zero_tol: f64) -> Result<f64> {
    check_compat(rho, op)?;
    let es = eigensystem(rho, zero_tol)?;
    Ok(qfi_with_eigensystem(&es, op, zero_tol))
}

/// Wigner–Yanase skew information `Σ_{ij} (√λ_i - √λ_j)²/2 · |⟨i|Ô|j⟩|²`.
/// Reduces to the variance on pure states; never exceeds it.
pub fn wy_skew(rho: &DensityState, op: &CollectiveOperator, zero_tol: f64) -> Result<f64> {
    check_compat(rho, op)?;
    let es = eigensystem(rho, zero_tol)?;
    let elems = operator_in_eigenbasis(&es, op);
    let roots: Vec<f64> = es.eigenvalues.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let dim = roots.len();
    let mut total = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let gap = roots[i] - roots[j];
            if gap == 0.0 {
                continue;
            }
            total += gap * gap / 2.0 * elems[(i, j)].norm_sqr();
        }
    }
    Ok(total)
}

/// The variance ceiling `(M - m)²/4` for a random variable bounded in
/// `[m, M]`.
pub fn popoviciu_bound(m: f64, big_m: f64) -> Result<f64> {
    if big_m <= m {
        if big_m == m {
            return Err(Error::DegenerateRange(m));
        }
        return Err(Error::InvalidParams(format!(
            "bounds out of order: m={m}, M={big_m}"
        )));
    }
    let range = big_m - m;
    Ok(range * range / 4.0)
}

/// Whether the variance of the discrete distribution `(weights, values)`
/// respects the ceiling `(max-min)²/4 + 1e-12`.
pub fn check_popoviciu(weights: &[f64], values: &[f64]) -> Result<bool> {
    if weights.len() != values.len() || weights.is_empty() {
        return Err(Error::DimensionMismatch(
            "weights and values must have equal nonzero length".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidParams(
            "weights must form a probability vector".into(),
        ));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bound = popoviciu_bound(lo, hi)?;
    let mean: f64 = weights.iter().zip(values).map(|(w, v)| w * v).sum();
    let second: f64 = weights.iter().zip(values).map(|(w, v)| w * v * v).sum();
    Ok(second - mean * mean <= bound + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::SignVector;
    use crate::spectral::make_local_observable;
    use crate::states::{depolarized_ghz, ghz_like, sample_haar, DEFAULT_ZERO_TOL};
    use approx::assert_relative_eq;

    fn qubit_ghz(n: usize) -> PureState {
        ghz_like(&LocalObservable::qubit(), n, 0.0).unwrap()
    }

    fn coll_op(n: usize) -> CollectiveOperator {
        CollectiveOperator::collective(&LocalObservable::qubit(), &SignVector::uniform(n)).unwrap()
    }

    #[test]
    fn ghz_collective_variance_saturates() {
        let ghz = qubit_ghz(2);
        assert_relative_eq!(variance(&ghz, &coll_op(2)).unwrap(), 4.0, epsilon = 1e-12);
        let local = CollectiveOperator::local(&LocalObservable::qubit(), 2, 0).unwrap();
        assert_relative_eq!(variance(&ghz, &local).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn product_eigenstate_has_zero_variance() {
        let obs = LocalObservable::qubit();
        let mut amps = vec![Complex64::ZERO; 4];
        amps[2] = Complex64::ONE; // |1,0⟩
        let state = PureState::new(obs, 2, amps).unwrap();
        assert_eq!(variance(&state, &coll_op(2)).unwrap(), 0.0);
    }

    #[test]
    fn covariance_of_perfectly_correlated_parties() {
        let ghz = qubit_ghz(2);
        let obs = LocalObservable::qubit();
        let h1 = CollectiveOperator::local(&obs, 2, 0).unwrap();
        let h2 = CollectiveOperator::local(&obs, 2, 1).unwrap();
        assert_relative_eq!(covariance(&ghz, &h1, &h2).unwrap(), 1.0, epsilon = 1e-12);

        // Cov(A, A) = Δ(A) on random states
        for seed in 0..20 {
            let state = sample_haar(&obs, 2, seed).unwrap();
            let c = covariance(&state, &h1, &h1).unwrap();
            let v = variance(&state, &h1).unwrap();
            assert_relative_eq!(c, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn product_states_have_independent_parties() {
        let obs = LocalObservable::qubit();
        let h1 = CollectiveOperator::local(&obs, 2, 0).unwrap();
        let h2 = CollectiveOperator::local(&obs, 2, 1).unwrap();
        for seed in 0..20 {
            let state = crate::states::sample_product(&obs, 2, seed).unwrap();
            let c = covariance(&state, &h1, &h2).unwrap();
            assert!(c.abs() < 1e-10, "cross covariance {c} on product state");
        }
    }

    #[test]
    fn qfi_pure_state_is_four_times_variance() {
        let ghz = qubit_ghz(2);
        let rho = ghz.to_density();
        let q = qfi(&rho, &coll_op(2), DEFAULT_ZERO_TOL).unwrap();
        assert_relative_eq!(q, 16.0, epsilon = 1e-9);
    }

    #[test]
    fn qfi_depolarized_ghz_closed_form() {
        let rho = depolarized_ghz(2, 0.5).unwrap();
        let q = qfi(&rho, &coll_op(2), DEFAULT_ZERO_TOL).unwrap();
        assert_relative_eq!(q, 16.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn qfi_maximally_mixed_vanishes() {
        let rho = depolarized_ghz(2, 1.0).unwrap();
        let q = qfi(&rho, &coll_op(2), DEFAULT_ZERO_TOL).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn wy_skew_pure_equals_variance_and_mixed_is_ordered() {
        let ghz = qubit_ghz(2);
        let rho = ghz.to_density();
        let op = coll_op(2);
        let skew = wy_skew(&rho, &op, DEFAULT_ZERO_TOL).unwrap();
        assert_relative_eq!(skew, 4.0, epsilon = 1e-9);

        let mixed = depolarized_ghz(2, 1.0).unwrap();
        assert!(wy_skew(&mixed, &op, DEFAULT_ZERO_TOL).unwrap().abs() < 1e-12);

        let noisy = depolarized_ghz(2, 0.5).unwrap();
        let skew = wy_skew(&noisy, &op, DEFAULT_ZERO_TOL).unwrap();
        let q = qfi(&noisy, &op, DEFAULT_ZERO_TOL).unwrap();
        let var = variance(&noisy, &op).unwrap();
        assert!(skew > 0.0);
        assert!(skew <= q / 4.0 + 1e-10, "skew {skew} vs qfi/4 {}", q / 4.0);
        assert!(skew <= var + 1e-10, "skew {skew} vs variance {var}");
    }

    #[test]
    fn popoviciu_examples() {
        assert_relative_eq!(popoviciu_bound(0.0, 1.0).unwrap(), 0.25);
        assert!(matches!(
            popoviciu_bound(1.0, 1.0),
            Err(Error::DegenerateRange(_))
        ));
        // two-point half/half sits exactly on the bound
        assert!(check_popoviciu(&[0.5, 0.5], &[0.0, 1.0]).unwrap());
        let w = [1.0 / 3.0; 3];
        let v = [0.0, 0.5, 1.0];
        let mean: f64 = w.iter().zip(&v).map(|(w, v)| w * v).sum();
        let second: f64 = w.iter().zip(&v).map(|(w, v)| w * v * v).sum();
        assert_relative_eq!(second - mean * mean, 1.0 / 6.0, epsilon = 1e-12);
        assert!(check_popoviciu(&w, &v).unwrap());
        // qubit local operator ceiling
        assert_relative_eq!(popoviciu_bound(-1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn local_variances_match_single_party_ops() {
        let obs = make_local_observable(&[-1.0, 0.0, 2.0]).unwrap();
        let state = sample_haar(&obs, 3, 5).unwrap();
        let locals = local_variances(&state);
        for i in 0..3 {
            let op = CollectiveOperator::local(&obs, 3, i).unwrap();
            assert_relative_eq!(locals[i], variance(&state, &op).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn pure_and_density_routes_agree() {
        let obs = LocalObservable::qubit();
        for seed in 0..10 {
            let state = sample_haar(&obs, 3, seed).unwrap();
            let rho = state.to_density();
            let op = coll_op(3);
            let vp = variance(&state, &op).unwrap();
            let vd = variance(&rho, &op).unwrap();
            assert_relative_eq!(vp, vd, epsilon = 1e-10);
        }
    }
}
