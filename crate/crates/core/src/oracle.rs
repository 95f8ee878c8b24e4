//! Independent brute-force verifiers used by tests and acceptance runs.
//!
//! Each oracle recomputes a quantity through a different route than the
//! primary implementation (covariance double-sum instead of direct variance,
//! exhaustive grid scan instead of coordinate descent), so agreement between
//! the two is evidence rather than tautology.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Error;
use crate::observables::SignVector;
use crate::quantifiers::ZERO_VARIANCE_TOL;
use crate::spectral::{Grid, LocalObservable};
use crate::states::{eigensystem, DensityState, PureState};
use crate::Result;

/// Party-by-party covariance matrix `Cov_ij = ⟨λ_i λ_j⟩ - ⟨λ_i⟩⟨λ_j⟩`
/// computed by direct summation over the probability table.
pub fn covariance_matrix(state: &PureState) -> Vec<Vec<f64>> {
    let n = state.party_count();
    let grid = state.grid();
    let spectrum = state.obs().spectrum().to_vec();
    let probs = state.probabilities();
    let mut mean = vec![0.0; n];
    let mut second = vec![vec![0.0; n]; n];
    grid.for_each_point(|flat, digits| {
        let p = probs[flat];
        for i in 0..n {
            let li = spectrum[digits[i]];
            mean[i] += li * p;
            for j in i..n {
                second[i][j] += li * spectrum[digits[j]] * p;
            }
        }
    });
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let c = second[i][j] - mean[i] * mean[j];
            cov[i][j] = c;
            cov[j][i] = c;
        }
    }
    cov
}

/// The quantifier via the covariance identity
/// `Δ(H_coll) = Σ_ij c_i c_j Cov(H_i, H_j)`, normalized by the largest
/// diagonal entry. Same zero convention as the primary implementation.
pub fn f_via_covariance(state: &PureState, signs: &SignVector) -> f64 {
    assert_eq!(signs.len(), state.party_count());
    let cov = covariance_matrix(state);
    let n = state.party_count();
    let dmax = (0..n).map(|i| cov[i][i]).fold(0.0f64, f64::max);
    if dmax < ZERO_VARIANCE_TOL {
        return 0.0;
    }
    let c = signs.as_slice();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += c[i] * c[j] * cov[i][j];
        }
    }
    total / dmax
}

struct RatioLandscape {
    grid: Grid,
    spectrum: Vec<f64>,
    coll_weights: Vec<f64>,
    parties: usize,
}

impl RatioLandscape {
    fn new(obs: &LocalObservable, n: usize, coeffs: &[f64]) -> Result<Self> {
        let grid = Grid::new(obs.dim(), n)?;
        let spectrum = obs.spectrum().to_vec();
        let mut coll_weights = vec![0.0; grid.len()];
        grid.for_each_point(|flat, digits| {
            coll_weights[flat] = digits
                .iter()
                .zip(coeffs)
                .map(|(&idx, &c)| c * spectrum[idx])
                .sum();
        });
        Ok(Self {
            grid,
            spectrum,
            coll_weights,
            parties: n,
        })
    }

    /// Ratio, the argmax party, and the raw moments needed for the gradient.
    fn evaluate(&self, psi: &DVector<Complex64>) -> (f64, usize, f64, f64) {
        let n = self.parties;
        let mut mean = vec![0.0; n];
        let mut second = vec![0.0; n];
        let mut cmean = 0.0;
        let mut csecond = 0.0;
        self.grid.for_each_point(|flat, digits| {
            let p = psi[flat].norm_sqr();
            let w = self.coll_weights[flat];
            cmean += w * p;
            csecond += w * w * p;
            for (i, &idx) in digits.iter().enumerate() {
                let lam = self.spectrum[idx];
                mean[i] += lam * p;
                second[i] += lam * lam * p;
            }
        });
        let mut argmax = 0;
        let mut dmax = f64::NEG_INFINITY;
        for i in 0..n {
            let v = second[i] - mean[i] * mean[i];
            if v > dmax {
                dmax = v;
                argmax = i;
            }
        }
        let numerator = (csecond - cmean * cmean).max(0.0);
        if dmax < ZERO_VARIANCE_TOL {
            return (0.0, argmax, numerator, dmax);
        }
        (numerator / dmax, argmax, numerator, dmax)
    }

    /// Ascent direction of the ratio at `psi` (unprojected).
    fn gradient(&self, psi: &DVector<Complex64>, ratio: f64, argmax: usize) -> DVector<Complex64> {
        let dim = self.grid.len();
        let mut cmean = 0.0;
        let mut lmean = 0.0;
        let mut local_w = vec![0.0; dim];
        self.grid.for_each_point(|flat, digits| {
            let p = psi[flat].norm_sqr();
            cmean += self.coll_weights[flat] * p;
            let lam = self.spectrum[digits[argmax]];
            local_w[flat] = lam;
            lmean += lam * p;
        });
        DVector::from_fn(dim, |flat, _| {
            let w = self.coll_weights[flat];
            let l = local_w[flat];
            let dn = w * w - 2.0 * cmean * w;
            let dd = l * l - 2.0 * lmean * l;
            psi[flat] * Complex64::from(dn - ratio * dd)
        })
    }
}

/// Multi-start ascent of `Δ(Σ c_i H_i) / max_i Δ(H_i)` over pure states.
///
/// Coefficients must satisfy `Σ c_i² = n` within `1e-12`. Returns the best
/// ratio found; report-only, the caller decides what the value means.
pub fn maximize_ratio(
    obs: &LocalObservable,
    n: usize,
    coeffs: &[f64],
    restarts: usize,
    seed: u64,
) -> Result<f64> {
    if coeffs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n} coefficients, got {}",
            coeffs.len()
        )));
    }
    let norm: f64 = coeffs.iter().map(|c| c * c).sum();
    if (norm - n as f64).abs() > 1e-12 {
        return Err(Error::BadNormalization(norm, n as f64));
    }
    let landscape = RatioLandscape::new(obs, n, coeffs)?;
    let restarts = restarts.max(1);

    let per_restart: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|ridx| {
            let mut rng = ChaCha12Rng::seed_from_u64(
                seed ^ (0x2545_f491_4f6c_dd1d_u64.wrapping_mul(ridx as u64 + 1)),
            );
            let mut starts: Vec<DVector<Complex64>> = Vec::new();
            if ridx == 0 {
                // Equal superposition of the extremal collective weights: the
                // two-point distribution that maximizes the collective
                // variance at unit local spread.
                let dim = landscape.grid.len();
                let (mut lo, mut hi) = (0usize, 0usize);
                for (flat, &w) in landscape.coll_weights.iter().enumerate() {
                    if w < landscape.coll_weights[lo] {
                        lo = flat;
                    }
                    if w > landscape.coll_weights[hi] {
                        hi = flat;
                    }
                }
                let mut extremal = DVector::zeros(dim);
                extremal[lo] = Complex64::from(1.0 / 2.0f64.sqrt());
                extremal[hi] = Complex64::from(1.0 / 2.0f64.sqrt());
                starts.push(extremal);
            }
            let dim = landscape.grid.len();
            starts.push(
                DVector::from_fn(dim, |_, _| {
                    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                })
                .normalize(),
            );

            let mut best = 0.0f64;
            for mut psi in starts {
                let (mut ratio, mut argmax, ..) = landscape.evaluate(&psi);
                let mut step = 0.5f64;
                for _ in 0..600 {
                    let grad = landscape.gradient(&psi, ratio, argmax);
                    let radial = psi.dotc(&grad);
                    let tangent = &grad - &psi * radial;
                    if tangent.norm() < 1e-13 {
                        break;
                    }
                    let mut eta = step;
                    let mut improved = false;
                    for _ in 0..50 {
                        let candidate = (&psi + &tangent * Complex64::from(eta)).normalize();
                        let (cand_ratio, cand_argmax, ..) = landscape.evaluate(&candidate);
                        if cand_ratio > ratio {
                            let gain = cand_ratio - ratio;
                            psi = candidate;
                            ratio = cand_ratio;
                            argmax = cand_argmax;
                            step = (eta * 2.0).min(2.0);
                            improved = true;
                            if gain < 1e-13 * ratio.max(1.0) {
                                break;
                            }
                            break;
                        }
                        eta *= 0.5;
                    }
                    if !improved {
                        break;
                    }
                }
                if ratio > best {
                    best = ratio;
                }
            }
            best
        })
        .collect();

    Ok(per_restart.into_iter().fold(0.0, f64::max))
}

/// Max variance observed over random distributions on a 16-point grid of
/// `[m, M]`; must stay below `(M-m)²/4 + 1e-12`.
pub fn popoviciu_sampler(m: f64, big_m: f64, trials: usize, seed: u64) -> Result<f64> {
    if big_m <= m {
        return Err(Error::DegenerateRange(m));
    }
    const GRID: usize = 16;
    let values: Vec<f64> = (0..GRID)
        .map(|i| m + (big_m - m) * i as f64 / (GRID - 1) as f64)
        .collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut weights = [0.0f64; GRID];
        let mut total = 0.0;
        for w in &mut weights {
            // Dirichlet(1) via normalized exponentials
            let u: f64 = rng.random();
            *w = -(1.0 - u).ln();
            total += *w;
        }
        let mut mean = 0.0;
        let mut second = 0.0;
        for (w, v) in weights.iter().zip(&values) {
            let p = w / total;
            mean += p * v;
            second += p * v * v;
        }
        let var = second - mean * mean;
        if var > worst {
            worst = var;
        }
    }
    Ok(worst)
}

/// Exhaustive scan over all two-member decompositions of a rank-2 density
/// state: mixing angle × relative phase on a `grid × grid` lattice. Member
/// values are computed through the covariance route, keeping the whole
/// evaluation independent of the optimizer it cross-checks.
pub fn roof_scan_rank2(
    rho: &DensityState,
    signs: &SignVector,
    grid_points: usize,
    zero_tol: f64,
) -> Result<f64> {
    let es = eigensystem(rho, zero_tol)?;
    if es.rank() != 2 {
        return Err(Error::InvalidParams(format!(
            "rank-2 scan requires rank 2, got {}",
            es.rank()
        )));
    }
    let dim = rho.matrix().nrows();
    let mut kept: Vec<DVector<Complex64>> = Vec::new();
    for (j, flagged) in es.zero_flags.iter().enumerate() {
        if !flagged {
            let root = Complex64::from(es.eigenvalues[j].max(0.0).sqrt());
            kept.push(es.eigenvectors.column(j) * root);
        }
    }
    let (b1, b2) = (&kept[0], &kept[1]);

    let member_value = |member: &DVector<Complex64>| -> f64 {
        let weight: f64 = member.iter().map(|a| a.norm_sqr()).sum();
        if weight < 1e-14 {
            return 0.0;
        }
        let amps: Vec<Complex64> = member
            .iter()
            .map(|a| a / Complex64::from(weight.sqrt()))
            .collect();
        let state = PureState::from_unnormalized(rho.obs().clone(), rho.party_count(), amps)
            .expect("member lives on the state's grid");
        weight * f_via_covariance(&state, signs)
    };

    let mut best = f64::INFINITY;
    for ti in 0..grid_points {
        let theta = std::f64::consts::FRAC_PI_2 * ti as f64 / (grid_points - 1) as f64;
        let (sin, cos) = theta.sin_cos();
        for pi in 0..grid_points {
            let phi = 2.0 * std::f64::consts::PI * pi as f64 / grid_points as f64;
            let phase = Complex64::from_polar(1.0, phi);
            let mut m1 = DVector::zeros(dim);
            let mut m2 = DVector::zeros(dim);
            for flat in 0..dim {
                m1[flat] = b1[flat] * Complex64::from(cos) + b2[flat] * (phase * sin);
                m2[flat] = -b1[flat] * (phase.conj() * sin) + b2[flat] * Complex64::from(cos);
            }
            let value = member_value(&m1) + member_value(&m2);
            if value < best {
                best = value;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantifiers::f_pure;
    use crate::states::{ghz_like, sample_haar};
    use approx::assert_relative_eq;

    #[test]
    fn covariance_route_agrees_with_direct_ratio() {
        let obs = LocalObservable::qubit();
        for n in 2..=4usize {
            let signs = SignVector::uniform(n);
            for seed in 0..25 {
                let state = sample_haar(&obs, n, seed).unwrap();
                let direct = f_pure(&state, &signs);
                let via_cov = f_via_covariance(&state, &signs);
                assert!(
                    (direct - via_cov).abs() < 1e-10,
                    "disagreement {direct} vs {via_cov}"
                );
            }
        }
    }

    #[test]
    fn ghz_covariance_matrix_is_all_ones() {
        let ghz = ghz_like(&LocalObservable::qubit(), 2, 0.0).unwrap();
        let cov = covariance_matrix(&ghz);
        for row in &cov {
            for &c in row {
                assert_relative_eq!(c, 1.0, epsilon = 1e-12);
            }
        }
        assert_relative_eq!(
            f_via_covariance(&ghz, &SignVector::uniform(2)),
            4.0,
            epsilon = 1e-12
        );
        // anti-collective direction annihilates the GHZ correlations
        let mixed_signs = SignVector::new(vec![1.0, -1.0]).unwrap();
        assert!(f_via_covariance(&ghz, &mixed_signs).abs() < 1e-12);
    }

    #[test]
    fn ratio_maximizer_sanity() {
        let obs = LocalObservable::qubit();
        let best = maximize_ratio(&obs, 2, &[1.0, 1.0], 8, 42).unwrap();
        assert!(best >= 4.0 - 1e-9, "expected to reach 4, got {best}");
        assert!(best <= 4.0 + 1e-9);

        let best = maximize_ratio(&obs, 2, &[1.0, -1.0], 8, 42).unwrap();
        assert!(best >= 4.0 - 1e-9, "anti-correlated case, got {best}");

        assert!(matches!(
            maximize_ratio(&obs, 2, &[1.0, 0.5], 4, 1),
            Err(Error::BadNormalization(_, _))
        ));
    }

    #[test]
    fn uneven_coefficients_stay_below_saturation() {
        let obs = LocalObservable::qubit();
        let c1 = 1.5f64.sqrt();
        let c2 = 0.5f64.sqrt();
        let best = maximize_ratio(&obs, 2, &[c1, c2], 16, 7).unwrap();
        let expected_sup = (c1 + c2) * (c1 + c2);
        assert!(
            best < 4.0 - 1e-6,
            "uneven coefficients must not saturate, got {best}"
        );
        assert!(best <= expected_sup + 1e-9, "got {best} above {expected_sup}");
        assert!(best >= expected_sup - 1e-6, "ascent fell short: {best}");
    }

    #[test]
    fn popoviciu_sampler_respects_bound() {
        let worst = popoviciu_sampler(0.0, 1.0, 2000, 9).unwrap();
        assert!(worst <= 0.25 + 1e-12);
        assert!(worst > 0.15, "sampler too timid: {worst}");
        assert!(matches!(
            popoviciu_sampler(1.0, 1.0, 10, 0),
            Err(Error::DegenerateRange(_))
        ));
    }

    #[test]
    fn rank2_scan_matches_closed_form() {
        let rho = crate::states::ghz_mix(2, 0.25).unwrap();
        let signs = SignVector::uniform(2);
        let best = roof_scan_rank2(&rho, &signs, 64, 1e-12).unwrap();
        assert_relative_eq!(best, 3.0, epsilon = 1e-6);
    }
}
