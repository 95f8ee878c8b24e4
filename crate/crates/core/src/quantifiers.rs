//! The collective-variance quantifier and its mixed-state extensions.
//!
//! For a pure state the quantifier is the ratio of the collective variance to
//! the largest local variance; it is at most `n` on product states and at
//! most `n²` always, which is what makes it a depth witness. Mixed states get
//! three extensions of decreasing tightness and decreasing cost:
//!
//! * [`f_convex_roof`] — the convex-roof infimum over ensemble
//!   decompositions, estimated by optimizing over mixing isometries;
//! * [`f_support`] — quantum Fisher information over the largest local
//!   variance reachable inside the support of the state;
//! * [`f_qfi_ratio`] — quantum Fisher information over a state-independent
//!   variance ceiling, exact and cheap.
//!
//! Every mixed-state result is returned as a [`QuantBracket`] carrying a
//! certified `[lower, upper]` interval: heuristic search can only tighten the
//! interval from the correct side, never invalidate it. Witness verdicts must
//! consume certified lower bounds only.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Error;
use crate::moments::{local_variances, qfi_with_eigensystem, variance, SpectralDistribution};
use crate::observables::{CollectiveOperator, OrthoFrame, SignVector};
use crate::spectral::Grid;
use crate::states::{eigensystem, DensityState, PureState};
use crate::Result;

/// Local variances below this count as zero; the quantifier is 0 by
/// convention on such states.
pub const ZERO_VARIANCE_TOL: f64 = 1e-12;

/// Default restart count for the support-supremum ascent.
pub const DEFAULT_SUPPORT_RESTARTS: usize = 32;
/// Default restart count for the convex-roof search.
pub const DEFAULT_ROOF_RESTARTS: usize = 64;

/// Which construction produced a [`QuantBracket`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketMethod {
    /// Pure-state ratio, computed exactly.
    PureExact,
    /// Fisher information over a state-independent ceiling.
    QfiRatio,
    /// Fisher information over the support-restricted variance supremum.
    SupportNormalized,
    /// Convex-roof infimum over ensemble decompositions.
    ConvexRoof,
}

/// A certified interval `[lower, upper]` around a mixed-state quantifier,
/// together with the search's best point estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantBracket {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub method: BracketMethod,
    /// True when the interval is tight (collapsed within tolerance).
    pub certified_exact: bool,
}

impl QuantBracket {
    fn exact(value: f64, method: BracketMethod) -> Self {
        Self {
            lower: value,
            upper: value,
            estimate: value,
            method,
            certified_exact: true,
        }
    }
}

/// Tuning for the randomized searches. `restarts = 0` selects the
/// per-operation default. All randomness derives from `seed`, so results are
/// reproducible bit-for-bit regardless of thread count.
#[derive(Debug, Clone)]
pub struct OptConfig {
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    /// Ensemble cardinality for the convex-roof search; `None` picks `2r`,
    /// clamped to the `[r, r²]` range where the parameterization is complete.
    pub ensemble_size: Option<usize>,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 0,
            tol: 1e-10,
            ensemble_size: None,
        }
    }
}

/// Thickness of a state across the orthogonal collective directions of a
/// frame: `ζ̂ = min_{j≥2} Δ(P_j)/Δ(P_1)`, undefined when `Δ(P_1)` vanishes.
#[derive(Debug, Clone)]
pub struct ThicknessReport {
    pub delta_p1: f64,
    pub delta_pj_min: f64,
    pub zeta_hat: Option<f64>,
    pub frame: OrthoFrame,
}

/// The pure-state quantifier `Δ(H_coll) / max_i Δ(H_i)`, with the convention
/// that states with vanishing local variances score 0.
pub fn f_pure(state: &PureState, signs: &SignVector) -> f64 {
    assert_eq!(
        signs.len(),
        state.party_count(),
        "sign vector length must match the party count"
    );
    let locals = local_variances(state);
    let dmax = locals.iter().cloned().fold(0.0f64, f64::max);
    if dmax < ZERO_VARIANCE_TOL {
        return 0.0;
    }
    let coll = CollectiveOperator::collective(state.obs(), signs)
        .expect("state grid was validated at construction");
    let var = variance(state, &coll).expect("operator built from the state's observable");
    var / dmax
}

/// Fisher-ratio extension: `Q(H_coll) / (4A)` with `A` a ceiling on the local
/// variance. Defaults to the spectrum ceiling `(λ_max - λ_min)²/4`; exact.
pub fn f_qfi_ratio(
    rho: &DensityState,
    signs: &SignVector,
    ceiling: Option<f64>,
    zero_tol: f64,
) -> Result<QuantBracket> {
    let a = ceiling.unwrap_or_else(|| rho.obs().variance_ceiling());
    if a <= 0.0 {
        return Err(Error::NonpositiveA(a));
    }
    let es = eigensystem(rho, zero_tol)?;
    let coll = CollectiveOperator::collective(rho.obs(), signs)?;
    let q = qfi_with_eigensystem(&es, &coll, zero_tol);
    Ok(QuantBracket::exact(q / (4.0 * a), BracketMethod::QfiRatio))
}

/// Support-normalized extension: `Q(H_coll)` over four times the largest
/// local variance reachable by unit vectors in the support of `ρ`.
///
/// The supremum is estimated by multi-start projected gradient ascent on the
/// support subspace, short-circuiting when the analytic ceiling
/// `(λ_max - λ_min)²/4` is reached within `1e-9` (then the value is exact).
/// Under-estimating the supremum can only inflate the ratio, so the returned
/// estimate is a valid upper bound; the lower bound is the Fisher ratio.
pub fn f_support(
    rho: &DensityState,
    signs: &SignVector,
    cfg: &OptConfig,
    zero_tol: f64,
) -> Result<QuantBracket> {
    let es = eigensystem(rho, zero_tol)?;
    let rank = es.rank();
    if rank == 0 {
        return Err(Error::RankZero);
    }
    let coll = CollectiveOperator::collective(rho.obs(), signs)?;
    let q = qfi_with_eigensystem(&es, &coll, zero_tol);
    let ceiling = rho.obs().variance_ceiling();
    let lower = q / (4.0 * ceiling);

    let dim = rho.matrix().nrows();
    let (sup_est, short_circuit) = if rank == dim {
        // Full support: the extremal two-point superposition is available,
        // so the supremum equals the ceiling exactly.
        (ceiling, true)
    } else {
        let restarts = if cfg.restarts == 0 {
            DEFAULT_SUPPORT_RESTARTS
        } else {
            cfg.restarts
        };
        let found = support_variance_supremum(rho, &es, rank, restarts, cfg.seed, cfg.tol);
        if found >= ceiling - 1e-9 {
            (ceiling, true)
        } else {
            (found, false)
        }
    };

    if sup_est < ZERO_VARIANCE_TOL {
        // Every support state is locally deterministic; by convention the
        // quantifier vanishes (the Fisher information does too).
        return Ok(QuantBracket {
            lower: 0.0,
            upper: 0.0,
            estimate: 0.0,
            method: BracketMethod::SupportNormalized,
            certified_exact: true,
        });
    }

    let estimate = q / (4.0 * sup_est);
    Ok(QuantBracket {
        lower,
        upper: estimate,
        estimate,
        method: BracketMethod::SupportNormalized,
        certified_exact: short_circuit,
    })
}

/// Largest local variance found over unit vectors of the support subspace.
fn support_variance_supremum(
    rho: &DensityState,
    es: &crate::states::EigenSystem,
    rank: usize,
    restarts: usize,
    seed: u64,
    tol: f64,
) -> f64 {
    let dim = rho.matrix().nrows();
    let n = rho.party_count();
    let grid = rho.grid();
    let spectrum = rho.obs().spectrum().to_vec();

    // Support basis: columns of the eigenvectors with non-flagged eigenvalues.
    let mut basis = DMatrix::zeros(dim, rank);
    let mut col = 0;
    for (j, flagged) in es.zero_flags.iter().enumerate() {
        if !flagged {
            basis.set_column(col, &es.eigenvectors.column(j));
            col += 1;
        }
    }

    // Restricted local operators: M_i = V† diag(λ_i²) V, N_i = V† diag(λ_i) V.
    let mut restricted: Vec<(DMatrix<Complex64>, DMatrix<Complex64>)> = Vec::with_capacity(n);
    for party in 0..n {
        let mut w = vec![0.0; dim];
        for flat in 0..dim {
            w[flat] = spectrum[grid.digit(flat, party)];
        }
        let scale_rows = |values: &dyn Fn(f64) -> f64| -> DMatrix<Complex64> {
            let mut scaled = basis.clone();
            for (flat, &weight) in w.iter().enumerate() {
                let factor = Complex64::from(values(weight));
                for c in 0..rank {
                    scaled[(flat, c)] *= factor;
                }
            }
            basis.adjoint() * scaled
        };
        let m = scale_rows(&|x| x * x);
        let nn = scale_rows(&|x| x);
        restricted.push((m, nn));
    }

    let per_restart: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|ridx| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (0x5851_f42d_4c95_7f2d_u64
                .wrapping_mul(ridx as u64 + 1)));
            let mut best = 0.0f64;
            for (m, nn) in &restricted {
                let mut inits: Vec<DVector<Complex64>> = Vec::new();
                if ridx == 0 {
                    // Extremal superposition of the restricted mean operator:
                    // the continuum maximizer pattern, often already optimal.
                    let se = nn.clone().symmetric_eigen();
                    let mut order: Vec<usize> = (0..rank).collect();
                    order.sort_by(|&a, &b| {
                        se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap()
                    });
                    let lo = se.eigenvectors.column(order[0]).clone_owned();
                    let hi = se.eigenvectors.column(order[rank - 1]).clone_owned();
                    let mix = (&lo + &hi) * Complex64::from(1.0 / 2.0f64.sqrt());
                    if mix.norm() > 1e-9 {
                        inits.push(mix.normalize());
                    }
                    inits.push(hi);
                }
                inits.push(random_unit(rank, &mut rng));
                for c0 in inits {
                    let v = ascend_variance(m, nn, c0, tol);
                    if v > best {
                        best = v;
                    }
                }
            }
            best
        })
        .collect();

    per_restart.into_iter().fold(0.0, f64::max)
}

fn random_unit<R: Rng>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    v.normalize()
}

/// Projected gradient ascent of `c†Mc - (c†Nc)²` on the unit sphere.
fn ascend_variance(
    m: &DMatrix<Complex64>,
    n: &DMatrix<Complex64>,
    mut c: DVector<Complex64>,
    tol: f64,
) -> f64 {
    let objective = |c: &DVector<Complex64>| -> f64 {
        let mc = m * c;
        let nc = n * c;
        let quad = c.dotc(&mc).re;
        let mean = c.dotc(&nc).re;
        quad - mean * mean
    };
    let mut value = objective(&c);
    let mut step = 1.0f64;
    for _ in 0..400 {
        let nc = n * &c;
        let mean = c.dotc(&nc).re;
        let grad = m * &c - nc * Complex64::from(2.0 * mean);
        let radial = c.dotc(&grad);
        let tangent = &grad - &c * radial;
        let gn = tangent.norm();
        if gn < 1e-13 {
            break;
        }
        let mut improved = false;
        let mut eta = step;
        for _ in 0..45 {
            let candidate = (&c + &tangent * Complex64::from(eta)).normalize();
            let cand_value = objective(&candidate);
            if cand_value > value {
                let gain = cand_value - value;
                c = candidate;
                value = cand_value;
                step = (eta * 2.0).min(4.0);
                improved = true;
                if gain < tol * value.abs().max(1.0) {
                    return value;
                }
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    value
}

/// Convex-roof extension, estimated by searching over mixing isometries.
///
/// Every ensemble realizing `ρ` is the image of its eigen-ensemble under an
/// isometry, so the search space is complete for the configured cardinality.
/// Any decomposition found upper-bounds the infimum; the Fisher ratio is the
/// certified lower bound. `certified_exact` fires when the bracket collapses
/// below `1e-6`.
pub fn f_convex_roof(
    rho: &DensityState,
    signs: &SignVector,
    cfg: &OptConfig,
    zero_tol: f64,
) -> Result<QuantBracket> {
    let es = eigensystem(rho, zero_tol)?;
    let rank = es.rank();
    if rank == 0 {
        return Err(Error::RankZero);
    }
    let dim = rho.matrix().nrows();

    if rank == 1 {
        // Pure state: the only decomposition is the trivial one.
        let amps: Vec<Complex64> = es.eigenvectors.column(0).iter().cloned().collect();
        let state = PureState::from_unnormalized(rho.obs().clone(), rho.party_count(), amps)?;
        return Ok(QuantBracket::exact(
            f_pure(&state, signs),
            BracketMethod::ConvexRoof,
        ));
    }

    let lower = f_qfi_ratio(rho, signs, None, zero_tol)?.estimate;

    let members = match cfg.ensemble_size {
        Some(m) if m < rank => {
            return Err(Error::InvalidParams(format!(
                "ensemble size {m} below rank {rank}: mixing parameterization incomplete"
            )))
        }
        Some(m) => m.min(rank * rank),
        None => (2 * rank).min(rank * rank),
    };

    // Scaled eigenvector columns: member i of an ensemble is
    // Σ_k V[i,k] · (√λ_k · eigvec_k), with V an isometry.
    let mut scaled = DMatrix::zeros(dim, rank);
    let mut col = 0;
    for (j, flagged) in es.zero_flags.iter().enumerate() {
        if !flagged {
            let root = Complex64::from(es.eigenvalues[j].max(0.0).sqrt());
            scaled.set_column(col, &(es.eigenvectors.column(j) * root));
            col += 1;
        }
    }

    let coll = CollectiveOperator::collective(rho.obs(), signs)?;
    let evaluator = RoofObjective {
        grid: rho.grid(),
        spectrum: rho.obs().spectrum().to_vec(),
        coll_weights: coll.weights().to_vec(),
        parties: rho.party_count(),
    };

    let restarts = if cfg.restarts == 0 {
        DEFAULT_ROOF_RESTARTS
    } else {
        cfg.restarts
    };
    let per_restart: Vec<f64> = (0..restarts)
        .into_par_iter()
        .map(|ridx| {
            let mut rng = ChaCha12Rng::seed_from_u64(
                cfg.seed ^ (0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(ridx as u64 + 1)),
            );
            let isometry = if ridx == 0 {
                // The eigen-decomposition itself.
                DMatrix::from_fn(members, rank, |i, j| {
                    if i == j {
                        Complex64::ONE
                    } else {
                        Complex64::ZERO
                    }
                })
            } else {
                random_isometry(members, rank, &mut rng)
            };
            minimize_over_rotations(&evaluator, &scaled, isometry, cfg.tol)
        })
        .collect();

    let estimate = per_restart.into_iter().fold(f64::INFINITY, f64::min);
    let upper = estimate;
    Ok(QuantBracket {
        lower,
        upper,
        estimate,
        method: BracketMethod::ConvexRoof,
        certified_exact: upper - lower < 1e-6,
    })
}

fn random_isometry<R: Rng>(m: usize, r: usize, rng: &mut R) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(m, r, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    a.qr().q()
}

struct RoofObjective {
    grid: Grid,
    spectrum: Vec<f64>,
    coll_weights: Vec<f64>,
    parties: usize,
}

impl RoofObjective {
    /// Weight times quantifier value of one unnormalized ensemble member.
    fn member_contribution(&self, member: &DVector<Complex64>) -> f64 {
        let weight: f64 = member.iter().map(|a| a.norm_sqr()).sum();
        if weight < 1e-14 {
            return 0.0;
        }
        let n = self.parties;
        let mut mean = vec![0.0; n];
        let mut second = vec![0.0; n];
        let mut cmean = 0.0;
        let mut csecond = 0.0;
        self.grid.for_each_point(|flat, digits| {
            let p = member[flat].norm_sqr() / weight;
            let w = self.coll_weights[flat];
            cmean += w * p;
            csecond += w * w * p;
            for (i, &idx) in digits.iter().enumerate() {
                let lam = self.spectrum[idx];
                mean[i] += lam * p;
                second[i] += lam * lam * p;
            }
        });
        let dmax = (0..n)
            .map(|i| second[i] - mean[i] * mean[i])
            .fold(0.0f64, f64::max);
        if dmax < ZERO_VARIANCE_TOL {
            return 0.0;
        }
        weight * (csecond - cmean * cmean).max(0.0) / dmax
    }
}

/// Coordinate descent over two-row rotations of the mixing isometry.
fn minimize_over_rotations(
    objective: &RoofObjective,
    scaled: &DMatrix<Complex64>,
    mut isometry: DMatrix<Complex64>,
    tol: f64,
) -> f64 {
    let members_count = isometry.nrows();
    // member i = scaled · (row i of the isometry)ᵀ
    let mut members: Vec<DVector<Complex64>> = (0..members_count)
        .map(|i| scaled * isometry.row(i).transpose())
        .collect();
    let mut contributions: Vec<f64> = members
        .iter()
        .map(|m| objective.member_contribution(m))
        .collect();
    let mut total: f64 = contributions.iter().sum();

    for _ in 0..40 {
        let sweep_start = total;
        for a in 0..members_count {
            for b in a + 1..members_count {
                let rest = total - contributions[a] - contributions[b];
                let pair_value = |theta: f64, phi: f64| -> (f64, DVector<Complex64>, DVector<Complex64>) {
                    let (sin, cos) = theta.sin_cos();
                    let phase = Complex64::from_polar(1.0, phi);
                    let new_a = &members[a] * Complex64::from(cos)
                        + &members[b] * (phase * sin);
                    let new_b = &members[b] * Complex64::from(cos)
                        - &members[a] * (phase.conj() * sin);
                    let va = objective.member_contribution(&new_a);
                    let vb = objective.member_contribution(&new_b);
                    (va + vb, new_a, new_b)
                };

                let mut best = (contributions[a] + contributions[b], 0.0f64, 0.0f64);
                let coarse = 13;
                for ti in 0..coarse {
                    let theta = -std::f64::consts::FRAC_PI_2
                        + std::f64::consts::PI * ti as f64 / (coarse - 1) as f64;
                    for pi in 0..coarse {
                        let phi = -std::f64::consts::PI
                            + 2.0 * std::f64::consts::PI * pi as f64 / (coarse - 1) as f64;
                        let (v, _, _) = pair_value(theta, phi);
                        if v < best.0 {
                            best = (v, theta, phi);
                        }
                    }
                }
                let mut span_theta = std::f64::consts::PI / (coarse - 1) as f64;
                let mut span_phi = 2.0 * std::f64::consts::PI / (coarse - 1) as f64;
                for _ in 0..8 {
                    let (center_t, center_p) = (best.1, best.2);
                    for ti in -3i32..=3 {
                        for pi in -3i32..=3 {
                            let theta = center_t + span_theta * ti as f64 / 3.0;
                            let phi = center_p + span_phi * pi as f64 / 3.0;
                            let (v, _, _) = pair_value(theta, phi);
                            if v < best.0 {
                                best = (v, theta, phi);
                            }
                        }
                    }
                    span_theta /= 3.0;
                    span_phi /= 3.0;
                }

                if best.0 < contributions[a] + contributions[b] {
                    let (v, new_a, new_b) = pair_value(best.1, best.2);
                    let (sin, cos) = best.1.sin_cos();
                    let phase = Complex64::from_polar(1.0, best.2);
                    let row_a = isometry.row(a).clone_owned();
                    let row_b = isometry.row(b).clone_owned();
                    isometry.set_row(
                        a,
                        &(row_a.clone() * Complex64::from(cos) + row_b.clone() * (phase * sin)),
                    );
                    isometry.set_row(
                        b,
                        &(row_b * Complex64::from(cos) - row_a * (phase.conj() * sin)),
                    );
                    members[a] = new_a;
                    members[b] = new_b;
                    let (va, vb) = (
                        objective.member_contribution(&members[a]),
                        objective.member_contribution(&members[b]),
                    );
                    contributions[a] = va;
                    contributions[b] = vb;
                    total = rest + v;
                }
            }
        }
        if sweep_start - total <= tol * total.abs().max(1.0) {
            break;
        }
    }
    total
}

/// Thickness report for a state with respect to an orthogonal frame.
pub fn thickness<T: SpectralDistribution>(state: &T, frame: &OrthoFrame) -> ThicknessReport {
    assert_eq!(
        frame.size(),
        state.party_count(),
        "frame size must match the party count"
    );
    let n = state.party_count();
    let p1 = CollectiveOperator::from_frame_row(state.obs(), frame, 0)
        .expect("state grid was validated at construction");
    let delta_p1 = variance(state, &p1).expect("frame operator matches the state");
    let mut delta_pj_min = f64::INFINITY;
    for j in 1..n {
        let pj = CollectiveOperator::from_frame_row(state.obs(), frame, j)
            .expect("state grid was validated at construction");
        let dj = variance(state, &pj).expect("frame operator matches the state");
        if dj < delta_pj_min {
            delta_pj_min = dj;
        }
    }
    let zeta_hat = if delta_p1 >= ZERO_VARIANCE_TOL {
        Some(if delta_pj_min.is_finite() {
            delta_pj_min / delta_p1
        } else {
            f64::INFINITY
        })
    } else {
        None
    };
    ThicknessReport {
        delta_p1,
        delta_pj_min,
        zeta_hat,
        frame: frame.clone(),
    }
}
