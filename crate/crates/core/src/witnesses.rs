//! Depth bounds, certification, and the k/ζ/f trade-off algebra.
//!
//! A k-separable n-party state satisfies
//! `F ≤ ⌊n/k⌋k² + (n - ⌊n/k⌋k)² ≤ nk`; violating the bound at some k
//! certifies entanglement depth at least k+1. The same scheme works for any
//! convex per-block budget `f` with `f(0) = 0`, which covers the
//! thickness-constrained variant `f(x) = x²/((1-ζ)+xζ)`.

use crate::error::Error;
use crate::Result;

/// Which bound produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Floor,
    Linear,
    Thick,
}

/// The two k-separability bounds, exact in integer arithmetic.
///
/// Returns `(floor_bound, linear_bound) = (⌊n/k⌋k² + (n-⌊n/k⌋k)², nk)`.
pub fn bound_k(n: usize, k: usize) -> Result<(f64, f64)> {
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let blocks = (n / k) as u64;
    let remainder = (n - (n / k) * k) as u64;
    let floor = blocks * (k as u64) * (k as u64) + remainder * remainder;
    let linear = (n as u64) * (k as u64);
    Ok((floor as f64, linear as f64))
}

/// Ceiling on the quantifier for fully collective states of thickness `ζ`:
/// `n² / ((1-ζ) + ζn)`.
pub fn bound_thick(n: usize, zeta: f64) -> Result<f64> {
    if zeta < 0.0 {
        return Err(Error::NegativeZeta(zeta));
    }
    let nf = n as f64;
    Ok(nf * nf / ((1.0 - zeta) + zeta * nf))
}

fn thick_block(x: f64, zeta: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x / ((1.0 - zeta) + x * zeta)
    }
}

/// k-separability bounds under a thickness hypothesis `ζ` on every block:
/// floor form `⌊n/k⌋·k²/((1-ζ)+kζ) + r²/((1-ζ)+rζ)` with `r = n - ⌊n/k⌋k`,
/// and linear form `kn/((1-ζ)+kζ)`.
pub fn bound_k_thick(n: usize, k: usize, zeta: f64) -> Result<(f64, f64)> {
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if zeta < 0.0 {
        return Err(Error::NegativeZeta(zeta));
    }
    let blocks = (n / k) as f64;
    let remainder = (n - (n / k) * k) as f64;
    let kf = k as f64;
    let floor = blocks * thick_block(kf, zeta) + thick_block(remainder, zeta);
    let linear = kf * n as f64 / ((1.0 - zeta) + kf * zeta);
    Ok((floor, linear))
}

/// k-separability bounds for a generic convex per-block budget.
///
/// `samples[i]` must equal `f(i)` for `i = 0…n`. An optional uniformly
/// spaced `dense` sample of `[0, n]` strengthens the convexity check.
/// Requires `f(0) = 0` within `1e-12` and non-negative second differences
/// within `-1e-10`. Returns `(⌊n/k⌋f(k) + f(n-⌊n/k⌋k), (n/k)f(k))`, the
/// linear form evaluated as `n·f(k)/k` so integer cases stay exact.
pub fn bound_generic(
    n: usize,
    k: usize,
    samples: &[f64],
    dense: Option<&[f64]>,
) -> Result<(f64, f64)> {
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if samples.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "expected {} samples of f on 0..=n, got {}",
            n + 1,
            samples.len()
        )));
    }
    if samples[0].abs() > 1e-12 {
        return Err(Error::NonzeroAtZero(samples[0]));
    }
    check_discrete_convexity(samples)?;
    if let Some(grid) = dense {
        if grid.len() >= 3 {
            check_discrete_convexity(grid)?;
        }
    }
    let blocks = (n / k) as f64;
    let remainder = n - (n / k) * k;
    let floor = blocks * samples[k] + samples[remainder];
    let linear = (n as f64) * samples[k] / (k as f64);
    Ok((floor, linear))
}

fn check_discrete_convexity(samples: &[f64]) -> Result<()> {
    for i in 1..samples.len() - 1 {
        let second = samples[i - 1] - 2.0 * samples[i] + samples[i + 1];
        if second < -1e-10 {
            return Err(Error::NotConvex(second, i));
        }
    }
    Ok(())
}

/// Full table of floor/linear bounds for `k = 1…n`.
#[derive(Debug, Clone)]
pub struct BoundTable {
    pub n: usize,
    pub rows: Vec<BoundRow>,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundRow {
    pub k: usize,
    pub floor_bound: f64,
    pub linear_bound: f64,
}

impl BoundTable {
    pub fn new(n: usize) -> Result<Self> {
        let rows = (1..=n)
            .map(|k| {
                bound_k(n, k).map(|(floor_bound, linear_bound)| BoundRow {
                    k,
                    floor_bound,
                    linear_bound,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, rows })
    }

    /// Thickness-adjusted floor bound for row `k`.
    pub fn thick_bound(&self, k: usize, zeta: f64) -> Result<f64> {
        Ok(bound_k_thick(self.n, k, zeta)?.0)
    }
}

/// Certified entanglement depth together with the bound that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessVerdict {
    pub f_lower_certified: f64,
    /// `1` means no entanglement certified.
    pub depth_lower_bound: usize,
    pub bound_used: BoundKind,
    pub zeta_assumed: Option<f64>,
}

/// Scans `k = 1…n` against the floor bound (thickness-adjusted when `zeta`
/// is given): the verdict is `1 + max{k : f_lower > bound(k)}`, or `1` when
/// no bound is violated.
pub fn certify(f_lower: f64, n: usize, zeta: Option<f64>) -> Result<WitnessVerdict> {
    if f_lower < 0.0 {
        return Err(Error::InvalidParams(format!(
            "certified lower bound must be non-negative, got {f_lower}"
        )));
    }
    let mut depth = 1usize;
    for k in 1..=n {
        let bound = match zeta {
            None => bound_k(n, k)?.0,
            Some(z) => bound_k_thick(n, k, z)?.0,
        };
        if f_lower > bound {
            depth = k + 1;
        }
    }
    Ok(WitnessVerdict {
        f_lower_certified: f_lower,
        depth_lower_bound: depth,
        bound_used: if zeta.is_some() {
            BoundKind::Thick
        } else {
            BoundKind::Floor
        },
        zeta_assumed: zeta,
    })
}

/// Thickness that makes a fully entangled state's ceiling equal a
/// k-separable state's: `ζ = (n-k)/(k(n-1))`.
pub fn zeta_of_k(n: usize, k: f64) -> Result<f64> {
    if k < 1.0 || k > n as f64 {
        return Err(Error::InvalidK {
            k: k.round() as usize,
            n,
        });
    }
    let denom = k * (n as f64 - 1.0);
    if denom == 0.0 {
        return Err(Error::DegenerateK(k));
    }
    Ok((n as f64 - k) / denom)
}

/// Inverse of [`zeta_of_k`]: `k = n/((1-ζ) + nζ)`.
pub fn k_of_zeta(n: usize, zeta: f64) -> Result<f64> {
    if zeta < 0.0 {
        return Err(Error::NegativeZeta(zeta));
    }
    Ok(n as f64 / ((1.0 - zeta) + n as f64 * zeta))
}

/// Largest thickness at which a k-separable state can still reach level `f`:
/// `ζ = (kn - f)/(f(k-1))`. Feasible only when `kn ≥ f`.
pub fn zeta_for_f(n: usize, k: f64, f: f64) -> Result<f64> {
    if f <= 0.0 {
        return Err(Error::InfeasibleLevel(format!(
            "level f = {f} must be positive"
        )));
    }
    let kn = k * n as f64;
    if kn < f {
        return Err(Error::InfeasibleLevel(format!(
            "kn = {kn} below the requested level f = {f}"
        )));
    }
    if (k - 1.0).abs() == 0.0 {
        return Err(Error::DegenerateK(k));
    }
    Ok((k * n as f64 - f) / (f * (k - 1.0)))
}

/// Smallest block size whose thickness-ζ ceiling reaches level `f`:
/// `k = f(1-ζ)/(n - fζ)`. Feasible only when `f ≤ n²/((1-ζ)+nζ)`.
pub fn k_for_f(n: usize, zeta: f64, f: f64) -> Result<f64> {
    if zeta < 0.0 {
        return Err(Error::NegativeZeta(zeta));
    }
    let ceiling = bound_thick(n, zeta)?;
    if f > ceiling {
        return Err(Error::InfeasibleLevel(format!(
            "level f = {f} above the thickness ceiling {ceiling}"
        )));
    }
    let denom = n as f64 - f * zeta;
    if denom == 0.0 {
        return Err(Error::DegenerateK(f));
    }
    Ok(f * (1.0 - zeta) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bound_k_reference_values() {
        assert_eq!(bound_k(5, 2).unwrap(), (9.0, 10.0));
        assert_eq!(bound_k(6, 3).unwrap(), (18.0, 18.0));
        assert_eq!(bound_k(4, 4).unwrap(), (16.0, 16.0));
        assert!(matches!(bound_k(4, 0), Err(Error::InvalidK { .. })));
        assert!(matches!(bound_k(4, 5), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn bound_family_ordering_and_divisibility() {
        for n in 1..=64usize {
            let mut prev_floor = 0.0;
            for k in 1..=n {
                let (floor, linear) = bound_k(n, k).unwrap();
                assert!(floor <= linear, "floor > linear at n={n}, k={k}");
                if n % k == 0 {
                    assert_eq!(floor, linear, "divisible case must tie at n={n}, k={k}");
                } else {
                    assert!(floor < linear, "non-divisible case must be strict");
                }
                assert!(floor >= prev_floor, "floor bound must be nondecreasing in k");
                prev_floor = floor;
            }
        }
    }

    #[test]
    fn thickness_bounds() {
        assert_relative_eq!(bound_thick(3, 0.5).unwrap(), 4.5);
        assert_relative_eq!(bound_thick(3, 0.0).unwrap(), 9.0);
        assert_relative_eq!(bound_thick(5, 1.0).unwrap(), 5.0);
        assert!(matches!(bound_thick(3, -0.1), Err(Error::NegativeZeta(_))));

        // ζ = 0 reduces to the plain bounds
        for n in 1..=12usize {
            for k in 1..=n {
                let plain = bound_k(n, k).unwrap();
                let thick = bound_k_thick(n, k, 0.0).unwrap();
                assert_eq!(plain, thick);
            }
        }
        // ζ = 1 flattens every floor bound to n
        for n in 2..=12usize {
            for k in 1..=n {
                let (floor, _) = bound_k_thick(n, k, 1.0).unwrap();
                assert_relative_eq!(floor, n as f64, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn generic_bound_with_square_budget_matches_bound_k() {
        for n in 1..=64usize {
            let samples: Vec<f64> = (0..=n).map(|i| (i * i) as f64).collect();
            for k in 1..=n {
                let (floor, linear) = bound_generic(n, k, &samples, None).unwrap();
                let (ef, el) = bound_k(n, k).unwrap();
                assert_eq!(floor, ef, "floor mismatch at n={n}, k={k}");
                assert_eq!(linear, el, "linear mismatch at n={n}, k={k}");
            }
        }
    }

    #[test]
    fn generic_bound_examples_and_checks() {
        let n = 5;
        let squares: Vec<f64> = (0..=n).map(|i| (i * i) as f64).collect();
        assert_eq!(bound_generic(n, 2, &squares, None).unwrap(), (9.0, 10.0));

        // thickness budget with a single block reduces to the ceiling
        let zeta = 0.5;
        let budget: Vec<f64> = (0..=3)
            .map(|i| {
                let x = i as f64;
                if i == 0 {
                    0.0
                } else {
                    x * x / ((1.0 - zeta) + x * zeta)
                }
            })
            .collect();
        let (floor, _) = bound_generic(3, 3, &budget, None).unwrap();
        assert_relative_eq!(floor, 4.5);

        // linear budget gives n for every k
        let linear_budget: Vec<f64> = (0..=6).map(|i| i as f64).collect();
        for k in 1..=6 {
            let (floor, lin) = bound_generic(6, k, &linear_budget, None).unwrap();
            assert_relative_eq!(floor, 6.0);
            assert_relative_eq!(lin, 6.0);
        }

        // rejections
        let mut bad_zero = squares.clone();
        bad_zero[0] = 1e-6;
        assert!(matches!(
            bound_generic(n, 2, &bad_zero, None),
            Err(Error::NonzeroAtZero(_))
        ));
        let concave: Vec<f64> = (0..=n).map(|i| (i as f64).sqrt()).collect();
        assert!(matches!(
            bound_generic(n, 2, &concave, None),
            Err(Error::NotConvex(_, _))
        ));
    }

    #[test]
    fn certify_reference_scans() {
        let verdict = certify(9.0, 3, None).unwrap();
        assert_eq!(verdict.depth_lower_bound, 3);
        assert_eq!(verdict.bound_used, BoundKind::Floor);

        // product-state ceiling never certifies
        for n in 2..=8usize {
            let verdict = certify(n as f64, n, None).unwrap();
            assert_eq!(verdict.depth_lower_bound, 1);
        }

        // noisy state below the first bound
        let verdict = certify(4.0 / 3.0, 2, None).unwrap();
        assert_eq!(verdict.depth_lower_bound, 1);

        // GHZ at n=4 violates k=3
        let verdict = certify(16.0, 4, None).unwrap();
        assert_eq!(verdict.depth_lower_bound, 4);

        // thickness-adjusted scan
        let verdict = certify(4.4, 3, Some(0.5)).unwrap();
        assert_eq!(verdict.bound_used, BoundKind::Thick);
        // bounds at ζ=0.5: k=1 → 3·2/3 = 2? block(1)=1/(0.5+0.5)=1, 3 blocks → 3;
        // k=2 → 4/1.5 + 1 = 3.666…; k=3 → 4.5. 4.4 > 3.666 → depth 3.
        assert_eq!(verdict.depth_lower_bound, 3);
    }

    #[test]
    fn tradeoff_formulas_and_round_trips() {
        assert_relative_eq!(zeta_of_k(10, 5.0).unwrap(), 1.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(k_of_zeta(10, 1.0 / 9.0).unwrap(), 5.0, epsilon = 1e-12);
        assert_eq!(k_of_zeta(10, 0.0).unwrap(), 10.0);
        assert_eq!(k_of_zeta(10, 1.0).unwrap(), 1.0);
        assert_relative_eq!(zeta_of_k(10, 10.0).unwrap(), 0.0);
        assert_relative_eq!(zeta_of_k(10, 1.0).unwrap(), 1.0);

        // level-set example: n=10, f=15, k=2 → ζ = 1/3
        assert_relative_eq!(zeta_for_f(10, 2.0, 15.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        // round trip back through k_for_f
        let zeta = zeta_for_f(10, 2.0, 15.0).unwrap();
        assert_relative_eq!(k_for_f(10, zeta, 15.0).unwrap(), 2.0, epsilon = 1e-12);

        assert!(matches!(
            zeta_for_f(10, 2.0, 25.0),
            Err(Error::InfeasibleLevel(_))
        ));
        assert!(matches!(zeta_for_f(10, 1.0, 5.0), Err(Error::DegenerateK(_))));
        assert!(matches!(
            k_for_f(10, 0.5, 40.0),
            Err(Error::InfeasibleLevel(_))
        ));
    }

    #[test]
    fn k_of_zeta_monotone_decreasing() {
        for n in [2usize, 5, 10, 50] {
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let zeta = i as f64 / 100.0;
                let k = k_of_zeta(n, zeta).unwrap();
                assert!(k < prev, "k_of_zeta not strictly decreasing at ζ={zeta}");
                prev = k;
            }
        }
    }
}
