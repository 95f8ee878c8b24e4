//! Spectral-space geometry.
//!
//! An n-party system built from a local observable with non-degenerate
//! spectrum `Λ = {λ_0 < … < λ_{d-1}}` lives on the grid `Λⁿ`. States are
//! amplitude functions over that grid, and the geometry of a state's support
//! (which grid points carry weight, and whether they line up along the main
//! diagonal direction `u = (1, …, 1)`) controls how large the collective
//! variance can get. This module provides the grid bookkeeping, the
//! enumeration of maximal diagonal lines, and support extraction.

use crate::error::Error;
use crate::states::PureState;
use crate::Result;

/// Default cap on the dense grid size `dⁿ`.
pub const DEFAULT_GRID_CAP: usize = 4096;

/// Relative tolerance under which two eigenvalue differences are identified.
pub const SPECTRUM_REL_TOL: f64 = 1e-12;

/// A local observable, fully described by its strictly increasing spectrum.
///
/// Degenerate spectra are rejected: the whole construction relies on the
/// one-to-one map between eigenvalues and local eigenstates.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalObservable {
    spectrum: Vec<f64>,
}

impl LocalObservable {
    /// Builds an observable from eigenvalues, sorting them ascending.
    ///
    /// Rejects lists with fewer than two entries and duplicates within a
    /// relative tolerance of `1e-12`.
    pub fn new(eigenvalues: &[f64]) -> Result<Self> {
        if eigenvalues.len() < 2 {
            return Err(Error::TooFewEigenvalues(eigenvalues.len()));
        }
        if let Some(bad) = eigenvalues.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite eigenvalue {bad}"
            )));
        }
        let mut spectrum = eigenvalues.to_vec();
        spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for pair in spectrum.windows(2) {
            let scale = pair[0].abs().max(pair[1].abs());
            if pair[1] - pair[0] <= SPECTRUM_REL_TOL * scale {
                return Err(Error::DuplicateEigenvalue(pair[0], pair[1]));
            }
        }
        Ok(Self { spectrum })
    }

    /// The qubit observable with spectrum `(-1, 1)` (Pauli-Z).
    pub fn qubit() -> Self {
        Self {
            spectrum: vec![-1.0, 1.0],
        }
    }

    /// Evenly spaced spectrum `0, step, …, (d-1)·step`.
    pub fn evenly_spaced(d: usize, step: f64) -> Result<Self> {
        Self::new(&(0..d).map(|i| i as f64 * step).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.spectrum.len()
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.spectrum.last().unwrap()
    }

    /// State-independent ceiling on the local variance, `(λ_max - λ_min)²/4`.
    pub fn variance_ceiling(&self) -> f64 {
        let range = self.lambda_max() - self.lambda_min();
        range * range / 4.0
    }

    /// True when all gaps agree within the spectrum tolerance.
    pub fn is_evenly_spaced(&self) -> bool {
        let gap = self.spectrum[1] - self.spectrum[0];
        self.spectrum.windows(2).all(|w| {
            let g = w[1] - w[0];
            (g - gap).abs() <= SPECTRUM_REL_TOL * g.abs().max(gap.abs())
        })
    }
}

/// Builds a [`LocalObservable`]; free-function spelling of [`LocalObservable::new`].
pub fn make_local_observable(eigenvalues: &[f64]) -> Result<LocalObservable> {
    LocalObservable::new(eigenvalues)
}

/// A point of the grid `Λⁿ` in index form: entry `i` indexes the spectrum of
/// party `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Dense-grid layout: `dⁿ` points in lexicographic order, last party fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    d: usize,
    n: usize,
    len: usize,
}

impl Grid {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_cap(d, n, DEFAULT_GRID_CAP)
    }

    pub fn with_cap(d: usize, n: usize, cap: usize) -> Result<Self> {
        assert!(d >= 1 && n >= 1, "grid needs d >= 1 and n >= 1");
        let mut len: u128 = 1;
        for _ in 0..n {
            len = len.saturating_mul(d as u128);
            if len > cap as u128 {
                return Err(Error::GridTooLarge { actual: len, cap });
            }
        }
        Ok(Self {
            d,
            n,
            len: len as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    /// Spectrum index of `party` at flat position `flat`.
    pub fn digit(&self, flat: usize, party: usize) -> usize {
        let mut rem = flat;
        for _ in party + 1..self.n {
            rem /= self.d;
        }
        rem % self.d
    }

    pub fn decode(&self, flat: usize) -> MultiIndex {
        let mut digits = vec![0usize; self.n];
        let mut rem = flat;
        for p in (0..self.n).rev() {
            digits[p] = rem % self.d;
            rem /= self.d;
        }
        MultiIndex(digits)
    }

    pub fn encode(&self, index: &MultiIndex) -> usize {
        debug_assert_eq!(index.len(), self.n);
        index.0.iter().fold(0, |acc, &i| acc * self.d + i)
    }

    /// Visits every grid point in flat order with its decoded digits,
    /// amortizing the decode via odometer increments.
    pub fn for_each_point<F: FnMut(usize, &[usize])>(&self, mut f: F) {
        let mut digits = vec![0usize; self.n];
        for flat in 0..self.len {
            f(flat, &digits);
            for p in (0..self.n).rev() {
                digits[p] += 1;
                if digits[p] < self.d {
                    break;
                }
                digits[p] = 0;
            }
        }
    }
}

/// A maximal set of grid points lying on one line directed by `u = (1, …, 1)`
/// in eigenvalue space.
///
/// The `offset_key` is the vector `(λ_2 - λ_1, …, λ_n - λ_1)` shared by every
/// point of the line; points are ordered by their first coordinate. Only
/// lines with at least two points admit nontrivial states saturating the
/// collective-variance bound.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalLine {
    pub offset_key: Vec<f64>,
    pub points: Vec<MultiIndex>,
}

impl DiagonalLine {
    pub fn point_count(&self) -> usize {
        self.points.len()
    }
}

/// Groups all points of `Λⁿ` into maximal diagonal lines.
///
/// Grouping hashes the `(n-1)`-vector of eigenvalue differences to the first
/// party, with differences identified at relative tolerance `1e-12`. The
/// returned lines are sorted by point count descending, then by offset key.
pub fn enumerate_diagonal_lines(obs: &LocalObservable, n: usize) -> Result<Vec<DiagonalLine>> {
    enumerate_diagonal_lines_with_cap(obs, n, DEFAULT_GRID_CAP)
}

/// [`enumerate_diagonal_lines`] with an explicit grid cap.
pub fn enumerate_diagonal_lines_with_cap(
    obs: &LocalObservable,
    n: usize,
    cap: usize,
) -> Result<Vec<DiagonalLine>> {
    let grid = Grid::with_cap(obs.dim(), n, cap)?;
    let d = obs.dim();
    let spectrum = obs.spectrum();

    // Canonical ids for all pairwise eigenvalue differences so that the
    // offset key can be hashed exactly.
    let mut diffs: Vec<f64> = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            diffs.push(spectrum[b] - spectrum[a]);
        }
    }
    let mut sorted = diffs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut reps: Vec<f64> = Vec::new();
    for &x in &sorted {
        match reps.last() {
            Some(&r) if (x - r).abs() <= SPECTRUM_REL_TOL * x.abs().max(r.abs()) => {}
            _ => reps.push(x),
        }
    }
    let diff_id = |x: f64| -> usize {
        let pos = reps.partition_point(|&r| r < x);
        // representative is either at pos or pos-1
        let candidates = [pos.saturating_sub(1), pos.min(reps.len() - 1)];
        for &c in &candidates {
            if (reps[c] - x).abs() <= SPECTRUM_REL_TOL * reps[c].abs().max(x.abs()) + f64::MIN_POSITIVE
            {
                return c;
            }
        }
        unreachable!("difference {x} not among canonical representatives")
    };

    use std::collections::HashMap;
    let mut groups: HashMap<Vec<usize>, Vec<MultiIndex>> = HashMap::new();
    grid.for_each_point(|_, digits| {
        let key: Vec<usize> = (1..n)
            .map(|p| diff_id(spectrum[digits[p]] - spectrum[digits[0]]))
            .collect();
        groups
            .entry(key)
            .or_default()
            .push(MultiIndex(digits.to_vec()));
    });

    let mut lines: Vec<DiagonalLine> = groups
        .into_iter()
        .map(|(key, mut points)| {
            points.sort_by_key(|p| p.0[0]);
            let offset_key = key.into_iter().map(|id| reps[id]).collect();
            DiagonalLine { offset_key, points }
        })
        .collect();
    lines.sort_by(|a, b| {
        b.points
            .len()
            .cmp(&a.points.len())
            .then_with(|| a.offset_key.partial_cmp(&b.offset_key).unwrap())
    });
    Ok(lines)
}

/// The set of grid points whose probability weight exceeds a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSupport {
    pub points: Vec<MultiIndex>,
    pub threshold: f64,
}

impl SpectralSupport {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, index: &MultiIndex) -> bool {
        self.points.binary_search(index).is_ok()
    }
}

/// Extracts the support `{ λ⃗ : |amplitude(λ⃗)|² > threshold }` of a pure
/// state, in sorted index order.
pub fn spectral_support(state: &PureState, threshold: f64) -> SpectralSupport {
    assert!(
        threshold > 0.0 && threshold < 1.0,
        "support threshold must lie in (0, 1)"
    );
    let grid = state.grid();
    let mut points = Vec::new();
    for (flat, amp) in state.amplitudes().iter().enumerate() {
        if amp.norm_sqr() > threshold {
            points.push(grid.decode(flat));
        }
    }
    SpectralSupport { points, threshold }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observable_sorts_and_reports_extremes() {
        let obs = make_local_observable(&[1.0, -1.0]).unwrap();
        assert_eq!(obs.spectrum(), &[-1.0, 1.0]);
        assert_eq!(obs.dim(), 2);
        assert_eq!(obs.lambda_min(), -1.0);
        assert_eq!(obs.lambda_max(), 1.0);
        assert_eq!(obs.variance_ceiling(), 1.0);

        let obs = make_local_observable(&[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(obs.spectrum(), &[0.0, 1.0, 2.0]);
        assert!(obs.is_evenly_spaced());

        let obs = make_local_observable(&[-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(obs.spectrum(), &[-1.0, 0.0, 2.0]);
        assert!(!obs.is_evenly_spaced());
    }

    #[test]
    fn observable_rejects_degenerate_and_short_spectra() {
        assert!(matches!(
            make_local_observable(&[1.0]),
            Err(Error::TooFewEigenvalues(1))
        ));
        assert!(matches!(
            make_local_observable(&[0.5, 0.5]),
            Err(Error::DuplicateEigenvalue(_, _))
        ));
        // within relative tolerance counts as duplicate
        assert!(matches!(
            make_local_observable(&[1.0, 1.0 + 1e-14]),
            Err(Error::DuplicateEigenvalue(_, _))
        ));
        assert!(make_local_observable(&[1.0, 1.0 + 1e-9]).is_ok());
    }

    #[test]
    fn grid_layout_last_party_fastest() {
        let grid = Grid::new(3, 2).unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(grid.decode(0).as_slice(), &[0, 0]);
        assert_eq!(grid.decode(1).as_slice(), &[0, 1]);
        assert_eq!(grid.decode(3).as_slice(), &[1, 0]);
        assert_eq!(grid.encode(&MultiIndex(vec![2, 1])), 7);
        assert_eq!(grid.digit(7, 0), 2);
        assert_eq!(grid.digit(7, 1), 1);

        let mut seen = Vec::new();
        grid.for_each_point(|flat, digits| {
            assert_eq!(digits, grid.decode(flat).as_slice());
            seen.push(flat);
        });
        assert_eq!(seen.len(), 9);
    }

    #[test]
    fn grid_cap_enforced() {
        assert!(Grid::new(2, 12).is_ok()); // 4096 exactly
        assert!(matches!(
            Grid::new(2, 13),
            Err(Error::GridTooLarge { .. })
        ));
        assert!(Grid::with_cap(2, 13, 8192).is_ok());
    }

    #[test]
    fn evenly_spaced_qutrit_lines() {
        let obs = make_local_observable(&[0.0, 1.0, 2.0]).unwrap();
        let lines = enumerate_diagonal_lines(&obs, 2).unwrap();
        // d=3 evenly spaced, n=2: 5 lines, 3 of them with >= 2 points
        assert_eq!(lines.len(), 5);
        assert_eq!(lines.iter().filter(|l| l.point_count() >= 2).count(), 3);
        assert_eq!(
            lines.iter().map(|l| l.point_count()).sum::<usize>(),
            9,
            "lines partition the grid"
        );

        let main = &lines[0];
        assert_eq!(main.offset_key, vec![0.0]);
        assert_eq!(
            main.points,
            vec![
                MultiIndex(vec![0, 0]),
                MultiIndex(vec![1, 1]),
                MultiIndex(vec![2, 2])
            ]
        );
        let plus: Vec<_> = lines
            .iter()
            .filter(|l| l.offset_key == vec![1.0])
            .collect();
        assert_eq!(plus.len(), 1);
        assert_eq!(
            plus[0].points,
            vec![MultiIndex(vec![0, 1]), MultiIndex(vec![1, 2])]
        );
        let minus: Vec<_> = lines
            .iter()
            .filter(|l| l.offset_key == vec![-1.0])
            .collect();
        assert_eq!(
            minus[0].points,
            vec![MultiIndex(vec![1, 0]), MultiIndex(vec![2, 1])]
        );
    }

    #[test]
    fn uneven_spectrum_has_single_multi_point_line() {
        let obs = make_local_observable(&[-1.0, 0.0, 2.0]).unwrap();
        let lines = enumerate_diagonal_lines(&obs, 2).unwrap();
        let multi: Vec<_> = lines.iter().filter(|l| l.point_count() >= 2).collect();
        assert_eq!(multi.len(), 1);
        assert_eq!(
            multi[0].points,
            vec![
                MultiIndex(vec![0, 0]),
                MultiIndex(vec![1, 1]),
                MultiIndex(vec![2, 2])
            ]
        );
        assert_eq!(lines.iter().map(|l| l.point_count()).sum::<usize>(), 9);
    }

    #[test]
    fn support_extraction() {
        use crate::states::{ghz_like, PureState};
        use num_complex::Complex64;

        let obs = LocalObservable::qubit();
        let ghz = ghz_like(&obs, 2, 0.0).unwrap();
        let support = spectral_support(&ghz, 1e-6);
        assert_eq!(
            support.points,
            vec![MultiIndex(vec![0, 0]), MultiIndex(vec![1, 1])]
        );
        assert!(support.contains(&MultiIndex(vec![0, 0])));
        assert!(!support.contains(&MultiIndex(vec![0, 1])));

        // product eigenstate: single support point at any threshold < 1
        let mut amps = vec![Complex64::ZERO; 4];
        amps[2] = Complex64::ONE;
        let eig = PureState::new(obs.clone(), 2, amps).unwrap();
        assert_eq!(spectral_support(&eig, 0.999).len(), 1);

        // uniform state on 4 points: every weight 0.25 < 0.3
        let uniform = PureState::new(obs, 2, vec![Complex64::from(0.5); 4]).unwrap();
        assert!(spectral_support(&uniform, 0.3).is_empty());
        assert_eq!(spectral_support(&uniform, 0.2).len(), 4);
    }

    #[test]
    fn line_members_differ_by_constant_shift() {
        let obs = make_local_observable(&[-1.0, 0.0, 2.0, 3.5]).unwrap();
        for n in [1usize, 2, 3] {
            let lines = enumerate_diagonal_lines(&obs, n).unwrap();
            let total: usize = lines.iter().map(|l| l.point_count()).sum();
            assert_eq!(total, obs.dim().pow(n as u32));
            for line in &lines {
                for pair in line.points.windows(2) {
                    let shift =
                        obs.spectrum()[pair[1].0[0]] - obs.spectrum()[pair[0].0[0]];
                    for p in 0..n {
                        let delta =
                            obs.spectrum()[pair[1].0[p]] - obs.spectrum()[pair[0].0[p]];
                        assert!(
                            (delta - shift).abs()
                                <= SPECTRUM_REL_TOL * delta.abs().max(shift.abs()),
                            "non-uniform shift within a line"
                        );
                    }
                }
            }
        }
    }
}
