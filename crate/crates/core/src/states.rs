//! Construction and eigen-analysis of n-partite pure and mixed states.
//!
//! States are stored densely over the spectral grid: a pure state is the
//! vector of complex amplitudes in lexicographic multi-index order (last
//! party fastest), a mixed state is the full Hermitian matrix in the same
//! basis. All constructors return normalized values; seeded samplers are
//! deterministic functions of their seed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::spectral::{DiagonalLine, Grid, LocalObservable};
use crate::Result;

/// Tolerance on `Σ|a|² = 1` accepted by validating constructors.
pub const NORM_TOL: f64 = 1e-9;
/// Entrywise Hermiticity tolerance for density matrices.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default relative threshold below which eigenvalues count as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-12;

/// A pure n-partite state as a dense amplitude vector over the spectral grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    obs: LocalObservable,
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Validates normalization within [`NORM_TOL`].
    pub fn new(obs: LocalObservable, n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_norm_tol(obs, n, amplitudes, NORM_TOL)
    }

    /// Validates normalization within a caller-supplied tolerance.
    pub fn with_norm_tol(
        obs: LocalObservable,
        n: usize,
        amplitudes: Vec<Complex64>,
        tol: f64,
    ) -> Result<Self> {
        let grid = Grid::new(obs.dim(), n)?;
        if amplitudes.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes for d={}, n={}, got {}",
                grid.len(),
                obs.dim(),
                n,
                amplitudes.len()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > tol {
            return Err(Error::InvariantViolation(format!(
                "state norm² = {norm_sqr}, expected 1 within {tol}"
            )));
        }
        Ok(Self { obs, n, amplitudes })
    }

    /// Normalizes an arbitrary nonzero amplitude vector.
    pub fn from_unnormalized(
        obs: LocalObservable,
        n: usize,
        mut amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let grid = Grid::new(obs.dim(), n)?;
        if amplitudes.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes, got {}",
                grid.len(),
                amplitudes.len()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr <= 0.0 {
            return Err(Error::EmptyCoefficients);
        }
        let inv = 1.0 / norm_sqr.sqrt();
        for a in &mut amplitudes {
            *a *= inv;
        }
        Ok(Self { obs, n, amplitudes })
    }

    pub fn obs(&self) -> &LocalObservable {
        &self.obs
    }

    pub fn party_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.obs.dim(), self.n).expect("grid validated at construction")
    }

    /// `|amplitude|²` per grid point: the classical distribution the state
    /// induces on the spectral space.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Projector `|ψ⟩⟨ψ|` as a density state.
    pub fn to_density(&self) -> DensityState {
        let dim = self.amplitudes.len();
        let mut matrix = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                matrix[(r, c)] = self.amplitudes[r] * self.amplitudes[c].conj();
            }
        }
        DensityState {
            obs: self.obs.clone(),
            n: self.n,
            matrix,
        }
    }

    /// Tensor product with another state over the same local observable.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        if self.obs != other.obs {
            return Err(Error::DimensionMismatch(
                "tensor factors must share the local observable".into(),
            ));
        }
        let n = self.n + other.n;
        Grid::new(self.obs.dim(), n)?;
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ok(PureState {
            obs: self.obs.clone(),
            n,
            amplitudes,
        })
    }
}

/// A mixed n-partite state as a dense Hermitian matrix over the spectral grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    obs: LocalObservable,
    n: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityState {
    /// Validates Hermiticity, unit trace, and non-negative diagonal.
    ///
    /// Full positive semi-definiteness is established by [`eigensystem`],
    /// which reports eigenvalues below `-1e-10` as an invariant violation.
    pub fn new(obs: LocalObservable, n: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let grid = Grid::new(obs.dim(), n)?;
        let dim = grid.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm_err = hermiticity_error(&matrix);
        if herm_err > HERMITICITY_TOL {
            return Err(Error::NotHermitian(herm_err));
        }
        let trace: Complex64 = matrix.diagonal().iter().sum();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvariantViolation(format!(
                "trace = {trace}, expected 1 within {NORM_TOL}"
            )));
        }
        if let Some(p) = matrix.diagonal().iter().find(|p| p.re < -1e-10) {
            return Err(Error::InvariantViolation(format!(
                "negative diagonal probability {}",
                p.re
            )));
        }
        Ok(Self { obs, n, matrix })
    }

    pub fn obs(&self) -> &LocalObservable {
        &self.obs
    }

    pub fn party_count(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.obs.dim(), self.n).expect("grid validated at construction")
    }

    /// Diagonal of the matrix: the classical distribution on the grid.
    pub fn diagonal_probabilities(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|c| c.re).collect()
    }

    /// Rank at the given relative zero tolerance (via eigendecomposition).
    pub fn rank(&self, zero_tol: f64) -> Result<usize> {
        let es = eigensystem(self, zero_tol)?;
        Ok(es.zero_flags.iter().filter(|z| !**z).count())
    }
}

fn hermiticity_error(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            let err = (m[(r, c)] - m[(c, r)].conj()).norm();
            if err > worst {
                worst = err;
            }
        }
    }
    worst
}

/// A weighted list of pure states representing `ρ = Σ p_i |ψ_i⟩⟨ψ_i|`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, PureState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvariantViolation(format!(
                "ensemble weights sum to {total}, expected 1"
            )));
        }
        if members.iter().any(|(p, _)| *p <= 0.0) {
            return Err(Error::InvariantViolation(
                "ensemble weights must be positive".into(),
            ));
        }
        let (obs, n) = (members[0].1.obs().clone(), members[0].1.party_count());
        for (_, s) in &members {
            if s.obs() != &obs || s.party_count() != n {
                return Err(Error::DimensionMismatch(
                    "ensemble members must share observable and party count".into(),
                ));
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(f64, PureState)] {
        &self.members
    }

    pub fn to_density(&self) -> DensityState {
        let dim = self.members[0].1.amplitudes().len();
        let mut matrix: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
        for (p, state) in &self.members {
            let amps = state.amplitudes();
            for r in 0..dim {
                for c in 0..dim {
                    matrix[(r, c)] += Complex64::from(*p) * amps[r] * amps[c].conj();
                }
            }
        }
        DensityState {
            obs: self.members[0].1.obs().clone(),
            n: self.members[0].1.party_count(),
            matrix,
        }
    }
}

/// Eigendecomposition of a density matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column `j` belonging to `eigenvalues[j]`.
    pub eigenvectors: DMatrix<Complex64>,
    /// `true` for eigenvalues below `zero_tol · max eigenvalue`.
    pub zero_flags: Vec<bool>,
}

impl EigenSystem {
    pub fn rank(&self) -> usize {
        self.zero_flags.iter().filter(|z| !**z).count()
    }
}

/// Hermitian eigendecomposition with descending eigenvalues; values below
/// `zero_tol` relative to the largest are reported but flagged as zero.
pub fn eigensystem(rho: &DensityState, zero_tol: f64) -> Result<EigenSystem> {
    let herm_err = hermiticity_error(&rho.matrix);
    if herm_err > HERMITICITY_TOL {
        return Err(Error::NotHermitian(herm_err));
    }
    let se = rho.matrix.clone().symmetric_eigen();
    let dim = rho.matrix.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    if let Some(neg) = eigenvalues.iter().find(|&&v| v < -1e-10) {
        return Err(Error::InvariantViolation(format!(
            "density matrix has negative eigenvalue {neg}"
        )));
    }
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (new_col, &old_col) in order.iter().enumerate() {
        eigenvectors.set_column(new_col, &se.eigenvectors.column(old_col));
    }
    let top = eigenvalues[0].max(0.0);
    let zero_flags = eigenvalues.iter().map(|&v| v <= zero_tol * top).collect();
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
        zero_flags,
    })
}

/// The equal superposition of the all-minimum and all-maximum grid points,
/// with a relative phase on the latter. For qubits this is the GHZ state.
pub fn ghz_like(obs: &LocalObservable, n: usize, phase: f64) -> Result<PureState> {
    let grid = Grid::new(obs.dim(), n)?;
    let mut amplitudes = vec![Complex64::ZERO; grid.len()];
    let inv = Complex64::from(1.0 / 2.0f64.sqrt());
    amplitudes[0] = inv; // all indices 0 = all λ_min
    amplitudes[grid.len() - 1] = inv * Complex64::from_polar(1.0, phase);
    Ok(PureState {
        obs: obs.clone(),
        n,
        amplitudes,
    })
}

/// A normalized state supported exactly on the points of a diagonal line,
/// with the given relative coefficients.
pub fn line_state(
    obs: &LocalObservable,
    line: &DiagonalLine,
    coeffs: &[Complex64],
) -> Result<PureState> {
    if coeffs.is_empty() || coeffs.len() != line.points.len() {
        return Err(Error::EmptyCoefficients);
    }
    if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(Error::EmptyCoefficients);
    }
    let n = line.points[0].len();
    let grid = Grid::new(obs.dim(), n)?;
    let mut amplitudes = vec![Complex64::ZERO; grid.len()];
    for (point, &c) in line.points.iter().zip(coeffs) {
        amplitudes[grid.encode(point)] = c;
    }
    PureState::from_unnormalized(obs.clone(), n, amplitudes)
}

fn haar_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut v {
        *a /= norm;
    }
    v
}

/// A Haar-random unit vector on the full n-party space.
pub fn sample_haar(obs: &LocalObservable, n: usize, seed: u64) -> Result<PureState> {
    let grid = Grid::new(obs.dim(), n)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let amplitudes = haar_vector(grid.len(), &mut rng);
    Ok(PureState {
        obs: obs.clone(),
        n,
        amplitudes,
    })
}

/// A product of n independent single-party Haar-random states.
pub fn sample_product(obs: &LocalObservable, n: usize, seed: u64) -> Result<PureState> {
    Grid::new(obs.dim(), n)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut state: Option<PureState> = None;
    for _ in 0..n {
        let factor = PureState {
            obs: obs.clone(),
            n: 1,
            amplitudes: haar_vector(obs.dim(), &mut rng),
        };
        state = Some(match state {
            None => factor,
            Some(s) => s.tensor(&factor)?,
        });
    }
    Ok(state.expect("n >= 1"))
}

/// Counts ordered compositions of `n` with parts in `[1, k]`.
fn composition_counts(n: usize, k: usize) -> Vec<u128> {
    let mut counts = vec![0u128; n + 1];
    counts[0] = 1;
    for total in 1..=n {
        for part in 1..=k.min(total) {
            counts[total] += counts[total - part];
        }
    }
    counts
}

/// A uniformly random ordered composition of `n` into parts of size at most
/// `k`, every valid composition equally likely.
fn sample_composition<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let counts = composition_counts(n, k);
    let mut parts = Vec::new();
    let mut rest = n;
    while rest > 0 {
        let total = counts[rest];
        let mut ticket = (rng.random::<f64>() * total as f64) as u128;
        if ticket >= total {
            ticket = total - 1;
        }
        let mut part = 0;
        for candidate in 1..=k.min(rest) {
            let weight = counts[rest - candidate];
            if ticket < weight {
                part = candidate;
                break;
            }
            ticket -= weight;
        }
        debug_assert!(part > 0);
        parts.push(part);
        rest -= part;
    }
    parts
}

/// A random k-separable pure state: a uniformly drawn ordered composition of
/// `n` into blocks of size at most `k`, with an independent Haar-random state
/// per block, tensored in party order. Also returns the composition drawn.
pub fn sample_k_separable(
    obs: &LocalObservable,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<(PureState, Vec<usize>)> {
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    Grid::new(obs.dim(), n)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let parts = sample_composition(n, k, &mut rng);
    let mut state: Option<PureState> = None;
    for &part in &parts {
        let block_grid = Grid::new(obs.dim(), part)?;
        let factor = PureState {
            obs: obs.clone(),
            n: part,
            amplitudes: haar_vector(block_grid.len(), &mut rng),
        };
        state = Some(match state {
            None => factor,
            Some(s) => s.tensor(&factor)?,
        });
    }
    Ok((state.expect("composition nonempty"), parts))
}

/// Kind selector for [`sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Haar,
    Product,
    KSeparable { k: usize },
}

/// Unified sampler dispatching on [`SampleKind`].
pub fn sample(kind: SampleKind, obs: &LocalObservable, n: usize, seed: u64) -> Result<PureState> {
    match kind {
        SampleKind::Haar => sample_haar(obs, n, seed),
        SampleKind::Product => sample_product(obs, n, seed),
        SampleKind::KSeparable { k } => Ok(sample_k_separable(obs, n, k, seed)?.0),
    }
}

/// GHZ state mixed with white noise: `(1-ε)|GHZ⟩⟨GHZ| + ε·I/2ⁿ` on qubits.
pub fn depolarized_ghz(n: usize, eps: f64) -> Result<DensityState> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let obs = LocalObservable::qubit();
    let ghz = ghz_like(&obs, n, 0.0)?;
    let mut rho = ghz.to_density();
    let dim = rho.matrix.nrows();
    let mixed_weight = eps / dim as f64;
    rho.matrix *= Complex64::from(1.0 - eps);
    for i in 0..dim {
        rho.matrix[(i, i)] += Complex64::from(mixed_weight);
    }
    Ok(rho)
}

/// GHZ state mixed with its half-flipped partner: for even `n`,
/// `(1-ε)|ψ⟩⟨ψ| + ε|φ⟩⟨φ|` where `|φ⟩` flips the last `n/2` qubits of each
/// GHZ branch. The partner has zero collective variance.
pub fn ghz_mix(n: usize, eps: f64) -> Result<DensityState> {
    if n % 2 != 0 {
        return Err(Error::OddN(n));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let obs = LocalObservable::qubit();
    let grid = Grid::new(2, n)?;
    let ghz = ghz_like(&obs, n, 0.0)?;

    // |φ⟩ = (|0…01…1⟩ + |1…10…0⟩)/√2 in index form
    let half = n / 2;
    let mut lo = MultiIndexBuf::zeros(n);
    let mut hi = MultiIndexBuf::zeros(n);
    for p in 0..n {
        lo.digits[p] = if p < half { 0 } else { 1 };
        hi.digits[p] = if p < half { 1 } else { 0 };
    }
    let mut partner_amps = vec![Complex64::ZERO; grid.len()];
    let inv = Complex64::from(1.0 / 2.0f64.sqrt());
    partner_amps[lo.encode(grid)] = inv;
    partner_amps[hi.encode(grid)] = inv;
    let partner = PureState {
        obs: obs.clone(),
        n,
        amplitudes: partner_amps,
    };

    let mut rho = ghz.to_density();
    rho.matrix *= Complex64::from(1.0 - eps);
    let partner_rho = partner.to_density();
    rho.matrix += partner_rho.matrix * Complex64::from(eps);
    Ok(rho)
}

struct MultiIndexBuf {
    digits: Vec<usize>,
}

impl MultiIndexBuf {
    fn zeros(n: usize) -> Self {
        Self {
            digits: vec![0; n],
        }
    }

    fn encode(&self, grid: Grid) -> usize {
        self.digits.iter().fold(0, |acc, &i| acc * grid.dim() + i)
    }
}

/// A two-party Gaussian wave packet on an evenly spaced grid, with separate
/// widths along the sum and difference directions, centered on the grid mean.
pub fn gaussian_grid_state(
    obs: &LocalObservable,
    sum_width: f64,
    diff_width: f64,
) -> Result<PureState> {
    if sum_width <= 0.0 || diff_width <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "widths must be positive, got sum={sum_width}, diff={diff_width}"
        )));
    }
    if !obs.is_evenly_spaced() {
        return Err(Error::InvalidParams(
            "gaussian grid states require an evenly spaced spectrum".into(),
        ));
    }
    let grid = Grid::new(obs.dim(), 2)?;
    let spectrum = obs.spectrum();
    let mean = spectrum.iter().sum::<f64>() / spectrum.len() as f64;
    let mut amplitudes = vec![Complex64::ZERO; grid.len()];
    grid.for_each_point(|flat, digits| {
        let x = spectrum[digits[0]] - mean;
        let y = spectrum[digits[1]] - mean;
        let sum = x + y;
        let diff = x - y;
        let log_amp = -sum * sum / (4.0 * sum_width * sum_width)
            - diff * diff / (4.0 * diff_width * diff_width);
        amplitudes[flat] = Complex64::from(log_amp.exp());
    });
    PureState::from_unnormalized(obs.clone(), 2, amplitudes)
}
