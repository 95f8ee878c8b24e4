//! Collective diagonal operators and the orthogonal frame they live in.
//!
//! Every operator in scope is diagonal in the spectral basis, so it is stored
//! as its weight table `w(λ⃗) = Σ_i c_i λ_i` over the grid rather than as a
//! `dⁿ × dⁿ` matrix. Matrix elements between arbitrary states then reduce to
//! weighted inner products.

use num_complex::Complex64;

use crate::error::Error;
use crate::spectral::{Grid, LocalObservable};
use crate::states::PureState;
use crate::Result;

/// Per-party signs `c_i = ±1` for the collective operator `Σ c_i H_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignVector {
    signs: Vec<f64>,
}

impl SignVector {
    pub fn new(signs: Vec<f64>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if let Some(bad) = signs.iter().find(|s| s.abs() != 1.0) {
            return Err(Error::InvalidParams(format!(
                "sign entries must be +1 or -1, got {bad}"
            )));
        }
        Ok(Self { signs })
    }

    /// All-plus signs: the plain sum `H_1 + … + H_n`.
    pub fn uniform(n: usize) -> Self {
        Self {
            signs: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.signs
    }
}

/// A diagonal collective operator `Σ_i c_i H_i` with its weight table
/// materialized over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveOperator {
    obs: LocalObservable,
    n: usize,
    coeffs: Vec<f64>,
    weights: Vec<f64>,
}

impl CollectiveOperator {
    /// Materializes the weight table `w(λ⃗) = Σ_i coeffs_i · λ_i`.
    pub fn new(obs: &LocalObservable, n: usize, coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} coefficients, got {}",
                coeffs.len()
            )));
        }
        let grid = Grid::new(obs.dim(), n)?;
        let spectrum = obs.spectrum();
        let mut weights = vec![0.0; grid.len()];
        grid.for_each_point(|flat, digits| {
            weights[flat] = digits
                .iter()
                .zip(coeffs)
                .map(|(&idx, &c)| c * spectrum[idx])
                .sum();
        });
        Ok(Self {
            obs: obs.clone(),
            n,
            coeffs: coeffs.to_vec(),
            weights,
        })
    }

    /// The signed collective operator `Σ c_i H_i` for `c_i = ±1`.
    pub fn collective(obs: &LocalObservable, signs: &SignVector) -> Result<Self> {
        Self::new(obs, signs.len(), signs.as_slice())
    }

    /// The local operator `H_i` embedded in the n-party system.
    pub fn local(obs: &LocalObservable, n: usize, party: usize) -> Result<Self> {
        assert!(party < n, "party index out of range");
        let mut coeffs = vec![0.0; n];
        coeffs[party] = 1.0;
        Self::new(obs, n, &coeffs)
    }

    /// The frame operator built from row `row` of an orthogonal frame.
    pub fn from_frame_row(obs: &LocalObservable, frame: &OrthoFrame, row: usize) -> Result<Self> {
        Self::new(obs, frame.size(), frame.row(row))
    }

    pub fn obs(&self) -> &LocalObservable {
        &self.obs
    }

    pub fn party_count(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.obs.dim(), self.n).expect("validated at construction")
    }
}

/// Builds a collective operator; free-function spelling of
/// [`CollectiveOperator::new`].
pub fn collective_operator(
    obs: &LocalObservable,
    n: usize,
    coeffs: &[f64],
) -> Result<CollectiveOperator> {
    CollectiveOperator::new(obs, n, coeffs)
}

/// An n×n real orthogonal matrix whose first row is the uniform direction
/// `(1, …, 1)/√n`.
///
/// Rows 2…n complete the frame; the thickness ratio depends on this choice,
/// so a deterministic completion is pinned (see [`helmert_frame`]).
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoFrame {
    rows: Vec<Vec<f64>>,
}

impl OrthoFrame {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// The Helmert frame: row 1 is `(1, …, 1)/√n`; row j (j ≥ 2) is
/// `(1, …, 1, -(j-1), 0, …, 0)/√(j(j-1))` with `j-1` leading ones.
pub fn helmert_frame(n: usize) -> OrthoFrame {
    assert!(n >= 1, "frame needs at least one party");
    let mut rows = Vec::with_capacity(n);
    rows.push(vec![1.0 / (n as f64).sqrt(); n]);
    for j in 2..=n {
        let norm = ((j * (j - 1)) as f64).sqrt();
        let mut row = vec![0.0; n];
        for entry in row.iter_mut().take(j - 1) {
            *entry = 1.0 / norm;
        }
        row[j - 1] = -((j - 1) as f64) / norm;
        rows.push(row);
    }
    OrthoFrame { rows }
}

/// `⟨bra| Ô |ket⟩ = Σ_λ⃗ w(λ⃗) · conj(bra_λ⃗) · ket_λ⃗` for a diagonal operator.
pub fn matrix_element(
    op: &CollectiveOperator,
    bra: &PureState,
    ket: &PureState,
) -> Result<Complex64> {
    if bra.obs() != op.obs()
        || ket.obs() != op.obs()
        || bra.party_count() != op.party_count()
        || ket.party_count() != op.party_count()
    {
        return Err(Error::DimensionMismatch(
            "operator and states must share observable and party count".into(),
        ));
    }
    let mut acc = Complex64::ZERO;
    for ((w, b), k) in op
        .weights()
        .iter()
        .zip(bra.amplitudes())
        .zip(ket.amplitudes())
    {
        acc += Complex64::from(*w) * b.conj() * k;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::ghz_like;
    use approx::assert_relative_eq;

    #[test]
    fn weight_tables() {
        let obs = LocalObservable::qubit();
        // spectrum order (-1, 1): indices (00, 01, 10, 11)
        let sum = CollectiveOperator::new(&obs, 2, &[1.0, 1.0]).unwrap();
        assert_eq!(sum.weights(), &[-2.0, 0.0, 0.0, 2.0]);

        let diff = CollectiveOperator::new(&obs, 2, &[1.0, -1.0]).unwrap();
        assert_eq!(diff.weights(), &[0.0, -2.0, 2.0, 0.0]);

        // coeffs (1/√2, 1/√2) equal the first Helmert row for n=2
        let inv = 1.0 / 2.0f64.sqrt();
        let p1 = CollectiveOperator::new(&obs, 2, &[inv, inv]).unwrap();
        let frame = helmert_frame(2);
        let p1_frame = CollectiveOperator::from_frame_row(&obs, &frame, 0).unwrap();
        for (a, b) in p1.weights().iter().zip(p1_frame.weights()) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn helmert_rows() {
        let f = helmert_frame(2);
        let inv = 1.0 / 2.0f64.sqrt();
        assert_eq!(f.row(0), &[inv, inv]);
        assert_eq!(f.row(1), &[inv, -inv]);

        let f = helmert_frame(3);
        assert_relative_eq!(f.row(1)[0], inv, epsilon = 1e-15);
        assert_relative_eq!(f.row(1)[1], -inv, epsilon = 1e-15);
        assert_eq!(f.row(1)[2], 0.0);

        let f = helmert_frame(1);
        assert_eq!(f.row(0), &[1.0]);
    }

    #[test]
    fn helmert_is_orthogonal_with_uniform_first_row() {
        for n in 1..=8 {
            let f = helmert_frame(n);
            let expected = 1.0 / (n as f64).sqrt();
            for &e in f.row(0) {
                assert_eq!(e, expected, "first row must be exactly 1/sqrt(n)");
            }
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = f.row(i).iter().zip(f.row(j)).map(|(a, b)| a * b).sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (dot - target).abs() < 1e-12,
                        "frame row product ({i},{j}) = {dot}"
                    );
                }
            }
        }
    }

    #[test]
    fn frame_inversion_reconstructs_locals() {
        let obs = crate::spectral::make_local_observable(&[-1.0, 0.0, 2.0]).unwrap();
        let n = 3;
        let frame = helmert_frame(n);
        let p_ops: Vec<CollectiveOperator> = (0..n)
            .map(|i| CollectiveOperator::from_frame_row(&obs, &frame, i).unwrap())
            .collect();
        for j in 0..n {
            let local = CollectiveOperator::local(&obs, n, j).unwrap();
            let mut rebuilt = vec![0.0; local.weights().len()];
            for (i, p) in p_ops.iter().enumerate() {
                let alpha = frame.row(i)[j];
                for (acc, w) in rebuilt.iter_mut().zip(p.weights()) {
                    *acc += alpha * w;
                }
            }
            for (a, b) in rebuilt.iter().zip(local.weights()) {
                assert!((a - b).abs() < 1e-12, "frame inversion mismatch");
            }
        }
    }

    #[test]
    fn matrix_elements_on_superposition_basis() {
        // Basis states (|s⟩ + σ·i·|s̄⟩)/√2 built with bit 0 ↦ λ_max so that the
        // all-zero word has collective weight +n.
        let obs = LocalObservable::qubit();
        let n = 2;
        let grid = Grid::new(2, n).unwrap();
        let build = |bits: &[usize], sigma: f64| -> PureState {
            let flipped: Vec<usize> = bits.iter().map(|b| 1 - b).collect();
            // bit 0 ↦ index 1 (λ=+1), bit 1 ↦ index 0 (λ=-1)
            let to_flat = |word: &[usize]| {
                word.iter().fold(0usize, |acc, &b| acc * 2 + (1 - b))
            };
            let mut amps = vec![Complex64::ZERO; grid.len()];
            let inv = 1.0 / 2.0f64.sqrt();
            amps[to_flat(bits)] = Complex64::new(inv, 0.0);
            amps[to_flat(&flipped)] = Complex64::new(0.0, sigma * inv);
            PureState::new(obs.clone(), n, amps).unwrap()
        };
        let psi_plus = build(&[0, 0], 1.0);
        let psi_minus = build(&[0, 0], -1.0);
        let coll = CollectiveOperator::collective(&obs, &SignVector::uniform(n)).unwrap();

        let cross = matrix_element(&coll, &psi_plus, &psi_minus).unwrap();
        assert_relative_eq!(cross.re, 2.0, epsilon = 1e-12);
        assert!(cross.im.abs() < 1e-12);

        let diag = matrix_element(&coll, &psi_plus, &psi_plus).unwrap();
        assert!(diag.norm() < 1e-12);
    }

    #[test]
    fn matrix_element_diagonal_action_on_product_eigenstate() {
        let obs = crate::spectral::make_local_observable(&[0.0, 1.0, 2.0]).unwrap();
        let grid = Grid::new(3, 2).unwrap();
        let mut amps = vec![Complex64::ZERO; grid.len()];
        let point = crate::spectral::MultiIndex(vec![2, 1]);
        amps[grid.encode(&point)] = Complex64::ONE;
        let state = PureState::new(obs.clone(), 2, amps).unwrap();
        let op = CollectiveOperator::new(&obs, 2, &[1.0, 1.0]).unwrap();
        let elem = matrix_element(&op, &state, &state).unwrap();
        assert_relative_eq!(elem.re, 3.0, epsilon = 1e-15);
    }

    #[test]
    fn sign_vector_validation() {
        assert!(SignVector::new(vec![1.0, -1.0]).is_ok());
        assert!(SignVector::new(vec![1.0, 0.5]).is_err());
        assert!(SignVector::new(vec![]).is_err());
        let ghz = ghz_like(&LocalObservable::qubit(), 2, 0.0).unwrap();
        assert_eq!(ghz.party_count(), SignVector::uniform(2).len());
    }
}
