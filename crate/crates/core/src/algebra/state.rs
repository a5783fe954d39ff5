use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::element::{hermitian_part, matrix_to_pairs, pairs_to_square};
use super::{AlgebraElement, CStarAlgebra};
use crate::{CMatrix, Error, Result, C64};

const WEIGHT_TOL: f64 = 1e-12;
const DENSITY_TOL: f64 = 1e-9;

/// A state `φ(a) = Σ_b w_b · tr(ρ_b a_b)` with convex weights and unit-trace density blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "StatePayload", try_from = "StatePayload")]
pub struct State {
    weights: Vec<f64>,
    densities: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct StatePayload {
    weights: Vec<f64>,
    densities: Vec<Vec<[f64; 2]>>,
}

impl From<State> for StatePayload {
    fn from(s: State) -> Self {
        StatePayload {
            weights: s.weights,
            densities: s.densities.iter().map(matrix_to_pairs).collect(),
        }
    }
}

impl TryFrom<StatePayload> for State {
    type Error = Error;

    fn try_from(p: StatePayload) -> Result<Self> {
        let densities = p
            .densities
            .iter()
            .map(|d| pairs_to_square(d))
            .collect::<Result<Vec<_>>>()?;
        State::new(p.weights, densities)
    }
}

impl State {
    pub fn new(weights: Vec<f64>, densities: Vec<CMatrix>) -> Result<Self> {
        let s = Self { weights, densities };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.weights.len() != self.densities.len() || self.weights.is_empty() {
            return Err(Error::invalid("state needs one weight per density block"));
        }
        if self
            .weights
            .iter()
            .any(|w| !w.is_finite() || *w < -WEIGHT_TOL)
        {
            return Err(Error::invalid("state weights must be non-negative"));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::invalid(format!(
                "state weights sum to {total}, not 1"
            )));
        }
        for (b, rho) in self.densities.iter().enumerate() {
            if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
                return Err(Error::invalid(format!("density {b} is not square")));
            }
            let d = AlgebraElement::from_blocks_unchecked(vec![rho.clone()]);
            if !d.is_positive(DENSITY_TOL) {
                return Err(Error::invalid(format!(
                    "density {b} is not positive semidefinite"
                )));
            }
            if (rho.trace() - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
                return Err(Error::invalid(format!(
                    "density {b} does not have unit trace"
                )));
            }
        }
        Ok(())
    }

    /// Normalized trace `a ↦ Σ_b tr(a_b) / Σ_b n_b`.
    pub fn tracial(algebra: &CStarAlgebra) -> Self {
        let total: usize = algebra.block_dims().iter().sum();
        Self {
            weights: algebra
                .block_dims()
                .iter()
                .map(|&n| n as f64 / total as f64)
                .collect(),
            densities: maximally_mixed(algebra),
        }
    }

    /// Vector state `a ↦ ⟨v, a_b v⟩ / ‖v‖²` supported on a single block.
    pub fn vector_state(
        algebra: &CStarAlgebra,
        block: usize,
        vector: &DVector<C64>,
    ) -> Result<Self> {
        let dims = algebra.block_dims();
        if block >= dims.len() || vector.len() != dims[block] {
            return Err(Error::structural("vector does not fit the chosen block"));
        }
        let norm = vector.norm();
        if norm == 0.0 {
            return Err(Error::domain("vector state needs a non-zero vector"));
        }
        let v = vector / C64::new(norm, 0.0);
        let mut weights = vec![0.0; dims.len()];
        weights[block] = 1.0;
        let mut densities = maximally_mixed(algebra);
        densities[block] = &v * v.adjoint();
        Ok(Self { weights, densities })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn densities(&self) -> &[CMatrix] {
        &self.densities
    }

    pub fn algebra(&self) -> CStarAlgebra {
        CStarAlgebra::new(self.densities.iter().map(|d| d.nrows()).collect())
            .expect("validated state has non-empty blocks")
    }

    pub fn matches(&self, a: &AlgebraElement) -> bool {
        self.densities.len() == a.blocks().len()
            && self
                .densities
                .iter()
                .zip(a.blocks())
                .all(|(d, b)| d.nrows() == b.nrows())
    }

    pub fn eval(&self, a: &AlgebraElement) -> Result<C64> {
        if !self.matches(a) {
            return Err(Error::structural(format!(
                "state over {:?} applied to element of {:?}",
                self.algebra().block_dims(),
                a.block_dims()
            )));
        }
        Ok(self.eval_blocks(a.blocks()))
    }

    /// `Σ_b w_b Σ_{ij} ρ_b[i,j] a_b[j,i]`, no shape checks.
    pub(crate) fn eval_blocks(&self, blocks: &[CMatrix]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for ((w, rho), a) in self.weights.iter().zip(&self.densities).zip(blocks) {
            if *w == 0.0 {
                continue;
            }
            let mut t = C64::new(0.0, 0.0);
            let n = rho.nrows();
            for i in 0..n {
                for j in 0..n {
                    t += rho[(i, j)] * a[(j, i)];
                }
            }
            acc += t * *w;
        }
        acc
    }
}

fn maximally_mixed(algebra: &CStarAlgebra) -> Vec<CMatrix> {
    algebra
        .block_dims()
        .iter()
        .map(|&n| CMatrix::from_diagonal_element(n, n, C64::new(1.0 / n as f64, 0.0)))
        .collect()
}

pub fn state_eval(phi: &State, a: &AlgebraElement) -> Result<C64> {
    phi.eval(a)
}

/// Vector state on an eigenvector of largest `|λ|` of a Hermitian element; `None` when it vanishes.
fn spectral_witness(h: &AlgebraElement) -> Option<State> {
    let mut best: Option<(f64, usize, DVector<C64>)> = None;
    for (b, block) in h.blocks().iter().enumerate() {
        let eig = SymmetricEigen::new(hermitian_part(block));
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if best.as_ref().is_none_or(|(m, _, _)| lambda.abs() > *m) {
                best = Some((lambda.abs(), b, eig.eigenvectors.column(k).into_owned()));
            }
        }
    }
    match best {
        Some((m, b, v)) if m > 0.0 => State::vector_state(&h.algebra(), b, &v).ok(),
        _ => None,
    }
}

/// A state with `‖a‖ ≤ 2|φ(a)|`.
///
/// Splits `a = h₁ + i·h₂` into Hermitian parts, takes a spectral vector state for each
/// and keeps whichever gives the larger `|φ(a)|`. For Hermitian `a` this is a vector
/// state on a top eigenvector, so `|φ(a)| = ‖a‖`.
pub fn witness_state(a: &AlgebraElement) -> Result<State> {
    if a.blocks()
        .iter()
        .all(|b| b.iter().all(|z| *z == C64::new(0.0, 0.0)))
    {
        return Err(Error::domain("the zero element has no separating state"));
    }
    let h1 = a.real_part();
    let h2 = a.sub(&a.adjoint())?.scale(C64::new(0.0, -0.5));
    let mut best: Option<(f64, State)> = None;
    for h in [&h1, &h2] {
        if let Some(phi) = spectral_witness(h) {
            let value = phi.eval_blocks(a.blocks()).norm();
            if best.as_ref().is_none_or(|(v, _)| value > *v) {
                best = Some((value, phi));
            }
        }
    }
    best.map(|(_, phi)| phi)
        .ok_or_else(|| Error::domain("no spectral witness found"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2c() -> CStarAlgebra {
        CStarAlgebra::new(vec![2, 1]).unwrap()
    }

    #[test]
    fn tracial_state_is_normalized() {
        let a = m2c();
        let tau = State::tracial(&a);
        assert!((tau.eval(&a.unit()).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(tau.eval(&a.zero()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_states() {
        let rho = CMatrix::from_diagonal_element(1, 1, C64::new(1.0, 0.0));
        assert!(State::new(vec![0.5], vec![rho.clone()]).is_err());
        assert!(State::new(vec![1.0], vec![rho.clone() * C64::new(2.0, 0.0)]).is_err());
        let neg = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-0.5, 0.0),
            ],
        );
        assert!(State::new(vec![1.0], vec![neg]).is_err());
        assert!(State::new(vec![1.0], vec![rho]).is_ok());
    }

    #[test]
    fn witness_of_diagonal_hermitian_element() {
        let a = m2c();
        let x = a.diagonal(&[vec![5.0, -1.0], vec![0.0]]).unwrap();
        let phi = witness_state(&x).unwrap();
        assert!((phi.eval(&x).unwrap().norm() - 5.0).abs() < 1e-9);
        assert_eq!(phi.weights(), &[1.0, 0.0]);
        assert!((phi.densities()[0][(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn witness_of_unit_and_zero() {
        let a = m2c();
        let phi = witness_state(&a.unit()).unwrap();
        assert!((phi.eval(&a.unit()).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(matches!(witness_state(&a.zero()), Err(Error::Domain(_))));
    }

    #[test]
    fn witness_of_nilpotent() {
        let a = CStarAlgebra::new(vec![2]).unwrap();
        let n = a
            .element(vec![CMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(0.0, 0.0),
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::new(0.0, 0.0),
                ],
            )])
            .unwrap();
        let phi = witness_state(&n).unwrap();
        assert!(2.0 * phi.eval(&n).unwrap().norm() >= n.norm() - 1e-9);
    }
}
