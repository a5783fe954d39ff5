//! Adjointable operators `A^m → A^n`, θ-operators, truncations and generator rules.
//!
//! An operator with `A`-valued entries `F_{ij}` is stored per algebra block `b` as the
//! `(n·n_b) × (m·n_b)` complex matrix whose `(i, j)` sub-block is `(F_{ij})_b`. Action,
//! composition and adjoints are then ordinary matrix operations, and the operator norm
//! is the largest singular value over blocks.

mod generator;
mod theta;

pub use generator::{Band, GeneratorRule, OperatorGenerator, ScalarSequence, ThetaPair};
pub use theta::{
    split_by_projection, theta, theta_decomposition, theta_decomposition_relative, truncation_pair,
    ThetaSum,
};

use serde::{Deserialize, Serialize};

use crate::algebra::{spectral_norm, AlgebraElement, CStarAlgebra};
use crate::hilbert::ModuleElement;
use crate::{CMatrix, Error, Result, C64};

/// An adjointable operator `A^m → A^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorPayload", try_from = "OperatorPayload")]
pub struct ModuleOperator {
    source_len: usize,
    target_len: usize,
    blocks: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct OperatorPayload {
    source_len: usize,
    target_len: usize,
    entries: Vec<Vec<AlgebraElement>>,
}

impl From<ModuleOperator> for OperatorPayload {
    fn from(f: ModuleOperator) -> Self {
        OperatorPayload {
            source_len: f.source_len,
            target_len: f.target_len,
            entries: (0..f.target_len)
                .map(|i| (0..f.source_len).map(|j| f.entry(i, j)).collect())
                .collect(),
        }
    }
}

impl TryFrom<OperatorPayload> for ModuleOperator {
    type Error = Error;

    fn try_from(p: OperatorPayload) -> Result<Self> {
        if p.entries.len() != p.target_len || p.entries.iter().any(|row| row.len() != p.source_len)
        {
            return Err(Error::invalid(format!(
                "entry grid must be {}×{}",
                p.target_len, p.source_len
            )));
        }
        ModuleOperator::from_entries(p.entries)
    }
}

impl ModuleOperator {
    pub fn zero(algebra: &CStarAlgebra, target_len: usize, source_len: usize) -> Self {
        Self {
            source_len,
            target_len,
            blocks: algebra
                .block_dims()
                .iter()
                .map(|&n| CMatrix::zeros(target_len * n, source_len * n))
                .collect(),
        }
    }

    pub fn identity(algebra: &CStarAlgebra, len: usize) -> Self {
        Self {
            source_len: len,
            target_len: len,
            blocks: algebra
                .block_dims()
                .iter()
                .map(|&n| CMatrix::identity(len * n, len * n))
                .collect(),
        }
    }

    /// `diag(c_1, …, c_n)` acting by `x_i ↦ c_i x_i`.
    pub fn diagonal(coefficients: &[AlgebraElement]) -> Result<Self> {
        let first = coefficients
            .first()
            .ok_or_else(|| Error::invalid("diagonal operator needs at least one coefficient"))?;
        let algebra = first.algebra();
        if coefficients.iter().any(|c| !c.same_algebra(first)) {
            return Err(Error::structural("coefficients from different algebras"));
        }
        let len = coefficients.len();
        let mut f = Self::zero(&algebra, len, len);
        for (i, c) in coefficients.iter().enumerate() {
            f.set_entry(i, i, c);
        }
        Ok(f)
    }

    /// Builds an operator from an `n × m` grid of algebra elements.
    pub fn from_entries(entries: Vec<Vec<AlgebraElement>>) -> Result<Self> {
        let first = entries
            .first()
            .and_then(|row| row.first())
            .ok_or_else(|| Error::invalid("operator needs at least one entry"))?
            .clone();
        let source_len = entries[0].len();
        if entries.iter().any(|row| row.len() != source_len) {
            return Err(Error::invalid("ragged entry grid"));
        }
        if entries.iter().flatten().any(|e| !e.same_algebra(&first)) {
            return Err(Error::structural("entries from different algebras"));
        }
        let mut f = Self::zero(&first.algebra(), entries.len(), source_len);
        for (i, row) in entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                f.set_entry(i, j, e);
            }
        }
        Ok(f)
    }

    pub(crate) fn from_blocks_unchecked(
        target_len: usize,
        source_len: usize,
        blocks: Vec<CMatrix>,
    ) -> Self {
        Self {
            source_len,
            target_len,
            blocks,
        }
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| {
                if self.source_len > 0 {
                    b.ncols() / self.source_len
                } else {
                    0
                }
            })
            .collect()
    }

    pub fn algebra(&self) -> CStarAlgebra {
        CStarAlgebra::new(self.block_dims()).expect("operator over a valid algebra")
    }

    pub fn entry(&self, i: usize, j: usize) -> AlgebraElement {
        AlgebraElement::from_blocks_unchecked(
            self.blocks
                .iter()
                .zip(self.block_dims())
                .map(|(m, n)| m.view((i * n, j * n), (n, n)).into_owned())
                .collect(),
        )
    }

    fn set_entry(&mut self, i: usize, j: usize, e: &AlgebraElement) {
        let dims = self.block_dims();
        for (b, m) in self.blocks.iter_mut().enumerate() {
            let n = dims[b];
            m.view_mut((i * n, j * n), (n, n)).copy_from(e.block(b));
        }
    }

    fn ensure_same_shape(&self, other: &ModuleOperator) -> Result<()> {
        if self.source_len == other.source_len
            && self.target_len == other.target_len
            && self.block_dims() == other.block_dims()
        {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "operators A^{}→A^{} and A^{}→A^{} differ in shape",
                self.source_len, self.target_len, other.source_len, other.target_len
            )))
        }
    }

    pub fn apply(&self, x: &ModuleElement) -> Result<ModuleElement> {
        if x.len() != self.source_len || x.block_dims() != self.block_dims() {
            return Err(Error::structural(format!(
                "operator on A^{} applied to element of A^{}",
                self.source_len,
                x.len()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ModuleElement) -> ModuleElement {
        ModuleElement::from_blocks_unchecked(
            self.target_len,
            self.blocks
                .iter()
                .zip(x.blocks())
                .map(|(f, xb)| f * xb)
                .collect(),
        )
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ModuleOperator) -> Result<Self> {
        if self.source_len != other.target_len || self.block_dims() != other.block_dims() {
            return Err(Error::structural(format!(
                "cannot compose A^{}→A^{} after A^{}→A^{}",
                self.source_len, self.target_len, other.source_len, other.target_len
            )));
        }
        Ok(Self {
            source_len: other.source_len,
            target_len: self.target_len,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(f, g)| f * g)
                .collect(),
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            source_len: self.target_len,
            target_len: self.source_len,
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn add(&self, other: &ModuleOperator) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &ModuleOperator) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
            ..self.clone()
        }
    }

    /// Largest singular value over the assembled complex block matrices.
    pub fn op_norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &ModuleOperator) -> f64 {
        if self.ensure_same_shape(other).is_err() {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// The operator `x ↦ (Fx)_i` into `A¹ = A` given by row `i`.
    pub fn row(&self, i: usize) -> Result<Self> {
        self.rows(i, 1)
    }

    /// Rows `start..start+count`, as an operator into `A^count`.
    pub fn rows(&self, start: usize, count: usize) -> Result<Self> {
        if count == 0 || start + count > self.target_len {
            return Err(Error::domain(format!(
                "rows {start}..{} outside target A^{}",
                start + count,
                self.target_len
            )));
        }
        Ok(Self {
            source_len: self.source_len,
            target_len: count,
            blocks: self
                .blocks
                .iter()
                .zip(self.block_dims())
                .map(|(m, n)| m.rows(start * n, count * n).into_owned())
                .collect(),
        })
    }

    /// The leading `target × source` corner.
    pub fn corner(&self, target: usize, source: usize) -> Result<Self> {
        if target == 0 || source == 0 || target > self.target_len || source > self.source_len {
            return Err(Error::domain(format!(
                "corner {target}×{source} outside {}×{}",
                self.target_len, self.source_len
            )));
        }
        Ok(Self {
            source_len: source,
            target_len: target,
            blocks: self
                .blocks
                .iter()
                .zip(self.block_dims())
                .map(|(m, n)| m.view((0, 0), (target * n, source * n)).into_owned())
                .collect(),
        })
    }
}

/// The projection `Q_D` onto the first `d` coordinates of `A^len`.
pub fn truncation(algebra: &CStarAlgebra, d: usize, len: usize) -> Result<ModuleOperator> {
    if d == 0 || d > len {
        return Err(Error::domain(format!("truncation Q_{d} outside 1..={len}")));
    }
    coordinate_range_projection(algebra, 0, d, len)
}

/// `q_i = Q_i − Q_{i−1}`, the projection onto coordinate `i` (0-based).
pub fn coordinate_projection(
    algebra: &CStarAlgebra,
    i: usize,
    len: usize,
) -> Result<ModuleOperator> {
    if i >= len {
        return Err(Error::domain(format!("coordinate {i} outside A^{len}")));
    }
    coordinate_range_projection(algebra, i, i + 1, len)
}

fn coordinate_range_projection(
    algebra: &CStarAlgebra,
    start: usize,
    end: usize,
    len: usize,
) -> Result<ModuleOperator> {
    let mut coefficients = vec![algebra.zero(); len];
    for c in &mut coefficients[start..end] {
        *c = algebra.unit();
    }
    ModuleOperator::diagonal(&coefficients)
}

/// `κ_D = ‖F − Q_D F‖`, the norm of the rows below `D`.
pub fn tail_norm(f: &ModuleOperator, d: usize) -> Result<f64> {
    if d > f.target_len() {
        return Err(Error::domain(format!(
            "tail beyond target length {}",
            f.target_len()
        )));
    }
    if d == f.target_len() {
        return Ok(0.0);
    }
    Ok(f.rows(d, f.target_len() - d)?.op_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2c() -> CStarAlgebra {
        CStarAlgebra::new(vec![2, 1]).unwrap()
    }

    fn sample_operator(a: &CStarAlgebra) -> ModuleOperator {
        let e = |s: f64| {
            a.diagonal(&[vec![s, 1.0 - s], vec![0.5 * s]])
                .unwrap()
                .scale(C64::new(0.7, s))
        };
        ModuleOperator::from_entries(vec![
            vec![e(1.0), e(-0.3)],
            vec![e(0.2), e(2.0)],
            vec![a.zero(), e(0.9)],
        ])
        .unwrap()
    }

    #[test]
    fn identity_and_double_adjoint() {
        let a = m2c();
        let f = sample_operator(&a);
        let id = ModuleOperator::identity(&a, 3);
        assert!(id.compose(&f).unwrap().max_abs_diff(&f) == 0.0);
        assert_eq!(f.adjoint().adjoint(), f);
        assert!((id.op_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_norm_is_largest_coefficient() {
        let a = m2c();
        let lambdas = [0.5, -3.0, 1.25];
        let f = ModuleOperator::diagonal(
            &lambdas
                .iter()
                .map(|&l| a.unit().scale_real(l))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert!((f.op_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn payload_round_trip() {
        let a = m2c();
        let f = sample_operator(&a);
        let json = serde_json::to_string(&f).unwrap();
        let back: ModuleOperator = serde_json::from_str(&json).unwrap();
        assert!(back.max_abs_diff(&f) == 0.0);
        assert_eq!(back.source_len(), 2);
        assert_eq!(back.target_len(), 3);
    }

    #[test]
    fn truncations_compose_to_the_smaller_one() {
        let a = m2c();
        let q2 = truncation(&a, 2, 4).unwrap();
        let q3 = truncation(&a, 3, 4).unwrap();
        assert_eq!(q2.compose(&q3).unwrap(), q2);
        assert_eq!(q2.compose(&q2).unwrap(), q2);
        assert_eq!(q2.adjoint(), q2);
        assert_eq!(
            truncation(&a, 4, 4).unwrap(),
            ModuleOperator::identity(&a, 4)
        );
        let q = coordinate_projection(&a, 2, 4).unwrap();
        assert_eq!(q3.sub(&q2).unwrap(), q);
        assert!(truncation(&a, 0, 4).is_err());
        assert!(truncation(&a, 5, 4).is_err());
    }

    #[test]
    fn tail_norms_of_simple_operators() {
        let a = m2c();
        let id = ModuleOperator::identity(&a, 5);
        assert!((tail_norm(&id, 3).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(tail_norm(&id, 5).unwrap(), 0.0);
        let f = ModuleOperator::diagonal(
            &(1..=6)
                .map(|i| a.unit().scale_real(0.5f64.powi(i)))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        for d in 0..6 {
            assert!((tail_norm(&f, d).unwrap() - 0.5f64.powi(d as i32 + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_and_corner_shapes() {
        let a = m2c();
        let f = sample_operator(&a);
        let r = f.row(1).unwrap();
        assert_eq!(r.target_len(), 1);
        assert_eq!(r.entry(0, 1), f.entry(1, 1));
        let c = f.corner(2, 1).unwrap();
        assert_eq!(c.entry(1, 0), f.entry(1, 0));
        assert!(f.rows(2, 2).is_err());
    }

    #[test]
    fn shape_errors() {
        let a = m2c();
        let f = sample_operator(&a);
        assert!(matches!(f.compose(&f), Err(Error::Structural(_))));
        assert!(f.apply(&ModuleElement::zeros(&a, 3)).is_err());
    }
}
