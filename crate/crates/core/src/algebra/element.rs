use nalgebra::{SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::{CMatrix, Error, Result, C64};

/// A finite-dimensional C*-algebra `⊕_b M_{n_b}(ℂ)`, identified by its block sizes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AlgebraPayload")]
pub struct CStarAlgebra {
    block_dims: Vec<usize>,
}

#[derive(Deserialize)]
struct AlgebraPayload {
    block_dims: Vec<usize>,
}

impl TryFrom<AlgebraPayload> for CStarAlgebra {
    type Error = Error;

    fn try_from(p: AlgebraPayload) -> Result<Self> {
        CStarAlgebra::new(p.block_dims)
    }
}

impl CStarAlgebra {
    pub fn new(block_dims: Vec<usize>) -> Result<Self> {
        if block_dims.is_empty() {
            return Err(Error::invalid("algebra needs at least one block"));
        }
        if block_dims.contains(&0) {
            return Err(Error::invalid("block dimensions must be positive"));
        }
        Ok(Self { block_dims })
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    /// Complex dimension `Σ n_b²`.
    pub fn dimension(&self) -> usize {
        self.block_dims.iter().map(|n| n * n).sum()
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            blocks: self
                .block_dims
                .iter()
                .map(|&n| CMatrix::zeros(n, n))
                .collect(),
        }
    }

    pub fn unit(&self) -> AlgebraElement {
        self.scalar(C64::new(1.0, 0.0))
    }

    pub fn scalar(&self, c: C64) -> AlgebraElement {
        AlgebraElement {
            blocks: self
                .block_dims
                .iter()
                .map(|&n| CMatrix::from_diagonal_element(n, n, c))
                .collect(),
        }
    }

    pub fn element(&self, blocks: Vec<CMatrix>) -> Result<AlgebraElement> {
        let e = AlgebraElement::from_blocks(blocks)?;
        if e.block_dims() != self.block_dims {
            return Err(Error::structural(format!(
                "blocks {:?} do not match algebra {:?}",
                e.block_dims(),
                self.block_dims
            )));
        }
        Ok(e)
    }

    /// Block-diagonal element with real diagonals, one vector per block.
    pub fn diagonal(&self, diagonals: &[Vec<f64>]) -> Result<AlgebraElement> {
        if diagonals.len() != self.num_blocks() {
            return Err(Error::structural("one diagonal per block expected"));
        }
        let blocks = diagonals
            .iter()
            .zip(&self.block_dims)
            .map(|(d, &n)| {
                if d.len() != n {
                    return Err(Error::structural(format!(
                        "diagonal of length {} for block of size {n}",
                        d.len()
                    )));
                }
                let mut m = CMatrix::zeros(n, n);
                for (i, &v) in d.iter().enumerate() {
                    m[(i, i)] = C64::new(v, 0.0);
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement { blocks })
    }
}

/// An element of a [`CStarAlgebra`]: one square complex matrix per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ElementPayload", try_from = "ElementPayload")]
pub struct AlgebraElement {
    blocks: Vec<CMatrix>,
}

/// Row-major `[re, im]` pairs per block.
#[derive(Serialize, Deserialize)]
pub(crate) struct ElementPayload {
    blocks: Vec<Vec<[f64; 2]>>,
}

impl From<AlgebraElement> for ElementPayload {
    fn from(e: AlgebraElement) -> Self {
        ElementPayload {
            blocks: e.blocks.iter().map(matrix_to_pairs).collect(),
        }
    }
}

impl TryFrom<ElementPayload> for AlgebraElement {
    type Error = Error;

    fn try_from(p: ElementPayload) -> Result<Self> {
        let blocks = p
            .blocks
            .iter()
            .map(|b| pairs_to_square(b))
            .collect::<Result<Vec<_>>>()?;
        AlgebraElement::from_blocks(blocks)
    }
}

pub(crate) fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub(crate) fn pairs_to_square(pairs: &[[f64; 2]]) -> Result<CMatrix> {
    let n = (pairs.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != pairs.len() {
        return Err(Error::invalid(format!(
            "block payload of length {} is not a non-empty square",
            pairs.len()
        )));
    }
    if pairs.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite matrix entry"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        let [re, im] = pairs[i * n + j];
        C64::new(re, im)
    }))
}

impl AlgebraElement {
    pub fn from_blocks(blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::invalid("element needs at least one block"));
        }
        for b in &blocks {
            if b.nrows() != b.ncols() || b.nrows() == 0 {
                return Err(Error::invalid(format!(
                    "block of shape {}x{} is not a non-empty square",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        Ok(Self { blocks })
    }

    pub(crate) fn from_blocks_unchecked(blocks: Vec<CMatrix>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &CMatrix {
        &self.blocks[b]
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn algebra(&self) -> CStarAlgebra {
        CStarAlgebra {
            block_dims: self.block_dims(),
        }
    }

    pub fn same_algebra(&self, other: &AlgebraElement) -> bool {
        self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.nrows() == b.nrows())
    }

    fn ensure_same(&self, other: &AlgebraElement) -> Result<()> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "elements of algebras {:?} and {:?}",
                self.block_dims(),
                other.block_dims()
            )))
        }
    }

    fn zip_with(
        &self,
        other: &AlgebraElement,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
    ) -> Result<Self> {
        self.ensure_same(other)?;
        Ok(Self {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &AlgebraElement) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &AlgebraElement) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Blockwise matrix product `self · other`.
    pub fn mul(&self, other: &AlgebraElement) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    pub fn scale_real(&self, t: f64) -> Self {
        self.scale(C64::new(t, 0.0))
    }

    /// C*-norm: the largest singular value over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(spectral_norm).fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference; `∞` for mismatched algebras.
    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        if !self.same_algebra(other) {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|a − a*|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                (b - b.adjoint())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// `½(a + a*)`.
    pub fn real_part(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(hermitian_part).collect(),
        }
    }

    /// Smallest eigenvalue of the Hermitian part over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                SymmetricEigen::new(hermitian_part(b))
                    .eigenvalues
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian within `tol` and every eigenvalue `≥ −tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.min_eigenvalue() >= -tol
    }

    /// Applies `f` to the spectrum of the Hermitian part, blockwise.
    pub fn hermitian_calculus(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    let eig = SymmetricEigen::new(hermitian_part(b));
                    let u = &eig.eigenvectors;
                    let mut scaled = u.clone();
                    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
                        scaled.column_mut(j).scale_mut(f(lambda));
                    }
                    &scaled * u.adjoint()
                })
                .collect(),
        }
    }

    fn require_positive(&self, what: &str) -> Result<()> {
        if self.is_positive(super::DEFAULT_POSITIVITY_TOL) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{what} needs a positive element (min eigenvalue {:.3e}, hermitian defect {:.3e})",
                self.min_eigenvalue(),
                self.hermitian_defect()
            )))
        }
    }

    /// Positive square root via spectral calculus; eigenvalues in `[−tol, 0)` are clamped.
    pub fn positive_sqrt(&self) -> Result<Self> {
        self.require_positive("square root")?;
        Ok(self.hermitian_calculus(|t| t.max(0.0).sqrt()))
    }

    /// `b = a(τ + a)^{-1}`, i.e. `t ↦ t/(τ+t)` on the spectrum of a positive `a`.
    pub fn resolvent_regularize(&self, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::domain(format!(
                "regularization needs τ > 0, got {tau}"
            )));
        }
        self.require_positive("resolvent regularization")?;
        Ok(self.hermitian_calculus(|t| {
            let t = t.max(0.0);
            t / (tau + t)
        }))
    }
}

pub(crate) fn hermitian_part(b: &CMatrix) -> CMatrix {
    (b + b.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Free-function form of [`AlgebraElement::add`].
pub fn alg_add(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.add(b)
}

pub fn alg_mul(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    a.mul(b)
}

pub fn alg_adjoint(a: &AlgebraElement) -> AlgebraElement {
    a.adjoint()
}

pub fn alg_norm(a: &AlgebraElement) -> f64 {
    a.norm()
}

pub fn is_positive(a: &AlgebraElement, tol: f64) -> bool {
    a.is_positive(tol)
}

pub fn positive_sqrt(a: &AlgebraElement) -> Result<AlgebraElement> {
    a.positive_sqrt()
}

pub fn resolvent_regularize(a: &AlgebraElement, tau: f64) -> Result<AlgebraElement> {
    a.resolvent_regularize(tau)
}
