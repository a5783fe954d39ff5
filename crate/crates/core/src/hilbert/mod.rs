//! Truncated standard modules `A^n`, their elements and the `A`-valued inner product.
//!
//! An element `x = (x_1, …, x_n)` is stored per algebra block `b` as the stacked
//! `(n·n_b) × n_b` complex matrix whose `i`-th row block is `(x_i)_b`. With this layout
//! `⟨x, y⟩_b = x_b* y_b` and the right action `x·a` is `x_b a_b`.

mod admissible;

pub use admissible::{
    chain_difference_system, check_admissible, AdmissibilityReport, AdmissibleSystem,
};

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, CStarAlgebra};
use crate::{CMatrix, Error, Result, C64};

/// Membership tolerance for constrained submodules.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// `A^n`, optionally cut down to the submodule `⊕_i p_i A` by a list of projections.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertModule {
    algebra: CStarAlgebra,
    length: usize,
    constraint: Option<Vec<AlgebraElement>>,
}

impl HilbertModule {
    pub fn new(algebra: CStarAlgebra, length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("module length must be positive"));
        }
        Ok(Self {
            algebra,
            length,
            constraint: None,
        })
    }

    /// The submodule `⊕_i p_i A ⊂ A^n`.
    pub fn constrained(algebra: CStarAlgebra, projections: Vec<AlgebraElement>) -> Result<Self> {
        if projections.is_empty() {
            return Err(Error::invalid("module length must be positive"));
        }
        for (i, p) in projections.iter().enumerate() {
            if p.block_dims() != algebra.block_dims() {
                return Err(Error::structural(format!(
                    "constraint {i} lives in another algebra"
                )));
            }
            if !p.is_hermitian(1e-12) || p.mul(p)?.max_abs_diff(p) > 1e-12 {
                return Err(Error::invalid(format!(
                    "constraint {i} is not an orthogonal projection"
                )));
            }
        }
        Ok(Self {
            algebra,
            length: projections.len(),
            constraint: Some(projections),
        })
    }

    pub fn algebra(&self) -> &CStarAlgebra {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn constraint(&self) -> Option<&[AlgebraElement]> {
        self.constraint.as_deref()
    }

    pub fn zero(&self) -> ModuleElement {
        ModuleElement::zeros(&self.algebra, self.length)
    }

    /// The basis element `e_i` (0-based), unit in coordinate `i`.
    pub fn basis(&self, i: usize) -> Result<ModuleElement> {
        if i >= self.length {
            return Err(Error::domain(format!(
                "basis index {i} outside A^{}",
                self.length
            )));
        }
        let mut x = self.zero();
        for (blk, &n) in x.blocks.iter_mut().zip(self.algebra.block_dims()) {
            for k in 0..n {
                blk[(i * n + k, k)] = C64::new(1.0, 0.0);
            }
        }
        Ok(x)
    }

    /// Shape check plus, for constrained modules, `p_i x_i = x_i` within [`MEMBERSHIP_TOL`].
    pub fn contains(&self, x: &ModuleElement) -> bool {
        if x.len() != self.length || x.block_dims() != self.algebra.block_dims() {
            return false;
        }
        match &self.constraint {
            None => true,
            Some(ps) => ps.iter().enumerate().all(|(i, p)| {
                p.mul(&x.entry(i))
                    .is_ok_and(|px| px.max_abs_diff(&x.entry(i)) <= MEMBERSHIP_TOL)
            }),
        }
    }

    pub fn element(&self, entries: Vec<AlgebraElement>) -> Result<ModuleElement> {
        let x = ModuleElement::from_entries(entries)?;
        if !self.contains(&x) {
            return Err(Error::structural("entries do not lie in this module"));
        }
        Ok(x)
    }

    /// Coordinatewise `p_i x_i`; identity on unconstrained modules.
    pub fn project(&self, x: &ModuleElement) -> Result<ModuleElement> {
        match &self.constraint {
            None => Ok(x.clone()),
            Some(ps) => x.left_mul_coordinates(ps),
        }
    }
}

/// An element of `A^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "ElementPayload", try_from = "ElementPayload")]
pub struct ModuleElement {
    length: usize,
    blocks: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ElementPayload {
    entries: Vec<AlgebraElement>,
}

impl From<ModuleElement> for ElementPayload {
    fn from(x: ModuleElement) -> Self {
        ElementPayload {
            entries: x.entries(),
        }
    }
}

impl TryFrom<ElementPayload> for ModuleElement {
    type Error = Error;

    fn try_from(p: ElementPayload) -> Result<Self> {
        ModuleElement::from_entries(p.entries)
    }
}

impl ModuleElement {
    pub fn zeros(algebra: &CStarAlgebra, length: usize) -> Self {
        Self {
            length,
            blocks: algebra
                .block_dims()
                .iter()
                .map(|&n| CMatrix::zeros(length * n, n))
                .collect(),
        }
    }

    pub fn from_entries(entries: Vec<AlgebraElement>) -> Result<Self> {
        let first = entries
            .first()
            .ok_or_else(|| Error::invalid("module element needs at least one entry"))?;
        let dims = first.block_dims();
        if entries.iter().any(|e| !e.same_algebra(first)) {
            return Err(Error::structural("entries from different algebras"));
        }
        let length = entries.len();
        let blocks = dims
            .iter()
            .enumerate()
            .map(|(b, &n)| {
                let mut m = CMatrix::zeros(length * n, n);
                for (i, e) in entries.iter().enumerate() {
                    m.view_mut((i * n, 0), (n, n)).copy_from(e.block(b));
                }
                m
            })
            .collect();
        Ok(Self { length, blocks })
    }

    pub(crate) fn from_blocks_unchecked(length: usize, blocks: Vec<CMatrix>) -> Self {
        Self { length, blocks }
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.ncols()).collect()
    }

    pub fn algebra(&self) -> CStarAlgebra {
        CStarAlgebra::new(self.block_dims()).expect("element blocks are non-empty")
    }

    pub fn same_module(&self, other: &ModuleElement) -> bool {
        self.length == other.length
            && self.blocks.len() == other.blocks.len()
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a.ncols() == b.ncols())
    }

    pub(crate) fn ensure_same(&self, other: &ModuleElement) -> Result<()> {
        if self.same_module(other) {
            Ok(())
        } else {
            Err(Error::structural(format!(
                "elements of A^{} over {:?} and A^{} over {:?}",
                self.length,
                self.block_dims(),
                other.length,
                other.block_dims()
            )))
        }
    }

    /// The `i`-th coordinate (0-based).
    pub fn entry(&self, i: usize) -> AlgebraElement {
        AlgebraElement::from_blocks_unchecked(
            self.blocks
                .iter()
                .map(|m| {
                    let n = m.ncols();
                    m.view((i * n, 0), (n, n)).into_owned()
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> Vec<AlgebraElement> {
        (0..self.length).map(|i| self.entry(i)).collect()
    }

    pub fn add(&self, other: &ModuleElement) -> Result<Self> {
        self.ensure_same(other)?;
        Ok(Self {
            length: self.length,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &ModuleElement) -> Result<Self> {
        self.ensure_same(other)?;
        Ok(Self {
            length: self.length,
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            length: self.length,
            blocks: self.blocks.iter().map(|b| b * c).collect(),
        }
    }

    pub fn scale_real(&self, t: f64) -> Self {
        self.scale(C64::new(t, 0.0))
    }

    /// Right module action `x·a`.
    pub fn right_mul(&self, a: &AlgebraElement) -> Result<Self> {
        if a.block_dims() != self.block_dims() {
            return Err(Error::structural("scalar from another algebra"));
        }
        Ok(Self {
            length: self.length,
            blocks: self
                .blocks
                .iter()
                .zip(a.blocks())
                .map(|(x, ab)| x * ab)
                .collect(),
        })
    }

    /// Coordinatewise left multiplication `(a_1 x_1, …, a_n x_n)`.
    pub fn left_mul_coordinates(&self, coefficients: &[AlgebraElement]) -> Result<Self> {
        if coefficients.len() != self.length {
            return Err(Error::structural("one coefficient per coordinate expected"));
        }
        let dims = self.block_dims();
        if coefficients.iter().any(|c| c.block_dims() != dims) {
            return Err(Error::structural("coefficient from another algebra"));
        }
        let mut out = self.clone();
        for (b, blk) in out.blocks.iter_mut().enumerate() {
            let n = dims[b];
            for (i, c) in coefficients.iter().enumerate() {
                let cur = blk.view((i * n, 0), (n, n)).into_owned();
                blk.view_mut((i * n, 0), (n, n))
                    .copy_from(&(c.block(b) * cur));
            }
        }
        Ok(out)
    }

    /// `⟨self, other⟩ = Σ_i (self_i)* other_i`.
    pub fn inner(&self, other: &ModuleElement) -> Result<AlgebraElement> {
        self.ensure_same(other)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &ModuleElement) -> AlgebraElement {
        AlgebraElement::from_blocks_unchecked(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(x, y)| x.ad_mul(y))
                .collect(),
        )
    }

    /// `‖⟨x, x⟩‖^{1/2}`, which equals the largest singular value over the stacked blocks.
    pub fn norm(&self) -> f64 {
        self.inner_unchecked(self).norm().max(0.0).sqrt()
    }

    pub fn max_abs_diff(&self, other: &ModuleElement) -> f64 {
        if !self.same_module(other) {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Keeps the first `length` coordinates.
    pub fn truncate(&self, length: usize) -> Result<Self> {
        if length == 0 || length > self.length {
            return Err(Error::domain(format!(
                "cannot truncate A^{} to A^{length}",
                self.length
            )));
        }
        Ok(Self {
            length,
            blocks: self
                .blocks
                .iter()
                .map(|m| {
                    let n = m.ncols();
                    m.rows(0, length * n).into_owned()
                })
                .collect(),
        })
    }

    /// Pads with zero coordinates up to `length`.
    pub fn extend(&self, length: usize) -> Result<Self> {
        if length < self.length {
            return Err(Error::domain(format!(
                "cannot extend A^{} to A^{length}",
                self.length
            )));
        }
        Ok(Self {
            length,
            blocks: self
                .blocks
                .iter()
                .map(|m| {
                    let n = m.ncols();
                    let mut out = CMatrix::zeros(length * n, n);
                    out.rows_mut(0, self.length * n).copy_from(m);
                    out
                })
                .collect(),
        })
    }
}

pub fn inner(x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
    x.inner(y)
}

pub fn elem_norm(x: &ModuleElement) -> f64 {
    x.norm()
}

/// `‖y‖²⟨x,x⟩ − ⟨x,y⟩⟨y,x⟩`, positive by the module Cauchy–Schwarz inequality.
pub fn cauchy_schwarz_gap(x: &ModuleElement, y: &ModuleElement) -> Result<AlgebraElement> {
    let xy = x.inner(y)?;
    let yx = xy.adjoint();
    let ny = y.norm();
    x.inner_unchecked(x).scale_real(ny * ny).sub(&xy.mul(&yx)?)
}
