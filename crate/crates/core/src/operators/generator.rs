use serde::{Deserialize, Serialize};

use super::{theta, ModuleOperator};
use crate::algebra::{AlgebraElement, CStarAlgebra};
use crate::hilbert::{HilbertModule, ModuleElement};
use crate::{Error, Result};

const CONSISTENCY_TOL: f64 = 1e-12;

/// A real sequence `λ_1, λ_2, …` indexed from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarSequence {
    /// `2^{-i}`
    Pow2Decay,
    One,
    Zero,
    /// `1/i`
    Harmonic,
    Constant(f64),
    /// `r^i`
    Geometric(f64),
    /// `a` at odd `i`, `b` at even `i`.
    Alternating([f64; 2]),
    /// Listed values, then zeros.
    Explicit(Vec<f64>),
}

impl ScalarSequence {
    pub fn value(&self, i: usize) -> f64 {
        assert!(i >= 1, "sequences are indexed from 1");
        match self {
            ScalarSequence::Pow2Decay => 0.5f64.powi(i as i32),
            ScalarSequence::One => 1.0,
            ScalarSequence::Zero => 0.0,
            ScalarSequence::Harmonic => 1.0 / i as f64,
            ScalarSequence::Constant(c) => *c,
            ScalarSequence::Geometric(r) => r.powi(i as i32),
            ScalarSequence::Alternating([a, b]) => {
                if i % 2 == 1 {
                    *a
                } else {
                    *b
                }
            }
            ScalarSequence::Explicit(v) => v.get(i - 1).copied().unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = match self {
            ScalarSequence::Constant(c) | ScalarSequence::Geometric(c) => c.is_finite(),
            ScalarSequence::Alternating(ab) => ab.iter().all(|v| v.is_finite()),
            ScalarSequence::Explicit(v) => v.iter().all(|v| v.is_finite()),
            _ => true,
        };
        if finite {
            Ok(())
        } else {
            Err(Error::invalid("sequence parameters must be finite"))
        }
    }
}

fn default_one() -> ScalarSequence {
    ScalarSequence::One
}

/// One band of a banded operator: entry `(j + offset, j)` is `decay(j+1)·entry`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub offset: i64,
    pub entry: AlgebraElement,
    #[serde(default = "default_one")]
    pub decay: ScalarSequence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaPair {
    pub x: ModuleElement,
    pub y: ModuleElement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GeneratorRule {
    /// `diag(λ_1 c, λ_2 c, …)` with `c` the unit unless given.
    Diagonal {
        lambda: ScalarSequence,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coefficient: Option<AlgebraElement>,
    },
    Banded {
        bands: Vec<Band>,
    },
    /// `Σ θ_{x,y}`, legs truncated or zero-padded to the requested length.
    ThetaSum {
        pairs: Vec<ThetaPair>,
    },
}

/// A finite rule producing an operator `F_D: A^D → A^D` at every truncation length `D`,
/// consistent in the sense that `F_D` is the leading corner of `F_{D'}` for `D ≤ D'`.
///
/// An optional projection `p` replaces `F` by `diag(p, p, …)·F`, whose image lies in the
/// submodule `⊕ pA`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorGenerator {
    #[serde(flatten)]
    pub rule: GeneratorRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<AlgebraElement>,
}

impl OperatorGenerator {
    pub fn diagonal(lambda: ScalarSequence) -> Self {
        Self {
            rule: GeneratorRule::Diagonal {
                lambda,
                coefficient: None,
            },
            projection: None,
        }
    }

    pub fn with_projection(mut self, p: AlgebraElement) -> Self {
        self.projection = Some(p);
        self
    }

    /// Checks that every parameter lives in `algebra` and the projection is one.
    pub fn validate(&self, algebra: &CStarAlgebra) -> Result<()> {
        let fits = |e: &AlgebraElement| e.block_dims() == algebra.block_dims();
        match &self.rule {
            GeneratorRule::Diagonal {
                lambda,
                coefficient,
            } => {
                lambda.validate()?;
                if coefficient.as_ref().is_some_and(|c| !fits(c)) {
                    return Err(Error::structural(
                        "diagonal coefficient from another algebra",
                    ));
                }
            }
            GeneratorRule::Banded { bands } => {
                if bands.is_empty() {
                    return Err(Error::invalid("banded rule needs at least one band"));
                }
                for band in bands {
                    band.decay.validate()?;
                    if !fits(&band.entry) {
                        return Err(Error::structural("band entry from another algebra"));
                    }
                }
            }
            GeneratorRule::ThetaSum { pairs } => {
                if pairs.is_empty() {
                    return Err(Error::invalid("θ-sum rule needs at least one pair"));
                }
                for pair in pairs {
                    if pair.x.block_dims() != algebra.block_dims()
                        || pair.y.block_dims() != algebra.block_dims()
                    {
                        return Err(Error::structural("θ-sum leg from another algebra"));
                    }
                }
            }
        }
        if let Some(p) = &self.projection {
            if !fits(p) {
                return Err(Error::structural("projection from another algebra"));
            }
            if !p.is_hermitian(CONSISTENCY_TOL) || p.mul(p)?.max_abs_diff(p) > CONSISTENCY_TOL {
                return Err(Error::invalid(
                    "generator projection is not an orthogonal projection",
                ));
            }
        }
        Ok(())
    }

    /// `F_D` on `A^D`.
    pub fn build(&self, algebra: &CStarAlgebra, d: usize) -> Result<ModuleOperator> {
        if d == 0 {
            return Err(Error::domain("truncation length must be positive"));
        }
        self.validate(algebra)?;
        let f = match &self.rule {
            GeneratorRule::Diagonal {
                lambda,
                coefficient,
            } => {
                let c = coefficient.clone().unwrap_or_else(|| algebra.unit());
                ModuleOperator::diagonal(
                    &(1..=d)
                        .map(|i| c.scale_real(lambda.value(i)))
                        .collect::<Vec<_>>(),
                )?
            }
            GeneratorRule::Banded { bands } => {
                let mut entries = vec![vec![algebra.zero(); d]; d];
                for band in bands {
                    for j in 0..d {
                        let i = j as i64 + band.offset;
                        if (0..d as i64).contains(&i) {
                            let e = &mut entries[i as usize][j];
                            *e = e.add(&band.entry.scale_real(band.decay.value(j + 1)))?;
                        }
                    }
                }
                ModuleOperator::from_entries(entries)?
            }
            GeneratorRule::ThetaSum { pairs } => {
                let mut acc = ModuleOperator::zero(algebra, d, d);
                for pair in pairs {
                    acc = acc.add(&theta(&resize(&pair.x, d)?, &resize(&pair.y, d)?)?)?;
                }
                acc
            }
        };
        match &self.projection {
            None => Ok(f),
            Some(p) => ModuleOperator::diagonal(&vec![p.clone(); d])?.compose(&f),
        }
    }

    /// The submodule containing the image of `F_D`: `⊕ pA` with a projection, else `A^D`.
    pub fn target_module(&self, algebra: &CStarAlgebra, d: usize) -> Result<HilbertModule> {
        match &self.projection {
            None => HilbertModule::new(algebra.clone(), d),
            Some(p) => HilbertModule::constrained(algebra.clone(), vec![p.clone(); d]),
        }
    }

    /// Verifies that `F_D` is the leading corner of `F_{D'}` along a ladder; returns the
    /// largest discrepancy.
    pub fn check_consistency(&self, algebra: &CStarAlgebra, ladder: &[usize]) -> Result<f64> {
        let mut worst = 0.0f64;
        for w in ladder.windows(2) {
            let small = self.build(algebra, w[0])?;
            let large = self.build(algebra, w[1])?;
            let diff = large.corner(w[0], w[0])?.max_abs_diff(&small);
            worst = worst.max(diff);
            if diff > CONSISTENCY_TOL {
                return Err(Error::InconsistentGenerator(format!(
                    "F_{} differs from the corner of F_{} by {diff:e}",
                    w[0], w[1]
                )));
            }
        }
        Ok(worst)
    }
}

fn resize(x: &ModuleElement, d: usize) -> Result<ModuleElement> {
    if x.len() >= d {
        x.truncate(d)
    } else {
        x.extend(d)
    }
}
