use serde::{Deserialize, Serialize};

use super::metric::{PointFeatures, PseudoMetricSpec};
use crate::algebra::{witness_state, CStarAlgebra};
use crate::hilbert::{AdmissibleSystem, HilbertModule, ModuleElement};
use crate::operators::{ModuleOperator, OperatorGenerator};
use crate::{Error, Result};

/// Relative slack when deciding whether a row reaches δ.
const ROW_SLACK: f64 = 1e-9;

/// Image points `F z_j` that no small center set can approximate, with the spec that
/// separates them.
///
/// Rows `j` with `‖q_j F‖ ≥ δ` give unit vectors `z_j = F*(e_j)/‖F*(e_j)‖`. The
/// `j`-th coordinate of `F z_j` is the positive element `(FF*)_{jj}/‖F*(e_j)‖` of norm
/// `‖q_j F‖`, so with `x_i = e_{j(i)}` and a spectral state `φ_i` for that coordinate
/// every other point sits at distance at least about `δ` from `F z_{j(i)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoncompactnessWitness {
    pub delta: f64,
    pub operator_norm: f64,
    /// `δ / (4‖F‖)`: the distance every uncovered point keeps from a candidate center set.
    pub bound: f64,
    /// Row index `j(i)` of each point, increasing.
    pub rows: Vec<usize>,
    pub spec: PseudoMetricSpec,
    pub points: Vec<ModuleElement>,
    pub min_pairwise: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum WitnessOutcome {
    Witnessed(Box<NoncompactnessWitness>),
    Inconclusive { reason: String },
}

impl WitnessOutcome {
    pub fn witness(&self) -> Option<&NoncompactnessWitness> {
        match self {
            WitnessOutcome::Witnessed(w) => Some(w),
            WitnessOutcome::Inconclusive { .. } => None,
        }
    }
}

impl NoncompactnessWitness {
    /// Indices of witness points at distance at least `bound − tol` from every center.
    ///
    /// Since the points are pairwise at least `2·bound` apart, at most one point per
    /// center can fall closer, so at least `points − centers` indices are returned.
    pub fn points_far_from(&self, centers: &[ModuleElement], tol: f64) -> Result<Vec<usize>> {
        let mut all = self.points.clone();
        all.extend_from_slice(centers);
        let pf = PointFeatures::new(&self.spec, &all)?;
        let n = self.points.len();
        Ok((0..n)
            .filter(|&i| (n..all.len()).all(|c| pf.distance(i, c) >= self.bound - tol))
            .collect())
    }
}

/// Per-row norms `‖q_j F‖`.
pub fn row_norms(f: &ModuleOperator) -> Vec<f64> {
    (0..f.target_len())
        .map(|j| f.row(j).map(|r| r.op_norm()).unwrap_or(0.0))
        .collect()
}

/// Builds the witness for `F_D` from a generator.
pub fn noncompactness_witness(
    generator: &OperatorGenerator,
    algebra: &CStarAlgebra,
    d: usize,
    delta: f64,
) -> Result<WitnessOutcome> {
    noncompactness_witness_for(&generator.build(algebra, d)?, delta)
}

/// Builds the witness for an operator on a single truncation.
///
/// The precondition `‖q_{j(i)} F‖ ≥ δ` with `j(i) → ∞` is finitized as: some row in the
/// upper half of the truncation reaches δ. Otherwise the outcome is inconclusive.
pub fn noncompactness_witness_for(f: &ModuleOperator, delta: f64) -> Result<WitnessOutcome> {
    if !(delta > 0.0) {
        return Err(Error::domain("δ must be positive"));
    }
    let d = f.target_len();
    let norms = row_norms(f);
    let rows: Vec<usize> = (0..d)
        .filter(|&j| norms[j] >= delta * (1.0 - ROW_SLACK))
        .collect();
    let upper = |rows: &[usize]| rows.iter().any(|&j| 2 * j >= d);
    if !upper(&rows) {
        return Ok(WitnessOutcome::Inconclusive {
            reason: format!("no row in the upper half of A^{d} reaches δ = {delta:e}"),
        });
    }
    let algebra = f.algebra();
    let module = HilbertModule::new(algebra, d)?;
    let f_adj = f.adjoint();
    let mut points = Vec::with_capacity(rows.len());
    let mut states = Vec::with_capacity(rows.len());
    for &j in &rows {
        let z = f_adj.apply(&module.basis(j)?)?.scale_real(1.0 / norms[j]);
        let p = f.apply(&z)?;
        states.push(witness_state(&p.entry(j))?);
        points.push(p);
    }
    let operator_norm = f.op_norm();
    let bound = delta / (4.0 * operator_norm);
    let basis = rows
        .iter()
        .map(|&j| module.basis(j))
        .collect::<Result<Vec<_>>>()?;
    let spec = PseudoMetricSpec::new(0, AdmissibleSystem::new(basis.clone())?, states.clone())?;
    let pf = PointFeatures::new(&spec, &points)?;

    // Keep a subfamily that is pairwise 2·bound apart, in row order.
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        if keep.iter().all(|&k| pf.distance(i, k) >= 2.0 * bound) {
            keep.push(i);
        }
    }
    let kept_rows: Vec<usize> = keep.iter().map(|&i| rows[i]).collect();
    if keep.len() < 2 || !upper(&kept_rows) {
        return Ok(WitnessOutcome::Inconclusive {
            reason: "image points are not separated at scale δ/(2‖F‖)".into(),
        });
    }
    let spec = PseudoMetricSpec::new(
        0,
        AdmissibleSystem::new(keep.iter().map(|&i| basis[i].clone()).collect())?,
        keep.iter().map(|&i| states[i].clone()).collect(),
    )?;
    let points: Vec<_> = keep.iter().map(|&i| points[i].clone()).collect();
    let pf = PointFeatures::new(&spec, &points)?;
    let all: Vec<usize> = (0..points.len()).collect();
    let min_pairwise = super::net::min_pairwise_on_features(&pf, &all);
    if min_pairwise < 2.0 * bound {
        return Ok(WitnessOutcome::Inconclusive {
            reason: "separation lost after restricting the system".into(),
        });
    }
    Ok(WitnessOutcome::Witnessed(Box::new(NoncompactnessWitness {
        delta,
        operator_norm,
        bound,
        rows: kept_rows,
        spec,
        points,
        min_pairwise,
    })))
}
