use serde::{Deserialize, Serialize};

use super::metric::{PointFeatures, PseudoMetricSpec};
use super::net::{greedy_net, radius_on_features, NetReport};
use crate::hilbert::{AdmissibleSystem, ModuleElement};
use crate::operators::ModuleOperator;
use crate::{Error, Result};

const PROJECTION_TOL: f64 = 1e-12;

/// `(P x_i, Φ)`: the system pushed through an orthogonal projection on the module.
pub fn project_spec(spec: &PseudoMetricSpec, p: &ModuleOperator) -> Result<PseudoMetricSpec> {
    let elements = spec
        .system()
        .elements()
        .iter()
        .map(|x| p.apply(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudoMetricSpec::new(
        spec.id,
        AdmissibleSystem::new(elements)?,
        spec.states().to_vec(),
    )?
    .with_coupling(spec.coupling()))
}

/// A net on `Y` for `(P X, Φ)` and the same centers read on `P Y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardTransfer {
    pub net: NetReport,
    pub projected: NetReport,
    /// Largest `|d(y, y_c) − d(P y, P y_c)|` over points and centers.
    pub max_discrepancy: f64,
}

/// Nets on the two parts combined through sums and the nearest-point selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackwardTransfer {
    /// ε/4-nets on `P₁Y` and `P₂Y`.
    pub parts: [NetReport; 2],
    pub sums: usize,
    /// Covering radius of the selected sums `z_k + w_s` over `Y`; at most ε/2.
    pub sum_radius: f64,
    /// Points `u*_l ∈ Y` chosen within ε/2 of a sum, as an ε-net for `Y`.
    pub net: NetReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub epsilon: f64,
    pub forward: [ForwardTransfer; 2],
    pub backward: BackwardTransfer,
}

fn check_pair(p1: &ModuleOperator, p2: &ModuleOperator, len: usize) -> Result<()> {
    for p in [p1, p2] {
        if p.source_len() != len || p.target_len() != len {
            return Err(Error::structural(
                "projection does not act on the points' module",
            ));
        }
        if p.adjoint().max_abs_diff(p) > PROJECTION_TOL
            || p.compose(p)?.max_abs_diff(p) > PROJECTION_TOL
        {
            return Err(Error::invalid("not an orthogonal projection"));
        }
    }
    let id = ModuleOperator::identity(&p1.algebra(), len);
    if p1.add(p2)?.max_abs_diff(&id) > PROJECTION_TOL {
        return Err(Error::invalid("projections are not complementary"));
    }
    Ok(())
}

/// Re-reads a net for `(P X, Φ)` on `Y` as a net on `P Y`.
pub fn forward_transfer(
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    net: &NetReport,
    p: &ModuleOperator,
) -> Result<ForwardTransfer> {
    let projected_spec = project_spec(spec, p)?;
    let projected_points = points
        .iter()
        .map(|y| p.apply(y))
        .collect::<Result<Vec<_>>>()?;
    let on_y = PointFeatures::new(&projected_spec, points)?;
    let on_py = PointFeatures::new(&projected_spec, &projected_points)?;
    let mut discrepancy = 0.0f64;
    for j in 0..points.len() {
        for &c in &net.centers {
            discrepancy = discrepancy.max((on_y.distance(j, c) - on_py.distance(j, c)).abs());
        }
    }
    let radius = radius_on_features(&on_py, &net.centers);
    Ok(ForwardTransfer {
        net: net.clone(),
        projected: NetReport {
            epsilon: net.epsilon,
            centers: net.centers.clone(),
            covered: radius <= net.epsilon,
            max_uncovered_distance: radius,
            spec_id: net.spec_id,
        },
        max_discrepancy: discrepancy,
    })
}

/// Both directions of the direct-sum argument for `N = P₁N ⊕ P₂N` on one point set.
pub fn directsum_net_transfer(
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    p1: &ModuleOperator,
    p2: &ModuleOperator,
    epsilon: f64,
) -> Result<TransferReport> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("ε must be positive"));
    }
    if points.is_empty() {
        return Err(Error::invalid("no points to transfer"));
    }
    check_pair(p1, p2, spec.module_len())?;

    let mut forward = Vec::with_capacity(2);
    let mut parts = Vec::with_capacity(2);
    let mut part_points = Vec::with_capacity(2);
    for p in [p1, p2] {
        let projected_spec = project_spec(spec, p)?;
        let net = greedy_net(
            &PointFeatures::new(&projected_spec, points)?,
            epsilon,
            spec.id,
            usize::MAX,
        );
        forward.push(forward_transfer(points, spec, &net, p)?);
        let py = points
            .iter()
            .map(|y| p.apply(y))
            .collect::<Result<Vec<_>>>()?;
        parts.push(greedy_net(
            &PointFeatures::new(&projected_spec, &py)?,
            epsilon / 4.0,
            spec.id,
            usize::MAX,
        ));
        part_points.push(py);
    }

    let mut sums = Vec::new();
    for &k in &parts[0].centers {
        for &s in &parts[1].centers {
            sums.push(part_points[0][k].add(&part_points[1][s])?);
        }
    }
    let n = points.len();
    let mut all = points.to_vec();
    all.extend(sums.iter().cloned());
    let pf = PointFeatures::new(spec, &all)?;
    let sum_idx: Vec<usize> = (n..all.len()).collect();
    let sum_radius = (0..n)
        .map(|j| {
            sum_idx
                .iter()
                .map(|&u| pf.distance(j, u))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let mut centers = Vec::new();
    for &u in &sum_idx {
        let (best, d) = (0..n)
            .map(|j| (j, pf.distance(j, u)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        if d <= epsilon / 2.0 && !centers.contains(&best) {
            centers.push(best);
        }
    }
    let radius = (0..n)
        .map(|j| {
            centers
                .iter()
                .map(|&c| pf.distance(j, c))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let [f1, f2]: [ForwardTransfer; 2] = forward.try_into().expect("two parts");
    let [n1, n2]: [NetReport; 2] = parts.try_into().expect("two parts");
    Ok(TransferReport {
        epsilon,
        forward: [f1, f2],
        backward: BackwardTransfer {
            parts: [n1, n2],
            sums: sums.len(),
            sum_radius,
            net: NetReport {
                epsilon,
                centers,
                covered: radius <= epsilon,
                max_uncovered_distance: radius,
                spec_id: spec.id,
            },
        },
    })
}
