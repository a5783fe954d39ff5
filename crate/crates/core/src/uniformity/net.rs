use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metric::{PointFeatures, PseudoMetricSpec};
use crate::hilbert::ModuleElement;
use crate::{Error, Result};

/// An ε-net drawn from a point list, identified by point indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    pub epsilon: f64,
    pub centers: Vec<usize>,
    pub covered: bool,
    /// Largest distance from a point to its nearest center.
    pub max_uncovered_distance: f64,
    pub spec_id: usize,
}

impl NetReport {
    pub fn size(&self) -> usize {
        self.centers.len()
    }
}

/// Greedy farthest-point selection on precomputed features, starting from point 0.
///
/// Stops once every point is within `epsilon` of a center, or after `max_centers`
/// centers with `covered = false`. Successive centers are pairwise more than `epsilon`
/// apart.
pub fn greedy_net(
    pf: &PointFeatures,
    epsilon: f64,
    spec_id: usize,
    max_centers: usize,
) -> NetReport {
    if pf.is_empty() {
        return NetReport {
            epsilon,
            centers: Vec::new(),
            covered: true,
            max_uncovered_distance: 0.0,
            spec_id,
        };
    }
    let mut centers = vec![0];
    let mut nearest: Vec<f64> = (0..pf.len()).map(|j| pf.distance(0, j)).collect();
    loop {
        let (far, radius) =
            nearest
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &d)| {
                    if d > best.1 {
                        (j, d)
                    } else {
                        best
                    }
                });
        if radius <= epsilon || centers.len() >= max_centers {
            return NetReport {
                epsilon,
                centers,
                covered: radius <= epsilon,
                max_uncovered_distance: radius,
                spec_id,
            };
        }
        centers.push(far);
        for (j, n) in nearest.iter_mut().enumerate() {
            *n = n.min(pf.distance(far, j));
        }
    }
}

/// An ε-net for `points` under `spec`, by greedy farthest-point selection.
pub fn epsilon_net(
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    epsilon: f64,
) -> Result<NetReport> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("ε must be positive"));
    }
    let pf = PointFeatures::new(spec, points)?;
    Ok(greedy_net(&pf, epsilon, spec.id, usize::MAX))
}

/// Covering radius of the given centers, computed directly from the pseudo-metric.
pub fn covering_radius(
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    centers: &[usize],
) -> Result<f64> {
    if centers.iter().any(|&c| c >= points.len()) {
        return Err(Error::invalid("center index outside the point list"));
    }
    if centers.is_empty() {
        return Ok(if points.is_empty() {
            0.0
        } else {
            f64::INFINITY
        });
    }
    let pf = PointFeatures::new(spec, points)?;
    Ok(radius_on_features(&pf, centers))
}

pub(crate) fn radius_on_features(pf: &PointFeatures, centers: &[usize]) -> f64 {
    if centers.is_empty() {
        return if pf.is_empty() { 0.0 } else { f64::INFINITY };
    }
    (0..pf.len())
        .into_par_iter()
        .map(|j| {
            centers
                .iter()
                .map(|&c| pf.distance(c, j))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// Independent re-check of a net: every point within `ε + tol` of some center.
pub fn verify_net(
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    net: &NetReport,
    tol: f64,
) -> Result<bool> {
    Ok(covering_radius(points, spec, &net.centers)? <= net.epsilon + tol)
}

/// Points pairwise at least ε apart under one spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatedFamily {
    pub spec_id: usize,
    pub epsilon: f64,
    pub points: Vec<usize>,
    pub min_pairwise: f64,
}

impl SeparatedFamily {
    pub fn size(&self) -> usize {
        self.points.len()
    }
}

pub(crate) fn min_pairwise_on_features(pf: &PointFeatures, idx: &[usize]) -> f64 {
    (0..idx.len())
        .into_par_iter()
        .map(|a| {
            (a + 1..idx.len())
                .map(|b| pf.distance(idx[a], idx[b]))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Smallest pairwise distance among the listed points.
pub fn min_pairwise_distance(
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    idx: &[usize],
) -> Result<f64> {
    if idx.iter().any(|&c| c >= points.len()) {
        return Err(Error::invalid("family index outside the point list"));
    }
    let pf = PointFeatures::new(spec, points)?;
    Ok(min_pairwise_on_features(&pf, idx))
}

/// Re-check of a separation certificate: pairwise distances at least `ε − tol`.
pub fn verify_family(
    points: &[ModuleElement],
    spec: &PseudoMetricSpec,
    family: &SeparatedFamily,
    tol: f64,
) -> Result<bool> {
    Ok(family.points.len() >= 2
        && min_pairwise_distance(points, spec, &family.points)? >= family.epsilon - tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ProbeVerdict {
    /// One net per spec, in battery order.
    NetFound { nets: Vec<NetReport> },
    /// More than `budget` points pairwise over ε apart, so no ε/2-net within budget exists.
    SeparatedFamily {
        family: SeparatedFamily,
        budget: usize,
    },
}

impl ProbeVerdict {
    pub fn is_net_found(&self) -> bool {
        matches!(self, ProbeVerdict::NetFound { .. })
    }
}

/// Finitized total-boundedness test over a battery of specs.
///
/// Greedy nets are built for every spec; the first spec whose net needs more than
/// `budget` centers yields those centers as a separated family.
pub fn total_boundedness_probe(
    points: &[ModuleElement],
    specs: &[PseudoMetricSpec],
    epsilon: f64,
    budget: usize,
) -> Result<ProbeVerdict> {
    let features = specs
        .iter()
        .map(|s| PointFeatures::new(s, points))
        .collect::<Result<Vec<_>>>()?;
    probe_on_features(&features, specs, &[epsilon], budget).map(|mut v| v.remove(0))
}

/// As [`total_boundedness_probe`] for several ε at once, reusing features.
pub(crate) fn probe_on_features(
    features: &[PointFeatures],
    specs: &[PseudoMetricSpec],
    epsilons: &[f64],
    budget: usize,
) -> Result<Vec<ProbeVerdict>> {
    if budget == 0 {
        return Err(Error::domain("budget must be at least 1"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::domain("ε must be positive"));
    }
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let nets: Vec<NetReport> = features
                .par_iter()
                .zip(specs)
                .map(|(pf, spec)| greedy_net(pf, eps, spec.id, usize::MAX))
                .collect();
            match nets.iter().zip(features).find(|(n, _)| n.size() > budget) {
                Some((net, pf)) => ProbeVerdict::SeparatedFamily {
                    family: SeparatedFamily {
                        spec_id: net.spec_id,
                        epsilon: eps,
                        points: net.centers.clone(),
                        min_pairwise: min_pairwise_on_features(pf, &net.centers),
                    },
                    budget,
                },
                None => ProbeVerdict::NetFound { nets },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CStarAlgebra, State};
    use crate::hilbert::{AdmissibleSystem, HilbertModule};

    fn basis_spec(m: &HilbertModule) -> PseudoMetricSpec {
        let system =
            AdmissibleSystem::new((0..m.len()).map(|i| m.basis(i).unwrap()).collect()).unwrap();
        PseudoMetricSpec::new(3, system, vec![State::tracial(m.algebra()); m.len()]).unwrap()
    }

    #[test]
    fn single_point_and_large_epsilon() {
        let m = HilbertModule::new(CStarAlgebra::new(vec![1]).unwrap(), 4).unwrap();
        let spec = basis_spec(&m);
        let pts = vec![m.basis(1).unwrap()];
        assert_eq!(epsilon_net(&pts, &spec, 0.1).unwrap().size(), 1);
        let pts: Vec<_> = (0..4).map(|i| m.basis(i).unwrap()).collect();
        let net = epsilon_net(&pts, &spec, 2.0).unwrap();
        assert_eq!(net.centers, vec![0]);
        assert!(net.covered);
        assert!(verify_net(&pts, &spec, &net, 1e-9).unwrap());
    }

    #[test]
    fn basis_vectors_are_separated() {
        let m = HilbertModule::new(CStarAlgebra::new(vec![1]).unwrap(), 5).unwrap();
        let spec = basis_spec(&m);
        let pts: Vec<_> = (0..5).map(|i| m.basis(i).unwrap()).collect();
        let net = epsilon_net(&pts, &spec, 0.5).unwrap();
        assert_eq!(net.size(), 5);
        match total_boundedness_probe(&pts, &[spec.clone()], 0.5, 2).unwrap() {
            ProbeVerdict::SeparatedFamily { family, .. } => {
                assert_eq!(family.size(), 5);
                assert!((family.min_pairwise - 2f64.sqrt()).abs() < 1e-12);
                assert!(verify_family(&pts, &spec, &family, 1e-9).unwrap());
            }
            other => panic!("expected a separated family, got {other:?}"),
        }
        assert!(total_boundedness_probe(&pts, &[spec], 0.5, 5)
            .unwrap()
            .is_net_found());
    }

    #[test]
    fn deleting_a_center_breaks_coverage() {
        let m = HilbertModule::new(CStarAlgebra::new(vec![1]).unwrap(), 4).unwrap();
        let spec = basis_spec(&m);
        let pts: Vec<_> = (0..4)
            .map(|i| m.basis(i).unwrap().scale_real(0.25 * (i + 1) as f64))
            .collect();
        let mut net = epsilon_net(&pts, &spec, 0.3).unwrap();
        assert!(verify_net(&pts, &spec, &net, 1e-9).unwrap());
        net.centers.pop();
        assert!(!verify_net(&pts, &spec, &net, 1e-9).unwrap());
    }

    #[test]
    fn budget_limits_greedy() {
        let m = HilbertModule::new(CStarAlgebra::new(vec![1]).unwrap(), 6).unwrap();
        let spec = basis_spec(&m);
        let pts: Vec<_> = (0..6).map(|i| m.basis(i).unwrap()).collect();
        let pf = PointFeatures::new(&spec, &pts).unwrap();
        let net = greedy_net(&pf, 0.5, 0, 3);
        assert_eq!(net.size(), 3);
        assert!(!net.covered);
    }
}
