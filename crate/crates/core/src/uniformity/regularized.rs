use serde::{Deserialize, Serialize};

use super::metric::{PointFeatures, PseudoMetricSpec};
use super::net::{greedy_net, radius_on_features, NetReport};
use crate::hilbert::{AdmissibleSystem, HilbertModule, ModuleElement};
use crate::operators::{theta_decomposition_relative, ModuleOperator};
use crate::{Error, Result};

/// A net for `d_{X,Φ}` on `G(sample)` built in the finite-dimensional coordinates
/// `R(y) = (φ_k(⟨x_i, b·y⟩))_{k ≤ i ≤ K}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedNet {
    pub net: NetReport,
    /// Scale the construction runs at; `ε²`, so that the final estimate `d² < ε'` gives `d < ε`.
    pub working_epsilon: f64,
    pub tau: f64,
    /// `max_j ‖(b − 1)a_j‖`, at most `√(τ/2)`.
    pub regularization_defect: f64,
    pub cutoff: usize,
    pub feature_dim: usize,
    /// Covering radius re-measured with the pseudo-metric itself.
    pub verified_radius: f64,
}

/// Builds an ε-net for `G(sample)` through the regularized coordinate map.
///
/// `G: A^m → A` is θ-decomposed as `θ_{a, G*(e_1)}` with `a` the unit (or the constraint
/// projection of `target`), regularized to `b = a(τ + a)^{-1}`, and the system is cut
/// off at the first `K` with `‖Σ_{i>K}⟨b,x_i⟩⟨x_i,b⟩‖ < ε'/(12‖G‖²)`. A greedy
/// `ε'/3`-net in the coordinates is lifted back and re-verified against `d_{X,Φ}`.
pub fn regularized_coordinate_net(
    g: &ModuleOperator,
    target: &HilbertModule,
    spec: &PseudoMetricSpec,
    epsilon: f64,
    sample: &[ModuleElement],
) -> Result<RegularizedNet> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain("ε must lie in (0, 1)"));
    }
    if g.target_len() != 1 || target.len() != 1 || spec.module_len() != 1 {
        return Err(Error::structural(
            "coordinate nets need an operator and spec on A¹",
        ));
    }
    if sample.is_empty() {
        return Err(Error::invalid("empty ball sample"));
    }
    let points = sample
        .iter()
        .map(|t| g.apply(t))
        .collect::<Result<Vec<_>>>()?;
    let exact = PointFeatures::new(spec, &points)?;
    let g_norm = g.op_norm();
    let eps_w = epsilon * epsilon;

    let (tau, defect, cutoff, net) = if g_norm == 0.0 {
        (0.0, 0.0, 0, greedy_net(&exact, epsilon, spec.id, 1))
    } else {
        let c = g_norm.max(1.0);
        let decomposition = theta_decomposition_relative(g, 1, target)?;
        let (a1, w1) = &decomposition.pairs[0];
        let legs = [a1.entry(0)];
        let sup_w = w1.norm();
        let d_theta = legs.len() as f64;
        let tau =
            0.5 * eps_w * eps_w / (54.0f64.powi(2) * c.powi(4) * d_theta.powi(2) * sup_w * sup_w);
        let mut a = legs[0].mul(&legs[0].adjoint())?;
        for l in &legs[1..] {
            a = a.add(&l.mul(&l.adjoint())?)?;
        }
        let b = a.resolvent_regularize(tau)?;
        let one = b.algebra().unit();
        let defect = legs
            .iter()
            .map(|l| b.sub(&one).and_then(|bm| bm.mul(l)).map(|x| x.norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);

        let elems = spec.system().elements();
        let gram: Vec<_> = elems.iter().map(|x| x.entry(0)).collect();
        let b_adj = b.adjoint();
        let threshold = eps_w / (12.0 * g_norm * g_norm);
        let mut cutoff = gram.len();
        let mut tail = b.algebra().zero();
        for k in (0..gram.len()).rev() {
            let c = b_adj.mul(&gram[k])?;
            let next = tail.add(&c.mul(&c.adjoint())?)?;
            if next.norm() >= threshold {
                break;
            }
            tail = next;
            cutoff = k;
        }
        let net = if cutoff == 0 {
            greedy_net(&exact, f64::INFINITY, spec.id, 1)
        } else {
            // d over (b*x_i, φ_k)_{i,k ≤ K} is the coordinate seminorm of R.
            let reduced = PseudoMetricSpec::new(
                spec.id,
                AdmissibleSystem::new(
                    elems[..cutoff]
                        .iter()
                        .map(|x| x.left_mul_coordinates(std::slice::from_ref(&b_adj)))
                        .collect::<Result<Vec<_>>>()?,
                )?,
                spec.states()[..cutoff].to_vec(),
            )?
            .with_coupling(spec.coupling());
            let coords = PointFeatures::new(&reduced, &points)?;
            greedy_net(&coords, eps_w / 3.0, spec.id, usize::MAX)
        };
        (tau, defect, cutoff, net)
    };

    let radius = radius_on_features(&exact, &net.centers);
    let feature_dim = exact_feature_dim(cutoff, spec);
    Ok(RegularizedNet {
        net: NetReport {
            epsilon,
            centers: net.centers,
            covered: radius <= epsilon,
            max_uncovered_distance: radius,
            spec_id: spec.id,
        },
        working_epsilon: eps_w,
        tau,
        regularization_defect: defect,
        cutoff,
        feature_dim,
        verified_radius: radius,
    })
}

fn exact_feature_dim(cutoff: usize, spec: &PseudoMetricSpec) -> usize {
    match spec.coupling() {
        super::metric::Coupling::Verbatim => cutoff * (cutoff + 1) / 2,
        super::metric::Coupling::Decoupled => cutoff * cutoff,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{CStarAlgebra, State};
    use crate::C64;

    fn setup() -> (
        CStarAlgebra,
        HilbertModule,
        PseudoMetricSpec,
        Vec<ModuleElement>,
    ) {
        let a = CStarAlgebra::new(vec![2, 1]).unwrap();
        let target = HilbertModule::new(a.clone(), 1).unwrap();
        let xs: Vec<_> = [0.6, 0.5, 0.4]
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let mut d = vec![vec![0.0, 0.0], vec![0.0]];
                match i {
                    0 => d[0][0] = s,
                    1 => d[0][1] = s,
                    _ => d[1][0] = s,
                }
                ModuleElement::from_entries(vec![a.diagonal(&d).unwrap()]).unwrap()
            })
            .collect();
        let spec = PseudoMetricSpec::new(
            1,
            AdmissibleSystem::new(xs).unwrap(),
            vec![State::tracial(&a); 3],
        )
        .unwrap();
        let source = HilbertModule::new(a.clone(), 3).unwrap();
        let mut sample = Vec::new();
        for i in 0..3 {
            for s in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                let e = source.basis(i).unwrap().scale(C64::new(s, 0.3 * s));
                sample.push(e.scale_real(1.0 / e.norm().max(1.0)));
            }
        }
        (a, target, spec, sample)
    }

    #[test]
    fn zero_operator_gives_one_center() {
        let (a, target, spec, sample) = setup();
        let g = ModuleOperator::zero(&a, 1, 3);
        let r = regularized_coordinate_net(&g, &target, &spec, 0.5, &sample).unwrap();
        assert_eq!(r.net.size(), 1);
        assert!(r.net.covered);
    }

    #[test]
    fn rank_one_row_is_covered_and_verified() {
        let (a, target, spec, sample) = setup();
        let w = a.diagonal(&[vec![0.7, -0.2], vec![0.5]]).unwrap();
        let g = ModuleOperator::from_entries(vec![vec![w.clone(), w.scale_real(0.5), a.zero()]])
            .unwrap();
        for eps in [0.5, 0.2, 0.1] {
            let r = regularized_coordinate_net(&g, &target, &spec, eps, &sample).unwrap();
            assert!(r.net.covered, "radius {} at ε = {eps}", r.verified_radius);
            assert!(r.regularization_defect <= (r.tau / 2.0).sqrt() + 1e-9);
            assert!(r.cutoff <= 3);
        }
    }

    #[test]
    fn epsilon_must_be_below_one() {
        let (a, target, spec, sample) = setup();
        let g = ModuleOperator::zero(&a, 1, 3);
        assert!(matches!(
            regularized_coordinate_net(&g, &target, &spec, 1.0, &sample),
            Err(Error::Domain(_))
        ));
    }
}
