use proptest::prelude::*;
use rand::Rng;

use cstar_compact::algebra::{AlgebraElement, CStarAlgebra};
use cstar_compact::hilbert::{HilbertModule, ModuleElement};
use cstar_compact::operators::{
    tail_norm, theta, theta_decomposition, truncation, ModuleOperator, OperatorGenerator,
    ScalarSequence,
};
use cstar_compact::sampling::{
    random_ball_element, random_element, random_spec, random_state, rng_for, Purpose,
};
use cstar_compact::uniformity::{
    epsilon_net, min_pairwise_distance, pseudo_metric, verify_net, PointFeatures,
};
use cstar_compact::C64;

fn algebra(shape: u8) -> CStarAlgebra {
    match shape % 3 {
        0 => CStarAlgebra::new(vec![1]),
        1 => CStarAlgebra::new(vec![2, 1]),
        _ => CStarAlgebra::new(vec![2, 2]),
    }
    .unwrap()
}

fn points(a: &CStarAlgebra, n: usize, count: usize, seed: u64) -> Vec<ModuleElement> {
    let rng = &mut rng_for(seed, Purpose::Scenario, 0);
    (0..count)
        .map(|_| random_ball_element(a, n, 1.0, rng))
        .collect()
}

fn operator(a: &CStarAlgebra, rows: usize, cols: usize, seed: u64) -> ModuleOperator {
    let rng = &mut rng_for(seed, Purpose::Scenario, 1);
    ModuleOperator::from_entries(
        (0..rows)
            .map(|_| (0..cols).map(|_| random_element(a, rng)).collect())
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pseudo_metric_axioms(seed in any::<u64>(), shape in 0u8..3, n in 1usize..5, id in 0usize..8) {
        let a = algebra(shape);
        let p = points(&a, n, 4, seed);
        let spec = random_spec(&a, n, id, seed, n, Purpose::Scenario).unwrap();
        let d = |i: usize, j: usize| pseudo_metric(&spec, &p[i], &p[j]).unwrap();
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 0) <= 1e-12);
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        prop_assert!(d(0, 1) <= p[0].sub(&p[1]).unwrap().norm() + 1e-9);
        let s = pseudo_metric(&spec, &p[0].add(&p[2]).unwrap(), &p[1].add(&p[3]).unwrap()).unwrap();
        prop_assert!(s <= d(0, 1) + d(2, 3) + 1e-9);
    }

    #[test]
    fn feature_distances_match_direct_evaluation(seed in any::<u64>(), n in 1usize..5, id in 0usize..8) {
        let a = algebra(1);
        let p = points(&a, n, 6, seed);
        let spec = random_spec(&a, n, id, seed, n, Purpose::Scenario).unwrap();
        let pf = PointFeatures::new(&spec, &p).unwrap();
        for i in 0..p.len() {
            for j in 0..p.len() {
                let exact = pseudo_metric(&spec, &p[i], &p[j]).unwrap();
                prop_assert!((pf.distance(i, j) - exact).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn inner_product_is_positive_and_right_linear(seed in any::<u64>(), shape in 0u8..3, n in 1usize..5) {
        let a = algebra(shape);
        let p = points(&a, n, 2, seed);
        let rng = &mut rng_for(seed, Purpose::Scenario, 7);
        let c = random_element(&a, rng);
        let xx = p[0].inner(&p[0]).unwrap();
        prop_assert!(xx.min_eigenvalue() >= -1e-12);
        let lhs = p[0].inner(&p[1].right_mul(&c).unwrap()).unwrap();
        let rhs = p[0].inner(&p[1]).unwrap().mul(&c).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
        let yx = p[1].inner(&p[0]).unwrap();
        prop_assert!(p[0].inner(&p[1]).unwrap().adjoint().max_abs_diff(&yx) <= 1e-12);
    }

    #[test]
    fn states_are_positive_and_unital(seed in any::<u64>(), shape in 0u8..3) {
        let a = algebra(shape);
        let rng = &mut rng_for(seed, Purpose::Scenario, 3);
        let phi = random_state(&a, rng);
        let x = random_element(&a, rng);
        let v = phi.eval(&x.adjoint().mul(&x).unwrap()).unwrap();
        prop_assert!(v.re >= -1e-12 && v.im.abs() <= 1e-12);
        prop_assert!((phi.eval(&a.unit()).unwrap() - C64::new(1.0, 0.0)).norm() <= 1e-12);
        prop_assert!(phi.eval(&x).unwrap().norm() <= x.norm() + 1e-12);
    }

    #[test]
    fn theta_adjoint_and_composition(seed in any::<u64>(), shape in 0u8..3, n in 1usize..4, m in 1usize..4) {
        let a = algebra(shape);
        let x = points(&a, n, 1, seed).remove(0);
        let y = points(&a, m, 1, seed ^ 1).remove(0);
        let t = operator(&a, 2, n, seed);
        let th = theta(&x, &y).unwrap();
        prop_assert!(th.adjoint().max_abs_diff(&theta(&y, &x).unwrap()) <= 1e-12);
        let left = t.compose(&th).unwrap();
        prop_assert!(left.max_abs_diff(&theta(&t.apply(&x).unwrap(), &y).unwrap()) <= 1e-12);
        // θ_{x,y}(z) = x⟨y,z⟩.
        let z = points(&a, m, 1, seed ^ 2).remove(0);
        let direct = x.right_mul(&y.inner(&z).unwrap()).unwrap();
        prop_assert!(th.apply(&z).unwrap().max_abs_diff(&direct) <= 1e-12);
    }

    #[test]
    fn theta_decomposition_reproduces_the_truncation(seed in any::<u64>(), n in 1usize..7) {
        let a = algebra(1);
        let f = operator(&a, n, n, seed);
        let d = 1 + (seed as usize) % n;
        let sum = theta_decomposition(&f, d).unwrap().to_operator().unwrap();
        let q = truncation(&a, d, n).unwrap();
        prop_assert!(sum.max_abs_diff(&q.compose(&f).unwrap()) <= 1e-12);
    }

    #[test]
    fn tail_norms_do_not_increase(seed in any::<u64>(), n in 2usize..8) {
        let a = algebra(1);
        let f = operator(&a, n, n, seed);
        let kappas: Vec<f64> = (0..=n).map(|d| tail_norm(&f, d).unwrap()).collect();
        prop_assert!((kappas[0] - f.op_norm()).abs() <= 1e-9);
        prop_assert!(kappas[n] == 0.0);
        for w in kappas.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn regularization_defect_is_bounded(seed in any::<u64>(), shape in 0u8..3, k in 1usize..5, exp in 0.0f64..8.0) {
        let a = algebra(shape);
        let rng = &mut rng_for(seed, Purpose::Scenario, 4);
        let tau = 10f64.powf(-exp);
        let family: Vec<AlgebraElement> = (0..k)
            .map(|_| random_element(&a, rng).scale_real(rng.random::<f64>()))
            .collect();
        let mut sum = a.zero();
        for x in &family {
            sum = sum.add(&x.mul(&x.adjoint()).unwrap()).unwrap();
        }
        let b = sum.resolvent_regularize(tau).unwrap();
        prop_assert!(b.is_positive(1e-12));
        prop_assert!(b.norm() <= 1.0 + 1e-12);
        for x in &family {
            let defect = b.sub(&a.unit()).unwrap().mul(x).unwrap().norm();
            prop_assert!(defect <= (tau / 2.0).sqrt() + 1e-9);
        }
    }

    #[test]
    fn greedy_nets_cover_and_separate(seed in any::<u64>(), n in 1usize..5, eps in 0.05f64..0.9) {
        let a = algebra(1);
        let p = points(&a, n, 40, seed);
        let spec = random_spec(&a, n, 1 + (seed % 7) as usize, seed, n, Purpose::Scenario).unwrap();
        let net = epsilon_net(&p, &spec, eps).unwrap();
        prop_assert!(net.covered);
        prop_assert_eq!(net.centers[0], 0);
        prop_assert!(verify_net(&p, &spec, &net, 0.0).unwrap());
        if net.size() > 1 {
            prop_assert!(min_pairwise_distance(&p, &spec, &net.centers).unwrap() > eps);
        }
    }

    #[test]
    fn json_round_trips_exactly(seed in any::<u64>(), shape in 0u8..3, n in 1usize..4) {
        let a = algebra(shape);
        let x = points(&a, n, 1, seed).remove(0);
        let back: ModuleElement = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
        prop_assert_eq!(&back, &x);
        let f = operator(&a, n, n, seed);
        let back: ModuleOperator = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn diagonal_tail_norms_follow_the_sequence() {
    let a = algebra(1);
    let f = OperatorGenerator::diagonal(ScalarSequence::Pow2Decay)
        .build(&a, 12)
        .unwrap();
    for d in 0..12 {
        assert_eq!(tail_norm(&f, d).unwrap(), 0.5f64.powi(d as i32 + 1));
    }
}

#[test]
fn basis_vectors_are_orthonormal() {
    let a = algebra(2);
    let m = HilbertModule::new(a.clone(), 3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let g = m.basis(i).unwrap().inner(&m.basis(j).unwrap()).unwrap();
            let want = if i == j { a.unit() } else { a.zero() };
            assert_eq!(g.max_abs_diff(&want), 0.0);
        }
    }
}
