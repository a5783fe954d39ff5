//! Seeded random data: algebra elements, states, unit-ball samples and spec batteries.
//!
//! Every draw comes from a ChaCha8 generator whose stream is keyed by purpose and index,
//! so a point or spec does not depend on how many others are drawn. Random points only
//! touch the first [`SampleConfig::support_window`] coordinates and are normalized before
//! truncation, which makes the sample at length `D` the `Q_D`-image of the sample at any
//! longer length.

use nalgebra::DVector;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{witness_state, AlgebraElement, CStarAlgebra, State};
use crate::hilbert::{AdmissibleSystem, HilbertModule, ModuleElement};
use crate::operators::{ModuleOperator, ThetaSum};
use crate::uniformity::PseudoMetricSpec;
use crate::{CMatrix, Result, C64};

/// Stream families; the low 32 bits of a stream id carry the index within the family.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Purpose {
    BallPoint = 1,
    Extreme = 2,
    Spec = 3,
    Triple = 4,
    AxiomSpec = 5,
    Scenario = 6,
}

pub fn rng_for(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | (index & 0xffff_ffff));
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub random_points: usize,
    pub support_window: usize,
    pub max_support: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            random_points: 256,
            support_window: 16,
            max_support: 8,
        }
    }
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Element with independent complex Gaussian entries.
pub fn random_element(algebra: &CStarAlgebra, rng: &mut impl Rng) -> AlgebraElement {
    algebra
        .element(
            algebra
                .block_dims()
                .iter()
                .map(|&n| gaussian_matrix(n, n, rng))
                .collect(),
        )
        .expect("blocks built to the algebra's shape")
}

pub fn random_hermitian(algebra: &CStarAlgebra, rng: &mut impl Rng) -> AlgebraElement {
    random_element(algebra, rng).real_part()
}

/// Haar-distributed unitary via QR of a Gaussian matrix with the phase correction.
pub fn random_unitary_matrix(n: usize, rng: &mut impl Rng) -> CMatrix {
    let qr = gaussian_matrix(n, n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(n, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / C64::new(d.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        }
    });
    q * CMatrix::from_diagonal(&phases)
}

pub fn random_unitary(algebra: &CStarAlgebra, rng: &mut impl Rng) -> AlgebraElement {
    algebra
        .element(
            algebra
                .block_dims()
                .iter()
                .map(|&n| random_unitary_matrix(n, rng))
                .collect(),
        )
        .expect("blocks built to the algebra's shape")
}

/// Random weights (flat Dirichlet) and Wishart-type unit-trace densities.
pub fn random_state(algebra: &CStarAlgebra, rng: &mut impl Rng) -> State {
    let raw: Vec<f64> = algebra
        .block_dims()
        .iter()
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    let densities = algebra
        .block_dims()
        .iter()
        .map(|&n| {
            let g = gaussian_matrix(n, n, rng);
            let rho = &g * g.adjoint();
            let tr = rho.trace().re;
            let rho = rho / C64::new(tr, 0.0);
            (&rho + rho.adjoint()) * C64::new(0.5, 0.0)
        })
        .collect();
    State::new(raw.iter().map(|w| w / total).collect(), densities).expect("random state is valid")
}

/// Element of `A^len` with Gaussian entries in every coordinate.
pub fn random_module_element(
    algebra: &CStarAlgebra,
    len: usize,
    rng: &mut impl Rng,
) -> ModuleElement {
    ModuleElement::from_entries((0..len).map(|_| random_element(algebra, rng)).collect())
        .expect("entries from one algebra")
}

/// Random point of the unit ball with `‖x‖ ≤ scale`.
pub fn random_ball_element(
    algebra: &CStarAlgebra,
    len: usize,
    scale: f64,
    rng: &mut impl Rng,
) -> ModuleElement {
    let x = random_module_element(algebra, len, rng);
    let r = scale * (1.0 - rng.random::<f64>());
    let n = x.norm();
    if n == 0.0 {
        x
    } else {
        x.scale_real(r / n)
    }
}

fn window_point(
    algebra: &CStarAlgebra,
    d: usize,
    cfg: &SampleConfig,
    rng: &mut impl Rng,
) -> ModuleElement {
    let window = cfg.support_window.max(1);
    let width = rng.random_range(1..=cfg.max_support.clamp(1, window));
    let coords = sample_indices(rng, window, width).into_vec();
    let mut entries = vec![algebra.zero(); window];
    for &c in &coords {
        entries[c] = random_element(algebra, rng);
    }
    let full = ModuleElement::from_entries(entries).expect("entries from one algebra");
    let radius = 1.0 - rng.random::<f64>();
    let full = full.scale_real(radius / full.norm());
    if d <= window {
        full.truncate(d).expect("d ≥ 1")
    } else {
        full.extend(d).expect("d > window")
    }
}

/// Unit-ball sample of `A^d`: random window-supported points, the basis `e_1, …, e_d`,
/// then extreme points `e_i·u` with random unitaries `u`.
pub fn ball_sample(
    algebra: &CStarAlgebra,
    d: usize,
    seed: u64,
    cfg: &SampleConfig,
) -> Result<Vec<ModuleElement>> {
    let module = HilbertModule::new(algebra.clone(), d)?;
    let mut out = Vec::with_capacity(cfg.random_points + 2 * d);
    for r in 0..cfg.random_points {
        out.push(window_point(
            algebra,
            d,
            cfg,
            &mut rng_for(seed, Purpose::BallPoint, r as u64),
        ));
    }
    for i in 0..d {
        out.push(module.basis(i)?);
    }
    for i in 0..d {
        let u = random_unitary(algebra, &mut rng_for(seed, Purpose::Extreme, i as u64));
        out.push(module.basis(i)?.right_mul(&u)?);
    }
    Ok(out)
}

/// The adversarial spec: `x_i = e_i` and `φ_i` spectral for `(FF*)_{ii}` (tracial when zero).
pub fn adversarial_spec(f: &ModuleOperator) -> Result<PseudoMetricSpec> {
    let algebra = f.algebra();
    let module = HilbertModule::new(algebra.clone(), f.target_len())?;
    let ff = f.compose(&f.adjoint())?;
    let mut states = Vec::with_capacity(f.target_len());
    for i in 0..f.target_len() {
        let g = ff.entry(i, i);
        states.push(if g.norm() > 0.0 {
            witness_state(&g)?
        } else {
            State::tracial(&algebra)
        });
    }
    let system = AdmissibleSystem::new(
        (0..f.target_len())
            .map(|i| module.basis(i))
            .collect::<Result<Vec<_>>>()?,
    )?;
    PseudoMetricSpec::new(0, system, states)
}

/// Which family a random admissible system is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    /// `x_i = e_{c_i}·a_i` on distinct coordinates with `‖a_i‖ ≤ 1`.
    DisjointCoordinates,
    /// General elements rescaled so that `‖Σθ_{x_i,x_i}‖ < 1`.
    FrameNormalized,
}

/// A random admissible spec on `A^d` with `id` keying its stream.
pub fn random_spec(
    algebra: &CStarAlgebra,
    d: usize,
    id: usize,
    seed: u64,
    window: usize,
    purpose: Purpose,
) -> Result<PseudoMetricSpec> {
    let rng = &mut rng_for(seed, purpose, id as u64);
    let kind = if id % 2 == 1 {
        SystemKind::DisjointCoordinates
    } else {
        SystemKind::FrameNormalized
    };
    random_spec_of_kind(algebra, d, id, kind, window, rng)
}

pub fn random_spec_of_kind(
    algebra: &CStarAlgebra,
    d: usize,
    id: usize,
    kind: SystemKind,
    window: usize,
    rng: &mut impl Rng,
) -> Result<PseudoMetricSpec> {
    let span = d.min(window.max(1));
    let module = HilbertModule::new(algebra.clone(), d)?;
    let elements = match kind {
        SystemKind::DisjointCoordinates => {
            let m = rng.random_range(1..=8usize.min(span));
            let coords = sample_indices(rng, span, m).into_vec();
            coords
                .iter()
                .map(|&c| {
                    let a = random_element(algebra, rng);
                    let target = 0.5 + 0.5 * rng.random::<f64>();
                    module.basis(c)?.right_mul(&a.scale_real(target / a.norm()))
                })
                .collect::<Result<Vec<_>>>()?
        }
        SystemKind::FrameNormalized => {
            let m = rng.random_range(1..=8usize);
            let raw = (0..m)
                .map(|_| {
                    let width = rng.random_range(1..=4usize.min(span));
                    let coords = sample_indices(rng, span, width).into_vec();
                    let mut entries = vec![algebra.zero(); span];
                    for &c in &coords {
                        entries[c] = random_element(algebra, rng);
                    }
                    ModuleElement::from_entries(entries)
                })
                .collect::<Result<Vec<_>>>()?;
            // Normalized on the window so the scale does not depend on d.
            let frame = ThetaSum::new(raw.iter().map(|x| (x.clone(), x.clone())).collect())?
                .to_operator()?;
            let s = 0.999 / frame.op_norm().sqrt();
            raw.iter()
                .map(|x| {
                    let x = x.scale_real(s);
                    if span < d {
                        x.extend(d)
                    } else {
                        Ok(x)
                    }
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let states = (0..elements.len())
        .map(|_| random_state(algebra, rng))
        .collect();
    PseudoMetricSpec::new(id, AdmissibleSystem::new(elements)?, states)
}

/// Spec `0` is adversarial for `f`; specs `1..count` are random admissible systems.
pub fn spec_battery(
    f: &ModuleOperator,
    count: usize,
    seed: u64,
    window: usize,
) -> Result<Vec<PseudoMetricSpec>> {
    let algebra = f.algebra();
    let mut specs = Vec::with_capacity(count);
    if count > 0 {
        specs.push(adversarial_spec(f)?);
    }
    for id in 1..count {
        specs.push(random_spec(
            &algebra,
            f.target_len(),
            id,
            seed,
            window,
            Purpose::Spec,
        )?);
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2c() -> CStarAlgebra {
        CStarAlgebra::new(vec![2, 1]).unwrap()
    }

    #[test]
    fn sample_is_in_the_unit_ball_and_ladder_consistent() {
        let a = m2c();
        let cfg = SampleConfig {
            random_points: 20,
            ..SampleConfig::default()
        };
        let small = ball_sample(&a, 8, 5, &cfg).unwrap();
        let large = ball_sample(&a, 32, 5, &cfg).unwrap();
        assert_eq!(small.len(), 20 + 16);
        assert!(large.iter().all(|x| x.norm() <= 1.0 + 1e-12));
        for (s, l) in small[..20].iter().zip(&large[..20]) {
            assert!(l.truncate(8).unwrap().max_abs_diff(s) < 1e-15);
        }
        let again = ball_sample(&a, 8, 5, &cfg).unwrap();
        assert_eq!(again, small);
        assert_ne!(ball_sample(&a, 8, 6, &cfg).unwrap(), small);
    }

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = rng_for(1, Purpose::Extreme, 0);
        let u = random_unitary(&m2c(), &mut rng);
        assert!(u.mul(&u.adjoint()).unwrap().max_abs_diff(&m2c().unit()) < 1e-12);
    }

    #[test]
    fn random_specs_are_admissible() {
        let a = m2c();
        let cfg = SampleConfig {
            random_points: 30,
            ..SampleConfig::default()
        };
        let probes = ball_sample(&a, 12, 3, &cfg).unwrap();
        for id in 1..12 {
            let spec = random_spec(&a, 12, id, 3, 16, Purpose::Spec).unwrap();
            let r = spec.check_admissible(&probes, 1e-9).unwrap();
            assert!(r.ok, "spec {id}: {}", r.worst_violation);
        }
    }

    #[test]
    fn battery_is_stable_across_lengths_beyond_the_window() {
        let a = m2c();
        let f16 = ModuleOperator::identity(&a, 16);
        let f32 = ModuleOperator::identity(&a, 32);
        let b16 = spec_battery(&f16, 6, 0, 16).unwrap();
        let b32 = spec_battery(&f32, 6, 0, 16).unwrap();
        for (s, l) in b16.iter().zip(&b32).skip(1) {
            assert_eq!(s.states(), l.states());
            for (x, y) in s.system().elements().iter().zip(l.system().elements()) {
                assert!(y.truncate(16).unwrap().max_abs_diff(x) == 0.0);
            }
        }
        assert_eq!(b32[0].len(), 32);
    }
}
