use serde::{Deserialize, Serialize};

use super::{truncation, ModuleOperator};
use crate::hilbert::{HilbertModule, ModuleElement};
use crate::{Error, Result};

const PROJECTION_TOL: f64 = 1e-12;

/// `θ_{x,y}: z ↦ x⟨y,z⟩`, with entries `x_i (y_j)*`.
pub fn theta(x: &ModuleElement, y: &ModuleElement) -> Result<ModuleOperator> {
    if x.block_dims() != y.block_dims() {
        return Err(Error::structural("θ legs over different algebras"));
    }
    Ok(ModuleOperator::from_blocks_unchecked(
        x.len(),
        y.len(),
        x.blocks()
            .iter()
            .zip(y.blocks())
            .map(|(xb, yb)| xb * yb.adjoint())
            .collect(),
    ))
}

/// A finite sum `Σ_k θ_{x_k, y_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSum {
    pub pairs: Vec<(ModuleElement, ModuleElement)>,
}

impl ThetaSum {
    pub fn new(pairs: Vec<(ModuleElement, ModuleElement)>) -> Result<Self> {
        let (x0, y0) = pairs
            .first()
            .ok_or_else(|| Error::invalid("θ-sum needs at least one pair"))?;
        if pairs
            .iter()
            .any(|(x, y)| !x.same_module(x0) || !y.same_module(y0))
        {
            return Err(Error::structural("θ-sum legs live in different modules"));
        }
        if x0.block_dims() != y0.block_dims() {
            return Err(Error::structural("θ legs over different algebras"));
        }
        Ok(Self { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_operator(&self) -> Result<ModuleOperator> {
        let (x0, y0) = &self.pairs[0];
        let mut acc = ModuleOperator::zero(&x0.algebra(), x0.len(), y0.len());
        for (x, y) in &self.pairs {
            acc = acc.add(&theta(x, y)?)?;
        }
        Ok(acc)
    }

    /// `T ∘ Σθ_{x,y} = Σθ_{Tx,y}`.
    pub fn left_compose(&self, t: &ModuleOperator) -> Result<Self> {
        Self::new(
            self.pairs
                .iter()
                .map(|(x, y)| Ok((t.apply(x)?, y.clone())))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `Σθ_{x,y} ∘ S = Σθ_{x,S*y}`.
    pub fn right_compose(&self, s: &ModuleOperator) -> Result<Self> {
        let s_adj = s.adjoint();
        Self::new(
            self.pairs
                .iter()
                .map(|(x, y)| Ok((x.clone(), s_adj.apply(y)?)))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// `Q_D F = Σ_{i<D} θ_{e_i, F*(e_i)}`.
pub fn theta_decomposition(f: &ModuleOperator, d: usize) -> Result<ThetaSum> {
    let target = HilbertModule::new(f.algebra(), f.target_len())?;
    decompose(f, d, &target)
}

/// As [`theta_decomposition`], with first legs `p_i e_i` inside the constrained target.
///
/// Requires the image of `F` to lie in the target submodule, so that
/// `θ_{p_i e_i, F*(e_i)} = θ_{e_i, F*(e_i)}`.
pub fn theta_decomposition_relative(
    f: &ModuleOperator,
    d: usize,
    target: &HilbertModule,
) -> Result<ThetaSum> {
    if target.len() != f.target_len() || target.algebra().block_dims() != f.block_dims().as_slice()
    {
        return Err(Error::structural(
            "target module does not match the operator",
        ));
    }
    if let Some(ps) = target.constraint() {
        for j in 0..f.source_len() {
            for (i, p) in ps.iter().enumerate() {
                let e = f.entry(i, j);
                if p.mul(&e)?.max_abs_diff(&e) > crate::hilbert::MEMBERSHIP_TOL {
                    return Err(Error::domain(
                        "operator image leaves the constrained submodule",
                    ));
                }
            }
        }
    }
    decompose(f, d, target)
}

fn decompose(f: &ModuleOperator, d: usize, target: &HilbertModule) -> Result<ThetaSum> {
    if d == 0 || d > f.target_len() {
        return Err(Error::domain(format!(
            "decomposition depth {d} outside 1..={}",
            f.target_len()
        )));
    }
    let f_adj = f.adjoint();
    let pairs = (0..d)
        .map(|i| {
            let e = target.basis(i)?;
            let y = f_adj.apply(&e)?;
            Ok((target.project(&e)?, y))
        })
        .collect::<Result<Vec<_>>>()?;
    ThetaSum::new(pairs)
}

/// `(p₁F, p₂F)` for complementary orthogonal projections `p₁ + p₂ = 1` on the target.
pub fn split_by_projection(
    f: &ModuleOperator,
    p1: &ModuleOperator,
    p2: &ModuleOperator,
) -> Result<(ModuleOperator, ModuleOperator)> {
    for (name, p) in [("p1", p1), ("p2", p2)] {
        if p.source_len() != f.target_len() || p.target_len() != f.target_len() {
            return Err(Error::structural(format!(
                "{name} does not act on the target of F"
            )));
        }
        if p.adjoint().max_abs_diff(p) > PROJECTION_TOL
            || p.compose(p)?.max_abs_diff(p) > PROJECTION_TOL
        {
            return Err(Error::invalid(format!(
                "{name} is not an orthogonal projection"
            )));
        }
    }
    let id = ModuleOperator::identity(&f.algebra(), f.target_len());
    if p1.add(p2)?.max_abs_diff(&id) > PROJECTION_TOL {
        return Err(Error::invalid("projections are not complementary"));
    }
    Ok((p1.compose(f)?, p2.compose(f)?))
}

/// `Q_D` and `1 − Q_D` on the target of `f`.
pub fn truncation_pair(f: &ModuleOperator, d: usize) -> Result<(ModuleOperator, ModuleOperator)> {
    let algebra = f.algebra();
    let q = truncation(&algebra, d, f.target_len())?;
    let rest = ModuleOperator::identity(&algebra, f.target_len()).sub(&q)?;
    Ok((q, rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::CStarAlgebra;
    use crate::C64;

    fn m2c() -> CStarAlgebra {
        CStarAlgebra::new(vec![2, 1]).unwrap()
    }

    fn elem(a: &CStarAlgebra, len: usize, s: f64) -> ModuleElement {
        ModuleElement::from_entries(
            (0..len)
                .map(|i| {
                    a.diagonal(&[vec![s + i as f64, 1.0 - s], vec![0.3 * i as f64]])
                        .unwrap()
                        .scale(C64::new(0.4, s))
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn theta_applies_as_x_times_inner_product() {
        let a = m2c();
        let x = elem(&a, 3, 0.5);
        let y = elem(&a, 2, -1.0);
        let z = elem(&a, 2, 0.25);
        let t = theta(&x, &y).unwrap();
        let expected = x.right_mul(&y.inner(&z).unwrap()).unwrap();
        assert!(t.apply(&z).unwrap().max_abs_diff(&expected) < 1e-12);
        assert!(theta(&x, &ModuleElement::zeros(&a, 2)).unwrap().op_norm() == 0.0);
        assert!(t.adjoint().max_abs_diff(&theta(&y, &x).unwrap()) < 1e-12);
        assert!(t.op_norm() <= x.norm() * y.norm() + 1e-9);
    }

    #[test]
    fn decomposition_of_rank_one_reproduces_it() {
        let a = m2c();
        let module = HilbertModule::new(a.clone(), 3).unwrap();
        let y = elem(&a, 3, 0.7);
        let f = theta(&module.basis(0).unwrap(), &y).unwrap();
        for d in 1..=3 {
            let k = theta_decomposition(&f, d).unwrap().to_operator().unwrap();
            assert!(k.max_abs_diff(&f) < 1e-12);
        }
    }

    #[test]
    fn relative_decomposition_keeps_first_legs_in_the_submodule() {
        let a = m2c();
        let p = a.diagonal(&[vec![1.0, 0.0], vec![0.0]]).unwrap();
        let target = HilbertModule::constrained(a.clone(), vec![p.clone(); 3]).unwrap();
        let g = ModuleOperator::from_entries(vec![
            vec![a.unit(), a.unit()],
            vec![a.unit(), a.zero()],
            vec![a.zero(), a.unit()],
        ])
        .unwrap();
        let pf = ModuleOperator::diagonal(&[p.clone(), p.clone(), p.clone()])
            .unwrap()
            .compose(&g)
            .unwrap();
        let dec = theta_decomposition_relative(&pf, 3, &target).unwrap();
        assert!(dec.pairs.iter().all(|(x, _)| target.contains(x)));
        assert!(dec.to_operator().unwrap().max_abs_diff(&pf) < 1e-12);
        assert!(theta_decomposition_relative(&g, 3, &target).is_err());
    }

    #[test]
    fn split_reconstructs() {
        let a = m2c();
        let x = elem(&a, 4, 0.1);
        let y = elem(&a, 4, 0.9);
        let f = theta(&x, &y).unwrap();
        let (q, rest) = truncation_pair(&f, 2).unwrap();
        let (f1, f2) = split_by_projection(&f, &q, &rest).unwrap();
        let back = q
            .adjoint()
            .compose(&f1)
            .unwrap()
            .add(&rest.adjoint().compose(&f2).unwrap())
            .unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12);
        let id = ModuleOperator::identity(&a, 4);
        let zero = ModuleOperator::zero(&a, 4, 4);
        let (g1, g2) = split_by_projection(&f, &id, &zero).unwrap();
        assert_eq!(g1, f);
        assert_eq!(g2.op_norm(), 0.0);
        assert!(split_by_projection(&f, &q, &q).is_err());
    }

    #[test]
    fn composition_rules() {
        let a = m2c();
        let x = elem(&a, 3, 0.2);
        let y = elem(&a, 3, -0.4);
        let k = ThetaSum::new(vec![(x.clone(), y.clone())]).unwrap();
        let t = theta(&elem(&a, 3, 1.0), &elem(&a, 3, 0.6))
            .unwrap()
            .add(&ModuleOperator::identity(&a, 3))
            .unwrap();
        let lhs = t.compose(&k.to_operator().unwrap()).unwrap();
        assert!(lhs.max_abs_diff(&k.left_compose(&t).unwrap().to_operator().unwrap()) < 1e-12);
        let rhs = k.to_operator().unwrap().compose(&t).unwrap();
        assert!(rhs.max_abs_diff(&k.right_compose(&t).unwrap().to_operator().unwrap()) < 1e-12);
    }
}
