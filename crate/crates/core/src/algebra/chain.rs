use super::{AlgebraElement, CStarAlgebra};
use crate::{Error, Result};

const CHAIN_TOL: f64 = 1e-12;

/// Increasing commuting orthogonal projections `ω_1 ≤ ω_2 ≤ …` standing in for an
/// approximate unit: `ω_j ω_i = ω_i` and `(ω_j − ω_i)² ≤ ω_j − ω_i` for `j ≥ i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionChain {
    projections: Vec<AlgebraElement>,
}

impl ProjectionChain {
    pub fn new(projections: Vec<AlgebraElement>) -> Result<Self> {
        let first = projections
            .first()
            .ok_or_else(|| Error::invalid("projection chain is empty"))?;
        for (k, p) in projections.iter().enumerate() {
            if !p.same_algebra(first) {
                return Err(Error::structural("chain mixes algebras"));
            }
            let sq = p.mul(p)?;
            if !p.is_hermitian(CHAIN_TOL) || sq.max_abs_diff(p) > CHAIN_TOL {
                return Err(Error::invalid(format!(
                    "chain entry {k} is not an orthogonal projection"
                )));
            }
        }
        for i in 0..projections.len() {
            for j in i..projections.len() {
                let (wi, wj) = (&projections[i], &projections[j]);
                if wj.mul(wi)?.max_abs_diff(wi) > CHAIN_TOL {
                    return Err(Error::invalid(format!("ω_{j} ω_{i} ≠ ω_{i}")));
                }
                let diff = wj.sub(wi)?;
                let gap = diff.sub(&diff.mul(&diff)?)?;
                if !gap.is_positive(CHAIN_TOL) {
                    return Err(Error::invalid(format!("(ω_{j} − ω_{i})² ≰ ω_{j} − ω_{i}")));
                }
            }
        }
        Ok(Self { projections })
    }

    /// Chain of diagonal projections; `ranks[k][b]` is the rank of step `k` in block `b`
    /// (the first `ranks[k][b]` diagonal entries are 1).
    pub fn diagonal(algebra: &CStarAlgebra, ranks: &[Vec<usize>]) -> Result<Self> {
        let projections = ranks
            .iter()
            .map(|step| {
                if step.len() != algebra.num_blocks() {
                    return Err(Error::structural("one rank per block expected"));
                }
                let diags = step
                    .iter()
                    .zip(algebra.block_dims())
                    .map(|(&r, &n)| {
                        if r > n {
                            return Err(Error::invalid(format!("rank {r} exceeds block size {n}")));
                        }
                        Ok((0..n).map(|i| if i < r { 1.0 } else { 0.0 }).collect())
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()?;
                algebra.diagonal(&diags)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(projections)
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn projections(&self) -> &[AlgebraElement] {
        &self.projections
    }

    pub fn algebra(&self) -> CStarAlgebra {
        self.projections[0].algebra()
    }

    /// `ω_{i(j+1)} − ω_{i(j)}` for consecutive (0-based, strictly increasing) indices.
    pub fn differences(&self, indices: &[usize]) -> Result<Vec<AlgebraElement>> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("chain indices must be strictly increasing"));
        }
        if let Some(&last) = indices.last() {
            if last >= self.len() {
                return Err(Error::domain(format!(
                    "index {last} outside chain of length {}",
                    self.len()
                )));
            }
        }
        indices
            .windows(2)
            .map(|w| self.projections[w[1]].sub(&self.projections[w[0]]))
            .collect()
    }
}

pub fn chain_differences(
    chain: &ProjectionChain,
    indices: &[usize],
) -> Result<Vec<AlgebraElement>> {
    chain.differences(indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_p_one() -> (CStarAlgebra, ProjectionChain) {
        let a = CStarAlgebra::new(vec![2, 1]).unwrap();
        let chain = ProjectionChain::diagonal(&a, &[vec![0, 0], vec![1, 0], vec![2, 1]]).unwrap();
        (a, chain)
    }

    #[test]
    fn three_step_chain_differences() {
        let (a, chain) = zero_p_one();
        let d = chain.differences(&[0, 1, 2]).unwrap();
        let p = a.diagonal(&[vec![1.0, 0.0], vec![0.0]]).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d[0].max_abs_diff(&p) < 1e-15);
        assert!(d[1].max_abs_diff(&a.unit().sub(&p).unwrap()) < 1e-15);
    }

    #[test]
    fn differences_are_projections_and_telescope() {
        let a = CStarAlgebra::new(vec![4]).unwrap();
        let chain =
            ProjectionChain::diagonal(&a, &[vec![0], vec![1], vec![2], vec![3], vec![4]]).unwrap();
        let idx = [0, 2, 3, 4];
        let d = chain.differences(&idx).unwrap();
        let mut sum = a.zero();
        for x in &d {
            assert!(x.is_hermitian(1e-12));
            assert!(x.mul(x).unwrap().max_abs_diff(x) < 1e-12);
            assert!(x.norm() <= 1.0 + 1e-12);
            sum = sum.add(x).unwrap();
        }
        let expected = chain.projections()[4].sub(&chain.projections()[0]).unwrap();
        assert!(sum.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn rejects_bad_indices_and_non_nested_chains() {
        let (a, chain) = zero_p_one();
        assert!(matches!(chain.differences(&[1, 1]), Err(Error::Domain(_))));
        assert!(matches!(chain.differences(&[2, 1]), Err(Error::Domain(_))));
        assert!(matches!(chain.differences(&[0, 5]), Err(Error::Domain(_))));
        // e_11 then e_22 is not increasing
        let p = a.diagonal(&[vec![1.0, 0.0], vec![0.0]]).unwrap();
        let q = a.diagonal(&[vec![0.0, 1.0], vec![0.0]]).unwrap();
        assert!(ProjectionChain::new(vec![p, q]).is_err());
        assert!(ProjectionChain::new(vec![a.unit().scale_real(0.5)]).is_err());
    }
}
