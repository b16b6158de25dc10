use nalgebra::DMatrix;

use super::{bernstein_mass, BernsteinEvaluator};
use crate::error::{Error, Result};
use crate::quadrature::SimplexRule;
use crate::scalar::Real;
use crate::sparse::{OpCounter, SparseRowOperator};
use crate::tensor_index::{check_degree, index_of, TetLattice};

/// The four barycentric derivative operators `D^0..D^3`.
///
/// Row `α` of `D^i` has one slot per `j`, holding value `α_j` at column
/// `α + e_i - e_j`. The values depend only on `α` and `j`, so a single
/// `N_p × 4` values array serves all four operators. Slots with `α_j = 0`
/// are padding (column 0, value 0).
#[derive(Clone, Debug)]
pub struct BernsteinDerivativeSet<T = f64> {
    degree: usize,
    values: Vec<T>,
    cols: [Vec<u32>; 4],
}

/// Builds `D^0..D^3` for degree `N`.
pub fn barycentric_derivatives(degree: usize) -> Result<BernsteinDerivativeSet> {
    check_degree(degree)?;
    let lattice = TetLattice::new(degree);
    let np = lattice.len();
    let mut values = vec![0.0; 4 * np];
    let mut cols: [Vec<u32>; 4] = std::array::from_fn(|_| vec![0u32; 4 * np]);
    for (row, alpha) in lattice.iter().enumerate() {
        for j in 0..4 {
            if alpha[j] == 0 {
                continue;
            }
            values[4 * row + j] = alpha[j] as f64;
            for (i, col) in cols.iter_mut().enumerate() {
                let target = alpha.shifted(i, j).expect("α_j > 0");
                col[4 * row + j] = index_of(&target) as u32;
            }
        }
    }
    Ok(BernsteinDerivativeSet { degree, values, cols })
}

impl BernsteinDerivativeSet<f64> {
    /// `D^i` as a standalone operator.
    pub fn operator(&self, i: usize) -> SparseRowOperator {
        let np = self.len();
        SparseRowOperator::from_parts(np, np, 4, self.values.clone(), self.cols[i].clone())
    }
}

impl<T: Real> BernsteinDerivativeSet<T> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `N_p`.
    pub fn len(&self) -> usize {
        self.values.len() / 4
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The shared `N_p × 4` values array.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn cols(&self, i: usize) -> &[u32] {
        &self.cols[i]
    }

    pub fn cast<U: Real>(&self) -> BernsteinDerivativeSet<U> {
        BernsteinDerivativeSet {
            degree: self.degree,
            values: self.values.iter().map(|v| U::from_f64(v.to_f64())).collect(),
            cols: self.cols.clone(),
        }
    }

    /// `y += D^i x`.
    #[inline]
    pub fn apply_add(&self, i: usize, x: &[T], y: &mut [T], counter: &mut impl OpCounter) {
        let cols = &self.cols[i];
        for (row, yr) in y.iter_mut().enumerate() {
            let mut acc = T::ZERO;
            for s in 4 * row..4 * row + 4 {
                acc += self.values[s] * x[cols[s] as usize];
            }
            *yr += acc;
        }
        counter.add(4 * y.len() as u64);
    }

    /// Overwrites `out[i]` with `D^i x` for all four operators in one pass.
    #[inline]
    pub fn apply_all(&self, x: &[T], out: [&mut [T]; 4], counter: &mut impl OpCounter) {
        let [o0, o1, o2, o3] = out;
        let np = self.len();
        for row in 0..np {
            let mut acc = [T::ZERO; 4];
            for s in 4 * row..4 * row + 4 {
                let v = self.values[s];
                acc[0] += v * x[self.cols[0][s] as usize];
                acc[1] += v * x[self.cols[1][s] as usize];
                acc[2] += v * x[self.cols[2][s] as usize];
                acc[3] += v * x[self.cols[3][s] as usize];
            }
            o0[row] = acc[0];
            o1[row] = acc[1];
            o2[row] = acc[2];
            o3[row] = acc[3];
        }
        counter.add(16 * np as u64);
    }
}

/// Quadrature-built `D^i = M⁻¹ ∫ B_α ∂_{λ_i} B_β`, independent of the
/// sparse construction.
pub fn dense_derivative_oracle(degree: usize, i: usize) -> Result<DMatrix<f64>> {
    check_degree(degree)?;
    if i > 3 {
        return Err(Error::InvalidFace(i));
    }
    let m = bernstein_mass(degree, 3)?;
    let rule = SimplexRule::new(3, 2 * degree)?;
    let lam = rule.barycentric();
    let lat = TetLattice::new(degree);
    let lat_lo = TetLattice::new(degree - 1);
    let v = BernsteinEvaluator::new(degree, 3)?.matrix(&lam);
    let vl = BernsteinEvaluator::new(degree - 1, 3)?.matrix(&lam);
    // ∂B^N_β/∂λ_i = N B^{N-1}_{β - e_i}
    let dv = DMatrix::from_fn(lam.len(), lat.len(), |q, b| {
        let beta = lat.get(b);
        if beta[i] == 0 {
            return 0.0;
        }
        let mut a = beta;
        a.0[i] -= 1;
        degree as f64 * vl[(q, lat_lo.position(&a).expect("degree N-1 index"))]
    });
    let mut wv = v;
    for (q, w) in rule.weights.iter().enumerate() {
        wv.row_mut(q).scale_mut(*w);
    }
    let s = wv.transpose() * dv;
    let chol = m.cholesky().ok_or(Error::Singular("bernstein mass"))?;
    Ok(chol.solve(&s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::MaddCount;
    use crate::tensor_index::MultiIndex;

    #[test]
    fn lemma_column_example() {
        let d = barycentric_derivatives(2).unwrap();
        let d0 = d.operator(0).to_dense();
        let lat = TetLattice::new(2);
        let pos = |a: [usize; 4]| lat.position(&MultiIndex(a)).unwrap();
        let col = pos([1, 1, 0, 0]);
        let mut want = vec![0.0; lat.len()];
        want[pos([1, 1, 0, 0])] = 1.0;
        want[pos([0, 2, 0, 0])] = 2.0;
        want[pos([0, 1, 1, 0])] = 1.0;
        want[pos([0, 1, 0, 1])] = 1.0;
        for r in 0..lat.len() {
            assert_eq!(d0[(r, col)], want[r], "row {r}");
        }
    }

    #[test]
    fn constants_scale_by_degree() {
        for n in 1..=9 {
            let d = barycentric_derivatives(n).unwrap();
            let ones = vec![1.0; d.len()];
            for i in 0..4 {
                let op = d.operator(i);
                assert!(op.max_row_nnz() <= 4);
                let mut y = vec![0.0; d.len()];
                op.apply(&ones, &mut y).unwrap();
                assert!(y.iter().all(|&v| (v - n as f64).abs() < 1e-13));
                let dense = op.to_dense();
                for c in 0..d.len() {
                    assert!(dense.column(c).iter().filter(|v| **v != 0.0).count() <= 4);
                }
            }
        }
    }

    #[test]
    fn matches_quadrature_oracle() {
        for n in 1..=6 {
            let d = barycentric_derivatives(n).unwrap();
            for i in 0..4 {
                let oracle = dense_derivative_oracle(n, i).unwrap();
                let got = d.operator(i).to_dense();
                let err = (&oracle - &got).abs().max() / got.abs().max();
                assert!(err < 1e-10, "N {n} D{i}: {err}");
            }
        }
    }

    #[test]
    fn apply_all_matches_single_and_counts() {
        let d = barycentric_derivatives(5).unwrap();
        let x: Vec<f64> = (0..d.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut outs = vec![vec![0.0; d.len()]; 4];
        let mut c = MaddCount::default();
        {
            let [a, b, cc, dd] = &mut outs[..] else {
                unreachable!()
            };
            d.apply_all(&x, [a, b, cc, dd], &mut c);
        }
        assert_eq!(c.0, 16 * d.len() as u64);
        for i in 0..4 {
            let mut y = vec![0.0; d.len()];
            d.apply_add(i, &x, &mut y, &mut ());
            assert_eq!(y, outs[i]);
        }
    }
}
