//! Bernstein-Bezier reference operators: evaluation, mass matrices, degree
//! elevation and reduction, sparse barycentric derivatives and the
//! factorised lift.
//!
//! Coefficients are stored in the canonical order of [`crate::tensor_index`].
//! The simplex of dimension `d` is the bi-unit reference simplex, so its
//! measure is 2, 2 and 4/3 for `d = 1, 2, 3`.

mod derivative;
mod lift;
mod modal_transform;

pub use derivative::{barycentric_derivatives, dense_derivative_oracle, BernsteinDerivativeSet};
pub use lift::{
    apply_lift_factorized, apply_lift_optimal, build_el, build_l0, dense_lift, dense_lift_oracle,
    lift_scalings, LiftFactorization, LiftScratch,
};
pub use modal_transform::{modal_transform, MAX_MODAL_DEGREE};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sparse::SparseRowOperator;
use crate::tensor_index::{binomial, lattice_size, lattice_tuples, multinomial, rank_of};
use crate::MAX_DEGREE;

/// Measure of the bi-unit reference simplex.
pub fn simplex_volume(dim: usize) -> Result<f64> {
    match dim {
        1 | 2 => Ok(2.0),
        3 => Ok(4.0 / 3.0),
        d => Err(Error::InvalidDimension(d)),
    }
}

fn check_dim(dim: usize) -> Result<()> {
    simplex_volume(dim).map(|_| ())
}

/// Degrees from 0 are allowed here because reductions cascade down to the
/// constants.
fn check_degree0(degree: usize) -> Result<()> {
    if degree > MAX_DEGREE {
        Err(Error::DegreeOutOfRange(degree))
    } else {
        Ok(())
    }
}

/// `B^N_α(λ) = C^N_α Π λ_m^{α_m}`.
pub fn eval_bernstein(degree: usize, alpha: &[usize], lambda: &[f64]) -> Result<f64> {
    if alpha.iter().sum::<usize>() != degree {
        return Err(Error::DegreeMismatch {
            alpha: alpha.to_vec(),
            degree,
        });
    }
    if alpha.len() != lambda.len() {
        return Err(Error::SizeMismatch {
            expected: alpha.len(),
            got: lambda.len(),
        });
    }
    let mono: f64 = alpha
        .iter()
        .zip(lambda)
        .map(|(&a, &l)| l.powi(a as i32))
        .product();
    Ok(multinomial(alpha) as f64 * mono)
}

/// Evaluates every degree-`N` Bernstein polynomial on a `d`-simplex at once.
#[derive(Clone, Debug)]
pub struct BernsteinEvaluator {
    degree: usize,
    dim: usize,
    tuples: Vec<Vec<usize>>,
    coeffs: Vec<f64>,
}

impl BernsteinEvaluator {
    pub fn new(degree: usize, dim: usize) -> Result<Self> {
        check_degree0(degree)?;
        check_dim(dim)?;
        let tuples = lattice_tuples(degree, dim + 1);
        let coeffs = tuples.iter().map(|a| multinomial(a) as f64).collect();
        Ok(Self {
            degree,
            dim,
            tuples,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Values of all basis polynomials at barycentric point `lambda`
    /// (`dim + 1` components).
    pub fn eval(&self, lambda: &[f64]) -> Vec<f64> {
        let n = self.degree as i32;
        let powers: Vec<Vec<f64>> = lambda[..=self.dim]
            .iter()
            .map(|&l| (0..=n).map(|k| l.powi(k)).collect())
            .collect();
        self.tuples
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| a.iter().enumerate().fold(*c, |acc, (m, &e)| acc * powers[m][e]))
            .collect()
    }

    /// Matrix `V[q, α] = B_α(λ_q)`.
    pub fn matrix(&self, lambdas: &[[f64; 4]]) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(lambdas.len(), self.len());
        for (q, l) in lambdas.iter().enumerate() {
            for (a, b) in self.eval(l).into_iter().enumerate() {
                v[(q, a)] = b;
            }
        }
        v
    }
}

/// Closed-form Bernstein mass matrix on the reference `d`-simplex:
/// `M_{αβ} = |T| C^N_α C^N_β / C^{2N}_{α+β} / C(2N+d, d)`.
pub fn bernstein_mass(degree: usize, dim: usize) -> Result<DMatrix<f64>> {
    check_degree0(degree)?;
    let vol = simplex_volume(dim)?;
    let tuples = lattice_tuples(degree, dim + 1);
    let scale = vol / binomial(2 * degree + dim, dim) as f64;
    let cn: Vec<f64> = tuples.iter().map(|a| multinomial(a) as f64).collect();
    let n = tuples.len();
    let mut m = DMatrix::zeros(n, n);
    let mut sum = vec![0usize; dim + 1];
    for i in 0..n {
        for j in i..n {
            for (s, (a, b)) in sum.iter_mut().zip(tuples[i].iter().zip(&tuples[j])) {
                *s = a + b;
            }
            let v = scale * cn[i] * cn[j] / multinomial(&sum) as f64;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// Mass matrix of the reference triangle (area 2) that every face shares.
pub fn face_mass(degree: usize) -> Result<DMatrix<f64>> {
    bernstein_mass(degree, 2)
}

/// Distinct eigenvalue `λ^N_i = |T| (N!)² d! / ((N+i+d)! (N-i)!)` of the
/// degree-`N` Bernstein mass matrix, belonging to the modes of degree `i`.
pub fn mass_eigenvalue(degree: usize, i: usize, dim: usize) -> Result<f64> {
    let vol = simplex_volume(dim)?;
    if i > degree {
        return Err(Error::DegreeOutOfRange(i));
    }
    let f = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    Ok(vol * f(degree) * f(degree) * f(dim) / (f(degree + i + dim) * f(degree - i)))
}

/// Number of degree-exactly-`i` modes in `d` dimensions, the multiplicity
/// of `λ^N_i`.
pub fn mode_multiplicity(i: usize, dim: usize) -> usize {
    lattice_size(i, dim + 1) - if i == 0 { 0 } else { lattice_size(i - 1, dim + 1) }
}

/// Elevation `E^m_{m-1}`, mapping degree `m-1` coefficients to degree `m`.
/// Row `β` holds `β_j / m` at column `β - e_j`.
pub fn degree_elevation(m: usize, dim: usize) -> Result<SparseRowOperator> {
    check_dim(dim)?;
    if m == 0 {
        return Err(Error::DegreeOutOfRange(0));
    }
    check_degree0(m)?;
    let rows_in = lattice_tuples(m, dim + 1);
    let n_cols = lattice_size(m - 1, dim + 1);
    let mf = m as f64;
    let rows: Vec<Vec<(usize, f64)>> = rows_in
        .iter()
        .map(|beta| {
            (0..=dim)
                .filter(|&j| beta[j] > 0)
                .map(|j| {
                    let mut a = beta.clone();
                    a[j] -= 1;
                    (rank_of(&a), beta[j] as f64 / mf)
                })
                .collect()
        })
        .collect();
    Ok(SparseRowOperator::from_rows(n_cols, &rows))
}

/// One-degree reduction `(E^m_{m-1})ᵀ`, mapping degree `m` coefficients to
/// degree `m-1`. Row `γ` holds `(γ_j + 1) / m` at column `γ + e_j`.
pub fn degree_reduction(m: usize, dim: usize) -> Result<SparseRowOperator> {
    check_dim(dim)?;
    if m == 0 {
        return Err(Error::DegreeOutOfRange(0));
    }
    check_degree0(m)?;
    let rows_in = lattice_tuples(m - 1, dim + 1);
    let n_cols = lattice_size(m, dim + 1);
    let mf = m as f64;
    let rows: Vec<Vec<(usize, f64)>> = rows_in
        .iter()
        .map(|gamma| {
            (0..=dim)
                .map(|j| {
                    let mut b = gamma.clone();
                    b[j] += 1;
                    (rank_of(&b), (gamma[j] + 1) as f64 / mf)
                })
                .collect()
        })
        .collect();
    Ok(SparseRowOperator::from_rows(n_cols, &rows))
}

/// Dense `E^N_{N-k}` as a product of one-degree elevations.
pub fn elevation_dense(degree: usize, k: usize, dim: usize) -> Result<DMatrix<f64>> {
    if k > degree {
        return Err(Error::DegreeOutOfRange(k));
    }
    let mut e = DMatrix::identity(lattice_size(degree, dim + 1), lattice_size(degree, dim + 1));
    for m in (degree - k + 1..=degree).rev() {
        e *= degree_elevation(m, dim)?.to_dense();
    }
    Ok(e)
}
