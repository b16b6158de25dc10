use nalgebra::DMatrix;

use super::{bernstein_mass, BernsteinEvaluator};
use crate::error::{Error, Result};
use crate::modal::modal_basis_eval;
use crate::quadrature::SimplexRule;

/// Highest degree for which `T_N` is built; beyond it the inverse loses
/// too many digits to be a useful oracle.
pub const MAX_MODAL_DEGREE: usize = 12;

/// `T_N`: column `γ` holds the Bernstein coefficients of orthonormal mode
/// `L_γ` on the reference `d`-simplex. Computed by `L2` projection.
pub fn modal_transform(degree: usize, dim: usize) -> Result<DMatrix<f64>> {
    if degree > MAX_MODAL_DEGREE {
        return Err(Error::DegreeOutOfRange(degree));
    }
    let rule = SimplexRule::new(dim, 2 * degree)?;
    let vb = BernsteinEvaluator::new(degree, dim)?.matrix(&rule.barycentric());
    let vl = modal_basis_eval(degree, dim, &rule.points)?;
    let mut rhs = vl;
    for (q, w) in rule.weights.iter().enumerate() {
        rhs.row_mut(q).scale_mut(*w);
    }
    let rhs = vb.transpose() * rhs;
    let chol = bernstein_mass(degree, dim)?
        .cholesky()
        .ok_or(Error::Singular("bernstein mass"))?;
    Ok(chol.solve(&rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::{degree_reduction, elevation_dense, mass_eigenvalue};
    use crate::modal::modal_indices;

    #[test]
    fn constant_mode_has_equal_coefficients() {
        let t = modal_transform(4, 3).unwrap();
        let c0 = t[(0, 0)];
        assert!(t.column(0).iter().all(|v| (v - c0).abs() < 1e-12));
    }

    #[test]
    fn one_step_reduction_is_diagonal_in_modal_form() {
        for n in 2..=6 {
            let hi = modal_transform(n, 2).unwrap();
            let lo = modal_transform(n - 1, 2).unwrap();
            let red = degree_reduction(n, 2).unwrap().to_dense();
            let d = lo.try_inverse().unwrap() * red * hi;
            let modes = modal_indices(n, 2).unwrap();
            for r in 0..d.nrows() {
                for c in 0..d.ncols() {
                    if r == c {
                        let k = modes[r][0] + modes[r][1];
                        let want = mass_eigenvalue(n - 1, k, 2).unwrap() / mass_eigenvalue(n, k, 2).unwrap();
                        assert!((d[(r, c)] - want).abs() < 1e-8 * want, "N {n} mode {r}");
                    } else {
                        assert!(d[(r, c)].abs() < 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn elevation_then_reduction_truncates_modes() {
        let (n, i) = (5, 2);
        let t = modal_transform(n, 2).unwrap();
        let e = elevation_dense(n, i, 2).unwrap();
        let d = t.clone().try_inverse().unwrap() * &e * e.transpose() * t;
        let modes = modal_indices(n, 2).unwrap();
        for r in 0..d.nrows() {
            for c in 0..d.ncols() {
                if r != c || modes[r][0] + modes[r][1] > n - i {
                    assert!(d[(r, c)].abs() < 1e-8, "({r},{c}) = {}", d[(r, c)]);
                }
            }
        }
        assert!(modal_transform(13, 2).is_err());
    }
}
