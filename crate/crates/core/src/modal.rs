//! Orthonormal (Koornwinder-Dubiner) polynomial bases on the reference
//! segment, triangle and tetrahedron, with gradients in 3-D.
//!
//! Modes are ordered hierarchically by total degree, so the first
//! `dim P^n` modes of a degree-`N` basis are exactly the degree-`n` basis.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor_index::lattice_size;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Jacobi polynomial `P_n^{(alpha,beta)}(x)` normalised to unit `L2` norm
/// under the weight `(1-x)^alpha (1+x)^beta`.
pub fn jacobi_p(x: f64, alpha: u32, beta: u32, n: usize) -> f64 {
    let (a, b) = (alpha as f64, beta as f64);
    let gamma0 =
        2f64.powf(a + b + 1.0) / (a + b + 1.0) * factorial(alpha) * factorial(beta) / factorial(alpha + beta);
    let p0 = 1.0 / gamma0.sqrt();
    if n == 0 {
        return p0;
    }
    let gamma1 = (a + 1.0) * (b + 1.0) / (a + b + 3.0) * gamma0;
    let p1 = ((a + b + 2.0) * x / 2.0 + (a - b) / 2.0) / gamma1.sqrt();
    if n == 1 {
        return p1;
    }
    let mut aold = 2.0 / (2.0 + a + b) * ((a + 1.0) * (b + 1.0) / (a + b + 3.0)).sqrt();
    let (mut pm1, mut p) = (p0, p1);
    for i in 1..n {
        let i = i as f64;
        let h1 = 2.0 * i + a + b;
        let anew = 2.0 / (h1 + 2.0)
            * ((i + 1.0) * (i + 1.0 + a + b) * (i + 1.0 + a) * (i + 1.0 + b) / (h1 + 1.0) / (h1 + 3.0))
                .sqrt();
        let bnew = if h1 == 0.0 {
            0.0
        } else {
            -(a * a - b * b) / h1 / (h1 + 2.0)
        };
        let next = (-aold * pm1 + (x - bnew) * p) / anew;
        pm1 = p;
        p = next;
        aold = anew;
    }
    p
}

pub fn grad_jacobi_p(x: f64, alpha: u32, beta: u32, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    (nf * (nf + alpha as f64 + beta as f64 + 1.0)).sqrt() * jacobi_p(x, alpha + 1, beta + 1, n - 1)
}

/// Mode exponents `(i, j, k)` (unused trailing entries zero), ordered by
/// total degree and then lexicographically.
pub fn modal_indices(degree: usize, dim: usize) -> Result<Vec<[usize; 3]>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidDimension(dim));
    }
    let mut out = Vec::with_capacity(lattice_size(degree, dim + 1));
    for g in 0..=degree {
        match dim {
            1 => out.push([g, 0, 0]),
            2 => (0..=g).for_each(|i| out.push([i, g - i, 0])),
            _ => {
                for i in 0..=g {
                    for j in 0..=(g - i) {
                        out.push([i, j, g - i - j]);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn collapse_tet(p: [f64; 3]) -> [f64; 3] {
    let [r, s, t] = p;
    let a = if (s + t).abs() > 1e-14 {
        2.0 * (1.0 + r) / (-s - t) - 1.0
    } else {
        -1.0
    };
    let b = if (t - 1.0).abs() > 1e-14 {
        2.0 * (1.0 + s) / (1.0 - t) - 1.0
    } else {
        -1.0
    };
    [a, b, t]
}

fn collapse_tri(r: f64, s: f64) -> [f64; 2] {
    let a = if (s - 1.0).abs() > 1e-14 {
        2.0 * (1.0 + r) / (1.0 - s) - 1.0
    } else {
        -1.0
    };
    [a, s]
}

/// Value of one orthonormal mode at a reference point.
pub fn eval_mode(dim: usize, mode: [usize; 3], p: [f64; 3]) -> f64 {
    match dim {
        1 => jacobi_p(p[0], 0, 0, mode[0]),
        2 => {
            let [i, j, _] = mode;
            let [a, b] = collapse_tri(p[0], p[1]);
            std::f64::consts::SQRT_2
                * jacobi_p(a, 0, 0, i)
                * jacobi_p(b, 2 * i as u32 + 1, 0, j)
                * (1.0 - b).powi(i as i32)
        }
        _ => {
            let [i, j, k] = mode;
            let [a, b, c] = collapse_tet(p);
            2.0 * std::f64::consts::SQRT_2
                * jacobi_p(a, 0, 0, i)
                * jacobi_p(b, 2 * i as u32 + 1, 0, j)
                * (1.0 - b).powi(i as i32)
                * jacobi_p(c, 2 * (i + j) as u32 + 2, 0, k)
                * (1.0 - c).powi((i + j) as i32)
        }
    }
}

/// Reference gradient `(∂r, ∂s, ∂t)` of one tetrahedral mode.
pub fn grad_mode_3d(mode: [usize; 3], p: [f64; 3]) -> [f64; 3] {
    let [id, jd, kd] = mode;
    let [a, b, c] = collapse_tet(p);
    let (bi, ci) = (2 * id as u32 + 1, 2 * (id + jd) as u32 + 2);
    let fa = jacobi_p(a, 0, 0, id);
    let dfa = grad_jacobi_p(a, 0, 0, id);
    let gb = jacobi_p(b, bi, 0, jd);
    let dgb = grad_jacobi_p(b, bi, 0, jd);
    let hc = jacobi_p(c, ci, 0, kd);
    let dhc = grad_jacobi_p(c, ci, 0, kd);
    let hb = 0.5 * (1.0 - b);
    let hcm = 0.5 * (1.0 - c);
    let ij = id + jd;

    let mut vr = dfa * gb * hc;
    if id > 0 {
        vr *= hb.powi(id as i32 - 1);
    }
    if ij > 0 {
        vr *= hcm.powi(ij as i32 - 1);
    }

    let mut vs = 0.5 * (1.0 + a) * vr;
    let mut tmp = dgb * hb.powi(id as i32);
    if id > 0 {
        tmp += -0.5 * id as f64 * gb * hb.powi(id as i32 - 1);
    }
    if ij > 0 {
        tmp *= hcm.powi(ij as i32 - 1);
    }
    tmp = fa * tmp * hc;
    vs += tmp;

    let mut vt = 0.5 * (1.0 + a) * vr + 0.5 * (1.0 + b) * tmp;
    let mut tmp = dhc * hcm.powi(ij as i32);
    if ij > 0 {
        tmp -= 0.5 * ij as f64 * hc * hcm.powi(ij as i32 - 1);
    }
    tmp = fa * gb * tmp * hb.powi(id as i32);
    vt += tmp;

    let scale = 2f64.powf((2 * id + jd) as f64 + 1.5);
    [vr * scale, vs * scale, vt * scale]
}

/// Generalised Vandermonde `V[q, m] = L_m(p_q)` for a degree-`N` basis.
pub fn modal_basis_eval(degree: usize, dim: usize, points: &[[f64; 3]]) -> Result<DMatrix<f64>> {
    let modes = modal_indices(degree, dim)?;
    Ok(DMatrix::from_fn(points.len(), modes.len(), |q, m| {
        eval_mode(dim, modes[m], points[q])
    }))
}

/// Gradient Vandermondes `(V_r, V_s, V_t)` of the tetrahedral basis.
pub fn modal_grad_eval(degree: usize, points: &[[f64; 3]]) -> Result<[DMatrix<f64>; 3]> {
    let modes = modal_indices(degree, 3)?;
    let mut out = [
        DMatrix::zeros(points.len(), modes.len()),
        DMatrix::zeros(points.len(), modes.len()),
        DMatrix::zeros(points.len(), modes.len()),
    ];
    for (q, p) in points.iter().enumerate() {
        for (m, mode) in modes.iter().enumerate() {
            let g = grad_mode_3d(*mode, *p);
            for d in 0..3 {
                out[d][(q, m)] = g[d];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SimplexRule;
    use crate::tensor_index::ReferenceTet;
    use approx::assert_relative_eq;

    #[test]
    fn constant_mode_normalisation() {
        let v = eval_mode(3, [0, 0, 0], [-0.5, -0.5, -0.5]);
        assert_relative_eq!(v, 1.0 / ReferenceTet::VOLUME.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(
            eval_mode(2, [0, 0, 0], [0.1, -0.7, 0.0]),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn mode_counts() {
        for n in 0..=9 {
            assert_eq!(
                modal_indices(n, 3).unwrap().len(),
                (n + 1) * (n + 2) * (n + 3) / 6
            );
            assert_eq!(modal_indices(n, 2).unwrap().len(), (n + 1) * (n + 2) / 2);
        }
    }

    #[test]
    fn gram_is_identity() {
        for dim in 1..=3 {
            for n in [1, 4, 9] {
                let rule = SimplexRule::new(dim, 2 * n).unwrap();
                let v = modal_basis_eval(n, dim, &rule.points).unwrap();
                let w = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(rule.weights.clone()));
                let gram = v.transpose() * w * &v;
                let err = (gram - DMatrix::identity(v.ncols(), v.ncols())).abs().max();
                assert!(err < 1e-10, "dim {dim} N {n}: {err}");
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let modes = modal_indices(5, 3).unwrap();
        let p = [-0.41, -0.23, -0.52];
        let h = 1e-6;
        for mode in modes {
            let g = grad_mode_3d(mode, p);
            for d in 0..3 {
                let mut pp = p;
                let mut pm = p;
                pp[d] += h;
                pm[d] -= h;
                let fd = (eval_mode(3, mode, pp) - eval_mode(3, mode, pm)) / (2.0 * h);
                assert!(
                    (fd - g[d]).abs() < 1e-6 * (1.0 + g[d].abs()),
                    "{mode:?} d{d}: {fd} vs {}",
                    g[d]
                );
            }
        }
    }
}
