//! Gauss-Jacobi rules and collapsed-coordinate simplex rules.
//!
//! Simplex rules map the cube `[-1,1]^d` onto the reference simplex through
//! the Duffy collapse and absorb the Jacobian factors `(1-b)` and `(1-c)^2`
//! into Gauss-Jacobi weights, so a rule with `q` points per direction
//! integrates every polynomial of total degree `2q - 1` exactly.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes (ascending) and weights of the `n`-point Gauss-Jacobi rule for the
/// weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`.
pub fn gauss_jacobi(n: usize, alpha: u32, beta: u32) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let (a, b) = (alpha as f64, beta as f64);
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        jac[(k, k)] = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + a + b;
            let off =
                (4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0))).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powi((alpha + beta + 1) as i32) * factorial(alpha) * factorial(beta)
        / factorial(alpha + beta + 1);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// A quadrature rule on the bi-unit reference simplex of dimension 1, 2 or 3.
///
/// Points are stored as `[r, s, t]` with unused trailing coordinates zero.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    pub dim: usize,
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// A rule exact for polynomials of total degree `degree`.
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        let q = degree / 2 + 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match dim {
            1 => {
                let (x, w) = gauss_jacobi(q, 0, 0);
                for (xi, wi) in x.into_iter().zip(w) {
                    points.push([xi, 0.0, 0.0]);
                    weights.push(wi);
                }
            }
            2 => {
                let (xa, wa) = gauss_jacobi(q, 0, 0);
                let (xb, wb) = gauss_jacobi(q, 1, 0);
                for (a, wai) in xa.iter().zip(&wa) {
                    for (b, wbi) in xb.iter().zip(&wb) {
                        let s = *b;
                        let r = 0.5 * (1.0 + a) * (1.0 - b) - 1.0;
                        points.push([r, s, 0.0]);
                        weights.push(0.5 * wai * wbi);
                    }
                }
            }
            3 => {
                let (xa, wa) = gauss_jacobi(q, 0, 0);
                let (xb, wb) = gauss_jacobi(q, 1, 0);
                let (xc, wc) = gauss_jacobi(q, 2, 0);
                for (a, wai) in xa.iter().zip(&wa) {
                    for (b, wbi) in xb.iter().zip(&wb) {
                        for (c, wci) in xc.iter().zip(&wc) {
                            let t = *c;
                            let s = 0.5 * (1.0 + b) * (1.0 - c) - 1.0;
                            let r = 0.25 * (1.0 + a) * (1.0 - b) * (1.0 - c) - 1.0;
                            points.push([r, s, t]);
                            weights.push(0.125 * wai * wbi * wci);
                        }
                    }
                }
            }
            d => return Err(Error::InvalidDimension(d)),
        }
        Ok(Self { dim, points, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Barycentric coordinates of each point (`dim + 1` components used).
    pub fn barycentric(&self) -> Vec<[f64; 4]> {
        self.points
            .iter()
            .map(|p| {
                let mut l = [0.0; 4];
                let sum: f64 = p[..self.dim].iter().sum();
                l[0] = -(sum + self.dim as f64 - 2.0) / 2.0;
                for m in 0..self.dim {
                    l[m + 1] = (1.0 + p[m]) / 2.0;
                }
                l
            })
            .collect()
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_jacobi(2, 0, 0);
        let r = 1.0 / 3f64.sqrt();
        assert_relative_eq!(x[0], -r, epsilon = 1e-14);
        assert_relative_eq!(x[1], r, epsilon = 1e-14);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn jacobi_weights_sum_to_moment() {
        let (_, w) = gauss_jacobi(5, 2, 0);
        assert_relative_eq!(w.iter().sum::<f64>(), 8.0 / 3.0, epsilon = 1e-13);
        let (x, w) = gauss_jacobi(4, 1, 0);
        // ∫ (1-x) x^4 dx = 2/5
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert_relative_eq!(m, 0.4, epsilon = 1e-13);
    }

    #[test]
    fn simplex_volumes() {
        for (d, vol) in [(1, 2.0), (2, 2.0), (3, 4.0 / 3.0)] {
            let rule = SimplexRule::new(d, 4).unwrap();
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), vol, epsilon = 1e-13);
        }
        assert!(SimplexRule::new(4, 2).is_err());
    }

    #[test]
    fn tet_monomials_exact() {
        // ∫ over the unit simplex of x^a y^b z^c = a! b! c! / (a+b+c+3)!;
        // the bi-unit tet is the image of x = (1+r)/2 with volume scale 8.
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        let rule = SimplexRule::new(3, 9).unwrap();
        for (a, b, c) in [(0, 0, 0), (2, 3, 1), (4, 0, 5), (3, 3, 3)] {
            let exact = 8.0 * fact(a) * fact(b) * fact(c) / fact(a + b + c + 3);
            let got = rule.integrate(|p| {
                ((1.0 + p[0]) / 2.0).powi(a as i32)
                    * ((1.0 + p[1]) / 2.0).powi(b as i32)
                    * ((1.0 + p[2]) / 2.0).powi(c as i32)
            });
            assert_relative_eq!(got, exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn triangle_barycentrics_sum_to_one() {
        let rule = SimplexRule::new(2, 5).unwrap();
        for l in rule.barycentric() {
            assert_relative_eq!(l[0] + l[1] + l[2], 1.0, epsilon = 1e-14);
            assert!(l.iter().all(|&x| x > -1e-14));
        }
        let rule = SimplexRule::new(3, 5).unwrap();
        for l in rule.barycentric() {
            assert_relative_eq!(l.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }
}
