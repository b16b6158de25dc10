//! Lagrange reference operators on Warp & Blend or equispaced nodes, and the
//! change of basis between nodal values and Bernstein coefficients.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::bernstein::BernsteinEvaluator;
use crate::error::{Error, Result};
use crate::modal::{modal_basis_eval, modal_grad_eval};
use crate::quadrature::gauss_jacobi;
use crate::tensor_index::{check_degree, num_tet, num_tri, ReferenceTet};

/// Blend exponents of the Warp & Blend construction, indexed by `N - 1`.
const ALPHA_OPT: [f64; 9] = [0.0, 0.0, 0.0, 0.1002, 1.1332, 1.5608, 1.3413, 1.2577, 1.1603];

/// Highest degree with a tabulated blend exponent.
pub const MAX_WARP_BLEND_DEGREE: usize = 9;

/// Default cap on the modal Vandermonde condition number.
pub const DEFAULT_VANDERMONDE_CAP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    WarpBlend,
    Equispaced,
}

impl std::str::FromStr for NodeKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "warp_blend" | "warp-blend" => Ok(NodeKind::WarpBlend),
            "equispaced" => Ok(NodeKind::Equispaced),
            other => Err(format!("unknown node kind '{other}'")),
        }
    }
}

/// Interpolation nodes on the reference tetrahedron.
#[derive(Clone, Debug)]
pub struct NodeSet {
    pub degree: usize,
    pub kind: NodeKind,
    pub points: Vec<[f64; 3]>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of the nodes on face `f` (where `λ_f = 0`), in node order.
    pub fn face_nodes(&self, face: usize) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| ReferenceTet::barycentric(**p)[face].abs() < 1e-10)
            .map(|(i, _)| i)
            .collect()
    }

    /// One `r,s,t` line per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,s,t\n");
        for p in &self.points {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", p[0], p[1], p[2]).unwrap();
        }
        out
    }
}

fn equispaced(degree: usize) -> Vec<[f64; 3]> {
    let n = degree as f64;
    let mut pts = Vec::with_capacity(num_tet(degree));
    for k in 0..=degree {
        for j in 0..=(degree - k) {
            for i in 0..=(degree - k - j) {
                pts.push([
                    -1.0 + 2.0 * i as f64 / n,
                    -1.0 + 2.0 * j as f64 / n,
                    -1.0 + 2.0 * k as f64 / n,
                ]);
            }
        }
    }
    pts
}

/// Legendre-Gauss-Lobatto points, ascending.
fn gauss_lobatto(n: usize) -> Vec<f64> {
    let mut x = vec![-1.0];
    if n > 1 {
        x.extend(gauss_jacobi(n - 1, 1, 1).0);
    }
    x.push(1.0);
    x
}

/// 1-D warp from equispaced to Gauss-Lobatto points, evaluated at `r`.
fn eval_warp(p: usize, xnodes: &[f64], r: f64) -> f64 {
    let pf = p as f64;
    let xeq: Vec<f64> = (0..=p).map(|i| 1.0 - 2.0 * i as f64 / pf).collect();
    let mut warp = 0.0;
    for i in 0..=p {
        let mut d = xnodes[i] - xeq[i];
        for j in 1..p {
            if i != j {
                d *= (r - xeq[j]) / (xeq[i] - xeq[j]);
            }
        }
        if i != 0 {
            d = -d / (xeq[i] - xeq[0]);
        }
        if i != p {
            d /= xeq[i] - xeq[p];
        }
        warp += d;
    }
    warp
}

/// Warp & Blend shift of a point on an equilateral triangle face.
fn eval_shift(p: usize, alpha: f64, gx: &[f64], l1: f64, l2: f64, l3: f64) -> [f64; 2] {
    let w1 = 4.0 * l2 * l3 * eval_warp(p, gx, l3 - l2) * (1.0 + (alpha * l1).powi(2));
    let w2 = 4.0 * l1 * l3 * eval_warp(p, gx, l1 - l3) * (1.0 + (alpha * l2).powi(2));
    let w3 = 4.0 * l1 * l2 * eval_warp(p, gx, l2 - l1) * (1.0 + (alpha * l3).powi(2));
    let (c2, s2) = ((2.0 * PI / 3.0).cos(), (2.0 * PI / 3.0).sin());
    let (c4, s4) = ((4.0 * PI / 3.0).cos(), (4.0 * PI / 3.0).sin());
    [w1 + c2 * w2 + c4 * w3, s2 * w2 + s4 * w3]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn warp_blend(degree: usize) -> Vec<[f64; 3]> {
    let alpha = ALPHA_OPT[degree - 1];
    let gx: Vec<f64> = gauss_lobatto(degree).into_iter().map(|x| -x).collect();
    let (s3, s6) = (3f64.sqrt(), 6f64.sqrt());
    let v1 = [-1.0, -1.0 / s3, -1.0 / s6];
    let v2 = [1.0, -1.0 / s3, -1.0 / s6];
    let v3 = [0.0, 2.0 / s3, -1.0 / s6];
    let v4 = [0.0, 0.0, 3.0 / s6];
    let mid = |a: [f64; 3], b: [f64; 3]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
    let t1 = [sub(v2, v1), sub(v2, v1), sub(v3, v2), sub(v3, v1)].map(unit);
    let t2 = [
        sub(v3, mid(v1, v2)),
        sub(v4, mid(v1, v2)),
        sub(v4, mid(v2, v3)),
        sub(v4, mid(v1, v3)),
    ]
    .map(unit);
    let tol = 1e-10;
    let a_mat = nalgebra::Matrix3::from_columns(&[
        nalgebra::Vector3::from(sub(v2, v1)) * 0.5,
        nalgebra::Vector3::from(sub(v3, v1)) * 0.5,
        nalgebra::Vector3::from(sub(v4, v1)) * 0.5,
    ]);
    let a_inv = a_mat.try_inverse().expect("equilateral map is invertible");
    let centre = nalgebra::Vector3::from([
        0.5 * (v2[0] + v3[0] + v4[0] - v1[0]),
        0.5 * (v2[1] + v3[1] + v4[1] - v1[1]),
        0.5 * (v2[2] + v3[2] + v4[2] - v1[2]),
    ]);

    equispaced(degree)
        .into_iter()
        .map(|[r, s, t]| {
            let l1 = (1.0 + t) / 2.0;
            let l2 = (1.0 + s) / 2.0;
            let l3 = -(1.0 + r + s + t) / 2.0;
            let l4 = (1.0 + r) / 2.0;
            let mut xyz = [0.0; 3];
            for d in 0..3 {
                xyz[d] = l3 * v1[d] + l4 * v2[d] + l2 * v3[d] + l1 * v4[d];
            }
            let mut shift = [0.0; 3];
            let orders = [
                (l1, l2, l3, l4),
                (l2, l1, l3, l4),
                (l3, l1, l4, l2),
                (l4, l1, l3, l2),
            ];
            for (f, &(la, lb, lc, ld)) in orders.iter().enumerate() {
                let w = eval_shift(degree, alpha, &gx, lb, lc, ld);
                let mut blend = lb * lc * ld;
                let denom = (lb + 0.5 * la) * (lc + 0.5 * la) * (ld + 0.5 * la);
                if denom > tol {
                    blend = (1.0 + (alpha * la).powi(2)) * blend / denom;
                }
                for d in 0..3 {
                    shift[d] += blend * w[0] * t1[f][d] + blend * w[1] * t2[f][d];
                }
                let interior = [lb, lc, ld].iter().filter(|&&x| x > tol).count();
                if la < tol && interior < 3 {
                    for d in 0..3 {
                        shift[d] = w[0] * t1[f][d] + w[1] * t2[f][d];
                    }
                }
            }
            let x = nalgebra::Vector3::new(xyz[0] + shift[0], xyz[1] + shift[1], xyz[2] + shift[2]);
            let rst = a_inv * (x - centre);
            [rst[0], rst[1], rst[2]]
        })
        .collect()
}

/// Interpolation nodes of degree `N`.
pub fn build_nodes(degree: usize, kind: NodeKind) -> Result<NodeSet> {
    check_degree(degree)?;
    let points = match kind {
        NodeKind::Equispaced => equispaced(degree),
        NodeKind::WarpBlend => {
            if degree > MAX_WARP_BLEND_DEGREE {
                return Err(Error::UnsupportedNodeDegree(degree));
            }
            warp_blend(degree)
        }
    };
    Ok(NodeSet { degree, kind, points })
}

/// Two-norm condition number from the singular values.
pub(crate) fn cond2(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Dense nodal operators for one node set.
#[derive(Clone, Debug)]
pub struct NodalOperators {
    pub nodes: NodeSet,
    /// Modal Vandermonde `V[i, γ] = L_γ(x_i)`.
    pub v: DMatrix<f64>,
    pub v_inv: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub dr: DMatrix<f64>,
    pub ds: DMatrix<f64>,
    pub dt: DMatrix<f64>,
    /// `L = (L^0 | L^1 | L^2 | L^3)`, `N_p × 4 N^f_p`.
    pub lift: DMatrix<f64>,
    pub face_indices: [Vec<usize>; 4],
}

/// Face-local coordinates `(2μ_1 - 1, 2μ_2 - 1)` of a volume point on face `f`.
fn face_coords(face: usize, p: [f64; 3]) -> [f64; 3] {
    let l = ReferenceTet::barycentric(p);
    let vs = ReferenceTet::face_vertices(face);
    [2.0 * l[vs[1]] - 1.0, 2.0 * l[vs[2]] - 1.0, 0.0]
}

/// Builds `V`, `D^r, D^s, D^t` and the lift; rejects node sets whose
/// Vandermonde condition number exceeds `cap`.
pub fn build_nodal_operators(nodes: &NodeSet, cap: f64) -> Result<NodalOperators> {
    let n = nodes.degree;
    let v = modal_basis_eval(n, 3, &nodes.points)?;
    let cond = cond2(&v);
    if !(cond <= cap) {
        return Err(Error::IllConditioned { cond, cap });
    }
    let v_inv = v
        .clone()
        .try_inverse()
        .ok_or(Error::Singular("nodal vandermonde"))?;
    let [vr, vs, vt] = modal_grad_eval(n, &nodes.points)?;
    let dr = &vr * &v_inv;
    let ds = &vs * &v_inv;
    let dt = &vt * &v_inv;
    let mass = (&v_inv.transpose()) * &v_inv;

    let nfp = num_tri(n);
    let face_indices: [Vec<usize>; 4] = std::array::from_fn(|f| nodes.face_nodes(f));
    let mut emat = DMatrix::zeros(nodes.len(), 4 * nfp);
    for (f, ids) in face_indices.iter().enumerate() {
        if ids.len() != nfp {
            return Err(Error::SizeMismatch {
                expected: nfp,
                got: ids.len(),
            });
        }
        let pts: Vec<[f64; 3]> = ids.iter().map(|&i| face_coords(f, nodes.points[i])).collect();
        let vf = modal_basis_eval(n, 2, &pts)?;
        let vf_inv = vf.try_inverse().ok_or(Error::Singular("face vandermonde"))?;
        let mf = vf_inv.transpose() * vf_inv;
        for (k, &i) in ids.iter().enumerate() {
            for c in 0..nfp {
                emat[(i, f * nfp + c)] = mf[(k, c)];
            }
        }
    }
    let lift = &v * (v.transpose() * emat);
    Ok(NodalOperators {
        nodes: nodes.clone(),
        v,
        v_inv,
        mass,
        dr,
        ds,
        dt,
        lift,
        face_indices,
    })
}

impl NodalOperators {
    pub fn degree(&self) -> usize {
        self.nodes.degree
    }

    /// `L^f` as an `N_p × N^f_p` block.
    pub fn lift_face(&self, face: usize) -> DMatrix<f64> {
        let nfp = num_tri(self.degree());
        self.lift.columns(face * nfp, nfp).into_owned()
    }

    /// Lagrange basis values `ℓ_i(p_q)` at arbitrary reference points.
    pub fn interpolation_matrix(&self, points: &[[f64; 3]]) -> Result<DMatrix<f64>> {
        Ok(modal_basis_eval(self.degree(), 3, points)? * &self.v_inv)
    }
}

/// Change of basis between nodal values and Bernstein coefficients on one
/// node set. Always carried out in double precision.
#[derive(Clone, Debug)]
pub struct BasisConversion {
    /// Bernstein-Vandermonde `V_B[i, α] = B_α(x_i)`: coefficients to values.
    pub to_nodal: DMatrix<f64>,
    pub to_bernstein: DMatrix<f64>,
}

impl BasisConversion {
    pub fn new(nodes: &NodeSet) -> Result<Self> {
        let lam: Vec<[f64; 4]> = nodes
            .points
            .iter()
            .map(|p| ReferenceTet::barycentric(*p))
            .collect();
        let to_nodal = BernsteinEvaluator::new(nodes.degree, 3)?.matrix(&lam);
        let to_bernstein = to_nodal
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("bernstein vandermonde"))?;
        Ok(Self {
            to_nodal,
            to_bernstein,
        })
    }

    pub fn condition_number(&self) -> f64 {
        cond2(&self.to_nodal)
    }
}

fn matvec(a: &DMatrix<f64>, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != a.ncols() {
        return Err(Error::SizeMismatch {
            expected: a.ncols(),
            got: x.len(),
        });
    }
    Ok((a * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec())
}

pub fn nodal_to_bernstein(conv: &BasisConversion, values: &[f64]) -> Result<Vec<f64>> {
    matvec(&conv.to_bernstein, values)
}

pub fn bernstein_to_nodal(conv: &BasisConversion, coeffs: &[f64]) -> Result<Vec<f64>> {
    matvec(&conv.to_nodal, coeffs)
}
