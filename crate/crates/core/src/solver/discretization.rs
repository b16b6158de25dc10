use std::sync::Arc;

use super::operators::{OperatorKind, ReferenceOperators};
use super::state::{FieldState, Materials, FIELDS};
use super::{Basis, LiftMode};
use crate::bernstein::{BernsteinDerivativeSet, LiftFactorization, LiftScratch};
use crate::error::{Error, Result};
use crate::mesh::{build_trace_maps, Mesh};
use crate::scalar::Real;
use crate::sparse::DenseOperator;

/// Sequential or element-parallel evaluation. Without the `parallel`
/// feature both run sequentially.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

// one instance per discretization, so the size gap is irrelevant
#[allow(clippy::large_enum_variant)]
enum Kernels<T> {
    Bernstein {
        derivs: BernsteinDerivativeSet<T>,
        lift: LiftFactorization<T>,
        dense: DenseOperator<T>,
    },
    Nodal {
        d: [DenseOperator<T>; 3],
        lift: DenseOperator<T>,
    },
}

struct FaceData<T> {
    /// `J^f / J^k`.
    scale: T,
    normal: [T; 3],
    tau_p: T,
    tau_u: T,
    /// Neighbour element and its volume positions aligned with the local
    /// trace, or `None` on the boundary.
    neighbor: Option<(usize, Vec<u32>)>,
}

struct ElementData<T> {
    g: [[T; 3]; 3],
    kappa: T,
    inv_rho: T,
    faces: [FaceData<T>; 4],
}

/// The semi-discrete right-hand side on one mesh, in precision `T`.
pub struct Discretization<T> {
    ops: Arc<ReferenceOperators>,
    mesh: Arc<Mesh>,
    materials: Materials,
    kernels: Kernels<T>,
    elements: Vec<ElementData<T>>,
    face_indices: [Vec<u32>; 4],
    lift_mode: LiftMode,
    execution: Execution,
}

struct Scratch<T> {
    d: [Vec<T>; 4],
    div: Vec<T>,
    flux: [Vec<T>; FIELDS],
    lift: LiftScratch<T>,
}

impl<T: Real> Scratch<T> {
    fn new(degree: usize, np: usize, nfp: usize) -> Self {
        Self {
            d: std::array::from_fn(|_| vec![T::ZERO; np]),
            div: vec![T::ZERO; np],
            flux: std::array::from_fn(|_| vec![T::ZERO; 4 * nfp]),
            lift: LiftScratch::new(degree),
        }
    }
}

impl<T: Real> Discretization<T> {
    pub fn new(
        ops: Arc<ReferenceOperators>,
        mesh: Arc<Mesh>,
        materials: Materials,
        lift_mode: LiftMode,
        execution: Execution,
    ) -> Result<Self> {
        materials.validate(mesh.len())?;
        let kernels = match &ops.kind {
            OperatorKind::Bernstein {
                derivs,
                lift,
                dense_lift,
            } => Kernels::Bernstein {
                derivs: derivs.cast(),
                lift: lift.cast(),
                dense: DenseOperator::from_matrix(dense_lift),
            },
            OperatorKind::Nodal(n) => {
                if lift_mode != LiftMode::Dense {
                    return Err(Error::UnsupportedLiftMode(lift_mode.name()));
                }
                Kernels::Nodal {
                    d: [&n.dr, &n.ds, &n.dt].map(DenseOperator::from_matrix),
                    lift: DenseOperator::from_matrix(&n.lift),
                }
            }
        };
        let maps = build_trace_maps(&mesh, &ops.points, &ops.face_indices)?;
        let t = T::from_f64;
        let elements = (0..mesh.len())
            .map(|k| {
                let geo = &mesh.geometry[k];
                let z = materials.impedance(k);
                let faces = std::array::from_fn(|f| {
                    let (zp, neighbor) = match &maps.maps[k][f] {
                        Some(perm) => {
                            let crate::mesh::FaceLink::Interior { element, face } = mesh.links[k][f] else {
                                unreachable!("trace map on a boundary face")
                            };
                            let pos = perm
                                .iter()
                                .map(|&j| ops.face_indices[face][j as usize] as u32)
                                .collect();
                            (materials.impedance(element), Some((element, pos)))
                        }
                        None => (z, None),
                    };
                    let avg = 0.5 * (z + zp);
                    FaceData {
                        scale: t(geo.face_j[f] / geo.j),
                        normal: geo.normals[f].map(t),
                        tau_p: t(1.0 / avg),
                        tau_u: t(avg),
                        neighbor,
                    }
                });
                ElementData {
                    g: geo.g.map(|row| row.map(t)),
                    kappa: t(materials.kappa[k]),
                    inv_rho: t(1.0 / materials.rho[k]),
                    faces,
                }
            })
            .collect();
        let face_indices = ops
            .face_indices
            .clone()
            .map(|v| v.into_iter().map(|i| i as u32).collect());
        Ok(Self {
            ops,
            mesh,
            materials,
            kernels,
            elements,
            face_indices,
            lift_mode,
            execution,
        })
    }

    pub fn operators(&self) -> &ReferenceOperators {
        &self.ops
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn materials(&self) -> &Materials {
        &self.materials
    }

    pub fn basis(&self) -> Basis {
        self.ops.basis
    }

    pub fn degree(&self) -> usize {
        self.ops.degree
    }

    pub fn lift_mode(&self) -> LiftMode {
        self.lift_mode
    }

    pub fn set_lift_mode(&mut self, mode: LiftMode) -> Result<()> {
        if self.basis() == Basis::Nodal && mode != LiftMode::Dense {
            return Err(Error::UnsupportedLiftMode(mode.name()));
        }
        self.lift_mode = mode;
        Ok(())
    }

    pub fn set_execution(&mut self, execution: Execution) {
        self.execution = execution;
    }

    pub fn zero_state(&self) -> FieldState<T> {
        FieldState::zeros(self.degree(), self.ops.np(), self.mesh.len(), self.basis())
    }

    fn check(&self, state: &FieldState<T>, out: &[T]) -> Result<()> {
        if state.basis != self.basis() {
            return Err(Error::BasisMismatch {
                state: state.basis,
                operators: self.basis(),
            });
        }
        let want = FIELDS * self.ops.np() * self.mesh.len();
        for got in [state.data.len(), out.len()] {
            if got != want {
                return Err(Error::SizeMismatch { expected: want, got });
            }
        }
        Ok(())
    }

    /// `out += volume terms`.
    pub fn volume_rhs(&self, state: &FieldState<T>, out: &mut [T]) -> Result<()> {
        self.check(state, out)?;
        self.for_each_element(&state.data, out, true, false);
        Ok(())
    }

    /// `out += lifted surface fluxes`.
    pub fn surface_rhs(&self, state: &FieldState<T>, out: &mut [T]) -> Result<()> {
        self.check(state, out)?;
        self.for_each_element(&state.data, out, false, true);
        Ok(())
    }

    /// `out = dq/dτ`.
    pub fn rhs(&self, state: &FieldState<T>, out: &mut [T]) -> Result<()> {
        self.check(state, out)?;
        self.rhs_raw(&state.data, out);
        Ok(())
    }

    /// Unchecked full right-hand side on raw coefficient arrays.
    pub(crate) fn rhs_raw(&self, q: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::ZERO);
        self.for_each_element(q, out, true, true);
    }

    fn for_each_element(&self, q: &[T], out: &mut [T], volume: bool, surface: bool) {
        let np = self.ops.np();
        let nfp = self.ops.nfp();
        let degree = self.degree();
        let stride = FIELDS * np;
        let kernel = |scratch: &mut Scratch<T>, (k, o): (usize, &mut [T])| {
            if volume {
                self.volume_element(k, &q[k * stride..(k + 1) * stride], o, scratch);
            }
            if surface {
                self.surface_element(k, q, o, scratch);
            }
        };
        match self.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                out.par_chunks_mut(stride)
                    .enumerate()
                    .for_each_init(|| Scratch::new(degree, np, nfp), kernel);
            }
            _ => {
                let mut scratch = Scratch::new(degree, np, nfp);
                out.chunks_mut(stride)
                    .enumerate()
                    .for_each(|item| kernel(&mut scratch, item));
            }
        }
    }

    fn volume_element(&self, k: usize, x: &[T], out: &mut [T], s: &mut Scratch<T>) {
        let np = self.ops.np();
        let e = &self.elements[k];
        let half = T::from_f64(0.5);
        let (out_p, out_u) = out.split_at_mut(np);

        // reference derivatives of field c into s.d[0..3] as (∂r, ∂s, ∂t)
        let reference_grad = |c: usize, s: &mut Scratch<T>| {
            let f = &x[c * np..(c + 1) * np];
            match &self.kernels {
                Kernels::Bernstein { derivs, .. } => {
                    let [d0, d1, d2, d3] = &mut s.d;
                    derivs.apply_all(f, [d0, d1, d2, d3], &mut ());
                    for i in 0..np {
                        let b0 = d0[i];
                        d0[i] = half * (d1[i] - b0);
                        d1[i] = half * (d2[i] - b0);
                        d2[i] = half * (d3[i] - b0);
                    }
                }
                Kernels::Nodal { d, .. } => {
                    for (m, dm) in d.iter().enumerate() {
                        s.d[m].iter_mut().for_each(|v| *v = T::ZERO);
                        dm.apply_add(f, &mut s.d[m], &mut ());
                    }
                }
            }
        };

        reference_grad(0, s);
        for c in 0..3 {
            let [g0, g1, g2] = e.g[c];
            let ou = &mut out_u[c * np..(c + 1) * np];
            for i in 0..np {
                ou[i] -= e.inv_rho * (g0 * s.d[0][i] + g1 * s.d[1][i] + g2 * s.d[2][i]);
            }
        }
        s.div.iter_mut().for_each(|v| *v = T::ZERO);
        for c in 0..3 {
            reference_grad(1 + c, s);
            let [g0, g1, g2] = e.g[c];
            for i in 0..np {
                s.div[i] += g0 * s.d[0][i] + g1 * s.d[1][i] + g2 * s.d[2][i];
            }
        }
        for i in 0..np {
            out_p[i] -= e.kappa * s.div[i];
        }
    }

    fn surface_element(&self, k: usize, q: &[T], out: &mut [T], s: &mut Scratch<T>) {
        let np = self.ops.np();
        let nfp = self.ops.nfp();
        let stride = FIELDS * np;
        let e = &self.elements[k];
        let x = &q[k * stride..(k + 1) * stride];
        let half = T::from_f64(0.5);

        for (f, face) in e.faces.iter().enumerate() {
            let fid = &self.face_indices[f];
            let n = face.normal;
            for i in 0..nfp {
                let li = fid[i] as usize;
                let pm = x[li];
                let um = [x[np + li], x[2 * np + li], x[3 * np + li]];
                let (pp, up) = match &face.neighbor {
                    Some((nb, pos)) => {
                        let base = nb * stride + pos[i] as usize;
                        (q[base], [q[base + np], q[base + 2 * np], q[base + 3 * np]])
                    }
                    None => (-pm, um),
                };
                let jp = pp - pm;
                let jun = n[0] * (up[0] - um[0]) + n[1] * (up[1] - um[1]) + n[2] * (up[2] - um[2]);
                let fp = half * (face.tau_p * jp - jun);
                let fu = half * (face.tau_u * jun - jp);
                let slot = f * nfp + i;
                s.flux[0][slot] = e.kappa * face.scale * fp;
                let su = e.inv_rho * face.scale * fu;
                for c in 0..3 {
                    s.flux[1 + c][slot] = su * n[c];
                }
            }
        }

        for c in 0..FIELDS {
            let o = &mut out[c * np..(c + 1) * np];
            let flux = &s.flux[c];
            match (&self.kernels, self.lift_mode) {
                (Kernels::Bernstein { dense, .. }, LiftMode::Dense) => dense.apply_add(flux, o, &mut ()),
                (Kernels::Bernstein { lift, .. }, LiftMode::Factorized) => {
                    lift.factorized_add(flux, o, &mut s.lift, &mut ())
                }
                (Kernels::Bernstein { lift, .. }, LiftMode::Optimal) => {
                    lift.optimal_add(flux, o, &mut s.lift, &mut ())
                }
                (Kernels::Nodal { lift, .. }, _) => lift.apply_add(flux, o, &mut ()),
            }
        }
    }

    /// Interpolates `f(x) = (p, u1, u2, u3)` at the physical images of the
    /// interpolation nodes and converts to coefficients in double
    /// precision before rounding to `T`.
    pub fn project(&self, f: impl Fn([f64; 3]) -> [f64; 4], time: f64) -> FieldState<T> {
        let np = self.ops.np();
        let mut state = self.zero_state();
        state.time = time;
        let nodes = &self.ops.interp_nodes.points;
        let mut vals = vec![nalgebra::DVector::<f64>::zeros(nodes.len()); FIELDS];
        for k in 0..self.mesh.len() {
            for (i, p) in nodes.iter().enumerate() {
                let v = f(self.mesh.map_point(k, *p));
                for c in 0..FIELDS {
                    vals[c][i] = v[c];
                }
            }
            for c in 0..FIELDS {
                let coeffs = &self.ops.from_nodal * &vals[c];
                let dst = state.field_mut(k, c);
                for i in 0..np {
                    dst[i] = T::from_f64(coeffs[i]);
                }
            }
        }
        state
    }

    /// `L2` error of field `c` against `exact` over the whole mesh, using a
    /// rule exact to degree `2N + 2` on each element.
    pub fn l2_error(&self, state: &FieldState<T>, c: usize, exact: impl Fn([f64; 3]) -> f64) -> f64 {
        let q = &self.ops.quad;
        let mut total = 0.0;
        for k in 0..self.mesh.len() {
            let coeffs = state.field(k, c);
            let mut local = 0.0;
            for (qi, (p, w)) in q.points.iter().zip(&q.weights).enumerate() {
                let row = self.ops.quad_eval.row(qi);
                let uh: f64 = row.iter().zip(coeffs).map(|(a, b)| a * b.to_f64()).sum();
                let d = uh - exact(self.mesh.map_point(k, *p));
                local += w * d * d;
            }
            total += self.mesh.geometry[k].j * local;
        }
        total.sqrt()
    }

    /// `Σ_k J^k ( pᵀMp / κ + ρ Σ_i u_iᵀ M u_i )`.
    pub fn discrete_energy(&self, state: &FieldState<T>) -> f64 {
        let np = self.ops.np();
        // column-major storage; M is symmetric so columns are rows
        let m = self.ops.mass.as_slice();
        let mut xf = vec![0.0; np];
        let mut quad = |x: &[T]| -> f64 {
            xf.iter_mut().zip(x).for_each(|(a, b)| *a = b.to_f64());
            m.chunks_exact(np)
                .zip(&xf)
                .map(|(row, xi)| xi * dot(row, &xf))
                .sum()
        };
        let mut total = 0.0;
        for k in 0..self.mesh.len() {
            let mut e = quad(state.field(k, 0)) / self.materials.kappa[k];
            for c in 1..FIELDS {
                e += self.materials.rho[k] * quad(state.field(k, c));
            }
            total += self.mesh.geometry[k].j * e;
        }
        total
    }
}

/// Dot product with independent partial sums so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    acc.iter().sum::<f64>() + tail
}
