use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;

/// Five-stage fourth-order low-storage Runge-Kutta coefficients of
/// Carpenter and Kennedy.
pub const RK4A: [f64; 5] = [
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
];
pub const RK4B: [f64; 5] = [
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
];
pub const RK4C: [f64; 5] = [
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
];

/// Default CFL constant.
pub const DEFAULT_CFL: f64 = 0.5;

/// `dt = cfl · h / (c_max · N²)` with `h = min J^k / J^f` over all element
/// faces (half the smallest altitude).
pub fn stable_dt(mesh: &Mesh, degree: usize, c_max: f64, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::InvalidCfl(cfl));
    }
    Ok(cfl * mesh.dt_length() / (c_max * (degree * degree) as f64))
}

/// Low-storage RK4 integrator holding the residual register and the
/// right-hand-side buffer.
#[derive(Clone, Debug)]
pub struct Lsrk4<T> {
    res: Vec<T>,
    k: Vec<T>,
}

impl<T: Real> Lsrk4<T> {
    pub fn new(len: usize) -> Self {
        Self {
            res: vec![T::ZERO; len],
            k: vec![T::ZERO; len],
        }
    }

    /// Advances `q` from `t` to `t + dt`; `rhs(q, t, out)` overwrites `out`.
    pub fn step(
        &mut self,
        q: &mut [T],
        t: f64,
        dt: f64,
        mut rhs: impl FnMut(&[T], f64, &mut [T]) -> Result<()>,
    ) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidTimeStep(dt));
        }
        if q.len() != self.res.len() {
            return Err(Error::SizeMismatch {
                expected: self.res.len(),
                got: q.len(),
            });
        }
        self.res.iter_mut().for_each(|v| *v = T::ZERO);
        let dtt = T::from_f64(dt);
        for stage in 0..5 {
            rhs(q, t + RK4C[stage] * dt, &mut self.k)?;
            let a = T::from_f64(RK4A[stage]);
            let b = T::from_f64(RK4B[stage]);
            for ((qi, ri), ki) in q.iter_mut().zip(&mut self.res).zip(&self.k) {
                *ri = a * *ri + dtt * *ki;
                *qi += b * *ri;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(dt: f64, steps: usize) -> f64 {
        let mut rk = Lsrk4::<f64>::new(1);
        let mut y = [1.0];
        for n in 0..steps {
            rk.step(&mut y, n as f64 * dt, dt, |q, _, out| {
                out[0] = -q[0];
                Ok(())
            })
            .unwrap();
        }
        y[0]
    }

    #[test]
    fn fourth_order_on_linear_decay() {
        let e1 = (decay(0.1, 10) - (-1f64).exp()).abs();
        let e2 = (decay(0.05, 20) - (-1f64).exp()).abs();
        assert!(e1 < 2e-7, "{e1}");
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "{order}");
    }

    #[test]
    fn zero_rhs_keeps_state() {
        let mut rk = Lsrk4::<f32>::new(3);
        let mut y = [1.0f32, -2.0, 3.5];
        rk.step(&mut y, 0.0, 0.3, |_, _, out| {
            out.iter_mut().for_each(|v| *v = 0.0);
            Ok(())
        })
        .unwrap();
        assert_eq!(y, [1.0, -2.0, 3.5]);
        assert!(rk.step(&mut y, 0.0, 0.0, |_, _, _| Ok(())).is_err());
    }

    #[test]
    fn dt_scaling() {
        let m1 = crate::mesh::build_cube_mesh(2, [-0.5; 3], [0.5; 3]).unwrap();
        let m2 = crate::mesh::build_cube_mesh(4, [-0.5; 3], [0.5; 3]).unwrap();
        let a = stable_dt(&m1, 2, 1.0, 0.5).unwrap();
        assert!((stable_dt(&m1, 4, 1.0, 0.5).unwrap() - a / 4.0).abs() < 1e-15);
        assert!((stable_dt(&m2, 2, 1.0, 0.5).unwrap() - a / 2.0).abs() < 1e-15);
        assert!(stable_dt(&m1, 2, 1.0, 1.5).is_err());
    }
}
