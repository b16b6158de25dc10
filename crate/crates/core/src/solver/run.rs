use std::sync::Arc;

use super::discretization::{Discretization, Execution};
use super::exact::exact_solution;
use super::operators::ReferenceOperators;
use super::state::{FieldState, Materials};
use super::time::{stable_dt, Lsrk4, DEFAULT_CFL};
use super::{Basis, LiftMode};
use crate::error::{Error, Result};
use crate::mesh::build_cube_mesh;
use crate::scalar::Real;

/// One standing-wave run on the cube `[-1/2, 1/2]³` with `κ = ρ = 1`.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub degree: usize,
    /// Cubes per axis; the mesh has `6 n³` elements.
    pub mesh_cells: usize,
    pub basis: Basis,
    pub lift_mode: LiftMode,
    pub cfl: f64,
    pub t_final: f64,
    /// Record every this many steps (0: first and last step only).
    pub output_every: usize,
    pub execution: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            mesh_cells: 4,
            basis: Basis::Bernstein,
            lift_mode: LiftMode::Optimal,
            cfl: DEFAULT_CFL,
            t_final: 1.0,
            output_every: 10,
            execution: Execution::Parallel,
        }
    }
}

/// One row of the error/energy time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub step: usize,
    pub time: f64,
    pub l2_error: f64,
    pub energy: f64,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<Record>,
    pub steps: usize,
    pub dt: f64,
    pub initial_energy: f64,
    pub final_error: f64,
    /// Largest single-step energy increase divided by the initial energy
    /// (negative when energy decreased on every step).
    pub max_energy_increase: f64,
}

/// Projects the exact solution, steps to `t_final` with a time step that
/// divides it evenly, and reports pressure error and energy.
pub fn run_wave<T: Real>(
    cfg: &RunConfig,
    mut on_record: impl FnMut(&Record),
) -> Result<(RunSummary, FieldState<T>)> {
    if !(cfg.t_final >= 0.0) {
        return Err(Error::InvalidTimeStep(cfg.t_final));
    }
    let mesh = Arc::new(build_cube_mesh(cfg.mesh_cells, [-0.5; 3], [0.5; 3])?);
    let ops = Arc::new(ReferenceOperators::new(cfg.degree, cfg.basis)?);
    let materials = Materials::uniform(mesh.len(), 1.0, 1.0);
    let c_max = materials.max_speed();
    let disc = Discretization::<T>::new(ops, mesh.clone(), materials, cfg.lift_mode, cfg.execution)?;

    let dt_max = stable_dt(&mesh, cfg.degree, c_max, cfg.cfl)?;
    let steps = (cfg.t_final / dt_max).ceil() as usize;
    let dt = if steps == 0 {
        0.0
    } else {
        cfg.t_final / steps as f64
    };

    let mut state = disc.project(|x| exact_solution(x, 0.0), 0.0);
    let error_at = |s: &FieldState<T>| disc.l2_error(s, 0, |x| exact_solution(x, s.time)[0]);
    let e0 = disc.discrete_energy(&state);
    let mut records = Vec::new();
    let mut emit = |r: Record, records: &mut Vec<Record>| {
        on_record(&r);
        records.push(r);
    };
    emit(
        Record {
            step: 0,
            time: 0.0,
            l2_error: error_at(&state),
            energy: e0,
        },
        &mut records,
    );

    let mut rk = Lsrk4::new(state.data.len());
    let mut energy = e0;
    let mut max_increase = f64::NEG_INFINITY;
    for step in 1..=steps {
        let t = state.time;
        rk.step(&mut state.data, t, dt, |q, _, out| {
            disc.rhs_raw(q, out);
            Ok(())
        })?;
        state.time = if step == steps {
            cfg.t_final
        } else {
            step as f64 * dt
        };
        let e = disc.discrete_energy(&state);
        if !e.is_finite() || e > 10.0 * e0 {
            return Err(Error::Unstable {
                step,
                energy: e,
                initial: e0,
            });
        }
        max_increase = max_increase.max((e - energy) / e0);
        energy = e;
        let due = cfg.output_every > 0 && step % cfg.output_every == 0;
        if due || step == steps {
            emit(
                Record {
                    step,
                    time: state.time,
                    l2_error: error_at(&state),
                    energy: e,
                },
                &mut records,
            );
        }
    }
    let final_error = records.last().map(|r| r.l2_error).unwrap_or(0.0);
    Ok((
        RunSummary {
            records,
            steps,
            dt,
            initial_energy: e0,
            final_error,
            max_energy_increase: max_increase,
        },
        state,
    ))
}
