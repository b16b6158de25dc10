//! Upwind DG discretisation of the acoustic wave equation
//! `(1/κ) ∂p/∂τ + ∇·u = 0`, `ρ ∂u/∂τ + ∇p = 0` with mirror boundary
//! conditions, low-storage RK4 time stepping, and error and energy
//! functionals.

mod discretization;
mod exact;
mod io;
mod operators;
mod run;
mod state;
mod time;

pub use discretization::{Discretization, Execution};
pub use exact::{exact_solution, EXACT_SPEED};
pub use io::{read_checkpoint, time_series_csv, write_checkpoint, CSV_HEADER};
pub use operators::{OperatorKind, ReferenceOperators};
pub use run::{run_wave, Record, RunConfig, RunSummary};
pub use state::{FieldState, Materials, FIELDS};
pub use time::{stable_dt, Lsrk4, DEFAULT_CFL, RK4A, RK4B, RK4C};

/// Polynomial basis the element coefficients are expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Nodal,
    Bernstein,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Nodal => "nodal",
            Basis::Bernstein => "bernstein",
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nodal" => Ok(Basis::Nodal),
            "bernstein" | "bb" => Ok(Basis::Bernstein),
            other => Err(format!("unknown basis '{other}'")),
        }
    }
}

/// How the surface kernel applies the lift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LiftMode {
    /// Dense `N_p × 4 N^f_p` product.
    Dense,
    /// `E_L (I ⊗ L_0)`, Bernstein only.
    Factorized,
    /// Cascaded one-degree reductions, Bernstein only.
    Optimal,
}

impl LiftMode {
    pub fn name(self) -> &'static str {
        match self {
            LiftMode::Dense => "dense",
            LiftMode::Factorized => "factorized",
            LiftMode::Optimal => "optimal",
        }
    }
}

impl std::str::FromStr for LiftMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dense" => Ok(LiftMode::Dense),
            "factorized" => Ok(LiftMode::Factorized),
            "optimal" => Ok(LiftMode::Optimal),
            other => Err(format!("unknown lift mode '{other}'")),
        }
    }
}
