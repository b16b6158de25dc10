use super::Basis;
use crate::error::{Error, Result};
use crate::scalar::{Precision, Real};

/// Unknowns per element: `p, u1, u2, u3`.
pub const FIELDS: usize = 4;

/// Coefficients of `p, u1, u2, u3` for every element, element-major:
/// element `k`, field `c`, coefficient `i` lives at `(k·4 + c)·N_p + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState<T> {
    pub degree: usize,
    pub np: usize,
    pub n_elements: usize,
    pub basis: Basis,
    pub time: f64,
    pub data: Vec<T>,
}

impl<T: Real> FieldState<T> {
    pub fn zeros(degree: usize, np: usize, n_elements: usize, basis: Basis) -> Self {
        Self {
            degree,
            np,
            n_elements,
            basis,
            time: 0.0,
            data: vec![T::ZERO; FIELDS * np * n_elements],
        }
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn stride(&self) -> usize {
        FIELDS * self.np
    }

    pub fn element(&self, k: usize) -> &[T] {
        &self.data[k * self.stride()..(k + 1) * self.stride()]
    }

    pub fn field(&self, k: usize, c: usize) -> &[T] {
        let s = (k * FIELDS + c) * self.np;
        &self.data[s..s + self.np]
    }

    pub fn field_mut(&mut self, k: usize, c: usize) -> &mut [T] {
        let s = (k * FIELDS + c) * self.np;
        &mut self.data[s..s + self.np]
    }

    pub fn cast<U: Real>(&self) -> FieldState<U> {
        FieldState {
            degree: self.degree,
            np: self.np,
            n_elements: self.n_elements,
            basis: self.basis,
            time: self.time,
            data: self.data.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

/// Piecewise-constant bulk modulus `κ` and density `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Materials {
    pub kappa: Vec<f64>,
    pub rho: Vec<f64>,
}

impl Materials {
    pub fn uniform(n_elements: usize, kappa: f64, rho: f64) -> Self {
        Self {
            kappa: vec![kappa; n_elements],
            rho: vec![rho; n_elements],
        }
    }

    pub fn validate(&self, n_elements: usize) -> Result<()> {
        if self.kappa.len() != n_elements || self.rho.len() != n_elements {
            return Err(Error::SizeMismatch {
                expected: n_elements,
                got: self.kappa.len().min(self.rho.len()),
            });
        }
        for k in 0..n_elements {
            if !(self.kappa[k] > 0.0 && self.rho[k] > 0.0) {
                return Err(Error::InvalidMaterial(k));
            }
        }
        Ok(())
    }

    /// Speed of sound `c = √(κ/ρ)`.
    pub fn speed(&self, k: usize) -> f64 {
        (self.kappa[k] / self.rho[k]).sqrt()
    }

    /// Impedance `ρc`.
    pub fn impedance(&self, k: usize) -> f64 {
        self.rho[k] * self.speed(k)
    }

    pub fn max_speed(&self) -> f64 {
        (0..self.kappa.len()).map(|k| self.speed(k)).fold(0.0, f64::max)
    }
}
