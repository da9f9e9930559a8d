//! Lifting node signals to step functions.
//!
//! Strip `i` covers `[i/N, (i+1)/N)` of the domain (the last strip is closed)
//! and carries the basis function `b_i = N` on that strip. With this amplitude
//! the step-basis matrix of an empirical graphon is the adjacency matrix
//! itself, and `(1/N) W_a x` is exactly `S x`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernels::{cell, Graphon};
use crate::sampling::matvec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `[0, 1]`
    Unit,
    /// `[-1, 1]`
    Symmetric,
}

impl Domain {
    fn bounds(self) -> (f64, f64) {
        match self {
            Domain::Unit => (0.0, 1.0),
            Domain::Symmetric => (-1.0, 1.0),
        }
    }
}

/// A node signal viewed as the step function `sum_i x_i b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSignal {
    coeffs: Vec<f64>,
    domain: Domain,
}

impl StepSignal {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn strip(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.domain.bounds();
        if !(lo..=hi).contains(&t) {
            return Err(Error::Domain(format!("{t} outside [{lo}, {hi}]")));
        }
        Ok(cell((t - lo) / (hi - lo), self.coeffs.len()))
    }

    /// Function value `N * x_i` on the strip containing `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let i = self.strip(t)?;
        Ok(self.coeffs[i] * self.coeffs.len() as f64)
    }

    /// Node-domain value `x_i` of the strip containing `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        Ok(self.coeffs[self.strip(t)?])
    }
}

pub fn lift(x: &[f64], domain: Domain) -> Result<StepSignal> {
    if x.is_empty() {
        return Err(Error::Domain("cannot lift an empty vector".into()));
    }
    Ok(StepSignal {
        coeffs: x.to_vec(),
        domain,
    })
}

pub fn unlift(f: &StepSignal) -> Vec<f64> {
    f.coeffs.clone()
}

/// Step-basis matrix `[W_a]_{ij} = \int\int W b_i(x) b_j(y)`.
///
/// Grid cells coincide with strips, so each entry is a single cell value:
/// `W_ij * (1/N^2) * N * N`.
pub fn step_operator_matrix(w: &Graphon) -> Result<DMatrix<f64>> {
    let (side, values) = w.grid().ok_or_else(|| {
        Error::Unsupported(format!(
            "step operator needs a grid graphon, `{}` is analytic",
            w.label()
        ))
    })?;
    Ok(DMatrix::from_row_slice(side, side, values))
}

/// `lift((1/N) W_a unlift(f))`.
pub fn apply_empirical_operator(w: &Graphon, f: &StepSignal) -> Result<StepSignal> {
    let wa = step_operator_matrix(w)?;
    let n = wa.nrows();
    if f.len() != n {
        return Err(Error::shape(n, f.len()));
    }
    let nf = n as f64;
    let scaled = wa.map(|v| v / nf);
    Ok(StepSignal {
        coeffs: matvec(&scaled, &f.coeffs),
        domain: f.domain,
    })
}
