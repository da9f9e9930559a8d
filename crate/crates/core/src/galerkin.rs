//! Fourier-Galerkin shift operator.
//!
//! Construction proceeds in three stages:
//!
//! 1. [`compute_tilde_w`]: the double extrema-rule sum of the kernel against
//!    `c_i(u) c_j(v)`, which carries the weight `1/sqrt(1-v^2)` on the
//!    integration variable as well as on the output variable.
//! 2. [`weight_correct`]: removes the extra weight by multiplying with the
//!    Chebyshev series of `sqrt(1 - v^2)`. Index `i` is degree `i`; the series
//!    term at degree `j - 2l < 0` is read at degree `2l - j`.
//! 3. [`build_fg_shift`]: rescales rows so the matrix maps expansion
//!    coefficients of `f` to expansion coefficients of
//!    `g(x) = \int_0^1 W(x, y) f(y) dy`. Row `i` is divided by `2 * norm_i`:
//!    the discrete norm of `c_i` times the Jacobian 2 of `u = 2x - 1`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::chebyshev::{project_signal, resample, unmap_domain, ChebCoeffVector, QuadratureRule};
use crate::error::{Error, Result};
use crate::kernels::Graphon;

/// Default panel count.
pub const DEFAULT_PANELS: usize = 10;
/// Default basis size.
pub const DEFAULT_BASIS: usize = 5;

/// Asymmetry above which [`Spectrum::asymmetry_warning`] fires.
pub const ASYMMETRY_WARN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Double-weighted quadrature sums, zero padded.
    RawTilde,
    /// Weight-corrected matrix `W` of the correction series.
    Corrected,
    /// Coefficient-to-coefficient map: the shift operator used for filtering.
    Shift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    entries: DMatrix<f64>,
    stage: Stage,
    basis_size: usize,
    panels: usize,
}

impl OperatorMatrix {
    /// Wraps a square matrix at the given stage.
    pub fn new(entries: DMatrix<f64>, stage: Stage, panels: usize) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::shape(
                "non-empty square matrix",
                format!("{}x{}", entries.nrows(), entries.ncols()),
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("operator has non-finite entries".into()));
        }
        Ok(OperatorMatrix {
            basis_size: entries.nrows(),
            entries,
            stage,
            panels,
        })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    /// `self * f` on expansion coefficients.
    pub fn apply(&self, f: &ChebCoeffVector) -> Result<ChebCoeffVector> {
        if f.len() != self.basis_size {
            return Err(Error::shape(self.basis_size, f.len()));
        }
        let f = f.to_expansion()?;
        let g = &self.entries * DVector::from_column_slice(f.coeffs());
        ChebCoeffVector::expansion(g.as_slice().to_vec(), self.panels)
    }

    /// Headerless dense CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(&self.entries, out)
    }
}

pub(crate) fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// `[W~]_{ij} = (pi/P)^2 sum~_m sum~_n W(x_m, x_n) c_i(u_m) c_j(u_n)` for
/// degrees `i, j <= p`, zero beyond, as an `n_pad x n_pad` matrix.
///
/// Degrees above `p` alias back onto lower ones under a `p`-panel rule, so
/// they are left as padding zeros.
pub fn compute_tilde_w(w: &Graphon, p: usize, n_pad: usize) -> Result<OperatorMatrix> {
    let rule = QuadratureRule::new(p)?;
    if n_pad == 0 {
        return Err(Error::Domain("n_pad must be at least 1".into()));
    }
    let nodes = rule.nodes();
    let xs: Vec<f64> = nodes.iter().map(|&u| unmap_domain(u)).collect::<Result<_>>()?;
    let kernel = DMatrix::from_fn(p + 1, p + 1, |m, n| w.value(xs[m], xs[n]));
    let degrees = n_pad.min(p + 1);
    let basis = DMatrix::from_fn(degrees, p + 1, |i, m| rule.endpoint_factor(m) * rule.cheb_at_node(i, m));
    let scale = (PI / p as f64).powi(2);
    let block = &basis * &kernel * basis.transpose() * scale;
    let mut entries = DMatrix::zeros(n_pad, n_pad);
    entries.view_mut((0, 0), (degrees, degrees)).copy_from(&block);
    OperatorMatrix::new(entries, Stage::RawTilde, p)
}

/// `(pi/2) W_ij = W~_ij - sum_{l=1}^{p} (W~_{i,j+2l} + W~_{i,|j-2l|}) / (4l^2 - 1)`
/// for `i, j < n`.
pub fn weight_correct(raw: &OperatorMatrix, p: usize, n: usize) -> Result<OperatorMatrix> {
    if raw.stage != Stage::RawTilde {
        return Err(Error::Unsupported(format!(
            "weight_correct expects a raw operator, got {:?}",
            raw.stage
        )));
    }
    let needed = n + 2 * p;
    if raw.basis_size < needed {
        return Err(Error::shape(
            format!("raw operator padded to at least {needed}"),
            raw.basis_size,
        ));
    }
    let t = &raw.entries;
    let entries = DMatrix::from_fn(n, n, |i, j| {
        let mut series = 0.0;
        for l in 1..=p {
            let denom = (4 * l * l - 1) as f64;
            series += (t[(i, j + 2 * l)] + t[(i, j.abs_diff(2 * l))]) / denom;
        }
        2.0 / PI * (t[(i, j)] - series)
    });
    OperatorMatrix::new(entries, Stage::Corrected, p)
}

/// Fourier-Galerkin shift operator of `w` with `p` panels and `n` basis
/// functions.
pub fn build_fg_shift(w: &Graphon, p: usize, n: usize) -> Result<OperatorMatrix> {
    if n == 0 {
        return Err(Error::Domain("basis size must be at least 1".into()));
    }
    if n > p + 1 {
        return Err(Error::Aliasing {
            n_basis: n,
            needed: n,
            available: p + 1,
        });
    }
    let raw = compute_tilde_w(w, p, n + 2 * p)?;
    let corrected = weight_correct(&raw, p, n)?;
    let rule = QuadratureRule::new(p)?;
    let mut entries = corrected.entries;
    for i in 0..n {
        let scale = 2.0 * rule.norm(i);
        entries.row_mut(i).iter_mut().for_each(|v| *v /= scale);
    }
    OperatorMatrix::new(entries, Stage::Shift, p)
}

/// Approximates `g(x) = \int_0^1 W(x, y) f(y) dy` at `t_points` uniform
/// points of `[0, 1]`.
pub fn fredholm_solve<F: Fn(f64) -> f64>(w: &Graphon, f: F, p: usize, n: usize, t_points: usize) -> Result<Vec<f64>> {
    let op = build_fg_shift(w, p, n)?;
    let coeffs = project_signal(|u| f((u + 1.0) / 2.0), p, n)?;
    resample(&op.apply(&coeffs)?, t_points)
}

/// Eigenvalue estimates of an operator matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Eigenvalues of the symmetric part, by decreasing magnitude.
    pub values: Vec<f64>,
    /// Largest entry of `|O - O^T| / 2`.
    pub asymmetry: f64,
}

impl Spectrum {
    pub fn asymmetry_warning(&self) -> bool {
        self.asymmetry > ASYMMETRY_WARN
    }
}

/// Eigenvalues of `(O + O^T) / 2`, sorted by absolute value, descending.
pub fn resolvent_eigs(o: &OperatorMatrix) -> Spectrum {
    symmetric_spectrum(&o.entries)
}

pub(crate) fn symmetric_spectrum(m: &DMatrix<f64>) -> Spectrum {
    let sym = (m + m.transpose()) * 0.5;
    let asymmetry = (m - m.transpose()).amax() * 0.5;
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    Spectrum { values, asymmetry }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::BuiltinGraphon;

    fn er(p: f64) -> Graphon {
        BuiltinGraphon::er(p).unwrap().into()
    }

    #[test]
    fn tilde_w_of_constant_kernel() {
        for p in [0.0, 0.3, 0.5, 1.0] {
            let t = compute_tilde_w(&er(p), 10, 25).unwrap();
            for i in 0..25 {
                for j in 0..25 {
                    let want = if i == 0 && j == 0 { PI * PI * p } else { 0.0 };
                    assert!((t.entries()[(i, j)] - want).abs() < 1e-9, "({i},{j})");
                }
            }
        }
    }

    #[test]
    fn tilde_w_symmetric() {
        let w: Graphon = BuiltinGraphon::sin_product(0.5, 0.5, 3.5).unwrap().into();
        let t = compute_tilde_w(&w, 12, 13).unwrap();
        assert!((t.entries() - t.entries().transpose()).amax() < 1e-12);
    }

    #[test]
    fn correction_of_single_entry() {
        let p = 10;
        let mut raw = DMatrix::zeros(5 + 2 * p, 5 + 2 * p);
        raw[(0, 0)] = PI * PI * 0.5;
        let raw = OperatorMatrix::new(raw, Stage::RawTilde, p).unwrap();
        let c = weight_correct(&raw, p, 5).unwrap();
        assert!((c.entries()[(0, 0)] - 2.0 * PI * 0.5).abs() < 1e-12);
        // the l = 1 fold at column 2 picks up the degree-0 entry
        assert!((c.entries()[(0, 2)] + 2.0 / PI * PI * PI * 0.5 / 3.0).abs() < 1e-12);
        let zero = OperatorMatrix::new(DMatrix::zeros(25, 25), Stage::RawTilde, p).unwrap();
        assert!(weight_correct(&zero, p, 5).unwrap().entries().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn correction_needs_padding() {
        let raw = compute_tilde_w(&er(0.5), 10, 20).unwrap();
        assert!(matches!(weight_correct(&raw, 10, 5), Err(Error::Shape { .. })));
    }

    #[test]
    fn er_operator_has_one_row() {
        let op = build_fg_shift(&er(0.5), 10, 5).unwrap();
        let e = op.entries();
        assert!((e[(0, 0)] - 0.5).abs() < 1e-12);
        for i in 1..5 {
            for j in 0..5 {
                assert!(e[(i, j)].abs() < 1e-9);
            }
        }
        // \int_{-1}^{1} c_2 = -2/3, \int c_4 = -2/15, scaled by p/2
        assert!((e[(0, 2)] + 0.5 / 3.0).abs() < 1e-12);
        assert!((e[(0, 4)] + 0.5 / 15.0).abs() < 1e-12);
        assert!(e[(0, 1)].abs() < 1e-12 && e[(0, 3)].abs() < 1e-12);
    }

    #[test]
    fn exp_operator_has_several_rows() {
        let w: Graphon = BuiltinGraphon::exp_sum(0.5).unwrap().into();
        let op = build_fg_shift(&w, 10, 5).unwrap();
        let rows = (0..5).filter(|&i| op.entries().row(i).amax() > 1e-9).count();
        assert!(rows > 1);
    }

    #[test]
    fn zero_graphon() {
        let op = build_fg_shift(&er(0.0), 10, 5).unwrap();
        assert!(op.entries().iter().all(|&v| v == 0.0));
        let g = fredholm_solve(&er(0.0), |y| y, 10, 5, 20).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn aliasing_guard() {
        assert!(matches!(build_fg_shift(&er(0.5), 4, 6), Err(Error::Aliasing { .. })));
        assert!(build_fg_shift(&er(0.5), 4, 5).is_ok());
    }

    #[test]
    fn fredholm_constant_kernel() {
        let g = fredholm_solve(&er(0.5), |y| y, 10, 5, 200).unwrap();
        assert!(g.iter().all(|v| (v - 0.25).abs() < 1e-6));
    }

    fn exp_error(p: usize, n: usize) -> f64 {
        let w: Graphon = BuiltinGraphon::exp_sum(0.5).unwrap().into();
        let g = fredholm_solve(&w, |y| y, p, n, 200).unwrap();
        let c = 4.0 - 6.0 * (-0.5f64).exp();
        g.iter()
            .enumerate()
            .map(|(k, v)| {
                let x = k as f64 / 199.0;
                let exact = c * (-x / 2.0).exp();
                ((v - exact) / exact).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn fredholm_exponential_kernel() {
        assert!(exp_error(10, 5) < 1e-2);
        assert!(exp_error(32, 8) < 1e-4);
    }

    #[test]
    fn fredholm_error_nonincreasing_in_panels() {
        let errs: Vec<f64> = [8, 16, 32, 64].iter().map(|&p| exp_error(p, 5)).collect();
        // at fixed n the error is dominated by basis truncation; allow rounding noise
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{errs:?}");
        }
    }

    #[test]
    fn construction_is_deterministic() {
        let w: Graphon = BuiltinGraphon::exp_distance(10.0).unwrap().into();
        assert_eq!(build_fg_shift(&w, 10, 5).unwrap(), build_fg_shift(&w, 10, 5).unwrap());
    }

    #[test]
    fn resolvent_of_er() {
        let s = resolvent_eigs(&build_fg_shift(&er(0.5), 10, 5).unwrap());
        assert!((s.values[0] - 0.5).abs() < 5e-2, "{:?}", s.values);
        assert!(s.values[1..].iter().all(|v| v.abs() < 5e-2));
        assert!(s.asymmetry_warning());
        let zero = OperatorMatrix::new(DMatrix::zeros(4, 4), Stage::Shift, 10).unwrap();
        let z = resolvent_eigs(&zero);
        assert_eq!(z.values, vec![0.0; 4]);
        assert!(!z.asymmetry_warning());
    }

    #[test]
    fn operator_csv() {
        let op = build_fg_shift(&er(0.5), 10, 3).unwrap();
        let mut buf = Vec::new();
        op.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().all(|l| l.split(',').count() == 3));
    }
}
