//! First-kind Chebyshev polynomials and the extrema quadrature rule.
//!
//! The rule with `P` panels uses the `P + 1` nodes `cos(pi m / P)`, weight
//! `pi / P` and halved end terms. It integrates `f(u) / sqrt(1 - u^2)` exactly
//! for polynomials `f` of degree `<= 2P - 1`.
//!
//! Coefficient vectors are stored in expansion form: the raw moment
//! `\int f c_i / sqrt(1 - u^2)` divided by the discrete norm of `c_i` under the
//! rule (`pi` for degree 0 and degree `P`, `pi / 2` otherwise). With that
//! normalization [`resample`] is plain summation `sum_i g_i c_i(u)`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// `c_degree(u) = cos(degree * acos(u))`.
pub fn cheb_eval(degree: usize, u: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("Chebyshev argument {u} not in [-1, 1]")));
    }
    Ok(cheb_unchecked(degree, u))
}

#[inline]
fn cheb_unchecked(degree: usize, u: f64) -> f64 {
    match degree {
        0 => 1.0,
        1 => u,
        _ if u == 1.0 => 1.0,
        _ if u == -1.0 => {
            if degree.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        }
        _ => (degree as f64 * u.acos()).cos(),
    }
}

/// Sum of `coeffs[i] c_i(u)` by the three-term recurrence.
fn cheb_series(coeffs: &[f64], u: f64) -> f64 {
    let mut acc = 0.0;
    let (mut prev, mut cur) = (1.0, u);
    for (i, &c) in coeffs.iter().enumerate() {
        let ci = match i {
            0 => 1.0,
            1 => u,
            _ => {
                let next = 2.0 * u * cur - prev;
                prev = cur;
                cur = next;
                next
            }
        };
        acc += c * ci;
    }
    acc
}

/// Extrema (Gauss-Chebyshev-Lobatto) rule with `p` panels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    p: usize,
    nodes: Vec<f64>,
}

impl QuadratureRule {
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("quadrature needs at least one panel".into()));
        }
        // cos(pi m / p) written as sin(pi (p - 2m) / 2p): exactly antisymmetric
        // about the midpoint, exactly +-1 at the ends.
        let nodes = (0..=p)
            .map(|m| (PI * (p as f64 - 2.0 * m as f64) / (2.0 * p as f64)).sin())
            .collect();
        Ok(QuadratureRule { p, nodes })
    }

    pub fn panels(&self) -> usize {
        self.p
    }

    /// Nodes from `+1` down to `-1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Tilde-sum weight of node `m` (1/2 at both ends).
    #[inline]
    pub fn endpoint_factor(&self, m: usize) -> f64 {
        if m == 0 || m == self.p {
            0.5
        } else {
            1.0
        }
    }

    /// Discrete norm `sum~ c_i(u_m)^2 * pi / p` of degree `i <= p`.
    pub fn norm(&self, degree: usize) -> f64 {
        if degree == 0 || degree == self.p {
            PI
        } else {
            PI / 2.0
        }
    }

    /// `cos(pi m i / p)`, the value of `c_i` at node `m`, reduced exactly.
    #[inline]
    pub fn cheb_at_node(&self, degree: usize, m: usize) -> f64 {
        let two_p = 2 * self.p;
        let k = (degree * m) % two_p;
        // cos(pi k / p) for k in [0, 2p)
        let k = if k > self.p { two_p - k } else { k };
        (PI * (self.p as f64 - 2.0 * k as f64) / (2.0 * self.p as f64)).sin()
    }
}

/// `(pi/p) [f(u_0)/2 + f(u_1) + ... + f(u_{p-1}) + f(u_p)/2]`.
///
/// Mirror nodes are summed in pairs so odd integrands cancel exactly.
pub fn quad_integrate<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: F) -> f64 {
    let values: Vec<f64> = rule.nodes.iter().map(|&u| f(u)).collect();
    tilde_sum(rule, &values) * PI / rule.p as f64
}

pub(crate) fn tilde_sum(rule: &QuadratureRule, values: &[f64]) -> f64 {
    let p = rule.p;
    let mut acc = 0.0;
    for m in 0..p.div_ceil(2) {
        acc += rule.endpoint_factor(m) * (values[m] + values[p - m]);
    }
    if p.is_multiple_of(2) {
        acc += values[p / 2];
    }
    acc
}

/// Normalization applied to stored coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Raw weighted moments `\int f c_i / sqrt(1-u^2)` under a `panels` rule.
    Moments { panels: usize },
    /// Moments divided by the discrete norms of the `panels` rule.
    Expansion { panels: usize },
}

/// Coefficients in the first-kind Chebyshev basis; index `i` is degree `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebCoeffVector {
    coeffs: Vec<f64>,
    convention: Convention,
}

impl ChebCoeffVector {
    pub fn new(coeffs: Vec<f64>, convention: Convention) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("coefficient vector must be non-empty".into()));
        }
        if let Some(v) = coeffs.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient {v}")));
        }
        Ok(ChebCoeffVector { coeffs, convention })
    }

    /// Expansion coefficients taken as given (`panels` only records provenance).
    pub fn expansion(coeffs: Vec<f64>, panels: usize) -> Result<Self> {
        Self::new(coeffs, Convention::Expansion { panels })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Converts raw moments to expansion coefficients.
    pub fn to_expansion(&self) -> Result<ChebCoeffVector> {
        match self.convention {
            Convention::Expansion { .. } => Ok(self.clone()),
            Convention::Moments { panels } => {
                let rule = QuadratureRule::new(panels)?;
                let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c / rule.norm(i)).collect();
                Ok(ChebCoeffVector {
                    coeffs,
                    convention: Convention::Expansion { panels },
                })
            }
        }
    }

    /// Single CSV row with header `c0,c1,...`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record((0..self.coeffs.len()).map(|i| format!("c{i}")))?;
        w.write_record(self.coeffs.iter().map(|c| c.to_string()))?;
        w.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`write_csv`](Self::write_csv) as expansion
    /// coefficients.
    pub fn read_csv<R: Read>(input: R, panels: usize) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = r.headers()?.clone();
        for (i, h) in headers.iter().enumerate() {
            if h != format!("c{i}") {
                return Err(Error::parse(
                    format!("header column {i}"),
                    format!("expected `c{i}`, got `{h}`"),
                ));
            }
        }
        let mut records = r.records();
        let row = records
            .next()
            .ok_or_else(|| Error::parse("coefficients", "missing data row"))??;
        if records.next().is_some() {
            return Err(Error::parse("coefficients", "more than one data row"));
        }
        let coeffs = row
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.parse::<f64>()
                    .map_err(|e| Error::parse(format!("c{i}"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::expansion(coeffs, panels)
    }
}

/// Projects `f` (on `[-1, 1]`) onto the first `n_basis` Chebyshev polynomials.
pub fn project_signal<F: Fn(f64) -> f64>(f: F, p: usize, n_basis: usize) -> Result<ChebCoeffVector> {
    project_moments(f, p, n_basis)?.to_expansion()
}

/// Raw weighted moments `[f]_i = \int f c_i / sqrt(1-u^2)` by quadrature.
pub fn project_moments<F: Fn(f64) -> f64>(f: F, p: usize, n_basis: usize) -> Result<ChebCoeffVector> {
    let rule = QuadratureRule::new(p)?;
    if n_basis == 0 {
        return Err(Error::Domain("n_basis must be at least 1".into()));
    }
    if n_basis > p + 1 {
        return Err(Error::Aliasing {
            n_basis,
            needed: n_basis,
            available: p + 1,
        });
    }
    let values: Vec<f64> = rule.nodes.iter().map(|&u| f(u)).collect();
    let mut weighted = vec![0.0; p + 1];
    let coeffs = (0..n_basis)
        .map(|i| {
            for (m, w) in weighted.iter_mut().enumerate() {
                *w = values[m] * rule.cheb_at_node(i, m);
            }
            tilde_sum(&rule, &weighted) * PI / p as f64
        })
        .collect();
    ChebCoeffVector::new(coeffs, Convention::Moments { panels: p })
}

/// The `t_points` uniform points `-1, ..., 1` used by [`resample`].
pub fn resample_grid(t_points: usize) -> Vec<f64> {
    let last = (t_points - 1) as f64;
    (0..t_points)
        .map(|k| {
            if k + 1 == t_points {
                1.0
            } else {
                -1.0 + 2.0 * k as f64 / last
            }
        })
        .collect()
}

/// Evaluates `sum_i g_i c_i(u)` at `t_points` uniform points on `[-1, 1]`.
pub fn resample(g: &ChebCoeffVector, t_points: usize) -> Result<Vec<f64>> {
    if t_points < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 resample points, got {t_points}"
        )));
    }
    let g = g.to_expansion()?;
    Ok(resample_grid(t_points)
        .into_iter()
        .map(|u| cheb_series(&g.coeffs, u))
        .collect())
}

/// `u = 2x - 1`.
pub fn map_domain(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} not in [0, 1]")));
    }
    Ok(2.0 * x - 1.0)
}

/// `x = (u + 1) / 2`.
pub fn unmap_domain(u: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("{u} not in [-1, 1]")));
    }
    Ok((u + 1.0) / 2.0)
}
