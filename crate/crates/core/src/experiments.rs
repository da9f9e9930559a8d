//! Low-pass, consensus and filter-convergence studies.
//!
//! Every study compares two outputs on a common grid of `t_points` uniform
//! points of `[0, 1]`:
//!
//! * the graphon filter output: `H` applied to the Chebyshev projection of
//!   the input, resampled;
//! * the graph filter output: `sum_k h_k S^k x` on a sampled graph with
//!   `x_i = f(mu_i)`, read back as a step function.
//!
//! The discrepancy is `sqrt(mean((graph - graphon)^2))` over the grid.

use std::io::Write;

use rayon::prelude::*;

use crate::chebyshev::{project_signal, resample, resample_grid, ChebCoeffVector};
use crate::error::{Error, Result};
use crate::filter::{
    apply_graph_filter, design_filter, fg_filter_operator, DesignResult, FilterCoeffs, IdealResponse, DEFAULT_SVD_TOL,
};
use crate::galerkin::{build_fg_shift, OperatorMatrix, DEFAULT_BASIS, DEFAULT_PANELS};
use crate::input::InputFunction;
use crate::kernels::{BuiltinGraphon, Graphon};
use crate::sampling::{sample_graph, scaled_adjacency, Seed};
use crate::step::{lift, Domain};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub graphons: Vec<Graphon>,
    pub node_counts: Vec<usize>,
    pub seeds: Vec<Seed>,
    /// Orders swept by the design studies, `1..=max_order`.
    pub max_order: usize,
    /// Order whose curves are written out.
    pub order: usize,
    /// Overrides the study's default ideal response.
    pub ideal: Option<IdealResponse>,
    /// Fixed taps for the convergence study.
    pub coeffs: Option<FilterCoeffs>,
    pub panels: usize,
    pub basis: usize,
    pub input: InputFunction,
    pub t_points: usize,
    pub sorted: bool,
    pub svd_tol: f64,
}

impl ExperimentConfig {
    /// The three graphons of the design studies at `N = 2000`.
    pub fn design_default() -> Self {
        ExperimentConfig {
            graphons: vec![
                BuiltinGraphon::Er { p: 0.5 }.into(),
                BuiltinGraphon::SinProduct { a: 0.5, b: 0.5, c: 3.5 }.into(),
                BuiltinGraphon::ExpDistance { alpha: 10.0 }.into(),
            ],
            node_counts: vec![2000],
            seeds: vec![Seed(1)],
            max_order: 8,
            order: 5,
            ideal: None,
            coeffs: None,
            panels: DEFAULT_PANELS,
            basis: DEFAULT_BASIS,
            input: InputFunction::XPlusSin,
            t_points: 200,
            sorted: true,
            svd_tol: DEFAULT_SVD_TOL,
        }
    }

    /// `exp(-(x+y)/2)` with taps `[0.5, 0.3, 0.2]` over `N = 100, 400, 1600`.
    pub fn convergence_default() -> Self {
        ExperimentConfig {
            graphons: vec![BuiltinGraphon::ExpSum { alpha: 0.5 }.into()],
            node_counts: vec![100, 400, 1600],
            seeds: (0..5).map(Seed).collect(),
            max_order: 3,
            order: 3,
            coeffs: Some(FilterCoeffs::new(vec![0.5, 0.3, 0.2]).expect("static taps")),
            ..Self::design_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::param(name, "must be positive"))
            } else {
                Ok(())
            }
        };
        if self.graphons.is_empty() {
            return Err(Error::param("graphons", "at least one graphon required"));
        }
        if self.node_counts.is_empty() || self.seeds.is_empty() {
            return Err(Error::param("node_counts/seeds", "must be non-empty"));
        }
        for &n in &self.node_counts {
            positive("node_counts", n)?;
        }
        positive("max_order", self.max_order)?;
        positive("order", self.order)?;
        positive("basis", self.basis)?;
        positive("panels", self.panels)?;
        if self.t_points < 2 {
            return Err(Error::param("t_points", "need at least 2 points"));
        }
        if self.order > self.max_order {
            return Err(Error::param(
                "order",
                format!("{} exceeds max_order {}", self.order, self.max_order),
            ));
        }
        if let Some(d) = &self.ideal {
            if d.len() != self.basis {
                return Err(Error::param(
                    "ideal",
                    format!("length {} differs from basis size {}", d.len(), self.basis),
                ));
            }
        }
        Ok(())
    }
}

/// One `(graphon, N, seed, order)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub graphon: String,
    pub n: usize,
    pub seed: u64,
    pub order: usize,
    /// Design residual; absent when the taps were given rather than designed.
    pub residual: Option<f64>,
    pub l2_discrepancy: f64,
}

/// Output vectors on the common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub graphon: String,
    pub n: usize,
    pub seed: u64,
    pub order: usize,
    pub grid: Vec<f64>,
    pub ideal: Vec<f64>,
    pub graphon_pred: Vec<f64>,
    pub graph_empirical: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<ExperimentRecord>,
    pub curves: Vec<Curves>,
}

impl ExperimentOutput {
    /// Mean discrepancy per `(graphon, N)` over seeds, at the given order.
    pub fn mean_discrepancy(&self, graphon: &str, order: usize) -> Vec<(usize, f64)> {
        let mut by_n: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
        for r in self.records.iter().filter(|r| r.graphon == graphon && r.order == order) {
            let e = by_n.entry(r.n).or_default();
            e.0 += r.l2_discrepancy;
            e.1 += 1;
        }
        by_n.into_iter().map(|(n, (s, c))| (n, s / c as f64)).collect()
    }

    /// Design residual recorded for `(graphon, order)`.
    pub fn residual(&self, graphon: &str, order: usize) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.graphon == graphon && r.order == order)
            .and_then(|r| r.residual)
    }
}

/// One filter and its graphon-side output on the grid.
struct Prepared {
    order: usize,
    residual: Option<f64>,
    coeffs: FilterCoeffs,
    graphon_pred: Vec<f64>,
}

fn graphon_output(op: &OperatorMatrix, h: &FilterCoeffs, f: &ChebCoeffVector, t_points: usize) -> Result<Vec<f64>> {
    let h_op = fg_filter_operator(op, h);
    let g = &h_op * nalgebra::DVector::from_column_slice(f.coeffs());
    resample(
        &ChebCoeffVector::expansion(g.as_slice().to_vec(), op.panels())?,
        t_points,
    )
}

fn discrepancy(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (sum / a.len() as f64).sqrt()
}

fn run_cells(
    cfg: &ExperimentConfig,
    filters: impl Fn(&Graphon, &OperatorMatrix, &ChebCoeffVector) -> Result<(Vec<Prepared>, Vec<f64>)> + Sync,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let input = cfg.input;
    let fc = project_signal(|u| input.eval((u + 1.0) / 2.0), cfg.panels, cfg.basis)?;
    let grid: Vec<f64> = resample_grid(cfg.t_points).iter().map(|u| (u + 1.0) / 2.0).collect();

    let prepared: Vec<(Vec<Prepared>, Vec<f64>)> = cfg
        .graphons
        .iter()
        .map(|w| {
            let op = build_fg_shift(w, cfg.panels, cfg.basis)?;
            filters(w, &op, &fc)
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize, Seed)> = (0..cfg.graphons.len())
        .flat_map(|g| {
            cfg.node_counts
                .iter()
                .flat_map(move |&n| cfg.seeds.iter().map(move |&s| (g, n, s)))
        })
        .collect();

    let largest_n = *cfg.node_counts.iter().max().expect("validated");
    let first_seed = cfg.seeds[0];

    let results: Vec<(Vec<ExperimentRecord>, Option<Curves>)> = cells
        .par_iter()
        .map(|&(gi, n, seed)| {
            let w = &cfg.graphons[gi];
            let (filters, ideal) = &prepared[gi];
            let graph = sample_graph(w, n, seed, cfg.sorted)?;
            let s = scaled_adjacency(&graph);
            let latent = graph.latent().expect("sampled graphs carry latent values");
            let x: Vec<f64> = latent.iter().map(|&mu| input.eval(mu)).collect();
            let mut records = Vec::with_capacity(filters.len());
            let mut curves = None;
            for prep in filters {
                let y = apply_graph_filter(&s, &prep.coeffs, &x)?;
                let step = lift(&y, Domain::Unit)?;
                let graph_values: Vec<f64> = grid.iter().map(|&t| step.value_at(t)).collect::<Result<_>>()?;
                records.push(ExperimentRecord {
                    graphon: w.label().to_string(),
                    n,
                    seed: seed.0,
                    order: prep.order,
                    residual: prep.residual,
                    l2_discrepancy: discrepancy(&graph_values, &prep.graphon_pred),
                });
                if prep.order == cfg.order && n == largest_n && seed == first_seed {
                    curves = Some(Curves {
                        graphon: w.label().to_string(),
                        n,
                        seed: seed.0,
                        order: prep.order,
                        grid: grid.clone(),
                        ideal: ideal.clone(),
                        graphon_pred: prep.graphon_pred.clone(),
                        graph_empirical: graph_values,
                    });
                }
            }
            Ok((records, curves))
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut curves = Vec::new();
    for (r, c) in results {
        records.extend(r);
        curves.extend(c);
    }
    Ok(ExperimentOutput { records, curves })
}

/// Designs a filter for every order `1..=max_order` against `ideal` and runs
/// each on sampled graphs.
pub fn run_design_experiment(cfg: &ExperimentConfig, ideal: &IdealResponse) -> Result<ExperimentOutput> {
    if ideal.len() != cfg.basis {
        return Err(Error::param(
            "ideal",
            format!("length {} differs from basis size {}", ideal.len(), cfg.basis),
        ));
    }
    run_cells(cfg, |_, op, fc| {
        let ideal_out = resample(
            &ChebCoeffVector::expansion(
                (ideal.matrix() * nalgebra::DVector::from_column_slice(fc.coeffs()))
                    .as_slice()
                    .to_vec(),
                cfg.panels,
            )?,
            cfg.t_points,
        )?;
        let filters = (1..=cfg.max_order)
            .map(|order| {
                let DesignResult { coeffs, residual, .. } = design_filter(op, order, ideal, cfg.svd_tol)?;
                let graphon_pred = graphon_output(op, &coeffs, fc, cfg.t_points)?;
                Ok(Prepared {
                    order,
                    residual: Some(residual),
                    coeffs,
                    graphon_pred,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((filters, ideal_out))
    })
}

/// Low-pass study with `D = diag(1, 5, 5, 10, 0, ...)` unless overridden.
pub fn run_lowpass(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let ideal = match &cfg.ideal {
        Some(d) => d.clone(),
        None => IdealResponse::lowpass(cfg.basis)?,
    };
    run_design_experiment(cfg, &ideal)
}

/// Consensus study with `D = diag(e_1)` unless overridden.
pub fn run_consensus(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let ideal = match &cfg.ideal {
        Some(d) => d.clone(),
        None => IdealResponse::consensus(cfg.basis)?,
    };
    run_design_experiment(cfg, &ideal)
}

/// Graph-vs-graphon discrepancy of a fixed filter across growing `N`.
pub fn run_filter_convergence(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let coeffs = cfg
        .coeffs
        .clone()
        .ok_or_else(|| Error::param("coeffs", "convergence study needs filter taps"))?;
    if !cfg.node_counts.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::param("node_counts", "must be strictly increasing"));
    }
    let mut cfg = cfg.clone();
    cfg.order = coeffs.order();
    cfg.max_order = coeffs.order();
    run_cells(&cfg, |_, op, fc| {
        let graphon_pred = graphon_output(op, &coeffs, fc, cfg.t_points)?;
        // the ideal column shows the unfiltered input representation
        let ideal = resample(fc, cfg.t_points)?;
        Ok((
            vec![Prepared {
                order: coeffs.order(),
                residual: None,
                coeffs: coeffs.clone(),
                graphon_pred,
            }],
            ideal,
        ))
    })
}

/// Columns `graphon,n,seed,order,residual,l2_discrepancy`; a missing residual
/// is an empty field.
pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["graphon", "n", "seed", "order", "residual", "l2_discrepancy"])?;
    for r in records {
        w.write_record([
            r.graphon.clone(),
            r.n.to_string(),
            r.seed.to_string(),
            r.order.to_string(),
            r.residual.map(|v| v.to_string()).unwrap_or_default(),
            r.l2_discrepancy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `grid_point,ideal,graphon_pred,graph_empirical`.
pub fn write_curves_csv<W: Write>(curves: &Curves, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["grid_point", "ideal", "graphon_pred", "graph_empirical"])?;
    for k in 0..curves.grid.len() {
        w.write_record([
            curves.grid[k].to_string(),
            curves.ideal[k].to_string(),
            curves.graphon_pred[k].to_string(),
            curves.graph_empirical[k].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// File-name friendly form of a graphon label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
        .collect()
}
