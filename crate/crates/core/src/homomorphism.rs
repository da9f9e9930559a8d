//! Homomorphism counts `hom(F, G)` and densities `t(F, G)`, `t(F, W)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::Graphon;
use crate::sampling::{Graph, Seed};

/// Largest motif handled by the exhaustive counter.
pub const MAX_MOTIF_NODES: usize = 8;

const MC_BATCH: usize = 4096;

/// A small simple graph `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    k: usize,
    edges: Vec<(usize, usize)>,
}

impl Motif {
    pub fn new(k: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("motif needs at least one node".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &(a, b) in &edges {
            if a == b || a >= k || b >= k {
                return Err(Error::Domain(format!("invalid motif edge ({a}, {b}) for k = {k}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::Domain(format!("duplicate motif edge ({a}, {b})")));
            }
        }
        Ok(Motif { k, edges })
    }

    /// `K_2`.
    pub fn edge() -> Self {
        Motif {
            k: 2,
            edges: vec![(0, 1)],
        }
    }

    /// `K_3`.
    pub fn triangle() -> Self {
        Motif {
            k: 3,
            edges: vec![(0, 1), (1, 2), (0, 2)],
        }
    }

    /// Path on three nodes.
    pub fn path3() -> Self {
        Motif {
            k: 3,
            edges: vec![(0, 1), (1, 2)],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Disjoint union `self ⊎ other`.
    pub fn disjoint_union(&self, other: &Motif) -> Motif {
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (a + self.k, b + self.k)));
        Motif {
            k: self.k + other.k,
            edges,
        }
    }

    fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.k];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }
}

impl fmt::Display for Motif {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Motif::edge() {
            return write!(f, "edge");
        }
        if *self == Motif::triangle() {
            return write!(f, "triangle");
        }
        if *self == Motif::path3() {
            return write!(f, "path3");
        }
        let list: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "custom:{}", list.join(","))
    }
}

impl FromStr for Motif {
    type Err = Error;

    /// `edge`, `triangle`, `path3` or `custom:0-1,1-2,...`. A custom motif has
    /// as many nodes as its largest endpoint plus one.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "edge" => Ok(Self::edge()),
            "triangle" => Ok(Self::triangle()),
            "path3" => Ok(Self::path3()),
            other => {
                let list = other
                    .strip_prefix("custom:")
                    .ok_or_else(|| Error::parse("motif", format!("unknown motif `{other}`")))?;
                let edges = list
                    .split(',')
                    .map(|pair| {
                        let (a, b) = pair
                            .split_once('-')
                            .ok_or_else(|| Error::parse("motif edge", format!("expected `a-b`, got `{pair}`")))?;
                        let parse = |v: &str| {
                            v.trim()
                                .parse::<usize>()
                                .map_err(|e| Error::parse("motif edge", format!("`{v}`: {e}")))
                        };
                        Ok((parse(a)?, parse(b)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let k = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
                if k > MAX_MOTIF_NODES {
                    return Err(Error::parse(
                        "motif",
                        format!("{k} nodes exceeds limit {MAX_MOTIF_NODES}"),
                    ));
                }
                Motif::new(k, edges).map_err(|e| Error::parse("motif", e.to_string()))
            }
        }
    }
}

/// Number of maps `V(F) -> V(G)` sending every motif edge onto a graph edge.
///
/// Motif nodes are assigned one at a time; the candidates for a node are the
/// intersection of the neighbourhoods of its already-placed neighbours.
pub fn hom_count(f: &Motif, g: &Graph) -> Result<u128> {
    if f.k > MAX_MOTIF_NODES {
        return Err(Error::Resource(format!(
            "motif has {} nodes, limit is {MAX_MOTIF_NODES}",
            f.k
        )));
    }
    let adj = f.adjacency_lists();
    // isolated motif nodes map anywhere
    let isolated = adj.iter().filter(|a| a.is_empty()).count();
    let factor = (g.n() as u128).pow(isolated as u32);
    let order: Vec<usize> = placement_order(&adj)
        .into_iter()
        .filter(|&v| !adj[v].is_empty())
        .collect();
    if order.is_empty() {
        return Ok(factor);
    }
    let mut earlier: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    for (pos, &v) in order.iter().enumerate() {
        earlier[pos] = adj[v]
            .iter()
            .filter_map(|u| order[..pos].iter().position(|x| x == u))
            .collect();
    }
    let words = g.n().div_ceil(64);
    let mut assigned = vec![0usize; order.len()];
    let mut scratch = vec![0u64; words * order.len()];
    Ok(factor * extend(g, &earlier, 0, &mut assigned, &mut scratch))
}

/// BFS order inside each component, so every node after a component's first
/// has a placed neighbour.
fn placement_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let k = adj.len();
    let mut seen = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for start in 0..k {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

/// Counts completions of `assigned[..pos]`. `scratch` holds one candidate
/// bitset per remaining position.
fn extend(g: &Graph, earlier: &[Vec<usize>], pos: usize, assigned: &mut [usize], scratch: &mut [u64]) -> u128 {
    let k = earlier.len();
    if pos == k {
        return 1;
    }
    let n = g.n();
    if earlier[pos].is_empty() {
        if pos + 1 == k {
            return n as u128;
        }
        let mut total = 0;
        for v in 0..n {
            assigned[pos] = v;
            total += extend(g, earlier, pos + 1, assigned, scratch);
        }
        return total;
    }
    let words = n.div_ceil(64);
    let (cand, rest) = scratch.split_at_mut(words);
    cand.copy_from_slice(g.row(assigned[earlier[pos][0]]));
    for &q in &earlier[pos][1..] {
        for (c, r) in cand.iter_mut().zip(g.row(assigned[q])) {
            *c &= r;
        }
    }
    if pos + 1 == k {
        return cand.iter().map(|w| w.count_ones() as u128).sum();
    }
    let mut total = 0;
    for (w, &word) in cand.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let t = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            assigned[pos] = w * 64 + t;
            total += extend(g, earlier, pos + 1, assigned, rest);
        }
    }
    total
}

/// `t(F, G) = hom(F, G) / n^k`.
pub fn hom_density_graph(f: &Motif, g: &Graph) -> Result<f64> {
    let count = hom_count(f, g)?;
    Ok(count as f64 / (g.n() as f64).powi(f.k as i32))
}

/// Monte-Carlo estimate of `t(F, W)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// `t(F, W) = \int prod_{(i,j) in E(F)} W(x_i, x_j) dx` by uniform sampling.
///
/// Samples are drawn in fixed batches of 4096, batch `b` from
/// `seed.derive(b)`, so the estimate does not depend on thread count.
pub fn hom_density_graphon(f: &Motif, w: &Graphon, samples: usize, seed: Seed) -> Result<DensityEstimate> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let batches = samples.div_ceil(MC_BATCH);
    let partials: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = MC_BATCH.min(samples - b * MC_BATCH);
            let mut rng = seed.derive(b as u64).rng();
            let mut x = vec![0.0; f.k];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..count {
                x.iter_mut().for_each(|v| *v = rng.random::<f64>());
                let prod: f64 = f.edges.iter().map(|&(a, b)| w.value(x[a], x[b])).product();
                sum += prod;
                sum_sq += prod * prod;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partials.iter().fold((0.0, 0.0), |(s, q), (a, b)| (s + a, q + b));
    let m = samples as f64;
    let mean = sum / m;
    let var = if samples > 1 {
        ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(DensityEstimate {
        estimate: mean,
        std_error: (var / m).sqrt(),
        samples,
    })
}
