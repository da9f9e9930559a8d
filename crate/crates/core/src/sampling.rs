//! Kernel-based random graphs and the scaled adjacency shift operator.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`). The
//! stream is consumed as: `n` latent uniforms, then one uniform per pair
//! `i < j` in row-major order, an edge being present when the draw is below
//! `W(mu_i, mu_j)`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::Graphon;

/// Largest node count stored densely.
pub const MAX_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent child seed, used to split work into deterministic batches.
    pub fn derive(self, stream: u64) -> Seed {
        // splitmix64 finalizer
        let mut z = self.0 ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

/// Undirected simple graph with a dense bit adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    words: usize,
    bits: Vec<u64>,
    latent: Option<Vec<f64>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Graph {
            n,
            words,
            bits: vec![0; words * n],
            latent: None,
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set(i, j);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Latent positions used when the graph was sampled.
    pub fn latent(&self) -> Option<&[f64]> {
        self.latent.as_deref()
    }

    pub fn with_latent(mut self, latent: Vec<f64>) -> Result<Self> {
        if latent.len() != self.n {
            return Err(Error::shape(self.n, latent.len()));
        }
        if let Some(v) = latent.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("latent value {v} not in [0, 1]")));
        }
        self.latent = Some(latent);
        Ok(self)
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::Domain(format!(
                "edge ({i}, {j}) out of range for n = {}",
                self.n
            )));
        }
        if i == j {
            return Err(Error::Domain(format!("self-loop at node {i}")));
        }
        self.set(i, j);
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Bit row of node `i`.
    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    /// Edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// Edge-list text: `n <N>` then one `i j` line per edge, 0-based, `i < j`.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (i, j) in self.edges() {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse("edge list", "missing `n <N>` header"))?;
        let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["n", count] => count
                .parse::<usize>()
                .map_err(|e| Error::parse("edge list header", format!("`{count}`: {e}")))?,
            _ => {
                return Err(Error::parse(
                    "edge list header",
                    format!("expected `n <N>`, got `{header}`"),
                ))
            }
        };
        if n == 0 || n > MAX_NODES {
            return Err(Error::parse(
                "edge list header",
                format!("n = {n} outside 1..={MAX_NODES}"),
            ));
        }
        let mut g = Graph::empty(n);
        for (lineno, line) in lines {
            let field = || format!("edge list line {lineno}");
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(field(), format!("expected `i j`, got `{line}`")));
            };
            let i = a.parse::<usize>().map_err(|e| Error::parse(field(), e.to_string()))?;
            let j = b.parse::<usize>().map_err(|e| Error::parse(field(), e.to_string()))?;
            if i >= j {
                return Err(Error::parse(field(), format!("need i < j, got {i} {j}")));
            }
            g.add_edge(i, j).map_err(|e| Error::parse(field(), e.to_string()))?;
        }
        Ok(g)
    }
}

/// Draws `G(n, w, mu)`. With `sorted`, latent positions are sorted before the
/// edge trials so node order follows position in `[0, 1]`.
pub fn sample_graph(w: &Graphon, n: usize, seed: Seed, sorted: bool) -> Result<Graph> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if n > MAX_NODES {
        return Err(Error::Resource(format!("n = {n} exceeds dense limit {MAX_NODES}")));
    }
    let mut rng = seed.rng();
    let mut latent: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    if sorted {
        latent.sort_by(f64::total_cmp);
    }
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = w.value(latent[i], latent[j]);
            if rng.random::<f64>() < p {
                g.set(i, j);
            }
        }
    }
    g.latent = Some(latent);
    Ok(g)
}

/// Dense symmetric shift operator `S = A / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftOperator {
    entries: DMatrix<f64>,
}

impl ShiftOperator {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Wraps an arbitrary square matrix as a shift operator.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::shape(
                "square matrix",
                format!("{}x{}", entries.nrows(), entries.ncols()),
            ));
        }
        Ok(ShiftOperator { entries })
    }
}

pub fn scaled_adjacency(g: &Graph) -> ShiftOperator {
    let n = g.n();
    let nf = n as f64;
    let entries = DMatrix::from_fn(n, n, |i, j| if g.has_edge(i, j) { 1.0 / nf } else { 0.0 });
    ShiftOperator { entries }
}

/// `S x`.
pub fn apply_shift(s: &ShiftOperator, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != s.n() {
        return Err(Error::shape(s.n(), x.len()));
    }
    Ok(matvec(&s.entries, x))
}

/// Dense product shared by the shift and step-basis paths so both round
/// identically.
pub(crate) fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let y = m * nalgebra::DVector::from_column_slice(x);
    y.as_slice().to_vec()
}
