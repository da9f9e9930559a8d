//! Graphon kernels on the unit square.
//!
//! A [`Graphon`] is either analytic (one of the [`BuiltinGraphon`] families or a
//! user closure) or a piecewise-constant grid. Grid cells are half-open
//! `[i/M, (i+1)/M)` with the last cell closed at 1.0, so evaluation is total on
//! `[0, 1]^2`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sampling::Graph;

/// Built-in analytic graphon families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinGraphon {
    /// Constant kernel `p` (Erdos-Renyi).
    Er { p: f64 },
    /// `a + b sin(c pi x y)`.
    SinProduct { a: f64, b: f64, c: f64 },
    /// `exp(-alpha (x + y))`.
    ExpSum { alpha: f64 },
    /// `exp(-alpha |x - y|)`.
    ExpDistance { alpha: f64 },
}

impl BuiltinGraphon {
    pub fn er(p: f64) -> Result<Self> {
        Self::Er { p }.validated()
    }

    pub fn sin_product(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::SinProduct { a, b, c }.validated()
    }

    pub fn exp_sum(alpha: f64) -> Result<Self> {
        Self::ExpSum { alpha }.validated()
    }

    pub fn exp_distance(alpha: f64) -> Result<Self> {
        Self::ExpDistance { alpha }.validated()
    }

    fn validated(self) -> Result<Self> {
        let finite = |field: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, "must be finite"))
            }
        };
        match self {
            Self::Er { p } => {
                finite("p", p)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::param("p", format!("{p} not in [0, 1]")));
                }
            }
            Self::SinProduct { a, b, c } => {
                finite("a", a)?;
                finite("b", b)?;
                finite("c", c)?;
                if a - b < 0.0 {
                    return Err(Error::param("b", format!("a - b = {} < 0", a - b)));
                }
                if a + b > 1.0 {
                    return Err(Error::param("b", format!("a + b = {} > 1", a + b)));
                }
            }
            Self::ExpSum { alpha } | Self::ExpDistance { alpha } => {
                finite("alpha", alpha)?;
                if alpha < 0.0 {
                    return Err(Error::param("alpha", format!("{alpha} < 0")));
                }
            }
        }
        Ok(self)
    }

    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        match *self {
            Self::Er { p } => p,
            Self::SinProduct { a, b, c } => a + b * (c * PI * (x * y)).sin(),
            Self::ExpSum { alpha } => (-alpha * (x + y)).exp(),
            Self::ExpDistance { alpha } => (-alpha * (x - y).abs()).exp(),
        }
    }
}

impl fmt::Display for BuiltinGraphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Er { p } => write!(f, "er:{p}"),
            Self::SinProduct { a, b, c } => write!(f, "sinprod:{a},{b},{c}"),
            Self::ExpSum { alpha } => write!(f, "expsum:{alpha}"),
            Self::ExpDistance { alpha } => write!(f, "expdist:{alpha}"),
        }
    }
}

impl FromStr for BuiltinGraphon {
    type Err = Error;

    /// Parses `er:<p>`, `sinprod:<a>,<b>,<c>`, `expsum:<alpha>` or `expdist:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let (id, params) = s
            .split_once(':')
            .ok_or_else(|| Error::parse("graphon", format!("expected `<id>:<params>`, got `{s}`")))?;
        let values = params
            .split(',')
            .enumerate()
            .map(|(i, v)| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(format!("graphon parameter {i}"), format!("`{v}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let arity = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(Error::parse(
                    "graphon",
                    format!("`{id}` takes {n} parameter(s), got {}", values.len()),
                ))
            }
        };
        match id.trim() {
            "er" => {
                arity(1)?;
                Self::er(values[0])
            }
            "sinprod" => {
                arity(3)?;
                Self::sin_product(values[0], values[1], values[2])
            }
            "expsum" => {
                arity(1)?;
                Self::exp_sum(values[0])
            }
            "expdist" => {
                arity(1)?;
                Self::exp_distance(values[0])
            }
            other => Err(Error::parse("graphon", format!("unknown graphon id `{other}`"))),
        }
    }
}

type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Builtin(BuiltinGraphon),
    Closure(KernelFn),
    Grid { side: usize, values: Vec<f64> },
}

/// A symmetric kernel `[0,1]^2 -> [0,1]`.
#[derive(Clone)]
pub struct Graphon {
    kind: Kind,
    label: String,
}

impl fmt::Debug for Graphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Builtin(b) => format!("{b:?}"),
            Kind::Closure(_) => "Closure".to_string(),
            Kind::Grid { side, .. } => format!("Grid({side}x{side})"),
        };
        f.debug_struct("Graphon")
            .field("label", &self.label)
            .field("kind", &kind)
            .finish()
    }
}

impl From<BuiltinGraphon> for Graphon {
    fn from(b: BuiltinGraphon) -> Self {
        Graphon {
            label: b.to_string(),
            kind: Kind::Builtin(b),
        }
    }
}

impl Graphon {
    /// Wraps a user kernel. The caller is responsible for symmetry and for
    /// keeping values in `[0, 1]`.
    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Graphon {
            kind: Kind::Closure(Arc::new(f)),
            label: label.into(),
        }
    }

    /// Piecewise-constant graphon from a row-major `side x side` matrix.
    pub fn from_grid(label: impl Into<String>, side: usize, values: Vec<f64>) -> Result<Self> {
        if side == 0 {
            return Err(Error::shape("side >= 1", 0));
        }
        if values.len() != side * side {
            return Err(Error::shape(side * side, values.len()));
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::param(
                    format!("cell ({}, {})", k / side, k % side),
                    format!("{v} not in [0, 1]"),
                ));
            }
        }
        for i in 0..side {
            for j in (i + 1)..side {
                if values[i * side + j] != values[j * side + i] {
                    return Err(Error::param(format!("cell ({i}, {j})"), "grid is not symmetric"));
                }
            }
        }
        Ok(Graphon {
            kind: Kind::Grid { side, values },
            label: label.into(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn builtin(&self) -> Option<BuiltinGraphon> {
        match self.kind {
            Kind::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// Side length and row-major cells, for grid graphons.
    pub fn grid(&self) -> Option<(usize, &[f64])> {
        match &self.kind {
            Kind::Grid { side, values } => Some((*side, values)),
            _ => None,
        }
    }

    pub fn is_grid(&self) -> bool {
        matches!(self.kind, Kind::Grid { .. })
    }

    /// Evaluates the kernel, rejecting coordinates outside `[0, 1]`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        for (name, v) in [("x", x), ("y", y)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} not in [0, 1]")));
            }
        }
        Ok(self.value(x, y))
    }

    /// Unchecked evaluation; `x` and `y` must already lie in `[0, 1]`.
    #[inline]
    pub(crate) fn value(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            Kind::Builtin(b) => b.value(x, y),
            Kind::Closure(f) => f(x, y),
            Kind::Grid { side, values } => values[cell(x, *side) * side + cell(y, *side)],
        }
    }

    /// Writes a grid graphon as headerless dense CSV, one matrix row per line.
    pub fn write_grid_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let (side, values) = self
            .grid()
            .ok_or_else(|| Error::Unsupported("only grid graphons serialize to CSV".into()))?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in values.chunks(side) {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a headerless dense CSV grid; the matrix must be square and symmetric.
    pub fn read_grid_csv<R: Read>(label: impl Into<String>, input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut values = Vec::new();
        let mut rows = 0usize;
        let mut side = None;
        for record in reader.records() {
            let record = record?;
            match side {
                None => side = Some(record.len()),
                Some(s) if s != record.len() => {
                    return Err(Error::parse(
                        format!("grid row {rows}"),
                        format!("expected {s} columns, got {}", record.len()),
                    ))
                }
                _ => {}
            }
            for (c, field) in record.iter().enumerate() {
                let v = field
                    .parse::<f64>()
                    .map_err(|e| Error::parse(format!("grid cell ({rows}, {c})"), e.to_string()))?;
                values.push(v);
            }
            rows += 1;
        }
        let side = side.ok_or_else(|| Error::parse("grid", "empty input"))?;
        if rows != side {
            return Err(Error::parse("grid", format!("{rows} rows but {side} columns")));
        }
        Self::from_grid(label, side, values)
    }
}

#[inline]
pub(crate) fn cell(x: f64, side: usize) -> usize {
    ((x * side as f64) as usize).min(side - 1)
}

/// Parses a graphon spec: a built-in id (`er:0.5`, `expdist:10`, ...) or
/// `file:<path>` naming a grid CSV.
pub fn parse_graphon_spec(s: &str) -> Result<Graphon> {
    if let Some(path) = s.strip_prefix("file:") {
        return load_grid(path);
    }
    s.parse::<BuiltinGraphon>().map(Graphon::from)
}

fn load_grid(path: impl AsRef<Path>) -> Result<Graphon> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Graphon::read_grid_csv(format!("file:{}", path.display()), file)
}

/// The empirical graphon of `g`: cell `(i, j)` is 1 when the edge exists.
pub fn empirical_graphon(g: &Graph) -> Graphon {
    let n = g.n();
    let mut values = vec![0.0; n * n];
    for (i, j) in g.edges() {
        values[i * n + j] = 1.0;
        values[j * n + i] = 1.0;
    }
    Graphon {
        kind: Kind::Grid { side: n, values },
        label: format!("empirical:{n}"),
    }
}

/// L2 distance on `[0,1]^2` by the midpoint rule on a `grid_side^2` lattice.
pub fn l2_distance(w1: &Graphon, w2: &Graphon, grid_side: usize) -> f64 {
    assert!(grid_side >= 1, "grid_side must be positive");
    let h = 1.0 / grid_side as f64;
    let mut acc = 0.0;
    for i in 0..grid_side {
        let x = (i as f64 + 0.5) * h;
        for j in 0..grid_side {
            let y = (j as f64 + 0.5) * h;
            let d = w1.value(x, y) - w2.value(x, y);
            acc += d * d;
        }
    }
    (acc * h * h).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_graph, Seed};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn builtins() -> Vec<Graphon> {
        vec![
            BuiltinGraphon::er(0.5).unwrap().into(),
            BuiltinGraphon::sin_product(0.5, 0.5, 3.5).unwrap().into(),
            BuiltinGraphon::sin_product(1.0 / 3.0, 1.0 / 3.0, 3.0).unwrap().into(),
            BuiltinGraphon::exp_sum(0.5).unwrap().into(),
            BuiltinGraphon::exp_distance(10.0).unwrap().into(),
        ]
    }

    #[test]
    fn builtin_values() {
        let er: Graphon = BuiltinGraphon::er(0.5).unwrap().into();
        assert_eq!(er.eval(0.3, 0.7).unwrap(), 0.5);
        let es: Graphon = BuiltinGraphon::exp_sum(0.5).unwrap().into();
        assert_eq!(es.eval(0.0, 0.0).unwrap(), 1.0);
        let sp: Graphon = BuiltinGraphon::sin_product(1.0 / 3.0, 1.0 / 3.0, 3.0).unwrap().into();
        for y in [0.0, 0.25, 0.9, 1.0] {
            assert_eq!(sp.eval(0.0, y).unwrap(), 1.0 / 3.0);
        }
    }

    #[test]
    fn out_of_domain_rejected() {
        let er: Graphon = BuiltinGraphon::er(0.5).unwrap().into();
        assert!(matches!(er.eval(-0.1, 0.5), Err(Error::Domain(_))));
        assert!(matches!(er.eval(0.5, 1.0001), Err(Error::Domain(_))));
        assert!(er.eval(1.0, 0.0).is_ok());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BuiltinGraphon::er(1.5).is_err());
        assert!(BuiltinGraphon::er(-0.1).is_err());
        assert!(BuiltinGraphon::sin_product(0.2, 0.5, 1.0).is_err());
        assert!(BuiltinGraphon::sin_product(0.6, 0.5, 1.0).is_err());
        assert!(BuiltinGraphon::exp_sum(-1.0).is_err());
        assert!(BuiltinGraphon::exp_distance(f64::NAN).is_err());
    }

    #[test]
    fn bounded_and_symmetric_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = sample_graph(&BuiltinGraphon::er(0.4).unwrap().into(), 37, Seed(3), true).unwrap();
        let mut all = builtins();
        all.push(empirical_graphon(&g));
        for w in &all {
            for _ in 0..10_000 {
                let (x, y): (f64, f64) = (rng.random(), rng.random());
                let a = w.eval(x, y).unwrap();
                assert!((0.0..=1.0).contains(&a), "{} at ({x},{y}) = {a}", w.label());
                assert_eq!(a, w.eval(y, x).unwrap());
            }
        }
    }

    #[test]
    fn grid_cells_half_open_last_closed() {
        let w = Graphon::from_grid("g", 2, vec![0.1, 0.2, 0.2, 0.3]).unwrap();
        assert_eq!(w.eval(0.0, 0.0).unwrap(), 0.1);
        assert_eq!(w.eval(0.5, 0.0).unwrap(), 0.2);
        assert_eq!(w.eval(0.49, 0.49).unwrap(), 0.1);
        assert_eq!(w.eval(1.0, 1.0).unwrap(), 0.3);
    }

    #[test]
    fn grid_validation() {
        assert!(Graphon::from_grid("g", 2, vec![0.0, 0.1, 0.2, 0.0]).is_err());
        assert!(Graphon::from_grid("g", 2, vec![0.0; 3]).is_err());
        assert!(Graphon::from_grid("g", 1, vec![1.5]).is_err());
    }

    #[test]
    fn empirical_graphon_examples() {
        let k4 = Graph::complete(4);
        let (side, v) = empirical_graphon(&k4).grid().map(|(s, v)| (s, v.to_vec())).unwrap();
        assert_eq!(side, 4);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(v[i * 4 + j], if i == j { 0.0 } else { 1.0 });
            }
        }
        let empty = empirical_graphon(&Graph::empty(3));
        assert!(empty.grid().unwrap().1.iter().all(|&x| x == 0.0));
        let mut single = Graph::empty(2);
        single.add_edge(0, 1).unwrap();
        assert_eq!(empirical_graphon(&single).grid().unwrap().1, &[0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn l2_distance_examples() {
        let a: Graphon = BuiltinGraphon::er(0.5).unwrap().into();
        let b: Graphon = BuiltinGraphon::er(0.2).unwrap().into();
        assert_eq!(l2_distance(&a, &a, 17), 0.0);
        assert!((l2_distance(&a, &b, 100) - 0.3).abs() < 1e-12);
        assert_eq!(l2_distance(&a, &b, 30), l2_distance(&b, &a, 30));
    }

    #[test]
    fn l2_triangle_inequality() {
        let all = builtins();
        for a in &all {
            for b in &all {
                for c in &all {
                    let ab = l2_distance(a, b, 40);
                    let bc = l2_distance(b, c, 40);
                    let ac = l2_distance(a, c, 40);
                    assert!(ac <= ab + bc + 1e-12);
                }
            }
        }
    }

    #[test]
    fn empirical_graphon_of_er_sits_at_half() {
        // 0/1 cells against 0.5 everywhere
        let w: Graphon = BuiltinGraphon::er(0.5).unwrap().into();
        for n in [100, 1000] {
            let g = sample_graph(&w, n, Seed(100), true).unwrap();
            assert_eq!(l2_distance(&w, &empirical_graphon(&g), 200), 0.5);
        }
    }

    #[test]
    fn empirical_graphon_of_threshold_converges_in_l2() {
        let w = Graphon::from_fn("threshold", |x, y| if x + y < 1.0 { 1.0 } else { 0.0 });
        let mean = |n: usize| {
            (0..5u64)
                .map(|s| {
                    let g = sample_graph(&w, n, Seed(100 + s), true).unwrap();
                    l2_distance(&w, &empirical_graphon(&g), 200)
                })
                .sum::<f64>()
                / 5.0
        };
        let small = mean(100);
        let large = mean(1000);
        assert!(large < small, "N=1000: {large}, N=100: {small}");
    }

    #[test]
    #[ignore = "a 0/1 empirical graphon stays at L2 distance sqrt(int W(1-W)) = 0.5 from ER(0.5) for every N"]
    fn empirical_graphon_converges_in_l2() {
        let w: Graphon = BuiltinGraphon::er(0.5).unwrap().into();
        let mean = |n: usize| {
            (0..5u64)
                .map(|s| {
                    let g = sample_graph(&w, n, Seed(100 + s), true).unwrap();
                    l2_distance(&w, &empirical_graphon(&g), 200)
                })
                .sum::<f64>()
                / 5.0
        };
        let small = mean(100);
        let large = mean(1000);
        assert!(large < small, "N=1000: {large}, N=100: {small}");
    }

    #[test]
    fn resampling_an_empirical_graphon_is_deterministic() {
        // A 0/1 grid makes every Bernoulli trial degenerate.
        let w: Graphon = BuiltinGraphon::er(0.5).unwrap().into();
        let g = sample_graph(&w, 25, Seed(9), true).unwrap();
        let emp = empirical_graphon(&g);
        let again = sample_graph(&emp, 25, Seed(10), true).unwrap();
        let latent = again.latent().unwrap();
        for i in 0..25 {
            for j in (i + 1)..25 {
                let p = emp.eval(latent[i], latent[j]).unwrap();
                assert!(p == 0.0 || p == 1.0);
                assert_eq!(again.has_edge(i, j), p == 1.0);
            }
        }
    }

    #[test]
    fn spec_strings() {
        assert_eq!(
            "er:0.5".parse::<BuiltinGraphon>().unwrap(),
            BuiltinGraphon::Er { p: 0.5 }
        );
        assert_eq!(
            "expdist:10".parse::<BuiltinGraphon>().unwrap(),
            BuiltinGraphon::ExpDistance { alpha: 10.0 }
        );
        let sp = parse_graphon_spec("sinprod:0.5,0.5,3.5").unwrap();
        let expected = 0.5 + 0.5 * (3.5 * PI * 0.3 * 0.6).sin();
        assert_eq!(sp.eval(0.3, 0.6).unwrap(), expected);
        for bad in ["", "er", "er:", "er:2", "foo:1", "sinprod:0.5,0.5", "expsum:a"] {
            assert!(parse_graphon_spec(bad).is_err(), "{bad}");
        }
        match parse_graphon_spec("sinprod:0.9,0.5,1") {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "b"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_csv_round_trip() {
        let g = sample_graph(&BuiltinGraphon::er(0.5).unwrap().into(), 9, Seed(1), true).unwrap();
        let emp = empirical_graphon(&g);
        let mut buf = Vec::new();
        emp.write_grid_csv(&mut buf).unwrap();
        let back = Graphon::read_grid_csv("x", buf.as_slice()).unwrap();
        assert_eq!(back.grid().unwrap(), emp.grid().unwrap());
        assert!(Graphon::read_grid_csv("x", "0,1\n1".as_bytes()).is_err());
        assert!(Graphon::read_grid_csv("x", "".as_bytes()).is_err());
    }
}
