//! Instance generators: classical and semi-random planted clique, the null
//! designs `P0`, and the coupled planted distribution `P1`.
//!
//! Every generator is a pure function of its parameters and seed. Random
//! choices come from keyed substreams (see [`crate::rng`]): one for the clique
//! and revealed vertex, one for adversary structure, one for point sampling,
//! and one per vertex row for edge coins. Pair `(i, j)` with `i < j` is always
//! decided from row `i`'s stream.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::design::{Design, DesignKind, Point};
use super::graph::Graph;
use super::hypergeometric;
use crate::error::{ensure, Error, Result};
use crate::rng::{stream, StreamRng};

const KEY_SELECT: u64 = 0;
const KEY_ADVERSARY: u64 = 1;
const KEY_POINTS: u64 = 2;
const KEY_ROW: u64 = 1 << 32;
const KEY_COLUMN: u64 = 2 << 32;

fn row_stream(seed: u64, i: usize) -> StreamRng {
    stream(seed, KEY_ROW | i as u64)
}

/// Which generator produced an instance, with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Classical,
    SemiRandom { adversary: String },
    NullGrid { m: u32 },
    NullLines { m: u32, k: u32 },
    Coupled { design: DesignKind, m: u32, k: u32 },
}

impl Model {
    pub fn tag(&self) -> &'static str {
        match self {
            Model::Classical => "classical",
            Model::SemiRandom { .. } => "semirandom",
            Model::NullGrid { .. } => "null_grid",
            Model::NullLines { .. } => "null_lines",
            Model::Coupled { .. } => "coupled",
        }
    }

    pub fn params(&self) -> serde_json::Value {
        match self {
            Model::Classical => json!({}),
            Model::SemiRandom { adversary } => json!({ "adversary": adversary }),
            Model::NullGrid { m } => json!({ "m": m }),
            Model::NullLines { m, k } => json!({ "m": m, "k": k }),
            Model::Coupled { design, m, k } => json!({ "design": design, "m": m, "k": k }),
        }
    }

    pub fn from_tag(tag: &str, params: &serde_json::Value) -> Result<Self> {
        let field = |name: &str| -> Result<u32> {
            params
                .get(name)
                .and_then(|v| v.as_u64())
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| Error::Format(format!("model {tag} needs integer param {name}")))
        };
        Ok(match tag {
            "classical" => Model::Classical,
            "semirandom" => Model::SemiRandom {
                adversary: params
                    .get("adversary")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| Error::Format("semirandom needs param adversary".into()))?
                    .to_string(),
            },
            "null_grid" => Model::NullGrid { m: field("m")? },
            "null_lines" => Model::NullLines {
                m: field("m")?,
                k: field("k")?,
            },
            "coupled" => {
                let design = params
                    .get("design")
                    .cloned()
                    .map(serde_json::from_value)
                    .transpose()
                    .map_err(|e| Error::Format(format!("coupled design: {e}")))?
                    .unwrap_or(DesignKind::Lines);
                Model::Coupled {
                    design,
                    m: field("m")?,
                    k: field("k")?,
                }
            }
            other => return Err(Error::Format(format!("unknown model {other:?}"))),
        })
    }
}

/// Point assignment behind a null or coupled instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub design: Design,
    /// Point of each vertex, indexed by vertex.
    pub points: Vec<Point>,
    /// `(r*, h*)` in coupled mode.
    pub planted_line: Option<(u32, u32)>,
    pub q: f64,
}

impl GridConfig {
    pub fn m(&self) -> u32 {
        self.design.m()
    }

    pub fn k(&self) -> u32 {
        self.design.k()
    }

    /// Whether the graph's design edges agree with the points: related pairs
    /// are adjacent, and the points are distinct.
    pub fn is_consistent_with(&self, graph: &Graph) -> bool {
        let n = self.points.len();
        if n != graph.n() {
            return false;
        }
        let mut sorted = self.points.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != n {
            return false;
        }
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                !self.design.related(self.points[i], self.points[j]) || graph.has_edge(i, j)
            })
        })
    }
}

/// Deterministic rule filling the pairs outside the clique. Receives `n` and
/// the sorted clique and returns the edges to add.
pub type EdgeRule = Arc<dyn Fn(usize, &[usize]) -> Vec<(usize, usize)> + Send + Sync>;

/// How the semi-random adversary fills pairs with both ends outside `S`.
#[derive(Clone)]
pub enum AdversarySpec {
    /// No outside-outside edges.
    Empty,
    /// Each outside-outside pair i.i.d. with rate `p`.
    Random(f64),
    /// `t` extra vertex-disjoint `s`-cliques among the outside vertices,
    /// other pairs `Ber(1/2)`.
    ExtraCliques(usize),
    Custom {
        name: String,
        rule: EdgeRule,
    },
}

impl AdversarySpec {
    pub fn custom(
        name: impl Into<String>,
        rule: impl Fn(usize, &[usize]) -> Vec<(usize, usize)> + Send + Sync + 'static,
    ) -> Self {
        AdversarySpec::Custom {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    fn validate(&self, n: usize, s: usize) -> Result<()> {
        match *self {
            AdversarySpec::Random(p) => ensure!((0.0..=1.0).contains(&p), "adversary rate {p} outside [0, 1]"),
            AdversarySpec::ExtraCliques(t) => ensure!(
                t * s <= n - s,
                "extra_cliques({t}) needs {t}·{s} vertices outside a clique of size {s}, only {} available",
                n - s
            ),
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Debug for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::Empty => write!(f, "empty"),
            AdversarySpec::Random(p) => write!(f, "random:{p}"),
            AdversarySpec::ExtraCliques(t) => write!(f, "extra_cliques:{t}"),
            AdversarySpec::Custom { name, .. } => write!(f, "custom:{name}"),
        }
    }
}

/// Parses `empty`, `random:P` and `extra_cliques:T`; `name(arg)` also works.
impl FromStr for AdversarySpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, arg) = match text.find([':', '(']) {
            Some(i) => (&text[..i], Some(text[i + 1..].trim_end_matches(')'))),
            None => (text, None),
        };
        let bad = || Error::Precondition(format!("unrecognised adversary {text:?}"));
        match (name, arg) {
            ("empty", None) => Ok(AdversarySpec::Empty),
            ("random", None) => Ok(AdversarySpec::Random(0.5)),
            ("random", Some(p)) => p.parse().map(AdversarySpec::Random).map_err(|_| bad()),
            ("extra_cliques", Some(t)) => t
                .parse()
                .map(AdversarySpec::ExtraCliques)
                .map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

/// A graph with a planted clique `clique` and a revealed member `revealed`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlantedInstance {
    pub graph: Graph,
    /// Sorted.
    pub clique: Vec<usize>,
    pub revealed: usize,
    pub model: Model,
    pub seed: u64,
    pub grid: Option<GridConfig>,
}

impl PlantedInstance {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn s(&self) -> usize {
        self.clique.len()
    }

    /// Re-checks the planted-instance invariants.
    pub fn is_valid(&self) -> bool {
        !self.clique.is_empty()
            && self.clique.windows(2).all(|w| w[0] < w[1])
            && self.clique.binary_search(&self.revealed).is_ok()
            && self.graph.is_clique(&self.clique)
            && self.graph.is_well_formed()
    }
}

fn choose_clique(n: usize, s: usize, seed: u64) -> (Vec<usize>, usize) {
    let mut rng = stream(seed, KEY_SELECT);
    let mut vertices: Vec<usize> = (0..n).collect();
    let (chosen, _) = vertices.partial_shuffle(&mut rng, s);
    let mut clique = chosen.to_vec();
    clique.sort_unstable();
    let revealed = clique[rng.random_range(0..s)];
    (clique, revealed)
}

/// Classical planted clique: uniform `S` of size `s`, all other pairs `Ber(1/2)`.
pub fn gen_classical(n: usize, s: usize, seed: u64) -> Result<PlantedInstance> {
    let mut inst = gen_semirandom(n, s, &AdversarySpec::Random(0.5), seed)?;
    inst.model = Model::Classical;
    Ok(inst)
}

/// Semi-random planted clique: `S`-to-outside pairs `Ber(1/2)`, outside pairs
/// chosen by `adversary`.
pub fn gen_semirandom(
    n: usize,
    s: usize,
    adversary: &AdversarySpec,
    seed: u64,
) -> Result<PlantedInstance> {
    ensure!(
        s >= 1 && s <= n,
        "clique size s = {s} must satisfy 1 <= s <= n = {n}"
    );
    adversary.validate(n, s)?;
    let (clique, revealed) = choose_clique(n, s, seed);
    let mut in_clique = vec![false; n];
    for &v in &clique {
        in_clique[v] = true;
    }

    // Group label of each outside vertex under extra_cliques; pairs sharing a
    // label are forced.
    let mut group = vec![usize::MAX; n];
    if let AdversarySpec::ExtraCliques(t) = *adversary {
        let mut rng = stream(seed, KEY_ADVERSARY);
        let mut outside: Vec<usize> = (0..n).filter(|&v| !in_clique[v]).collect();
        let (picked, _) = outside.partial_shuffle(&mut rng, t * s);
        for (x, &v) in picked.iter().enumerate() {
            group[v] = x / s;
        }
    }

    let mut graph = Graph::new(n);
    for i in 0..n {
        let mut rng = row_stream(seed, i);
        for j in i + 1..n {
            let edge = match (in_clique[i], in_clique[j]) {
                (true, true) => true,
                (true, false) | (false, true) => rng.random_bool(0.5),
                (false, false) => match *adversary {
                    AdversarySpec::Empty | AdversarySpec::Custom { .. } => false,
                    AdversarySpec::Random(p) => rng.random_bool(p),
                    AdversarySpec::ExtraCliques(_) => {
                        (group[i] != usize::MAX && group[i] == group[j]) || rng.random_bool(0.5)
                    }
                },
            };
            if edge {
                graph.set_edge(i, j, true);
            }
        }
    }

    if let AdversarySpec::Custom { rule, .. } = adversary {
        for (i, j) in rule(n, &clique) {
            if i >= n || j >= n || i == j || in_clique[i] || in_clique[j] {
                return Err(Error::AdversaryContract(i, j));
            }
            graph.set_edge(i, j, true);
        }
    }

    Ok(PlantedInstance {
        graph,
        clique,
        revealed,
        model: Model::SemiRandom {
            adversary: adversary.to_string(),
        },
        seed,
        grid: None,
    })
}

fn fill_design_edges(
    graph: &mut Graph,
    design: &Design,
    points: &[Point],
    seed: u64,
    skip: impl Fn(usize, usize) -> bool,
) {
    let q = design.edge_rate();
    let n = points.len();
    for i in 0..n {
        let mut rng = row_stream(seed, i);
        for j in i + 1..n {
            if skip(i, j) {
                continue;
            }
            if design.related(points[i], points[j]) || rng.random_bool(q) {
                graph.set_edge(i, j, true);
            }
        }
    }
}

fn gen_null(design: Design, n: usize, seed: u64) -> (Graph, GridConfig) {
    let mut rng = stream(seed, KEY_POINTS);
    let mut universe = design.universe();
    let (chosen, _) = universe.partial_shuffle(&mut rng, n);
    let points = chosen.to_vec();
    let mut graph = Graph::new(n);
    fill_design_edges(&mut graph, &design, &points, seed, |_, _| false);
    let q = design.edge_rate();
    (
        graph,
        GridConfig {
            design,
            points,
            planted_line: None,
            q,
        },
    )
}

/// Null distribution on the `m × m` grid with row and column cliques.
pub fn gen_null_grid(n: usize, m: u32, seed: u64) -> Result<(Graph, GridConfig)> {
    let design = Design::grid(m)?;
    let cap = (m * m - m) as usize;
    ensure!(n <= cap, "n = {n} exceeds m² - m = {cap}");
    Ok(gen_null(design, n, seed))
}

/// Null distribution on `F_m²` with the line cliques of slopes `0..k`.
pub fn gen_null_lines(n: usize, m: u32, k: u32, seed: u64) -> Result<(Graph, GridConfig)> {
    let design = Design::lines(m, k)?;
    let cap = (m as usize) * (m as usize - 1) / 2;
    ensure!(n <= cap, "n = {n} exceeds m(m-1)/2 = {cap}");
    Ok(gen_null(design, n, seed))
}

/// State of the coupled construction while non-clique vertices receive points.
#[derive(Clone, Debug)]
pub struct CouplingState {
    design: Design,
    planted: (u32, u32),
    clique_points: Vec<Point>,
    assigned: Vec<Point>,
    /// Unused points off the planted line, in lexicographic order.
    free: Vec<Point>,
}

impl CouplingState {
    /// Fresh state: the clique occupies `clique_points` on the planted line,
    /// no non-clique vertex has been placed yet.
    pub fn new(design: Design, planted: (u32, u32), clique_points: Vec<Point>) -> Result<Self> {
        let (r, h) = planted;
        ensure!(
            r < design.k() && h < design.m(),
            "planted line ({r}, {h}) out of range"
        );
        let line = super::design::Block::Line { r, h };
        ensure!(
            clique_points.iter().all(|&p| design.contains(line, p)),
            "clique points must lie on the planted line"
        );
        let free = design
            .universe()
            .into_iter()
            .filter(|&p| !design.contains(line, p))
            .collect();
        Ok(Self {
            design,
            planted,
            clique_points,
            assigned: Vec::new(),
            free,
        })
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn planted(&self) -> (u32, u32) {
        self.planted
    }

    pub fn clique_points(&self) -> &[Point] {
        &self.clique_points
    }

    pub fn assigned(&self) -> &[Point] {
        &self.assigned
    }

    pub fn free_points(&self) -> &[Point] {
        &self.free
    }

    /// Positions `j` (0-based, into the clique) whose point is related to `p`.
    pub fn membership(&self, p: Point) -> Vec<usize> {
        self.clique_points
            .iter()
            .enumerate()
            .filter(|&(_, &c)| self.design.related(p, c))
            .map(|(j, _)| j)
            .collect()
    }

    /// Marks `p` as used by the next non-clique vertex.
    pub fn assign(&mut self, p: Point) -> Result<()> {
        let idx = self
            .free
            .binary_search(&p)
            .map_err(|_| crate::error::precondition(format!("point {p:?} is not free")))?;
        self.free.remove(idx);
        self.assigned.push(p);
        Ok(())
    }
}

/// Draws the next non-clique vertex's point from the null conditional given
/// its realized column of edges to the clique.
///
/// Point `p` gets weight `Π_{j∈J(p)} 1[x_j] · Π_{j∉J(p)} q^{x_j}(1-q)^{1-x_j}`.
/// If every free point has weight zero (the column is impossible under the
/// null given the prior assignments), the draw falls back to uniform over the
/// free points.
pub fn conditional_assignment<R: Rng + ?Sized>(
    state: &CouplingState,
    column: &[bool],
    rng: &mut R,
) -> Result<Point> {
    if column.len() != state.clique_points.len() {
        return Err(Error::DimensionMismatch {
            expected: state.clique_points.len(),
            got: column.len(),
        });
    }
    if state.free.is_empty() {
        return Err(Error::NoFreePoints);
    }
    let weights = assignment_weights(state, column);
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Ok(state.free[rng.random_range(0..state.free.len())]);
    }
    let mut target = rng.random::<f64>() * total;
    for (&p, &w) in state.free.iter().zip(&weights) {
        if target < w {
            return Ok(p);
        }
        target -= w;
    }
    // Rounding left `target` just past the end; take the last positive weight.
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
    Ok(state.free[last])
}

/// Unnormalized weights of [`conditional_assignment`], aligned with
/// [`CouplingState::free_points`]. The factor `q^{|x|}(1-q)^{s-|x|}` shared by
/// every point is dropped, leaving `Π_{j∈J(p)} x_j / q`.
pub fn assignment_weights(state: &CouplingState, column: &[bool]) -> Vec<f64> {
    let q = state.design.edge_rate();
    state
        .free
        .iter()
        .map(|&p| {
            state
                .membership(p)
                .into_iter()
                .fold(1.0, |w, j| if column[j] { w / q } else { 0.0 })
        })
        .collect()
}

/// Coupled planted distribution `P1` on the line design with slopes `0..k`.
pub fn gen_coupled(n: usize, m: u32, k: u32, seed: u64) -> Result<PlantedInstance> {
    let design = Design::lines(m, k)?;
    let cap = (m as usize) * (m as usize - 1) / 2;
    ensure!(n <= cap, "n = {n} exceeds m(m-1)/2 = {cap}");
    coupled(design, n, seed)
}

/// Coupled planted distribution on the grid design; the clique sits on a row.
pub fn gen_coupled_grid(n: usize, m: u32, seed: u64) -> Result<PlantedInstance> {
    let design = Design::grid(m)?;
    let cap = (m * m - m) as usize;
    ensure!(n <= cap, "n = {n} exceeds m² - m = {cap}");
    coupled(design, n, seed)
}

fn coupled(design: Design, n: usize, seed: u64) -> Result<PlantedInstance> {
    ensure!(n >= 1, "n must be positive");
    let m = design.m();
    let mut rng = stream(seed, KEY_SELECT);
    let r_star = match design.kind() {
        DesignKind::Grid => 0,
        DesignKind::Lines => rng.random_range(0..design.k()),
    };
    let h_star = rng.random_range(0..m);
    let total = (m as u64) * (m as u64);
    let s = loop {
        let s = hypergeometric::sample(n as u64, m as u64, total, &mut rng)? as usize;
        if s > 0 {
            break s;
        }
    };
    let mut vertices: Vec<usize> = (0..n).collect();
    let (chosen, _) = vertices.partial_shuffle(&mut rng, s);
    let mut clique = chosen.to_vec();
    clique.sort_unstable();
    let revealed = clique[rng.random_range(0..s)];

    let mut point_rng = stream(seed, KEY_POINTS);
    let mut line = design.line_points(r_star, h_star);
    let (on_line, _) = line.partial_shuffle(&mut point_rng, s);
    let clique_points = on_line.to_vec();

    let mut points = vec![Point::new(0, 0); n];
    let mut in_clique = vec![false; n];
    for (&v, &p) in clique.iter().zip(&clique_points) {
        points[v] = p;
        in_clique[v] = true;
    }

    let mut graph = Graph::new(n);
    for x in 0..s {
        for y in x + 1..s {
            graph.set_edge(clique[x], clique[y], true);
        }
    }

    let mut state = CouplingState::new(design, (r_star, h_star), clique_points)?;
    for i in (0..n).filter(|&i| !in_clique[i]) {
        let mut rng = stream(seed, KEY_COLUMN | i as u64);
        let column: Vec<bool> = (0..s).map(|_| rng.random_bool(0.5)).collect();
        for (&v, &x) in clique.iter().zip(&column) {
            if x {
                graph.set_edge(i, v, true);
            }
        }
        let p = conditional_assignment(&state, &column, &mut rng)?;
        state.assign(p)?;
        points[i] = p;
    }

    fill_design_edges(&mut graph, &design, &points, seed, |i, j| {
        in_clique[i] || in_clique[j]
    });

    let q = design.edge_rate();
    Ok(PlantedInstance {
        graph,
        clique,
        revealed,
        model: Model::Coupled {
            design: design.kind(),
            m,
            k: design.k(),
        },
        seed,
        grid: Some(GridConfig {
            design,
            points,
            planted_line: Some((r_star, h_star)),
            q,
        }),
    })
}
