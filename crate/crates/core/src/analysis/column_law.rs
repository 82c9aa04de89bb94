//! Exact null law of the next non-clique vertex's column of edges to the
//! clique, given the assignments made so far.
//!
//! Under the null, the next point is uniform over the unused points off the
//! planted line, and edge `j` of the column is forced to 1 when that point is
//! related to clique point `j`, otherwise `Ber(q)`. The column is therefore
//! `PB(q, σ)` with `σ(J)` the fraction of free points whose related set is `J`.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{ensure, Error, Result};
use crate::graph_model::{CouplingState, Design, DesignKind};
use crate::perturbed_bernoulli::{PBSpec, MAX_DIM};
use crate::subset::{self, Subset};

pub type Rational = Ratio<i64>;

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnLaw {
    pub spec: PBSpec,
    /// Exact `σ` from enumeration.
    pub sigma: BTreeMap<Subset, Rational>,
    /// Exact singleton superset sums `S({j})`; equal to `σ({j})` on the grid.
    pub singles: Vec<Rational>,
    /// `N_i(j)`: earlier non-clique points related to clique point `j`.
    pub counts: Vec<usize>,
    /// 1-based index `i` of the vertex whose column this is.
    pub i: usize,
}

impl ColumnLaw {
    pub fn s(&self) -> usize {
        self.singles.len()
    }

    /// `S({j})` as floats.
    pub fn singles_f64(&self) -> Vec<f64> {
        self.singles.iter().map(to_f64).collect()
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `N_i(j)` for every clique position `j`.
pub fn occupancy(state: &CouplingState) -> Vec<usize> {
    let design = state.design();
    state
        .clique_points()
        .iter()
        .map(|&c| {
            state
                .assigned()
                .iter()
                .filter(|&&p| design.related(p, c))
                .count()
        })
        .collect()
}

/// Column law by enumerating the free points. Works for either design.
pub fn column_law(state: &CouplingState) -> Result<ColumnLaw> {
    let s = state.clique_points().len();
    ensure!(
        s >= 1 && s <= MAX_DIM,
        "column law needs 1 <= s <= {MAX_DIM} (got {s})"
    );
    let free = state.free_points();
    if free.is_empty() {
        return Err(Error::NoFreePoints);
    }
    let total = free.len() as i64;
    let mut counts: BTreeMap<Subset, i64> = BTreeMap::new();
    for &p in free {
        let set = subset::from_coords(state.membership(p).into_iter().map(|j| j + 1));
        *counts.entry(set).or_default() += 1;
    }
    let sigma: BTreeMap<Subset, Rational> = counts
        .iter()
        .map(|(&set, &c)| (set, Ratio::new(c, total)))
        .collect();
    let singles = (0..s)
        .map(|j| {
            sigma
                .iter()
                .filter(|(&set, _)| subset::contains(set, j + 1))
                .fold(Ratio::from_integer(0), |acc, (_, &r)| acc + r)
        })
        .collect();
    let spec = PBSpec::new(
        s,
        state.design().edge_rate(),
        counts
            .iter()
            .map(|(&set, &c)| (set, c as f64 / total as f64)),
    )?;
    Ok(ColumnLaw {
        spec,
        sigma,
        singles,
        counts: occupancy(state),
        i: s + 1 + state.assigned().len(),
    })
}

/// Grid-design column law; `σ` is supported on `∅` and singletons.
pub fn column_law_grid(state: &CouplingState) -> Result<ColumnLaw> {
    ensure!(
        state.design().kind() == DesignKind::Grid,
        "column_law_grid needs the grid design"
    );
    column_law(state)
}

/// Line-design column law.
pub fn column_law_lines(state: &CouplingState) -> Result<ColumnLaw> {
    ensure!(
        state.design().kind() == DesignKind::Lines,
        "column_law_lines needs the line design"
    );
    column_law(state)
}

fn closed_form(state: &CouplingState, opportunities: i64) -> Result<Vec<Rational>> {
    let m = state.design().m() as i64;
    let s = state.clique_points().len() as i64;
    let i = s + 1 + state.assigned().len() as i64;
    let denom = m * m - m - (i - s - 1);
    ensure!(denom > 0, "no free points remain at i = {i}");
    Ok(occupancy(state)
        .into_iter()
        .map(|n| Ratio::new(opportunities - n as i64, denom))
        .collect())
}

/// `π_j = (m-1-N_i(j)) / (m²-m-(i-s-1))`.
pub fn pi_formula(state: &CouplingState) -> Result<Vec<Rational>> {
    let m = state.design().m() as i64;
    closed_form(state, m - 1)
}

/// `S({j}) = ((k-1)(m-1) - N_i(j)) / (m²-m-(i-s-1))`.
pub fn singleton_formula(state: &CouplingState) -> Result<Vec<Rational>> {
    let m = state.design().m() as i64;
    let k = state.design().k() as i64;
    closed_form(state, (k - 1) * (m - 1))
}

/// A null prefix: `s` clique points uniform on a uniform planted line, then
/// `t` further points uniform without replacement off that line.
pub fn random_prefix<R: Rng + ?Sized>(
    design: Design,
    s: usize,
    t: usize,
    rng: &mut R,
) -> Result<CouplingState> {
    let m = design.m();
    ensure!(s <= m as usize, "s = {s} exceeds the {m} points on a line");
    let r = match design.kind() {
        DesignKind::Grid => 0,
        DesignKind::Lines => rng.random_range(0..design.k()),
    };
    let h = rng.random_range(0..m);
    let mut line = design.line_points(r, h);
    let (chosen, _) = line.partial_shuffle(rng, s);
    let mut state = CouplingState::new(design, (r, h), chosen.to_vec())?;
    let free = state.free_points().len();
    ensure!(
        t <= free,
        "prefix length {t} exceeds the {free} free points"
    );
    let mut pool = state.free_points().to_vec();
    let (picked, _) = pool.partial_shuffle(rng, t);
    for &p in picked.iter() {
        state.assign(p)?;
    }
    Ok(state)
}
