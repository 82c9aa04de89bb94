//! Perturbed Bernoulli distributions `PB(q, σ)`.
//!
//! A draw sets `Y_j ~ Ber(q)` independently for `j = 1..s`, draws a subset `J`
//! with probability `σ(J)`, and reports `X_j = 1` iff `Y_j = 1` or `j ∈ J`.
//!
//! Besides the pmf and a sampler, this module computes exact KL and χ²
//! divergences by enumerating all `2^s` outcomes, and evaluates the
//! superset-statistic bound
//!
//! ```text
//! KL(PB(q,σ) || PB(q,τ)) <= (1/τ(∅)) Σ_J ((1-q)/q)^{2|J|} (S(J) - T(J))²
//! ```
//!
//! where `S` and `T` are the superset sums of `σ` and `τ`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{self, Subset};

/// Largest dimension for which exhaustive `2^s` enumeration is supported.
pub const MAX_DIM: usize = 20;

/// Tolerance for identities (normalization, transform roundtrips).
pub const IDENTITY_TOL: f64 = 1e-12;
/// Slack allowed when checking inequalities between divergences and bounds.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Below this, a Möbius-inverted mass is treated as evidence that the input
/// was not a superset-sum table.
const NEGATIVE_MASS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PBSpecRecord", into = "PBSpecRecord")]
pub struct PBSpec {
    s: usize,
    q: f64,
    sigma: BTreeMap<Subset, f64>,
}

impl PBSpec {
    /// Validates and builds a spec. Zero masses are dropped.
    pub fn new(s: usize, q: f64, sigma: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self> {
        if s == 0 || s > MAX_DIM {
            return Err(Error::InvalidSpec(format!(
                "dimension {s} outside 1..={MAX_DIM}"
            )));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidSpec(format!("base rate {q} outside [0, 1]")));
        }
        let full: Subset = (1 << s) - 1;
        let mut map = BTreeMap::new();
        for (set, mass) in sigma {
            if set & !full != 0 {
                return Err(Error::InvalidSpec(format!(
                    "subset {:?} is not contained in 1..={s}",
                    subset::coords(set)
                )));
            }
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "mass {mass} is negative or not finite"
                )));
            }
            if mass > 0.0 {
                *map.entry(set).or_insert(0.0) += mass;
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > IDENTITY_TOL {
            return Err(Error::InvalidSpec(format!("masses sum to {total}, not 1")));
        }
        Ok(Self { s, q, sigma: map })
    }

    /// `s` independent `Ber(q)` coordinates: `σ(∅) = 1`.
    pub fn bernoulli(s: usize, q: f64) -> Result<Self> {
        Self::new(s, q, [(0, 1.0)])
    }

    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> &BTreeMap<Subset, f64> {
        &self.sigma
    }

    pub fn mass(&self, set: Subset) -> f64 {
        self.sigma.get(&set).copied().unwrap_or(0.0)
    }

    fn outcome_mask(&self, x: &[bool]) -> Result<Subset> {
        if x.len() != self.s {
            return Err(Error::DimensionMismatch {
                expected: self.s,
                got: x.len(),
            });
        }
        Ok(x.iter()
            .enumerate()
            .fold(0, |acc, (j, &bit)| acc | (bit as Subset) << j))
    }

    /// Probability of outcome `x`, summing over the perturbation support.
    pub fn pmf(&self, x: &[bool]) -> Result<f64> {
        let x = self.outcome_mask(x)?;
        Ok(self.pmf_at(x))
    }

    fn pmf_at(&self, x: Subset) -> f64 {
        let ones = subset::size(x) as i32;
        let zeros = self.s as i32 - ones;
        self.sigma
            .iter()
            .filter(|(&set, _)| set & !x == 0)
            .map(|(&set, &mass)| {
                let free_ones = ones - subset::size(set) as i32;
                mass * self.q.powi(free_ones) * (1.0 - self.q).powi(zeros)
            })
            .sum()
    }

    /// Probability of `x` through the superset-statistic expansion
    /// `Π_j q^{x_j}(1-q)^{1-x_j} · Σ_J S(J) Π_{j∈J} (x_j/q - 1)`.
    pub fn pmf_fourier(&self, x: &[bool]) -> Result<f64> {
        let x = self.outcome_mask(x)?;
        if self.q <= 0.0 {
            return Err(Error::InvalidSpec("Fourier form needs q > 0".into()));
        }
        let stats = self.superset_sums();
        let up = (1.0 - self.q) / self.q;
        let ones = subset::size(x) as i32;
        let base = self.q.powi(ones) * (1.0 - self.q).powi(self.s as i32 - ones);
        let series: f64 = stats
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(set, &v)| {
                let set = set as Subset;
                let hits = subset::size(set & x) as i32;
                let misses = subset::size(set & !x) as i32;
                let sign = if misses % 2 == 0 { 1.0 } else { -1.0 };
                v * up.powi(hits) * sign
            })
            .sum();
        Ok(base * series)
    }

    /// The full pmf table, indexed by outcome bit pattern.
    ///
    /// Computed by a per-coordinate transform of `σ` rather than the pointwise
    /// sum, so it doubles as an independent check of [`PBSpec::pmf`].
    pub fn pmf_table(&self) -> Vec<f64> {
        let len = 1usize << self.s;
        let mut table = vec![0.0; len];
        for (&set, &mass) in &self.sigma {
            table[set as usize] = mass;
        }
        for b in 0..self.s {
            let bit = 1 << b;
            for mask in 0..len {
                if mask & bit != 0 {
                    let lo = table[mask ^ bit];
                    table[mask] += self.q * lo;
                    table[mask ^ bit] = (1.0 - self.q) * lo;
                }
            }
        }
        table
    }

    /// One draw, as a boolean vector of length `s`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        let coins: Vec<bool> = (0..self.s).map(|_| rng.random_bool(self.q)).collect();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = *self
            .sigma
            .keys()
            .next_back()
            .expect("validated spec has mass");
        for (&set, &mass) in &self.sigma {
            acc += mass;
            if u < acc {
                chosen = set;
                break;
            }
        }
        coins
            .into_iter()
            .enumerate()
            .map(|(j, y)| y || chosen >> j & 1 == 1)
            .collect()
    }

    /// `S(J) = Σ_{J' ⊇ J} σ(J')` for every subset `J`.
    pub fn superset_sums(&self) -> SupersetStats {
        let mut values = vec![0.0; 1 << self.s];
        for (&set, &mass) in &self.sigma {
            values[set as usize] = mass;
        }
        subset::superset_zeta(&mut values);
        SupersetStats { s: self.s, values }
    }
}

/// Dense table of superset statistics `S(J)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupersetStats {
    pub s: usize,
    pub values: Vec<f64>,
}

impl SupersetStats {
    pub fn get(&self, set: Subset) -> f64 {
        self.values[set as usize]
    }

    /// `Σ_{|J| >= 2} S(J)`.
    pub fn higher_order_total(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(set, _)| set.count_ones() >= 2)
            .map(|(_, v)| v)
            .sum()
    }
}

/// Superset sums of a spec; fails for dimensions beyond [`MAX_DIM`].
pub fn superset_sum(spec: &PBSpec) -> Result<SupersetStats> {
    if spec.s > MAX_DIM {
        return Err(Error::StateSpace(format!(
            "s = {} exceeds {MAX_DIM}",
            spec.s
        )));
    }
    Ok(spec.superset_sums())
}

/// Recovers `σ` from its superset sums. Tiny negative round-off is clamped
/// to zero; anything below `-1e-9` is rejected.
pub fn mobius_invert(stats: &SupersetStats) -> Result<BTreeMap<Subset, f64>> {
    if stats.values.len() != 1 << stats.s {
        return Err(Error::DimensionMismatch {
            expected: 1 << stats.s,
            got: stats.values.len(),
        });
    }
    let mut values = stats.values.clone();
    subset::superset_mobius(&mut values);
    let mut sigma = BTreeMap::new();
    for (set, mass) in values.into_iter().enumerate() {
        if mass < -NEGATIVE_MASS_TOL {
            return Err(Error::InvalidSpec(format!(
                "inverted mass {mass} at {:?} is negative",
                subset::coords(set as Subset)
            )));
        }
        if mass > 0.0 {
            sigma.insert(set as Subset, mass);
        }
    }
    Ok(sigma)
}

/// `Ber(q')^s` written as `PB(q, σ)` with
/// `σ(J) = p^{|J|} (1-p)^{s-|J|}`, `p = (q'-q)/(1-q)`.
pub fn bernoulli_lift(q: f64, q_prime: f64, s: usize) -> Result<PBSpec> {
    if q >= 1.0 {
        return Err(Error::InvalidSpec("cannot lift from q = 1".into()));
    }
    if !(0.0 <= q && q <= q_prime && q_prime <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "need 0 <= q <= q' <= 1, got q={q}, q'={q_prime}"
        )));
    }
    if s == 0 || s > MAX_DIM {
        return Err(Error::InvalidSpec(format!(
            "dimension {s} outside 1..={MAX_DIM}"
        )));
    }
    let p = (q_prime - q) / (1.0 - q);
    let masses = (0..1u32 << s).map(|set| {
        let k = set.count_ones() as i32;
        (set, p.powi(k) * (1.0 - p).powi(s as i32 - k))
    });
    PBSpec::new(s, q, masses)
}

fn check_pair(a: &PBSpec, b: &PBSpec) -> Result<()> {
    if a.s != b.s {
        return Err(Error::DimensionMismatch {
            expected: a.s,
            got: b.s,
        });
    }
    Ok(())
}

/// Exact `KL(P_a || P_b)` in nats; `+∞` when `P_a` is not absolutely
/// continuous with respect to `P_b`.
pub fn kl_exact(a: &PBSpec, b: &PBSpec) -> Result<f64> {
    check_pair(a, b)?;
    Ok(kl_tables(&a.pmf_table(), &b.pmf_table()))
}

pub(crate) fn kl_tables(p: &[f64], r: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pa, &pb) in p.iter().zip(r) {
        if pa > 0.0 {
            if pb <= 0.0 {
                return f64::INFINITY;
            }
            total += pa * (pa.ln() - pb.ln());
        }
    }
    total.max(0.0)
}

/// Exact `χ²(P_a || P_b)`; `+∞` on support failure.
pub fn chi2_exact(a: &PBSpec, b: &PBSpec) -> Result<f64> {
    check_pair(a, b)?;
    let mut total = 0.0;
    for (pa, pb) in a.pmf_table().into_iter().zip(b.pmf_table()) {
        if pb <= 0.0 {
            if pa > 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        total += (pa - pb) * (pa - pb) / pb;
    }
    Ok(total)
}

/// Right-hand side of the superset-statistic bound on `KL(P_a || P_b)`.
///
/// Both specs must share the base rate `q ∈ (0, 1)`, and `b` must put
/// positive mass on the empty perturbation.
pub fn kl_bound(a: &PBSpec, b: &PBSpec) -> Result<f64> {
    weighted_superset_gap(a, b, 2)
}

/// Same shape as [`kl_bound`] with weights `((1-q)/q)^{|J|}`.
///
/// This is the second moment of the centred product basis under `Ber(q)^s`,
/// so it bounds `chi^2` (and hence KL) for every `q`. For `q <= 1/2` it is
/// never larger than [`kl_bound`]; for `q > 1/2` the latter can undershoot
/// the exact KL.
pub fn kl_bound_linear(a: &PBSpec, b: &PBSpec) -> Result<f64> {
    weighted_superset_gap(a, b, 1)
}

fn weighted_superset_gap(a: &PBSpec, b: &PBSpec, power: i32) -> Result<f64> {
    check_pair(a, b)?;
    if (a.q - b.q).abs() > IDENTITY_TOL {
        return Err(Error::InvalidSpec(format!(
            "base rates differ: {} vs {}",
            a.q, b.q
        )));
    }
    let q = a.q;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidSpec(format!("base rate {q} outside (0, 1)")));
    }
    let tau_empty = b.mass(0);
    if tau_empty <= 0.0 {
        return Err(Error::InvalidSpec("reference spec has τ(∅) = 0".into()));
    }
    let sa = a.superset_sums();
    let sb = b.superset_sums();
    let ratio = ((1.0 - q) / q).powi(power);
    let weights: Vec<f64> = (0..=a.s as i32).map(|k| ratio.powi(k)).collect();
    let sum: f64 = sa
        .values
        .iter()
        .zip(&sb.values)
        .enumerate()
        .map(|(set, (x, y))| weights[set.count_ones() as usize] * (x - y) * (x - y))
        .sum();
    Ok(sum / tau_empty)
}

/// Exact divergences of a pair next to the superset-statistic bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub kl_exact: f64,
    pub chi2_exact: f64,
    pub bound: f64,
    pub slack: f64,
}

impl DivergenceReport {
    /// Both inequalities `kl <= χ²` and `kl <= bound` hold up to
    /// [`INEQUALITY_TOL`]. Infinite values never satisfy a finite bound.
    pub fn holds(&self) -> bool {
        self.kl_exact <= self.chi2_exact + INEQUALITY_TOL
            && self.kl_exact <= self.bound + INEQUALITY_TOL
    }
}

pub fn divergence_report(a: &PBSpec, b: &PBSpec) -> Result<DivergenceReport> {
    let kl = kl_exact(a, b)?;
    let chi2 = chi2_exact(a, b)?;
    let bound = kl_bound(a, b)?;
    Ok(DivergenceReport {
        kl_exact: kl,
        chi2_exact: chi2,
        bound,
        slack: bound - kl,
    })
}

/// Flat interchange form: `{"s", "q", "sigma": [{"set": [1-based], "mass"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PBSpecRecord {
    pub s: usize,
    pub q: f64,
    pub sigma: Vec<MassRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MassRecord {
    pub set: Vec<usize>,
    pub mass: f64,
}

impl From<PBSpec> for PBSpecRecord {
    fn from(spec: PBSpec) -> Self {
        let sigma = spec
            .sigma
            .iter()
            .map(|(&set, &mass)| MassRecord {
                set: subset::coords(set),
                mass,
            })
            .collect();
        Self {
            s: spec.s,
            q: spec.q,
            sigma,
        }
    }
}

impl TryFrom<PBSpecRecord> for PBSpec {
    type Error = Error;

    fn try_from(rec: PBSpecRecord) -> Result<Self> {
        let mut masses = Vec::with_capacity(rec.sigma.len());
        for m in rec.sigma {
            if m.set.iter().any(|&j| j == 0 || j > rec.s) {
                return Err(Error::InvalidSpec(format!(
                    "set {:?} not within 1..={}",
                    m.set, rec.s
                )));
            }
            masses.push((subset::from_coords(m.set), m.mass));
        }
        PBSpec::new(rec.s, rec.q, masses)
    }
}
