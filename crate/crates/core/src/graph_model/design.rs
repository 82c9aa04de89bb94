//! Point designs on `[m] × [m]` used by the null constructions.
//!
//! * Grid: cliques are the `m` rows (`a` fixed) and `m` columns (`b` fixed).
//! * Lines: `[m] × [m]` is the plane over `F_m` (`m` prime); cliques are the
//!   lines `L_{r,h} = {(a, b) : a - b·r ≡ h (mod m)}` for slopes `r < k`.
//!
//! Both designs place every point in exactly two (grid) or `k` (lines)
//! cliques, and any two distinct cliques share at most one point. Grid rows
//! coincide with slope-0 lines, so a planted row `a = h` is written `(0, h)`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    pub a: u32,
    pub b: u32,
}

impl Point {
    pub fn new(a: u32, b: u32) -> Self {
        Self { a, b }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Grid,
    Lines,
}

/// A clique-generating block of a design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Column(u32),
    /// `L_{r,h}`; grid rows are `Line { r: 0, h: a }`.
    Line {
        r: u32,
        h: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Design {
    kind: DesignKind,
    m: u32,
    k: u32,
}

impl Design {
    pub fn grid(m: u32) -> Result<Self> {
        ensure!(m >= 3, "m must be at least 3 for the grid design (got {m})");
        Ok(Self {
            kind: DesignKind::Grid,
            m,
            k: 2,
        })
    }

    /// Slopes `0..k` over `F_m`. The construction needs `m` prime and a
    /// positive cross-edge rate, i.e. `2 <= k` and `2k < m + 2`.
    pub fn lines(m: u32, k: u32) -> Result<Self> {
        ensure!(is_prime(m), "m must be prime (got {m})");
        ensure!(k >= 2, "k must be at least 2 (got {k})");
        ensure!(
            2 * k < m + 2,
            "k = {k} too large for m = {m}: cross-edge rate would be <= 0"
        );
        Ok(Self {
            kind: DesignKind::Lines,
            m,
            k,
        })
    }

    pub fn from_parts(kind: DesignKind, m: u32, k: u32) -> Result<Self> {
        match kind {
            DesignKind::Grid => {
                ensure!(k == 2, "grid design has k = 2 (got {k})");
                Self::grid(m)
            }
            DesignKind::Lines => Self::lines(m, k),
        }
    }

    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of cliques through each point.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Rate of the non-design edges, exact.
    ///
    /// Grid: `1/2 - 1/(2m-2)`. Lines: `1/2 - (k-1)/(2(m-k+1))`.
    pub fn edge_rate_exact(&self) -> Ratio<i64> {
        let m = self.m as i64;
        let k = self.k as i64;
        let half = Ratio::new(1, 2);
        match self.kind {
            DesignKind::Grid => half - Ratio::new(1, 2 * m - 2),
            DesignKind::Lines => half - Ratio::new(k - 1, 2 * (m - k + 1)),
        }
    }

    pub fn edge_rate(&self) -> f64 {
        let r = self.edge_rate_exact();
        *r.numer() as f64 / *r.denom() as f64
    }

    /// Whether two points share a block. Every point is related to itself.
    pub fn related(&self, p: Point, q: Point) -> bool {
        match self.kind {
            DesignKind::Grid => p.a == q.a || p.b == q.b,
            DesignKind::Lines => {
                let m = self.m as u64;
                let da = (p.a as u64 + m - q.a as u64) % m;
                let db = (p.b as u64 + m - q.b as u64) % m;
                (0..self.k as u64).any(|r| da == r * db % m)
            }
        }
    }

    /// The blocks containing `p`: exactly two for the grid, `k` for lines.
    pub fn blocks_through(&self, p: Point) -> Vec<Block> {
        match self.kind {
            DesignKind::Grid => vec![Block::Line { r: 0, h: p.a }, Block::Column(p.b)],
            DesignKind::Lines => (0..self.k)
                .map(|r| Block::Line {
                    r,
                    h: intercept(self.m, p, r),
                })
                .collect(),
        }
    }

    pub fn blocks(&self) -> Vec<Block> {
        match self.kind {
            DesignKind::Grid => (0..self.m)
                .map(|h| Block::Line { r: 0, h })
                .chain((0..self.m).map(Block::Column))
                .collect(),
            DesignKind::Lines => (0..self.k)
                .flat_map(|r| (0..self.m).map(move |h| Block::Line { r, h }))
                .collect(),
        }
    }

    pub fn contains(&self, block: Block, p: Point) -> bool {
        match block {
            Block::Column(b) => p.b == b,
            Block::Line { r, h } => intercept(self.m, p, r) == h,
        }
    }

    /// All `m²` points in lexicographic order.
    pub fn universe(&self) -> Vec<Point> {
        (0..self.m)
            .flat_map(|a| (0..self.m).map(move |b| Point::new(a, b)))
            .collect()
    }

    /// Points of the line `L_{r,h}`, ordered by `b`.
    pub fn line_points(&self, r: u32, h: u32) -> Vec<Point> {
        let m = self.m as u64;
        (0..self.m)
            .map(|b| Point::new(((h as u64 + b as u64 * r as u64) % m) as u32, b))
            .collect()
    }
}

/// `a - b·r mod m`: the intercept of the slope-`r` line through `p`.
pub fn intercept(m: u32, p: Point, r: u32) -> u32 {
    let m = m as u64;
    ((p.a as u64 + m * m - (p.b as u64 * r as u64) % m) % m) as u32
}

/// Trial division.
pub fn is_prime(m: u32) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
