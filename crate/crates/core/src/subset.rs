//! Subsets of `{1..s}` as bit patterns, and the subset-lattice transforms.
//!
//! Coordinate `j` (1-based) is bit `j - 1`. Dense tables are indexed by the
//! bit pattern and have length `2^s`.

/// A subset of `{1..s}` for `s <= 32`.
pub type Subset = u32;

pub fn size(set: Subset) -> usize {
    set.count_ones() as usize
}

pub fn contains(set: Subset, coord: usize) -> bool {
    set >> (coord - 1) & 1 == 1
}

pub fn from_coords(coords: impl IntoIterator<Item = usize>) -> Subset {
    coords.into_iter().fold(0, |acc, j| acc | 1 << (j - 1))
}

/// Sorted 1-based coordinates of `set`.
pub fn coords(set: Subset) -> Vec<usize> {
    (0..32)
        .filter(|b| set >> b & 1 == 1)
        .map(|b| b + 1)
        .collect()
}

fn bits(len: usize) -> impl Iterator<Item = usize> {
    debug_assert!(len.is_power_of_two());
    (0..len.trailing_zeros()).map(|b| 1 << b)
}

/// In place: `table[J] <- sum over J' ⊇ J of table[J']`.
pub fn superset_zeta(table: &mut [f64]) {
    for bit in bits(table.len()) {
        for mask in 0..table.len() {
            if mask & bit == 0 {
                table[mask] += table[mask | bit];
            }
        }
    }
}

/// Inverse of [`superset_zeta`].
pub fn superset_mobius(table: &mut [f64]) {
    for bit in bits(table.len()) {
        for mask in 0..table.len() {
            if mask & bit == 0 {
                table[mask] -= table[mask | bit];
            }
        }
    }
}
