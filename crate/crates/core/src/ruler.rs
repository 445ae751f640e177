//! Rulers: index subsets of `{0, …, d-1}` that realize every distance.
//!
//! Indices are 0-based throughout. `R_s` is the set of *ordered* pairs
//! `(j, k) ∈ R × R` with `|j - k| = s`, so `|R_0| = |R|` and `|R_s|` is even
//! for `s ≥ 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A validated ruler together with its per-distance pair counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ruler {
    d: usize,
    indices: Vec<usize>,
    member: Vec<bool>,
    counts: Vec<usize>,
}

/// Outcome of [`is_ruler`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulerCheck {
    pub valid: bool,
    /// Unrealized distances in increasing order.
    pub missing: Vec<usize>,
}

fn ordered_pair_counts(indices: &[usize], d: usize) -> Vec<usize> {
    let mut counts = vec![0usize; d];
    counts[0] = indices.len();
    for (i, &j) in indices.iter().enumerate() {
        for &k in &indices[i + 1..] {
            counts[k - j] += 2;
        }
    }
    counts
}

/// Check that every distance `0..d` is realized by some pair of `indices`.
/// Out-of-range indices are ignored.
pub fn is_ruler(indices: &[usize], d: usize) -> RulerCheck {
    if d == 0 {
        return RulerCheck {
            valid: false,
            missing: Vec::new(),
        };
    }
    let mut member = vec![false; d];
    for &i in indices {
        if i < d {
            member[i] = true;
        }
    }
    let present: Vec<usize> = (0..d).filter(|&i| member[i]).collect();
    let mut seen = vec![false; d];
    for (a, &j) in present.iter().enumerate() {
        seen[0] = true;
        for &k in &present[a + 1..] {
            seen[k - j] = true;
        }
    }
    let missing: Vec<usize> = (0..d).filter(|&s| !seen[s]).collect();
    RulerCheck {
        valid: missing.is_empty(),
        missing,
    }
}

impl Ruler {
    /// Validate an index set (any order, duplicates removed) as a ruler of
    /// dimension `d`.
    pub fn new(mut indices: Vec<usize>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension {
                expected: 1,
                got: 0,
            });
        }
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= d) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                bound: d,
            });
        }
        let check = is_ruler(&indices, d);
        if !check.valid {
            return Err(Error::NotARuler {
                missing: check.missing,
            });
        }
        Ok(Self::build(indices, d))
    }

    /// Parse 1-based indices, as printed by the CLI.
    pub fn from_one_based(indices: &[usize], d: usize) -> Result<Self> {
        let mut zero = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > d {
                return Err(Error::IndexOutOfRange { index: i, bound: d });
            }
            zero.push(i - 1);
        }
        Self::new(zero, d)
    }

    fn build(indices: Vec<usize>, d: usize) -> Self {
        let mut member = vec![false; d];
        for &i in &indices {
            member[i] = true;
        }
        let counts = ordered_pair_counts(&indices, d);
        Self {
            d,
            indices,
            member,
            counts,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Ascending 0-based indices.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    /// `|R|`, the number of entries observed per sample.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.member.get(i).copied().unwrap_or(false)
    }

    /// `|R_s|`, counting ordered pairs.
    pub fn pair_count(&self, s: usize) -> usize {
        self.counts.get(s).copied().unwrap_or(0)
    }

    /// Ordered pair counts for all distances `0..d`.
    pub fn pair_counts(&self) -> &[usize] {
        &self.counts
    }

    /// The unordered pairs `j ≤ k` at distance `s`, in increasing `j`.
    pub fn unordered_pairs(&self, s: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.indices
            .iter()
            .filter(move |&&j| j + s < self.d && self.member[j + s])
            .map(move |&j| (j, j + s))
    }

    /// `R_s` as ordered pairs.
    pub fn pairs_at_distance(&self, s: usize) -> Result<Vec<(usize, usize)>> {
        if s >= self.d {
            return Err(Error::IndexOutOfRange {
                index: s,
                bound: self.d,
            });
        }
        let mut out = Vec::with_capacity(self.pair_count(s));
        for (j, k) in self.unordered_pairs(s) {
            out.push((j, k));
            if s > 0 {
                out.push((k, j));
            }
        }
        Ok(out)
    }

    /// Coverage coefficient `φ(R) = Σ_{s=1}^{d-1} 1 / |R_s|`.
    ///
    /// Terms are accumulated from the largest distance down, so the full
    /// ruler reproduces `H_{d-1} / 2` bit for bit.
    pub fn coverage_coefficient(&self) -> f64 {
        (1..self.d).rev().map(|s| 1.0 / self.counts[s] as f64).sum()
    }

    /// A copy with `i` added to the index set.
    pub fn with_index(&self, i: usize) -> Result<Self> {
        let mut idx = self.indices.clone();
        idx.push(i);
        Self::new(idx, self.d)
    }
}

/// Coverage coefficient of a ruler; see [`Ruler::coverage_coefficient`].
pub fn coverage_coefficient(ruler: &Ruler) -> f64 {
    ruler.coverage_coefficient()
}

/// `{0, …, d-1}`.
pub fn full_ruler(d: usize) -> Result<Ruler> {
    if d == 0 {
        return Err(Error::InvalidDimension {
            expected: 1,
            got: 0,
        });
    }
    Ok(Ruler::build((0..d).collect(), d))
}

/// The two-block ruler `R_α`: a dense head `{0, …, r-1}` with `r = round(d^α)`
/// plus a tail `{d-1, d-1-h, …, d-1-(r-1)h}` with `h = round(d^{1-α})`,
/// clipped to `[0, d)`.
///
/// Rounding can leave a distance unrealized; the set is then repaired by
/// repeatedly adding the smallest index that realizes the largest missing
/// distance.
pub fn ruler_alpha(d: usize, alpha: f64) -> Result<Ruler> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument("alpha must lie in [1/2, 1]"));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("ruler_alpha needs d >= 2"));
    }
    let df = d as f64;
    let head = (libm::round(libm::pow(df, alpha)) as usize).clamp(1, d);
    let step = (libm::round(libm::pow(df, 1.0 - alpha)) as usize).max(1);

    let mut member = vec![false; d];
    member[..head].fill(true);
    for i in 0..head {
        match (d - 1).checked_sub(i * step) {
            Some(j) => member[j] = true,
            None => break,
        }
    }
    loop {
        let idx: Vec<usize> = (0..d).filter(|&i| member[i]).collect();
        let check = is_ruler(&idx, d);
        let Some(&s) = check.missing.last() else {
            return Ok(Ruler::build(idx, d));
        };
        let fix = (0..d)
            .find(|&i| !member[i] && ((i + s < d && member[i + s]) || (i >= s && member[i - s])))
            .ok_or(Error::NotARuler {
                missing: check.missing.clone(),
            })?;
        member[fix] = true;
    }
}

/// Heuristic size of `φ(R_α)`: `d^{2-2α} + d^{1-α} ln d`, with the hidden
/// constant of the lower-order term set to one.
pub fn phi_bound(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    libm::pow(df, 2.0 - 2.0 * alpha) + libm::pow(df, 1.0 - alpha) * libm::log(df)
}
