//! Unordered partitions of `{1,…,R}` into cells of equal size `M`.
//!
//! Counting is exact (big integers), enumeration is lexicographic over
//! canonical forms (each cell sorted, cells ordered by smallest element),
//! and uniform sampling fills cells sequentially: take the smallest
//! unassigned index, pick its `M-1` cellmates uniformly from the pool.
//! Every partition arises from exactly one such choice sequence, and the
//! choice counts do not depend on the draws, so the sampler is uniform
//! over canonical forms.

pub mod moments;

pub use moments::{
    avg_partition_moment, elp_bound_check, l2_identity_check, l4_bound_check, GaussRat,
    L2Identity, MomentReport, MomentValue, MomentWeights, PartitionFamily,
};

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest family size that full enumeration will walk.
pub const ENUM_CAP: u64 = 10_000_000;

/// An unordered partition of `{1,…,R}` into `R/M` cells of size `M`, held
/// in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EqualPartition {
    r: usize,
    m: usize,
    cells: Vec<Vec<usize>>,
}

impl EqualPartition {
    /// Canonicalize and validate a list of cells.
    pub fn new(r: usize, cells: Vec<Vec<usize>>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::validation("partition needs at least one cell"));
        }
        let m = cells[0].len();
        if m == 0 || cells.iter().any(|c| c.len() != m) {
            return Err(Error::validation("cells must share a positive size"));
        }
        if m * cells.len() != r {
            return Err(Error::validation("cells must cover {1,…,R}"));
        }
        let mut seen = vec![false; r + 1];
        let mut canon: Vec<Vec<usize>> = cells
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        for c in &canon {
            for &i in c {
                if i == 0 || i > r || seen[i] {
                    return Err(Error::validation("cells must partition {1,…,R}"));
                }
                seen[i] = true;
            }
        }
        canon.sort_by_key(|c| c[0]);
        Ok(EqualPartition { r, m, cells: canon })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }
}

fn require_divides(r: usize, m: usize) -> Result<()> {
    if r == 0 || m == 0 {
        return Err(Error::validation("R and M must be positive"));
    }
    if !r.is_multiple_of(m) {
        return Err(Error::validation(format!("M={m} must divide R={r}")));
    }
    Ok(())
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let mut num = BigUint::one();
    for i in 0..k {
        num *= n - i;
    }
    let mut den = BigUint::one();
    for i in 1..=k {
        den *= i;
    }
    num / den
}

fn factorial(n: u64) -> BigUint {
    let mut f = BigUint::one();
    for i in 2..=n {
        f *= i;
    }
    f
}

/// Number of unordered partitions of `{1,…,R}` into `R/M` cells of size
/// `M`: select the cells one at a time and divide by `(R/M)!`.
pub fn count_partitions(r: usize, m: usize) -> Result<BigUint> {
    require_divides(r, m)?;
    if r > 10_000 {
        return Err(Error::validation("count_partitions supports R <= 10^4"));
    }
    let cells = (r / m) as u64;
    let mut prod = BigUint::one();
    for k in 0..cells {
        prod *= binomial(r as u64 - k * m as u64, m as u64);
    }
    Ok(prod / factorial(cells))
}

/// Number of partitions that put two fixed distinct indices in the same
/// cell. Satisfies `count_cohabiting·(R-1) = count_partitions·(M-1)`
/// exactly.
pub fn count_cohabiting(r: usize, m: usize) -> Result<BigUint> {
    require_divides(r, m)?;
    if m < 2 {
        return Err(Error::validation("cohabiting counts need M >= 2"));
    }
    if r > 10_000 {
        return Err(Error::validation("count_cohabiting supports R <= 10^4"));
    }
    // select the R/M - 1 cells avoiding the pair, then the pair completes
    // the remaining cell of size M
    let cells = (r / m) as u64;
    let mut prod = BigUint::one();
    for k in 0..cells - 1 {
        prod *= binomial(r as u64 - 2 - k * m as u64, m as u64);
    }
    Ok(prod / factorial(cells - 1))
}

/// Number of transversal partitions for `M` groups of size `R/M`:
/// `((R/M)!)^{M-1}`.
pub fn count_transversal(spec: &TransversalSpec) -> BigUint {
    let g = spec.group_size() as u64;
    let m = spec.groups.len() as u32;
    factorial(g).pow(m.saturating_sub(1))
}

/// Lexicographic streaming enumeration of all equal partitions.
pub fn enumerate_partitions(r: usize, m: usize) -> Result<PartitionIter> {
    require_divides(r, m)?;
    let total = count_partitions(r, m)?;
    if total > BigUint::from(ENUM_CAP) {
        return Err(Error::validation(format!(
            "family of {total} partitions exceeds enumeration cap {ENUM_CAP}"
        )));
    }
    Ok(PartitionIter::new(r, m))
}

struct Level {
    anchor: usize,
    pool: Vec<usize>,
    comb: Vec<usize>,
}

/// Iterator over equal partitions in canonical lexicographic order.
pub struct PartitionIter {
    r: usize,
    m: usize,
    stack: Vec<Level>,
    available: Vec<bool>,
    state: IterState,
}

enum IterState {
    Fresh,
    Running,
    Done,
}

impl PartitionIter {
    fn new(r: usize, m: usize) -> Self {
        PartitionIter {
            r,
            m,
            stack: Vec::with_capacity(r / m),
            available: vec![true; r + 1],
            state: IterState::Fresh,
        }
    }

    /// Extend the stack with first-choice cells until the partition is
    /// complete.
    fn descend(&mut self) {
        while self.stack.len() < self.r / self.m {
            let anchor = (1..=self.r).find(|&i| self.available[i]).expect("anchor exists");
            self.available[anchor] = false;
            let pool: Vec<usize> = (anchor + 1..=self.r).filter(|&i| self.available[i]).collect();
            let comb: Vec<usize> = (0..self.m - 1).collect();
            for &c in &comb {
                self.available[pool[c]] = false;
            }
            self.stack.push(Level { anchor, pool, comb });
        }
    }

    fn emit(&self) -> EqualPartition {
        let cells: Vec<Vec<usize>> = self
            .stack
            .iter()
            .map(|lvl| {
                let mut cell = Vec::with_capacity(self.m);
                cell.push(lvl.anchor);
                cell.extend(lvl.comb.iter().map(|&c| lvl.pool[c]));
                cell
            })
            .collect();
        EqualPartition {
            r: self.r,
            m: self.m,
            cells,
        }
    }

    /// Advance the top of the stack to the next combination, popping
    /// exhausted levels. Returns false when the enumeration is complete.
    fn advance(&mut self) -> bool {
        loop {
            let Some(top) = self.stack.last_mut() else {
                return false;
            };
            for &c in &top.comb {
                self.available[top.pool[c]] = true;
            }
            if next_combination(&mut top.comb, top.pool.len()) {
                for &c in &top.comb {
                    self.available[top.pool[c]] = false;
                }
                self.descend();
                return true;
            }
            self.available[top.anchor] = true;
            self.stack.pop();
        }
    }
}

impl Iterator for PartitionIter {
    type Item = EqualPartition;

    fn next(&mut self) -> Option<EqualPartition> {
        match self.state {
            IterState::Fresh => {
                self.state = IterState::Running;
                self.descend();
                Some(self.emit())
            }
            IterState::Running => {
                if self.advance() {
                    Some(self.emit())
                } else {
                    self.state = IterState::Done;
                    None
                }
            }
            IterState::Done => None,
        }
    }
}

/// Next lexicographic `k`-combination of indices in `0..n`. Returns false
/// after the last combination.
fn next_combination(indices: &mut [usize], n: usize) -> bool {
    let k = indices.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if indices[i] < n - (k - i) {
            indices[i] += 1;
            for j in i + 1..k {
                indices[j] = indices[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `M` groups of size `R/M` partitioning `{1,…,R}`; transversal partitions
/// take exactly one element from each group per cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalSpec {
    groups: Vec<Vec<usize>>,
}

impl TransversalSpec {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::validation("transversal spec needs at least one group"));
        }
        let g = groups[0].len();
        if g == 0 || groups.iter().any(|s| s.len() != g) {
            return Err(Error::validation("groups must share a positive size"));
        }
        let r = g * groups.len();
        let mut seen = vec![false; r + 1];
        let mut sorted: Vec<Vec<usize>> = groups
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s
            })
            .collect();
        for s in &sorted {
            for &i in s {
                if i == 0 || i > r || seen[i] {
                    return Err(Error::validation("groups must partition {1,…,R}"));
                }
                seen[i] = true;
            }
        }
        sorted.sort_by_key(|s| s[0]);
        Ok(TransversalSpec { groups: sorted })
    }

    /// Groups split `{1,…,R}` evenly: one group per cell slot.
    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group_size(&self) -> usize {
        self.groups[0].len()
    }

    pub fn r(&self) -> usize {
        self.group_size() * self.groups.len()
    }

    /// Cell size of the resulting partitions.
    pub fn m(&self) -> usize {
        self.groups.len()
    }
}

/// Enumerate every transversal partition (one element per group per cell).
pub fn enumerate_transversal(spec: &TransversalSpec) -> Result<TransversalIter> {
    let total = count_transversal(spec);
    if total > BigUint::from(ENUM_CAP) {
        return Err(Error::validation(format!(
            "family of {total} transversal partitions exceeds cap {ENUM_CAP}; use sampling"
        )));
    }
    Ok(TransversalIter::new(spec.clone()))
}

/// Iterator over transversal partitions: an odometer of lexicographic
/// permutations, one per group beyond the first.
pub struct TransversalIter {
    spec: TransversalSpec,
    perms: Vec<Vec<usize>>,
    fresh: bool,
    done: bool,
}

impl TransversalIter {
    fn new(spec: TransversalSpec) -> Self {
        let g = spec.group_size();
        let m = spec.m();
        TransversalIter {
            spec,
            perms: vec![(0..g).collect(); m.saturating_sub(1)],
            fresh: true,
            done: false,
        }
    }

    fn emit(&self) -> EqualPartition {
        let g = self.spec.group_size();
        let m = self.spec.m();
        let mut cells = Vec::with_capacity(g);
        for i in 0..g {
            let mut cell = Vec::with_capacity(m);
            cell.push(self.spec.groups[0][i]);
            for (k, perm) in self.perms.iter().enumerate() {
                cell.push(self.spec.groups[k + 1][perm[i]]);
            }
            cell.sort_unstable();
            cells.push(cell);
        }
        cells.sort_by_key(|c| c[0]);
        EqualPartition {
            r: self.spec.r(),
            m,
            cells,
        }
    }

    fn advance(&mut self) -> bool {
        for perm in self.perms.iter_mut().rev() {
            if next_permutation(perm) {
                return true;
            }
            // wrapped: reset to identity and carry
            perm.sort_unstable();
        }
        false
    }
}

impl Iterator for TransversalIter {
    type Item = EqualPartition;

    fn next(&mut self) -> Option<EqualPartition> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
            return Some(self.emit());
        }
        if self.advance() {
            Some(self.emit())
        } else {
            self.done = true;
            None
        }
    }
}

/// Next lexicographic permutation in place; false after the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Draw a uniform random equal partition by sequential cell filling.
pub fn sample_partition<R: rand::Rng>(r: usize, m: usize, rng: &mut R) -> Result<EqualPartition> {
    require_divides(r, m)?;
    let mut pool: Vec<usize> = (1..=r).collect();
    let mut cells = Vec::with_capacity(r / m);
    while !pool.is_empty() {
        let anchor = pool.remove(0);
        let mut picked = rand::seq::index::sample(rng, pool.len(), m - 1).into_vec();
        picked.sort_unstable_by(|a, b| b.cmp(a));
        let mut cell = vec![anchor];
        for idx in picked {
            cell.push(pool.remove(idx));
        }
        cell.sort_unstable();
        cells.push(cell);
    }
    EqualPartition::new(r, cells)
}

/// Draw a uniform random transversal partition: an independent uniform
/// permutation per group beyond the first.
pub fn sample_transversal<R: rand::Rng>(spec: &TransversalSpec, rng: &mut R) -> EqualPartition {
    use rand::seq::SliceRandom;
    let g = spec.group_size();
    let m = spec.m();
    let mut cells: Vec<Vec<usize>> = (0..g).map(|i| vec![spec.groups[0][i]]).collect();
    for k in 1..m {
        let mut perm: Vec<usize> = (0..g).collect();
        perm.shuffle(rng);
        for i in 0..g {
            cells[i].push(spec.groups[k][perm[i]]);
        }
    }
    for c in &mut cells {
        c.sort_unstable();
    }
    cells.sort_by_key(|c| c[0]);
    EqualPartition {
        r: spec.r(),
        m,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_small_families() {
        assert_eq!(count_partitions(4, 2).unwrap(), BigUint::from(3u32));
        assert_eq!(count_partitions(6, 3).unwrap(), BigUint::from(10u32));
        assert_eq!(count_partitions(6, 6).unwrap(), BigUint::from(1u32));
        assert_eq!(count_partitions(5, 1).unwrap(), BigUint::from(1u32));
        assert!(count_partitions(5, 2).is_err());
    }

    #[test]
    fn cohabiting_counts_and_identity() {
        assert_eq!(count_cohabiting(4, 2).unwrap(), BigUint::from(1u32));
        assert_eq!(count_cohabiting(6, 2).unwrap(), BigUint::from(3u32));
        for r in 2..=12usize {
            for m in 2..=r {
                if r % m != 0 {
                    continue;
                }
                let total = count_partitions(r, m).unwrap();
                let cohab = count_cohabiting(r, m).unwrap();
                assert_eq!(
                    cohab * BigUint::from(r as u64 - 1),
                    total * BigUint::from(m as u64 - 1),
                    "identity fails at R={r} M={m}"
                );
            }
        }
    }

    #[test]
    fn enumerate_r4_m2_by_hand() {
        let parts: Vec<EqualPartition> = enumerate_partitions(4, 2).unwrap().collect();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0].cells(), &[vec![1, 2], vec![3, 4]]);
        assert_eq!(parts[1].cells(), &[vec![1, 3], vec![2, 4]]);
        assert_eq!(parts[2].cells(), &[vec![1, 4], vec![2, 3]]);
    }

    #[test]
    fn enumerate_matches_counts() {
        for (r, m) in [(6, 2), (6, 3), (3, 3), (8, 4), (9, 3)] {
            let n = enumerate_partitions(r, m).unwrap().count();
            assert_eq!(BigUint::from(n as u64), count_partitions(r, m).unwrap());
        }
        assert_eq!(enumerate_partitions(6, 2).unwrap().count(), 15);
    }

    #[test]
    fn transversal_small_cases() {
        // groups {1,2},{3,4}: cells take one from each → {13|24}, {14|23}
        let spec = TransversalSpec::new(vec![vec![1, 2], vec![3, 4]]).unwrap();
        let parts: Vec<EqualPartition> = enumerate_transversal(&spec).unwrap().collect();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].cells(), &[vec![1, 3], vec![2, 4]]);
        assert_eq!(parts[1].cells(), &[vec![1, 4], vec![2, 3]]);

        // groups of size 3, M = 2 → (3!)^1 = 6
        let spec = TransversalSpec::new(vec![vec![1, 2, 3], vec![4, 5, 6]]).unwrap();
        let parts: Vec<EqualPartition> = enumerate_transversal(&spec).unwrap().collect();
        assert_eq!(parts.len(), 6);
        let unique: std::collections::HashSet<_> = parts.iter().collect();
        assert_eq!(unique.len(), 6);

        // M = 1: a single partition regardless of group size
        let spec = TransversalSpec::new(vec![vec![1, 2, 3]]).unwrap();
        assert_eq!(enumerate_transversal(&spec).unwrap().count(), 1);
    }

    #[test]
    fn sampler_produces_valid_partitions() {
        let mut rng = crate::rng::stream_rng(42, 0);
        for _ in 0..50 {
            let p = sample_partition(12, 3, &mut rng).unwrap();
            assert_eq!(p.cells().len(), 4);
        }
    }
}
