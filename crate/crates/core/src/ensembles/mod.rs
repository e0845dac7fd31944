//! Partitions of the canonical cap grid into large ensembles and the
//! geometry condition they must satisfy.
//!
//! An ensemble partition assigns every cap to exactly one ensemble id in
//! `{1,…,N}`. The builders cover the shapes under study: flat strips,
//! concentric rings, spread-out sets (one cap per coarse square), and
//! uniformly random M-sets.

mod ratios;

pub use ratios::{
    decoupling_ratio, recoupling_ratio, strip_sharpness_scan, DecouplingReport, DecouplingVariant,
    StripScanRow, StripSharpnessScan,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::WeightVector;
use crate::freqsets::CapGrid;
use crate::partitions::sample_partition;
use crate::rng::stream_rng;

/// Assignment of every cap to an ensemble id in `{1,…,N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePartition {
    pub grid: CapGrid,
    /// One-based ensemble id per cap, ids contiguous from 1.
    pub assignment: Vec<u32>,
    pub n_ensembles: usize,
    pub shape_label: String,
}

impl EnsemblePartition {
    fn new(grid: CapGrid, assignment: Vec<u32>, label: impl Into<String>) -> Result<Self> {
        if assignment.len() != grid.len() {
            return Err(Error::validation("assignment length must match cap count"));
        }
        let n = *assignment.iter().max().unwrap_or(&0) as usize;
        if n == 0 {
            return Err(Error::validation("ensemble ids must start at 1"));
        }
        let mut seen = vec![false; n + 1];
        for &id in &assignment {
            if id == 0 || id as usize > n {
                return Err(Error::validation("ensemble ids must be contiguous from 1"));
            }
            seen[id as usize] = true;
        }
        if !seen[1..].iter().all(|&s| s) {
            return Err(Error::validation("ensemble ids must be contiguous from 1"));
        }
        Ok(EnsemblePartition {
            grid,
            assignment,
            n_ensembles: n,
            shape_label: label.into(),
        })
    }

    /// Cap indices of ensemble `id` (1-based).
    pub fn members(&self, id: u32) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| (a == id).then_some(i))
            .collect()
    }

    /// Sizes per ensemble id, index 0 unused.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_ensembles + 1];
        for &id in &self.assignment {
            sizes[id as usize] += 1;
        }
        sizes
    }
}

/// Flat strips: ensemble `i` is the row of caps sharing the second
/// coordinate index `i`. `√R` ensembles of `√R` caps each.
pub fn build_strips(grid: &CapGrid) -> Result<EnsemblePartition> {
    if grid.base_dim != 2 {
        return Err(Error::validation("strips need a base_dim-2 grid"));
    }
    let assignment: Vec<u32> = (0..grid.len())
        .map(|i| grid.axis_index(i, 1) as u32 + 1)
        .collect();
    EnsemblePartition::new(grid.clone(), assignment, "strips")
}

/// Concentric rings around `center`: cap `q` goes to ring
/// `⌊‖c_q − center‖·√R⌋ + 1`; unused ids are compacted.
pub fn build_circles(grid: &CapGrid, center: &[f64]) -> Result<EnsemblePartition> {
    if grid.base_dim != 2 {
        return Err(Error::validation("circles need a base_dim-2 grid"));
    }
    if center.len() != 2 {
        return Err(Error::validation("circle center must be 2-dimensional"));
    }
    let sqrt_r = grid.r.sqrt();
    let raw: Vec<u32> = grid
        .centers
        .iter()
        .map(|c| {
            let dist = ((c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2)).sqrt();
            (dist * sqrt_r).floor() as u32 + 1
        })
        .collect();
    // compact ids preserving ring order
    let mut used: Vec<u32> = raw.clone();
    used.sort_unstable();
    used.dedup();
    let assignment: Vec<u32> = raw
        .iter()
        .map(|id| used.binary_search(id).unwrap() as u32 + 1)
        .collect();
    EnsemblePartition::new(grid.clone(), assignment, "circles")
}

/// Spread-out sets: split `[0,1]²` into `√R` squares `Q` of side `R^{-1/4}`
/// (each holding `√R` caps) and give every ensemble exactly one cap from
/// each `Q`, via a seeded per-square shuffle of the ensemble ids.
pub fn build_spread(grid: &CapGrid, seed: u64) -> Result<EnsemblePartition> {
    use rand::seq::SliceRandom;
    if grid.base_dim != 2 {
        return Err(Error::validation("spread sets need a base_dim-2 grid"));
    }
    let s = grid.r.powf(0.25).round() as usize;
    if s < 2 || (s * s * s * s) as f64 != grid.r {
        return Err(Error::validation(format!(
            "spread sets need R^(1/4) integer, got R={}",
            grid.r
        )));
    }
    let caps_per_axis = grid.caps_per_axis(); // s²
    let n_ens = s * s; // √R ensembles
    let mut assignment = vec![0u32; grid.len()];
    for qx in 0..s {
        for qy in 0..s {
            let q_index = (qx * s + qy) as u64;
            // caps of this square in lexicographic order
            let mut caps = Vec::with_capacity(n_ens);
            for ix in qx * s..(qx + 1) * s {
                for iy in qy * s..(qy + 1) * s {
                    caps.push(ix * caps_per_axis + iy);
                }
            }
            let mut ids: Vec<u32> = (1..=n_ens as u32).collect();
            let mut rng = stream_rng(seed, q_index);
            ids.shuffle(&mut rng);
            for (cap, id) in caps.into_iter().zip(ids) {
                assignment[cap] = id;
            }
        }
    }
    EnsemblePartition::new(grid.clone(), assignment, "spread")
}

/// Uniformly random partition of the caps into M-sets.
pub fn build_random_msets(grid: &CapGrid, m: usize, seed: u64) -> Result<EnsemblePartition> {
    let n = grid.len();
    if m == 0 || !n.is_multiple_of(m) {
        return Err(Error::validation(format!("M={m} must divide the cap count {n}")));
    }
    let mut rng = stream_rng(seed, 0);
    let partition = sample_partition(n, m, &mut rng)?;
    let mut assignment = vec![0u32; n];
    for (cell_idx, cell) in partition.cells().iter().enumerate() {
        for &i in cell {
            assignment[i - 1] = cell_idx as u32 + 1;
        }
    }
    EnsemblePartition::new(grid.clone(), assignment, format!("random-{m}-sets seed={seed}"))
}

/// Smallest constant `C` such that every dyadic square of side
/// `L ∈ {R^{-1/2},…,1}` meets at most `C·L·N` ensembles.
pub fn check_geometry_condition(ep: &EnsemblePartition) -> Result<f64> {
    if ep.grid.base_dim != 2 {
        return Err(Error::validation("geometry condition needs a base_dim-2 grid"));
    }
    let n = ep.n_ensembles as f64;
    let mut scale = ep.grid.spacing;
    let mut worst = 0.0f64;
    while scale <= 1.0 + 1e-12 {
        let boxes = (1.0 / scale).ceil() as usize;
        let mut hit: std::collections::HashMap<(usize, usize), std::collections::HashSet<u32>> =
            std::collections::HashMap::new();
        for (i, c) in ep.grid.centers.iter().enumerate() {
            let bx = ((c[0] / scale).floor() as usize).min(boxes - 1);
            let by = ((c[1] / scale).floor() as usize).min(boxes - 1);
            hit.entry((bx, by)).or_default().insert(ep.assignment[i]);
        }
        for ids in hit.values() {
            let ratio = ids.len() as f64 / (scale * n);
            worst = worst.max(ratio);
        }
        scale *= 2.0;
    }
    Ok(worst)
}

/// Cap-indexed weights modeling the field `F` (constant on caps).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRecipe {
    Constant,
    RandomPhase { seed: u64 },
    Indicator { subset: Vec<usize> },
}

/// One weight per cap plus the recipe that produced it.
#[derive(Debug, Clone)]
pub struct TestField {
    pub weights: WeightVector,
    pub recipe: FieldRecipe,
}

impl TestField {
    pub fn build(recipe: FieldRecipe, cap_count: usize) -> TestField {
        let weights = match &recipe {
            FieldRecipe::Constant => WeightVector::ones(cap_count),
            FieldRecipe::RandomPhase { seed } => WeightVector::random_phase(cap_count, *seed),
            FieldRecipe::Indicator { subset } => WeightVector::indicator(cap_count, subset),
        };
        TestField { weights, recipe }
    }
}
