//! Randomized point selection: one representative per equal-measure cell,
//! thinned by independent Bernoulli variables so that the expected kept
//! count is `R^{2d/p}`, with a Chebyshev-style acceptance window and a
//! bounded retry loop.

use rand::Rng;

use crate::error::{Error, Result};
use crate::freqsets::{FrequencyPoint, FrequencySet, MeasureCellPartition};
use crate::rng::stream_rng;

/// Maximum number of seeds tried before giving up.
pub const MAX_SELECT_ATTEMPTS: u32 = 64;

/// Outcome of a tight selection draw.
#[derive(Debug, Clone)]
pub struct TightSelection {
    pub set: FrequencySet,
    /// Thinning probability actually used (clamped to (0, 1]).
    pub delta: f64,
    /// Expected kept count `N·δ`.
    pub expected: f64,
    /// Kept count per attempt, in attempt order; the last one was accepted.
    pub attempt_counts: Vec<usize>,
    /// Seed of the accepted attempt.
    pub accepted_seed: u64,
}

impl TightSelection {
    pub fn attempts(&self) -> u32 {
        self.attempt_counts.len() as u32
    }

    /// Whether a raw kept count falls in the acceptance window
    /// `[Nδ/2, 3Nδ/2]`.
    pub fn in_window(&self, kept: usize) -> bool {
        let k = kept as f64;
        2.0 * k >= self.expected && 2.0 * k <= 3.0 * self.expected
    }
}

/// Select a random frequency set achieving the tight point count for
/// exponent `p` at scale `R`.
///
/// Each cell contributes its parameter-midpoint representative, kept
/// independently with probability `δ = R^{2d/p}/N` (clamped to `(0,1]`).
/// Draws whose kept count falls outside `[Nδ/2, 3Nδ/2]` are rejected and
/// retried with `seed+1`, up to [`MAX_SELECT_ATTEMPTS`] attempts.
pub fn tight_random_select(
    cells: &MeasureCellPartition,
    r: f64,
    p: f64,
    seed: u64,
) -> Result<TightSelection> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::validation(format!("tight_random_select needs R >= 1, got {r}")));
    }
    if !(p.is_finite() && p >= 2.0) {
        return Err(Error::validation(format!("tight_random_select needs p >= 2, got {p}")));
    }
    if cells.is_empty() {
        return Err(Error::validation("empty cell partition"));
    }
    let d = cells.surface.ambient_dim() as f64;
    let n = cells.len();
    let target = r.powf(2.0 * d / p);
    let mut warnings = Vec::new();
    let diameter_bound = r.powf(-1.0 - d / p);
    if cells.max_diameter > diameter_bound {
        warnings.push(format!(
            "cell diameter {} exceeds R^(-1-d/p) = {diameter_bound}",
            cells.max_diameter
        ));
    }
    if (n as f64) < target {
        return Err(Error::validation(format!(
            "need at least R^(2d/p) = {target:.1} cells, got {n}"
        )));
    }
    let delta = (target / n as f64).min(1.0);
    let expected = delta * n as f64;

    let mut attempt_counts = Vec::new();
    for attempt in 0..MAX_SELECT_ATTEMPTS {
        let attempt_seed = seed.wrapping_add(u64::from(attempt));
        let mut rng = stream_rng(attempt_seed, 0);
        let mut kept_idx: Vec<usize> = Vec::with_capacity((expected * 2.0) as usize + 16);
        if delta >= 1.0 {
            kept_idx.extend(0..n);
        } else {
            for i in 0..n {
                if rng.gen::<f64>() < delta {
                    kept_idx.push(i);
                }
            }
        }
        let kept = kept_idx.len();
        attempt_counts.push(kept);
        let in_window = 2.0 * kept as f64 >= expected && 2.0 * kept as f64 <= 3.0 * expected;
        if in_window {
            let points: Vec<FrequencyPoint> = kept_idx
                .iter()
                .map(|&i| FrequencyPoint {
                    coords: cells.cells[i].midpoint_on_surface(&cells.surface),
                })
                .collect();
            let mut set = FrequencySet::new(
                cells.surface.ambient_dim(),
                points,
                format!("tight-{} R={r} p={p} seed={attempt_seed}", cells.surface.label()),
            )?;
            set.meta.warnings = warnings;
            return Ok(TightSelection {
                set,
                delta,
                expected,
                attempt_counts,
                accepted_seed: attempt_seed,
            });
        }
    }
    Err(Error::RetryExhaustion(format!(
        "no draw within [Nδ/2, 3Nδ/2] after {MAX_SELECT_ATTEMPTS} attempts (N={n}, δ={delta}); \
         parameters violate the Nδ → ∞ regime"
    )))
}
