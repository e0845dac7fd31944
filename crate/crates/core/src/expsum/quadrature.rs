//! Shared quadrature engines: stratified Monte Carlo and midpoint grids
//! over balls, boxes and tori.
//!
//! Both engines evaluate a vector of statistics at shared sample points.
//! Work is split into chunks with a fixed layout that does not depend on
//! the thread count; each chunk owns an independent RNG stream and partial
//! sums are reduced in chunk order, so results are bit-identical for any
//! parallelism level.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expsum::{DomainKind, EvaluationDomain};
use crate::rng::stream_rng;

/// Cap on the total number of grid points.
pub const GRID_POINT_CAP: u64 = 100_000_000;

/// Samples per Monte Carlo chunk.
const CHUNK: usize = 8192;

/// Mean and spread of one accumulated statistic.
#[derive(Debug, Clone, Copy)]
pub struct StatMoment {
    pub mean: f64,
    pub std_error: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Default)]
struct Accum {
    kept: u64,
    sums: Vec<f64>,
    sq_sums: Vec<f64>,
}

impl Accum {
    fn new(n_stats: usize) -> Self {
        Accum {
            kept: 0,
            sums: vec![0.0; n_stats],
            sq_sums: vec![0.0; n_stats],
        }
    }

    fn merge(&mut self, other: &Accum) {
        self.kept += other.kept;
        for i in 0..self.sums.len() {
            self.sums[i] += other.sums[i];
            self.sq_sums[i] += other.sq_sums[i];
        }
    }

    fn moments(&self) -> Vec<StatMoment> {
        let n = self.kept as f64;
        self.sums
            .iter()
            .zip(&self.sq_sums)
            .map(|(&s, &sq)| {
                let mean = s / n;
                let std_error = if self.kept >= 2 {
                    let var = ((sq - s * s / n) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                } else {
                    0.0
                };
                StatMoment {
                    mean,
                    std_error,
                    count: self.kept,
                }
            })
            .collect()
    }
}

/// Bounding box of a domain: per-axis lower corner and width.
fn bounding_box(domain: &EvaluationDomain, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let center = domain.center_vec(dim);
    match domain.kind {
        DomainKind::Torus => (vec![0.0; dim], vec![domain.radius_or_side; dim]),
        DomainKind::Box => (
            center.iter().map(|c| c - domain.radius_or_side / 2.0).collect(),
            vec![domain.radius_or_side; dim],
        ),
        DomainKind::Ball => (
            center.iter().map(|c| c - domain.radius_or_side).collect(),
            vec![2.0 * domain.radius_or_side; dim],
        ),
    }
}

fn inside(domain: &EvaluationDomain, dim: usize, x: &[f64]) -> bool {
    match domain.kind {
        DomainKind::Torus | DomainKind::Box => true,
        DomainKind::Ball => {
            let center = domain.center_vec(dim);
            let d2: f64 = x
                .iter()
                .zip(&center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2 <= domain.radius_or_side * domain.radius_or_side
        }
    }
}

/// Stratified Monte Carlo means of `n_stats` statistics over `domain`.
///
/// Points are drawn uniformly from the bounding box, stratified into
/// `strata_per_axis^dim` equal sub-boxes; for balls, points falling outside
/// are discarded (never re-drawn), which leaves the kept points uniform on
/// the ball.
pub fn mc_domain_means<F>(
    domain: &EvaluationDomain,
    dim: usize,
    count: usize,
    strata_per_axis: usize,
    seed: u64,
    n_stats: usize,
    eval: F,
) -> Result<Vec<StatMoment>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if count < 1000 {
        return Err(Error::validation(format!(
            "monte-carlo plans need at least 1000 samples, got {count}"
        )));
    }
    let s = strata_per_axis.max(1);
    let n_strata = (s as u64)
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::validation("stratum count overflows"))?;
    if n_strata > count as u64 {
        return Err(Error::validation(format!(
            "{n_strata} strata exceed the sample count {count}"
        )));
    }
    let per_stratum = count.div_ceil(n_strata as usize);
    let sub_chunks = per_stratum.div_ceil(CHUNK) as u64;
    let total_chunks = n_strata * sub_chunks;

    let (lo, width) = bounding_box(domain, dim);
    let stratum_width: Vec<f64> = width.iter().map(|w| w / s as f64).collect();

    let partials: Vec<Accum> = (0..total_chunks)
        .into_par_iter()
        .map(|chunk_id| {
            let stratum = chunk_id / sub_chunks;
            let sub = chunk_id % sub_chunks;
            let chunk_lo = (sub as usize) * CHUNK;
            let chunk_hi = ((sub as usize + 1) * CHUNK).min(per_stratum);
            // stratum multi-index
            let mut idx = vec![0usize; dim];
            let mut rem = stratum;
            for ax in (0..dim).rev() {
                idx[ax] = (rem % s as u64) as usize;
                rem /= s as u64;
            }
            let mut rng = stream_rng(seed, chunk_id);
            let mut acc = Accum::new(n_stats);
            let mut x = vec![0.0f64; dim];
            let mut stats = vec![0.0f64; n_stats];
            for _ in chunk_lo..chunk_hi {
                for ax in 0..dim {
                    let u: f64 = rng.gen();
                    x[ax] = lo[ax] + (idx[ax] as f64 + u) * stratum_width[ax];
                }
                if !inside(domain, dim, &x) {
                    continue;
                }
                eval(&x, &mut stats);
                acc.kept += 1;
                for (i, s) in stats.iter().enumerate() {
                    acc.sums[i] += s;
                    acc.sq_sums[i] += s * s;
                }
            }
            acc
        })
        .collect();

    let mut total = Accum::new(n_stats);
    for p in &partials {
        total.merge(p);
    }
    if total.kept < 2 {
        return Err(Error::refusal("all samples rejected; domain degenerate"));
    }
    Ok(total.moments())
}

/// Midpoint-rule means of `n_stats` statistics over `domain`.
///
/// `points_per_axis` midpoints per axis; for balls, points outside are
/// skipped. Exact for tori with integer frequencies under the Nyquist rule
/// (checked by the caller, which knows the frequencies).
pub fn grid_domain_means<F>(
    domain: &EvaluationDomain,
    dim: usize,
    points_per_axis: usize,
    n_stats: usize,
    eval: F,
) -> Result<Vec<StatMoment>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if points_per_axis == 0 {
        return Err(Error::validation("grid needs at least one point per axis"));
    }
    let total = (points_per_axis as u64)
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::refusal("grid size overflows"))?;
    if total > GRID_POINT_CAP {
        return Err(Error::refusal(format!(
            "grid of {total} points exceeds cap {GRID_POINT_CAP}"
        )));
    }
    let (lo, width) = bounding_box(domain, dim);
    let h: Vec<f64> = width.iter().map(|w| w / points_per_axis as f64).collect();
    let slab_count = (total / points_per_axis as u64).max(1);

    let partials: Vec<Accum> = (0..points_per_axis)
        .into_par_iter()
        .map(|i0| {
            let mut acc = Accum::new(n_stats);
            let mut x = vec![0.0f64; dim];
            let mut stats = vec![0.0f64; n_stats];
            x[0] = lo[0] + (i0 as f64 + 0.5) * h[0];
            for flat in 0..slab_count {
                let mut rem = flat;
                for ax in (1..dim).rev() {
                    let j = rem % points_per_axis as u64;
                    rem /= points_per_axis as u64;
                    x[ax] = lo[ax] + (j as f64 + 0.5) * h[ax];
                }
                if !inside(domain, dim, &x) {
                    continue;
                }
                eval(&x, &mut stats);
                acc.kept += 1;
                for (k, s) in stats.iter().enumerate() {
                    acc.sums[k] += s;
                    acc.sq_sums[k] += s * s;
                }
            }
            acc
        })
        .collect();

    let mut totals = Accum::new(n_stats);
    for p in &partials {
        totals.merge(p);
    }
    if totals.kept == 0 {
        return Err(Error::refusal("grid missed the domain entirely"));
    }
    let mut moments = totals.moments();
    // midpoint rule is deterministic; no sampling error is reported
    for m in &mut moments {
        m.std_error = 0.0;
    }
    Ok(moments)
}
