//! Bush of `(R, R^{1/2}, R^{1/2})`-tubes through the origin: incidence
//! counts `L(x)` and Monte Carlo `L^r` norms of `Σ 1_T`.
//!
//! `L(x) = n` exactly on the ball `|x| ≤ radius` (the origin lies on every
//! axis), so that core is integrated in closed form; the remainder of
//! `B(0,R)` is covered by dyadic radial shells sampled uniformly. This
//! keeps the heavy-tailed integrand under control without biasing the
//! estimate.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::{NormEstimate, SamplingMethod, SamplingPlan};
use crate::freqsets::CapGrid;
use crate::rng::stream_rng;

/// A cylinder of the given length and radius whose axis passes through the
/// origin with the given direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub direction: [f64; 3],
    pub length: f64,
    pub radius: f64,
}

/// One tube per cap, all through the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeFamily {
    pub tubes: Vec<Tube>,
    pub r: f64,
    pub delta: f64,
}

impl TubeFamily {
    pub fn len(&self) -> usize {
        self.tubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tubes.is_empty()
    }

    /// Common tube radius `R^{1/2+δ}`.
    pub fn tube_radius(&self) -> f64 {
        self.tubes.first().map_or(0.0, |t| t.radius)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tube family serializes")
    }
}

/// Volume of the 3-ball of radius `r`.
pub fn ball_volume_3d(r: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * r * r * r
}

/// Exact total tube mass `Σ vol(T) = n·π·radius²·length` (every tube lies
/// inside `B(0,R)`).
pub fn total_tube_volume(family: &TubeFamily) -> f64 {
    family
        .tubes
        .iter()
        .map(|t| std::f64::consts::PI * t.radius * t.radius * t.length)
        .sum()
}

/// Build the bush: one tube per cap with direction `(-2c, 1)` normalized
/// (the propagation direction of the cap's wave packet), length `R` and
/// radius `R^{1/2+δ}`.
pub fn make_bush(grid: &CapGrid, delta: f64) -> Result<TubeFamily> {
    if grid.base_dim != 2 {
        return Err(Error::validation("bush construction needs a base_dim-2 grid"));
    }
    if !(delta.is_finite() && (0.0..0.5).contains(&delta)) {
        return Err(Error::validation(format!("delta must lie in [0, 0.5), got {delta}")));
    }
    let r = grid.r;
    let radius = r.powf(0.5 + delta);
    let tubes: Vec<Tube> = grid
        .centers
        .iter()
        .map(|c| {
            let v = [-2.0 * c[0], -2.0 * c[1], 1.0];
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            Tube {
                direction: [v[0] / norm, v[1] / norm, v[2] / norm],
                length: r,
                radius,
            }
        })
        .collect();
    Ok(TubeFamily { tubes, r, delta })
}

/// `L(x)`: the number of tubes containing `x`. A tube is the hard cylinder
/// `{|x·u| ≤ length/2, dist(x, axis) ≤ radius}`, so the total mass
/// `∫ Σ 1_T` is exactly `Σ π·radius²·length`.
pub fn incidence_count(family: &TubeFamily, x: &[f64; 3]) -> usize {
    let xx = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    family
        .tubes
        .iter()
        .filter(|t| {
            let dot = x[0] * t.direction[0] + x[1] * t.direction[1] + x[2] * t.direction[2];
            dot.abs() <= t.length / 2.0 && xx - dot * dot <= t.radius * t.radius
        })
        .count()
}

const CHUNK: usize = 8192;

/// Integrate statistics of `L(x)` over `B(0,R)`: exact core plus uniform
/// samples on dyadic radial shells. Returns `(integral, std_error)` per
/// statistic and the total sample count.
fn integrate_incidence_stats<F>(
    family: &TubeFamily,
    count: usize,
    seed: u64,
    n_stats: usize,
    stats_of: F,
) -> Result<(Vec<(f64, f64)>, u64)>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    if family.is_empty() {
        return Err(Error::validation("empty tube family"));
    }
    if count < 1000 {
        return Err(Error::validation("tube norms need at least 1000 samples"));
    }
    let ball_r = family.r;
    let core_r = family.tube_radius().min(ball_r);

    let mut shells: Vec<(f64, f64)> = Vec::new();
    let mut lo = core_r;
    while lo < ball_r {
        let hi = (2.0 * lo).min(ball_r);
        shells.push((lo, hi));
        lo = hi;
    }

    let mut integrals = vec![0.0f64; n_stats];
    let mut variances = vec![0.0f64; n_stats];

    // exact core: L ≡ n on |x| ≤ core_r
    let mut core_stats = vec![0.0f64; n_stats];
    stats_of(family.len(), &mut core_stats);
    let core_vol = ball_volume_3d(core_r);
    for i in 0..n_stats {
        integrals[i] += core_vol * core_stats[i];
    }

    let mut total_samples = 0u64;
    if !shells.is_empty() {
        let per_shell = count.div_ceil(shells.len());
        let sub_chunks = per_shell.div_ceil(CHUNK);
        let jobs: Vec<(usize, usize)> = (0..shells.len())
            .flat_map(|s| (0..sub_chunks).map(move |c| (s, c)))
            .collect();
        let partials: Vec<(usize, u64, Vec<f64>, Vec<f64>)> = jobs
            .par_iter()
            .map(|&(shell_idx, sub)| {
                let (s_lo, s_hi) = shells[shell_idx];
                let lo3 = s_lo * s_lo * s_lo;
                let hi3 = s_hi * s_hi * s_hi;
                let n_here = ((sub + 1) * CHUNK).min(per_shell) - sub * CHUNK;
                let mut rng = stream_rng(seed, (shell_idx as u64) << 32 | sub as u64);
                let mut sums = vec![0.0f64; n_stats];
                let mut sq_sums = vec![0.0f64; n_stats];
                let mut stats = vec![0.0f64; n_stats];
                for _ in 0..n_here {
                    // uniform direction by cube rejection, radius ∝ s²
                    let dir = loop {
                        let v = [
                            2.0 * rng.gen::<f64>() - 1.0,
                            2.0 * rng.gen::<f64>() - 1.0,
                            2.0 * rng.gen::<f64>() - 1.0,
                        ];
                        let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                        if n2 > 1e-8 && n2 <= 1.0 {
                            let n = n2.sqrt();
                            break [v[0] / n, v[1] / n, v[2] / n];
                        }
                    };
                    let u: f64 = rng.gen();
                    let s = (lo3 + u * (hi3 - lo3)).cbrt();
                    let x = [s * dir[0], s * dir[1], s * dir[2]];
                    let l = incidence_count(family, &x);
                    stats_of(l, &mut stats);
                    for i in 0..n_stats {
                        sums[i] += stats[i];
                        sq_sums[i] += stats[i] * stats[i];
                    }
                }
                (shell_idx, n_here as u64, sums, sq_sums)
            })
            .collect();

        // reduce in shell order, one accumulator per shell
        let mut shell_acc: Vec<(u64, Vec<f64>, Vec<f64>)> =
            vec![(0, vec![0.0; n_stats], vec![0.0; n_stats]); shells.len()];
        for (shell_idx, n, sums, sq_sums) in partials {
            let acc = &mut shell_acc[shell_idx];
            acc.0 += n;
            for i in 0..n_stats {
                acc.1[i] += sums[i];
                acc.2[i] += sq_sums[i];
            }
        }
        for (shell_idx, (n, sums, sq_sums)) in shell_acc.iter().enumerate() {
            let (s_lo, s_hi) = shells[shell_idx];
            let vol = ball_volume_3d(s_hi) - ball_volume_3d(s_lo);
            let nf = *n as f64;
            total_samples += n;
            for i in 0..n_stats {
                let mean = sums[i] / nf;
                let var = ((sq_sums[i] - sums[i] * sums[i] / nf) / (nf - 1.0)).max(0.0);
                integrals[i] += vol * mean;
                variances[i] += vol * vol * var / nf;
            }
        }
    }
    let out = integrals
        .into_iter()
        .zip(variances)
        .map(|(int, var)| (int, var.sqrt()))
        .collect();
    Ok((out, total_samples))
}

/// Monte Carlo estimate of `(1/|B(0,R)|)·∫_{B(0,R)} (Σ 1_T)^r dx`.
///
/// The unnormalized integral is `mean_power · vol(B(0,R))`; the `L^r`
/// norm is its `1/r`-th power.
pub fn tube_lr_norm(family: &TubeFamily, lr: f64, plan: &SamplingPlan) -> Result<NormEstimate> {
    if !(lr.is_finite() && lr >= 1.0) {
        return Err(Error::validation(format!("tube norms need r >= 1, got {lr}")));
    }
    let count = match plan.method {
        SamplingMethod::MonteCarlo { count, .. } => count,
        SamplingMethod::Grid { .. } => {
            return Err(Error::refusal("tube norms are Monte Carlo only; grid plans refused"))
        }
    };
    let (stats, samples) = integrate_incidence_stats(family, count, plan.seed, 1, |l, out| {
        out[0] = (l as f64).powf(lr);
    })?;
    let vol = ball_volume_3d(family.r);
    Ok(NormEstimate {
        p: lr,
        mean_power: stats[0].0 / vol,
        std_error: stats[0].1 / vol,
        sample_count: samples,
    })
}

/// The two averaged-bound integrals and their predicted ceiling.
#[derive(Debug, Clone, Serialize)]
pub struct RhsProfile {
    pub r: f64,
    pub m: f64,
    pub p: f64,
    /// `∫_{B_R} L^{p/2}` estimate and standard error.
    pub int_l_p_half: (f64, f64),
    /// `∫_{B_R} L` estimate and standard error (same sample points).
    pub int_l1: (f64, f64),
    /// `(R/M)^{p/2-1} · ∫ L`.
    pub weighted_l1: f64,
    /// `R^{(3+p)/2} + R³ (R/M)^{p/2-1}`.
    pub predicted: f64,
    /// `∫ L^{p/2} + (R/M)^{p/2-1} ∫ L`.
    pub measured: f64,
    pub sample_count: u64,
}

/// Estimate `∫ L^{p/2}` and `(R/M)^{p/2-1} ∫ L` on shared samples and
/// compare with the predicted ceiling `R^{(3+p)/2} + R³(R/M)^{p/2-1}`.
pub fn trelation_rhs_profile(
    family: &TubeFamily,
    m: f64,
    p: f64,
    plan: &SamplingPlan,
) -> Result<RhsProfile> {
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::validation(format!("profile needs p in [2,4], got {p}")));
    }
    if !(m >= 1.0 && m <= family.r) {
        return Err(Error::validation(format!("profile needs 1 <= M <= R, got M={m}")));
    }
    let count = match plan.method {
        SamplingMethod::MonteCarlo { count, .. } => count,
        SamplingMethod::Grid { .. } => {
            return Err(Error::refusal("profiles are Monte Carlo only; grid plans refused"))
        }
    };
    let (stats, samples) = integrate_incidence_stats(family, count, plan.seed, 2, |l, out| {
        let lf = l as f64;
        out[0] = lf.powf(p / 2.0);
        out[1] = lf;
    })?;
    let r = family.r;
    let factor = (r / m).powf(p / 2.0 - 1.0);
    let predicted = r.powf((3.0 + p) / 2.0) + r.powi(3) * factor;
    Ok(RhsProfile {
        r,
        m,
        p,
        int_l_p_half: stats[0],
        int_l1: stats[1],
        weighted_l1: factor * stats[1].0,
        predicted,
        measured: stats[0].0 + factor * stats[1].0,
        sample_count: samples,
    })
}
