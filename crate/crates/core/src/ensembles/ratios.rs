//! Decoupling and recoupling ratio measurements.
//!
//! The field `EF` is modeled by one frequency per cap (the cap-center
//! paraboloid lift) with cap-constant weights. All sub-sums of a report
//! share the same sample points, which correlates the Monte Carlo noise of
//! the two sides and sharpens the ratio estimate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::{build_strips, EnsemblePartition, TestField};
use crate::error::{Error, Result};
use crate::expsum::{
    abs_pow, fit_exponent, grid_domain_means, interference_mass, mc_domain_means, ExponentFit,
    EvaluationDomain, SamplingMethod, SamplingPlan, StatMoment, SumEvaluator, WeightVector,
};
use crate::freqsets::{canonical_caps, lift_paraboloid, FrequencySet};
use crate::tubes::make_bush;

/// Aggregation rule for the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecouplingVariant {
    /// `rhs = (Σ_i ‖S_i‖_p²)^{1/2}`.
    L2,
    /// `rhs = N^{1/2-1/p} (Σ_i ‖S_i‖_p^p)^{1/p}`.
    Lp,
}

impl DecouplingVariant {
    pub fn label(&self) -> &'static str {
        match self {
            DecouplingVariant::L2 => "l2",
            DecouplingVariant::Lp => "lp",
        }
    }
}

/// Measured left- and right-hand sides of a decoupling-type inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecouplingReport {
    pub r: f64,
    pub p: f64,
    pub variant: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub lhs_std_error: f64,
    pub rhs_std_error: f64,
    pub ensemble_count: usize,
}

/// Evaluate grouped statistics: `|Σ_all|^p` plus `|Σ_{q∈group_k}|^p` for
/// every group, at shared sample points.
fn grouped_means(
    freqs: &FrequencySet,
    weights: &WeightVector,
    groups: &[Vec<usize>],
    p: f64,
    domain: &EvaluationDomain,
    plan: &SamplingPlan,
) -> Result<Vec<StatMoment>> {
    SumEvaluator::new(freqs, weights)?; // validates weights and dimensions
    let dim = freqs.dim;
    let n_groups = groups.len();
    // cap index -> group index (caps may be excluded via usize::MAX)
    let mut group_of = vec![usize::MAX; freqs.len()];
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            group_of[i] = g;
        }
    }
    let coords: Vec<f64> = freqs.points.iter().flat_map(|pt| pt.coords.clone()).collect();
    let w = weights.0.clone();
    let n_stats = n_groups + 1;
    let eval = move |x: &[f64], out: &mut [f64]| {
        let mut buckets = vec![Complex64::new(0.0, 0.0); n_groups];
        for i in 0..group_of.len() {
            let g = group_of[i];
            if g == usize::MAX {
                continue;
            }
            let base = i * dim;
            let mut t = 0.0f64;
            for k in 0..dim {
                t += coords[base + k] * x[k];
            }
            let frac = t - t.round();
            let (s, c) = (2.0 * std::f64::consts::PI * frac).sin_cos();
            buckets[g] += w[i] * Complex64::new(c, s);
        }
        let total: Complex64 = buckets.iter().sum();
        out[0] = abs_pow(total, p);
        for (g, b) in buckets.iter().enumerate() {
            out[1 + g] = abs_pow(*b, p);
        }
    };
    match plan.method {
        SamplingMethod::Grid { points_per_axis } => {
            // Nyquist check against the full frequency set
            let max_xi = freqs.max_abs_coord();
            if max_xi > 0.0 {
                let spacing = domain.bounding_side() / points_per_axis as f64;
                let limit = 1.0 / (2.0 * p * max_xi);
                if spacing > limit * (1.0 + 1e-12) {
                    return Err(Error::refusal(format!(
                        "grid spacing {spacing:.6e} violates the Nyquist rule (needs <= {limit:.6e})"
                    )));
                }
            }
            grid_domain_means(domain, dim, points_per_axis, n_stats, eval)
        }
        SamplingMethod::MonteCarlo { count, strata_per_axis } => {
            mc_domain_means(domain, dim, count, strata_per_axis, plan.seed, n_stats, eval)
        }
    }
}

/// Measure `‖Σ_all‖_p` against the ensemble aggregate for the given
/// variant. Norms are taken on the normalized measure; the common volume
/// factor cancels in the ratio.
pub fn decoupling_ratio(
    ep: &EnsemblePartition,
    field: &TestField,
    p: f64,
    variant: DecouplingVariant,
    domain: &EvaluationDomain,
    plan: &SamplingPlan,
) -> Result<DecouplingReport> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::validation("decoupling ratio needs p >= 1"));
    }
    if field.weights.len() != ep.grid.len() {
        return Err(Error::validation("field weight count must match cap count"));
    }
    let freqs = lift_paraboloid(&ep.grid);
    let groups: Vec<Vec<usize>> = (1..=ep.n_ensembles as u32).map(|id| ep.members(id)).collect();
    let moments = grouped_means(&freqs, &field.weights, &groups, p, domain, plan)?;
    let n = ep.n_ensembles;

    let m0 = moments[0];
    let lhs = m0.mean.powf(1.0 / p);
    let lhs_std_error = if m0.mean > 0.0 {
        m0.mean.powf(1.0 / p - 1.0) / p * m0.std_error
    } else {
        0.0
    };

    let (rhs, rhs_std_error) = match variant {
        DecouplingVariant::L2 => {
            let mut sum = 0.0;
            for m in &moments[1..] {
                sum += m.mean.powf(2.0 / p);
            }
            let rhs = sum.sqrt();
            let mut var = 0.0;
            if rhs > 0.0 {
                for m in &moments[1..] {
                    if m.mean > 0.0 {
                        let d = (1.0 / (2.0 * rhs)) * (2.0 / p) * m.mean.powf(2.0 / p - 1.0);
                        var += (d * m.std_error) * (d * m.std_error);
                    }
                }
            }
            (rhs, var.sqrt())
        }
        DecouplingVariant::Lp => {
            let factor = (n as f64).powf(0.5 - 1.0 / p);
            let sum: f64 = moments[1..].iter().map(|m| m.mean).sum();
            let rhs = factor * sum.powf(1.0 / p);
            let se = if sum > 0.0 {
                let var_sum: f64 = moments[1..].iter().map(|m| m.std_error * m.std_error).sum();
                factor * sum.powf(1.0 / p - 1.0) / p * var_sum.sqrt()
            } else {
                0.0
            };
            (rhs, se)
        }
    };
    if rhs == 0.0 {
        return Err(Error::validation("decoupling rhs vanished"));
    }
    Ok(DecouplingReport {
        r: ep.grid.r,
        p,
        variant: variant.label().into(),
        lhs,
        rhs,
        ratio: lhs / rhs,
        lhs_std_error,
        rhs_std_error,
        ensemble_count: n,
    })
}

/// Recoupling: compare `(Σ_i ‖E_{α_i}F‖_p^p)^{1/p}` against `‖EF‖_p` for
/// disjoint coarse squares `α_i` of side `1/K`. Caps outside the listed
/// squares are excluded from the field.
pub fn recoupling_ratio(
    grid: &crate::freqsets::CapGrid,
    k: usize,
    squares: &[(usize, usize)],
    field: &TestField,
    p: f64,
    domain: &EvaluationDomain,
    plan: &SamplingPlan,
) -> Result<DecouplingReport> {
    if grid.base_dim != 2 {
        return Err(Error::validation("recoupling needs a base_dim-2 grid"));
    }
    if k == 0 || (k as f64) > grid.r.sqrt() * (1.0 + 1e-12) {
        return Err(Error::validation(format!("need 1 <= K <= √R, got K={k}")));
    }
    if squares.is_empty() {
        return Err(Error::validation("recoupling needs at least one square"));
    }
    {
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in squares {
            if i >= k || j >= k {
                return Err(Error::validation(format!("square ({i},{j}) outside the {k}×{k} grid")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::validation(format!("squares overlap at ({i},{j})")));
            }
        }
    }
    if domain.radius_or_side < k as f64 {
        return Err(Error::validation(format!(
            "recoupling ball radius {} must be at least K = {k}",
            domain.radius_or_side
        )));
    }
    if field.weights.len() != grid.len() {
        return Err(Error::validation("field weight count must match cap count"));
    }
    // caps grouped by coarse square
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); squares.len()];
    let index_of: std::collections::HashMap<(usize, usize), usize> =
        squares.iter().cloned().enumerate().map(|(g, sq)| (sq, g)).collect();
    for (i, c) in grid.centers.iter().enumerate() {
        let sx = ((c[0] * k as f64).floor() as usize).min(k - 1);
        let sy = ((c[1] * k as f64).floor() as usize).min(k - 1);
        if let Some(&g) = index_of.get(&(sx, sy)) {
            groups[g].push(i);
        }
    }
    if groups.iter().all(|g| g.is_empty()) {
        return Err(Error::validation("no caps fall in the listed squares"));
    }
    let freqs = lift_paraboloid(grid);
    let moments = grouped_means(&freqs, &field.weights, &groups, p, domain, plan)?;
    let m0 = moments[0];
    if m0.mean == 0.0 {
        return Err(Error::validation("recoupling denominator vanished"));
    }
    let lhs_sum: f64 = moments[1..].iter().map(|m| m.mean).sum();
    let lhs = lhs_sum.powf(1.0 / p);
    let rhs = m0.mean.powf(1.0 / p);
    let lhs_std_error = {
        let var: f64 = moments[1..].iter().map(|m| m.std_error * m.std_error).sum();
        if lhs_sum > 0.0 {
            lhs_sum.powf(1.0 / p - 1.0) / p * var.sqrt()
        } else {
            0.0
        }
    };
    let rhs_std_error = if m0.mean > 0.0 {
        m0.mean.powf(1.0 / p - 1.0) / p * m0.std_error
    } else {
        0.0
    };
    Ok(DecouplingReport {
        r: grid.r,
        p,
        variant: "recoupling".into(),
        lhs,
        rhs,
        ratio: lhs / rhs,
        lhs_std_error,
        rhs_std_error,
        ensemble_count: squares.len(),
    })
}

/// One row of the flat-strip sharpness scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripScanRow {
    pub r: f64,
    /// Interference-based lower bound for `|EF|` near the origin
    /// (`interference_mass · cap count`; grows like `R`).
    pub lhs_value: f64,
    /// Exact tube mass of a single strip, `√R · π · radius² · length`
    /// (grows like `R^{5/2}`).
    pub strip_mass: f64,
    /// Exact tube mass of all strips together (grows like `R³`).
    pub total_mass: f64,
}

/// Output of the flat-strip sharpness scan.
#[derive(Debug, Clone, Serialize)]
pub struct StripSharpnessScan {
    pub rows: Vec<StripScanRow>,
    pub lhs_fit: ExponentFit,
    pub strip_mass_fit: ExponentFit,
    pub total_mass_fit: ExponentFit,
    /// Exponent where the constant-field lower bound starts beating the
    /// strip aggregate: solves `p·e_lhs = p/4 - 1/2 + e_total`.
    pub p_star: f64,
    /// Per-p growth comparison: `(p, lhs exponent, rhs exponent)`.
    pub per_p: Vec<(f64, f64, f64)>,
}

/// Test the strip decoupling inequality for `F = R·1_{[0,1]²}`: constant
/// weights make `|EF| ∼ R` near the origin while each strip contributes
/// tube mass `∼ R^{5/2}`; the two growth rates cross at `p* = 10/3`.
pub fn strip_sharpness_scan(r_list: &[f64], p_list: &[f64]) -> Result<StripSharpnessScan> {
    if r_list.len() < 3 {
        return Err(Error::validation("strip scan needs at least 3 values of R"));
    }
    if p_list.iter().any(|&p| !(2.0..=4.0).contains(&p)) {
        return Err(Error::validation("strip scan needs p_list within [2,4]"));
    }
    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let grid = canonical_caps(r, 3)?;
        let freqs = lift_paraboloid(&grid);
        let ones = WeightVector::ones(freqs.len());
        let mass = interference_mass(&freqs, &ones, 2.0, r)?;
        let lhs_value = mass * freqs.len() as f64;
        let family = make_bush(&grid, 0.0)?;
        let strips = build_strips(&grid)?;
        let strip0 = strips.members(1);
        let tube_vol = |i: usize| {
            let t = &family.tubes[i];
            std::f64::consts::PI * t.radius * t.radius * t.length
        };
        let strip_mass: f64 = strip0.iter().map(|&i| tube_vol(i)).sum();
        let total_mass: f64 = (0..family.len()).map(tube_vol).sum();
        rows.push(StripScanRow {
            r,
            lhs_value,
            strip_mass,
            total_mass,
        });
    }
    let lhs_fit = fit_exponent(&rows.iter().map(|w| (w.r, w.lhs_value)).collect::<Vec<_>>())?;
    let strip_mass_fit =
        fit_exponent(&rows.iter().map(|w| (w.r, w.strip_mass)).collect::<Vec<_>>())?;
    let total_mass_fit =
        fit_exponent(&rows.iter().map(|w| (w.r, w.total_mass)).collect::<Vec<_>>())?;
    let e_lhs = lhs_fit.slope;
    let e_total = total_mass_fit.slope;
    let denom = e_lhs - 0.25;
    if denom <= 0.0 {
        return Err(Error::validation("degenerate exponents; no crossing"));
    }
    let p_star = (e_total - 0.5) / denom;
    let per_p = p_list
        .iter()
        .map(|&p| (p, p * e_lhs, p / 4.0 - 0.5 + e_total))
        .collect();
    Ok(StripSharpnessScan {
        rows,
        lhs_fit,
        strip_mass_fit,
        total_mass_fit,
        p_star,
        per_p,
    })
}
