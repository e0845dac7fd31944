//! Spec execution: dispatch to the library, collect result rows, and write
//! CSV plus a JSON sidecar atomically.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use declab::ensembles::{
    build_circles, build_random_msets, build_spread, build_strips, decoupling_ratio,
    recoupling_ratio, strip_sharpness_scan, DecouplingReport, DecouplingVariant, FieldRecipe,
    TestField,
};
use declab::error::{Error, Result};
use declab::expsum::{
    fit_exponent, interference_mass, lp_mean, sqrt_cancel_ratio, EvaluationDomain, SamplingPlan,
    WeightVector,
};
use declab::freqsets::{
    canonical_caps, equal_measure_partition, lattice_annulus, lattice_sphere, lift_paraboloid,
    moment_curve_points, tight_random_select, FrequencySet, Surface,
};
use declab::partitions::{
    avg_partition_moment, count_cohabiting, count_partitions, count_transversal, elp_bound_check,
    l2_identity_check, l4_bound_check, MomentReport, MomentWeights, PartitionFamily,
    TransversalSpec,
};
use declab::rng::{derive_seed, fnv1a, stream_rng};
use declab::tubes::{
    ball_volume_3d, incidence_count, make_bush, total_tube_volume, trelation_rhs_profile,
    tube_lr_norm,
};

use crate::spec::*;

/// A rectangular result table; every row additionally carries the seed and
/// the spec hash for exact replay.
#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn from_headers(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Everything a run produces.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub spec_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub wall_ms: u128,
    pub table: Table,
    /// Full-precision artifact (e.g. a generated frequency set).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub artifact: Option<serde_json::Value>,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn domain_from(spec: &DomainSpec) -> EvaluationDomain {
    EvaluationDomain {
        kind: match spec.kind {
            DomainKindSpec::Ball => declab::expsum::DomainKind::Ball,
            DomainKindSpec::Box => declab::expsum::DomainKind::Box,
            DomainKindSpec::Torus => declab::expsum::DomainKind::Torus,
        },
        radius_or_side: spec.size,
        center: spec.center.clone().unwrap_or_default(),
    }
}

fn plan_from(spec: &PlanSpec, seed: u64) -> SamplingPlan {
    match spec {
        PlanSpec::Grid { points_per_axis } => SamplingPlan {
            method: declab::expsum::SamplingMethod::Grid {
                points_per_axis: *points_per_axis,
            },
            seed,
        },
        PlanSpec::MonteCarlo { count, strata_per_axis } => SamplingPlan {
            method: declab::expsum::SamplingMethod::MonteCarlo {
                count: *count,
                strata_per_axis: *strata_per_axis,
            },
            seed,
        },
    }
}

fn gen_set(surface: &GenSurface) -> Result<FrequencySet> {
    match surface {
        GenSurface::Caps { r, d } => {
            let grid = canonical_caps(*r, *d)?;
            let points = grid
                .centers
                .iter()
                .map(|c| declab::freqsets::FrequencyPoint { coords: c.clone() })
                .collect();
            FrequencySet::new(grid.base_dim, points, format!("caps R={r} d={d}"))
        }
        GenSurface::CapsLift { r, d } => Ok(lift_paraboloid(&canonical_caps(*r, *d)?)),
        GenSurface::Sphere { n, d } => lattice_sphere(*n, *d),
        GenSurface::Annulus { r, scaling } => {
            let set = lattice_annulus(*r)?;
            Ok(match scaling {
                AnnulusScaling::Raw => set.raw,
                AnnulusScaling::Rescaled => set.rescaled,
            })
        }
        GenSurface::Moment { r, d } => moment_curve_points(*r, *d),
    }
}

fn weights_from(spec: &WeightSpec, n: usize, master_seed: u64) -> WeightVector {
    match spec {
        WeightSpec::Ones => WeightVector::ones(n),
        WeightSpec::RandomPhase { seed } => {
            WeightVector::random_phase(n, seed.unwrap_or_else(|| derive_seed(master_seed, "weights", 0)))
        }
        WeightSpec::RandomSigns { seed } => {
            WeightVector::random_signs(n, seed.unwrap_or_else(|| derive_seed(master_seed, "weights", 0)))
        }
        WeightSpec::Values { values } => {
            WeightVector(values.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
        }
    }
}

fn field_from(spec: &FieldSpec, n: usize, master_seed: u64) -> TestField {
    let recipe = match spec {
        FieldSpec::Constant => FieldRecipe::Constant,
        FieldSpec::RandomPhase { seed } => FieldRecipe::RandomPhase {
            seed: seed.unwrap_or_else(|| derive_seed(master_seed, "field", 0)),
        },
        FieldSpec::Indicator { subset } => FieldRecipe::Indicator { subset: subset.clone() },
    };
    TestField::build(recipe, n)
}

fn partition_weights(
    spec: &PartitionWeightSpec,
    r: usize,
    master_seed: u64,
) -> MomentWeights {
    use rand::Rng;
    match spec {
        PartitionWeightSpec::Ones => MomentWeights::gaussian_integers(&vec![(1, 0); r]),
        PartitionWeightSpec::GaussianInteger { lo, hi } => {
            let mut rng = stream_rng(derive_seed(master_seed, "pweights", 0), 0);
            let entries: Vec<(i64, i64)> = (0..r)
                .map(|_| (rng.gen_range(*lo..=*hi), rng.gen_range(*lo..=*hi)))
                .collect();
            MomentWeights::gaussian_integers(&entries)
        }
        PartitionWeightSpec::Unimodular => {
            let w = WeightVector::random_phase(r, derive_seed(master_seed, "pweights", 0));
            MomentWeights::Float(w.0)
        }
        PartitionWeightSpec::Signs => {
            let w = WeightVector::random_signs(r, derive_seed(master_seed, "pweights", 0));
            MomentWeights::Float(w.0)
        }
        PartitionWeightSpec::Values { values } => MomentWeights::Float(
            values.iter().map(|&(re, im)| Complex64::new(re, im)).collect(),
        ),
    }
}

fn family_from(spec: &FamilySpec, master_seed: u64) -> PartitionFamily {
    match spec {
        FamilySpec::All => PartitionFamily::All,
        FamilySpec::Sampled { draws } => PartitionFamily::Sampled {
            seed: derive_seed(master_seed, "family", 0),
            draws: *draws,
        },
    }
}

fn moment_row(report: &MomentReport) -> Vec<String> {
    vec![
        report.r.to_string(),
        report.m.to_string(),
        fmt(report.p),
        report.family.clone(),
        report.average.display(),
        report.bound.map(fmt).unwrap_or_default(),
        report.ratio.map(fmt).unwrap_or_default(),
        fmt(report.average.std_error()),
        report.seed.map(|s| s.to_string()).unwrap_or_default(),
    ]
}

fn decoupling_row(report: &DecouplingReport) -> Vec<String> {
    vec![
        fmt(report.r),
        fmt(report.p),
        report.variant.clone(),
        fmt(report.lhs),
        fmt(report.rhs),
        fmt(report.ratio),
        fmt(report.lhs_std_error),
        fmt(report.rhs_std_error),
        report.ensemble_count.to_string(),
    ]
}

/// Execute a spec and return the full record.
pub fn run(spec: &ExperimentSpec) -> Result<RunRecord> {
    let started = Instant::now();
    let canonical = serde_json::to_string(spec).map_err(|e| Error::validation(e.to_string()))?;
    let spec_hash = format!("{:016x}", fnv1a(canonical.as_bytes()));
    let seed = spec.seed;

    let (mut table, artifact) = dispatch(spec)?;
    table.header.push("seed".into());
    table.header.push("spec_hash".into());
    for row in &mut table.rows {
        row.push(seed.to_string());
        row.push(spec_hash.clone());
    }

    Ok(RunRecord {
        spec_hash,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        wall_ms: started.elapsed().as_millis(),
        table,
        artifact,
    })
}

fn dispatch(spec: &ExperimentSpec) -> Result<(Table, Option<serde_json::Value>)> {
    let seed = spec.seed;
    match &spec.kind {
        ExperimentKind::Gen(surface) => {
            let set = gen_set(surface)?;
            let mut table =
                Table::from_headers((0..set.dim).map(|i| format!("coord_{i}")).collect());
            for p in &set.points {
                table.push(p.coords.iter().map(|c| fmt(*c)).collect());
            }
            let artifact = serde_json::to_value(&set).ok();
            Ok((table, artifact))
        }
        ExperimentKind::Norm {
            set,
            weights,
            domain,
            plan,
            p,
            with_ratio,
            with_interference,
        } => {
            let fset = gen_set(set)?;
            let w = weights_from(weights, fset.len(), seed);
            let dom = domain_from(domain);
            let sampling = plan_from(plan, derive_seed(seed, "plan", 0));
            let est = lp_mean(&fset, &w, &dom, &sampling, *p)?;
            let mut table = Table::new(&[
                "r",
                "p",
                "mean_power",
                "std_error",
                "sample_count",
                "ratio",
                "ratio_std_error",
                "interference_mass",
            ]);
            let (ratio, ratio_se) = if *with_ratio {
                let r = sqrt_cancel_ratio(&fset, &w, &dom, &sampling, *p)?;
                (fmt(r.ratio), fmt(r.std_error))
            } else {
                (String::new(), String::new())
            };
            let mass = if *with_interference {
                fmt(interference_mass(&fset, &w, *p, dom.radius_or_side.max(1.0))?)
            } else {
                String::new()
            };
            table.push(vec![
                fmt(dom.radius_or_side),
                fmt(*p),
                fmt(est.mean_power),
                fmt(est.std_error),
                est.sample_count.to_string(),
                ratio,
                ratio_se,
                mass,
            ]);
            Ok((table, None))
        }
        ExperimentKind::Decouple {
            shape,
            r,
            p,
            variant,
            field,
            domain,
            plan,
        } => {
            let grid = canonical_caps(*r, 3)?;
            let ep = match shape {
                ShapeSpec::Strips => build_strips(&grid)?,
                ShapeSpec::Circles { center } => build_circles(&grid, center)?,
                ShapeSpec::Spread => build_spread(&grid, derive_seed(seed, "spread", 0))?,
                ShapeSpec::Msets { m } => build_random_msets(&grid, *m, derive_seed(seed, "msets", 0))?,
            };
            let f = field_from(field, grid.len(), seed);
            let v = match variant {
                VariantSpec::L2 => DecouplingVariant::L2,
                VariantSpec::Lp => DecouplingVariant::Lp,
            };
            let report = decoupling_ratio(
                &ep,
                &f,
                *p,
                v,
                &domain_from(domain),
                &plan_from(plan, derive_seed(seed, "plan", 0)),
            )?;
            let mut table = Table::new(&[
                "r", "p", "variant", "lhs", "rhs", "ratio", "lhs_std_error", "rhs_std_error",
                "ensemble_count",
            ]);
            table.push(decoupling_row(&report));
            Ok((table, None))
        }
        ExperimentKind::Recouple {
            r,
            k,
            squares,
            field,
            p,
            domain,
            plan,
        } => {
            let grid = canonical_caps(*r, 3)?;
            let f = field_from(field, grid.len(), seed);
            let report = recoupling_ratio(
                &grid,
                *k,
                squares,
                &f,
                *p,
                &domain_from(domain),
                &plan_from(plan, derive_seed(seed, "plan", 0)),
            )?;
            let mut table = Table::new(&[
                "r", "p", "variant", "lhs", "rhs", "ratio", "lhs_std_error", "rhs_std_error",
                "ensemble_count",
            ]);
            table.push(decoupling_row(&report));
            Ok((table, None))
        }
        ExperimentKind::Partition(op) => run_partition(op, seed),
        ExperimentKind::Tubes(op) => run_tubes(op, seed),
        ExperimentKind::Scan(target) => run_scan(target, seed),
        ExperimentKind::Tight {
            surface,
            r,
            p,
            diameter_exponent,
        } => {
            let surf = match surface {
                TightSurface::Circle => Surface::Circle,
                TightSurface::ParabolaArc => Surface::ParabolaArc,
                TightSurface::Sphere2 => Surface::Sphere2,
            };
            let exponent = diameter_exponent.unwrap_or(-1.5);
            let cells = equal_measure_partition(surf, r.powf(exponent))?;
            let sel = tight_random_select(&cells, *r, *p, seed)?;
            let mut table = Table::new(&[
                "r",
                "p",
                "n_cells",
                "delta",
                "expected",
                "kept",
                "attempts",
                "accepted_seed",
            ]);
            table.push(vec![
                fmt(*r),
                fmt(*p),
                cells.len().to_string(),
                fmt(sel.delta),
                fmt(sel.expected),
                sel.set.len().to_string(),
                sel.attempts().to_string(),
                sel.accepted_seed.to_string(),
            ]);
            let artifact = serde_json::to_value(&sel.set).ok();
            Ok((table, artifact))
        }
    }
}

fn run_partition(op: &PartitionOp, seed: u64) -> Result<(Table, Option<serde_json::Value>)> {
    match op {
        PartitionOp::Count { r, m } => {
            let mut table = Table::new(&["r", "m", "op", "value"]);
            table.push(vec![
                r.to_string(),
                m.to_string(),
                "count".into(),
                count_partitions(*r, *m)?.to_string(),
            ]);
            Ok((table, None))
        }
        PartitionOp::Cohabiting { r, m } => {
            let mut table = Table::new(&["r", "m", "op", "value"]);
            table.push(vec![
                r.to_string(),
                m.to_string(),
                "cohabiting".into(),
                count_cohabiting(*r, *m)?.to_string(),
            ]);
            Ok((table, None))
        }
        PartitionOp::TransversalCount { r, m } => {
            if *m == 0 || r % m != 0 {
                return Err(Error::validation(format!("M={m} must divide R={r}")));
            }
            let g = r / m;
            let groups: Vec<Vec<usize>> =
                (0..*m).map(|k| (k * g + 1..=(k + 1) * g).collect()).collect();
            let spec = TransversalSpec::new(groups)?;
            let mut table = Table::new(&["r", "m", "op", "value"]);
            table.push(vec![
                r.to_string(),
                m.to_string(),
                "transversal_count".into(),
                count_transversal(&spec).to_string(),
            ]);
            Ok((table, None))
        }
        PartitionOp::Moment { r, m, p, family, weights } => {
            let a = partition_weights(weights, *r, seed);
            let fam = family_from(family, seed);
            let report = avg_partition_moment(&a, *m, *p, &fam)?;
            let mut table = moment_table();
            table.push(moment_row(&report));
            Ok((table, None))
        }
        PartitionOp::L2Check { r, m, weights } => {
            let a = partition_weights(weights, *r, seed);
            let exact = match &a {
                MomentWeights::Exact(v) => v.clone(),
                MomentWeights::Float(_) => {
                    return Err(Error::validation(
                        "the exact L² identity needs Gaussian-integer weights",
                    ))
                }
            };
            let id = l2_identity_check(&exact, *m)?;
            let mut table = Table::new(&["r", "m", "lhs", "rhs", "equal"]);
            table.push(vec![
                r.to_string(),
                m.to_string(),
                id.lhs.to_string(),
                id.rhs.to_string(),
                id.equal.to_string(),
            ]);
            Ok((table, None))
        }
        PartitionOp::L4Check { r, m, family, weights } => {
            let a = partition_weights(weights, *r, seed);
            let report = l4_bound_check(&a, *m, &family_from(family, seed))?;
            let mut table = moment_table();
            table.push(moment_row(&report));
            Ok((table, None))
        }
        PartitionOp::ElpCheck { r, m, p, family, weights } => {
            let a = partition_weights(weights, *r, seed);
            let report = elp_bound_check(&a, *m, *p, &family_from(family, seed))?;
            let mut table = moment_table();
            table.push(moment_row(&report));
            Ok((table, None))
        }
    }
}

fn moment_table() -> Table {
    Table::new(&[
        "r", "m", "p", "family", "average", "bound", "ratio", "std_error", "family_seed",
    ])
}

fn run_tubes(op: &TubesOp, seed: u64) -> Result<(Table, Option<serde_json::Value>)> {
    match op {
        TubesOp::LrNorm { r, lr, delta, samples } => {
            let grid = canonical_caps(*r, 3)?;
            let family = make_bush(&grid, *delta)?;
            let plan = SamplingPlan::monte_carlo(*samples, 1, derive_seed(seed, "tubes", 0));
            let est = tube_lr_norm(&family, *lr, &plan)?;
            let vol = ball_volume_3d(family.r);
            let mut table = Table::new(&[
                "r",
                "lr",
                "delta",
                "mean_power",
                "std_error",
                "sample_count",
                "integral",
                "norm",
                "closed_form_mass",
            ]);
            table.push(vec![
                fmt(*r),
                fmt(*lr),
                fmt(*delta),
                fmt(est.mean_power),
                fmt(est.std_error),
                est.sample_count.to_string(),
                fmt(est.mean_power * vol),
                fmt((est.mean_power * vol).powf(1.0 / *lr)),
                fmt(total_tube_volume(&family)),
            ]);
            Ok((table, None))
        }
        TubesOp::Incidence { r, delta, x } => {
            let grid = canonical_caps(*r, 3)?;
            let family = make_bush(&grid, *delta)?;
            let count = incidence_count(&family, x);
            let mut table = Table::new(&["r", "delta", "x0", "x1", "x2", "count"]);
            table.push(vec![
                fmt(*r),
                fmt(*delta),
                fmt(x[0]),
                fmt(x[1]),
                fmt(x[2]),
                count.to_string(),
            ]);
            let artifact = serde_json::to_value(&family).ok();
            Ok((table, artifact))
        }
        TubesOp::Profile { r, m, p, delta, samples } => {
            let grid = canonical_caps(*r, 3)?;
            let family = make_bush(&grid, *delta)?;
            let plan = SamplingPlan::monte_carlo(*samples, 1, derive_seed(seed, "tubes", 0));
            let profile = trelation_rhs_profile(&family, *m, *p, &plan)?;
            let mut table = Table::new(&[
                "r",
                "m",
                "p",
                "int_l_p_half",
                "int_l_p_half_se",
                "int_l1",
                "int_l1_se",
                "weighted_l1",
                "predicted",
                "measured",
            ]);
            table.push(vec![
                fmt(profile.r),
                fmt(profile.m),
                fmt(profile.p),
                fmt(profile.int_l_p_half.0),
                fmt(profile.int_l_p_half.1),
                fmt(profile.int_l1.0),
                fmt(profile.int_l1.1),
                fmt(profile.weighted_l1),
                fmt(profile.predicted),
                fmt(profile.measured),
            ]);
            Ok((table, None))
        }
    }
}

fn scan_table() -> Table {
    Table::new(&[
        "row",
        "r",
        "value",
        "detail",
        "slope",
        "intercept",
        "slope_std_error",
    ])
}

fn push_fit(table: &mut Table, fit: &declab::expsum::ExponentFit, label: &str) {
    table.push(vec![
        format!("fit_{label}"),
        String::new(),
        String::new(),
        String::new(),
        fmt(fit.slope),
        fmt(fit.intercept),
        fmt(fit.slope_std_error),
    ]);
}

fn run_scan(target: &ScanTarget, seed: u64) -> Result<(Table, Option<serde_json::Value>)> {
    let mut table = scan_table();
    match target {
        ScanTarget::Synthetic { power, r_list } => {
            let pairs: Vec<(f64, f64)> = r_list.iter().map(|&r| (r, r.powf(*power))).collect();
            for &(r, v) in &pairs {
                table.push(vec![
                    "point".into(),
                    fmt(r),
                    fmt(v),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            let fit = fit_exponent(&pairs)?;
            push_fit(&mut table, &fit, "synthetic");
        }
        ScanTarget::SqrtCancelCaps { d, p, r_list, samples, strata_per_axis } => {
            let mut pairs = Vec::new();
            for (i, &r) in r_list.iter().enumerate() {
                let fset = lift_paraboloid(&canonical_caps(r, *d)?);
                let w = WeightVector::ones(fset.len());
                let plan =
                    SamplingPlan::monte_carlo(*samples, *strata_per_axis, derive_seed(seed, "scan", i as u64));
                let ratio =
                    sqrt_cancel_ratio(&fset, &w, &EvaluationDomain::ball(r), &plan, *p)?;
                pairs.push((r, ratio.ratio));
                table.push(vec![
                    "point".into(),
                    fmt(r),
                    fmt(ratio.ratio),
                    fmt(ratio.std_error),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            let fit = fit_exponent(&pairs)?;
            push_fit(&mut table, &fit, "sqrt_cancel");
        }
        ScanTarget::TightCircle {
            p,
            r_list,
            n_seeds,
            samples,
            diameter_exponent,
        } => {
            if *n_seeds == 0 {
                return Err(Error::validation("tight scan needs at least one seed"));
            }
            let exponent = diameter_exponent.unwrap_or(-1.5);
            let mut pairs = Vec::new();
            for (i, &r) in r_list.iter().enumerate() {
                let cells = equal_measure_partition(Surface::Circle, r.powf(exponent))?;
                let mut ratios = Vec::with_capacity(*n_seeds);
                for s in 0..*n_seeds {
                    let sel_seed = derive_seed(seed, "tight", (i * n_seeds + s) as u64);
                    let sel = tight_random_select(&cells, r, *p, sel_seed)?;
                    let w = WeightVector::ones(sel.set.len());
                    let plan = SamplingPlan::monte_carlo(
                        *samples,
                        1,
                        derive_seed(seed, "tight-plan", (i * n_seeds + s) as u64),
                    );
                    let ratio =
                        sqrt_cancel_ratio(&sel.set, &w, &EvaluationDomain::ball(r), &plan, *p)?;
                    ratios.push(ratio.ratio);
                    table.push(vec![
                        "draw".into(),
                        fmt(r),
                        fmt(ratio.ratio),
                        format!("kept={} expected={}", sel.set.len(), sel.expected),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]);
                }
                ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let median = ratios[ratios.len() / 2];
                pairs.push((r, median));
                table.push(vec![
                    "point".into(),
                    fmt(r),
                    fmt(median),
                    "median".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            let fit = fit_exponent(&pairs)?;
            push_fit(&mut table, &fit, "tight_circle");
        }
        ScanTarget::BushNorm { lr, delta, r_list, samples } => {
            let mut pairs = Vec::new();
            for (i, &r) in r_list.iter().enumerate() {
                let grid = canonical_caps(r, 3)?;
                let family = make_bush(&grid, *delta)?;
                let plan = SamplingPlan::monte_carlo(*samples, 1, derive_seed(seed, "bush", i as u64));
                let est = tube_lr_norm(&family, *lr, &plan)?;
                let norm = (est.mean_power * ball_volume_3d(r)).powf(1.0 / *lr);
                pairs.push((r, norm));
                table.push(vec![
                    "point".into(),
                    fmt(r),
                    fmt(norm),
                    fmt(est.std_error),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            let fit = fit_exponent(&pairs)?;
            push_fit(&mut table, &fit, "bush_norm");
        }
        ScanTarget::StripSharpness { r_list, p_list } => {
            let scan = strip_sharpness_scan(r_list, p_list)?;
            for row in &scan.rows {
                table.push(vec![
                    "point".into(),
                    fmt(row.r),
                    fmt(row.lhs_value),
                    format!("strip_mass={} total_mass={}", row.strip_mass, row.total_mass),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
            push_fit(&mut table, &scan.lhs_fit, "lhs");
            push_fit(&mut table, &scan.strip_mass_fit, "strip_mass");
            push_fit(&mut table, &scan.total_mass_fit, "total_mass");
            table.push(vec![
                "p_star".into(),
                String::new(),
                fmt(scan.p_star),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
            for &(p, lhs_g, rhs_g) in &scan.per_p {
                table.push(vec![
                    "per_p".into(),
                    fmt(p),
                    fmt(lhs_g),
                    fmt(rhs_g),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
            }
        }
    }
    Ok((table, None))
}

/// CSV bytes of a record's table.
pub fn to_csv(record: &RunRecord) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(&record.table.header)
        .map_err(|e| Error::validation(e.to_string()))?;
    for row in &record.table.rows {
        writer.write_record(row).map_err(|e| Error::validation(e.to_string()))?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::validation(e.to_string()))
}

/// Write `bytes` to `path` atomically (temp file + rename).
fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Write the CSV (unless `json_only`) and the JSON sidecar; returns the
/// paths written.
pub fn write_outputs(
    record: &RunRecord,
    out_dir: &Path,
    stem: &str,
    json_only: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::validation(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    if !json_only {
        let csv_path = out_dir.join(format!("{stem}.csv"));
        let bytes = to_csv(record)?;
        write_atomic(&csv_path, &bytes)
            .map_err(|e| Error::validation(format!("cannot write {}: {e}", csv_path.display())))?;
        written.push(csv_path);
    }
    let json_path = out_dir.join(format!("{stem}.json"));
    let bytes = serde_json::to_vec_pretty(record).map_err(|e| Error::validation(e.to_string()))?;
    write_atomic(&json_path, &bytes)
        .map_err(|e| Error::validation(format!("cannot write {}: {e}", json_path.display())))?;
    written.push(json_path);
    Ok(written)
}
