//! Experiment descriptors: the JSON schema accepted by `--spec`.

use serde::{Deserialize, Serialize};

/// A complete experiment: kind-specific parameters plus the master seed
/// and an optional output stem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(flatten)]
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    /// Output file stem; relative paths resolve against `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
}

impl ExperimentSpec {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Gen { .. } => "gen",
            ExperimentKind::Norm { .. } => "norm",
            ExperimentKind::Decouple { .. } => "decouple",
            ExperimentKind::Recouple { .. } => "recouple",
            ExperimentKind::Partition { .. } => "partition",
            ExperimentKind::Tubes { .. } => "tubes",
            ExperimentKind::Scan { .. } => "scan",
            ExperimentKind::Tight { .. } => "tight",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Generate a frequency set and write it out.
    Gen(GenSurface),
    /// Estimate an L^p mean (optionally the square-root-cancellation ratio
    /// and interference mass) for a generated set.
    Norm {
        set: GenSurface,
        weights: WeightSpec,
        domain: DomainSpec,
        plan: PlanSpec,
        p: f64,
        #[serde(default)]
        with_ratio: bool,
        #[serde(default)]
        with_interference: bool,
    },
    /// Decoupling ratio for an ensemble partition of the cap grid.
    Decouple {
        shape: ShapeSpec,
        r: f64,
        p: f64,
        variant: VariantSpec,
        field: FieldSpec,
        domain: DomainSpec,
        plan: PlanSpec,
    },
    /// Recoupling ratio over disjoint coarse squares.
    Recouple {
        r: f64,
        k: usize,
        squares: Vec<(usize, usize)>,
        field: FieldSpec,
        p: f64,
        domain: DomainSpec,
        plan: PlanSpec,
    },
    /// Partition combinatorics and averaged moments.
    Partition(PartitionOp),
    /// Tube incidence norms and profiles.
    Tubes(TubesOp),
    /// Exponent fits across a scan of R.
    Scan(ScanTarget),
    /// Randomized tight selection with its draw statistics.
    Tight {
        surface: TightSurface,
        r: f64,
        p: f64,
        /// Cells get diameter ≤ R^diameter_exponent (default -1.5).
        #[serde(default)]
        diameter_exponent: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "surface", rename_all = "snake_case")]
pub enum GenSurface {
    /// Canonical cap centers on [0,1]^{d-1}.
    Caps { r: f64, d: usize },
    /// Paraboloid lift of the canonical caps.
    CapsLift { r: f64, d: usize },
    /// Lattice points on the sphere |n|² = N, rescaled to the unit sphere.
    Sphere { n: u64, d: usize },
    /// Lattice points in the thin annulus around radius R.
    Annulus {
        r: f64,
        #[serde(default)]
        scaling: AnnulusScaling,
    },
    /// Rescaled lattice points on the moment curve.
    Moment { r: f64, d: usize },
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum AnnulusScaling {
    Raw,
    #[default]
    Rescaled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum WeightSpec {
    Ones,
    RandomPhase {
        #[serde(default)]
        seed: Option<u64>,
    },
    RandomSigns {
        #[serde(default)]
        seed: Option<u64>,
    },
    Values { values: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKindSpec,
    pub size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKindSpec {
    Ball,
    Box,
    Torus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PlanSpec {
    Grid { points_per_axis: usize },
    MonteCarlo {
        count: usize,
        #[serde(default = "one")]
        strata_per_axis: usize,
    },
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ShapeSpec {
    Strips,
    Circles { center: [f64; 2] },
    Spread,
    Msets { m: usize },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantSpec {
    L2,
    Lp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum FieldSpec {
    Constant,
    RandomPhase {
        #[serde(default)]
        seed: Option<u64>,
    },
    Indicator { subset: Vec<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PartitionOp {
    Count { r: usize, m: usize },
    Cohabiting { r: usize, m: usize },
    /// `((R/M)!)^{M-1}` for contiguous groups of size R/M.
    TransversalCount { r: usize, m: usize },
    Moment {
        r: usize,
        m: usize,
        p: f64,
        family: FamilySpec,
        weights: PartitionWeightSpec,
    },
    L2Check {
        r: usize,
        m: usize,
        weights: PartitionWeightSpec,
    },
    L4Check {
        r: usize,
        m: usize,
        family: FamilySpec,
        weights: PartitionWeightSpec,
    },
    ElpCheck {
        r: usize,
        m: usize,
        p: f64,
        family: FamilySpec,
        weights: PartitionWeightSpec,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FamilySpec {
    All,
    Sampled { draws: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case")]
pub enum PartitionWeightSpec {
    Ones,
    /// Gaussian integers with real/imaginary parts uniform in [lo, hi].
    GaussianInteger { lo: i64, hi: i64 },
    /// Seeded unimodular weights.
    Unimodular,
    /// Seeded ±1 weights.
    Signs,
    Values { values: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TubesOp {
    LrNorm {
        r: f64,
        lr: f64,
        #[serde(default)]
        delta: f64,
        samples: usize,
    },
    Incidence {
        r: f64,
        #[serde(default)]
        delta: f64,
        x: [f64; 3],
    },
    Profile {
        r: f64,
        m: f64,
        p: f64,
        #[serde(default)]
        delta: f64,
        samples: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum ScanTarget {
    /// values = R^power exactly; slope must come back as `power`.
    Synthetic { power: f64, r_list: Vec<f64> },
    /// sqrt_cancel_ratio of the lifted canonical caps, a ≡ 1, over balls
    /// of radius R.
    SqrtCancelCaps {
        d: usize,
        p: f64,
        r_list: Vec<f64>,
        samples: usize,
        #[serde(default = "one")]
        strata_per_axis: usize,
    },
    /// Median-of-seeds sqrt_cancel_ratio of the tight circle selection.
    TightCircle {
        p: f64,
        r_list: Vec<f64>,
        n_seeds: usize,
        samples: usize,
        /// Cell diameter bound R^diameter_exponent (default -1.5).
        #[serde(default)]
        diameter_exponent: Option<f64>,
    },
    /// Fitted exponent of the bush tube norm ‖Σ1_T‖_lr.
    BushNorm {
        lr: f64,
        #[serde(default)]
        delta: f64,
        r_list: Vec<f64>,
        samples: usize,
    },
    /// Flat-strip sharpness: lhs/rhs growth exponents and the crossing p*.
    StripSharpness { r_list: Vec<f64>, p_list: Vec<f64> },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TightSurface {
    Circle,
    ParabolaArc,
    Sphere2,
}
