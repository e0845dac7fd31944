//! Exponential sum evaluation and `L^p` mean estimation.
//!
//! The central object is `S(x) = Σ_n a_n e(ξ_n · x)` with `e(t) = e^{2πit}`.
//! [`lp_mean`] estimates `(1/|B|) ∫_B |S|^p` over a ball, box or torus by
//! stratified Monte Carlo or a midpoint grid; [`sqrt_cancel_ratio`] divides
//! by `‖a‖₂^p` to measure square-root cancellation, and
//! [`interference_mass`] probes the constructive-interference plateau near
//! the origin.

pub mod fit;
mod quadrature;

pub use fit::{fit_exponent, scan_exponent, ExponentFit};
pub use quadrature::{grid_domain_means, mc_domain_means, StatMoment, GRID_POINT_CAP};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freqsets::FrequencySet;

/// Complex weights, one per frequency point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(pub Vec<Complex64>);

impl WeightVector {
    pub fn ones(n: usize) -> Self {
        WeightVector(vec![Complex64::new(1.0, 0.0); n])
    }

    /// Unimodular weights with seeded uniform random phases.
    pub fn random_phase(n: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(seed, 0);
        WeightVector(
            (0..n)
                .map(|_| {
                    let t: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                    Complex64::new(t.cos(), t.sin())
                })
                .collect(),
        )
    }

    /// Seeded ±1 weights.
    pub fn random_signs(n: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = crate::rng::stream_rng(seed, 0);
        WeightVector(
            (0..n)
                .map(|_| Complex64::new(if rng.gen::<bool>() { 1.0 } else { -1.0 }, 0.0))
                .collect(),
        )
    }

    /// Indicator of a subset of indices.
    pub fn indicator(n: usize, subset: &[usize]) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for &i in subset {
            v[i] = Complex64::new(1.0, 0.0);
        }
        WeightVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        WeightVector(self.0.iter().map(|a| a * c).collect())
    }

    /// `Σ |a_n|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_finite(&self) -> Result<()> {
        if self.0.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::validation("non-finite weight"));
        }
        Ok(())
    }
}

/// Where an `L^p` mean is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Ball,
    Box,
    Torus,
}

/// A ball `B(center, R)`, a cube of side `R` around `center`, or the torus
/// `[0, R]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDomain {
    pub kind: DomainKind,
    pub radius_or_side: f64,
    /// Empty means the origin.
    #[serde(default)]
    pub center: Vec<f64>,
}

impl EvaluationDomain {
    pub fn ball(radius: f64) -> Self {
        EvaluationDomain {
            kind: DomainKind::Ball,
            radius_or_side: radius,
            center: Vec::new(),
        }
    }

    pub fn cube(side: f64) -> Self {
        EvaluationDomain {
            kind: DomainKind::Box,
            radius_or_side: side,
            center: Vec::new(),
        }
    }

    pub fn torus(side: f64) -> Self {
        EvaluationDomain {
            kind: DomainKind::Torus,
            radius_or_side: side,
            center: Vec::new(),
        }
    }

    pub(crate) fn center_vec(&self, dim: usize) -> Vec<f64> {
        if self.center.is_empty() {
            vec![0.0; dim]
        } else {
            self.center.clone()
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if !(self.radius_or_side.is_finite() && self.radius_or_side > 0.0) {
            return Err(Error::validation("domain size must be positive"));
        }
        if !self.center.is_empty() && self.center.len() != dim {
            return Err(Error::validation(format!(
                "domain center dimension {} != {dim}",
                self.center.len()
            )));
        }
        Ok(())
    }

    /// Side length of the bounding box.
    pub fn bounding_side(&self) -> f64 {
        match self.kind {
            DomainKind::Ball => 2.0 * self.radius_or_side,
            _ => self.radius_or_side,
        }
    }
}

/// How sample points are produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMethod {
    Grid { points_per_axis: usize },
    MonteCarlo { count: usize, strata_per_axis: usize },
}

/// Quadrature specification; all randomness flows from `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub method: SamplingMethod,
    pub seed: u64,
}

impl SamplingPlan {
    pub fn grid(points_per_axis: usize) -> Self {
        SamplingPlan {
            method: SamplingMethod::Grid { points_per_axis },
            seed: 0,
        }
    }

    pub fn monte_carlo(count: usize, strata_per_axis: usize, seed: u64) -> Self {
        SamplingPlan {
            method: SamplingMethod::MonteCarlo { count, strata_per_axis },
            seed,
        }
    }
}

/// Result of an `L^p` mean estimate: `mean_power ≈ (1/|B|)∫_B |S|^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub p: f64,
    pub mean_power: f64,
    pub std_error: f64,
    pub sample_count: u64,
}

impl NormEstimate {
    /// `L^p` norm on the normalized measure: `mean_power^{1/p}`.
    pub fn norm(&self) -> f64 {
        self.mean_power.powf(1.0 / self.p)
    }
}

/// Precomputed evaluator for `S(x) = Σ a_n e(ξ_n·x)`.
///
/// Phases are computed as `ξ·x` in double precision, reduced modulo 1, and
/// only then passed to the trigonometric functions; summation is pairwise
/// over a fixed index tree.
pub struct SumEvaluator {
    dim: usize,
    coords: Vec<f64>, // flattened, n × dim
    weights: Vec<Complex64>,
    n: usize,
}

impl SumEvaluator {
    pub fn new(fset: &FrequencySet, w: &WeightVector) -> Result<Self> {
        if fset.len() != w.len() {
            return Err(Error::validation(format!(
                "weight count {} != point count {}",
                w.len(),
                fset.len()
            )));
        }
        w.check_finite()?;
        let dim = fset.dim;
        let mut coords = Vec::with_capacity(fset.len() * dim);
        for p in &fset.points {
            coords.extend_from_slice(&p.coords);
        }
        Ok(SumEvaluator {
            dim,
            coords,
            weights: w.0.clone(),
            n: fset.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn term(&self, i: usize, x: &[f64]) -> Complex64 {
        let base = i * self.dim;
        let mut t = 0.0f64;
        for (c, xi) in self.coords[base..base + self.dim].iter().zip(x) {
            t += c * xi;
        }
        let frac = t - t.round();
        let (s, c) = (2.0 * std::f64::consts::PI * frac).sin_cos();
        self.weights[i] * Complex64::new(c, s)
    }

    fn sum_range(&self, lo: usize, hi: usize, x: &[f64]) -> Complex64 {
        if hi - lo <= 16 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += self.term(i, x);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            self.sum_range(lo, mid, x) + self.sum_range(mid, hi, x)
        }
    }

    /// `S(x)` with pairwise summation.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dim);
        self.sum_range(0, self.n, x)
    }
}

/// Evaluate `S(x) = Σ a_n e(ξ_n·x)` at a single point.
pub fn eval_sum(fset: &FrequencySet, w: &WeightVector, x: &[f64]) -> Result<Complex64> {
    if x.len() != fset.dim {
        return Err(Error::validation(format!(
            "point dimension {} != set dimension {}",
            x.len(),
            fset.dim
        )));
    }
    Ok(SumEvaluator::new(fset, w)?.eval(x))
}

/// Raise `|z|` to the `p`-th power, with fast paths for small even `p`.
#[inline]
pub(crate) fn abs_pow(z: Complex64, p: f64) -> f64 {
    let n2 = z.norm_sqr();
    if p == 2.0 {
        n2
    } else if p == 4.0 {
        n2 * n2
    } else if p == 6.0 {
        n2 * n2 * n2
    } else if p == 8.0 {
        let n4 = n2 * n2;
        n4 * n4
    } else {
        n2.powf(p / 2.0)
    }
}

/// Check the grid Nyquist rule: spacing must not exceed
/// `1/(2·p·max|ξ|)` (largest absolute frequency coordinate).
fn check_nyquist(
    fset: &FrequencySet,
    domain: &EvaluationDomain,
    points_per_axis: usize,
    p: f64,
) -> Result<()> {
    let max_xi = fset.max_abs_coord();
    if max_xi == 0.0 {
        return Ok(());
    }
    let spacing = domain.bounding_side() / points_per_axis as f64;
    let limit = 1.0 / (2.0 * p * max_xi);
    if spacing > limit * (1.0 + 1e-12) {
        return Err(Error::refusal(format!(
            "grid spacing {spacing:.6e} violates the Nyquist rule (needs <= {limit:.6e} \
             for p={p}, max|ξ|={max_xi})"
        )));
    }
    Ok(())
}

/// Estimate `(1/|B|) ∫_B |S|^p` over `domain` with the given plan.
pub fn lp_mean(
    fset: &FrequencySet,
    w: &WeightVector,
    domain: &EvaluationDomain,
    plan: &SamplingPlan,
    p: f64,
) -> Result<NormEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::validation(format!("lp_mean needs p >= 1, got {p}")));
    }
    domain.validate(fset.dim)?;
    let evaluator = SumEvaluator::new(fset, w)?;
    let dim = fset.dim;
    let eval = |x: &[f64], out: &mut [f64]| {
        out[0] = abs_pow(evaluator.eval(x), p);
    };
    let moments = match plan.method {
        SamplingMethod::Grid { points_per_axis } => {
            check_nyquist(fset, domain, points_per_axis, p)?;
            grid_domain_means(domain, dim, points_per_axis, 1, eval)?
        }
        SamplingMethod::MonteCarlo { count, strata_per_axis } => {
            mc_domain_means(domain, dim, count, strata_per_axis, plan.seed, 1, eval)?
        }
    };
    let m = moments[0];
    Ok(NormEstimate {
        p,
        mean_power: m.mean,
        std_error: m.std_error,
        sample_count: m.count,
    })
}

/// `lp_mean` divided by `‖a‖₂^p`: the square-root-cancellation ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqrtCancelRatio {
    pub ratio: f64,
    pub std_error: f64,
    pub estimate: NormEstimate,
}

pub fn sqrt_cancel_ratio(
    fset: &FrequencySet,
    w: &WeightVector,
    domain: &EvaluationDomain,
    plan: &SamplingPlan,
    p: f64,
) -> Result<SqrtCancelRatio> {
    let l2 = w.l2_norm_sq();
    if l2 == 0.0 {
        return Err(Error::validation("sqrt_cancel_ratio needs nonzero weights"));
    }
    let estimate = lp_mean(fset, w, domain, plan, p)?;
    let denom = l2.powf(p / 2.0);
    Ok(SqrtCancelRatio {
        ratio: estimate.mean_power / denom,
        std_error: estimate.std_error / denom,
        estimate,
    })
}

/// Minimum of `|S(x)|/N` over a fixed `3^d`-point stencil inside
/// `{|x| ≤ 1/(100·max(1, 2π·max|ξ|))}`.
///
/// With `a ≡ 1` (enforced) this measures the constructive-interference
/// plateau near the origin; it exceeds 0.9 for any set with `|ξ| = O(1)`.
pub fn interference_mass(fset: &FrequencySet, w: &WeightVector, p: f64, r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::validation("interference_mass needs R >= 1"));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::validation("interference_mass needs p >= 1"));
    }
    if w.len() != fset.len() {
        return Err(Error::validation("weight count mismatch"));
    }
    if w.0.iter().any(|a| *a != num_complex::Complex64::new(1.0, 0.0)) {
        return Err(Error::validation("interference_mass requires a ≡ 1"));
    }
    if fset.is_empty() {
        return Err(Error::validation("interference_mass needs a nonempty set"));
    }
    let evaluator = SumEvaluator::new(fset, w)?;
    let d = fset.dim;
    let max_norm = fset.max_norm();
    let radius = 1.0 / (100.0 * (2.0 * std::f64::consts::PI * max_norm).max(1.0));
    let step = radius / (d as f64).sqrt();
    let n = fset.len() as f64;
    let mut min_ratio = f64::INFINITY;
    let stencil_points = 3usize.pow(d as u32);
    let mut x = vec![0.0f64; d];
    for code in 0..stencil_points {
        let mut rem = code;
        for coord in x.iter_mut() {
            let o = (rem % 3) as i64 - 1;
            rem /= 3;
            *coord = o as f64 * step;
        }
        let v = evaluator.eval(&x).norm() / n;
        min_ratio = min_ratio.min(v);
    }
    Ok(min_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freqsets::FrequencyPoint;

    fn integer_set(freqs: &[f64]) -> FrequencySet {
        FrequencySet::new(
            1,
            freqs.iter().map(|&f| FrequencyPoint { coords: vec![f] }).collect(),
            "ints",
        )
        .unwrap()
    }

    #[test]
    fn eval_at_zero_is_n() {
        let f = integer_set(&[0.0, 1.0, 3.0]);
        let w = WeightVector::ones(3);
        let v = eval_sum(&f, &w, &[0.0]).unwrap();
        assert!((v.re - 3.0).abs() < 1e-14 && v.im.abs() < 1e-14);
    }

    #[test]
    fn single_frequency_is_unimodular() {
        let f = integer_set(&[2.0]);
        let w = WeightVector(vec![Complex64::new(0.3, -0.4)]);
        for &x in &[0.0, 0.17, 0.93, 12.75] {
            let v = eval_sum(&f, &w, &[x]).unwrap();
            assert!((v.norm() - 0.5).abs() < 1e-13);
        }
    }

    #[test]
    fn antipodal_phases_cancel() {
        // (ξ₁-ξ₂)·x = 1/2 with a ≡ 1 → |S| = 0
        let f = integer_set(&[0.0, 1.0]);
        let w = WeightVector::ones(2);
        let v = eval_sum(&f, &w, &[0.5]).unwrap();
        assert!(v.norm() < 1e-13);
    }

    #[test]
    fn torus_p2_orthogonality() {
        let f = integer_set(&[0.0, 1.0, 3.0]);
        let w = WeightVector::ones(3);
        let plan = SamplingPlan::grid(12);
        let est = lp_mean(&f, &w, &EvaluationDomain::torus(1.0), &plan, 2.0).unwrap();
        assert!((est.mean_power - 3.0).abs() < 1e-10 * 3.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn sidon_p4_counts_quadruples() {
        // {0,1,3} has 15 ordered additive quadruples
        let f = integer_set(&[0.0, 1.0, 3.0]);
        let w = WeightVector::ones(3);
        let plan = SamplingPlan::grid(24);
        let est = lp_mean(&f, &w, &EvaluationDomain::torus(1.0), &plan, 4.0).unwrap();
        assert!((est.mean_power - 15.0).abs() < 1e-8 * 15.0);
    }

    #[test]
    fn nyquist_violation_is_refused() {
        let f = integer_set(&[0.0, 1.0, 3.0]);
        let w = WeightVector::ones(3);
        let plan = SamplingPlan::grid(8); // spacing 1/8 > 1/12
        let err = lp_mean(&f, &w, &EvaluationDomain::torus(1.0), &plan, 2.0).unwrap_err();
        assert!(matches!(err, Error::Refusal(_)));
    }

    #[test]
    fn identical_frequencies_interfere() {
        // N copies of one frequency via from_parts: mean power = N^p |a|^p
        let pts = vec![FrequencyPoint { coords: vec![1.0] }; 5];
        let f = FrequencySet::from_parts(1, pts, "repeat");
        let w = WeightVector::ones(5);
        let plan = SamplingPlan::grid(16);
        let est = lp_mean(&f, &w, &EvaluationDomain::torus(1.0), &plan, 4.0).unwrap();
        assert!((est.mean_power - 625.0).abs() < 1e-9 * 625.0);
    }

    #[test]
    fn sqrt_ratio_trivial_cases() {
        let f = integer_set(&[2.0]);
        let w = WeightVector::ones(1);
        let plan = SamplingPlan::grid(32);
        let r = sqrt_cancel_ratio(&f, &w, &EvaluationDomain::torus(1.0), &plan, 4.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn interference_mass_singleton_is_one() {
        let f = integer_set(&[1.0]);
        let w = WeightVector::ones(1);
        let m = interference_mass(&f, &w, 4.0, 4.0).unwrap();
        assert!((m - 1.0).abs() < 1e-9);
    }

    #[test]
    fn interference_mass_rejects_nonconstant_weights() {
        let f = integer_set(&[0.0, 1.0]);
        let w = WeightVector(vec![Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)]);
        assert!(interference_mass(&f, &w, 4.0, 4.0).is_err());
    }
}
