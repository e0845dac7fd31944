//! Averaged partition moments: `(1/#P) Σ_P Σ_j |Σ_{i∈P_j} a_i|^p` over a
//! family of equal partitions, exactly (Gaussian-rational weights, even
//! `p`, enumerable family) or sampled.
//!
//! Exact arithmetic is only possible for even `p`; odd `p` (notably
//! `p = 3`) always goes through sampled floating evaluation since `|z|^p`
//! is irrational.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::partitions::{
    count_partitions, count_transversal, enumerate_partitions, enumerate_transversal,
    sample_partition, sample_transversal, EqualPartition, TransversalSpec, ENUM_CAP,
};
use crate::rng::stream_rng;

/// A Gaussian rational `re + i·im` with exact rational parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn zero() -> Self {
        GaussRat {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    pub fn add_assign(&mut self, other: &GaussRat) {
        self.re += &other.re;
        self.im += &other.im;
    }

    /// `|z|² = re² + im²`, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Weight vectors accepted by the moment machinery.
#[derive(Debug, Clone)]
pub enum MomentWeights {
    /// Exact Gaussian-rational entries; enables exact averages for even p.
    Exact(Vec<GaussRat>),
    /// Floating complex entries.
    Float(Vec<Complex64>),
}

impl MomentWeights {
    pub fn gaussian_integers(entries: &[(i64, i64)]) -> Self {
        MomentWeights::Exact(entries.iter().map(|&(re, im)| GaussRat::from_ints(re, im)).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            MomentWeights::Exact(v) => v.len(),
            MomentWeights::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            MomentWeights::Exact(v) => v.iter().map(GaussRat::to_complex).collect(),
            MomentWeights::Float(v) => v.clone(),
        }
    }
}

/// Which family of partitions the average runs over.
#[derive(Debug, Clone)]
pub enum PartitionFamily {
    /// All equal partitions of `{1,…,R}` into M-cells.
    All,
    /// All transversal partitions of the given group structure.
    Transversal(TransversalSpec),
    /// Uniformly sampled equal partitions.
    Sampled { seed: u64, draws: usize },
    /// Uniformly sampled transversal partitions.
    TransversalSampled { spec: TransversalSpec, seed: u64, draws: usize },
}

impl PartitionFamily {
    pub fn label(&self) -> String {
        match self {
            PartitionFamily::All => "all".into(),
            PartitionFamily::Transversal(_) => "transversal".into(),
            PartitionFamily::Sampled { seed, draws } => format!("sampled({seed},{draws})"),
            PartitionFamily::TransversalSampled { seed, draws, .. } => {
                format!("transversal-sampled({seed},{draws})")
            }
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            PartitionFamily::Sampled { seed, .. }
            | PartitionFamily::TransversalSampled { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// An averaged moment: exact rational or floating with a standard error.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentValue {
    Exact(BigRational),
    Approx { value: f64, std_error: f64 },
}

impl MomentValue {
    pub fn value(&self) -> f64 {
        match self {
            MomentValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            MomentValue::Approx { value, .. } => *value,
        }
    }

    pub fn std_error(&self) -> f64 {
        match self {
            MomentValue::Exact(_) => 0.0,
            MomentValue::Approx { std_error, .. } => *std_error,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            MomentValue::Exact(q) => Some(q),
            _ => None,
        }
    }

    /// `"num/den"` for exact values, decimal otherwise.
    pub fn display(&self) -> String {
        match self {
            MomentValue::Exact(q) => format!("{}/{}", q.numer(), q.denom()),
            MomentValue::Approx { value, .. } => format!("{value}"),
        }
    }
}

impl Serialize for MomentValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MomentValue::Exact(q) => {
                let mut st = s.serialize_struct("MomentValue", 2)?;
                st.serialize_field("exact", &format!("{}/{}", q.numer(), q.denom()))?;
                st.serialize_field("value", &self.value())?;
                st.end()
            }
            MomentValue::Approx { value, std_error } => {
                let mut st = s.serialize_struct("MomentValue", 2)?;
                st.serialize_field("value", value)?;
                st.serialize_field("std_error", std_error)?;
                st.end()
            }
        }
    }
}

/// Report of an averaged moment against a bound.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub r: usize,
    pub m: usize,
    pub p: f64,
    pub family: String,
    pub family_size: BigUint,
    pub average: MomentValue,
    /// Comparison bound; absent for plain averages.
    pub bound: Option<f64>,
    /// `average / bound` when a bound is present.
    pub ratio: Option<f64>,
    pub seed: Option<u64>,
}

fn even_exponent(p: f64) -> Option<u32> {
    if p.fract() == 0.0 && p >= 2.0 && (p as u64).is_multiple_of(2) && p <= 64.0 {
        Some(p as u32)
    } else {
        None
    }
}

fn rational_pow(q: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= q;
    }
    acc
}

/// Exact `Σ_j |Σ_{i∈P_j} a_i|^p` for one partition, `p = 2k`.
fn exact_partition_stat(p: &EqualPartition, a: &[GaussRat], half_p: u32) -> BigRational {
    let mut total = BigRational::zero();
    for cell in p.cells() {
        let mut s = GaussRat::zero();
        for &i in cell {
            s.add_assign(&a[i - 1]);
        }
        total += rational_pow(&s.norm_sqr(), half_p);
    }
    total
}

/// Floating `Σ_j |Σ_{i∈P_j} a_i|^p` for one partition.
fn float_partition_stat(part: &EqualPartition, a: &[Complex64], p: f64) -> f64 {
    let mut total = 0.0;
    for cell in part.cells() {
        let mut s = Complex64::new(0.0, 0.0);
        for &i in cell {
            s += a[i - 1];
        }
        total += s.norm_sqr().powf(p / 2.0);
    }
    total
}

/// Average `(1/#P) Σ_P Σ_j |Σ_{i∈P_j} a_i|^p` over the requested family.
///
/// Exact rational output when the weights are exact, `p` is an even
/// integer and the family is fully enumerable; floating output with a
/// standard error otherwise.
pub fn avg_partition_moment(
    a: &MomentWeights,
    m: usize,
    p: f64,
    family: &PartitionFamily,
) -> Result<MomentReport> {
    let r = a.len();
    if r == 0 {
        return Err(Error::validation("empty weight vector"));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::validation(format!("moment exponent must be >= 1, got {p}")));
    }
    match family {
        PartitionFamily::Transversal(spec) | PartitionFamily::TransversalSampled { spec, .. } => {
            if spec.r() != r {
                return Err(Error::validation("transversal spec does not match weight length"));
            }
            if spec.m() != m {
                return Err(Error::validation("transversal spec group count != M"));
            }
        }
        _ => {
            if !r.is_multiple_of(m) {
                return Err(Error::validation(format!("M={m} must divide R={r}")));
            }
        }
    }

    let family_size = match family {
        PartitionFamily::All | PartitionFamily::Sampled { .. } => count_partitions(r, m)?,
        PartitionFamily::Transversal(spec)
        | PartitionFamily::TransversalSampled { spec, .. } => count_transversal(spec),
    };

    // exact route
    if let (MomentWeights::Exact(av), Some(pe)) = (a, even_exponent(p)) {
        let enumerable = family_size <= BigUint::from(ENUM_CAP);
        match family {
            PartitionFamily::All if enumerable => {
                let mut total = BigRational::zero();
                let mut n = 0u64;
                for part in enumerate_partitions(r, m)? {
                    total += exact_partition_stat(&part, av, pe / 2);
                    n += 1;
                }
                let avg = total / BigRational::from_integer(n.into());
                return Ok(MomentReport {
                    r,
                    m,
                    p,
                    family: family.label(),
                    family_size,
                    average: MomentValue::Exact(avg),
                    bound: None,
                    ratio: None,
                    seed: None,
                });
            }
            PartitionFamily::Transversal(spec) if enumerable => {
                let mut total = BigRational::zero();
                let mut n = 0u64;
                for part in enumerate_transversal(spec)? {
                    total += exact_partition_stat(&part, av, pe / 2);
                    n += 1;
                }
                let avg = total / BigRational::from_integer(n.into());
                return Ok(MomentReport {
                    r,
                    m,
                    p,
                    family: family.label(),
                    family_size,
                    average: MomentValue::Exact(avg),
                    bound: None,
                    ratio: None,
                    seed: None,
                });
            }
            _ => {}
        }
    }

    // floating route
    let ac = a.to_complex();
    let average = match family {
        PartitionFamily::All => {
            let mut total = 0.0;
            let mut n = 0u64;
            for part in enumerate_partitions(r, m)? {
                total += float_partition_stat(&part, &ac, p);
                n += 1;
            }
            MomentValue::Approx {
                value: total / n as f64,
                std_error: 0.0,
            }
        }
        PartitionFamily::Transversal(spec) => {
            let mut total = 0.0;
            let mut n = 0u64;
            for part in enumerate_transversal(spec)? {
                total += float_partition_stat(&part, &ac, p);
                n += 1;
            }
            MomentValue::Approx {
                value: total / n as f64,
                std_error: 0.0,
            }
        }
        PartitionFamily::Sampled { seed, draws } => {
            if *draws < 2 {
                return Err(Error::validation("sampled moments need at least 2 draws"));
            }
            let mut rng = stream_rng(*seed, 0);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..*draws {
                let part = sample_partition(r, m, &mut rng)?;
                let v = float_partition_stat(&part, &ac, p);
                sum += v;
                sum_sq += v * v;
            }
            let n = *draws as f64;
            let mean = sum / n;
            let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
            MomentValue::Approx {
                value: mean,
                std_error: (var / n).sqrt(),
            }
        }
        PartitionFamily::TransversalSampled { spec, seed, draws } => {
            if *draws < 2 {
                return Err(Error::validation("sampled moments need at least 2 draws"));
            }
            let mut rng = stream_rng(*seed, 0);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..*draws {
                let part = sample_transversal(spec, &mut rng);
                let v = float_partition_stat(&part, &ac, p);
                sum += v;
                sum_sq += v * v;
            }
            let n = *draws as f64;
            let mean = sum / n;
            let var = ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0);
            MomentValue::Approx {
                value: mean,
                std_error: (var / n).sqrt(),
            }
        }
    };
    Ok(MomentReport {
        r,
        m,
        p,
        family: family.label(),
        family_size,
        average,
        bound: None,
        ratio: None,
        seed: family.seed(),
    })
}

/// Both sides of the exact averaged `L²` identity.
#[derive(Debug, Clone)]
pub struct L2Identity {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub equal: bool,
}

/// Check, in exact rational arithmetic, that
/// `(1/#P) Σ_P Σ_j |Σ_{i∈P_j} a_i|² = (R-M)/(R-1)·Σ|a_i|² + (M-1)/(R-1)·|Σ a_i|²`.
pub fn l2_identity_check(a: &[GaussRat], m: usize) -> Result<L2Identity> {
    let r = a.len();
    if r < 2 {
        return Err(Error::validation("the averaged L² identity needs R >= 2"));
    }
    let report = avg_partition_moment(&MomentWeights::Exact(a.to_vec()), m, 2.0, &PartitionFamily::All)?;
    let lhs = report
        .average
        .exact()
        .ok_or_else(|| Error::validation("family too large for the exact identity"))?
        .clone();

    let sum_sq: BigRational = a.iter().map(GaussRat::norm_sqr).sum();
    let mut total = GaussRat::zero();
    for ai in a {
        total.add_assign(ai);
    }
    let total_sq = total.norm_sqr();
    let rq = |x: usize| BigRational::from_integer((x as i64).into());
    let rhs = (rq(r - m) * &sum_sq + rq(m - 1) * &total_sq) / rq(r - 1);
    let equal = lhs == rhs;
    Ok(L2Identity { lhs, rhs, equal })
}

fn moduli(a: &[Complex64]) -> Vec<f64> {
    a.iter().map(|z| z.norm()).collect()
}

/// Averaged fourth moment against the four-term bound
/// `(M/R)³S⁴ + (M/R)²·Σ|a|²·S² + (M/R)·Σ|a|³·Σ|a| + Σ|a|⁴` with
/// `S = |Σ a_i|`.
pub fn l4_bound_check(a: &MomentWeights, m: usize, family: &PartitionFamily) -> Result<MomentReport> {
    let mut report = avg_partition_moment(a, m, 4.0, family)?;
    let ac = a.to_complex();
    let r = ac.len() as f64;
    let mods = moduli(&ac);
    let s = ac.iter().sum::<Complex64>().norm();
    let q = m as f64 / r;
    let sum2: f64 = mods.iter().map(|x| x * x).sum();
    let sum3: f64 = mods.iter().map(|x| x * x * x).sum();
    let sum1: f64 = mods.iter().sum();
    let sum4: f64 = mods.iter().map(|x| x * x * x * x).sum();
    let bound = q.powi(3) * s.powi(4) + q.powi(2) * sum2 * s.powi(2) + q * sum3 * sum1 + sum4;
    if bound == 0.0 {
        return Err(Error::validation("bound vanishes (all weights zero)"));
    }
    report.ratio = Some(report.average.value() / bound);
    report.bound = Some(bound);
    Ok(report)
}

/// Averaged `p`-th moment, `2 ≤ p ≤ 4`, against the interpolated bound
/// `(M/R)^{p/2-1}·L^{p/2} + L + (M/R)^{p/2}·S^p` with `L = Σ|a_i|`,
/// `S = |Σ a_i|`. Requires `|a_i| ≤ 1`.
pub fn elp_bound_check(
    a: &MomentWeights,
    m: usize,
    p: f64,
    family: &PartitionFamily,
) -> Result<MomentReport> {
    if !(2.0..=4.0).contains(&p) {
        return Err(Error::validation(format!("elp bound needs p in [2,4], got {p}")));
    }
    let ac = a.to_complex();
    if ac.iter().any(|z| z.norm() > 1.0 + 1e-12) {
        return Err(Error::validation("elp bound requires |a_i| <= 1"));
    }
    let mut report = avg_partition_moment(a, m, p, family)?;
    let r = ac.len() as f64;
    let l: f64 = ac.iter().map(|z| z.norm()).sum();
    let s = ac.iter().sum::<Complex64>().norm();
    let q = m as f64 / r;
    let bound = q.powf(p / 2.0 - 1.0) * l.powf(p / 2.0) + l + q.powf(p / 2.0) * s.powf(p);
    if bound == 0.0 {
        return Err(Error::validation("bound vanishes (all weights zero)"));
    }
    report.ratio = Some(report.average.value() / bound);
    report.bound = Some(bound);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> MomentWeights {
        MomentWeights::gaussian_integers(&vec![(1, 0); n])
    }

    #[test]
    fn constant_weights_r4_m2_p2() {
        let report = avg_partition_moment(&ones(4), 2, 2.0, &PartitionFamily::All).unwrap();
        let exact = report.average.exact().unwrap();
        assert_eq!(exact, &BigRational::from_integer(8.into()));
    }

    #[test]
    fn cancelling_pair_gives_zero() {
        let a = MomentWeights::gaussian_integers(&[(1, 0), (-1, 0)]);
        let report = avg_partition_moment(&a, 2, 2.0, &PartitionFamily::All).unwrap();
        assert!(report.average.exact().unwrap().is_zero());
    }

    #[test]
    fn single_spike_r4_m2_p2() {
        let a = MomentWeights::gaussian_integers(&[(1, 0), (0, 0), (0, 0), (0, 0)]);
        let report = avg_partition_moment(&a, 2, 2.0, &PartitionFamily::All).unwrap();
        assert_eq!(report.average.exact().unwrap(), &BigRational::from_integer(1.into()));
    }

    #[test]
    fn l2_identity_hand_cases() {
        let a: Vec<GaussRat> = (0..4).map(|_| GaussRat::from_ints(1, 0)).collect();
        let id = l2_identity_check(&a, 2).unwrap();
        assert!(id.equal);
        assert_eq!(id.lhs, BigRational::from_integer(8.into()));

        let b = vec![GaussRat::from_ints(1, 0), GaussRat::from_ints(-1, 0)];
        let id = l2_identity_check(&b, 2).unwrap();
        assert!(id.equal);
        assert!(id.lhs.is_zero());
    }

    #[test]
    fn l4_constant_weights_ratio() {
        let report = l4_bound_check(&ones(4), 2, &PartitionFamily::All).unwrap();
        // average 32, bound 60
        assert_eq!(report.average.value(), 32.0);
        assert!((report.bound.unwrap() - 60.0).abs() < 1e-12);
        assert!((report.ratio.unwrap() - 32.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn l4_single_spike_ratio_at_most_one() {
        let a = MomentWeights::gaussian_integers(&[(2, 0), (0, 0), (0, 0), (0, 0)]);
        let report = l4_bound_check(&a, 2, &PartitionFamily::All).unwrap();
        // average = |a₁|⁴ = 16 = the final bound term
        assert_eq!(report.average.value(), 16.0);
        assert!(report.ratio.unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn elp_zero_sum_signs() {
        let a = MomentWeights::Float(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]);
        let report = elp_bound_check(&a, 2, 3.0, &PartitionFamily::All).unwrap();
        assert!(report.ratio.unwrap().is_finite());
        // S = 0 kills the third bound term; bound = (M/R)^{1/2} L^{3/2} + L
        let expect = (0.5f64).powf(0.5) * 8.0 + 4.0;
        assert!((report.bound.unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariance_exact() {
        let a = MomentWeights::gaussian_integers(&[(1, 2), (-3, 0), (0, 1), (2, -2), (1, 1), (0, 0)]);
        let b = MomentWeights::gaussian_integers(&[(0, 0), (1, 1), (2, -2), (0, 1), (-3, 0), (1, 2)]);
        for m in [1, 2, 3, 6] {
            let ra = avg_partition_moment(&a, m, 4.0, &PartitionFamily::All).unwrap();
            let rb = avg_partition_moment(&b, m, 4.0, &PartitionFamily::All).unwrap();
            assert_eq!(ra.average.exact().unwrap(), rb.average.exact().unwrap());
        }
    }
}
