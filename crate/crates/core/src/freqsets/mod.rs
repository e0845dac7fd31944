//! Frequency point set generators.
//!
//! Everything downstream (norm estimation, decoupling ratios, tube models)
//! consumes a [`FrequencySet`]: a finite list of `d`-dimensional frequency
//! points of magnitude `O(1)` after rescaling. This module builds the sets
//! under study: the canonical cap grid on `[0,1]^{d-1}` and its paraboloid
//! lift, lattice points on spheres and in thin annuli, moment curve points,
//! equal-measure surface partitions, and randomized tight selections.
//!
//! Every generator is deterministic given its arguments (and seed where one
//! exists): identical calls produce identical point lists, byte-for-byte in
//! serialized form.

mod cells;
mod lattice;
mod select;

pub use cells::{equal_measure_partition, MeasureCellPartition, Surface, SurfaceCell};
pub use lattice::{lattice_annulus, lattice_sphere, AnnulusSet};
pub use select::{tight_random_select, TightSelection};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single frequency point in `R^d`; serializes as its bare coordinate
/// array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FrequencyPoint {
    pub coords: Vec<f64>,
}

impl FrequencyPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::validation("frequency point needs d >= 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("frequency point has non-finite coordinate"));
        }
        Ok(FrequencyPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn dist(&self, other: &FrequencyPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Optional provenance carried alongside the floating-point coordinates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SetMeta {
    /// Raw integer vectors for lattice constructions (torus experiments).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub int_points: Option<Vec<Vec<i64>>>,
    /// Non-fatal warnings recorded during construction.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

/// An ordered list of distinct frequency points with a provenance label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    pub dim: usize,
    pub label: String,
    pub points: Vec<FrequencyPoint>,
    #[serde(default)]
    pub meta: SetMeta,
}

impl FrequencySet {
    /// Construct a nonempty set; checks dimensions, finiteness and exact
    /// pairwise distinctness.
    pub fn new(dim: usize, points: Vec<FrequencyPoint>, label: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("empty frequency set"));
        }
        Self::new_allow_empty(dim, points, label)
    }

    /// Same as [`FrequencySet::new`] but an empty list is valid (lattice
    /// enumerations may legitimately return zero points).
    pub fn new_allow_empty(
        dim: usize,
        points: Vec<FrequencyPoint>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::validation("dimension must be >= 1"));
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::validation(format!(
                    "point dimension {} != set dimension {dim}",
                    p.dim()
                )));
            }
        }
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for p in &points {
            let key: Vec<u64> = p.coords.iter().map(|c| c.to_bits()).collect();
            if !seen.insert(key) {
                return Err(Error::validation("duplicate frequency point"));
            }
        }
        Ok(FrequencySet {
            dim,
            label: label.into(),
            points,
            meta: SetMeta::default(),
        })
    }

    /// Unchecked assembly, for synthetic stress inputs (e.g. deliberately
    /// repeated frequencies when probing interference extremes).
    pub fn from_parts(dim: usize, points: Vec<FrequencyPoint>, label: impl Into<String>) -> Self {
        FrequencySet {
            dim,
            label: label.into(),
            points,
            meta: SetMeta::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest absolute coordinate over all points (0 for an empty set).
    pub fn max_abs_coord(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| p.coords.iter())
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Largest Euclidean norm over all points.
    pub fn max_norm(&self) -> f64 {
        self.points.iter().fold(0.0_f64, |m, p| m.max(p.norm()))
    }

    /// Lossless JSON encoding (shortest round-trip float representation).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frequency set serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::validation(format!("bad frequency set JSON: {e}")))
    }

    /// CSV encoding, one point per row. Floats use Rust's shortest
    /// round-trip formatting, so parsing the text recovers the exact bits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (0..self.dim).map(|i| format!("coord_{i}")).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.coords.iter().map(|c| format!("{c}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// The canonical grid of `1/√R`-squares covering `[0,1]^{d-1}`.
///
/// `centers` is the complete grid of cap centers `(j+1/2)/√R` per axis in
/// lexicographic order; `spacing` is `1/√R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapGrid {
    pub r: f64,
    pub base_dim: usize,
    pub centers: Vec<Vec<f64>>,
    pub spacing: f64,
}

impl CapGrid {
    /// Caps per axis, `round(√R)`.
    pub fn caps_per_axis(&self) -> usize {
        (self.r.sqrt()).round() as usize
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Integer grid index of cap `i` along `axis`.
    pub fn axis_index(&self, i: usize, axis: usize) -> usize {
        let c = self.centers[i][axis];
        (c * self.r.sqrt() - 0.5).round() as usize
    }
}

/// Build the canonical cap grid `Q_R` for scale `R` in ambient dimension
/// `d` (caps live on `[0,1]^{d-1}`).
pub fn canonical_caps(r: f64, d: usize) -> Result<CapGrid> {
    if !(r.is_finite() && r >= 4.0) {
        return Err(Error::validation(format!("canonical caps need R >= 4, got {r}")));
    }
    if !(d == 2 || d == 3) {
        return Err(Error::validation(format!("canonical caps support d in {{2,3}}, got {d}")));
    }
    let base_dim = d - 1;
    let sqrt_r = r.sqrt();
    let m = sqrt_r.round() as usize;
    let mut centers = Vec::with_capacity(m.pow(base_dim as u32));
    match base_dim {
        1 => {
            for j in 0..m {
                centers.push(vec![(j as f64 + 0.5) / sqrt_r]);
            }
        }
        2 => {
            for i in 0..m {
                for j in 0..m {
                    centers.push(vec![(i as f64 + 0.5) / sqrt_r, (j as f64 + 0.5) / sqrt_r]);
                }
            }
        }
        _ => unreachable!(),
    }
    Ok(CapGrid {
        r,
        base_dim,
        centers,
        spacing: 1.0 / sqrt_r,
    })
}

/// Lift cap centers to the paraboloid: `c ↦ (c, |c|²)`.
///
/// The output order matches the grid's center order, one frequency per cap.
pub fn lift_paraboloid(grid: &CapGrid) -> FrequencySet {
    let dim = grid.base_dim + 1;
    let points = grid
        .centers
        .iter()
        .map(|c| {
            let mut coords = c.clone();
            coords.push(c.iter().map(|x| x * x).sum());
            FrequencyPoint { coords }
        })
        .collect();
    FrequencySet::from_parts(dim, points, format!("parabola-caps R={} d={dim}", grid.r))
}

/// Rescaled lattice points on the moment curve `(t, t², …, t^d)`,
/// `t = n/⌊R^{1/d}⌋` for `1 ≤ n ≤ ⌊R^{1/d}⌋`.
pub fn moment_curve_points(r: f64, d: usize) -> Result<FrequencySet> {
    if d < 2 {
        return Err(Error::validation("moment curve needs d >= 2"));
    }
    if !(r.is_finite() && r >= (2.0_f64).powi(d as i32)) {
        return Err(Error::validation(format!("moment curve needs R >= 2^d, got R={r} d={d}")));
    }
    // Integer-robust floor of R^(1/d).
    let mut m = r.powf(1.0 / d as f64).round() as u64;
    while m > 1 && (m as f64).powi(d as i32) > r {
        m -= 1;
    }
    while ((m + 1) as f64).powi(d as i32) <= r {
        m += 1;
    }
    let mut points = Vec::with_capacity(m as usize);
    for n in 1..=m {
        let t = n as f64 / m as f64;
        let mut coords = Vec::with_capacity(d);
        let mut tk = 1.0;
        for _ in 0..d {
            tk *= t;
            coords.push(tk);
        }
        points.push(FrequencyPoint { coords });
    }
    FrequencySet::new(d, points, format!("moment-curve R={r} d={d}"))
}

/// All points of `fset` within distance `R^{-1/2}` of the densest point.
///
/// "Densest" is the greedy choice: the point maximizing the number of
/// neighbors within `R^{-1/2}` (squared-distance comparisons, exact ties
/// broken by lowest index).
pub fn cap_concentrated_subset(fset: &FrequencySet, r: f64) -> Result<FrequencySet> {
    if fset.is_empty() {
        return Err(Error::validation("cap_concentrated_subset needs a nonempty set"));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::validation("cap_concentrated_subset needs R > 0"));
    }
    let radius2 = 1.0 / r; // (R^{-1/2})^2
    let n = fset.len();
    let mut best_idx = 0usize;
    let mut best_count = 0usize;
    for i in 0..n {
        let mut count = 0usize;
        for j in 0..n {
            let d2: f64 = fset.points[i]
                .coords
                .iter()
                .zip(&fset.points[j].coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 <= radius2 {
                count += 1;
            }
        }
        if count > best_count {
            best_count = count;
            best_idx = i;
        }
    }
    let center = fset.points[best_idx].clone();
    let points: Vec<FrequencyPoint> = fset
        .points
        .iter()
        .filter(|p| {
            let d2: f64 = p
                .coords
                .iter()
                .zip(&center.coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2 <= radius2
        })
        .cloned()
        .collect();
    FrequencySet::new(fset.dim, points, format!("{} cap-concentrated R={r}", fset.label))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caps_r4_d2() {
        let g = canonical_caps(4.0, 2).unwrap();
        assert_eq!(g.centers, vec![vec![0.25], vec![0.75]]);
        assert_eq!(g.spacing, 0.5);
    }

    #[test]
    fn caps_r16_d3() {
        let g = canonical_caps(16.0, 3).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.spacing, 0.25);
        assert_eq!(g.centers[0], vec![0.125, 0.125]);
        assert_eq!(g.centers[15], vec![0.875, 0.875]);
    }

    #[test]
    fn caps_r100_min_gap() {
        let g = canonical_caps(100.0, 2).unwrap();
        assert_eq!(g.len(), 10);
        let mut min_gap = f64::INFINITY;
        for i in 0..g.len() {
            for j in (i + 1)..g.len() {
                min_gap = min_gap.min((g.centers[i][0] - g.centers[j][0]).abs());
            }
        }
        assert!((min_gap - 0.1).abs() < 1e-12);
    }

    #[test]
    fn caps_reject_bad_args() {
        assert!(canonical_caps(3.0, 2).is_err());
        assert!(canonical_caps(16.0, 4).is_err());
    }

    #[test]
    fn lift_matches_formula() {
        let g = canonical_caps(4.0, 2).unwrap();
        let f = lift_paraboloid(&g);
        assert_eq!(f.points[0].coords, vec![0.25, 0.0625]);
        assert_eq!(f.points[1].coords, vec![0.75, 0.5625]);

        let g3 = canonical_caps(16.0, 3).unwrap();
        let f3 = lift_paraboloid(&g3);
        let mut max_last: f64 = 0.0;
        for p in &f3.points {
            let expect: f64 = p.coords[0] * p.coords[0] + p.coords[1] * p.coords[1];
            assert_eq!(p.coords[2], expect);
            max_last = max_last.max(p.coords[2]);
        }
        assert!((max_last - 2.0 * 0.875 * 0.875).abs() < 1e-15);
    }

    #[test]
    fn moment_curve_small() {
        let f = moment_curve_points(8.0, 3).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.points[0].coords, vec![0.5, 0.25, 0.125]);
        assert_eq!(f.points[1].coords, vec![1.0, 1.0, 1.0]);
        // consecutive parameter gap is exactly 1/⌊R^{1/d}⌋
        let f2 = moment_curve_points(1e4, 2).unwrap();
        assert_eq!(f2.len(), 100);
        for w in f2.points.windows(2) {
            assert!((w[1].coords[0] - w[0].coords[0] - 0.01).abs() < 1e-15);
        }
    }

    #[test]
    fn concentrated_subset_isolated_and_cluster() {
        // pairwise >= 1 apart: singleton comes back
        let iso = FrequencySet::new(
            2,
            vec![
                FrequencyPoint { coords: vec![0.0, 0.0] },
                FrequencyPoint { coords: vec![2.0, 0.0] },
                FrequencyPoint { coords: vec![0.0, 2.0] },
            ],
            "iso",
        )
        .unwrap();
        assert_eq!(cap_concentrated_subset(&iso, 4.0).unwrap().len(), 1);

        // cluster of 5 within 1e-3: all five at R=4
        let pts: Vec<FrequencyPoint> = (0..5)
            .map(|i| FrequencyPoint { coords: vec![i as f64 * 1e-4, 0.0] })
            .collect();
        let cluster = FrequencySet::new(2, pts, "cluster").unwrap();
        assert_eq!(cap_concentrated_subset(&cluster, 4.0).unwrap().len(), 5);
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let g = canonical_caps(100.0, 2).unwrap();
        let f = lift_paraboloid(&g);
        let s = f.to_json();
        let back = FrequencySet::from_json(&s).unwrap();
        assert_eq!(f, back);
    }
}
