//! Equal-measure partitions of curves and of the 2-sphere.
//!
//! One-parameter surfaces (circle, parabola arc, moment curve) are split
//! into equal parameter-measure intervals; the 2-sphere uses a zonal
//! construction: polar caps plus collars, each collar cut into an integer
//! number of equal-azimuth cells, with collar boundaries placed so that
//! every cell has the same area.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on the number of cells a partition may produce.
pub const CELL_CAP: u64 = 100_000_000;

/// Tighter cap for the sphere: beyond this, f64 boundary resolution can no
/// longer certify the 1e-12 equal-area contract.
pub const SPHERE_CELL_CAP: u64 = 20_000_000;

/// Supported surfaces. The measure is always normalized to total mass 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    /// Unit circle in `R²`, parametrized by `u ↦ (cos 2πu, sin 2πu)`.
    Circle,
    /// Parabola arc `{(u, u²): 0 ≤ u ≤ 1}` with parameter measure `du`.
    ParabolaArc,
    /// Unit 2-sphere in `R³` with normalized surface measure.
    Sphere2,
    /// Moment curve `{(u, …, u^d): 0 ≤ u ≤ 1}` with parameter measure `du`.
    MomentCurve { d: usize },
}

impl Surface {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Surface::Circle | Surface::ParabolaArc => 2,
            Surface::Sphere2 => 3,
            Surface::MomentCurve { d } => *d,
        }
    }

    /// Lipschitz bound of the parametrization (1-parameter surfaces only).
    fn lipschitz(&self) -> Option<f64> {
        match self {
            Surface::Circle => Some(2.0 * std::f64::consts::PI),
            Surface::ParabolaArc => Some(5.0_f64.sqrt()),
            Surface::MomentCurve { d } => {
                let s: f64 = (1..=*d).map(|k| (k * k) as f64).sum();
                Some(s.sqrt())
            }
            Surface::Sphere2 => None,
        }
    }

    /// Map a parameter value to the surface (1-parameter surfaces only).
    pub fn map_param(&self, u: f64) -> Vec<f64> {
        match self {
            Surface::Circle => {
                let t = 2.0 * std::f64::consts::PI * u;
                vec![t.cos(), t.sin()]
            }
            Surface::ParabolaArc => vec![u, u * u],
            Surface::MomentCurve { d } => {
                let mut coords = Vec::with_capacity(*d);
                let mut tk = 1.0;
                for _ in 0..*d {
                    tk *= u;
                    coords.push(tk);
                }
                coords
            }
            Surface::Sphere2 => panic!("sphere is not 1-parameter"),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Surface::Circle => "circle".into(),
            Surface::ParabolaArc => "parabola-arc".into(),
            Surface::Sphere2 => "sphere-2".into(),
            Surface::MomentCurve { d } => format!("moment-curve-{d}"),
        }
    }
}

/// One cell of an equal-measure partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SurfaceCell {
    /// Parameter interval `[lo, hi)` of a 1-parameter surface.
    Interval { lo: f64, hi: f64 },
    /// Spherical patch `z ∈ [z_lo, z_hi]`, `φ ∈ [phi_lo, phi_hi)`.
    Patch {
        z_lo: f64,
        z_hi: f64,
        phi_lo: f64,
        phi_hi: f64,
    },
}

impl SurfaceCell {
    /// Normalized measure of the cell.
    pub fn measure(&self, surface: &Surface) -> f64 {
        match (self, surface) {
            (SurfaceCell::Interval { lo, hi }, _) => hi - lo,
            (SurfaceCell::Patch { z_lo, z_hi, phi_lo, phi_hi }, Surface::Sphere2) => {
                (z_hi - z_lo) * (phi_hi - phi_lo) / (4.0 * std::f64::consts::PI)
            }
            _ => panic!("cell kind does not match surface"),
        }
    }

    /// Upper bound on the Euclidean diameter of the cell.
    pub fn diameter_bound(&self, surface: &Surface) -> f64 {
        match (self, surface) {
            (SurfaceCell::Interval { lo, hi }, Surface::Circle) => {
                // exact chord length of the arc
                let arc = (hi - lo) * std::f64::consts::PI; // half-angle = π Δu
                2.0 * arc.min(std::f64::consts::FRAC_PI_2).sin()
            }
            (SurfaceCell::Interval { lo, hi }, s) => (hi - lo) * s.lipschitz().unwrap(),
            (SurfaceCell::Patch { z_lo, z_hi, phi_lo, phi_hi }, Surface::Sphere2) => {
                let th_lo = z_hi.clamp(-1.0, 1.0).acos();
                let th_hi = z_lo.clamp(-1.0, 1.0).acos();
                let s_max = if th_lo <= std::f64::consts::FRAC_PI_2
                    && th_hi >= std::f64::consts::FRAC_PI_2
                {
                    1.0
                } else {
                    th_lo.sin().max(th_hi.sin())
                };
                let dphi = phi_hi - phi_lo;
                if dphi >= 2.0 * std::f64::consts::PI - 1e-12 {
                    // full ring (or polar cap): exact zone diameter over corner z values
                    let mut zs = vec![*z_lo, *z_hi];
                    if *z_lo < 0.0 && *z_hi > 0.0 {
                        zs.push(0.0);
                    }
                    let mut best = 0.0_f64;
                    for &z1 in &zs {
                        for &z2 in &zs {
                            let s1 = (1.0 - z1 * z1).max(0.0).sqrt();
                            let s2 = (1.0 - z2 * z2).max(0.0).sqrt();
                            let d2 = (s1 + s2) * (s1 + s2) + (z1 - z2) * (z1 - z2);
                            best = best.max(d2);
                        }
                    }
                    best.sqrt()
                } else {
                    // meridian chord + worst parallel chord
                    let dth = th_hi - th_lo;
                    2.0 * (dth / 2.0).sin() + 2.0 * s_max * (dphi / 2.0).sin()
                }
            }
            _ => panic!("cell kind does not match surface"),
        }
    }

    /// Deterministic representative: the parameter midpoint mapped to the
    /// surface.
    pub fn midpoint_on_surface(&self, surface: &Surface) -> Vec<f64> {
        match (self, surface) {
            (SurfaceCell::Interval { lo, hi }, s) => s.map_param(0.5 * (lo + hi)),
            (SurfaceCell::Patch { z_lo, z_hi, phi_lo, phi_hi }, Surface::Sphere2) => {
                let z = 0.5 * (z_lo + z_hi);
                let phi = 0.5 * (phi_lo + phi_hi);
                let s = (1.0 - z * z).max(0.0).sqrt();
                vec![s * phi.cos(), s * phi.sin(), z]
            }
            _ => panic!("cell kind does not match surface"),
        }
    }
}

/// Partition of a surface into cells of equal measure and bounded diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureCellPartition {
    pub surface: Surface,
    pub cells: Vec<SurfaceCell>,
    /// Common normalized measure per cell (`1/count`).
    pub cell_measure: f64,
    /// The diameter bound the construction guarantees.
    pub max_diameter: f64,
}

impl MeasureCellPartition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Exact rational cell measure for 1-parameter surfaces: `(1, count)`.
    pub fn cell_measure_exact(&self) -> Option<(u64, u64)> {
        match self.surface {
            Surface::Sphere2 => None,
            _ => Some((1, self.cells.len() as u64)),
        }
    }
}

/// Partition `surface` into cells of equal measure with diameter at most
/// `max_diameter`.
pub fn equal_measure_partition(surface: Surface, max_diameter: f64) -> Result<MeasureCellPartition> {
    if !(max_diameter.is_finite() && max_diameter > 0.0 && max_diameter <= 2.0) {
        return Err(Error::validation(format!(
            "max_diameter must lie in (0, 2], got {max_diameter}"
        )));
    }
    match surface {
        Surface::Sphere2 => sphere_partition(max_diameter),
        _ => interval_partition(surface, max_diameter),
    }
}

fn interval_partition(surface: Surface, eps: f64) -> Result<MeasureCellPartition> {
    let kappa = surface.lipschitz().expect("1-parameter surface");
    let count = (kappa / eps).ceil() as u64;
    let count = count.max(1);
    if count > CELL_CAP {
        return Err(Error::validation(format!(
            "partition would need {count} cells, cap is {CELL_CAP}"
        )));
    }
    let n = count as usize;
    let cells: Vec<SurfaceCell> = (0..n)
        .map(|i| SurfaceCell::Interval {
            lo: i as f64 / n as f64,
            hi: (i + 1) as f64 / n as f64,
        })
        .collect();
    Ok(MeasureCellPartition {
        surface,
        cells,
        cell_measure: 1.0 / n as f64,
        max_diameter: eps,
    })
}

/// Zonal equal-area partition of the unit sphere with per-cell diameter at
/// most `eps`. Starts from an area-based cell count estimate and grows it
/// until the per-cell diameter bounds verify.
fn sphere_partition(eps: f64) -> Result<MeasureCellPartition> {
    let mut n = ((36.0 * std::f64::consts::PI) / (eps * eps)).ceil() as u64;
    n = n.max(8);
    for _ in 0..60 {
        if n > SPHERE_CELL_CAP || n > CELL_CAP {
            return Err(Error::validation(format!(
                "sphere partition would need {n} cells, cap is {}",
                SPHERE_CELL_CAP.min(CELL_CAP)
            )));
        }
        let cells = build_zonal(n as usize);
        let ok = cells
            .iter()
            .all(|c| c.diameter_bound(&Surface::Sphere2) <= eps);
        if ok {
            let measure = 1.0 / n as f64;
            return Ok(MeasureCellPartition {
                surface: Surface::Sphere2,
                cells,
                cell_measure: measure,
                max_diameter: eps,
            });
        }
        n = n + n / 4 + 1;
    }
    Err(Error::refusal(format!(
        "sphere partition did not converge to diameter {eps}"
    )))
}

/// Build `n` equal-area cells: north cap, collars, south cap.
///
/// Collar boundaries are placed at z-values `1 - 2c/n` for integer
/// cumulative cell counts `c`, so the area of every cell is `4π/n` up to
/// one rounding of the boundary itself.
fn build_zonal(n: usize) -> Vec<SurfaceCell> {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    debug_assert!(n >= 8);
    let a = 4.0 * PI / n as f64; // per-cell area on the unit sphere
    // polar cap with area a: cos θ_c = 1 - a/(2π) = 1 - 2/n
    let theta_c = (1.0 - 2.0 / n as f64).clamp(-1.0, 1.0).acos();
    let ideal_collar = a.sqrt();
    let n_collars = (((PI - 2.0 * theta_c) / ideal_collar).round() as usize).max(1);
    let fitting = (PI - 2.0 * theta_c) / n_collars as f64;

    // integer cells per collar, rounding with running discrepancy
    let mut counts = Vec::with_capacity(n_collars);
    let mut acc = 0.0_f64;
    for i in 0..n_collars {
        let th_lo = theta_c + i as f64 * fitting;
        let th_hi = theta_c + (i + 1) as f64 * fitting;
        let ideal = (th_lo.cos() - th_hi.cos()) * two_pi / a;
        let k = ((ideal + acc).round() as i64).max(1) as usize;
        acc += ideal - k as f64;
        counts.push(k);
    }
    // force the total to n - 2 (two polar caps); the discrepancy is at
    // most a few cells, spread over the largest collars
    let want = n - 2;
    loop {
        let total: usize = counts.iter().sum();
        if total == want {
            break;
        }
        let idx = if total > want {
            counts
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 1)
                .max_by_key(|(_, &k)| k)
                .map(|(i, _)| i)
                .expect("a shrinkable collar exists")
        } else {
            counts
                .iter()
                .enumerate()
                .max_by_key(|(_, &k)| k)
                .map(|(i, _)| i)
                .unwrap()
        };
        if counts.iter().sum::<usize>() > want {
            counts[idx] -= 1;
        } else {
            counts[idx] += 1;
        }
    }

    // boundaries from cumulative cells; z from the nearest pole to keep
    // consecutive differences well conditioned
    let z_of = |cum: usize| -> f64 {
        if 2 * cum <= n {
            1.0 - 2.0 * cum as f64 / n as f64
        } else {
            -1.0 + 2.0 * (n - cum) as f64 / n as f64
        }
    };

    let mut cells = Vec::with_capacity(n);
    // north cap
    cells.push(SurfaceCell::Patch {
        z_lo: z_of(1),
        z_hi: 1.0,
        phi_lo: 0.0,
        phi_hi: two_pi,
    });
    let mut cum = 1usize;
    for &k in &counts {
        let z_hi = z_of(cum);
        let z_lo = z_of(cum + k);
        for j in 0..k {
            cells.push(SurfaceCell::Patch {
                z_lo,
                z_hi,
                phi_lo: two_pi * j as f64 / k as f64,
                phi_hi: two_pi * (j + 1) as f64 / k as f64,
            });
        }
        cum += k;
    }
    // south cap
    cells.push(SurfaceCell::Patch {
        z_lo: -1.0,
        z_hi: z_of(cum),
        phi_lo: 0.0,
        phi_hi: two_pi,
    });
    debug_assert_eq!(cells.len(), n);
    cells
}
