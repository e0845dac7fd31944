//! Lattice point enumeration: spheres `|n|² = N` in `Z^d` and the thin
//! annulus `| ‖n‖ − R | ≤ R^{-1/2}` in `Z²`.
//!
//! Enumeration is direct (no sieving) and emits points in lexicographic
//! order, which fixes the determinism contract even if the search range is
//! ever partitioned across threads.

use crate::error::{Error, Result};
use crate::freqsets::{FrequencyPoint, FrequencySet};

/// Default bound on `N` for sphere enumeration.
pub const LATTICE_SPHERE_MAX_N: u64 = 1_000_000;

/// All `n ∈ Z^d` with `|n|² = N`, returned rescaled to the unit sphere
/// (`n/√N`); the raw integer vectors are kept in `meta.int_points`.
///
/// An empty result is valid (e.g. `N = 7`, `d = 3`).
pub fn lattice_sphere(n: u64, d: usize) -> Result<FrequencySet> {
    if !(d == 3 || d == 4) {
        return Err(Error::validation(format!("lattice_sphere supports d in {{3,4}}, got {d}")));
    }
    if n == 0 {
        return Err(Error::validation("lattice_sphere needs N >= 1"));
    }
    if n > LATTICE_SPHERE_MAX_N {
        return Err(Error::refusal(format!(
            "lattice_sphere N={n} exceeds bound {LATTICE_SPHERE_MAX_N}"
        )));
    }
    let mut ints: Vec<Vec<i64>> = Vec::new();
    let bound = (n as f64).sqrt() as i64 + 1;
    match d {
        3 => {
            for a in -bound..=bound {
                let ra = n as i64 - a * a;
                if ra < 0 {
                    continue;
                }
                for b in -bound..=bound {
                    let rb = ra - b * b;
                    if rb < 0 {
                        continue;
                    }
                    if let Some(c) = exact_sqrt(rb) {
                        if c == 0 {
                            ints.push(vec![a, b, 0]);
                        } else {
                            ints.push(vec![a, b, -c]);
                            ints.push(vec![a, b, c]);
                        }
                    }
                }
            }
        }
        4 => {
            for a in -bound..=bound {
                let ra = n as i64 - a * a;
                if ra < 0 {
                    continue;
                }
                for b in -bound..=bound {
                    let rb = ra - b * b;
                    if rb < 0 {
                        continue;
                    }
                    for c in -bound..=bound {
                        let rc = rb - c * c;
                        if rc < 0 {
                            continue;
                        }
                        if let Some(e) = exact_sqrt(rc) {
                            if e == 0 {
                                ints.push(vec![a, b, c, 0]);
                            } else {
                                ints.push(vec![a, b, c, -e]);
                                ints.push(vec![a, b, c, e]);
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    ints.sort();
    let sqrt_n = (n as f64).sqrt();
    let points: Vec<FrequencyPoint> = ints
        .iter()
        .map(|v| FrequencyPoint {
            coords: v.iter().map(|&x| x as f64 / sqrt_n).collect(),
        })
        .collect();
    let mut set = FrequencySet::new_allow_empty(d, points, format!("lattice-sphere N={n} d={d}"))?;
    set.meta.int_points = Some(ints);
    Ok(set)
}

fn exact_sqrt(x: i64) -> Option<i64> {
    debug_assert!(x >= 0);
    let r = (x as f64).sqrt().round() as i64;
    ((r - 1).max(0)..=r + 1).find(|&c| c * c == x)
}

/// Lattice points in the thin annulus around radius `R`, at both scalings.
#[derive(Debug, Clone)]
pub struct AnnulusSet {
    /// Raw integer points (magnitude ≈ R), for torus experiments.
    pub raw: FrequencySet,
    /// Points rescaled by `1/R` (magnitude ≈ 1), for ball experiments.
    pub rescaled: FrequencySet,
}

impl AnnulusSet {
    pub fn count(&self) -> usize {
        self.raw.len()
    }
}

/// Enumerate `n ∈ Z²` with `| ‖n‖₂ − R | ≤ R^{-1/2}`.
///
/// Every rescaled point `ρ` then satisfies `| ‖ρ‖ − 1 | ≤ R^{-3/2}`.
/// An empty annulus is valid. For each first coordinate only the `|b|`
/// band around the annulus is scanned, so the cost is linear in `R`.
pub fn lattice_annulus(r: f64) -> Result<AnnulusSet> {
    if !(r.is_finite() && r >= 4.0) {
        return Err(Error::validation(format!("lattice_annulus needs R >= 4, got {r}")));
    }
    if r > 1e8 {
        // beyond this, f64 can no longer resolve ‖n‖ − R against R^{-1/2}
        return Err(Error::refusal(format!("lattice_annulus supports R <= 1e8, got {r}")));
    }
    let width = 1.0 / r.sqrt();
    let hi = r + width;
    let lo = r - width;
    let bound = hi.ceil() as i64;
    let mut ints: Vec<Vec<i64>> = Vec::new();
    for a in -bound..=bound {
        let a2 = (a * a) as f64;
        if a2 > hi * hi {
            continue;
        }
        let bmax = (hi * hi - a2).sqrt().floor() as i64 + 1;
        let bmin = if lo * lo > a2 {
            ((lo * lo - a2).sqrt().floor() as i64 - 1).max(0)
        } else {
            0
        };
        for b in bmin..=bmax {
            let norm = ((a * a + b * b) as f64).sqrt();
            if (norm - r).abs() <= width {
                ints.push(vec![a, b]);
                if b != 0 {
                    ints.push(vec![a, -b]);
                }
            }
        }
    }
    ints.sort();
    let raw_points: Vec<FrequencyPoint> = ints
        .iter()
        .map(|v| FrequencyPoint {
            coords: v.iter().map(|&x| x as f64).collect(),
        })
        .collect();
    let rescaled_points: Vec<FrequencyPoint> = ints
        .iter()
        .map(|v| FrequencyPoint {
            coords: v.iter().map(|&x| x as f64 / r).collect(),
        })
        .collect();
    let mut raw = FrequencySet::new_allow_empty(2, raw_points, format!("annulus-raw R={r}"))?;
    raw.meta.int_points = Some(ints.clone());
    let mut rescaled =
        FrequencySet::new_allow_empty(2, rescaled_points, format!("annulus-rescaled R={r}"))?;
    rescaled.meta.int_points = Some(ints);
    Ok(AnnulusSet { raw, rescaled })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_n1_d3_is_unit_vectors() {
        let s = lattice_sphere(1, 3).unwrap();
        assert_eq!(s.len(), 6);
        for p in &s.points {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_n2_d3_has_12_points() {
        assert_eq!(lattice_sphere(2, 3).unwrap().len(), 12);
    }

    #[test]
    fn sphere_n7_d3_is_empty() {
        let s = lattice_sphere(7, 3).unwrap();
        assert_eq!(s.len(), 0);
    }

    #[test]
    fn annulus_r5_contains_pythagorean_points() {
        let a = lattice_annulus(5.0).unwrap();
        let ints = a.raw.meta.int_points.as_ref().unwrap();
        for p in [[3, 4], [4, 3], [5, 0], [0, -5], [-3, -4]] {
            assert!(ints.contains(&p.to_vec()), "missing {p:?}");
        }
        let exactly_norm5 = ints
            .iter()
            .filter(|v| v[0] * v[0] + v[1] * v[1] == 25)
            .count();
        assert_eq!(exactly_norm5, 12);
        // rescaled points stay within R^{-3/2} of the unit circle
        let tol = 5.0_f64.powf(-1.5) * (1.0 + 1e-12);
        for p in &a.rescaled.points {
            assert!((p.norm() - 1.0).abs() <= tol);
        }
    }

    #[test]
    fn annulus_r100_count_is_reasonable() {
        let a = lattice_annulus(100.0).unwrap();
        let c = a.count() as f64;
        assert!(c >= 1.0);
        // diagnostic bound: C·√R·polylog with a generous C
        let r = 100.0_f64;
        assert!(c <= 40.0 * r.sqrt() * (1.0 + r.ln()).powi(2));
    }
}
