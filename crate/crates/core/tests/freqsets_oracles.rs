//! Oracle checks for the frequency set generators: independent lattice
//! enumeration, partition cell audits, and the statistics of the
//! randomized tight selection.

use declab::freqsets::{
    canonical_caps, cap_concentrated_subset, equal_measure_partition, lattice_annulus,
    lattice_sphere, lift_paraboloid, moment_curve_points, tight_random_select, FrequencyPoint,
    FrequencySet, Surface,
};

/// Independent representation count by brute-force nested loops.
fn oracle_sphere_count(n: u64, d: usize) -> usize {
    let b = (n as f64).sqrt() as i64 + 1;
    let n = n as i64;
    let mut count = 0usize;
    match d {
        3 => {
            for a in -b..=b {
                for bb in -b..=b {
                    for c in -b..=b {
                        if a * a + bb * bb + c * c == n {
                            count += 1;
                        }
                    }
                }
            }
        }
        4 => {
            for a in -b..=b {
                for bb in -b..=b {
                    for c in -b..=b {
                        for e in -b..=b {
                            if a * a + bb * bb + c * c + e * e == n {
                                count += 1;
                            }
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    count
}

#[test]
fn lattice_sphere_matches_oracle_d3() {
    for n in 1..=200u64 {
        let set = lattice_sphere(n, 3).unwrap();
        assert_eq!(
            set.len(),
            oracle_sphere_count(n, 3),
            "count mismatch at N={n}, d=3"
        );
        for p in &set.points {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn lattice_sphere_matches_oracle_d4() {
    for n in 1..=100u64 {
        let set = lattice_sphere(n, 4).unwrap();
        assert_eq!(
            set.len(),
            oracle_sphere_count(n, 4),
            "count mismatch at N={n}, d=4"
        );
    }
}

#[test]
fn generators_are_deterministic_byte_for_byte() {
    let a = lift_paraboloid(&canonical_caps(144.0, 3).unwrap()).to_json();
    let b = lift_paraboloid(&canonical_caps(144.0, 3).unwrap()).to_json();
    assert_eq!(a, b);

    let a = lattice_annulus(37.0).unwrap().rescaled.to_json();
    let b = lattice_annulus(37.0).unwrap().rescaled.to_json();
    assert_eq!(a, b);

    let a = moment_curve_points(4096.0, 4).unwrap().to_json();
    let b = moment_curve_points(4096.0, 4).unwrap().to_json();
    assert_eq!(a, b);

    let cells = equal_measure_partition(Surface::Circle, 0.02).unwrap();
    let a = tight_random_select(&cells, 36.0, 6.0, 99).unwrap().set.to_json();
    let b = tight_random_select(&cells, 36.0, 6.0, 99).unwrap().set.to_json();
    assert_eq!(a, b);
}

#[test]
fn csv_round_trip_preserves_bits() {
    let set = lift_paraboloid(&canonical_caps(100.0, 2).unwrap());
    let csv = set.to_csv();
    for (line, point) in csv.lines().skip(1).zip(&set.points) {
        for (field, coord) in line.split(',').zip(&point.coords) {
            let parsed: f64 = field.parse().unwrap();
            assert_eq!(parsed.to_bits(), coord.to_bits());
        }
    }
}

#[test]
fn sphere_partition_certifies_contract() {
    use declab::freqsets::SurfaceCell;
    let p = equal_measure_partition(Surface::Sphere2, 0.25).unwrap();
    let want = p.cell_measure;
    for c in &p.cells {
        let m = c.measure(&Surface::Sphere2);
        assert!((m - want).abs() <= 1e-12 * want);
        assert!(c.diameter_bound(&Surface::Sphere2) <= 0.25);
    }
    // cells tile the sphere: collars stack in z without gaps, and the
    // azimuthal pieces of each collar tile [0, 2π)
    let mut collar_map: std::collections::HashMap<u64, (f64, f64, Vec<(f64, f64)>)> =
        std::collections::HashMap::new();
    for c in &p.cells {
        let SurfaceCell::Patch { z_lo, z_hi, phi_lo, phi_hi } = c else {
            panic!("sphere cells are patches")
        };
        let entry = collar_map
            .entry(z_lo.to_bits())
            .or_insert((*z_lo, *z_hi, Vec::new()));
        entry.2.push((*phi_lo, *phi_hi));
    }
    let mut collars: Vec<(f64, f64, Vec<(f64, f64)>)> = collar_map.into_values().collect();
    collars.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut z_cursor = -1.0f64;
    for (z_lo, z_hi, mut phis) in collars {
        assert!((z_lo - z_cursor).abs() < 1e-12, "z gap at {z_lo}");
        z_cursor = z_hi;
        phis.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut phi_cursor = 0.0f64;
        for (lo, hi) in phis {
            assert!((lo - phi_cursor).abs() < 1e-9, "phi gap at {lo}");
            phi_cursor = hi;
        }
        assert!((phi_cursor - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }
    assert!((z_cursor - 1.0).abs() < 1e-12);
}

#[test]
fn tight_select_kept_counts_stay_in_window() {
    let cells = equal_measure_partition(Surface::Circle, 2.0 * std::f64::consts::PI / 1000.0)
        .unwrap();
    assert_eq!(cells.len(), 1000);
    // N·δ = 10 at R = 100, p = 8 (d = 2): window [5, 15]
    for seed in 0..200u64 {
        let sel = tight_random_select(&cells, 100.0, 8.0, seed * 7919 + 1).unwrap();
        let kept = sel.set.len();
        assert!((5..=15).contains(&kept), "seed {seed}: kept {kept}");
    }
}

#[test]
fn tight_select_mean_kept_matches_expectation() {
    let cells = equal_measure_partition(Surface::Circle, 2.0 * std::f64::consts::PI / 1000.0)
        .unwrap();
    let n_seeds = 1000u64;
    let mut total = 0usize;
    for seed in 0..n_seeds {
        total += tight_random_select(&cells, 100.0, 8.0, seed).unwrap().set.len();
    }
    let mean = total as f64 / n_seeds as f64;
    let expected = 10.0;
    let std_error = (expected * (1.0 - 0.01) / n_seeds as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 5.0 * std_error,
        "mean kept {mean} vs {expected} ± {}",
        5.0 * std_error
    );
}

#[test]
fn tight_select_rejection_frequency_is_chebyshic() {
    // first-attempt rejection frequency over many seeds stays well below
    // the Chebyshev budget 4/(Nδ) + margin = 0.4 + margin
    let cells = equal_measure_partition(Surface::Circle, 2.0 * std::f64::consts::PI / 1000.0)
        .unwrap();
    let n_seeds = 10_000u64;
    let mut rejected_first = 0usize;
    for seed in 0..n_seeds {
        let sel = tight_random_select(&cells, 100.0, 8.0, seed).unwrap();
        if sel.attempt_counts.len() > 1 || !sel.in_window(sel.attempt_counts[0]) {
            rejected_first += 1;
        }
    }
    let freq = rejected_first as f64 / n_seeds as f64;
    assert!(freq <= 0.4 + 0.05, "rejection frequency {freq}");
}

#[test]
fn concentrated_cap_density_on_equispaced_parabola() {
    let n = 500usize;
    let points: Vec<FrequencyPoint> = (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n as f64;
            FrequencyPoint { coords: vec![t, t * t] }
        })
        .collect();
    let set = FrequencySet::new(2, points, "equispaced parabola").unwrap();
    let r = 1e4;
    let subset = cap_concentrated_subset(&set, r).unwrap();
    // expected ≈ N·R^{-1/2}/|domain| = 5, within a factor of 2
    let expect = n as f64 * r.powf(-0.5);
    let got = subset.len() as f64;
    assert!(
        got >= expect / 2.0 && got <= expect * 2.0,
        "{got} points vs expected ≈ {expect}"
    );
}

#[test]
fn annulus_banded_scan_matches_full_scan() {
    for r in [4.0f64, 5.0, 9.5, 17.0, 33.3, 64.0, 100.0, 145.7] {
        let fast: Vec<Vec<i64>> = lattice_annulus(r).unwrap().raw.meta.int_points.unwrap();
        let width = 1.0 / r.sqrt();
        let bound = (r + width).ceil() as i64;
        let mut slow: Vec<Vec<i64>> = Vec::new();
        for a in -bound..=bound {
            for b in -bound..=bound {
                let norm = ((a * a + b * b) as f64).sqrt();
                if (norm - r).abs() <= width {
                    slow.push(vec![a, b]);
                }
            }
        }
        slow.sort();
        assert_eq!(fast, slow, "banded scan diverges at R={r}");
    }
}

#[test]
fn annulus_scalings_are_consistent() {
    let a = lattice_annulus(64.0).unwrap();
    assert_eq!(a.raw.len(), a.rescaled.len());
    for (raw, scaled) in a.raw.points.iter().zip(&a.rescaled.points) {
        for (x, y) in raw.coords.iter().zip(&scaled.coords) {
            assert_eq!(*x / 64.0, *y);
        }
    }
}
