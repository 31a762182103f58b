use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use entroplane::families::{
    e0_state, e1_state, sample_e0, sample_e1, E0Params, E1Params, RngStream,
};
use entroplane::measures::{chsh_max, entropic_violation};
use entroplane::plane::{
    classify_chsh, classify_entropic, eineq_lhs, ellipse_axes, entropic_region_areas, from_xy,
    frontier_mems, hyperbola_lhs, in_x_plus, linear_entropy_xy, to_xy, PlanePoint, RegionLabel,
};
use entroplane::qstate::linear_entropy;
use proptest::prelude::*;

fn e0_params() -> impl Strategy<Value = E0Params> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..(2.0 * PI)).prop_map(|(u, v, w, theta)| {
        let (a, b) = if u + v > 1.0 {
            (1.0 - u, 1.0 - v)
        } else {
            (u, v)
        };
        let c = w * (2.0 * (a * b).sqrt()).min(1.0);
        E0Params::new(a, b, c, theta).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn eineq_lhs_is_half_the_gap(p in e0_params()) {
        let gap = entropic_violation(&e0_state(&p).unwrap()).gap_a;
        let lhs = eineq_lhs(to_xy(p.a, p.b), p.c);
        prop_assert!((2.0 * lhs - gap).abs() < 1e-12, "lhs {lhs} gap {gap}");
    }

    #[test]
    fn linear_entropy_in_xy(p in e0_params()) {
        let s = linear_entropy(&e0_state(&p).unwrap());
        prop_assert!((linear_entropy_xy(to_xy(p.a, p.b), p.c) - s).abs() < 1e-12);
    }

    #[test]
    fn e0_points_lie_on_their_level_set(p in e0_params()) {
        let q = to_xy(p.a, p.b);
        prop_assert!(hyperbola_lhs(q, p.c) >= -1e-12);
        prop_assert!(q.y <= 1.0 / (3.0 * SQRT_2) + 1e-12);
        let s = linear_entropy(&e0_state(&p).unwrap());
        let e = ellipse_axes(s, p.c).unwrap();
        if e.b_axis > 1e-6 {
            let r = (q.x / e.a_axis).powi(2) + (q.y / e.b_axis).powi(2);
            prop_assert!((r - 1.0).abs() < 1e-9, "{r}");
        }
        let (a, b) = from_xy(q);
        prop_assert!((a - p.a).abs() < 1e-14 && (b - p.b).abs() < 1e-14);
    }

    #[test]
    fn e0_points_are_physical(p in e0_params()) {
        let rho = e0_state(&p).unwrap();
        prop_assume!(p.c > 1e-9);
        let s = linear_entropy(&rho);
        prop_assert!(s <= frontier_mems(p.c).unwrap() + 1e-9);
        prop_assert_ne!(classify_entropic(PlanePoint::new(p.c, s)), RegionLabel::NonPhysical);
    }

    #[test]
    fn chsh_label_bounds_the_state(p in e0_params()) {
        let rho = e0_state(&p).unwrap();
        let s = linear_entropy(&rho);
        let chsh = chsh_max(&rho);
        match classify_chsh(PlanePoint::new(p.c, s), 1e-9).unwrap() {
            RegionLabel::V => prop_assert!(chsh > 2.0),
            RegionLabel::Nv => prop_assert!(chsh < 2.0),
            _ => {}
        }
    }
}

/// Ellipse points of the level set that are genuine E0 states.
fn level_set_states(c: f64, s: f64, steps: usize) -> Vec<E0Params> {
    let e = ellipse_axes(s, c).unwrap();
    (0..steps)
        .filter_map(|k| {
            let t = 2.0 * PI * k as f64 / steps as f64;
            let q = entroplane::plane::XYPoint {
                x: e.a_axis * t.cos(),
                y: e.b_axis * t.sin(),
            };
            if !in_x_plus(q, c) || hyperbola_lhs(q, c) < 1e-12 {
                return None;
            }
            let (a, b) = from_xy(q);
            E0Params::new(a, b, c, 0.0).ok()
        })
        .collect()
}

/// Label holds in a small neighbourhood (grid points can land exactly on a
/// boundary curve).
fn interior(c: f64, s: f64, label: RegionLabel) -> bool {
    let d = 1e-9;
    [(c, s), (c - d, s), (c + d, s), (c, s - d), (c, s + d)]
        .iter()
        .all(|&(c, s)| classify_entropic(PlanePoint::new(c, s)) == label)
}

#[test]
fn zero_region_is_genuinely_mixed() {
    let mut checked = 0;
    for i in 1..60 {
        let c = i as f64 / 60.0;
        let top = frontier_mems(c).unwrap();
        for j in 0..60 {
            let s = top * (j as f64 + 0.5) / 60.0;
            if !interior(c, s, RegionLabel::Zero) {
                continue;
            }
            let gaps: Vec<f64> = level_set_states(c, s, 20_000)
                .iter()
                .map(|p| entropic_violation(&e0_state(p).unwrap()).gap_a)
                .collect();
            assert!(
                gaps.iter().any(|&g| g > 0.0),
                "no violating state at c={c}, s={s}"
            );
            assert!(
                gaps.iter().any(|&g| g <= 0.0),
                "no satisfying state at c={c}, s={s}"
            );
            checked += 1;
        }
    }
    assert!(checked > 500, "{checked}");
}

#[test]
fn v_and_nv_level_sets_are_uniform() {
    for i in 1..40 {
        let c = i as f64 / 40.0;
        let top = frontier_mems(c).unwrap();
        for j in 0..40 {
            let s = top * (j as f64 + 0.5) / 40.0;
            let label = classify_entropic(PlanePoint::new(c, s));
            for p in level_set_states(c, s, 2000) {
                let gap = entropic_violation(&e0_state(&p).unwrap()).gap_a;
                match label {
                    RegionLabel::V => assert!(gap > 0.0, "c={c} s={s} gap={gap}"),
                    RegionLabel::Nv => assert!(gap <= 1e-12, "c={c} s={s} gap={gap}"),
                    _ => {}
                }
            }
        }
    }
}

#[test]
fn eineq_curve_meets_hyperbola_at_most_twice() {
    for i in 1..200 {
        let c = FRAC_1_SQRT_2 * i as f64 / 200.0;
        // Walk the physical branch ab = c^2/4, a + b <= 1, by a.
        let k = c * c / 4.0;
        let lo = 0.5 * (1.0 - (1.0 - 4.0 * k).sqrt());
        let hi = 0.5 * (1.0 + (1.0 - 4.0 * k).sqrt());
        let n = 100_000;
        let mut crossings = 0;
        let mut prev: Option<f64> = None;
        for j in 0..=n {
            let a = lo + (hi - lo) * j as f64 / n as f64;
            let b = k / a;
            let v = eineq_lhs(to_xy(a, b), c);
            if let Some(p) = prev {
                if (p > 0.0) != (v > 0.0) {
                    crossings += 1;
                }
            }
            prev = Some(v);
        }
        assert!(crossings <= 2, "c={c}: {crossings} crossings");
    }
}

/// Independent route to the areas: classify a fine midpoint grid.
#[test]
fn quadrature_matches_grid_classification() {
    let n = 2000;
    let mut counts = [0usize; 3];
    for i in 0..n {
        let c = (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let s = (j as f64 + 0.5) / n as f64;
            match classify_entropic(PlanePoint::new(c, s)) {
                RegionLabel::V => counts[0] += 1,
                RegionLabel::Zero => counts[1] += 1,
                RegionLabel::Nv => counts[2] += 1,
                RegionLabel::NonPhysical => {}
            }
        }
    }
    let total: usize = counts.iter().sum();
    let rep = entropic_region_areas(1e-10).unwrap();
    let quad = [rep.v_percent, rep.zero_percent, rep.nv_percent];
    for k in 0..3 {
        let grid = 100.0 * counts[k] as f64 / total as f64;
        assert!(
            (grid - quad[k]).abs() < 0.05,
            "region {k}: grid {grid} vs {}",
            quad[k]
        );
    }
    let cell = 1.0 / (n * n) as f64;
    assert!((total as f64 * cell - 52.0 / 81.0).abs() < 1e-3);
    assert!((quad.iter().sum::<f64>() - 100.0).abs() < 2e-10);
}

#[test]
fn e1_points_respect_the_frontier() {
    let mut rng = RngStream::new(11, 0);
    for _ in 0..20_000 {
        let p = sample_e1(&mut rng);
        let rho = e1_state(&p).unwrap();
        let c = entroplane::measures::concurrence(&rho).concurrence;
        let s = linear_entropy(&rho);
        if c > 1e-12 {
            assert!(s <= frontier_mems(c).unwrap() + 1e-9, "c={c} s={s}");
        }
    }
    let mut rng = RngStream::new(12, 0);
    for _ in 0..20_000 {
        let p = sample_e0(&mut rng);
        assert!(E1Params::from(p).validate().is_ok());
    }
}
