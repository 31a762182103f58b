use std::f64::consts::PI;

use entroplane::families::{
    e0_state, e1_state, sample_e1, sample_full_rank, sample_separable, E0Params, E1Params,
    RngStream,
};
use entroplane::matcore::{hermitian_eigen, matrix_sqrt_psd, JACOBI_TOL};
use entroplane::measures::{
    chsh_max, concurrence, conditional_renyi, conditional_tsallis, entropic_violation, renyi,
    tsallis, von_neumann,
};
use entroplane::qstate::{
    format_density, linear_entropy, partial_trace_a_out, partial_trace_b_out, purity, DensityMatrix,
};
use proptest::prelude::*;

fn e1_params() -> impl Strategy<Value = (E1Params, f64, f64)> {
    (
        prop::array::uniform3(0.0..1.0f64),
        0.0..1.0f64,
        0.0..1.0f64,
        0.0..(2.0 * PI),
        0.0..(2.0 * PI),
        0.0..(2.0 * PI),
        0.0..(2.0 * PI),
    )
        .prop_map(|(mut cuts, u, v, t1, p1, t2, p2)| {
            cuts.sort_by(f64::total_cmp);
            let (a, b, f) = (cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1]);
            let g = 1.0 - a - b - f;
            let c = u * (2.0 * (a * b).sqrt()).min(1.0);
            let d = v * (2.0 * (f * g.max(0.0)).sqrt()).min(1.0);
            (E1Params::new(a, b, f, c, d, t1, p1).unwrap(), t2, p2)
        })
}

fn invariants(rho: &DensityMatrix) -> [f64; 6] {
    [
        concurrence(rho).concurrence,
        linear_entropy(rho),
        purity(rho),
        von_neumann(rho),
        renyi(rho, 2.0).unwrap().value,
        chsh_max(rho),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn phases_do_not_matter((p, theta, phi) in e1_params()) {
        let base = invariants(&e1_state(&p).unwrap());
        let moved = E1Params { theta, phi, ..p };
        let other = invariants(&e1_state(&moved).unwrap());
        for (x, y) in base.iter().zip(other) {
            prop_assert!((x - y).abs() < 1e-10, "{base:?} vs {other:?}");
        }
        let e0 = E0Params::new(p.a, p.b, p.c, p.theta).unwrap();
        let e0b = E0Params::new(p.a, p.b, p.c, theta).unwrap();
        let (x, y) = (invariants(&e0_state(&e0).unwrap()), invariants(&e0_state(&e0b).unwrap()));
        for (u, v) in x.iter().zip(y) {
            prop_assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn gaps_and_conditionals_agree((p, _, _) in e1_params()) {
        let rho = e1_state(&p).unwrap();
        let gap = entropic_violation(&rho).gap_a;
        let r = conditional_renyi(&rho, 2.0).unwrap();
        let t = conditional_tsallis(&rho, 2.0).unwrap();
        if gap.abs() > 1e-12 {
            prop_assert_eq!(r < 0.0, gap > 0.0);
            prop_assert_eq!(t < 0.0, gap > 0.0);
        }
    }

    #[test]
    fn entropies_are_bounded(seed in any::<u64>()) {
        let rho = sample_full_rank(&mut RngStream::new(seed, 0));
        let s = von_neumann(&rho);
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&s));
        let r2 = renyi(&rho, 2.0).unwrap().value;
        prop_assert!(r2 <= s + 1e-12, "Renyi entropies decrease in alpha");
        prop_assert!(tsallis(&rho, 2.0).unwrap() >= -1e-12);
        let sl = linear_entropy(&rho);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&sl));
    }

    #[test]
    fn reduced_states_are_consistent(seed in any::<u64>()) {
        let rho = sample_full_rank(&mut RngStream::new(seed, 1));
        let a = partial_trace_b_out(&rho);
        let b = partial_trace_a_out(&rho);
        prop_assert!((a.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!((b.matrix().trace().re - 1.0).abs() < 1e-12);
        // Araki-Lieb: |S_A - S_B| <= S.
        let (sa, sb, s) = (von_neumann(&a), von_neumann(&b), von_neumann(&rho));
        prop_assert!((sa - sb).abs() <= s + 1e-10);
    }

    #[test]
    fn text_format_roundtrips(seed in any::<u64>()) {
        let rho = sample_full_rank(&mut RngStream::new(seed, 2));
        let back: DensityMatrix = format_density(&rho).parse().unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) == 0.0);
    }

    #[test]
    fn sqrt_squares_back(seed in any::<u64>()) {
        let rho = sample_full_rank(&mut RngStream::new(seed, 3));
        let r = matrix_sqrt_psd(rho.matrix()).unwrap();
        prop_assert!((&r * &r).max_abs_diff(rho.matrix()) < 1e-12);
        let e = hermitian_eigen(rho.matrix(), JACOBI_TOL).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(rho.matrix()) < 1e-12);
    }
}

#[test]
fn renyi_is_continuous_at_one() {
    let mut rng = RngStream::new(5, 0);
    for k in 0..1000 {
        let rho = match k % 3 {
            0 => sample_full_rank(&mut rng),
            1 => sample_separable(&mut rng),
            _ => e1_state(&sample_e1(&mut rng)).unwrap(),
        };
        let s = von_neumann(&rho);
        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            let r = renyi(&rho, alpha).unwrap().value;
            assert!((r - s).abs() < 1e-3, "alpha {alpha}: {r} vs {s}");
        }
    }
}

#[test]
fn concurrence_is_bounded_and_pure_states_match_tangle() {
    let mut rng = RngStream::new(6, 0);
    for _ in 0..2000 {
        let rho = sample_full_rank(&mut rng);
        let c = concurrence(&rho).concurrence;
        assert!((0.0..=1.0 + 1e-12).contains(&c));
    }
    // Pure states: C = 2 |alpha delta - beta gamma|.
    for _ in 0..2000 {
        let amp = [0; 4].map(|_| num_complex::Complex64::new(rng.normal(), rng.normal()));
        let n = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amp = amp.map(|z| z / n);
        let rho = DensityMatrix::pure(amp).unwrap();
        let want = 2.0 * (amp[0] * amp[3] - amp[1] * amp[2]).norm();
        assert!((concurrence(&rho).concurrence - want).abs() < 1e-9);
    }
}
