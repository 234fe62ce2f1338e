use hybcu::mixing::{
    certify_p_condition, construct_w, sdp_objective, solve_mixing_sdp, validate_w, MixingPlan,
};
use hybcu::model::gen_qp;
use proptest::prelude::*;

#[test]
fn four_blocks_linearized() {
    let s = solve_mixing_sdp(4, &[true; 4], &[]).unwrap();
    assert!((s.sigma - 1.8711).abs() < 1e-3, "{s:?}");
    let w = construct_w(&s.u);
    let want = [(1, 0, 0.5353), (2, 0, 0.0705), (2, 1, 0.5353), (3, 0, -0.3942), (3, 1, 0.0705), (3, 2, 0.5353)];
    for (i, j, v) in want {
        assert!((w.get(i, j) - v).abs() < 1e-3, "w[{i}][{j}] = {}", w.get(i, j));
    }
}

#[test]
fn forty_blocks_linearized() {
    let s = solve_mixing_sdp(40, &[true; 40], &[]).unwrap();
    assert!((s.sigma - 18.3273).abs() < 1e-2, "{}", s.sigma);
}

#[test]
fn optimum_beats_jacobi_and_certifies() {
    for m in [3usize, 4, 40] {
        let d = vec![true; m];
        let s = solve_mixing_sdp(m, &d, &[]).unwrap();
        assert!(s.sigma < m as f64);
        assert!(s.certificate <= s.sigma + 1e-6);
        assert!((sdp_objective(&s.u, &d).unwrap() - s.certificate).abs() < 1e-12);
    }
}

#[test]
fn certify_passes_just_above_optimum() {
    let mut seed = 0;
    for m in 2..=6usize {
        let d = vec![true; m];
        let (plan, sol) = MixingPlan::solve(d.clone(), &[]).unwrap();
        let (plan0, _) = MixingPlan::solve(vec![false; m], &[]).unwrap();
        for _ in 0..5 {
            seed += 1;
            let per = 60 / m;
            let n = per * m;
            let q = gen_qp(n / 3, n, m, seed).unwrap();
            let dd = sol.sigma.max(0.0) + 1e-3;
            let c = certify_p_condition(&q, &plan, 1.0, dd).unwrap();
            assert!(c.ok, "m = {m}, seed = {seed}: {c:?}");
            let c0 = certify_p_condition(&q, &plan0, 0.7, plan0.d_max + 1e-3).unwrap();
            assert!(c0.ok, "D = 0, m = {m}, seed = {seed}: {c0:?}");
        }
    }
}

proptest! {
    #[test]
    fn constructed_w_validates(u in prop::collection::vec(-3.0f64..3.0, 1..8)) {
        let w = construct_w(&u);
        let check = validate_w(&w);
        prop_assert!(check.ok);
        let rec = check.u.unwrap();
        for k in 0..u.len() {
            prop_assert!(((rec[k] - rec[0]) - (u[k] - u[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn w_is_translation_invariant(
        ticks in prop::collection::vec(-4096i32..4096, 1..8),
        c in prop::sample::select(vec![-2.0f64, -0.5, 0.25, 1.0, 4.0]),
    ) {
        // u on a dyadic grid so that u + c and every difference are exact
        let u: Vec<f64> = ticks.iter().map(|&t| t as f64 / 1024.0).collect();
        let shifted: Vec<f64> = u.iter().map(|v| v + c).collect();
        prop_assert_eq!(construct_w(&u), construct_w(&shifted));
    }
}
