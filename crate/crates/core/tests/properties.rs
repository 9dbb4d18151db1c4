use codedmv::gen::{
    random_matrix, random_plan, random_state, random_uncoded, random_uncoded_params,
};
use codedmv::oracle::{brute_force_q, straggler_resilience, uncoded_q_fast, DEFAULT_BUDGET};
use codedmv::sim::numeric::{numeric_decode, worker_products, BlockLayout};
use codedmv::sim::speed::SpeedModel;
use codedmv::sim::trial::completion_times;
use codedmv::sim::CostModel;
use codedmv::{
    bounds, cyclic_coded, cyclic_uncoded, is_decodable, AssignmentPlan, Error, Placement,
    StateVector,
};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Threshold by listing every state; no pruning, no incremental bases.
fn naive_q(plan: &AssignmentPlan) -> usize {
    let (n, ell) = (plan.n(), plan.ell());
    let mut w = vec![0usize; n];
    let mut worst = 0;
    loop {
        let s = StateVector::new(w.clone());
        if !is_decodable(plan, &s).unwrap() {
            worst = worst.max(s.total() + 1);
        }
        let mut i = 0;
        while i < n && w[i] == ell {
            w[i] = 0;
            i += 1;
        }
        if i == n {
            return worst;
        }
        w[i] += 1;
    }
}

fn small_lattice(plan: &AssignmentPlan) -> bool {
    (plan.ell() as f64 + 1.0).powi(plan.n() as i32) <= 5000.0
}

fn permuted(plan: &AssignmentPlan, perm: &[usize]) -> AssignmentPlan {
    AssignmentPlan {
        params: plan.params,
        workers: perm.iter().map(|&i| plan.workers[i].clone()).collect(),
    }
}

#[test]
fn pruned_search_matches_full_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 60 {
        let plan = random_plan(5, &mut rng);
        if !small_lattice(&plan) {
            continue;
        }
        let q = brute_force_q(&plan, DEFAULT_BUDGET).unwrap();
        assert_eq!(q.q_true, naive_q(&plan), "{:?}", plan.params);
        assert_eq!(q.worst_state.total() + 1, q.q_true);
        assert!(!is_decodable(&plan, &q.worst_state).unwrap());
        checked += 1;
    }
}

#[test]
fn decodability_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let plan = random_plan(6, &mut rng);
        for _ in 0..100 {
            let lo = random_state(&plan, &mut rng);
            let hi = StateVector::new(
                lo.0.iter()
                    .map(|&x| rng.random_range(x..=plan.ell()))
                    .collect(),
            );
            if is_decodable(&plan, &lo).unwrap() {
                assert!(is_decodable(&plan, &hi).unwrap(), "{lo} <= {hi}");
            }
        }
    }
}

#[test]
fn threshold_ignores_worker_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let plan = random_plan(5, &mut rng);
        let mut perm: Vec<usize> = (0..plan.n()).collect();
        perm.reverse();
        perm.rotate_left(rng.random_range(0..plan.n()));
        let a = brute_force_q(&plan, DEFAULT_BUDGET).unwrap().q_true;
        let b = brute_force_q(&permuted(&plan, &perm), DEFAULT_BUDGET)
            .unwrap()
            .q_true;
        assert_eq!(a, b);
        let ra = straggler_resilience(&plan, DEFAULT_BUDGET)
            .unwrap()
            .resilience_true;
        let rb = straggler_resilience(&permuted(&plan, &perm), DEFAULT_BUDGET)
            .unwrap()
            .resilience_true;
        assert_eq!(ra, rb);
    }
}

#[test]
fn uncoded_bound_sound_and_fast_path_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (n, ell, delta, r) = random_uncoded_params(6, 3, &mut rng);
        let plan = random_uncoded(n, ell, delta, r, &mut rng);
        let q = brute_force_q(&plan, DEFAULT_BUDGET).unwrap().q_true;
        assert!(bounds::uncoded_q_bound(&plan.params).unwrap() <= q);
        assert_eq!(uncoded_q_fast(&plan).unwrap(), q);
    }
}

#[test]
fn bottom_formulas_match_oracle() {
    for n in 2..=6 {
        for r_u in 1..n {
            for ell_c in 1..=n - r_u {
                let plan = cyclic_coded(n, r_u, ell_c, Placement::CodedBottom).unwrap();
                if (plan.ell() as f64 + 1.0).powi(n as i32) > 2e5 {
                    continue;
                }
                let truth = brute_force_q(&plan, DEFAULT_BUDGET).unwrap().q_true;
                assert_eq!(bounds::coded_bottom_q(&plan.params).unwrap(), truth);
                let s = straggler_resilience(&plan, DEFAULT_BUDGET).unwrap();
                assert_eq!(
                    bounds::coded_bottom_resilience(&plan.params).unwrap(),
                    s.resilience_true,
                    "n={n} r_u={r_u} l_c={ell_c}"
                );
            }
        }
    }
}

#[test]
fn top_bound_is_a_lower_bound() {
    for n in 2..=5 {
        for r_u in 1..n {
            for ell_c in 1..=n - r_u {
                let plan = cyclic_coded(n, r_u, ell_c, Placement::CodedTop).unwrap();
                let truth = brute_force_q(&plan, DEFAULT_BUDGET).unwrap().q_true;
                let b = bounds::coded_top_q_bound(&plan.params).unwrap();
                assert!(b.q_lower <= truth, "n={n} r_u={r_u} l_c={ell_c}");
            }
        }
    }
}

#[test]
fn numeric_decode_agrees_with_field_predicate() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for sys in 0..100 {
        let plan = random_plan(5, &mut rng);
        let rows = rng.random_range(plan.delta()..=40);
        let cols = rng.random_range(1..=12);
        let a = random_matrix(rows, cols, if sys % 2 == 0 { 1.0 } else { 0.2 }, &mut rng);
        let x = DVector::from_fn(cols, |_, _| rng.random_range(-1.0..1.0));
        let truth = &a * &x;
        let layout = BlockLayout::new(rows, plan.delta()).unwrap();
        let s = random_state(&plan, &mut rng);
        let got = worker_products(&plan, &a, &x, &s).unwrap();
        match numeric_decode(&plan, &layout, &got) {
            Ok(y) => {
                assert!(is_decodable(&plan, &s).unwrap());
                assert!((&y - &truth).norm() <= 1e-9 * truth.norm().max(1e-300));
            }
            Err(Error::NotDecodable(_)) => assert!(!is_decodable(&plan, &s).unwrap()),
            Err(e) => panic!("{e} on {:?} {s}", plan.params),
        }
    }
}

#[test]
fn paired_draws_are_shared_across_plans() {
    let plans = [
        cyclic_uncoded(5, 3).unwrap(),
        cyclic_coded(5, 2, 1, Placement::CodedBottom).unwrap(),
        cyclic_coded(5, 2, 1, Placement::CodedTop).unwrap(),
    ];
    let speed = SpeedModel::default();
    for seed in 0..20 {
        let t: Vec<_> = plans
            .iter()
            .map(|p| completion_times(p, &speed, &CostModel::Uniform, seed).unwrap())
            .collect();
        assert_eq!(t[0], t[1]);
        assert_eq!(t[1], t[2]);
    }
}

proptest! {
    #[test]
    fn plan_json_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = random_plan(6, &mut rng);
        let text = plan.to_json();
        let back = AssignmentPlan::from_json(&text).unwrap();
        prop_assert_eq!(&back, &plan);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn full_state_always_decodes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = random_plan(6, &mut rng);
        prop_assert!(is_decodable(&plan, &StateVector::full(plan.n(), plan.ell())).unwrap());
    }
}
