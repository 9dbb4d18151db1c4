use std::hint::black_box;

use codedmv::oracle::{brute_force_q, DEFAULT_BUDGET};
use codedmv::sim::numeric::{numeric_decode, worker_products, BlockLayout};
use codedmv::sim::{run_trial, CostModel, SpeedModel};
use codedmv::{cyclic_coded, cyclic_uncoded, gen, is_decodable, mds_plan, Placement, StateVector};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn decodability(c: &mut Criterion) {
    let mut g = c.benchmark_group("is_decodable");
    for n in [5, 8, 12] {
        let plan = cyclic_coded(n, 2, 2, Placement::CodedTop).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let states: Vec<StateVector> = (0..64)
            .map(|_| gen::random_state(&plan, &mut rng))
            .collect();
        g.bench_with_input(BenchmarkId::from_parameter(n), &plan, |b, plan| {
            b.iter(|| {
                states
                    .iter()
                    .filter(|s| is_decodable(plan, s).unwrap())
                    .count()
            })
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("brute_force_q");
    g.sample_size(20);
    let plans = [
        ("uncoded-5-3", cyclic_uncoded(5, 3).unwrap()),
        (
            "bottom-5-2-1",
            cyclic_coded(5, 2, 1, Placement::CodedBottom).unwrap(),
        ),
        (
            "top-6-2-2",
            cyclic_coded(6, 2, 2, Placement::CodedTop).unwrap(),
        ),
        ("uncoded-8-3", cyclic_uncoded(8, 3).unwrap()),
    ];
    for (name, plan) in &plans {
        g.bench_with_input(BenchmarkId::from_parameter(name), plan, |b, plan| {
            b.iter(|| {
                brute_force_q(black_box(plan), DEFAULT_BUDGET)
                    .unwrap()
                    .q_true
            })
        });
    }
    g.finish();
}

fn trial(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_trial");
    let speed = SpeedModel::default();
    for n in [5, 10, 20] {
        let plan = cyclic_coded(n, 3, 2, Placement::CodedBottom).unwrap();
        let mut seed = 0u64;
        g.bench_with_input(BenchmarkId::from_parameter(n), &plan, |b, plan| {
            b.iter(|| {
                seed += 1;
                run_trial(plan, &speed, &CostModel::Uniform, seed)
                    .unwrap()
                    .finish_time
            })
        });
    }
    g.finish();
}

fn decode(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let plan = mds_plan(6, 2, 6).unwrap();
    let a = gen::random_matrix(600, 200, 1.0, &mut rng);
    let x = DVector::from_element(200, 1.0);
    let state = StateVector::new(vec![1, 1, 1, 1, 1, 1]);
    let products = worker_products(&plan, &a, &x, &state).unwrap();
    let layout = BlockLayout::new(600, 6).unwrap();
    c.bench_function("numeric_decode/mds-6-2-6", |b| {
        b.iter(|| numeric_decode(&plan, &layout, black_box(&products)).unwrap())
    });
}

criterion_group!(benches, decodability, oracle, trial, decode);
criterion_main!(benches);
