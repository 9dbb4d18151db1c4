//! Random instances for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use nalgebra::DMatrix;

use crate::plan::{AssignmentPlan, Placement, SystemParams, Task};
use crate::schemes::{cyclic_coded, mds_plan};
use crate::state::StateVector;

/// A random valid uncoded plan `<n, l, delta, r>`: every block is held by
/// exactly `r` distinct workers, each worker holds `l` distinct blocks, and
/// block labels and per-worker orders are shuffled.
///
/// Requires `n * ell == delta * r`, `ell <= delta` and `r <= n`.
pub fn random_uncoded<R: Rng>(
    n: usize,
    ell: usize,
    delta: usize,
    r: usize,
    rng: &mut R,
) -> AssignmentPlan {
    let params = SystemParams::uncoded(n, ell, delta, r).expect("consistent parameters");
    assert!(r <= n, "replication cannot exceed the worker count");
    // Round-robin dealing of a block list repeated r times gives every
    // worker l distinct blocks; random transpositions then mix it.
    let mut workers: Vec<Vec<usize>> = vec![Vec::with_capacity(ell); n];
    for (slot, b) in (0..delta)
        .flat_map(|b| std::iter::repeat_n(b, r))
        .enumerate()
    {
        workers[slot % n].push(b);
    }
    for _ in 0..(4 * n * ell) {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a == b {
            continue;
        }
        let (i, j) = (rng.random_range(0..ell), rng.random_range(0..ell));
        let (x, y) = (workers[a][i], workers[b][j]);
        if x != y && !workers[a].contains(&y) && !workers[b].contains(&x) {
            workers[a][i] = y;
            workers[b][j] = x;
        }
    }
    let mut labels: Vec<usize> = (0..delta).collect();
    labels.shuffle(rng);
    let workers = workers
        .into_iter()
        .map(|mut w| {
            w.shuffle(rng);
            w.into_iter().map(|b| Task::Uncoded(labels[b])).collect()
        })
        .collect();
    AssignmentPlan { params, workers }
}

/// Random uncoded parameters with `n <= max_n` and `l <= max_ell`.
pub fn random_uncoded_params<R: Rng>(
    max_n: usize,
    max_ell: usize,
    rng: &mut R,
) -> (usize, usize, usize, usize) {
    loop {
        let n = rng.random_range(1..=max_n);
        let ell = rng.random_range(1..=max_ell);
        let candidates: Vec<(usize, usize)> = (1..=n)
            .filter(|r| (n * ell) % r == 0)
            .map(|r| ((n * ell) / r, r))
            .filter(|&(delta, _)| ell <= delta)
            .collect();
        if let Some(&(delta, r)) = candidates.get(rng.random_range(0..candidates.len().max(1))) {
            return (n, ell, delta, r);
        }
    }
}

/// Uniform random state for a plan.
pub fn random_state<R: Rng>(plan: &AssignmentPlan, rng: &mut R) -> StateVector {
    StateVector::new(
        (0..plan.n())
            .map(|_| rng.random_range(0..=plan.ell()))
            .collect(),
    )
}

/// A random plan of any kind with `2 <= n <= max_n`: a shuffled uncoded
/// plan, a cyclic coded plan with either placement, or an MDS plan.
pub fn random_plan<R: Rng>(max_n: usize, rng: &mut R) -> AssignmentPlan {
    let n = rng.random_range(2..=max_n.max(2));
    match rng.random_range(0..4) {
        0 => {
            let (n, ell, delta, r) = random_uncoded_params(max_n, 3, rng);
            random_uncoded(n, ell, delta, r, rng)
        }
        1 | 2 => {
            let r_u = rng.random_range(1..n);
            let ell_c = rng.random_range(1..=n - r_u);
            let placement = if rng.random_bool(0.5) {
                Placement::CodedBottom
            } else {
                Placement::CodedTop
            };
            cyclic_coded(n, r_u, ell_c, placement).expect("valid cyclic parameters")
        }
        _ => {
            let ell = rng.random_range(1..=3);
            let delta = rng.random_range(ell..=n * ell);
            mds_plan(n, ell, delta).expect("valid mds parameters")
        }
    }
}

/// `rows x cols` matrix with entries uniform in `[-1, 1)`, each kept with
/// probability `density`.
pub fn random_matrix<R: Rng>(rows: usize, cols: usize, density: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        if rng.random_bool(density) {
            rng.random_range(-1.0..1.0)
        } else {
            0.0
        }
    })
}
