//! Brute-force ground truth for a plan: its true recovery threshold, its
//! true straggler resilience, and the uncoded coverage of worker subsets.
//!
//! Decodability is monotone in the state lattice (more received rows never
//! lower the rank), so the threshold search walks workers depth-first with
//! an incrementally reduced basis and stops extending a worker as soon as
//! the basis is full. Branches whose best possible total cannot beat the
//! current worst case are skipped.

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::plan::{AssignmentPlan, Task};
use crate::state::{is_decodable, StateVector};

/// Default number of rank evaluations the searches may spend.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub q_true: usize,
    /// A non-decodable state with total `q_true - 1`.
    pub worst_state: StateVector,
    /// Row insertions spent by the search.
    pub evaluations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResilienceReport {
    pub resilience_true: usize,
    /// A set of `resilience_true + 1` workers whose absence blocks decoding.
    pub worst_straggler_set: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub q_true: usize,
    pub worst_state: StateVector,
    pub resilience_true: usize,
    pub worst_straggler_set: Vec<usize>,
}

fn insert_task(basis: &mut Echelon, task: &Task) -> bool {
    match task {
        Task::Uncoded(b) => basis.insert_unit(*b),
        Task::Coded(c) => basis.insert_sparse(c),
    }
}

fn full_basis_for(plan: &AssignmentPlan, present: impl Fn(usize) -> bool) -> Echelon {
    let mut basis = Echelon::new(plan.delta());
    for (i, tasks) in plan.workers.iter().enumerate() {
        if !present(i) {
            continue;
        }
        for t in tasks {
            insert_task(&mut basis, t);
            if basis.is_full() {
                return basis;
            }
        }
    }
    basis
}

fn lattice_size(plan: &AssignmentPlan) -> u128 {
    (plan.ell() as u128 + 1).saturating_pow(plan.n() as u32)
}

struct ThresholdSearch<'a> {
    plan: &'a AssignmentPlan,
    budget: u64,
    evaluations: u64,
    best: Option<(usize, Vec<usize>)>,
    current: Vec<usize>,
}

impl ThresholdSearch<'_> {
    fn visit(&mut self, worker: usize, basis: &Echelon, total: usize) -> Result<()> {
        let n = self.plan.n();
        let ell = self.plan.ell();
        if worker == n {
            // Only non-full bases reach a leaf.
            if self.best.as_ref().is_none_or(|(t, _)| total > *t) {
                self.best = Some((total, self.current.clone()));
            }
            return Ok(());
        }
        // chain[k] = basis after this worker's first k tasks
        let mut chain = Vec::with_capacity(ell + 1);
        chain.push(basis.clone());
        for task in &self.plan.workers[worker] {
            let mut next = chain.last().expect("non-empty").clone();
            self.evaluations += 1;
            if self.evaluations > self.budget {
                return Err(Error::BudgetExceeded {
                    required: lattice_size(self.plan),
                    budget: self.budget,
                });
            }
            insert_task(&mut next, task);
            if next.is_full() {
                break;
            }
            chain.push(next);
        }
        let rest = ell * (n - worker - 1);
        for k in (0..chain.len()).rev() {
            if let Some((best, _)) = &self.best {
                if total + k + rest <= *best {
                    break;
                }
            }
            self.current[worker] = k;
            self.visit(worker + 1, &chain[k], total + k)?;
        }
        self.current[worker] = 0;
        Ok(())
    }
}

/// True recovery threshold: one more than the largest total of a
/// non-decodable state.
pub fn brute_force_q(plan: &AssignmentPlan, budget: u64) -> Result<ThresholdReport> {
    let lattice = lattice_size(plan);
    if lattice > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: lattice,
            budget,
        });
    }
    if !full_basis_for(plan, |_| true).is_full() {
        return Err(Error::NotDecodable(
            "plan does not decode even when every task finishes".into(),
        ));
    }
    let mut search = ThresholdSearch {
        plan,
        budget,
        evaluations: 0,
        best: None,
        current: vec![0; plan.n()],
    };
    search.visit(0, &Echelon::new(plan.delta()), 0)?;
    let (total, state) = search.best.expect("the empty state never decodes");
    Ok(ThresholdReport {
        q_true: total + 1,
        worst_state: StateVector::new(state),
        evaluations: search.evaluations,
    })
}

/// Threshold of an uncoded plan from per-block worst cases: for block `j`,
/// every worker processes everything above `A_j` (or its whole list if it
/// lacks `A_j`), and `Q = max_j Q_j + 1`.
pub fn uncoded_q_fast(plan: &AssignmentPlan) -> Result<usize> {
    if plan.has_coded() {
        return Err(Error::WrongPlacement(
            "fast threshold only applies to uncoded plans".into(),
        ));
    }
    let ell = plan.ell();
    let worst = (0..plan.delta())
        .map(|j| {
            plan.workers
                .iter()
                .map(|tasks| {
                    tasks
                        .iter()
                        .position(|t| *t == Task::Uncoded(j))
                        .unwrap_or(ell)
                })
                .sum::<usize>()
        })
        .max()
        .unwrap_or(0);
    Ok(worst + 1)
}

/// Largest `s` such that removing any `s` workers entirely still decodes.
pub fn straggler_resilience(plan: &AssignmentPlan, budget: u64) -> Result<ResilienceReport> {
    let n = plan.n();
    let mut evaluations = 0u64;
    for s in 0..=n {
        for set in (0..n).combinations(s) {
            evaluations += 1;
            if evaluations > budget {
                return Err(Error::BudgetExceeded {
                    required: 1u128 << n.min(127),
                    budget,
                });
            }
            if !full_basis_for(plan, |i| !set.contains(&i)).is_full() {
                if s == 0 {
                    return Err(Error::NotDecodable(
                        "plan does not decode even when every task finishes".into(),
                    ));
                }
                return Ok(ResilienceReport {
                    resilience_true: s - 1,
                    worst_straggler_set: set,
                });
            }
        }
    }
    unreachable!("removing every worker never decodes")
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Fewest distinct uncoded blocks held by any `k` workers together.
pub fn min_uncoded_coverage(plan: &AssignmentPlan, k: usize, budget: u64) -> Result<usize> {
    let n = plan.n();
    if k < 1 || k > n {
        return Err(Error::InvalidParams(format!(
            "subset size must be in 1..={n}, got {k}"
        )));
    }
    let count = binomial_u128(n, k);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded {
            required: count,
            budget,
        });
    }
    let held: Vec<u64> = plan
        .workers
        .iter()
        .map(|tasks| {
            tasks.iter().fold(0u64, |m, t| match t {
                Task::Uncoded(b) => m | (1 << b),
                Task::Coded(_) => m,
            })
        })
        .collect();
    if plan.delta() > 64 {
        return Err(Error::InvalidParams("coverage supports delta <= 64".into()));
    }
    Ok((0..n)
        .combinations(k)
        .map(|set| set.iter().fold(0u64, |m, &i| m | held[i]).count_ones() as usize)
        .min()
        .expect("at least one subset"))
}

/// Threshold and resilience together.
pub fn verify(plan: &AssignmentPlan, budget: u64) -> Result<OracleReport> {
    let q = brute_force_q(plan, budget)?;
    let r = straggler_resilience(plan, budget)?;
    Ok(OracleReport {
        q_true: q.q_true,
        worst_state: q.worst_state,
        resilience_true: r.resilience_true,
        worst_straggler_set: r.worst_straggler_set,
    })
}

/// Draws a state of exactly `total` finished tasks, uniformly spreading
/// tasks over workers that still have room.
pub fn random_state_with_total<R: Rng>(
    plan: &AssignmentPlan,
    total: usize,
    rng: &mut R,
) -> StateVector {
    let ell = plan.ell();
    let total = total.min(plan.n() * ell);
    let mut w = vec![0; plan.n()];
    for _ in 0..total {
        let open: Vec<usize> = (0..plan.n()).filter(|&i| w[i] < ell).collect();
        w[open[rng.random_range(0..open.len())]] += 1;
    }
    StateVector::new(w)
}

/// Samples states of total `q` and returns the first that fails to decode.
pub fn spot_check(
    plan: &AssignmentPlan,
    q: usize,
    samples: usize,
    seed: u64,
) -> Result<Option<StateVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let s = random_state_with_total(plan, q, &mut rng);
        if !is_decodable(plan, &s)? {
            return Ok(Some(s));
        }
    }
    Ok(None)
}
