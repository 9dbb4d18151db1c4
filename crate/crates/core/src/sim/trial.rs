use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Echelon;
use crate::plan::{AssignmentPlan, Task};
use crate::sim::cost::CostModel;
use crate::sim::speed::SpeedModel;
use crate::state::StateVector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    /// First instant at which the received products decode, or infinity.
    pub finish_time: f64,
    /// Every block finished by `finish_time` (or by the end, on failure).
    pub final_state: StateVector,
    pub blocks_processed_total: usize,
    pub decode_ok: bool,
}

/// Completion time of every task: `times[i][k]` is when worker `i`
/// finishes its `k`-th task.
pub fn completion_times(
    plan: &AssignmentPlan,
    speed: &SpeedModel,
    cost: &CostModel,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    cost.check(plan.delta())?;
    let raw = speed.raw_durations(plan.n(), plan.ell(), seed)?;
    Ok(plan
        .workers
        .iter()
        .zip(raw)
        .map(|(tasks, draws)| {
            let mut t = 0.0;
            tasks
                .iter()
                .zip(draws)
                .map(|(task, d)| {
                    t += d * cost.weight(task);
                    t
                })
                .collect()
        })
        .collect())
}

/// Runs one job: workers finish tasks top to bottom and the master checks
/// decodability after every completion instant.
///
/// Completions that share a timestamp are applied together.
pub fn run_trial(
    plan: &AssignmentPlan,
    speed: &SpeedModel,
    cost: &CostModel,
    seed: u64,
) -> Result<TrialResult> {
    let times = completion_times(plan, speed, cost, seed)?;
    let mut events: Vec<(f64, usize, usize)> = times
        .iter()
        .enumerate()
        .flat_map(|(i, ts)| ts.iter().enumerate().map(move |(k, &t)| (t, i, k)))
        .filter(|(t, _, _)| t.is_finite())
        .collect();
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut basis = Echelon::new(plan.delta());
    let mut w = vec![0usize; plan.n()];
    let mut idx = 0;
    while idx < events.len() {
        let now = events[idx].0;
        while idx < events.len() && events[idx].0 == now {
            let (_, i, k) = events[idx];
            match &plan.workers[i][k] {
                Task::Uncoded(b) => basis.insert_unit(*b),
                Task::Coded(c) => basis.insert_sparse(c),
            };
            w[i] = k + 1;
            idx += 1;
        }
        if basis.is_full() {
            let state = StateVector::new(w);
            return Ok(TrialResult {
                finish_time: now,
                blocks_processed_total: state.total(),
                final_state: state,
                decode_ok: true,
            });
        }
    }
    let state = StateVector::new(w);
    Ok(TrialResult {
        finish_time: f64::INFINITY,
        blocks_processed_total: state.total(),
        final_state: state,
        decode_ok: false,
    })
}
