//! Computation states and the decodability predicate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Fp;
use crate::linalg;
use crate::plan::{AssignmentPlan, Task};

/// Per-worker count of finished tasks, `w_i` in `0..=l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub Vec<usize>);

impl StateVector {
    pub fn new(w: Vec<usize>) -> Self {
        StateVector(w)
    }

    pub fn zeros(n: usize) -> Self {
        StateVector(vec![0; n])
    }

    pub fn full(n: usize, ell: usize) -> Self {
        StateVector(vec![ell; n])
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &StateVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn check(&self, plan: &AssignmentPlan) -> Result<()> {
        if self.0.len() != plan.n() {
            return Err(Error::InvalidState(format!(
                "state has {} entries, plan has {} workers",
                self.0.len(),
                plan.n()
            )));
        }
        if let Some((i, &w)) = self.0.iter().enumerate().find(|(_, &w)| w > plan.ell()) {
            return Err(Error::InvalidState(format!(
                "worker {} progress {w} exceeds l = {}",
                i + 1,
                plan.ell()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// What the master holds after receiving a state's block products.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquationSet {
    /// Blocks received uncoded, deduplicated.
    pub known: BTreeSet<usize>,
    /// Coded coefficient rows in worker-then-position order.
    pub coded: Vec<BTreeMap<usize, Fp>>,
}

impl EquationSet {
    pub fn is_empty(&self) -> bool {
        self.known.is_empty() && self.coded.is_empty()
    }

    /// Absorbs a task's equation.
    pub fn push(&mut self, task: &Task) {
        match task {
            Task::Uncoded(b) => {
                self.known.insert(*b);
            }
            Task::Coded(c) => self.coded.push(c.clone()),
        }
    }

    /// Whether these equations determine all `delta` block products.
    ///
    /// Known blocks are eliminated outright; the coded rows restricted to
    /// the remaining columns must then have full column rank.
    pub fn decodes(&self, delta: usize) -> bool {
        let unknown: Vec<usize> = (0..delta).filter(|b| !self.known.contains(b)).collect();
        if unknown.is_empty() {
            return true;
        }
        if self.coded.len() < unknown.len() {
            return false;
        }
        let rows: Vec<Vec<Fp>> = self
            .coded
            .iter()
            .map(|c| {
                unknown
                    .iter()
                    .map(|k| c.get(k).copied().unwrap_or(Fp::ZERO))
                    .collect()
            })
            .collect();
        linalg::rank(rows) == unknown.len()
    }
}

/// The equations produced by the first `w_i` tasks of every worker.
pub fn processed_equations(plan: &AssignmentPlan, state: &StateVector) -> Result<EquationSet> {
    state.check(plan)?;
    let mut eq = EquationSet::default();
    for (tasks, &w) in plan.workers.iter().zip(&state.0) {
        for task in &tasks[..w] {
            eq.push(task);
        }
    }
    Ok(eq)
}

/// True iff the master can recover every block product from `state`.
pub fn is_decodable(plan: &AssignmentPlan, state: &StateVector) -> Result<bool> {
    Ok(processed_equations(plan, state)?.decodes(plan.delta()))
}
