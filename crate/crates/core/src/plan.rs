//! System parameters, tasks and assignment plans.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Fp;

/// Where coded tasks sit in each worker's list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Placement {
    UncodedOnly,
    CodedBottom,
    CodedTop,
    FullyCoded,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Placement::UncodedOnly => "uncoded",
            Placement::CodedBottom => "coded-bottom",
            Placement::CodedTop => "coded-top",
            Placement::FullyCoded => "fully-coded",
        };
        f.write_str(s)
    }
}

/// The tuple `<n, l_u, l_c, delta, r_u>` plus placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of workers.
    pub n: usize,
    /// Number of block rows the matrix is split into.
    pub delta: usize,
    /// Uncoded tasks per worker.
    pub ell_u: usize,
    /// Coded tasks per worker.
    pub ell_c: usize,
    /// How many workers hold each uncoded block.
    pub r_u: usize,
    pub placement: Placement,
}

impl SystemParams {
    pub fn new(
        n: usize,
        delta: usize,
        ell_u: usize,
        ell_c: usize,
        r_u: usize,
        placement: Placement,
    ) -> Result<Self> {
        let p = Self {
            n,
            delta,
            ell_u,
            ell_c,
            r_u,
            placement,
        };
        p.check()?;
        Ok(p)
    }

    /// Uncoded-only parameters `<n, l, delta, r>`.
    pub fn uncoded(n: usize, ell: usize, delta: usize, r: usize) -> Result<Self> {
        Self::new(n, delta, ell, 0, r, Placement::UncodedOnly)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.delta == 0 {
            return bad("delta must be positive".into());
        }
        if self.ell() == 0 {
            return bad("each worker needs at least one task".into());
        }
        if self.ell() > self.delta {
            return bad(format!(
                "l = l_u + l_c = {} exceeds delta = {}",
                self.ell(),
                self.delta
            ));
        }
        if self.n * self.ell_u != self.delta * self.r_u {
            return bad(format!(
                "n * l_u = {} differs from delta * r_u = {}",
                self.n * self.ell_u,
                self.delta * self.r_u
            ));
        }
        match self.placement {
            Placement::UncodedOnly if self.ell_c != 0 => {
                bad("uncoded placement requires l_c = 0".into())
            }
            Placement::FullyCoded if self.ell_u != 0 || self.r_u != 0 => {
                bad("fully coded placement requires l_u = 0 and r_u = 0".into())
            }
            _ => Ok(()),
        }
    }

    /// Tasks per worker, `l = l_u + l_c`.
    pub fn ell(&self) -> usize {
        self.ell_u + self.ell_c
    }

    /// Storage fraction `l / delta`.
    pub fn gamma(&self) -> Ratio<u64> {
        Ratio::new(self.ell() as u64, self.delta as u64)
    }

    pub fn gamma_u(&self) -> Ratio<u64> {
        Ratio::new(self.ell_u as u64, self.delta as u64)
    }

    pub fn gamma_c(&self) -> Ratio<u64> {
        Ratio::new(self.ell_c as u64, self.delta as u64)
    }

    /// Index range of the coded tasks inside a worker's list.
    pub fn coded_positions(&self) -> std::ops::Range<usize> {
        match self.placement {
            Placement::UncodedOnly => 0..0,
            Placement::CodedBottom => self.ell_u..self.ell(),
            Placement::CodedTop => 0..self.ell_c,
            Placement::FullyCoded => 0..self.ell(),
        }
    }
}

/// One block-row job on a worker.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    /// Compute `A_b x` for block `b` (0-based).
    #[serde(rename = "u")]
    Uncoded(usize),
    /// Compute `(sum_k c_k A_k) x`.
    #[serde(rename = "c")]
    Coded(BTreeMap<usize, Fp>),
}

impl Task {
    pub fn is_coded(&self) -> bool {
        matches!(self, Task::Coded(_))
    }

    /// Block indices this task touches.
    pub fn support(&self) -> Vec<usize> {
        match self {
            Task::Uncoded(b) => vec![*b],
            Task::Coded(c) => c.keys().copied().collect(),
        }
    }

    /// Short label with 1-based block numbers, e.g. `A3` or `C(1,4,5)`.
    pub fn label(&self) -> String {
        match self {
            Task::Uncoded(b) => format!("A{}", b + 1),
            Task::Coded(c) => {
                let s: Vec<String> = c.keys().map(|k| (k + 1).to_string()).collect();
                format!("C({})", s.join(","))
            }
        }
    }
}

/// A structural rule an [`AssignmentPlan`] breaks. Worker and block numbers
/// in the messages are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Params(String),
    WorkerCount {
        expected: usize,
        found: usize,
    },
    WorkerLength {
        worker: usize,
        expected: usize,
        found: usize,
    },
    BlockOutOfRange {
        worker: usize,
        position: usize,
        block: usize,
    },
    DuplicateUncodedBlock {
        worker: usize,
        block: usize,
    },
    EmptyCodedTask {
        worker: usize,
        position: usize,
    },
    ZeroCoefficient {
        worker: usize,
        position: usize,
        block: usize,
    },
    TaskMix {
        worker: usize,
        uncoded: usize,
        coded: usize,
    },
    Placement {
        worker: usize,
        position: usize,
    },
    ReplicationCount {
        block: usize,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Params(m) => write!(f, "params: {m}"),
            Violation::WorkerCount { expected, found } => {
                write!(f, "worker count: expected {expected}, found {found}")
            }
            Violation::WorkerLength {
                worker,
                expected,
                found,
            } => write!(
                f,
                "worker length: worker {} has {found} tasks, expected {expected}",
                worker + 1
            ),
            Violation::BlockOutOfRange {
                worker,
                position,
                block,
            } => write!(
                f,
                "block out of range: worker {} row {} references block {}",
                worker + 1,
                position + 1,
                block + 1
            ),
            Violation::DuplicateUncodedBlock { worker, block } => write!(
                f,
                "duplicate uncoded block: worker {} holds A{} more than once",
                worker + 1,
                block + 1
            ),
            Violation::EmptyCodedTask { worker, position } => write!(
                f,
                "empty coded task: worker {} row {}",
                worker + 1,
                position + 1
            ),
            Violation::ZeroCoefficient {
                worker,
                position,
                block,
            } => write!(
                f,
                "zero coefficient: worker {} row {} on block {}",
                worker + 1,
                position + 1,
                block + 1
            ),
            Violation::TaskMix {
                worker,
                uncoded,
                coded,
            } => write!(
                f,
                "task mix: worker {} has {uncoded} uncoded and {coded} coded tasks",
                worker + 1
            ),
            Violation::Placement { worker, position } => write!(
                f,
                "placement: worker {} row {} has the wrong task kind for this placement",
                worker + 1,
                position + 1
            ),
            Violation::ReplicationCount {
                block,
                expected,
                found,
            } => write!(
                f,
                "replication count: A{} appears {found} times, expected {expected}",
                block + 1
            ),
        }
    }
}

/// `n` ordered task lists, processed top to bottom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentPlan {
    pub params: SystemParams,
    pub workers: Vec<Vec<Task>>,
}

impl AssignmentPlan {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn delta(&self) -> usize {
        self.params.delta
    }

    pub fn ell(&self) -> usize {
        self.params.ell()
    }

    pub fn has_coded(&self) -> bool {
        self.workers.iter().flatten().any(Task::is_coded)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialises")
    }

    /// Parses and validates a plan document.
    pub fn from_json(s: &str) -> Result<Self> {
        let plan: AssignmentPlan = serde_json::from_str(s)?;
        let violations = validate_plan(&plan);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidPlan(msgs.join("; ")));
        }
        Ok(plan)
    }
}

/// Checks every structural rule of a plan. An empty result means valid.
pub fn validate_plan(plan: &AssignmentPlan) -> Vec<Violation> {
    let p = &plan.params;
    let mut out = Vec::new();
    if let Err(e) = p.check() {
        out.push(Violation::Params(e.to_string()));
    }
    if plan.workers.len() != p.n {
        out.push(Violation::WorkerCount {
            expected: p.n,
            found: plan.workers.len(),
        });
    }
    let coded_pos = p.coded_positions();
    let mut replication = vec![0usize; p.delta];
    for (w, tasks) in plan.workers.iter().enumerate() {
        if tasks.len() != p.ell() {
            out.push(Violation::WorkerLength {
                worker: w,
                expected: p.ell(),
                found: tasks.len(),
            });
        }
        let mut seen = BTreeSet::new();
        let (mut n_u, mut n_c) = (0, 0);
        for (pos, task) in tasks.iter().enumerate() {
            if task.is_coded() != coded_pos.contains(&pos) {
                out.push(Violation::Placement {
                    worker: w,
                    position: pos,
                });
            }
            match task {
                Task::Uncoded(b) => {
                    n_u += 1;
                    if *b >= p.delta {
                        out.push(Violation::BlockOutOfRange {
                            worker: w,
                            position: pos,
                            block: *b,
                        });
                        continue;
                    }
                    if !seen.insert(*b) {
                        out.push(Violation::DuplicateUncodedBlock {
                            worker: w,
                            block: *b,
                        });
                    }
                    replication[*b] += 1;
                }
                Task::Coded(coeffs) => {
                    n_c += 1;
                    if coeffs.is_empty() {
                        out.push(Violation::EmptyCodedTask {
                            worker: w,
                            position: pos,
                        });
                    }
                    for (&k, c) in coeffs {
                        if k >= p.delta {
                            out.push(Violation::BlockOutOfRange {
                                worker: w,
                                position: pos,
                                block: k,
                            });
                        } else if c.is_zero() {
                            out.push(Violation::ZeroCoefficient {
                                worker: w,
                                position: pos,
                                block: k,
                            });
                        }
                    }
                }
            }
        }
        if n_u != p.ell_u || n_c != p.ell_c {
            out.push(Violation::TaskMix {
                worker: w,
                uncoded: n_u,
                coded: n_c,
            });
        }
    }
    if p.r_u > 0 {
        for (b, &count) in replication.iter().enumerate() {
            if count != p.r_u {
                out.push(Violation::ReplicationCount {
                    block: b,
                    expected: p.r_u,
                    found: count,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic_five() -> AssignmentPlan {
        let params = SystemParams::uncoded(5, 3, 5, 3).unwrap();
        let workers = (0..5)
            .map(|i| (0..3).map(|j| Task::Uncoded((i + j) % 5)).collect())
            .collect();
        AssignmentPlan { params, workers }
    }

    #[test]
    fn params_invariants() {
        assert!(SystemParams::uncoded(5, 3, 5, 3).is_ok());
        assert!(SystemParams::uncoded(5, 3, 5, 2).is_err());
        assert!(SystemParams::uncoded(3, 4, 3, 4).is_err());
        assert!(SystemParams::new(5, 5, 2, 1, 2, Placement::UncodedOnly).is_err());
        assert!(SystemParams::new(3, 2, 1, 1, 0, Placement::FullyCoded).is_err());
        assert!(SystemParams::new(3, 2, 0, 1, 0, Placement::FullyCoded).is_ok());
    }

    #[test]
    fn storage_fractions_are_exact() {
        let p = SystemParams::new(5, 5, 2, 1, 2, Placement::CodedBottom).unwrap();
        assert_eq!(p.gamma(), Ratio::new(3, 5));
        assert_eq!(p.gamma_u(), Ratio::new(2, 5));
        assert_eq!(p.gamma_c(), Ratio::new(1, 5));
        assert_eq!(p.gamma_u() + p.gamma_c(), p.gamma());
    }

    #[test]
    fn cyclic_five_is_valid() {
        assert!(validate_plan(&cyclic_five()).is_empty());
    }

    #[test]
    fn duplicate_block_flagged() {
        let mut plan = cyclic_five();
        plan.workers[0][1] = Task::Uncoded(0);
        let v = validate_plan(&plan);
        assert!(v.contains(&Violation::DuplicateUncodedBlock {
            worker: 0,
            block: 0
        }));
        assert!(v
            .iter()
            .any(|x| x.to_string().starts_with("duplicate uncoded block")));
    }

    #[test]
    fn replication_count_flagged() {
        // worker 4 = [A4, A5, A1]; swap A1 for A2 so A2 appears 4 times, A1 twice.
        let mut plan = cyclic_five();
        plan.workers[3][2] = Task::Uncoded(1);
        let v = validate_plan(&plan);
        assert!(v.contains(&Violation::ReplicationCount {
            block: 1,
            expected: 3,
            found: 4
        }));
        assert!(v.contains(&Violation::ReplicationCount {
            block: 0,
            expected: 3,
            found: 2
        }));
        assert!(v
            .iter()
            .any(|x| x.to_string().starts_with("replication count")));
    }

    #[test]
    fn misplaced_coded_task() {
        let params = SystemParams::new(3, 3, 1, 1, 1, Placement::CodedBottom).unwrap();
        let coded = Task::Coded([(1usize, Fp::ONE)].into_iter().collect());
        let plan = AssignmentPlan {
            params,
            workers: vec![
                vec![coded.clone(), Task::Uncoded(0)],
                vec![Task::Uncoded(1), coded.clone()],
                vec![Task::Uncoded(2), coded],
            ],
        };
        let v = validate_plan(&plan);
        assert!(v.contains(&Violation::Placement {
            worker: 0,
            position: 0
        }));
    }

    #[test]
    fn json_shape() {
        let params = SystemParams::new(1, 2, 1, 1, 0, Placement::CodedBottom);
        assert!(params.is_err());
        let params = SystemParams::new(2, 2, 1, 1, 1, Placement::CodedBottom).unwrap();
        let plan = AssignmentPlan {
            params,
            workers: vec![
                vec![
                    Task::Uncoded(0),
                    Task::Coded([(1usize, Fp::new(7))].into_iter().collect()),
                ],
                vec![
                    Task::Uncoded(1),
                    Task::Coded([(0usize, Fp::new(9))].into_iter().collect()),
                ],
            ],
        };
        let v: serde_json::Value = serde_json::from_str(&plan.to_json()).unwrap();
        assert_eq!(v["workers"][0][0], serde_json::json!({"u": 0}));
        assert_eq!(v["workers"][0][1], serde_json::json!({"c": {"1": "7"}}));
        assert_eq!(v["params"]["placement"], "CodedBottom");
        assert_eq!(AssignmentPlan::from_json(&plan.to_json()).unwrap(), plan);
    }

    #[test]
    fn from_json_rejects_invalid() {
        let mut plan = cyclic_five();
        plan.workers[0][1] = Task::Uncoded(0);
        let err = AssignmentPlan::from_json(&plan.to_json()).unwrap_err();
        assert!(matches!(err, Error::InvalidPlan(_)));
    }
}
