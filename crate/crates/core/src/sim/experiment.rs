//! Repeated trials over several plans with paired randomness, summaries and
//! CSV output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::AssignmentPlan;
use crate::sim::cost::CostModel;
use crate::sim::matrix_io::load_matrix;
use crate::sim::speed::{mix, SpeedModel};
use crate::sim::trial::run_trial;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPlan {
    pub id: String,
    pub plan: AssignmentPlan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub plan_id: String,
    pub trial: usize,
    pub finish_time: f64,
    pub blocks_total: usize,
    pub decode_ok: bool,
}

/// Finish-time statistics over successful trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub plan_id: String,
    pub trials: usize,
    pub mean: f64,
    pub median: f64,
    /// Nearest-rank 95th percentile.
    pub p95: f64,
    pub failure_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<PlanSummary>,
}

/// Seed for trial `t`. It does not depend on the plan, so every plan sees
/// the same per-worker draws in a given trial.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    mix(seed, trial as u64)
}

pub fn run_experiment(
    plans: &[LabeledPlan],
    speed: &SpeedModel,
    cost: &CostModel,
    trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    if trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(plans.len() * trials);
    let mut summaries = Vec::with_capacity(plans.len());
    for lp in plans {
        let start = records.len();
        for t in 0..trials {
            let r = run_trial(&lp.plan, speed, cost, trial_seed(seed, t))?;
            records.push(TrialRecord {
                plan_id: lp.id.clone(),
                trial: t,
                finish_time: r.finish_time,
                blocks_total: r.blocks_processed_total,
                decode_ok: r.decode_ok,
            });
        }
        summaries.push(summarize(&lp.id, &records[start..]));
    }
    Ok(ExperimentResult { records, summaries })
}

/// Statistics of `records`; all-failure sets report infinite times.
pub fn summarize(plan_id: &str, records: &[TrialRecord]) -> PlanSummary {
    let mut ok: Vec<f64> = records
        .iter()
        .filter(|r| r.decode_ok)
        .map(|r| r.finish_time)
        .collect();
    ok.sort_by(f64::total_cmp);
    let failures = records.len() - ok.len();
    let (mean, median, p95) = if ok.is_empty() {
        (f64::INFINITY, f64::INFINITY, f64::INFINITY)
    } else {
        let m = ok.len();
        let median = if m % 2 == 1 {
            ok[m / 2]
        } else {
            (ok[m / 2 - 1] + ok[m / 2]) / 2.0
        };
        let rank = (0.95 * m as f64).ceil() as usize;
        (
            ok.iter().sum::<f64>() / m as f64,
            median,
            ok[rank.clamp(1, m) - 1],
        )
    };
    PlanSummary {
        plan_id: plan_id.to_string(),
        trials: records.len(),
        mean,
        median,
        p95,
        failure_rate: failures as f64 / records.len().max(1) as f64,
    }
}

pub fn write_records_csv<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summaries_csv<W: Write>(summaries: &[PlanSummary], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for s in summaries {
        out.serialize(s)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanSource {
    Path { id: String, path: PathBuf },
    Inline { id: String, plan: AssignmentPlan },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSource {
    #[default]
    Uniform,
    SparsityAware {
        block_nnz: Vec<u64>,
    },
    /// Exact supports taken from a matrix file.
    Matrix {
        path: PathBuf,
    },
}

/// Experiment description as stored in a JSON file. Relative paths are
/// taken from the config file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub plans: Vec<PlanSource>,
    #[serde(default)]
    pub speed: SpeedModel,
    #[serde(default)]
    pub cost: CostSource,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

/// A config with every file resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub plans: Vec<LabeledPlan>,
    pub speed: SpeedModel,
    pub cost: CostModel,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Experiment> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.resolve(path.parent().unwrap_or(Path::new(".")))
    }

    pub fn resolve(self, base: &Path) -> Result<Experiment> {
        let mut plans = Vec::with_capacity(self.plans.len());
        for src in self.plans {
            plans.push(match src {
                PlanSource::Inline { id, plan } => {
                    let errs = crate::plan::validate_plan(&plan);
                    if let Some(v) = errs.first() {
                        return Err(Error::InvalidPlan(format!("{id}: {v}")));
                    }
                    LabeledPlan { id, plan }
                }
                PlanSource::Path { id, path } => {
                    let p = base.join(path);
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                    LabeledPlan {
                        id,
                        plan: AssignmentPlan::from_json(&text)?,
                    }
                }
            });
        }
        if plans.is_empty() {
            return Err(Error::InvalidParams("experiment lists no plans".into()));
        }
        let delta = plans[0].plan.delta();
        let cost = match self.cost {
            CostSource::Uniform => CostModel::Uniform,
            CostSource::SparsityAware { block_nnz } => CostModel::SparsityAware {
                block_nnz,
                supports: None,
            },
            CostSource::Matrix { path } => {
                if plans.iter().any(|p| p.plan.delta() != delta) {
                    return Err(Error::InvalidParams(
                        "a matrix cost model needs every plan to use the same delta".into(),
                    ));
                }
                CostModel::sparsity_from_matrix(&load_matrix(&base.join(path))?, delta)?
            }
        };
        for p in &plans {
            self.speed.check(p.plan.n())?;
            cost.check(p.plan.delta())?;
        }
        Ok(Experiment {
            plans,
            speed: self.speed,
            cost,
            trials: self.trials,
            seed: self.seed,
        })
    }
}

impl Experiment {
    pub fn run(&self) -> Result<ExperimentResult> {
        run_experiment(&self.plans, &self.speed, &self.cost, self.trials, self.seed)
    }
}
