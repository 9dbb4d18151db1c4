use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::Task;
use crate::sim::matrix_io::SparseMatrix;
use crate::sim::numeric::split_matrix;

/// How expensive a task is relative to an average uncoded block.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostModel {
    /// Every task costs one unit.
    #[default]
    Uniform,
    /// Work is proportional to nonzeros. A coded task's matrix has a
    /// nonzero wherever any of its combined blocks does, so it is charged
    /// the size of the union of their supports.
    SparsityAware {
        /// Nonzeros per block.
        block_nnz: Vec<u64>,
        /// Sorted in-block positions (`local_row * cols + col`) per block.
        /// Without them, coded supports are assumed disjoint.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        supports: Option<Vec<Vec<u64>>>,
    },
}

impl CostModel {
    /// Exact supports of `a` split into `delta` blocks.
    pub fn sparsity_from_matrix(a: &SparseMatrix, delta: usize) -> Result<Self> {
        let ranges = split_matrix(a.rows, delta)?;
        let mut supports: Vec<Vec<u64>> = vec![Vec::new(); delta];
        for &(r, c, v) in &a.entries {
            if v == 0.0 {
                continue;
            }
            let b = ranges
                .iter()
                .position(|rg| rg.contains(&r))
                .expect("row inside matrix");
            supports[b].push(((r - ranges[b].start) * a.cols + c) as u64);
        }
        for s in supports.iter_mut() {
            s.sort_unstable();
            s.dedup();
        }
        Ok(CostModel::SparsityAware {
            block_nnz: supports.iter().map(|s| s.len() as u64).collect(),
            supports: Some(supports),
        })
    }

    pub fn check(&self, delta: usize) -> Result<()> {
        if let CostModel::SparsityAware {
            block_nnz,
            supports,
        } = self
        {
            if block_nnz.len() != delta {
                return Err(Error::InvalidModel(format!(
                    "{} block nonzero counts for delta = {delta}",
                    block_nnz.len()
                )));
            }
            if let Some(s) = supports {
                if s.len() != delta || s.iter().zip(block_nnz).any(|(s, &n)| s.len() as u64 != n) {
                    return Err(Error::InvalidModel(
                        "block supports disagree with nonzero counts".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Nonzeros a task's matrix carries.
    pub fn task_nnz(&self, task: &Task) -> u64 {
        let CostModel::SparsityAware {
            block_nnz,
            supports,
        } = self
        else {
            return 1;
        };
        match (task, supports) {
            (Task::Uncoded(b), _) => block_nnz[*b],
            (Task::Coded(c), Some(s)) => {
                let mut all: Vec<u64> = c.keys().flat_map(|&k| s[k].iter().copied()).collect();
                all.sort_unstable();
                all.dedup();
                all.len() as u64
            }
            (Task::Coded(c), None) => c.keys().map(|&k| block_nnz[k]).sum(),
        }
    }

    /// Duration multiplier for a task; an average uncoded block weighs 1.
    pub fn weight(&self, task: &Task) -> f64 {
        match self {
            CostModel::Uniform => 1.0,
            CostModel::SparsityAware { block_nnz, .. } => {
                let mean = block_nnz.iter().sum::<u64>() as f64 / block_nnz.len().max(1) as f64;
                self.task_nnz(task).max(1) as f64 / mean.max(1.0)
            }
        }
    }
}
