//! Floating-point execution of a plan on a real matrix and reconstruction of
//! `A x` from whatever block products the workers returned.
//!
//! Coded coefficients are mapped to the reals by [`RealCoefficients`],
//! which keeps the Cauchy structure of the field rows but moves the nodes to
//! interleaved real positions. Which rows to solve with is decided over the
//! field.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::field::Fp;
use crate::linalg::Echelon;
use crate::plan::{AssignmentPlan, Task};
use crate::state::{is_decodable, StateVector};

/// Above this condition estimate the decoder looks for a better row subset.
pub const CONDITION_RETRY: f64 = 1e6;
/// Above this the selected system is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Balanced contiguous split of `rows` into `delta` blocks; the first
/// `rows % delta` blocks get one extra row.
pub fn split_matrix(rows: usize, delta: usize) -> Result<Vec<Range<usize>>> {
    if delta == 0 || rows < delta {
        return Err(Error::InvalidParams(format!(
            "cannot split {rows} rows into {delta} blocks"
        )));
    }
    let (base, extra) = (rows / delta, rows % delta);
    let mut start = 0;
    Ok((0..delta)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// Row ranges of the blocks. Shorter blocks are zero-padded to
/// [`BlockLayout::block_len`] rows so that they can be combined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub rows: usize,
    pub ranges: Vec<Range<usize>>,
}

impl BlockLayout {
    pub fn new(rows: usize, delta: usize) -> Result<Self> {
        Ok(Self {
            rows,
            ranges: split_matrix(rows, delta)?,
        })
    }

    pub fn delta(&self) -> usize {
        self.ranges.len()
    }

    pub fn block_len(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    fn padded_block(&self, a: &DMatrix<f64>, b: usize) -> DMatrix<f64> {
        let r = &self.ranges[b];
        let mut m = DMatrix::zeros(self.block_len(), a.ncols());
        m.rows_mut(0, r.len()).copy_from(&a.rows(r.start, r.len()));
        m
    }
}

/// Real coefficients for the coded tasks of one plan.
///
/// A Cauchy entry `(x_u - y_j)^-1` in column `j` identifies its row node as
/// `u = j + gap` (see [`Fp::cauchy_gap`]), whatever the seed. The real
/// coefficient is `1 / (X_u - Y_j)` with column nodes `Y_j` evenly spaced
/// and the row nodes `X_u`, ranked by `u`, spread between them. The real
/// matrix is again Cauchy, so every square submatrix stays invertible, and
/// interleaving keeps it far better conditioned than the integer nodes.
#[derive(Clone, Debug)]
pub struct RealCoefficients {
    row_nodes: BTreeMap<u64, f64>,
    col_nodes: Vec<f64>,
}

/// Irrational offset that keeps row nodes off the column grid.
const NODE_OFFSET: f64 = 0.618_033_988_749_895;

impl RealCoefficients {
    pub fn for_plan(plan: &AssignmentPlan) -> Self {
        let delta = plan.delta();
        let ids: BTreeSet<u64> = plan
            .workers
            .iter()
            .flatten()
            .filter_map(|t| match t {
                Task::Coded(c) => Some(c),
                Task::Uncoded(_) => None,
            })
            .flat_map(|c| {
                c.iter()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(&j, v)| j as u64 + v.cauchy_gap())
            })
            .collect();
        let m = ids.len().max(1) as f64;
        let span = m.max(delta as f64);
        let row_nodes = ids
            .into_iter()
            .enumerate()
            .map(|(r, u)| (u, (r as f64 + NODE_OFFSET) * span / m))
            .collect();
        let col_nodes = (0..delta).map(|j| j as f64 * span / delta as f64).collect();
        Self {
            row_nodes,
            col_nodes,
        }
    }

    /// Real image of coefficient `c` on block `j`.
    pub fn get(&self, j: usize, c: Fp) -> f64 {
        if c.is_zero() {
            return 0.0;
        }
        let u = j as u64 + c.cauchy_gap();
        1.0 / (self.row_nodes[&u] - self.col_nodes[j])
    }
}

/// The matrix a worker multiplies for `task`.
pub fn task_matrix(
    task: &Task,
    a: &DMatrix<f64>,
    layout: &BlockLayout,
    coeffs: &RealCoefficients,
) -> DMatrix<f64> {
    match task {
        Task::Uncoded(b) => layout.padded_block(a, *b),
        Task::Coded(row) => {
            let mut m = DMatrix::zeros(layout.block_len(), a.ncols());
            for (&k, &c) in row {
                m += layout.padded_block(a, k) * coeffs.get(k, c);
            }
            m
        }
    }
}

/// One returned block product.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockProduct {
    pub worker: usize,
    pub position: usize,
    pub values: Vec<f64>,
}

/// What the workers send back in `state`, computed directly.
pub fn worker_products(
    plan: &AssignmentPlan,
    a: &DMatrix<f64>,
    x: &DVector<f64>,
    state: &StateVector,
) -> Result<Vec<BlockProduct>> {
    state.check(plan)?;
    if a.ncols() != x.len() {
        return Err(Error::InvalidParams(format!(
            "matrix has {} columns, vector has {} entries",
            a.ncols(),
            x.len()
        )));
    }
    let layout = BlockLayout::new(a.nrows(), plan.delta())?;
    let coeffs = RealCoefficients::for_plan(plan);
    let mut out = Vec::new();
    for (i, tasks) in plan.workers.iter().enumerate() {
        for (k, task) in tasks[..state.0[i]].iter().enumerate() {
            let y = task_matrix(task, a, &layout, &coeffs) * x;
            out.push(BlockProduct {
                worker: i,
                position: k,
                values: y.iter().copied().collect(),
            });
        }
    }
    Ok(out)
}

/// Result of [`numeric_decode_detailed`].
#[derive(Clone, Debug)]
pub struct Decoded {
    pub product: DVector<f64>,
    /// `(worker, position)` of the coded rows solved with.
    pub coded_rows_used: Vec<(usize, usize)>,
    /// Condition estimate of the solved system (1 when nothing was solved).
    pub condition: f64,
    pub attempts: usize,
}

struct CodedEquation {
    origin: (usize, usize),
    field_row: Vec<Fp>,
    real_row: Vec<f64>,
    rhs: Vec<f64>,
}

fn condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Reconstructs `A x` from received block products.
pub fn numeric_decode(
    plan: &AssignmentPlan,
    layout: &BlockLayout,
    received: &[BlockProduct],
) -> Result<DVector<f64>> {
    numeric_decode_detailed(plan, layout, received).map(|d| d.product)
}

pub fn numeric_decode_detailed(
    plan: &AssignmentPlan,
    layout: &BlockLayout,
    received: &[BlockProduct],
) -> Result<Decoded> {
    let delta = plan.delta();
    if layout.delta() != delta {
        return Err(Error::InvalidParams(format!(
            "layout has {} blocks, plan has {delta}",
            layout.delta()
        )));
    }
    let len = layout.block_len();

    let mut by_slot: BTreeMap<(usize, usize), &BlockProduct> = BTreeMap::new();
    for p in received {
        if p.worker >= plan.n() || p.position >= plan.ell() {
            return Err(Error::InvalidState(format!(
                "product from worker {} row {} does not exist",
                p.worker + 1,
                p.position + 1
            )));
        }
        if p.values.len() != len {
            return Err(Error::InvalidState(format!(
                "product has {} values, blocks have {len} rows",
                p.values.len()
            )));
        }
        if let Some(prev) = by_slot.insert((p.worker, p.position), p) {
            if prev.values != p.values {
                return Err(Error::Inconsistent(format!(
                    "worker {} row {} reported twice with different values",
                    p.worker + 1,
                    p.position + 1
                )));
            }
        }
    }

    // Products must form per-worker prefixes.
    let mut w = vec![0usize; plan.n()];
    for &(i, k) in by_slot.keys() {
        if k != w[i] {
            return Err(Error::InvalidState(format!(
                "worker {} returned row {} without row {}",
                i + 1,
                k + 1,
                w[i] + 1
            )));
        }
        w[i] += 1;
    }
    let state = StateVector::new(w);
    if !is_decodable(plan, &state)? {
        return Err(Error::NotDecodable(format!(
            "state {state} does not determine every block"
        )));
    }

    let mut known: BTreeMap<usize, &[f64]> = BTreeMap::new();
    for (&(i, k), p) in &by_slot {
        if let Task::Uncoded(b) = plan.workers[i][k] {
            if let Some(prev) = known.insert(b, &p.values) {
                if prev != &p.values[..] {
                    return Err(Error::Inconsistent(format!(
                        "two copies of A{} x disagree",
                        b + 1
                    )));
                }
            }
        }
    }
    let unknown: Vec<usize> = (0..delta).filter(|b| !known.contains_key(b)).collect();
    let lift = RealCoefficients::for_plan(plan);

    let mut solved: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut used = Vec::new();
    let mut cond = 1.0;
    let mut attempts = 0;
    if !unknown.is_empty() {
        let equations: Vec<CodedEquation> = by_slot
            .iter()
            .filter_map(|(&(i, k), p)| match &plan.workers[i][k] {
                Task::Coded(c) => Some(reduce_equation(
                    (i, k),
                    c,
                    &p.values,
                    &known,
                    &unknown,
                    &lift,
                )),
                Task::Uncoded(_) => None,
            })
            .collect();
        let (rows, z, c, tries) = solve_unknowns(&equations, unknown.len(), len)?;
        cond = c;
        attempts = tries;
        used = rows.iter().map(|&r| equations[r].origin).collect();
        for (u, &b) in unknown.iter().enumerate() {
            solved.insert(b, z.row(u).iter().copied().collect());
        }
    }

    let mut product = DVector::zeros(layout.rows);
    for (b, r) in layout.ranges.iter().enumerate() {
        let vals: &[f64] = match known.get(&b) {
            Some(v) => v,
            None => &solved[&b],
        };
        product
            .rows_mut(r.start, r.len())
            .copy_from_slice(&vals[..r.len()]);
    }
    Ok(Decoded {
        product,
        coded_rows_used: used,
        condition: cond,
        attempts,
    })
}

fn reduce_equation(
    origin: (usize, usize),
    coeffs: &BTreeMap<usize, Fp>,
    values: &[f64],
    known: &BTreeMap<usize, &[f64]>,
    unknown: &[usize],
    lift: &RealCoefficients,
) -> CodedEquation {
    let mut rhs = values.to_vec();
    for (&k, &c) in coeffs {
        if let Some(kv) = known.get(&k) {
            let lc = lift.get(k, c);
            for (r, v) in rhs.iter_mut().zip(kv.iter()) {
                *r -= lc * v;
            }
        }
    }
    let field_row = unknown
        .iter()
        .map(|u| coeffs.get(u).copied().unwrap_or(Fp::ZERO))
        .collect();
    let real_row = unknown
        .iter()
        .map(|&u| coeffs.get(&u).map_or(0.0, |&c| lift.get(u, c)))
        .collect();
    CodedEquation {
        origin,
        field_row,
        real_row,
        rhs,
    }
}

/// Greedy independent row selection starting at `start`, wrapping around.
fn select_rows(eqs: &[CodedEquation], need: usize, start: usize) -> Option<Vec<usize>> {
    let mut basis = Echelon::new(need);
    let mut picked = Vec::with_capacity(need);
    for off in 0..eqs.len() {
        let r = (start + off) % eqs.len();
        if basis.insert(eqs[r].field_row.clone()) {
            picked.push(r);
            if picked.len() == need {
                return Some(picked);
            }
        }
    }
    None
}

type Solution = (Vec<usize>, DMatrix<f64>, f64, usize);

fn solve_unknowns(eqs: &[CodedEquation], need: usize, len: usize) -> Result<Solution> {
    let system = |rows: &[usize]| DMatrix::from_fn(need, need, |i, j| eqs[rows[i]].real_row[j]);
    let mut tried = BTreeSet::new();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut attempts = 0;
    for start in 0..eqs.len().max(1) {
        let Some(mut rows) = select_rows(eqs, need, start) else {
            break;
        };
        let mut key = rows.clone();
        key.sort_unstable();
        if !tried.insert(key) {
            continue;
        }
        attempts += 1;
        rows.sort_unstable();
        let c = condition(&system(&rows));
        if best.as_ref().is_none_or(|(_, bc)| c < *bc) {
            best = Some((rows, c));
        }
        if c <= CONDITION_RETRY {
            break;
        }
    }
    let (rows, c) = best
        .ok_or_else(|| Error::NotDecodable("coded rows do not cover the unknown blocks".into()))?;
    if c.is_nan() || c > CONDITION_LIMIT {
        return Err(Error::Singular { condition: c });
    }
    let rhs = DMatrix::from_fn(need, len, |i, j| eqs[rows[i]].rhs[j]);
    let z = system(&rows)
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular { condition: c })?;
    Ok((rows, z, c, attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{cyclic_coded, cyclic_uncoded, mds_plan};
    use crate::Placement;

    fn sizes(rows: usize, delta: usize) -> Vec<usize> {
        split_matrix(rows, delta)
            .unwrap()
            .iter()
            .map(|r| r.len())
            .collect()
    }

    #[test]
    fn balanced_splits() {
        assert_eq!(sizes(10, 5), vec![2; 5]);
        assert_eq!(sizes(11, 5), vec![3, 2, 2, 2, 2]);
        assert_eq!(sizes(7, 3), vec![3, 2, 2]);
        let r = split_matrix(11, 5).unwrap();
        assert_eq!(r[0].start, 0);
        assert_eq!(r[4].end, 11);
        assert!(split_matrix(2, 3).is_err());
    }

    fn int_matrix(rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0)
    }

    fn rel_err(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn three_worker_coded_any_three_products() {
        let plan = cyclic_coded(3, 1, 1, Placement::CodedBottom).unwrap();
        let a = int_matrix(6, 4);
        let x = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let truth = &a * &x;
        let layout = BlockLayout::new(6, 3).unwrap();
        for w in [[1, 1, 1], [2, 1, 0], [0, 2, 1], [1, 0, 2], [2, 0, 1]] {
            let s = StateVector::new(w.to_vec());
            let got = worker_products(&plan, &a, &x, &s).unwrap();
            let y = numeric_decode(&plan, &layout, &got).unwrap();
            assert!(rel_err(&y, &truth) < 1e-12, "{s}");
        }
    }

    #[test]
    fn copy_path_is_exact() {
        let plan = cyclic_uncoded(4, 2).unwrap();
        let a = int_matrix(9, 5);
        let x = DVector::from_fn(5, |i, _| i as f64 * 0.37 - 1.0);
        let layout = BlockLayout::new(9, 4).unwrap();
        let got = worker_products(&plan, &a, &x, &StateVector::new(vec![2, 0, 2, 0])).unwrap();
        let d = numeric_decode_detailed(&plan, &layout, &got).unwrap();
        assert!(d.coded_rows_used.is_empty());
        for (b, r) in layout.ranges.iter().enumerate() {
            let direct = a.rows(r.start, r.len()) * &x;
            assert_eq!(d.product.rows(r.start, r.len()), direct, "block {b}");
        }
    }

    #[test]
    fn bottom_with_three_stragglers() {
        let plan = cyclic_coded(5, 2, 1, Placement::CodedBottom).unwrap();
        let a = int_matrix(23, 7);
        let x = DVector::from_fn(7, |i, _| (i as f64).sin());
        let truth = &a * &x;
        let layout = BlockLayout::new(23, 5).unwrap();
        let got = worker_products(&plan, &a, &x, &StateVector::new(vec![3, 3, 0, 0, 0])).unwrap();
        let y = numeric_decode(&plan, &layout, &got).unwrap();
        assert!(rel_err(&y, &truth) <= 1e-9);
    }

    #[test]
    fn refuses_undecodable_and_gapped() {
        let plan = mds_plan(3, 2, 3).unwrap();
        let a = int_matrix(6, 3);
        let x = DVector::from_element(3, 1.0);
        let layout = BlockLayout::new(6, 3).unwrap();
        let got = worker_products(&plan, &a, &x, &StateVector::new(vec![1, 1, 0])).unwrap();
        assert!(matches!(
            numeric_decode(&plan, &layout, &got),
            Err(Error::NotDecodable(_))
        ));
        let mut got = worker_products(&plan, &a, &x, &StateVector::new(vec![2, 1, 0])).unwrap();
        got.remove(0);
        assert!(matches!(
            numeric_decode(&plan, &layout, &got),
            Err(Error::InvalidState(_))
        ));
    }

    fn plan_from_cauchy(seed: u64) -> AssignmentPlan {
        let mut plan = mds_plan(4, 2, 5).unwrap();
        let c = crate::schemes::cauchy(8, 5, seed).unwrap();
        for (i, w) in plan.workers.iter_mut().enumerate() {
            for (k, t) in w.iter_mut().enumerate() {
                *t = Task::Coded(c.row(i * 2 + k).iter().copied().enumerate().collect());
            }
        }
        plan
    }

    fn real_rows(plan: &AssignmentPlan) -> DMatrix<f64> {
        let lift = RealCoefficients::for_plan(plan);
        let tasks: Vec<&Task> = plan.workers.iter().flatten().collect();
        DMatrix::from_fn(tasks.len(), plan.delta(), |r, j| match tasks[r] {
            Task::Coded(c) => lift.get(j, c[&j]),
            Task::Uncoded(_) => unreachable!(),
        })
    }

    #[test]
    fn real_lift_ignores_seed_and_keeps_minors_nonsingular() {
        let m = real_rows(&plan_from_cauchy(0));
        assert_eq!(m, real_rows(&plan_from_cauchy(12345)));
        for rows in (0..8).collect::<Vec<_>>().windows(5) {
            let sub = DMatrix::from_fn(5, 5, |i, j| m[(rows[i], j)]);
            assert!(condition(&sub) < 1e6);
        }
        for r in 0..8 {
            for s in r + 1..8 {
                for a in 0..5 {
                    for b in a + 1..5 {
                        let det = m[(r, a)] * m[(s, b)] - m[(r, b)] * m[(s, a)];
                        assert!(det.abs() > 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn conflicting_copies_rejected() {
        let plan = cyclic_uncoded(3, 2).unwrap();
        let a = int_matrix(6, 3);
        let x = DVector::from_element(3, 1.0);
        let layout = BlockLayout::new(6, 3).unwrap();
        let mut got = worker_products(&plan, &a, &x, &StateVector::new(vec![2, 2, 0])).unwrap();
        // worker 2's first block is A_2, also worker 1's second
        got[2].values[0] += 1.0;
        assert!(matches!(
            numeric_decode(&plan, &layout, &got),
            Err(Error::Inconsistent(_))
        ));
    }
}
