//! Plan constructors: cyclic uncoded, cyclic with coded rows at the bottom
//! or top, and the dense MDS baseline. Coded rows come from Cauchy matrices.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::field::{Fp, MODULUS};
use crate::plan::{AssignmentPlan, Placement, SystemParams, Task};

/// Cauchy matrix with entries `(x_i - y_j)^-1` over [`Fp`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CauchyMatrix {
    rows: usize,
    cols: usize,
    x_params: Vec<Fp>,
    y_params: Vec<Fp>,
    entries: Vec<Fp>,
}

impl CauchyMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn x_params(&self) -> &[Fp] {
        &self.x_params
    }

    pub fn y_params(&self) -> &[Fp] {
        &self.y_params
    }

    pub fn entry(&self, i: usize, j: usize) -> Fp {
        self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Fp] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Rows `rows` restricted to columns `cols`.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<Vec<Fp>> {
        rows.iter()
            .map(|&i| cols.iter().map(|&j| self.entry(i, j)).collect())
            .collect()
    }
}

/// Deterministic `m x k` Cauchy matrix with `x_i = seed + k + i` and
/// `y_j = seed + j`, reduced into the field.
pub fn cauchy(m: usize, k: usize, seed: u64) -> Result<CauchyMatrix> {
    if (m + k) as u64 >= MODULUS {
        return Err(Error::InvalidParams(format!(
            "cauchy needs m + k < {MODULUS}, got {}",
            m + k
        )));
    }
    let x_params: Vec<Fp> = (0..m).map(|i| Fp::new(seed + (k + i) as u64)).collect();
    let y_params: Vec<Fp> = (0..k).map(|j| Fp::new(seed + j as u64)).collect();
    let mut entries = Vec::with_capacity(m * k);
    for &x in &x_params {
        for &y in &y_params {
            entries.push((x - y).inv());
        }
    }
    Ok(CauchyMatrix {
        rows: m,
        cols: k,
        x_params,
        y_params,
        entries,
    })
}

/// How coded rows are supported on the blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodedSupport {
    /// The whole Cauchy row.
    Full,
    /// The Cauchy row with the worker's own uncoded blocks zeroed out.
    Masked,
}

/// Worker `i` (0-based) gets blocks `i, i+1, .., i+r-1` mod `n`.
pub fn cyclic_uncoded(n: usize, r: usize) -> Result<AssignmentPlan> {
    if r < 1 || r > n {
        return Err(Error::InvalidParams(format!(
            "cyclic uncoded needs 1 <= r <= n, got r = {r}, n = {n}"
        )));
    }
    let params = SystemParams::uncoded(n, r, n, r)?;
    let workers = (0..n).map(|i| cyclic_window(i, r, n)).collect();
    Ok(AssignmentPlan { params, workers })
}

fn cyclic_window(i: usize, len: usize, delta: usize) -> Vec<Task> {
    (0..len).map(|j| Task::Uncoded((i + j) % delta)).collect()
}

/// Cyclic plan with `ell_c` Cauchy-coded rows per worker, masked at the
/// bottom and full-support at the top.
pub fn cyclic_coded(
    n: usize,
    r_u: usize,
    ell_c: usize,
    placement: Placement,
) -> Result<AssignmentPlan> {
    let support = match placement {
        Placement::CodedTop => CodedSupport::Full,
        _ => CodedSupport::Masked,
    };
    cyclic_coded_with(n, r_u, ell_c, placement, support)
}

/// [`cyclic_coded`] with an explicit choice of coded-row support.
pub fn cyclic_coded_with(
    n: usize,
    r_u: usize,
    ell_c: usize,
    placement: Placement,
    support: CodedSupport,
) -> Result<AssignmentPlan> {
    if !matches!(placement, Placement::CodedBottom | Placement::CodedTop) {
        return Err(Error::WrongPlacement(format!(
            "cyclic coded needs coded-bottom or coded-top, got {placement}"
        )));
    }
    if r_u > n || r_u + ell_c > n || (r_u == 0 && ell_c == 0) {
        return Err(Error::InvalidParams(format!(
            "cyclic coded needs r_u <= n, r_u + l_c <= n and a non-empty worker, \
             got n = {n}, r_u = {r_u}, l_c = {ell_c}"
        )));
    }
    let params = SystemParams::new(n, n, r_u, ell_c, r_u, placement)?;
    let c = cauchy(n * ell_c, n, 0)?;
    let workers = (0..n)
        .map(|i| {
            let uncoded = cyclic_window(i, r_u, n);
            let own: BTreeSet<usize> = (0..r_u).map(|j| (i + j) % n).collect();
            let coded = (0..ell_c).map(|j| {
                let row = c.row(i * ell_c + j);
                let coeffs: BTreeMap<usize, Fp> = row
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| support == CodedSupport::Full || !own.contains(k))
                    .map(|(k, &v)| (k, v))
                    .collect();
                Task::Coded(coeffs)
            });
            match placement {
                Placement::CodedTop => coded.chain(uncoded).collect(),
                _ => uncoded.into_iter().chain(coded).collect(),
            }
        })
        .collect();
    Ok(AssignmentPlan { params, workers })
}

/// Every task is a full-support row of an `(n l) x delta` Cauchy matrix, so
/// any `delta` received products decode.
pub fn mds_plan(n: usize, ell: usize, delta: usize) -> Result<AssignmentPlan> {
    if n * ell < delta {
        return Err(Error::InvalidParams(format!(
            "mds needs n * l >= delta, got {} < {delta}",
            n * ell
        )));
    }
    let params = SystemParams::new(n, delta, 0, ell, 0, Placement::FullyCoded)?;
    let c = cauchy(n * ell, delta, 0)?;
    let workers = (0..n)
        .map(|i| {
            (0..ell)
                .map(|j| Task::Coded(c.row(i * ell + j).iter().copied().enumerate().collect()))
                .collect()
        })
        .collect();
    Ok(AssignmentPlan { params, workers })
}
