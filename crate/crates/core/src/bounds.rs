//! Closed-form thresholds and resilience values, plus the integer search
//! that lower-bounds the threshold of coded-at-top systems.
//!
//! Everything is computed in exact rational arithmetic. Threshold
//! expressions that come out fractional are rounded up, since a block count
//! below a fractional lower bound cannot meet it.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::{AssignmentPlan, Placement, SystemParams};
use crate::schemes;

/// Witness of the coded-at-top search: `x` coded-only blocks from partial
/// workers plus `beta` workers that finished everything.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub x: usize,
    pub beta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Lower bound on the recovery threshold `Q`.
    pub q_lower: usize,
    /// Exact `Q` when a matching construction is known.
    pub q_exact: Option<usize>,
    /// Straggler count the construction tolerates.
    pub resilience: usize,
    pub witness: Option<Witness>,
}

type Q = Ratio<i128>;

fn q(v: usize) -> Q {
    Q::from_integer(v as i128)
}

fn ceil_to_usize(v: Q) -> usize {
    v.ceil().to_integer().max(0) as usize
}

/// `max(delta, delta r - r (l + 1) / 2 + 1)` shared by the uncoded and
/// coded-at-bottom thresholds.
fn cyclic_threshold(delta: usize, r: usize, ell: usize) -> usize {
    let v = q(delta) * q(r) - q(r) * q(ell + 1) / q(2) + Q::one();
    delta.max(ceil_to_usize(v))
}

/// Lower bound on `Q` for any uncoded system `<n, l, delta, r>`.
pub fn uncoded_q_bound(params: &SystemParams) -> Result<usize> {
    params.check()?;
    if params.placement != Placement::UncodedOnly {
        return Err(Error::WrongPlacement(format!(
            "uncoded bound needs an uncoded system, got {}",
            params.placement
        )));
    }
    Ok(cyclic_threshold(params.delta, params.r_u, params.ell_u))
}

/// Largest straggler count an uncoded system with replication `r` can
/// tolerate; the cyclic construction attains it.
pub fn uncoded_resilience(r: usize) -> Result<usize> {
    if r < 1 {
        return Err(Error::InvalidParams(
            "replication must be at least 1".into(),
        ));
    }
    Ok(r - 1)
}

fn require_cyclic_coded(params: &SystemParams, allowed: &[Placement]) -> Result<()> {
    params.check()?;
    if !allowed.contains(&params.placement) {
        return Err(Error::WrongPlacement(format!(
            "expected one of {allowed:?}, got {}",
            params.placement
        )));
    }
    if params.delta != params.n {
        return Err(Error::InvalidParams(format!(
            "cyclic coded systems have delta = n, got delta = {}, n = {}",
            params.delta, params.n
        )));
    }
    Ok(())
}

/// Threshold of the cyclic coded-at-bottom construction.
pub fn coded_bottom_q(params: &SystemParams) -> Result<usize> {
    require_cyclic_coded(params, &[Placement::CodedBottom])?;
    Ok(cyclic_threshold(params.delta, params.r_u, params.ell_u))
}

/// `floor((n^2 g_c + n g_u - 1) / (n g_c + 1))` for the cyclic coded
/// constructions.
///
/// The count assumes every `k` workers hold at least `l_u + k - 1` uncoded
/// blocks, which needs `r_u >= 1`; with `r_u = 0` the system is a plain MDS
/// code and [`bound_report`] uses the MDS value instead.
pub fn coded_bottom_resilience(params: &SystemParams) -> Result<usize> {
    require_cyclic_coded(params, &[Placement::CodedBottom, Placement::CodedTop])?;
    let n = Q::from_integer(params.n as i128);
    let g_u = Q::new(params.ell_u as i128, params.delta as i128);
    let g_c = Q::new(params.ell_c as i128, params.delta as i128);
    let v = (n * n * g_c + n * g_u - Q::one()) / (n * g_c + Q::one());
    Ok(v.floor().to_integer().max(0) as usize)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exhaustive solution of
///
/// ```text
/// maximize    x + l beta + 1
/// subject to  x + l_c beta < delta * C(n - r_u, beta) / C(n, beta)
/// ```
///
/// over `beta in 0..=n - r_u` and `x in 0..=l_c (n - beta)`, then floored
/// at `delta`. Ties keep the smallest `beta`, then the smallest `x`.
pub fn coded_top_q_bound(params: &SystemParams) -> Result<BoundReport> {
    require_cyclic_coded(params, &[Placement::CodedTop])?;
    if params.r_u < 1 {
        return Err(Error::InvalidParams(
            "coded-top bound needs r_u >= 1".into(),
        ));
    }
    let (n, r_u, ell, ell_c) = (params.n, params.r_u, params.ell(), params.ell_c);
    let mut best: Option<(usize, Witness)> = None;
    for beta in 0..=n - r_u {
        let rhs = BigRational::new(
            BigInt::from(params.delta) * binomial(n - r_u, beta),
            binomial(n, beta),
        );
        for x in 0..=ell_c * (n - beta) {
            let lhs = BigRational::from_integer(BigInt::from(x + ell_c * beta));
            if lhs >= rhs {
                break;
            }
            let objective = x + ell * beta + 1;
            if best.is_none_or(|(b, _)| objective > b) {
                best = Some((objective, Witness { x, beta }));
            }
        }
    }
    let (objective, witness) = match best {
        Some((o, w)) => (o, Some(w)),
        None => (0, None),
    };
    Ok(BoundReport {
        q_lower: objective.max(params.delta),
        q_exact: None,
        resilience: coded_bottom_resilience(params)?,
        witness,
    })
}

/// `delta * C(n - r_u, beta) / C(n, beta)` as a float, for display.
pub fn coded_top_capacity(params: &SystemParams, beta: usize) -> f64 {
    let r = BigRational::new(
        BigInt::from(params.delta) * binomial(params.n - params.r_u, beta),
        binomial(params.n, beta),
    );
    r.to_f64().unwrap_or(f64::NAN)
}

/// Whether `x + l_c beta < delta C(n - r_u, beta) / C(n, beta)` holds.
pub fn coded_top_feasible(params: &SystemParams, x: usize, beta: usize) -> bool {
    if beta > params.n {
        return false;
    }
    let lhs = BigRational::from_integer(BigInt::from(x + params.ell_c * beta));
    let rhs = BigRational::new(
        BigInt::from(params.delta) * binomial(params.n - params.r_u.min(params.n), beta),
        binomial(params.n, beta),
    );
    lhs < rhs
}

fn mds_resilience(params: &SystemParams) -> usize {
    // (n - s) l >= delta
    let need = params.delta.div_ceil(params.ell());
    params.n.saturating_sub(need)
}

/// Every applicable bound for a parameter set, assuming the cyclic (or
/// MDS) construction where one exists.
pub fn bound_report(params: &SystemParams) -> Result<BoundReport> {
    params.check()?;
    let cyclic = params.delta == params.n;
    match params.placement {
        Placement::UncodedOnly => {
            let q = uncoded_q_bound(params)?;
            let exact = cyclic && params.ell_u == params.r_u;
            Ok(BoundReport {
                q_lower: q,
                q_exact: exact.then_some(q),
                resilience: uncoded_resilience(params.r_u)?,
                witness: None,
            })
        }
        Placement::CodedBottom if params.r_u == 0 => Ok(BoundReport {
            q_lower: params.delta,
            q_exact: cyclic.then_some(params.delta),
            resilience: mds_resilience(params),
            witness: None,
        }),
        Placement::CodedBottom => {
            let q = coded_bottom_q(params)?;
            Ok(BoundReport {
                q_lower: q,
                q_exact: Some(q),
                resilience: coded_bottom_resilience(params)?,
                witness: None,
            })
        }
        Placement::CodedTop if params.r_u == 0 => Ok(BoundReport {
            q_lower: params.delta,
            q_exact: cyclic.then_some(params.delta),
            resilience: mds_resilience(params),
            witness: None,
        }),
        Placement::CodedTop => coded_top_q_bound(params),
        Placement::FullyCoded => Ok(BoundReport {
            q_lower: params.delta,
            q_exact: Some(params.delta),
            resilience: mds_resilience(params),
            witness: None,
        }),
    }
}

/// Whether `plan` is exactly what [`crate::schemes`] builds for its
/// parameters, in which case the report's exact claims apply to it.
pub fn is_reference_construction(plan: &AssignmentPlan) -> bool {
    let p = &plan.params;
    let rebuilt = match p.placement {
        Placement::UncodedOnly if p.delta == p.n && p.ell_u == p.r_u => {
            schemes::cyclic_uncoded(p.n, p.r_u)
        }
        Placement::CodedBottom | Placement::CodedTop if p.delta == p.n => {
            schemes::cyclic_coded(p.n, p.r_u, p.ell_c, p.placement)
        }
        Placement::FullyCoded => schemes::mds_plan(p.n, p.ell_c, p.delta),
        _ => return false,
    };
    rebuilt.is_ok_and(|r| r.workers == plan.workers)
}
