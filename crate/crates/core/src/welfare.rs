//! Exact optimal-welfare oracles.
//!
//! The primary n-player oracle enumerates one clause per player: once the clauses are
//! fixed, each item independently goes to the player whose clause values it most, and
//! an XOS player's value on the bundle it receives is its best clause on that bundle, so
//! the maximum over clause tuples is the optimum. [`brute_force_partitions`] walks all
//! `n^m` ownership vectors instead and is kept as an independent cross-check.

use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::valuation::{argmax_clause, Allocation, Clause, Valuation};
use rayon::prelude::*;
use serde::Serialize;

/// Default cap on the number of clause tuples [`sw_star_n`] enumerates.
pub const DEFAULT_TUPLE_BUDGET: u64 = 10_000_000;
/// Cap on `n^m` for [`brute_force_partitions`].
pub const PARTITION_GUARD: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WelfareResult {
    pub value: f64,
    pub allocation: Allocation,
    /// Per player, the lowest clause index attaining its value on its bundle.
    pub witnesses: Vec<usize>,
}

impl WelfareResult {
    fn from_allocation(vals: &[Valuation], allocation: Allocation) -> Result<Self> {
        let mut value = 0.0;
        let mut witnesses = Vec::with_capacity(vals.len());
        for (l, v) in vals.iter().enumerate() {
            let b = allocation.bundle(l);
            value += v.value(&b)?;
            witnesses.push(argmax_clause(v, &b)?);
        }
        Ok(WelfareResult {
            value,
            allocation,
            witnesses,
        })
    }
}

pub(crate) fn same_m(vals: &[Valuation]) -> Result<usize> {
    let m = vals
        .first()
        .map(Valuation::m)
        .ok_or_else(|| Error::InvalidParameter("no valuations".into()))?;
    if let Some(v) = vals.iter().find(|v| v.m() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: v.m(),
        });
    }
    Ok(m)
}

fn check_pair(a: &Clause, b: &Clause) -> Result<()> {
    if a.m() != b.m() {
        return Err(Error::DimensionMismatch {
            expected: a.m(),
            found: b.m(),
        });
    }
    Ok(())
}

/// `SW*(a, b)` for two additive clauses: `Σ_i max(a_i, b_i)`.
pub(crate) fn additive_pair_value(a: &Clause, b: &Clause) -> f64 {
    match (a.as_set(), b.as_set()) {
        (Some(x), Some(y)) => x.union_len(y) as f64,
        _ => (0..a.m()).map(|i| a.value(i).max(b.value(i))).sum(),
    }
}

/// Per-item-max allocation for two additive clauses, ties to player 0.
pub(crate) fn additive_pair_allocation(a: &Clause, b: &Clause) -> Allocation {
    let owner = (0..a.m())
        .map(|i| if a.value(i) >= b.value(i) { 0 } else { 1 })
        .collect();
    Allocation::new(2, owner).expect("two players")
}

pub fn sw_star_additive_pair(a: &Clause, b: &Clause) -> Result<WelfareResult> {
    check_pair(a, b)?;
    Ok(WelfareResult {
        value: additive_pair_value(a, b),
        allocation: additive_pair_allocation(a, b),
        witnesses: vec![0, 0],
    })
}

/// Best clause pair `(i, j)` by additive-pair welfare, lowest `(i, j)` on ties.
pub(crate) fn best_clause_pair(xs: &[&Clause], ys: &[&Clause]) -> (usize, usize, f64) {
    let rows: Vec<(usize, f64)> = xs
        .par_iter()
        .map(|a| {
            let mut best = (0, f64::NEG_INFINITY);
            for (j, b) in ys.iter().enumerate() {
                let v = additive_pair_value(a, b);
                if v > best.1 {
                    best = (j, v);
                }
            }
            best
        })
        .collect();
    let mut best = (0, 0, f64::NEG_INFINITY);
    for (i, (j, v)) in rows.into_iter().enumerate() {
        if v > best.2 {
            best = (i, j, v);
        }
    }
    best
}

/// `SW*(v1, v2) = max_{j,j'} SW*(a_j, b_j')`.
pub fn sw_star_xos_pair(v1: &Valuation, v2: &Valuation) -> Result<WelfareResult> {
    if v1.m() != v2.m() {
        return Err(Error::DimensionMismatch {
            expected: v1.m(),
            found: v2.m(),
        });
    }
    let xs: Vec<&Clause> = v1.clauses().iter().collect();
    let ys: Vec<&Clause> = v2.clauses().iter().collect();
    let (i, j, value) = best_clause_pair(&xs, &ys);
    let allocation = additive_pair_allocation(xs[i], ys[j]);
    Ok(WelfareResult {
        value,
        allocation,
        witnesses: vec![i, j],
    })
}

fn tuple_count(vals: &[Valuation]) -> u128 {
    vals.iter()
        .fold(1u128, |acc, v| acc.saturating_mul(v.len() as u128))
}

/// Value of the per-item assignment for a fixed clause tuple, plus the owners.
fn tuple_assignment(vals: &[Valuation], tuple: &[usize], m: usize) -> (f64, Vec<usize>) {
    let mut total = 0.0;
    let mut owner = Vec::with_capacity(m);
    for i in 0..m {
        let mut best = (0, f64::NEG_INFINITY);
        for (l, v) in vals.iter().enumerate() {
            let x = v.clause(tuple[l]).value(i);
            if x > best.1 {
                best = (l, x);
            }
        }
        total += best.1;
        owner.push(best.0);
    }
    (total, owner)
}

fn decode_tuple(mut idx: u128, vals: &[Valuation]) -> Vec<usize> {
    // Last player varies fastest, so index order is lexicographic tuple order.
    let mut t = vec![0; vals.len()];
    for l in (0..vals.len()).rev() {
        let r = vals[l].len() as u128;
        t[l] = (idx % r) as usize;
        idx /= r;
    }
    t
}

/// Exact `SW*(v_1, ..., v_n)` by clause-tuple enumeration.
pub fn sw_star_n(vals: &[Valuation], budget: u64) -> Result<WelfareResult> {
    let m = same_m(vals)?;
    let count = tuple_count(vals);
    if count > budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "clause-tuple welfare oracle",
            needed: count,
            budget,
        });
    }
    let (best_idx, _) = (0..count as u64)
        .into_par_iter()
        .map(|idx| {
            let t = decode_tuple(idx as u128, vals);
            (idx, tuple_assignment(vals, &t, m).0)
        })
        .reduce(
            || (u64::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let t = decode_tuple(best_idx as u128, vals);
    let (_, owner) = tuple_assignment(vals, &t, m);
    WelfareResult::from_allocation(vals, Allocation::new(vals.len(), owner)?)
}

/// Exhaustive maximum over all `n^m` ownership vectors.
pub fn brute_force_partitions(vals: &[Valuation]) -> Result<WelfareResult> {
    let m = same_m(vals)?;
    let n = vals.len();
    let total = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if total > PARTITION_GUARD as u128 {
        return Err(Error::BudgetExceeded {
            what: "partition brute force",
            needed: total,
            budget: PARTITION_GUARD,
        });
    }
    let mut owner = vec![0usize; m];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let mut value = 0.0;
        for (l, v) in vals.iter().enumerate() {
            let mut bundle = ItemSet::empty(m);
            for (i, &p) in owner.iter().enumerate() {
                if p == l {
                    bundle.insert(i);
                }
            }
            value += v.value(&bundle)?;
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, owner.clone()));
        }
        // Odometer increment.
        let mut i = 0;
        while i < m {
            owner[i] += 1;
            if owner[i] < n {
                break;
            }
            owner[i] = 0;
            i += 1;
        }
        if i == m {
            break;
        }
    }
    let (_, owner) = best.expect("at least one partition");
    WelfareResult::from_allocation(vals, Allocation::new(n, owner)?)
}

/// Alice takes exactly the support of her binary clause `b`; optimal against any
/// binary XOS opponent.
pub fn alice_only_allocation(b: &Clause, v2: &Valuation) -> Result<WelfareResult> {
    let set = b
        .as_set()
        .ok_or(Error::NotBinary("alice-only allocation"))?;
    if !v2.is_binary() {
        return Err(Error::NotBinary("alice-only allocation"));
    }
    if b.m() != v2.m() {
        return Err(Error::DimensionMismatch {
            expected: b.m(),
            found: v2.m(),
        });
    }
    let rest = set.complement();
    let bob = v2.value(&rest)?;
    Ok(WelfareResult {
        value: set.len() as f64 + bob,
        allocation: Allocation::two_party(set),
        witnesses: vec![0, argmax_clause(v2, &rest)?],
    })
}
