//! Independent reference computations. Nothing here calls the library's own
//! welfare or sketch code; instances are read through `Clause::value` only.

#![allow(dead_code)]

use simulbid_core::{Rational, Rational64, Valuation};

/// `v(S)` from raw clause values, `S` given as a bitmask over at most 64 items.
pub fn value_of(v: &Valuation, mask: u64) -> f64 {
    v.clauses()
        .iter()
        .map(|c| {
            (0..v.m())
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| c.value(i))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Optimal welfare by trying every assignment of items to players (`n^m` of them).
pub fn brute_force_sw(vals: &[Valuation]) -> f64 {
    let n = vals.len();
    let m = vals[0].m();
    let mut owner = vec![0usize; m];
    let mut best = 0.0f64;
    loop {
        let mut masks = vec![0u64; n];
        for (i, &p) in owner.iter().enumerate() {
            masks[p] |= 1 << i;
        }
        let w: f64 = vals.iter().zip(&masks).map(|(v, &s)| value_of(v, s)).sum();
        best = best.max(w);
        let mut pos = 0;
        loop {
            if pos == m {
                return best;
            }
            owner[pos] += 1;
            if owner[pos] < n {
                break;
            }
            owner[pos] = 0;
            pos += 1;
        }
    }
}

/// `max_S a(S) + v2([m] \ S)` for an additive `a`, over all `2^m` subsets.
pub fn best_subset_for_alice(clause: &[f64], v2: &Valuation) -> f64 {
    let m = clause.len();
    (0u64..1 << m)
        .map(|s| {
            let a: f64 = (0..m).filter(|&i| s >> i & 1 == 1).map(|i| clause[i]).sum();
            a + value_of(v2, !s & ((1u64 << m) - 1))
        })
        .fold(0.0, f64::max)
}

/// `Σ_i (x_i − α x_i²)` for a binary multiset, with `x_i` the covered fraction.
pub fn binary_objective(v: &Valuation, idx: &[usize], alpha: Rational64) -> Rational {
    let k = idx.len() as i128;
    let a = Rational::new(*alpha.numer() as i128, *alpha.denom() as i128);
    (0..v.m())
        .map(|i| {
            let hits = idx.iter().filter(|&&j| v.clause(j).value(i) == 1.0).count() as i128;
            let x = Rational::new(hits, k);
            x - a * x * x
        })
        .sum()
}

/// `Σ_i ∫ (x_{i,u} − α x_{i,u}²) du` where `x_{i,u}` is the fraction of chosen
/// clauses with value at least `u` on item `i`.
pub fn integral_objective(v: &Valuation, idx: &[usize], alpha: f64) -> f64 {
    let k = idx.len() as f64;
    let mut total = 0.0;
    for i in 0..v.m() {
        let mut levels: Vec<f64> = idx.iter().map(|&j| v.clause(j).value(i)).collect();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        let mut prev = 0.0;
        for &u in &levels {
            let x = idx.iter().filter(|&&j| v.clause(j).value(i) >= u).count() as f64 / k;
            total += (u - prev) * (x - alpha * x * x);
            prev = u;
        }
    }
    total
}

/// Every non-decreasing index sequence of length `k` over `0..t`.
pub fn multisets(t: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(t: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..t {
            cur.push(j);
            rec(t, k, j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(t, k, 0, &mut Vec::new(), &mut out);
    out
}

pub fn ratio_ok_exact(achieved: Rational, opt: f64, bound: Rational64) -> bool {
    let opt = Rational::from_integer(opt as i128);
    achieved >= opt * Rational::new(*bound.numer() as i128, *bound.denom() as i128)
}

pub fn ratio_ok_float(achieved: f64, opt: f64, bound: Rational64) -> bool {
    let b = *bound.numer() as f64 / *bound.denom() as f64;
    achieved >= b * opt * (1.0 - 1e-9)
}
