//! Batch verifiers behind `simulbid verify`.

use crate::source::LoadedInstance;
use rayon::prelude::*;
use serde::Serialize;
use simulbid_core::mechanism::{check_truthfulness, Search};
use simulbid_core::sketch::{
    sketch_exact, sketch_local_search, verify_exchange_lemma_binary, verify_exchange_lemma_general,
};
use simulbid_core::{ItemSet, Rational64, SketchParams, Valuation};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExchangeRow {
    pub instance: String,
    pub player: usize,
    pub k: usize,
    pub alpha: String,
    pub method: String,
    pub binary: bool,
    pub passed: Option<bool>,
    pub worst_slack: Option<f64>,
    pub error: Option<String>,
}

/// Checks the exchange inequalities for the local-search sketch of every player and,
/// when the enumeration fits in `budget`, for the exact sketch as well.
pub fn exchange_rows(
    instances: &[LoadedInstance],
    ks: &[usize],
    alphas: &[Rational64],
    budget: u64,
) -> Vec<ExchangeRow> {
    instances
        .par_iter()
        .flat_map_iter(|li| {
            let mut rows = Vec::new();
            for (player, v) in li.instance.players.iter().enumerate() {
                for &k in ks {
                    for &a in alphas {
                        let base = |method: &str| ExchangeRow {
                            instance: li.id.clone(),
                            player,
                            k,
                            alpha: a.to_string(),
                            method: method.to_string(),
                            binary: v.is_binary(),
                            passed: None,
                            worst_slack: None,
                            error: None,
                        };
                        let params = match SketchParams::new(k, a) {
                            Ok(p) => p,
                            Err(e) => {
                                rows.push(ExchangeRow {
                                    error: Some(e.to_string()),
                                    ..base("none")
                                });
                                continue;
                            }
                        };
                        let mut sketches = vec![sketch_local_search(v, params)];
                        if let Ok(ex) = sketch_exact(v, params, budget) {
                            sketches.push(ex);
                        }
                        for sk in sketches {
                            let report = if v.is_binary() {
                                verify_exchange_lemma_binary(&sk, v)
                            } else {
                                verify_exchange_lemma_general(&sk, v)
                            };
                            let mut row = base(sk.method.as_str());
                            match report {
                                Ok(r) => {
                                    row.passed = Some(r.passed);
                                    row.worst_slack = Some(r.worst_slack);
                                }
                                Err(e) => row.error = Some(e.to_string()),
                            }
                            rows.push(row);
                        }
                    }
                }
            }
            rows
        })
        .collect()
}

/// Every binary valuation on `m` items with between 1 and `t` clauses (clauses as a
/// multiset of subsets, empty set included).
pub fn all_binary_valuations(m: usize, t: usize) -> Vec<Valuation> {
    let subsets: Vec<Vec<usize>> = (0u64..1 << m)
        .map(|s| (0..m).filter(|&i| s >> i & 1 == 1).collect())
        .collect();
    fn rec(n: usize, left: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(n, left - 1, j, cur, out);
            cur.pop();
        }
    }
    let mut choices = Vec::new();
    rec(subsets.len(), t, 0, &mut Vec::new(), &mut choices);
    choices
        .into_iter()
        .map(|c| {
            let sets: Vec<&[usize]> = c.iter().map(|&j| subsets[j].as_slice()).collect();
            Valuation::binary(m, &sets).expect("valid subsets")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruthfulnessSummary {
    pub m: usize,
    pub t: usize,
    pub k: usize,
    pub valuations: usize,
    pub candidates: u64,
    pub passed: usize,
    /// Smallest gap between the sketch's utility and the best non-sketch report.
    pub min_strict_gap: Option<String>,
    pub failures: Vec<String>,
}

/// Exhaustive best-response check over every binary valuation on `m` items with at
/// most `t` clauses.
pub fn truthfulness_sweep(m: usize, t: usize, k: usize, budget: u64) -> TruthfulnessSummary {
    let vals = all_binary_valuations(m, t);
    let full = ItemSet::full(m);
    let reports: Vec<_> = vals
        .par_iter()
        .map(|v| check_truthfulness(v, &full, k, Search::Exhaustive, budget))
        .collect();
    let mut s = TruthfulnessSummary {
        m,
        t,
        k,
        valuations: vals.len(),
        candidates: 0,
        passed: 0,
        min_strict_gap: None,
        failures: Vec::new(),
    };
    let mut min_gap = None;
    for (v, r) in vals.iter().zip(reports) {
        match r {
            Ok(r) => {
                s.candidates += r.candidates;
                if r.passed() {
                    s.passed += 1;
                } else {
                    s.failures.push(format!("{v:?}"));
                }
                if let Some(g) = r.strict_gap() {
                    min_gap = Some(min_gap.map_or(g, |m: simulbid_core::Rational| m.min(g)));
                }
            }
            Err(e) => s.failures.push(format!("{v:?}: {e}")),
        }
    }
    s.min_strict_gap = min_gap.map(|g| g.to_string());
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_enumeration_counts() {
        // 4 subsets of 2 items, multisets of size 1..=2: 4 + 10.
        assert_eq!(all_binary_valuations(2, 2).len(), 14);
        assert_eq!(all_binary_valuations(3, 3).len(), 8 + 36 + 120);
    }

    #[test]
    fn two_item_truthfulness() {
        let s = truthfulness_sweep(2, 2, 2, 10_000);
        assert_eq!(s.passed, s.valuations);
        assert!(s.failures.is_empty());
    }
}
