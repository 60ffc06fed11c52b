//! `(k, α)`-sketches: the objective, exact search, swap local search and the
//! exchange-inequality verifiers.
//!
//! With `x_{i,u} = #{j : b_j(i) ≥ u} / k`, the objective is
//! `Σ_i ∫ (x_{i,u} − α x_{i,u}²) du`. Since `∫ x² du = (1/k²) Σ_{j,j'} min(b_j(i), b_j'(i))`
//! it equals `(1/k) Σ_j b_j([m]) − (α/k²) Σ_{j,j'} M[b_j][b_j']` with
//! `M[a][b] = Σ_i min(a_i, b_i)`. The search code works with that Gram form, scaled by
//! `q k²` where `α = p/q`, so integer-valued inputs are handled in exact integers.

use crate::error::{Error, Result};
use crate::exact::{big_from_f64, big_from_small, big_to_f64, to_f64, Rational};
use crate::valuation::{Clause, Valuation};
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::ops::{Add, Mul, Sub};

/// Default cap on the number of k-multisets [`sketch_exact`] enumerates.
pub const DEFAULT_SKETCH_BUDGET: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SketchParams {
    k: usize,
    alpha: Rational64,
}

impl SketchParams {
    pub fn new(k: usize, alpha: Rational64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if alpha < Rational64::zero() || alpha > Rational64::new(1, 2) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 1/2], got {alpha}"
            )));
        }
        Ok(SketchParams { k, alpha })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> Rational64 {
        self.alpha
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchMethod {
    Exact,
    LocalSearch,
}

impl SketchMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SketchMethod::Exact => "exact",
            SketchMethod::LocalSearch => "local_search",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sketch {
    /// Clause indices into the source valuation, sorted ascending.
    pub indices: Vec<usize>,
    pub params: SketchParams,
    pub objective: f64,
    /// Exact objective when every clause value is an integer.
    pub objective_exact: Option<Rational>,
    pub method: SketchMethod,
}

impl Sketch {
    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn clauses<'a>(&self, v: &'a Valuation) -> Vec<&'a Clause> {
        self.indices.iter().map(|&j| v.clause(j)).collect()
    }

    /// `k · x_i` for a binary valuation: how many sketch clauses contain item `i`.
    pub fn coverage_counts(&self, v: &Valuation) -> Result<Vec<u32>> {
        coverage_counts(v, &self.indices)
    }

    /// `x_i` as exact rationals (binary valuations only).
    pub fn coverage(&self, v: &Valuation) -> Result<Vec<Rational>> {
        let k = self.k() as i128;
        Ok(self
            .coverage_counts(v)?
            .into_iter()
            .map(|c| Rational::new(c as i128, k))
            .collect())
    }
}

fn check_indices(v: &Valuation, indices: &[usize]) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::InvalidParameter(
            "a sketch needs at least one clause".into(),
        ));
    }
    if let Some(&j) = indices.iter().find(|&&j| j >= v.len()) {
        return Err(Error::InvalidParameter(format!(
            "clause index {j} out of range for {} clauses",
            v.len()
        )));
    }
    Ok(())
}

fn coverage_counts(v: &Valuation, indices: &[usize]) -> Result<Vec<u32>> {
    check_indices(v, indices)?;
    let mut counts = vec![0u32; v.m()];
    for &j in indices {
        let set = v
            .clause(j)
            .as_set()
            .ok_or(Error::NotBinary("binary sketch objective"))?;
        for i in set.iter() {
            counts[i] += 1;
        }
    }
    Ok(counts)
}

/// `Σ_i (x_i − α x_i²)` for a binary valuation, computed per item in exact arithmetic.
pub fn objective_binary(v: &Valuation, indices: &[usize], alpha: Rational64) -> Result<Rational> {
    let counts = coverage_counts(v, indices)?;
    let k = indices.len() as i128;
    let a = crate::exact::widen(alpha);
    Ok(counts.into_iter().fold(Rational::zero(), |acc, c| {
        let x = Rational::new(c as i128, k);
        acc + x - a * x * x
    }))
}

/// Sorted-descending values of the sketch clauses at item `i`.
fn item_levels(clauses: &[&Clause], i: usize) -> Vec<f64> {
    let mut w: Vec<f64> = clauses.iter().map(|c| c.value(i)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

/// The integral objective evaluated segment by segment: on `(w_{r+1}, w_r]` exactly
/// `r` of the `k` clauses reach level `u`, so `x = r/k` there.
pub fn objective_general(v: &Valuation, indices: &[usize], alpha: Rational64) -> Result<f64> {
    check_indices(v, indices)?;
    let clauses: Vec<&Clause> = indices.iter().map(|&j| v.clause(j)).collect();
    let k = indices.len() as f64;
    let a = *alpha.numer() as f64 / *alpha.denom() as f64;
    let mut total = 0.0;
    for i in 0..v.m() {
        let w = item_levels(&clauses, i);
        for r in 1..=w.len() {
            let next = if r < w.len() { w[r] } else { 0.0 };
            let x = r as f64 / k;
            total += (w[r - 1] - next) * (x - a * x * x);
        }
    }
    Ok(total)
}

/// Exact version of [`objective_general`] over arbitrary float inputs.
pub fn objective_general_exact(
    v: &Valuation,
    indices: &[usize],
    alpha: Rational64,
) -> Result<BigRational> {
    check_indices(v, indices)?;
    let clauses: Vec<&Clause> = indices.iter().map(|&j| v.clause(j)).collect();
    let k = BigInt::from(indices.len());
    let a = big_from_small(alpha);
    let mut total = BigRational::zero();
    for i in 0..v.m() {
        let w = item_levels(&clauses, i);
        for r in 1..=w.len() {
            let next = if r < w.len() { w[r] } else { 0.0 };
            let x = BigRational::new(BigInt::from(r), k.clone());
            let width = big_from_f64(w[r - 1]) - big_from_f64(next);
            total += width * (x.clone() - a.clone() * x.clone() * x);
        }
    }
    Ok(total)
}

trait Num:
    Copy + PartialOrd + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn zero() -> Self;
    fn from_usize(x: usize) -> Self;
    fn from_i64(x: i64) -> Self;
    fn from_value(x: f64) -> Self;
}

impl Num for i128 {
    fn zero() -> Self {
        0
    }
    fn from_usize(x: usize) -> Self {
        x as i128
    }
    fn from_i64(x: i64) -> Self {
        x as i128
    }
    fn from_value(x: f64) -> Self {
        x as i128
    }
}

impl Num for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_usize(x: usize) -> Self {
        x as f64
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn from_value(x: f64) -> Self {
        x
    }
}

/// Clause totals and the min-inner-product Gram matrix.
struct Table<N> {
    t: usize,
    tot: Vec<N>,
    gram: Vec<N>,
}

impl<N: Num> Table<N> {
    fn build(v: &Valuation) -> Self {
        let t = v.len();
        let cl = v.clauses();
        let tot = cl.iter().map(|c| N::from_value(c.total())).collect();
        let rows: Vec<Vec<N>> = (0..t)
            .into_par_iter()
            .map(|a| {
                (0..t)
                    .map(|b| {
                        if b < a {
                            N::zero()
                        } else {
                            min_inner(&cl[a], &cl[b])
                        }
                    })
                    .collect()
            })
            .collect();
        let mut gram = vec![N::zero(); t * t];
        for a in 0..t {
            for b in a..t {
                gram[a * t + b] = rows[a][b];
                gram[b * t + a] = rows[a][b];
            }
        }
        Table { t, tot, gram }
    }

    fn g(&self, a: usize, b: usize) -> N {
        self.gram[a * self.t + b]
    }

    /// `q k Σ tot − p Σ_{j,j'} M`.
    fn score(&self, idx: &[usize], p: N, q: N) -> N {
        let k = N::from_usize(idx.len());
        let mut tot = N::zero();
        let mut pairs = N::zero();
        for &a in idx {
            tot = tot + self.tot[a];
            for &b in idx {
                pairs = pairs + self.g(a, b);
            }
        }
        q * k * tot - p * pairs
    }

    fn exact_search(&self, k: usize, p: N, q: N) -> (Vec<usize>, N) {
        let kk = N::from_usize(k);
        let results: Vec<(Vec<usize>, N)> = (0..self.t)
            .into_par_iter()
            .map(|first| {
                let mut cur = vec![first];
                let mut best: Option<(Vec<usize>, N)> = None;
                self.dfs(
                    &mut cur,
                    k,
                    self.tot[first],
                    self.g(first, first),
                    kk,
                    p,
                    q,
                    &mut best,
                );
                best.expect("every subtree has a leaf")
            })
            .collect();
        let mut best = results[0].clone();
        for r in results.into_iter().skip(1) {
            if r.1 > best.1 {
                best = r;
            }
        }
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        cur: &mut Vec<usize>,
        k: usize,
        tot: N,
        pairs: N,
        kk: N,
        p: N,
        q: N,
        best: &mut Option<(Vec<usize>, N)>,
    ) {
        if cur.len() == k {
            let s = q * kk * tot - p * pairs;
            if best.as_ref().is_none_or(|b| s > b.1) {
                *best = Some((cur.clone(), s));
            }
            return;
        }
        let start = *cur.last().expect("non-empty prefix");
        for l in start..self.t {
            let mut cross = N::zero();
            for &b in cur.iter() {
                cross = cross + self.g(l, b);
            }
            let pairs2 = pairs + N::from_i64(2) * cross + self.g(l, l);
            cur.push(l);
            self.dfs(cur, k, tot + self.tot[l], pairs2, kk, p, q, best);
            cur.pop();
        }
    }

    fn local_search(&self, k: usize, p: N, q: N) -> (Vec<usize>, N) {
        let mut order: Vec<usize> = (0..self.t).collect();
        order.sort_by(|&a, &b| {
            self.tot[b]
                .partial_cmp(&self.tot[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let mut idx: Vec<usize> = (0..k).map(|j| order[j % self.t]).collect();
        idx.sort_unstable();
        let kk = N::from_usize(k);
        let two = N::from_i64(2);
        loop {
            let row: Vec<N> = (0..self.t)
                .map(|x| idx.iter().fold(N::zero(), |acc, &b| acc + self.g(x, b)))
                .collect();
            let mut best: Option<(usize, usize, N)> = None;
            for (pos, &c) in idx.iter().enumerate() {
                if pos > 0 && idx[pos - 1] == c {
                    continue;
                }
                let removed = two * row[c] - self.g(c, c);
                for (l, &r) in row.iter().enumerate().take(self.t) {
                    if l == c {
                        continue;
                    }
                    let added = two * (r - self.g(l, c)) + self.g(l, l);
                    let delta = q * kk * (self.tot[l] - self.tot[c]) - p * (added - removed);
                    let threshold = best.map_or(N::zero(), |b| b.2);
                    if delta > threshold {
                        best = Some((pos, l, delta));
                    }
                }
            }
            match best {
                Some((pos, l, _)) => {
                    idx[pos] = l;
                    idx.sort_unstable();
                }
                None => break,
            }
        }
        let s = self.score(&idx, p, q);
        (idx, s)
    }
}

fn min_inner<N: Num>(a: &Clause, b: &Clause) -> N {
    match (a.as_set(), b.as_set()) {
        (Some(x), Some(y)) => N::from_usize(x.intersection_len(y)),
        _ => {
            let mut s = N::zero();
            for i in 0..a.m() {
                s = s + N::from_value(a.value(i).min(b.value(i)));
            }
            s
        }
    }
}

enum Tables {
    Int(Table<i128>),
    Float(Table<f64>),
}

/// Precomputed clause statistics for one valuation, reusable across `k` and `α`.
pub struct SketchSolver<'a> {
    v: &'a Valuation,
    tables: Tables,
}

/// Number of k-multisets of `t` clauses, `C(t + k − 1, k)`, saturating.
pub fn multiset_count(t: usize, k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = match c.checked_mul(t as u128 + i) {
            Some(x) => x / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

impl<'a> SketchSolver<'a> {
    pub fn new(v: &'a Valuation) -> Self {
        let tables = if v.is_integral() && v.clauses().iter().all(|c| c.total() < 1e15) {
            Tables::Int(Table::build(v))
        } else {
            Tables::Float(Table::build(v))
        };
        SketchSolver { v, tables }
    }

    pub fn valuation(&self) -> &Valuation {
        self.v
    }

    fn finish(&self, indices: Vec<usize>, params: SketchParams, method: SketchMethod) -> Sketch {
        let p = *params.alpha.numer();
        let q = *params.alpha.denom();
        let k = params.k as i128;
        let (objective, objective_exact) = match &self.tables {
            Tables::Int(t) => {
                let s = t.score(&indices, p as i128, q as i128);
                let r = Rational::new(s, q as i128 * k * k);
                (to_f64(&r), Some(r))
            }
            Tables::Float(t) => {
                let s = t.score(&indices, p as f64, q as f64);
                (s / (q as f64 * (k * k) as f64), None)
            }
        };
        Sketch {
            indices,
            params,
            objective,
            objective_exact,
            method,
        }
    }

    /// Exhaustive search over k-multisets; ties go to the lexicographically smallest.
    pub fn exact(&self, params: SketchParams, budget: u64) -> Result<Sketch> {
        let needed = multiset_count(self.v.len(), params.k);
        if needed > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: "exact sketch enumeration (use local search instead)",
                needed,
                budget,
            });
        }
        let p = *params.alpha.numer();
        let q = *params.alpha.denom();
        let idx = match &self.tables {
            Tables::Int(t) => t.exact_search(params.k, p as i128, q as i128).0,
            Tables::Float(t) => t.exact_search(params.k, p as f64, q as f64).0,
        };
        Ok(self.finish(idx, params, SketchMethod::Exact))
    }

    /// Best-improving single-swap local search from the `k` largest clauses. The result
    /// admits no strictly improving swap.
    pub fn local_search(&self, params: SketchParams) -> Sketch {
        let p = *params.alpha.numer();
        let q = *params.alpha.denom();
        let idx = match &self.tables {
            Tables::Int(t) => t.local_search(params.k, p as i128, q as i128).0,
            Tables::Float(t) => t.local_search(params.k, p as f64, q as f64).0,
        };
        self.finish(idx, params, SketchMethod::LocalSearch)
    }

    /// Exact search within `budget`, local search beyond it.
    pub fn compute(&self, params: SketchParams, budget: u64) -> Sketch {
        match self.exact(params, budget) {
            Ok(s) => s,
            Err(_) => self.local_search(params),
        }
    }

    /// Objective of an arbitrary index multiset, using the solver's arithmetic.
    pub fn evaluate(&self, indices: &[usize], params: SketchParams) -> Result<Sketch> {
        check_indices(self.v, indices)?;
        if indices.len() != params.k {
            return Err(Error::InvalidParameter(format!(
                "expected {} indices, got {}",
                params.k,
                indices.len()
            )));
        }
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        Ok(self.finish(idx, params, SketchMethod::Exact))
    }
}

pub fn sketch_exact(v: &Valuation, params: SketchParams, budget: u64) -> Result<Sketch> {
    SketchSolver::new(v).exact(params, budget)
}

pub fn sketch_local_search(v: &Valuation, params: SketchParams) -> Sketch {
    SketchSolver::new(v).local_search(params)
}

pub fn compute_sketch(v: &Valuation, params: SketchParams, budget: u64) -> Sketch {
    SketchSolver::new(v).compute(params, budget)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExchangeReport {
    pub passed: bool,
    pub clauses_checked: usize,
    /// Smallest `LHS − RHS` over all clauses.
    pub worst_slack: f64,
    pub worst_clause: usize,
    pub violations: Vec<usize>,
}

/// Checks `Σ_i (x_i − 2α x_i²) + 2α Σ_{i∈A} x_i ≥ |A| − 2α v([m]) / k` for every clause
/// `A` of a binary valuation, in exact integers scaled by `q k²`.
pub fn verify_exchange_lemma_binary(sk: &Sketch, v: &Valuation) -> Result<ExchangeReport> {
    if !v.is_binary() {
        return Err(Error::NotBinary("binary exchange verifier"));
    }
    let counts = sk.coverage_counts(v)?;
    let k = sk.k() as i128;
    let p = *sk.params.alpha.numer() as i128;
    let q = *sk.params.alpha.denom() as i128;
    let grand = v.grand_value() as i128;
    let base: i128 = counts
        .iter()
        .map(|&c| q * k * c as i128 - 2 * p * (c as i128) * (c as i128))
        .sum();
    let mut report = ExchangeReport {
        passed: true,
        clauses_checked: v.len(),
        worst_slack: f64::INFINITY,
        worst_clause: 0,
        violations: Vec::new(),
    };
    let mut worst = i128::MAX;
    for (j, c) in v.clauses().iter().enumerate() {
        let a = c.as_set().expect("binary valuation");
        let inside: i128 = a.iter().map(|i| counts[i] as i128).sum();
        let lhs = base + 2 * p * k * inside;
        let rhs = q * k * k * a.len() as i128 - 2 * p * k * grand;
        let slack = lhs - rhs;
        if slack < 0 {
            report.violations.push(j);
        }
        if slack < worst {
            worst = slack;
            report.worst_clause = j;
        }
    }
    report.passed = report.violations.is_empty();
    report.worst_slack = to_f64(&Rational::new(worst, q * k * k));
    Ok(report)
}

/// Checks, for every clause `a`,
/// `Σ_i (∫ (x − 2α x²) du + 2α ∫_0^{a_i} x du) ≥ a([m]) − 2α v([m]) / k`
/// exactly, using `∫ x du = (1/k) Σ_j b_j(i)`, `∫ x² du = (1/k²) Σ_{j,j'} min(b_j(i), b_j'(i))`
/// and `∫_0^c x du = (1/k) Σ_j min(b_j(i), c)`.
pub fn verify_exchange_lemma_general(sk: &Sketch, v: &Valuation) -> Result<ExchangeReport> {
    check_indices(v, &sk.indices)?;
    let clauses = sk.clauses(v);
    let k = BigRational::from_integer(BigInt::from(sk.k()));
    let alpha = big_from_small(sk.params.alpha);
    let two = BigRational::from_integer(BigInt::from(2));
    let m = v.m();
    let cell: Vec<Vec<BigRational>> = clauses
        .iter()
        .map(|c| (0..m).map(|i| big_from_f64(c.value(i))).collect())
        .collect();
    let mut base = BigRational::zero();
    for i in 0..m {
        let mut lin = BigRational::zero();
        let mut quad = BigRational::zero();
        for a in &cell {
            lin += &a[i];
            for b in &cell {
                quad += if a[i] <= b[i] { &a[i] } else { &b[i] };
            }
        }
        base += lin / &k - &two * &alpha * quad / (&k * &k);
    }
    let grand = v
        .clauses()
        .iter()
        .map(|c| {
            (0..m)
                .map(|i| big_from_f64(c.value(i)))
                .sum::<BigRational>()
        })
        .max()
        .unwrap_or_else(BigRational::zero);
    let penalty = &two * &alpha * grand / &k;
    let mut report = ExchangeReport {
        passed: true,
        clauses_checked: v.len(),
        worst_slack: f64::INFINITY,
        worst_clause: 0,
        violations: Vec::new(),
    };
    let mut worst: Option<BigRational> = None;
    for (j, c) in v.clauses().iter().enumerate() {
        let mut capped = BigRational::zero();
        let mut total = BigRational::zero();
        for i in 0..m {
            let ai = big_from_f64(c.value(i));
            for b in &cell {
                capped += if b[i] <= ai { &b[i] } else { &ai };
            }
            total += ai;
        }
        let lhs = &base + &two * &alpha * capped / &k;
        let slack = lhs - (total - &penalty);
        if slack.is_negative() {
            report.violations.push(j);
        }
        if worst.as_ref().is_none_or(|w| slack < *w) {
            report.worst_clause = j;
            worst = Some(slack);
        }
    }
    report.passed = report.violations.is_empty();
    report.worst_slack = worst.map_or(f64::INFINITY, |w| big_to_f64(&w));
    Ok(report)
}
