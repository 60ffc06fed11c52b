//! Adversarial instance families.
//!
//! * The planted-pair family: each side holds `t` random clauses of size about
//!   `(1/2 + ε/2) m` plus one planted half-size clause, the two planted clauses being
//!   complementary. The random clauses are built so that no (k, α)-sketch with
//!   `α ≤ 1/2` ever keeps the planted clause, while every pair of random clauses
//!   covers at most `(23/32 + 2ε) m` items.
//! * The hidden-bit family: two BXOS valuations of `l` half-size clauses each, where a
//!   hidden bit decides whether one planted pair covers all items (`M = 1`) or
//!   coincides (`M = 0`).

use crate::error::{Error, Result};
use crate::exact::{widen, Rational};
use crate::itemset::ItemSet;
use crate::random::{derive_seed, random_subset, rng_for};
use crate::sketch::{SketchMethod, SketchParams, SketchSolver};
use crate::valuation::{Clause, Valuation};
use crate::welfare::sw_star_xos_pair;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

/// Item counts searched, in order, when looking for the smallest verified
/// planted-pair instance.
pub const F1_M_GRID: [usize; 13] = [
    64, 128, 256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 65536, 131072, 262144,
];

pub const F1_CONDITION_NAMES: [&str; 7] = [
    "alice clause sizes",
    "bob clause sizes",
    "alice clause mass on the first half",
    "bob clause mass on the second half",
    "alice pairwise overlaps",
    "bob pairwise overlaps",
    "cross overlaps",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct F1Thresholds {
    /// Every random clause has size in `[size_lo, size_hi]`.
    pub size_lo: usize,
    pub size_hi: usize,
    /// Mass on its own half in `[half_lo, half_hi]`.
    pub half_lo: usize,
    pub half_hi: usize,
    /// Same-side overlaps at most `inner_hi`.
    pub inner_hi: usize,
    /// Cross overlaps at least `cross_lo`.
    pub cross_lo: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct F1Params {
    eps: Rational64,
    m: usize,
}

fn ceil_int(r: Rational64) -> usize {
    r.ceil().to_integer() as usize
}

fn floor_int(r: Rational64) -> usize {
    r.floor().to_integer() as usize
}

impl F1Params {
    pub fn new(eps: Rational64, m: usize) -> Result<Self> {
        if eps <= Rational64::zero() || eps >= Rational64::new(1, 8) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/8), got {eps}"
            )));
        }
        if m == 0 || !m.is_multiple_of(4) {
            return Err(Error::InvalidParameter(format!(
                "item count must be a positive multiple of 4, got {m}"
            )));
        }
        Ok(F1Params { eps, m })
    }

    pub fn eps(&self) -> Rational64 {
        self.eps
    }

    pub fn eps_f64(&self) -> f64 {
        self.eps.to_f64().expect("finite")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gamma() -> f64 {
        5.0 / 8.0 + 3f64.sqrt() / 8.0
    }

    /// Random clauses per side, `ceil(128 / ε)`.
    pub fn t(&self) -> usize {
        ceil_int(Rational64::from_integer(128) / self.eps)
    }

    /// Per-block inclusion probabilities of Alice's random clauses.
    pub fn p(&self) -> [f64; 4] {
        let (g, e) = (Self::gamma(), self.eps_f64());
        [1.25 - g + e, g + e, 1.0 - g, g - 0.25]
    }

    /// Per-block inclusion probabilities of Bob's random clauses.
    pub fn q(&self) -> [f64; 4] {
        let (g, e) = (Self::gamma(), self.eps_f64());
        [1.0 - g, g - 0.25, 1.25 - g + e, g + e]
    }

    /// Integer versions of the concentration bounds, rounded inwards.
    pub fn thresholds(&self) -> F1Thresholds {
        let m = Rational64::from_integer(self.m as i64);
        let e = self.eps;
        let r = Rational64::new;
        F1Thresholds {
            size_lo: ceil_int((r(1, 2) + e * 7 / 16) * m),
            size_hi: floor_int((r(1, 2) + e) * m),
            half_lo: ceil_int((r(5, 16) + e * 7 / 16) * m),
            half_hi: self.m / 2,
            inner_hi: floor_int((r(5, 16) + e * 3 / 4) * m),
            cross_lo: ceil_int(r(9, 32) * m),
        }
    }

    /// `(23/32 + 2ε) m`.
    pub fn pair_bound(&self) -> Rational64 {
        (Rational64::new(23, 32) + self.eps * 2) * self.m as i64
    }

    /// `(ε m / k)(1/64 − 1/(ε t))`: guaranteed gain of swapping out a planted clause.
    pub fn swap_bound(&self, k: usize) -> Rational {
        let e = widen(self.eps);
        let t = Rational::from_integer(self.t() as i128);
        e * Rational::from_integer(self.m as i128) / Rational::from_integer(k as i128)
            * (Rational::new(1, 64) - Rational::from_integer(1) / (e * t))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct F1Conditions {
    /// Violation counts per condition, in the order of [`F1_CONDITION_NAMES`].
    pub violations: [u64; 7],
    /// Whether each condition was evaluated (early exit skips the rest).
    pub evaluated: [bool; 7],
}

impl F1Conditions {
    pub fn passed(&self) -> bool {
        self.evaluated.iter().all(|&e| e) && self.violations.iter().all(|&v| v == 0)
    }

    /// 1-based numbers of conditions that failed or were not evaluated.
    pub fn failed(&self) -> Vec<usize> {
        (0..7)
            .filter(|&c| !self.evaluated[c] || self.violations[c] > 0)
            .map(|c| c + 1)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct F1Instance {
    pub params: F1Params,
    pub seed: u64,
    /// Attempts made before this instance was accepted (or all of them).
    pub attempts: usize,
    pub verified: bool,
    pub conditions: F1Conditions,
    /// Clause 0 of each valuation is the planted clause.
    pub v1: Valuation,
    pub v2: Valuation,
}

/// Per-block counts of one random clause, drawn before its items.
fn draw_counts<R: Rng>(rng: &mut R, block: usize, probs: &[f64; 4]) -> [usize; 4] {
    let mut c = [0; 4];
    for (b, &p) in probs.iter().enumerate() {
        c[b] = Binomial::new(block as u64, p)
            .expect("valid probability")
            .sample(rng) as usize;
    }
    c
}

/// A random clause: per block, a count drawn from `Binomial(m/4, p_b)` then a uniform
/// subset of that size, which is the same law as independent `p_b`-coins per item.
/// Returns the counts and, when `materialize` is set, the clause.
fn random_clause(
    params: &F1Params,
    attempt_seed: u64,
    side: usize,
    l: usize,
    materialize: bool,
) -> ([usize; 4], Option<ItemSet>) {
    let probs = if side == 0 { params.p() } else { params.q() };
    let block = params.m / 4;
    let mut rng = rng_for(attempt_seed, (side * params.t() + l) as u64);
    let counts = draw_counts(&mut rng, block, &probs);
    if !materialize {
        return (counts, None);
    }
    let mut set = ItemSet::empty(params.m);
    for (b, &c) in counts.iter().enumerate() {
        for i in random_subset(&mut rng, block, c).iter() {
            set.insert(b * block + i);
        }
    }
    (counts, Some(set))
}

/// Which per-clause conditions a clause violates (indices into the condition list).
fn clause_violations(th: &F1Thresholds, side: usize, counts: &[usize; 4]) -> [bool; 2] {
    let size: usize = counts.iter().sum();
    let half = if side == 0 {
        counts[0] + counts[1]
    } else {
        counts[2] + counts[3]
    };
    [
        size < th.size_lo || size > th.size_hi,
        half < th.half_lo || half > th.half_hi,
    ]
}

/// Index (over both sides) of the first clause failing a per-clause condition.
fn first_clause_failure(params: &F1Params, seed: u64) -> Option<usize> {
    let th = params.thresholds();
    let t = params.t();
    (0..2 * t).find(|&g| {
        let (side, l) = (g / t, g % t);
        let (counts, _) = random_clause(params, seed, side, l, false);
        clause_violations(&th, side, &counts).iter().any(|&v| v)
    })
}

fn materialize(params: &F1Params, seed: u64) -> (Vec<ItemSet>, Vec<ItemSet>) {
    let t = params.t();
    let all: Vec<ItemSet> = (0..2 * t)
        .into_par_iter()
        .map(|g| {
            random_clause(params, seed, g / t, g % t, true)
                .1
                .expect("materialized")
        })
        .collect();
    let bob = all[t..].to_vec();
    let mut alice = all;
    alice.truncate(t);
    (alice, bob)
}

fn count_pairs<F>(rows: usize, cols: usize, upper: bool, fast: bool, bad: F) -> u64
where
    F: Fn(usize, usize) -> bool + Sync,
{
    let row_count = |j: usize| -> u64 {
        let start = if upper { j + 1 } else { 0 };
        if fast {
            (start..cols).any(|l| bad(j, l)) as u64
        } else {
            (start..cols).filter(|&l| bad(j, l)).count() as u64
        }
    };
    if fast {
        (0..rows).into_par_iter().any(|j| row_count(j) > 0) as u64
    } else {
        (0..rows).into_par_iter().map(row_count).sum()
    }
}

/// Evaluates all seven conditions; `fast` stops at the first failing condition and
/// reports at most one violation for it.
fn evaluate_conditions(
    params: &F1Params,
    alice: &[ItemSet],
    bob: &[ItemSet],
    fast: bool,
) -> F1Conditions {
    let th = params.thresholds();
    let mut c = F1Conditions {
        violations: [0; 7],
        evaluated: [false; 7],
    };
    let block = params.m / 4;
    let halves = [
        ItemSet::from_indices(params.m, 0..2 * block).expect("in range"),
        ItemSet::from_indices(params.m, 2 * block..params.m).expect("in range"),
    ];
    for (side, sets) in [alice, bob].into_iter().enumerate() {
        for s in sets {
            let size = s.len();
            let half = s.intersection_len(&halves[side]);
            c.violations[side] += (size < th.size_lo || size > th.size_hi) as u64;
            c.violations[2 + side] += (half < th.half_lo || half > th.half_hi) as u64;
        }
    }
    for e in c.evaluated.iter_mut().take(4) {
        *e = true;
    }
    if fast && c.violations[..4].iter().any(|&v| v > 0) {
        return c;
    }
    let checks: [(usize, &[ItemSet], &[ItemSet], bool); 3] = [
        (4, alice, alice, true),
        (5, bob, bob, true),
        (6, alice, bob, false),
    ];
    for (cond, xs, ys, same_side) in checks {
        c.evaluated[cond] = true;
        c.violations[cond] = count_pairs(xs.len(), ys.len(), same_side, fast, |j, l| {
            let inner = xs[j].intersection_len(&ys[l]);
            if same_side {
                inner > th.inner_hi
            } else {
                inner < th.cross_lo
            }
        });
        if fast && c.violations[cond] > 0 {
            return c;
        }
    }
    c
}

fn build_instance(
    params: F1Params,
    seed: u64,
    attempts: usize,
    conditions: F1Conditions,
    alice: Vec<ItemSet>,
    bob: Vec<ItemSet>,
) -> Result<F1Instance> {
    let m = params.m;
    let planted = [
        ItemSet::from_indices(m, 0..m / 2)?,
        ItemSet::from_indices(m, m / 2..m)?,
    ];
    let mk = |p: &ItemSet, sets: Vec<ItemSet>| {
        let clauses = std::iter::once(p.clone())
            .chain(sets)
            .map(Clause::from_set)
            .collect();
        Valuation::new(m, clauses)
    };
    Ok(F1Instance {
        params,
        seed,
        attempts,
        verified: conditions.passed(),
        conditions,
        v1: mk(&planted[0], alice)?,
        v2: mk(&planted[1], bob)?,
    })
}

/// Samples planted-pair instances until one meets every condition. Attempt `a` uses
/// seed `derive_seed(seed, a)`. When all attempts fail, the attempt whose first
/// failure came latest is returned fully evaluated and flagged unverified.
pub fn gen_f1(params: F1Params, seed: u64, max_retries: usize) -> Result<F1Instance> {
    if max_retries == 0 {
        return Err(Error::InvalidParameter(
            "max_retries must be positive".into(),
        ));
    }
    let t = params.t();
    let mut best: Option<(usize, u64)> = None;
    for a in 0..max_retries {
        let aseed = derive_seed(seed, a as u64);
        let progress = match first_clause_failure(&params, aseed) {
            Some(g) => g,
            None => {
                let (alice, bob) = materialize(&params, aseed);
                let cond = evaluate_conditions(&params, &alice, &bob, true);
                if cond.passed() {
                    return build_instance(params, seed, a + 1, cond, alice, bob);
                }
                2 * t
            }
        };
        if best.is_none_or(|(p, _)| progress > p) {
            best = Some((progress, aseed));
        }
    }
    let (_, aseed) = best.expect("at least one attempt");
    let (alice, bob) = materialize(&params, aseed);
    let cond = evaluate_conditions(&params, &alice, &bob, false);
    build_instance(params, seed, max_retries, cond, alice, bob)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F1SearchStep {
    pub m: usize,
    pub attempts: usize,
    pub verified: bool,
}

/// Tries each `m` of `grid` in order (seed `derive_seed(seed, m)`) and stops at the
/// first verified instance.
pub fn find_smallest_f1(
    eps: Rational64,
    grid: &[usize],
    seed: u64,
    max_retries: usize,
) -> Result<(Option<F1Instance>, Vec<F1SearchStep>)> {
    let mut steps = Vec::new();
    for &m in grid {
        let inst = gen_f1(
            F1Params::new(eps, m)?,
            derive_seed(seed, m as u64),
            max_retries,
        )?;
        steps.push(F1SearchStep {
            m,
            attempts: inst.attempts,
            verified: inst.verified,
        });
        if inst.verified {
            return Ok((Some(inst), steps));
        }
    }
    Ok((None, steps))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F1Swap {
    /// Copies of the planted clause in the swapped-from multiset.
    pub planted_copies: usize,
    /// Clause that replaces one planted copy.
    pub replacement: usize,
    #[serde(serialize_with = "crate::exact::serialize_rational")]
    pub delta: Rational,
    #[serde(serialize_with = "crate::exact::serialize_rational")]
    pub bound: Rational,
    pub improves: bool,
    pub meets_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F1SketchCheck {
    pub side: usize,
    pub k: usize,
    pub alpha: String,
    pub method: SketchMethod,
    pub indices: Vec<usize>,
    pub excludes_planted: bool,
    pub swaps: Vec<F1Swap>,
    /// Best clause-pair welfare between the two sides' sketches (reported on side 0).
    pub best_pair: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F1ExclusionReport {
    /// Failed conditions when the instance is unverified; the checks are then skipped.
    pub declined: Vec<usize>,
    pub checks: Vec<F1SketchCheck>,
    pub max_nonplanted_pair: usize,
    pub pair_bound: f64,
    pub sw_star: f64,
    pub passed: bool,
}

fn swap_checks(
    solver: &SketchSolver,
    params: &F1Params,
    sk_params: SketchParams,
    sketch: &[usize],
) -> Result<Vec<F1Swap>> {
    let k = sk_params.k();
    let mut copies = vec![1, k];
    copies.dedup();
    let bound = params.swap_bound(k);
    copies
        .into_iter()
        .map(|r| {
            let mut with = vec![0; r];
            with.extend_from_slice(&sketch[..k - r]);
            let replacement = (1..)
                .find(|l| !with.contains(l))
                .expect("more clauses than k");
            let mut swapped = with.clone();
            swapped[0] = replacement;
            let before = solver.evaluate(&with, sk_params)?.objective_exact;
            let after = solver.evaluate(&swapped, sk_params)?.objective_exact;
            let delta = after.expect("binary") - before.expect("binary");
            Ok(F1Swap {
                planted_copies: r,
                replacement,
                delta,
                bound,
                improves: delta > Rational::zero(),
                meets_bound: delta >= bound,
            })
        })
        .collect()
}

/// Computes (k, α)-sketches of both sides for every pair of `ks` and `alphas`, checks
/// the planted clause is excluded and that swapping it out of any sketch gains at
/// least the guaranteed amount, and bounds every non-planted clause pair.
pub fn verify_f1_exclusion(
    inst: &F1Instance,
    ks: &[usize],
    alphas: &[Rational64],
    sketch_budget: u64,
) -> Result<F1ExclusionReport> {
    let pair_bound = inst.params.pair_bound();
    let mut report = F1ExclusionReport {
        declined: Vec::new(),
        checks: Vec::new(),
        max_nonplanted_pair: 0,
        pair_bound: pair_bound.to_f64().expect("finite"),
        sw_star: 0.0,
        passed: false,
    };
    if !inst.verified {
        report.declined = inst.conditions.failed();
        return Ok(report);
    }
    let m = inst.params.m();
    let solvers = [SketchSolver::new(&inst.v1), SketchSolver::new(&inst.v2)];
    for &k in ks {
        for &alpha in alphas {
            let sp = SketchParams::new(k, alpha)?;
            let sketches: Vec<_> = solvers
                .iter()
                .map(|s| s.compute(sp, sketch_budget))
                .collect();
            let xs = sketches[0].clauses(&inst.v1);
            let ys = sketches[1].clauses(&inst.v2);
            let best_pair = crate::welfare::best_clause_pair(&xs, &ys).2 as usize;
            for (side, sk) in sketches.iter().enumerate() {
                report.checks.push(F1SketchCheck {
                    side,
                    k,
                    alpha: alpha.to_string(),
                    method: sk.method,
                    indices: sk.indices.clone(),
                    excludes_planted: !sk.indices.contains(&0),
                    swaps: swap_checks(&solvers[side], &inst.params, sp, &sk.indices)?,
                    best_pair: (side == 0).then_some(best_pair),
                });
            }
        }
    }
    let a = inst.v1.sets().expect("binary");
    let b = inst.v2.sets().expect("binary");
    report.max_nonplanted_pair = (1..a.len())
        .into_par_iter()
        .map(|j| {
            (1..b.len())
                .map(|l| a[j].union_len(b[l]))
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    report.sw_star = sw_star_xos_pair(&inst.v1, &inst.v2)?.value;
    let within = |v: usize| Rational64::from_integer(v as i64) <= pair_bound;
    report.passed = report.checks.iter().all(|c| {
        c.excludes_planted
            && c.swaps.iter().all(|s| s.improves && s.meets_bound)
            && c.best_pair.is_none_or(within)
    }) && within(report.max_nonplanted_pair)
        && report.sw_star == m as f64;
    Ok(report)
}

/// Hidden structure of a hidden-bit instance.
#[derive(Clone, Debug, PartialEq)]
pub struct GHidden {
    pub s: ItemSet,
    pub t: ItemSet,
    pub bit: u8,
    pub u1: ItemSet,
    pub u2: ItemSet,
    pub j1: usize,
    pub j2: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GInstance {
    pub m: usize,
    pub l: usize,
    pub seed: u64,
    pub hidden: GHidden,
    pub v1: Valuation,
    pub v2: Valuation,
}

/// Default clause count per side for the hidden-bit family.
pub const G_DEFAULT_L: usize = 64;

fn pick<R: Rng>(rng: &mut R, from: &[usize], count: usize, m: usize) -> ItemSet {
    let mut s = ItemSet::empty(m);
    for &i in from.choose_multiple(rng, count) {
        s.insert(i);
    }
    s
}

/// `m/3` random items of `big` plus `m/6` random items of its complement.
fn draw_conditioned<R: Rng>(rng: &mut R, big: &ItemSet) -> ItemSet {
    let m = big.m();
    let inside = big.to_vec();
    let outside = big.complement().to_vec();
    pick(rng, &inside, m / 3, m).union(&pick(rng, &outside, m / 6, m))
}

/// Samples a hidden-bit instance; `force_bit` fixes `M`.
pub fn gen_appendix_g(m: usize, l: usize, seed: u64, force_bit: Option<u8>) -> Result<GInstance> {
    if m == 0 || !m.is_multiple_of(6) {
        return Err(Error::InvalidParameter(format!(
            "item count must be a positive multiple of 6, got {m}"
        )));
    }
    if l < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 clauses per side".into(),
        ));
    }
    if let Some(b) = force_bit {
        if b > 1 {
            return Err(Error::InvalidParameter(format!(
                "hidden bit must be 0 or 1, got {b}"
            )));
        }
    }
    let mut rng = rng_for(seed, 0);
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut rng);
    let (third, sixth) = (m / 3, m / 6);
    let st = &perm[..third];
    let s_only = &perm[third..third + sixth];
    let t_only = &perm[third + sixth..third + 2 * sixth];
    let neither = &perm[third + 2 * sixth..];
    let set = |xs: &[&[usize]]| {
        ItemSet::from_indices(m, xs.iter().flat_map(|x| x.iter().copied())).expect("in range")
    };
    let s = set(&[st, s_only]);
    let t = set(&[st, t_only]);
    let bit = force_bit.unwrap_or_else(|| rng.gen_range(0..=1));
    let (u1, u2) = if bit == 1 {
        let u1 = set(&[s_only])
            .union(&pick(&mut rng, st, sixth, m))
            .union(&pick(&mut rng, neither, sixth, m));
        let u2 = u1.complement();
        (u1, u2)
    } else {
        let u1 = set(&[st]).union(&pick(&mut rng, neither, sixth, m));
        (u1.clone(), u1)
    };
    let j1 = rng.gen_range(0..l);
    let j2 = rng.gen_range(0..l);
    let mut a = Vec::with_capacity(l);
    let mut b = Vec::with_capacity(l);
    for j in 0..l {
        a.push(if j == j1 {
            u1.clone()
        } else {
            draw_conditioned(&mut rng, &s)
        });
    }
    for j in 0..l {
        b.push(if j == j2 {
            u2.clone()
        } else {
            draw_conditioned(&mut rng, &t)
        });
    }
    let v1 = Valuation::new(m, a.into_iter().map(Clause::from_set).collect())?;
    let v2 = Valuation::new(m, b.into_iter().map(Clause::from_set).collect())?;
    Ok(GInstance {
        m,
        l,
        seed,
        hidden: GHidden {
            s,
            t,
            bit,
            u1,
            u2,
            j1,
            j2,
        },
        v1,
        v2,
    })
}

/// Structural invariants of a hidden-bit instance; returns the first one violated.
pub fn check_appendix_g_structure(inst: &GInstance) -> std::result::Result<(), String> {
    let m = inst.m;
    let h = &inst.hidden;
    if h.s.len() != m / 2 || h.t.len() != m / 2 || h.s.intersection_len(&h.t) != m / 3 {
        return Err("S and T must have size m/2 and overlap in m/3 items".into());
    }
    let a = inst.v1.sets().ok_or("alice valuation is not binary")?;
    let b = inst.v2.sets().ok_or("bob valuation is not binary")?;
    for (name, sets, planted, big) in [("alice", &a, h.j1, &h.s), ("bob", &b, h.j2, &h.t)] {
        for (j, x) in sets.iter().enumerate() {
            if j == planted {
                continue;
            }
            if x.intersection_len(big) != m / 3 || x.len() != m / 2 {
                return Err(format!(
                    "{name} clause {j} is not drawn from the conditioned law"
                ));
            }
        }
    }
    if *a[h.j1] != h.u1 || *b[h.j2] != h.u2 {
        return Err("planted clauses do not match U1/U2".into());
    }
    match h.bit {
        1 if h.u1.union_len(&h.u2) == m && h.u1.intersection_len(&h.u2) == 0 => Ok(()),
        0 if h.u1 == h.u2 && h.u1.len() == m / 2 => Ok(()),
        _ => Err("planted sets do not match the hidden bit".into()),
    }
}

fn hg_mean_var(pop: f64, succ: f64, draws: f64) -> (f64, f64) {
    let mean = draws * succ / pop;
    let var = if pop > 1.0 {
        draws * (succ / pop) * ((pop - succ) / pop) * ((pop - draws) / (pop - 1.0))
    } else {
        0.0
    };
    (mean, var)
}

fn hg_pmf(pop: usize, succ: usize, draws: usize) -> Vec<f64> {
    let choose = |n: usize, k: usize| -> f64 {
        if k > n {
            return 0.0;
        }
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    let total = choose(pop, draws);
    (0..=draws)
        .map(|x| {
            if x > succ || draws - x > pop - succ {
                0.0
            } else {
                choose(succ, x) * choose(pop - succ, draws - x) / total
            }
        })
        .collect()
}

/// Exact mean and variance of a pair's welfare when exactly one clause is planted
/// (`M = 0`): `m/2 + H1 + H2` for two independent hypergeometric counts.
pub fn one_planted_moments(m: usize) -> (f64, f64) {
    let mf = m as f64;
    let (m1, v1) = hg_mean_var(mf / 2.0, mf / 6.0, mf / 3.0);
    let (m2, v2) = hg_mean_var(mf / 2.0, mf / 3.0, mf / 6.0);
    (mf / 2.0 + m1 + m2, v1 + v2)
}

/// Exact mean and variance of `|A ∪ B|` for independent `A ~ D_S`, `B ~ D_T`, by
/// conditioning on how `A` splits across the four regions cut out by `S` and `T`.
pub fn neither_planted_moments(m: usize) -> (f64, f64) {
    let (half, third, sixth) = (m / 2, m / 3, m / 6);
    let pa1 = hg_pmf(half, third, third);
    let pa3 = hg_pmf(half, sixth, sixth);
    let (mut e1, mut e2, mut evar) = (0.0, 0.0, 0.0);
    for (a1, &w1) in pa1.iter().enumerate() {
        for (a3, &w3) in pa3.iter().enumerate() {
            let w = w1 * w3;
            if w == 0.0 {
                continue;
            }
            let in_t = (a1 + a3) as f64;
            let in_tc = ((third - a1) + (sixth - a3)) as f64;
            let (mx, vx) = hg_mean_var(half as f64, in_t, third as f64);
            let (my, vy) = hg_mean_var(half as f64, in_tc, sixth as f64);
            let mean = mx + my;
            e1 += w * mean;
            e2 += w * mean * mean;
            evar += w * (vx + vy);
        }
    }
    (m as f64 - e1, evar + (e2 - e1 * e1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSummary {
    pub draws: usize,
    pub mean: f64,
    pub expected: f64,
    pub variance: f64,
    pub sigma_of_mean: f64,
    pub within_3_sigma: bool,
}

impl SampleSummary {
    fn new(values: &[usize], expected: f64, variance: f64) -> Self {
        let draws = values.len();
        let mean = values.iter().sum::<usize>() as f64 / draws.max(1) as f64;
        let sigma_of_mean = (variance / draws.max(1) as f64).sqrt();
        SampleSummary {
            draws,
            mean,
            expected,
            variance,
            sigma_of_mean,
            within_3_sigma: draws > 0 && (mean - expected).abs() <= 3.0 * sigma_of_mean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GStats {
    pub m: usize,
    pub l: usize,
    pub trials: usize,
    pub alpha: f64,
    /// `M = 0` instances whose planted pair has welfare exactly `m/2`.
    pub both_planted_exact: usize,
    pub both_planted_total: usize,
    pub one_planted: SampleSummary,
    pub neither_planted: SampleSummary,
    pub bit1_instances: usize,
    pub bit1_full_fraction: f64,
    pub bit0_instances: usize,
    pub bit0_above_alpha_fraction: f64,
    pub structure_ok: bool,
}

struct TrialOutcome {
    bit: u8,
    planted_pair: usize,
    one: Vec<usize>,
    neither: Vec<usize>,
    sw_star: usize,
    structure_ok: bool,
}

/// Monte-Carlo statistics over `trials` instances (trial `i` uses seed
/// `derive_seed(seed, i)`). One-planted draws come from `M = 0` instances; the
/// neither-planted draws pair `A_j` with `B_j` for non-planted `j`, which keeps them
/// independent.
pub fn stats_appendix_g(
    m: usize,
    l: usize,
    trials: usize,
    alpha: f64,
    seed: u64,
) -> Result<GStats> {
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let inst = gen_appendix_g(m, l, derive_seed(seed, i as u64), None)?;
            let h = &inst.hidden;
            let a = inst.v1.sets().expect("binary");
            let b = inst.v2.sets().expect("binary");
            let mut one = Vec::new();
            if h.bit == 0 {
                one.extend(
                    (0..l)
                        .filter(|&j| j != h.j2)
                        .map(|j| a[h.j1].union_len(b[j])),
                );
                one.extend(
                    (0..l)
                        .filter(|&j| j != h.j1)
                        .map(|j| a[j].union_len(b[h.j2])),
                );
            }
            let neither = (0..l)
                .filter(|&j| j != h.j1 && j != h.j2)
                .map(|j| a[j].union_len(b[j]))
                .collect();
            Ok(TrialOutcome {
                bit: h.bit,
                planted_pair: a[h.j1].union_len(b[h.j2]),
                one,
                neither,
                sw_star: sw_star_xos_pair(&inst.v1, &inst.v2)?.value as usize,
                structure_ok: check_appendix_g_structure(&inst).is_ok(),
            })
        })
        .collect::<Result<_>>()?;
    let (one_mean, one_var) = one_planted_moments(m);
    let (nei_mean, nei_var) = neither_planted_moments(m);
    let bit0: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.bit == 0).collect();
    let bit1: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.bit == 1).collect();
    let frac = |num: usize, den: usize| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let one: Vec<usize> = bit0.iter().flat_map(|o| o.one.iter().copied()).collect();
    let neither: Vec<usize> = outcomes
        .iter()
        .flat_map(|o| o.neither.iter().copied())
        .collect();
    Ok(GStats {
        m,
        l,
        trials,
        alpha,
        both_planted_exact: bit0.iter().filter(|o| o.planted_pair == m / 2).count(),
        both_planted_total: bit0.len(),
        one_planted: SampleSummary::new(&one, one_mean, one_var),
        neither_planted: SampleSummary::new(&neither, nei_mean, nei_var),
        bit1_instances: bit1.len(),
        bit1_full_fraction: frac(bit1.iter().filter(|o| o.sw_star == m).count(), bit1.len()),
        bit0_instances: bit0.len(),
        bit0_above_alpha_fraction: frac(
            bit0.iter()
                .filter(|o| o.sw_star as f64 > alpha * m as f64)
                .count(),
            bit0.len(),
        ),
        structure_ok: outcomes.iter().all(|o| o.structure_ok),
    })
}
