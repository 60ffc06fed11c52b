//! The sequential priced mechanism: each player but the last reports `k` binary
//! clauses over the remaining items, receives the support of one drawn uniformly and
//! pays `c_i / (2k)` for every item `i` it receives, where `c_i` counts the reported
//! clauses containing `i`. The last player takes the rest for free.

use crate::error::{Error, Result};
use crate::exact::{integral, Rational};
use crate::itemset::ItemSet;
use crate::sketch::{objective_binary, SketchParams, SketchSolver};
use crate::valuation::{Allocation, Valuation};
use crate::welfare::same_m;
use num_rational::Rational64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Cap on the number of candidate reports an exhaustive best-response search visits.
pub const BEST_RESPONSE_GUARD: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Report {
    pub clauses: Vec<ItemSet>,
}

impl Report {
    pub fn new(clauses: Vec<ItemSet>) -> Self {
        Report { clauses }
    }

    pub fn k(&self) -> usize {
        self.clauses.len()
    }

    /// Rejects reports of the wrong size or touching allocated items.
    pub fn validate(&self, remaining: &ItemSet, k: usize) -> Result<()> {
        if self.clauses.len() != k {
            return Err(Error::InvalidReport(format!(
                "expected {k} clauses, got {}",
                self.clauses.len()
            )));
        }
        for (j, c) in self.clauses.iter().enumerate() {
            if c.m() != remaining.m() {
                return Err(Error::InvalidReport(format!(
                    "clause {j} is over {} items, expected {}",
                    c.m(),
                    remaining.m()
                )));
            }
            if !c.is_subset(remaining) {
                return Err(Error::InvalidReport(format!(
                    "clause {j} contains allocated items"
                )));
            }
        }
        Ok(())
    }

    /// `c_i`: number of reported clauses containing item `i`.
    pub fn counts(&self, m: usize) -> Vec<u32> {
        let mut c = vec![0u32; m];
        for s in &self.clauses {
            for i in s.iter() {
                c[i] += 1;
            }
        }
        c
    }

    /// Price charged when clause `j` is drawn: `Σ_{i ∈ B_j} c_i / (2k)`.
    pub fn payment(&self, j: usize) -> Rational {
        let counts = self.counts(self.clauses[j].m());
        let total: i128 = self.clauses[j].iter().map(|i| counts[i] as i128).sum();
        Rational::new(total, 2 * self.k() as i128)
    }
}

/// How a player chooses its report given its valuation and the remaining items.
pub trait Strategy: Sync {
    fn report(&self, player: usize, v: &Valuation, remaining: &ItemSet, k: usize)
        -> Result<Report>;
}

/// Reports the (k, 1/2)-sketch of the valuation restricted to the remaining items.
#[derive(Clone, Copy, Debug)]
pub struct Truthful {
    pub sketch_budget: u64,
}

impl Default for Truthful {
    fn default() -> Self {
        Truthful {
            sketch_budget: crate::sketch::DEFAULT_SKETCH_BUDGET,
        }
    }
}

impl Strategy for Truthful {
    fn report(
        &self,
        _player: usize,
        v: &Valuation,
        remaining: &ItemSet,
        k: usize,
    ) -> Result<Report> {
        truthful_report(v, remaining, k, self.sketch_budget)
    }
}

impl<F> Strategy for F
where
    F: Fn(usize, &Valuation, &ItemSet, usize) -> Result<Report> + Sync,
{
    fn report(
        &self,
        player: usize,
        v: &Valuation,
        remaining: &ItemSet,
        k: usize,
    ) -> Result<Report> {
        self(player, v, remaining, k)
    }
}

pub fn truthful_report(
    v: &Valuation,
    remaining: &ItemSet,
    k: usize,
    budget: u64,
) -> Result<Report> {
    let r = v.restrict(remaining);
    let sk = SketchSolver::new(&r).compute(SketchParams::new(k, Rational64::new(1, 2))?, budget);
    Ok(Report::new(
        sk.indices
            .iter()
            .map(|&j| {
                r.clause(j)
                    .as_set()
                    .cloned()
                    .ok_or(Error::NotBinary("truthful report"))
            })
            .collect::<Result<_>>()?,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MechanismOutcome {
    pub allocation: Allocation,
    pub values: Vec<Rational>,
    pub payments: Vec<Rational>,
    pub utilities: Vec<Rational>,
    pub reports: Vec<Report>,
    pub coins: Vec<usize>,
}

impl MechanismOutcome {
    pub fn welfare(&self) -> Rational {
        self.values.iter().copied().sum()
    }
}

fn check_mechanism_inputs(vals: &[Valuation], k: usize) -> Result<usize> {
    let m = same_m(vals)?;
    if vals.len() < 2 {
        return Err(Error::InvalidParameter(
            "the mechanism needs at least 2 players".into(),
        ));
    }
    if !vals.iter().all(Valuation::is_binary) {
        return Err(Error::NotBinary("the mechanism"));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    Ok(m)
}

fn bundle_value(v: &Valuation, b: &ItemSet) -> Result<Rational> {
    Ok(integral(v.value(b)?).expect("binary values are integral"))
}

/// One sampled run with the given per-player strategies.
pub fn run_mechanism(
    vals: &[Valuation],
    strategy: &dyn Strategy,
    k: usize,
    seed: u64,
) -> Result<MechanismOutcome> {
    let m = check_mechanism_inputs(vals, k)?;
    let n = vals.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining = ItemSet::full(m);
    let mut owner = vec![n - 1; m];
    let mut payments = vec![Rational::zero(); n];
    let mut reports = Vec::with_capacity(n - 1);
    let mut coins = Vec::with_capacity(n - 1);
    for (l, v) in vals.iter().enumerate().take(n - 1) {
        let report = strategy.report(l, v, &remaining, k)?;
        report.validate(&remaining, k)?;
        let j = rng.gen_range(0..k);
        payments[l] = report.payment(j);
        for i in report.clauses[j].iter() {
            owner[i] = l;
        }
        remaining = remaining.difference(&report.clauses[j]);
        coins.push(j);
        reports.push(report);
    }
    let allocation = Allocation::new(n, owner)?;
    let values: Vec<Rational> = (0..n)
        .map(|l| bundle_value(&vals[l], &allocation.bundle(l)))
        .collect::<Result<_>>()?;
    let utilities = values.iter().zip(&payments).map(|(v, p)| v - p).collect();
    Ok(MechanismOutcome {
        allocation,
        values,
        payments,
        utilities,
        reports,
        coins,
    })
}

/// `(1/k) Σ_j v(B_j) − (1/2) Σ_i x_i²` with `x_i = c_i / k`: the expected utility of a
/// report against the auctioneer's uniform coin.
pub fn expected_utility(v: &Valuation, report: &Report) -> Result<Rational> {
    if !v.is_binary() {
        return Err(Error::NotBinary("expected utility"));
    }
    let k = report.k() as i128;
    if k == 0 {
        return Err(Error::InvalidReport("empty report".into()));
    }
    let mut value = Rational::zero();
    for c in &report.clauses {
        value += bundle_value(v, c)?;
    }
    let sq: i128 = report
        .counts(v.m())
        .into_iter()
        .map(|c| (c as i128) * (c as i128))
        .sum();
    Ok(value / Rational::from_integer(k) - Rational::new(sq, 2 * k * k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedOutcome {
    pub welfare: Rational,
    pub payments: Vec<Rational>,
    pub utilities: Vec<Rational>,
    pub paths: u64,
}

/// Exact expectation over all `k^(n-1)` coin paths.
pub fn expected_outcome(
    vals: &[Valuation],
    strategy: &dyn Strategy,
    k: usize,
    path_budget: u64,
) -> Result<ExpectedOutcome> {
    let m = check_mechanism_inputs(vals, k)?;
    let n = vals.len();
    let paths = (k as u128).saturating_pow(n as u32 - 1);
    if paths > path_budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "mechanism coin paths",
            needed: paths,
            budget: path_budget,
        });
    }
    let mut acc = ExpectedOutcome {
        welfare: Rational::zero(),
        payments: vec![Rational::zero(); n],
        utilities: vec![Rational::zero(); n],
        paths: paths as u64,
    };
    let mut owner = vec![n - 1; m];
    let mut pay = vec![Rational::zero(); n];
    walk(
        vals,
        strategy,
        k,
        0,
        &ItemSet::full(m),
        &mut owner,
        &mut pay,
        &mut acc,
    )?;
    let p = Rational::from_integer(paths as i128);
    acc.welfare /= p;
    for l in 0..n {
        acc.payments[l] /= p;
        acc.utilities[l] /= p;
    }
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    vals: &[Valuation],
    strategy: &dyn Strategy,
    k: usize,
    l: usize,
    remaining: &ItemSet,
    owner: &mut Vec<usize>,
    pay: &mut Vec<Rational>,
    acc: &mut ExpectedOutcome,
) -> Result<()> {
    let n = vals.len();
    if l == n - 1 {
        let alloc = Allocation::new(n, owner.clone())?;
        for (p, v) in vals.iter().enumerate() {
            let value = bundle_value(v, &alloc.bundle(p))?;
            acc.welfare += value;
            acc.payments[p] += pay[p];
            acc.utilities[p] += value - pay[p];
        }
        return Ok(());
    }
    let report = strategy.report(l, &vals[l], remaining, k)?;
    report.validate(remaining, k)?;
    for j in 0..k {
        let saved = owner.clone();
        for i in report.clauses[j].iter() {
            owner[i] = l;
        }
        pay[l] = report.payment(j);
        let rest = remaining.difference(&report.clauses[j]);
        walk(vals, strategy, k, l + 1, &rest, owner, pay, acc)?;
        *owner = saved;
    }
    pay[l] = Rational::zero();
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Search {
    /// All ordered k-tuples of subsets of the remaining items.
    Exhaustive,
    /// k-multisets of the true clauses restricted to the remaining items.
    ClauseRestricted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub utility: Rational,
    pub maximizers: Vec<Report>,
    pub candidates: u64,
}

fn subsets_of(remaining: &ItemSet) -> Vec<ItemSet> {
    let items = remaining.to_vec();
    (0u64..1 << items.len())
        .map(|mask| {
            let mut s = ItemSet::empty(remaining.m());
            for (b, &i) in items.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    s.insert(i);
                }
            }
            s
        })
        .collect()
}

fn multisets(t: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(t: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for l in start..t {
            cur.push(l);
            rec(t, k, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(t, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Enumerates the candidate reports of `search` and scores each by expected utility.
pub fn score_reports(
    v: &Valuation,
    remaining: &ItemSet,
    k: usize,
    search: Search,
) -> Result<Vec<(Report, Rational)>> {
    if !v.is_binary() {
        return Err(Error::NotBinary("best response"));
    }
    let candidates: Vec<Report> = match search {
        Search::Exhaustive => {
            let subsets = subsets_of(remaining);
            let count = (subsets.len() as u128).saturating_pow(k as u32);
            if count > BEST_RESPONSE_GUARD as u128 {
                return Err(Error::BudgetExceeded {
                    what: "exhaustive best response",
                    needed: count,
                    budget: BEST_RESPONSE_GUARD,
                });
            }
            (0..count as usize)
                .map(|mut idx| {
                    let mut cl = vec![ItemSet::empty(v.m()); k];
                    for slot in cl.iter_mut().rev() {
                        *slot = subsets[idx % subsets.len()].clone();
                        idx /= subsets.len();
                    }
                    Report::new(cl)
                })
                .collect()
        }
        Search::ClauseRestricted => {
            let r = v.restrict(remaining);
            let sets: Vec<ItemSet> = r.sets().expect("binary").into_iter().cloned().collect();
            multisets(sets.len(), k)
                .into_iter()
                .map(|idx| Report::new(idx.iter().map(|&j| sets[j].clone()).collect()))
                .collect()
        }
    };
    let restricted = v.restrict(remaining);
    candidates
        .into_par_iter()
        .map(|rep| {
            let u = expected_utility(&restricted, &rep)?;
            Ok((rep, u))
        })
        .collect()
}

/// All reports attaining the maximal expected utility.
pub fn best_response(
    v: &Valuation,
    remaining: &ItemSet,
    k: usize,
    search: Search,
) -> Result<BestResponse> {
    let scored = score_reports(v, remaining, k, search)?;
    let utility = scored
        .iter()
        .map(|(_, u)| *u)
        .max()
        .expect("at least one candidate");
    Ok(BestResponse {
        utility,
        candidates: scored.len() as u64,
        maximizers: scored
            .into_iter()
            .filter(|(_, u)| *u == utility)
            .map(|(r, _)| r)
            .collect(),
    })
}

/// Whether `report` is a (k, 1/2)-sketch of `v` on `remaining`: every reported clause is
/// a clause of the restricted valuation and the sketch objective is maximal.
pub fn is_sketch(v: &Valuation, remaining: &ItemSet, report: &Report, budget: u64) -> Result<bool> {
    let r = v.restrict(remaining);
    let sets = r.sets().ok_or(Error::NotBinary("sketch check"))?;
    let mut idx = Vec::with_capacity(report.k());
    for c in &report.clauses {
        match sets.iter().position(|s| *s == c) {
            Some(j) => idx.push(j),
            None => return Ok(false),
        }
    }
    let half = Rational64::new(1, 2);
    let best = SketchSolver::new(&r).exact(SketchParams::new(report.k(), half)?, budget)?;
    let obj = objective_binary(&r, &idx, half)?;
    Ok(Some(obj) == best.objective_exact)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruthfulnessReport {
    /// Utility of the truthful sketch report.
    pub sketch_utility: Rational,
    /// Best utility over all candidate reports.
    pub best_utility: Rational,
    /// Best utility among reports that are not sketches, if any exist.
    pub best_non_sketch: Option<Rational>,
    pub maximizers: usize,
    pub maximizers_are_sketches: bool,
    /// The truthful sketch's utility equals its sketch objective.
    pub identity_holds: bool,
    pub candidates: u64,
}

impl TruthfulnessReport {
    pub fn strict_gap(&self) -> Option<Rational> {
        self.best_non_sketch.map(|b| self.sketch_utility - b)
    }

    pub fn passed(&self) -> bool {
        self.maximizers_are_sketches
            && self.identity_holds
            && self.sketch_utility == self.best_utility
            && self.strict_gap().is_none_or(|g| g > Rational::zero())
    }
}

/// Compares the truthful report against every candidate report of `search`.
pub fn check_truthfulness(
    v: &Valuation,
    remaining: &ItemSet,
    k: usize,
    search: Search,
    budget: u64,
) -> Result<TruthfulnessReport> {
    let truthful = truthful_report(v, remaining, k, budget)?;
    let restricted = v.restrict(remaining);
    let sketch_utility = expected_utility(&restricted, &truthful)?;
    let sets = restricted.sets().expect("binary");
    let idx: Vec<usize> = truthful
        .clauses
        .iter()
        .map(|c| {
            sets.iter()
                .position(|s| *s == c)
                .expect("truthful clauses are true")
        })
        .collect();
    let objective = objective_binary(&restricted, &idx, Rational64::new(1, 2))?;
    let scored = score_reports(v, remaining, k, search)?;
    let flags: Vec<bool> = scored
        .par_iter()
        .map(|(r, _)| is_sketch(v, remaining, r, budget))
        .collect::<Result<_>>()?;
    let best_utility = scored.iter().map(|(_, u)| *u).max().expect("non-empty");
    let mut best_non_sketch: Option<Rational> = None;
    let mut maximizers = 0;
    let mut maximizers_are_sketches = true;
    for ((_, u), &sk) in scored.iter().zip(&flags) {
        if *u == best_utility {
            maximizers += 1;
            maximizers_are_sketches &= sk;
        }
        if !sk && best_non_sketch.is_none_or(|b| *u > b) {
            best_non_sketch = Some(*u);
        }
    }
    Ok(TruthfulnessReport {
        sketch_utility,
        best_utility,
        best_non_sketch,
        maximizers,
        maximizers_are_sketches,
        identity_holds: sketch_utility == objective,
        candidates: scored.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(m: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_indices(m, items.iter().copied()).unwrap()
    }

    #[test]
    fn single_clause_run() {
        let v1 = Valuation::binary(2, &[&[0, 1]]).unwrap();
        let v2 = Valuation::binary(2, &[&[0]]).unwrap();
        let out = run_mechanism(&[v1, v2], &Truthful::default(), 1, 3).unwrap();
        assert_eq!(out.allocation.owner(), &[0, 0]);
        assert_eq!(out.payments[0], Rational::from_integer(1));
        assert_eq!(out.utilities[0], Rational::from_integer(1));
        assert_eq!(out.payments[1], Rational::zero());
    }

    #[test]
    fn empty_reports_cost_nothing() {
        let v1 = Valuation::binary(2, &[&[0, 1]]).unwrap();
        let v2 = Valuation::binary(2, &[&[1]]).unwrap();
        let empty = |_: usize, _: &Valuation, r: &ItemSet, k: usize| {
            Ok(Report::new(vec![ItemSet::empty(r.m()); k]))
        };
        let out = run_mechanism(&[v1, v2], &empty, 2, 0).unwrap();
        assert_eq!(out.utilities[0], Rational::zero());
        assert_eq!(out.allocation.owner(), &[1, 1]);
        assert_eq!(out.values[1], Rational::from_integer(1));
    }

    #[test]
    fn invalid_reports_are_rejected() {
        let v = Valuation::binary(2, &[&[0, 1]]).unwrap();
        let bad =
            |_: usize, _: &Valuation, _: &ItemSet, _: usize| Ok(Report::new(vec![set(2, &[0])]));
        assert!(matches!(
            run_mechanism(&[v.clone(), v], &bad, 2, 0),
            Err(Error::InvalidReport(_))
        ));
    }

    #[test]
    fn expected_utility_examples() {
        let v = Valuation::binary(2, &[&[0, 1]]).unwrap();
        let full = Report::new(vec![set(2, &[0, 1])]);
        let half = Report::new(vec![set(2, &[0])]);
        let none = Report::new(vec![set(2, &[])]);
        assert_eq!(
            expected_utility(&v, &full).unwrap(),
            Rational::from_integer(1)
        );
        assert_eq!(expected_utility(&v, &half).unwrap(), Rational::new(1, 2));
        assert_eq!(expected_utility(&v, &none).unwrap(), Rational::zero());
    }

    #[test]
    fn best_response_examples() {
        let v = Valuation::binary(2, &[&[0, 1]]).unwrap();
        let br = best_response(&v, &ItemSet::full(2), 1, Search::Exhaustive).unwrap();
        assert_eq!(br.candidates, 4);
        assert_eq!(br.maximizers, vec![Report::new(vec![set(2, &[0, 1])])]);
        assert_eq!(br.utility, Rational::from_integer(1));

        let v = Valuation::binary(3, &[&[0, 1], &[2]]).unwrap();
        let rep = check_truthfulness(&v, &ItemSet::full(3), 2, Search::Exhaustive, 1000).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.candidates, 64);

        let zero = Valuation::binary(2, &[&[]]).unwrap();
        let br = best_response(&zero, &ItemSet::full(2), 2, Search::Exhaustive).unwrap();
        assert_eq!(br.utility, Rational::zero());
        assert_eq!(br.maximizers.len(), 1);
    }

    #[test]
    fn expectation_matches_sequential_protocol() {
        let vals = vec![
            Valuation::binary(4, &[&[0, 1], &[2, 3], &[1, 2]]).unwrap(),
            Valuation::binary(4, &[&[0, 3], &[1]]).unwrap(),
            Valuation::binary(4, &[&[0, 1, 2, 3]]).unwrap(),
        ];
        let exp = expected_outcome(&vals, &Truthful::default(), 3, 1000).unwrap();
        let cfg = crate::protocols::ProtocolConfig::new(3, 0);
        let p4 = crate::protocols::protocol4_expectation(&vals, &cfg).unwrap();
        assert_eq!(exp.welfare, p4);
        assert!(exp.utilities.iter().all(|u| *u >= Rational::zero()));
    }
}
