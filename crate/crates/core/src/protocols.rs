//! Two-party and sequential allocation protocols, their wrap-ups, and transcript
//! accounting.
//!
//! Randomized protocols report both a realized run (one seeded coin) and the exact
//! expectation over the uniform coin.

use crate::error::{Error, Result};
use crate::exact::{integral, to_f64, Rational};
use crate::itemset::ItemSet;
use crate::sketch::{Sketch, SketchParams, SketchSolver, DEFAULT_SKETCH_BUDGET};
use crate::valuation::{Allocation, Clause, Valuation};
use crate::welfare::{
    additive_pair_allocation, alice_only_allocation, best_clause_pair, same_m, sw_star_xos_pair,
};
use num_rational::Rational64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Default cap on the number of coin paths the sequential protocol expands exactly.
pub const DEFAULT_PATH_BUDGET: u64 = 100_000;
/// Default bit width of one encoded clause value.
pub const DEFAULT_VALUE_BITS: u64 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ProtocolId {
    /// Alice sends one of {largest clause, best clause pair}, alice-only wrap-up.
    P1,
    /// Both send largest clause plus best pair, best-known wrap-up.
    P2,
    /// Alice sends one random clause of her (k, 1/2)-sketch.
    P3,
    /// Sequential n-player version of P3.
    P4,
    /// Both send (k, 1/3)-sketches, best-known wrap-up.
    P5,
    /// Alice sends her (k, 1/2)-sketch to Bob, Bob answers with the best split.
    P6,
    /// Grand bundle to a uniformly random player.
    Baseline,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 7] = [
        ProtocolId::P1,
        ProtocolId::P2,
        ProtocolId::P3,
        ProtocolId::P4,
        ProtocolId::P5,
        ProtocolId::P6,
        ProtocolId::Baseline,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProtocolId::P1 => "1",
            ProtocolId::P2 => "2",
            ProtocolId::P3 => "3",
            ProtocolId::P4 => "4",
            ProtocolId::P5 => "5",
            ProtocolId::P6 => "6",
            ProtocolId::Baseline => "baseline",
        }
    }

    /// Guaranteed approximation ratio for sketch size `k`.
    pub fn bound(&self, k: usize) -> Rational64 {
        let inv = Rational64::new(1, k.max(1) as i64);
        match self {
            ProtocolId::P1 => Rational64::new(2, 3),
            ProtocolId::P2 => Rational64::new(3, 5),
            ProtocolId::P3 | ProtocolId::P6 => Rational64::new(3, 4) - inv,
            ProtocolId::P4 => Rational64::new(1, 2) - inv,
            ProtocolId::P5 => Rational64::new(23, 32) - inv,
            ProtocolId::Baseline => Rational64::new(1, 2),
        }
    }

    pub fn supports_decision(&self) -> bool {
        matches!(self, ProtocolId::P2 | ProtocolId::P5 | ProtocolId::P6)
    }

    pub fn binary_only(&self) -> bool {
        matches!(self, ProtocolId::P1 | ProtocolId::P3 | ProtocolId::P4)
    }

    pub fn uses_k(&self) -> bool {
        matches!(
            self,
            ProtocolId::P3 | ProtocolId::P4 | ProtocolId::P5 | ProtocolId::P6
        )
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let s = s.strip_prefix('p').unwrap_or(&s);
        ProtocolId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown protocol `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Allocation,
    Decision,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
}

/// Decision threshold `X` and the rule's factor `α`: answer yes iff the best
/// reported welfare is at least `α X`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionSpec {
    pub threshold: f64,
    pub alpha: Rational64,
}

impl DecisionSpec {
    pub fn new(threshold: f64, alpha: Rational64) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decision threshold must be positive, got {threshold}"
            )));
        }
        if alpha <= Rational64::zero() || alpha > Rational64::from_integer(1) {
            return Err(Error::InvalidParameter(format!(
                "decision alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(DecisionSpec { threshold, alpha })
    }

    /// The default rule for `protocol` with sketch size `k`.
    pub fn for_protocol(protocol: ProtocolId, k: usize, threshold: f64) -> Result<Self> {
        DecisionSpec::new(threshold, protocol.bound(k))
    }

    pub fn accepts(&self, value: f64) -> bool {
        crate::exact::at_least_fraction(value, self.alpha, self.threshold)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub k: usize,
    pub mode: Mode,
    pub decision: Option<DecisionSpec>,
    pub value_bits: u64,
    pub seed: u64,
    pub sketch_budget: u64,
    pub path_budget: u64,
}

impl ProtocolConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        ProtocolConfig {
            k,
            mode: Mode::Allocation,
            decision: None,
            value_bits: DEFAULT_VALUE_BITS,
            seed,
            sketch_budget: DEFAULT_SKETCH_BUDGET,
            path_budget: DEFAULT_PATH_BUDGET,
        }
    }

    pub fn with_decision(mut self, spec: DecisionSpec) -> Self {
        self.mode = Mode::Decision;
        self.decision = Some(spec);
        self
    }

    fn spec(&self) -> Result<Option<DecisionSpec>> {
        match self.mode {
            Mode::Allocation => Ok(None),
            Mode::Decision => self.decision.map(Some).ok_or(Error::MissingDecisionSpec),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Message {
    pub sender: String,
    pub kind: String,
    pub bits: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub rounds: Vec<Vec<Message>>,
    pub total_bits: u64,
    pub round_count: usize,
    pub metadata: BTreeMap<String, String>,
}

impl Transcript {
    fn push_round(&mut self, msgs: Vec<Message>) {
        self.total_bits += msgs.iter().map(|m| m.bits).sum::<u64>();
        self.rounds.push(msgs);
        self.round_count = self.rounds.len();
    }

    fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.insert(key.into(), value.into());
    }
}

fn msg(sender: &str, kind: &str, bits: u64) -> Message {
    Message {
        sender: sender.to_string(),
        kind: kind.to_string(),
        bits,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolOutcome {
    pub protocol: ProtocolId,
    pub allocation: Allocation,
    pub answer: Option<Answer>,
    /// Welfare of `allocation`.
    pub welfare: f64,
    /// Expectation over the protocol's internal coin (equals `welfare` when deterministic).
    pub expected_welfare: f64,
    #[serde(skip)]
    pub expected_welfare_exact: Option<Rational>,
    /// Coins drawn in the realized run.
    pub coins: Vec<usize>,
    pub transcript: Transcript,
}

/// Bits to send one clause: `m` for binary clauses, `m B` otherwise.
pub fn clause_bits(c: &Clause, value_bits: u64) -> u64 {
    if c.is_binary() {
        c.m() as u64
    } else {
        c.m() as u64 * value_bits
    }
}

fn check_two(vals: &[Valuation]) -> Result<()> {
    if vals.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "two-party protocol needs 2 valuations, got {}",
            vals.len()
        )));
    }
    same_m(vals).map(|_| ())
}

fn check_binary(vals: &[Valuation], what: &'static str) -> Result<()> {
    if vals.iter().all(Valuation::is_binary) {
        Ok(())
    } else {
        Err(Error::NotBinary(what))
    }
}

fn check_k(k: usize, min: usize) -> Result<()> {
    if k < min {
        return Err(Error::InvalidParameter(format!(
            "k must be at least {min}, got {k}"
        )));
    }
    Ok(())
}

fn sketch_of(v: &Valuation, k: usize, alpha: Rational64, budget: u64) -> Result<Sketch> {
    Ok(SketchSolver::new(v).compute(SketchParams::new(k, alpha)?, budget))
}

fn draw(rng: &mut ChaCha8Rng, k: usize) -> usize {
    rng.gen_range(0..k)
}

fn mean_exact(values: &[f64]) -> Option<Rational> {
    let mut sum = Rational::zero();
    for &x in values {
        sum += integral(x)?;
    }
    Some(sum / Rational::from_integer(values.len() as i128))
}

/// Alice receives the support of sketch clause `j`, Bob the rest.
pub fn wrapup_alice_only(sketch: &Sketch, v1: &Valuation, j: usize) -> Allocation {
    let idx = sketch.indices[j];
    Allocation::two_party(&v1.clause(idx).support())
}

/// Per-item-max allocation of the best reported clause pair, lowest `(i, j)` on ties.
/// Returns the allocation, its value and the pair.
pub fn wrapup_best_known(xs: &[&Clause], ys: &[&Clause]) -> (Allocation, f64, (usize, usize)) {
    let (i, j, value) = best_clause_pair(xs, ys);
    (additive_pair_allocation(xs[i], ys[j]), value, (i, j))
}

pub fn wrapup_best_known_decision(xs: &[&Clause], ys: &[&Clause], spec: &DecisionSpec) -> Answer {
    let (_, value, _) = wrapup_best_known(xs, ys);
    if spec.accepts(value) {
        Answer::Yes
    } else {
        Answer::No
    }
}

/// Largest clause by total and the best clause pair (lowest indices on ties).
fn three_clauses(v: &Valuation) -> [usize; 3] {
    let mut b1 = 0;
    for (j, c) in v.clauses().iter().enumerate() {
        if c.total() > v.clause(b1).total() {
            b1 = j;
        }
    }
    let cl: Vec<&Clause> = v.clauses().iter().collect();
    let (b2, b3, _) = best_clause_pair(&cl, &cl);
    [b1, b2, b3]
}

/// Alice randomizes over {largest clause, best pair}; the auctioneer grants her the
/// drawn clause's support.
pub fn run_protocol1(
    v1: &Valuation,
    v2: &Valuation,
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    let vals = [v1.clone(), v2.clone()];
    check_two(&vals)?;
    check_binary(&vals, "protocol 1")?;
    let picks = three_clauses(v1);
    let values: Vec<f64> = picks
        .iter()
        .map(|&j| alice_only_allocation(v1.clause(j), v2).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let coin = draw(&mut rng, 3);
    let allocation = Allocation::two_party(v1.clause(picks[coin]).as_set().expect("binary"));
    let welfare = allocation.welfare(&vals)?;
    let exact = mean_exact(&values);
    let mut transcript = Transcript::default();
    transcript.push_round(vec![msg("alice", "clause", v1.m() as u64)]);
    transcript.note("clauses", format!("{picks:?}"));
    Ok(ProtocolOutcome {
        protocol: ProtocolId::P1,
        allocation,
        answer: None,
        welfare,
        expected_welfare: exact.map_or(values.iter().sum::<f64>() / 3.0, |r| to_f64(&r)),
        expected_welfare_exact: exact,
        coins: vec![coin],
        transcript,
    })
}

fn best_known_outcome(
    protocol: ProtocolId,
    vals: &[Valuation],
    xs: &[&Clause],
    ys: &[&Clause],
    spec: Option<DecisionSpec>,
    transcript: Transcript,
) -> Result<ProtocolOutcome> {
    let (allocation, value, _) = wrapup_best_known(xs, ys);
    let welfare = allocation.welfare(vals)?;
    let answer = spec.map(|s| {
        if s.accepts(value) {
            Answer::Yes
        } else {
            Answer::No
        }
    });
    Ok(ProtocolOutcome {
        protocol,
        allocation,
        answer,
        welfare,
        expected_welfare: welfare,
        expected_welfare_exact: integral(welfare),
        coins: Vec::new(),
        transcript,
    })
}

/// Both players send their largest clause and best clause pair simultaneously.
pub fn run_protocol2(
    v1: &Valuation,
    v2: &Valuation,
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    let vals = [v1.clone(), v2.clone()];
    check_two(&vals)?;
    let spec = cfg.spec()?;
    let pa = three_clauses(v1);
    let pb = three_clauses(v2);
    let xs: Vec<&Clause> = pa.iter().map(|&j| v1.clause(j)).collect();
    let ys: Vec<&Clause> = pb.iter().map(|&j| v2.clause(j)).collect();
    let bits = |cs: &[&Clause]| cs.iter().map(|c| clause_bits(c, cfg.value_bits)).sum();
    let mut transcript = Transcript::default();
    transcript.push_round(vec![
        msg("alice", "clauses", bits(&xs)),
        msg("bob", "clauses", bits(&ys)),
    ]);
    best_known_outcome(ProtocolId::P2, &vals, &xs, &ys, spec, transcript)
}

/// Alice sends one uniformly drawn clause of her (k, 1/2)-sketch.
pub fn run_protocol3(
    v1: &Valuation,
    v2: &Valuation,
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    let vals = [v1.clone(), v2.clone()];
    check_two(&vals)?;
    check_binary(&vals, "protocol 3")?;
    check_k(cfg.k, 2)?;
    let sk = sketch_of(v1, cfg.k, Rational64::new(1, 2), cfg.sketch_budget)?;
    let values: Vec<f64> = sk
        .indices
        .iter()
        .map(|&j| alice_only_allocation(v1.clause(j), v2).map(|r| r.value))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let coin = draw(&mut rng, cfg.k);
    let allocation = wrapup_alice_only(&sk, v1, coin);
    let welfare = allocation.welfare(&vals)?;
    let exact = mean_exact(&values);
    let mut transcript = Transcript::default();
    transcript.push_round(vec![msg("alice", "clause", v1.m() as u64)]);
    transcript.note("sketch_alice", sk.method.as_str());
    Ok(ProtocolOutcome {
        protocol: ProtocolId::P3,
        allocation,
        answer: None,
        welfare,
        expected_welfare: exact.map_or(values.iter().sum::<f64>() / cfg.k as f64, |r| to_f64(&r)),
        expected_welfare_exact: exact,
        coins: vec![coin],
        transcript,
    })
}

/// One step of the sequential protocol: player `l`'s sketch of its valuation on
/// `remaining`.
fn sequential_sketch(
    v: &Valuation,
    remaining: &ItemSet,
    cfg: &ProtocolConfig,
) -> Result<(Valuation, Sketch)> {
    let r = v.restrict(remaining);
    let sk = sketch_of(&r, cfg.k, Rational64::new(1, 2), cfg.sketch_budget)?;
    Ok((r, sk))
}

struct PathStats {
    sum: Rational,
    methods: Vec<&'static str>,
}

fn expand_paths(
    vals: &[Valuation],
    l: usize,
    remaining: &ItemSet,
    owner: &mut Vec<usize>,
    cfg: &ProtocolConfig,
    stats: &mut PathStats,
) -> Result<()> {
    let n = vals.len();
    if l == n - 1 {
        for i in remaining.iter() {
            owner[i] = l;
        }
        let alloc = Allocation::new(n, owner.clone())?;
        let w = alloc.welfare(vals)?;
        stats.sum += integral(w).expect("binary welfare is integral");
        return Ok(());
    }
    let (r, sk) = sequential_sketch(&vals[l], remaining, cfg)?;
    stats.methods.push(sk.method.as_str());
    for &j in &sk.indices {
        let take = r.clause(j).as_set().expect("binary").clone();
        let saved = owner.clone();
        for i in take.iter() {
            owner[i] = l;
        }
        expand_paths(vals, l + 1, &remaining.difference(&take), owner, cfg, stats)?;
        *owner = saved;
    }
    Ok(())
}

/// Exact expected welfare of the sequential protocol over all `k^(n-1)` coin paths.
pub fn protocol4_expectation(vals: &[Valuation], cfg: &ProtocolConfig) -> Result<Rational> {
    let m = same_m(vals)?;
    check_binary(vals, "protocol 4")?;
    let paths = (cfg.k as u128).saturating_pow(vals.len() as u32 - 1);
    if paths > cfg.path_budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "sequential protocol coin paths",
            needed: paths,
            budget: cfg.path_budget,
        });
    }
    let mut stats = PathStats {
        sum: Rational::zero(),
        methods: Vec::new(),
    };
    let mut owner = vec![0; m];
    expand_paths(vals, 0, &ItemSet::full(m), &mut owner, cfg, &mut stats)?;
    Ok(stats.sum / Rational::from_integer(paths as i128))
}

/// Players `1..n-1` in turn take the support of a random clause of their sketch of the
/// remaining items; player `n` takes what is left.
pub fn run_protocol4(vals: &[Valuation], cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    let m = same_m(vals)?;
    if vals.len() < 2 {
        return Err(Error::InvalidParameter(
            "protocol 4 needs at least 2 players".into(),
        ));
    }
    check_binary(vals, "protocol 4")?;
    check_k(cfg.k, 2)?;
    let n = vals.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut remaining = ItemSet::full(m);
    let mut owner = vec![n - 1; m];
    let mut coins = Vec::new();
    let mut transcript = Transcript::default();
    let mut methods = Vec::new();
    for (l, v) in vals.iter().enumerate().take(n - 1) {
        let (r, sk) = sequential_sketch(v, &remaining, cfg)?;
        methods.push(sk.method.as_str());
        let coin = draw(&mut rng, cfg.k);
        coins.push(coin);
        let take = r.clause(sk.indices[coin]).as_set().expect("binary").clone();
        for i in take.iter() {
            owner[i] = l;
        }
        remaining = remaining.difference(&take);
        transcript.push_round(vec![msg(&format!("player {}", l + 1), "clause", m as u64)]);
    }
    transcript.note("sketches", methods.join(","));
    let allocation = Allocation::new(n, owner)?;
    let welfare = allocation.welfare(vals)?;
    let exact = match protocol4_expectation(vals, cfg) {
        Ok(r) => Some(r),
        Err(Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    transcript.note(
        "expectation",
        if exact.is_some() { "exact" } else { "sampled" },
    );
    Ok(ProtocolOutcome {
        protocol: ProtocolId::P4,
        allocation,
        answer: None,
        welfare,
        expected_welfare: exact.map_or(welfare, |r| to_f64(&r)),
        expected_welfare_exact: exact,
        coins,
        transcript,
    })
}

/// Both players send (k, 1/3)-sketches; best-known wrap-up.
pub fn run_protocol5(
    v1: &Valuation,
    v2: &Valuation,
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    let vals = [v1.clone(), v2.clone()];
    check_two(&vals)?;
    check_k(cfg.k, 1)?;
    let spec = cfg.spec()?;
    let third = Rational64::new(1, 3);
    let sa = sketch_of(v1, cfg.k, third, cfg.sketch_budget)?;
    let sb = sketch_of(v2, cfg.k, third, cfg.sketch_budget)?;
    let xs = sa.clauses(v1);
    let ys = sb.clauses(v2);
    let bits = |cs: &[&Clause]| cs.iter().map(|c| clause_bits(c, cfg.value_bits)).sum();
    let mut transcript = Transcript::default();
    transcript.push_round(vec![
        msg("alice", "sketch", bits(&xs)),
        msg("bob", "sketch", bits(&ys)),
    ]);
    transcript.note("sketch_alice", sa.method.as_str());
    transcript.note("sketch_bob", sb.method.as_str());
    best_known_outcome(ProtocolId::P5, &vals, &xs, &ys, spec, transcript)
}

/// Alice sends her (k, 1/2)-sketch to Bob; Bob picks the sketch clause that pairs best
/// with his full valuation and announces that split and its value.
pub fn run_protocol6(
    v1: &Valuation,
    v2: &Valuation,
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    let vals = [v1.clone(), v2.clone()];
    check_two(&vals)?;
    check_k(cfg.k, 1)?;
    let spec = cfg.spec()?;
    let sk = sketch_of(v1, cfg.k, Rational64::new(1, 2), cfg.sketch_budget)?;
    let mut best: Option<(usize, crate::welfare::WelfareResult)> = None;
    for (pos, &j) in sk.indices.iter().enumerate() {
        let r = sw_star_xos_pair(&Valuation::from_clause(v1.clause(j).clone()), v2)?;
        if best.as_ref().is_none_or(|b| r.value > b.1.value) {
            best = Some((pos, r));
        }
    }
    let (pos, res) = best.expect("sketch is non-empty");
    let allocation = res.allocation;
    let welfare = allocation.welfare(&vals)?;
    let answer = spec.map(|s| {
        if s.accepts(res.value) {
            Answer::Yes
        } else {
            Answer::No
        }
    });
    let xs = sk.clauses(v1);
    let mut transcript = Transcript::default();
    transcript.push_round(vec![msg(
        "alice",
        "sketch",
        xs.iter().map(|c| clause_bits(c, cfg.value_bits)).sum(),
    )]);
    // Two players: one bit of ownership per item, plus the announced value.
    transcript.push_round(vec![msg(
        "bob",
        "allocation",
        v1.m() as u64 + cfg.value_bits,
    )]);
    transcript.note("sketch_alice", sk.method.as_str());
    transcript.note("chosen_clause", pos.to_string());
    Ok(ProtocolOutcome {
        protocol: ProtocolId::P6,
        allocation,
        answer,
        welfare,
        expected_welfare: welfare,
        expected_welfare_exact: integral(welfare),
        coins: Vec::new(),
        transcript,
    })
}

/// All items to one uniformly random player.
pub fn baseline_grand_bundle(vals: &[Valuation], cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    check_two(vals)?;
    let m = vals[0].m();
    let grands: Vec<f64> = vals.iter().map(Valuation::grand_value).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let coin = draw(&mut rng, 2);
    let allocation = Allocation::new(2, vec![coin; m])?;
    let welfare = allocation.welfare(vals)?;
    let exact = mean_exact(&grands);
    Ok(ProtocolOutcome {
        protocol: ProtocolId::Baseline,
        allocation,
        answer: None,
        welfare,
        expected_welfare: exact.map_or((grands[0] + grands[1]) / 2.0, |r| to_f64(&r)),
        expected_welfare_exact: exact,
        coins: vec![coin],
        transcript: Transcript::default(),
    })
}

pub fn run_protocol(
    id: ProtocolId,
    vals: &[Valuation],
    cfg: &ProtocolConfig,
) -> Result<ProtocolOutcome> {
    if cfg.mode == Mode::Decision && !id.supports_decision() {
        return Err(Error::InvalidParameter(format!(
            "protocol {id} has no decision mode"
        )));
    }
    match id {
        ProtocolId::P4 => run_protocol4(vals, cfg),
        ProtocolId::Baseline => baseline_grand_bundle(vals, cfg),
        _ => {
            check_two(vals)?;
            let (v1, v2) = (&vals[0], &vals[1]);
            match id {
                ProtocolId::P1 => run_protocol1(v1, v2, cfg),
                ProtocolId::P2 => run_protocol2(v1, v2, cfg),
                ProtocolId::P3 => run_protocol3(v1, v2, cfg),
                ProtocolId::P5 => run_protocol5(v1, v2, cfg),
                _ => run_protocol6(v1, v2, cfg),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (Valuation, Valuation) {
        (
            Valuation::binary(3, &[&[0, 1], &[2]]).unwrap(),
            Valuation::binary(3, &[&[1, 2]]).unwrap(),
        )
    }

    fn exact(n: i128, d: i128) -> Option<Rational> {
        Some(Rational::new(n, d))
    }

    #[test]
    fn protocol_ids_parse() {
        assert_eq!("3".parse::<ProtocolId>().unwrap(), ProtocolId::P3);
        assert_eq!("p5".parse::<ProtocolId>().unwrap(), ProtocolId::P5);
        assert_eq!(
            "baseline".parse::<ProtocolId>().unwrap(),
            ProtocolId::Baseline
        );
        assert!("7".parse::<ProtocolId>().is_err());
        assert_eq!(ProtocolId::P5.bound(8), Rational64::new(19, 32));
    }

    #[test]
    fn alice_only_wrapup() {
        let (v1, _) = example();
        let sk = sketch_of(&v1, 2, Rational64::new(1, 2), 100).unwrap();
        assert_eq!(wrapup_alice_only(&sk, &v1, 0).owner(), &[0, 0, 1]);
        assert_eq!(wrapup_alice_only(&sk, &v1, 1).owner(), &[1, 1, 0]);
        let empty = Valuation::binary(2, &[&[]]).unwrap();
        let sk = sketch_of(&empty, 2, Rational64::new(1, 2), 100).unwrap();
        assert_eq!(wrapup_alice_only(&sk, &empty, 0).owner(), &[1, 1]);
    }

    #[test]
    fn best_known_wrapups() {
        let ones = Clause::from_indices(3, &[0, 1, 2]).unwrap();
        let (alloc, value, _) = wrapup_best_known(&[&ones], &[&ones]);
        assert_eq!(alloc.owner(), &[0, 0, 0]);
        assert_eq!(value, 3.0);
        let a = Clause::from_indices(3, &[0, 1]).unwrap();
        let b = Clause::from_indices(3, &[1, 2]).unwrap();
        let spec = DecisionSpec::new(3.0, Rational64::new(3, 5)).unwrap();
        assert_eq!(wrapup_best_known_decision(&[&a], &[&b], &spec), Answer::Yes);
        let zero = Clause::from_indices(3, &[]).unwrap();
        assert_eq!(
            wrapup_best_known_decision(&[&zero], &[&zero], &spec),
            Answer::No
        );
        // Exactly alpha X is accepted.
        let spec = DecisionSpec::new(5.0, Rational64::new(3, 5)).unwrap();
        assert_eq!(wrapup_best_known_decision(&[&a], &[&b], &spec), Answer::Yes);
    }

    #[test]
    fn protocol1_example() {
        let (v1, v2) = example();
        let out = run_protocol1(&v1, &v2, &ProtocolConfig::new(1, 0)).unwrap();
        assert_eq!(out.expected_welfare_exact, exact(8, 3));
        assert_eq!(out.transcript.round_count, 1);
    }

    #[test]
    fn protocol2_examples() {
        let v1 = Valuation::binary(3, &[&[0, 1]]).unwrap();
        let v2 = Valuation::binary(3, &[&[1, 2]]).unwrap();
        let cfg = ProtocolConfig::new(1, 0)
            .with_decision(DecisionSpec::for_protocol(ProtocolId::P2, 1, 3.0).unwrap());
        let out = run_protocol2(&v1, &v2, &cfg).unwrap();
        assert_eq!(out.welfare, 3.0);
        assert_eq!(out.answer, Some(Answer::Yes));
        let mut missing = ProtocolConfig::new(1, 0);
        missing.mode = Mode::Decision;
        assert_eq!(
            run_protocol2(&v1, &v2, &missing).unwrap_err(),
            Error::MissingDecisionSpec
        );
    }

    #[test]
    fn protocol3_example() {
        let (v1, v2) = example();
        let out = run_protocol3(&v1, &v2, &ProtocolConfig::new(2, 5)).unwrap();
        assert_eq!(out.expected_welfare_exact, exact(5, 2));
        assert_eq!(out.transcript.total_bits, 3);
        assert_eq!(out.transcript.round_count, 1);
        assert_eq!(out.welfare, out.allocation.welfare(&[v1, v2]).unwrap());
    }

    #[test]
    fn protocol4_reduces_to_protocol3() {
        let (v1, v2) = example();
        let cfg = ProtocolConfig::new(2, 5);
        let p3 = run_protocol3(&v1, &v2, &cfg).unwrap();
        let p4 = run_protocol4(&[v1, v2], &cfg).unwrap();
        assert_eq!(p3.expected_welfare_exact, p4.expected_welfare_exact);
    }

    #[test]
    fn protocol4_full_clauses() {
        let all = Valuation::binary(4, &[&[0, 1, 2, 3]]).unwrap();
        let vals = vec![all.clone(), all.clone(), all];
        let out = run_protocol4(&vals, &ProtocolConfig::new(3, 1)).unwrap();
        assert_eq!(out.expected_welfare_exact, exact(4, 1));
        assert_eq!(out.allocation.owner(), &[0, 0, 0, 0]);
        assert_eq!(out.transcript.round_count, 2);
    }

    #[test]
    fn protocol5_and_6_on_single_clauses() {
        let v1 = Valuation::general(vec![vec![2.0, 0.0, 1.0]]).unwrap();
        let v2 = Valuation::general(vec![vec![1.0, 3.0, 1.0]]).unwrap();
        let cfg = ProtocolConfig::new(4, 0);
        let p5 = run_protocol5(&v1, &v2, &cfg).unwrap();
        assert_eq!(p5.welfare, 6.0);
        assert_eq!(p5.transcript.total_bits, 2 * 4 * 3 * 32);
        let p6 = run_protocol6(&v1, &v2, &cfg).unwrap();
        assert_eq!(p6.welfare, 6.0);
        assert_eq!(p6.transcript.round_count, 2);
    }

    #[test]
    fn baseline_examples() {
        let ones = Valuation::binary(3, &[&[0, 1, 2]]).unwrap();
        let zero = Valuation::binary(3, &[&[]]).unwrap();
        let cfg = ProtocolConfig::new(1, 0);
        let out = baseline_grand_bundle(&[ones.clone(), ones.clone()], &cfg).unwrap();
        assert_eq!(out.expected_welfare_exact, exact(3, 1));
        let out = baseline_grand_bundle(&[ones, zero], &cfg).unwrap();
        assert_eq!(out.expected_welfare_exact, exact(3, 2));
    }

    #[test]
    fn realized_runs_are_seeded() {
        let (v1, v2) = example();
        let a = run_protocol3(&v1, &v2, &ProtocolConfig::new(8, 42)).unwrap();
        let b = run_protocol3(&v1, &v2, &ProtocolConfig::new(8, 42)).unwrap();
        assert_eq!(a, b);
    }
}
