//! Protocol and mechanism batteries: one CSV row per instance (or per player), rows
//! always in instance order.

use crate::error::Result;
use crate::source::LoadedInstance;
use rayon::prelude::*;
use serde::Serialize;
use simulbid_core::exact::{integral, to_f64, widen};
use simulbid_core::mechanism::{expected_outcome, run_mechanism, Truthful};
use simulbid_core::protocols::{run_protocol, DEFAULT_PATH_BUDGET, DEFAULT_VALUE_BITS};
use simulbid_core::sketch::DEFAULT_SKETCH_BUDGET;
use simulbid_core::welfare::{sw_star_n, sw_star_xos_pair, DEFAULT_TUPLE_BUDGET};
use simulbid_core::{
    Answer, DecisionSpec, Mode, ProtocolConfig, ProtocolId, Rational, Rational64, Valuation,
};
use std::io::Write;
use std::time::Instant;

/// Relative tolerance for float (general XOS) bound checks.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub protocol: ProtocolId,
    pub k: usize,
    pub mode: Mode,
    /// Decision threshold `X`.
    pub threshold: Option<f64>,
    /// Decision factor; defaults to the protocol's bound.
    pub alpha: Option<Rational64>,
    pub value_bits: u64,
    pub sketch_budget: u64,
    pub path_budget: u64,
    pub oracle_budget: u64,
    pub oracle_only: bool,
    pub timing: bool,
}

impl RunConfig {
    pub fn new(protocol: ProtocolId, k: usize) -> Self {
        RunConfig {
            protocol,
            k,
            mode: Mode::Allocation,
            threshold: None,
            alpha: None,
            value_bits: DEFAULT_VALUE_BITS,
            sketch_budget: DEFAULT_SKETCH_BUDGET,
            path_budget: DEFAULT_PATH_BUDGET,
            oracle_budget: DEFAULT_TUPLE_BUDGET,
            oracle_only: false,
            timing: false,
        }
    }

    fn protocol_config(&self, seed: u64) -> simulbid_core::Result<ProtocolConfig> {
        let mut cfg = ProtocolConfig::new(self.k, seed);
        cfg.value_bits = self.value_bits;
        cfg.sketch_budget = self.sketch_budget;
        cfg.path_budget = self.path_budget;
        if self.mode == Mode::Decision {
            let x = self
                .threshold
                .ok_or(simulbid_core::Error::MissingDecisionSpec)?;
            let alpha = self.alpha.unwrap_or_else(|| self.protocol.bound(self.k));
            cfg = cfg.with_decision(DecisionSpec::new(x, alpha)?);
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResultRow {
    pub instance: String,
    pub seed: u64,
    pub protocol: String,
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub oracle: Option<f64>,
    pub achieved: Option<f64>,
    pub ratio: Option<f64>,
    pub bound: String,
    pub bound_satisfied: Option<bool>,
    pub threshold: Option<f64>,
    pub answer: Option<String>,
    pub bits: Option<u64>,
    pub rounds: Option<usize>,
    pub wall_ms: u64,
    pub error: Option<String>,
}

/// Optimal welfare: clause-pair enumeration for two players, clause tuples otherwise.
pub fn oracle_value(players: &[Valuation], budget: u64) -> simulbid_core::Result<f64> {
    if players.len() == 2 {
        Ok(sw_star_xos_pair(&players[0], &players[1])?.value)
    } else {
        Ok(sw_star_n(players, budget)?.value)
    }
}

fn exact_ratio_ok(achieved: Rational, opt: f64, bound: Rational64) -> Option<bool> {
    let opt = integral(opt)?;
    Some(achieved >= opt * widen(bound))
}

/// Allocation rows pass when the expected welfare reaches the bound (exactly on
/// binary inputs, within [`FLOAT_TOLERANCE`] otherwise); decision rows pass when the
/// answer is sound: yes whenever `SW* ≥ X`, no whenever `SW* < α X`.
fn evaluate_row(cfg: &RunConfig, li: &LoadedInstance) -> ResultRow {
    let inst = &li.instance;
    let mut row = ResultRow {
        instance: li.id.clone(),
        seed: li.seed,
        protocol: cfg.protocol.to_string(),
        k: cfg.k,
        n: inst.players.len(),
        m: inst.m,
        bound: cfg.protocol.bound(cfg.k).to_string(),
        threshold: cfg.threshold.filter(|_| cfg.mode == Mode::Decision),
        ..ResultRow::default()
    };
    let start = Instant::now();
    let result = (|| -> simulbid_core::Result<()> {
        let opt = oracle_value(&inst.players, cfg.oracle_budget)?;
        row.oracle = Some(opt);
        if cfg.oracle_only {
            return Ok(());
        }
        let pcfg = cfg.protocol_config(li.seed)?;
        let out = run_protocol(cfg.protocol, &inst.players, &pcfg)?;
        row.bits = Some(out.transcript.total_bits);
        row.rounds = Some(out.transcript.round_count);
        row.achieved = Some(out.expected_welfare);
        row.ratio = Some(if opt > 0.0 {
            out.expected_welfare / opt
        } else {
            1.0
        });
        match (cfg.mode, out.answer, pcfg.decision) {
            (Mode::Decision, Some(answer), Some(spec)) => {
                row.bound = spec.alpha.to_string();
                row.answer = Some(format!("{answer:?}").to_lowercase());
                let yes_required = opt >= spec.threshold;
                let no_required = !spec.accepts(opt);
                row.bound_satisfied = Some(match answer {
                    Answer::Yes => !no_required,
                    Answer::No => !yes_required,
                });
            }
            _ => {
                let bound = cfg.protocol.bound(cfg.k);
                let exact = out
                    .expected_welfare_exact
                    .and_then(|e| exact_ratio_ok(e, opt, bound));
                let b = to_f64(&widen(bound));
                row.bound_satisfied = Some(
                    exact.unwrap_or(out.expected_welfare >= b * opt * (1.0 - FLOAT_TOLERANCE)),
                );
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    if cfg.timing {
        row.wall_ms = start.elapsed().as_millis() as u64;
    }
    row
}

pub fn run_battery(instances: &[LoadedInstance], cfg: &RunConfig) -> Vec<ResultRow> {
    instances
        .par_iter()
        .map(|li| evaluate_row(cfg, li))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MechanismRow {
    pub instance: String,
    pub seed: u64,
    pub k: usize,
    pub player: usize,
    pub value: Option<String>,
    pub payment: Option<String>,
    pub utility: Option<String>,
    pub expected_payment: Option<String>,
    pub expected_utility: Option<String>,
    pub utility_nonnegative: Option<bool>,
    pub error: Option<String>,
}

/// Truthful play: one realized run plus exact expectations over every coin path.
pub fn run_mechanism_battery(
    instances: &[LoadedInstance],
    k: usize,
    sketch_budget: u64,
    path_budget: u64,
) -> Vec<MechanismRow> {
    let strategy = Truthful { sketch_budget };
    instances
        .par_iter()
        .flat_map_iter(|li| {
            let vals = &li.instance.players;
            let base = MechanismRow {
                instance: li.id.clone(),
                seed: li.seed,
                k,
                ..MechanismRow::default()
            };
            let run = run_mechanism(vals, &strategy, k, li.seed);
            let exp = expected_outcome(vals, &strategy, k, path_budget);
            match (run, exp) {
                (Ok(run), Ok(exp)) => (0..vals.len())
                    .map(|l| MechanismRow {
                        player: l,
                        value: Some(run.values[l].to_string()),
                        payment: Some(run.payments[l].to_string()),
                        utility: Some(run.utilities[l].to_string()),
                        expected_payment: Some(exp.payments[l].to_string()),
                        expected_utility: Some(exp.utilities[l].to_string()),
                        utility_nonnegative: Some(exp.utilities[l] >= Rational::from_integer(0)),
                        ..base.clone()
                    })
                    .collect::<Vec<_>>(),
                (Err(e), _) | (_, Err(e)) => vec![MechanismRow {
                    error: Some(e.to_string()),
                    ..base
                }],
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub protocol: String,
    pub k: usize,
    pub instances: usize,
    pub errors: usize,
    pub min_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub bound: String,
    pub violations: usize,
}

pub fn summarize(protocol: ProtocolId, k: usize, rows: &[ResultRow]) -> SummaryRow {
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    SummaryRow {
        protocol: protocol.to_string(),
        k,
        instances: rows.len(),
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        min_ratio: ratios.iter().copied().reduce(f64::min),
        mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
        bound: protocol.bound(k).to_string(),
        violations: rows
            .iter()
            .filter(|r| r.bound_satisfied == Some(false))
            .count(),
    }
}

/// Runs every protocol for every `k` on the same instances.
pub fn sweep(
    instances: &[LoadedInstance],
    protocols: &[ProtocolId],
    ks: &[usize],
    base: &RunConfig,
) -> (Vec<ResultRow>, Vec<SummaryRow>) {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &p in protocols {
        for &k in ks {
            let cfg = RunConfig {
                protocol: p,
                k,
                ..base.clone()
            };
            let r = run_battery(instances, &cfg);
            summary.push(summarize(p, k, &r));
            rows.extend(r);
        }
    }
    (rows, summary)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
