//! Argument parsing and command dispatch for the `simulbid` binary.

use crate::battery::{
    oracle_value, run_battery, run_mechanism_battery, summarize, sweep, write_csv, RunConfig,
};
use crate::error::{HarnessError, Result};
use crate::source::{InstanceSource, LoadedInstance};
use crate::verify::{exchange_rows, truthfulness_sweep};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use simulbid_core::hardness::{
    find_smallest_f1, gen_appendix_g, gen_f1, stats_appendix_g, verify_f1_exclusion, F1Params,
    F1_M_GRID, G_DEFAULT_L,
};
use simulbid_core::instance::{f1_to_instance, g_to_instance};
use simulbid_core::protocols::{DEFAULT_PATH_BUDGET, DEFAULT_VALUE_BITS};
use simulbid_core::sketch::DEFAULT_SKETCH_BUDGET;
use simulbid_core::welfare::{brute_force_partitions, DEFAULT_TUPLE_BUDGET};
use simulbid_core::{Family, FamilySpec, Instance, Mode, ProtocolId, Provenance, Rational64};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "simulbid",
    version,
    about = "Simultaneous-bidding protocol harness"
)]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, env = "SIMULBID_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a protocol or the mechanism over a battery of instances.
    Run(RunArgs),
    /// Write instances from a generator.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run protocols over a grid of k on one battery.
    Sweep(SweepArgs),
    /// Print optimal welfare for each instance.
    Oracle(OracleArgs),
    /// Run an inequality or construction verifier.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Allocation,
    Decision,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Bits per value when sending a general clause.
    #[arg(long, default_value_t = DEFAULT_VALUE_BITS)]
    pub value_bits: u64,
    /// Largest multiset count enumerated by the exact sketch.
    #[arg(long, default_value_t = DEFAULT_SKETCH_BUDGET, value_parser = positive)]
    pub sketch_budget: u64,
    /// Largest number of coin paths averaged exactly.
    #[arg(long, default_value_t = DEFAULT_PATH_BUDGET, value_parser = positive)]
    pub path_budget: u64,
    /// Largest clause-tuple count the welfare oracle enumerates.
    #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET, value_parser = positive)]
    pub oracle_budget: u64,
    /// Record wall-clock milliseconds per row (otherwise 0, keeping output reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// `random:<bxos|xos>[:m=..,t=..,n=..,vmax=..,count=..]`, an instance file or a directory.
    #[arg(long)]
    pub instances: String,
    /// Overrides the player count of a random family.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: u64,
}

impl SourceArgs {
    pub fn load(&self) -> Result<Vec<LoadedInstance>> {
        let mut src: InstanceSource = self.instances.parse()?;
        if let (Some(n), InstanceSource::Random { spec, .. }) = (self.n, &mut src) {
            spec.n = n;
            spec.validate()?;
        }
        src.load(self.seed)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Protocol `1`..`6` or `baseline`.
    #[arg(long, required_unless_present = "mechanism", value_parser = parse_protocol)]
    pub protocol: Option<ProtocolId>,
    /// Run the priced mechanism with truthful players instead of a protocol.
    #[arg(long, conflicts_with = "protocol")]
    pub mechanism: bool,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Allocation)]
    pub mode: ModeArg,
    /// Decision threshold.
    #[arg(long = "X", alias = "x")]
    pub threshold: Option<f64>,
    /// Decision factor (defaults to the protocol's bound), e.g. `1/2`.
    #[arg(long, value_parser = parse_ratio)]
    pub alpha: Option<Rational64>,
    /// Compute only the optimal welfare column.
    #[arg(long)]
    pub oracle_only: bool,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    /// CSV output (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON output.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Planted-pair instance whose planted clauses no sketch keeps.
    F1(GenF1Args),
    /// Hidden-bit instance.
    #[command(name = "appendix-g")]
    AppendixG(GenGArgs),
    /// Instances of a random family, one file each.
    Random(GenRandomArgs),
}

#[derive(Debug, Args)]
pub struct GenF1Args {
    #[arg(long, default_value = "1/10", value_parser = parse_ratio)]
    pub eps: Rational64,
    /// Item count; when absent the smallest verified size on the default grid is used.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    pub max_retries: usize,
    #[arg(long)]
    pub reveal: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenGArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = G_DEFAULT_L)]
    pub l: usize,
    #[arg(long)]
    pub seed: u64,
    /// Fix the hidden bit.
    #[arg(long = "force-m")]
    pub force_m: Option<u8>,
    #[arg(long)]
    pub reveal: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Bxos,
    Xos,
}

#[derive(Debug, Args)]
pub struct GenRandomArgs {
    #[arg(long, value_enum, default_value_t = FamilyArg::Bxos)]
    pub family: FamilyArg,
    /// Item count or inclusive range `lo-hi`.
    #[arg(long, default_value = "2-10")]
    pub m: String,
    /// Clauses per player, count or range.
    #[arg(long, default_value = "2-8")]
    pub t: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub vmax: u32,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated protocol ids.
    #[arg(long, value_delimiter = ',', value_parser = parse_protocol, default_value = "3")]
    pub protocols: Vec<ProtocolId>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub ks: Vec<usize>,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Cross-check against enumeration of every item assignment.
    #[arg(long)]
    pub brute_force: bool,
    #[arg(long, default_value_t = DEFAULT_TUPLE_BUDGET)]
    pub oracle_budget: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Exchange inequalities for every computed sketch of a battery.
    Exchange(VerifyExchangeArgs),
    /// Planted-pair conditions and planted-clause exclusion.
    F1(VerifyF1Args),
    /// Monte-Carlo welfare statistics of the hidden-bit family.
    #[command(name = "g-stats")]
    GStats(VerifyGArgs),
    /// Exhaustive best responses of the priced mechanism on small item counts.
    Truthfulness(VerifyTruthArgs),
}

#[derive(Debug, Args)]
pub struct VerifyExchangeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_ratio, default_value = "0,1/3,1/2")]
    pub alphas: Vec<Rational64>,
    #[arg(long, default_value_t = 200_000)]
    pub sketch_budget: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyF1Args {
    #[arg(long, default_value = "1/10", value_parser = parse_ratio)]
    pub eps: Rational64,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = positive_usize)]
    pub max_retries: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_ratio, default_value = "1/3,1/2")]
    pub alphas: Vec<Rational64>,
    #[arg(long, default_value_t = 100_000)]
    pub sketch_budget: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyGArgs {
    #[arg(long, default_value_t = 108)]
    pub m: usize,
    #[arg(long, default_value_t = G_DEFAULT_L)]
    pub l: usize,
    #[arg(long, default_value_t = 400)]
    pub trials: usize,
    /// Welfare fraction for the reported `Pr[SW* > α m | M = 0]`.
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyTruthArgs {
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 3)]
    pub t: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_protocol(s: &str) -> std::result::Result<ProtocolId, String> {
    s.parse().map_err(|e: simulbid_core::Error| e.to_string())
}

fn positive(s: &str) -> std::result::Result<u64, String> {
    match s.parse::<u64>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    positive(s).map(|v| v as usize)
}

/// Parses `p/q`, an integer or a finite decimal such as `0.1` into an exact rational.
pub fn parse_ratio(s: &str) -> std::result::Result<Rational64, String> {
    let s = s.trim();
    let err = || format!("expected a fraction like `1/3` or `0.1`, got `{s}`");
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (i64, i64) = (p.parse().map_err(|_| err())?, q.parse().map_err(|_| err())?);
        if q == 0 {
            return Err(err());
        }
        return Ok(Rational64::new(p, q));
    }
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let den = 10i64.pow(frac.len() as u32);
    let w: i64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| err())?
    };
    let f: i64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| err())?
    };
    let sign = if whole.starts_with('-') { -1 } else { 1 };
    Ok(Rational64::new(w * den + sign * f, den))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn write_text(text: &str, path: Option<&Path>) -> Result<()> {
    let mut w = sink(path)?;
    w.write_all(text.as_bytes())?;
    writeln!(w)?;
    Ok(())
}

fn status(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn report_row_errors<'a>(errors: impl Iterator<Item = (&'a str, &'a str)>) {
    for (id, e) in errors {
        eprintln!("warning: {id}: {e}");
    }
}

fn cmd_run(a: &RunArgs) -> Result<ExitCode> {
    let instances = a.source.load()?;
    if a.mechanism {
        let rows = run_mechanism_battery(
            &instances,
            a.k,
            a.budgets.sketch_budget,
            a.budgets.path_budget,
        );
        report_row_errors(
            rows.iter()
                .filter_map(|r| Some((r.instance.as_str(), r.error.as_deref()?))),
        );
        write_csv(&rows, sink(a.out.as_deref())?)?;
        return Ok(status(
            rows.iter().all(|r| r.utility_nonnegative != Some(false)),
        ));
    }
    let protocol = a.protocol.expect("clap requires a protocol");
    let cfg = RunConfig {
        protocol,
        k: a.k,
        mode: match a.mode {
            ModeArg::Allocation => Mode::Allocation,
            ModeArg::Decision => Mode::Decision,
        },
        threshold: a.threshold,
        alpha: a.alpha,
        value_bits: a.budgets.value_bits,
        sketch_budget: a.budgets.sketch_budget,
        path_budget: a.budgets.path_budget,
        oracle_budget: a.budgets.oracle_budget,
        oracle_only: a.oracle_only,
        timing: a.budgets.timing,
    };
    if cfg.mode == Mode::Decision && cfg.threshold.is_none() {
        return Err(HarnessError::Config("decision mode needs --X".into()));
    }
    let rows = run_battery(&instances, &cfg);
    report_row_errors(
        rows.iter()
            .filter_map(|r| Some((r.instance.as_str(), r.error.as_deref()?))),
    );
    write_csv(&rows, sink(a.out.as_deref())?)?;
    let summary = summarize(protocol, a.k, &rows);
    if let Some(p) = &a.summary {
        write_json(&summary, Some(p))?;
    }
    Ok(status(summary.violations == 0))
}

fn cmd_sweep(a: &SweepArgs) -> Result<ExitCode> {
    let instances = a.source.load()?;
    let mut base = RunConfig::new(a.protocols[0], a.ks[0]);
    base.value_bits = a.budgets.value_bits;
    base.sketch_budget = a.budgets.sketch_budget;
    base.path_budget = a.budgets.path_budget;
    base.oracle_budget = a.budgets.oracle_budget;
    base.timing = a.budgets.timing;
    let (rows, summary) = sweep(&instances, &a.protocols, &a.ks, &base);
    report_row_errors(
        rows.iter()
            .filter_map(|r| Some((r.instance.as_str(), r.error.as_deref()?))),
    );
    if let Some(out) = &a.out {
        write_csv(&rows, sink(Some(out))?)?;
    }
    match &a.summary {
        Some(p) => write_json(&summary, Some(p))?,
        None => write_csv(&summary, sink(None)?)?,
    }
    Ok(status(summary.iter().all(|s| s.violations == 0)))
}

fn save_or_print(inst: &Instance, out: Option<&Path>) -> Result<()> {
    write_text(&inst.to_json(), out)
}

fn cmd_gen(g: &GenCommand) -> Result<ExitCode> {
    match g {
        GenCommand::F1(a) => {
            let inst = match a.m {
                Some(m) => gen_f1(F1Params::new(a.eps, m)?, a.seed, a.max_retries)?,
                None => {
                    let (found, steps) =
                        find_smallest_f1(a.eps, &F1_M_GRID, a.seed, a.max_retries)?;
                    found.ok_or_else(|| {
                        HarnessError::Config(format!("no verified instance on the grid: {steps:?}"))
                    })?
                }
            };
            if !inst.verified {
                eprintln!(
                    "warning: instance unverified, failed conditions {:?}",
                    inst.conditions.failed()
                );
            }
            save_or_print(&f1_to_instance(&inst, a.reveal), a.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        GenCommand::AppendixG(a) => {
            let inst = gen_appendix_g(a.m, a.l, a.seed, a.force_m)?;
            save_or_print(&g_to_instance(&inst, a.reveal), a.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        GenCommand::Random(a) => {
            let family = match a.family {
                FamilyArg::Bxos => Family::Bxos,
                FamilyArg::Xos => Family::Xos,
            };
            let src: InstanceSource = format!(
                "random:{}:m={},t={},n={},vmax={},count={}",
                match family {
                    Family::Bxos => "bxos",
                    Family::Xos => "xos",
                },
                a.m,
                a.t,
                a.n,
                a.vmax,
                a.count
            )
            .parse()?;
            let InstanceSource::Random { spec, .. } = &src else {
                unreachable!("random source")
            };
            std::fs::create_dir_all(&a.out_dir)?;
            for (i, li) in src.load(a.seed)?.into_iter().enumerate() {
                let inst = li
                    .instance
                    .with_provenance(random_provenance(spec, a.seed, i));
                inst.save(&a.out_dir.join(format!("instance-{i:05}.json")))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn random_provenance(spec: &FamilySpec, seed: u64, index: usize) -> Provenance {
    let params = json!({
        "family": spec.family,
        "m": [spec.m.0, spec.m.1],
        "t": [spec.t.0, spec.t.1],
        "n": spec.n,
        "vmax": spec.vmax,
        "index": index,
    });
    Provenance {
        construction: "random".into(),
        params: params.as_object().cloned().unwrap_or_default(),
        seed: Some(seed),
        hidden: None,
    }
}

#[derive(Serialize)]
struct OracleRow {
    instance: String,
    oracle: Option<f64>,
    brute_force: Option<f64>,
    agrees: Option<bool>,
    error: Option<String>,
}

fn cmd_oracle(a: &OracleArgs) -> Result<ExitCode> {
    let instances = a.source.load()?;
    let rows: Vec<OracleRow> = instances
        .iter()
        .map(|li| {
            let players = &li.instance.players;
            let value = oracle_value(players, a.oracle_budget);
            let brute = a
                .brute_force
                .then(|| brute_force_partitions(players).map(|w| w.value));
            let mut row = OracleRow {
                instance: li.id.clone(),
                oracle: None,
                brute_force: None,
                agrees: None,
                error: None,
            };
            match (value, brute) {
                (Err(e), _) | (_, Some(Err(e))) => row.error = Some(e.to_string()),
                (Ok(v), b) => {
                    row.oracle = Some(v);
                    if let Some(Ok(b)) = b {
                        row.brute_force = Some(b);
                        row.agrees = Some(b == v);
                    }
                }
            }
            row
        })
        .collect();
    write_csv(&rows, sink(a.out.as_deref())?)?;
    Ok(status(rows.iter().all(|r| r.agrees != Some(false))))
}

fn cmd_verify(v: &VerifyCommand) -> Result<ExitCode> {
    match v {
        VerifyCommand::Exchange(a) => {
            let instances = a.source.load()?;
            let rows = exchange_rows(&instances, &a.ks, &a.alphas, a.sketch_budget);
            write_csv(&rows, sink(a.out.as_deref())?)?;
            Ok(status(rows.iter().all(|r| r.passed == Some(true))))
        }
        VerifyCommand::F1(a) => {
            let (inst, steps) = match a.m {
                Some(m) => {
                    let i = gen_f1(F1Params::new(a.eps, m)?, a.seed, a.max_retries)?;
                    (Some(i), Vec::new())
                }
                None => find_smallest_f1(a.eps, &F1_M_GRID, a.seed, a.max_retries)?,
            };
            let Some(inst) = inst else {
                write_json(
                    &json!({ "search": steps, "passed": false }),
                    a.out.as_deref(),
                )?;
                return Ok(ExitCode::from(1));
            };
            let report = verify_f1_exclusion(&inst, &a.ks, &a.alphas, a.sketch_budget)?;
            write_json(
                &json!({
                    "m": inst.params.m(),
                    "eps": inst.params.eps().to_string(),
                    "t": inst.params.t(),
                    "attempts": inst.attempts,
                    "verified": inst.verified,
                    "conditions": inst.conditions,
                    "search": steps,
                    "report": report,
                }),
                a.out.as_deref(),
            )?;
            Ok(status(report.passed))
        }
        VerifyCommand::GStats(a) => {
            let st = stats_appendix_g(a.m, a.l, a.trials, a.alpha, a.seed)?;
            let ok = st.structure_ok
                && st.both_planted_exact == st.both_planted_total
                && st.bit1_full_fraction == 1.0
                && st.one_planted.within_3_sigma
                && st.neither_planted.within_3_sigma;
            write_json(&st, a.out.as_deref())?;
            Ok(status(ok))
        }
        VerifyCommand::Truthfulness(a) => {
            let s = truthfulness_sweep(a.m, a.t, a.k, DEFAULT_SKETCH_BUDGET);
            let ok = s.failures.is_empty();
            write_json(&s, a.out.as_deref())?;
            Ok(status(ok))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Gen(g) => cmd_gen(g),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(v) => cmd_verify(v),
    }
}

/// Exit codes: 0 success, 1 a bound or verifier failed, 2 bad input.
pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_parse() {
        assert_eq!(parse_ratio("1/3").unwrap(), Rational64::new(1, 3));
        assert_eq!(parse_ratio("0.1").unwrap(), Rational64::new(1, 10));
        assert_eq!(parse_ratio("2").unwrap(), Rational64::from_integer(2));
        assert_eq!(parse_ratio(".25").unwrap(), Rational64::new(1, 4));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn arguments_parse() {
        let cli = Cli::try_parse_from([
            "simulbid",
            "run",
            "--protocol",
            "3",
            "--k",
            "4",
            "--instances",
            "random:bxos:m=8,t=6,count=200",
            "--seed",
            "7",
        ])
        .unwrap();
        assert!(matches!(cli.command, Command::Run(_)));
        let cli = Cli::try_parse_from([
            "simulbid",
            "run",
            "--protocol",
            "5",
            "--mode",
            "decision",
            "--X",
            "6",
            "--k",
            "8",
            "--instances",
            "random:xos",
            "--seed",
            "1",
        ])
        .unwrap();
        match cli.command {
            Command::Run(a) => assert_eq!(a.threshold, Some(6.0)),
            _ => panic!("expected run"),
        }
        assert!(
            Cli::try_parse_from(["simulbid", "run", "--instances", "x", "--seed", "1"]).is_err()
        );
        assert!(Cli::try_parse_from([
            "simulbid",
            "gen",
            "appendix-g",
            "--m",
            "108",
            "--l",
            "64",
            "--seed",
            "2",
            "--force-m",
            "1",
        ])
        .is_ok());
    }
}
