//! The `rwcake` command line.
//!
//! Every command returns an [`Outcome`] holding the bytes for stdout and the
//! exit code; errors map to codes through [`Error::exit_code`]. Output is a
//! pure function of the arguments, the config file and the seed.

use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::adversary::by_name;
use crate::error::{Error, Result};
use crate::fairness::{gap, Allocation, Notion};
use crate::gen::{default_band, random_profile};
use crate::movingknife::{run_procedure, Procedure};
use crate::protocols::{run_protocol, ProtocolKind, ProtocolOutput};
use crate::query::{Adversary, QueryModel, Referee};
use crate::rational::{fmt_q, parse_q, to_f64, Q};
use crate::valuation::{parse_profile, profile_to_json, PiecewiseDensity};

pub const SEED_ENV: &str = "RWCAKE_SEED";

#[derive(Debug, Parser)]
#[command(name = "rwcake", version, about = "Exact cake-cutting protocols, adversaries and moving knives")]
pub struct Cli {
    /// JSON object whose keys mirror the long flag names; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Add floating-point display fields (labelled `_approx`) next to exact values.
    #[arg(long, global = true)]
    pub approx: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a protocol on a valuation file and report the recomputed gap.
    Run(RunArgs),
    /// Run a protocol against an adaptive adversary and certify the residual gap.
    Duel(DuelArgs),
    /// Query counts and gaps over random instances for a list of epsilons (CSV).
    Sweep(SweepArgs),
    /// Generate random hungry valuations.
    Gen(GenArgs),
    /// Recompute a fairness gap for an allocation file.
    Check(CheckArgs),
    /// Simulate a moving-knife procedure.
    MovingKnife(KnifeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub valuations: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<String>,
    /// rw, rw+ or rw-.
    #[arg(long)]
    pub model: Option<String>,
    /// Write the query transcript as JSONL.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DuelArgs {
    /// prms, perfect or equitable.
    #[arg(long)]
    pub adversary: Option<String>,
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub max_queries: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub protocol: Option<String>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<String>,
    #[arg(long)]
    pub instances: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub model: Option<String>,
    /// Player count for protocols that accept any.
    #[arg(long)]
    pub players: Option<usize>,
    #[arg(long)]
    pub segments: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub players: Option<usize>,
    #[arg(long)]
    pub segments: Option<usize>,
    /// Lower bound on squared density values.
    #[arg(long)]
    pub lo: Option<String>,
    /// Upper bound on squared density values.
    #[arg(long)]
    pub hi: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub valuations: Option<PathBuf>,
    #[arg(long)]
    pub allocation: Option<PathBuf>,
    /// envy, proportionality, equitability, perfection or splitting:k.
    #[arg(long)]
    pub notion: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
}

#[derive(Debug, Args)]
pub struct KnifeArgs {
    #[arg(long)]
    pub procedure: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub valuations: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
}

/// Text for stdout and the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn json(v: &Value, code: i32) -> Self {
        let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
        s.push('\n');
        Outcome { stdout: s, code }
    }
}

/// Flag values with a config-file fallback.
struct Settings {
    config: Map<String, Value>,
    approx: bool,
}

impl Settings {
    fn load(path: Option<&Path>, approx: bool) -> Result<Self> {
        let config = match path {
            None => Map::new(),
            Some(p) => match serde_json::from_str::<Value>(&std::fs::read_to_string(p)?)? {
                Value::Object(m) => m,
                _ => return Err(Error::Parse("config file must hold a JSON object".into())),
            },
        };
        Ok(Settings { config, approx })
    }

    fn lookup(&self, key: &str) -> Option<&Value> {
        self.config.get(key).or_else(|| self.config.get(&key.replace('-', "_")))
    }

    fn string(&self, flag: Option<String>, key: &str) -> Result<Option<String>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.lookup(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(other) => Err(Error::Parse(format!("config key '{key}' must be a string, got {other}"))),
        }
    }

    fn required(&self, flag: Option<String>, key: &str) -> Result<String> {
        self.string(flag, key)?.ok_or_else(|| Error::Parse(format!("missing --{key}")))
    }

    fn number(&self, flag: Option<usize>, key: &str) -> Result<Option<usize>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.lookup(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|n| Some(n as usize))
                .ok_or_else(|| Error::Parse(format!("config key '{key}' must be a non-negative integer"))),
        }
    }

    fn path(&self, flag: Option<PathBuf>, key: &str) -> Result<PathBuf> {
        if let Some(p) = flag {
            return Ok(p);
        }
        self.string(None, key)?.map(PathBuf::from).ok_or_else(|| Error::Parse(format!("missing --{key}")))
    }

    fn eps(&self, flag: Option<String>) -> Result<Q> {
        let e = parse_q(&self.required(flag, "eps")?)?;
        if e <= Q::from_integer(0.into()) {
            return Err(Error::Precondition("eps must be positive".into()));
        }
        Ok(e)
    }

    fn model(&self, flag: Option<String>) -> Result<QueryModel> {
        self.string(flag, "model")?.map_or(Ok(QueryModel::Rw), |m| m.parse())
    }

    /// Flag, then config, then `RWCAKE_SEED`, then 0.
    fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Some(v) = self.lookup("seed") {
            return v.as_u64().ok_or_else(|| Error::Parse("config seed must be a non-negative integer".into()));
        }
        match std::env::var(SEED_ENV) {
            Ok(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{SEED_ENV} must be an integer, got '{s}'"))),
            Err(_) => Ok(0),
        }
    }

    fn annotate(&self, v: &mut Value, key: &str, x: &Q) {
        v[key] = json!(fmt_q(x));
        if self.approx {
            v[format!("{key}_approx")] = json!(to_f64(x));
        }
    }
}

fn read_profile(path: &Path) -> Result<Vec<PiecewiseDensity>> {
    parse_profile(&std::fs::read_to_string(path)?)
}

/// Parses arguments, runs the command and returns what `main` should print.
pub fn execute(cli: Cli) -> Result<Outcome> {
    let settings = Settings::load(cli.config.as_deref(), cli.approx)?;
    match cli.command {
        Command::Run(a) => cmd_run(&settings, a),
        Command::Duel(a) => cmd_duel(&settings, a),
        Command::Sweep(a) => cmd_sweep(&settings, a),
        Command::Gen(a) => cmd_gen(&settings, a),
        Command::Check(a) => cmd_check(&settings, a),
        Command::MovingKnife(a) => cmd_moving_knife(&settings, a),
    }
}

/// Entry point for the binary: prints and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("rwcake: {e}");
            e.exit_code()
        }
    }
}

fn cmd_run(s: &Settings, a: RunArgs) -> Result<Outcome> {
    let kind: ProtocolKind = s.required(a.protocol, "protocol")?.parse()?;
    let vals = read_profile(&s.path(a.valuations, "valuations")?)?;
    let eps = s.eps(a.eps)?;
    let mut referee = Referee::concrete(s.model(a.model)?, vals.clone());
    let out = run_protocol(&kind, &mut referee, &eps)?;
    if let Some(p) = a.transcript.or(s.string(None, "transcript")?.map(PathBuf::from)) {
        std::fs::write(p, referee.transcript().to_jsonl())?;
    }
    let g = out.gap(&vals)?;
    let mut v = out.to_json(None);
    v["protocol"] = json!(kind.to_string());
    v["model"] = json!(referee.model().to_string());
    s.annotate(&mut v, "gap", &g);
    Ok(Outcome::json(&v, if g <= eps { 0 } else { 5 }))
}

/// Forwards to an adversary and records a snapshot whenever the hidden state shrinks.
struct Recorder {
    inner: Box<dyn Adversary>,
    snapshots: Arc<Mutex<Vec<Value>>>,
    queries: usize,
}

impl Recorder {
    fn note(&mut self, before: usize) {
        self.queries += 1;
        if self.inner.rounds() != before {
            let mut snap = self.inner.snapshot();
            snap["query"] = json!(self.queries);
            self.snapshots.lock().expect("snapshot log").push(snap);
        }
    }
}

impl Adversary for Recorder {
    fn name(&self) -> &'static str {
        self.inner.name()
    }
    fn n_players(&self) -> usize {
        self.inner.n_players()
    }
    fn answer_cut(&mut self, player: usize, alpha: &Q) -> Result<Q> {
        let before = self.inner.rounds();
        let r = self.inner.answer_cut(player, alpha)?;
        self.note(before);
        Ok(r)
    }
    fn answer_eval(&mut self, player: usize, y: &Q) -> Result<Q> {
        let before = self.inner.rounds();
        let r = self.inner.answer_eval(player, y)?;
        self.note(before);
        Ok(r)
    }
    fn finalize(&self) -> Result<Vec<PiecewiseDensity>> {
        self.inner.finalize()
    }
    fn certify(&self, vals: &[PiecewiseDensity], eps: &Q) -> Result<Q> {
        self.inner.certify(vals, eps)
    }
    fn snapshot(&self) -> Value {
        self.inner.snapshot()
    }
    fn rounds(&self) -> usize {
        self.inner.rounds()
    }
}

fn default_duel_protocol(adversary: &str) -> &'static str {
    match adversary {
        "perfect" => "austin-perfect-2",
        "equitable" => "equitable-2",
        _ => "ef3",
    }
}

fn cmd_duel(s: &Settings, a: DuelArgs) -> Result<Outcome> {
    let adv_name = s.required(a.adversary, "adversary")?;
    let inner = by_name(&adv_name)?;
    let kind: ProtocolKind = match s.string(a.protocol, "protocol")? {
        Some(p) => p.parse()?,
        None => default_duel_protocol(&adv_name).parse()?,
    };
    let max_queries = s.number(a.max_queries, "max-queries")?;
    let eps = s.eps(a.eps)?;
    let snapshots = Arc::new(Mutex::new(vec![inner.snapshot()]));
    let recorder = Recorder { inner, snapshots: Arc::clone(&snapshots), queries: 0 };
    let mut referee = Referee::adaptive(s.model(a.model)?, Box::new(recorder));
    if let Some(m) = max_queries {
        referee = referee.with_budget(m);
    }
    let run = run_protocol(&kind, &mut referee, &eps);
    let adv = referee.adversary().expect("adaptive referee");
    let vals = adv.finalize()?;
    referee.transcript().replay(&vals)?;
    let residual = adv.certify(&vals, &eps)?;
    let mut v = json!({
        "adversary": adv_name,
        "protocol": kind.to_string(),
        "max_queries": max_queries,
        "queries": referee.query_count(),
        "rounds": adv.rounds(),
        "snapshots": snapshots.lock().expect("snapshot log").clone(),
        "final": adv.snapshot(),
        "replay": "ok",
        "finalized": profile_to_json(&vals),
    });
    s.annotate(&mut v, "eps", &eps);
    s.annotate(&mut v, "certified_gap", &residual);
    match run {
        Ok(out) => {
            let g = out.gap(&vals)?;
            if g < residual {
                return Err(Error::Certification(format!(
                    "protocol output gap {} is below the certified residual {}",
                    fmt_q(&g),
                    fmt_q(&residual)
                )));
            }
            v["stopped"] = json!("completed");
            v["output"] = out.to_json(None);
            s.annotate(&mut v, "output_gap", &g);
        }
        Err(e) => v["stopped"] = json!(e.to_string()),
    }
    Ok(Outcome::json(&v, 0))
}

/// Player count a protocol needs, or `None` when it accepts any.
fn protocol_players(kind: &ProtocolKind) -> Option<usize> {
    match kind {
        ProtocolKind::Ef3 => Some(3),
        ProtocolKind::Discretize { .. } | ProtocolKind::Rms => None,
        _ => Some(2),
    }
}

struct SweepRow {
    eps: Q,
    queries: Vec<usize>,
    gaps: Vec<Q>,
}

fn cmd_sweep(s: &Settings, a: SweepArgs) -> Result<Outcome> {
    let kind: ProtocolKind = s.required(a.protocol, "protocol")?.parse()?;
    let eps_strings = if a.eps.is_empty() {
        match s.lookup("eps") {
            Some(Value::Array(xs)) => xs
                .iter()
                .map(|x| {
                    x.as_str().map(str::to_string).ok_or_else(|| Error::Parse("eps entries must be strings".into()))
                })
                .collect::<Result<Vec<_>>>()?,
            Some(Value::String(x)) => x.split(',').map(str::to_string).collect(),
            _ => return Err(Error::Parse("missing --eps".into())),
        }
    } else {
        a.eps
    };
    let eps_list = eps_strings.iter().map(|e| parse_q(e.trim())).collect::<Result<Vec<_>>>()?;
    if eps_list.windows(2).any(|w| w[0] <= w[1]) || eps_list.iter().any(|e| *e <= Q::from_integer(0.into())) {
        return Err(Error::Precondition("eps list must be positive and strictly decreasing".into()));
    }
    let instances = s.number(a.instances, "instances")?.unwrap_or(10);
    if instances == 0 {
        return Err(Error::Precondition("instance count must be at least 1".into()));
    }
    let seed = s.seed(a.seed)?;
    let model = s.model(a.model)?;
    let n = match (protocol_players(&kind), s.number(a.players, "players")?) {
        (Some(n), Some(m)) if n != m => {
            return Err(Error::Precondition(format!("{kind} needs {n} players, got {m}")));
        }
        (Some(n), _) | (None, Some(n)) => n,
        (None, None) => 3,
    };
    let segments = s.number(a.segments, "segments")?.unwrap_or(4);
    let (lo, hi) = default_band();
    let profiles = (0..instances)
        .map(|i| random_profile(n, segments, &lo, &hi, seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..eps_list.len()).flat_map(|e| (0..instances).map(move |i| (e, i))).collect();
    let mut results = jobs
        .par_iter()
        .map(|&(e, i)| {
            let mut referee = Referee::concrete(model, profiles[i].clone());
            let out = run_protocol(&kind, &mut referee, &eps_list[e])?;
            Ok((e, i, out.queries_used(), out.gap(&profiles[i])?))
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by_key(|r| (r.0, r.1));
    let mut rows: Vec<SweepRow> =
        eps_list.iter().map(|e| SweepRow { eps: e.clone(), queries: vec![], gaps: vec![] }).collect();
    for (e, _, qn, g) in results {
        rows[e].queries.push(qn);
        rows[e].gaps.push(g);
    }
    let mut csv = String::from("protocol,eps,mean_queries,max_queries,max_gap");
    if s.approx {
        csv.push_str(",max_gap_approx");
    }
    csv.push('\n');
    for row in &rows {
        let total: usize = row.queries.iter().sum();
        let mean = Q::new(total.into(), row.queries.len().into());
        let max_q = row.queries.iter().max().copied().unwrap_or(0);
        let max_gap = row.gaps.iter().max().cloned().unwrap_or_else(|| Q::from_integer(0.into()));
        csv.push_str(&format!("{kind},{},{},{max_q},{}", fmt_q(&row.eps), fmt_q(&mean), fmt_q(&max_gap)));
        if s.approx {
            csv.push_str(&format!(",{}", to_f64(&max_gap)));
        }
        csv.push('\n');
    }
    let worst = rows.iter().any(|r| r.gaps.iter().any(|g| g > &r.eps));
    Ok(Outcome { stdout: csv, code: if worst { 5 } else { 0 } })
}

fn cmd_gen(s: &Settings, a: GenArgs) -> Result<Outcome> {
    let n = s.number(a.players, "players")?.unwrap_or(2);
    let segments = s.number(a.segments, "segments")?.unwrap_or(8);
    let (dlo, dhi) = default_band();
    let lo = s.string(a.lo, "lo")?.map_or(Ok(dlo), |x| parse_q(&x))?;
    let hi = s.string(a.hi, "hi")?.map_or(Ok(dhi), |x| parse_q(&x))?;
    if n == 0 {
        return Err(Error::Precondition("at least one player is required".into()));
    }
    let vals = random_profile(n, segments, &lo, &hi, s.seed(a.seed)?)?;
    let out = Outcome::json(&profile_to_json(&vals), 0);
    if let Some(p) = a.output.or(s.string(None, "output")?.map(PathBuf::from)) {
        std::fs::write(p, &out.stdout)?;
        return Ok(Outcome { stdout: String::new(), code: 0 });
    }
    Ok(out)
}

fn cmd_check(s: &Settings, a: CheckArgs) -> Result<Outcome> {
    let vals = read_profile(&s.path(a.valuations, "valuations")?)?;
    let text = std::fs::read_to_string(s.path(a.allocation, "allocation")?)?;
    let alloc = Allocation::from_json(&serde_json::from_str(&text)?)?;
    let notion: Notion = s.string(a.notion, "notion")?.map_or(Ok(Notion::Envy), |x| x.parse())?;
    let eps = match s.string(a.eps, "eps")? {
        Some(e) => parse_q(&e)?,
        None => Q::from_integer(0.into()),
    };
    let g = gap(notion, &alloc, &vals)?;
    let ok = g <= eps;
    let mut v = json!({ "notion": notion.to_string(), "within_eps": ok });
    s.annotate(&mut v, "gap", &g);
    s.annotate(&mut v, "eps", &eps);
    Ok(Outcome::json(&v, if ok { 0 } else { 5 }))
}

fn cmd_moving_knife(s: &Settings, a: KnifeArgs) -> Result<Outcome> {
    let procedure: Procedure = s.required(a.procedure, "procedure")?.parse()?;
    let eps = s.eps(a.eps)?;
    let vals = read_profile(&s.path(a.valuations, "valuations")?)?;
    let mut referee = Referee::concrete(s.model(a.model)?, vals.clone());
    let run = run_procedure(procedure, &mut referee, &eps, None)?;
    let g = match &run.output {
        ProtocolOutput::Allocation(r) => gap(r.notion, &r.allocation, &vals)?,
        out => out.gap(&vals)?,
    };
    let mut v = run.to_json(None);
    s.annotate(&mut v, "gap", &g);
    Ok(Outcome::json(&v, if g <= eps { 0 } else { 5 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn exec(args: &[&str]) -> Result<Outcome> {
        execute(Cli::try_parse_from(std::iter::once("rwcake").chain(args.iter().copied())).unwrap())
    }

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    const UNIFORM_PAIR: &str = r#"[{"breakpoints":["0","1"],"values":["1"]},{"breakpoints":["0","1"],"values":["1"]}]"#;

    #[test]
    fn cut_and_choose_on_uniform_pair() {
        let dir = tempfile::tempdir().unwrap();
        let vals = write(&dir, "v.json", UNIFORM_PAIR);
        let out = exec(&["run", "--protocol", "cut-and-choose", "--valuations", &vals, "--eps", "1/100"]).unwrap();
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["queries"], 2);
        assert_eq!(v["gap"], "0/1");
        assert_eq!(out.code, 0);
    }

    #[test]
    fn gen_is_deterministic_and_in_band() {
        let a = exec(&["gen", "--players", "3", "--segments", "8", "--seed", "11"]).unwrap();
        let b = exec(&["gen", "--players", "3", "--segments", "8", "--seed", "11"]).unwrap();
        assert_eq!(a, b);
        let vals = parse_profile(&a.stdout).unwrap();
        assert!(vals.iter().all(|d| d.density_bounds_check(&q(1, 2), &q(2, 1))));
        let single = exec(&["gen", "--players", "1", "--segments", "1"]).unwrap();
        assert_eq!(parse_profile(&single.stdout).unwrap(), vec![PiecewiseDensity::uniform()]);
    }

    #[test]
    fn check_reports_and_sets_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let vals = write(&dir, "v.json", UNIFORM_PAIR);
        let even = write(&dir, "a.json", r#"{"pieces":[[["0","1/2"]],[["1/2","1"]]]}"#);
        let skew = write(&dir, "b.json", r#"{"pieces":[[["0","1/4"]],[["1/4","1"]]]}"#);
        let ok = exec(&["check", "--valuations", &vals, "--allocation", &even, "--notion", "envy"]).unwrap();
        assert_eq!(ok.code, 0);
        let bad = exec(&["check", "--valuations", &vals, "--allocation", &skew, "--eps", "1/10"]).unwrap();
        assert_eq!(bad.code, 5);
        let v: Value = serde_json::from_str(&bad.stdout).unwrap();
        assert_eq!(v["gap"], "1/2");
    }

    #[test]
    fn config_file_supplies_missing_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(&dir, "c.json", r#"{"players": 2, "segments": 3, "seed": 5}"#);
        let a = exec(&["--config", &cfg, "gen"]).unwrap();
        let b = exec(&["gen", "--players", "2", "--segments", "3", "--seed", "5"]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn duel_without_queries_certifies_baseline() {
        let out = exec(&["duel", "--adversary", "prms", "--max-queries", "0", "--eps", "1/1000000"]).unwrap();
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert!(parse_q(v["certified_gap"].as_str().unwrap()).unwrap() >= q(1, 10000));
        assert_eq!(v["rounds"], 0);
    }

    #[test]
    fn sweep_csv_is_reproducible() {
        let args =
            ["sweep", "--protocol", "austin-perfect-2", "--eps", "1/32,1/1024", "--instances", "3", "--seed", "2"];
        let a = exec(&args).unwrap();
        assert_eq!(a, exec(&args).unwrap());
        assert_eq!(a.stdout.lines().count(), 3);
        assert!(a.stdout.starts_with("protocol,eps,mean_queries,max_queries,max_gap\n"));
        assert_eq!(a.code, 0);
    }

    #[test]
    fn sweep_rejects_increasing_eps() {
        let err = exec(&["sweep", "--protocol", "ef3", "--eps", "1/100,1/10"]).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn moving_knife_runs_austin() {
        let dir = tempfile::tempdir().unwrap();
        let vals = write(&dir, "v.json", UNIFORM_PAIR);
        let out = exec(&["moving-knife", "--procedure", "austin", "--eps", "1/64", "--valuations", &vals]).unwrap();
        assert_eq!(out.code, 0);
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let vals = write(&dir, "v.json", UNIFORM_PAIR);
        let parse = exec(&["run", "--protocol", "nope", "--valuations", &vals, "--eps", "1/10"]).unwrap_err();
        assert_eq!(parse.exit_code(), 2);
        let pre = exec(&["run", "--protocol", "ef3", "--valuations", &vals, "--eps", "1/10"]).unwrap_err();
        assert_eq!(pre.exit_code(), 3);
        let model =
            exec(&["run", "--protocol", "cut-and-choose", "--valuations", &vals, "--eps", "1/10", "--model", "rw-"])
                .unwrap_err();
        assert_eq!(model.exit_code(), 4);
    }
}
