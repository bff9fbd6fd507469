//! Experiment specs, seeded multi-run execution, CSV logs and policy files.
//!
//! A spec lists runs as `[[run]]` tables:
//!
//! ```toml
//! out_dir = "results"
//!
//! [[run]]
//! game = "leduc"
//! algo = "vr_deep_pdcfr_plus"
//! seeds = [0, 1, 2, 3]
//! config = "configs/leduc.toml"
//! overrides = { num_iterations = 50 }
//! ```
//!
//! Every `(game, algo)` pair gets one merged CSV, `{game}__{algo}.csv`, next to
//! per-seed CSVs and policy checkpoints.

use std::fmt;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Deserialize;

use crate::agents::{AgentStyle, RuleAgent};
use crate::deep::{self, eval_schedule, DeepVariant, Hyperparameters, NetworkPolicy, RunConfig};
use crate::exploitability::{exploitability_flat, StrategySource, Uniform};
use crate::game::{Game, GameId};
use crate::nn::checkpoint;
use crate::nn::Mlp;
use crate::tabular::{TabularPolicy, TabularSolver, Variant};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "game,algo,seed,iteration,episodes,exploitability,wall_time_s";

/// Environment variable that overrides every output root.
pub const OUT_ENV: &str = "REGRET_FORGE_OUT";

/// Output root: `REGRET_FORGE_OUT` if set, else `configured`, else `results`.
pub fn output_root(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.map_or_else(|| PathBuf::from("results"), Path::to_path_buf),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Tabular(Variant),
    Deep(DeepVariant),
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Tabular(v) => v.fmt(f),
            Algorithm::Deep(v) => v.fmt(f),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(v) = s.parse::<Variant>() {
            return Ok(Algorithm::Tabular(v));
        }
        s.parse::<DeepVariant>().map(Algorithm::Deep)
    }
}

/// One logged measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRow {
    pub game: GameId,
    pub algo: Algorithm,
    pub seed: u64,
    pub iteration: u64,
    pub episodes: u64,
    pub exploitability: f64,
    pub wall_time_s: f64,
}

impl CsvRow {
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3}\n",
            self.game, self.algo, self.seed, self.iteration, self.episodes, self.exploitability, self.wall_time_s
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Csv(format!("expected 7 fields, got {}: `{line}`", fields.len())));
        }
        let num = |k: usize| -> Result<u64> {
            fields[k]
                .parse()
                .map_err(|_| Error::Csv(format!("bad {}: `{}`", column(k), fields[k])))
        };
        let real = |k: usize| -> Result<f64> {
            fields[k]
                .parse()
                .map_err(|_| Error::Csv(format!("bad {}: `{}`", column(k), fields[k])))
        };
        Ok(CsvRow {
            game: fields[0].parse()?,
            algo: fields[1].parse()?,
            seed: num(2)?,
            iteration: num(3)?,
            episodes: num(4)?,
            exploitability: real(5)?,
            wall_time_s: real(6)?,
        })
    }
}

fn column(k: usize) -> &'static str {
    CSV_HEADER.split(',').nth(k).unwrap_or("?")
}

/// Parses a whole CSV, header included.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Csv("empty file".into()))?;
    let got: Vec<&str> = header.split(',').collect();
    for (k, want) in CSV_HEADER.split(',').enumerate() {
        match got.get(k) {
            Some(&g) if g == want => {}
            Some(&g) => return Err(Error::Csv(format!("column {} is `{g}`, expected `{want}`", k + 1))),
            None => return Err(Error::Csv(format!("missing column `{want}`"))),
        }
    }
    if got.len() > 7 {
        return Err(Error::Csv(format!("unexpected column `{}`", got[7])));
    }
    lines.filter(|l| !l.trim().is_empty()).map(CsvRow::parse).collect()
}

/// File-name form of a game or algorithm name.
pub fn file_stem(game: GameId, algo: Algorithm) -> String {
    format!("{}__{}", game.to_string().replace(':', "_"), algo)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    out_dir: Option<PathBuf>,
    #[serde(default = "yes")]
    log_wall_time: bool,
    #[serde(default)]
    run: Vec<RawRun>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    game: String,
    algo: String,
    seeds: Vec<u64>,
    iterations: Option<u64>,
    #[serde(default)]
    eval_every: u64,
    config: Option<PathBuf>,
    #[serde(default)]
    overrides: toml::Table,
}

/// Settings of one run, before a seed is attached.
#[derive(Clone, Debug, PartialEq)]
pub enum RunSettings {
    Tabular { iterations: u64, eval_every: u64 },
    Deep(Hyperparameters),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunGroup {
    pub game: GameId,
    pub algo: Algorithm,
    pub seeds: Vec<u64>,
    pub settings: RunSettings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub out_dir: Option<PathBuf>,
    pub log_wall_time: bool,
    pub groups: Vec<RunGroup>,
}

impl ExperimentSpec {
    /// Parses spec text. Relative `config` paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut groups = Vec::with_capacity(raw.run.len());
        for (k, r) in raw.run.into_iter().enumerate() {
            let ctx = |e: Error| Error::Run {
                context: format!("run {}", k + 1),
                source: Box::new(e),
            };
            groups.push(RunGroup::from_raw(r, base).map_err(ctx)?);
        }
        if groups.is_empty() {
            return Err(Error::Config("spec has no [[run]] entries".into()));
        }
        Ok(ExperimentSpec {
            out_dir: raw.out_dir,
            log_wall_time: raw.log_wall_time,
            groups,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

impl RunGroup {
    fn from_raw(r: RawRun, base: &Path) -> Result<Self> {
        let game: GameId = r.game.parse()?;
        let algo: Algorithm = r.algo.parse()?;
        if r.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        let mut sorted = r.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("seeds must be distinct: {:?}", r.seeds)));
        }
        let settings = match algo {
            Algorithm::Tabular(_) => {
                if r.config.is_some() || !r.overrides.is_empty() {
                    return Err(Error::Config("tabular runs take no network config".into()));
                }
                RunSettings::Tabular {
                    iterations: r.iterations.unwrap_or(1000),
                    eval_every: r.eval_every,
                }
            }
            Algorithm::Deep(_) => {
                let mut table = match &r.config {
                    Some(p) => {
                        let path = base.join(p);
                        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                        text.parse::<toml::Table>().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                    }
                    None => toml::Table::new(),
                };
                table.extend(r.overrides);
                if let Some(t) = r.iterations {
                    table.insert("num_iterations".into(), toml::Value::Integer(t as i64));
                }
                if r.eval_every > 0 {
                    table.insert("eval_every".into(), toml::Value::Integer(r.eval_every as i64));
                }
                let hp: Hyperparameters = table.try_into().map_err(|e| Error::Config(e.to_string()))?;
                RunSettings::Deep(hp.validate()?)
            }
        };
        Ok(RunGroup {
            game,
            algo,
            seeds: r.seeds,
            settings,
        })
    }
}

/// A trained average strategy, as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicyFile {
    Tabular(TabularPolicy),
    Network(Mlp),
}

impl PolicyFile {
    /// Reads either format; network checkpoints are recognized by their magic.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.starts_with(b"RFNN") {
            return checkpoint::from_bytes(&bytes).map(PolicyFile::Network);
        }
        let text = String::from_utf8(bytes).map_err(|_| Error::Checkpoint(format!("{}: not UTF-8", path.display())))?;
        TabularPolicy::from_text(&text).map(PolicyFile::Tabular)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            PolicyFile::Tabular(p) => p.save(path),
            PolicyFile::Network(net) => checkpoint::save(net, path),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            PolicyFile::Tabular(_) => "policy",
            PolicyFile::Network(_) => "rfnn",
        }
    }

    pub fn source<'a>(&'a self, game: &'a Game) -> Box<dyn StrategySource + 'a> {
        match self {
            PolicyFile::Tabular(p) => Box::new(p),
            PolicyFile::Network(net) => Box::new(NetworkPolicy { game, net }),
        }
    }
}

/// A head-to-head participant: `policy:FILE`, `rule:STYLE` or `uniform`.
#[derive(Clone, Debug, PartialEq)]
pub enum Contender {
    Policy(PolicyFile),
    Rule(AgentStyle),
    Uniform,
}

impl Contender {
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.split_once(':') {
            Some(("policy", path)) => PolicyFile::load(Path::new(path)).map(Contender::Policy),
            Some(("rule", style)) => style.parse().map(Contender::Rule),
            None if spec == "uniform" => Ok(Contender::Uniform),
            _ => Err(Error::InvalidParameter(format!(
                "expected policy:FILE, rule:STYLE or uniform, got `{spec}`"
            ))),
        }
    }

    pub fn source<'a>(&'a self, game: &'a Game) -> Box<dyn StrategySource + 'a> {
        match self {
            Contender::Policy(p) => p.source(game),
            Contender::Rule(style) => Box::new(RuleAgent { game, style: *style }),
            Contender::Uniform => Box::new(Uniform),
        }
    }
}

/// Result of a single seeded run.
pub struct RunOutput {
    pub rows: Vec<CsvRow>,
    pub policy: PolicyFile,
}

/// Runs one seed of a group. `on_row` sees each row as soon as it exists.
pub fn run_one(
    group: &RunGroup,
    seed: u64,
    log_wall_time: bool,
    mut on_row: impl FnMut(&CsvRow) -> Result<()>,
) -> Result<RunOutput> {
    let start = Instant::now();
    let game = Game::new(group.game)?;
    let mut rows = Vec::new();
    let mut emit = |iteration: u64, episodes: u64, exploitability: f64, wall: f64| -> Result<()> {
        let row = CsvRow {
            game: group.game,
            algo: group.algo,
            seed,
            iteration,
            episodes,
            exploitability,
            wall_time_s: if log_wall_time { wall } else { 0.0 },
        };
        on_row(&row)?;
        rows.push(row);
        Ok(())
    };
    let policy = match (&group.settings, group.algo) {
        (RunSettings::Tabular { iterations, eval_every }, Algorithm::Tabular(variant)) => {
            let mut solver = TabularSolver::new(&game, variant.rule())?;
            let schedule = eval_schedule(*iterations, *eval_every);
            for t in 1..=*iterations {
                solver.iterate()?;
                if schedule.binary_search(&t).is_ok() {
                    let e = exploitability_flat(solver.tree(), &solver.average_strategy());
                    // One full-tree pass per player and iteration.
                    emit(t, 2 * t, e, start.elapsed().as_secs_f64())?;
                }
            }
            PolicyFile::Tabular(solver.average_policy()?)
        }
        (RunSettings::Deep(hp), Algorithm::Deep(variant)) => {
            let mut hp = hp.clone();
            hp.log_wall_time = log_wall_time;
            let cfg = RunConfig::new(group.game, variant, seed, hp)?;
            let mut failure = None;
            let out = deep::run(&cfg, |r| {
                if failure.is_none() {
                    if let Err(e) = emit(r.iteration, r.episodes, r.exploitability, r.wall_time_s) {
                        failure = Some(e);
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            PolicyFile::Network(out.average)
        }
        _ => return Err(Error::Config(format!("settings do not match algorithm {}", group.algo))),
    };
    Ok(RunOutput { rows, policy })
}

fn append_line(file: &mut File, path: &Path, line: &str) -> Result<()> {
    // One write per line so an interrupted run never leaves half a row.
    file.write_all(line.as_bytes())
        .and_then(|()| file.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes `text` to `path` through a temporary file and a rename.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Executes every run of `spec` under `out`, at most `jobs` at a time, and
/// returns the merged CSV paths in spec order. Per-seed CSVs and policy
/// checkpoints are written alongside.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path, jobs: usize) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let tasks: Vec<(usize, u64)> = spec
        .groups
        .iter()
        .enumerate()
        .flat_map(|(g, group)| group.seeds.iter().map(move |&s| (g, s)))
        .collect();
    let next = AtomicUsize::new(0);
    let errors: Mutex<Vec<(usize, Error)>> = Mutex::new(Vec::new());
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(&(g, seed)) = tasks.get(k) else { break };
        if let Err(e) = execute(&spec.groups[g], seed, spec.log_wall_time, out) {
            let context = format!("{} seed {seed}", file_stem(spec.groups[g].game, spec.groups[g].algo));
            errors.lock().unwrap().push((
                k,
                Error::Run {
                    context,
                    source: Box::new(e),
                },
            ));
        }
    };
    std::thread::scope(|scope| {
        for _ in 1..jobs.max(1).min(tasks.len()) {
            scope.spawn(worker);
        }
        worker();
    });
    let mut errors = errors.into_inner().unwrap();
    errors.sort_by_key(|(k, _)| *k);
    if let Some((_, e)) = errors.into_iter().next() {
        return Err(e);
    }
    let mut merged = Vec::new();
    for group in &spec.groups {
        let stem = file_stem(group.game, group.algo);
        let path = out.join(format!("{stem}.csv"));
        if merged.contains(&path) {
            continue;
        }
        let mut text = String::from(CSV_HEADER);
        text.push('\n');
        // Merge every seed the spec ever ran for this pair, in seed order.
        let mut seeds: Vec<u64> = spec
            .groups
            .iter()
            .filter(|g| g.game == group.game && g.algo == group.algo)
            .flat_map(|g| g.seeds.iter().copied())
            .collect();
        seeds.sort_unstable();
        seeds.dedup();
        for seed in seeds {
            let part = out.join(format!("{stem}__seed{seed}.csv"));
            let body = fs::read_to_string(&part).map_err(|e| Error::io(&part, e))?;
            text.extend(body.lines().skip(1).map(|l| format!("{l}\n")));
        }
        write_atomic(&path, &text)?;
        merged.push(path);
    }
    Ok(merged)
}

fn execute(group: &RunGroup, seed: u64, log_wall_time: bool, out: &Path) -> Result<()> {
    let stem = format!("{}__seed{seed}", file_stem(group.game, group.algo));
    let csv = out.join(format!("{stem}.csv"));
    let mut file = File::create(&csv).map_err(|e| Error::io(&csv, e))?;
    append_line(&mut file, &csv, &format!("{CSV_HEADER}\n"))?;
    let result = run_one(group, seed, log_wall_time, |row| append_line(&mut file, &csv, &row.to_line()))?;
    let policy = out.join(format!("{stem}.{}", result.policy.extension()));
    result.policy.save(&policy)
}
