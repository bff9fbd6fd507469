use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use regret_forge::agents::head2head;
use regret_forge::deep::{DeepVariant, Hyperparameters};
use regret_forge::exploitability::Evaluator;
use regret_forge::game::{Game, GameId};
use regret_forge::harness::{
    output_root, run_experiment, Algorithm, Contender, ExperimentSpec, PolicyFile, RunGroup, RunSettings,
};
use regret_forge::tabular::Variant;

#[derive(Parser)]
#[command(name = "regret-forge", version, about = "CFR solvers for two-player zero-sum games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print exact tree sizes.
    Stats {
        #[arg(long)]
        game: Option<GameId>,
    },
    /// Run an exact CFR variant and log exploitability.
    Tabular {
        #[arg(long)]
        game: GameId,
        #[arg(long)]
        algo: Variant,
        #[arg(long, default_value_t = 1000)]
        iters: u64,
        /// Log every N iterations; 0 logs at powers of two.
        #[arg(long, default_value_t = 0)]
        eval_every: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a neural solver.
    Deep {
        #[arg(long)]
        game: GameId,
        #[arg(long)]
        algo: DeepVariant,
        /// Hyperparameter file; unset keys take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write 0 in the wall-time column so reruns are byte-identical.
        #[arg(long)]
        no_wall_time: bool,
    },
    /// Exploitability of a saved policy.
    Eval {
        #[arg(long)]
        game: GameId,
        #[arg(long)]
        policy: PathBuf,
    },
    /// Seat-alternating matches; prints `a,b,mean,ci,n`.
    H2h {
        #[arg(long, default_value = "leduc")]
        game: GameId,
        /// `policy:FILE`, `rule:STYLE` or `uniform`.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 20_000)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every entry of an experiment spec.
    Experiment {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Stats { game } => {
            println!("game,histories,infosets,terminals,depth,max_infoset_size");
            let games = game.map_or_else(|| GameId::ALL.to_vec(), |g| vec![g]);
            for id in games {
                let s = Game::new(id)?.enumerate_stats();
                println!(
                    "{id},{},{},{},{},{}",
                    s.num_histories, s.num_infosets, s.num_terminals, s.depth, s.max_infoset_size
                );
            }
        }
        Command::Tabular {
            game,
            algo,
            iters,
            eval_every,
            out,
        } => {
            let group = RunGroup {
                game,
                algo: Algorithm::Tabular(algo),
                seeds: vec![0],
                settings: RunSettings::Tabular {
                    iterations: iters,
                    eval_every,
                },
            };
            run_single(group, out, true)?;
        }
        Command::Deep {
            game,
            algo,
            config,
            seed,
            out,
            no_wall_time,
        } => {
            let hp = match &config {
                Some(path) => Hyperparameters::load(path)?,
                None => Hyperparameters::default(),
            };
            let group = RunGroup {
                game,
                algo: Algorithm::Deep(algo),
                seeds: vec![seed],
                settings: RunSettings::Deep(hp),
            };
            run_single(group, out, !no_wall_time)?;
        }
        Command::Eval { game, policy } => {
            let game = Game::new(game)?;
            let file = PolicyFile::load(&policy)?;
            let e = Evaluator::new(&game).exploitability_of(&*file.source(&game))?;
            println!("{e}");
        }
        Command::H2h { game, a, b, n, seed } => {
            let game = Game::new(game)?;
            let (ca, cb) = (Contender::parse(&a)?, Contender::parse(&b)?);
            let r = head2head(&game, &*ca.source(&game), &*cb.source(&game), n, seed)?;
            println!("{a},{b},{},{},{}", r.mean, r.half_width, r.matches);
        }
        Command::Experiment { spec, jobs } => {
            let parsed = ExperimentSpec::load(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let out = output_root(parsed.out_dir.as_deref());
            for path in run_experiment(&parsed, &out, jobs)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn run_single(group: RunGroup, out: Option<PathBuf>, log_wall_time: bool) -> Result<()> {
    let spec = ExperimentSpec {
        out_dir: out,
        log_wall_time,
        groups: vec![group],
    };
    let out = output_root(spec.out_dir.as_deref());
    let paths = run_experiment(&spec, &out, 1)?;
    let Some(path) = paths.first() else { bail!("no output written") };
    print!("{}", std::fs::read_to_string(path)?);
    eprintln!("wrote {}", path.display());
    Ok(())
}
