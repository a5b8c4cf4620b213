//! Command-line interface.
//!
//! Subcommands: `sample`, `classify`, `figure2`, `pne-dist`, `reach-stats`,
//! `dynamics`, `enumerate`. All randomness flows from `--seed` (or the
//! `GAMECONN_SEED` environment variable when the flag is absent). Exit
//! codes: 0 success, 1 usage error, 2 runtime error.

use crate::connectivity::{classify_game, classify_table, ClassFlag, ClassifyOptions};
use crate::dynamics::{
    construct_dominant_game, construct_sticky_game, run_recorded, DynamicKind, DynamicParams,
};
use crate::experiments::{
    cells_to_csv, cells_to_json, cells_to_svg, estimate_class_proportions, pne_count_distribution,
    reach_threshold_experiment, ExperimentConfig,
};
use crate::game_model::{
    game_from_json, game_to_json, table_to_json, GameFile, GameShape, OrdinalGame, VertexId,
};
use crate::oracle::{exact_class_proportions_capped, DEFAULT_ENUMERATION_CAP};
use crate::response_graphs::{
    build_best_response_graph, to_dot, StorageMode, DEFAULT_BETTER_VERTEX_CAP,
};
use crate::sampling::{
    derive_trial_rng, sample_conditioned, SampleCondition, TrialSeed, DEFAULT_MAX_REJECTIONS,
};
use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

const SEED_ENV: &str = "GAMECONN_SEED";

#[derive(Parser)]
#[command(
    name = "gameconn",
    version,
    about = "Best-/better-response graph construction, connectivity classification, \
             uniform game sampling, Monte Carlo sweeps, and adaptive dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample uniform random generic games and write them as JSON
    Sample(SampleArgs),
    /// Read a game file and report its connectivity classification
    Classify(ClassifyArgs),
    /// Sweep a shape grid and estimate class proportions by Monte Carlo
    Figure2(Figure2Args),
    /// Histogram of pure-equilibrium counts against the Poisson(1) law
    PneDist(PneDistArgs),
    /// Backward-reachability statistics of random best-response graphs
    ReachStats(ReachStatsArgs),
    /// Simulate adaptive dynamics and report per-run absorption
    Dynamics(DynamicsArgs),
    /// Exhaustively enumerate a tiny shape and report exact proportions
    Enumerate(EnumerateArgs),
}

#[derive(Args, Clone)]
struct ShapeArgs {
    /// Number of players
    #[arg(long)]
    players: usize,
    /// Actions per player: one value for all, or a comma list per player
    #[arg(long)]
    actions: String,
}

impl ShapeArgs {
    fn shape(&self) -> anyhow::Result<GameShape> {
        Ok(GameShape::new(&parse_action_list(self.players, &self.actions)?)?)
    }
}

fn parse_action_list(players: usize, actions: &str) -> anyhow::Result<Vec<u32>> {
    let parts: Vec<u32> = actions
        .split(',')
        .map(|s| s.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad --actions value {actions:?}"))?;
    match parts.len() {
        1 => Ok(vec![parts[0]; players]),
        n if n == players => Ok(parts),
        n => bail!("--actions lists {n} players but --players is {players}"),
    }
}

fn parse_player_range(spec: &str) -> anyhow::Result<Vec<usize>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().context("bad range start")?;
        let hi: usize = hi.trim().parse().context("bad range end")?;
        if lo < 2 || hi < lo {
            bail!("bad player range {spec:?}");
        }
        Ok((lo..=hi).collect())
    } else {
        Ok(vec![spec.trim().parse().context("bad --players value")?])
    }
}

fn parse_condition(s: &str) -> anyhow::Result<SampleCondition> {
    match s {
        "none" => Ok(SampleCondition::Unconditioned),
        "pne" => Ok(SampleCondition::AtLeastOnePne),
        other => {
            let z = other
                .strip_prefix("pne=")
                .and_then(|z| z.parse::<u64>().ok())
                .ok_or_else(|| anyhow!("bad --condition {other:?}; use none, pne, or pne=Z"))?;
            Ok(SampleCondition::ExactlyZPne(z))
        }
    }
}

fn parse_flags(s: &str) -> anyhow::Result<Vec<ClassFlag>> {
    s.split(',')
        .map(|f| f.trim().parse::<ClassFlag>().map_err(|e| anyhow!(e)))
        .collect()
}

fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .parse::<u64>()
            .with_context(|| format!("bad {SEED_ENV} value {text:?}")),
        Err(_) => Ok(0),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn profile_label(shape: &GameShape, v: VertexId) -> String {
    shape
        .decode_profile(v)
        .iter()
        .map(|c| (c + 1).to_string())
        .collect::<Vec<_>>()
        .join("-")
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Number of games to draw
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Conditioning event: none, pne, or pne=Z
    #[arg(long, default_value = "none")]
    condition: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Emit compact winner tables instead of full rankings
    #[arg(long)]
    winners_only: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_sample(args: SampleArgs) -> anyhow::Result<()> {
    let shape = args.shape.shape()?;
    let condition = parse_condition(&args.condition)?;
    let seed = resolve_seed(args.seed)?;
    let mut docs = Vec::with_capacity(args.trials as usize);
    for trial in 0..args.trials {
        let mut rng = derive_trial_rng(TrialSeed { master_seed: seed, trial_index: trial });
        let (game, _) = sample_conditioned(&shape, condition, &mut rng, DEFAULT_MAX_REJECTIONS)?;
        let text = if args.winners_only {
            table_to_json(&game.winner_table())
        } else {
            game_to_json(&game)
        };
        docs.push(text);
    }
    let payload = if docs.len() == 1 {
        let mut d = docs.pop().expect("one doc");
        d.push('\n');
        d
    } else {
        let values: Vec<serde_json::Value> = docs
            .iter()
            .map(|d| serde_json::from_str(d).expect("own output parses"))
            .collect();
        let mut text = serde_json::to_string_pretty(&values)?;
        text.push('\n');
        text
    };
    write_or_print(args.out.as_deref(), &payload)
}

#[derive(Args)]
struct ClassifyArgs {
    /// Game file (gameconn-v1 JSON, full or winners-only)
    #[arg(long = "in")]
    input: PathBuf,
    /// Also report per-vertex v-connected / v-super-connected flags
    #[arg(long)]
    per_vertex: bool,
    /// Vertex cap for the explicit better-response graph
    #[arg(long, default_value_t = DEFAULT_BETTER_VERTEX_CAP)]
    cap: u64,
    /// Write the best-response graph in DOT form (small shapes only)
    #[arg(long)]
    emit_dot: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_classify(args: ClassifyArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let file = game_from_json(&text)?;
    let record = match &file {
        GameFile::Game(game) => classify_game(
            game,
            &ClassifyOptions {
                global_flags: true,
                better_cap: args.cap,
                per_vertex: args.per_vertex,
            },
        ),
        GameFile::Table(table) => classify_table(table),
    };
    if let Some(dot_path) = &args.emit_dot {
        let graph = build_best_response_graph(&file.winner_table(), StorageMode::Explicit)?;
        std::fs::write(dot_path, to_dot(&graph)?)
            .with_context(|| format!("writing {}", dot_path.display()))?;
    }
    let mut payload = serde_json::to_string_pretty(&record)?;
    payload.push('\n');
    write_or_print(args.out.as_deref(), &payload)
}

#[derive(Args, Default)]
struct Figure2Args {
    /// Player sweep: a single count or an inclusive range like 2..8
    #[arg(long)]
    players: Option<String>,
    /// Uniform action counts to sweep, comma-separated (e.g. 2,3)
    #[arg(long)]
    actions: Option<String>,
    /// Explicit cells as NxK pairs, comma-separated (e.g. 3x2,4x2,5x3)
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Flags to estimate, comma-separated
    #[arg(long)]
    flags: Option<String>,
    /// Conditioning event: none, pne, or pne=Z
    #[arg(long)]
    condition: Option<String>,
    /// Output base path; each format appends its extension
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats, comma-separated subset of csv,json,svg
    #[arg(long)]
    format: Option<String>,
    /// Key = value file supplying defaults for any flag above
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_cells(spec: &str) -> anyhow::Result<Vec<GameShape>> {
    spec.split(',')
        .map(|cell| {
            let (n, k) = cell
                .trim()
                .split_once('x')
                .ok_or_else(|| anyhow!("bad cell {cell:?}; use NxK"))?;
            let n: usize = n.parse().context("bad cell player count")?;
            let k: u32 = k.parse().context("bad cell action count")?;
            Ok(GameShape::uniform(n, k)?)
        })
        .collect()
}

fn load_config_file(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = BTreeMap::new();
    for (ix, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), ix + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn cmd_figure2(mut args: Figure2Args) -> anyhow::Result<()> {
    if let Some(path) = args.config.take() {
        let file = load_config_file(&path)?;
        let fill = |slot: &mut Option<String>, key: &str| {
            if slot.is_none() {
                *slot = file.get(key).cloned();
            }
        };
        fill(&mut args.players, "players");
        fill(&mut args.actions, "actions");
        fill(&mut args.cells, "cells");
        fill(&mut args.flags, "flags");
        fill(&mut args.condition, "condition");
        fill(&mut args.format, "format");
        if args.trials.is_none() {
            args.trials = file.get("trials").map(|v| v.parse()).transpose()?;
        }
        if args.seed.is_none() {
            args.seed = file.get("seed").map(|v| v.parse()).transpose()?;
        }
        if args.threads.is_none() {
            args.threads = file.get("threads").map(|v| v.parse()).transpose()?;
        }
        if args.out.is_none() {
            args.out = file.get("out").map(PathBuf::from);
        }
    }

    let cells = match (&args.cells, &args.players, &args.actions) {
        (Some(cells), _, _) => parse_cells(cells)?,
        (None, Some(players), Some(actions)) => {
            let ns = parse_player_range(players)?;
            let ks: Vec<u32> = actions
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .context("bad --actions list")?;
            let mut cells = Vec::new();
            for &k in &ks {
                for &n in &ns {
                    cells.push(GameShape::uniform(n, k)?);
                }
            }
            cells
        }
        _ => bail!("give either --cells or both --players and --actions"),
    };

    let config = ExperimentConfig {
        cells,
        trials: args.trials.unwrap_or(10_000),
        condition: parse_condition(args.condition.as_deref().unwrap_or("pne"))?,
        master_seed: resolve_seed(args.seed)?,
        threads: args.threads.unwrap_or(0),
        flags: parse_flags(
            args.flags
                .as_deref()
                .unwrap_or("connected,acyclic,super_connected"),
        )?,
        max_rejections: DEFAULT_MAX_REJECTIONS,
    };
    let stats = estimate_class_proportions(&config)?;

    let formats: Vec<String> = args
        .format
        .as_deref()
        .unwrap_or("csv")
        .split(',')
        .map(|f| f.trim().to_string())
        .collect();
    for format in &formats {
        let payload = match format.as_str() {
            "csv" => cells_to_csv(&stats),
            "json" => {
                let mut t = cells_to_json(&stats);
                t.push('\n');
                t
            }
            "svg" => cells_to_svg(&stats, &config.flags),
            other => bail!("unknown format {other:?}"),
        };
        match &args.out {
            Some(base) => {
                let path = base.with_extension(format);
                std::fs::write(&path, payload)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            None => print!("{payload}"),
        }
    }
    Ok(())
}

#[derive(Args)]
struct PneDistArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_pne_dist(args: PneDistArgs) -> anyhow::Result<()> {
    let shape = args.shape.shape()?;
    let seed = resolve_seed(args.seed)?;
    let dist = pne_count_distribution(&shape, args.trials, seed, args.threads)?;
    let mut payload = serde_json::to_string_pretty(&dist)?;
    payload.push('\n');
    write_or_print(args.out.as_deref(), &payload)
}

#[derive(Args)]
struct ReachStatsArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_reach_stats(args: ReachStatsArgs) -> anyhow::Result<()> {
    let shape = args.shape.shape()?;
    let seed = resolve_seed(args.seed)?;
    let report = reach_threshold_experiment(&shape, args.trials, seed, args.threads)?;
    let mut payload = serde_json::to_string_pretty(&report)?;
    payload.push('\n');
    write_or_print(args.out.as_deref(), &payload)
}

#[derive(Args)]
struct DynamicsArgs {
    /// Game file to simulate on; mutually exclusive with --fixture
    #[arg(long = "in", conflicts_with = "fixture")]
    input: Option<PathBuf>,
    /// Built-in game: dominant or sticky (needs --players/--actions)
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    players: Option<usize>,
    #[arg(long)]
    actions: Option<String>,
    /// Dynamic kind: best, better, or one-at-a-time
    #[arg(long, default_value = "best")]
    kind: String,
    /// Update probabilities: one value for all players or a comma list
    #[arg(long, default_value = "0.5")]
    p: String,
    /// Step cap per run
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    /// Number of random starts
    #[arg(long, default_value_t = 10)]
    starts: u64,
    /// Runs per start
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Append the visited profiles (capped at 10^4) to each row
    #[arg(long)]
    trajectory: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dynamics_game(args: &DynamicsArgs) -> anyhow::Result<OrdinalGame> {
    if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        return match game_from_json(&text)? {
            GameFile::Game(game) => Ok(game),
            GameFile::Table(_) => bail!("dynamics needs full rankings, not a winner table"),
        };
    }
    let fixture = args.fixture.as_deref().unwrap_or_default();
    let players = args
        .players
        .ok_or_else(|| anyhow!("--fixture needs --players and --actions"))?;
    let actions = args
        .actions
        .as_deref()
        .ok_or_else(|| anyhow!("--fixture needs --players and --actions"))?;
    let shape = GameShape::new(&parse_action_list(players, actions)?)?;
    match fixture {
        "dominant" => Ok(construct_dominant_game(&shape)),
        "sticky" => Ok(construct_sticky_game(&shape)?),
        other => bail!("unknown fixture {other:?}; use dominant or sticky"),
    }
}

fn cmd_dynamics(args: DynamicsArgs) -> anyhow::Result<()> {
    let game = dynamics_game(&args)?;
    let shape = game.shape().clone();
    let kind = match args.kind.as_str() {
        "best" => DynamicKind::BestResponseInertia,
        "better" => DynamicKind::BetterResponseInertia,
        "one-at-a-time" => DynamicKind::OneAtATimeBestResponse,
        other => bail!("unknown kind {other:?}; use best, better, or one-at-a-time"),
    };
    let p: Vec<f64> = {
        let parts: Vec<f64> = args
            .p
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .context("bad --p list")?;
        if parts.len() == 1 {
            vec![parts[0]; shape.num_players()]
        } else {
            parts
        }
    };
    let params = DynamicParams::new(kind, p, args.steps)?;
    let seed = resolve_seed(args.seed)?;

    let mut csv = String::from("seed,run,start,absorbed,steps,final");
    if args.trajectory {
        csv.push_str(",trajectory");
    }
    csv.push('\n');
    let record_limit = if args.trajectory { 10_000 } else { 0 };
    // Starts come from a reserved stream so each run's own stream drives
    // only the dynamic itself.
    let mut start_rng = derive_trial_rng(TrialSeed { master_seed: seed, trial_index: u64::MAX });
    let mut run_ix = 0u64;
    for _ in 0..args.starts {
        let start = start_rng.random_range(0..shape.vertex_count());
        for _ in 0..args.runs {
            let mut rng = derive_trial_rng(TrialSeed { master_seed: seed, trial_index: run_ix });
            let trace = run_recorded(&game, start, &params, &mut rng, record_limit)?;
            let final_profile = trace
                .absorbing_profile
                .map(|v| profile_label(&shape, v))
                .unwrap_or_else(|| "-".to_string());
            csv.push_str(&format!(
                "{seed},{run_ix},{},{},{},{final_profile}",
                profile_label(&shape, trace.start),
                trace.absorbed,
                trace.steps_taken,
            ));
            if args.trajectory {
                let t = trace
                    .trajectory
                    .unwrap_or_default()
                    .iter()
                    .map(|&v| profile_label(&shape, v))
                    .collect::<Vec<_>>()
                    .join("|");
                csv.push(',');
                csv.push_str(&t);
            }
            csv.push('\n');
            run_ix += 1;
        }
    }
    write_or_print(args.out.as_deref(), &csv)
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Flags to count, comma-separated
    #[arg(long, default_value = "connected,acyclic,super_connected")]
    flags: String,
    /// Enumeration cap on the number of objects
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_enumerate(args: EnumerateArgs) -> anyhow::Result<()> {
    let shape = args.shape.shape()?;
    let flags = parse_flags(&args.flags)?;
    let exact = exact_class_proportions_capped(&shape, &flags, args.cap)?;
    let mut doc = serde_json::json!({
        "shape_n": exact.shape_n,
        "shape_k": exact.shape_k,
        "enumerated": if exact.enumerated_games { "games" } else { "winner_tables" },
        "total": exact.total,
        "with_pne": {
            "count": exact.with_pne,
            "rational": exact.with_pne_proportion().to_string(),
            "value": exact.with_pne_proportion().value(),
        },
    });
    let map = doc.as_object_mut().expect("object");
    let mut flag_doc = serde_json::Map::new();
    for &flag in &flags {
        let rational = exact.proportion(flag).expect("requested flag");
        flag_doc.insert(
            flag.to_string(),
            serde_json::json!({
                "count": exact.flag_counts[&flag],
                "rational": rational.to_string(),
                "value": rational.value(),
            }),
        );
    }
    map.insert("flags".into(), serde_json::Value::Object(flag_doc));
    let mut payload = serde_json::to_string_pretty(&doc)?;
    payload.push('\n');
    write_or_print(args.out.as_deref(), &payload)
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Figure2(args) => cmd_figure2(args),
        Command::PneDist(args) => cmd_pne_dist(args),
        Command::ReachStats(args) => cmd_reach_stats(args),
        Command::Dynamics(args) => cmd_dynamics(args),
        Command::Enumerate(args) => cmd_enumerate(args),
    }
}

/// Parses and executes `argv`; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    }
}
