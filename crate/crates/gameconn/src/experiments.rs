//! Deterministic, parallel Monte Carlo harness.
//!
//! Trials are embarrassingly parallel: trial `t` of cell `c` always draws
//! from the ChaCha8 stream `c * 2^32 + t` of the master seed, and per-cell
//! aggregation is a commutative sum, so results are bit-identical for any
//! worker count. CSV is the canonical output; JSON and a small hand-rolled
//! SVG renderer cover the rest.

use crate::connectivity::{classify_game, classify_table, ClassFlag, ClassifyOptions};
use crate::dynamics::{run, DynamicParams};
use crate::error::{Error, Result};
use crate::game_model::{count_pne, GameShape};
use crate::sampling::{
    derive_trial_rng, sample_conditioned, sample_conditioned_table, sample_winner_table,
    SampleCondition, TrialSeed, DEFAULT_MAX_REJECTIONS,
};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

const CELL_STREAM_STRIDE: u64 = 1 << 32;

/// 95% normal quantile used by every interval in this crate.
const Z95: f64 = 1.959963984540054;

/// Frozen CSV header for proportion tables.
pub const CSV_HEADER: &str =
    "shape_n,shape_k,flag,trials,successes,proportion,ci_low,ci_high,seed";

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub cells: Vec<GameShape>,
    pub trials: u64,
    pub condition: SampleCondition,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    pub flags: Vec<ClassFlag>,
    pub max_rejections: u64,
}

impl ExperimentConfig {
    pub fn new(cells: Vec<GameShape>, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            cells,
            trials,
            condition: SampleCondition::AtLeastOnePne,
            master_seed,
            threads: 0,
            flags: vec![ClassFlag::Connected, ClassFlag::Acyclic, ClassFlag::SuperConnected],
            max_rejections: DEFAULT_MAX_REJECTIONS,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FlagStats {
    pub flag: ClassFlag,
    pub successes: u64,
    pub proportion: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CellStats {
    pub shape_n: usize,
    pub shape_k: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    pub flags: Vec<FlagStats>,
    pub rejections: u64,
    /// Wall time is reported in JSON only; it never enters the CSV.
    pub wall_ms: u64,
}

impl CellStats {
    pub fn flag(&self, flag: ClassFlag) -> Option<&FlagStats> {
        self.flags.iter().find(|f| f.flag == flag)
    }

    pub fn shape_k_label(&self) -> String {
        shape_k_label(&self.shape_k)
    }
}

fn shape_k_label(k: &[u32]) -> String {
    if k.iter().all(|&ki| ki == k[0]) {
        k[0].to_string()
    } else {
        k.iter().map(|ki| ki.to_string()).collect::<Vec<_>>().join("x")
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (Z95 / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

struct TrialOutcome {
    successes: Vec<u64>,
    rejections: u64,
}

impl TrialOutcome {
    fn zero(flags: usize) -> Self {
        TrialOutcome { successes: vec![0; flags], rejections: 0 }
    }

    fn merge(mut self, other: TrialOutcome) -> Self {
        for (a, b) in self.successes.iter_mut().zip(other.successes) {
            *a += b;
        }
        self.rejections += other.rejections;
        self
    }
}

fn local_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))
}

/// Samples conditioned games per cell, classifies the requested flags, and
/// aggregates proportions with Wilson intervals.
pub fn estimate_class_proportions(config: &ExperimentConfig) -> Result<Vec<CellStats>> {
    if config.trials == 0 || config.trials >= CELL_STREAM_STRIDE {
        return Err(Error::InvalidParams(format!(
            "trials must be in 1..2^32, got {}",
            config.trials
        )));
    }
    let need_games = config.flags.iter().any(|f| f.is_global());
    let pool = local_pool(config.threads)?;
    let mut out = Vec::with_capacity(config.cells.len());
    for (cell_ix, shape) in config.cells.iter().enumerate() {
        let started = Instant::now();
        let flags = &config.flags;
        let run_trial = |trial: u64| -> Result<TrialOutcome> {
            let mut rng = derive_trial_rng(TrialSeed {
                master_seed: config.master_seed,
                trial_index: cell_ix as u64 * CELL_STREAM_STRIDE + trial,
            });
            let mut outcome = TrialOutcome::zero(flags.len());
            let record = if need_games {
                let (game, rejections) =
                    sample_conditioned(shape, config.condition, &mut rng, config.max_rejections)?;
                outcome.rejections = rejections;
                classify_game(&game, &ClassifyOptions::default())
            } else {
                let (table, rejections) = sample_conditioned_table(
                    shape,
                    config.condition,
                    &mut rng,
                    config.max_rejections,
                )?;
                outcome.rejections = rejections;
                classify_table(&table)
            };
            for (slot, &flag) in outcome.successes.iter_mut().zip(flags.iter()) {
                if record.flag(flag) == Some(true) {
                    *slot += 1;
                }
            }
            Ok(outcome)
        };
        let totals = pool.install(|| {
            (0..config.trials)
                .into_par_iter()
                .map(run_trial)
                .try_reduce(|| TrialOutcome::zero(flags.len()), |a, b| Ok(a.merge(b)))
        })?;
        let flag_stats = config
            .flags
            .iter()
            .zip(&totals.successes)
            .map(|(&flag, &successes)| {
                let (ci_low, ci_high) = wilson_interval(successes, config.trials);
                FlagStats {
                    flag,
                    successes,
                    proportion: successes as f64 / config.trials as f64,
                    ci_low,
                    ci_high,
                }
            })
            .collect();
        out.push(CellStats {
            shape_n: shape.num_players(),
            shape_k: shape.actions().to_vec(),
            trials: config.trials,
            seed: config.master_seed,
            flags: flag_stats,
            rejections: totals.rejections,
            wall_ms: started.elapsed().as_millis() as u64,
        });
    }
    Ok(out)
}

/// Distribution of pure-Nash-equilibrium counts under unconditioned
/// sampling, with the Poisson(1) reference.
#[derive(Debug, Clone, Serialize)]
pub struct PneDistribution {
    pub shape_n: usize,
    pub shape_k: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    /// Sorted (count, observations) pairs.
    pub histogram: Vec<(u64, u64)>,
    /// Total variation distance between the empirical law and Poisson(1).
    pub tv_distance: f64,
}

impl PneDistribution {
    pub fn empirical(&self, z: u64) -> f64 {
        self.histogram
            .iter()
            .find(|&&(count, _)| count == z)
            .map(|&(_, obs)| obs as f64 / self.trials as f64)
            .unwrap_or(0.0)
    }
}

/// Poisson(1) mass at `z`: `e^{-1} / z!`.
pub fn poisson_one(z: u64) -> f64 {
    let mut mass = (-1.0f64).exp();
    for i in 1..=z {
        mass /= i as f64;
    }
    mass
}

pub fn pne_count_distribution(
    shape: &GameShape,
    trials: u64,
    master_seed: u64,
    threads: usize,
) -> Result<PneDistribution> {
    let pool = local_pool(threads)?;
    let hist = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng =
                    derive_trial_rng(TrialSeed { master_seed, trial_index: trial });
                let table = sample_winner_table(shape, &mut rng);
                let mut h = BTreeMap::new();
                h.insert(count_pne(&table), 1u64);
                h
            })
            .reduce(BTreeMap::new, merge_histograms)
    });
    let mut tv = 0.0f64;
    let mut covered = 0.0f64;
    for (&z, &obs) in &hist {
        let pois = poisson_one(z);
        tv += (obs as f64 / trials as f64 - pois).abs();
        covered += pois;
    }
    tv = 0.5 * (tv + (1.0 - covered).max(0.0));
    Ok(PneDistribution {
        shape_n: shape.num_players(),
        shape_k: shape.actions().to_vec(),
        trials,
        seed: master_seed,
        histogram: hist.into_iter().collect(),
        tv_distance: tv,
    })
}

fn merge_histograms(mut a: BTreeMap<u64, u64>, b: BTreeMap<u64, u64>) -> BTreeMap<u64, u64> {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Backward-reachability statistics against the dichotomy threshold
/// `N' = log K / (log K - log(K-1))`.
#[derive(Debug, Clone, Serialize)]
pub struct ReachReport {
    pub shape_n: usize,
    pub shape_k: Vec<u32>,
    pub trials: u64,
    pub seed: u64,
    pub n_prime: f64,
    /// Merged histogram of per-vertex reached-from counts.
    pub histogram: Vec<(u64, u64)>,
    /// Samples containing at least one vertex strictly between the
    /// threshold and full non-sink coverage.
    pub violating_samples: u64,
    pub violating_vertices: u64,
}

pub fn reach_threshold_experiment(
    shape: &GameShape,
    trials: u64,
    master_seed: u64,
    threads: usize,
) -> Result<ReachReport> {
    if shape.vertex_count() > crate::connectivity::REACH_CLOSURE_VERTEX_CAP {
        return Err(Error::SizeExceeded {
            vertices: shape.vertex_count(),
            limit: crate::connectivity::REACH_CLOSURE_VERTEX_CAP,
        });
    }
    let k_max = shape.max_actions() as f64;
    let n_prime = if shape.max_actions() == 2 {
        1.0
    } else {
        k_max.ln() / (k_max.ln() - (k_max - 1.0).ln())
    };
    let pool = local_pool(threads)?;
    let (hist, violating_samples, violating_vertices) = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng =
                    derive_trial_rng(TrialSeed { master_seed, trial_index: trial });
                let table = sample_winner_table(shape, &mut rng);
                let view = crate::response_graphs::BestResponseView::new(&table);
                let profile =
                    crate::connectivity::reached_from_profile(&view).expect("under cap");
                let mut h = BTreeMap::new();
                let mut violations = 0u64;
                for v in 0..shape.vertex_count() as usize {
                    let count = profile.reached_from[v];
                    *h.entry(count).or_insert(0u64) += 1;
                    if count as f64 > n_prime && !profile.reached_from_all_non_sinks[v] {
                        violations += 1;
                    }
                }
                (h, u64::from(violations > 0), violations)
            })
            .reduce(
                || (BTreeMap::new(), 0, 0),
                |(ha, sa, va), (hb, sb, vb)| (merge_histograms(ha, hb), sa + sb, va + vb),
            )
    });
    Ok(ReachReport {
        shape_n: shape.num_players(),
        shape_k: shape.actions().to_vec(),
        trials,
        seed: master_seed,
        n_prime,
        histogram: hist.into_iter().collect(),
        violating_samples,
        violating_vertices,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub shape: GameShape,
    pub games: u64,
    pub starts_per_game: u64,
    pub params: DynamicParams,
    pub master_seed: u64,
    pub threads: usize,
    pub condition: SampleCondition,
    /// Additionally reject sampled games that are not connected.
    pub require_connected: bool,
    pub max_rejections: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceStats {
    pub runs: u64,
    pub absorbed: u64,
    pub absorption_fraction: f64,
    /// Quantiles over the steps of absorbed runs.
    pub median_steps: u64,
    pub p90_steps: u64,
    pub max_steps: u64,
}

/// Samples conditioned games and runs the dynamic from random starts.
pub fn convergence_experiment(config: &ConvergenceConfig) -> Result<ConvergenceStats> {
    let pool = local_pool(config.threads)?;
    let results: Result<Vec<(u64, Vec<u64>)>> = pool.install(|| {
        (0..config.games)
            .into_par_iter()
            .map(|game_ix| {
                let mut rng = derive_trial_rng(TrialSeed {
                    master_seed: config.master_seed,
                    trial_index: game_ix,
                });
                let game = loop {
                    let (game, _) = sample_conditioned(
                        &config.shape,
                        config.condition,
                        &mut rng,
                        config.max_rejections,
                    )?;
                    if !config.require_connected
                        || crate::connectivity::is_connected(
                            &crate::response_graphs::BestResponseView::new(&game.winner_table()),
                        )
                    {
                        break game;
                    }
                };
                let mut absorbed = 0u64;
                let mut steps = Vec::new();
                for _ in 0..config.starts_per_game {
                    let start = rng.random_range(0..config.shape.vertex_count());
                    let trace = run(&game, start, &config.params, &mut rng)?;
                    if trace.absorbed {
                        absorbed += 1;
                        steps.push(trace.steps_taken);
                    }
                }
                Ok((absorbed, steps))
            })
            .collect()
    });
    let results = results?;
    let runs = config.games * config.starts_per_game;
    let absorbed: u64 = results.iter().map(|(a, _)| a).sum();
    let mut steps: Vec<u64> = results.into_iter().flat_map(|(_, s)| s).collect();
    steps.sort_unstable();
    let quantile = |q: f64| -> u64 {
        if steps.is_empty() {
            0
        } else {
            steps[((steps.len() - 1) as f64 * q).round() as usize]
        }
    };
    Ok(ConvergenceStats {
        runs,
        absorbed,
        absorption_fraction: absorbed as f64 / runs.max(1) as f64,
        median_steps: quantile(0.5),
        p90_steps: quantile(0.9),
        max_steps: steps.last().copied().unwrap_or(0),
    })
}

// --- output ----------------------------------------------------------------

pub fn cells_to_csv(cells: &[CellStats]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for cell in cells {
        for f in &cell.flags {
            out.push_str(&format!(
                "{},{},{},{},{},{:.6},{:.6},{:.6},{}\n",
                cell.shape_n,
                cell.shape_k_label(),
                f.flag,
                cell.trials,
                f.successes,
                f.proportion,
                f.ci_low,
                f.ci_high,
                cell.seed
            ));
        }
    }
    out
}

pub fn cells_to_json(cells: &[CellStats]) -> String {
    serde_json::to_string_pretty(cells).expect("serializable")
}

pub fn write_cells_csv(cells: &[CellStats], mut w: impl Write) -> Result<()> {
    w.write_all(cells_to_csv(cells).as_bytes())?;
    Ok(())
}

/// Minimal static SVG: one panel per flag, proportion against player count,
/// one polyline per action-count label.
pub fn cells_to_svg(cells: &[CellStats], flags: &[ClassFlag]) -> String {
    const W: f64 = 720.0;
    const PANEL_H: f64 = 220.0;
    const MARGIN: f64 = 48.0;
    let height = PANEL_H * flags.len() as f64 + MARGIN;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{height}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    let ns: Vec<usize> = cells.iter().map(|c| c.shape_n).collect();
    let (n_min, n_max) = match (ns.iter().min(), ns.iter().max()) {
        (Some(&a), Some(&b)) if a != b => (a as f64, b as f64),
        (Some(&a), _) => (a as f64 - 0.5, a as f64 + 0.5),
        _ => (0.0, 1.0),
    };
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for (panel, &flag) in flags.iter().enumerate() {
        let top = panel as f64 * PANEL_H + 24.0;
        let bottom = top + PANEL_H - 56.0;
        let x_of = |n: f64| MARGIN + (n - n_min) / (n_max - n_min) * (W - 2.0 * MARGIN);
        let y_of = |p: f64| bottom - p * (bottom - top);
        svg.push_str(&format!(
            "<text x=\"{MARGIN}\" y=\"{}\" font-weight=\"bold\">proportion {flag}</text>\n",
            top - 8.0
        ));
        svg.push_str(&format!(
            "<line x1=\"{MARGIN}\" y1=\"{bottom}\" x2=\"{}\" y2=\"{bottom}\" stroke=\"#444\"/>\n",
            W - MARGIN
        ));
        svg.push_str(&format!(
            "<line x1=\"{MARGIN}\" y1=\"{top}\" x2=\"{MARGIN}\" y2=\"{bottom}\" stroke=\"#444\"/>\n"
        ));
        for tick in [0.0, 0.5, 1.0] {
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{tick}</text>\n",
                MARGIN - 4.0,
                y_of(tick) + 4.0
            ));
        }
        let mut labels: Vec<String> = cells.iter().map(|c| c.shape_k_label()).collect();
        labels.sort();
        labels.dedup();
        for (color_ix, label) in labels.iter().enumerate() {
            let mut points: Vec<(usize, f64)> = cells
                .iter()
                .filter(|c| &c.shape_k_label() == label)
                .filter_map(|c| c.flag(flag).map(|f| (c.shape_n, f.proportion)))
                .collect();
            points.sort_by_key(|&(n, _)| n);
            if points.is_empty() {
                continue;
            }
            let color = palette[color_ix % palette.len()];
            let path: Vec<String> = points
                .iter()
                .map(|&(n, p)| format!("{:.2},{:.2}", x_of(n as f64), y_of(p)))
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\"/>\n",
                path.join(" ")
            ));
            for &(n, p) in &points {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
                    x_of(n as f64),
                    y_of(p)
                ));
                svg.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{n}</text>\n",
                    x_of(n as f64),
                    bottom + 14.0
                ));
            }
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{label} actions</text>\n",
                W - MARGIN - 80.0,
                top + 14.0 * (color_ix as f64 + 1.0)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DynamicKind;

    fn small_config(threads: usize) -> ExperimentConfig {
        let cells = vec![GameShape::new(&[2, 2]).unwrap(), GameShape::uniform(3, 2).unwrap()];
        ExperimentConfig {
            threads,
            ..ExperimentConfig::new(cells, 2000, 42)
        }
    }

    fn strip_wall(mut cells: Vec<CellStats>) -> Vec<CellStats> {
        for c in &mut cells {
            c.wall_ms = 0;
        }
        cells
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let one = estimate_class_proportions(&small_config(1)).unwrap();
        let four = estimate_class_proportions(&small_config(4)).unwrap();
        let eight = estimate_class_proportions(&small_config(8)).unwrap();
        assert_eq!(strip_wall(one.clone()), strip_wall(four));
        assert_eq!(strip_wall(one.clone()), strip_wall(eight));
        assert_eq!(cells_to_csv(&one), cells_to_csv(&estimate_class_proportions(&small_config(3)).unwrap()));
    }

    #[test]
    fn conditioned_2x2_cell_matches_enumeration() {
        // Every conditioned (2,(2,2)) table is connected and acyclic, and
        // super-connectedness has exact probability 2/14.
        let stats = &estimate_class_proportions(&small_config(2)).unwrap()[0];
        let connected = stats.flag(ClassFlag::Connected).unwrap();
        assert_eq!(connected.successes, stats.trials);
        let acyclic = stats.flag(ClassFlag::Acyclic).unwrap();
        assert_eq!(acyclic.successes, stats.trials);
        let sup = stats.flag(ClassFlag::SuperConnected).unwrap();
        assert!((sup.proportion - 2.0 / 14.0).abs() < 0.03, "{}", sup.proportion);
        assert!(sup.ci_low <= sup.proportion && sup.proportion <= sup.ci_high);
    }

    #[test]
    fn wilson_interval_endpoints() {
        let (lo, hi) = wilson_interval(0, 10);
        assert!(lo.abs() < 1e-12, "{lo}");
        assert!((hi - 0.27753).abs() < 1e-4, "{hi}");
        let (lo, hi) = wilson_interval(10, 10);
        assert!((lo - 0.72247).abs() < 1e-4, "{lo}");
        assert!((hi - 1.0).abs() < 1e-12, "{hi}");
        let (lo, hi) = wilson_interval(5, 10);
        assert!(lo < 0.5 && 0.5 < hi);
    }

    #[test]
    fn poisson_reference_values() {
        assert!((poisson_one(0) - 0.36787944117144233).abs() < 1e-15);
        assert!((poisson_one(1) - 0.36787944117144233).abs() < 1e-15);
        assert!((poisson_one(2) - 0.18393972058572117).abs() < 1e-15);
        let total: f64 = (0..30).map(poisson_one).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pne_distribution_smoke() {
        let shape = GameShape::uniform(10, 2).unwrap();
        let dist = pne_count_distribution(&shape, 2000, 7, 2).unwrap();
        assert_eq!(dist.histogram.iter().map(|&(_, c)| c).sum::<u64>(), 2000);
        // Already close to Poisson(1) at 10 players.
        assert!(dist.tv_distance < 0.08, "tv {}", dist.tv_distance);
        assert!((dist.empirical(0) - poisson_one(0)).abs() < 0.05);
    }

    #[test]
    fn pne_distribution_deterministic_across_threads() {
        let shape = GameShape::uniform(6, 2).unwrap();
        let a = pne_count_distribution(&shape, 500, 11, 1).unwrap();
        let b = pne_count_distribution(&shape, 500, 11, 8).unwrap();
        assert_eq!(a.histogram, b.histogram);
    }

    #[test]
    fn reach_report_within_budget() {
        let shape = GameShape::uniform(8, 2).unwrap();
        let report = reach_threshold_experiment(&shape, 50, 13, 2).unwrap();
        assert_eq!(report.n_prime, 1.0);
        let vertices: u64 = report.histogram.iter().map(|&(_, c)| c).sum();
        assert_eq!(vertices, 50 * 256);
        assert!(report.violating_samples <= 50);
    }

    #[test]
    fn reach_report_refuses_oversized_shapes() {
        let shape = GameShape::uniform(16, 4).unwrap();
        assert!(matches!(
            reach_threshold_experiment(&shape, 10, 1, 1),
            Err(Error::SizeExceeded { .. })
        ));
    }

    #[test]
    fn convergence_on_tiny_connected_games() {
        let config = ConvergenceConfig {
            shape: GameShape::uniform(4, 2).unwrap(),
            games: 50,
            starts_per_game: 4,
            params: DynamicParams::new(DynamicKind::BestResponseInertia, vec![0.5; 4], 100_000)
                .unwrap(),
            master_seed: 17,
            threads: 2,
            condition: SampleCondition::AtLeastOnePne,
            require_connected: true,
            max_rejections: 100_000,
        };
        let stats = convergence_experiment(&config).unwrap();
        assert_eq!(stats.runs, 200);
        assert_eq!(stats.absorbed, 200);
        assert!((stats.absorption_fraction - 1.0).abs() < 1e-12);
        assert!(stats.median_steps <= stats.p90_steps && stats.p90_steps <= stats.max_steps);
    }

    #[test]
    fn csv_format_is_frozen() {
        let cells = estimate_class_proportions(&small_config(1)).unwrap();
        let csv = cells_to_csv(&cells);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "shape_n,shape_k,flag,trials,successes,proportion,ci_low,ci_high,seed"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("2,2,connected,2000,"), "{first}");
        assert_eq!(csv.lines().count(), 1 + 2 * 3);
    }

    #[test]
    fn svg_renders_requested_panels() {
        let cells = estimate_class_proportions(&small_config(1)).unwrap();
        let flags = [ClassFlag::Connected, ClassFlag::Acyclic, ClassFlag::SuperConnected];
        let svg = cells_to_svg(&cells, &flags);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("proportion ").count(), 3);
        assert!(svg.contains("polyline"));
    }
}
