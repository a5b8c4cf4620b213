//! Exhaustive enumeration and brute-force reference algorithms.
//!
//! Everything here is deliberately independent of the fast paths it checks:
//! reachability is an iterated boolean relaxation rather than a component
//! sweep, class flags are read off the full closure matrix, and absorption
//! probabilities come from a dense linear solve on the exact Markov chain.

use crate::connectivity::ClassFlag;
use crate::dynamics::{DynamicKind, DynamicParams};
use crate::error::{Error, Result};
use crate::game_model::{GameShape, OrdinalGame, VertexId, WinnerTable};
use crate::response_graphs::Digraph;
use serde::Serialize;
use std::collections::BTreeMap;

/// Default cap on the number of enumerated objects.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;
/// Vertex limit for the brute-force reachability matrix.
pub const REACHABILITY_LIMIT: u64 = 256;
/// Vertex limit for the exact absorption solver.
pub const ABSORPTION_LIMIT: u64 = 64;

/// Visits every winner table of a shape exactly once, in lexicographic
/// winner order (last line varies fastest).
pub struct WinnerTableIter {
    shape: GameShape,
    arity: Vec<u32>,
    current: Vec<u32>,
    done: bool,
}

impl Iterator for WinnerTableIter {
    type Item = WinnerTable;

    fn next(&mut self) -> Option<WinnerTable> {
        if self.done {
            return None;
        }
        let table = WinnerTable::new(self.shape.clone(), self.current.clone())
            .expect("counter stays in range");
        self.done = !increment(&mut self.current, &self.arity);
        Some(table)
    }
}

fn increment(digits: &mut [u32], arity: &[u32]) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < arity[i] {
            return true;
        }
        digits[i] = 0;
    }
    false
}

pub fn enumerate_winner_tables(shape: &GameShape) -> Result<WinnerTableIter> {
    enumerate_winner_tables_capped(shape, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_winner_tables_capped(shape: &GameShape, cap: u64) -> Result<WinnerTableIter> {
    let total = winner_table_count(shape);
    if total > cap as u128 {
        return Err(Error::EnumerationTooLarge { total, cap });
    }
    let arity: Vec<u32> = shape.lines().map(|l| shape.actions_of(l.player)).collect();
    Ok(WinnerTableIter {
        shape: shape.clone(),
        current: vec![0; arity.len()],
        arity,
        done: false,
    })
}

/// Number of winner tables on `shape`, saturating at `u128::MAX`.
pub fn winner_table_count(shape: &GameShape) -> u128 {
    saturating_product(shape.lines().map(|l| shape.actions_of(l.player) as u128))
}

/// Number of generic games on `shape` (per-line strict rankings),
/// saturating at `u128::MAX`.
pub fn generic_game_count(shape: &GameShape) -> u128 {
    saturating_product(shape.lines().map(|l| factorial(shape.actions_of(l.player) as u128)))
}

fn saturating_product(factors: impl Iterator<Item = u128>) -> u128 {
    let mut total: u128 = 1;
    for f in factors {
        match total.checked_mul(f) {
            Some(t) => total = t,
            None => return u128::MAX,
        }
    }
    total
}

fn factorial(k: u128) -> u128 {
    (2..=k).product::<u128>().max(1)
}

/// Visits every generic game of a shape exactly once: each line sweeps all
/// permutations of its actions, with the last line varying fastest.
pub struct GameIter {
    shape: GameShape,
    perms: Vec<Vec<u32>>,
    done: bool,
}

impl Iterator for GameIter {
    type Item = OrdinalGame;

    fn next(&mut self) -> Option<OrdinalGame> {
        if self.done {
            return None;
        }
        let game = OrdinalGame::from_rankings(self.shape.clone(), self.perms.clone())
            .expect("permutations stay valid");
        self.done = !self.advance();
        Some(game)
    }
}

impl GameIter {
    fn advance(&mut self) -> bool {
        for i in (0..self.perms.len()).rev() {
            if next_permutation(&mut self.perms[i]) {
                return true;
            }
            self.perms[i].sort_unstable();
        }
        false
    }
}

/// Lexicographic successor in place; false when the input was the last
/// permutation.
fn next_permutation(p: &mut [u32]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

pub fn enumerate_generic_games(shape: &GameShape) -> Result<GameIter> {
    enumerate_generic_games_capped(shape, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_generic_games_capped(shape: &GameShape, cap: u64) -> Result<GameIter> {
    let total = generic_game_count(shape);
    if total > cap as u128 {
        return Err(Error::EnumerationTooLarge { total, cap });
    }
    let perms: Vec<Vec<u32>> = shape
        .lines()
        .map(|l| (0..shape.actions_of(l.player)).collect())
        .collect();
    Ok(GameIter {
        shape: shape.clone(),
        perms,
        done: false,
    })
}

/// Reduced fraction with an exact integer numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        if den == 0 {
            return Rational { num, den };
        }
        if num == 0 {
            return Rational { num: 0, den: 1 };
        }
        let g = gcd(num, den);
        Rational { num: num / g, den: den / g }
    }

    pub fn value(&self) -> f64 {
        if self.den == 0 {
            f64::NAN
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact class counts from exhaustive enumeration, conditioned on having at
/// least one pure Nash equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct ExactProportions {
    pub shape_n: usize,
    pub shape_k: Vec<u32>,
    /// Objects enumerated: winner tables, or generic games when any
    /// better-response flag was requested.
    pub total: u64,
    pub enumerated_games: bool,
    pub with_pne: u64,
    pub flag_counts: BTreeMap<ClassFlag, u64>,
}

impl ExactProportions {
    pub fn with_pne_proportion(&self) -> Rational {
        Rational::new(self.with_pne, self.total)
    }

    /// Exact conditional proportion of `flag` among objects with a pure
    /// Nash equilibrium.
    pub fn proportion(&self, flag: ClassFlag) -> Option<Rational> {
        self.flag_counts
            .get(&flag)
            .map(|&c| Rational::new(c, self.with_pne))
    }
}

/// Exhaustively computes conditioned class proportions. Winner tables are
/// enumerated when only best-response flags are requested: rankings below
/// the top are independent of the best-response graph, so every table stands
/// for equally many games and the conditional proportions agree.
pub fn exact_class_proportions(shape: &GameShape, flags: &[ClassFlag]) -> Result<ExactProportions> {
    exact_class_proportions_capped(shape, flags, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_class_proportions_capped(
    shape: &GameShape,
    flags: &[ClassFlag],
    cap: u64,
) -> Result<ExactProportions> {
    let need_games = flags.iter().any(|f| f.is_global());
    let mut with_pne = 0u64;
    let mut counts: BTreeMap<ClassFlag, u64> = flags.iter().map(|&f| (f, 0)).collect();
    let mut total = 0u64;

    let mut tally = |record: &crate::connectivity::ClassificationRecord| {
        total += 1;
        if record.num_pne == 0 {
            return;
        }
        with_pne += 1;
        for (&flag, count) in counts.iter_mut() {
            if record.flag(flag) == Some(true) {
                *count += 1;
            }
        }
    };

    if need_games {
        let opts = crate::connectivity::ClassifyOptions::default();
        for game in enumerate_generic_games_capped(shape, cap)? {
            tally(&crate::connectivity::classify_game(&game, &opts));
        }
    } else {
        for table in enumerate_winner_tables_capped(shape, cap)? {
            tally(&crate::connectivity::classify_table(&table));
        }
    }

    Ok(ExactProportions {
        shape_n: shape.num_players(),
        shape_k: shape.actions().to_vec(),
        total,
        enumerated_games: need_games,
        with_pne,
        flag_counts: counts,
    })
}

/// Reflexive-transitive closure by iterated relaxation; `reach[u][v]` is
/// true iff `u` can reach `v` along zero or more edges.
pub fn brute_force_reachability<G: Digraph>(g: &G) -> Result<Vec<Vec<bool>>> {
    let n = g.vertex_count();
    if n > REACHABILITY_LIMIT {
        return Err(Error::SizeExceeded { vertices: n, limit: REACHABILITY_LIMIT });
    }
    let n = n as usize;
    let mut reach = vec![vec![false; n]; n];
    for (v, row) in reach.iter_mut().enumerate() {
        row[v] = true;
    }
    loop {
        let mut changed = false;
        for u in 0..n {
            let mut row = std::mem::take(&mut reach[u]);
            g.for_each_out(u as VertexId, |w| {
                for (slot, &bit) in row.iter_mut().zip(&reach[w as usize]) {
                    if bit && !*slot {
                        *slot = true;
                        changed = true;
                    }
                }
            });
            reach[u] = row;
        }
        if !changed {
            return Ok(reach);
        }
    }
}

/// Class flags read directly off the closure matrix.
pub struct BruteForceFlags {
    pub acyclic: bool,
    pub weakly_acyclic: bool,
    pub connected: bool,
    pub super_connected: bool,
    pub num_sinks: u64,
}

pub fn brute_force_class_flags<G: Digraph>(g: &G) -> Result<BruteForceFlags> {
    let reach = brute_force_reachability(g)?;
    let n = g.vertex_count() as usize;
    let sink: Vec<bool> = (0..n).map(|v| g.is_sink(v as VertexId)).collect();
    let source: Vec<bool> = (0..n).map(|v| g.is_source(v as VertexId)).collect();
    let num_sinks = sink.iter().filter(|&&s| s).count() as u64;

    let mut cyclic = false;
    for u in 0..n {
        g.for_each_out(u as VertexId, |w| {
            if reach[w as usize][u] {
                cyclic = true;
            }
        });
    }
    let weakly = (0..n).all(|u| (0..n).any(|s| sink[s] && reach[u][s]));
    let connected =
        num_sinks > 0 && (0..n).all(|u| sink[u] || (0..n).all(|s| !sink[s] || reach[u][s]));
    let super_connected =
        num_sinks > 0 && (0..n).all(|u| sink[u] || (0..n).all(|w| source[w] || reach[u][w]));
    Ok(BruteForceFlags {
        acyclic: !cyclic,
        weakly_acyclic: weakly,
        connected,
        super_connected,
        num_sinks,
    })
}

/// Exact absorption probabilities of the best-response-with-inertia chain
/// into the pure-Nash set, one entry per start profile.
///
/// States that cannot reach the equilibrium set get probability 0; the rest
/// solve the standard first-hit linear system by Gaussian elimination.
pub fn brute_force_absorption(game: &OrdinalGame, params: &DynamicParams) -> Result<Vec<f64>> {
    if params.kind != DynamicKind::BestResponseInertia {
        return Err(Error::InvalidParams(
            "exact absorption supports the best-response-with-inertia kind only".into(),
        ));
    }
    let shape = game.shape();
    let n_players = shape.num_players();
    if params.p.len() != n_players {
        return Err(Error::InvalidParams(format!(
            "{} probabilities for {} players",
            params.p.len(),
            n_players
        )));
    }
    let v_count = shape.vertex_count();
    if v_count > ABSORPTION_LIMIT {
        return Err(Error::SizeExceeded { vertices: v_count, limit: ABSORPTION_LIMIT });
    }
    let v = v_count as usize;
    let table = game.winner_table();
    let pne: Vec<bool> = (0..v).map(|a| table.is_pne(a as VertexId)).collect();

    // One-step transition kernel: coordinates move independently, each to
    // its best response with probability p_i (a no-op when already best).
    let br: Vec<Vec<u32>> = (0..v)
        .map(|a| {
            (0..n_players)
                .map(|p| table.winner(shape.line_of(a as VertexId, p)))
                .collect()
        })
        .collect();
    let prob = |a: usize, b: usize| -> f64 {
        let mut q = 1.0;
        for p in 0..n_players {
            let cur = shape.digit(a as VertexId, p);
            let target = shape.digit(b as VertexId, p);
            let best = br[a][p];
            q *= if best == cur {
                if target == cur {
                    1.0
                } else {
                    return 0.0;
                }
            } else if target == best {
                params.p[p]
            } else if target == cur {
                1.0 - params.p[p]
            } else {
                return 0.0;
            };
        }
        q
    };

    // Which states can reach the equilibrium set at all.
    let mut can_reach = pne.clone();
    loop {
        let mut changed = false;
        for a in 0..v {
            if can_reach[a] {
                continue;
            }
            for b in 0..v {
                if can_reach[b] && prob(a, b) > 0.0 {
                    can_reach[a] = true;
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let transient: Vec<usize> = (0..v).filter(|&a| can_reach[a] && !pne[a]).collect();
    let index_of: BTreeMap<usize, usize> =
        transient.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let m = transient.len();
    // (I - Q) x = r, with r the one-step mass into the equilibrium set.
    let mut lhs = vec![vec![0.0f64; m]; m];
    let mut rhs = vec![0.0f64; m];
    for (i, &a) in transient.iter().enumerate() {
        lhs[i][i] = 1.0;
        for b in 0..v {
            let q = prob(a, b);
            if q == 0.0 {
                continue;
            }
            if pne[b] {
                rhs[i] += q;
            } else if let Some(&j) = index_of.get(&b) {
                lhs[i][j] -= q;
            }
        }
    }
    let solution = solve_dense(&mut lhs, &mut rhs)?;

    let mut result = vec![0.0f64; v];
    for a in 0..v {
        if pne[a] {
            result[a] = 1.0;
        }
    }
    for (i, &a) in transient.iter().enumerate() {
        result[a] = solution[i].clamp(0.0, 1.0);
    }
    Ok(result)
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::InvalidParams(
                "singular absorption system; state space is malformed".into(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}
