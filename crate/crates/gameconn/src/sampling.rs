//! Seeded, reproducible uniform sampling of games and winner tables.
//!
//! Every trial gets its own ChaCha8 stream derived from a master seed and a
//! trial index, so parallel experiments produce identical results for any
//! worker count or schedule. The derivation is frozen: the ChaCha8 key is the
//! SplitMix64 expansion of the master seed (`seed_from_u64`) and the 64-bit
//! stream counter is the trial index.

use crate::error::{Error, Result};
use crate::game_model::{count_pne, GameShape, OrdinalGame, WinnerTable};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default rejection budget for conditioned sampling.
pub const DEFAULT_MAX_REJECTIONS: u64 = 1_000_000;

/// Event a conditioned sample must satisfy, checked on the winner table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleCondition {
    Unconditioned,
    AtLeastOnePne,
    ExactlyZPne(u64),
}

impl SampleCondition {
    pub fn accepts(&self, table: &WinnerTable) -> bool {
        match self {
            SampleCondition::Unconditioned => true,
            SampleCondition::AtLeastOnePne => has_pne(table),
            SampleCondition::ExactlyZPne(z) => count_pne(table) == *z,
        }
    }
}

impl std::fmt::Display for SampleCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SampleCondition::Unconditioned => write!(f, "none"),
            SampleCondition::AtLeastOnePne => write!(f, "pne"),
            SampleCondition::ExactlyZPne(z) => write!(f, "pne={z}"),
        }
    }
}

/// Identifies one trial of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeed {
    pub master_seed: u64,
    pub trial_index: u64,
}

/// Derives the per-trial generator. Identical `(master_seed, trial_index)`
/// yields a bitwise-identical stream on every platform and thread schedule.
pub fn derive_trial_rng(seed: TrialSeed) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
    rng.set_stream(seed.trial_index);
    rng
}

/// Uniform random winner table: each line's winner drawn independently and
/// uniformly, in canonical line order.
pub fn sample_winner_table<R: Rng>(shape: &GameShape, rng: &mut R) -> WinnerTable {
    let mut winners = Vec::with_capacity(shape.line_count() as usize);
    for line in shape.lines() {
        winners.push(rng.random_range(0..shape.actions_of(line.player)));
    }
    WinnerTable::new(shape.clone(), winners).expect("winners in range")
}

/// Uniform random generic game: each line's ranking is an independent
/// uniform permutation (Fisher-Yates), in canonical line order. The winner
/// table of the result has the same law as [`sample_winner_table`].
pub fn sample_generic_game<R: Rng>(shape: &GameShape, rng: &mut R) -> OrdinalGame {
    let mut game = OrdinalGame::identity(shape.clone());
    let mut scratch: Vec<u32> = Vec::new();
    for (ix, line) in shape.lines().enumerate() {
        let k = shape.actions_of(line.player);
        scratch.clear();
        scratch.extend(0..k);
        scratch.shuffle(rng);
        game.set_ranking(ix as u64, &scratch).expect("permutation");
    }
    game
}

/// Rejection-samples a generic game satisfying `condition`. Returns the game
/// and the number of rejected draws. Exactly uniform on the conditioned set.
pub fn sample_conditioned<R: Rng>(
    shape: &GameShape,
    condition: SampleCondition,
    rng: &mut R,
    max_rejections: u64,
) -> Result<(OrdinalGame, u64)> {
    let mut rejections = 0;
    loop {
        let game = sample_generic_game(shape, rng);
        if condition.accepts(&game.winner_table()) {
            return Ok((game, rejections));
        }
        rejections += 1;
        if rejections > max_rejections {
            return Err(Error::ConditioningTimeout { rejections });
        }
    }
}

/// Winner-table variant of [`sample_conditioned`]. Best-response-graph
/// properties depend only on winners, and the conditioning event is a
/// winner-table event, so this is the cheap sampling path for such flags.
pub fn sample_conditioned_table<R: Rng>(
    shape: &GameShape,
    condition: SampleCondition,
    rng: &mut R,
    max_rejections: u64,
) -> Result<(WinnerTable, u64)> {
    let mut rejections = 0;
    loop {
        let table = sample_winner_table(shape, rng);
        if condition.accepts(&table) {
            return Ok((table, rejections));
        }
        rejections += 1;
        if rejections > max_rejections {
            return Err(Error::ConditioningTimeout { rejections });
        }
    }
}

fn has_pne(table: &WinnerTable) -> bool {
    table.shape().vertices().any(|v| table.is_pne(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::pure_nash_profiles;

    fn table_key(table: &WinnerTable) -> u32 {
        // Packs a (2,(2,2)) table into 4 bits.
        table
            .winners()
            .iter()
            .enumerate()
            .map(|(i, &w)| w << i)
            .sum()
    }

    #[test]
    fn same_seed_same_game() {
        let shape = GameShape::new(&[3, 4, 2]).unwrap();
        let seed = TrialSeed { master_seed: 99, trial_index: 7 };
        let a = sample_generic_game(&shape, &mut derive_trial_rng(seed));
        let b = sample_generic_game(&shape, &mut derive_trial_rng(seed));
        assert_eq!(a, b);

        let other = TrialSeed { master_seed: 99, trial_index: 8 };
        let c = sample_generic_game(&shape, &mut derive_trial_rng(other));
        assert_ne!(a, c);
    }

    #[test]
    fn tables_uniform_at_2x2() {
        // All 16 tables within 3 sigma of 1/16 over 1e5 draws.
        let shape = GameShape::new(&[2, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 5, trial_index: 0 });
        let n = 100_000u32;
        let mut counts = [0u32; 16];
        for _ in 0..n {
            counts[table_key(&sample_winner_table(&shape, &mut rng)) as usize] += 1;
        }
        let mean = n as f64 / 16.0;
        let sigma = (n as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for &c in &counts {
            assert!((c as f64 - mean).abs() < 3.0 * sigma, "count {c} vs mean {mean}");
        }
    }

    #[test]
    fn game_winner_marginal_matches_table_law() {
        // Two-sample chi-square over the 16 table outcomes at (2,(2,2)).
        // Critical value for df=15 at p=0.001 is 37.697.
        let shape = GameShape::new(&[2, 2]).unwrap();
        let n = 100_000u32;
        let mut from_games = [0f64; 16];
        let mut from_tables = [0f64; 16];
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 11, trial_index: 0 });
        for _ in 0..n {
            let g = sample_generic_game(&shape, &mut rng);
            from_games[table_key(&g.winner_table()) as usize] += 1.0;
        }
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 11, trial_index: 1 });
        for _ in 0..n {
            from_tables[table_key(&sample_winner_table(&shape, &mut rng)) as usize] += 1.0;
        }
        let stat: f64 = from_games
            .iter()
            .zip(&from_tables)
            .map(|(a, b)| (a - b) * (a - b) / (a + b))
            .sum();
        assert!(stat < 37.697, "chi-square statistic {stat}");
    }

    #[test]
    fn winner_marginal_uniform_per_line_3x3() {
        let shape = GameShape::new(&[3, 3]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 21, trial_index: 0 });
        let n = 100_000u32;
        let mut counts = vec![[0u32; 3]; shape.line_count() as usize];
        for _ in 0..n {
            let t = sample_winner_table(&shape, &mut rng);
            for (l, &w) in t.winners().iter().enumerate() {
                counts[l][w as usize] += 1;
            }
        }
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for line in &counts {
            for &c in line {
                assert!((c as f64 - n as f64 / 3.0).abs() < 3.0 * sigma);
            }
        }
    }

    #[test]
    fn fixed_vertex_sink_probability() {
        // P(a fixed vertex is a sink) = prod 1/k_i by line independence.
        let shape = GameShape::new(&[2, 2, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 3, trial_index: 0 });
        let n = 100_000u32;
        let hits = (0..n)
            .filter(|_| sample_winner_table(&shape, &mut rng).is_pne(5))
            .count() as f64;
        let p = 1.0 / 8.0;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - n as f64 * p).abs() < 3.0 * sigma);
    }

    #[test]
    fn conditioned_acceptance_rate_2x2() {
        // 14 of the 16 tables have a sink, so the acceptance rate is 0.875.
        let shape = GameShape::new(&[2, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 17, trial_index: 0 });
        let n = 10_000u64;
        let mut rejected = 0u64;
        for _ in 0..n {
            let (game, rej) =
                sample_conditioned(&shape, SampleCondition::AtLeastOnePne, &mut rng, 1000)
                    .unwrap();
            rejected += rej;
            assert!(!pure_nash_profiles(&game.winner_table()).is_empty());
        }
        let rate = n as f64 / (n + rejected) as f64;
        let sigma = (0.875f64 * 0.125 / (n + rejected) as f64).sqrt();
        assert!((rate - 0.875).abs() < 4.0 * sigma, "acceptance rate {rate}");
    }

    #[test]
    fn exactly_z_condition_holds_on_accepts() {
        let shape = GameShape::new(&[2, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 23, trial_index: 0 });
        for _ in 0..200 {
            let (game, _) =
                sample_conditioned(&shape, SampleCondition::ExactlyZPne(1), &mut rng, 10_000)
                    .unwrap();
            assert_eq!(count_pne(&game.winner_table()), 1);
        }
    }

    #[test]
    fn near_null_condition_times_out() {
        // A (2,(2,2)) table has at most 2 sinks, so exactly 5 is impossible.
        let shape = GameShape::new(&[2, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 29, trial_index: 0 });
        let err = sample_conditioned(&shape, SampleCondition::ExactlyZPne(5), &mut rng, 50);
        assert!(matches!(err, Err(Error::ConditioningTimeout { .. })));
    }

    #[test]
    fn games_uniform_at_2x2() {
        // With k=2 a game is its winner table; all 16 games equally likely.
        let shape = GameShape::new(&[2, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 41, trial_index: 0 });
        let n = 100_000u32;
        let mut counts = [0u32; 16];
        for _ in 0..n {
            let g = sample_generic_game(&shape, &mut rng);
            counts[table_key(&g.winner_table()) as usize] += 1;
        }
        let mean = n as f64 / 16.0;
        let sigma = (n as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for &c in &counts {
            assert!((c as f64 - mean).abs() < 3.0 * sigma);
        }
    }
}
