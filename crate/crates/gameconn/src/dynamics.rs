//! Simple adaptive dynamics on ordinal games.
//!
//! The core process is the best-response dynamic with inertia: each period,
//! every player independently best-responds to the previous profile with
//! probability `p_i` and otherwise repeats their action. Variants: a
//! better-response form (an updating player moves to a uniformly random
//! strictly better action on their line) and a one-at-a-time form (a single
//! uniformly chosen player best-responds each period).
//!
//! Pure Nash equilibria are absorbing: every best response equals the
//! current action, so no update can move the profile. Absorption is detected
//! with the sink test, never by watching the trajectory stall.

use crate::error::{Error, Result};
use crate::game_model::{GameShape, OrdinalGame, VertexId};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicKind {
    BestResponseInertia,
    BetterResponseInertia,
    OneAtATimeBestResponse,
}

#[derive(Debug, Clone)]
pub struct DynamicParams {
    pub kind: DynamicKind,
    /// Per-player update probabilities; unused by the one-at-a-time kind.
    pub p: Vec<f64>,
    pub step_cap: u64,
}

impl DynamicParams {
    pub fn new(kind: DynamicKind, p: Vec<f64>, step_cap: u64) -> Result<Self> {
        if step_cap == 0 {
            return Err(Error::InvalidParams("step cap must be at least 1".into()));
        }
        if kind != DynamicKind::OneAtATimeBestResponse {
            if p.is_empty() {
                return Err(Error::InvalidParams("inertia dynamics need p".into()));
            }
            if let Some(&bad) = p.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
                return Err(Error::InvalidParams(format!(
                    "update probabilities must lie strictly inside (0,1), got {bad}"
                )));
            }
        }
        Ok(DynamicParams { kind, p, step_cap })
    }

    /// Inertia dynamic with a common update probability for all `n` players.
    pub fn uniform_inertia(p: f64, n: usize, step_cap: u64) -> Result<Self> {
        Self::new(DynamicKind::BestResponseInertia, vec![p; n], step_cap)
    }

    fn prob(&self, player: usize, n: usize) -> Result<f64> {
        if self.p.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} probabilities for {} players",
                self.p.len(),
                n
            )));
        }
        Ok(self.p[player])
    }
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicsTrace {
    pub start: VertexId,
    pub steps_taken: u64,
    pub absorbed: bool,
    pub absorbing_profile: Option<VertexId>,
    /// Present only for recorded runs; starts with the initial profile and
    /// is truncated at the recording limit.
    pub trajectory: Option<Vec<VertexId>>,
}

fn is_equilibrium(game: &OrdinalGame, v: VertexId) -> bool {
    let shape = game.shape();
    (0..shape.num_players()).all(|p| game.winner(shape.line_of(v, p)) == shape.digit(v, p))
}

/// One transition of the chosen dynamic. Coins are drawn per player in
/// ascending index order, so replaying an identical generator state yields
/// an identical step.
pub fn step<R: Rng>(
    game: &OrdinalGame,
    current: VertexId,
    params: &DynamicParams,
    rng: &mut R,
) -> Result<VertexId> {
    let shape = game.shape();
    let n = shape.num_players();
    match params.kind {
        DynamicKind::BestResponseInertia => {
            let mut next = current;
            for player in 0..n {
                let update = rng.random_bool(params.prob(player, n)?);
                if update {
                    let br = game.winner(shape.line_of(current, player));
                    next = shape.with_digit(next, player, br);
                }
            }
            Ok(next)
        }
        DynamicKind::BetterResponseInertia => {
            let mut next = current;
            for player in 0..n {
                let update = rng.random_bool(params.prob(player, n)?);
                if update {
                    let line = shape.line_of(current, player);
                    let ranking = game.ranking(line)?;
                    let pos = game.rank_of(line, shape.digit(current, player));
                    if pos > 0 {
                        let choice = rng.random_range(0..pos);
                        next = shape.with_digit(next, player, ranking[choice as usize]);
                    }
                }
            }
            Ok(next)
        }
        DynamicKind::OneAtATimeBestResponse => {
            let player = rng.random_range(0..n);
            let br = game.winner(shape.line_of(current, player));
            Ok(shape.with_digit(current, player, br))
        }
    }
}

/// Iterates [`step`] until a pure Nash equilibrium is hit or the step cap is
/// reached.
pub fn run<R: Rng>(
    game: &OrdinalGame,
    start: VertexId,
    params: &DynamicParams,
    rng: &mut R,
) -> Result<DynamicsTrace> {
    run_inner(game, start, params, rng, None)
}

/// As [`run`], recording the trajectory up to `record_limit` profiles.
pub fn run_recorded<R: Rng>(
    game: &OrdinalGame,
    start: VertexId,
    params: &DynamicParams,
    rng: &mut R,
    record_limit: usize,
) -> Result<DynamicsTrace> {
    run_inner(game, start, params, rng, Some(record_limit))
}

fn run_inner<R: Rng>(
    game: &OrdinalGame,
    start: VertexId,
    params: &DynamicParams,
    rng: &mut R,
    record_limit: Option<usize>,
) -> Result<DynamicsTrace> {
    let mut trajectory = record_limit.map(|limit| {
        let mut t = Vec::with_capacity(limit.min(1024));
        if limit > 0 {
            t.push(start);
        }
        t
    });
    let mut current = start;
    let mut steps = 0u64;
    let absorbed = loop {
        if is_equilibrium(game, current) {
            break true;
        }
        if steps == params.step_cap {
            break false;
        }
        current = step(game, current, params, rng)?;
        steps += 1;
        if let (Some(t), Some(limit)) = (trajectory.as_mut(), record_limit) {
            if t.len() < limit {
                t.push(current);
            }
        }
    };
    debug_assert_eq!(absorbed, is_equilibrium(game, current));
    Ok(DynamicsTrace {
        start,
        steps_taken: steps,
        absorbed,
        absorbing_profile: absorbed.then_some(current),
        trajectory,
    })
}

/// Every line ranks action 0 first, then ascending: a dominant-action game.
/// Acyclic and connected with the all-zeros profile as its unique
/// equilibrium, but not super-connected for any shape.
pub fn construct_dominant_game(shape: &GameShape) -> OrdinalGame {
    OrdinalGame::identity(shape.clone())
}

/// Builds a generic game with a pure Nash equilibrium that is not weakly
/// acyclic. The first two coordinates of the all-zeros region carry a
/// 4-cycle whose vertices win every other incident line, so the cycle can
/// reach nothing outside itself; a profile sharing no line with the cycle is
/// made a sink.
pub fn construct_sticky_game(shape: &GameShape) -> Result<OrdinalGame> {
    if shape.num_players() < 4 {
        return Err(Error::InvalidShape(format!(
            "sticky construction needs at least 4 players, got {}",
            shape.num_players()
        )));
    }
    let mut game = OrdinalGame::identity(shape.clone());
    let pin = |game: &mut OrdinalGame, v: VertexId, player: usize, winner: u32| {
        let line = shape.line_of(v, player);
        let k = shape.actions_of(player);
        let mut ranking = Vec::with_capacity(k as usize);
        ranking.push(winner);
        ranking.extend((0..k).filter(|&a| a != winner));
        game.set_ranking(shape.line_index(line), &ranking)
            .expect("pinned ranking is a permutation");
    };

    // Cycle (0,0) -> (0,1) -> (1,1) -> (1,0) -> (0,0) in the first two
    // coordinates, zeros elsewhere. The identity fill already points every
    // remaining line of a cycle vertex at the vertex itself, and orients two
    // of the four cycle edges; pin the other two.
    let c00: VertexId = 0;
    let c01 = shape.with_digit(c00, 1, 1);
    pin(&mut game, c00, 1, 1);
    pin(&mut game, c01, 0, 1);

    // A sink that shares no line with the cycle: ones in coordinates 2 and 3.
    let vstar = shape.with_digit(shape.with_digit(c00, 2, 1), 3, 1);
    for player in 0..shape.num_players() {
        pin(&mut game, vstar, player, shape.digit(vstar, player));
    }
    Ok(game)
}

/// The four cycle profiles of [`construct_sticky_game`] in cycle order.
pub fn sticky_cycle_vertices(shape: &GameShape) -> [VertexId; 4] {
    let c00: VertexId = 0;
    let c01 = shape.with_digit(c00, 1, 1);
    let c11 = shape.with_digit(c01, 0, 1);
    let c10 = shape.with_digit(c00, 0, 1);
    [c00, c01, c11, c10]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::{is_connected, is_weakly_acyclic, reach_count, sinks};
    use crate::fixtures;
    use crate::game_model::pure_nash_profiles;
    use crate::response_graphs::BestResponseView;
    use crate::sampling::{derive_trial_rng, TrialSeed};

    fn inertia(p: f64, n: usize, cap: u64) -> DynamicParams {
        DynamicParams::uniform_inertia(p, n, cap).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(DynamicParams::new(DynamicKind::BestResponseInertia, vec![0.5], 0).is_err());
        assert!(DynamicParams::new(DynamicKind::BestResponseInertia, vec![1.0], 10).is_err());
        assert!(DynamicParams::new(DynamicKind::BestResponseInertia, vec![0.0], 10).is_err());
        assert!(DynamicParams::new(DynamicKind::BestResponseInertia, vec![], 10).is_err());
        assert!(DynamicParams::new(DynamicKind::OneAtATimeBestResponse, vec![], 10).is_ok());
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let game = fixtures::two_sink_cycle_game();
        let pne = pure_nash_profiles(&game.winner_table());
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 1, trial_index: 0 });
        for kind in [
            DynamicKind::BestResponseInertia,
            DynamicKind::BetterResponseInertia,
            DynamicKind::OneAtATimeBestResponse,
        ] {
            let params = DynamicParams::new(kind, vec![0.7; 3], 1000).unwrap();
            for &eq in &pne {
                let mut current = eq;
                for _ in 0..1000 {
                    current = step(&game, current, &params, &mut rng).unwrap();
                    assert_eq!(current, eq);
                }
            }
        }
    }

    #[test]
    fn run_from_equilibrium_takes_zero_steps() {
        let game = fixtures::two_sink_cycle_game();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 2, trial_index: 0 });
        let params = inertia(0.5, 3, 100);
        let trace = run(&game, 0, &params, &mut rng).unwrap();
        assert!(trace.absorbed);
        assert_eq!(trace.steps_taken, 0);
        assert_eq!(trace.absorbing_profile, Some(0));
    }

    #[test]
    fn update_probability_is_respected() {
        // In the matching-pennies game from (1,1), only player 1 has an
        // improving move, so the frequency of moving estimates p directly.
        let game = fixtures::k2_game_from_winners(
            fixtures::matching_pennies_table().shape().clone(),
            fixtures::matching_pennies_table().winners(),
        );
        let params = DynamicParams::new(
            DynamicKind::BestResponseInertia,
            vec![0.999, 0.999],
            10,
        )
        .unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 3, trial_index: 0 });
        let trials = 20_000;
        let mut moved = 0u32;
        for _ in 0..trials {
            if step(&game, 0, &params, &mut rng).unwrap() != 0 {
                moved += 1;
            }
        }
        let freq = moved as f64 / trials as f64;
        assert!((freq - 0.999).abs() < 0.005, "move frequency {freq}");
    }

    #[test]
    fn dominant_game_always_absorbs() {
        let shape = GameShape::uniform(3, 2).unwrap();
        let game = construct_dominant_game(&shape);
        let params = inertia(0.5, 3, 1000);
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 4, trial_index: 0 });
        for t in 0..10_000 {
            let start = t % shape.vertex_count();
            let trace = run(&game, start, &params, &mut rng).unwrap();
            assert!(trace.absorbed, "run {t} did not absorb");
            assert_eq!(trace.absorbing_profile, Some(0));
        }
    }

    #[test]
    fn sticky_cycle_never_absorbs() {
        let shape = GameShape::uniform(4, 2).unwrap();
        let game = construct_sticky_game(&shape).unwrap();
        let params = inertia(0.5, 4, 10_000);
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 5, trial_index: 0 });
        for &start in &sticky_cycle_vertices(&shape) {
            for _ in 0..25 {
                let trace = run(&game, start, &params, &mut rng).unwrap();
                assert!(!trace.absorbed);
                assert_eq!(trace.steps_taken, 10_000);
            }
        }
    }

    #[test]
    fn sticky_game_classification() {
        let shape = GameShape::uniform(4, 2).unwrap();
        let game = construct_sticky_game(&shape).unwrap();
        let table = game.winner_table();
        let g = BestResponseView::new(&table);
        assert!(!is_weakly_acyclic(&g));
        assert!(!is_connected(&g));
        assert!(!sinks(&g).is_empty());
        for &v in &sticky_cycle_vertices(&shape) {
            assert_eq!(reach_count(&g, v), 4);
        }
        // Works for non-binary shapes too.
        let shape = GameShape::new(&[3, 2, 4, 2, 3]).unwrap();
        let game = construct_sticky_game(&shape).unwrap();
        let table = game.winner_table();
        let g = BestResponseView::new(&table);
        assert!(!is_weakly_acyclic(&g));
        for &v in &sticky_cycle_vertices(&shape) {
            assert_eq!(reach_count(&g, v), 4);
        }
    }

    #[test]
    fn sticky_needs_four_players() {
        let shape = GameShape::uniform(3, 2).unwrap();
        assert!(construct_sticky_game(&shape).is_err());
    }

    #[test]
    fn step_replay_is_deterministic() {
        let game = fixtures::two_sink_cycle_game();
        let params = inertia(0.5, 3, 100);
        for kind in [
            DynamicKind::BestResponseInertia,
            DynamicKind::BetterResponseInertia,
            DynamicKind::OneAtATimeBestResponse,
        ] {
            let params = DynamicParams { kind, ..params.clone() };
            let rng = derive_trial_rng(TrialSeed { master_seed: 6, trial_index: 0 });
            let mut a = rng.clone();
            let mut b = rng;
            for v in game.shape().vertices() {
                assert_eq!(
                    step(&game, v, &params, &mut a).unwrap(),
                    step(&game, v, &params, &mut b).unwrap()
                );
            }
        }
    }

    #[test]
    fn one_at_a_time_moves_single_coordinate() {
        let game = fixtures::two_sink_cycle_game();
        let shape = game.shape().clone();
        let params = DynamicParams::new(DynamicKind::OneAtATimeBestResponse, vec![], 100).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 7, trial_index: 0 });
        for v in shape.vertices() {
            for _ in 0..50 {
                let w = step(&game, v, &params, &mut rng).unwrap();
                let differing = (0..3).filter(|&p| shape.digit(v, p) != shape.digit(w, p)).count();
                assert!(differing <= 1);
            }
        }
    }

    #[test]
    fn better_response_never_moves_down() {
        let shape = GameShape::new(&[3, 4, 3]).unwrap();
        let game = crate::sampling::sample_generic_game(
            &shape,
            &mut derive_trial_rng(TrialSeed { master_seed: 8, trial_index: 0 }),
        );
        let params =
            DynamicParams::new(DynamicKind::BetterResponseInertia, vec![0.6; 3], 100).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 9, trial_index: 0 });
        for v in shape.vertices() {
            for _ in 0..20 {
                let w = step(&game, v, &params, &mut rng).unwrap();
                for p in 0..3 {
                    let line = shape.line_of(v, p);
                    let old = game.rank_of(line, shape.digit(v, p));
                    let new = game.rank_of(line, shape.digit(w, p));
                    assert!(new <= old, "rank worsened on player {p}");
                }
            }
        }
    }

    #[test]
    fn trajectory_recording() {
        let shape = GameShape::uniform(3, 2).unwrap();
        let game = construct_dominant_game(&shape);
        let params = inertia(0.5, 3, 1000);
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 10, trial_index: 0 });
        let trace = run_recorded(&game, 7, &params, &mut rng, 16).unwrap();
        let t = trace.trajectory.clone().unwrap();
        assert_eq!(t[0], 7);
        assert_eq!(t.len() as u64, (trace.steps_taken + 1).min(16));
        if trace.steps_taken + 1 <= 16 {
            assert_eq!(*t.last().unwrap(), trace.absorbing_profile.unwrap());
        }
    }
}
