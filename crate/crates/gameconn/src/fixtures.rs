//! Small hand-built reference games used across the test suite and docs.

use crate::game_model::{GameShape, OrdinalGame, WinnerTable};

/// The showcase 3-player 2-action game: its best-response graph has two
/// sinks at (1,1,1) and (2,2,2) while the six remaining profiles form a
/// directed 6-cycle, each with one extra edge into a sink. Super-connected
/// (hence connected and weakly acyclic) but not acyclic.
///
/// Also shipped as `fixtures/two_sink_cycle.json`.
pub fn two_sink_cycle_game() -> OrdinalGame {
    let shape = GameShape::uniform(3, 2).expect("valid shape");
    k2_game_from_winners(
        shape,
        &[
            0, 1, 0, 1, // player 0, contexts (a2,a3) in (1,1),(1,2),(2,1),(2,2) order
            0, 0, 1, 1, // player 1
            0, 1, 0, 1, // player 2
        ],
    )
}

/// 3-player 2-action winner table whose best-response graph is acyclic with
/// two sinks but not super-connected: the profile (2,1,2) reaches only one
/// of the sinks, so it cannot reach every non-source.
pub fn acyclic_not_super_table() -> WinnerTable {
    let shape = GameShape::uniform(3, 2).expect("valid shape");
    WinnerTable::new(shape, vec![0, 0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 0]).expect("valid winners")
}

/// Vertex of [`acyclic_not_super_table`] that cannot reach every non-source.
pub fn acyclic_not_super_witness() -> u64 {
    let shape = GameShape::uniform(3, 2).expect("valid shape");
    shape.encode_profile(&[1, 0, 1]).expect("valid profile")
}

/// 2x2 table whose best-response graph is the directed 4-cycle: no sinks,
/// no sources, no pure Nash equilibrium.
pub fn matching_pennies_table() -> WinnerTable {
    let shape = GameShape::new(&[2, 2]).expect("valid shape");
    WinnerTable::new(shape, vec![0, 1, 1, 0]).expect("valid winners")
}

/// 2x2 table with both diagonal profiles as sinks; each off-diagonal source
/// points to both sinks. One of the two super-connected tables at this shape.
pub fn diagonal_two_sink_table() -> WinnerTable {
    let shape = GameShape::new(&[2, 2]).expect("valid shape");
    WinnerTable::new(shape, vec![0, 1, 0, 1]).expect("valid winners")
}

/// Builds the 2-action game whose ranking on each line puts the given winner
/// first; with two actions per player the winner table determines the game.
pub fn k2_game_from_winners(shape: GameShape, winners: &[u32]) -> OrdinalGame {
    let mut game = OrdinalGame::identity(shape);
    for (ix, &w) in winners.iter().enumerate() {
        game.set_ranking(ix as u64, &[w, 1 - w]).expect("valid ranking");
    }
    game
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::pure_nash_profiles;

    #[test]
    fn two_sink_cycle_has_expected_equilibria() {
        let game = two_sink_cycle_game();
        let shape = game.shape().clone();
        let pne = pure_nash_profiles(&game.winner_table());
        assert_eq!(
            pne,
            vec![
                shape.encode_profile(&[0, 0, 0]).unwrap(),
                shape.encode_profile(&[1, 1, 1]).unwrap()
            ]
        );
    }

    #[test]
    fn acyclic_fixture_has_two_sinks() {
        let table = acyclic_not_super_table();
        assert_eq!(pure_nash_profiles(&table).len(), 2);
    }

    #[test]
    fn matching_pennies_has_no_equilibrium() {
        assert!(pure_nash_profiles(&matching_pennies_table()).is_empty());
    }
}
