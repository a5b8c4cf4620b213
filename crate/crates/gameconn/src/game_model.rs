//! Finite ordinal games in normal form.
//!
//! A game shape fixes the player count and per-player action counts. Action
//! profiles are identified with mixed-radix integers (`VertexId`), with the
//! last player as the least-significant digit. A *line* is the set of
//! profiles obtained by varying one player's action while all other
//! coordinates stay fixed; each line carries a strict ranking of that
//! player's actions, and the top entry is the line's unique best response.
//! A game is fully described by its per-line rankings, and the best-response
//! structure by the per-line winners alone.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Mixed-radix index of an action profile.
pub type VertexId = u64;

/// Default upper bound on the number of action profiles in a shape.
pub const DEFAULT_VERTEX_CAP: u64 = 1 << 32;

/// File format tag for serialized games and winner tables.
pub const FORMAT_TAG: &str = "gameconn-v1";

/// Player count and per-player action counts, with precomputed strides for
/// O(1) profile and line arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameShape {
    k: Vec<u32>,
    strides: Vec<u64>,
    vertex_count: u64,
    line_offsets: Vec<u64>,
    line_count: u64,
}

impl GameShape {
    /// Builds a shape under the default vertex cap.
    pub fn new(k: &[u32]) -> Result<Self> {
        Self::with_cap(k, DEFAULT_VERTEX_CAP)
    }

    /// Builds a shape, rejecting anything with more than `cap` profiles.
    pub fn with_cap(k: &[u32], cap: u64) -> Result<Self> {
        if k.len() < 2 {
            return Err(Error::InvalidShape(format!(
                "need at least 2 players, got {}",
                k.len()
            )));
        }
        if let Some(&bad) = k.iter().find(|&&ki| ki < 2) {
            return Err(Error::InvalidShape(format!(
                "every player needs at least 2 actions, got {bad}"
            )));
        }
        let mut vertices: u128 = 1;
        for &ki in k {
            vertices *= ki as u128;
            if vertices > cap as u128 {
                return Err(Error::ShapeTooLarge { vertices, cap });
            }
        }
        let vertex_count = vertices as u64;
        let n = k.len();
        let mut strides = vec![1u64; n];
        for i in (0..n - 1).rev() {
            strides[i] = strides[i + 1] * k[i + 1] as u64;
        }
        let mut line_offsets = Vec::with_capacity(n);
        let mut line_count = 0u64;
        for &ki in k {
            line_offsets.push(line_count);
            line_count += vertex_count / ki as u64;
        }
        Ok(GameShape {
            k: k.to_vec(),
            strides,
            vertex_count,
            line_offsets,
            line_count,
        })
    }

    /// Uniform shape: `n` players with `k` actions each.
    pub fn uniform(n: usize, k: u32) -> Result<Self> {
        Self::new(&vec![k; n])
    }

    pub fn num_players(&self) -> usize {
        self.k.len()
    }

    pub fn actions(&self) -> &[u32] {
        &self.k
    }

    pub fn actions_of(&self, player: usize) -> u32 {
        self.k[player]
    }

    pub fn vertex_count(&self) -> u64 {
        self.vertex_count
    }

    pub fn line_count(&self) -> u64 {
        self.line_count
    }

    pub fn lines_of_player(&self, player: usize) -> u64 {
        self.vertex_count / self.k[player] as u64
    }

    /// Largest action count over all players (`K` in degree bounds).
    pub fn max_actions(&self) -> u32 {
        *self.k.iter().max().expect("non-empty")
    }

    /// Encodes a profile as a mixed-radix integer, player `n-1` least
    /// significant.
    pub fn encode_profile(&self, coords: &[u32]) -> Result<VertexId> {
        if coords.len() != self.k.len() {
            return Err(Error::Format(format!(
                "profile has {} coordinates, shape has {} players",
                coords.len(),
                self.k.len()
            )));
        }
        let mut v = 0u64;
        for (p, (&c, &ki)) in coords.iter().zip(&self.k).enumerate() {
            if c >= ki {
                return Err(Error::InvalidProfile {
                    player: p,
                    value: c,
                    bound: ki,
                });
            }
            v += c as u64 * self.strides[p];
        }
        Ok(v)
    }

    /// Inverse of [`encode_profile`](Self::encode_profile).
    pub fn decode_profile(&self, v: VertexId) -> Vec<u32> {
        debug_assert!(v < self.vertex_count);
        self.k
            .iter()
            .enumerate()
            .map(|(p, &ki)| ((v / self.strides[p]) % ki as u64) as u32)
            .collect()
    }

    /// Action of `player` in profile `v`.
    #[inline]
    pub fn digit(&self, v: VertexId, player: usize) -> u32 {
        ((v / self.strides[player]) % self.k[player] as u64) as u32
    }

    /// Profile `v` with `player`'s action replaced by `action`.
    #[inline]
    pub fn with_digit(&self, v: VertexId, player: usize, action: u32) -> VertexId {
        let s = self.strides[player];
        let delta = (action as u64).wrapping_sub(self.digit(v, player) as u64);
        v.wrapping_add(delta.wrapping_mul(s))
    }

    /// The line through `v` in coordinate `player`.
    #[inline]
    pub fn line_of(&self, v: VertexId, player: usize) -> LineId {
        let s = self.strides[player];
        let kp = self.k[player] as u64;
        let low = v % s;
        let high = v / (s * kp);
        LineId {
            player,
            context: high * s + low,
        }
    }

    /// Global canonical index of a line: ascending player, then ascending
    /// mixed-radix context.
    #[inline]
    pub fn line_index(&self, line: LineId) -> u64 {
        self.line_offsets[line.player] + line.context
    }

    /// Inverse of [`line_index`](Self::line_index).
    pub fn line_from_index(&self, index: u64) -> Result<LineId> {
        if index >= self.line_count {
            return Err(Error::InvalidLine(format!(
                "index {index} out of range 0..{}",
                self.line_count
            )));
        }
        let player = match self.line_offsets.binary_search(&index) {
            Ok(p) => p,
            Err(p) => p - 1,
        };
        Ok(LineId {
            player,
            context: index - self.line_offsets[player],
        })
    }

    /// Vertex on `line` whose varying coordinate is `action`.
    #[inline]
    pub fn line_member(&self, line: LineId, action: u32) -> VertexId {
        let s = self.strides[line.player];
        let kp = self.k[line.player] as u64;
        let low = line.context % s;
        let high = line.context / s;
        high * (kp * s) + action as u64 * s + low
    }

    /// All members of `line`, sorted by the varying coordinate.
    pub fn line_members(&self, line: LineId) -> Result<Vec<VertexId>> {
        self.check_line(line)?;
        Ok((0..self.k[line.player])
            .map(|a| self.line_member(line, a))
            .collect())
    }

    /// Context of `line` as the `n-1` fixed coordinates, in player order.
    pub fn line_context_coords(&self, line: LineId) -> Vec<u32> {
        let member = self.line_member(line, 0);
        let mut coords = self.decode_profile(member);
        coords.remove(line.player);
        coords
    }

    pub fn check_line(&self, line: LineId) -> Result<()> {
        if line.player >= self.k.len() || line.context >= self.lines_of_player(line.player) {
            return Err(Error::InvalidLine(format!(
                "player {} context {}",
                line.player, line.context
            )));
        }
        Ok(())
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertex_count
    }

    pub fn lines(&self) -> impl Iterator<Item = LineId> + '_ {
        (0..self.k.len()).flat_map(move |player| {
            (0..self.lines_of_player(player)).map(move |context| LineId { player, context })
        })
    }
}

/// A line: the owning player plus the mixed-radix encoding of the other
/// players' fixed coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LineId {
    pub player: usize,
    pub context: u64,
}

/// One winning action per line; the sufficient statistic for the
/// best-response graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerTable {
    shape: GameShape,
    winners: Vec<u32>,
}

impl WinnerTable {
    pub fn new(shape: GameShape, winners: Vec<u32>) -> Result<Self> {
        if winners.len() as u64 != shape.line_count() {
            return Err(Error::Format(format!(
                "expected {} winners, got {}",
                shape.line_count(),
                winners.len()
            )));
        }
        for (ix, &w) in winners.iter().enumerate() {
            let line = shape.line_from_index(ix as u64)?;
            if w >= shape.actions_of(line.player) {
                return Err(Error::Format(format!(
                    "winner {w} out of range on line {ix}"
                )));
            }
        }
        Ok(WinnerTable { shape, winners })
    }

    pub fn from_game(game: &OrdinalGame) -> Self {
        let winners = (0..game.shape.line_count())
            .map(|ix| game.ranking_at(ix)[0])
            .collect();
        WinnerTable {
            shape: game.shape.clone(),
            winners,
        }
    }

    pub fn shape(&self) -> &GameShape {
        &self.shape
    }

    #[inline]
    pub fn winner(&self, line: LineId) -> u32 {
        self.winners[self.shape.line_index(line) as usize]
    }

    #[inline]
    pub fn winner_at(&self, line_index: u64) -> u32 {
        self.winners[line_index as usize]
    }

    pub fn winners(&self) -> &[u32] {
        &self.winners
    }

    /// Number of incident lines won by `v` (between 0 and `n`).
    pub fn wins_of(&self, v: VertexId) -> usize {
        (0..self.shape.num_players())
            .filter(|&p| self.winner(self.shape.line_of(v, p)) == self.shape.digit(v, p))
            .count()
    }

    /// True iff `v` wins all of its lines, i.e. is a pure Nash equilibrium.
    #[inline]
    pub fn is_pne(&self, v: VertexId) -> bool {
        (0..self.shape.num_players())
            .all(|p| self.winner(self.shape.line_of(v, p)) == self.shape.digit(v, p))
    }
}

/// A generic ordinal game: one strict ranking (best to worst) per line.
///
/// Rankings are stored flat; line `l` of player `p` occupies the slice of
/// length `k[p]` at a per-player offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalGame {
    shape: GameShape,
    rankings: Vec<u32>,
    ranking_offsets: Vec<u64>,
}

impl OrdinalGame {
    /// Builds a game from per-line rankings in canonical line order. Each
    /// ranking must be a permutation of the owner's actions; ties are not
    /// representable, so the result is generic by construction.
    pub fn from_rankings(shape: GameShape, rankings: Vec<Vec<u32>>) -> Result<Self> {
        if rankings.len() as u64 != shape.line_count() {
            return Err(Error::Format(format!(
                "expected {} rankings, got {}",
                shape.line_count(),
                rankings.len()
            )));
        }
        let mut game = Self::identity(shape);
        for (ix, ranking) in rankings.into_iter().enumerate() {
            game.set_ranking(ix as u64, &ranking)?;
        }
        Ok(game)
    }

    /// Game with every line ranked by the identity permutation, so action 0
    /// is the best response everywhere. Constructors that overwrite every
    /// line also start from this.
    pub fn identity(shape: GameShape) -> Self {
        let offsets = Self::offsets(&shape);
        let last = shape.num_players() - 1;
        let total = *offsets.last().expect("players") as usize
            + (shape.lines_of_player(last) * shape.actions_of(last) as u64) as usize;
        let mut rankings = vec![0u32; total];
        for line in shape.lines() {
            let ix = shape.line_index(line);
            let k = shape.actions_of(line.player);
            let start = Self::slot(&shape, &offsets, ix);
            for (slot, a) in rankings[start..start + k as usize].iter_mut().zip(0..k) {
                *slot = a;
            }
        }
        OrdinalGame {
            shape,
            rankings,
            ranking_offsets: offsets,
        }
    }

    fn offsets(shape: &GameShape) -> Vec<u64> {
        let mut offsets = Vec::with_capacity(shape.num_players());
        let mut acc = 0u64;
        for p in 0..shape.num_players() {
            offsets.push(acc);
            acc += shape.lines_of_player(p) * shape.actions_of(p) as u64;
        }
        offsets
    }

    #[inline]
    fn slot(shape: &GameShape, offsets: &[u64], line_index: u64) -> usize {
        let line = shape
            .line_from_index(line_index)
            .expect("line index in range");
        (offsets[line.player] + line.context * shape.actions_of(line.player) as u64) as usize
    }

    /// Overwrites one line's ranking, validating that it is a permutation.
    pub fn set_ranking(&mut self, line_index: u64, ranking: &[u32]) -> Result<()> {
        let line = self.shape.line_from_index(line_index)?;
        let k = self.shape.actions_of(line.player);
        let mut seen = vec![false; k as usize];
        if ranking.len() != k as usize {
            return Err(Error::InvalidRanking {
                line: line_index,
                arity: k,
            });
        }
        for &a in ranking {
            if a >= k || seen[a as usize] {
                return Err(Error::InvalidRanking {
                    line: line_index,
                    arity: k,
                });
            }
            seen[a as usize] = true;
        }
        let start = Self::slot(&self.shape, &self.ranking_offsets, line_index);
        self.rankings[start..start + k as usize].copy_from_slice(ranking);
        Ok(())
    }

    pub fn shape(&self) -> &GameShape {
        &self.shape
    }

    #[inline]
    pub fn ranking_at(&self, line_index: u64) -> &[u32] {
        let line = self
            .shape
            .line_from_index(line_index)
            .expect("line index in range");
        let k = self.shape.actions_of(line.player) as usize;
        let start =
            (self.ranking_offsets[line.player] + line.context * k as u64) as usize;
        &self.rankings[start..start + k]
    }

    pub fn ranking(&self, line: LineId) -> Result<&[u32]> {
        self.shape.check_line(line)?;
        Ok(self.ranking_at(self.shape.line_index(line)))
    }

    /// The unique best response on `line` (top of its ranking).
    pub fn best_response(&self, line: LineId) -> Result<u32> {
        Ok(self.ranking(line)?[0])
    }

    #[inline]
    pub fn winner(&self, line: LineId) -> u32 {
        self.ranking_at(self.shape.line_index(line))[0]
    }

    /// Rank of `action` on `line`: 0 is best. Linear in the action count.
    #[inline]
    pub fn rank_of(&self, line: LineId, action: u32) -> u32 {
        let r = self.ranking_at(self.shape.line_index(line));
        r.iter().position(|&a| a == action).expect("valid action") as u32
    }

    pub fn winner_table(&self) -> WinnerTable {
        WinnerTable::from_game(self)
    }
}

/// Profiles that win all `n` of their lines; equivalently the sinks of the
/// best-response graph.
pub fn pure_nash_profiles(table: &WinnerTable) -> Vec<VertexId> {
    table
        .shape()
        .vertices()
        .filter(|&v| table.is_pne(v))
        .collect()
}

pub fn count_pne(table: &WinnerTable) -> u64 {
    table.shape().vertices().filter(|&v| table.is_pne(v)).count() as u64
}

// --- JSON game format ------------------------------------------------------
//
// Human-readable output is 1-based: players, actions, and contexts are all
// shifted up by one relative to the internal representation. Lines appear in
// canonical order and the order is validated on parse.

#[derive(Serialize, Deserialize)]
struct LineJson {
    player: usize,
    context: Vec<u32>,
    ranking: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    format: String,
    n: usize,
    k: Vec<u32>,
    lines: Vec<LineJson>,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    format: String,
    n: usize,
    k: Vec<u32>,
    winners: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GameFileJson {
    Game(GameJson),
    Table(TableJson),
}

/// Either payload of a `gameconn-v1` file.
pub enum GameFile {
    Game(OrdinalGame),
    Table(WinnerTable),
}

impl GameFile {
    pub fn winner_table(&self) -> WinnerTable {
        match self {
            GameFile::Game(g) => g.winner_table(),
            GameFile::Table(t) => t.clone(),
        }
    }

    pub fn game(&self) -> Option<&OrdinalGame> {
        match self {
            GameFile::Game(g) => Some(g),
            GameFile::Table(_) => None,
        }
    }
}

pub fn game_to_json(game: &OrdinalGame) -> String {
    let shape = game.shape();
    let lines = shape
        .lines()
        .map(|line| LineJson {
            player: line.player + 1,
            context: shape
                .line_context_coords(line)
                .iter()
                .map(|c| c + 1)
                .collect(),
            ranking: game
                .ranking(line)
                .expect("canonical line")
                .iter()
                .map(|a| a + 1)
                .collect(),
        })
        .collect();
    let doc = GameJson {
        format: FORMAT_TAG.to_string(),
        n: shape.num_players(),
        k: shape.actions().to_vec(),
        lines,
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn table_to_json(table: &WinnerTable) -> String {
    let doc = TableJson {
        format: FORMAT_TAG.to_string(),
        n: table.shape().num_players(),
        k: table.shape().actions().to_vec(),
        winners: table.winners().iter().map(|w| w + 1).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn game_from_json(text: &str) -> Result<GameFile> {
    let doc: GameFileJson = serde_json::from_str(text)?;
    match doc {
        GameFileJson::Game(g) => {
            check_header(&g.format, g.n, &g.k)?;
            let shape = GameShape::new(&g.k)?;
            if g.lines.len() as u64 != shape.line_count() {
                return Err(Error::Format(format!(
                    "expected {} lines, got {}",
                    shape.line_count(),
                    g.lines.len()
                )));
            }
            let mut game = OrdinalGame::identity(shape.clone());
            for (ix, line_json) in g.lines.iter().enumerate() {
                let line = shape.line_from_index(ix as u64)?;
                let expect_context: Vec<u32> = shape
                    .line_context_coords(line)
                    .iter()
                    .map(|c| c + 1)
                    .collect();
                if line_json.player != line.player + 1 || line_json.context != expect_context {
                    return Err(Error::Format(format!(
                        "line {ix} out of canonical order"
                    )));
                }
                let ranking: Vec<u32> = line_json
                    .ranking
                    .iter()
                    .map(|&a| a.checked_sub(1).ok_or(Error::InvalidRanking {
                        line: ix as u64,
                        arity: shape.actions_of(line.player),
                    }))
                    .collect::<Result<_>>()?;
                game.set_ranking(ix as u64, &ranking)?;
            }
            Ok(GameFile::Game(game))
        }
        GameFileJson::Table(t) => {
            check_header(&t.format, t.n, &t.k)?;
            let shape = GameShape::new(&t.k)?;
            let winners: Vec<u32> = t
                .winners
                .iter()
                .map(|&w| {
                    w.checked_sub(1)
                        .ok_or_else(|| Error::Format("winner index 0 in 1-based file".into()))
                })
                .collect::<Result<_>>()?;
            Ok(GameFile::Table(WinnerTable::new(shape, winners)?))
        }
    }
}

fn check_header(format: &str, n: usize, k: &[u32]) -> Result<()> {
    if format != FORMAT_TAG {
        return Err(Error::Format(format!(
            "unsupported format tag {format:?}, expected {FORMAT_TAG:?}"
        )));
    }
    if k.len() != n {
        return Err(Error::Format(format!(
            "n is {n} but k lists {} players",
            k.len()
        )));
    }
    Ok(())
}
