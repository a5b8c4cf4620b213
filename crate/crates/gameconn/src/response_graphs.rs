//! Best- and better-response digraphs over action profiles.
//!
//! Two storage modes: explicit compressed-sparse adjacency (forward and
//! reverse) for repeated traversal of small graphs, and an implicit view
//! that answers neighbor queries straight from a winner table, which is what
//! makes large shapes tractable (memory is one action index per line).
//!
//! Within a line with winner `w`, the best-response graph has the star of
//! `k-1` edges into `w`; the better-response graph has the transitive
//! tournament induced by the line's ranking. Neighbor iteration order is
//! fixed: coordinate ascending, then action ascending.

use crate::error::{Error, Result};
use crate::game_model::{GameShape, OrdinalGame, VertexId, WinnerTable};

/// Default vertex cap for explicit best-response storage.
pub const DEFAULT_EXPLICIT_VERTEX_CAP: u64 = 1 << 22;
/// Default vertex cap for (always explicit) better-response graphs.
pub const DEFAULT_BETTER_VERTEX_CAP: u64 = 1 << 20;
/// Largest graph the DOT exporter will render.
pub const DOT_VERTEX_CAP: u64 = 1 << 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    BestResponse,
    BetterResponse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageMode {
    /// Explicit when the shape fits the cap, implicit otherwise.
    Auto,
    Explicit,
    Implicit,
}

/// Minimal digraph interface used by every traversal in this crate.
///
/// Out-arcs are exposed through indexed slots so depth-first searches can
/// suspend and resume without per-vertex allocation; a slot may be empty.
pub trait Digraph {
    fn vertex_count(&self) -> u64;

    /// Number of indexed out-arc slots of `v` (occupied or not).
    fn out_arc_bound(&self, v: VertexId) -> u32;

    /// Target of out-arc slot `i` of `v`, if occupied.
    fn out_arc(&self, v: VertexId, i: u32) -> Option<VertexId>;

    fn for_each_out<F: FnMut(VertexId)>(&self, v: VertexId, mut f: F) {
        for i in 0..self.out_arc_bound(v) {
            if let Some(w) = self.out_arc(v, i) {
                f(w);
            }
        }
    }

    fn for_each_in<F: FnMut(VertexId)>(&self, v: VertexId, f: F);

    fn out_degree(&self, v: VertexId) -> u64 {
        let mut d = 0;
        self.for_each_out(v, |_| d += 1);
        d
    }

    fn in_degree(&self, v: VertexId) -> u64 {
        let mut d = 0;
        self.for_each_in(v, |_| d += 1);
        d
    }

    fn is_sink(&self, v: VertexId) -> bool {
        self.out_degree(v) == 0
    }

    fn is_source(&self, v: VertexId) -> bool {
        self.in_degree(v) == 0
    }

    fn edge_count(&self) -> u64 {
        (0..self.vertex_count()).map(|v| self.out_degree(v)).sum()
    }
}

/// Implicit best-response digraph backed by a winner table.
#[derive(Debug, Clone)]
pub struct BestResponseView<'a> {
    table: &'a WinnerTable,
}

impl<'a> BestResponseView<'a> {
    pub fn new(table: &'a WinnerTable) -> Self {
        BestResponseView { table }
    }

    pub fn shape(&self) -> &GameShape {
        self.table.shape()
    }
}

impl Digraph for BestResponseView<'_> {
    fn vertex_count(&self) -> u64 {
        self.shape().vertex_count()
    }

    #[inline]
    fn out_arc_bound(&self, _v: VertexId) -> u32 {
        self.shape().num_players() as u32
    }

    #[inline]
    fn out_arc(&self, v: VertexId, i: u32) -> Option<VertexId> {
        let shape = self.shape();
        let p = i as usize;
        let w = self.table.winner(shape.line_of(v, p));
        if w == shape.digit(v, p) {
            None
        } else {
            Some(shape.with_digit(v, p, w))
        }
    }

    fn for_each_in<F: FnMut(VertexId)>(&self, v: VertexId, mut f: F) {
        let shape = self.shape();
        for p in 0..shape.num_players() {
            let digit = shape.digit(v, p);
            if self.table.winner(shape.line_of(v, p)) == digit {
                for a in 0..shape.actions_of(p) {
                    if a != digit {
                        f(shape.with_digit(v, p, a));
                    }
                }
            }
        }
    }

    fn is_sink(&self, v: VertexId) -> bool {
        self.table.is_pne(v)
    }

    fn is_source(&self, v: VertexId) -> bool {
        // A vertex has in-edges exactly on the lines it wins.
        self.table.wins_of(v) == 0
    }

    fn out_degree(&self, v: VertexId) -> u64 {
        (self.shape().num_players() - self.table.wins_of(v)) as u64
    }

    fn in_degree(&self, v: VertexId) -> u64 {
        let shape = self.shape();
        (0..shape.num_players())
            .filter(|&p| self.table.winner(shape.line_of(v, p)) == shape.digit(v, p))
            .map(|p| shape.actions_of(p) as u64 - 1)
            .sum()
    }
}

/// Compressed-sparse adjacency, forward and reverse.
#[derive(Debug, Clone)]
pub struct ExplicitGraph {
    shape: GameShape,
    flavor: Flavor,
    fwd_offsets: Vec<u64>,
    fwd_targets: Vec<u32>,
    rev_offsets: Vec<u64>,
    rev_sources: Vec<u32>,
}

impl ExplicitGraph {
    fn from_edges(shape: GameShape, flavor: Flavor, edges: &[(u32, u32)]) -> Self {
        let n = shape.vertex_count() as usize;
        let (fwd_offsets, fwd_targets) = csr(n, edges.iter().map(|&(u, v)| (u, v)));
        let (rev_offsets, rev_sources) = csr(n, edges.iter().map(|&(u, v)| (v, u)));
        ExplicitGraph {
            shape,
            flavor,
            fwd_offsets,
            fwd_targets,
            rev_offsets,
            rev_sources,
        }
    }

    pub fn shape(&self) -> &GameShape {
        &self.shape
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    #[inline]
    pub fn out_slice(&self, v: VertexId) -> &[u32] {
        &self.fwd_targets[self.fwd_offsets[v as usize] as usize..self.fwd_offsets[v as usize + 1] as usize]
    }

    #[inline]
    pub fn in_slice(&self, v: VertexId) -> &[u32] {
        &self.rev_sources[self.rev_offsets[v as usize] as usize..self.rev_offsets[v as usize + 1] as usize]
    }
}

/// Counting-sort CSR build; stable, so per-source order follows insertion
/// order of `edges`.
fn csr(n: usize, edges: impl Iterator<Item = (u32, u32)> + Clone) -> (Vec<u64>, Vec<u32>) {
    let mut offsets = vec![0u64; n + 1];
    for (u, _) in edges.clone() {
        offsets[u as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0u32; offsets[n] as usize];
    for (u, v) in edges {
        targets[cursor[u as usize] as usize] = v;
        cursor[u as usize] += 1;
    }
    (offsets, targets)
}

impl Digraph for ExplicitGraph {
    fn vertex_count(&self) -> u64 {
        self.shape.vertex_count()
    }

    #[inline]
    fn out_arc_bound(&self, v: VertexId) -> u32 {
        (self.fwd_offsets[v as usize + 1] - self.fwd_offsets[v as usize]) as u32
    }

    #[inline]
    fn out_arc(&self, v: VertexId, i: u32) -> Option<VertexId> {
        Some(self.fwd_targets[self.fwd_offsets[v as usize] as usize + i as usize] as VertexId)
    }

    fn for_each_out<F: FnMut(VertexId)>(&self, v: VertexId, mut f: F) {
        for &w in self.out_slice(v) {
            f(w as VertexId);
        }
    }

    fn for_each_in<F: FnMut(VertexId)>(&self, v: VertexId, mut f: F) {
        for &u in self.in_slice(v) {
            f(u as VertexId);
        }
    }

    fn out_degree(&self, v: VertexId) -> u64 {
        self.fwd_offsets[v as usize + 1] - self.fwd_offsets[v as usize]
    }

    fn in_degree(&self, v: VertexId) -> u64 {
        self.rev_offsets[v as usize + 1] - self.rev_offsets[v as usize]
    }

    fn edge_count(&self) -> u64 {
        self.fwd_targets.len() as u64
    }
}

/// A materialized response graph in either storage mode.
#[derive(Debug, Clone)]
pub enum ResponseGraph {
    Explicit(ExplicitGraph),
    /// Implicit best-response graph; owns its winner table.
    ImplicitBest(WinnerTable),
}

impl ResponseGraph {
    pub fn shape(&self) -> &GameShape {
        match self {
            ResponseGraph::Explicit(g) => g.shape(),
            ResponseGraph::ImplicitBest(t) => t.shape(),
        }
    }

    pub fn flavor(&self) -> Flavor {
        match self {
            ResponseGraph::Explicit(g) => g.flavor(),
            ResponseGraph::ImplicitBest(_) => Flavor::BestResponse,
        }
    }

    pub fn out_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        self.for_each_out(v, |w| out.push(w));
        out
    }

    pub fn in_neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        self.for_each_in(v, |w| out.push(w));
        out
    }
}

impl Digraph for ResponseGraph {
    fn vertex_count(&self) -> u64 {
        self.shape().vertex_count()
    }

    fn out_arc_bound(&self, v: VertexId) -> u32 {
        match self {
            ResponseGraph::Explicit(g) => g.out_arc_bound(v),
            ResponseGraph::ImplicitBest(t) => BestResponseView::new(t).out_arc_bound(v),
        }
    }

    fn out_arc(&self, v: VertexId, i: u32) -> Option<VertexId> {
        match self {
            ResponseGraph::Explicit(g) => g.out_arc(v, i),
            ResponseGraph::ImplicitBest(t) => BestResponseView::new(t).out_arc(v, i),
        }
    }

    fn for_each_out<F: FnMut(VertexId)>(&self, v: VertexId, f: F) {
        match self {
            ResponseGraph::Explicit(g) => g.for_each_out(v, f),
            ResponseGraph::ImplicitBest(t) => BestResponseView::new(t).for_each_out(v, f),
        }
    }

    fn for_each_in<F: FnMut(VertexId)>(&self, v: VertexId, f: F) {
        match self {
            ResponseGraph::Explicit(g) => g.for_each_in(v, f),
            ResponseGraph::ImplicitBest(t) => BestResponseView::new(t).for_each_in(v, f),
        }
    }

    fn out_degree(&self, v: VertexId) -> u64 {
        match self {
            ResponseGraph::Explicit(g) => g.out_degree(v),
            ResponseGraph::ImplicitBest(t) => BestResponseView::new(t).out_degree(v),
        }
    }

    fn in_degree(&self, v: VertexId) -> u64 {
        match self {
            ResponseGraph::Explicit(g) => g.in_degree(v),
            ResponseGraph::ImplicitBest(t) => BestResponseView::new(t).in_degree(v),
        }
    }

    fn is_sink(&self, v: VertexId) -> bool {
        match self {
            ResponseGraph::Explicit(g) => g.is_sink(v),
            ResponseGraph::ImplicitBest(t) => t.is_pne(v),
        }
    }

    fn is_source(&self, v: VertexId) -> bool {
        match self {
            ResponseGraph::Explicit(g) => g.is_source(v),
            ResponseGraph::ImplicitBest(t) => BestResponseView::new(t).is_source(v),
        }
    }
}

/// Builds the best-response graph of a winner table under the default caps.
pub fn build_best_response_graph(table: &WinnerTable, mode: StorageMode) -> Result<ResponseGraph> {
    build_best_response_graph_capped(table, mode, DEFAULT_EXPLICIT_VERTEX_CAP)
}

pub fn build_best_response_graph_capped(
    table: &WinnerTable,
    mode: StorageMode,
    explicit_cap: u64,
) -> Result<ResponseGraph> {
    let shape = table.shape();
    let vertices = shape.vertex_count();
    let explicit = match mode {
        StorageMode::Explicit => {
            if vertices > explicit_cap {
                return Err(Error::UseImplicit { vertices, cap: explicit_cap });
            }
            true
        }
        StorageMode::Auto => vertices <= explicit_cap,
        StorageMode::Implicit => false,
    };
    if !explicit {
        return Ok(ResponseGraph::ImplicitBest(table.clone()));
    }
    let mut edges = Vec::with_capacity(best_response_edge_count(shape) as usize);
    for line in shape.lines() {
        let w = table.winner(line);
        let target = shape.line_member(line, w) as u32;
        for a in 0..shape.actions_of(line.player) {
            if a != w {
                edges.push((shape.line_member(line, a) as u32, target));
            }
        }
    }
    Ok(ResponseGraph::Explicit(ExplicitGraph::from_edges(
        shape.clone(),
        Flavor::BestResponse,
        &edges,
    )))
}

/// Builds the better-response graph of a game. Always explicit; the per-line
/// edge count is quadratic in the action count, so a vertex cap applies.
pub fn build_better_response_graph(game: &OrdinalGame, mode: StorageMode) -> Result<ResponseGraph> {
    build_better_response_graph_capped(game, mode, DEFAULT_BETTER_VERTEX_CAP)
}

pub fn build_better_response_graph_capped(
    game: &OrdinalGame,
    mode: StorageMode,
    cap: u64,
) -> Result<ResponseGraph> {
    if mode == StorageMode::Implicit {
        return Err(Error::InvalidParams(
            "better-response graphs are only built explicitly".into(),
        ));
    }
    let shape = game.shape();
    let vertices = shape.vertex_count();
    if vertices > cap {
        return Err(Error::UseImplicit { vertices, cap });
    }
    let mut rank = Vec::new();
    let mut edges = Vec::new();
    for line in shape.lines() {
        let k = shape.actions_of(line.player);
        let ranking = game.ranking(line).expect("canonical line");
        rank.clear();
        rank.resize(k as usize, 0u32);
        for (pos, &a) in ranking.iter().enumerate() {
            rank[a as usize] = pos as u32;
        }
        for a in 0..k {
            let va = shape.line_member(line, a) as u32;
            for b in 0..k {
                if rank[b as usize] < rank[a as usize] {
                    edges.push((va, shape.line_member(line, b) as u32));
                }
            }
        }
    }
    Ok(ResponseGraph::Explicit(ExplicitGraph::from_edges(
        shape.clone(),
        Flavor::BetterResponse,
        &edges,
    )))
}

/// Exact edge count of any best-response graph on `shape`.
pub fn best_response_edge_count(shape: &GameShape) -> u64 {
    (0..shape.num_players())
        .map(|p| shape.lines_of_player(p) * (shape.actions_of(p) as u64 - 1))
        .sum()
}

/// DOT rendering of a small graph for documentation figures.
pub fn to_dot(graph: &ResponseGraph) -> Result<String> {
    let shape = graph.shape();
    if shape.vertex_count() > DOT_VERTEX_CAP {
        return Err(Error::SizeExceeded {
            vertices: shape.vertex_count(),
            limit: DOT_VERTEX_CAP,
        });
    }
    let label = |v: VertexId| {
        shape
            .decode_profile(v)
            .iter()
            .map(|c| (c + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut dot = String::from("digraph response {\n  rankdir=LR;\n");
    for v in shape.vertices() {
        dot.push_str(&format!("  v{v} [label=\"{}\"];\n", label(v)));
    }
    for v in shape.vertices() {
        graph.for_each_out(v, |w| {
            dot.push_str(&format!("  v{v} -> v{w};\n"));
        });
    }
    dot.push_str("}\n");
    Ok(dot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sampling::{derive_trial_rng, sample_generic_game, sample_winner_table, TrialSeed};

    fn sorted_out(g: &ResponseGraph, v: VertexId) -> Vec<VertexId> {
        let mut out = g.out_neighbors(v);
        out.sort_unstable();
        out
    }

    #[test]
    fn fixture_graph_matches_drawing() {
        // Two sinks, a 6-cycle on the rest, and 12 edges: one per line.
        let game = fixtures::two_sink_cycle_game();
        let table = game.winner_table();
        let g = build_best_response_graph(&table, StorageMode::Explicit).unwrap();
        assert_eq!(g.edge_count(), 12);
        let shape = g.shape().clone();
        let enc = |c: &[u32]| shape.encode_profile(c).unwrap();
        assert!(g.is_sink(enc(&[0, 0, 0])));
        assert!(g.is_sink(enc(&[1, 1, 1])));
        assert_eq!(
            sorted_out(&g, enc(&[1, 0, 0])),
            vec![enc(&[0, 0, 0]), enc(&[1, 1, 0])]
        );
        // Sink vertices have empty out-iterators.
        assert!(g.out_neighbors(enc(&[0, 0, 0])).is_empty());
    }

    #[test]
    fn dominant_2x2_edges() {
        let game = OrdinalGame::identity(GameShape::new(&[2, 2]).unwrap());
        let g = build_best_response_graph(&game.winner_table(), StorageMode::Explicit).unwrap();
        // Only (1,.) -> (0,.) and (.,1) -> (.,0).
        let mut edges = Vec::new();
        for v in g.shape().vertices() {
            g.for_each_out(v, |w| edges.push((v, w)));
        }
        edges.sort_unstable();
        assert_eq!(edges, vec![(1, 0), (2, 0), (3, 1), (3, 2)]);
    }

    #[test]
    fn edge_count_constant_over_tables() {
        let shape = GameShape::uniform(3, 2).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 1, trial_index: 0 });
        for _ in 0..50 {
            let t = sample_winner_table(&shape, &mut rng);
            let g = build_best_response_graph(&t, StorageMode::Explicit).unwrap();
            assert_eq!(g.edge_count(), 12);
            assert_eq!(best_response_edge_count(&shape), 12);
        }
    }

    #[test]
    fn better_response_is_line_tournament() {
        let shape = GameShape::new(&[3, 3]).unwrap();
        let mut game = OrdinalGame::identity(shape.clone());
        // Line 0 of player 0 ranked [2,0,1].
        game.set_ranking(0, &[2, 0, 1]).unwrap();
        let g = build_better_response_graph(&game, StorageMode::Auto).unwrap();
        let line = crate::game_model::LineId { player: 0, context: 0 };
        let m: Vec<VertexId> = shape.line_members(line).unwrap();
        // Expected within-line edges: 1->0, 1->2, 0->2 (by action index).
        let within = |a: usize| -> Vec<VertexId> {
            g.out_neighbors(m[a])
                .into_iter()
                .filter(|w| m.contains(w))
                .collect()
        };
        assert_eq!(within(2), Vec::<VertexId>::new());
        let mut from1 = within(1);
        from1.sort_unstable();
        assert_eq!(from1, vec![m[0], m[2]]);
        assert_eq!(within(0), vec![m[2]]);
    }

    #[test]
    fn two_actions_better_equals_best() {
        let shape = GameShape::uniform(4, 2).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 2, trial_index: 0 });
        for _ in 0..20 {
            let game = sample_generic_game(&shape, &mut rng);
            let best =
                build_best_response_graph(&game.winner_table(), StorageMode::Explicit).unwrap();
            let better = build_better_response_graph(&game, StorageMode::Auto).unwrap();
            for v in shape.vertices() {
                assert_eq!(sorted_out(&best, v), sorted_out(&better, v));
            }
        }
    }

    #[test]
    fn better_sinks_equal_best_sinks() {
        let shape = GameShape::uniform(4, 3).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 3, trial_index: 0 });
        for _ in 0..200 {
            let game = sample_generic_game(&shape, &mut rng);
            let table = game.winner_table();
            let better = build_better_response_graph(&game, StorageMode::Auto).unwrap();
            for v in shape.vertices() {
                assert_eq!(better.is_sink(v), table.is_pne(v));
            }
        }
    }

    #[test]
    fn implicit_explicit_agree() {
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 4, trial_index: 0 });
        for _ in 0..100 {
            let shape = GameShape::new(&[3, 2, 4]).unwrap();
            let t = sample_winner_table(&shape, &mut rng);
            let exp = build_best_response_graph(&t, StorageMode::Explicit).unwrap();
            let imp = build_best_response_graph(&t, StorageMode::Implicit).unwrap();
            for v in shape.vertices() {
                assert_eq!(exp.out_neighbors(v), imp.out_neighbors(v));
                assert_eq!(exp.in_neighbors(v), imp.in_neighbors(v));
                assert_eq!(exp.is_sink(v), imp.is_sink(v));
                assert_eq!(exp.is_source(v), imp.is_source(v));
            }
        }
    }

    #[test]
    fn star_per_line_invariant() {
        let shape = GameShape::new(&[2, 3, 3]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 5, trial_index: 0 });
        for _ in 0..50 {
            let t = sample_winner_table(&shape, &mut rng);
            let g = build_best_response_graph(&t, StorageMode::Explicit).unwrap();
            for line in shape.lines() {
                let members = shape.line_members(line).unwrap();
                let no_out_within: Vec<_> = members
                    .iter()
                    .filter(|&&m| {
                        !g.out_neighbors(m).iter().any(|w| members.contains(w))
                    })
                    .collect();
                assert_eq!(no_out_within.len(), 1);
                assert_eq!(*no_out_within[0], shape.line_member(line, t.winner(line)));
            }
        }
    }

    #[test]
    fn reverse_adjacency_is_transpose() {
        let shape = GameShape::new(&[3, 3, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 6, trial_index: 0 });
        let t = sample_winner_table(&shape, &mut rng);
        for g in [
            build_best_response_graph(&t, StorageMode::Explicit).unwrap(),
            build_best_response_graph(&t, StorageMode::Implicit).unwrap(),
        ] {
            for u in shape.vertices() {
                for w in g.out_neighbors(u) {
                    assert!(g.in_neighbors(w).contains(&u));
                }
                for w in g.in_neighbors(u) {
                    assert!(g.out_neighbors(w).contains(&u));
                }
            }
        }
    }

    #[test]
    fn best_subgraph_of_better_exhaustive_2x2() {
        let shape = GameShape::new(&[2, 2]).unwrap();
        for mask in 0..16u32 {
            let rankings: Vec<Vec<u32>> = (0..4)
                .map(|l| if mask >> l & 1 == 1 { vec![1, 0] } else { vec![0, 1] })
                .collect();
            let game = OrdinalGame::from_rankings(shape.clone(), rankings).unwrap();
            let best =
                build_best_response_graph(&game.winner_table(), StorageMode::Explicit).unwrap();
            let better = build_better_response_graph(&game, StorageMode::Auto).unwrap();
            for v in shape.vertices() {
                let sup = better.out_neighbors(v);
                for w in best.out_neighbors(v) {
                    assert!(sup.contains(&w));
                }
            }
        }
    }

    #[test]
    fn explicit_cap_enforced() {
        let shape = GameShape::uniform(3, 2).unwrap();
        let t = sample_winner_table(
            &shape,
            &mut derive_trial_rng(TrialSeed { master_seed: 7, trial_index: 0 }),
        );
        let err = build_best_response_graph_capped(&t, StorageMode::Explicit, 4);
        assert!(matches!(err, Err(Error::UseImplicit { .. })));
        // Auto falls back to implicit instead of failing.
        let g = build_best_response_graph_capped(&t, StorageMode::Auto, 4).unwrap();
        assert!(matches!(g, ResponseGraph::ImplicitBest(_)));
    }

    #[test]
    fn dot_export() {
        let game = fixtures::two_sink_cycle_game();
        let g = build_best_response_graph(&game.winner_table(), StorageMode::Explicit).unwrap();
        let dot = to_dot(&g).unwrap();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches(" -> ").count(), 12);
        assert!(dot.contains("\"1,1,1\""));
    }
}
