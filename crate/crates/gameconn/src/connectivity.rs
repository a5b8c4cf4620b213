//! Connectivity classification of response graphs.
//!
//! All predicates run in linear time via an iterative strongly-connected-
//! component pass plus a handful of breadth-first traversals:
//!
//! * acyclic: every component is a singleton (response graphs have no
//!   self-loops);
//! * weakly acyclic: every terminal component of the condensation is a
//!   singleton sink;
//! * connected: a sink exists and the backward-reachable set of every sink
//!   covers all non-sinks;
//! * super-connected: a sink exists and every non-sink reaches every
//!   non-source, checked through a structural reduction (below) instead of
//!   all-pairs reachability.
//!
//! Super-connectivity reduction: any two vertices that are both non-source
//! and non-sink must reach each other, so they all lie in one strongly
//! connected component `G*`. The check becomes (i) a sink exists, (ii) all
//! non-source non-sinks share one component, (iii) every source non-sink
//! reaches `G*` (one backward traversal), (iv) `G*` reaches every non-source
//! sink (one forward traversal). When no non-source non-sink exists, every
//! non-source is a sink and one backward traversal per non-source sink
//! settles it.

use crate::error::{Error, Result};
use crate::game_model::{OrdinalGame, VertexId, WinnerTable};
use crate::response_graphs::{
    build_better_response_graph_capped, BestResponseView, Digraph, StorageMode,
    DEFAULT_BETTER_VERTEX_CAP,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Vertex budget for whole-graph reachability profiles (bitset closure).
pub const REACH_CLOSURE_VERTEX_CAP: u64 = 1 << 13;

const UNDEF: u32 = u32::MAX;

/// Vertices with no outgoing edges; for a best-response graph these are
/// exactly the pure Nash equilibria.
pub fn sinks<G: Digraph>(g: &G) -> Vec<VertexId> {
    (0..g.vertex_count()).filter(|&v| g.is_sink(v)).collect()
}

/// Vertices with no incoming edges.
pub fn sources<G: Digraph>(g: &G) -> Vec<VertexId> {
    (0..g.vertex_count()).filter(|&v| g.is_source(v)).collect()
}

struct SccResult {
    component_of: Vec<u32>,
    sizes: Vec<u32>,
}

impl SccResult {
    fn component_count(&self) -> u32 {
        self.sizes.len() as u32
    }
}

/// Iterative Tarjan. Components are numbered in reverse topological order:
/// every edge of the condensation goes from a higher id to a lower id.
fn tarjan<G: Digraph>(g: &G) -> SccResult {
    let n = g.vertex_count() as usize;
    assert!(n < u32::MAX as usize, "graph too large for classification");
    let mut index = vec![UNDEF; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut component_of = vec![UNDEF; n];
    let mut sizes = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    let mut work: Vec<(u32, u32)> = Vec::new();
    let mut next_index = 0u32;

    for root in 0..n as u32 {
        if index[root as usize] != UNDEF {
            continue;
        }
        index[root as usize] = next_index;
        low[root as usize] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        work.push((root, 0));

        while let Some(&mut (v, ref mut arc)) = work.last_mut() {
            let bound = g.out_arc_bound(v as u64);
            let mut descended = false;
            while *arc < bound {
                let i = *arc;
                *arc += 1;
                let Some(w) = g.out_arc(v as u64, i) else { continue };
                let w = w as u32;
                if index[w as usize] == UNDEF {
                    index[w as usize] = next_index;
                    low[w as usize] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w as usize] = true;
                    work.push((w, 0));
                    descended = true;
                    break;
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            }
            if descended {
                continue;
            }
            work.pop();
            if low[v as usize] == index[v as usize] {
                let comp = sizes.len() as u32;
                let mut size = 0u32;
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w as usize] = false;
                    component_of[w as usize] = comp;
                    size += 1;
                    if w == v {
                        break;
                    }
                }
                sizes.push(size);
            }
            if let Some(&mut (parent, _)) = work.last_mut() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
        }
    }

    SccResult { component_of, sizes }
}

/// Per-component summary inside a [`Condensation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentFlags {
    pub size: u32,
    pub contains_sink_vertex: bool,
    pub contains_source_vertex: bool,
    pub contains_non_sink: bool,
    pub contains_non_source: bool,
}

/// Condensation of a response graph: the DAG of strongly connected
/// components, in reverse topological order.
#[derive(Debug, Clone)]
pub struct Condensation {
    pub component_of: Vec<u32>,
    /// Deduplicated out-edges per component; every edge goes to a lower id.
    pub dag: Vec<Vec<u32>>,
    pub flags: Vec<ComponentFlags>,
}

impl Condensation {
    pub fn component_count(&self) -> u32 {
        self.flags.len() as u32
    }

    pub fn is_terminal(&self, comp: u32) -> bool {
        self.dag[comp as usize].is_empty()
    }
}

pub fn condensation<G: Digraph>(g: &G) -> Condensation {
    let scc = tarjan(g);
    let ncomp = scc.component_count() as usize;
    let mut dag: Vec<Vec<u32>> = vec![Vec::new(); ncomp];
    let mut flags: Vec<ComponentFlags> = scc
        .sizes
        .iter()
        .map(|&size| ComponentFlags {
            size,
            contains_sink_vertex: false,
            contains_source_vertex: false,
            contains_non_sink: false,
            contains_non_source: false,
        })
        .collect();
    for v in 0..g.vertex_count() {
        let cv = scc.component_of[v as usize];
        let f = &mut flags[cv as usize];
        if g.is_sink(v) {
            f.contains_sink_vertex = true;
        } else {
            f.contains_non_sink = true;
        }
        if g.is_source(v) {
            f.contains_source_vertex = true;
        } else {
            f.contains_non_source = true;
        }
        g.for_each_out(v, |w| {
            let cw = scc.component_of[w as usize];
            if cw != cv {
                dag[cv as usize].push(cw);
            }
        });
    }
    for out in &mut dag {
        out.sort_unstable();
        out.dedup();
    }
    debug_assert!(dag
        .iter()
        .enumerate()
        .all(|(c, out)| out.iter().all(|&d| d < c as u32)));
    Condensation {
        component_of: scc.component_of,
        dag,
        flags,
    }
}

/// No cycles, i.e. every strongly connected component is a singleton.
pub fn is_acyclic<G: Digraph>(g: &G) -> bool {
    tarjan(g).sizes.iter().all(|&s| s == 1)
}

/// Every vertex can reach a sink: every terminal component of the
/// condensation is a singleton sink.
pub fn is_weakly_acyclic<G: Digraph>(g: &G) -> bool {
    let scc = tarjan(g);
    let weakly = terminal_components_are_singleton_sinks(g, &scc);
    #[cfg(debug_assertions)]
    {
        // Independent route: the union of the sinks' backward-reachable sets
        // must cover every vertex.
        let mut covered = vec![false; g.vertex_count() as usize];
        let mut queue = Vec::new();
        for s in sinks(g) {
            if !covered[s as usize] {
                covered[s as usize] = true;
                queue.push(s);
            }
            while let Some(v) = queue.pop() {
                g.for_each_in(v, |u| {
                    if !covered[u as usize] {
                        covered[u as usize] = true;
                        queue.push(u);
                    }
                });
            }
        }
        debug_assert_eq!(weakly, covered.iter().all(|&c| c));
    }
    weakly
}

fn terminal_components_are_singleton_sinks<G: Digraph>(g: &G, scc: &SccResult) -> bool {
    let ncomp = scc.component_count() as usize;
    let mut terminal = vec![true; ncomp];
    let mut sink_comp = vec![false; ncomp];
    for v in 0..g.vertex_count() {
        let cv = scc.component_of[v as usize];
        if g.is_sink(v) {
            sink_comp[cv as usize] = true;
        }
        g.for_each_out(v, |w| {
            let cw = scc.component_of[w as usize];
            if cw != cv {
                terminal[cv as usize] = false;
            }
        });
    }
    (0..ncomp).all(|c| !terminal[c] || (scc.sizes[c] == 1 && sink_comp[c]))
}

/// A sink exists and every non-sink can reach every sink.
pub fn is_connected<G: Digraph>(g: &G) -> bool {
    let sink_list = sinks(g);
    if sink_list.is_empty() {
        return false;
    }
    let n = g.vertex_count();
    let num_non_sinks = n - sink_list.len() as u64;
    let mut visited = vec![false; n as usize];
    let mut queue: Vec<VertexId> = Vec::new();
    for &s in &sink_list {
        visited.iter_mut().for_each(|b| *b = false);
        queue.clear();
        visited[s as usize] = true;
        queue.push(s);
        let mut seen_non_sinks = 0u64;
        while let Some(v) = queue.pop() {
            g.for_each_in(v, |u| {
                if !visited[u as usize] {
                    visited[u as usize] = true;
                    if !g.is_sink(u) {
                        seen_non_sinks += 1;
                    }
                    queue.push(u);
                }
            });
        }
        if seen_non_sinks < num_non_sinks {
            return false;
        }
    }
    true
}

/// A sink exists and every non-sink can reach every non-source.
pub fn is_super_connected<G: Digraph>(g: &G) -> bool {
    let n = g.vertex_count();
    let mut sink_mask = vec![false; n as usize];
    let mut source_mask = vec![false; n as usize];
    let mut num_sinks = 0u64;
    let mut first_middle = None;
    let mut num_source_non_sinks = 0u64;
    for v in 0..n {
        let is_sink = g.is_sink(v);
        let is_source = g.is_source(v);
        sink_mask[v as usize] = is_sink;
        source_mask[v as usize] = is_source;
        if is_sink {
            num_sinks += 1;
        } else if is_source {
            num_source_non_sinks += 1;
        } else if first_middle.is_none() {
            first_middle = Some(v);
        }
    }
    if num_sinks == 0 {
        return false;
    }

    let Some(pivot) = first_middle else {
        // No non-source non-sink: every non-source is a sink, so check the
        // backward-reachable set of each such sink against all non-sinks.
        let num_non_sinks = n - num_sinks;
        for s in 0..n {
            if !sink_mask[s as usize] || source_mask[s as usize] {
                continue;
            }
            let covered = backward_count(g, s, |u| !sink_mask[u as usize]);
            if covered < num_non_sinks {
                return false;
            }
        }
        return true;
    };

    // (ii) all non-source non-sinks in one component.
    let scc = tarjan(g);
    let pivot_comp = scc.component_of[pivot as usize];
    for v in 0..n {
        if !sink_mask[v as usize]
            && !source_mask[v as usize]
            && scc.component_of[v as usize] != pivot_comp
        {
            return false;
        }
    }
    // (iii) every source non-sink reaches the component.
    let reach_in = backward_count(g, pivot, |u| {
        source_mask[u as usize] && !sink_mask[u as usize]
    });
    if reach_in < num_source_non_sinks {
        return false;
    }
    // (iv) the component reaches every non-source sink.
    let num_non_source_sinks = (0..n)
        .filter(|&v| sink_mask[v as usize] && !source_mask[v as usize])
        .count() as u64;
    let reach_out = forward_count(g, pivot, |u| {
        sink_mask[u as usize] && !source_mask[u as usize]
    });
    reach_out >= num_non_source_sinks
}

/// Number of vertices matching `count_if` in the backward-reachable set of
/// `start` (including `start` itself).
fn backward_count<G: Digraph>(g: &G, start: VertexId, count_if: impl Fn(VertexId) -> bool) -> u64 {
    traverse_count(g, start, count_if, true)
}

fn forward_count<G: Digraph>(g: &G, start: VertexId, count_if: impl Fn(VertexId) -> bool) -> u64 {
    traverse_count(g, start, count_if, false)
}

fn traverse_count<G: Digraph>(
    g: &G,
    start: VertexId,
    count_if: impl Fn(VertexId) -> bool,
    backward: bool,
) -> u64 {
    let mut visited = vec![false; g.vertex_count() as usize];
    let mut queue = vec![start];
    visited[start as usize] = true;
    let mut count = u64::from(count_if(start));
    while let Some(v) = queue.pop() {
        let mut push = |u: VertexId| {
            if !visited[u as usize] {
                visited[u as usize] = true;
                if count_if(u) {
                    count += 1;
                }
                queue.push(u);
            }
        };
        if backward {
            g.for_each_in(v, &mut push);
        } else {
            g.for_each_out(v, &mut push);
        }
    }
    count
}

/// Per-vertex relaxation of connectedness: a sink exists, and if `v` is a
/// non-sink it can reach every sink.
pub fn v_connected<G: Digraph>(g: &G, v: VertexId) -> bool {
    let sink_list = sinks(g);
    if sink_list.is_empty() {
        return false;
    }
    if g.is_sink(v) {
        return true;
    }
    forward_count(g, v, |u| g.is_sink(u)) == sink_list.len() as u64
}

/// Per-vertex relaxation of super-connectedness.
pub fn v_super_connected<G: Digraph>(g: &G, v: VertexId) -> bool {
    let n = g.vertex_count();
    if !(0..n).any(|u| g.is_sink(u)) {
        return false;
    }
    if g.is_sink(v) {
        return true;
    }
    let num_non_sources = (0..n).filter(|&u| !g.is_source(u)).count() as u64;
    forward_count(g, v, |u| !g.is_source(u)) == num_non_sources
}

/// Number of vertices `v` can reach, including itself.
pub fn reach_count<G: Digraph>(g: &G, v: VertexId) -> u64 {
    forward_count(g, v, |_| true)
}

/// Number of vertices that can reach `v`, including itself.
pub fn reached_from_count<G: Digraph>(g: &G, v: VertexId) -> u64 {
    backward_count(g, v, |_| true)
}

/// Whole-graph backward-reachability profile, computed once with a bitset
/// sweep over the condensation.
pub struct ReachProfile {
    /// Per vertex: how many vertices can reach it (including itself).
    pub reached_from: Vec<u64>,
    /// Per vertex: whether every non-sink can reach it.
    pub reached_from_all_non_sinks: Vec<bool>,
}

pub fn reached_from_profile<G: Digraph>(g: &G) -> Result<ReachProfile> {
    let n = g.vertex_count();
    if n > REACH_CLOSURE_VERTEX_CAP {
        return Err(Error::SizeExceeded {
            vertices: n,
            limit: REACH_CLOSURE_VERTEX_CAP,
        });
    }
    let scc = tarjan(g);
    let ncomp = scc.component_count() as usize;
    let words = ncomp.div_ceil(64);

    // Transpose of the condensation: edges from lower to higher ids.
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); ncomp];
    for v in 0..n {
        let cv = scc.component_of[v as usize];
        g.for_each_out(v, |w| {
            let cw = scc.component_of[w as usize];
            if cw != cv {
                preds[cw as usize].push(cv);
            }
        });
    }
    for p in &mut preds {
        p.sort_unstable();
        p.dedup();
    }

    // ancestors[c] = set of components that can reach c. Predecessor ids are
    // always higher, so a descending sweep sees them finished first.
    let mut ancestors = vec![0u64; ncomp * words];
    let mut comp_non_sinks = vec![0u64; ncomp];
    for v in 0..n {
        if !g.is_sink(v) {
            comp_non_sinks[scc.component_of[v as usize] as usize] += 1;
        }
    }
    for c in (0..ncomp).rev() {
        let base = c * words;
        ancestors[base + c / 64] |= 1 << (c % 64);
        // Predecessor ids are strictly higher, so their rows sit past this
        // one and are already final.
        let (lo_part, hi_part) = ancestors.split_at_mut(base + words);
        let row = &mut lo_part[base..];
        for &p in &preds[c] {
            let off = p as usize * words - (base + words);
            for w in 0..words {
                row[w] |= hi_part[off + w];
            }
        }
    }

    let comp_weight = |set_base: usize, weights: &[u64]| -> u64 {
        let mut total = 0;
        for w in 0..words {
            let mut bits = ancestors[set_base + w];
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                total += weights[w * 64 + b];
                bits &= bits - 1;
            }
        }
        total
    };

    let sizes_u64: Vec<u64> = scc.sizes.iter().map(|&s| s as u64).collect();
    let total_non_sinks: u64 = comp_non_sinks.iter().sum();

    let mut reached_from = vec![0u64; n as usize];
    let mut covers = vec![false; n as usize];
    let mut per_comp_count = vec![0u64; ncomp];
    let mut per_comp_covers = vec![false; ncomp];
    for c in 0..ncomp {
        per_comp_count[c] = comp_weight(c * words, &sizes_u64);
        per_comp_covers[c] = comp_weight(c * words, &comp_non_sinks) == total_non_sinks;
    }
    for v in 0..n as usize {
        let c = scc.component_of[v] as usize;
        reached_from[v] = per_comp_count[c];
        covers[v] = per_comp_covers[c];
    }
    Ok(ReachProfile {
        reached_from,
        reached_from_all_non_sinks: covers,
    })
}

/// Histogram of [`reached_from_count`] over all vertices.
pub fn reach_histogram<G: Digraph>(g: &G) -> Result<BTreeMap<u64, u64>> {
    let profile = reached_from_profile(g)?;
    let mut hist = BTreeMap::new();
    for &c in &profile.reached_from {
        *hist.entry(c).or_insert(0u64) += 1;
    }
    Ok(hist)
}

/// Vertices winning at least `n/3K` but at most `3n/4` of their lines,
/// where `K` is the maximum action count.
pub fn count_good_vertices(table: &WinnerTable) -> u64 {
    let shape = table.shape();
    let n = shape.num_players() as u64;
    let k_max = shape.max_actions() as u64;
    shape
        .vertices()
        .filter(|&v| {
            let w = table.wins_of(v) as u64;
            3 * k_max * w >= n && 4 * w <= 3 * n
        })
        .count() as u64
}

/// Connectivity class membership flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassFlag {
    Acyclic,
    WeaklyAcyclic,
    Connected,
    SuperConnected,
    GloballyAcyclic,
    GloballyWeaklyAcyclic,
    GloballyConnected,
    GloballySuperConnected,
}

impl ClassFlag {
    pub const ALL: [ClassFlag; 8] = [
        ClassFlag::Acyclic,
        ClassFlag::WeaklyAcyclic,
        ClassFlag::Connected,
        ClassFlag::SuperConnected,
        ClassFlag::GloballyAcyclic,
        ClassFlag::GloballyWeaklyAcyclic,
        ClassFlag::GloballyConnected,
        ClassFlag::GloballySuperConnected,
    ];

    pub const BEST_RESPONSE: [ClassFlag; 4] = [
        ClassFlag::Acyclic,
        ClassFlag::WeaklyAcyclic,
        ClassFlag::Connected,
        ClassFlag::SuperConnected,
    ];

    pub fn is_global(self) -> bool {
        matches!(
            self,
            ClassFlag::GloballyAcyclic
                | ClassFlag::GloballyWeaklyAcyclic
                | ClassFlag::GloballyConnected
                | ClassFlag::GloballySuperConnected
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassFlag::Acyclic => "acyclic",
            ClassFlag::WeaklyAcyclic => "weakly_acyclic",
            ClassFlag::Connected => "connected",
            ClassFlag::SuperConnected => "super_connected",
            ClassFlag::GloballyAcyclic => "globally_acyclic",
            ClassFlag::GloballyWeaklyAcyclic => "globally_weakly_acyclic",
            ClassFlag::GloballyConnected => "globally_connected",
            ClassFlag::GloballySuperConnected => "globally_super_connected",
        }
    }
}

impl std::fmt::Display for ClassFlag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ClassFlag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ClassFlag::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown flag {s:?}"))
    }
}

/// Full classification of one game or winner table. Global (better-response)
/// flags are `None` when only a winner table was supplied or the shape is
/// over the explicit better-response cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub num_pne: u64,
    pub acyclic: bool,
    pub weakly_acyclic: bool,
    pub connected: bool,
    pub super_connected: bool,
    pub globally_acyclic: Option<bool>,
    pub globally_weakly_acyclic: Option<bool>,
    pub globally_connected: Option<bool>,
    pub globally_super_connected: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v_connected: Option<Vec<bool>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v_super_connected: Option<Vec<bool>>,
}

impl ClassificationRecord {
    pub fn flag(&self, flag: ClassFlag) -> Option<bool> {
        match flag {
            ClassFlag::Acyclic => Some(self.acyclic),
            ClassFlag::WeaklyAcyclic => Some(self.weakly_acyclic),
            ClassFlag::Connected => Some(self.connected),
            ClassFlag::SuperConnected => Some(self.super_connected),
            ClassFlag::GloballyAcyclic => self.globally_acyclic,
            ClassFlag::GloballyWeaklyAcyclic => self.globally_weakly_acyclic,
            ClassFlag::GloballyConnected => self.globally_connected,
            ClassFlag::GloballySuperConnected => self.globally_super_connected,
        }
    }

    /// Validates every implication of the class lattice that is decidable
    /// from the populated flags.
    pub fn check_lattice(&self) -> std::result::Result<(), String> {
        let check = |premise: Option<bool>, conclusion: Option<bool>, name: &str| {
            if premise == Some(true) && conclusion == Some(false) {
                Err(format!("lattice violation: {name}"))
            } else {
                Ok(())
            }
        };
        check(
            Some(self.super_connected),
            Some(self.connected),
            "super_connected => connected",
        )?;
        check(
            Some(self.connected),
            Some(self.weakly_acyclic),
            "connected => weakly_acyclic",
        )?;
        check(
            Some(self.acyclic),
            Some(self.weakly_acyclic),
            "acyclic => weakly_acyclic",
        )?;
        check(
            self.globally_acyclic,
            Some(self.acyclic),
            "globally_acyclic => acyclic",
        )?;
        check(
            Some(self.weakly_acyclic),
            self.globally_weakly_acyclic,
            "weakly_acyclic => globally_weakly_acyclic",
        )?;
        check(
            Some(self.connected),
            self.globally_connected,
            "connected => globally_connected",
        )?;
        check(
            Some(self.super_connected),
            self.globally_super_connected,
            "super_connected => globally_super_connected",
        )?;
        check(
            self.globally_super_connected,
            self.globally_connected,
            "globally_super_connected => globally_connected",
        )?;
        check(
            self.globally_connected,
            self.globally_weakly_acyclic,
            "globally_connected => globally_weakly_acyclic",
        )?;
        if self.weakly_acyclic && self.num_pne == 0 {
            return Err("lattice violation: weakly_acyclic => num_pne >= 1".into());
        }
        Ok(())
    }

    pub fn csv_header() -> &'static str {
        "num_pne,acyclic,weakly_acyclic,connected,super_connected,globally_acyclic,\
         globally_weakly_acyclic,globally_connected,globally_super_connected"
    }

    pub fn csv_row(&self) -> String {
        let opt = |o: Option<bool>| match o {
            Some(b) => b.to_string(),
            None => "not_computed".to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.num_pne,
            self.acyclic,
            self.weakly_acyclic,
            self.connected,
            self.super_connected,
            opt(self.globally_acyclic),
            opt(self.globally_weakly_acyclic),
            opt(self.globally_connected),
            opt(self.globally_super_connected),
        )
    }
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// Compute better-response flags when a full game is available.
    pub global_flags: bool,
    /// Vertex cap for the explicit better-response graph.
    pub better_cap: u64,
    /// Populate the per-vertex v-connected and v-super-connected vectors.
    pub per_vertex: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            global_flags: true,
            better_cap: DEFAULT_BETTER_VERTEX_CAP,
            per_vertex: false,
        }
    }
}

/// Classifies a winner table (best-response flags only).
pub fn classify_table(table: &WinnerTable) -> ClassificationRecord {
    let g = BestResponseView::new(table);
    let record = classify_core(&g, None);
    debug_assert!(record.check_lattice().is_ok());
    record
}

/// Classifies a game, optionally including better-response ("globally ...")
/// flags and per-vertex flags.
pub fn classify_game(game: &OrdinalGame, opts: &ClassifyOptions) -> ClassificationRecord {
    let table = game.winner_table();
    let g = BestResponseView::new(&table);
    let better = if opts.global_flags {
        build_better_response_graph_capped(game, StorageMode::Auto, opts.better_cap).ok()
    } else {
        None
    };
    let mut record = classify_core(&g, better.as_ref().map(|b| b as &dyn DynDigraph));
    if opts.per_vertex {
        let n = table.shape().vertex_count();
        record.v_connected = Some((0..n).map(|v| v_connected(&g, v)).collect());
        record.v_super_connected = Some((0..n).map(|v| v_super_connected(&g, v)).collect());
    }
    debug_assert!(record.check_lattice().is_ok());
    record
}

// Object-safe shim so classify_core can take an optional second graph
// without going generic in two parameters.
trait DynDigraph {
    fn acyclic(&self) -> bool;
    fn weakly(&self) -> bool;
    fn connected(&self) -> bool;
    fn super_connected(&self) -> bool;
}

impl<G: Digraph> DynDigraph for G {
    fn acyclic(&self) -> bool {
        is_acyclic(self)
    }
    fn weakly(&self) -> bool {
        is_weakly_acyclic(self)
    }
    fn connected(&self) -> bool {
        is_connected(self)
    }
    fn super_connected(&self) -> bool {
        is_super_connected(self)
    }
}

fn classify_core<G: Digraph>(g: &G, better: Option<&dyn DynDigraph>) -> ClassificationRecord {
    let num_pne = sinks(g).len() as u64;
    ClassificationRecord {
        num_pne,
        acyclic: is_acyclic(g),
        weakly_acyclic: is_weakly_acyclic(g),
        connected: is_connected(g),
        super_connected: is_super_connected(g),
        globally_acyclic: better.map(|b| b.acyclic()),
        globally_weakly_acyclic: better.map(|b| b.weakly()),
        globally_connected: better.map(|b| b.connected()),
        globally_super_connected: better.map(|b| b.super_connected()),
        v_connected: None,
        v_super_connected: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::game_model::{pure_nash_profiles, GameShape};
    use crate::response_graphs::{build_best_response_graph, StorageMode};
    use crate::sampling::{derive_trial_rng, sample_winner_table, TrialSeed};

    fn best(table: &WinnerTable) -> crate::response_graphs::ResponseGraph {
        build_best_response_graph(table, StorageMode::Explicit).unwrap()
    }

    #[test]
    fn showcase_fixture_classification() {
        let game = fixtures::two_sink_cycle_game();
        let table = game.winner_table();
        let g = best(&table);
        assert_eq!(sinks(&g), pure_nash_profiles(&table));
        assert_eq!(sinks(&g).len(), 2);
        assert!(!is_acyclic(&g));
        assert!(is_weakly_acyclic(&g));
        assert!(is_connected(&g));
        assert!(is_super_connected(&g));

        // Two singleton sinks plus one 6-vertex cycle component.
        let cond = condensation(&g);
        let mut sizes: Vec<u32> = cond.flags.iter().map(|f| f.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 6]);
    }

    #[test]
    fn acyclic_fixture_classification() {
        let table = fixtures::acyclic_not_super_table();
        let g = best(&table);
        assert!(is_acyclic(&g));
        assert!(is_weakly_acyclic(&g));
        assert!(!is_connected(&g));
        assert!(!is_super_connected(&g));
        assert!(!v_super_connected(&g, fixtures::acyclic_not_super_witness()));

        let cond = condensation(&g);
        assert_eq!(cond.component_count(), 8);
    }

    #[test]
    fn matching_pennies_classification() {
        let table = fixtures::matching_pennies_table();
        let g = best(&table);
        assert!(sinks(&g).is_empty());
        assert!(sources(&g).is_empty());
        assert!(!is_acyclic(&g));
        assert!(!is_weakly_acyclic(&g));
        assert!(!is_connected(&g));
        assert!(!is_super_connected(&g));
    }

    #[test]
    fn diagonal_two_sink_classification() {
        let table = fixtures::diagonal_two_sink_table();
        let g = best(&table);
        assert!(is_connected(&g));
        assert!(is_super_connected(&g));
        assert!(is_acyclic(&g));
    }

    #[test]
    fn dominant_game_reachability() {
        let shape = GameShape::uniform(3, 2).unwrap();
        let game = crate::dynamics::construct_dominant_game(&shape);
        let table = game.winner_table();
        let g = best(&table);
        assert_eq!(sinks(&g), vec![0]);
        assert_eq!(
            sources(&g),
            vec![shape.encode_profile(&[1, 1, 1]).unwrap()]
        );
        assert!(is_acyclic(&g));
        assert!(is_connected(&g));
        // Every vertex reaches the sink.
        assert_eq!(reached_from_count(&g, 0), 8);
        // The all-ones source reaches everything.
        assert_eq!(reach_count(&g, 7), 8);
        // A vertex that wins no line is reached only from itself.
        assert_eq!(reached_from_count(&g, 7), 1);
    }

    #[test]
    fn dominant_2x2_not_super() {
        let shape = GameShape::new(&[2, 2]).unwrap();
        let game = crate::dynamics::construct_dominant_game(&shape);
        let g = best(&game.winner_table());
        assert!(is_acyclic(&g));
        assert!(is_connected(&g));
        assert!(!is_super_connected(&g));
    }

    #[test]
    fn sink_is_vacuously_v_connected() {
        let table = fixtures::acyclic_not_super_table();
        let g = best(&table);
        for s in sinks(&g) {
            assert!(v_connected(&g, s));
            assert!(v_super_connected(&g, s));
        }
    }

    #[test]
    fn conjunction_equivalence_random_tables() {
        let shape = GameShape::uniform(6, 2).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 71, trial_index: 0 });
        for _ in 0..300 {
            let table = sample_winner_table(&shape, &mut rng);
            let g = BestResponseView::new(&table);
            let all_v_conn = shape.vertices().all(|v| v_connected(&g, v));
            let all_v_super = shape.vertices().all(|v| v_super_connected(&g, v));
            assert_eq!(all_v_conn, is_connected(&g));
            assert_eq!(all_v_super, is_super_connected(&g));
        }
    }

    #[test]
    fn reach_profile_matches_per_vertex_bfs() {
        let shape = GameShape::new(&[2, 3, 2]).unwrap();
        let mut rng = derive_trial_rng(TrialSeed { master_seed: 73, trial_index: 0 });
        for _ in 0..50 {
            let table = sample_winner_table(&shape, &mut rng);
            let g = BestResponseView::new(&table);
            let profile = reached_from_profile(&g).unwrap();
            let num_non_sinks =
                shape.vertices().filter(|&v| !g.is_sink(v)).count() as u64;
            for v in shape.vertices() {
                assert_eq!(profile.reached_from[v as usize], reached_from_count(&g, v));
                let covers = backward_count(&g, v, |u| !g.is_sink(u)) == num_non_sinks;
                assert_eq!(profile.reached_from_all_non_sinks[v as usize], covers);
            }
        }
    }

    #[test]
    fn reach_histogram_counts_vertices() {
        let game = fixtures::two_sink_cycle_game();
        let table = game.winner_table();
        let g = BestResponseView::new(&table);
        let hist = reach_histogram(&g).unwrap();
        assert_eq!(hist.values().sum::<u64>(), 8);
        // Each sink is reached from the six cycle vertices plus itself (the
        // other sink cannot move); cycle vertices are reached from the cycle.
        assert_eq!(hist.get(&7), Some(&2));
        assert_eq!(hist.get(&6), Some(&6));
    }

    #[test]
    fn good_vertex_window() {
        // Dominant table at (12, 2^12): a vertex wins one line per zero
        // coordinate, so "good" means between 2 and 9 zeros.
        let shape = GameShape::uniform(12, 2).unwrap();
        let game = crate::dynamics::construct_dominant_game(&shape);
        let table = game.winner_table();
        assert!(!table.is_pne(1)); // sanity: not everything is a sink
        let expected: u64 = (2..=9).map(|z| binomial(12, z)).sum();
        assert_eq!(count_good_vertices(&table), expected);
        // The all-zeros vertex wins 12 > 9 lines: not good.
        // The all-ones vertex wins 0 < 2 lines: not good.
        assert!(expected < shape.vertex_count());
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn classify_game_has_global_flags() {
        let game = fixtures::two_sink_cycle_game();
        let record = classify_game(&game, &ClassifyOptions::default());
        assert_eq!(record.num_pne, 2);
        assert!(!record.acyclic);
        assert!(record.super_connected);
        assert!(record.globally_weakly_acyclic.is_some());
        record.check_lattice().unwrap();

        let table_record = classify_table(&game.winner_table());
        assert!(table_record.globally_acyclic.is_none());
        assert_eq!(table_record.connected, record.connected);
    }

    #[test]
    fn per_vertex_flags_populated() {
        let game = fixtures::two_sink_cycle_game();
        let opts = ClassifyOptions { per_vertex: true, ..Default::default() };
        let record = classify_game(&game, &opts);
        let v_conn = record.v_connected.unwrap();
        assert_eq!(v_conn.len(), 8);
        assert!(v_conn.iter().all(|&b| b));
    }
}
