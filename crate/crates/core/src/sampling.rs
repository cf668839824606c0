//! Sample collections behind the two bounding functions.
//!
//! * A **CP sequence** lists, for every non-seed node reached in one
//!   realization, the nodes common to all of its paths from the source.
//!   Coverage over CP sequences estimates the lower bound `D^L`.
//! * An **LRR set** holds the nodes that can reach a uniformly chosen target
//!   inside the seed-reachable part of one realization. Coverage over LRR
//!   sets, scaled by the population size, estimates the upper bound `D^U`.
//!
//! CP sets are stored as parent pointers into a forest laid out in preorder:
//! the CP set of an entry is its chain of ancestors, and every entry whose CP
//! set contains `v` lies in one of the contiguous ranges owned by `v`.

use std::io::Write;

use crate::diffusion::{reachable_population, Realization, Scratch};
use crate::domtree::build_dominator_tree;
use crate::error::{Error, Result};
use crate::graph::{BlockerSet, NodeId, UnifiedGraph};
use crate::rng::{uniform_index, EdgeCoins, SeedStream, StreamRng};

const NONE: u32 = u32::MAX;

/// One CP sequence: entries in dominator-tree preorder.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CpSequence {
    nodes: Vec<NodeId>,
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl CpSequence {
    /// CP sequence of an explicit realization of `g`.
    pub fn from_realization(g: &UnifiedGraph, phi: &Realization) -> CpSequence {
        let dt = build_dominator_tree(phi);
        let mut seq = CpSequence::default();
        let mut entry_of = vec![NONE; dt.len()];
        for pos in 1..dt.len() {
            let v = dt.nodes()[pos];
            if g.is_seed_or_source(v) {
                continue;
            }
            let parent = dt.parent_pos(pos).map_or(NONE, |p| entry_of[p]);
            entry_of[pos] = seq.nodes.len() as u32;
            seq.nodes.push(v);
            seq.parent.push(parent);
            seq.size.push(dt.size_at(pos) as u32);
        }
        seq
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes with an entry, in entry order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// The CP set of `v`, or `None` if `v` has no entry.
    pub fn cp_set(&self, v: NodeId) -> Option<Vec<NodeId>> {
        let e = self.nodes.iter().position(|&x| x == v)?;
        let mut out = Vec::new();
        let mut cur = e as u32;
        while cur != NONE {
            out.push(self.nodes[cur as usize]);
            cur = self.parent[cur as usize];
        }
        out.sort_unstable();
        Some(out)
    }
}

/// Builds one CP sequence from a fresh realization of the unblocked graph.
pub fn local_sampling(g: &UnifiedGraph, rng: &mut StreamRng) -> CpSequence {
    let mut scratch = Scratch::new(g.graph().n());
    let phi = Realization::from_coins(&g.unblocked(), EdgeCoins::draw(rng), &mut scratch);
    CpSequence::from_realization(g, &phi)
}

/// A flat store of CP sequences with a node-to-entry index.
#[derive(Clone, Debug)]
pub struct CpCollection {
    universe: usize,
    sequences: usize,
    nodes: Vec<NodeId>,
    parent: Vec<u32>,
    size: Vec<u32>,
    index_offsets: Vec<u32>,
    index: Vec<u32>,
}

impl CpCollection {
    pub fn new(g: &UnifiedGraph) -> CpCollection {
        CpCollection {
            universe: g.base_n(),
            sequences: 0,
            nodes: Vec::new(),
            parent: Vec::new(),
            size: Vec::new(),
            index_offsets: vec![0; g.base_n() + 1],
            index: Vec::new(),
        }
    }

    /// A collection of `count` fresh CP sequences.
    pub fn generate(g: &UnifiedGraph, count: usize, stream: &mut SeedStream) -> CpCollection {
        let mut c = CpCollection::new(g);
        c.extend(g, count, stream);
        c
    }

    pub fn from_sequences<'a>(g: &UnifiedGraph, seqs: impl IntoIterator<Item = &'a CpSequence>) -> CpCollection {
        let mut c = CpCollection::new(g);
        for s in seqs {
            c.append(s);
        }
        c.reindex();
        c
    }

    fn append(&mut self, s: &CpSequence) {
        let base = self.nodes.len() as u32;
        self.nodes.extend_from_slice(&s.nodes);
        self.parent
            .extend(s.parent.iter().map(|&p| if p == NONE { NONE } else { p + base }));
        self.size.extend_from_slice(&s.size);
        self.sequences += 1;
    }

    /// Appends `count` fresh CP sequences.
    pub fn extend(&mut self, g: &UnifiedGraph, count: usize, stream: &mut SeedStream) {
        let view = g.unblocked();
        let len = g.graph().n();
        let chunks = stream.par_chunks(count, |rng, n| {
            let mut scratch = Scratch::new(len);
            (0..n)
                .map(|_| {
                    let phi = Realization::from_coins(&view, EdgeCoins::draw(rng), &mut scratch);
                    CpSequence::from_realization(g, &phi)
                })
                .collect::<Vec<_>>()
        });
        for s in chunks.iter().flatten() {
            self.append(s);
        }
        self.reindex();
    }

    fn reindex(&mut self) {
        let mut offsets = vec![0u32; self.universe + 1];
        for &v in &self.nodes {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..self.universe {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut index = vec![0u32; self.nodes.len()];
        for (e, &v) in self.nodes.iter().enumerate() {
            index[fill[v as usize] as usize] = e as u32;
            fill[v as usize] += 1;
        }
        self.index_offsets = offsets;
        self.index = index;
    }

    /// Number of sequences `|C|`.
    pub fn len(&self) -> usize {
        self.sequences
    }

    pub fn is_empty(&self) -> bool {
        self.sequences == 0
    }

    /// Total number of CP-set entries over all sequences.
    pub fn entries(&self) -> usize {
        self.nodes.len()
    }

    fn entries_of(&self, v: NodeId) -> &[u32] {
        &self.index[self.index_offsets[v as usize] as usize..self.index_offsets[v as usize + 1] as usize]
    }

    /// `D^L` estimate `Cov(B) / |C|`.
    pub fn estimate(&self, b: &BlockerSet) -> f64 {
        if self.sequences == 0 {
            return 0.0;
        }
        coverage_cp(self, b) as f64 / self.sequences as f64
    }

    /// Writes one line per entry: `sequence-local entry: CP set`.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        for e in 0..self.nodes.len() {
            let mut cur = e as u32;
            let mut set = Vec::new();
            while cur != NONE {
                set.push(self.nodes[cur as usize].to_string());
                cur = self.parent[cur as usize];
            }
            writeln!(out, "{}: {}", self.nodes[e], set.join(" "))?;
        }
        Ok(())
    }
}

/// LRR sets with the population they were drawn from. Empty sets are only
/// counted.
#[derive(Clone, Debug)]
pub struct LrrCollection {
    universe: usize,
    population: usize,
    set_offsets: Vec<u32>,
    members: Vec<NodeId>,
    empty: usize,
    index_offsets: Vec<u32>,
    index: Vec<u32>,
}

/// One LRR set: the sampled target and the nodes reaching it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LrrSet {
    pub target: NodeId,
    pub members: Vec<NodeId>,
}

/// Nodes reachable from the source over positive-probability edges,
/// excluding seeds: the LRR sampling population `V'_s`.
pub fn compute_population(g: &UnifiedGraph) -> Vec<NodeId> {
    reachable_population(&g.unblocked())
}

/// Reverse search from `target` under `coins`. Returns the nodes that can
/// reach `target` inside the seed-reachable part of the realization, or an
/// empty set if `target` itself is not reached.
pub(crate) fn lrr_from_coins(
    g: &UnifiedGraph,
    target: NodeId,
    coins: EdgeCoins,
    scratch: &mut Scratch,
    out: &mut Vec<NodeId>,
) {
    // Pass 1: everything reaching `target` over live edges between non-seed
    // nodes. Nodes with a live edge from a seed are the entry points.
    let graph = g.graph();
    scratch.next_epoch();
    scratch.queue.clear();
    scratch.queue.push(target);
    scratch.visit(target);
    scratch.local[target as usize] = 0;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut entries: Vec<u32> = Vec::new();
    let mut head = 0;
    while head < scratch.queue.len() {
        let x = scratch.queue[head];
        let mut is_entry = false;
        for e in graph.in_edges(x) {
            if !coins.is_live(e.id, e.prob) {
                continue;
            }
            if g.is_seed_or_source(e.node) {
                is_entry = true;
                continue;
            }
            if scratch.visit(e.node) {
                scratch.local[e.node as usize] = scratch.queue.len() as u32;
                scratch.queue.push(e.node);
            }
            edges.push((scratch.local[e.node as usize], head as u32));
        }
        if is_entry {
            entries.push(head as u32);
        }
        head += 1;
    }
    let found = std::mem::take(&mut scratch.queue);

    // Pass 2: of those, the ones reachable from an entry point.
    out.clear();
    if !entries.is_empty() {
        edges.sort_unstable();
        let mut reached = vec![false; found.len()];
        let mut stack = entries;
        for &e in &stack {
            reached[e as usize] = true;
        }
        while let Some(u) = stack.pop() {
            let lo = edges.partition_point(|&(a, _)| a < u);
            for &(_, w) in edges[lo..].iter().take_while(|&&(a, _)| a == u) {
                if !reached[w as usize] {
                    reached[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        out.extend(found.iter().zip(&reached).filter(|(_, &r)| r).map(|(&v, _)| v));
        out.sort_unstable();
    }
    for &v in &found {
        scratch.local[v as usize] = u32::MAX;
    }
    scratch.queue = found;
}

/// Draws one LRR set: a target uniform over `population` and a fresh
/// realization.
pub fn global_sampling(g: &UnifiedGraph, population: &[NodeId], rng: &mut StreamRng) -> Result<LrrSet> {
    if population.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let target = population[uniform_index(rng, population.len())];
    let coins = EdgeCoins::draw(rng);
    let mut scratch = Scratch::new(g.graph().n());
    let mut members = Vec::new();
    lrr_from_coins(g, target, coins, &mut scratch, &mut members);
    Ok(LrrSet { target, members })
}

impl LrrCollection {
    pub fn new(g: &UnifiedGraph, population: usize) -> LrrCollection {
        LrrCollection {
            universe: g.base_n(),
            population,
            set_offsets: vec![0],
            members: Vec::new(),
            empty: 0,
            index_offsets: vec![0; g.base_n() + 1],
            index: Vec::new(),
        }
    }

    /// `count` fresh LRR sets over `population`.
    pub fn generate(
        g: &UnifiedGraph,
        population: &[NodeId],
        count: usize,
        stream: &mut SeedStream,
    ) -> Result<LrrCollection> {
        let mut c = LrrCollection::new(g, population.len());
        c.extend(g, population, count, stream)?;
        Ok(c)
    }

    pub fn from_sets<'a>(g: &UnifiedGraph, population: usize, sets: impl IntoIterator<Item = &'a [NodeId]>) -> LrrCollection {
        let mut c = LrrCollection::new(g, population);
        for s in sets {
            c.push(s);
        }
        c.reindex();
        c
    }

    fn push(&mut self, members: &[NodeId]) {
        if members.is_empty() {
            self.empty += 1;
        } else {
            self.members.extend_from_slice(members);
            self.set_offsets.push(self.members.len() as u32);
        }
    }

    pub fn extend(
        &mut self,
        g: &UnifiedGraph,
        population: &[NodeId],
        count: usize,
        stream: &mut SeedStream,
    ) -> Result<()> {
        if population.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        if population.len() != self.population {
            return Err(Error::InvalidParameter("population size changed".into()));
        }
        let len = g.graph().n();
        let chunks = stream.par_chunks(count, |rng, n| {
            let mut scratch = Scratch::new(len);
            let mut sets = Vec::with_capacity(n);
            let mut buf = Vec::new();
            for _ in 0..n {
                let target = population[uniform_index(rng, population.len())];
                lrr_from_coins(g, target, EdgeCoins::draw(rng), &mut scratch, &mut buf);
                sets.push(buf.clone());
            }
            sets
        });
        for s in chunks.iter().flatten() {
            self.push(s);
        }
        self.reindex();
        Ok(())
    }

    fn reindex(&mut self) {
        let mut offsets = vec![0u32; self.universe + 1];
        for &v in &self.members {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..self.universe {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut index = vec![0u32; self.members.len()];
        for set in 0..self.set_offsets.len() - 1 {
            for &v in self.set(set) {
                index[fill[v as usize] as usize] = set as u32;
                fill[v as usize] += 1;
            }
        }
        self.index_offsets = offsets;
        self.index = index;
    }

    fn set(&self, i: usize) -> &[NodeId] {
        &self.members[self.set_offsets[i] as usize..self.set_offsets[i + 1] as usize]
    }

    fn sets_of(&self, v: NodeId) -> &[u32] {
        &self.index[self.index_offsets[v as usize] as usize..self.index_offsets[v as usize + 1] as usize]
    }

    /// `|L|`, empty sets included.
    pub fn len(&self) -> usize {
        self.set_offsets.len() - 1 + self.empty
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn empty_sets(&self) -> usize {
        self.empty
    }

    /// `|V'_s|`.
    pub fn population(&self) -> usize {
        self.population
    }

    /// `D^U` estimate `|V'_s| Cov(B) / |L|`.
    pub fn estimate(&self, b: &BlockerSet) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.population as f64 * coverage_lrr(self, b) as f64 / self.len() as f64
    }

    /// One line per non-empty set, then a line with the empty-set count.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<()> {
        for i in 0..self.set_offsets.len() - 1 {
            let line: Vec<String> = self.set(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        writeln!(out, "# empty {}", self.empty)?;
        Ok(())
    }
}

/// Coverage interface shared by the greedy optimizer.
pub trait Coverage {
    /// Node ids range over `0..universe()`.
    fn universe(&self) -> usize;
    /// Number of coverable units (CP entries or non-empty LRR sets).
    fn units(&self) -> usize;
    /// Units containing each node.
    fn initial_gains(&self) -> Vec<u64>;
    /// Marks every unit containing `v` covered, decrementing the gain of each
    /// node in a newly covered unit. Returns the number newly covered.
    fn cover(&self, v: NodeId, covered: &mut [bool], gains: &mut [u64]) -> u64;
}

impl Coverage for CpCollection {
    fn universe(&self) -> usize {
        self.universe
    }

    fn units(&self) -> usize {
        self.nodes.len()
    }

    fn initial_gains(&self) -> Vec<u64> {
        let mut gains = vec![0u64; self.universe];
        for (e, &v) in self.nodes.iter().enumerate() {
            gains[v as usize] += self.size[e] as u64;
        }
        gains
    }

    fn cover(&self, v: NodeId, covered: &mut [bool], gains: &mut [u64]) -> u64 {
        let mut fresh = 0;
        for &root in self.entries_of(v) {
            let root = root as usize;
            let end = root + self.size[root] as usize;
            for (e, seen) in covered[root..end].iter_mut().enumerate() {
                if *seen {
                    continue;
                }
                *seen = true;
                fresh += 1;
                let mut cur = (root + e) as u32;
                while cur != NONE {
                    gains[self.nodes[cur as usize] as usize] -= 1;
                    cur = self.parent[cur as usize];
                }
            }
        }
        fresh
    }
}

impl Coverage for LrrCollection {
    fn universe(&self) -> usize {
        self.universe
    }

    fn units(&self) -> usize {
        self.set_offsets.len() - 1
    }

    fn initial_gains(&self) -> Vec<u64> {
        (0..self.universe as NodeId)
            .map(|v| self.sets_of(v).len() as u64)
            .collect()
    }

    fn cover(&self, v: NodeId, covered: &mut [bool], gains: &mut [u64]) -> u64 {
        let mut fresh = 0;
        for &s in self.sets_of(v) {
            if covered[s as usize] {
                continue;
            }
            covered[s as usize] = true;
            fresh += 1;
            for &u in self.set(s as usize) {
                gains[u as usize] -= 1;
            }
        }
        fresh
    }
}

fn coverage_of<C: Coverage>(c: &C, b: &BlockerSet) -> u64 {
    let mut covered = vec![false; c.units()];
    let mut gains = c.initial_gains();
    b.as_slice()
        .iter()
        .filter(|&&v| (v as usize) < c.universe())
        .map(|&v| c.cover(v, &mut covered, &mut gains))
        .sum()
}

/// Number of CP-set entries hit by `b`.
pub fn coverage_cp(c: &CpCollection, b: &BlockerSet) -> u64 {
    let mut covered = vec![false; c.entries()];
    let mut count = 0;
    for &v in b {
        if v as usize >= c.universe {
            continue;
        }
        for &root in c.entries_of(v) {
            let root = root as usize;
            for flag in &mut covered[root..root + c.size[root] as usize] {
                if !*flag {
                    *flag = true;
                    count += 1;
                }
            }
        }
    }
    count
}

/// Number of LRR sets hit by `b`.
pub fn coverage_lrr(c: &LrrCollection, b: &BlockerSet) -> u64 {
    let mut covered = vec![false; c.set_offsets.len() - 1];
    let mut count = 0;
    for &v in b {
        if v as usize >= c.universe {
            continue;
        }
        for &s in c.sets_of(v) {
            if !covered[s as usize] {
                covered[s as usize] = true;
                count += 1;
            }
        }
    }
    count
}

/// `Cov(B + v) - Cov(B)`.
pub fn marginal_coverage<C: Coverage>(c: &C, b: &BlockerSet, v: NodeId) -> u64 {
    if b.contains(v) {
        return 0;
    }
    let mut with = b.clone();
    with.push(v).expect("v is not in b");
    coverage_of(c, &with) - coverage_of(c, b)
}
