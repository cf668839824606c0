//! Dominator trees of realizations.
//!
//! `u` dominates `v` when every path from the root to `v` passes through
//! `u`. The size of `v`'s subtree in the dominator tree is the number of
//! nodes that lose their only connection to the root once `v` is blocked.

use crate::diffusion::Realization;
use crate::graph::NodeId;

const NONE: u32 = u32::MAX;

/// Immediate dominators over a realization, rooted at its source.
///
/// Nodes are stored in dominator-tree preorder, so every subtree occupies a
/// contiguous range `[i, i + size[i])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominatorTree {
    universe: usize,
    order: Vec<NodeId>,
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DominatorTree {
    pub fn root(&self) -> NodeId {
        self.order[0]
    }

    /// Number of reachable nodes, root included.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Reachable nodes in preorder.
    pub fn nodes(&self) -> &[NodeId] {
        &self.order
    }

    /// Preorder position of the immediate dominator of the node at `pos`.
    pub fn parent_pos(&self, pos: usize) -> Option<usize> {
        match self.parent[pos] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    /// Subtree size of the node at preorder position `pos`.
    pub fn size_at(&self, pos: usize) -> usize {
        self.size[pos] as usize
    }

    fn position(&self, v: NodeId) -> Option<usize> {
        self.order.iter().position(|&x| x == v)
    }

    /// Immediate dominator of `v`; `None` for the root and unreached nodes.
    pub fn idom(&self, v: NodeId) -> Option<NodeId> {
        let pos = self.position(v)?;
        self.parent_pos(pos).map(|p| self.order[p])
    }

    /// `c(v)`: the number of nodes in `v`'s subtree, zero if unreached.
    pub fn subtree_size(&self, v: NodeId) -> usize {
        self.position(v).map_or(0, |p| self.size_at(p))
    }

    /// Subtree sizes indexed by node id over the whole graph.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.universe];
        for (i, &v) in self.order.iter().enumerate() {
            out[v as usize] = self.size[i] as usize;
        }
        out
    }

    /// Depth of each node in preorder (root at depth 0).
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.order.len()];
        for i in 1..self.order.len() {
            depth[i] = depth[self.parent[i] as usize] + 1;
        }
        depth
    }
}

/// Nodes reachable from `src` over the realization's live edges.
pub fn reachable_from(phi: &Realization, src: NodeId) -> Vec<NodeId> {
    let Some(start) = phi.local_id(src) else {
        return vec![src];
    };
    let mut seen = vec![false; phi.len()];
    seen[start as usize] = true;
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        out.push(phi.node(u));
        for &w in phi.successors(u) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Builds the dominator tree of `phi` rooted at its source.
pub fn build_dominator_tree(phi: &Realization) -> DominatorTree {
    let idom = immediate_dominators(phi);
    let len = phi.len();

    let mut child_offsets = vec![0u32; len + 1];
    for &d in &idom[1..] {
        child_offsets[d as usize + 1] += 1;
    }
    for i in 0..len {
        child_offsets[i + 1] += child_offsets[i];
    }
    let mut fill = child_offsets.clone();
    let mut children = vec![0u32; len.saturating_sub(1)];
    for (v, &d) in idom.iter().enumerate().skip(1) {
        children[fill[d as usize] as usize] = v as u32;
        fill[d as usize] += 1;
    }

    let mut order = Vec::with_capacity(len);
    let mut parent = Vec::with_capacity(len);
    let mut stack = vec![(0u32, NONE)];
    while let Some((v, p)) = stack.pop() {
        let pos = order.len() as u32;
        order.push(v);
        parent.push(p);
        let kids = &children[child_offsets[v as usize] as usize..child_offsets[v as usize + 1] as usize];
        stack.extend(kids.iter().rev().map(|&c| (c, pos)));
    }
    let mut size = vec![1u32; len];
    for i in (1..len).rev() {
        size[parent[i] as usize] += size[i];
    }

    DominatorTree {
        universe: phi.universe(),
        order: order.into_iter().map(|v| phi.node(v)).collect(),
        parent,
        size,
    }
}

/// Lengauer-Tarjan with path compression (no balancing). Returns the
/// immediate dominator of every local node; the root maps to itself.
fn immediate_dominators(phi: &Realization) -> Vec<u32> {
    let len = phi.len();
    // depth-first numbering
    let mut dfnum = vec![NONE; len];
    let mut vertex = Vec::with_capacity(len);
    let mut dfs_parent = vec![0u32; len];
    let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
    dfnum[0] = 0;
    vertex.push(0u32);
    while let Some(top) = stack.last_mut() {
        let (v, i) = *top;
        let succ = phi.successors(v);
        if i < succ.len() {
            top.1 += 1;
            let w = succ[i];
            if dfnum[w as usize] == NONE {
                dfnum[w as usize] = vertex.len() as u32;
                vertex.push(w);
                dfs_parent[vertex.len() - 1] = dfnum[v as usize];
                stack.push((w, 0));
            }
        } else {
            stack.pop();
        }
    }

    // everything below works on dfs numbers
    let mut semi: Vec<u32> = (0..len as u32).collect();
    let mut label: Vec<u32> = (0..len as u32).collect();
    let mut ancestor = vec![NONE; len];
    let mut idom = vec![0u32; len];
    let mut bucket_head = vec![NONE; len];
    let mut bucket_next = vec![NONE; len];
    let mut path = Vec::new();

    let mut eval = |v: u32, ancestor: &mut [u32], label: &mut [u32], semi: &[u32]| -> u32 {
        if ancestor[v as usize] == NONE {
            return v;
        }
        path.clear();
        let mut x = v;
        while ancestor[ancestor[x as usize] as usize] != NONE {
            path.push(x);
            x = ancestor[x as usize];
        }
        for &x in path.iter().rev() {
            let a = ancestor[x as usize] as usize;
            if semi[label[a] as usize] < semi[label[x as usize] as usize] {
                label[x as usize] = label[a];
            }
            ancestor[x as usize] = ancestor[a];
        }
        label[v as usize]
    };

    for w in (1..len).rev() {
        for &p in phi.predecessors(vertex[w]) {
            let u = eval(dfnum[p as usize], &mut ancestor, &mut label, &semi);
            if semi[u as usize] < semi[w] {
                semi[w] = semi[u as usize];
            }
        }
        let s = semi[w] as usize;
        bucket_next[w] = bucket_head[s];
        bucket_head[s] = w as u32;
        let pw = dfs_parent[w];
        ancestor[w] = pw;
        let mut v = std::mem::replace(&mut bucket_head[pw as usize], NONE);
        while v != NONE {
            let u = eval(v, &mut ancestor, &mut label, &semi);
            idom[v as usize] = if semi[u as usize] < semi[v as usize] { u } else { pw };
            v = bucket_next[v as usize];
        }
    }
    for w in 1..len {
        if idom[w] != semi[w] {
            idom[w] = idom[idom[w] as usize];
        }
    }

    let mut out = vec![0u32; len];
    for w in 1..len {
        out[vertex[w] as usize] = vertex[idom[w] as usize];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn realization(n: usize, edges: &[(NodeId, NodeId)]) -> Realization {
        Realization::from_live_edges(n, 0, edges)
    }

    /// `u` dominates `v` iff `v` is unreachable from the root once `u` is
    /// deleted.
    fn brute_force_idom(n: usize, edges: &[(NodeId, NodeId)]) -> Vec<Option<NodeId>> {
        let reach = |without: Option<NodeId>| {
            let mut seen = vec![false; n];
            if without == Some(0) {
                return seen;
            }
            seen[0] = true;
            let mut stack = vec![0];
            while let Some(u) = stack.pop() {
                for &(a, b) in edges {
                    if a == u && Some(b) != without && !seen[b as usize] {
                        seen[b as usize] = true;
                        stack.push(b);
                    }
                }
            }
            seen
        };
        let all = reach(None);
        let dominators = |v: usize| -> Vec<NodeId> {
            (0..n as NodeId)
                .filter(|&u| u as usize != v && !reach(Some(u))[v])
                .collect()
        };
        (0..n)
            .map(|v| {
                if v == 0 || !all[v] {
                    return None;
                }
                let doms = dominators(v);
                // the immediate dominator is the one dominated by all others
                doms.iter()
                    .copied()
                    .find(|&d| doms.iter().all(|&o| o == d || dominators(d as usize).contains(&o)))
            })
            .collect()
    }

    #[test]
    fn example_realization() {
        let live = fixtures::dominator_example_realization();
        let phi = realization(7, &live);
        assert_eq!(reachable_from(&phi, 0), vec![0, 1, 2, 3, 5, 6]);
        let dt = build_dominator_tree(&phi);
        for v in [1, 2, 3] {
            assert_eq!(dt.idom(v), Some(0));
        }
        assert_eq!(dt.idom(5), Some(3));
        assert_eq!(dt.idom(6), Some(3));
        let sizes = dt.subtree_sizes();
        assert_eq!(&sizes[1..], &[1, 1, 3, 0, 1, 1]);
    }

    #[test]
    fn small_shapes() {
        let chain = build_dominator_tree(&realization(3, &[(0, 1), (1, 2)]));
        assert_eq!((chain.idom(1), chain.idom(2)), (Some(0), Some(1)));
        assert_eq!((chain.subtree_size(1), chain.subtree_size(2)), (2, 1));

        let diamond = build_dominator_tree(&realization(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]));
        assert_eq!(diamond.idom(3), Some(0));

        let star = build_dominator_tree(&realization(4, &[(0, 1), (0, 2), (0, 3)]));
        assert!((1..4).all(|v| star.subtree_size(v) == 1));

        let lonely = realization(3, &[]);
        assert_eq!(reachable_from(&lonely, 0), vec![0]);
        let cycle = realization(2, &[(0, 1), (1, 0)]);
        assert_eq!(reachable_from(&cycle, 0), vec![0, 1]);
    }

    fn arb_edges() -> impl Strategy<Value = (usize, Vec<(NodeId, NodeId)>)> {
        (2usize..8).prop_flat_map(|n| {
            let e = (0..n as NodeId, 0..n as NodeId);
            (Just(n), prop::collection::vec(e, 0..14))
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force((n, raw) in arb_edges()) {
            let mut edges: Vec<_> = raw.into_iter().filter(|(a, b)| a != b).collect();
            edges.sort();
            edges.dedup();
            let phi = realization(n, &edges);
            let dt = build_dominator_tree(&phi);
            let want = brute_force_idom(n, &edges);
            for v in 0..n as NodeId {
                prop_assert_eq!(dt.idom(v), want[v as usize], "node {}", v);
            }
        }

        #[test]
        fn subtree_sizes_sum_to_depths((n, raw) in arb_edges()) {
            let edges: Vec<_> = raw.into_iter().filter(|(a, b)| a != b).collect();
            let dt = build_dominator_tree(&realization(n, &edges));
            let sizes: usize = (1..dt.len()).map(|i| dt.size_at(i)).sum();
            let depths: usize = dt.depths().iter().sum();
            prop_assert_eq!(sizes, depths);
            prop_assert_eq!(dt.size_at(0), dt.len());
            // subtrees are contiguous preorder ranges
            for i in 1..dt.len() {
                let p = dt.parent_pos(i).unwrap();
                prop_assert!(p < i && i < p + dt.size_at(p));
            }
        }
    }
}
