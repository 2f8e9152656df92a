//! Small directed-graph helpers shared by the verifier constructions.
//!
//! Graphs are given as adjacency lists over dense `usize` node ids; edge
//! payloads are carried as indices into the caller's own edge table.

use std::collections::VecDeque;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Finds one directed cycle, returned as the list of edge indices along it.
///
/// `edges[e] = (source, target)`; `out[v]` lists the edge ids leaving `v`.
pub(crate) fn find_cycle(out: &[Vec<usize>], edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let n = out.len();
    let mut color = vec![Color::White; n];
    // Edge used to enter each grey node.
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];

    for root in 0..n {
        if color[root] != Color::White {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = Color::Grey;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < out[v].len() {
                let e = out[v][*next];
                *next += 1;
                let w = edges[e].1;
                match color[w] {
                    Color::White => {
                        color[w] = Color::Grey;
                        parent_edge[w] = Some(e);
                        stack.push((w, 0));
                    }
                    Color::Grey => {
                        // Back edge v -> w closes a cycle through the grey stack.
                        let mut cycle = vec![e];
                        let mut cur = v;
                        while cur != w {
                            let pe = parent_edge[cur].expect("grey node has a parent edge");
                            cycle.push(pe);
                            cur = edges[pe].0;
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    Color::Black => {}
                }
            } else {
                color[v] = Color::Black;
                stack.pop();
            }
        }
    }
    None
}

/// Nodes that lie on at least one cycle of the subgraph induced by `keep`.
///
/// A node is cyclic iff its strongly connected component (within the
/// induced subgraph) contains at least one edge.
pub(crate) fn cyclic_nodes(
    n: usize,
    edges: &[(usize, usize)],
    keep_node: impl Fn(usize) -> bool,
    keep_edge: impl Fn(usize) -> bool,
) -> Vec<bool> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, edges.len());
    for _ in 0..n {
        g.add_node(());
    }
    let mut self_loop = vec![false; n];
    for (e, &(s, t)) in edges.iter().enumerate() {
        if keep_node(s) && keep_node(t) && keep_edge(e) {
            if s == t {
                self_loop[s] = true;
            }
            g.add_edge(NodeIndex::new(s), NodeIndex::new(t), ());
        }
    }
    let mut cyclic = vec![false; n];
    for comp in tarjan_scc(&g) {
        if comp.len() > 1 {
            for v in comp {
                cyclic[v.index()] = true;
            }
        } else if self_loop[comp[0].index()] {
            cyclic[comp[0].index()] = true;
        }
    }
    cyclic
}

/// Breadth-first search from `sources` to any node satisfying `goal`,
/// following only edges accepted by `keep_edge`. Returns the edge ids of a
/// shortest path (empty if a source is already a goal).
pub(crate) fn bfs_path(
    out: &[Vec<usize>],
    edges: &[(usize, usize)],
    sources: impl IntoIterator<Item = usize>,
    goal: impl Fn(usize) -> bool,
    keep_edge: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let n = out.len();
    let mut seen = vec![false; n];
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for s in sources {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        if goal(v) {
            let mut path = Vec::new();
            let mut cur = v;
            while let Some(e) = via[cur] {
                path.push(e);
                cur = edges[e].0;
            }
            path.reverse();
            return Some(path);
        }
        for &e in &out[v] {
            if !keep_edge(e) {
                continue;
            }
            let w = edges[e].1;
            if !seen[w] {
                seen[w] = true;
                via[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    None
}

/// Shortest cycle through `start` using only edges accepted by `keep_edge`.
pub(crate) fn cycle_through(
    out: &[Vec<usize>],
    edges: &[(usize, usize)],
    start: usize,
    keep_edge: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    // Self-loops are the shortest possible cycle.
    if let Some(&e) = out[start]
        .iter()
        .find(|&&e| keep_edge(e) && edges[e].1 == start)
    {
        return Some(vec![e]);
    }
    let mut best: Option<Vec<usize>> = None;
    for &e in &out[start] {
        if !keep_edge(e) {
            continue;
        }
        let w = edges[e].1;
        if let Some(rest) = bfs_path(out, edges, [w], |v| v == start, &keep_edge) {
            if best.as_ref().is_none_or(|b| rest.len() + 1 < b.len()) {
                let mut cycle = vec![e];
                cycle.extend(rest);
                best = Some(cycle);
            }
        }
    }
    best
}
