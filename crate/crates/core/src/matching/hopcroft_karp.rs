use std::collections::VecDeque;

const NONE: u32 = u32::MAX;
const INF: u32 = u32::MAX;

/// Bipartite graph in compressed-row form: the neighbours of left vertex `u`
/// are `targets[offsets[u]..offsets[u + 1]]`.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl BipartiteGraph {
    pub fn new(n_left: usize, n_right: usize, offsets: Vec<u32>, targets: Vec<u32>) -> Self {
        assert_eq!(offsets.len(), n_left + 1);
        assert_eq!(*offsets.last().unwrap() as usize, targets.len());
        debug_assert!(targets.iter().all(|&v| (v as usize) < n_right));
        Self {
            n_left,
            n_right,
            offsets,
            targets,
        }
    }

    pub fn from_edges(n_left: usize, n_right: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n_left];
        for &(u, v) in edges {
            adj[u].push(v as u32);
        }
        let mut offsets = vec![0u32];
        let mut targets = Vec::with_capacity(edges.len());
        for list in adj {
            targets.extend(list);
            offsets.push(targets.len() as u32);
        }
        Self::new(n_left, n_right, offsets, targets)
    }

    fn neighbours(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len()
    }
}

/// Maximum matching cardinality by Hopcroft–Karp, with a greedy warm start
/// and an explicit-stack DFS so long augmenting paths cannot overflow the
/// call stack. Deterministic for a given edge order.
pub fn maximum_matching(g: &BipartiteGraph) -> usize {
    let mut match_l = vec![NONE; g.n_left];
    let mut match_r = vec![NONE; g.n_right];
    let mut size = 0;

    for (u, slot) in match_l.iter_mut().enumerate() {
        if let Some(&v) = g.neighbours(u).iter().find(|&&v| match_r[v as usize] == NONE) {
            *slot = v;
            match_r[v as usize] = u as u32;
            size += 1;
        }
    }

    let mut dist = vec![INF; g.n_left];
    let mut cursor = vec![0u32; g.n_left];
    let mut queue = VecDeque::new();
    let mut stack: Vec<u32> = Vec::new();
    loop {
        queue.clear();
        for u in 0..g.n_left {
            if match_l[u] == NONE {
                dist[u] = 0;
                queue.push_back(u as u32);
            } else {
                dist[u] = INF;
            }
        }
        let mut reachable_free = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbours(u as usize) {
                let w = match_r[v as usize];
                if w == NONE {
                    reachable_free = true;
                } else if dist[w as usize] == INF {
                    dist[w as usize] = dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !reachable_free {
            break;
        }

        cursor.copy_from_slice(&g.offsets[..g.n_left]);
        for root in 0..g.n_left {
            if match_l[root] != NONE || dist[root] != 0 {
                continue;
            }
            stack.clear();
            stack.push(root as u32);
            while let Some(&u) = stack.last() {
                let u = u as usize;
                if cursor[u] == g.offsets[u + 1] {
                    dist[u] = INF;
                    stack.pop();
                    continue;
                }
                let v = g.targets[cursor[u] as usize];
                let w = match_r[v as usize];
                if w == NONE {
                    // stack[i] takes the right vertex its cursor points at
                    for &x in &stack {
                        let vx = g.targets[cursor[x as usize] as usize];
                        match_l[x as usize] = vx;
                        match_r[vx as usize] = x;
                    }
                    size += 1;
                    break;
                } else if dist[w as usize] != INF && dist[w as usize] == dist[u] + 1 {
                    stack.push(w);
                } else {
                    cursor[u] += 1;
                }
            }
        }
    }
    size
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graphs() {
        assert_eq!(maximum_matching(&BipartiteGraph::from_edges(0, 0, &[])), 0);
        // path u0-v0-u1-v1: greedy picks u0-v0, augmentation fixes u1
        let g = BipartiteGraph::from_edges(2, 2, &[(0, 0), (0, 1), (1, 0)]);
        assert_eq!(maximum_matching(&g), 2);
        // star: three lefts share one right
        let g = BipartiteGraph::from_edges(3, 1, &[(0, 0), (1, 0), (2, 0)]);
        assert_eq!(maximum_matching(&g), 1);
    }

    #[test]
    fn long_augmenting_chain() {
        // greedy matches u_i-v_i, leaving u_n needing a path through every vertex
        let n = 50_000;
        let mut edges = Vec::new();
        for i in 0..n {
            edges.push((i, i));
            edges.push((i + 1, i));
        }
        edges.push((0, n));
        let g = BipartiteGraph::from_edges(n + 1, n + 1, &edges);
        assert_eq!(maximum_matching(&g), n + 1);
    }
}
