//! Dinic max-flow on undirected capacities.

use std::collections::VecDeque;

pub(super) struct FlowGraph {
    n: usize,
    start: Vec<usize>,
    arcs: Vec<usize>,
    to: Vec<usize>,
}

impl FlowGraph {
    /// `edges` are undirected pairs; edge `k` owns arcs `2k` (a -> b) and
    /// `2k + 1` (b -> a), each the residual twin of the other.
    pub(super) fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut deg = vec![0usize; n + 1];
        for &(a, b) in edges {
            deg[a + 1] += 1;
            deg[b + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut arcs = vec![0; 2 * edges.len()];
        let mut to = vec![0; 2 * edges.len()];
        for (k, &(a, b)) in edges.iter().enumerate() {
            to[2 * k] = b;
            to[2 * k + 1] = a;
            arcs[fill[a]] = 2 * k;
            fill[a] += 1;
            arcs[fill[b]] = 2 * k + 1;
            fill[b] += 1;
        }
        Self { n, start: deg, arcs, to }
    }

    fn out(&self, u: usize) -> &[usize] {
        &self.arcs[self.start[u]..self.start[u + 1]]
    }

    /// Maximum flow from `s` to `t`. `cap` holds both arcs of every edge
    /// (equal for an undirected edge) and is left as the residual capacity.
    /// Residuals at or below `eps` count as saturated.
    pub(super) fn max_flow(&self, s: usize, t: usize, cap: &mut [f64], eps: f64) -> f64 {
        let mut total = 0.0;
        let mut level = vec![u32::MAX; self.n];
        let mut it = vec![0usize; self.n];
        let mut path: Vec<usize> = Vec::new();
        loop {
            level.fill(u32::MAX);
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &a in self.out(u) {
                    let v = self.to[a];
                    if cap[a] > eps && level[v] == u32::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[t] == u32::MAX {
                return total;
            }
            for u in 0..self.n {
                it[u] = self.start[u];
            }
            path.clear();
            let mut u = s;
            loop {
                if u == t {
                    let push = path.iter().map(|&a| cap[a]).fold(f64::INFINITY, f64::min);
                    for &a in &path {
                        cap[a] -= push;
                        cap[a ^ 1] += push;
                    }
                    total += push;
                    path.clear();
                    u = s;
                    continue;
                }
                let mut advanced = false;
                while it[u] < self.start[u + 1] {
                    let a = self.arcs[it[u]];
                    let v = self.to[a];
                    if cap[a] > eps && level[v] == level[u] + 1 {
                        path.push(a);
                        u = v;
                        advanced = true;
                        break;
                    }
                    it[u] += 1;
                }
                if advanced {
                    continue;
                }
                // Dead end: retreat one arc.
                level[u] = u32::MAX;
                match path.pop() {
                    Some(a) => {
                        u = self.to[a ^ 1];
                        it[u] += 1;
                    }
                    None => break,
                }
            }
        }
    }

    /// Nodes reachable from `s` through residual arcs.
    pub(super) fn residual_reach(&self, s: usize, cap: &[f64], eps: f64) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in self.out(u) {
                let v = self.to[a];
                if cap[a] > eps && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diamond() {
        // s=0, t=3, two routes of capacity 2 and 3 joined by a cross edge.
        let g = FlowGraph::new(4, &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]);
        let c = [2.0, 3.0, 3.0, 2.0, 1.0];
        let mut cap: Vec<f64> = c.iter().flat_map(|&x| [x, x]).collect();
        assert_eq!(g.max_flow(0, 3, &mut cap, 0.0), 5.0);
        let s = g.residual_reach(0, &cap, 0.0);
        assert!(s[0] && !s[3]);
    }

    #[test]
    fn disconnected_sink() {
        let g = FlowGraph::new(3, &[(0, 1)]);
        let mut cap = vec![1.0, 1.0];
        assert_eq!(g.max_flow(0, 2, &mut cap, 0.0), 0.0);
    }
}
