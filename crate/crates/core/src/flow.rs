//! Min-cost flow by successive shortest paths with node potentials.
//! Capacities are real-valued; residuals below `EPS` count as saturated.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    cost: Vec<f64>,
    original: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64, usize);

impl Eq for Dist {}
impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl FlowGraph {
    pub fn new(nodes: usize) -> Self {
        FlowGraph {
            head: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            cost: Vec::new(),
            original: Vec::new(),
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.head.push(Vec::new());
        self.head.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.head.len()
    }

    /// Add arc u→v; returns its id. The paired residual arc is `id ^ 1`.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64, cost: f64) -> usize {
        let id = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([cap, 0.0]);
        self.cost.extend([cost, -cost]);
        self.original.extend([cap, 0.0]);
        self.head[u].push(id);
        self.head[v].push(id + 1);
        id
    }

    /// Flow currently on a forward arc.
    pub fn flow(&self, arc: usize) -> f64 {
        self.cap[arc ^ 1]
    }

    fn potentials(&self, s: usize) -> Vec<f64> {
        // Bellman–Ford (queue-based) over the residual graph.
        let n = self.head.len();
        let mut d = vec![f64::INFINITY; n];
        let mut in_q = vec![false; n];
        let mut q = std::collections::VecDeque::new();
        d[s] = 0.0;
        q.push_back(s);
        in_q[s] = true;
        while let Some(u) = q.pop_front() {
            in_q[u] = false;
            for &a in &self.head[u] {
                if self.cap[a] > EPS {
                    let v = self.to[a];
                    let nd = d[u] + self.cost[a];
                    if nd < d[v] - 1e-12 {
                        d[v] = nd;
                        if !in_q[v] {
                            in_q[v] = true;
                            q.push_back(v);
                        }
                    }
                }
            }
        }
        d
    }

    /// Send up to `amount` from `s` to `t` at minimum cost. Returns
    /// (sent, cost of the sent flow).
    pub fn push(&mut self, s: usize, t: usize, amount: f64) -> (f64, f64) {
        let n = self.head.len();
        let mut pi = self.potentials(s);
        let mut sent = 0.0;
        let mut total = 0.0;
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        while amount - sent > EPS {
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            prev.iter_mut().for_each(|p| *p = usize::MAX);
            let mut done = vec![false; n];
            let mut heap = BinaryHeap::new();
            dist[s] = 0.0;
            heap.push(Reverse(Dist(0.0, s)));
            while let Some(Reverse(Dist(d, u))) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                for &a in &self.head[u] {
                    if self.cap[a] <= EPS {
                        continue;
                    }
                    let v = self.to[a];
                    if done[v] || !pi[v].is_finite() {
                        continue;
                    }
                    let rc = (self.cost[a] + pi[u] - pi[v]).max(0.0);
                    let nd = d + rc;
                    if nd < dist[v] {
                        dist[v] = nd;
                        prev[v] = a;
                        heap.push(Reverse(Dist(nd, v)));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    pi[v] += dist[v];
                }
            }
            let mut push = amount - sent;
            let mut v = t;
            while v != s {
                let a = prev[v];
                push = push.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = prev[v];
                self.cap[a] -= push;
                self.cap[a ^ 1] += push;
                total += push * self.cost[a];
                v = self.to[a ^ 1];
            }
            sent += push;
        }
        (sent, total)
    }

    /// Σ flow × cost over forward arcs.
    pub fn total_cost(&self) -> f64 {
        (0..self.to.len())
            .step_by(2)
            .map(|a| self.flow(a) * self.cost[a])
            .sum()
    }

    pub fn capacity(&self, arc: usize) -> f64 {
        self.original[arc]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_cheaper_parallel_path() {
        let mut g = FlowGraph::new(4);
        let a = g.add_arc(0, 1, 5.0, 1.0);
        let b = g.add_arc(0, 2, 5.0, 2.0);
        g.add_arc(1, 3, 3.0, 1.0);
        g.add_arc(2, 3, 5.0, 1.0);
        let (sent, cost) = g.push(0, 3, 6.0);
        assert!((sent - 6.0).abs() < 1e-12);
        assert!((cost - (3.0 * 2.0 + 3.0 * 3.0)).abs() < 1e-9);
        assert!((g.flow(a) - 3.0).abs() < 1e-12);
        assert!((g.flow(b) - 3.0).abs() < 1e-12);
        assert!((g.total_cost() - cost).abs() < 1e-9);
    }

    #[test]
    fn reports_shortfall() {
        let mut g = FlowGraph::new(2);
        g.add_arc(0, 1, 2.0, 1.0);
        let (sent, _) = g.push(0, 1, 5.0);
        assert!((sent - 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_phase_keeps_first_phase_saturated() {
        // Phase 1 routes 2 units from node 4 through node 1; phase 2 from node 0.
        let mut g = FlowGraph::new(5);
        let forced = g.add_arc(4, 1, 2.0, 0.0);
        g.add_arc(0, 2, 10.0, 0.0);
        g.add_arc(1, 3, 2.0, 5.0);
        g.add_arc(2, 3, 10.0, 1.0);
        g.add_arc(2, 1, 10.0, 0.0);
        let (s1, _) = g.push(4, 3, 2.0);
        let (s2, _) = g.push(0, 3, 3.0);
        assert!((s1 - 2.0).abs() < 1e-12 && (s2 - 3.0).abs() < 1e-12);
        assert!((g.flow(forced) - 2.0).abs() < 1e-12);
        assert!((g.total_cost() - (2.0 * 5.0 + 3.0)).abs() < 1e-9);
    }
}
