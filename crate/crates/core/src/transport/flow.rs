//! Real-capacity network flow on small dense bipartite graphs.

use std::collections::VecDeque;

/// Residual capacities below this are treated as saturated.
const CAP_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self { edges: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    /// Adds `from -> to` and its residual twin; returns the forward edge id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.edges.push(Edge { to: from, cap: 0.0, cost: -cost });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently carried by forward edge `id`.
    pub fn flow(&self, id: usize) -> f64 {
        self.edges[id + 1].cap
    }

    /// Successive shortest paths from `s` to `t` until `limit` units are sent
    /// or no augmenting path remains. Returns `(flow, cost)`.
    pub fn min_cost_flow(&mut self, s: usize, t: usize, limit: f64) -> (f64, f64) {
        let n = self.adj.len();
        let mut total_flow = 0.0;
        let mut total_cost = 0.0;
        while limit - total_flow > CAP_EPS {
            // Bellman-Ford (queue based); residual costs may be negative.
            let mut dist = vec![f64::INFINITY; n];
            let mut prev_edge = vec![usize::MAX; n];
            let mut in_queue = vec![false; n];
            let mut queue = VecDeque::new();
            dist[s] = 0.0;
            queue.push_back(s);
            in_queue[s] = true;
            while let Some(u) = queue.pop_front() {
                in_queue[u] = false;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap <= CAP_EPS {
                        continue;
                    }
                    let nd = dist[u] + edge.cost;
                    // Strict improvement beyond rounding noise avoids cycling
                    // on zero-cost residual loops.
                    if nd < dist[edge.to] - 1e-14 * (1.0 + nd.abs()) {
                        dist[edge.to] = nd;
                        prev_edge[edge.to] = e;
                        if !in_queue[edge.to] {
                            in_queue[edge.to] = true;
                            queue.push_back(edge.to);
                        }
                    }
                }
            }
            if dist[t] == f64::INFINITY {
                break;
            }
            let mut push = limit - total_flow;
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                total_cost += push * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            total_flow += push;
        }
        (total_flow, total_cost)
    }

    /// Edmonds-Karp maximum flow from `s` to `t`.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let n = self.adj.len();
        let mut total = 0.0;
        loop {
            let mut prev_edge = vec![usize::MAX; n];
            let mut seen = vec![false; n];
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > CAP_EPS && !seen[edge.to] {
                        seen[edge.to] = true;
                        prev_edge[edge.to] = e;
                        queue.push_back(edge.to);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            total += push;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_cost_prefers_cheap_path() {
        // s=0, a=1, b=2, t=3
        let mut g = FlowNetwork::new(4);
        g.add_edge(0, 1, 1.0, 0.0);
        g.add_edge(0, 2, 1.0, 0.0);
        let ab = g.add_edge(1, 3, 1.0, 5.0);
        let bt = g.add_edge(2, 3, 1.0, 1.0);
        let (f, c) = g.min_cost_flow(0, 3, 1.5);
        assert!((f - 1.5).abs() < 1e-15);
        assert!((c - 3.5).abs() < 1e-12);
        assert!((g.flow(bt) - 1.0).abs() < 1e-15);
        assert!((g.flow(ab) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn max_flow_bottleneck() {
        let mut g = FlowNetwork::new(4);
        g.add_edge(0, 1, 0.7, 0.0);
        g.add_edge(0, 2, 0.3, 0.0);
        g.add_edge(1, 3, 0.5, 0.0);
        g.add_edge(2, 3, 1.0, 0.0);
        g.add_edge(1, 2, 1.0, 0.0);
        assert!((g.max_flow(0, 3) - 1.0).abs() < 1e-15);
    }
}
