//! Primal network simplex for uncapacitated minimum-cost flow.
//!
//! Both bounded-Lipschitz programs in this crate are LP duals of
//! transshipment problems: the node potentials at optimality are the optimal
//! test-function values and the flow cost is the optimum. The solver keeps a
//! strongly feasible spanning tree rooted at an artificial node, prices arcs
//! by block search and re-roots the moved subtree after every pivot.

use crate::error::{Error, Result};

/// A directed graph with nonnegative arc costs and unbounded arc capacities.
pub trait Network {
    fn node_count(&self) -> usize;
    fn arc_count(&self) -> usize;
    /// `(source, target, cost)` of arc `a`.
    fn arc(&self, a: usize) -> (usize, usize, f64);

    fn max_cost(&self) -> f64 {
        (0..self.arc_count())
            .map(|a| self.arc(a).2)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct FlowSolution {
    /// Minimum total cost.
    pub cost: f64,
    /// Node potentials `pi` with `cost(u -> v) + pi[u] - pi[v] >= 0` on every arc.
    /// The LP-dual variable of node `v` is `-pi[v]`, up to an additive constant.
    pub potential: Vec<f64>,
    pub pivots: usize,
}

const NONE: usize = usize::MAX;

/// Arc list network, mostly for tests and small sparse programs.
#[derive(Debug, Clone, Default)]
pub struct ArcList {
    pub nodes: usize,
    pub arcs: Vec<(usize, usize, f64)>,
}

impl Network for ArcList {
    fn node_count(&self) -> usize {
        self.nodes
    }
    fn arc_count(&self) -> usize {
        self.arcs.len()
    }
    #[inline]
    fn arc(&self, a: usize) -> (usize, usize, f64) {
        self.arcs[a]
    }
}

struct Tree {
    parent: Vec<usize>,
    pred: Vec<usize>,
    /// True when the tree arc into `v` points from `v` to its parent.
    up: Vec<bool>,
    flow: Vec<f64>,
    pi: Vec<f64>,
    depth: Vec<usize>,
    first_child: Vec<usize>,
    next_sib: Vec<usize>,
    prev_sib: Vec<usize>,
}

impl Tree {
    fn detach(&mut self, v: usize) {
        let (p, n) = (self.prev_sib[v], self.next_sib[v]);
        if p != NONE {
            self.next_sib[p] = n;
        } else {
            self.first_child[self.parent[v]] = n;
        }
        if n != NONE {
            self.prev_sib[n] = p;
        }
        self.prev_sib[v] = NONE;
        self.next_sib[v] = NONE;
    }

    fn attach(&mut self, v: usize, p: usize) {
        let f = self.first_child[p];
        self.next_sib[v] = f;
        self.prev_sib[v] = NONE;
        if f != NONE {
            self.prev_sib[f] = v;
        }
        self.first_child[p] = v;
        self.parent[v] = p;
    }
}

/// Solves `min sum_a cost_a x_a` subject to `out(v) - in(v) = supply[v]`, `x >= 0`.
///
/// Supplies must sum to (numerically) zero; a residual below `1e-9` of the
/// total supply is absorbed by the artificial root.
pub fn min_cost_flow<N: Network>(net: &N, supply: &[f64]) -> Result<FlowSolution> {
    let n = net.node_count();
    let m = net.arc_count();
    if supply.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} supplies for {n} nodes",
            supply.len()
        )));
    }
    let total: f64 = supply.iter().map(|s| s.abs()).sum();
    let imbalance: f64 = supply.iter().sum();
    if imbalance.abs() > 1e-9 * total.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "supplies do not balance (net {imbalance:e})"
        )));
    }
    let mut max_cost = 0.0f64;
    for a in 0..m {
        let (u, v, c) = net.arc(a);
        if u >= n || v >= n || !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidInput(format!(
                "arc {a} = ({u}, {v}, {c}) is not a nonnegative finite-cost arc"
            )));
        }
        max_cost = max_cost.max(c);
    }
    let art_cost = (n as f64 + 1.0) * (max_cost + 1.0);
    let tol = 1e-12 * art_cost;
    let root = n;

    let mut t = Tree {
        parent: vec![root; n + 1],
        pred: (0..=n).map(|v| m + v).collect(),
        up: vec![false; n + 1],
        flow: vec![0.0; n + 1],
        pi: vec![0.0; n + 1],
        depth: vec![1; n + 1],
        first_child: vec![NONE; n + 1],
        next_sib: vec![NONE; n + 1],
        prev_sib: vec![NONE; n + 1],
    };
    t.parent[root] = NONE;
    t.depth[root] = 0;
    // Orientation of the artificial arc of each node, fixed at start.
    let art_up: Vec<bool> = supply.iter().map(|&s| s >= 0.0).collect();
    for v in 0..n {
        t.attach(v, root);
        t.up[v] = art_up[v];
        t.flow[v] = supply[v].abs();
        t.pi[v] = if art_up[v] { -art_cost } else { art_cost };
    }

    let endpoints = |a: usize| -> (usize, usize, f64) {
        if a < m {
            net.arc(a)
        } else {
            let v = a - m;
            if art_up[v] {
                (v, root, art_cost)
            } else {
                (root, v, art_cost)
            }
        }
    };

    let block = ((m as f64).sqrt().ceil() as usize).max(16).min(m.max(1));
    let mut next_arc = 0usize;
    let mut pivots = 0usize;
    let mut path = Vec::new();
    let mut stack = Vec::new();

    loop {
        // Block search pricing.
        let mut entering = NONE;
        let mut best = -tol;
        let mut scanned = 0usize;
        let mut in_block = 0usize;
        while scanned < m {
            let a = next_arc;
            let (u, v, c) = net.arc(a);
            let rc = c + t.pi[u] - t.pi[v];
            if rc < best {
                best = rc;
                entering = a;
            }
            next_arc += 1;
            if next_arc == m {
                next_arc = 0;
            }
            scanned += 1;
            in_block += 1;
            if in_block == block {
                if entering != NONE {
                    break;
                }
                in_block = 0;
            }
        }
        if entering == NONE {
            break;
        }
        pivots += 1;

        let (first, second, _) = net.arc(entering);
        // Join node.
        let (mut a, mut b) = (first, second);
        while a != b {
            if t.depth[a] >= t.depth[b] {
                a = t.parent[a];
            } else {
                b = t.parent[b];
            }
        }
        let join = a;

        // Leaving arc, keeping the tree strongly feasible.
        let mut delta = f64::INFINITY;
        let mut u_out = NONE;
        let mut side = 0u8;
        let mut u = first;
        while u != join {
            if t.up[u] && t.flow[u] < delta {
                delta = t.flow[u];
                u_out = u;
                side = 1;
            }
            u = t.parent[u];
        }
        u = second;
        while u != join {
            if !t.up[u] && t.flow[u] <= delta {
                delta = t.flow[u];
                u_out = u;
                side = 2;
            }
            u = t.parent[u];
        }
        if u_out == NONE {
            return Err(Error::InvalidInput(
                "unbounded flow problem (negative-cost cycle)".into(),
            ));
        }

        if delta > 0.0 {
            u = first;
            while u != join {
                t.flow[u] += if t.up[u] { -delta } else { delta };
                u = t.parent[u];
            }
            u = second;
            while u != join {
                t.flow[u] += if t.up[u] { delta } else { -delta };
                u = t.parent[u];
            }
        }

        let (u_in, v_in) = if side == 1 {
            (first, second)
        } else {
            (second, first)
        };

        // Re-root the path u_in -> ... -> u_out under v_in.
        path.clear();
        let mut w = u_in;
        loop {
            path.push(w);
            if w == u_out {
                break;
            }
            w = t.parent[w];
        }
        let saved: Vec<(usize, bool, f64)> =
            path.iter().map(|&w| (t.pred[w], t.up[w], t.flow[w])).collect();
        for &w in &path {
            t.detach(w);
        }
        for i in (1..path.len()).rev() {
            let (child, new_parent) = (path[i], path[i - 1]);
            let (arc, was_up, f) = saved[i - 1];
            t.attach(child, new_parent);
            t.pred[child] = arc;
            t.up[child] = !was_up;
            t.flow[child] = f;
        }
        t.attach(u_in, v_in);
        t.pred[u_in] = entering;
        t.up[u_in] = first == u_in;
        t.flow[u_in] = delta;

        // Refresh depth and potentials on the moved subtree.
        stack.clear();
        stack.push(u_in);
        while let Some(v) = stack.pop() {
            let p = t.parent[v];
            let (_, _, c) = endpoints(t.pred[v]);
            t.depth[v] = t.depth[p] + 1;
            t.pi[v] = if t.up[v] { t.pi[p] - c } else { t.pi[p] + c };
            let mut ch = t.first_child[v];
            while ch != NONE {
                stack.push(ch);
                ch = t.next_sib[ch];
            }
        }
    }

    let mut cost = 0.0;
    let mut residual = 0.0;
    for v in 0..n {
        if t.pred[v] < m {
            cost += t.flow[v] * net.arc(t.pred[v]).2;
        } else {
            residual += t.flow[v];
        }
    }
    if residual > 1e-9 * total.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "infeasible flow problem (unrouted supply {residual:e})"
        )));
    }
    t.pi.truncate(n);
    Ok(FlowSolution {
        cost,
        potential: t.pi,
        pivots,
    })
}
