//! Exact shared-network design by branch-and-bound over edge capacity
//! classes. Each node's bound is a min-cost flow in which every undecided
//! edge carries the lower convex envelope of its class cost curve.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{assemble, edge_pipe, solve_dedicated, DesignMode, NetworkProblem, NetworkSolution, SolverStats, TONNES_PER_MT};
use crate::error::{BindingConstraint, Error, InfeasibilityReport, Result};
use crate::flow::{FlowGraph, EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Branch-and-bound nodes explored before giving up on a proof.
    pub node_limit: usize,
    /// Enumerate all class assignments when their count is at most this.
    pub enumeration_limit: u64,
    /// Seed the incumbent with the dedicated design when it is feasible.
    pub warm_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            node_limit: 200_000,
            enumeration_limit: 0,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EdgeState {
    Free,
    Off,
    Class(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SrcState {
    Free,
    In,
    Out,
}

/// Lower convex envelope of (0,0) and (min(U_c, cap), F_c) as (width, slope) segments.
pub(crate) fn convex_segments(points: &[(f64, f64)], cap: f64) -> Vec<(f64, f64)> {
    if cap <= EPS {
        return Vec::new();
    }
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    for &(u, f) in points {
        let x = u.min(cap);
        match pts.iter_mut().find(|p| (p.0 - x).abs() <= 1e-12) {
            Some(p) => p.1 = p.1.min(f),
            None => pts.push((x, f)),
        }
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies on or above segment a→p.
            if (b.1 - a.1) * (p.0 - a.0) >= (p.1 - a.1) * (b.0 - a.0) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| (w[1].0 - w[0].0, (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
        .collect()
}

pub(crate) struct Relaxed {
    pub value: f64,
    pub capture: Vec<f64>,
    pub injection: Vec<f64>,
    /// Signed net flow per edge.
    pub flow: Vec<f64>,
    /// Envelope cost charged per free edge.
    pub charged: Vec<f64>,
}

struct Ctx<'a> {
    p: &'a NetworkProblem,
    src_nodes: Vec<usize>,
    snk_nodes: Vec<usize>,
    fixed: Vec<Vec<f64>>,
    segments: Vec<Vec<(f64, f64)>>,
}

impl<'a> Ctx<'a> {
    fn new(p: &'a NetworkProblem) -> Self {
        let total_capture: f64 = p.sources.iter().map(|s| s.max_capture).sum();
        let total_inj: f64 = p.sinks.iter().map(|k| k.injectivity).sum();
        // No edge of an optimal acyclic flow carries more than the total delivered.
        let cap = if p.all_or_nothing {
            total_capture.min(total_inj)
        } else {
            p.target
        };
        let ne = p.candidate.edges.len();
        let fixed: Vec<Vec<f64>> = (0..ne)
            .map(|e| (0..p.economics.classes.len()).map(|c| p.edge_annual(e, c)).collect())
            .collect();
        let segments = (0..ne)
            .map(|e| {
                let pts: Vec<(f64, f64)> = p
                    .economics
                    .classes
                    .iter()
                    .zip(&fixed[e])
                    .map(|(c, &f)| (c.max_flow, f))
                    .collect();
                convex_segments(&pts, cap)
            })
            .collect();
        Ctx {
            p,
            src_nodes: p.source_nodes(),
            snk_nodes: p.sink_nodes(),
            fixed,
            segments,
        }
    }

    /// Min-cost flow bound for the given states; `Err(deliverable)` when the
    /// node cannot carry the required flow.
    fn relax(&self, edges: &[EdgeState], srcs: &[SrcState]) -> std::result::Result<Relaxed, f64> {
        let p = self.p;
        let n = p.candidate.nodes.len();
        let (s, s1, t) = (n, n + 1, n + 2);
        let mut g = FlowGraph::new(n + 3);
        let mut src_arcs = Vec::with_capacity(p.sources.len());
        let mut forced = 0.0;
        for (i, src) in p.sources.iter().enumerate() {
            let cost = src.capture_cost * TONNES_PER_MT;
            let arc = match srcs[i] {
                SrcState::Free => Some(g.add_arc(s, self.src_nodes[i], src.max_capture, cost)),
                SrcState::In => {
                    forced += src.max_capture;
                    Some(g.add_arc(s1, self.src_nodes[i], src.max_capture, cost))
                }
                SrcState::Out => None,
            };
            src_arcs.push(arc);
        }
        let mut edge_arcs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); edges.len()];
        let mut constant = 0.0;
        for (e, st) in edges.iter().enumerate() {
            let edge = &p.candidate.edges[e];
            match *st {
                EdgeState::Off => {}
                EdgeState::Class(c) => {
                    let u = p.economics.classes[c].max_flow;
                    constant += self.fixed[e][c];
                    edge_arcs[e].push((g.add_arc(edge.from, edge.to, u, 0.0), 1.0));
                    edge_arcs[e].push((g.add_arc(edge.to, edge.from, u, 0.0), -1.0));
                }
                EdgeState::Free => {
                    for &(w, slope) in &self.segments[e] {
                        edge_arcs[e].push((g.add_arc(edge.from, edge.to, w, slope), 1.0));
                        edge_arcs[e].push((g.add_arc(edge.to, edge.from, w, slope), -1.0));
                    }
                }
            }
        }
        let sink_arcs: Vec<usize> = p
            .sinks
            .iter()
            .enumerate()
            .map(|(k, snk)| g.add_arc(self.snk_nodes[k], t, snk.injectivity, snk.storage_cost * TONNES_PER_MT))
            .collect();
        let (sent1, _) = g.push(s1, t, forced);
        if sent1 < forced - 1e-7 {
            return Err(sent1);
        }
        let rest = (p.target - forced).max(0.0);
        let (sent2, _) = g.push(s, t, rest);
        if sent2 < rest - 1e-7 {
            return Err(sent1 + sent2);
        }
        let capture = src_arcs.iter().map(|a| a.map_or(0.0, |a| g.flow(a))).collect();
        let injection = sink_arcs.iter().map(|&a| g.flow(a)).collect();
        let mut flow = vec![0.0; edges.len()];
        let mut charged = vec![0.0; edges.len()];
        for (e, arcs) in edge_arcs.iter().enumerate() {
            for &(a, sign) in arcs {
                flow[e] += sign * g.flow(a);
            }
        }
        // Arcs come in (forward, backward) pairs per envelope segment.
        for (e, arcs) in edge_arcs.iter().enumerate() {
            if edges[e] != EdgeState::Free {
                continue;
            }
            let segs = &self.segments[e];
            charged[e] = arcs
                .iter()
                .enumerate()
                .map(|(i, &(a, _))| g.flow(a) * segs[i / 2].1)
                .sum();
        }
        Ok(Relaxed {
            value: g.total_cost() + constant,
            capture,
            injection,
            flow,
            charged,
        })
    }

    /// Cost of building the smallest fitting class on every edge with flow.
    fn rounded_cost(&self, r: &Relaxed) -> Option<f64> {
        let p = self.p;
        let mut v = 0.0;
        for (i, s) in p.sources.iter().enumerate() {
            v += r.capture[i] * s.capture_cost * TONNES_PER_MT;
        }
        for (k, snk) in p.sinks.iter().enumerate() {
            v += r.injection[k] * snk.storage_cost * TONNES_PER_MT;
        }
        for (e, &f) in r.flow.iter().enumerate() {
            if f.abs() > 1e-9 {
                v += self.fixed[e][p.economics.class_for(f.abs())?];
            }
        }
        Some(v)
    }

    fn fractional_sources(&self, r: &Relaxed, srcs: &[SrcState]) -> Option<(usize, f64)> {
        if !self.p.all_or_nothing {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, s) in self.p.sources.iter().enumerate() {
            if srcs[i] != SrcState::Free {
                continue;
            }
            let x = r.capture[i];
            let frac = x.min(s.max_capture - x);
            if frac > 1e-7 {
                let score = frac * s.capture_cost.max(1e-9) * TONNES_PER_MT;
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((i, score));
                }
            }
        }
        best
    }

    fn solution(&self, r: &Relaxed, stats: SolverStats) -> NetworkSolution {
        let p = self.p;
        let pipes = r
            .flow
            .iter()
            .enumerate()
            .filter(|(_, f)| f.abs() > 1e-9)
            .map(|(e, &f)| edge_pipe(p, e, p.economics.class_for(f.abs()).expect("fits top class"), f))
            .collect();
        assemble(p, DesignMode::Shared, &r.capture, pipes, &r.injection, stats)
    }
}

/// Branching decisions only; dense states are rebuilt when a node is expanded.
struct Node {
    bound: f64,
    seq: usize,
    edges: Vec<(usize, EdgeState)>,
    srcs: Vec<(usize, SrcState)>,
}

#[derive(PartialEq)]
struct Key(f64, usize);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

fn network_infeasible(p: &NetworkProblem, available: f64) -> Error {
    Error::Infeasible(InfeasibilityReport {
        binding: BindingConstraint::Network,
        required_mt_y: p.target,
        available_mt_y: available,
        period_year: None,
    })
}

/// Minimum annual-cost shared design meeting the target.
pub fn solve_shared(problem: &NetworkProblem) -> Result<NetworkSolution> {
    solve_shared_with(problem, &SolverOptions::default())
}

pub fn solve_shared_with(problem: &NetworkProblem, opts: &SolverOptions) -> Result<NetworkSolution> {
    problem.validate()?;
    problem.check_target(problem.target, None)?;
    let ctx = Ctx::new(problem);
    let ne = problem.candidate.edges.len();
    let nc = problem.economics.classes.len() as u64;
    let combos = (nc + 1).checked_pow(ne as u32);
    if !problem.all_or_nothing && combos.is_some_and(|c| c <= opts.enumeration_limit) {
        return enumerate(&ctx, combos.unwrap());
    }

    let root_edges = vec![EdgeState::Free; ne];
    let root_srcs = vec![SrcState::Free; problem.sources.len()];
    if let Err(avail) = ctx.relax(&root_edges, &root_srcs) {
        return Err(network_infeasible(problem, avail));
    }

    let mut incumbent: Option<(f64, Relaxed)> = None;
    if opts.warm_start {
        if let Some(r) = warm_start(&ctx) {
            if let Some(v) = ctx.rounded_cost(&r) {
                incumbent = Some((v, r));
            }
        }
    }

    let mut heap = BinaryHeap::new();
    let mut store: Vec<Option<Node>> = Vec::new();
    let push = |heap: &mut BinaryHeap<Reverse<Key>>, store: &mut Vec<Option<Node>>, node: Node| {
        heap.push(Reverse(Key(node.bound, node.seq)));
        store.push(Some(node));
    };
    push(
        &mut heap,
        &mut store,
        Node {
            bound: f64::NEG_INFINITY,
            seq: 0,
            edges: Vec::new(),
            srcs: Vec::new(),
        },
    );
    let tol = |inc: f64| 1e-9 * inc.abs().max(1.0);
    let mut explored = 0usize;
    let mut hit_limit = false;
    while let Some(Reverse(Key(bound, seq))) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if bound >= inc - tol(*inc) {
                continue;
            }
        }
        if explored >= opts.node_limit {
            heap.push(Reverse(Key(bound, seq)));
            hit_limit = true;
            break;
        }
        explored += 1;
        let node = store[seq].take().expect("node stored once");
        let mut edge_states = root_edges.clone();
        for &(e, st) in &node.edges {
            edge_states[e] = st;
        }
        let mut src_states = root_srcs.clone();
        for &(i, st) in &node.srcs {
            src_states[i] = st;
        }
        let Ok(r) = ctx.relax(&edge_states, &src_states) else {
            continue;
        };
        if let Some((inc, _)) = &incumbent {
            if r.value >= inc - tol(*inc) {
                continue;
            }
        }
        let frac_src = ctx.fractional_sources(&r, &src_states);
        if frac_src.is_none() {
            if let Some(v) = ctx.rounded_cost(&r) {
                if incumbent.as_ref().is_none_or(|(inc, _)| v < inc - tol(*inc)) {
                    incumbent = Some((v, r_clone(&r)));
                }
            }
        }
        // Branch on the edge whose envelope most understates its true cost.
        let mut branch_edge: Option<(usize, f64)> = None;
        for (e, &f) in r.flow.iter().enumerate() {
            if edge_states[e] != EdgeState::Free || f.abs() <= 1e-9 {
                continue;
            }
            let c = problem.economics.class_for(f.abs()).expect("envelope is capped at the top class");
            let gap = ctx.fixed[e][c] - r.charged[e];
            if gap > 1e-6 * ctx.fixed[e][c].max(1.0) && branch_edge.is_none_or(|(_, g)| gap > g) {
                branch_edge = Some((e, gap));
            }
        }
        let branch_src = match (frac_src, branch_edge) {
            (Some((i, s)), Some((_, g))) if s >= g => Some(i),
            (Some((i, _)), None) => Some(i),
            _ => None,
        };
        if let Some(i) = branch_src {
            for st in [SrcState::In, SrcState::Out] {
                let mut srcs = node.srcs.clone();
                srcs.push((i, st));
                let seq = store.len();
                push(
                    &mut heap,
                    &mut store,
                    Node {
                        bound: r.value,
                        seq,
                        edges: node.edges.clone(),
                        srcs,
                    },
                );
            }
        } else if let Some((e, _)) = branch_edge {
            let children =
                std::iter::once(EdgeState::Off).chain((0..problem.economics.classes.len()).map(EdgeState::Class));
            for st in children {
                let mut edges = node.edges.clone();
                edges.push((e, st));
                let seq = store.len();
                push(
                    &mut heap,
                    &mut store,
                    Node {
                        bound: r.value,
                        seq,
                        edges,
                        srcs: node.srcs.clone(),
                    },
                );
            }
        }
    }
    let Some((value, best)) = incumbent else {
        if hit_limit {
            return Err(Error::Internal("node limit reached before a feasible design was found".into()));
        }
        return Err(network_infeasible(problem, 0.0));
    };
    let lower_bound = if hit_limit {
        heap.iter().map(|Reverse(Key(b, _))| *b).fold(value, f64::min)
    } else {
        value
    };
    let stats = SolverStats {
        method: "branch_and_bound".into(),
        nodes: explored,
        proven_optimal: !hit_limit,
        lower_bound,
        gap: if value > 0.0 { (value - lower_bound) / value } else { 0.0 },
    };
    Ok(ctx.solution(&best, stats))
}

fn r_clone(r: &Relaxed) -> Relaxed {
    Relaxed {
        value: r.value,
        capture: r.capture.clone(),
        injection: r.injection.clone(),
        flow: r.flow.clone(),
        charged: r.charged.clone(),
    }
}

/// Dedicated design mapped onto candidate edges, when it meets the target.
fn warm_start(ctx: &Ctx<'_>) -> Option<Relaxed> {
    let p = ctx.p;
    let d = solve_dedicated(p).ok()?;
    let injected: f64 = d.sinks.iter().map(|k| k.injection).sum();
    if injected < p.target - 1e-9 {
        return None;
    }
    let flow = d.edge_flows(p.candidate.edges.len());
    if flow.iter().any(|f| p.economics.class_for(f.abs()).is_none()) {
        return None;
    }
    Some(Relaxed {
        value: 0.0,
        capture: d.sources.iter().map(|s| s.capture).collect(),
        injection: d.sinks.iter().map(|k| k.injection).collect(),
        charged: vec![0.0; flow.len()],
        flow,
    })
}

fn enumerate(ctx: &Ctx<'_>, combos: u64) -> Result<NetworkSolution> {
    let p = ctx.p;
    let ne = p.candidate.edges.len();
    let nc = p.economics.classes.len();
    let srcs = vec![SrcState::Free; p.sources.len()];
    let mut best: Option<(f64, Relaxed)> = None;
    let mut digits = vec![0usize; ne];
    for _ in 0..combos {
        let states: Vec<EdgeState> = digits
            .iter()
            .map(|&d| if d == 0 { EdgeState::Off } else { EdgeState::Class(d - 1) })
            .collect();
        if let Ok(r) = ctx.relax(&states, &srcs) {
            if best.as_ref().is_none_or(|(b, _)| r.value < b - 1e-9 * b.abs().max(1.0)) {
                best = Some((r.value, r));
            }
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d <= nc {
                break;
            }
            *d = 0;
        }
    }
    let (value, r) = best.ok_or_else(|| network_infeasible(p, 0.0))?;
    let stats = SolverStats {
        method: "enumeration".into(),
        nodes: combos as usize,
        proven_optimal: true,
        lower_bound: value,
        gap: 0.0,
    };
    Ok(ctx.solution(&r, stats))
}
