//! Single-period network design: the shared-infrastructure optimum, the
//! dedicated one-pipe-per-source baseline, and their reports.

mod dedicated;
mod report;
pub(crate) mod shared;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BindingConstraint, Error, InfeasibilityReport, Result};
use crate::routing::{CandidateNetwork, PairRoute};

pub use dedicated::{solve_dedicated, DedicatedAssignment, Unplaced};
pub use report::{
    compare_designs, format_comparison_csv, format_dedicated_table_csv, format_hub_csv, format_sej_table_csv,
    hub_membership, hub_report, sej_km_by_flow_class, DesignComparison, DesignMetrics, HubSummary, SejClassRow, FLOW_CLASS_LABELS,
};
pub use shared::{solve_shared, solve_shared_with, SolverOptions};

/// Mt/y → t/y.
pub const TONNES_PER_MT: f64 = 1.0e6;
const TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityClass {
    /// Mt/y.
    pub max_flow: f64,
    /// $/km.
    pub capital_per_km: f64,
    /// $/km/y.
    pub om_per_km_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineEconomics {
    pub classes: Vec<CapacityClass>,
    pub project_years: u32,
    pub fixed_charge_rate: f64,
    pub pump_spacing_km: f64,
    /// $ per pump station.
    pub pump_capital: f64,
    /// $/y per pump station.
    pub pump_om_per_year: f64,
    /// Operating pressure window, barg. Recorded only.
    pub pressure_window_barg: (f64, f64),
}

impl Default for PipelineEconomics {
    fn default() -> Self {
        let class = |max_flow: f64, capital_per_km: f64| CapacityClass {
            max_flow,
            capital_per_km,
            om_per_km_y: 0.025 * capital_per_km,
        };
        PipelineEconomics {
            classes: vec![
                class(1.0, 0.9e6),
                class(3.0, 1.3e6),
                class(6.0, 1.8e6),
                class(9.0, 2.2e6),
                class(25.0, 3.0e6),
            ],
            project_years: 30,
            fixed_charge_rate: 0.106,
            pump_spacing_km: 80.0,
            pump_capital: 5.0e6,
            pump_om_per_year: 0.2e6,
            pressure_window_barg: (86.0, 150.0),
        }
    }
}

impl PipelineEconomics {
    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() {
            return Err(Error::config("at least one capacity class is required"));
        }
        for w in self.classes.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if !(b.max_flow > a.max_flow) {
                return Err(Error::config("class max_flow must strictly increase"));
            }
            if !(b.capital_per_km > a.capital_per_km) {
                return Err(Error::config("class capital_per_km must strictly increase"));
            }
            if !(b.capital_per_km / b.max_flow < a.capital_per_km / a.max_flow) {
                return Err(Error::config("capital per unit of capacity must strictly decrease across classes"));
            }
        }
        if self.classes.iter().any(|c| !(c.max_flow > 0.0 && c.capital_per_km > 0.0 && c.om_per_km_y >= 0.0)) {
            return Err(Error::config("class capacities and costs must be positive"));
        }
        if !(self.fixed_charge_rate > 0.0 && self.pump_spacing_km > 0.0) {
            return Err(Error::config("fixed_charge_rate and pump_spacing_km must be > 0"));
        }
        if !(self.pump_capital >= 0.0 && self.pump_om_per_year >= 0.0) {
            return Err(Error::config("pump costs must be >= 0"));
        }
        Ok(())
    }

    pub fn max_flow(&self) -> f64 {
        self.classes.last().map_or(0.0, |c| c.max_flow)
    }

    /// Smallest class carrying `flow`.
    pub fn class_for(&self, flow: f64) -> Option<usize> {
        self.classes.iter().position(|c| c.max_flow >= flow - TOL)
    }

    /// Intermediate pump stations on a pipe of this length.
    pub fn pumps(&self, length_km: f64) -> u32 {
        let n = (length_km / self.pump_spacing_km - 1e-9).ceil() - 1.0;
        n.max(0.0) as u32
    }

    /// Overnight capital of a pipe of class `c`, $.
    pub fn pipe_capital(&self, c: usize, length_km: f64, weighted_km: f64) -> f64 {
        self.classes[c].capital_per_km * weighted_km + f64::from(self.pumps(length_km)) * self.pump_capital
    }

    /// Annual cost of a pipe: annualized capital plus O&M, $/y.
    pub fn pipe_annual(&self, c: usize, length_km: f64, weighted_km: f64) -> f64 {
        self.pipe_capital(c, length_km, weighted_km) * self.fixed_charge_rate
            + self.classes[c].om_per_km_y * length_km
            + f64::from(self.pumps(length_km)) * self.pump_om_per_year
    }

    /// Annual O&M only, $/y.
    pub fn pipe_om(&self, c: usize, length_km: f64) -> f64 {
        self.classes[c].om_per_km_y * length_km + f64::from(self.pumps(length_km)) * self.pump_om_per_year
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub id: String,
    pub name: String,
    pub x: f64,
    pub y: f64,
    /// Mt/y.
    pub max_capture: f64,
    /// Levelized $/t at full capture.
    pub capture_cost: f64,
    /// Overnight capital at full capture, $.
    pub capture_capital: f64,
}

impl SourceSpec {
    pub fn key(&self) -> String {
        format!("src:{}", self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkSpec {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// Mt/y.
    pub injectivity: f64,
    /// $/t.
    pub storage_cost: f64,
    /// Overnight capital, $.
    pub capital: f64,
}

impl SinkSpec {
    pub fn key(&self) -> String {
        format!("snk:{}", self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkProblem {
    pub candidate: CandidateNetwork,
    pub sources: Vec<SourceSpec>,
    pub sinks: Vec<SinkSpec>,
    /// Mt/y.
    pub target: f64,
    pub economics: PipelineEconomics,
    /// Capture each source fully or not at all.
    pub all_or_nothing: bool,
}

impl NetworkProblem {
    pub fn validate(&self) -> Result<()> {
        self.economics.validate()?;
        if !(self.target >= 0.0 && self.target.is_finite()) {
            return Err(Error::domain(format!("target must be >= 0, got {}", self.target)));
        }
        for s in &self.sources {
            if !(s.max_capture >= 0.0 && s.capture_cost >= 0.0) {
                return Err(Error::domain(format!("source {}: capture and cost must be >= 0", s.id)));
            }
            if self.candidate.node_of(&s.key()).is_none() {
                return Err(Error::domain(format!("source {} is not a candidate-network terminal", s.id)));
            }
        }
        for k in &self.sinks {
            if !(k.injectivity >= 0.0 && k.storage_cost >= 0.0) {
                return Err(Error::domain(format!("sink {}: injectivity and cost must be >= 0", k.id)));
            }
            if self.candidate.node_of(&k.key()).is_none() {
                return Err(Error::domain(format!("sink {} is not a candidate-network terminal", k.id)));
            }
        }
        Ok(())
    }

    /// Aggregate feasibility of the target.
    pub fn check_target(&self, target: f64, period_year: Option<i32>) -> Result<()> {
        let capture: f64 = self.sources.iter().map(|s| s.max_capture).sum();
        let inj: f64 = self.sinks.iter().map(|k| k.injectivity).sum();
        let report = |binding, available| {
            Err(Error::Infeasible(InfeasibilityReport {
                binding,
                required_mt_y: target,
                available_mt_y: available,
                period_year,
            }))
        };
        if target > capture + TOL {
            return report(BindingConstraint::Capture, capture);
        }
        if target > inj + TOL {
            return report(BindingConstraint::Injectivity, inj);
        }
        Ok(())
    }

    /// Stable digest identifying the problem.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("problem serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub(crate) fn source_nodes(&self) -> Vec<usize> {
        self.sources
            .iter()
            .map(|s| self.candidate.node_of(&s.key()).expect("validated"))
            .collect()
    }

    pub(crate) fn sink_nodes(&self) -> Vec<usize> {
        self.sinks
            .iter()
            .map(|k| self.candidate.node_of(&k.key()).expect("validated"))
            .collect()
    }

    /// Annual cost of building class `c` on candidate edge `e`, $/y.
    pub fn edge_annual(&self, e: usize, c: usize) -> f64 {
        let edge = &self.candidate.edges[e];
        self.economics.pipe_annual(c, edge.length_km, edge.weighted_km)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    Shared,
    Dedicated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFlow {
    pub id: String,
    pub capture: f64,
    pub max_capture: f64,
    pub capture_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinkFlow {
    pub id: String,
    pub injection: f64,
    pub injectivity: f64,
    pub storage_cost: f64,
}

/// One physical pipeline: a single candidate edge in shared designs, or a
/// whole source-to-sink route in dedicated designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipe {
    pub id: String,
    /// (candidate edge, flow runs from→to).
    pub edges: Vec<(usize, bool)>,
    pub class: usize,
    /// Mt/y, > 0.
    pub flow: f64,
    pub length_km: f64,
    pub weighted_km: f64,
    pub pumps: u32,
    pub capital: f64,
    /// $/y.
    pub annual_cost: f64,
    pub sej_km: f64,
    /// Source served, for dedicated pipes.
    pub source: Option<String>,
    pub sink: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CostReport {
    /// Mt/y.
    pub captured: f64,
    pub annual_capture: f64,
    pub annual_transport: f64,
    pub annual_storage: f64,
    /// $/y; the minimized quantity.
    pub objective: f64,
    pub levelized_capture: f64,
    pub levelized_transport: f64,
    pub levelized_storage: f64,
    pub levelized_total: f64,
    pub pipeline_km: f64,
    pub km_per_mt: f64,
    pub storage_sites: usize,
    pub capital_capture: f64,
    pub capital_transport: f64,
    pub capital_storage: f64,
    pub sej_km: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverStats {
    pub method: String,
    pub nodes: usize,
    pub proven_optimal: bool,
    pub lower_bound: f64,
    /// (incumbent − bound) / incumbent.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSolution {
    pub mode: DesignMode,
    pub problem_digest: String,
    pub target: f64,
    pub sources: Vec<SourceFlow>,
    pub pipes: Vec<Pipe>,
    pub sinks: Vec<SinkFlow>,
    pub report: CostReport,
    pub stats: SolverStats,
    /// Dedicated mode: placement sequence.
    pub assignments: Vec<DedicatedAssignment>,
    pub unplaced: Vec<Unplaced>,
}

impl NetworkSolution {
    /// Net signed flow per candidate edge (positive = from→to).
    pub fn edge_flows(&self, edge_count: usize) -> Vec<f64> {
        let mut f = vec![0.0; edge_count];
        for p in &self.pipes {
            for &(e, fwd) in &p.edges {
                f[e] += if fwd { p.flow } else { -p.flow };
            }
        }
        f
    }

    /// Candidate edges carrying any pipe.
    pub fn built_edges(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.pipes.iter().flat_map(|p| p.edges.iter().map(|&(e, _)| e)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Build a shared-mode pipe for one candidate edge.
pub(crate) fn edge_pipe(problem: &NetworkProblem, e: usize, class: usize, signed_flow: f64) -> Pipe {
    let edge = &problem.candidate.edges[e];
    let econ = &problem.economics;
    Pipe {
        id: edge.id.clone(),
        edges: vec![(e, signed_flow >= 0.0)],
        class,
        flow: signed_flow.abs(),
        length_km: edge.length_km,
        weighted_km: edge.weighted_km,
        pumps: econ.pumps(edge.length_km),
        capital: econ.pipe_capital(class, edge.length_km, edge.weighted_km),
        annual_cost: econ.pipe_annual(class, edge.length_km, edge.weighted_km),
        sej_km: edge.sej_km,
        source: None,
        sink: None,
    }
}

/// Assemble a solution and its cost report from decision values.
pub(crate) fn assemble(
    problem: &NetworkProblem,
    mode: DesignMode,
    capture: &[f64],
    pipes: Vec<Pipe>,
    injection: &[f64],
    stats: SolverStats,
) -> NetworkSolution {
    let clean = |v: f64| if v.abs() < 1e-9 { 0.0 } else { v };
    let sources: Vec<SourceFlow> = problem
        .sources
        .iter()
        .zip(capture)
        .map(|(s, &x)| SourceFlow {
            id: s.id.clone(),
            capture: clean(x),
            max_capture: s.max_capture,
            capture_cost: s.capture_cost,
        })
        .collect();
    let sinks: Vec<SinkFlow> = problem
        .sinks
        .iter()
        .zip(injection)
        .map(|(k, &z)| SinkFlow {
            id: k.id.clone(),
            injection: clean(z),
            injectivity: k.injectivity,
            storage_cost: k.storage_cost,
        })
        .collect();
    let report = cost_report(problem, &sources, &pipes, &sinks);
    NetworkSolution {
        mode,
        problem_digest: problem.digest(),
        target: problem.target,
        sources,
        pipes,
        sinks,
        report,
        stats,
        assignments: Vec::new(),
        unplaced: Vec::new(),
    }
}

/// Recompute the cost report from raw decision values.
pub fn cost_report(problem: &NetworkProblem, sources: &[SourceFlow], pipes: &[Pipe], sinks: &[SinkFlow]) -> CostReport {
    let captured: f64 = sources.iter().map(|s| s.capture).sum();
    let annual_capture: f64 = sources.iter().map(|s| s.capture * s.capture_cost * TONNES_PER_MT).sum();
    let annual_transport: f64 = pipes.iter().map(|p| p.annual_cost).sum();
    let annual_storage: f64 = sinks.iter().map(|k| k.injection * k.storage_cost * TONNES_PER_MT).sum();
    let tonnes = captured * TONNES_PER_MT;
    let per_t = |v: f64| if tonnes > 0.0 { v / tonnes } else { 0.0 };
    let pipeline_km: f64 = pipes.iter().map(|p| p.length_km).sum();
    let capital_capture = problem
        .sources
        .iter()
        .zip(sources)
        .map(|(spec, s)| {
            if spec.max_capture > 0.0 {
                spec.capture_capital * s.capture / spec.max_capture
            } else {
                0.0
            }
        })
        .sum();
    let capital_storage = problem
        .sinks
        .iter()
        .zip(sinks)
        .filter(|(_, k)| k.injection > 0.0)
        .map(|(spec, _)| spec.capital)
        .sum();
    CostReport {
        captured,
        annual_capture,
        annual_transport,
        annual_storage,
        objective: annual_capture + annual_transport + annual_storage,
        levelized_capture: per_t(annual_capture),
        levelized_transport: per_t(annual_transport),
        levelized_storage: per_t(annual_storage),
        levelized_total: per_t(annual_capture + annual_transport + annual_storage),
        pipeline_km,
        km_per_mt: if captured > 0.0 { pipeline_km / captured } else { 0.0 },
        storage_sites: sinks.iter().filter(|k| k.injection > 0.0).count(),
        capital_capture,
        capital_transport: pipes.iter().map(|p| p.capital).sum(),
        capital_storage,
        sej_km: pipes.iter().map(|p| p.sej_km).sum(),
    }
}

/// Independent feasibility check: flow conservation at every node, pipe
/// capacities, capture and injectivity bounds, the target, and the report.
pub fn check_solution(problem: &NetworkProblem, sol: &NetworkSolution) -> Result<()> {
    let fail = |m: String| Err(Error::Internal(format!("solution check failed: {m}")));
    let cand = &problem.candidate;
    let mut balance = vec![0.0; cand.nodes.len()];
    for (s, node) in sol.sources.iter().zip(problem.source_nodes()) {
        if s.capture < -TOL || s.capture > s.max_capture + TOL {
            return fail(format!("source {} capture {} outside [0, {}]", s.id, s.capture, s.max_capture));
        }
        if problem.all_or_nothing && s.capture > TOL && (s.capture - s.max_capture).abs() > TOL {
            return fail(format!("source {} partially captured", s.id));
        }
        balance[node] += s.capture;
    }
    for (k, node) in sol.sinks.iter().zip(problem.sink_nodes()) {
        if k.injection < -TOL || k.injection > k.injectivity + TOL {
            return fail(format!("sink {} injection {} outside [0, {}]", k.id, k.injection, k.injectivity));
        }
        balance[node] -= k.injection;
    }
    for p in &sol.pipes {
        let cap = problem.economics.classes[p.class].max_flow;
        if !(p.flow > 0.0) || p.flow > cap + TOL {
            return fail(format!("pipe {} flow {} outside (0, {}]", p.id, p.flow, cap));
        }
        // Walk the pipe edge by edge; consecutive edges must share a node.
        let mut at: Option<usize> = None;
        for &(e, fwd) in &p.edges {
            let edge = &cand.edges[e];
            let (u, v) = if fwd { (edge.from, edge.to) } else { (edge.to, edge.from) };
            if let Some(prev) = at {
                if prev != u {
                    return fail(format!("pipe {} is not a contiguous walk", p.id));
                }
            }
            balance[u] -= p.flow;
            balance[v] += p.flow;
            at = Some(v);
        }
    }
    for (n, b) in balance.iter().enumerate() {
        if b.abs() > 1e-6 {
            return fail(format!("flow imbalance {b} at node {}", cand.nodes[n].id));
        }
    }
    let injected: f64 = sol.sinks.iter().map(|k| k.injection).sum();
    // Dedicated designs place whole sources and report the rest as unplaced.
    if sol.mode == DesignMode::Shared && injected < problem.target - 1e-6 {
        return fail(format!("injection {injected} below target {}", problem.target));
    }
    let r = cost_report(problem, &sol.sources, &sol.pipes, &sol.sinks);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
    if !close(r.objective, sol.report.objective) || !close(r.pipeline_km, sol.report.pipeline_km) {
        return fail("reported totals differ from recomputation".into());
    }
    Ok(())
}

/// Cost of a dedicated single-user pipe along a terminal-pair route.
pub(crate) fn route_pipe(
    problem: &NetworkProblem,
    id: &str,
    route: &PairRoute,
    class: usize,
    flow: f64,
) -> Pipe {
    let cand = &problem.candidate;
    let econ = &problem.economics;
    let length_km: f64 = route.edges.iter().map(|&(e, _)| cand.edges[e].length_km).sum();
    let weighted_km: f64 = route.edges.iter().map(|&(e, _)| cand.edges[e].weighted_km).sum();
    let sej_km: f64 = route.edges.iter().map(|&(e, _)| cand.edges[e].sej_km).sum();
    Pipe {
        id: id.to_string(),
        edges: route.edges.clone(),
        class,
        flow,
        length_km,
        weighted_km,
        pumps: econ.pumps(length_km),
        capital: econ.pipe_capital(class, length_km, weighted_km),
        annual_cost: econ.pipe_annual(class, length_km, weighted_km),
        sej_km,
        source: None,
        sink: None,
    }
}

/// Straight-line distance between two points, m.
pub(crate) fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Map node index → sources and sinks located there.
pub(crate) fn terminals_by_node(problem: &NetworkProblem) -> BTreeMap<usize, (Vec<usize>, Vec<usize>)> {
    let mut m: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, n) in problem.source_nodes().into_iter().enumerate() {
        m.entry(n).or_default().0.push(i);
    }
    for (i, n) in problem.sink_nodes().into_iter().enumerate() {
        m.entry(n).or_default().1.push(i);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_classes_have_scale_economies() {
        PipelineEconomics::default().validate().unwrap();
    }

    #[test]
    fn pump_count() {
        let e = PipelineEconomics::default();
        assert_eq!(e.pumps(0.0), 0);
        assert_eq!(e.pumps(80.0), 0);
        assert_eq!(e.pumps(80.5), 1);
        assert_eq!(e.pumps(240.0), 2);
    }

    #[test]
    fn class_lookup() {
        let e = PipelineEconomics::default();
        assert_eq!(e.class_for(0.5), Some(0));
        assert_eq!(e.class_for(1.0), Some(0));
        assert_eq!(e.class_for(1.5), Some(1));
        assert_eq!(e.class_for(26.0), None);
    }
}
