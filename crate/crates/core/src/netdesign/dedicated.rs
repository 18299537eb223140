//! Dedicated one-pipe-per-source baseline: sources are placed one at a time,
//! largest first and then by straight-line distance from the largest, each
//! on its cheapest remaining sink.

use serde::{Deserialize, Serialize};

use super::{assemble, distance, route_pipe, DesignMode, NetworkProblem, NetworkSolution, SolverStats, TONNES_PER_MT};
use crate::error::Result;
use crate::routing::PairRoute;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedicatedAssignment {
    /// Processing position, from 1.
    pub order: usize,
    pub source: String,
    pub name: String,
    pub sink: String,
    /// Mt/y.
    pub captured: f64,
    pub capture_cost: f64,
    pub class: usize,
    pub class_max_flow: f64,
    pub length_km: f64,
    /// $/t.
    pub transport_cost: f64,
    pub storage_cost: f64,
    pub total_cost: f64,
    /// $ per 10³ t-km on delivered tonnes.
    pub transport_per_kt_km_delivered: f64,
    /// $ per 10³ t-km on pipe nameplate capacity.
    pub transport_per_kt_km_nameplate: f64,
    /// Sink injectivity left after this placement, Mt/y.
    pub sink_remaining: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unplaced {
    pub source: String,
    pub reason: String,
}

/// Greedy sequential matching; pipelines are never shared but
/// several may end at one sink.
pub fn solve_dedicated(problem: &NetworkProblem) -> Result<NetworkSolution> {
    problem.validate()?;
    let econ = &problem.economics;
    let cand = &problem.candidate;
    let n = problem.sources.len();

    let mut order: Vec<usize> = (0..n).collect();
    let mut assignments = Vec::new();
    let mut unplaced = Vec::new();
    let mut capture = vec![0.0; n];
    let mut injection = vec![0.0; problem.sinks.len()];
    let mut remaining: Vec<f64> = problem.sinks.iter().map(|k| k.injectivity).collect();
    let mut pipes = Vec::new();

    if n > 0 {
        let largest = (0..n)
            .max_by(|&a, &b| {
                let (sa, sb) = (&problem.sources[a], &problem.sources[b]);
                sa.max_capture.total_cmp(&sb.max_capture).then_with(|| sb.id.cmp(&sa.id))
            })
            .expect("nonempty");
        let origin = (problem.sources[largest].x, problem.sources[largest].y);
        order.sort_by(|&a, &b| {
            let (sa, sb) = (&problem.sources[a], &problem.sources[b]);
            (a != largest)
                .cmp(&(b != largest))
                .then_with(|| distance(origin, (sa.x, sa.y)).total_cmp(&distance(origin, (sb.x, sb.y))))
                .then_with(|| sa.id.cmp(&sb.id))
        });
    }

    for &i in &order {
        let src = &problem.sources[i];
        let q = src.max_capture;
        if q <= 0.0 {
            continue;
        }
        let Some(class) = econ.class_for(q) else {
            unplaced.push(Unplaced {
                source: src.id.clone(),
                reason: format!("capture {q} Mt/y exceeds the largest pipeline class"),
            });
            continue;
        };
        let src_node = cand.node_of(&src.key()).expect("validated");
        let mut best: Option<(f64, usize, PairRoute, f64)> = None;
        for (k, snk) in problem.sinks.iter().enumerate() {
            if remaining[k] < q - 1e-9 {
                continue;
            }
            let route = if cand.node_of(&snk.key()) == Some(src_node) {
                PairRoute {
                    from: src.key(),
                    to: snk.key(),
                    edges: Vec::new(),
                    length_km: 0.0,
                    routed_cost: 0.0,
                }
            } else {
                match cand.route(&src.key(), &snk.key()) {
                    Some(r) => r,
                    None => continue,
                }
            };
            let annual = if route.edges.is_empty() {
                0.0
            } else {
                route_pipe(problem, "", &route, class, q).annual_cost
            };
            let transport = annual / (q * TONNES_PER_MT);
            let total = transport + snk.storage_cost;
            let better = match &best {
                None => true,
                Some((b, bk, _, _)) => total < *b - 1e-12 || (total <= *b + 1e-12 && snk.id < problem.sinks[*bk].id),
            };
            if better {
                best = Some((total, k, route, transport));
            }
        }
        let Some((total, k, route, transport)) = best else {
            unplaced.push(Unplaced {
                source: src.id.clone(),
                reason: "no storage site with enough remaining injectivity".into(),
            });
            continue;
        };
        remaining[k] -= q;
        capture[i] = q;
        injection[k] += q;
        let snk = &problem.sinks[k];
        let mut length_km = 0.0;
        if !route.edges.is_empty() {
            let mut pipe = route_pipe(problem, &format!("d:{}", src.id), &route, class, q);
            pipe.source = Some(src.id.clone());
            pipe.sink = Some(snk.id.clone());
            length_km = pipe.length_km;
            pipes.push(pipe);
        }
        let per_kt_km = |tonnes: f64| {
            if length_km > 0.0 {
                transport * q * TONNES_PER_MT / (tonnes * TONNES_PER_MT * length_km) * 1.0e3
            } else {
                0.0
            }
        };
        assignments.push(DedicatedAssignment {
            order: assignments.len() + 1,
            source: src.id.clone(),
            name: src.name.clone(),
            sink: snk.id.clone(),
            captured: q,
            capture_cost: src.capture_cost,
            class,
            class_max_flow: econ.classes[class].max_flow,
            length_km,
            transport_cost: transport,
            storage_cost: snk.storage_cost,
            total_cost: src.capture_cost + total,
            transport_per_kt_km_delivered: per_kt_km(q),
            transport_per_kt_km_nameplate: per_kt_km(econ.classes[class].max_flow),
            sink_remaining: remaining[k],
        });
    }

    let stats = SolverStats {
        method: "dedicated".into(),
        nodes: 0,
        proven_optimal: false,
        lower_bound: 0.0,
        gap: 0.0,
    };
    let mut sol = assemble(problem, DesignMode::Dedicated, &capture, pipes, &injection, stats);
    sol.assignments = assignments;
    sol.unplaced = unplaced;
    Ok(sol)
}
