//! GeoJSON layers and plot-ready CSV series.

use serde_json::{json, Value};

use crate::capture::FacilityRecord;
use crate::curve::SupplyPoint;
use crate::grid::{Cell, GridSpec};
use crate::netdesign::{NetworkProblem, NetworkSolution};
use crate::phasing::PhasePlan;
use crate::reservoir::StorageSite;
use crate::routing::CandidateNetwork;

fn line(spec: &GridSpec, cells: &[Cell]) -> Value {
    let coords: Vec<[f64; 2]> = cells
        .iter()
        .map(|&c| {
            let (x, y) = spec.center(c);
            [x, y]
        })
        .collect();
    json!({ "type": "LineString", "coordinates": coords })
}

fn point(x: f64, y: f64) -> Value {
    json!({ "type": "Point", "coordinates": [x, y] })
}

fn feature(geometry: Value, properties: Value) -> Value {
    json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

fn collection(features: Vec<Value>) -> String {
    let mut s = serde_json::to_string_pretty(&json!({ "type": "FeatureCollection", "features": features }))
        .expect("geojson serializes");
    s.push('\n');
    s
}

/// Cells of a chain of edges in traversal order.
fn chain_cells(net: &CandidateNetwork, edges: &[(usize, bool)]) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::new();
    for &(e, fwd) in edges {
        let cells = &net.edges[e].cells;
        let it: Box<dyn Iterator<Item = &Cell>> = if fwd {
            Box::new(cells.iter())
        } else {
            Box::new(cells.iter().rev())
        };
        for &c in it {
            if out.last() != Some(&c) {
                out.push(c);
            }
        }
    }
    out
}

pub fn candidate_network_geojson(net: &CandidateNetwork) -> String {
    let mut features: Vec<Value> = net
        .edges
        .iter()
        .map(|e| {
            feature(
                line(&net.grid, &e.cells),
                json!({
                    "id": e.id,
                    "from": net.nodes[e.from].id,
                    "to": net.nodes[e.to].id,
                    "length_km": e.length_km,
                    "weighted_km": e.weighted_km,
                    "sej_km": e.sej_km,
                    "owners_crossed": e.owners_crossed,
                }),
            )
        })
        .collect();
    features.extend(net.nodes.iter().map(|n| {
        feature(
            point(n.x, n.y),
            json!({ "id": n.id, "terminals": n.terminals }),
        )
    }));
    collection(features)
}

pub fn candidate_edges_csv(net: &CandidateNetwork) -> String {
    let mut out = String::from("id,from,to,length_km,routed_cost,weighted_km,sej_km,owners_crossed\n");
    for e in &net.edges {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            e.id, net.nodes[e.from].id, net.nodes[e.to].id, e.length_km, e.routed_cost, e.weighted_km, e.sej_km, e.owners_crossed
        ));
    }
    out
}

pub fn solution_geojson(problem: &NetworkProblem, sol: &NetworkSolution) -> String {
    let net = &problem.candidate;
    let econ = &problem.economics;
    let mut features: Vec<Value> = sol
        .pipes
        .iter()
        .map(|p| {
            feature(
                line(&net.grid, &chain_cells(net, &p.edges)),
                json!({
                    "id": p.id,
                    "class": p.class,
                    "class_max_flow": econ.classes[p.class].max_flow,
                    "flow": p.flow,
                    "length_km": p.length_km,
                    "pumps": p.pumps,
                    "capital": p.capital,
                    "annual_cost": p.annual_cost,
                    "sej_km": p.sej_km,
                    "source": p.source,
                    "sink": p.sink,
                }),
            )
        })
        .collect();
    for (s, spec) in sol.sources.iter().zip(&problem.sources) {
        features.push(feature(
            point(spec.x, spec.y),
            json!({ "id": s.id, "kind": "source", "capture": s.capture, "max_capture": s.max_capture }),
        ));
    }
    for (k, spec) in sol.sinks.iter().zip(&problem.sinks) {
        features.push(feature(
            point(spec.x, spec.y),
            json!({ "id": k.id, "kind": "sink", "injection": k.injection, "injectivity": k.injectivity }),
        ));
    }
    collection(features)
}

pub fn pipes_csv(problem: &NetworkProblem, sol: &NetworkSolution) -> String {
    let mut out = String::from(
        "id,class,class_max_flow_mt_y,flow_mt_y,length_km,weighted_km,pumps,capital_usd,annual_cost_usd_y,sej_km,source,sink\n",
    );
    for p in &sol.pipes {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.id,
            p.class,
            problem.economics.classes[p.class].max_flow,
            p.flow,
            p.length_km,
            p.weighted_km,
            p.pumps,
            p.capital,
            p.annual_cost,
            p.sej_km,
            p.source.as_deref().unwrap_or(""),
            p.sink.as_deref().unwrap_or("")
        ));
    }
    out
}

/// Network state in one phase: capacity built so far, that period's flows,
/// and which pipes are new.
pub fn phase_period_geojson(problem: &NetworkProblem, plan: &PhasePlan, period: usize) -> String {
    let net = &problem.candidate;
    let p = &plan.periods[period];
    let flow_of = |e: usize| p.edge_flows.iter().find(|(x, _)| *x == e).map_or(0.0, |(_, f)| *f);
    let mut features: Vec<Value> = p
        .edge_capacity
        .iter()
        .map(|&(e, cap)| {
            let edge = &net.edges[e];
            let slots: Vec<Value> = plan.edge_slots[e]
                .iter()
                .filter(|s| s.period <= period)
                .map(|s| json!({ "class": s.class, "online_year": plan.periods[s.period].online_year }))
                .collect();
            feature(
                line(&net.grid, &edge.cells),
                json!({
                    "edge": edge.id,
                    "capacity": cap,
                    "flow": flow_of(e),
                    "pipes": slots,
                    "new": p.new_builds.iter().any(|b| b.edge == e),
                    "length_km": edge.length_km,
                }),
            )
        })
        .collect();
    for ((id, x), spec) in p.source_capture.iter().zip(&problem.sources) {
        features.push(feature(
            point(spec.x, spec.y),
            json!({ "id": id, "kind": "source", "capture": x, "new": p.new_sources.contains(id) }),
        ));
    }
    for ((id, z), spec) in p.sink_injection.iter().zip(&problem.sinks) {
        features.push(feature(
            point(spec.x, spec.y),
            json!({ "id": id, "kind": "sink", "injection": z, "new": p.new_sinks.contains(id) }),
        ));
    }
    collection(features)
}

/// Facilities by descending emissions with the cumulative share.
pub fn emissions_rank_csv(facilities: &[FacilityRecord]) -> String {
    let mut sorted: Vec<&FacilityRecord> = facilities.iter().collect();
    sorted.sort_by(|a, b| b.emitted.total_cmp(&a.emitted).then_with(|| a.id.cmp(&b.id)));
    let total: f64 = sorted.iter().map(|f| f.emitted).sum();
    let mut out = String::from("rank,id,emitted_mt_y,cumulative_mt_y,cumulative_share\n");
    let mut cum = 0.0;
    for (k, f) in sorted.iter().enumerate() {
        cum += f.emitted;
        let share = if total > 0.0 { cum / total } else { 0.0 };
        out.push_str(&format!("{},{},{},{},{}\n", k + 1, f.id, f.emitted, cum, share));
    }
    out
}

pub fn supply_curve_csv(points: &[SupplyPoint]) -> String {
    let mut out = String::from("rank,id,amount_mt_y,cumulative_mt_y,cost_usd_t\n");
    for (k, p) in points.iter().enumerate() {
        out.push_str(&format!("{},{},{},{},{}\n", k + 1, p.id, p.amount, p.cumulative, p.cost));
    }
    out
}

pub fn injectivity_by_site_csv(sites: &[StorageSite]) -> String {
    let mut out = String::from("site_id,formation,injectivity_mt_y,capacity_mt,n_wells,cost_usd_t\n");
    for s in sites {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.site.id, s.formation, s.injectivity, s.capacity, s.n_injection_wells, s.storage_cost
        ));
    }
    out
}
