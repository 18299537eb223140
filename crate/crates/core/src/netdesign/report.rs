//! Solution reports: design comparison, natural hubs and SEJ kilometres by
//! flow class.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{terminals_by_node, DesignMode, NetworkProblem, NetworkSolution, TONNES_PER_MT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DesignMetrics {
    pub captured: f64,
    pub pipeline_km: f64,
    pub km_per_mt: f64,
    pub capital_capture: f64,
    pub capital_transport: f64,
    pub capital_storage: f64,
    pub capital_total: f64,
    pub levelized_capture: f64,
    pub levelized_transport: f64,
    pub levelized_storage: f64,
    pub levelized_total: f64,
    pub storage_sites: f64,
    pub objective: f64,
    pub sej_km: f64,
}

impl DesignMetrics {
    fn of(s: &NetworkSolution) -> Self {
        let r = &s.report;
        DesignMetrics {
            captured: r.captured,
            pipeline_km: r.pipeline_km,
            km_per_mt: r.km_per_mt,
            capital_capture: r.capital_capture,
            capital_transport: r.capital_transport,
            capital_storage: r.capital_storage,
            capital_total: r.capital_capture + r.capital_transport + r.capital_storage,
            levelized_capture: r.levelized_capture,
            levelized_transport: r.levelized_transport,
            levelized_storage: r.levelized_storage,
            levelized_total: r.levelized_total,
            storage_sites: r.storage_sites as f64,
            objective: r.objective,
            sej_km: r.sej_km,
        }
    }

    fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("captured_mt_y", self.captured),
            ("pipeline_km", self.pipeline_km),
            ("km_per_mt_y", self.km_per_mt),
            ("capital_capture_usd", self.capital_capture),
            ("capital_transport_usd", self.capital_transport),
            ("capital_storage_usd", self.capital_storage),
            ("capital_total_usd", self.capital_total),
            ("levelized_capture_usd_t", self.levelized_capture),
            ("levelized_transport_usd_t", self.levelized_transport),
            ("levelized_storage_usd_t", self.levelized_storage),
            ("levelized_total_usd_t", self.levelized_total),
            ("storage_sites", self.storage_sites),
            ("annual_cost_usd_y", self.objective),
            ("sej_km", self.sej_km),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignComparison {
    pub problem_digest: String,
    pub shared: DesignMetrics,
    pub dedicated: DesignMetrics,
    /// shared − dedicated, metric by metric.
    pub delta: BTreeMap<String, f64>,
    pub shared_le_dedicated: bool,
}

/// Side-by-side metrics of a shared and a dedicated design of one problem.
pub fn compare_designs(shared: &NetworkSolution, dedicated: &NetworkSolution) -> Result<DesignComparison> {
    if shared.problem_digest != dedicated.problem_digest {
        return Err(Error::domain("designs were solved for different problems"));
    }
    let (a, b) = (DesignMetrics::of(shared), DesignMetrics::of(dedicated));
    let delta = a
        .rows()
        .into_iter()
        .zip(b.rows())
        .map(|((k, x), (_, y))| (k.to_string(), x - y))
        .collect();
    let dedicated_feasible = dedicated.report.captured >= dedicated.target - 1e-9;
    let shared_le = a.objective <= b.objective * (1.0 + 1e-9) + 1e-6;
    if shared.mode == DesignMode::Shared && dedicated_feasible && !shared_le && shared.stats.proven_optimal {
        return Err(Error::Internal(format!(
            "shared optimum {} exceeds the dedicated design {}",
            a.objective, b.objective
        )));
    }
    Ok(DesignComparison {
        problem_digest: shared.problem_digest.clone(),
        shared: a,
        dedicated: b,
        delta,
        shared_le_dedicated: shared_le,
    })
}

pub fn format_comparison_csv(c: &DesignComparison) -> String {
    let mut out = String::from("metric,shared,dedicated,delta\n");
    for ((k, a), (_, b)) in c.shared.rows().into_iter().zip(c.dedicated.rows()) {
        out.push_str(&format!("{k},{a},{b},{}\n", a - b));
    }
    out
}

pub fn format_dedicated_table_csv(sol: &NetworkSolution) -> String {
    let mut out = String::from(
        "order,source_id,name,captured_mt_y,capture_usd_t,sink_id,length_km,class_max_mt_y,\
transport_usd_t,storage_usd_t,total_usd_t,transport_usd_per_kt_km_delivered,transport_usd_per_kt_km_nameplate\n",
    );
    for a in &sol.assignments {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            a.order,
            a.source,
            csv_text(&a.name),
            a.captured,
            a.capture_cost,
            a.sink,
            a.length_km,
            a.class_max_flow,
            a.transport_cost,
            a.storage_cost,
            a.total_cost,
            a.transport_per_kt_km_delivered,
            a.transport_per_kt_km_nameplate
        ));
    }
    for u in &sol.unplaced {
        out.push_str(&format!(",{},,,,unplaced: {},,,,,,,\n", u.source, csv_text(&u.reason)));
    }
    out
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubSummary {
    pub hub: usize,
    pub sources: Vec<String>,
    pub sinks: Vec<String>,
    pub captured: f64,
    pub pipeline_km: f64,
    /// $/y.
    pub transport_annual: f64,
    pub transport_usd_t: f64,
    /// Annual transport $ per (Mt/y × km).
    pub transport_usd_per_mt_km: f64,
    pub storage_usd_t: f64,
    /// At least two capture facilities share the component.
    pub natural_hub: bool,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the built network with their active terminals,
/// ordered by increasing captured amount.
pub fn hub_report(problem: &NetworkProblem, sol: &NetworkSolution) -> Vec<HubSummary> {
    let cand = &problem.candidate;
    let mut parent: Vec<usize> = (0..cand.nodes.len()).collect();
    for p in &sol.pipes {
        for &(e, _) in &p.edges {
            let (a, b) = (find(&mut parent, cand.edges[e].from), find(&mut parent, cand.edges[e].to));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    struct Acc {
        sources: Vec<String>,
        sinks: Vec<String>,
        captured: f64,
        km: f64,
        transport: f64,
        storage: f64,
    }
    let mut comps: BTreeMap<usize, Acc> = BTreeMap::new();
    let by_node = terminals_by_node(problem);
    for (node, (srcs, snks)) in &by_node {
        let active_src: Vec<usize> = srcs.iter().copied().filter(|&i| sol.sources[i].capture > 0.0).collect();
        let active_snk: Vec<usize> = snks.iter().copied().filter(|&k| sol.sinks[k].injection > 0.0).collect();
        if active_src.is_empty() && active_snk.is_empty() {
            continue;
        }
        let root = find(&mut parent, *node);
        let acc = comps.entry(root).or_insert(Acc {
            sources: Vec::new(),
            sinks: Vec::new(),
            captured: 0.0,
            km: 0.0,
            transport: 0.0,
            storage: 0.0,
        });
        for i in active_src {
            acc.sources.push(sol.sources[i].id.clone());
            acc.captured += sol.sources[i].capture;
        }
        for k in active_snk {
            acc.sinks.push(sol.sinks[k].id.clone());
            acc.storage += sol.sinks[k].injection * sol.sinks[k].storage_cost * TONNES_PER_MT;
        }
    }
    for p in &sol.pipes {
        let (e, _) = p.edges[0];
        let root = find(&mut parent, cand.edges[e].from);
        if let Some(acc) = comps.get_mut(&root) {
            acc.km += p.length_km;
            acc.transport += p.annual_cost;
        }
    }
    let mut hubs: Vec<HubSummary> = comps
        .into_values()
        .map(|mut a| {
            a.sources.sort();
            a.sinks.sort();
            let tonnes = a.captured * TONNES_PER_MT;
            HubSummary {
                hub: 0,
                natural_hub: a.sources.len() >= 2,
                transport_usd_t: if tonnes > 0.0 { a.transport / tonnes } else { 0.0 },
                transport_usd_per_mt_km: if a.captured > 0.0 && a.km > 0.0 {
                    a.transport / (a.captured * a.km)
                } else {
                    0.0
                },
                storage_usd_t: if tonnes > 0.0 { a.storage / tonnes } else { 0.0 },
                sources: a.sources,
                sinks: a.sinks,
                captured: a.captured,
                pipeline_km: a.km,
                transport_annual: a.transport,
            }
        })
        .collect();
    hubs.sort_by(|a, b| a.captured.total_cmp(&b.captured).then_with(|| a.sources.cmp(&b.sources)));
    for (i, h) in hubs.iter_mut().enumerate() {
        h.hub = i + 1;
    }
    hubs
}

pub fn format_hub_csv(hubs: &[HubSummary]) -> String {
    let mut out = String::from(
        "hub,n_sources,n_sinks,sources,sinks,captured_mt_y,pipeline_km,transport_usd_t,transport_usd_per_mt_km,storage_usd_t,natural_hub\n",
    );
    for h in hubs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            h.hub,
            h.sources.len(),
            h.sinks.len(),
            h.sources.join(";"),
            h.sinks.join(";"),
            h.captured,
            h.pipeline_km,
            h.transport_usd_t,
            h.transport_usd_per_mt_km,
            h.storage_usd_t,
            h.natural_hub
        ));
    }
    out
}

pub const FLOW_CLASS_LABELS: [&str; 5] = ["<1", "1-3", "3-6", "6-9", ">9"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SejClassRow {
    pub label: String,
    pub sej_km: f64,
    pub total_km: f64,
}

fn flow_bin(flow: f64) -> usize {
    [1.0, 3.0, 6.0, 9.0].iter().take_while(|&&b| flow >= b).count()
}

/// Kilometres inside SEJ cells by pipe flow class, plus a Total row.
pub fn sej_km_by_flow_class(sol: &NetworkSolution) -> Vec<SejClassRow> {
    let mut rows: Vec<SejClassRow> = FLOW_CLASS_LABELS
        .iter()
        .map(|l| SejClassRow {
            label: l.to_string(),
            sej_km: 0.0,
            total_km: 0.0,
        })
        .collect();
    for p in &sol.pipes {
        let r = &mut rows[flow_bin(p.flow)];
        r.sej_km += p.sej_km;
        r.total_km += p.length_km;
    }
    let total = SejClassRow {
        label: "Total".into(),
        sej_km: rows.iter().map(|r| r.sej_km).sum(),
        total_km: rows.iter().map(|r| r.total_km).sum(),
    };
    rows.push(total);
    rows
}

pub fn format_sej_table_csv(rows: &[SejClassRow]) -> String {
    let mut out = String::from("flow_class_mt_y,sej_km,total_km\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.label, r.sej_km, r.total_km));
    }
    out
}

/// Ids of sources sharing a component, for tests and reports.
pub fn hub_membership(hubs: &[HubSummary]) -> BTreeSet<BTreeSet<String>> {
    hubs.iter().map(|h| h.sources.iter().cloned().collect()).collect()
}
