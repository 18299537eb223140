//! Stage orchestration: each stage reads its inputs (scenario files or
//! upstream artifacts in the output directory) and writes its artifacts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::capture::{cost_supply_curve, estimate, read_facilities_csv, CaptureEstimate, FacilityRecord};
use crate::costsurface::{build_sej_layer, compose_cost_surface, read_tract_table, tracts_from_raster, SejMode};
use crate::error::{Error, Result};
use crate::export;
use crate::grid::{read_ascii_grid, write_ascii_grid, BoolGrid, RasterGrid};
use crate::netdesign::{
    check_solution, compare_designs, format_comparison_csv, format_dedicated_table_csv, format_hub_csv,
    format_sej_table_csv, hub_report, sej_km_by_flow_class, solve_dedicated, solve_shared_with, NetworkProblem,
    NetworkSolution, SinkSpec, SourceSpec,
};
use crate::phasing::{format_phase_costs_csv, solve_myopic, solve_phased_from, PhasePlan};
use crate::reservoir::co2::TABLE_VERSION;
use crate::reservoir::{
    characterize_sites, format_storage_sites_csv, read_adjacency_csv, read_formations_csv, storage_supply_curve,
    DroppedSite, StorageSite,
};
use crate::routing::{build_candidate_network, CandidateNetwork, EdgeMetrics, Terminal, TerminalKind};
use crate::scenario::Scenario;
use crate::screening::{format_sites_csv, free_mask, read_announced_csv, screen_sites, CandidateSite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Capture,
    Screen,
    Characterize,
    Surface,
    Route,
    SolveShared,
    SolveDedicated,
    Compare,
    Phase,
    All,
}

impl Stage {
    pub const PIPELINE: [Stage; 9] = [
        Stage::Capture,
        Stage::Screen,
        Stage::Characterize,
        Stage::Surface,
        Stage::Route,
        Stage::SolveShared,
        Stage::SolveDedicated,
        Stage::Compare,
        Stage::Phase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Capture => "capture",
            Stage::Screen => "screen",
            Stage::Characterize => "characterize",
            Stage::Surface => "surface",
            Stage::Route => "route",
            Stage::SolveShared => "solve-shared",
            Stage::SolveDedicated => "solve-dedicated",
            Stage::Compare => "compare",
            Stage::Phase => "phase",
            Stage::All => "all",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::PIPELINE
            .into_iter()
            .chain([Stage::All])
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown stage `{s}`")))
    }
}

/// Artifact names, shared by writers and readers.
pub mod artifacts {
    pub const CAPTURE_JSON: &str = "capture.json";
    pub const CAPTURE_CSV: &str = "capture.csv";
    pub const CAPTURE_SUPPLY: &str = "capture_supply_curve.csv";
    pub const SITES_JSON: &str = "sites.json";
    pub const SITES_CSV: &str = "sites.csv";
    pub const FREE_MASK: &str = "free_mask.asc";
    pub const STORAGE_JSON: &str = "storage_sites.json";
    pub const STORAGE_CSV: &str = "storage_sites.csv";
    pub const DROPPED_CSV: &str = "dropped_sites.csv";
    pub const STORAGE_SUPPLY: &str = "storage_supply_curve.csv";
    pub const COST_SURFACE: &str = "cost_surface.asc";
    pub const ECONOMIC_SURFACE: &str = "economic_surface.asc";
    pub const SEJ_LAYER: &str = "sej_layer.asc";
    pub const CANDIDATE_JSON: &str = "candidate_network.json";
    pub const CANDIDATE_GEOJSON: &str = "candidate_network.geojson";
    pub const CANDIDATE_CSV: &str = "candidate_edges.csv";
    pub const SHARED_JSON: &str = "shared_solution.json";
    pub const SHARED_GEOJSON: &str = "shared_solution.geojson";
    pub const SHARED_PIPES: &str = "shared_pipes.csv";
    pub const SHARED_HUBS: &str = "shared_hubs.csv";
    pub const DEDICATED_JSON: &str = "dedicated_solution.json";
    pub const DEDICATED_GEOJSON: &str = "dedicated_solution.geojson";
    pub const DEDICATED_PIPES: &str = "dedicated_pipes.csv";
    pub const DEDICATED_TABLE: &str = "dedicated_table.csv";
    pub const COMPARISON: &str = "comparison.csv";
    pub const PHASE_JSON: &str = "phase_plan.json";
    pub const MYOPIC_JSON: &str = "myopic_plan.json";
    pub const PHASE_COSTS: &str = "phase_costs.csv";
    pub const PHASE_SUMMARY: &str = "phase_summary.csv";
    pub const INFEASIBILITY: &str = "infeasibility.json";
    pub const METADATA: &str = "run_metadata.json";
    pub const PLOTS: &str = "plots";
}

use artifacts as a;

/// Capture stage output per facility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureRow {
    pub facility: FacilityRecord,
    pub estimate: CaptureEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageArtifact {
    pub sites: Vec<StorageSite>,
    pub dropped: Vec<DroppedSite>,
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub stages: Vec<Stage>,
    /// Solver statistics by stage.
    pub stats: BTreeMap<String, Value>,
}

struct Ctx<'a> {
    sc: &'a Scenario,
    out: PathBuf,
    stats: BTreeMap<String, Value>,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    write_text(path, &s)
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn plot(&self, name: &str) -> PathBuf {
        self.out.join(a::PLOTS).join(name)
    }

    fn read<T: DeserializeOwned>(&self, stage: Stage, name: &str, upstream: Stage) -> Result<T> {
        let p = self.path(name);
        if !p.is_file() {
            return Err(Error::MissingArtifact {
                stage: stage.to_string(),
                artifact: name.to_string(),
                upstream: upstream.to_string(),
            });
        }
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            file: p.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    fn read_grid(&self, stage: Stage, name: &str, upstream: Stage) -> Result<RasterGrid<f64>> {
        let p = self.path(name);
        if !p.is_file() {
            return Err(Error::MissingArtifact {
                stage: stage.to_string(),
                artifact: name.to_string(),
                upstream: upstream.to_string(),
            });
        }
        read_ascii_grid(&p)
    }

    fn input_grid(&self, p: &Path) -> Result<RasterGrid<f64>> {
        read_ascii_grid(&self.sc.resolve(p))
    }

    fn capture(&mut self) -> Result<()> {
        let sc = self.sc;
        let facilities = read_facilities_csv(&sc.resolve(&sc.inputs.facilities))?;
        let mut rows = Vec::with_capacity(facilities.len());
        let mut csv = String::from(
            "id,name,sector,x,y,emitted_mt_y,capturable_fraction,co2_concentration,captured_mt_y,cost_usd_t,\
capital_usd,effective_abatement_mt_y,below_floor\n",
        );
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for f in &facilities {
            let e = estimate(f, &sc.capture)?;
            let sector = serde_json::to_value(f.sector).expect("sector serializes");
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                f.id,
                f.name,
                sector.as_str().unwrap_or(""),
                f.x,
                f.y,
                f.emitted,
                f.capturable_fraction,
                f.co2_concentration,
                e.captured,
                opt(e.cost),
                opt(e.capital),
                e.effective_abatement,
                e.below_floor
            ));
            rows.push(CaptureRow {
                facility: f.clone(),
                estimate: e,
            });
        }
        let curve = cost_supply_curve(&facilities, &sc.capture)?;
        write_json(&self.path(a::CAPTURE_JSON), &rows)?;
        write_text(&self.path(a::CAPTURE_CSV), &csv)?;
        write_text(&self.path(a::CAPTURE_SUPPLY), &export::supply_curve_csv(&curve))?;
        write_text(&self.plot("emissions_rank.csv"), &export::emissions_rank_csv(&facilities))?;
        write_text(&self.plot("capture_cost_supply.csv"), &export::supply_curve_csv(&curve))
    }

    fn screen(&mut self) -> Result<()> {
        let sc = self.sc;
        let landcover = self.input_grid(&sc.inputs.landcover)?;
        let fields = self.input_grid(&sc.inputs.active_fields)?.to_mask();
        let announced = match &sc.inputs.announced {
            Some(p) => read_announced_csv(&sc.resolve(p))?,
            None => Vec::new(),
        };
        let free = free_mask(&landcover, &fields, &sc.screening)?;
        let sites = screen_sites(&landcover, &fields, &sc.screening, &announced)?;
        write_ascii_grid(&self.path(a::FREE_MASK), &free.to_f64())?;
        write_json(&self.path(a::SITES_JSON), &sites)?;
        write_text(&self.path(a::SITES_CSV), &format_sites_csv(&sites))
    }

    fn characterize(&mut self) -> Result<()> {
        let sc = self.sc;
        let sites: Vec<CandidateSite> = self.read(Stage::Characterize, a::SITES_JSON, Stage::Screen)?;
        let formations = read_formations_csv(&sc.resolve(&sc.inputs.formations))?;
        let adjacency = read_adjacency_csv(&sc.resolve(&sc.inputs.adjacency), &formations)?;
        let (kept, dropped) = characterize_sites(
            &sites,
            &adjacency,
            &sc.reservoir.monte_carlo,
            sc.seed,
            &sc.reservoir.costs,
            sc.reservoir.formation_mode,
        )?;
        let mut dropped_csv = String::from("site_id,reason\n");
        for d in &dropped {
            dropped_csv.push_str(&format!("{},\"{}\"\n", d.site_id, d.reason.replace('"', "'")));
        }
        let curve = storage_supply_curve(&kept);
        write_json(
            &self.path(a::STORAGE_JSON),
            &StorageArtifact {
                sites: kept.clone(),
                dropped,
            },
        )?;
        write_text(&self.path(a::STORAGE_CSV), &format_storage_sites_csv(&kept))?;
        write_text(&self.path(a::DROPPED_CSV), &dropped_csv)?;
        write_text(&self.path(a::STORAGE_SUPPLY), &export::supply_curve_csv(&curve))?;
        write_text(&self.plot("injectivity_by_site.csv"), &export::injectivity_by_site_csv(&kept))?;
        write_text(&self.plot("storage_cost_supply.csv"), &export::supply_curve_csv(&curve))
    }

    fn sej_layer(&self, mode: SejMode) -> Result<Option<BoolGrid>> {
        let sc = self.sc;
        let (Some(pop), Some(ids), Some(table)) = (&sc.inputs.population, &sc.inputs.tract_ids, &sc.inputs.tracts) else {
            return Ok(None);
        };
        let population = self.input_grid(pop)?;
        let tract_ids = self.input_grid(ids)?;
        let table = read_tract_table(&sc.resolve(table))?;
        let tracts = tracts_from_raster(&tract_ids, &table);
        Ok(Some(build_sej_layer(&population, &tracts, &sc.sej.params(mode))?))
    }

    fn surface(&mut self) -> Result<()> {
        let sc = self.sc;
        let mut layers = Vec::new();
        for (name, p) in &sc.inputs.cost_layers {
            layers.push((name.clone(), self.input_grid(p)?));
        }
        let refs: Vec<(&str, &RasterGrid<f64>)> = layers.iter().map(|(n, g)| (n.as_str(), g)).collect();
        let sej = self.sej_layer(sc.sej.mode)?;
        let base = if refs.is_empty() {
            // Without cost layers the landcover grid defines the extent.
            let lc = self.input_grid(&sc.inputs.landcover)?;
            compose_cost_surface(&[], &sc.surface.weights, Some(&lc.map(|_| false)))?
        } else {
            compose_cost_surface(&refs, &sc.surface.weights, None)?
        };
        let routed = match (&sej, sc.sej.mode) {
            (Some(layer), SejMode::Sej3 | SejMode::Sej8) => {
                let mut g = base.clone();
                for (v, &s) in g.values_mut().iter_mut().zip(layer.values()) {
                    if s {
                        *v *= sc.surface.weights.sej_weight;
                    }
                }
                g
            }
            _ => base.clone(),
        };
        write_ascii_grid(&self.path(a::COST_SURFACE), &routed)?;
        write_ascii_grid(&self.path(a::ECONOMIC_SURFACE), &base)?;
        match sej {
            Some(layer) => write_ascii_grid(&self.path(a::SEJ_LAYER), &layer.to_f64()),
            None => Ok(()),
        }
    }

    fn route(&mut self) -> Result<()> {
        let sc = self.sc;
        let capture: Vec<CaptureRow> = self.read(Stage::Route, a::CAPTURE_JSON, Stage::Capture)?;
        let storage: StorageArtifact = self.read(Stage::Route, a::STORAGE_JSON, Stage::Characterize)?;
        let surface = self.read_grid(Stage::Route, a::COST_SURFACE, Stage::Surface)?;
        let economic = self.read_grid(Stage::Route, a::ECONOMIC_SURFACE, Stage::Surface)?;
        let sej = if self.path(a::SEJ_LAYER).is_file() {
            Some(read_ascii_grid(&self.path(a::SEJ_LAYER))?.to_mask())
        } else {
            None
        };
        let parcels = match &sc.inputs.parcels {
            Some(p) => Some(self.input_grid(p)?),
            None => None,
        };
        let spec = *surface.spec();
        let mut terminals = Vec::new();
        for r in capture.iter().filter(|r| r.estimate.captured > 0.0) {
            let cell = spec.locate(r.facility.x, r.facility.y).ok_or_else(|| {
                Error::domain(format!("facility {} lies outside the cost surface", r.facility.id))
            })?;
            terminals.push(Terminal::new(&r.facility.id, TerminalKind::Source, cell));
        }
        for s in storage.sites.iter().filter(|s| s.injectivity > 0.0) {
            let cell = s
                .site
                .terminal_cell(&spec)
                .ok_or_else(|| Error::domain(format!("storage site {} lies outside the cost surface", s.site.id)))?;
            terminals.push(Terminal::new(&s.site.id, TerminalKind::Sink, cell));
        }
        let net = build_candidate_network(
            &surface,
            &terminals,
            sc.surface.weights.base_cost,
            sc.routing.connectivity,
            EdgeMetrics {
                economic: Some(&economic),
                sej: sej.as_ref(),
                parcels: parcels.as_ref(),
            },
        )?;
        write_json(&self.path(a::CANDIDATE_JSON), &net)?;
        write_text(&self.path(a::CANDIDATE_GEOJSON), &export::candidate_network_geojson(&net))?;
        write_text(&self.path(a::CANDIDATE_CSV), &export::candidate_edges_csv(&net))
    }

    fn problem(&self, stage: Stage) -> Result<NetworkProblem> {
        let sc = self.sc;
        let candidate: CandidateNetwork = self.read(stage, a::CANDIDATE_JSON, Stage::Route)?;
        let capture: Vec<CaptureRow> = self.read(stage, a::CAPTURE_JSON, Stage::Capture)?;
        let storage: StorageArtifact = self.read(stage, a::STORAGE_JSON, Stage::Characterize)?;
        let sources = capture
            .iter()
            .filter(|r| r.estimate.captured > 0.0)
            .map(|r| SourceSpec {
                id: r.facility.id.clone(),
                name: r.facility.name.clone(),
                x: r.facility.x,
                y: r.facility.y,
                max_capture: r.estimate.captured,
                capture_cost: r.estimate.cost.unwrap_or(0.0),
                capture_capital: r.estimate.capital.unwrap_or(0.0),
            })
            .collect();
        let sinks = storage
            .sites
            .iter()
            .filter(|s| s.injectivity > 0.0)
            .map(|s| SinkSpec {
                id: s.site.id.clone(),
                x: s.site.x,
                y: s.site.y,
                injectivity: s.injectivity,
                storage_cost: s.storage_cost,
                capital: s.capital,
            })
            .collect();
        let p = NetworkProblem {
            candidate,
            sources,
            sinks,
            target: sc.network.target,
            economics: sc.network.economics.clone(),
            all_or_nothing: sc.network.all_or_nothing,
        };
        p.validate()?;
        Ok(p)
    }

    fn record_infeasible<T>(&self, r: Result<T>) -> Result<T> {
        if let Err(Error::Infeasible(report)) = &r {
            write_json(&self.path(a::INFEASIBILITY), report)?;
        }
        r
    }

    fn solve_shared(&mut self) -> Result<()> {
        let p = self.problem(Stage::SolveShared)?;
        let sol = self.record_infeasible(solve_shared_with(&p, &self.sc.network.solver))?;
        check_solution(&p, &sol)?;
        let hubs = hub_report(&p, &sol);
        let sej = sej_km_by_flow_class(&sol);
        self.stats.insert("solve-shared".into(), json!(sol.stats));
        write_json(&self.path(a::SHARED_JSON), &sol)?;
        write_text(&self.path(a::SHARED_GEOJSON), &export::solution_geojson(&p, &sol))?;
        write_text(&self.path(a::SHARED_PIPES), &export::pipes_csv(&p, &sol))?;
        write_text(&self.path(a::SHARED_HUBS), &format_hub_csv(&hubs))?;
        write_text(&self.plot("sej_km_by_flow_class.csv"), &format_sej_table_csv(&sej))
    }

    fn solve_dedicated(&mut self) -> Result<()> {
        let p = self.problem(Stage::SolveDedicated)?;
        let sol = solve_dedicated(&p)?;
        check_solution(&p, &sol)?;
        self.stats.insert("solve-dedicated".into(), json!(sol.stats));
        write_json(&self.path(a::DEDICATED_JSON), &sol)?;
        write_text(&self.path(a::DEDICATED_GEOJSON), &export::solution_geojson(&p, &sol))?;
        write_text(&self.path(a::DEDICATED_PIPES), &export::pipes_csv(&p, &sol))?;
        write_text(&self.path(a::DEDICATED_TABLE), &format_dedicated_table_csv(&sol))
    }

    fn compare(&mut self) -> Result<()> {
        let shared: NetworkSolution = self.read(Stage::Compare, a::SHARED_JSON, Stage::SolveShared)?;
        let dedicated: NetworkSolution = self.read(Stage::Compare, a::DEDICATED_JSON, Stage::SolveDedicated)?;
        let c = compare_designs(&shared, &dedicated)?;
        write_text(&self.path(a::COMPARISON), &format_comparison_csv(&c))
    }

    fn phase(&mut self) -> Result<()> {
        let sc = self.sc;
        let p = self.problem(Stage::Phase)?;
        let ph = &sc.phasing;
        let myopic = self.record_infeasible(solve_myopic(&p, &ph.schedule, &ph.policy, &ph.options))?;
        let plan = solve_phased_from(&p, &ph.schedule, &ph.policy, &ph.options, &myopic)?;
        self.stats.insert("phase".into(), json!(plan.stats));
        self.stats.insert("phase-myopic".into(), json!(myopic.stats));
        let summary = phase_summary_csv(&plan, &myopic);
        write_json(&self.path(a::PHASE_JSON), &plan)?;
        write_json(&self.path(a::MYOPIC_JSON), &myopic)?;
        write_text(&self.path(a::PHASE_COSTS), &format_phase_costs_csv(&plan))?;
        write_text(&self.path(a::PHASE_SUMMARY), &summary)?;
        for k in 0..plan.periods.len() {
            write_text(
                &self.path(&format!("phase_period_{}.geojson", k + 1)),
                &export::phase_period_geojson(&p, &plan, k),
            )?;
        }
        write_text(&self.plot("phase_costs.csv"), &format_phase_costs_csv(&plan))
    }

    fn run_stage(&mut self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Capture => self.capture(),
            Stage::Screen => self.screen(),
            Stage::Characterize => self.characterize(),
            Stage::Surface => self.surface(),
            Stage::Route => self.route(),
            Stage::SolveShared => self.solve_shared(),
            Stage::SolveDedicated => self.solve_dedicated(),
            Stage::Compare => self.compare(),
            Stage::Phase => self.phase(),
            Stage::All => unreachable!("expanded by run"),
        }
    }
}

fn phase_summary_csv(plan: &PhasePlan, myopic: &PhasePlan) -> String {
    let mut out = String::from("plan,total_discounted_cost_usd,method,nodes,proven_optimal,gap\n");
    for (name, p) in [("perfect_foresight", plan), ("myopic", myopic)] {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name, p.total_cost, p.stats.method, p.stats.nodes, p.stats.proven_optimal, p.stats.gap
        ));
    }
    out
}

/// Run one stage, or every stage in order for `Stage::All`.
pub fn run(scenario: &Scenario, stage: Stage) -> Result<RunSummary> {
    let out = scenario.output_path();
    fs::create_dir_all(out.join(a::PLOTS)).map_err(|e| Error::io(&out, e))?;
    let stages: Vec<Stage> = if stage == Stage::All {
        Stage::PIPELINE.to_vec()
    } else {
        vec![stage]
    };
    let mut ctx = Ctx {
        sc: scenario,
        out: out.clone(),
        stats: BTreeMap::new(),
    };
    let infeasible = out.join(a::INFEASIBILITY);
    if infeasible.is_file() {
        fs::remove_file(&infeasible).map_err(|e| Error::io(&infeasible, e))?;
    }
    let mut result = Ok(());
    let mut done = Vec::new();
    for &s in &stages {
        result = ctx.run_stage(s);
        if result.is_err() {
            break;
        }
        done.push(s);
    }
    write_metadata(&ctx, &done)?;
    result?;
    Ok(RunSummary {
        stages: done,
        stats: ctx.stats,
    })
}

fn write_metadata(ctx: &Ctx<'_>, stages: &[Stage]) -> Result<()> {
    let path = ctx.path(a::METADATA);
    let hash = ctx.sc.config_hash();
    // Keep statistics from earlier stage runs of the same configuration.
    let mut stats: BTreeMap<String, Value> = BTreeMap::new();
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(old) = serde_json::from_str::<Value>(&text) {
            if old["config_hash"] == json!(hash) {
                if let Some(m) = old["solver_stats"].as_object() {
                    stats.extend(m.iter().map(|(k, v)| (k.clone(), v.clone())));
                }
            }
        }
    }
    stats.extend(ctx.stats.iter().map(|(k, v)| (k.clone(), v.clone())));
    let meta = json!({
        "toolkit": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": ctx.sc.name,
        "config_hash": hash,
        "seed": ctx.sc.seed,
        "sej_mode": ctx.sc.sej.mode.as_str(),
        "co2_table_version": TABLE_VERSION,
        "stages": stages.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        "solver_stats": stats,
        "resolved_config": ctx.sc,
    });
    write_json(&path, &meta)
}

/// Re-emit every plot series from the artifacts in `out`.
pub fn emit_plots(scenario: &Scenario) -> Result<Vec<PathBuf>> {
    let ctx = Ctx {
        sc: scenario,
        out: scenario.output_path(),
        stats: BTreeMap::new(),
    };
    let stage = Stage::All;
    fs::create_dir_all(ctx.out.join(a::PLOTS)).map_err(|e| Error::io(&ctx.out, e))?;
    let capture: Vec<CaptureRow> = ctx.read(stage, a::CAPTURE_JSON, Stage::Capture)?;
    let storage: StorageArtifact = ctx.read(stage, a::STORAGE_JSON, Stage::Characterize)?;
    let shared: NetworkSolution = ctx.read(stage, a::SHARED_JSON, Stage::SolveShared)?;
    let plan: PhasePlan = ctx.read(stage, a::PHASE_JSON, Stage::Phase)?;
    let facilities: Vec<FacilityRecord> = capture.iter().map(|r| r.facility.clone()).collect();
    let capture_curve = cost_supply_curve(&facilities, &scenario.capture)?;
    let series = [
        ("emissions_rank.csv", export::emissions_rank_csv(&facilities)),
        ("capture_cost_supply.csv", export::supply_curve_csv(&capture_curve)),
        ("injectivity_by_site.csv", export::injectivity_by_site_csv(&storage.sites)),
        ("storage_cost_supply.csv", export::supply_curve_csv(&storage_supply_curve(&storage.sites))),
        ("sej_km_by_flow_class.csv", format_sej_table_csv(&sej_km_by_flow_class(&shared))),
        ("phase_costs.csv", format_phase_costs_csv(&plan)),
    ];
    let mut written = Vec::new();
    for (name, text) in series {
        let p = ctx.plot(name);
        write_text(&p, &text)?;
        written.push(p);
    }
    Ok(written)
}
