//! Synthetic fixtures: the "mini-gulf" scenario and small network instances
//! with known answers.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::capture::{FacilityRecord, Sector};
use crate::costsurface::{build_sej_layer, tracts_from_raster, Burden, SejParams};
use crate::error::{Error, Result};
use crate::grid::{write_ascii_grid, BoolGrid, Cell, GridSpec, RasterGrid};
use crate::netdesign::{NetworkProblem, PipelineEconomics, SinkSpec, SourceSpec};
use crate::reservoir::{FormationParams, MILLIDARCY};
use crate::routing::{build_candidate_network, Connectivity, EdgeMetrics, Terminal, TerminalKind};
use crate::screening::{screen_sites, CandidateSite, ScreeningParams, SiteSource};

/// Source placed on a grid cell.
#[derive(Debug, Clone)]
pub struct PlacedSource {
    pub id: String,
    pub cell: Cell,
    pub max_capture: f64,
    pub capture_cost: f64,
}

#[derive(Debug, Clone)]
pub struct PlacedSink {
    pub id: String,
    pub cell: Cell,
    pub injectivity: f64,
    pub storage_cost: f64,
}

pub fn source(id: &str, row: usize, col: usize, max_capture: f64, capture_cost: f64) -> PlacedSource {
    PlacedSource {
        id: id.into(),
        cell: Cell::new(row, col),
        max_capture,
        capture_cost,
    }
}

pub fn sink(id: &str, row: usize, col: usize, injectivity: f64, storage_cost: f64) -> PlacedSink {
    PlacedSink {
        id: id.into(),
        cell: Cell::new(row, col),
        injectivity,
        storage_cost,
    }
}

/// Candidate network and problem for terminals on a surface.
#[allow(clippy::too_many_arguments)]
pub fn network_problem(
    surface: &RasterGrid<f64>,
    metrics: EdgeMetrics<'_>,
    sources: &[PlacedSource],
    sinks: &[PlacedSink],
    target: f64,
    economics: PipelineEconomics,
    conn: Connectivity,
    base_cost: f64,
) -> Result<NetworkProblem> {
    let spec = *surface.spec();
    let mut terminals: Vec<Terminal> = sources
        .iter()
        .map(|s| Terminal::new(&s.id, TerminalKind::Source, s.cell))
        .collect();
    terminals.extend(sinks.iter().map(|k| Terminal::new(&k.id, TerminalKind::Sink, k.cell)));
    let candidate = build_candidate_network(surface, &terminals, base_cost, conn, metrics)?;
    Ok(NetworkProblem {
        candidate,
        sources: sources
            .iter()
            .map(|s| {
                let (x, y) = spec.center(s.cell);
                SourceSpec {
                    id: s.id.clone(),
                    name: s.id.clone(),
                    x,
                    y,
                    max_capture: s.max_capture,
                    capture_cost: s.capture_cost,
                    capture_capital: 0.0,
                }
            })
            .collect(),
        sinks: sinks
            .iter()
            .map(|k| {
                let (x, y) = spec.center(k.cell);
                SinkSpec {
                    id: k.id.clone(),
                    x,
                    y,
                    injectivity: k.injectivity,
                    storage_cost: k.storage_cost,
                    capital: 0.0,
                }
            })
            .collect(),
        target,
        economics,
        all_or_nothing: false,
    })
}

fn uniform(nrows: usize, ncols: usize, cellsize: f64) -> RasterGrid<f64> {
    let spec = GridSpec::new(ncols, nrows, cellsize, 0.0, 0.0).expect("valid grid");
    RasterGrid::filled(spec, 1.0)
}

/// Five sources clustered within a few km, 45 km from a single sink.
pub fn clustered_five() -> NetworkProblem {
    let surface = uniform(40, 70, 1000.0);
    let sources = [
        source("C1", 18, 5, 1.2, 40.0),
        source("C2", 21, 6, 0.9, 42.0),
        source("C3", 20, 3, 1.5, 38.0),
        source("C4", 23, 4, 0.7, 45.0),
        source("C5", 17, 8, 1.1, 41.0),
    ];
    let sinks = [sink("K1", 20, 55, 10.0, 9.0)];
    network_problem(
        &surface,
        EdgeMetrics::default(),
        &sources,
        &sinks,
        5.4,
        PipelineEconomics::default(),
        Connectivity::Eight,
        1.0,
    )
    .expect("fixture builds")
}

/// Four sources and three sinks on one row; sink injectivity runs out
/// during sequential matching.
pub fn dedicated_trace() -> NetworkProblem {
    let surface = uniform(21, 81, 1000.0);
    let sources = [
        source("A", 10, 38, 3.0, 30.0),
        source("B", 10, 45, 2.0, 35.0),
        source("C", 10, 30, 1.5, 40.0),
        source("D", 10, 60, 1.0, 45.0),
    ];
    let sinks = [
        sink("K1", 10, 40, 4.0, 8.0),
        sink("K2", 10, 10, 2.0, 10.0),
        sink("K3", 10, 70, 5.0, 12.0),
    ];
    network_problem(
        &surface,
        EdgeMetrics::default(),
        &sources,
        &sinks,
        7.5,
        PipelineEconomics::default(),
        Connectivity::Eight,
        1.0,
    )
    .expect("fixture builds")
}

/// A source and a sink separated by a costly ridge with two gaps: a direct
/// gap through a disadvantaged populated tract and a slightly longer detour.
pub struct TwoCorridor {
    pub economic: RasterGrid<f64>,
    pub population: RasterGrid<f64>,
    pub tract_ids: RasterGrid<f64>,
    pub tracts: BTreeMap<i64, BTreeSet<Burden>>,
    pub sources: Vec<PlacedSource>,
    pub sinks: Vec<PlacedSink>,
    pub target: f64,
}

impl TwoCorridor {
    pub fn sej_layer(&self, params: &SejParams) -> Result<BoolGrid> {
        let tracts = tracts_from_raster(&self.tract_ids, &self.tracts);
        build_sej_layer(&self.population, &tracts, params)
    }
}

pub fn two_corridor() -> TwoCorridor {
    let (nrows, ncols) = (40, 60);
    let economic = {
        let mut g = uniform(nrows, ncols, 1000.0);
        for r in 0..nrows {
            for c in 28..=31 {
                let gap = (19..=21).contains(&r) || (8..=10).contains(&r);
                if !gap {
                    g.set(Cell::new(r, c), 100.0);
                }
            }
        }
        g
    };
    let spec = *economic.spec();
    let mut population = RasterGrid::filled(spec, 1.0);
    let mut tract_ids = RasterGrid::filled(spec, -9999.0).with_nodata(Some(-9999.0));
    for r in 16..=24 {
        for c in 22..=37 {
            population.set(Cell::new(r, c), 40.0);
            tract_ids.set(Cell::new(r, c), 1.0);
        }
    }
    let mut tracts = BTreeMap::new();
    tracts.insert(1, [Burden::LegacyPollution, Burden::Energy].into_iter().collect());
    TwoCorridor {
        economic,
        population,
        tract_ids,
        tracts,
        sources: vec![source("W", 20, 2, 2.0, 30.0)],
        sinks: vec![sink("E", 20, 57, 5.0, 10.0)],
        target: 2.0,
    }
}

/// Thick, permeable formation at about 2.5 km.
pub fn deep_permeable() -> (FormationParams, f64) {
    let mut f = FormationParams::new("deep_permeable", 2500.0, 150.0, 300.0, 0.28);
    f.depth_valid = (1800.0, 3200.0);
    (f, 150.0)
}

/// 60×60 screening grid at 2 km: developed patches, open water, a river and
/// active fields.
pub fn screening_60() -> (RasterGrid<f64>, BoolGrid) {
    let spec = GridSpec::new(60, 60, 2000.0, 0.0, 0.0).expect("valid grid");
    let mut lc = RasterGrid::filled(spec, 81.0);
    let mut fields = RasterGrid::filled(spec, false);
    for r in 0..60 {
        for c in 0..60 {
            let cell = Cell::new(r, c);
            if r >= 54 {
                lc.set(cell, 11.0);
            } else if c >= 44 && r < 20 {
                lc.set(cell, 41.0);
            }
        }
    }
    for &(r, c) in &[(10usize, 12usize), (11, 12), (30, 45), (31, 45), (31, 46)] {
        lc.set(Cell::new(r, c), 23.0);
    }
    for r in 0..60 {
        fields.set(Cell::new(r, 30), r % 7 != 3);
    }
    fields.set(Cell::new(20, 8), true);
    (lc, fields)
}

/// Rows and columns of the mini-gulf grid.
pub const MINI_GULF_SIZE: usize = 100;
pub const MINI_GULF_CELL: f64 = 2000.0;

pub struct MiniGulf {
    pub landcover: RasterGrid<f64>,
    pub active_fields: RasterGrid<f64>,
    pub population: RasterGrid<f64>,
    pub tract_ids: RasterGrid<f64>,
    pub parcels: RasterGrid<f64>,
    pub tracts: BTreeMap<i64, BTreeSet<Burden>>,
    pub facilities: Vec<FacilityRecord>,
    pub formations: Vec<FormationParams>,
    pub announced: Vec<CandidateSite>,
    /// (site id, formation name).
    pub adjacency: Vec<(String, String)>,
}

fn river_col(r: usize) -> usize {
    20 + r / 2
}

pub fn mini_gulf() -> Result<MiniGulf> {
    let n = MINI_GULF_SIZE;
    let spec = GridSpec::new(n, n, MINI_GULF_CELL, 0.0, 0.0)?;
    let mut lc = RasterGrid::filled(spec, 81.0);
    let mut fields = RasterGrid::filled(spec, 0.0);
    let mut population = RasterGrid::filled(spec, 2.0);
    let mut tract_ids = RasterGrid::filled(spec, -9999.0).with_nodata(Some(-9999.0));
    for r in 0..n {
        for c in 0..n {
            let cell = Cell::new(r, c);
            let v = if r >= 92 {
                11.0
            } else if r >= 84 {
                95.0
            } else if r < 84 && c.abs_diff(river_col(r)) == 0 {
                11.0
            } else if c >= 72 && r < 36 {
                41.0
            } else {
                81.0
            };
            lc.set(cell, v);
        }
    }
    let patch = |lc: &mut RasterGrid<f64>, r0: usize, c0: usize, h: usize, w: usize, v: f64| {
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                lc.set(Cell::new(r, c), v);
            }
        }
    };
    // Towns and industrial clusters.
    patch(&mut lc, 14, 52, 2, 2, 23.0);
    patch(&mut lc, 46, 82, 2, 2, 22.0);
    patch(&mut lc, 58, 8, 2, 2, 22.0);
    patch(&mut lc, 39, 40, 2, 3, 24.0);
    patch(&mut lc, 68, 55, 2, 3, 24.0);
    for &(r, c) in &[(30, 88), (31, 88), (24, 6), (76, 84), (77, 84)] {
        fields.set(Cell::new(r, c), 1.0);
    }
    // Producing field trends along section lines.
    for k in [16, 32, 48, 64] {
        for c in 0..n {
            fields.set(Cell::new(k, c), 1.0);
        }
    }
    for k in [16, 32, 48, 64, 80] {
        for r in 0..84 {
            fields.set(Cell::new(r, k), 1.0);
        }
    }
    let mut tract = |id: f64, r0: usize, r1: usize, c0: usize, c1: usize, pop: f64| {
        for r in r0..=r1 {
            for c in c0..=c1 {
                tract_ids.set(Cell::new(r, c), id);
                population.set(Cell::new(r, c), pop);
            }
        }
    };
    tract(1.0, 34, 46, 30, 37, 25.0);
    tract(2.0, 62, 75, 44, 51, 18.0);
    let mut tracts = BTreeMap::new();
    tracts.insert(1, [Burden::LegacyPollution, Burden::Energy].into_iter().collect());
    tracts.insert(2, [Burden::Housing, Burden::Transportation].into_iter().collect());
    let parcels = RasterGrid::new(
        spec,
        (0..spec.len())
            .map(|i| {
                let c = spec.cell(i);
                ((c.row / 5) * 20 + c.col / 5) as f64
            })
            .collect(),
    )?;

    let fac = |id: &str, name: &str, r: usize, c: usize, sector, emitted, frac, conc, bio| {
        let (x, y) = spec.center(Cell::new(r, c));
        FacilityRecord {
            id: id.into(),
            name: name.into(),
            x,
            y,
            sector,
            emitted,
            capturable_fraction: frac,
            co2_concentration: conc,
            biogenic_fraction: bio,
        }
    };
    let facilities = vec![
        fac("F01", "Riverbend Ammonia", 38, 38, Sector::Ammonia, 3.0, 0.65, 0.97, 0.0),
        fac("F02", "Delta Nitrogen", 41, 43, Sector::Ammonia, 2.2, 0.6, 0.97, 0.0),
        fac("F03", "Bayou Refining", 40, 46, Sector::Refinery, 4.0, 0.35, 0.12, 0.0),
        fac("F04", "Pine Ridge Power", 20, 60, Sector::CoalPower, 5.5, 0.95, 0.12, 0.0),
        fac("F05", "Levee Gas Power", 67, 52, Sector::GasPower, 2.5, 0.95, 0.04, 0.0),
        fac("F06", "Gulf Hydrogen", 70, 56, Sector::Hydrogen, 1.8, 0.55, 0.94, 0.0),
        fac("F07", "Marsh Petrochemical", 72, 59, Sector::Petrochemical, 2.0, 0.4, 0.10, 0.0),
        fac("F08", "Harbor Refinery", 65, 61, Sector::Refinery, 3.5, 0.3, 0.10, 0.0),
        fac("F09", "Cypress Paper", 30, 12, Sector::PulpPaper, 1.2, 0.8, 0.15, 0.85),
        fac("F10", "Eastside Steel", 55, 85, Sector::Metals, 1.5, 0.5, 0.15, 0.0),
        fac("F11", "Coastal Gas Plant", 85, 30, Sector::GasProcessing, 0.9, 0.9, 0.97, 0.0),
        fac("F12", "Hilltop Lime", 10, 90, Sector::Minerals, 0.05, 0.6, 0.2, 0.0),
    ];
    let formation = |name: &str, depth, thick, perm, por, lo, hi| {
        let mut f = FormationParams::new(name, depth, thick, perm, por);
        f.depth_valid = (lo, hi);
        f
    };
    let formations = vec![
        formation("frio", 2500.0, 150.0, 300.0, 0.28, 1800.0, 3200.0),
        formation("miocene", 1800.0, 80.0, 120.0, 0.25, 1200.0, 2400.0),
        formation("tuscaloosa_shallow", 800.0, 60.0, 200.0, 0.30, 600.0, 1000.0),
    ];
    let (ax, ay) = spec.center(Cell::new(88, 70));
    let announced = vec![CandidateSite {
        id: "ANN1".into(),
        x: ax,
        y: ay,
        area: 200.0,
        cells: Vec::new(),
        source: SiteSource::Announced,
    }];

    let screened = screen_sites(&lc, &fields.to_mask(), &ScreeningParams::default(), &[])?;
    let half = spec.nrows as f64 * spec.cellsize / 2.0;
    let mut adjacency = Vec::new();
    for (k, s) in screened.iter().enumerate() {
        // Sites off the basin have no formation and are dropped.
        if k == 0 {
            adjacency.push((s.id.clone(), "tuscaloosa_shallow".to_string()));
        } else if s.y < half && s.x > 60_000.0 && s.x < 160_000.0 {
            adjacency.push((s.id.clone(), "frio".to_string()));
            adjacency.push((s.id.clone(), "miocene".to_string()));
        } else if s.y >= half && s.y < 160_000.0 && s.x > 100_000.0 && s.x < 150_000.0 {
            adjacency.push((s.id.clone(), "miocene".to_string()));
        }
    }
    adjacency.push(("ANN1".into(), "frio".into()));
    Ok(MiniGulf {
        landcover: lc,
        active_fields: fields,
        population,
        tract_ids,
        parcels,
        tracts,
        facilities,
        formations,
        announced,
        adjacency,
    })
}

const MINI_GULF_SCENARIO: &str = r#"# Synthetic Gulf Coast-like region, 200 km x 200 km at 2 km cells.
name = "mini-gulf"
seed = 20240601
output_dir = "out"

[inputs]
facilities = "facilities.csv"
landcover = "landcover.asc"
active_fields = "active_fields.asc"
formations = "formations.csv"
adjacency = "adjacency.csv"
announced = "announced.csv"
population = "population.asc"
tract_ids = "tract_ids.asc"
tracts = "tracts.csv"
parcels = "parcels.asc"

[inputs.cost_layers]
landcover = "landcover.asc"

[surface.weights.layers.landcover.weights]
11 = 6.0
22 = 3.0
23 = 4.0
24 = 3.0
41 = 1.3
95 = 2.5

[sej]
mode = "off"

[network]
target = 8.0

[network.solver]
node_limit = 2000

[phasing.schedule]
periods = [
    { online_year = 2030, target = 2.0 },
    { online_year = 2035, target = 5.0 },
    { online_year = 2040, target = 8.0 },
]

[phasing.options]
node_limit = 400
"#;

fn csv_string<T: serde::Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write the mini-gulf inputs and `scenario.toml` into `dir`.
pub fn write_mini_gulf(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let g = mini_gulf()?;
    write_ascii_grid(&dir.join("landcover.asc"), &g.landcover)?;
    write_ascii_grid(&dir.join("active_fields.asc"), &g.active_fields)?;
    write_ascii_grid(&dir.join("population.asc"), &g.population)?;
    write_ascii_grid(&dir.join("tract_ids.asc"), &g.tract_ids)?;
    write_ascii_grid(&dir.join("parcels.asc"), &g.parcels)?;
    write(&dir.join("facilities.csv"), &csv_string(&g.facilities)?)?;
    let mut formations = String::from("name,depth_m,thickness_m,perm_md,porosity,depth_min_m,depth_max_m\n");
    for f in &g.formations {
        formations.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            f.name,
            f.depth,
            f.thickness,
            (f.permeability / MILLIDARCY * 1e6).round() / 1e6,
            f.porosity,
            f.depth_valid.0, f.depth_valid.1
        ));
    }
    write(&dir.join("formations.csv"), &formations)?;
    let mut adjacency = String::from("site_id,formation\n");
    for (s, f) in &g.adjacency {
        adjacency.push_str(&format!("{s},{f}\n"));
    }
    write(&dir.join("adjacency.csv"), &adjacency)?;
    let mut announced = String::from("id,x,y,area_km2\n");
    for a in &g.announced {
        announced.push_str(&format!("{},{},{},{}\n", a.id, a.x, a.y, a.area));
    }
    write(&dir.join("announced.csv"), &announced)?;
    let mut tracts = String::from("tract_id,categories\n");
    for (id, cats) in &g.tracts {
        let names: Vec<&str> = cats.iter().map(|b| b.as_str()).collect();
        tracts.push_str(&format!("{id},{}\n", names.join(";")));
    }
    write(&dir.join("tracts.csv"), &tracts)?;
    write(&dir.join("scenario.toml"), MINI_GULF_SCENARIO)
}
