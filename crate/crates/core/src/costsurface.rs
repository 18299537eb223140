//! Weighted routing cost surface: multiplicative category weights per layer,
//! plus an exclusion-like multiplier on populated disadvantaged cells.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::capture::csv_error;
use crate::error::{Error, Result};
use crate::grid::{BoolGrid, Cell, RasterGrid};
use crate::screening::buffer_exclusion;

/// Community burden categories used to flag disadvantaged tracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Burden {
    Health,
    WaterWastewater,
    LegacyPollution,
    ClimateChange,
    Energy,
    Housing,
    Transportation,
    WorkforceDevelopment,
}

impl Burden {
    pub const ALL: [Burden; 8] = [
        Burden::Health,
        Burden::WaterWastewater,
        Burden::LegacyPollution,
        Burden::ClimateChange,
        Burden::Energy,
        Burden::Housing,
        Burden::Transportation,
        Burden::WorkforceDevelopment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Burden::Health => "health",
            Burden::WaterWastewater => "water_wastewater",
            Burden::LegacyPollution => "legacy_pollution",
            Burden::ClimateChange => "climate_change",
            Burden::Energy => "energy",
            Burden::Housing => "housing",
            Burden::Transportation => "transportation",
            Burden::WorkforceDevelopment => "workforce_development",
        }
    }
}

impl fmt::Display for Burden {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Burden {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Burden::ALL
            .into_iter()
            .find(|b| b.as_str() == s.trim())
            .ok_or_else(|| Error::domain(format!("unknown burden category `{s}`")))
    }
}

/// Which SEJ layer (if any) enters the cost surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SejMode {
    #[default]
    Off,
    Sej3,
    Sej8,
}

impl SejMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SejMode::Off => "off",
            SejMode::Sej3 => "sej3",
            SejMode::Sej8 => "sej8",
        }
    }

    /// Burden set of the layer; `Off` maps to the three-category set, which
    /// is the layer SEJ kilometres are reported against.
    pub fn categories(self) -> BTreeSet<Burden> {
        match self {
            SejMode::Off | SejMode::Sej3 => Burden::ALL[..3].iter().copied().collect(),
            SejMode::Sej8 => Burden::ALL.iter().copied().collect(),
        }
    }
}

impl FromStr for SejMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(SejMode::Off),
            "sej3" => Ok(SejMode::Sej3),
            "sej8" => Ok(SejMode::Sej8),
            other => Err(Error::config(format!("unknown SEJ mode `{other}` (off|sej3|sej8)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SejParams {
    /// Persons per population cell; cells must exceed it strictly.
    pub population_threshold: f64,
    /// Meters.
    pub buffer: f64,
    pub categories: BTreeSet<Burden>,
}

impl Default for SejParams {
    fn default() -> Self {
        SejParams::sej3()
    }
}

impl SejParams {
    pub fn sej3() -> Self {
        SejParams {
            population_threshold: 5.0,
            buffer: 182.0,
            categories: SejMode::Sej3.categories(),
        }
    }

    pub fn sej8() -> Self {
        SejParams {
            categories: SejMode::Sej8.categories(),
            ..SejParams::sej3()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::config("SEJ categories must be nonempty"));
        }
        if !(self.buffer >= 0.0) {
            return Err(Error::config("SEJ buffer must be >= 0"));
        }
        Ok(())
    }
}

/// A census tract rasterized to member cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tract {
    pub id: String,
    pub cells: Vec<Cell>,
    pub categories: BTreeSet<Burden>,
}

/// Populated cells (strictly above threshold) inside a tract carrying any
/// selected burden, dilated by the buffer.
pub fn build_sej_layer(population: &RasterGrid<f64>, tracts: &[Tract], params: &SejParams) -> Result<BoolGrid> {
    params.validate()?;
    let spec = *population.spec();
    let mut in_tract = vec![false; spec.len()];
    for t in tracts {
        if t.categories.is_disjoint(&params.categories) {
            continue;
        }
        for &c in &t.cells {
            if !spec.contains(c) {
                return Err(Error::Alignment(format!(
                    "tract `{}` cell ({}, {}) lies outside the population grid",
                    t.id, c.row, c.col
                )));
            }
            in_tract[spec.index(c)] = true;
        }
    }
    let marked: Vec<bool> = population
        .values()
        .iter()
        .zip(&in_tract)
        .map(|(&p, &t)| t && population.is_data(p) && p > params.population_threshold)
        .collect();
    buffer_exclusion(&RasterGrid::new(spec, marked)?, params.buffer)
}

/// Tracts from a tract-id raster and a `tract_id,categories` table where
/// categories are `;`-separated burden names (possibly empty).
pub fn tracts_from_raster(tract_ids: &RasterGrid<f64>, table: &BTreeMap<i64, BTreeSet<Burden>>) -> Vec<Tract> {
    let spec = *tract_ids.spec();
    let mut cells: BTreeMap<i64, Vec<Cell>> = BTreeMap::new();
    for (i, cat) in tract_ids.to_categories().values().iter().enumerate() {
        if let Some(id) = cat {
            cells.entry(*id).or_default().push(spec.cell(i));
        }
    }
    cells
        .into_iter()
        .map(|(id, cells)| Tract {
            id: id.to_string(),
            cells,
            categories: table.get(&id).cloned().unwrap_or_default(),
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct TractRow {
    tract_id: i64,
    categories: String,
}

pub fn read_tract_table(path: &Path) -> Result<BTreeMap<i64, BTreeSet<Burden>>> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(&file, e))?;
    let mut out = BTreeMap::new();
    for (k, row) in rdr.deserialize::<TractRow>().enumerate() {
        let r = row.map_err(|e| csv_error(&file, e))?;
        let mut cats = BTreeSet::new();
        for name in r.categories.split(';').filter(|s| !s.trim().is_empty()) {
            cats.insert(name.parse::<Burden>().map_err(|e| Error::Parse {
                file: file.clone(),
                line: k + 2,
                message: e.to_string(),
            })?);
        }
        out.insert(r.tract_id, cats);
    }
    Ok(out)
}

/// Category weights for one layer. Keys are integer category codes written
/// as strings (TOML tables need string keys).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LayerWeights {
    pub weights: BTreeMap<String, f64>,
}

impl LayerWeights {
    pub fn from_pairs(pairs: &[(i64, f64)]) -> Self {
        LayerWeights {
            weights: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn parsed(&self, layer: &str) -> Result<BTreeMap<i64, f64>> {
        self.weights
            .iter()
            .map(|(k, &w)| {
                let code: i64 = k
                    .parse()
                    .map_err(|_| Error::config(format!("layer `{layer}`: category key `{k}` is not an integer")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::config(format!("layer `{layer}`: weight for {k} must be > 0, got {w}")));
                }
                Ok((code, w))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightTable {
    /// $/km at weight 1.
    pub base_cost: f64,
    /// Multiplier applied to SEJ cells.
    pub sej_weight: f64,
    /// Layer name → category weights. Unlisted categories and nodata are neutral.
    pub layers: BTreeMap<String, LayerWeights>,
}

impl Default for WeightTable {
    fn default() -> Self {
        WeightTable {
            base_cost: 1.0,
            sej_weight: 1.0e6,
            layers: BTreeMap::new(),
        }
    }
}

impl WeightTable {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_cost > 0.0 && self.base_cost.is_finite()) {
            return Err(Error::config("base_cost must be > 0"));
        }
        if !(self.sej_weight > 0.0 && self.sej_weight.is_finite()) {
            return Err(Error::config("sej_weight must be > 0"));
        }
        for (name, lw) in &self.layers {
            lw.parsed(name)?;
        }
        Ok(())
    }
}

/// Per-cell cost = base × Π layer weights × (sej_weight on SEJ cells).
pub fn compose_cost_surface(
    layers: &[(&str, &RasterGrid<f64>)],
    table: &WeightTable,
    sej: Option<&BoolGrid>,
) -> Result<RasterGrid<f64>> {
    table.validate()?;
    let spec = match (layers.first(), sej) {
        (Some((_, g)), _) => *g.spec(),
        (None, Some(s)) => *s.spec(),
        (None, None) => return Err(Error::domain("cost surface needs at least one layer or an SEJ layer")),
    };
    let mut out = vec![table.base_cost; spec.len()];
    for (name, grid) in layers {
        spec.check_aligned(grid.spec())?;
        let Some(lw) = table.layers.get(*name) else {
            continue;
        };
        let weights = lw.parsed(name)?;
        for (v, cat) in out.iter_mut().zip(grid.to_categories().values()) {
            if let Some(w) = cat.and_then(|c| weights.get(&c)) {
                *v *= w;
            }
        }
    }
    if let Some(s) = sej {
        spec.check_aligned(s.spec())?;
        for (v, &m) in out.iter_mut().zip(s.values()) {
            if m {
                *v *= table.sej_weight;
            }
        }
    }
    if let Some(i) = out.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        let c = spec.cell(i);
        return Err(Error::config(format!(
            "cost surface weight at ({}, {}) is not positive and finite",
            c.row, c.col
        )));
    }
    RasterGrid::new(spec, out)
}

/// Distinct parcel ids (non-nodata) touched by a cell sequence.
pub fn owners_crossed(cells: &[Cell], parcels: &RasterGrid<f64>) -> usize {
    let cats = parcels.to_categories();
    cells
        .iter()
        .filter_map(|c| *cats.get(*c))
        .collect::<BTreeSet<i64>>()
        .len()
}
