//! Subsurface characterization of candidate sites: Monte Carlo sampling of
//! formation properties, radial-flow injectivity, pore-volume capacity and a
//! discounted storage cost.

pub mod co2;

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capture::csv_error;
use crate::curve::{supply_curve, SupplyPoint};
use crate::error::{Error, Result};
use crate::finance::annuity_factor;
use crate::screening::CandidateSite;

/// 1 mD in m².
pub const MILLIDARCY: f64 = 9.869e-16;
/// Hydrostatic gradient, Pa/m.
pub const HYDROSTATIC_GRADIENT: f64 = 9_810.0;
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;
/// kg per Mt.
const KG_PER_MT: f64 = 1.0e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationParams {
    pub name: String,
    /// Mean depth, m.
    pub depth: f64,
    /// Mean net thickness, m.
    pub thickness: f64,
    /// Mean permeability, m².
    pub permeability: f64,
    pub porosity: f64,
    /// °C.
    pub surface_temperature: f64,
    /// °C/km.
    pub geothermal_gradient: f64,
    /// Pa/m.
    pub fracture_gradient: f64,
    /// Range sampled depths are clamped to, m.
    pub depth_valid: (f64, f64),
}

impl FormationParams {
    pub fn new(name: &str, depth: f64, thickness: f64, permeability_md: f64, porosity: f64) -> Self {
        FormationParams {
            name: name.to_string(),
            depth,
            thickness,
            permeability: permeability_md * MILLIDARCY,
            porosity,
            surface_temperature: 20.0,
            geothermal_gradient: 32.0,
            fracture_gradient: 16_000.0,
            depth_valid: (914.4, 3_962.4),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.depth, self.thickness, self.permeability, self.porosity, self.fracture_gradient]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !all_positive {
            return Err(Error::domain(format!("formation `{}`: means must be > 0", self.name)));
        }
        if self.porosity >= 1.0 {
            return Err(Error::domain(format!("formation `{}`: porosity must be < 1", self.name)));
        }
        if !(self.depth_valid.0 < self.depth_valid.1) {
            return Err(Error::domain(format!("formation `{}`: empty depth range", self.name)));
        }
        Ok(())
    }

    /// Temperature at the mean depth, °C.
    pub fn mean_temperature(&self) -> f64 {
        self.surface_temperature + self.geothermal_gradient * self.depth / 1000.0
    }
}

/// Relative standard deviations of the sampled parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingSpread {
    pub depth: f64,
    pub temperature: f64,
    pub thickness: f64,
    pub permeability: f64,
    pub porosity: f64,
}

impl Default for SamplingSpread {
    fn default() -> Self {
        SamplingSpread {
            depth: 0.10,
            temperature: 0.10,
            thickness: 0.15,
            permeability: 0.15,
            porosity: 0.15,
        }
    }
}

impl SamplingSpread {
    pub fn zero() -> Self {
        SamplingSpread {
            depth: 0.0,
            temperature: 0.0,
            thickness: 0.0,
            permeability: 0.0,
            porosity: 0.0,
        }
    }
}

/// Validity ranges of the reduced-order model; draws outside are clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidityLimits {
    pub min_thickness: f64,
    pub max_thickness: f64,
    pub min_permeability_md: f64,
    pub max_permeability_md: f64,
    pub min_porosity: f64,
    pub max_porosity: f64,
    pub min_temperature: f64,
    pub max_temperature: f64,
    /// Mean-depth window a formation must fall in to be considered, m.
    pub eligible_depth: (f64, f64),
}

impl Default for ValidityLimits {
    fn default() -> Self {
        ValidityLimits {
            min_thickness: 5.0,
            max_thickness: 600.0,
            min_permeability_md: 1.0,
            max_permeability_md: 1_000.0,
            min_porosity: 0.05,
            max_porosity: 0.40,
            min_temperature: 20.0,
            max_temperature: 150.0,
            eligible_depth: (914.4, 3_962.4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloParams {
    pub samples: usize,
    pub spread: SamplingSpread,
    pub limits: ValidityLimits,
}

impl Default for MonteCarloParams {
    fn default() -> Self {
        MonteCarloParams {
            samples: 100,
            spread: SamplingSpread::default(),
            limits: ValidityLimits::default(),
        }
    }
}

/// One concrete draw of reservoir conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledReservoir {
    pub depth: f64,
    pub thickness: f64,
    pub permeability: f64,
    pub porosity: f64,
    /// °C.
    pub temperature: f64,
    /// Hydrostatic pore pressure, Pa.
    pub pressure: f64,
    /// CO2 density, kg/m³.
    pub density: f64,
    /// CO2 viscosity, Pa·s.
    pub viscosity: f64,
    /// Pa/m.
    pub fracture_gradient: f64,
}

impl SampledReservoir {
    /// Derive pressure and CO2 properties from the primary parameters.
    pub fn from_primary(
        depth: f64,
        thickness: f64,
        permeability: f64,
        porosity: f64,
        temperature: f64,
        fracture_gradient: f64,
    ) -> Self {
        let pressure = HYDROSTATIC_GRADIENT * depth;
        SampledReservoir {
            depth,
            thickness,
            permeability,
            porosity,
            temperature,
            pressure,
            density: co2::density(pressure, temperature),
            viscosity: co2::viscosity(pressure, temperature),
            fracture_gradient,
        }
    }

    /// Deterministic evaluation at the formation means.
    pub fn at_means(formation: &FormationParams) -> Self {
        Self::from_primary(
            formation.depth,
            formation.thickness,
            formation.permeability,
            formation.porosity,
            formation.mean_temperature(),
            formation.fracture_gradient,
        )
    }
}

/// Stable per-entity seed derived from a parent seed and a label.
pub fn derive_seed(parent: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(parent.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&d[..8]);
    u64::from_le_bytes(b)
}

fn draw(rng: &mut ChaCha8Rng, mean: f64, rel_sd: f64, n: usize) -> Vec<f64> {
    if rel_sd == 0.0 {
        return vec![mean; n];
    }
    let normal = Normal::new(mean, rel_sd * mean.abs()).expect("finite positive sd");
    (0..n).map(|_| normal.sample(rng)).collect()
}

/// `n` independent draws with Normal marginals, clamped to validity ranges.
pub fn sample_parameters(
    formation: &FormationParams,
    mc: &MonteCarloParams,
    n: usize,
    seed: u64,
) -> Result<Vec<SampledReservoir>> {
    if n < 1 {
        return Err(Error::domain("sample count must be >= 1"));
    }
    formation.validate()?;
    let s = &mc.spread;
    let lim = &mc.limits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // One column of draws per parameter, paired by index.
    let depth = draw(&mut rng, formation.depth, s.depth, n);
    let temperature = draw(&mut rng, formation.mean_temperature(), s.temperature, n);
    let thickness = draw(&mut rng, formation.thickness, s.thickness, n);
    let permeability = draw(&mut rng, formation.permeability, s.permeability, n);
    let porosity = draw(&mut rng, formation.porosity, s.porosity, n);
    Ok((0..n)
        .map(|i| {
            SampledReservoir::from_primary(
                depth[i].clamp(formation.depth_valid.0, formation.depth_valid.1),
                thickness[i].clamp(lim.min_thickness, lim.max_thickness),
                permeability[i].clamp(
                    lim.min_permeability_md * MILLIDARCY,
                    lim.max_permeability_md * MILLIDARCY,
                ),
                porosity[i].clamp(lim.min_porosity, lim.max_porosity),
                temperature[i].clamp(lim.min_temperature, lim.max_temperature),
                formation.fracture_gradient,
            )
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StorageCostParams {
    /// Mt/y per injection well.
    pub per_well_cap: f64,
    pub injection_years: u32,
    pub discount_rate: f64,
    pub pressure_fraction_of_fracture: f64,
    /// $/m³ of produced water.
    pub water_disposal_cost: f64,
    /// Fraction of pore volume filled with CO2.
    pub storage_efficiency: f64,
    /// Wells per km².
    pub well_density_cap: f64,
    /// m.
    pub well_radius: f64,
    // Unit costs, $ (calibration defaults).
    pub site_characterization: f64,
    pub injection_well_fixed: f64,
    pub injection_well_per_m: f64,
    pub water_well_fixed: f64,
    pub water_well_per_m: f64,
    pub pump_capital: f64,
    /// $/y per well (injection and water wells alike).
    pub well_om_per_year: f64,
    /// $/y per site.
    pub monitoring_per_year: f64,
    /// $ per well, paid at the end of injection.
    pub plugging_per_well: f64,
}

impl Default for StorageCostParams {
    fn default() -> Self {
        StorageCostParams {
            per_well_cap: 1.0,
            injection_years: 30,
            discount_rate: 0.15,
            pressure_fraction_of_fracture: 0.80,
            water_disposal_cost: 2.0,
            storage_efficiency: 0.05,
            well_density_cap: 0.1,
            well_radius: 0.1,
            site_characterization: 40.0e6,
            injection_well_fixed: 3.0e6,
            injection_well_per_m: 3_000.0,
            water_well_fixed: 1.5e6,
            water_well_per_m: 1_500.0,
            pump_capital: 1.5e6,
            well_om_per_year: 0.4e6,
            monitoring_per_year: 3.0e6,
            plugging_per_well: 1.0e6,
        }
    }
}

impl StorageCostParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.per_well_cap,
            self.storage_efficiency,
            self.well_density_cap,
            self.well_radius,
            self.pressure_fraction_of_fracture,
        ]
        .iter()
        .all(|v| *v > 0.0);
        if !positive || self.injection_years == 0 {
            return Err(Error::config("storage parameters must be positive"));
        }
        if self.pressure_fraction_of_fracture > 1.0 {
            return Err(Error::config("pressure_fraction_of_fracture must be <= 1"));
        }
        let costs = [
            self.discount_rate,
            self.water_disposal_cost,
            self.site_characterization,
            self.injection_well_fixed,
            self.injection_well_per_m,
            self.water_well_fixed,
            self.water_well_per_m,
            self.pump_capital,
            self.well_om_per_year,
            self.monitoring_per_year,
            self.plugging_per_well,
        ];
        if costs.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::config("storage unit costs and discount rate must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectivityEstimate {
    /// Mt/y.
    pub injectivity: f64,
    /// Mt.
    pub capacity: f64,
    pub n_wells: u32,
    /// Radial-flow rate of one well before the per-well cap, Mt/y.
    pub uncapped_well_rate: f64,
    /// False when the allowed pressure buildup is not positive.
    pub feasible: bool,
}

/// Injectivity and capacity of one sampled reservoir over `area` km².
pub fn injectivity_capacity(sample: &SampledReservoir, area: f64, params: &StorageCostParams) -> Result<InjectivityEstimate> {
    if !(area > 0.0) {
        return Err(Error::domain(format!("site area must be > 0, got {area}")));
    }
    let area_m2 = area * 1.0e6;
    let capacity = area_m2 * sample.thickness * sample.porosity * sample.density * params.storage_efficiency / KG_PER_MT;
    let by_capacity = (capacity / (params.per_well_cap * f64::from(params.injection_years))).floor();
    let by_density = (area * params.well_density_cap).floor();
    let n_wells = by_capacity.min(by_density).max(1.0) as u32;

    let dp = params.pressure_fraction_of_fracture * sample.fracture_gradient * sample.depth - sample.pressure;
    if !(dp > 0.0) {
        return Ok(InjectivityEstimate {
            injectivity: 0.0,
            capacity,
            n_wells,
            uncapped_well_rate: 0.0,
            feasible: false,
        });
    }
    let r_e = (area_m2 / (std::f64::consts::PI * f64::from(n_wells))).sqrt();
    let log_term = (r_e / params.well_radius).ln();
    let volumetric = 2.0 * std::f64::consts::PI * sample.permeability * sample.thickness * dp
        / (sample.viscosity * log_term);
    let uncapped = volumetric * sample.density * SECONDS_PER_YEAR / KG_PER_MT;
    let per_well = uncapped.min(params.per_well_cap);
    let injectivity = (f64::from(n_wells) * per_well).min(capacity / f64::from(params.injection_years));
    Ok(InjectivityEstimate {
        injectivity,
        capacity,
        n_wells,
        uncapped_well_rate: uncapped,
        feasible: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageCostBreakdown {
    /// Overnight capital at year 0, $.
    pub capital: f64,
    /// Recurring cost per injection year, $/y.
    pub annual: f64,
    /// End-of-injection plugging, $.
    pub closure: f64,
    /// Present value of all costs, $.
    pub pv_cost: f64,
    /// Present value of injected tonnes, t.
    pub pv_tonnes: f64,
    /// $/t.
    pub levelized: f64,
}

/// Levelized storage cost, $/t, with its components.
pub fn storage_cost_breakdown(
    injectivity: f64,
    _capacity: f64,
    n_wells: u32,
    sample: &SampledReservoir,
    params: &StorageCostParams,
) -> Result<StorageCostBreakdown> {
    if !(injectivity > 0.0) {
        return Err(Error::domain(format!("storage cost needs injectivity > 0, got {injectivity}")));
    }
    let wells = f64::from(n_wells);
    let years = params.injection_years;
    let r = params.discount_rate;
    let per_injector = params.injection_well_fixed
        + params.injection_well_per_m * sample.depth
        + params.water_well_fixed
        + params.water_well_per_m * sample.depth
        + params.pump_capital;
    let capital = params.site_characterization + wells * per_injector;
    // One water producer per injector: produced water displaces the injected CO2 volume.
    let water_m3 = injectivity * KG_PER_MT / sample.density;
    let annual = params.monitoring_per_year
        + 2.0 * wells * params.well_om_per_year
        + water_m3 * params.water_disposal_cost;
    let closure = 2.0 * wells * params.plugging_per_well;
    let a = annuity_factor(r, years);
    let pv_cost = capital + annual * a + closure * (1.0 + r).powi(-(years as i32));
    let pv_tonnes = injectivity * 1.0e6 * a;
    Ok(StorageCostBreakdown {
        capital,
        annual,
        closure,
        pv_cost,
        pv_tonnes,
        levelized: pv_cost / pv_tonnes,
    })
}

pub fn storage_cost(
    injectivity: f64,
    capacity: f64,
    n_wells: u32,
    sample: &SampledReservoir,
    params: &StorageCostParams,
) -> Result<f64> {
    Ok(storage_cost_breakdown(injectivity, capacity, n_wells, sample, params)?.levelized)
}

/// Per-formation Monte Carlo result at one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationResult {
    pub formation: String,
    pub injectivity: f64,
    pub capacity: f64,
    pub n_wells: u32,
    pub storage_cost: f64,
    pub capital: f64,
    /// Fraction of samples with a non-positive allowed pressure buildup.
    pub infeasible_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormationMode {
    /// Inject into the lowest-cost formation only.
    #[default]
    Single,
    /// Inject into every stacked eligible formation.
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageSite {
    pub site: CandidateSite,
    /// Selected formation (or `+`-joined names in multi-formation mode).
    pub formation: String,
    pub formations: Vec<FormationResult>,
    /// Mt/y.
    pub injectivity: f64,
    /// Mt.
    pub capacity: f64,
    /// $/t.
    pub storage_cost: f64,
    pub n_injection_wells: u32,
    /// Overnight storage capital, $.
    pub capital: f64,
}

impl StorageSite {
    pub fn id(&self) -> &str {
        &self.site.id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedSite {
    pub site_id: String,
    pub reason: String,
}

/// Mean taken about the first value, so identical values average exactly.
fn shifted_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return f64::NAN;
    };
    let n = values.clone().count() as f64;
    first + values.map(|v| v - first).sum::<f64>() / n
}

fn mean_sample(samples: &[SampledReservoir]) -> SampledReservoir {
    let avg = |f: fn(&SampledReservoir) -> f64| shifted_mean(samples.iter().map(f));
    SampledReservoir {
        depth: avg(|s| s.depth),
        thickness: avg(|s| s.thickness),
        permeability: avg(|s| s.permeability),
        porosity: avg(|s| s.porosity),
        temperature: avg(|s| s.temperature),
        pressure: avg(|s| s.pressure),
        density: avg(|s| s.density),
        viscosity: avg(|s| s.viscosity),
        fracture_gradient: avg(|s| s.fracture_gradient),
    }
}

/// Monte Carlo characterization of one formation under a site.
pub fn characterize_formation(
    site: &CandidateSite,
    formation: &FormationParams,
    mc: &MonteCarloParams,
    seed: u64,
    params: &StorageCostParams,
) -> Result<Option<FormationResult>> {
    let samples = sample_parameters(formation, mc, mc.samples, seed)?;
    let n = samples.len() as f64;
    let estimates = samples
        .iter()
        .map(|s| injectivity_capacity(s, site.area, params))
        .collect::<Result<Vec<_>>>()?;
    let infeasible = estimates.iter().filter(|e| !e.feasible).count();
    let injectivity = shifted_mean(estimates.iter().map(|e| e.injectivity));
    let capacity = shifted_mean(estimates.iter().map(|e| e.capacity));
    if !(injectivity > 0.0) {
        return Ok(None);
    }
    let n_wells = ((injectivity / params.per_well_cap) - 1e-9).ceil().max(1.0) as u32;
    let cost = storage_cost_breakdown(injectivity, capacity, n_wells, &mean_sample(&samples), params)?;
    Ok(Some(FormationResult {
        formation: formation.name.clone(),
        injectivity,
        capacity,
        n_wells,
        storage_cost: cost.levelized,
        capital: cost.capital,
        infeasible_fraction: infeasible as f64 / n,
    }))
}

/// Characterize a site over its underlying formations.
///
/// `seed` is the global seed; each site and formation derives its own
/// stream from it, so results do not depend on evaluation order.
pub fn characterize_site(
    site: &CandidateSite,
    formations: &[FormationParams],
    mc: &MonteCarloParams,
    seed: u64,
    params: &StorageCostParams,
    mode: FormationMode,
) -> Result<std::result::Result<StorageSite, DroppedSite>> {
    params.validate()?;
    let (lo, hi) = mc.limits.eligible_depth;
    let eligible: Vec<&FormationParams> = formations
        .iter()
        .filter(|f| f.depth >= lo && f.depth <= hi)
        .collect();
    if eligible.is_empty() {
        return Ok(Err(DroppedSite {
            site_id: site.id.clone(),
            reason: "no underlying storage formation within the eligible depth window".into(),
        }));
    }
    let site_seed = derive_seed(seed, &site.id);
    let mut results = Vec::new();
    for f in eligible {
        if let Some(r) = characterize_formation(site, f, mc, derive_seed(site_seed, &f.name), params)? {
            results.push(r);
        }
    }
    if results.is_empty() {
        return Ok(Err(DroppedSite {
            site_id: site.id.clone(),
            reason: "no formation admits injection below the fracture-pressure limit".into(),
        }));
    }
    let site_out = match mode {
        FormationMode::Single => {
            let best = results
                .iter()
                .min_by(|a, b| {
                    a.storage_cost
                        .total_cmp(&b.storage_cost)
                        .then_with(|| a.formation.cmp(&b.formation))
                })
                .expect("nonempty")
                .clone();
            StorageSite {
                site: site.clone(),
                formation: best.formation.clone(),
                injectivity: best.injectivity,
                capacity: best.capacity,
                storage_cost: best.storage_cost,
                n_injection_wells: best.n_wells,
                capital: best.capital,
                formations: results,
            }
        }
        FormationMode::Multi => {
            let injectivity: f64 = results.iter().map(|r| r.injectivity).sum();
            let capacity: f64 = results.iter().map(|r| r.capacity).sum();
            let cost = results.iter().map(|r| r.storage_cost * r.capacity).sum::<f64>() / capacity;
            StorageSite {
                site: site.clone(),
                formation: results.iter().map(|r| r.formation.as_str()).collect::<Vec<_>>().join("+"),
                injectivity,
                capacity,
                storage_cost: cost,
                n_injection_wells: results.iter().map(|r| r.n_wells).sum(),
                capital: results.iter().map(|r| r.capital).sum(),
                formations: results,
            }
        }
    };
    Ok(Ok(site_out))
}

/// Characterize many sites in parallel; output order follows input order.
pub fn characterize_sites(
    sites: &[CandidateSite],
    adjacency: &BTreeMap<String, Vec<FormationParams>>,
    mc: &MonteCarloParams,
    seed: u64,
    params: &StorageCostParams,
    mode: FormationMode,
) -> Result<(Vec<StorageSite>, Vec<DroppedSite>)> {
    let outcomes: Vec<Result<std::result::Result<StorageSite, DroppedSite>>> = sites
        .par_iter()
        .map(|s| {
            let formations = adjacency.get(&s.id).map(Vec::as_slice).unwrap_or(&[]);
            characterize_site(s, formations, mc, seed, params, mode)
        })
        .collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for o in outcomes {
        match o? {
            Ok(s) => kept.push(s),
            Err(d) => dropped.push(d),
        }
    }
    Ok((kept, dropped))
}

pub fn storage_supply_curve(sites: &[StorageSite]) -> Vec<SupplyPoint> {
    supply_curve(
        sites
            .iter()
            .map(|s| (s.site.id.clone(), s.injectivity, s.storage_cost)),
    )
}

#[derive(Debug, Deserialize)]
struct FormationRow {
    name: String,
    depth_m: f64,
    thickness_m: f64,
    perm_md: f64,
    porosity: f64,
    depth_min_m: f64,
    depth_max_m: f64,
}

/// Formation table: `name,depth_m,thickness_m,perm_md,porosity,depth_min_m,depth_max_m`.
pub fn read_formations_csv(path: &Path) -> Result<Vec<FormationParams>> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(&file, e))?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<FormationRow>() {
        let r = row.map_err(|e| csv_error(&file, e))?;
        let mut f = FormationParams::new(&r.name, r.depth_m, r.thickness_m, r.perm_md, r.porosity);
        f.depth_valid = (r.depth_min_m, r.depth_max_m);
        f.validate()?;
        out.push(f);
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
struct AdjacencyRow {
    site_id: String,
    formation: String,
}

/// Site-to-formation adjacency: `site_id,formation`.
pub fn read_adjacency_csv(
    path: &Path,
    formations: &[FormationParams],
) -> Result<BTreeMap<String, Vec<FormationParams>>> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(&file, e))?;
    let mut out: BTreeMap<String, Vec<FormationParams>> = BTreeMap::new();
    for (k, row) in rdr.deserialize::<AdjacencyRow>().enumerate() {
        let r = row.map_err(|e| csv_error(&file, e))?;
        let f = formations
            .iter()
            .find(|f| f.name == r.formation)
            .ok_or_else(|| Error::Parse {
                file: file.clone(),
                line: k + 2,
                message: format!("unknown formation `{}`", r.formation),
            })?;
        out.entry(r.site_id).or_default().push(f.clone());
    }
    Ok(out)
}

/// Storage site table: `site_id,formation,injectivity_mt_y,capacity_mt,cost_usd_t,n_wells`.
pub fn format_storage_sites_csv(sites: &[StorageSite]) -> String {
    let mut out = String::from("site_id,formation,injectivity_mt_y,capacity_mt,cost_usd_t,n_wells\n");
    for s in sites {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.site.id, s.formation, s.injectivity, s.capacity, s.storage_cost, s.n_injection_wells
        ));
    }
    out
}
