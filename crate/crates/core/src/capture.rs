//! Capture amounts and levelized capture costs for industrial emitters.
//!
//! Cost follows a power law in the captured amount, `C0 * captured^-b`, with
//! `(C0, b)` depending on the CO2 volume fraction of the target stream.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curve::{supply_curve, SupplyPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Ammonia,
    CoalPower,
    Refinery,
    PulpPaper,
    GasPower,
    Metals,
    Hydrogen,
    Petrochemical,
    GasProcessing,
    Minerals,
    Other,
}

/// One industrial emitter (or one capture stream of a multi-stream facility).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilityRecord {
    pub id: String,
    pub name: String,
    pub x: f64,
    pub y: f64,
    pub sector: Sector,
    /// Reported emissions, Mt CO2/y.
    #[serde(rename = "emitted_mt")]
    pub emitted: f64,
    pub capturable_fraction: f64,
    /// CO2 volume fraction of the target stream.
    pub co2_concentration: f64,
    /// Metadata only.
    pub biogenic_fraction: f64,
}

impl FacilityRecord {
    pub fn location(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Error::domain(format!("facility `{}`: {what} out of range ({v})", self.id))
        };
        if !(self.emitted >= 0.0) {
            return Err(bad("emitted", self.emitted));
        }
        if !(0.0..=1.0).contains(&self.capturable_fraction) {
            return Err(bad("capturable_fraction", self.capturable_fraction));
        }
        if !(self.co2_concentration > 0.0 && self.co2_concentration <= 1.0) {
            return Err(bad("co2_concentration", self.co2_concentration));
        }
        if !(0.0..=1.0).contains(&self.biogenic_fraction) {
            return Err(bad("biogenic_fraction", self.biogenic_fraction));
        }
        Ok(())
    }
}

/// `(concentration, C0, b)` anchor of the cost law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub concentration: f64,
    /// $/t at 1 Mt/y.
    pub c0: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaptureCostParams {
    pub rows: Vec<CostRow>,
    pub capacity_factor: f64,
    pub capital_charge_rate: f64,
    pub design_capture_fraction: f64,
    /// Net abatement per tonne captured once cogeneration emissions are counted.
    pub effective_capture_ratio: f64,
    /// Share of the levelized cost attributed to capital (calibration default).
    pub capex_fraction_of_levelized: f64,
    /// Captures below this are flagged in reports but still priced.
    pub tiny_capture_floor: f64,
}

impl Default for CaptureCostParams {
    fn default() -> Self {
        CaptureCostParams {
            rows: vec![
                CostRow { concentration: 0.05, c0: 123.0, b: 0.146 },
                CostRow { concentration: 0.10, c0: 105.0, b: 0.167 },
                CostRow { concentration: 0.15, c0: 99.0, b: 0.175 },
                CostRow { concentration: 0.94, c0: 27.0, b: 0.415 },
            ],
            capacity_factor: 0.90,
            capital_charge_rate: 0.106,
            design_capture_fraction: 0.95,
            effective_capture_ratio: 0.73,
            capex_fraction_of_levelized: 0.5,
            tiny_capture_floor: 1.0e-6,
        }
    }
}

impl CaptureCostParams {
    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::config("capture cost table has no rows"));
        }
        for w in self.rows.windows(2) {
            if !(w[1].concentration > w[0].concentration) {
                return Err(Error::config(
                    "capture cost rows must have strictly increasing concentration",
                ));
            }
        }
        for r in &self.rows {
            if !(r.c0 > 0.0 && r.b > 0.0 && r.concentration > 0.0) {
                return Err(Error::config(format!(
                    "capture cost row at {} must have C0 > 0 and b > 0",
                    r.concentration
                )));
            }
        }
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.capacity_factor)
            || !in_unit(self.design_capture_fraction)
            || !in_unit(self.effective_capture_ratio)
        {
            return Err(Error::config("capture fractions must lie in (0, 1]"));
        }
        if !(self.capital_charge_rate > 0.0) {
            return Err(Error::config("capital_charge_rate must be > 0"));
        }
        if !(self.capex_fraction_of_levelized > 0.0 && self.capex_fraction_of_levelized < 1.0) {
            return Err(Error::config("capex_fraction_of_levelized must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `(C0, b)` at a concentration: piecewise-linear in ln(concentration),
    /// clamped to the end rows.
    pub fn coefficients(&self, concentration: f64) -> (f64, f64) {
        let rows = &self.rows;
        let first = rows[0];
        let last = rows[rows.len() - 1];
        if concentration <= first.concentration {
            return (first.c0, first.b);
        }
        if concentration >= last.concentration {
            return (last.c0, last.b);
        }
        let i = rows
            .windows(2)
            .position(|w| concentration <= w[1].concentration)
            .unwrap_or(rows.len() - 2);
        let (lo, hi) = (rows[i], rows[i + 1]);
        if concentration == hi.concentration {
            return (hi.c0, hi.b);
        }
        let t = (concentration.ln() - lo.concentration.ln())
            / (hi.concentration.ln() - lo.concentration.ln());
        (lo.c0 + t * (hi.c0 - lo.c0), lo.b + t * (hi.b - lo.b))
    }
}

/// Annual captured CO2 (Mt/y): emitted × capturable fraction × design capture fraction.
pub fn co2_captured(emitted: f64, capturable_fraction: f64, params: &CaptureCostParams) -> Result<f64> {
    if !(emitted >= 0.0) || !emitted.is_finite() {
        return Err(Error::domain(format!("emitted must be >= 0, got {emitted}")));
    }
    if !(0.0..=1.0).contains(&capturable_fraction) {
        return Err(Error::domain(format!(
            "capturable_fraction must lie in [0, 1], got {capturable_fraction}"
        )));
    }
    Ok(emitted * capturable_fraction * params.design_capture_fraction)
}

/// Total levelized capture cost ($/t) at a captured amount (Mt/y).
pub fn capture_cost_per_tonne(captured: f64, concentration: f64, params: &CaptureCostParams) -> Result<f64> {
    if captured == 0.0 {
        return Err(Error::domain(
            "captured amount is zero; the cost law is undefined at zero capture",
        ));
    }
    if !(captured > 0.0) {
        return Err(Error::domain(format!(
            "captured amount must be positive, got negative value {captured}"
        )));
    }
    if !(concentration > 0.0 && concentration <= 1.0) {
        return Err(Error::domain(format!(
            "concentration must lie in (0, 1], got {concentration}"
        )));
    }
    let (c0, b) = params.coefficients(concentration);
    Ok(c0 * captured.powf(-b))
}

/// Overnight capital ($) implied by the capital share of the levelized cost.
pub fn capture_capital(captured: f64, concentration: f64, params: &CaptureCostParams) -> Result<f64> {
    let cost = capture_cost_per_tonne(captured, concentration, params)?;
    Ok(params.capex_fraction_of_levelized * cost * captured * 1.0e6 * params.capacity_factor
        / params.capital_charge_rate)
}

/// Per-facility capture estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureEstimate {
    pub id: String,
    pub captured: f64,
    /// Levelized $/t; `None` when nothing is captured.
    pub cost: Option<f64>,
    pub capital: Option<f64>,
    /// Net abatement after cogeneration emissions (Mt/y).
    pub effective_abatement: f64,
    pub below_floor: bool,
}

pub fn estimate(facility: &FacilityRecord, params: &CaptureCostParams) -> Result<CaptureEstimate> {
    facility.validate()?;
    let captured = co2_captured(facility.emitted, facility.capturable_fraction, params)?;
    let (cost, capital) = if captured > 0.0 {
        (
            Some(capture_cost_per_tonne(captured, facility.co2_concentration, params)?),
            Some(capture_capital(captured, facility.co2_concentration, params)?),
        )
    } else {
        (None, None)
    };
    Ok(CaptureEstimate {
        id: facility.id.clone(),
        captured,
        cost,
        capital,
        effective_abatement: captured * params.effective_capture_ratio,
        below_floor: captured < params.tiny_capture_floor,
    })
}

/// Facilities ordered by ascending unit cost with cumulative capture.
/// Facilities capturing nothing are omitted.
pub fn cost_supply_curve(facilities: &[FacilityRecord], params: &CaptureCostParams) -> Result<Vec<SupplyPoint>> {
    let mut items = Vec::with_capacity(facilities.len());
    for f in facilities {
        let e = estimate(f, params)?;
        if let Some(cost) = e.cost {
            items.push((e.id, e.captured, cost));
        }
    }
    Ok(supply_curve(items))
}

pub fn read_facilities_csv(path: &Path) -> Result<Vec<FacilityRecord>> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_error(&file, e))?;
    let mut out = Vec::new();
    for rec in rdr.deserialize::<FacilityRecord>() {
        let f = rec.map_err(|e| csv_error(&file, e))?;
        f.validate()?;
        out.push(f);
    }
    Ok(out)
}

pub(crate) fn csv_error(file: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        file: file.to_string(),
        line,
        message: e.to_string(),
    }
}
