//! CO2 density and viscosity by bilinear interpolation over an embedded
//! (pressure, temperature) table covering 5–40 MPa and 20–150 °C.

use std::sync::OnceLock;

const TABLE_CSV: &str = include_str!("../../data/co2_properties_v1.csv");

/// Version tag of the embedded table, echoed into run metadata.
pub const TABLE_VERSION: &str = "co2_properties_v1";

struct Table {
    pressures: Vec<f64>,
    temperatures: Vec<f64>,
    // Indexed [pressure][temperature].
    density: Vec<f64>,
    viscosity: Vec<f64>,
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<[f64; 4]> = Vec::new();
        for line in TABLE_CSV.lines() {
            if line.starts_with('#') || line.starts_with("pressure") || line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse().expect("embedded CO2 table is numeric"))
                .collect();
            rows.push([v[0], v[1], v[2], v[3]]);
        }
        let mut pressures: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        pressures.dedup();
        let mut temperatures: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        temperatures.sort_by(f64::total_cmp);
        temperatures.dedup();
        assert_eq!(pressures.len() * temperatures.len(), rows.len());
        Table {
            density: rows.iter().map(|r| r[2]).collect(),
            viscosity: rows.iter().map(|r| r[3]).collect(),
            pressures,
            temperatures,
        }
    })
}

fn bracket(axis: &[f64], v: f64) -> (usize, f64) {
    let v = v.clamp(axis[0], axis[axis.len() - 1]);
    let i = match axis.iter().position(|&a| a > v) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => axis.len() - 2,
    };
    let t = (v - axis[i]) / (axis[i + 1] - axis[i]);
    (i, t.clamp(0.0, 1.0))
}

fn interpolate(values: &[f64], pressure_mpa: f64, temperature_c: f64) -> f64 {
    let t = table();
    let nt = t.temperatures.len();
    let (i, u) = bracket(&t.pressures, pressure_mpa);
    let (j, w) = bracket(&t.temperatures, temperature_c);
    let at = |a: usize, b: usize| values[a * nt + b];
    (1.0 - u) * (1.0 - w) * at(i, j)
        + u * (1.0 - w) * at(i + 1, j)
        + (1.0 - u) * w * at(i, j + 1)
        + u * w * at(i + 1, j + 1)
}

/// Density in kg/m³ at pressure (Pa) and temperature (°C); inputs outside the
/// table are clamped to its boundary.
pub fn density(pressure_pa: f64, temperature_c: f64) -> f64 {
    interpolate(&table().density, pressure_pa / 1.0e6, temperature_c)
}

/// Dynamic viscosity in Pa·s.
pub fn viscosity(pressure_pa: f64, temperature_c: f64) -> f64 {
    interpolate(&table().viscosity, pressure_pa / 1.0e6, temperature_c)
}
