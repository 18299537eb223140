//! Surface screening of candidate injection sites: buffered exclusions and
//! minimum contiguous free area.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoolGrid, Cell, GridSpec, RasterGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreeningParams {
    /// Land-cover codes excluded outright (developed land, roads, water, ...).
    pub excluded_landcover_classes: BTreeSet<i64>,
    /// Meters.
    pub landcover_buffer: f64,
    /// Meters.
    pub field_buffer: f64,
    /// km².
    pub min_contiguous_area: f64,
}

impl Default for ScreeningParams {
    fn default() -> Self {
        ScreeningParams {
            // NLCD-style codes: open water, developed (4 intensities).
            excluded_landcover_classes: [11, 21, 22, 23, 24].into_iter().collect(),
            landcover_buffer: 20_000.0,
            field_buffer: 5_000.0,
            min_contiguous_area: 78.5,
        }
    }
}

impl ScreeningParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.landcover_buffer >= 0.0 && self.field_buffer >= 0.0) {
            return Err(Error::config("screening buffers must be >= 0"));
        }
        if !(self.min_contiguous_area > 0.0) {
            return Err(Error::config("min_contiguous_area must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteSource {
    Screened,
    Announced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSite {
    pub id: String,
    pub x: f64,
    pub y: f64,
    /// km².
    pub area: f64,
    /// Member cells; empty for announced sites given only by location.
    pub cells: Vec<Cell>,
    pub source: SiteSource,
}

impl CandidateSite {
    pub fn centroid(&self) -> (f64, f64) {
        (self.x, self.y)
    }

    /// The cell used as the pipeline terminal: the member cell nearest the
    /// centroid, or the cell containing the site location.
    pub fn terminal_cell(&self, spec: &GridSpec) -> Option<Cell> {
        if self.cells.is_empty() {
            return spec.locate(self.x, self.y);
        }
        self.cells.iter().copied().min_by(|a, b| {
            let da = dist2(spec.center(*a), (self.x, self.y));
            let db = dist2(spec.center(*b), (self.x, self.y));
            da.total_cmp(&db).then_with(|| a.cmp(b))
        })
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Cell offsets of the discrete Euclidean disk of the given radius (in cells).
pub(crate) fn disk_offsets(radius_cells: f64) -> Vec<(isize, isize)> {
    let r2 = radius_cells * radius_cells;
    // Absorb rounding in the metric-to-cell conversion.
    let tol = 1e-9 * r2.max(1.0);
    let reach = radius_cells.floor() as isize;
    let mut out = Vec::new();
    for di in -reach..=reach {
        for dj in -reach..=reach {
            if ((di * di + dj * dj) as f64) <= r2 + tol {
                out.push((di, dj));
            }
        }
    }
    out
}

/// Morphological dilation of a boolean mask by a Euclidean disk.
pub fn buffer_exclusion(mask: &BoolGrid, radius: f64) -> Result<BoolGrid> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::domain(format!("buffer radius must be >= 0, got {radius}")));
    }
    if radius == 0.0 {
        return Ok(mask.clone());
    }
    let spec = *mask.spec();
    let offsets = disk_offsets(radius / spec.cellsize);
    let (nr, nc) = (spec.nrows as isize, spec.ncols as isize);
    let src = mask.values();
    let mut out = mask.clone();
    let dst = out.values_mut();
    for r in 0..nr {
        for c in 0..nc {
            let i = (r * nc + c) as usize;
            if !src[i] {
                continue;
            }
            // A cell whose 4-neighbors are all set reaches nothing the set's
            // boundary cells do not already reach.
            let interior = r > 0
                && r < nr - 1
                && c > 0
                && c < nc - 1
                && src[i - 1]
                && src[i + 1]
                && src[i - nc as usize]
                && src[i + nc as usize];
            if interior {
                continue;
            }
            for &(di, dj) in &offsets {
                let (rr, cc) = (r + di, c + dj);
                if rr >= 0 && rr < nr && cc >= 0 && cc < nc {
                    dst[(rr * nc + cc) as usize] = true;
                }
            }
        }
    }
    Ok(out)
}

/// 4-connected components of free cells whose area reaches `min_area` (km²).
/// Sites are ordered by centroid (y, then x) and numbered in that order.
pub fn contiguous_candidates(free_mask: &BoolGrid, min_area: f64) -> Vec<CandidateSite> {
    let spec = *free_mask.spec();
    let free = free_mask.values();
    let mut seen = vec![false; spec.len()];
    let mut comps: Vec<Vec<Cell>> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..spec.len() {
        if !free[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut cells = Vec::new();
        while let Some(i) = queue.pop_front() {
            let cell = spec.cell(i);
            cells.push(cell);
            let mut visit = |j: usize| {
                if free[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            };
            if cell.row > 0 {
                visit(i - spec.ncols);
            }
            if cell.row + 1 < spec.nrows {
                visit(i + spec.ncols);
            }
            if cell.col > 0 {
                visit(i - 1);
            }
            if cell.col + 1 < spec.ncols {
                visit(i + 1);
            }
        }
        comps.push(cells);
    }

    let cell_area = spec.cell_area_km2();
    let mut sites: Vec<CandidateSite> = comps
        .into_iter()
        .filter_map(|mut cells| {
            let area = cells.len() as f64 * cell_area;
            if area < min_area {
                return None;
            }
            cells.sort();
            let n = cells.len() as f64;
            let (sx, sy) = cells.iter().fold((0.0, 0.0), |acc, c| {
                let (x, y) = spec.center(*c);
                (acc.0 + x, acc.1 + y)
            });
            Some(CandidateSite {
                id: String::new(),
                x: sx / n,
                y: sy / n,
                area,
                cells,
                source: SiteSource::Screened,
            })
        })
        .collect();
    sites.sort_by(|a, b| a.y.total_cmp(&b.y).then_with(|| a.x.total_cmp(&b.x)));
    for (k, s) in sites.iter_mut().enumerate() {
        s.id = format!("S{:03}", k + 1);
    }
    sites
}

/// Free mask after buffering excluded land cover and active fields.
pub fn free_mask(
    landcover: &RasterGrid<f64>,
    active_fields: &BoolGrid,
    params: &ScreeningParams,
) -> Result<BoolGrid> {
    params.validate()?;
    landcover.check_aligned(active_fields)?;
    let categories = landcover.to_categories();
    let excluded = categories.map(|c| c.is_some_and(|v| params.excluded_landcover_classes.contains(&v)));
    let a = buffer_exclusion(&excluded, params.landcover_buffer)?;
    let b = buffer_exclusion(active_fields, params.field_buffer)?;
    let vals = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| !(x || y))
        .collect();
    RasterGrid::new(*landcover.spec(), vals)
}

/// Screened sites followed by the announced sites, which bypass screening.
pub fn screen_sites(
    landcover: &RasterGrid<f64>,
    active_fields: &BoolGrid,
    params: &ScreeningParams,
    announced: &[CandidateSite],
) -> Result<Vec<CandidateSite>> {
    let free = free_mask(landcover, active_fields, params)?;
    let mut sites = contiguous_candidates(&free, params.min_contiguous_area);
    sites.extend(announced.iter().cloned().map(|mut s| {
        s.source = SiteSource::Announced;
        s
    }));
    Ok(sites)
}

#[derive(Debug, Deserialize)]
struct AnnouncedRow {
    id: String,
    x: f64,
    y: f64,
    area_km2: f64,
}

/// Announced sites CSV: `id,x,y,area_km2`.
pub fn read_announced_csv(path: &Path) -> Result<Vec<CandidateSite>> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| crate::capture::csv_error(&file, e))?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<AnnouncedRow>() {
        let row = row.map_err(|e| crate::capture::csv_error(&file, e))?;
        if !(row.area_km2 > 0.0) {
            return Err(Error::domain(format!("announced site `{}` needs area_km2 > 0", row.id)));
        }
        out.push(CandidateSite {
            id: row.id,
            x: row.x,
            y: row.y,
            area: row.area_km2,
            cells: Vec::new(),
            source: SiteSource::Announced,
        });
    }
    Ok(out)
}

/// Sites CSV: `id,x,y,area_km2,source`.
pub fn format_sites_csv(sites: &[CandidateSite]) -> String {
    let mut out = String::from("id,x,y,area_km2,source\n");
    for s in sites {
        let src = match s.source {
            SiteSource::Screened => "screened",
            SiteSource::Announced => "announced",
        };
        out.push_str(&format!("{},{},{},{},{}\n", s.id, s.x, s.y, s.area, src));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, cs: f64) -> GridSpec {
        GridSpec::new(n, n, cs, 0.0, 0.0).unwrap()
    }

    #[test]
    fn radius_zero_is_identity() {
        let mut m = BoolGrid::filled(grid(5, 10.0), false);
        m.set(Cell::new(2, 3), true);
        assert_eq!(buffer_exclusion(&m, 0.0).unwrap(), m);
        assert!(buffer_exclusion(&m, -1.0).is_err());
    }

    #[test]
    fn single_cell_disk_of_radius_two() {
        let mut m = BoolGrid::filled(grid(10, 1000.0), false);
        m.set(Cell::new(5, 5), true);
        let d = buffer_exclusion(&m, 2000.0).unwrap();
        assert_eq!(d.count_true(), 13);
    }

    #[test]
    fn all_true_saturates() {
        let m = BoolGrid::filled(grid(6, 100.0), true);
        assert_eq!(buffer_exclusion(&m, 450.0).unwrap(), m);
    }

    #[test]
    fn contiguous_examples() {
        let all = BoolGrid::filled(grid(3, 5000.0), true);
        let sites = contiguous_candidates(&all, 78.5);
        assert_eq!(sites.len(), 1);
        assert!((sites[0].area - 225.0).abs() < 1e-9);
        assert_eq!(sites[0].cells.len(), 9);

        let small = BoolGrid::filled(grid(3, 2000.0), true);
        assert!(contiguous_candidates(&small, 78.5).is_empty());

        let none = BoolGrid::filled(grid(3, 5000.0), false);
        assert!(contiguous_candidates(&none, 78.5).is_empty());
    }

    #[test]
    fn diagonal_cells_are_not_connected() {
        let mut m = BoolGrid::filled(grid(2, 10_000.0), false);
        m.set(Cell::new(0, 0), true);
        m.set(Cell::new(1, 1), true);
        let sites = contiguous_candidates(&m, 1.0);
        assert_eq!(sites.len(), 2);
    }

    #[test]
    fn screen_without_exclusions_keeps_announced() {
        let spec = grid(10, 5000.0);
        let lc = RasterGrid::filled(spec, 41.0);
        let fields = BoolGrid::filled(spec, false);
        let announced = vec![CandidateSite {
            id: "A1".into(),
            x: 1.0,
            y: 1.0,
            area: 100.0,
            cells: vec![],
            source: SiteSource::Announced,
        }];
        let sites = screen_sites(&lc, &fields, &ScreeningParams::default(), &announced).unwrap();
        assert_eq!(sites.len(), 2);
        assert_eq!(sites[0].source, SiteSource::Screened);
        assert_eq!(sites[1].id, "A1");

        let developed = RasterGrid::filled(spec, 22.0);
        let sites = screen_sites(&developed, &fields, &ScreeningParams::default(), &announced).unwrap();
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].source, SiteSource::Announced);
    }

    #[test]
    fn misaligned_inputs_rejected() {
        let lc = RasterGrid::filled(grid(10, 5000.0), 41.0);
        let fields = BoolGrid::filled(grid(9, 5000.0), false);
        assert!(matches!(
            screen_sites(&lc, &fields, &ScreeningParams::default(), &[]),
            Err(Error::Alignment(_))
        ));
    }
}
