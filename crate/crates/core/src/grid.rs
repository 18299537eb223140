//! Uniform georeferenced raster grids and ESRI ASCII grid I/O.
//!
//! Row 0 is the northern-most row, matching the ESRI ASCII layout; the
//! origin is the lower-left corner of the lower-left cell.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry shared by every aligned grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ncols: usize,
    pub nrows: usize,
    /// Cell edge length in meters.
    pub cellsize: f64,
    pub xll: f64,
    pub yll: f64,
}

/// A cell address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl GridSpec {
    pub fn new(ncols: usize, nrows: usize, cellsize: f64, xll: f64, yll: f64) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::domain("grid dimensions must be positive"));
        }
        if !(cellsize > 0.0) || !cellsize.is_finite() {
            return Err(Error::domain(format!("cellsize must be > 0, got {cellsize}")));
        }
        Ok(GridSpec {
            ncols,
            nrows,
            cellsize,
            xll,
            yll,
        })
    }

    pub fn len(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.ncols + cell.col
    }

    #[inline]
    pub fn cell(&self, index: usize) -> Cell {
        Cell::new(index / self.ncols, index % self.ncols)
    }

    pub fn contains(&self, cell: Cell) -> bool {
        cell.row < self.nrows && cell.col < self.ncols
    }

    /// Projected coordinates of a cell center.
    pub fn center(&self, cell: Cell) -> (f64, f64) {
        let x = self.xll + (cell.col as f64 + 0.5) * self.cellsize;
        let y = self.yll + ((self.nrows - cell.row) as f64 - 0.5) * self.cellsize;
        (x, y)
    }

    /// The cell containing a projected point, if inside the grid.
    pub fn locate(&self, x: f64, y: f64) -> Option<Cell> {
        let c = ((x - self.xll) / self.cellsize).floor();
        let r_from_bottom = ((y - self.yll) / self.cellsize).floor();
        if c < 0.0 || r_from_bottom < 0.0 {
            return None;
        }
        let (c, rb) = (c as usize, r_from_bottom as usize);
        if c >= self.ncols || rb >= self.nrows {
            return None;
        }
        Some(Cell::new(self.nrows - 1 - rb, c))
    }

    /// Cell area in km².
    pub fn cell_area_km2(&self) -> f64 {
        self.cellsize * self.cellsize / 1.0e6
    }

    pub fn check_aligned(&self, other: &GridSpec) -> Result<()> {
        let same = self.ncols == other.ncols
            && self.nrows == other.nrows
            && self.cellsize == other.cellsize
            && self.xll == other.xll
            && self.yll == other.yll;
        if same {
            Ok(())
        } else {
            Err(Error::Alignment(format!(
                "grids differ: {}x{} @ {} m origin ({}, {}) vs {}x{} @ {} m origin ({}, {})",
                self.ncols,
                self.nrows,
                self.cellsize,
                self.xll,
                self.yll,
                other.ncols,
                other.nrows,
                other.cellsize,
                other.xll,
                other.yll
            )))
        }
    }
}

/// Row-major raster with a per-cell payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterGrid<T> {
    spec: GridSpec,
    nodata: Option<f64>,
    values: Vec<T>,
}

pub type BoolGrid = RasterGrid<bool>;

impl<T> RasterGrid<T> {
    pub fn new(spec: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::domain(format!(
                "payload length {} does not match {}x{} grid",
                values.len(),
                spec.ncols,
                spec.nrows
            )));
        }
        Ok(RasterGrid {
            spec,
            nodata: None,
            values,
        })
    }

    pub fn with_nodata(mut self, nodata: Option<f64>) -> Self {
        self.nodata = nodata;
        self
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn nodata(&self) -> Option<f64> {
        self.nodata
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, cell: Cell) -> &T {
        &self.values[self.spec.index(cell)]
    }

    pub fn set(&mut self, cell: Cell, value: T) {
        let i = self.spec.index(cell);
        self.values[i] = value;
    }

    pub fn check_aligned<U>(&self, other: &RasterGrid<U>) -> Result<()> {
        self.spec.check_aligned(&other.spec)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> RasterGrid<U> {
        RasterGrid {
            spec: self.spec,
            nodata: self.nodata,
            values: self.values.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> RasterGrid<T> {
    pub fn filled(spec: GridSpec, value: T) -> Self {
        RasterGrid {
            spec,
            nodata: None,
            values: vec![value; spec.len()],
        }
    }
}

impl RasterGrid<f64> {
    /// True where the value is a valid (non-nodata) datum.
    pub fn is_data(&self, v: f64) -> bool {
        match self.nodata {
            Some(nd) => v != nd && !v.is_nan(),
            None => !v.is_nan(),
        }
    }

    /// Categorical view: data cells rounded to integer codes, nodata as `None`.
    pub fn to_categories(&self) -> RasterGrid<Option<i64>> {
        let vals = self
            .values
            .iter()
            .map(|&v| self.is_data(v).then(|| v.round() as i64))
            .collect();
        RasterGrid {
            spec: self.spec,
            nodata: self.nodata,
            values: vals,
        }
    }

    pub fn to_mask(&self) -> BoolGrid {
        let vals = self
            .values
            .iter()
            .map(|&v| self.is_data(v) && v != 0.0)
            .collect();
        RasterGrid {
            spec: self.spec,
            nodata: None,
            values: vals,
        }
    }
}

impl BoolGrid {
    pub fn count_true(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn to_f64(&self) -> RasterGrid<f64> {
        self.map(|&b| if b { 1.0 } else { 0.0 })
    }
}

const ESRI_KEYS: [&str; 6] = [
    "ncols",
    "nrows",
    "xllcorner",
    "yllcorner",
    "cellsize",
    "nodata_value",
];

/// Read an ESRI ASCII grid. Parse errors cite the file and line.
pub fn read_ascii_grid(path: &Path) -> Result<RasterGrid<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ascii_grid(&text, &path.display().to_string())
}

pub fn parse_ascii_grid(text: &str, file: &str) -> Result<RasterGrid<f64>> {
    let perr = |line: usize, message: String| Error::Parse {
        file: file.to_string(),
        line,
        message,
    };
    let mut header: [Option<f64>; 6] = [None; 6];
    let mut center_registered = (false, false);
    let mut lines = text.lines().enumerate().peekable();
    // Header lines start with an alphabetic key.
    while let Some(&(ln, line)) = lines.peek() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            lines.next();
            continue;
        }
        if !trimmed
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic())
        {
            break;
        }
        let mut parts = trimmed.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        let value = parts
            .next()
            .ok_or_else(|| perr(ln + 1, format!("header `{key}` has no value")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| perr(ln + 1, format!("header `{key}` value `{value}` is not numeric")))?;
        let slot = match key.as_str() {
            "xllcenter" => {
                center_registered.0 = true;
                2
            }
            "yllcenter" => {
                center_registered.1 = true;
                3
            }
            k => ESRI_KEYS
                .iter()
                .position(|&h| h == k)
                .ok_or_else(|| perr(ln + 1, format!("unknown header key `{key}`")))?,
        };
        header[slot] = Some(value);
        lines.next();
    }
    let need = |i: usize| header[i].ok_or_else(|| perr(1, format!("missing header `{}`", ESRI_KEYS[i])));
    let ncols = need(0)? as usize;
    let nrows = need(1)? as usize;
    let cellsize = need(4)?;
    let mut xll = need(2)?;
    let mut yll = need(3)?;
    if center_registered.0 {
        xll -= cellsize / 2.0;
    }
    if center_registered.1 {
        yll -= cellsize / 2.0;
    }
    let spec = GridSpec::new(ncols, nrows, cellsize, xll, yll).map_err(|e| perr(1, e.to_string()))?;
    let mut values = Vec::with_capacity(spec.len());
    let mut last_line = 0;
    for (ln, line) in lines {
        last_line = ln + 1;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| perr(ln + 1, format!("value `{tok}` is not numeric")))?;
            values.push(v);
        }
    }
    if values.len() != spec.len() {
        return Err(perr(
            last_line.max(1),
            format!(
                "expected {} values for a {}x{} grid, found {}",
                spec.len(),
                ncols,
                nrows,
                values.len()
            ),
        ));
    }
    Ok(RasterGrid::new(spec, values)?.with_nodata(header[5]))
}

/// Format a grid as ESRI ASCII text. Output is deterministic.
pub fn format_ascii_grid(grid: &RasterGrid<f64>) -> String {
    let s = grid.spec();
    let mut out = String::new();
    let _ = writeln!(out, "ncols {}", s.ncols);
    let _ = writeln!(out, "nrows {}", s.nrows);
    let _ = writeln!(out, "xllcorner {}", s.xll);
    let _ = writeln!(out, "yllcorner {}", s.yll);
    let _ = writeln!(out, "cellsize {}", s.cellsize);
    if let Some(nd) = grid.nodata() {
        let _ = writeln!(out, "NODATA_value {nd}");
    }
    for row in grid.values().chunks(s.ncols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_ascii_grid(path: &Path, grid: &RasterGrid<f64>) -> Result<()> {
    fs::write(path, format_ascii_grid(grid)).map_err(|e| Error::io(path, e))
}
