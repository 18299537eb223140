//! Least-cost raster routing and candidate-network generation.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BoolGrid, Cell, GridSpec, RasterGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    #[default]
    Eight,
    /// Eight neighbors plus knight moves.
    Sixteen,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const EIGHT: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        const SIXTEEN: [(isize, isize); 16] = [
            (-2, -1),
            (-2, 1),
            (-1, -2),
            (-1, -1),
            (-1, 0),
            (-1, 1),
            (-1, 2),
            (0, -1),
            (0, 1),
            (1, -2),
            (1, -1),
            (1, 0),
            (1, 1),
            (1, 2),
            (2, -1),
            (2, 1),
        ];
        match self {
            Connectivity::Eight => &EIGHT,
            Connectivity::Sixteen => &SIXTEEN,
        }
    }

    pub fn are_neighbors(self, a: Cell, b: Cell) -> bool {
        let dr = b.row as isize - a.row as isize;
        let dc = b.col as isize - a.col as isize;
        self.offsets().contains(&(dr, dc))
    }
}

/// Step length between two cell centers, km.
pub fn step_length_km(spec: &GridSpec, a: Cell, b: Cell) -> f64 {
    let dr = a.row as f64 - b.row as f64;
    let dc = a.col as f64 - b.col as f64;
    (dr * dr + dc * dc).sqrt() * spec.cellsize / 1000.0
}

/// Traversal cost of one step: length × mean of the two cell weights.
pub fn step_cost(surface: &RasterGrid<f64>, a: Cell, b: Cell) -> f64 {
    step_length_km(surface.spec(), a, b) * 0.5 * (surface.get(a) + surface.get(b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutedPath {
    pub cells: Vec<Cell>,
    /// km.
    pub length_km: f64,
    /// $ (Σ step costs).
    pub routed_cost: f64,
    pub from: String,
    pub to: String,
}

impl RoutedPath {
    /// Recompute length and cost of a cell sequence on a surface.
    pub fn from_cells(surface: &RasterGrid<f64>, cells: Vec<Cell>, from: String, to: String) -> Self {
        let (mut length_km, mut routed_cost) = (0.0, 0.0);
        for w in cells.windows(2) {
            length_km += step_length_km(surface.spec(), w[0], w[1]);
            routed_cost += step_cost(surface, w[0], w[1]);
        }
        RoutedPath {
            cells,
            length_km,
            routed_cost,
            from,
            to,
        }
    }
}

fn check_surface(surface: &RasterGrid<f64>) -> Result<()> {
    if let Some(i) = surface.values().iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        let c = surface.spec().cell(i);
        return Err(Error::domain(format!(
            "surface must be positive and finite; cell ({}, {}) is {}",
            c.row,
            c.col,
            surface.values()[i]
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Single-source shortest-path tree.
pub struct PathTree {
    spec: GridSpec,
    pub source: Cell,
    pub dist: Vec<f64>,
    pred: Vec<usize>,
}

impl PathTree {
    pub fn cost_to(&self, dst: Cell) -> f64 {
        self.dist[self.spec.index(dst)]
    }

    /// Cells from the source to `dst`, or `None` if unreachable.
    pub fn cells_to(&self, dst: Cell) -> Option<Vec<Cell>> {
        let mut i = self.spec.index(dst);
        if !self.dist[i].is_finite() {
            return None;
        }
        let mut out = vec![self.spec.cell(i)];
        while self.pred[i] != usize::MAX {
            i = self.pred[i];
            out.push(self.spec.cell(i));
        }
        out.reverse();
        Some(out)
    }
}

/// Per-cell tie-break weight. Equal-cost paths are ordered by the sum of
/// these, which makes shortest paths unique in practice, so two routes that
/// meet and part again never braid.
fn tie_weight(index: usize) -> u64 {
    let mut z = (index as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) >> 40
}

fn same_cost(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Dijkstra from `src` over the whole grid. Paths whose costs agree to
/// rounding are ranked by a fixed per-cell tie-break weight.
pub fn shortest_path_tree(surface: &RasterGrid<f64>, src: Cell, conn: Connectivity) -> Result<PathTree> {
    check_surface(surface)?;
    let spec = *surface.spec();
    if !spec.contains(src) {
        return Err(Error::domain(format!("source cell ({}, {}) outside grid", src.row, src.col)));
    }
    let n = spec.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut tie = vec![u64::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let s = spec.index(src);
    dist[s] = 0.0;
    tie[s] = 0;
    heap.push(Reverse(Key(0.0, s)));
    let offsets = conn.offsets();
    while let Some(Reverse(Key(d, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let cu = spec.cell(u);
        for &(dr, dc) in offsets {
            let r = cu.row as isize + dr;
            let c = cu.col as isize + dc;
            if r < 0 || c < 0 || r >= spec.nrows as isize || c >= spec.ncols as isize {
                continue;
            }
            let cv = Cell::new(r as usize, c as usize);
            let v = spec.index(cv);
            if done[v] {
                continue;
            }
            let nd = d + step_cost(surface, cu, cv);
            let nt = tie[u] + tie_weight(u) + tie_weight(v);
            let better = if same_cost(nd, dist[v]) {
                nt < tie[v]
            } else {
                nd < dist[v]
            };
            if better {
                heap.push(Reverse(Key(nd, v)));
                dist[v] = nd;
                tie[v] = nt;
                pred[v] = u;
            }
        }
    }
    Ok(PathTree {
        spec,
        source: src,
        dist,
        pred,
    })
}

fn cell_label(c: Cell) -> String {
    format!("r{}c{}", c.row, c.col)
}

/// Minimum-cost path between two cells.
pub fn least_cost_path(surface: &RasterGrid<f64>, src: Cell, dst: Cell, conn: Connectivity) -> Result<RoutedPath> {
    if !surface.spec().contains(dst) {
        return Err(Error::domain(format!("destination cell ({}, {}) outside grid", dst.row, dst.col)));
    }
    let tree = shortest_path_tree(surface, src, conn)?;
    let cells = tree
        .cells_to(dst)
        .ok_or_else(|| Error::Internal(format!("cell ({}, {}) unreachable", dst.row, dst.col)))?;
    Ok(RoutedPath::from_cells(surface, cells, cell_label(src), cell_label(dst)))
}

/// Path length whose step midpoints fall in SEJ cells, km. A step between
/// two cell centers crosses the shared boundary at its midpoint, so each
/// half of the step is attributed to the cell it lies in.
pub fn path_sej_km(spec: &GridSpec, cells: &[Cell], sej: &BoolGrid) -> f64 {
    cells
        .windows(2)
        .map(|w| {
            let half = 0.5 * step_length_km(spec, w[0], w[1]);
            let a = if *sej.get(w[0]) { half } else { 0.0 };
            let b = if *sej.get(w[1]) { half } else { 0.0 };
            a + b
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalKind {
    Source,
    Sink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    /// Facility or site id.
    pub id: String,
    pub kind: TerminalKind,
    pub cell: Cell,
}

impl Terminal {
    pub fn new(id: &str, kind: TerminalKind, cell: Cell) -> Self {
        Terminal {
            id: id.to_string(),
            kind,
            cell,
        }
    }

    /// Node-level key: `src:<id>` or `snk:<id>`.
    pub fn key(&self) -> String {
        match self.kind {
            TerminalKind::Source => format!("src:{}", self.id),
            TerminalKind::Sink => format!("snk:{}", self.id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: String,
    pub cell: Cell,
    pub x: f64,
    pub y: f64,
    /// Terminal keys located at this node; empty for junctions.
    pub terminals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEdge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub cells: Vec<Cell>,
    pub length_km: f64,
    pub routed_cost: f64,
    /// Length scaled by traversed weights (cost on the economic surface / base_cost).
    pub weighted_km: f64,
    /// km inside the reporting SEJ layer.
    pub sej_km: f64,
    /// Distinct land parcels crossed, when a parcel layer is given.
    pub owners_crossed: usize,
}

/// A pairwise terminal route expressed as a chain of candidate edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRoute {
    pub from: String,
    pub to: String,
    /// (edge index, traversed from→to).
    pub edges: Vec<(usize, bool)>,
    pub length_km: f64,
    pub routed_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateNetwork {
    pub grid: GridSpec,
    pub base_cost: f64,
    pub nodes: Vec<NetworkNode>,
    pub edges: Vec<CandidateEdge>,
    /// Terminal key → node index.
    pub terminals: BTreeMap<String, usize>,
    pub routes: Vec<PairRoute>,
}

impl CandidateNetwork {
    pub fn node_of(&self, terminal_key: &str) -> Option<usize> {
        self.terminals.get(terminal_key).copied()
    }

    pub fn total_length_km(&self) -> f64 {
        self.edges.iter().map(|e| e.length_km).sum()
    }

    /// Route between two terminals (either orientation).
    pub fn route(&self, a: &str, b: &str) -> Option<PairRoute> {
        self.routes.iter().find_map(|r| {
            if r.from == a && r.to == b {
                Some(r.clone())
            } else if r.from == b && r.to == a {
                Some(PairRoute {
                    from: a.to_string(),
                    to: b.to_string(),
                    edges: r.edges.iter().rev().map(|&(e, f)| (e, !f)).collect(),
                    length_km: r.length_km,
                    routed_cost: r.routed_cost,
                })
            } else {
                None
            }
        })
    }
}

/// Optional per-cell layers measured along edges.
#[derive(Default, Clone, Copy)]
pub struct EdgeMetrics<'a> {
    /// Surface used to price construction; defaults to the routing surface.
    /// Lets an SEJ avoidance multiplier steer routes without entering capital.
    pub economic: Option<&'a RasterGrid<f64>>,
    pub sej: Option<&'a BoolGrid>,
    pub parcels: Option<&'a RasterGrid<f64>>,
}

/// Route every terminal pair, overlay the routes, and split them into edges
/// at terminals and at cells where routes meet or diverge.
pub fn build_candidate_network(
    surface: &RasterGrid<f64>,
    terminals: &[Terminal],
    base_cost: f64,
    conn: Connectivity,
    metrics: EdgeMetrics<'_>,
) -> Result<CandidateNetwork> {
    let spec = *surface.spec();
    if let Some(g) = metrics.economic {
        spec.check_aligned(g.spec())?;
    }
    if !terminals.iter().any(|t| t.kind == TerminalKind::Source) || !terminals.iter().any(|t| t.kind == TerminalKind::Sink) {
        return Err(Error::domain("candidate network needs at least one source and one sink"));
    }
    for t in terminals {
        if !spec.contains(t.cell) {
            return Err(Error::domain(format!("terminal {} lies outside the grid", t.key())));
        }
    }
    let mut keys: Vec<String> = terminals.iter().map(Terminal::key).collect();
    keys.sort();
    keys.dedup();
    if keys.len() != terminals.len() {
        return Err(Error::domain("terminal keys must be unique"));
    }
    let mut terms: Vec<&Terminal> = terminals.iter().collect();
    terms.sort_by_key(|t| t.key());

    let trees: Vec<PathTree> = terms
        .par_iter()
        .map(|t| shortest_path_tree(surface, t.cell, conn))
        .collect::<Result<_>>()?;

    // Pairwise routes a→b for a < b, skipping co-located terminals.
    let mut pair_cells: Vec<(usize, usize, Vec<Cell>)> = Vec::new();
    for a in 0..terms.len() {
        for b in a + 1..terms.len() {
            if terms[a].cell == terms[b].cell {
                continue;
            }
            let cells = trees[a]
                .cells_to(terms[b].cell)
                .ok_or_else(|| Error::Internal(format!("{} unreachable from {}", terms[b].key(), terms[a].key())))?;
            pair_cells.push((a, b, cells));
        }
    }

    let mut adj: BTreeMap<Cell, BTreeSet<Cell>> = BTreeMap::new();
    for t in &terms {
        adj.entry(t.cell).or_default();
    }
    for (_, _, cells) in &pair_cells {
        for w in cells.windows(2) {
            adj.entry(w[0]).or_default().insert(w[1]);
            adj.entry(w[1]).or_default().insert(w[0]);
        }
    }
    let terminal_cells: BTreeSet<Cell> = terms.iter().map(|t| t.cell).collect();
    let is_key = |c: &Cell| terminal_cells.contains(c) || adj[c].len() != 2;

    let mut nodes: Vec<NetworkNode> = Vec::new();
    let mut node_at: BTreeMap<Cell, usize> = BTreeMap::new();
    for (&c, _) in adj.iter().filter(|(c, _)| is_key(c)) {
        let (x, y) = spec.center(c);
        node_at.insert(c, nodes.len());
        nodes.push(NetworkNode {
            id: format!("n{:04}", nodes.len()),
            cell: c,
            x,
            y,
            terminals: Vec::new(),
        });
    }
    let mut terminal_nodes = BTreeMap::new();
    for t in &terms {
        let n = node_at[&t.cell];
        nodes[n].terminals.push(t.key());
        terminal_nodes.insert(t.key(), n);
    }

    // Walk chains between key cells.
    let mut edges: Vec<CandidateEdge> = Vec::new();
    let mut first_step: BTreeMap<(Cell, Cell), (usize, bool)> = BTreeMap::new();
    for (&start, _) in adj.iter().filter(|(c, _)| is_key(c)) {
        for &next in &adj[&start] {
            if first_step.contains_key(&(start, next)) {
                continue;
            }
            let mut chain = vec![start, next];
            while !is_key(chain.last().unwrap()) {
                let cur = *chain.last().unwrap();
                let prev = chain[chain.len() - 2];
                let nb = *adj[&cur].iter().find(|&&c| c != prev).expect("degree-2 cell");
                chain.push(nb);
            }
            let end = *chain.last().unwrap();
            let e = edges.len();
            first_step.insert((start, next), (e, true));
            first_step.insert((end, chain[chain.len() - 2]), (e, false));
            let path = RoutedPath::from_cells(surface, chain, String::new(), String::new());
            edges.push(CandidateEdge {
                id: format!("e{e:04}"),
                from: node_at[&start],
                to: node_at[&end],
                weighted_km: metrics.economic.map_or(path.routed_cost, |g| {
                    path.cells.windows(2).map(|w| step_cost(g, w[0], w[1])).sum()
                }) / base_cost,
                sej_km: metrics.sej.map_or(0.0, |s| path_sej_km(&spec, &path.cells, s)),
                owners_crossed: metrics
                    .parcels
                    .map_or(0, |p| crate::costsurface::owners_crossed(&path.cells, p)),
                length_km: path.length_km,
                routed_cost: path.routed_cost,
                cells: path.cells,
            });
        }
    }

    let mut routes = Vec::new();
    for (a, b, cells) in &pair_cells {
        let mut chain = Vec::new();
        let mut i = 0;
        while i + 1 < cells.len() {
            let (e, fwd) = *first_step
                .get(&(cells[i], cells[i + 1]))
                .ok_or_else(|| Error::Internal("route does not start an edge at a key cell".into()))?;
            i += edges[e].cells.len() - 1;
            chain.push((e, fwd));
        }
        let path = RoutedPath::from_cells(surface, cells.clone(), String::new(), String::new());
        routes.push(PairRoute {
            from: terms[*a].key(),
            to: terms[*b].key(),
            edges: chain,
            length_km: path.length_km,
            routed_cost: path.routed_cost,
        });
    }

    Ok(CandidateNetwork {
        grid: spec,
        base_cost,
        nodes,
        edges,
        terminals: terminal_nodes,
        routes,
    })
}
