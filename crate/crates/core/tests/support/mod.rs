//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls into the code under test except for input
//! types and fixtures.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cctskit::grid::{BoolGrid, Cell, GridSpec, RasterGrid};
use cctskit::netdesign::{NetworkProblem, PipelineEconomics, SinkSpec, SourceSpec};
use cctskit::phasing::PhaseSchedule;
use cctskit::routing::{CandidateEdge, CandidateNetwork, NetworkNode};
use cctskit::screening::ScreeningParams;
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;

// ---------------------------------------------------------------- screening

pub struct OracleSite {
    pub cells: BTreeSet<Cell>,
    pub area: f64,
}

fn within(spec: &GridSpec, a: Cell, b: Cell, radius: f64) -> bool {
    let dr = (a.row as f64 - b.row as f64) * spec.cellsize;
    let dc = (a.col as f64 - b.col as f64) * spec.cellsize;
    let r2 = radius * radius;
    dr * dr + dc * dc <= r2 + 1e-9 * r2.max(spec.cellsize * spec.cellsize)
}

pub fn excluded_cells(landcover: &RasterGrid<f64>, fields: &BoolGrid, params: &ScreeningParams) -> (Vec<Cell>, Vec<Cell>) {
    let spec = *landcover.spec();
    let mut lc = Vec::new();
    let mut fl = Vec::new();
    for i in 0..spec.len() {
        let v = landcover.values()[i];
        let is_nodata = landcover.nodata().is_some_and(|nd| v == nd);
        if !is_nodata && v.is_finite() && params.excluded_landcover_classes.contains(&(v.round() as i64)) {
            lc.push(spec.cell(i));
        }
        if fields.values()[i] {
            fl.push(spec.cell(i));
        }
    }
    (lc, fl)
}

/// Free cells by checking every cell against every excluded cell, then
/// 4-connected components by union-find.
pub fn screening_oracle(landcover: &RasterGrid<f64>, fields: &BoolGrid, params: &ScreeningParams) -> (Vec<bool>, Vec<OracleSite>) {
    let spec = *landcover.spec();
    let (lc, fl) = excluded_cells(landcover, fields, params);
    let free: Vec<bool> = (0..spec.len())
        .map(|i| {
            let c = spec.cell(i);
            !lc.iter().any(|&e| within(&spec, c, e, params.landcover_buffer))
                && !fl.iter().any(|&e| within(&spec, c, e, params.field_buffer))
        })
        .collect();
    let mut parent: Vec<usize> = (0..spec.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..spec.len() {
        if !free[i] {
            continue;
        }
        let c = spec.cell(i);
        if c.col + 1 < spec.ncols && free[i + 1] {
            let (a, b) = (find(&mut parent, i), find(&mut parent, i + 1));
            parent[a] = b;
        }
        if c.row + 1 < spec.nrows && free[i + spec.ncols] {
            let (a, b) = (find(&mut parent, i), find(&mut parent, i + spec.ncols));
            parent[a] = b;
        }
    }
    let mut comps: BTreeMap<usize, BTreeSet<Cell>> = BTreeMap::new();
    for i in 0..spec.len() {
        if free[i] {
            let r = find(&mut parent, i);
            comps.entry(r).or_default().insert(spec.cell(i));
        }
    }
    let cell_area = spec.cellsize * spec.cellsize / 1.0e6;
    let sites = comps
        .into_values()
        .map(|cells| OracleSite {
            area: cells.len() as f64 * cell_area,
            cells,
        })
        .filter(|s| s.area >= params.min_contiguous_area)
        .collect();
    (free, sites)
}

// ------------------------------------------------------------------ routing

fn step(surface: &RasterGrid<f64>, a: Cell, b: Cell) -> f64 {
    let cs = surface.spec().cellsize / 1000.0;
    let dr = a.row as f64 - b.row as f64;
    let dc = a.col as f64 - b.col as f64;
    (dr * dr + dc * dc).sqrt() * cs * (surface.get(a) + surface.get(b)) / 2.0
}

fn king_neighbors(spec: &GridSpec, c: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let (r, k) = (c.row as isize + dr, c.col as isize + dc);
            if r >= 0 && k >= 0 && (r as usize) < spec.nrows && (k as usize) < spec.ncols {
                out.push(Cell::new(r as usize, k as usize));
            }
        }
    }
    out
}

/// Minimum cost over all simple 8-connected paths. Branches whose partial
/// cost already reaches the best complete path are cut, which is exact
/// because every step cost is positive.
pub fn enumerate_min_path(surface: &RasterGrid<f64>, src: Cell, dst: Cell) -> f64 {
    let spec = *surface.spec();
    let mut best = f64::INFINITY;
    let mut on_path = vec![false; spec.len()];
    fn dfs(
        surface: &RasterGrid<f64>,
        spec: &GridSpec,
        at: Cell,
        dst: Cell,
        cost: f64,
        on_path: &mut [bool],
        best: &mut f64,
    ) {
        if cost >= *best {
            return;
        }
        if at == dst {
            *best = cost;
            return;
        }
        for n in king_neighbors(spec, at) {
            let i = spec.index(n);
            if on_path[i] {
                continue;
            }
            on_path[i] = true;
            dfs(surface, spec, n, dst, cost + step(surface, at, n), on_path, best);
            on_path[i] = false;
        }
    }
    on_path[spec.index(src)] = true;
    dfs(surface, &spec, src, dst, 0.0, &mut on_path, &mut best);
    best
}

/// Bellman-Ford distances from `src` over 8-connected steps.
pub fn bellman_ford(surface: &RasterGrid<f64>, src: Cell) -> Vec<f64> {
    let spec = *surface.spec();
    let mut d = vec![f64::INFINITY; spec.len()];
    d[spec.index(src)] = 0.0;
    loop {
        let mut changed = false;
        for i in 0..spec.len() {
            if !d[i].is_finite() {
                continue;
            }
            let c = spec.cell(i);
            for n in king_neighbors(&spec, c) {
                let j = spec.index(n);
                let nd = d[i] + step(surface, c, n);
                if nd < d[j] - 1e-12 * nd.abs() {
                    d[j] = nd;
                    changed = true;
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

pub fn random_surface(rng: &mut impl Rng, nrows: usize, ncols: usize, cellsize: f64) -> RasterGrid<f64> {
    let spec = GridSpec::new(ncols, nrows, cellsize, 0.0, 0.0).unwrap();
    let vals = (0..spec.len()).map(|_| rng.random_range(1.0..10.0)).collect();
    RasterGrid::new(spec, vals).unwrap()
}

// ------------------------------------------------------------- pipe costs

fn pumps(e: &PipelineEconomics, length_km: f64) -> f64 {
    let mut n = 0.0;
    // Stations sit every `pump_spacing_km` strictly inside the pipe.
    let mut at = e.pump_spacing_km;
    while at < length_km - 1e-9 {
        n += 1.0;
        at += e.pump_spacing_km;
    }
    n
}

pub fn pipe_capital(e: &PipelineEconomics, c: usize, length_km: f64, weighted_km: f64) -> f64 {
    e.classes[c].capital_per_km * weighted_km + pumps(e, length_km) * e.pump_capital
}

pub fn pipe_om(e: &PipelineEconomics, c: usize, length_km: f64) -> f64 {
    e.classes[c].om_per_km_y * length_km + pumps(e, length_km) * e.pump_om_per_year
}

pub fn pipe_annual(e: &PipelineEconomics, c: usize, length_km: f64, weighted_km: f64) -> f64 {
    pipe_capital(e, c, length_km, weighted_km) * e.fixed_charge_rate + pipe_om(e, c, length_km)
}

// ---------------------------------------------------------- network oracle

/// Money inside the LPs is in $M so the simplex works on moderate numbers.
const M: f64 = 1.0e6;

/// Min-cost operation for fixed undirected edge capacities; `weight`
/// scales the per-tonne costs. Returns $ or `None` when infeasible.
pub fn operate_lp(p: &NetworkProblem, caps: &[f64], target: f64, weight: f64) -> Option<f64> {
    let n = p.candidate.nodes.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut balance: Vec<Vec<(microlp::Variable, f64)>> = vec![Vec::new(); n];
    let mut total = Vec::new();
    for s in &p.sources {
        let v = lp.add_var(s.capture_cost * weight, (0.0, s.max_capture));
        balance[p.candidate.terminals[&format!("src:{}", s.id)]].push((v, 1.0));
        total.push((v, 1.0));
    }
    for k in &p.sinks {
        let v = lp.add_var(k.storage_cost * weight, (0.0, k.injectivity));
        balance[p.candidate.terminals[&format!("snk:{}", k.id)]].push((v, -1.0));
    }
    for (e, edge) in p.candidate.edges.iter().enumerate() {
        if caps[e] <= 0.0 {
            continue;
        }
        let fwd = lp.add_var(0.0, (0.0, caps[e]));
        let bwd = lp.add_var(0.0, (0.0, caps[e]));
        balance[edge.from].push((fwd, -1.0));
        balance[edge.to].push((fwd, 1.0));
        balance[edge.to].push((bwd, -1.0));
        balance[edge.from].push((bwd, 1.0));
    }
    for terms in balance.into_iter().filter(|t| !t.is_empty()) {
        lp.add_constraint(terms.as_slice(), ComparisonOp::Eq, 0.0);
    }
    lp.add_constraint(total.as_slice(), ComparisonOp::Eq, target);
    let sol = lp.solve().ok()?.into_solution().ok()?;
    Some(sol.objective() * M)
}

/// Every class assignment (or no pipe) per edge, each priced by an LP.
pub fn shared_oracle(p: &NetworkProblem) -> Option<f64> {
    let econ = &p.economics;
    let ne = p.candidate.edges.len();
    let nc = econ.classes.len();
    let fixed: Vec<Vec<f64>> = p
        .candidate
        .edges
        .iter()
        .map(|e| (0..nc).map(|c| pipe_annual(econ, c, e.length_km, e.weighted_km)).collect())
        .collect();
    let mut best: Option<f64> = None;
    let mut choice = vec![0usize; ne];
    loop {
        let build: f64 = (0..ne).filter(|&e| choice[e] > 0).map(|e| fixed[e][choice[e] - 1]).sum();
        if best.is_none_or(|b| build < b) {
            let caps: Vec<f64> = choice
                .iter()
                .map(|&k| if k == 0 { 0.0 } else { econ.classes[k - 1].max_flow })
                .collect();
            if let Some(op) = operate_lp(p, &caps, p.target, 1.0) {
                let v = build + op;
                if best.is_none_or(|b| v < b) {
                    best = Some(v);
                }
            }
        }
        let mut i = 0;
        loop {
            if i == ne {
                return best;
            }
            choice[i] += 1;
            if choice[i] <= nc {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Two or three pipe classes with scale economies.
pub fn small_economics(classes: usize) -> PipelineEconomics {
    let mut e = PipelineEconomics::default();
    e.classes.truncate(classes);
    e
}

/// A random connected candidate network with terminals placed on nodes.
pub fn random_problem(rng: &mut impl Rng, max_edges: usize, max_sources: usize, max_sinks: usize, classes: usize) -> NetworkProblem {
    let spec = GridSpec::new(60, 60, 1000.0, 0.0, 0.0).unwrap();
    let n_nodes = rng.random_range(3..=5usize);
    let mut cells: Vec<Cell> = Vec::new();
    while cells.len() < n_nodes {
        let c = Cell::new(rng.random_range(0..60), rng.random_range(0..60));
        if !cells.contains(&c) {
            cells.push(c);
        }
    }
    let nodes: Vec<NetworkNode> = cells
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (x, y) = spec.center(c);
            NetworkNode {
                id: format!("n{i}"),
                cell: c,
                x,
                y,
                terminals: Vec::new(),
            }
        })
        .collect();
    let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
    for v in 1..n_nodes {
        let u = rng.random_range(0..v);
        pairs.insert((u, v));
    }
    let target_edges = rng.random_range(pairs.len()..=max_edges.max(pairs.len()));
    let mut tries = 0;
    while pairs.len() < target_edges && tries < 100 {
        let (u, v) = (rng.random_range(0..n_nodes), rng.random_range(0..n_nodes));
        if u < v {
            pairs.insert((u, v));
        }
        tries += 1;
    }
    let edges: Vec<CandidateEdge> = pairs
        .iter()
        .enumerate()
        .map(|(i, &(u, v))| {
            let (a, b) = (&nodes[u], &nodes[v]);
            let straight = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt() / 1000.0;
            let length_km = straight * rng.random_range(1.0..1.3);
            let weighted_km = length_km * rng.random_range(1.0..2.0);
            CandidateEdge {
                id: format!("e{i}"),
                from: u,
                to: v,
                cells: vec![a.cell, b.cell],
                length_km,
                routed_cost: weighted_km,
                weighted_km,
                sej_km: 0.0,
                owners_crossed: 0,
            }
        })
        .collect();
    let ns = rng.random_range(1..=max_sources);
    let nk = rng.random_range(1..=max_sinks);
    let mut terminals = BTreeMap::new();
    let mut nodes = nodes;
    let sources: Vec<SourceSpec> = (0..ns)
        .map(|i| {
            let at = rng.random_range(0..n_nodes);
            let id = format!("S{i}");
            terminals.insert(format!("src:{id}"), at);
            nodes[at].terminals.push(format!("src:{id}"));
            SourceSpec {
                id: id.clone(),
                name: id,
                x: nodes[at].x,
                y: nodes[at].y,
                max_capture: rng.random_range(0.3..2.0),
                capture_cost: rng.random_range(20.0..80.0),
                capture_capital: 0.0,
            }
        })
        .collect();
    let sinks: Vec<SinkSpec> = (0..nk)
        .map(|k| {
            let at = rng.random_range(0..n_nodes);
            let id = format!("K{k}");
            terminals.insert(format!("snk:{id}"), at);
            nodes[at].terminals.push(format!("snk:{id}"));
            SinkSpec {
                id,
                x: nodes[at].x,
                y: nodes[at].y,
                injectivity: rng.random_range(0.5..3.0),
                storage_cost: rng.random_range(5.0..15.0),
                capital: 0.0,
            }
        })
        .collect();
    let economics = small_economics(classes);
    let cap: f64 = sources.iter().map(|s| s.max_capture).sum::<f64>().min(sinks.iter().map(|k| k.injectivity).sum());
    let target = (cap * rng.random_range(0.3..0.9)).min(economics.max_flow() * 0.9);
    NetworkProblem {
        candidate: CandidateNetwork {
            grid: spec,
            base_cost: 1.0,
            nodes,
            edges,
            terminals,
            routes: Vec::new(),
        },
        sources,
        sinks,
        target: (target * 1000.0).round() / 1000.0,
        economics,
        all_or_nothing: false,
    }
}

/// Net flow balance at every node, with capture and injection as external
/// supply and demand. Independent of the crate's own checker.
pub fn conservation_residual(p: &NetworkProblem, edge_flow: &[f64], capture: &[f64], injection: &[f64]) -> f64 {
    let mut bal = vec![0.0; p.candidate.nodes.len()];
    for (i, s) in p.sources.iter().enumerate() {
        bal[p.candidate.terminals[&format!("src:{}", s.id)]] += capture[i];
    }
    for (k, s) in p.sinks.iter().enumerate() {
        bal[p.candidate.terminals[&format!("snk:{}", s.id)]] -= injection[k];
    }
    for (e, edge) in p.candidate.edges.iter().enumerate() {
        bal[edge.from] -= edge_flow[e];
        bal[edge.to] += edge_flow[e];
    }
    bal.iter().map(|b| b.abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------- phasing oracle

pub fn discount_factor(s: &PhaseSchedule, year: i32) -> f64 {
    let base = s.periods[0].online_year - s.construction_lead as i32;
    let mut df = 1.0;
    for _ in base..=year {
        df /= 1.0 + s.discount_rate;
    }
    df
}

fn horizon_end(s: &PhaseSchedule) -> i32 {
    s.periods[0].online_year + s.operating_life as i32 - 1
}

/// Discounted cost of one pipe slot built for period `t`.
pub fn slot_cost(p: &NetworkProblem, s: &PhaseSchedule, e: usize, class: usize, t: usize) -> f64 {
    let edge = &p.candidate.edges[e];
    let online = s.periods[t].online_year;
    let lead = s.construction_lead as i32;
    let capital = pipe_capital(&p.economics, class, edge.length_km, edge.weighted_km);
    let om = pipe_om(&p.economics, class, edge.length_km);
    let mut v = 0.0;
    for y in online - lead..online {
        v += capital / lead as f64 * discount_factor(s, y);
    }
    for y in online..=horizon_end(s) {
        v += om * discount_factor(s, y);
    }
    v
}

/// Discounted years over which period `t`'s annual flows repeat.
pub fn period_years(s: &PhaseSchedule, t: usize) -> f64 {
    let from = s.periods[t].online_year;
    let to = s.periods.get(t + 1).map_or(horizon_end(s), |n| (n.online_year - 1).min(horizon_end(s)));
    (from..=to).map(|y| discount_factor(s, y)).sum()
}

/// Each edge's slot multisets: sorted lists of (period, class), at most
/// `max_parallel` long.
pub fn slot_plans(periods: usize, classes: usize, max_parallel: usize) -> Vec<Vec<(usize, usize)>> {
    let options: Vec<(usize, usize)> = (0..periods).flat_map(|t| (0..classes).map(move |c| (t, c))).collect();
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    let mut frontier: Vec<(Vec<(usize, usize)>, usize)> = vec![(Vec::new(), 0)];
    for _ in 0..max_parallel {
        let mut next = Vec::new();
        for (plan, start) in &frontier {
            for (i, o) in options.iter().enumerate().skip(*start) {
                let mut p = plan.clone();
                p.push(*o);
                out.push(p.clone());
                next.push((p, i));
            }
        }
        frontier = next;
    }
    out
}

/// Minimum discounted cost over every combination of per-edge slot plans.
pub fn phasing_oracle(p: &NetworkProblem, s: &PhaseSchedule) -> Option<(f64, Vec<Vec<(usize, usize)>>)> {
    let ne = p.candidate.edges.len();
    let np = s.periods.len();
    let nc = p.economics.classes.len();
    let plans = slot_plans(np, nc, s.max_parallel);
    let plan_cost: Vec<Vec<f64>> = (0..ne)
        .map(|e| {
            plans
                .iter()
                .map(|pl| pl.iter().map(|&(t, c)| slot_cost(p, s, e, c, t)).sum())
                .collect()
        })
        .collect();
    let weights: Vec<f64> = (0..np).map(|t| period_years(s, t)).collect();
    let mut best: Option<(f64, Vec<Vec<(usize, usize)>>)> = None;
    let mut choice = vec![0usize; ne];
    loop {
        let build: f64 = (0..ne).map(|e| plan_cost[e][choice[e]]).sum();
        if best.as_ref().is_none_or(|(b, _)| build < *b) {
            let mut total = Some(build);
            for t in 0..np {
                let caps: Vec<f64> = (0..ne)
                    .map(|e| {
                        plans[choice[e]]
                            .iter()
                            .filter(|&&(pt, _)| pt <= t)
                            .map(|&(_, c)| p.economics.classes[c].max_flow)
                            .sum()
                    })
                    .collect();
                total = match (total, operate_lp(p, &caps, s.periods[t].target, weights[t])) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                };
                if total.is_none() {
                    break;
                }
            }
            if let Some(v) = total {
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, choice.iter().map(|&k| plans[k].clone()).collect()));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == ne {
                return best;
            }
            choice[i] += 1;
            if choice[i] < plans.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

// ----------------------------------------------------------------- finance

/// Present value of $1 at the end of each of `years` years.
pub fn annuity(rate: f64, years: u32) -> f64 {
    (1..=years).map(|y| (1.0 + rate).powi(-(y as i32))).sum()
}

// --------------------------------------------------------------- reservoir

/// Radial steady-state injectivity and pore-volume capacity written out in
/// one expression each, from the textbook forms.
pub struct ReservoirOracle {
    pub capacity_mt: f64,
    pub n_wells: u32,
    pub uncapped_mt_y: f64,
    pub injectivity_mt_y: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn reservoir_oracle(
    area_km2: f64,
    thickness: f64,
    porosity: f64,
    density: f64,
    efficiency: f64,
    permeability_m2: f64,
    viscosity: f64,
    depth: f64,
    fracture_gradient: f64,
    pressure_fraction: f64,
    per_well_cap: f64,
    years: u32,
    well_density: f64,
    well_radius: f64,
) -> ReservoirOracle {
    let capacity_mt = area_km2 * 1e6 * thickness * porosity * efficiency * density / 1e9;
    let n_wells = ((capacity_mt / (per_well_cap * years as f64)).floor().min((area_km2 * well_density).floor())).max(1.0) as u32;
    let dp = pressure_fraction * fracture_gradient * depth - 9810.0 * depth;
    let r_e = (area_km2 * 1e6 / (std::f64::consts::PI * n_wells as f64)).sqrt();
    let uncapped_mt_y = 2.0 * std::f64::consts::PI * permeability_m2 * thickness * dp / (viscosity * (r_e / well_radius).ln())
        * density
        * 365.25
        * 86400.0
        / 1e9;
    let injectivity_mt_y = (n_wells as f64 * uncapped_mt_y.min(per_well_cap)).min(capacity_mt / years as f64);
    ReservoirOracle {
        capacity_mt,
        n_wells,
        uncapped_mt_y,
        injectivity_mt_y,
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

/// One source and one sink joined by a single candidate edge.
pub fn two_node_problem(length_km: f64, max_capture: f64, injectivity: f64, classes: usize) -> NetworkProblem {
    let spec = GridSpec::new(100, 10, 1000.0, 0.0, 0.0).unwrap();
    let cells = [Cell::new(5, 0), Cell::new(5, 99)];
    let nodes: Vec<NetworkNode> = cells
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (x, y) = spec.center(c);
            NetworkNode {
                id: format!("n{i}"),
                cell: c,
                x,
                y,
                terminals: vec![if i == 0 { "src:S".into() } else { "snk:K".into() }],
            }
        })
        .collect();
    let terminals = [("src:S".to_string(), 0usize), ("snk:K".to_string(), 1usize)].into_iter().collect();
    NetworkProblem {
        candidate: CandidateNetwork {
            grid: spec,
            base_cost: 1.0,
            edges: vec![CandidateEdge {
                id: "e0".into(),
                from: 0,
                to: 1,
                cells: cells.to_vec(),
                length_km,
                routed_cost: length_km,
                weighted_km: length_km,
                sej_km: 0.0,
                owners_crossed: 0,
            }],
            nodes,
            terminals,
            routes: Vec::new(),
        },
        sources: vec![SourceSpec {
            id: "S".into(),
            name: "S".into(),
            x: 0.0,
            y: 0.0,
            max_capture,
            capture_cost: 40.0,
            capture_capital: 0.0,
        }],
        sinks: vec![SinkSpec {
            id: "K".into(),
            x: 0.0,
            y: 0.0,
            injectivity,
            storage_cost: 10.0,
            capital: 0.0,
        }],
        target: 0.0,
        economics: small_economics(classes),
        all_or_nothing: false,
    }
}
