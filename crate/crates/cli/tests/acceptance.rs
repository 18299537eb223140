//! Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cctskit::capture::{capture_cost_per_tonne, co2_captured, CaptureCostParams};
use cctskit::costsurface::SejParams;
use cctskit::fixtures::{clustered_five, deep_permeable, dedicated_trace, mini_gulf, network_problem, screening_60, two_corridor};
use cctskit::grid::{BoolGrid, Cell, RasterGrid};
use cctskit::netdesign::{check_solution, solve_dedicated, solve_shared, solve_shared_with, PipelineEconomics, SolverOptions};
use cctskit::phasing::{levelized_phase_cost, solve_myopic, solve_phased, CreditPolicy, PhaseOptions, PhaseSchedule, PhaseTarget};
use cctskit::reservoir::{
    characterize_formation, characterize_sites, injectivity_capacity, sample_parameters, storage_cost, FormationMode,
    FormationParams, MonteCarloParams, SampledReservoir, SamplingSpread, StorageCostParams, MILLIDARCY,
};
use cctskit::routing::{least_cost_path, Connectivity, EdgeMetrics};
use cctskit::screening::{free_mask, screen_sites, CandidateSite, ScreeningParams, SiteSource};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1
fn capture_cost() -> Outcome {
    let p = CaptureCostParams::default();
    let c = capture_cost_per_tonne(5.0009, 0.94, &p).map_err(err)?;
    ensure((c - 13.84).abs() <= 0.05, || format!("ammonia plant {c:.4} $/t"))?;
    for r in &p.rows {
        let u = capture_cost_per_tonne(1.0, r.concentration, &p).map_err(err)?;
        ensure(u == r.c0, || format!("row {}: {u} != {}", r.concentration, r.c0))?;
    }
    Ok(format!("{c:.4} $/t, {} rows at C0", p.rows.len()))
}

// 2
fn captured_amount() -> Outcome {
    let p = CaptureCostParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let e: f64 = rng.random_range(0.0..50.0);
        let f: f64 = rng.random_range(0.0..=1.0);
        let got = co2_captured(e, f, &p).map_err(err)?;
        ensure(got == e * f * 0.95, || format!("{e} x {f}: {got}"))?;
    }
    Ok("1000 inputs exact".into())
}

// 3
fn screening() -> Outcome {
    let start = Instant::now();
    let g = mini_gulf().map_err(err)?;
    let (lc60, f60) = screening_60();
    let p60 = ScreeningParams {
        landcover_buffer: 6_000.0,
        field_buffer: 3_000.0,
        min_contiguous_area: 40.0,
        ..ScreeningParams::default()
    };
    let cases = [
        ("mini-gulf", &g.landcover, g.active_fields.to_mask(), ScreeningParams::default()),
        ("60x60", &lc60, f60.clone(), p60),
    ];
    let mut counts = Vec::new();
    for (name, lc, fields, params) in &cases {
        let n = screen_against_oracle(lc, fields, params).map_err(|e| format!("{name}: {e}"))?;
        counts.push(format!("{name} {n} sites"));
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(10), || format!("took {took:?}"))?;
    Ok(format!("{} in {:.2}s", counts.join(", "), took.as_secs_f64()))
}

fn screen_against_oracle(lc: &RasterGrid<f64>, fields: &BoolGrid, params: &ScreeningParams) -> Result<usize, String> {
    let free = free_mask(lc, fields, params).map_err(err)?;
    let (oracle_free, oracle_sites) = screening_oracle(lc, fields, params);
    ensure(free.values() == oracle_free.as_slice(), || "free mask differs".into())?;
    let sites = screen_sites(lc, fields, params, &[]).map_err(err)?;
    let got: BTreeSet<Vec<Cell>> = sites.iter().filter(|s| s.source == SiteSource::Screened).map(|s| s.cells.clone()).collect();
    let want: BTreeSet<Vec<Cell>> = oracle_sites.iter().map(|s| s.cells.iter().copied().collect()).collect();
    ensure(got == want, || format!("{} sites vs {} expected", got.len(), want.len()))?;
    ensure(!sites.is_empty(), || "no sites".into())?;
    Ok(sites.len())
}

fn site(id: &str, area: f64) -> CandidateSite {
    CandidateSite {
        id: id.into(),
        x: 0.0,
        y: 0.0,
        area,
        cells: Vec::new(),
        source: SiteSource::Screened,
    }
}

// 4
fn monte_carlo() -> Outcome {
    let (f, area) = deep_permeable();
    let p = StorageCostParams::default();
    let mc0 = MonteCarloParams {
        samples: 50,
        spread: SamplingSpread::zero(),
        ..MonteCarloParams::default()
    };
    let r = characterize_formation(&site("S1", area), &f, &mc0, 3, &p).map_err(err)?.ok_or("dropped")?;
    let det = injectivity_capacity(&SampledReservoir::at_means(&f), area, &p).map_err(err)?;
    ensure(r.injectivity == det.injectivity && r.capacity == det.capacity, || {
        format!("zero spread {} / {} vs {} / {}", r.injectivity, r.capacity, det.injectivity, det.capacity)
    })?;

    let mc = MonteCarloParams::default();
    let n = 10_000;
    let fm = FormationParams::new("mc", 2000.0, 100.0, 100.0, 0.2);
    let s = sample_parameters(&fm, &mc, n, 2024).map_err(err)?;
    let sd = mc.spread;
    let checks: [(&str, f64, f64, fn(&SampledReservoir) -> f64); 5] = [
        ("depth", fm.depth, sd.depth, |s| s.depth),
        ("temperature", fm.mean_temperature(), sd.temperature, |s| s.temperature),
        ("thickness", fm.thickness, sd.thickness, |s| s.thickness),
        ("permeability", fm.permeability, sd.permeability, |s| s.permeability),
        ("porosity", fm.porosity, sd.porosity, |s| s.porosity),
    ];
    for (name, mean, rel, get) in checks {
        let m = s.iter().map(get).sum::<f64>() / n as f64;
        let se = rel * mean / (n as f64).sqrt();
        ensure((m - mean).abs() < 3.0 * se, || format!("{name}: {m} vs {mean}"))?;
    }

    let sites: Vec<CandidateSite> = (0..12).map(|i| site(&format!("S{i:03}"), area + i as f64)).collect();
    let adjacency = sites.iter().map(|s| (s.id.clone(), vec![f.clone()])).collect();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| characterize_sites(&sites, &adjacency, &mc, 5, &p, FormationMode::Single))
    };
    let one = run(1).map_err(err)?;
    let many = run(4).map_err(err)?;
    ensure(one == many, || "thread count changed results".into())?;
    Ok("zero spread exact, 5 means within 3 SE, 1 vs 4 threads identical".into())
}

// 5
fn reservoir_closed_form() -> Outcome {
    let p = StorageCostParams::default();
    let worked = SampledReservoir {
        depth: 2000.0,
        thickness: 100.0,
        permeability: 100.0 * MILLIDARCY,
        porosity: 0.25,
        temperature: 84.0,
        pressure: 9810.0 * 2000.0,
        density: 700.0,
        viscosity: 5.5e-5,
        fracture_gradient: 16_000.0,
    };
    let e = injectivity_capacity(&worked, 78.5, &p).map_err(err)?;
    ensure((e.capacity - 68.7).abs() < 0.05, || format!("worked capacity {}", e.capacity))?;
    let one = StorageCostParams { well_density_cap: 0.01, ..p.clone() };
    let e1 = injectivity_capacity(&worked, 78.5, &one).map_err(err)?;
    ensure((e1.uncapped_well_rate - 13.8).abs() < 0.05 && e1.injectivity == 1.0, || {
        format!("worked well rate {} injectivity {}", e1.uncapped_well_rate, e1.injectivity)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let depth = rng.random_range(1000.0..3500.0);
        let s = SampledReservoir {
            depth,
            thickness: rng.random_range(10.0..300.0),
            permeability: rng.random_range(5.0..800.0) * MILLIDARCY,
            porosity: rng.random_range(0.08..0.35),
            temperature: 60.0,
            pressure: 9810.0 * depth,
            density: rng.random_range(450.0..800.0),
            viscosity: rng.random_range(3e-5..8e-5),
            fracture_gradient: rng.random_range(14_000.0..20_000.0),
        };
        let area = rng.random_range(40.0..400.0);
        let got = injectivity_capacity(&s, area, &p).map_err(err)?;
        let want = reservoir_oracle(
            area,
            s.thickness,
            s.porosity,
            s.density,
            p.storage_efficiency,
            s.permeability,
            s.viscosity,
            s.depth,
            s.fracture_gradient,
            p.pressure_fraction_of_fracture,
            p.per_well_cap,
            p.injection_years,
            p.well_density_cap,
            p.well_radius,
        );
        ensure(
            rel_close(got.capacity, want.capacity_mt, 1e-9)
                && rel_close(got.injectivity, want.injectivity_mt_y, 1e-9)
                && got.n_wells == want.n_wells,
            || format!("sample {k}: {got:?}"),
        )?;
    }
    Ok(format!("worked {:.2} Mt / {:.2} Mt/y per well, 20 samples at 1e-9", e.capacity, e1.uncapped_well_rate))
}

// 6
fn storage_cost_range() -> Outcome {
    let (f, area) = deep_permeable();
    let p = StorageCostParams::default();
    let r = characterize_formation(&site("S1", area), &f, &MonteCarloParams::default(), 1, &p)
        .map_err(err)?
        .ok_or("dropped")?;
    ensure((6.0..=12.0).contains(&r.storage_cost), || format!("{} $/t", r.storage_cost))?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..100 {
        let depth = rng.random_range(1000.0..3500.0);
        let s = SampledReservoir {
            depth,
            thickness: rng.random_range(20.0..300.0),
            permeability: rng.random_range(10.0..800.0) * MILLIDARCY,
            porosity: rng.random_range(0.1..0.35),
            temperature: 70.0,
            pressure: 9810.0 * depth,
            density: rng.random_range(500.0..800.0),
            viscosity: rng.random_range(3e-5..8e-5),
            fracture_gradient: 17_000.0,
        };
        let q: f64 = rng.random_range(0.5..5.0);
        let mult: f64 = rng.random_range(1.1..3.0);
        let wells = (q * mult / p.per_well_cap).ceil() as u32;
        let a = storage_cost(q, 1e4, wells, &s, &p).map_err(err)?;
        let b = storage_cost(q * mult, 1e4, wells, &s, &p).map_err(err)?;
        let c = storage_cost(q, 1e4, wells + 1, &s, &p).map_err(err)?;
        ensure(b < a && c > a, || format!("draw {k}: {a} {b} {c}"))?;
    }
    Ok(format!("{:.2} $/t, 100 monotone draws", r.storage_cost))
}

// 7
fn routing() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..24 {
        let s = random_surface(&mut rng, 6, 6, 1000.0);
        for (a, b) in [(Cell::new(0, 0), Cell::new(5, 5)), (Cell::new(5, 0), Cell::new(0, 5))] {
            let got = least_cost_path(&s, a, b, Connectivity::Eight).map_err(err)?.routed_cost;
            let want = enumerate_min_path(&s, a, b);
            ensure((got - want).abs() <= 1e-9 * want, || format!("surface {k}: {got} vs {want}"))?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for k in 0..100 {
        let (r, c) = (rng.random_range(3..12), rng.random_range(3..12));
        let s = random_surface(&mut rng, r, c, 1000.0);
        let m: f64 = rng.random_range(0.1..50.0);
        let pick = |rng: &mut ChaCha8Rng| Cell::new(rng.random_range(0..r), rng.random_range(0..c));
        let (a, b, mid) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let d = |g: &RasterGrid<f64>, x, y| least_cost_path(g, x, y, Connectivity::Eight).map(|p| p.routed_cost).map_err(err);
        let ab = d(&s, a, b)?;
        let scaled = d(&s.map(|v| v * m), a, b)?;
        ensure(rel_close(scaled, m * ab, 1e-9), || format!("scale {k}: {scaled} vs {}", m * ab))?;
        ensure(ab <= d(&s, a, mid)? + d(&s, mid, b)? + 1e-9, || format!("triangle {k}"))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("24 enumerated surfaces, 100 scale/triangle instances in {:.2}s", took.as_secs_f64()))
}

// 8
fn milp_oracle() -> Outcome {
    let opts = SolverOptions {
        node_limit: 1_000_000,
        enumeration_limit: 0,
        warm_start: false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut solved = 0;
    while solved < 25 {
        let classes = if solved % 2 == 0 { 2 } else { 3 };
        let p = random_problem(&mut rng, if classes == 2 { 8 } else { 6 }, 3, 2, classes);
        let Some(want) = shared_oracle(&p) else {
            continue;
        };
        let sol = solve_shared_with(&p, &opts).map_err(err)?;
        let got = sol.report.objective;
        ensure((got - want).abs() <= 1e-6 * want.max(1.0), || format!("instance {solved}: {got} vs {want}"))?;
        check_solution(&p, &sol).map_err(|e| format!("instance {solved}: {e}"))?;
        let capture: Vec<f64> = sol.sources.iter().map(|s| s.capture).collect();
        let injection: Vec<f64> = sol.sinks.iter().map(|s| s.injection).collect();
        let res = conservation_residual(&p, &sol.edge_flows(p.candidate.edges.len()), &capture, &injection);
        ensure(res < 1e-7, || format!("instance {solved}: residual {res}"))?;
        solved += 1;
    }
    Ok("25 instances match enumeration".into())
}

// 9
fn shared_vs_dedicated() -> Outcome {
    let mut notes = Vec::new();
    for (name, p) in [("clustered", clustered_five()), ("trace", dedicated_trace())] {
        let s = solve_shared(&p).map_err(err)?;
        let d = solve_dedicated(&p).map_err(err)?;
        ensure(s.report.objective <= d.report.objective, || {
            format!("{name}: shared {} > dedicated {}", s.report.objective, d.report.objective)
        })?;
        if name == "clustered" {
            let ratio = s.report.pipeline_km / d.report.pipeline_km;
            ensure(ratio < 0.5, || format!("km ratio {ratio:.3}"))?;
            notes.push(format!("clustered km ratio {ratio:.3}"));
        }
    }
    Ok(notes.join(", "))
}

// 10
fn sej_avoidance() -> Outcome {
    let tc = two_corridor();
    let layer = tc.sej_layer(&SejParams::sej3()).map_err(err)?;
    let econ = PipelineEconomics::default();
    let off = network_problem(
        &tc.economic,
        EdgeMetrics { sej: Some(&layer), ..EdgeMetrics::default() },
        &tc.sources,
        &tc.sinks,
        tc.target,
        econ.clone(),
        Connectivity::Eight,
        1.0,
    )
    .map_err(err)?;
    let weighted = RasterGrid::new(
        *tc.economic.spec(),
        tc.economic.values().iter().zip(layer.values()).map(|(&v, &m)| if m { v * 1.0e6 } else { v }).collect(),
    )
    .map_err(err)?;
    let on = network_problem(
        &weighted,
        EdgeMetrics { economic: Some(&tc.economic), sej: Some(&layer), ..EdgeMetrics::default() },
        &tc.sources,
        &tc.sinks,
        tc.target,
        econ,
        Connectivity::Eight,
        1.0,
    )
    .map_err(err)?;
    let a = solve_shared(&off).map_err(err)?;
    let b = solve_shared(&on).map_err(err)?;
    ensure(a.report.sej_km > 0.0 && b.report.sej_km == 0.0, || format!("sej km {} -> {}", a.report.sej_km, b.report.sej_km))?;
    let inc = b.report.pipeline_km / a.report.pipeline_km - 1.0;
    ensure(inc < 0.25, || format!("km increase {:.1}%", inc * 100.0))?;
    Ok(format!("sej km {:.1} -> 0, km +{:.1}%", a.report.sej_km, inc * 100.0))
}

// 11
fn dedicated_sequence() -> Outcome {
    let p = dedicated_trace();
    let sol = solve_dedicated(&p).map_err(err)?;
    let want = [("A", "K1", 1.0), ("B", "K2", 0.0), ("C", "K3", 3.5), ("D", "K1", 0.0)];
    let got: Vec<(String, String, f64)> = sol.assignments.iter().map(|a| (a.source.clone(), a.sink.clone(), a.sink_remaining)).collect();
    ensure(got.len() == want.len(), || format!("{got:?}"))?;
    for ((s, k, r), (ws, wk, wr)) in got.iter().zip(want) {
        ensure(s == ws && k == wk && (r - wr).abs() < 1e-9, || format!("{got:?}"))?;
    }
    Ok("A->K1, B->K2, C->K3, D->K1".into())
}

fn schedule(targets: &[(i32, f64)], max_parallel: usize) -> PhaseSchedule {
    PhaseSchedule {
        periods: targets.iter().map(|&(online_year, target)| PhaseTarget { online_year, target }).collect(),
        max_parallel,
        ..PhaseSchedule::default()
    }
}

// 12
fn phasing() -> Outcome {
    let policy = CreditPolicy::default();
    let exact = PhaseOptions { node_limit: 1_000_000 };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut solved = 0;
    while solved < 12 {
        let max_parallel = if solved % 3 == 0 { 2 } else { 1 };
        let p = random_problem(&mut rng, if max_parallel == 2 { 3 } else { 4 }, 2, 2, 2);
        let t1 = (p.target * rng.random_range(0.2..0.9) * 1000.0).round() / 1000.0;
        let s = schedule(&[(2030, t1), (2035, p.target)], max_parallel);
        let Some((want, _)) = phasing_oracle(&p, &s) else {
            continue;
        };
        let plan = solve_phased(&p, &s, &policy, &exact).map_err(err)?;
        ensure((plan.total_cost - want).abs() <= 1e-6 * want, || format!("instance {solved}: {} vs {want}", plan.total_cost))?;
        solved += 1;
    }
    let single = two_node_problem(60.0, 3.0, 5.0, 2);
    let s = schedule(&[(2030, 0.8), (2035, 2.5)], 2);
    let (want, _) = phasing_oracle(&single, &s).ok_or("single edge oracle infeasible")?;
    let plan = solve_phased(&single, &s, &policy, &exact).map_err(err)?;
    ensure((plan.total_cost - want).abs() <= 1e-6 * want, || format!("single edge {} vs {want}", plan.total_cost))?;

    let opts = PhaseOptions { node_limit: 2_000 };
    for (p, t) in [(clustered_five(), 5.4), (dedicated_trace(), 7.5)] {
        let plan = solve_phased(&p, &schedule(&[(2030, t), (2035, t), (2040, t)], 2), &policy, &opts).map_err(err)?;
        ensure(plan.edge_slots.iter().flatten().all(|s| s.period == 0), || "constant targets built late".into())?;
    }
    for (p, s) in [
        (clustered_five(), schedule(&[(2030, 2.0), (2035, 4.0), (2040, 5.4)], 2)),
        (dedicated_trace(), schedule(&[(2030, 3.0), (2035, 6.0), (2040, 7.5)], 2)),
    ] {
        let pf = solve_phased(&p, &s, &policy, &opts).map_err(err)?;
        let my = solve_myopic(&p, &s, &policy, &opts).map_err(err)?;
        ensure(pf.total_cost <= my.total_cost * (1.0 + 1e-12), || format!("pf {} > myopic {}", pf.total_cost, my.total_cost))?;
    }
    Ok("12 enumerated instances + single edge, constant targets, PF <= myopic".into())
}

// 13
fn credit() -> Outcome {
    let s = PhaseSchedule::default();
    let policy = CreditPolicy::default();
    let (_, post) = levelized_phase_cost(0.0, 39.0e6, 1.0e6, &s, &policy, 2026).map_err(err)?;
    let want = 39.0 - 85.0 * annuity(0.106, 12) / annuity(0.106, 30);
    ensure((post + 23.7).abs() <= 0.1 && (post - want).abs() < 1e-9, || format!("{post}"))?;
    let full = CreditPolicy { credit_years: s.operating_life, ..policy };
    let (pre, post_full) = levelized_phase_cost(2.0e8, 1.5e7, 2.0e6, &s, &full, 2026).map_err(err)?;
    ensure(post_full == pre - 85.0, || format!("{post_full} vs {}", pre - 85.0))?;
    Ok(format!("post-credit {post:.3} $/t, full-term collapse exact"))
}

// 14
fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    cctskit::fixtures::write_mini_gulf(dir.path()).map_err(err)?;
    let scenario = dir.path().join("scenario.toml");
    let out = dir.path().join("out");
    let run = || -> Result<Duration, String> {
        let start = Instant::now();
        let o = Command::new(env!("CARGO_BIN_EXE_cctskit"))
            .args(["all", "--scenario"])
            .arg(&scenario)
            .output()
            .map_err(err)?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        Ok(start.elapsed())
    };
    let t1 = run()?;
    let first = snapshot(&out)?;
    let t2 = run()?;
    let second = snapshot(&out)?;
    ensure(!first.is_empty(), || "no outputs".into())?;
    ensure(first == second, || {
        let diff: Vec<_> = first.iter().zip(&second).filter(|(a, b)| a != b).map(|(a, _)| a.0.clone()).collect();
        format!("outputs differ: {diff:?}")
    })?;
    let slow = t1.max(t2);
    ensure(slow < Duration::from_secs(300), || format!("took {slow:?}"))?;
    Ok(format!("{} files identical, slowest run {:.1}s", first.len(), slow.as_secs_f64()))
}

fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).map_err(err)? {
            let p = e.map_err(err)?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).map_err(err)?));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("capture unit cost", capture_cost),
        ("captured amount", captured_amount),
        ("screening oracle", screening),
        ("monte carlo", monte_carlo),
        ("reservoir closed form", reservoir_closed_form),
        ("storage cost", storage_cost_range),
        ("least-cost routing", routing),
        ("network milp oracle", milp_oracle),
        ("shared vs dedicated", shared_vs_dedicated),
        ("sej avoidance", sej_avoidance),
        ("dedicated sequence", dedicated_sequence),
        ("phasing", phasing),
        ("tax credit", credit),
        ("end to end", end_to_end),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
