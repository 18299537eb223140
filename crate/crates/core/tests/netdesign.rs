mod support;

use cctskit::costsurface::SejParams;
use cctskit::fixtures::{clustered_five, dedicated_trace, network_problem, two_corridor};
use cctskit::grid::RasterGrid;
use cctskit::netdesign::{check_solution, solve_dedicated, solve_shared, solve_shared_with, NetworkProblem, SolverOptions};
use cctskit::routing::{Connectivity, EdgeMetrics};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{conservation_residual, random_problem, shared_oracle};

fn exact() -> SolverOptions {
    SolverOptions {
        node_limit: 1_000_000,
        enumeration_limit: 0,
        warm_start: false,
    }
}

#[test]
fn shared_matches_enumeration_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut solved = 0;
    while solved < 25 {
        let classes = if solved % 2 == 0 { 2 } else { 3 };
        let max_edges = if classes == 2 { 8 } else { 6 };
        let p = random_problem(&mut rng, max_edges, 3, 2, classes);
        let Some(want) = shared_oracle(&p) else {
            continue;
        };
        let sol = solve_shared_with(&p, &exact()).unwrap();
        assert!(sol.stats.proven_optimal);
        let got = sol.report.objective;
        assert!((got - want).abs() <= 1e-6 * want.max(1.0), "instance {solved}: {got} vs {want}");
        check_solution(&p, &sol).unwrap();
        let capture: Vec<f64> = sol.sources.iter().map(|s| s.capture).collect();
        let injection: Vec<f64> = sol.sinks.iter().map(|s| s.injection).collect();
        assert!(conservation_residual(&p, &sol.edge_flows(p.candidate.edges.len()), &capture, &injection) < 1e-7);
        solved += 1;
    }
}

fn shared_and_dedicated(p: &NetworkProblem) -> (f64, f64, f64, f64) {
    let s = solve_shared(p).unwrap();
    let d = solve_dedicated(p).unwrap();
    check_solution(p, &s).unwrap();
    (s.report.objective, d.report.objective, s.report.pipeline_km, d.report.pipeline_km)
}

#[test]
fn clustered_sources_share_a_trunk() {
    let p = clustered_five();
    let (so, dob, skm, dkm) = shared_and_dedicated(&p);
    assert!(so <= dob);
    assert!(skm < 0.5 * dkm, "{skm} vs {dkm}");
}

#[test]
fn shared_never_costs_more_than_dedicated() {
    let p = dedicated_trace();
    let (so, dob, _, _) = shared_and_dedicated(&p);
    assert!(so <= dob);
}

#[test]
fn dedicated_trace_sequence() {
    let p = dedicated_trace();
    let sol = solve_dedicated(&p).unwrap();
    let seq: Vec<(&str, &str, f64)> = sol
        .assignments
        .iter()
        .map(|a| (a.source.as_str(), a.sink.as_str(), a.sink_remaining))
        .collect();
    let want = [("A", "K1", 1.0), ("B", "K2", 0.0), ("C", "K3", 3.5), ("D", "K1", 0.0)];
    assert_eq!(seq.len(), want.len());
    for ((s, k, r), (ws, wk, wr)) in seq.iter().zip(want) {
        assert_eq!((*s, *k), (ws, wk));
        assert!((r - wr).abs() < 1e-9);
    }
    assert!(sol.unplaced.is_empty());
    // Every dedicated pipe serves one source.
    assert!(sol.pipes.iter().all(|p| p.source.is_some()));
}

#[test]
fn sej_routing_avoids_the_tract() {
    let tc = two_corridor();
    let layer = tc.sej_layer(&SejParams::sej3()).unwrap();
    assert!(layer.count_true() > 0);
    let econ = cctskit::netdesign::PipelineEconomics::default();
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
    .unwrap();
    let weighted: RasterGrid<f64> = RasterGrid::new(
        *tc.economic.spec(),
        tc.economic.values().iter().zip(layer.values()).map(|(&v, &m)| if m { v * 1.0e6 } else { v }).collect(),
    )
    .unwrap();
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
    .unwrap();
    let a = solve_shared(&off).unwrap();
    let b = solve_shared(&on).unwrap();
    assert!(a.report.sej_km > 0.0);
    assert_eq!(b.report.sej_km, 0.0);
    assert!(b.report.pipeline_km > a.report.pipeline_km);
    assert!(b.report.pipeline_km < 1.25 * a.report.pipeline_km, "{} vs {}", b.report.pipeline_km, a.report.pipeline_km);
}

#[test]
fn infeasible_target_names_the_binding_limit() {
    let mut p = clustered_five();
    p.target = 100.0;
    match solve_shared(&p) {
        Err(cctskit::Error::Infeasible(r)) => {
            assert_eq!(r.required_mt_y, 100.0);
            assert!(r.available_mt_y < 100.0);
        }
        other => panic!("{other:?}"),
    }
}
