//! Multi-period buildout with perfect foresight, pipeline oversizing and
//! parallel pipes, plus per-phase levelized costs with per-tonne credits.
//!
//! Each candidate edge holds up to `max_parallel` pipe slots; a slot is a
//! (class, period) pair. A slot's discounted cost K(c, p) telescopes into
//! per-period charges K(c, t) − K(c, t+1) over the periods it serves, which
//! makes the branch-and-bound bound separate into one min-cost flow per
//! period.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{BindingConstraint, Error, InfeasibilityReport, Result};
use crate::finance::annuity_factor;
use crate::flow::FlowGraph;
use crate::netdesign::{NetworkProblem, SolverStats, TONNES_PER_MT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTarget {
    pub online_year: i32,
    /// Mt/y.
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseSchedule {
    pub periods: Vec<PhaseTarget>,
    pub construction_lead: u32,
    pub operating_life: u32,
    pub discount_rate: f64,
    /// Pipes allowed side by side on one candidate edge.
    pub max_parallel: usize,
}

impl Default for PhaseSchedule {
    fn default() -> Self {
        let p = |online_year, target| PhaseTarget { online_year, target };
        PhaseSchedule {
            periods: vec![p(2030, 5.0), p(2035, 31.0), p(2040, 62.0), p(2045, 72.0), p(2050, 73.0)],
            construction_lead: 4,
            operating_life: 30,
            discount_rate: 0.106,
            max_parallel: 2,
        }
    }
}

impl PhaseSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.periods.is_empty() {
            return Err(Error::config("phase schedule needs at least one period"));
        }
        for w in self.periods.windows(2) {
            if w[1].online_year <= w[0].online_year {
                return Err(Error::config("online years must strictly increase"));
            }
            if w[1].target < w[0].target {
                return Err(Error::config("phase targets must be nondecreasing"));
            }
        }
        if self.periods.iter().any(|p| !(p.target >= 0.0)) {
            return Err(Error::config("phase targets must be >= 0"));
        }
        if self.construction_lead == 0 || self.operating_life == 0 || self.max_parallel == 0 {
            return Err(Error::config("construction_lead, operating_life and max_parallel must be >= 1"));
        }
        if !(self.discount_rate >= 0.0) {
            return Err(Error::config("discount_rate must be >= 0"));
        }
        Ok(())
    }

    /// Last year of the planning horizon.
    pub fn horizon_end(&self) -> i32 {
        self.periods[0].online_year + self.operating_life as i32 - 1
    }

    /// Reference year for discounting: first construction start.
    pub fn base_year(&self) -> i32 {
        self.periods[0].online_year - self.construction_lead as i32
    }

    /// End-of-year discount factor for calendar year `year`.
    pub fn discount(&self, year: i32) -> f64 {
        (1.0 + self.discount_rate).powi(-(year - self.base_year() + 1))
    }

    fn sum_df(&self, from: i32, to: i32) -> f64 {
        (from..=to).map(|y| self.discount(y)).sum()
    }

    /// Discounted weight of one $/y of overnight capital disbursed evenly
    /// over the lead years before `online`.
    fn capital_weight(&self, online: i32) -> f64 {
        let lead = self.construction_lead as i32;
        self.sum_df(online - lead, online - 1) / lead as f64
    }

    /// Discounted years of operation from `online` to the horizon end.
    fn operating_weight(&self, online: i32) -> f64 {
        self.sum_df(online, self.horizon_end())
    }

    /// Discounted years covered by period `t`'s flows.
    fn period_weight(&self, t: usize) -> f64 {
        let from = self.periods[t].online_year;
        let to = match self.periods.get(t + 1) {
            Some(next) => (next.online_year - 1).min(self.horizon_end()),
            None => self.horizon_end(),
        };
        if to < from {
            0.0
        } else {
            self.sum_df(from, to)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CreditPolicy {
    pub bonus_rate: f64,
    pub base_rate: f64,
    pub credit_years: u32,
    /// Construction must start before this year for the bonus rate.
    pub bonus_construction_deadline: i32,
}

impl Default for CreditPolicy {
    fn default() -> Self {
        CreditPolicy {
            bonus_rate: 85.0,
            base_rate: 17.0,
            credit_years: 12,
            bonus_construction_deadline: 2033,
        }
    }
}

impl CreditPolicy {
    pub fn validate(&self, operating_life: u32) -> Result<()> {
        if !(self.bonus_rate >= 0.0 && self.base_rate >= 0.0) {
            return Err(Error::config("credit rates must be >= 0"));
        }
        if self.credit_years > operating_life {
            return Err(Error::config("credit_years must not exceed operating_life"));
        }
        Ok(())
    }

    pub fn rate_for(&self, construction_start_year: i32) -> f64 {
        if construction_start_year < self.bonus_construction_deadline {
            self.bonus_rate
        } else {
            self.base_rate
        }
    }
}

/// Levelized cost of a phase cohort before and after credits, $/t.
///
/// Capital is spent at the start, costs and tonnes accrue at the end of each
/// operating year.
pub fn levelized_phase_cost(
    capital: f64,
    annual_cost: f64,
    annual_tonnes: f64,
    schedule: &PhaseSchedule,
    policy: &CreditPolicy,
    construction_start_year: i32,
) -> Result<(f64, f64)> {
    if !(annual_tonnes > 0.0) {
        return Err(Error::domain(format!("annual tonnes must be > 0, got {annual_tonnes}")));
    }
    policy.validate(schedule.operating_life)?;
    let r = schedule.discount_rate;
    let a_life = annuity_factor(r, schedule.operating_life);
    let pre = (capital + annual_cost * a_life) / (annual_tonnes * a_life);
    let rate = policy.rate_for(construction_start_year);
    let post = if policy.credit_years == schedule.operating_life {
        pre - rate
    } else {
        pre - rate * annuity_factor(r, policy.credit_years) / a_life
    };
    Ok((pre, post))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseOptions {
    pub node_limit: usize,
}

impl Default for PhaseOptions {
    fn default() -> Self {
        PhaseOptions { node_limit: 20_000 }
    }
}

/// A pipe slot on an edge: built in `period` with `class`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub period: usize,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBuild {
    pub edge: usize,
    pub edge_id: String,
    pub class: usize,
    /// Parallel pipe index on the edge, from 0.
    pub slot: usize,
    pub length_km: f64,
    pub capital: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePeriod {
    pub index: usize,
    pub online_year: i32,
    pub construction_start: i32,
    pub target: f64,
    pub captured: f64,
    pub new_builds: Vec<PhaseBuild>,
    /// (edge, signed flow) for edges carrying flow.
    pub edge_flows: Vec<(usize, f64)>,
    /// (edge, installed capacity) for built edges.
    pub edge_capacity: Vec<(usize, f64)>,
    pub source_capture: Vec<(String, f64)>,
    pub sink_injection: Vec<(String, f64)>,
    pub new_sources: Vec<String>,
    pub new_sinks: Vec<String>,
    /// Overnight capital of builds coming online this period, $.
    pub capital_pipeline: f64,
    pub capital_capture: f64,
    pub capital_storage: f64,
    pub credit_rate: f64,
    /// Cohort levelized cost, $/t (absent when capture does not grow).
    pub pre_credit: Option<f64>,
    pub post_credit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub schedule: PhaseSchedule,
    pub policy: CreditPolicy,
    pub periods: Vec<PhasePeriod>,
    /// Per edge, the slots built.
    pub edge_slots: Vec<Vec<Slot>>,
    /// Discounted total cost, $.
    pub total_cost: f64,
    pub stats: SolverStats,
}

struct Ctx<'a> {
    p: &'a NetworkProblem,
    sched: &'a PhaseSchedule,
    periods: usize,
    src_nodes: Vec<usize>,
    snk_nodes: Vec<usize>,
    options: Vec<Slot>,
    plans: Vec<Vec<usize>>,
    plan_caps: Vec<Vec<f64>>,
    /// Per edge, per option: discounted cost K.
    k: Vec<Vec<f64>>,
    var_weight: Vec<f64>,
}

fn multisets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().copied().unwrap_or(0);
            for i in start..n {
                let mut v: Vec<usize> = m.clone();
                v.push(i);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

impl<'a> Ctx<'a> {
    fn new(p: &'a NetworkProblem, sched: &'a PhaseSchedule) -> Self {
        let econ = &p.economics;
        let nc = econ.classes.len();
        let np = sched.periods.len();
        let mut options = Vec::new();
        for period in 0..np {
            for class in 0..nc {
                options.push(Slot { period, class });
            }
        }
        let plans = multisets(options.len(), sched.max_parallel);
        let plan_caps = plans
            .iter()
            .map(|plan| {
                (0..np)
                    .map(|t| {
                        plan.iter()
                            .filter(|&&o| options[o].period <= t)
                            .map(|&o| econ.classes[options[o].class].max_flow)
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let k: Vec<Vec<f64>> = p
            .candidate
            .edges
            .iter()
            .map(|edge| {
                options
                    .iter()
                    .map(|o| {
                        let online = sched.periods[o.period].online_year;
                        econ.pipe_capital(o.class, edge.length_km, edge.weighted_km) * sched.capital_weight(online)
                            + econ.pipe_om(o.class, edge.length_km) * sched.operating_weight(online)
                    })
                    .collect()
            })
            .collect();
        Ctx {
            p,
            sched,
            periods: np,
            src_nodes: p.source_nodes(),
            snk_nodes: p.sink_nodes(),
            var_weight: (0..np).map(|t| sched.period_weight(t)).collect(),
            options,
            plans,
            plan_caps,
            k,
        }
    }

    /// Per-period lower envelopes of each edge's charge over its allowed
    /// plans. A period's charge for a plan is the drop in K between this
    /// period and the next for every slot already online, so the charges
    /// telescope to the plan cost.
    fn bounds(&self, allowed: &[Vec<usize>]) -> Bounds {
        let nc = self.p.economics.classes.len();
        let np = self.periods;
        let mut env = Vec::with_capacity(allowed.len());
        let mut base = Vec::with_capacity(allowed.len());
        for (e, plans) in allowed.iter().enumerate() {
            let k = &self.k[e];
            let delta = |o: usize, t: usize| {
                let c = self.options[o].class;
                let next = if t + 1 < np { k[(t + 1) * nc + c] } else { 0.0 };
                (k[t * nc + c] - next).max(0.0)
            };
            let mut env_e = Vec::with_capacity(np);
            let mut base_e = 0.0;
            for t in 0..np {
                let pts: Vec<(f64, f64)> = plans
                    .iter()
                    .map(|&pl| {
                        let charge = self.plans[pl]
                            .iter()
                            .filter(|&&o| self.options[o].period <= t)
                            .map(|&o| delta(o, t))
                            .sum::<f64>();
                        (self.plan_caps[pl][t], charge)
                    })
                    .collect();
                let floor = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                let floor = if floor.is_finite() { floor } else { 0.0 };
                base_e += floor;
                let shifted: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, y - floor)).collect();
                env_e.push(crate::netdesign::shared::convex_segments(&shifted, self.sched.periods[t].target));
            }
            env.push(env_e);
            base.push(base_e);
        }
        Bounds { env, base }
    }

    fn plan_index(&self, slots: &[Slot]) -> usize {
        self.plans
            .iter()
            .position(|pl| pl.len() == slots.len() && pl.iter().zip(slots).all(|(&o, s)| self.options[o] == *s))
            .expect("slots form a plan in this option set")
    }

    fn plan_cost(&self, e: usize, plan: usize) -> f64 {
        self.plans[plan].iter().map(|&o| self.k[e][o]).sum()
    }

    fn relax(&self, states: &[Option<usize>], b: &Bounds) -> std::result::Result<PRelaxed, (usize, f64)> {
        let p = self.p;
        let n = p.candidate.nodes.len();
        let ne = p.candidate.edges.len();
        let mut value = 0.0;
        let mut flows = Vec::with_capacity(self.periods);
        let mut capture = Vec::with_capacity(self.periods);
        let mut injection = Vec::with_capacity(self.periods);
        let mut charged = vec![0.0; ne];
        for (e, st) in states.iter().enumerate() {
            match st {
                Some(plan) => value += self.plan_cost(e, *plan),
                None => {
                    value += b.base[e];
                    charged[e] += b.base[e];
                }
            }
        }
        for t in 0..self.periods {
            let w = self.var_weight[t];
            let (s, sink) = (n, n + 1);
            let mut g = FlowGraph::new(n + 2);
            let src_arcs: Vec<usize> = p
                .sources
                .iter()
                .enumerate()
                .map(|(i, src)| g.add_arc(s, self.src_nodes[i], src.max_capture, src.capture_cost * TONNES_PER_MT * w))
                .collect();
            let mut edge_arcs: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); ne];
            for (e, st) in states.iter().enumerate() {
                let edge = &p.candidate.edges[e];
                match st {
                    Some(plan) => {
                        let cap = self.plan_caps[*plan][t];
                        if cap > 0.0 {
                            edge_arcs[e].push((g.add_arc(edge.from, edge.to, cap, 0.0), 1.0, 0.0));
                            edge_arcs[e].push((g.add_arc(edge.to, edge.from, cap, 0.0), -1.0, 0.0));
                        }
                    }
                    None => {
                        for &(wd, slope) in &b.env[e][t] {
                            edge_arcs[e].push((g.add_arc(edge.from, edge.to, wd, slope), 1.0, slope));
                            edge_arcs[e].push((g.add_arc(edge.to, edge.from, wd, slope), -1.0, slope));
                        }
                    }
                }
            }
            let sink_arcs: Vec<usize> = p
                .sinks
                .iter()
                .enumerate()
                .map(|(k, snk)| g.add_arc(self.snk_nodes[k], sink, snk.injectivity, snk.storage_cost * TONNES_PER_MT * w))
                .collect();
            let target = self.sched.periods[t].target;
            let (sent, cost) = g.push(s, sink, target);
            if sent < target - 1e-7 {
                return Err((t, sent));
            }
            value += cost;
            let mut f = vec![0.0; ne];
            for (e, arcs) in edge_arcs.iter().enumerate() {
                for &(a, sign, slope) in arcs {
                    f[e] += sign * g.flow(a);
                    charged[e] += g.flow(a) * slope;
                }
            }
            flows.push(f);
            capture.push(src_arcs.iter().map(|&a| g.flow(a)).collect());
            injection.push(sink_arcs.iter().map(|&a| g.flow(a)).collect());
        }
        Ok(PRelaxed {
            value,
            flows,
            capture,
            injection,
            charged,
        })
    }

    fn variable_cost(&self, r: &PRelaxed) -> f64 {
        let mut v = 0.0;
        for t in 0..self.periods {
            let w = self.var_weight[t] * TONNES_PER_MT;
            for (i, s) in self.p.sources.iter().enumerate() {
                v += r.capture[t][i] * s.capture_cost * w;
            }
            for (k, snk) in self.p.sinks.iter().enumerate() {
                v += r.injection[t][k] * snk.storage_cost * w;
            }
        }
        v
    }

    /// Cheapest allowed plan whose capacity covers the edge's flow profile.
    fn cover(&self, e: usize, r: &PRelaxed, allowed: &[usize]) -> Option<usize> {
        let profile: Vec<f64> = (0..self.periods).map(|t| r.flows[t][e].abs()).collect();
        allowed
            .iter()
            .copied()
            .filter(|&pl| (0..self.periods).all(|t| self.plan_caps[pl][t] >= profile[t] - 1e-7))
            .min_by(|&a, &b| self.plan_cost(e, a).total_cmp(&self.plan_cost(e, b)).then(a.cmp(&b)))
    }
}

#[derive(Default)]
struct Bounds {
    /// Per edge, per period: (width, slope) segments.
    env: Vec<Vec<Vec<(f64, f64)>>>,
    /// Per edge: sum over periods of the cheapest allowed charge.
    base: Vec<f64>,
}

struct PRelaxed {
    value: f64,
    flows: Vec<Vec<f64>>,
    capture: Vec<Vec<f64>>,
    injection: Vec<Vec<f64>>,
    charged: Vec<f64>,
}

#[derive(PartialEq)]
struct Key(f64, usize);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Key {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

struct Solved {
    cost: f64,
    plans: Vec<usize>,
    relaxed: PRelaxed,
    stats: SolverStats,
}

fn branch_and_bound(
    ctx: &Ctx<'_>,
    allowed: &[Vec<usize>],
    opts: &PhaseOptions,
    warm: Option<Vec<usize>>,
) -> Result<Solved> {
    let ne = ctx.p.candidate.edges.len();
    let root = vec![None; ne];
    let bounds = ctx.bounds(allowed);
    if let Err((t, avail)) = ctx.relax(&root, &bounds) {
        return Err(Error::Infeasible(InfeasibilityReport {
            binding: BindingConstraint::Network,
            required_mt_y: ctx.sched.periods[t].target,
            available_mt_y: avail,
            period_year: Some(ctx.sched.periods[t].online_year),
        }));
    }
    let mut incumbent: Option<(f64, Vec<usize>, PRelaxed)> = warm.and_then(|plans| {
        let states: Vec<Option<usize>> = plans.iter().map(|&pl| Some(pl)).collect();
        ctx.relax(&states, &bounds).ok().map(|r| (r.value, plans, r))
    });
    let mut heap = BinaryHeap::new();
    // Nodes keep only their (edge, plan) decisions.
    let mut store: Vec<Option<Vec<(usize, usize)>>> = vec![Some(Vec::new())];
    heap.push(Reverse(Key(f64::NEG_INFINITY, 0)));
    let tol = |v: f64| 1e-9 * v.abs().max(1.0);
    let mut explored = 0;
    let mut hit_limit = false;
    while let Some(Reverse(Key(bound, seq))) = heap.pop() {
        if let Some((inc, _, _)) = &incumbent {
            if bound >= inc - tol(*inc) {
                continue;
            }
        }
        if explored >= opts.node_limit {
            heap.push(Reverse(Key(bound, seq)));
            hit_limit = true;
            break;
        }
        explored += 1;
        let decisions = store[seq].take().expect("node stored once");
        let mut states = root.clone();
        for &(e, pl) in &decisions {
            states[e] = Some(pl);
        }
        let Ok(r) = ctx.relax(&states, &bounds) else {
            continue;
        };
        if let Some((inc, _, _)) = &incumbent {
            if r.value >= inc - tol(*inc) {
                continue;
            }
        }
        // Round: cheapest covering plan per edge.
        let mut plans = vec![0usize; ne];
        let mut feasible = true;
        let mut branch: Option<(usize, f64)> = None;
        for e in 0..ne {
            let pl = match states[e] {
                Some(pl) => Some(pl),
                None => ctx.cover(e, &r, &allowed[e]),
            };
            let Some(pl) = pl else {
                feasible = false;
                continue;
            };
            plans[e] = pl;
            if states[e].is_none() {
                let gap = ctx.plan_cost(e, pl) - r.charged[e];
                if gap > 1e-6 * ctx.plan_cost(e, pl).max(1.0) && branch.is_none_or(|(_, g)| gap > g) {
                    branch = Some((e, gap));
                }
            }
        }
        if feasible {
            // Fixed plans with no flow at all fall back to the cheapest allowed one.
            for e in 0..ne {
                if states[e].is_some() && (0..ctx.periods).all(|t| r.flows[t][e].abs() <= 1e-9) {
                    plans[e] = ctx.cover(e, &r, &allowed[e]).unwrap_or(plans[e]);
                }
            }
            let cost = ctx.variable_cost(&r) + (0..ne).map(|e| ctx.plan_cost(e, plans[e])).sum::<f64>();
            if incumbent.as_ref().is_none_or(|(inc, _, _)| cost < inc - tol(*inc)) {
                incumbent = Some((cost, plans, r_clone(&r)));
            }
        } else if branch.is_none() {
            // Infeasible rounding with no gap: branch on an uncovered edge.
            branch = (0..ne)
                .find(|&e| states[e].is_none() && ctx.cover(e, &r, &allowed[e]).is_none())
                .map(|e| (e, 0.0));
        }
        if let Some((e, _)) = branch {
            for &pl in &allowed[e] {
                let mut child = decisions.clone();
                child.push((e, pl));
                heap.push(Reverse(Key(r.value, store.len())));
                store.push(Some(child));
            }
        }
    }
    let Some((cost, plans, relaxed)) = incumbent else {
        return Err(Error::Internal(if hit_limit {
            "phasing node limit reached before a feasible plan was found".into()
        } else {
            "no feasible phase plan under the allowed build options".into()
        }));
    };
    let lower_bound = if hit_limit {
        heap.iter().map(|Reverse(Key(b, _))| *b).fold(cost, f64::min)
    } else {
        cost
    };
    Ok(Solved {
        cost,
        plans,
        relaxed,
        stats: SolverStats {
            method: "branch_and_bound".into(),
            nodes: explored,
            proven_optimal: !hit_limit,
            lower_bound,
            gap: if cost > 0.0 { (cost - lower_bound) / cost } else { 0.0 },
        },
    })
}

fn r_clone(r: &PRelaxed) -> PRelaxed {
    PRelaxed {
        value: r.value,
        flows: r.flows.clone(),
        capture: r.capture.clone(),
        injection: r.injection.clone(),
        charged: r.charged.clone(),
    }
}

fn check_periods(problem: &NetworkProblem, schedule: &PhaseSchedule) -> Result<()> {
    problem.validate()?;
    schedule.validate()?;
    for p in &schedule.periods {
        problem.check_target(p.target, Some(p.online_year))?;
    }
    Ok(())
}

/// Minimum discounted-cost buildout meeting every period's target.
pub fn solve_phased(
    problem: &NetworkProblem,
    schedule: &PhaseSchedule,
    policy: &CreditPolicy,
    opts: &PhaseOptions,
) -> Result<PhasePlan> {
    let start = solve_myopic(problem, schedule, policy, opts)?;
    solve_phased_from(problem, schedule, policy, opts, &start)
}

/// As [`solve_phased`], starting the search from a known feasible plan for
/// the same schedule; the result never costs more than `start`.
pub fn solve_phased_from(
    problem: &NetworkProblem,
    schedule: &PhaseSchedule,
    policy: &CreditPolicy,
    opts: &PhaseOptions,
    start: &PhasePlan,
) -> Result<PhasePlan> {
    check_periods(problem, schedule)?;
    policy.validate(schedule.operating_life)?;
    if start.edge_slots.len() != problem.candidate.edges.len() || start.schedule.periods != schedule.periods {
        return Err(Error::config("starting plan does not match the problem and schedule"));
    }
    let ctx = Ctx::new(problem, schedule);
    let all: Vec<usize> = (0..ctx.plans.len()).collect();
    let allowed = vec![all; problem.candidate.edges.len()];
    let warm = start.edge_slots.iter().map(|slots| ctx.plan_index(slots)).collect();
    let solved = branch_and_bound(&ctx, &allowed, opts, Some(warm))?;
    build_plan(&ctx, policy, solved)
}

/// Plan that decides each period's builds knowing only that period's target,
/// keeping earlier builds. Used as the comparison baseline.
pub fn solve_myopic(
    problem: &NetworkProblem,
    schedule: &PhaseSchedule,
    policy: &CreditPolicy,
    opts: &PhaseOptions,
) -> Result<PhasePlan> {
    check_periods(problem, schedule)?;
    policy.validate(schedule.operating_life)?;
    let full = Ctx::new(problem, schedule);
    let ne = problem.candidate.edges.len();
    let mut fixed: Vec<Vec<Slot>> = vec![Vec::new(); ne];
    let mut nodes = 0;
    let mut proven = true;
    for t in 0..schedule.periods.len() {
        let mut truncated = schedule.clone();
        truncated.periods.truncate(t + 1);
        let ctx = Ctx::new(problem, &truncated);
        let allowed: Vec<Vec<usize>> = (0..ne)
            .map(|e| {
                (0..ctx.plans.len())
                    .filter(|&pl| {
                        let slots: Vec<Slot> = ctx.plans[pl].iter().map(|&o| ctx.options[o]).collect();
                        let past: Vec<Slot> = slots.iter().copied().filter(|s| s.period < t).collect();
                        past == fixed[e]
                    })
                    .collect()
            })
            .collect();
        let solved = branch_and_bound(&ctx, &allowed, opts, None)?;
        nodes += solved.stats.nodes;
        proven &= solved.stats.proven_optimal;
        for e in 0..ne {
            fixed[e] = ctx.plans[solved.plans[e]].iter().map(|&o| ctx.options[o]).collect();
        }
    }
    // Evaluate the fixed builds over the full schedule with optimal operation.
    let states: Vec<Option<usize>> = fixed.iter().map(|slots| Some(full.plan_index(slots))).collect();
    let r = full
        .relax(&states, &Bounds::default())
        .map_err(|_| Error::Internal("myopic builds cannot carry the schedule".into()))?;
    let plans: Vec<usize> = states.iter().map(|s| s.unwrap()).collect();
    let cost = r.value;
    build_plan(
        &full,
        policy,
        Solved {
            cost,
            plans,
            relaxed: r,
            stats: SolverStats {
                method: "myopic".into(),
                nodes,
                proven_optimal: proven,
                lower_bound: cost,
                gap: 0.0,
            },
        },
    )
}

fn build_plan(ctx: &Ctx<'_>, policy: &CreditPolicy, solved: Solved) -> Result<PhasePlan> {
    let p = ctx.p;
    let sched = ctx.sched;
    let econ = &p.economics;
    let r = &solved.relaxed;
    let edge_slots: Vec<Vec<Slot>> = solved
        .plans
        .iter()
        .map(|&pl| ctx.plans[pl].iter().map(|&o| ctx.options[o]).collect())
        .collect();
    let mut periods = Vec::new();
    let mut prev_capture = vec![0.0; p.sources.len()];
    let mut prev_injection = vec![0.0; p.sinks.len()];
    let mut prev_annual = 0.0;
    for t in 0..ctx.periods {
        let online = sched.periods[t].online_year;
        let start = online - sched.construction_lead as i32;
        let mut new_builds = Vec::new();
        let mut om_new = 0.0;
        for (e, slots) in edge_slots.iter().enumerate() {
            for (i, s) in slots.iter().enumerate() {
                if s.period == t {
                    let edge = &p.candidate.edges[e];
                    new_builds.push(PhaseBuild {
                        edge: e,
                        edge_id: edge.id.clone(),
                        class: s.class,
                        slot: i,
                        length_km: edge.length_km,
                        capital: econ.pipe_capital(s.class, edge.length_km, edge.weighted_km),
                    });
                    om_new += econ.pipe_om(s.class, edge.length_km);
                }
            }
        }
        let capture = &r.capture[t];
        let injection = &r.injection[t];
        let captured: f64 = capture.iter().sum();
        let annual: f64 = p
            .sources
            .iter()
            .zip(capture)
            .map(|(s, x)| s.capture_cost * x * TONNES_PER_MT)
            .sum::<f64>()
            + p.sinks
                .iter()
                .zip(injection)
                .map(|(k, z)| k.storage_cost * z * TONNES_PER_MT)
                .sum::<f64>();
        let capital_pipeline = new_builds.iter().map(|b| b.capital).fold(0.0, |a, b| a + b);
        let capital_capture: f64 = p
            .sources
            .iter()
            .enumerate()
            .filter(|(_, s)| s.max_capture > 0.0)
            .map(|(i, s)| s.capture_capital * (capture[i] - prev_capture[i]).max(0.0) / s.max_capture)
            .fold(0.0, |a, b| a + b);
        let new_sinks: Vec<String> = p
            .sinks
            .iter()
            .enumerate()
            .filter(|(k, _)| injection[*k] > 1e-9 && prev_injection[*k] <= 1e-9)
            .map(|(_, s)| s.id.clone())
            .collect();
        let capital_storage: f64 = p
            .sinks
            .iter()
            .filter(|k| new_sinks.contains(&k.id))
            .map(|k| k.capital)
            .fold(0.0, |a, b| a + b);
        let new_sources: Vec<String> = p
            .sources
            .iter()
            .enumerate()
            .filter(|(i, _)| capture[*i] > 1e-9 && prev_capture[*i] <= 1e-9)
            .map(|(_, s)| s.id.clone())
            .collect();
        let prev_total: f64 = prev_capture.iter().sum();
        let delta_tonnes = (captured - prev_total) * TONNES_PER_MT;
        let (pre, post) = if delta_tonnes > 1e-3 {
            let (a, b) = levelized_phase_cost(
                capital_pipeline,
                annual - prev_annual + om_new,
                delta_tonnes,
                sched,
                policy,
                start,
            )?;
            (Some(a), Some(b))
        } else {
            (None, None)
        };
        let edge_flows = r.flows[t]
            .iter()
            .enumerate()
            .filter(|(_, f)| f.abs() > 1e-9)
            .map(|(e, f)| (e, *f))
            .collect();
        let edge_capacity = edge_slots
            .iter()
            .enumerate()
            .map(|(e, slots)| {
                (
                    e,
                    slots
                        .iter()
                        .filter(|s| s.period <= t)
                        .map(|s| econ.classes[s.class].max_flow)
                        .sum::<f64>(),
                )
            })
            .filter(|(_, c)| *c > 0.0)
            .collect();
        periods.push(PhasePeriod {
            index: t,
            online_year: online,
            construction_start: start,
            target: sched.periods[t].target,
            captured,
            new_builds,
            edge_flows,
            edge_capacity,
            source_capture: p.sources.iter().zip(capture).map(|(s, x)| (s.id.clone(), *x)).collect(),
            sink_injection: p.sinks.iter().zip(injection).map(|(k, z)| (k.id.clone(), *z)).collect(),
            new_sources,
            new_sinks,
            capital_pipeline,
            capital_capture,
            capital_storage,
            credit_rate: policy.rate_for(start),
            pre_credit: pre,
            post_credit: post,
        });
        prev_capture.clone_from(capture);
        prev_injection.clone_from(injection);
        prev_annual = annual;
    }
    Ok(PhasePlan {
        schedule: sched.clone(),
        policy: *policy,
        periods,
        edge_slots,
        total_cost: solved.cost,
        stats: solved.stats,
    })
}

/// Discounted cost of a given set of per-edge slots with optimal operation;
/// `None` if the slots cannot carry some period's target.
pub fn evaluate_slots(problem: &NetworkProblem, schedule: &PhaseSchedule, slots: &[Vec<Slot>]) -> Result<Option<f64>> {
    check_periods(problem, schedule)?;
    let ctx = Ctx::new(problem, schedule);
    let mut states = Vec::with_capacity(slots.len());
    for s in slots {
        let mut sorted = s.clone();
        sorted.sort();
        let idx = ctx
            .plans
            .iter()
            .position(|pl| pl.iter().map(|&o| ctx.options[o]).collect::<Vec<_>>() == sorted)
            .ok_or_else(|| Error::domain("slot set exceeds max_parallel or references unknown periods"))?;
        states.push(Some(idx));
    }
    Ok(ctx.relax(&states, &Bounds::default()).ok().map(|r| r.value))
}

pub fn format_phase_costs_csv(plan: &PhasePlan) -> String {
    let mut out = String::from(
        "period,online_year,construction_start,target_mt_y,captured_mt_y,new_pipes,capital_pipeline_usd,\
capital_capture_usd,capital_storage_usd,credit_rate_usd_t,pre_credit_usd_t,post_credit_usd_t\n",
    );
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    for p in &plan.periods {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            p.index + 1,
            p.online_year,
            p.construction_start,
            p.target,
            p.captured,
            p.new_builds.len(),
            p.capital_pipeline,
            p.capital_capture,
            p.capital_storage,
            p.credit_rate,
            opt(p.pre_credit),
            opt(p.post_credit)
        ));
    }
    out
}
