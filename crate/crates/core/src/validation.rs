//! Oracles and invariant checks shared by the test suites and `validate`.
//!
//! [`exact_outcomes`] is an independent re-statement of the update rules that
//! enumerates every stochastic branch (update order, instigation coin, number
//! of attempts, peers, duration) of a small instance and returns the exact
//! distribution of end-of-day states. It shares no code with
//! [`crate::engine::World`]; [`sampled_outcomes`] runs the engine for comparison.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};

use crate::engine::{instigation_probability, run_day, ModelParams, Stereotype, World};
use crate::metrics::{AgentTrace, Quantity, RecordOptions, RunRecord};
use crate::stochastics::{derive_run_seed, MasterSeed, RandomStream};

/// End-of-day state of a run: final motivations and cumulative productivity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub motivation: Vec<u32>,
    pub cumulative: Vec<u64>,
}

impl Outcome {
    /// Whole-group mean cumulative productivity at the end of the day.
    pub fn pi_whole(&self, horizon: u32) -> f64 {
        self.cumulative.iter().sum::<u64>() as f64 / (f64::from(horizon) * self.cumulative.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Talk {
    a: usize,
    b: usize,
    left: u32,
    fresh: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct State {
    level: Vec<u32>,
    cumulative: Vec<u64>,
    talks: Vec<Talk>,
}

impl State {
    fn busy(&self, k: usize) -> bool {
        self.talks.iter().any(|c| c.a == k || c.b == k)
    }
}

fn spark(stereotype: Stereotype, level: u32, p: &ModelParams) -> f64 {
    // restated: (T/tau - L)/(T/tau - 1) for L <= T/tau, else 0, and 1 at L = 1
    let cutoff = f64::from(p.horizon) / p.tau(stereotype);
    let l = f64::from(level);
    if l > cutoff {
        0.0
    } else if level == 1 {
        1.0
    } else {
        (cutoff - l) / (cutoff - 1.0)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Poisson probabilities `P(m)` for `m = 0, 1, ...`, stopping once past the
/// mean and below `1e-18`.
fn attempt_pmf(mean: f64) -> Vec<f64> {
    if mean == 0.0 {
        return vec![1.0];
    }
    let mut pmf = vec![(-mean).exp()];
    let mut m = 0.0;
    loop {
        m += 1.0;
        let next = pmf[pmf.len() - 1] * mean / m;
        if m > mean && next < 1e-18 {
            return pmf;
        }
        pmf.push(next);
    }
}

/// Exact outcome distribution for a small instance by full enumeration.
///
/// Cost is `O((N!)^T)` in the worst case; intended for `N <= 3`, `T <= 6`.
pub fn exact_outcomes(params: &ModelParams) -> BTreeMap<Outcome, f64> {
    let n = params.n_agents as usize;
    let kinds: Vec<Stereotype> = (0..n)
        .map(|k| {
            if k < params.n_extroverts as usize {
                Stereotype::Extrovert
            } else {
                Stereotype::Introvert
            }
        })
        .collect();
    let orders = permutations(n);
    let pmf = attempt_pmf(params.contact_rate);

    let mut states: BTreeMap<State, f64> = BTreeMap::new();
    states.insert(
        State {
            level: vec![1; n],
            cumulative: vec![0; n],
            talks: Vec::new(),
        },
        1.0,
    );

    for _minute in 0..params.horizon {
        let mut next: BTreeMap<State, f64> = BTreeMap::new();
        for (state, weight) in &states {
            for order in &orders {
                let w = weight / orders.len() as f64;
                let mut partial = BTreeMap::from([(state.clone(), w)]);
                for &k in order {
                    let mut merged = BTreeMap::new();
                    for (s, w) in partial {
                        for (mut t, v) in step_agent(s, w, k, &kinds, params, &pmf) {
                            t.talks.sort();
                            *merged.entry(t).or_insert(0.0) += v;
                        }
                    }
                    partial = merged;
                }
                for (mut s, w) in partial {
                    for c in &mut s.talks {
                        if c.fresh {
                            c.fresh = false;
                        } else {
                            c.left -= 1;
                        }
                    }
                    s.talks.retain(|c| c.left > 0);
                    for k in 0..n {
                        if !s.busy(k) {
                            s.cumulative[k] += u64::from(s.level[k] - 1);
                        }
                    }
                    *next.entry(s).or_insert(0.0) += w;
                }
            }
        }
        states = next;
    }

    let mut outcomes = BTreeMap::new();
    for (s, w) in states {
        *outcomes
            .entry(Outcome {
                motivation: s.level,
                cumulative: s.cumulative,
            })
            .or_insert(0.0) += w;
    }
    outcomes
}

fn step_agent(
    mut s: State,
    w: f64,
    k: usize,
    kinds: &[Stereotype],
    params: &ModelParams,
    pmf: &[f64],
) -> Vec<(State, f64)> {
    if s.busy(k) {
        s.level[k] = (s.level[k] + 1).min(params.motivation_cap);
        return vec![(s, w)];
    }
    s.level[k] = if s.level[k] > 1 { s.level[k] - 1 } else { 1 };
    let p = spark(kinds[k], s.level[k], params);
    let n = kinds.len();
    let mut out = Vec::new();
    if p < 1.0 {
        out.push((s.clone(), w * (1.0 - p)));
    }
    if p <= 0.0 {
        return out;
    }
    let free: Vec<usize> = (0..n).filter(|&j| j != k && !s.busy(j)).collect();
    let others = (n - 1) as f64;
    // every attempt at a busy peer leaves the state unchanged, so the attempts
    // collapse to "first free peer hit at attempt i"
    let mut no_partner = 0.0;
    let mut per_peer = 0.0;
    for (m, pm) in pmf.iter().enumerate() {
        let mut reach = 1.0;
        let mut hit_any = 0.0;
        for _attempt in 0..m {
            if n < 2 {
                break;
            }
            hit_any += reach * free.len() as f64 / others;
            reach *= (others - free.len() as f64) / others;
        }
        no_partner += pm * (1.0 - hit_any);
        if !free.is_empty() {
            per_peer += pm * hit_any / free.len() as f64;
        }
    }
    if no_partner > 0.0 {
        out.push((s.clone(), w * p * no_partner));
    }
    if per_peer <= 0.0 {
        return out;
    }
    for &j in &free {
        for d in 1..=params.max_duration {
            let mut t = s.clone();
            let (a, b) = if k < j { (k, j) } else { (j, k) };
            t.talks.push(Talk {
                a,
                b,
                left: d,
                fresh: true,
            });
            out.push((t, w * p * per_peer / f64::from(params.max_duration)));
        }
    }
    out
}

/// Runs the engine `runs` times and tallies end-of-day outcomes.
pub fn sampled_outcomes(params: &ModelParams, runs: u64, master: MasterSeed) -> BTreeMap<Outcome, u64> {
    let mut counts = BTreeMap::new();
    for run in 0..runs {
        let mut world = World::new(*params).expect("oracle instance parameters are valid");
        let mut rng = RandomStream::new(derive_run_seed(master, 0, run));
        let mut record = RunRecord::new(&world, RecordOptions::default());
        while !world.is_over() {
            world.advance_step(&mut rng);
            record.record_step(&world);
        }
        *counts
            .entry(Outcome {
                motivation: world.agents().iter().map(|a| a.motivation).collect(),
                cumulative: record.cumulative_sums().to_vec(),
            })
            .or_insert(0) += 1;
    }
    counts
}

/// One row of the exact-vs-sampled comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison<K> {
    pub key: K,
    pub exact: f64,
    pub sampled: f64,
    /// Binomial standard error of the sampled frequency under the exact law.
    pub stderr: f64,
}

impl<K> Comparison<K> {
    pub fn z(&self) -> f64 {
        let gap = (self.sampled - self.exact).abs();
        if self.stderr == 0.0 {
            if gap < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            gap / self.stderr
        }
    }
}

/// Compares exact probabilities against engine frequencies over `runs` runs,
/// grouped by a projection of the outcome (e.g. final motivations only).
pub fn compare_outcomes<K: Ord + Clone>(
    exact: &BTreeMap<Outcome, f64>,
    sampled: &BTreeMap<Outcome, u64>,
    runs: u64,
    project: impl Fn(&Outcome) -> K,
) -> Vec<Comparison<K>> {
    let mut table: BTreeMap<K, (f64, u64)> = BTreeMap::new();
    for (o, p) in exact {
        table.entry(project(o)).or_insert((0.0, 0)).0 += p;
    }
    for (o, c) in sampled {
        table.entry(project(o)).or_insert((0.0, 0)).1 += c;
    }
    let r = runs as f64;
    table
        .into_iter()
        .map(|(key, (p, c))| Comparison {
            key,
            exact: p,
            sampled: c as f64 / r,
            stderr: (p * (1.0 - p) / r).max(0.0).sqrt(),
        })
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct InvariantReport {
    pub configs: usize,
    pub steps: usize,
    pub violations: Vec<String>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the state invariants of `world` after a step, appending any
/// violations to `out`.
pub fn check_world(world: &World, out: &mut Vec<String>) {
    let p = world.params();
    let t = world.time();
    let n = p.n_agents as usize;
    let mut seen = vec![0u8; n];
    for (ci, c) in world.conversations().iter().enumerate() {
        let (a, b) = c.participants;
        if a == b {
            out.push(format!("t={t}: self-conversation of agent {a}"));
        }
        if c.remaining == 0 || c.remaining > p.max_duration {
            out.push(format!("t={t}: conversation {ci} has remaining {}", c.remaining));
        }
        for x in [a, b] {
            seen[x] += 1;
            if world.agents()[x].conversation.map(|id| id.0) != Some(ci) {
                out.push(format!("t={t}: agent {x} does not point back to conversation {ci}"));
            }
        }
    }
    for (k, agent) in world.agents().iter().enumerate() {
        if seen[k] > 1 {
            out.push(format!("t={t}: agent {k} in {} conversations", seen[k]));
        }
        if agent.is_talking() && seen[k] == 0 {
            out.push(format!(
                "t={t}: agent {k} points to a conversation that does not list it"
            ));
        }
        if agent.motivation < 1 || agent.motivation > p.motivation_cap {
            out.push(format!(
                "t={t}: agent {k} motivation {} out of bounds",
                agent.motivation
            ));
        }
        if agent.stereotype != p.stereotype_of(k) {
            out.push(format!("t={t}: agent {k} changed stereotype"));
        }
        let expected = if agent.is_talking() { 0 } else { agent.motivation - 1 };
        if t > 0 && world.productivity_now()[k] != expected {
            out.push(format!(
                "t={t}: agent {k} productivity {} but expected {expected}",
                world.productivity_now()[k]
            ));
        }
    }
}

/// Checks the observables of `record` right after minute `world.time()`.
pub fn check_record(world: &World, record: &RunRecord, previous: &[u64], out: &mut Vec<String>) {
    let p = world.params();
    let t = world.time();
    let obs = record.end();
    let (ne, ni, n) = (
        f64::from(p.n_extroverts),
        f64::from(p.n_introverts()),
        f64::from(p.n_agents),
    );
    let weighted = |e: Option<f64>, i: Option<f64>| (ne * e.unwrap_or(0.0) + ni * i.unwrap_or(0.0)) / n;
    for (whole, e, i, name) in [
        (Quantity::PiWhole, Quantity::PiExtrovert, Quantity::PiIntrovert, "pi"),
        (
            Quantity::LambdaWhole,
            Quantity::LambdaExtrovert,
            Quantity::LambdaIntrovert,
            "lambda",
        ),
    ] {
        let w = obs.get(whole).unwrap_or(f64::NAN);
        let expected = weighted(obs.get(e), obs.get(i));
        if (w - expected).abs() > 1e-9 * expected.abs().max(1.0) {
            out.push(format!("t={t}: {name}_w {w} != weighted mean {expected}"));
        }
        if (p.n_extroverts == 0) != obs.get(e).is_none() || (p.n_introverts() == 0) != obs.get(i).is_none() {
            out.push(format!("t={t}: {name} subgroup presence mismatch"));
        }
    }
    let cap = f64::from(p.motivation_cap);
    for q in [
        Quantity::LambdaExtrovert,
        Quantity::LambdaIntrovert,
        Quantity::LambdaWhole,
    ] {
        if let Some(v) = obs.get(q) {
            if !(1.0..=cap).contains(&v) {
                out.push(format!("t={t}: {} = {v} outside [1, {cap}]", q.column()));
            }
        }
    }
    for (k, (&now, &before)) in record.cumulative_sums().iter().zip(previous).enumerate() {
        if now < before {
            out.push(format!("t={t}: cumulative sum of agent {k} decreased"));
        }
        let pi = record.mean_cumulative_productivity(k);
        if (pi * f64::from(t) - now as f64).abs() > 1e-9 * (now as f64).max(1.0) {
            out.push(format!(
                "t={t}: pi_{k} * t = {} but cumulative = {now}",
                pi * f64::from(t)
            ));
        }
        if pi < 0.0 || pi > cap - 1.0 {
            out.push(format!("t={t}: pi_{k} = {pi} outside [0, L_max - 1]"));
        }
    }
}

/// Checks endpoint and monotonicity properties of the instigation probability.
pub fn check_instigation_probability(p: &ModelParams, out: &mut Vec<String>) {
    for s in Stereotype::ALL {
        let at_one = if p.threshold(s) >= 1.0 { 1.0 } else { 0.0 };
        if instigation_probability(s, 1, p) != at_one {
            out.push(format!("{}: p(L=1) != {at_one}", s.as_str()));
        }
        let mut last = f64::INFINITY;
        for level in 1..=p.motivation_cap {
            let v = instigation_probability(s, level, p);
            if !(0.0..=1.0).contains(&v) || v > last {
                out.push(format!(
                    "{}: p(L={level}) = {v} breaks monotonicity or range",
                    s.as_str()
                ));
            }
            if f64::from(level) > p.threshold(s) && v != 0.0 {
                out.push(format!("{}: p(L={level}) = {v} above threshold", s.as_str()));
            }
            if s == Stereotype::Extrovert && v < instigation_probability(Stereotype::Introvert, level, p) {
                out.push(format!("p_e < p_i at L={level}"));
            }
            last = v;
        }
    }
}

/// Random small configuration for invariant sweeps (`N <= 20`, `T <= 100`).
pub fn random_config(rng: &mut RandomStream) -> ModelParams {
    let n_agents = 1 + rng.below(20) as u32;
    let horizon = 1 + rng.below(100) as u32;
    let tau_extrovert = 1.0 + rng.next_f64();
    let contact_rate = if rng.below(5) == 0 { 0.0 } else { rng.next_f64() * 8.0 };
    ModelParams {
        n_agents,
        n_extroverts: rng.below(u64::from(n_agents) + 1) as u32,
        horizon,
        max_duration: 1 + rng.below(30) as u32,
        contact_rate,
        tau_extrovert,
        tau_introvert: tau_extrovert + rng.next_f64() * 9.0,
        motivation_cap: horizon,
    }
}

/// Steps `configs` random configurations to the end of their day, checking
/// every invariant after every minute.
pub fn invariant_sweep(configs: usize, master: MasterSeed) -> InvariantReport {
    let mut report = InvariantReport::default();
    let mut config_rng = RandomStream::new(derive_run_seed(master, u64::MAX, 0));
    for c in 0..configs {
        let params = random_config(&mut config_rng);
        let mut found = Vec::new();
        check_instigation_probability(&params, &mut found);
        let mut world = World::new(params).expect("random configs are valid");
        let mut rng = RandomStream::new(derive_run_seed(master, c as u64, 1));
        let mut record = RunRecord::new(
            &world,
            RecordOptions {
                series: false,
                trace: true,
            },
        );
        check_world(&world, &mut found);
        while !world.is_over() {
            let previous = record.cumulative_sums().to_vec();
            world.advance_step(&mut rng);
            record.record_step(&world);
            check_world(&world, &mut found);
            check_record(&world, &record, &previous, &mut found);
            report.steps += 1;
        }
        if let Some(traces) = record.trace() {
            for trace in traces {
                check_talking_intervals(trace, params.motivation_cap, &mut found);
            }
        }
        report.configs += 1;
        report
            .violations
            .extend(found.into_iter().map(|v| format!("config {c} {params:?}: {v}")));
    }
    report
}

/// Within every maximal run of minutes spent talking, `pi` never increases
/// and `L` strictly increases.
pub fn check_talking_intervals(trace: &AgentTrace, cap: u32, out: &mut Vec<String>) {
    for pair in trace.samples.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if !(prev.talking && cur.talking) {
            continue;
        }
        if cur.pi > prev.pi {
            out.push(format!("agent {} pi rose while talking at t={}", trace.id, cur.t));
        }
        if cur.motivation <= prev.motivation && cur.motivation < cap {
            out.push(format!(
                "agent {} L did not rise while talking at t={}",
                trace.id, cur.t
            ));
        }
    }
}

/// Verdict line for the `validate` report.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// The oracle instances used by the `validate` command: two agents, five
/// minutes, one-minute conversations.
pub fn oracle_instances() -> Vec<ModelParams> {
    [(2u32, 1.0f64), (1, 0.7), (0, 3.0)]
        .into_iter()
        .map(|(ne, q)| {
            ModelParams {
                n_agents: 2,
                n_extroverts: ne,
                max_duration: 1,
                contact_rate: q,
                ..ModelParams::default()
            }
            .with_horizon(5)
        })
        .collect()
}

/// Exact vs Monte Carlo on final motivations; passes when every outcome is
/// within `sigmas` standard errors.
pub fn oracle_check(params: &ModelParams, runs: u64, master: MasterSeed, sigmas: f64) -> Check {
    let exact = exact_outcomes(params);
    let sampled = sampled_outcomes(params, runs, master);
    let rows = compare_outcomes(&exact, &sampled, runs, |o| o.motivation.clone());
    let worst = rows.iter().map(Comparison::z).fold(0.0f64, f64::max);
    let mut detail = String::new();
    let _ = write!(
        detail,
        "N^e={} q={}: {} outcomes, worst |z| = {worst:.2}",
        params.n_extroverts,
        params.contact_rate,
        rows.len()
    );
    Check {
        name: "small-instance oracle",
        passed: worst <= sigmas,
        detail,
    }
}

/// `q = 0` keeps everybody at `L = 1` with zero productivity.
pub fn null_interaction_check(master: MasterSeed) -> Check {
    let mut bad = Vec::new();
    for n in [1u32, 2, 5] {
        for ne in 0..=n {
            let params = ModelParams {
                n_agents: n,
                n_extroverts: ne,
                contact_rate: 0.0,
                ..ModelParams::default()
            };
            let rec = run_day(
                &params,
                derive_run_seed(master, u64::from(n), u64::from(ne)),
                RecordOptions::default(),
            )
            .expect("valid");
            if rec.cumulative_sums().iter().any(|&c| c != 0) || rec.end().get(Quantity::LambdaWhole) != Some(1.0) {
                bad.push(format!("N={n} N^e={ne}"));
            }
        }
    }
    Check {
        name: "null interaction",
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            "N in {1,2,5}, every N^e".into()
        } else {
            bad.join(", ")
        },
    }
}

/// Runs the bundled check suite, writing one line per check.
pub fn run_suite(master: MasterSeed, out: &mut impl Write) -> io::Result<bool> {
    let mut checks = vec![null_interaction_check(master)];
    let inv = invariant_sweep(100, master);
    checks.push(Check {
        name: "invariants",
        passed: inv.passed(),
        detail: format!(
            "{} configs, {} steps, {} violations{}",
            inv.configs,
            inv.steps,
            inv.violations.len(),
            inv.violations
                .first()
                .map(|v| format!(" (first: {v})"))
                .unwrap_or_default()
        ),
    });
    for params in oracle_instances() {
        checks.push(oracle_check(&params, 100_000, master, 3.0));
    }
    let p = ModelParams::default();
    let a = run_day(
        &p,
        derive_run_seed(master, 1, 2),
        RecordOptions {
            series: true,
            trace: true,
        },
    )
    .expect("valid");
    let b = run_day(
        &p,
        derive_run_seed(master, 1, 2),
        RecordOptions {
            series: true,
            trace: true,
        },
    )
    .expect("valid");
    checks.push(Check {
        name: "determinism",
        passed: a == b,
        detail: "repeated run_day with one seed".into(),
    });

    let mut all = true;
    for c in &checks {
        all &= c.passed;
        writeln!(
            out,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        )?;
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_complete() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        let mut sorted = p.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 6);
    }

    #[test]
    fn exact_distribution_sums_to_one() {
        for params in oracle_instances() {
            let total: f64 = exact_outcomes(&params).values().sum();
            assert!((total - 1.0).abs() < 1e-12, "{total}");
        }
    }

    #[test]
    fn exact_null_interaction_is_a_point_mass() {
        let params = ModelParams {
            n_agents: 3,
            n_extroverts: 1,
            contact_rate: 0.0,
            ..ModelParams::default()
        }
        .with_horizon(4);
        let exact = exact_outcomes(&params);
        assert_eq!(exact.len(), 1);
        let (o, p) = exact.iter().next().unwrap();
        assert_eq!(o.motivation, vec![1, 1, 1]);
        assert_eq!(o.cumulative, vec![0, 0, 0]);
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_one_minute_two_extroverts() {
        // T = 1, both thresholds at 1: whoever moves first instigates with
        // certainty and succeeds iff m >= 1, and the partner then gains a
        // level. If the first attempt fails, the second agent's own success
        // leaves both at L = 1.
        let q: f64 = 0.7;
        let params = ModelParams {
            n_agents: 2,
            n_extroverts: 2,
            max_duration: 1,
            contact_rate: q,
            horizon: 1,
            ..ModelParams::default()
        };
        let exact = exact_outcomes(&params);
        let miss = (-q).exp();
        // success on the first agent's attempt, or first misses and second hits
        let pair = 1.0 - miss;
        let talked_up: f64 = exact
            .iter()
            .filter(|(o, _)| o.motivation.contains(&2))
            .map(|(_, p)| p)
            .sum();
        assert!((talked_up - pair).abs() < 1e-12);
        let late: f64 = exact
            .iter()
            .filter(|(o, _)| o.motivation == vec![1, 1])
            .map(|(_, p)| p)
            .sum();
        assert!((late - miss).abs() < 1e-12, "{late} vs {miss}");
    }

    #[test]
    fn small_invariant_sweep_is_clean() {
        let report = invariant_sweep(15, MasterSeed(5));
        assert_eq!(report.configs, 15);
        assert!(report.passed(), "{:?}", report.violations.first());
    }

    #[test]
    fn oracle_agrees_on_small_sample() {
        let params = &oracle_instances()[0];
        assert!(oracle_check(params, 20_000, MasterSeed(2), 4.0).passed);
    }
}
