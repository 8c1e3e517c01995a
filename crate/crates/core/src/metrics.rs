//! Per-run observables and ensemble aggregation.
//!
//! The mean cumulative productivity of agent `k` at minute `t >= 1` is
//! `pi_k(t) = (1/t) * sum_{t'=0..=t} P_k(t')` with `P_k(0) = 0`. Stereotype
//! means average `pi_k` (or the motivation `L_k`) over the agents of that
//! stereotype; the whole-group value is the size-weighted mean of the two.
//! A stereotype with no members has no mean, which is reported as `None`.

use crate::engine::{AgentId, ModelParams, Stereotype, World};
use crate::error::MetricsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    PiExtrovert,
    PiIntrovert,
    PiWhole,
    LambdaExtrovert,
    LambdaIntrovert,
    LambdaWhole,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::PiExtrovert,
        Quantity::PiIntrovert,
        Quantity::PiWhole,
        Quantity::LambdaExtrovert,
        Quantity::LambdaIntrovert,
        Quantity::LambdaWhole,
    ];

    /// Column stem used by the CSV writers.
    pub fn column(self) -> &'static str {
        match self {
            Quantity::PiExtrovert => "pi_e",
            Quantity::PiIntrovert => "pi_i",
            Quantity::PiWhole => "pi_w",
            Quantity::LambdaExtrovert => "lambda_e",
            Quantity::LambdaIntrovert => "lambda_i",
            Quantity::LambdaWhole => "lambda_w",
        }
    }
}

/// The six group-level observables at one minute.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Observables(pub [Option<f64>; 6]);

impl Observables {
    pub fn get(&self, q: Quantity) -> Option<f64> {
        self.0[q as usize]
    }

    pub fn pi(&self, s: Option<Stereotype>) -> Option<f64> {
        match s {
            Some(Stereotype::Extrovert) => self.get(Quantity::PiExtrovert),
            Some(Stereotype::Introvert) => self.get(Quantity::PiIntrovert),
            None => self.get(Quantity::PiWhole),
        }
    }

    pub fn lambda(&self, s: Option<Stereotype>) -> Option<f64> {
        match s {
            Some(Stereotype::Extrovert) => self.get(Quantity::LambdaExtrovert),
            Some(Stereotype::Introvert) => self.get(Quantity::LambdaIntrovert),
            None => self.get(Quantity::LambdaWhole),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RecordOptions {
    /// Keep the per-minute group observables.
    pub series: bool,
    /// Keep full trajectories of the first extrovert and the first introvert.
    pub trace: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSample {
    pub t: u32,
    pub motivation: u32,
    pub pi: f64,
    /// In a conversation at the end of minute `t`.
    pub talking: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentTrace {
    pub id: AgentId,
    pub stereotype: Stereotype,
    /// One sample per minute, `t = 0..=T`.
    pub samples: Vec<TraceSample>,
}

/// Everything kept from one simulated workday.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    params: ModelParams,
    time: u32,
    cumulative: Vec<u64>,
    current: Observables,
    series: Option<Vec<Observables>>,
    trace: Option<Vec<AgentTrace>>,
}

impl RunRecord {
    /// Empty record positioned at `t = 0` of `world`.
    pub fn new(world: &World, options: RecordOptions) -> Self {
        let params = *world.params();
        let n = params.n_agents as usize;
        let mut record = Self {
            params,
            time: world.time(),
            cumulative: vec![0; n],
            current: Observables::default(),
            series: options.series.then(|| Vec::with_capacity(params.horizon as usize)),
            trace: None,
        };
        record.current = record.observe(world);
        if options.trace {
            let first_of = |s: Stereotype| (0..n).find(|&k| params.stereotype_of(k) == s);
            let traces = Stereotype::ALL
                .into_iter()
                .filter_map(first_of)
                .map(|id| AgentTrace {
                    id,
                    stereotype: params.stereotype_of(id),
                    samples: Vec::with_capacity(params.horizon as usize + 1),
                })
                .collect();
            record.trace = Some(traces);
            record.push_trace(world);
        }
        record
    }

    /// Accumulates minute `world.time()`, which must be the minute right after
    /// the last recorded one.
    pub fn record_step(&mut self, world: &World) {
        let t = world.time();
        assert!(t >= 1 && t == self.time + 1, "record_step out of order at t={t}");
        self.time = t;
        for (sum, &p) in self.cumulative.iter_mut().zip(world.productivity_now()) {
            *sum += u64::from(p);
        }
        self.current = self.observe(world);
        if let Some(series) = &mut self.series {
            series.push(self.current);
        }
        if self.trace.is_some() {
            self.push_trace(world);
        }
    }

    fn observe(&self, world: &World) -> Observables {
        let ne = self.params.n_extroverts as usize;
        let n = self.params.n_agents as usize;
        let agents = world.agents();
        let cum_e: u64 = self.cumulative[..ne].iter().sum();
        let cum_i: u64 = self.cumulative[ne..].iter().sum();
        let lev_e: u64 = agents[..ne].iter().map(|a| u64::from(a.motivation)).sum();
        let lev_i: u64 = agents[ne..].iter().map(|a| u64::from(a.motivation)).sum();
        let t = f64::from(self.time);
        let pi = |cum: u64, size: usize| {
            if self.time == 0 {
                0.0
            } else {
                cum as f64 / (t * size as f64)
            }
        };
        let subgroup = |size: usize, f: &dyn Fn(usize) -> f64| (size > 0).then(|| f(size));
        let ni = n - ne;
        Observables([
            subgroup(ne, &|s| pi(cum_e, s)),
            subgroup(ni, &|s| pi(cum_i, s)),
            Some(pi(cum_e + cum_i, n)),
            subgroup(ne, &|s| lev_e as f64 / s as f64),
            subgroup(ni, &|s| lev_i as f64 / s as f64),
            Some((lev_e + lev_i) as f64 / n as f64),
        ])
    }

    fn push_trace(&mut self, world: &World) {
        let t = self.time;
        let Some(traces) = &mut self.trace else { return };
        for trace in traces {
            let pi = if t == 0 {
                0.0
            } else {
                self.cumulative[trace.id] as f64 / f64::from(t)
            };
            trace.samples.push(TraceSample {
                t,
                motivation: world.agents()[trace.id].motivation,
                pi,
                talking: world.is_talking(trace.id),
            });
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Last recorded minute.
    pub fn time(&self) -> u32 {
        self.time
    }

    /// Observables at the last recorded minute (end of day once complete).
    pub fn end(&self) -> &Observables {
        &self.current
    }

    pub fn series(&self) -> Option<&[Observables]> {
        self.series.as_deref()
    }

    pub fn trace(&self) -> Option<&[AgentTrace]> {
        self.trace.as_deref()
    }

    /// Integer productivity-minutes accumulated by each agent.
    pub fn cumulative_sums(&self) -> &[u64] {
        &self.cumulative
    }

    /// `pi_k` at the last recorded minute.
    pub fn mean_cumulative_productivity(&self, id: AgentId) -> f64 {
        if self.time == 0 {
            0.0
        } else {
            self.cumulative[id] as f64 / f64::from(self.time)
        }
    }
}

/// Mean and standard error of one observable over an ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation (n - 1) over `sqrt(n)`; 0 for a single run.
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleStats {
    pub params: ModelParams,
    pub n_runs: usize,
    pub end: [Option<Estimate>; 6],
    /// Per-minute ensemble means, when every run kept its series.
    pub mean_series: Option<Vec<Observables>>,
}

impl EnsembleStats {
    pub fn get(&self, q: Quantity) -> Option<Estimate> {
        self.end[q as usize]
    }

    /// With a single run the standard errors are reported as 0 but carry no
    /// information.
    pub fn stderr_is_degenerate(&self) -> bool {
        self.n_runs < 2
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

fn estimate(values: &[f64]) -> Estimate {
    let n = values.len() as f64;
    // shifted by the first value so that identical inputs give exact results
    let origin = values[0];
    let mean = origin + compensated_sum(values.iter().map(|v| v - origin)) / n;
    let stderr = if values.len() < 2 {
        0.0
    } else {
        let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        (ss / (n - 1.0)).sqrt() / n.sqrt()
    };
    Estimate { mean, stderr }
}

/// Ensemble mean and standard error of every end-of-day observable.
pub fn aggregate(records: &[RunRecord]) -> Result<EnsembleStats, MetricsError> {
    let first = records.first().ok_or(MetricsError::NoRuns)?;
    if let Some(index) = records
        .iter()
        .position(|r| r.params != first.params || r.time != first.time)
    {
        return Err(MetricsError::MixedParams { index });
    }
    let mut values = Vec::with_capacity(records.len());
    let mut end = [None; 6];
    for q in Quantity::ALL {
        if first.end().get(q).is_none() {
            continue;
        }
        values.clear();
        values.extend(records.iter().filter_map(|r| r.end().get(q)));
        end[q as usize] = Some(estimate(&values));
    }

    let mean_series = if records.iter().all(|r| r.series.is_some()) {
        let len = first.series().map_or(0, <[_]>::len);
        let n = records.len() as f64;
        let per_minute = (0..len)
            .map(|t| {
                let mut obs = [None; 6];
                for q in Quantity::ALL {
                    if first.series().unwrap()[t].get(q).is_some() {
                        let sum = compensated_sum(records.iter().filter_map(|r| r.series().unwrap()[t].get(q)));
                        obs[q as usize] = Some(sum / n);
                    }
                }
                Observables(obs)
            })
            .collect();
        Some(per_minute)
    } else {
        None
    };

    Ok(EnsembleStats {
        params: first.params,
        n_runs: records.len(),
        end,
        mean_series,
    })
}
