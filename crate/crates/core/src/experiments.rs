//! Parameter sweeps and the figure presets.
//!
//! Every grid point gets a key derived from its realized parameters, and each
//! run's seed is derived from `(master seed, point key, run index)`. Results
//! therefore do not depend on grid order or on how runs are spread over
//! worker threads.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::engine::{run_day, ModelParams};
use crate::error::SweepError;
use crate::metrics::{aggregate, AgentTrace, EnsembleStats, RecordOptions};
use crate::stochastics::{derive_run_seed, mix64, MasterSeed};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub eta_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    /// Conversation length variants; `None` keeps `base.max_duration`.
    pub d_grid: Option<Vec<u32>>,
    pub runs_per_point: u32,
    pub master_seed: MasterSeed,
    pub retain_series: bool,
    /// Keep the first extrovert/introvert trajectories of run 0 at each point.
    pub trace_agents: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            base: ModelParams::default(),
            eta_grid: vec![0.5],
            q_grid: vec![2.0],
            d_grid: None,
            runs_per_point: 1000,
            master_seed: MasterSeed::default(),
            retain_series: false,
            trace_agents: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridPoint {
    pub requested_eta: f64,
    pub params: ModelParams,
}

impl GridPoint {
    pub fn realized_eta(&self) -> f64 {
        self.params.eta()
    }

    /// Seed-derivation key; a function of the realized parameters only.
    pub fn key(&self) -> u64 {
        let p = &self.params;
        [
            u64::from(p.n_agents),
            u64::from(p.n_extroverts),
            u64::from(p.horizon),
            u64::from(p.max_duration),
            p.contact_rate.to_bits(),
            p.tau_extrovert.to_bits(),
            p.tau_introvert.to_bits(),
            u64::from(p.motivation_cap),
        ]
        .into_iter()
        .fold(0x6A09_E667_F3BC_C908, |h, v| mix64(h ^ v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub point: GridPoint,
    pub stats: EnsembleStats,
    pub traces: Option<Vec<AgentTrace>>,
    pub wall_clock: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub points: Vec<PointResult>,
}

impl SweepResult {
    pub fn find(&self, eta: f64, q: f64, max_duration: u32) -> Option<&PointResult> {
        self.points.iter().find(|r| {
            (r.point.requested_eta - eta).abs() < 1e-9
                && (r.point.params.contact_rate - q).abs() < 1e-9
                && r.point.params.max_duration == max_duration
        })
    }

    /// Points sorted by `(D, q, realized eta)`.
    pub fn sorted(&self) -> Vec<&PointResult> {
        let mut rows: Vec<&PointResult> = self.points.iter().collect();
        rows.sort_by(|a, b| {
            let (pa, pb) = (&a.point.params, &b.point.params);
            pa.max_duration
                .cmp(&pb.max_duration)
                .then(pa.contact_rate.total_cmp(&pb.contact_rate))
                .then(a.point.realized_eta().total_cmp(&b.point.realized_eta()))
        });
        rows
    }
}

impl SweepSpec {
    /// Expands the grids, validating every point.
    pub fn points(&self) -> Result<Vec<GridPoint>, SweepError> {
        if self.eta_grid.is_empty() {
            return Err(SweepError::EmptyGrid("eta"));
        }
        if self.q_grid.is_empty() {
            return Err(SweepError::EmptyGrid("q"));
        }
        let d_grid = self.d_grid.clone().unwrap_or_else(|| vec![self.base.max_duration]);
        if d_grid.is_empty() {
            return Err(SweepError::EmptyGrid("D"));
        }
        let mut points = Vec::with_capacity(d_grid.len() * self.q_grid.len() * self.eta_grid.len());
        for &max_duration in &d_grid {
            for &q in &self.q_grid {
                for &eta in &self.eta_grid {
                    let wrap = |source| SweepError::Point {
                        eta,
                        q,
                        max_duration,
                        source,
                    };
                    let params = ModelParams {
                        max_duration,
                        contact_rate: q,
                        ..self.base
                    }
                    .with_eta(eta)
                    .map_err(wrap)?;
                    params.validate().map_err(wrap)?;
                    points.push(GridPoint {
                        requested_eta: eta,
                        params,
                    });
                }
            }
        }
        Ok(points)
    }
}

/// Runs `R` workdays per grid point. `workers = 0` uses every available core.
/// The output is identical for any worker count.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult, SweepError> {
    if spec.runs_per_point == 0 {
        return Err(SweepError::NoRuns);
    }
    let points = spec.points()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let options = RecordOptions {
        series: spec.retain_series,
        trace: false,
    };
    pool.install(|| {
        points
            .iter()
            .map(|point| {
                let started = Instant::now();
                let key = point.key();
                let seed_of = |run: u32| derive_run_seed(spec.master_seed, key, u64::from(run));
                let records = (0..spec.runs_per_point)
                    .into_par_iter()
                    .map(|run| {
                        let opts = RecordOptions {
                            trace: spec.trace_agents && run == 0,
                            ..options
                        };
                        run_day(&point.params, seed_of(run), opts)
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|source| SweepError::Point {
                        eta: point.requested_eta,
                        q: point.params.contact_rate,
                        max_duration: point.params.max_duration,
                        source,
                    })?;
                let stats = aggregate(&records)?;
                let traces = records[0].trace().map(<[_]>::to_vec);
                Ok(PointResult {
                    point: *point,
                    stats,
                    traces,
                    wall_clock: started.elapsed(),
                })
            })
            .collect::<Result<Vec<_>, SweepError>>()
            .map(|points| SweepResult { points })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    LongTalks,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig1,
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig4,
        Preset::Fig5,
        Preset::LongTalks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::LongTalks => "long_talks",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SweepError::UnknownPreset(s.to_string()))
    }
}

/// `0, 0.05, ..., 1`.
pub fn eta_grid() -> Vec<f64> {
    (0..=20).map(|k| f64::from(k) / 20.0).collect()
}

pub const FIG4_Q_GRID: [f64; 9] = [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];
pub const FIG4_ETA_GRID: [f64; 7] = [0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.95];
pub const FIG5_Q_GRID: [f64; 10] = [0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];

/// Sweep definition of a figure reproduction, seeded with `MasterSeed(0)`.
pub fn preset(which: Preset) -> SweepSpec {
    let base = SweepSpec::default();
    match which {
        Preset::Fig1 => SweepSpec {
            eta_grid: vec![0.5],
            q_grid: vec![2.0],
            runs_per_point: 1,
            retain_series: true,
            trace_agents: true,
            ..base
        },
        Preset::Fig2 => SweepSpec {
            eta_grid: eta_grid(),
            q_grid: vec![2.0],
            ..base
        },
        Preset::Fig3 => SweepSpec {
            eta_grid: eta_grid(),
            q_grid: vec![0.5, 1.0, 2.0, 4.0, 1000.0],
            ..base
        },
        Preset::Fig4 => SweepSpec {
            eta_grid: FIG4_ETA_GRID.to_vec(),
            q_grid: FIG4_Q_GRID.to_vec(),
            ..base
        },
        Preset::Fig5 => SweepSpec {
            eta_grid: vec![0.5],
            q_grid: FIG5_Q_GRID.to_vec(),
            ..base
        },
        Preset::LongTalks => SweepSpec {
            eta_grid: eta_grid(),
            q_grid: vec![0.5, 1.0, 2.0, 4.0],
            d_grid: Some(vec![60]),
            ..base
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Quantity;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            base: ModelParams {
                n_agents: 20,
                ..ModelParams::default()
            }
            .with_horizon(100),
            eta_grid: vec![0.0, 0.5, 1.0],
            q_grid: vec![0.5, 2.0],
            runs_per_point: 16,
            master_seed: MasterSeed(9),
            ..SweepSpec::default()
        }
    }

    #[test]
    fn presets_have_the_documented_grids() {
        let fig1 = preset(Preset::Fig1);
        assert_eq!(fig1.runs_per_point, 1);
        assert!(fig1.retain_series && fig1.trace_agents);
        assert!(preset(Preset::Fig3).q_grid.contains(&1000.0));
        assert_eq!(preset(Preset::LongTalks).d_grid, Some(vec![60]));
        assert_eq!(preset(Preset::Fig2).eta_grid.len(), 21);
        assert_eq!(preset(Preset::Fig2).runs_per_point, 1000);
        let fig4 = preset(Preset::Fig4);
        for eta in [0.5, 0.6, 0.7, 0.8, 0.9, 0.85, 0.95] {
            assert!(fig4.eta_grid.contains(&eta));
        }
        assert!(fig4.q_grid.contains(&1.0) && fig4.q_grid.contains(&6.0));
        assert!(preset(Preset::Fig5).q_grid.contains(&0.1));
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            assert!(preset(p).points().is_ok());
        }
        assert!("fig9".parse::<Preset>().is_err());
    }

    #[test]
    fn realized_eta_is_reported() {
        let spec = SweepSpec {
            base: ModelParams {
                n_agents: 5,
                ..ModelParams::default()
            },
            eta_grid: vec![0.5],
            ..SweepSpec::default()
        };
        let points = spec.points().unwrap();
        assert_eq!(points[0].params.n_extroverts, 2);
        assert!((points[0].realized_eta() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn invalid_point_is_identified() {
        let spec = SweepSpec {
            eta_grid: vec![0.5, 1.5],
            ..small_spec()
        };
        match run_sweep(&spec, 1) {
            Err(SweepError::Point { eta, .. }) => assert_eq!(eta, 1.5),
            other => panic!("unexpected {other:?}"),
        }
        let spec = SweepSpec {
            q_grid: vec![],
            ..small_spec()
        };
        assert!(matches!(run_sweep(&spec, 1), Err(SweepError::EmptyGrid("q"))));
    }

    #[test]
    fn null_interaction_points_are_zero() {
        let spec = SweepSpec {
            eta_grid: vec![0.0, 1.0],
            q_grid: vec![0.0],
            ..small_spec()
        };
        let result = run_sweep(&spec, 2).unwrap();
        assert_eq!(result.points.len(), 2);
        for r in &result.points {
            assert_eq!(r.stats.get(Quantity::PiWhole).unwrap().mean, 0.0);
            assert_eq!(r.stats.get(Quantity::LambdaWhole).unwrap().mean, 1.0);
        }
    }

    #[test]
    fn worker_count_and_grid_order_do_not_matter() {
        let spec = small_spec();
        let one = run_sweep(&spec, 1).unwrap();
        let four = run_sweep(&spec, 4).unwrap();
        let mut reordered = spec.clone();
        reordered.eta_grid.reverse();
        reordered.q_grid.reverse();
        let other = run_sweep(&reordered, 3).unwrap();
        for (a, b) in one.points.iter().zip(&four.points) {
            assert_eq!(a.stats, b.stats);
        }
        for a in &one.points {
            let b = other
                .find(
                    a.point.requested_eta,
                    a.point.params.contact_rate,
                    a.point.params.max_duration,
                )
                .unwrap();
            assert_eq!(a.stats, b.stats);
        }
    }

    #[test]
    fn sorted_orders_by_d_then_q_then_eta() {
        let spec = SweepSpec {
            d_grid: Some(vec![60, 20]),
            runs_per_point: 2,
            ..small_spec()
        };
        let result = run_sweep(&spec, 1).unwrap();
        let keys: Vec<(u32, f64, f64)> = result
            .sorted()
            .iter()
            .map(|r| {
                (
                    r.point.params.max_duration,
                    r.point.params.contact_rate,
                    r.point.realized_eta(),
                )
            })
            .collect();
        let mut expected = keys.clone();
        expected.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        assert_eq!(keys, expected);
        assert_eq!(keys[0].0, 20);
    }

    #[test]
    fn traces_kept_only_when_requested() {
        let spec = SweepSpec {
            trace_agents: true,
            ..small_spec()
        };
        let result = run_sweep(&spec, 1).unwrap();
        let mid = result.find(0.5, 2.0, 20).unwrap();
        let traces = mid.traces.as_ref().unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces[0].samples.len(), 101);
        assert!(run_sweep(&small_spec(), 1).unwrap().points[0].traces.is_none());
    }
}
