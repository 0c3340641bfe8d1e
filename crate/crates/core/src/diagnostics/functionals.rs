//! Time series of `V`, `Q`, `V_h`, `Q_h` and `Υ_h` over a run.

use std::fmt::Write as _;

use super::glimm::glimm;
use crate::log::{EventKind, Solver, TrajectoryLog};

/// Default weight of `Q_h` in `Υ_h`.
pub const DEFAULT_C0: f64 = 10.0;
/// Small-data budget on `V + C₀ Q` at `t = 0`; exceeding it only warns.
pub const DEFAULT_GAMMA: f64 = 0.3;
/// Changes of `V` below this are solver noise: fan states are accepted at
/// residuals up to `1e-9`, and rebuilding them from strengths in the
/// simplified solver moves `V` by up to that much.
pub const V_RESOLUTION: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stage {
    Initial,
    Before(usize),
    After(usize),
    Final,
}

impl Stage {
    fn label(&self) -> String {
        match self {
            Stage::Initial => "initial".into(),
            Stage::Before(k) => format!("before:{}", k),
            Stage::After(k) => format!("after:{}", k),
            Stage::Final => "final".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSample {
    pub t: f64,
    pub stage: Stage,
    pub v: f64,
    pub v_physical: f64,
    pub q: f64,
    pub v_h: f64,
    pub q_h: f64,
    pub upsilon_h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSeries {
    pub c0: f64,
    pub omega_mass: f64,
    pub samples: Vec<FunctionalSample>,
    /// `ΔQ_h` per event.
    pub event_dq: Vec<f64>,
    /// Accurate physical–physical events where `Q_h` increased.
    pub increasing: Vec<usize>,
    /// `V + C₀ Q` at `t = 0`.
    pub budget: f64,
    pub budget_exceeded: bool,
}

/// Evaluates the functionals at `t = 0`, on both sides of every event and at
/// `t_end`.
pub fn functionals(log: &TrajectoryLog, c0: f64) -> FunctionalSeries {
    let (n, p) = (log.header.n, log.header.p);
    let omega_mass = log.header.omega_mass;
    let mut replay = log.replay();
    let mut samples = Vec::with_capacity(2 * log.events.len() + 2);
    let sample = |t: f64, stage: Stage, fronts: &mut dyn Iterator<Item = &crate::log::Front>| {
        let g = glimm(fronts, n, p);
        let v_h = g.v_physical + g.v_nonphysical + omega_mass;
        FunctionalSample {
            t,
            stage,
            v: g.v,
            v_physical: g.v_physical,
            q: g.q,
            v_h,
            q_h: g.q_h,
            upsilon_h: v_h + c0 * g.q_h,
        }
    };
    samples.push(sample(0.0, Stage::Initial, &mut replay.fronts()));
    let mut event_dq = Vec::with_capacity(log.events.len());
    let mut increasing = Vec::new();
    while let Some(ev) = replay.peek() {
        let k = replay.cursor();
        let before = sample(ev.time, Stage::Before(k), &mut replay.fronts());
        replay.apply_next();
        let after = sample(ev.time, Stage::After(k), &mut replay.fronts());
        let dq = after.q_h - before.q_h;
        if ev.kind == EventKind::Physical
            && ev.solver == Solver::Accurate
            && dq > 1e-12 * before.q_h.max(1.0)
        {
            increasing.push(k);
        }
        event_dq.push(dq);
        samples.push(before);
        samples.push(after);
    }
    samples.push(sample(log.header.t_end, Stage::Final, &mut replay.fronts()));
    let budget = samples[0].v + c0 * samples[0].q;
    FunctionalSeries {
        c0,
        omega_mass,
        samples,
        event_dq,
        increasing,
        budget,
        budget_exceeded: budget > DEFAULT_GAMMA,
    }
}

impl FunctionalSeries {
    /// Largest relative violation of `Q ≤ Q_h ≤ Q + ‖ω‖ V` over the samples
    /// (zero when it holds).
    pub fn ordering_violation(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| {
                let upper = s.q + self.omega_mass * s.v;
                let scale = upper.abs().max(1e-300);
                ((s.q - s.q_h).max(0.0) + (s.q_h - upper).max(0.0)) / scale
            })
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,stage,V,V_physical,Q,V_h,Q_h,Upsilon_h\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.t,
                s.stage.label(),
                s.v,
                s.v_physical,
                s.q,
                s.v_h,
                s.q_h,
                s.upsilon_h
            );
        }
        out
    }
}

/// Smallest `C` with `ΔV ≤ C |ΔQ_h|` over the physical–physical events of
/// all logs, skipping changes below `V_RESOLUTION`; infinite if `V` grows
/// at an event that leaves `Q_h` unchanged.
pub fn fit_interaction_constant<'a>(logs: impl IntoIterator<Item = &'a TrajectoryLog>) -> f64 {
    let mut c = 0.0_f64;
    for log in logs {
        for ev in log.events.iter().filter(|e| e.kind == EventKind::Physical) {
            if ev.dv <= V_RESOLUTION {
                continue;
            }
            c = c.max(if ev.dq == 0.0 { f64::INFINITY } else { ev.dv / ev.dq.abs() });
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile;
    use crate::tracker::{run, TrackerConfig};
    use crate::{SourceSpec, SystemSpec};

    #[test]
    fn merging_shocks_reduce_q() {
        let sys = SystemSpec::burgers();
        let u0 = Profile::Staircase {
            breaks: vec![-0.5, 0.0],
            values: vec![vec![1.4], vec![1.2], vec![0.9]],
        };
        let log = run(&sys, &SourceSpec::none(), &TrackerConfig::new(1e-6, 0.1, 0.05, 3.0), &u0).unwrap();
        let series = functionals(&log, DEFAULT_C0);
        assert_eq!(log.events.len(), 1);
        assert!((series.samples[0].q - 0.2 * 0.3).abs() < 1e-12);
        assert_eq!(series.samples.last().unwrap().q, 0.0);
        assert!(series.increasing.is_empty());
        assert_eq!(series.ordering_violation(), 0.0);
        assert!(fit_interaction_constant([&log]) < 1e-12);
        let csv = series.to_csv();
        assert_eq!(csv.lines().count(), 1 + series.samples.len());
    }

    #[test]
    fn empty_log_has_zero_functionals() {
        let sys = SystemSpec::burgers();
        let log = run(&sys, &SourceSpec::none(), &TrackerConfig::new(1e-6, 0.1, 0.05, 1.0), &Profile::Constant(vec![1.0])).unwrap();
        let s = functionals(&log, DEFAULT_C0);
        assert!(s.samples.iter().all(|x| x.v == 0.0 && x.q == 0.0));
    }
}
