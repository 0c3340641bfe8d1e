//! Decay report for positive waves of a genuinely nonlinear family.

use std::fmt;

use super::glimm::glimm;
use super::measure::{IntervalSet, WaveMeasureSlice};
use crate::error::{Error, Result};
use crate::log::TrajectoryLog;

#[derive(Clone, Debug, PartialEq)]
pub struct OleinikReport {
    pub family: usize,
    pub s: f64,
    pub t: f64,
    pub intervals: Vec<(f64, f64)>,
    /// `μ^{i+}_t(J)`.
    pub lhs: f64,
    /// `meas(J) / (t - s)`.
    pub measure_term: f64,
    /// `Q_h(s) - Q_h(t)`.
    pub interaction_term: f64,
    /// `V(u0) ‖ω‖_{L¹}`.
    pub source_term: f64,
    /// Smallest `C` with `lhs <= C (sum of the terms)`.
    pub c_emp: f64,
}

impl OleinikReport {
    pub fn rhs_sum(&self) -> f64 {
        self.measure_term + self.interaction_term + self.source_term
    }
}

impl fmt::Display for OleinikReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j: Vec<String> = self.intervals.iter().map(|(a, b)| format!("[{},{})", a, b)).collect();
        writeln!(f, "family = {}", self.family)?;
        writeln!(f, "s = {}", self.s)?;
        writeln!(f, "t = {}", self.t)?;
        writeln!(f, "J = {}", j.join(" "))?;
        writeln!(f, "lhs = {}", self.lhs)?;
        writeln!(f, "measure_term = {}", self.measure_term)?;
        writeln!(f, "interaction_term = {}", self.interaction_term)?;
        writeln!(f, "source_term = {}", self.source_term)?;
        writeln!(f, "c_emp = {}", self.c_emp)
    }
}

/// Compares `μ^{i+}_t(J)` with `meas(J)/(t-s) + Q_h(s) - Q_h(t) + V(u0)‖ω‖`.
pub fn oleinik_report(log: &TrajectoryLog, i: usize, j: &IntervalSet, s: f64, t: f64) -> Result<OleinikReport> {
    if !(0.0 <= s && s < t && t <= log.header.t_end) {
        return Err(Error::InvalidInput(format!(
            "need 0 <= s < t <= {}, got s = {}, t = {}",
            log.header.t_end, s, t
        )));
    }
    if i == 0 || i > log.header.n {
        return Err(Error::InvalidInput(format!("family {} out of range", i)));
    }
    let (n, p) = (log.header.n, log.header.p);
    let at_t = log.fronts_at(t);
    let lhs = WaveMeasureSlice::from_fronts(&at_t, t, n).positive(i, j);
    let q_t = glimm(at_t.iter().copied(), n, p).q_h;
    let q_s = glimm(log.fronts_at(s), n, p).q_h;
    let measure_term = j.measure() / (t - s);
    let interaction_term = q_s - q_t;
    let source_term = log.header.v_initial * log.header.omega_mass;
    let sum = measure_term + interaction_term + source_term;
    let c_emp = if lhs <= 0.0 {
        0.0
    } else if sum > 0.0 {
        lhs / sum
    } else {
        f64::INFINITY
    };
    Ok(OleinikReport {
        family: i,
        s,
        t,
        intervals: j.intervals().to_vec(),
        lhs,
        measure_term,
        interaction_term,
        source_term,
        c_emp,
    })
}
