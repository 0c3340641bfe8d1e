//! The funnel `I(t) = [a(t), b(t))` between two minimal characteristics and
//! the quantities `m`, `M`, `K`, `Φ` evaluated along it.

use std::fmt::Write as _;

use super::characteristic::{min_characteristic, CharPath};
use crate::error::{Error, Result};
use crate::log::{Front, FrontFamily, TrajectoryLog};
use crate::system::SystemSpec;

const TIME_MERGE: f64 = 1e-13;
const MIN_WIDTH: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ProofSample {
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    /// Signed `i`-waves inside the funnel.
    pub big_m: f64,
    /// Strength of the other waves inside, zero waves included.
    pub k: f64,
    pub phi: f64,
}

/// One event-free span on which `a`, `b` and every front move linearly and no
/// front crosses the funnel boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Span {
    pub t0: f64,
    pub t1: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub k: f64,
    pub m0: f64,
    pub m1: f64,
    /// Smallest speed separation between the funnel edges and the non-`i`
    /// fronts inside, oriented so that it is positive under strict hyperbolicity.
    pub c_span: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiJump {
    pub t: f64,
    pub dphi: f64,
    /// `ΔQ_h` summed over the events at `t`.
    pub dq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProofSeries {
    pub family: usize,
    pub lower: CharPath,
    pub upper: CharPath,
    pub samples: Vec<ProofSample>,
    pub spans: Vec<Span>,
    pub jumps: Vec<PhiJump>,
    /// Minimum of `c_span` over spans with waves inside (infinite if none).
    pub c_emp: f64,
}

/// Weight orientation: `true` for the `j < i` form.
fn slower_form(f: &Front, i: usize, p: usize) -> bool {
    match f.family {
        FrontFamily::Physical(j) => j < i,
        FrontFamily::Zero => i > p,
        FrontFamily::NonPhysical => false,
    }
}

fn weight(slower: bool, x: f64, a: f64, b: f64) -> f64 {
    let m = b - a;
    if x < a {
        if slower {
            1.0
        } else {
            0.0
        }
    } else if x >= b {
        if slower {
            0.0
        } else {
            1.0
        }
    } else if slower {
        (b - x) / m
    } else {
        (x - a) / m
    }
}

struct Eval {
    phi: f64,
    k: f64,
    big_m: f64,
}

fn evaluate(fronts: &[&Front], i: usize, p: usize, t: f64, a: f64, b: f64) -> Eval {
    let mut e = Eval {
        phi: 0.0,
        k: 0.0,
        big_m: 0.0,
    };
    for f in fronts {
        let x = f.position(t);
        let inside = a <= x && x < b;
        if f.physical_family() == Some(i) {
            if inside {
                e.big_m += f.strength;
            }
            continue;
        }
        let s = f.strength.abs();
        if inside {
            e.k += s;
        }
        e.phi += weight(slower_form(f, i, p), x, a, b) * s;
    }
    e
}

fn push_time(grid: &mut Vec<f64>, t: f64, lo: f64, hi: f64) {
    if t > lo && t < hi {
        grid.push(t);
    }
}

fn dedup_times(grid: &mut Vec<f64>) {
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup_by(|b, a| *b - *a <= TIME_MERGE);
}

/// Builds the funnel from `[a, b)` at time `big_t` back to `t = 0` and
/// evaluates `m`, `M`, `K`, `Φ` on a grid fine enough that every span is
/// free of events, path kinks and boundary crossings.
pub fn proof_functionals(
    sys: &SystemSpec,
    log: &TrajectoryLog,
    i: usize,
    a: f64,
    b: f64,
    big_t: f64,
) -> Result<ProofSeries> {
    if !(a < b) {
        return Err(Error::InvalidInput(format!("need a < b, got [{}, {})", a, b)));
    }
    let lower = min_characteristic(sys, log, i, a, 0.0, big_t)?;
    let upper = min_characteristic(sys, log, i, b, 0.0, big_t)?;
    let p = log.header.p;
    let mut grid = vec![0.0, big_t];
    for ev in &log.events {
        push_time(&mut grid, ev.time, 0.0, big_t);
    }
    for v in lower.vertices.iter().chain(&upper.vertices) {
        push_time(&mut grid, v.0, 0.0, big_t);
    }
    dedup_times(&mut grid);

    let mut replay = log.replay();
    let mut samples = Vec::new();
    let mut spans = Vec::new();
    let mut jumps = Vec::new();
    let mut c_emp = f64::INFINITY;
    let apply_events_at = |replay: &mut crate::log::Replay<'_>, t: f64, jumps: &mut Vec<PhiJump>| {
        let pending = replay.peek().is_some_and(|e| e.time <= t + TIME_MERGE);
        if !pending {
            return;
        }
        let (at, bt) = (lower.x_at(t), upper.x_at(t));
        let before: Vec<&Front> = replay.fronts().collect();
        let phi0 = evaluate(&before, i, p, t, at, bt).phi;
        let mut dq = 0.0;
        while let Some(ev) = replay.peek() {
            if ev.time > t + TIME_MERGE {
                break;
            }
            dq += ev.dq;
            replay.apply_next();
        }
        let after: Vec<&Front> = replay.fronts().collect();
        let phi1 = evaluate(&after, i, p, t, at, bt).phi;
        if bt - at > MIN_WIDTH {
            jumps.push(PhiJump { t, dphi: phi1 - phi0, dq });
        }
    };
    for w in grid.windows(2) {
        let (g0, g1) = (w[0], w[1]);
        apply_events_at(&mut replay, g0, &mut jumps);
        let fronts: Vec<&Front> = replay.fronts().collect();
        // boundary crossings inside (g0, g1)
        let mut sub = vec![g0, g1];
        let (a0, a1, b0, b1) = (lower.x_at(g0), lower.x_at(g1), upper.x_at(g0), upper.x_at(g1));
        let (da, db) = ((a1 - a0) / (g1 - g0), (b1 - b0) / (g1 - g0));
        for f in &fronts {
            for (e0, de) in [(a0, da), (b0, db)] {
                let rel = f.speed - de;
                if rel != 0.0 {
                    push_time(&mut sub, g0 + (e0 - f.position(g0)) / rel, g0, g1);
                }
            }
        }
        dedup_times(&mut sub);
        for s in sub.windows(2) {
            let (s0, s1) = (s[0], s[1]);
            let (sa0, sb0, sa1, sb1) = (lower.x_at(s0), upper.x_at(s0), lower.x_at(s1), upper.x_at(s1));
            let (m0, m1) = (sb0 - sa0, sb1 - sa1);
            if m0 <= MIN_WIDTH || m1 <= MIN_WIDTH || s1 - s0 <= TIME_MERGE {
                continue;
            }
            let sm = 0.5 * (s0 + s1);
            let (am, bm) = (lower.x_at(sm), upper.x_at(sm));
            let e0 = evaluate(&fronts, i, p, s0, sa0, sb0);
            let e1 = evaluate(&fronts, i, p, s1, sa1, sb1);
            let em = evaluate(&fronts, i, p, sm, am, bm);
            let (va, vb) = ((sa1 - sa0) / (s1 - s0), (sb1 - sb0) / (s1 - s0));
            let mut c_span = f64::INFINITY;
            for f in &fronts {
                let x = f.position(sm);
                if f.physical_family() == Some(i) || !(am <= x && x < bm) {
                    continue;
                }
                let c = if slower_form(f, i, p) {
                    (va - f.speed).min(vb - f.speed)
                } else {
                    (f.speed - va).min(f.speed - vb)
                };
                c_span = c_span.min(c);
            }
            if em.k > 0.0 {
                c_emp = c_emp.min(c_span);
            }
            samples.push(ProofSample {
                t: s0,
                a: sa0,
                b: sb0,
                m: m0,
                big_m: e0.big_m,
                k: e0.k,
                phi: e0.phi,
            });
            samples.push(ProofSample {
                t: s1,
                a: sa1,
                b: sb1,
                m: m1,
                big_m: e1.big_m,
                k: e1.k,
                phi: e1.phi,
            });
            spans.push(Span {
                t0: s0,
                t1: s1,
                phi0: e0.phi,
                phi1: e1.phi,
                k: em.k,
                m0,
                m1,
                c_span,
            });
        }
    }
    apply_events_at(&mut replay, big_t, &mut jumps);
    Ok(ProofSeries {
        family: i,
        lower,
        upper,
        samples,
        spans,
        jumps,
        c_emp,
    })
}

impl ProofSeries {
    /// Largest decrease of `Φ` across an event-free span.
    pub fn monotonicity_violation(&self) -> f64 {
        self.spans.iter().map(|s| s.phi0 - s.phi1).fold(0.0, f64::max)
    }

    /// Largest excess of `K c_emp` over `(ΔΦ/Δt) max(m)` across spans.
    pub fn kbound_excess(&self) -> f64 {
        self.spans
            .iter()
            .filter(|s| s.k > 0.0)
            .map(|s| s.k * self.c_emp - (s.phi1 - s.phi0) / (s.t1 - s.t0) * s.m0.max(s.m1))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest excess of `|ΔΦ|` over `c |ΔQ_h|` at events.
    pub fn jump_excess(&self, c: f64) -> f64 {
        self.jumps
            .iter()
            .map(|j| {
                let allowed = if j.dq == 0.0 { 0.0 } else { c * j.dq.abs() };
                j.dphi.abs() - allowed
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,a,b,m,M,K,Phi\n");
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{},{},{},{},{}", s.t, s.a, s.b, s.m, s.big_m, s.k, s.phi);
        }
        out
    }
}
