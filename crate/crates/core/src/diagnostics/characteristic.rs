//! Minimal generalized characteristics traced backward through a log.

use crate::error::{Error, Result};
use crate::log::{Front, TrajectoryLog};
use crate::system::{State, SystemSpec};

const POSITION_TOL: f64 = 1e-11;
const SPEED_TOL: f64 = 1e-10;

/// Polygonal curve `x(t)` with vertices in increasing time.
#[derive(Clone, Debug, PartialEq)]
pub struct CharPath {
    pub family: usize,
    pub vertices: Vec<(f64, f64)>,
}

impl CharPath {
    pub fn t_start(&self) -> f64 {
        self.vertices[0].0
    }

    pub fn t_end(&self) -> f64 {
        self.vertices[self.vertices.len() - 1].0
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.vertices.partition_point(|v| v.0 <= t);
        k.clamp(1, self.vertices.len() - 1) - 1
    }

    pub fn x_at(&self, t: f64) -> f64 {
        if self.vertices.len() == 1 {
            return self.vertices[0].1;
        }
        let s = self.segment(t);
        let (t0, x0) = self.vertices[s];
        let (t1, x1) = self.vertices[s + 1];
        if t1 == t0 {
            return x1;
        }
        x0 + (x1 - x0) * (t - t0) / (t1 - t0)
    }

    /// Slope of the segment containing `t` (the later one at a vertex).
    pub fn slope_at(&self, t: f64) -> f64 {
        if self.vertices.len() == 1 {
            return 0.0;
        }
        let s = self.segment(t);
        let (t0, x0) = self.vertices[s];
        let (t1, x1) = self.vertices[s + 1];
        (x1 - x0) / (t1 - t0)
    }
}

struct Local<'a> {
    slope: f64,
    left: Option<&'a Front>,
    right: Option<&'a Front>,
}

/// Region selection at `(t, x)`: among the regions cut out by fronts through
/// the point, the leftmost one whose `λ_i` fits between its boundary speeds.
fn locate<'a>(sys: &SystemSpec, i: usize, fronts: &[&'a Front], far_left: &[f64], t: f64, x: f64) -> Result<Local<'a>> {
    let tol = POSITION_TOL * x.abs().max(1.0);
    let r = fronts.iter().position(|f| f.position(t) >= x - tol).unwrap_or(fronts.len());
    let c_end = fronts[r..]
        .iter()
        .position(|f| f.position(t) > x + tol)
        .map_or(fronts.len(), |k| r + k);
    let c = c_end - r;
    let state_of = |m: usize| -> State {
        if m == 0 {
            if r < fronts.len() {
                fronts[r].left_state.clone()
            } else if r > 0 {
                fronts[r - 1].right_state.clone()
            } else {
                far_left.to_vec()
            }
        } else {
            fronts[r + m - 1].right_state.clone()
        }
    };
    let bound = |k: usize| if k < fronts.len() { Some(fronts[k]) } else { None };
    if c == 0 {
        let slope = sys.lambda(i - 1, &state_of(0))?;
        return Ok(Local {
            slope,
            left: if r > 0 { Some(fronts[r - 1]) } else { None },
            right: bound(r),
        });
    }
    let mut best = (f64::INFINITY, 0, 0.0);
    for m in 0..=c {
        let lam = sys.lambda(i - 1, &state_of(m))?;
        let upper = if m == 0 { f64::INFINITY } else { fronts[r + m - 1].speed };
        let lower = if m == c { f64::NEG_INFINITY } else { fronts[r + m].speed };
        let violation = (lam - upper).max(0.0) + (lower - lam).max(0.0);
        if violation <= SPEED_TOL {
            best = (0.0, m, lam);
            break;
        }
        if violation < best.0 {
            best = (violation, m, lam);
        }
    }
    let (_, m, slope) = best;
    Ok(Local {
        slope,
        left: if m == 0 {
            if r > 0 {
                Some(fronts[r - 1])
            } else {
                None
            }
        } else {
            Some(fronts[r + m - 1])
        },
        right: if m == c { bound(r + c) } else { Some(fronts[r + m]) },
    })
}

/// Backward time until the path `x - λ d` meets `f`, if ever.
fn hit(f: &Front, t: f64, x: f64, slope: f64) -> Option<f64> {
    let dx = x - f.position(t);
    if dx.abs() <= POSITION_TOL * x.abs().max(1.0) {
        return None;
    }
    let rel = slope - f.speed;
    if rel == 0.0 {
        return None;
    }
    let d = dx / rel;
    if d > 0.0 {
        Some(d)
    } else {
        None
    }
}

/// Minimal `i`-characteristic through `(t_to, x_bar)`, traced back to `t_from`.
pub fn min_characteristic(
    sys: &SystemSpec,
    log: &TrajectoryLog,
    i: usize,
    x_bar: f64,
    t_from: f64,
    t_to: f64,
) -> Result<CharPath> {
    if !(t_from < t_to) {
        return Err(Error::InvalidInput(format!("need t_from < t_to, got {} and {}", t_from, t_to)));
    }
    if t_from < 0.0 {
        return Err(Error::LeftDomain { time: t_from });
    }
    if t_to > log.header.t_end * (1.0 + 1e-12) {
        return Err(Error::LeftDomain { time: t_to });
    }
    let events = &log.events;
    let mut idx = events.partition_point(|e| e.time < t_to);
    let mut order: Vec<usize> = (0..log.header.initial_count).collect();
    for ev in &events[..idx] {
        order.splice(ev.index..ev.index + ev.incoming.len(), ev.outgoing.iter().copied());
    }
    let mut t = t_to;
    let mut x = x_bar;
    let mut vertices = vec![(t, x)];
    let budget = 8 * (log.fronts.len() + events.len()) + 1000;
    for _ in 0..budget {
        if t <= t_from {
            vertices.reverse();
            return Ok(CharPath { family: i, vertices });
        }
        let lower = if idx > 0 { events[idx - 1].time.max(t_from) } else { t_from };
        let fronts: Vec<&Front> = order.iter().map(|id| &log.fronts[*id]).collect();
        let local = locate(sys, i, &fronts, &log.header.far_left, t, x)?;
        let mut d = t - lower;
        let mut snap: Option<&Front> = None;
        for f in [local.left, local.right].into_iter().flatten() {
            if let Some(dh) = hit(f, t, x, local.slope) {
                if dh < d {
                    d = dh;
                    snap = Some(f);
                }
            }
        }
        let t_new = if snap.is_some() { t - d } else { lower };
        let x_new = match snap {
            Some(f) => f.position(t_new),
            None => x - local.slope * d,
        };
        if t_new < t {
            vertices.push((t_new, x_new));
        }
        t = t_new;
        x = x_new;
        if snap.is_none() && t > t_from {
            // undo every event at this time
            while idx > 0 && events[idx - 1].time >= t {
                idx -= 1;
                let ev = &events[idx];
                order.splice(ev.index..ev.index + ev.outgoing.len(), ev.incoming.iter().copied());
            }
        }
    }
    Err(Error::InvalidInput("characteristic trace did not terminate".into()))
}
