//! Front tracking: the moving front population, the fixed zero-wave lattice,
//! collision scheduling and interaction resolution.

use crate::diagnostics::{glimm, Glimm};
use crate::error::{Error, Result};
use crate::log::{EventKind, Front, FrontFamily, FrontKind, InteractionEvent, LogHeader, Solver, TrajectoryLog};
use crate::profile::Profile;
use crate::riemann::{self, WaveFamily, WaveFan, WaveKind, NULL_STRENGTH};
use crate::source::SourceSpec;
use crate::system::{FieldKind, State, SystemSpec};

/// Events closer than this in time count toward the floor streak.
pub const TIME_STEP_FLOOR: f64 = 1e-14;
const FLOOR_STREAK: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TrackerConfig {
    /// Threshold below which interactions use the simplified method; also
    /// truncates the lattice to `|j| < 1/(h eps)`.
    pub eps: f64,
    pub h: f64,
    /// Largest rarefaction front created by splitting.
    pub nu: f64,
    /// Non-physical front speed, derived from the system when `None`.
    pub lambda_hat: Option<f64>,
    pub t_end: f64,
    /// Collision times this close are treated as simultaneous.
    pub tie_perturb: f64,
    /// L¹ tolerance for sampling non-piecewise-constant data.
    pub delta: f64,
    pub event_cap: usize,
    /// Largest number of lattice points scanned for an unbounded `ω`.
    pub max_lattice: usize,
}

impl TrackerConfig {
    pub fn new(eps: f64, h: f64, nu: f64, t_end: f64) -> Self {
        TrackerConfig {
            eps,
            h,
            nu,
            lambda_hat: None,
            t_end,
            tie_perturb: 1e-12,
            delta: 1e-4,
            event_cap: 1_000_000,
            max_lattice: 1_000_000,
        }
    }

    /// Inclusive range of lattice indices `j` with `-1/(h eps) < j < 1/(h eps)`.
    pub fn lattice_range(&self) -> (i64, i64) {
        let bound = 1.0 / (self.h * self.eps);
        let top = (bound.ceil() - 1.0).min(i64::MAX as f64 / 4.0) as i64;
        (-top, top)
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("h", self.h), ("nu", self.nu), ("t_end", self.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{} must be positive, got {}", name, v)));
            }
        }
        Ok(())
    }
}

/// `m = ⌊σ/ν⌋ + 1` equal pieces of a rarefaction of size `σ`. The quotient
/// is nudged up by a few ulps so that `σ = 1.2 - 0.8` counts as `0.4`.
pub fn split_rarefaction(sigma: f64, nu: f64) -> Vec<f64> {
    let m = (sigma / nu * (1.0 + 1e-12)).floor() as usize + 1;
    vec![sigma / m as f64; m]
}

/// Lattice points carrying a zero wave of positive strength.
pub fn zero_lattice(src: &SourceSpec, cfg: &TrackerConfig) -> Result<Vec<(i64, f64)>> {
    let (lo, hi) = cfg.lattice_range();
    let (j0, j1) = match src.omega_support() {
        Some((a, b)) if a >= b => return Ok(Vec::new()),
        Some((a, b)) => (
            ((a / cfg.h).floor() as i64 - 1).max(lo),
            ((b / cfg.h).ceil() as i64).min(hi),
        ),
        None => (lo, hi),
    };
    if j1 < j0 {
        return Ok(Vec::new());
    }
    if (j1 - j0) as u128 + 1 > cfg.max_lattice as u128 {
        return Err(Error::InvalidInput(format!(
            "{} lattice points exceed the cap of {}",
            j1 - j0 + 1,
            cfg.max_lattice
        )));
    }
    Ok((j0..=j1)
        .map(|j| (j, src.zero_strength(j, cfg.h)))
        .filter(|(_, s)| *s > 0.0)
        .collect())
}

fn front_kind(kind: WaveKind) -> FrontKind {
    match kind {
        WaveKind::Shock => FrontKind::Shock,
        WaveKind::Rarefaction => FrontKind::Rarefaction,
        WaveKind::Contact => FrontKind::Contact,
        WaveKind::ZeroJump => FrontKind::Zero,
    }
}

struct Birth {
    t: f64,
    x: f64,
    lattice: Option<i64>,
}

/// Turns a fan into fronts born at one point, splitting the rarefactions of
/// the families selected by `split`.
fn fan_fronts(
    sys: &SystemSpec,
    cfg: &TrackerConfig,
    fan: &WaveFan,
    at: &Birth,
    split: impl Fn(usize) -> bool,
    generation: impl Fn(usize) -> u32,
    next_id: &mut usize,
) -> Result<Vec<Front>> {
    let mut out = Vec::new();
    let mut push = |out: &mut Vec<Front>, family, kind, gen, speed, strength, l: &[f64], r: &[f64], lattice| {
        out.push(Front {
            id: *next_id,
            family,
            kind,
            generation: gen,
            t_birth: at.t,
            x_birth: at.x,
            speed,
            t_death: f64::INFINITY,
            strength,
            left_state: l.to_vec(),
            right_state: r.to_vec(),
            lattice,
        });
        *next_id += 1;
    };
    for w in &fan.waves {
        match w.family {
            WaveFamily::Zero => push(
                &mut out,
                FrontFamily::Zero,
                FrontKind::Zero,
                0,
                0.0,
                w.strength,
                &w.left_state,
                &w.right_state,
                at.lattice,
            ),
            WaveFamily::Physical(k) => {
                let gen = generation(k);
                if w.kind == WaveKind::Rarefaction && split(k) {
                    let pieces = split_rarefaction(w.strength, cfg.nu);
                    let m = pieces.len();
                    let mut left = w.left_state.clone();
                    for (j, piece) in pieces.iter().enumerate() {
                        let right = if j + 1 == m {
                            w.right_state.clone()
                        } else {
                            riemann::wave_curve(sys, k, &w.left_state, w.strength * (j + 1) as f64 / m as f64)?
                        };
                        let speed = sys.lambda(k - 1, &right)?;
                        push(
                            &mut out,
                            FrontFamily::Physical(k),
                            FrontKind::Rarefaction,
                            gen,
                            speed,
                            *piece,
                            &left,
                            &right,
                            None,
                        );
                        left = right;
                    }
                } else {
                    let speed = if w.kind == WaveKind::Rarefaction {
                        sys.lambda(k - 1, &w.right_state)?
                    } else {
                        w.speed_lo
                    };
                    push(
                        &mut out,
                        FrontFamily::Physical(k),
                        front_kind(w.kind),
                        gen,
                        speed,
                        w.strength,
                        &w.left_state,
                        &w.right_state,
                        None,
                    );
                }
            }
        }
    }
    Ok(out)
}

/// Single physical front of family `k` joining `left` to `right`.
fn physical_front(
    sys: &SystemSpec,
    k: usize,
    left: &[f64],
    right: &[f64],
    strength: f64,
    generation: u32,
    at: &Birth,
    next_id: &mut usize,
) -> Result<Front> {
    let jump_speed = || riemann::jump_speed(sys, k, left, right, strength);
    let (kind, speed) = match sys.field_kind[k - 1] {
        FieldKind::LinearlyDegenerate => (FrontKind::Contact, jump_speed()?),
        FieldKind::GenuinelyNonlinear if strength < 0.0 => (FrontKind::Shock, jump_speed()?),
        FieldKind::GenuinelyNonlinear => (FrontKind::Rarefaction, sys.lambda(k - 1, right)?),
    };
    let id = *next_id;
    *next_id += 1;
    Ok(Front {
        id,
        family: FrontFamily::Physical(k),
        kind,
        generation,
        t_birth: at.t,
        x_birth: at.x,
        speed,
        t_death: f64::INFINITY,
        strength,
        left_state: left.to_vec(),
        right_state: right.to_vec(),
        lattice: None,
    })
}

fn nonphysical_front(left: &[f64], right: &[f64], lambda_hat: f64, generation: u32, at: &Birth, next_id: &mut usize) -> Option<Front> {
    if left == right {
        return None;
    }
    let strength = left.iter().zip(right).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let id = *next_id;
    *next_id += 1;
    Some(Front {
        id,
        family: FrontFamily::NonPhysical,
        kind: FrontKind::NonPhysical,
        generation,
        t_birth: at.t,
        x_birth: at.x,
        speed: lambda_hat,
        t_death: f64::INFINITY,
        strength,
        left_state: left.to_vec(),
        right_state: right.to_vec(),
        lattice: None,
    })
}

fn zero_front(left: &[f64], right: &[f64], strength: f64, at: &Birth, next_id: &mut usize) -> Front {
    let id = *next_id;
    *next_id += 1;
    Front {
        id,
        family: FrontFamily::Zero,
        kind: FrontKind::Zero,
        generation: 0,
        t_birth: at.t,
        x_birth: at.x,
        speed: 0.0,
        t_death: f64::INFINITY,
        strength,
        left_state: left.to_vec(),
        right_state: right.to_vec(),
        lattice: at.lattice,
    }
}

#[derive(Clone, Debug)]
pub struct InitialFronts {
    pub fronts: Vec<Front>,
    /// `Σ|σ|` of the homogeneous resolution of every jump of the sampled data.
    pub v_initial: f64,
    pub far_left: State,
    pub total_variation: f64,
}

/// Samples `u0` and resolves every jump and lattice point at `t = 0⁺`.
pub fn init_approx(sys: &SystemSpec, src: &SourceSpec, cfg: &TrackerConfig, u0: &Profile) -> Result<InitialFronts> {
    cfg.check()?;
    let pc = u0.sample(cfg.delta);
    for v in &pc.values {
        sys.check_domain(v)?;
    }
    let lattice = zero_lattice(src, cfg)?;
    let mut points: Vec<(f64, Option<(i64, f64)>)> = pc.breaks.iter().map(|b| (*b, None)).collect();
    for &(j, s) in &lattice {
        let x = j as f64 * cfg.h;
        match points.iter_mut().find(|(b, l)| l.is_none() && (b - x).abs() <= 1e-12 * x.abs().max(1.0)) {
            Some(p) => *p = (x, Some((j, s))),
            None => points.push((x, Some((j, s)))),
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut fronts = Vec::new();
    let mut next_id = 0;
    let mut v_initial = 0.0;
    for (x, zero) in points {
        let ul = pc.value_left(x).clone();
        let ur = pc.value(x).clone();
        if ul != ur {
            let hom = riemann::solve_homogeneous(sys, &ul, &ur)?;
            v_initial += hom.waves.iter().map(|w| w.strength.abs()).sum::<f64>();
        }
        let at = Birth {
            t: 0.0,
            x,
            lattice: zero.map(|z| z.0),
        };
        let fan = match zero {
            Some((j, _)) => riemann::solve_h(sys, src, j as f64 * cfg.h, cfg.h, &ul, &ur)?,
            None => riemann::solve_homogeneous(sys, &ul, &ur)?,
        };
        fronts.extend(fan_fronts(sys, cfg, &fan, &at, |_| true, |_| 1, &mut next_id)?);
    }
    Ok(InitialFronts {
        fronts,
        v_initial,
        far_left: pc.values[0].clone(),
        total_variation: pc.total_variation(),
    })
}

/// Earliest crossing among adjacent fronts at or after `t_now`, as
/// `(time, slot of the left front)`. Near-ties within `tie` go to the
/// leftmost pair. `None` when nothing crosses before `t_end`.
pub fn next_event(fronts: &[&Front], t_now: f64, t_end: f64, tie: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, pair) in fronts.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        if a.is_zero() && b.is_zero() {
            continue;
        }
        let closing = a.speed - b.speed;
        if closing <= 0.0 {
            continue;
        }
        let gap = b.position(t_now) - a.position(t_now);
        let tc = t_now + gap.max(0.0) / closing;
        match best {
            Some((tb, _)) if tc >= tb - tie => {}
            _ => best = Some((tc, i)),
        }
    }
    best.filter(|(t, _)| *t <= t_end)
}

/// Outcome of one interaction.
pub struct Resolution {
    pub outgoing: Vec<Front>,
    pub solver: Solver,
    pub kind: EventKind,
}

/// Resolves the collision of adjacent fronts `a` (left) and `b` at `(t, x)`.
/// New fronts take ids from `next_id`.
pub fn resolve_interaction(
    sys: &SystemSpec,
    src: &SourceSpec,
    cfg: &TrackerConfig,
    lambda_hat: f64,
    a: &Front,
    b: &Front,
    t: f64,
    x: f64,
    next_id: &mut usize,
) -> Result<Resolution> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::InvalidInput("zero waves never interact".into()));
    }
    if a.is_nonphysical() || b.is_nonphysical() {
        return resolve_nonphysical(sys, src, cfg, lambda_hat, a, b, t, x, next_id);
    }
    if a.is_zero() || b.is_zero() {
        return resolve_zero(sys, src, cfg, lambda_hat, a, b, t, x, next_id);
    }
    let ka = a.physical_family().expect("physical");
    let kb = b.physical_family().expect("physical");
    let at = Birth { t, x, lattice: None };
    let accurate = (a.strength * b.strength).abs() >= cfg.eps || a.generation == 1 || b.generation == 1 || ka < kb;
    if accurate {
        let fan = riemann::solve_homogeneous(sys, &a.left_state, &b.right_state)?;
        let incoming = [a, b];
        let gen_of = |k: usize| {
            incoming
                .iter()
                .filter(|f| f.physical_family() == Some(k))
                .map(|f| f.generation)
                .min()
                .unwrap_or(a.generation.max(b.generation) + 1)
        };
        let outgoing = fan_fronts(sys, cfg, &fan, &at, |k| k != ka && k != kb, gen_of, next_id)?;
        return Ok(Resolution {
            outgoing,
            solver: Solver::Accurate,
            kind: EventKind::Physical,
        });
    }
    let np_gen = a.generation.max(b.generation) + 1;
    let mut outgoing = Vec::new();
    let end = if ka == kb {
        let sigma = a.strength + b.strength;
        if sigma.abs() <= NULL_STRENGTH {
            a.left_state.clone()
        } else {
            let w = riemann::wave_curve(sys, ka, &a.left_state, sigma)?;
            let gen = a.generation.min(b.generation);
            outgoing.push(physical_front(sys, ka, &a.left_state, &w, sigma, gen, &at, next_id)?);
            w
        }
    } else {
        let w1 = riemann::wave_curve(sys, kb, &a.left_state, b.strength)?;
        let w2 = riemann::wave_curve(sys, ka, &w1, a.strength)?;
        outgoing.push(physical_front(sys, kb, &a.left_state, &w1, b.strength, b.generation, &at, next_id)?);
        outgoing.push(physical_front(sys, ka, &w1, &w2, a.strength, a.generation, &at, next_id)?);
        w2
    };
    outgoing.extend(nonphysical_front(&end, &b.right_state, lambda_hat, np_gen, &at, next_id));
    Ok(Resolution {
        outgoing,
        solver: Solver::Simplified,
        kind: EventKind::Physical,
    })
}

fn resolve_zero(
    sys: &SystemSpec,
    src: &SourceSpec,
    cfg: &TrackerConfig,
    lambda_hat: f64,
    a: &Front,
    b: &Front,
    t: f64,
    x: f64,
    next_id: &mut usize,
) -> Result<Resolution> {
    let (phys, zero) = if a.is_zero() { (b, a) } else { (a, b) };
    let k = phys.physical_family().expect("physical");
    let j = zero.lattice.expect("zero fronts carry a lattice index");
    let x_o = j as f64 * cfg.h;
    let at = Birth {
        t,
        x,
        lattice: Some(j),
    };
    if (phys.strength * zero.strength).abs() >= cfg.eps || phys.generation == 1 {
        let fan = riemann::solve_h(sys, src, x_o, cfg.h, &a.left_state, &b.right_state)?;
        let outgoing = fan_fronts(
            sys,
            cfg,
            &fan,
            &at,
            |f| f != k,
            |f| if f == k { phys.generation } else { phys.generation + 1 },
            next_id,
        )?;
        return Ok(Resolution {
            outgoing,
            solver: Solver::Accurate,
            kind: EventKind::Zero,
        });
    }
    let mut outgoing = Vec::new();
    let end = if a.is_zero() {
        let w = riemann::wave_curve(sys, k, &a.left_state, phys.strength)?;
        let plus = riemann::phi_h(sys, src, x_o, cfg.h, &w)?;
        outgoing.push(physical_front(sys, k, &a.left_state, &w, phys.strength, phys.generation, &at, next_id)?);
        outgoing.push(zero_front(&w, &plus, zero.strength, &at, next_id));
        plus
    } else {
        let plus = riemann::phi_h(sys, src, x_o, cfg.h, &a.left_state)?;
        let w = riemann::wave_curve(sys, k, &plus, phys.strength)?;
        outgoing.push(zero_front(&a.left_state, &plus, zero.strength, &at, next_id));
        outgoing.push(physical_front(sys, k, &plus, &w, phys.strength, phys.generation, &at, next_id)?);
        w
    };
    outgoing.extend(nonphysical_front(&end, &b.right_state, lambda_hat, phys.generation + 1, &at, next_id));
    Ok(Resolution {
        outgoing,
        solver: Solver::Simplified,
        kind: EventKind::Zero,
    })
}

/// A non-physical front (always on the left, being the fastest) passes
/// through `b`, which is rebuilt from the new left state.
fn resolve_nonphysical(
    sys: &SystemSpec,
    src: &SourceSpec,
    cfg: &TrackerConfig,
    lambda_hat: f64,
    a: &Front,
    b: &Front,
    t: f64,
    x: f64,
    next_id: &mut usize,
) -> Result<Resolution> {
    if !a.is_nonphysical() {
        return Err(Error::InvalidInput("non-physical front overtaken from the left".into()));
    }
    let mut outgoing = Vec::new();
    let at = Birth {
        t,
        x,
        lattice: b.lattice,
    };
    let end = if b.is_zero() {
        let j = b.lattice.expect("zero fronts carry a lattice index");
        let plus = riemann::phi_h(sys, src, j as f64 * cfg.h, cfg.h, &a.left_state)?;
        outgoing.push(zero_front(&a.left_state, &plus, b.strength, &at, next_id));
        plus
    } else if b.is_nonphysical() {
        // equal speeds never collide
        return Err(Error::InvalidInput("two non-physical fronts collided".into()));
    } else {
        let k = b.physical_family().expect("physical");
        let w = riemann::wave_curve(sys, k, &a.left_state, b.strength)?;
        outgoing.push(physical_front(sys, k, &a.left_state, &w, b.strength, b.generation, &at, next_id)?);
        w
    };
    outgoing.extend(nonphysical_front(&end, &b.right_state, lambda_hat, a.generation, &at, next_id));
    Ok(Resolution {
        outgoing,
        solver: Solver::Simplified,
        kind: EventKind::NonPhysical,
    })
}

fn escape(e: Error, time: f64, position: f64, fallback: &[f64]) -> Error {
    match e {
        Error::OutOfDomain { state } => Error::DomainEscape { time, position, state },
        Error::CurveLeftDomain { .. } => Error::DomainEscape {
            time,
            position,
            state: fallback.to_vec(),
        },
        other => other,
    }
}

/// Runs the front-tracking approximation from `u0` up to `cfg.t_end`.
pub fn run(sys: &SystemSpec, src: &SourceSpec, cfg: &TrackerConfig, u0: &Profile) -> Result<TrajectoryLog> {
    let lambda_hat = cfg.lambda_hat.unwrap_or_else(|| sys.lambda_hat());
    let init = init_approx(sys, src, cfg, u0)?;
    let (n, p) = (sys.n, sys.p);
    let mut fronts = init.fronts;
    let initial_count = fronts.len();
    let omega_mass: f64 = fronts.iter().filter(|f| f.is_zero()).map(|f| f.strength).sum();
    let mut order: Vec<usize> = (0..initial_count).collect();
    let mut events: Vec<InteractionEvent> = Vec::new();
    let mut current: Glimm = glimm(fronts.iter(), n, p);
    let mut t = 0.0;
    let mut streak = 0;
    let mut simplified = 0usize;
    loop {
        let view: Vec<&Front> = order.iter().map(|id| &fronts[*id]).collect();
        let Some((tc, slot)) = next_event(&view, t, cfg.t_end, cfg.tie_perturb) else {
            break;
        };
        if events.len() >= cfg.event_cap {
            return Err(Error::EventCapExceeded {
                cap: cfg.event_cap,
                time: tc,
            });
        }
        streak = if tc - t < TIME_STEP_FLOOR { streak + 1 } else { 0 };
        if streak > FLOOR_STREAK {
            return Err(Error::TimeStepFloor { count: streak, time: tc });
        }
        let (a, b) = (view[slot], view[slot + 1]);
        let x = if a.is_zero() {
            a.x_birth
        } else if b.is_zero() {
            b.x_birth
        } else {
            a.position(tc)
        };
        let mut next_id = fronts.len();
        let res = resolve_interaction(sys, src, cfg, lambda_hat, a, b, tc, x, &mut next_id)
            .map_err(|e| escape(e, tc, x, &a.left_state))?;
        let incoming = vec![a.id, b.id];
        for id in &incoming {
            fronts[*id].t_death = tc;
        }
        let outgoing: Vec<usize> = res.outgoing.iter().map(|f| f.id).collect();
        fronts.extend(res.outgoing);
        order.splice(slot..slot + 2, outgoing.iter().copied());
        let after = glimm(order.iter().map(|id| &fronts[*id]), n, p);
        if res.solver == Solver::Simplified {
            simplified += 1;
        }
        events.push(InteractionEvent {
            time: tc,
            position: x,
            index: slot,
            incoming,
            outgoing,
            solver: res.solver,
            kind: res.kind,
            dq: after.q_h - current.q_h,
            dv: after.v - current.v,
        });
        current = after;
        t = tc;
    }
    let (lat_lo, lat_hi) = cfg.lattice_range();
    let header = LogHeader {
        system: sys.name.clone(),
        source: src.label(),
        n,
        p,
        eps: cfg.eps,
        h: cfg.h,
        nu: cfg.nu,
        lambda_hat,
        t_end: cfg.t_end,
        tie_tolerance: cfg.tie_perturb,
        omega_mass,
        v_initial: init.v_initial,
        initial_count,
        far_left: init.far_left,
        extra: vec![
            ("delta".into(), cfg.delta.to_string()),
            ("event_cap".into(), cfg.event_cap.to_string()),
            ("lattice".into(), format!("{}..{}", lat_lo, lat_hi)),
            ("initial_total_variation".into(), init.total_variation.to_string()),
            ("simplified_resolutions".into(), simplified.to_string()),
        ],
    };
    Ok(TrajectoryLog {
        header,
        fronts,
        events,
    })
}
