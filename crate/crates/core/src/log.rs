//! Trajectory log: every front segment ever alive plus the interaction events
//! that created and destroyed them. Snapshots are rebuilt by replay.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::profile::PiecewiseConstant;
use crate::system::State;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrontFamily {
    /// 1-based characteristic family.
    Physical(usize),
    Zero,
    NonPhysical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrontKind {
    Shock,
    Rarefaction,
    Contact,
    Zero,
    NonPhysical,
}

/// One straight front segment `x(t) = x_birth + speed (t - t_birth)` carrying
/// fixed states for `t_birth <= t < t_death`.
#[derive(Clone, Debug, PartialEq)]
pub struct Front {
    pub id: usize,
    pub family: FrontFamily,
    pub kind: FrontKind,
    pub generation: u32,
    pub t_birth: f64,
    pub x_birth: f64,
    pub speed: f64,
    /// `f64::INFINITY` while alive at the end of the run.
    pub t_death: f64,
    pub strength: f64,
    pub left_state: State,
    pub right_state: State,
    /// Lattice index of a zero front.
    pub lattice: Option<i64>,
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        if self.speed == 0.0 {
            self.x_birth
        } else {
            self.x_birth + self.speed * (t - self.t_birth)
        }
    }

    pub fn is_physical(&self) -> bool {
        matches!(self.family, FrontFamily::Physical(_))
    }

    pub fn is_zero(&self) -> bool {
        self.family == FrontFamily::Zero
    }

    pub fn is_nonphysical(&self) -> bool {
        self.family == FrontFamily::NonPhysical
    }

    pub fn physical_family(&self) -> Option<usize> {
        match self.family {
            FrontFamily::Physical(k) => Some(k),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Accurate,
    Simplified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// Two physical fronts.
    Physical,
    /// A physical front and a zero front.
    Zero,
    /// A non-physical front and anything else.
    NonPhysical,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteractionEvent {
    pub time: f64,
    pub position: f64,
    /// Slot of the leftmost incoming front in the ordered front list.
    pub index: usize,
    pub incoming: Vec<usize>,
    pub outgoing: Vec<usize>,
    pub solver: Solver,
    pub kind: EventKind,
    /// Change of `Q_h` across the event.
    pub dq: f64,
    /// Change of `V` across the event.
    pub dv: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogHeader {
    pub system: String,
    pub source: String,
    pub n: usize,
    pub p: usize,
    pub eps: f64,
    pub h: f64,
    pub nu: f64,
    pub lambda_hat: f64,
    pub t_end: f64,
    pub tie_tolerance: f64,
    /// Total zero-front strength, i.e. the lattice-truncated `‖ω‖_{L¹}`.
    pub omega_mass: f64,
    /// `V` of the exact initial datum, from homogeneous resolution of its jumps.
    pub v_initial: f64,
    /// Number of fronts alive at `t = 0`; they carry ids `0..initial_count`.
    pub initial_count: usize,
    /// State left of every front.
    pub far_left: State,
    /// Any further resolved configuration.
    pub extra: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLog {
    pub header: LogHeader,
    pub fronts: Vec<Front>,
    pub events: Vec<InteractionEvent>,
}

/// Walks the log forward, maintaining the ordered list of alive front ids.
pub struct Replay<'a> {
    log: &'a TrajectoryLog,
    order: Vec<usize>,
    next: usize,
}

impl<'a> Replay<'a> {
    pub fn new(log: &'a TrajectoryLog) -> Self {
        Replay {
            log,
            order: (0..log.header.initial_count).collect(),
            next: 0,
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn fronts(&self) -> impl Iterator<Item = &'a Front> + '_ {
        self.order.iter().map(move |id| &self.log.fronts[*id])
    }

    /// Index of the next event to apply.
    pub fn cursor(&self) -> usize {
        self.next
    }

    pub fn peek(&self) -> Option<&'a InteractionEvent> {
        self.log.events.get(self.next)
    }

    pub fn apply_next(&mut self) -> Option<&'a InteractionEvent> {
        let ev = self.log.events.get(self.next)?;
        let end = ev.index + ev.incoming.len();
        self.order.splice(ev.index..end, ev.outgoing.iter().copied());
        self.next += 1;
        Some(ev)
    }

    /// Applies every event with time `<= t`.
    pub fn advance_to(&mut self, t: f64) {
        while let Some(ev) = self.peek() {
            if ev.time > t {
                break;
            }
            self.apply_next();
        }
    }
}

impl TrajectoryLog {
    pub fn replay(&self) -> Replay<'_> {
        Replay::new(self)
    }

    /// Ordered alive front ids just after all events at times `<= t`.
    pub fn order_at(&self, t: f64) -> Vec<usize> {
        let mut r = self.replay();
        r.advance_to(t);
        r.order
    }

    pub fn fronts_at(&self, t: f64) -> Vec<&Front> {
        self.order_at(t).into_iter().map(|id| &self.fronts[id]).collect()
    }

    /// The approximate solution at time `t`.
    pub fn profile_at(&self, t: f64) -> PiecewiseConstant {
        let fronts = self.fronts_at(t);
        profile_of(&fronts, t).unwrap_or_else(|| PiecewiseConstant::constant(self.header.far_left.clone()))
    }

    /// Interaction times in log order.
    pub fn event_times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        fs::read_to_string(path)?.parse()
    }

    /// Front diagram at the given times: `t,x,id,family,kind,strength,left,right`.
    pub fn snapshot_csv(&self, times: &[f64]) -> String {
        let mut out = String::from("t,x,id,family,kind,generation,strength,left,right\n");
        for &t in times {
            for f in self.fronts_at(t) {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    t,
                    f.position(t),
                    f.id,
                    family_code(f.family),
                    kind_code(f.kind),
                    f.generation,
                    f.strength,
                    join_state(&f.left_state),
                    join_state(&f.right_state)
                ));
            }
        }
        out
    }
}

/// Piecewise-constant function represented by ordered fronts at time `t`.
pub fn profile_of(fronts: &[&Front], t: f64) -> Option<PiecewiseConstant> {
    let first = fronts.first()?;
    let mut breaks = Vec::with_capacity(fronts.len());
    let mut values = vec![first.left_state.clone()];
    let mut last = f64::NEG_INFINITY;
    for f in fronts {
        // round-off can unsort coincident fronts by an ulp
        last = f.position(t).max(last);
        breaks.push(last);
        values.push(f.right_state.clone());
    }
    Some(PiecewiseConstant { breaks, values })
}

fn family_code(f: FrontFamily) -> String {
    match f {
        FrontFamily::Physical(k) => k.to_string(),
        FrontFamily::Zero => "Z".into(),
        FrontFamily::NonPhysical => "NP".into(),
    }
}

fn parse_family(s: &str) -> Option<FrontFamily> {
    match s {
        "Z" => Some(FrontFamily::Zero),
        "NP" => Some(FrontFamily::NonPhysical),
        _ => s.parse().ok().map(FrontFamily::Physical),
    }
}

fn kind_code(k: FrontKind) -> &'static str {
    match k {
        FrontKind::Shock => "S",
        FrontKind::Rarefaction => "R",
        FrontKind::Contact => "C",
        FrontKind::Zero => "Z",
        FrontKind::NonPhysical => "NP",
    }
}

fn parse_kind(s: &str) -> Option<FrontKind> {
    Some(match s {
        "S" => FrontKind::Shock,
        "R" => FrontKind::Rarefaction,
        "C" => FrontKind::Contact,
        "Z" => FrontKind::Zero,
        "NP" => FrontKind::NonPhysical,
        _ => return None,
    })
}

fn join_state(u: &[f64]) -> String {
    u.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

const FRONT_COLUMNS: &str =
    "id,family,kind,generation,t_birth,x_birth,speed,t_death,strength,lattice,left,right";
const EVENT_COLUMNS: &str = "time,position,index,incoming,outgoing,solver,kind,dq,dv";

impl fmt::Display for TrajectoryLog {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.header;
        writeln!(out, "# header")?;
        writeln!(out, "system = {}", h.system)?;
        writeln!(out, "source = {}", h.source)?;
        writeln!(out, "n = {}", h.n)?;
        writeln!(out, "p = {}", h.p)?;
        writeln!(out, "eps = {}", h.eps)?;
        writeln!(out, "h = {}", h.h)?;
        writeln!(out, "nu = {}", h.nu)?;
        writeln!(out, "lambda_hat = {}", h.lambda_hat)?;
        writeln!(out, "t_end = {}", h.t_end)?;
        writeln!(out, "tie_tolerance = {}", h.tie_tolerance)?;
        writeln!(out, "omega_mass = {}", h.omega_mass)?;
        writeln!(out, "v_initial = {}", h.v_initial)?;
        writeln!(out, "initial_count = {}", h.initial_count)?;
        writeln!(out, "far_left = {}", join_state(&h.far_left))?;
        for (k, v) in &h.extra {
            writeln!(out, "{} = {}", k, v)?;
        }
        writeln!(out, "# fronts")?;
        writeln!(out, "{}", FRONT_COLUMNS)?;
        for f in &self.fronts {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                f.id,
                family_code(f.family),
                kind_code(f.kind),
                f.generation,
                f.t_birth,
                f.x_birth,
                f.speed,
                f.t_death,
                f.strength,
                f.lattice.map(|j| j.to_string()).unwrap_or_default(),
                join_state(&f.left_state),
                join_state(&f.right_state)
            )?;
        }
        writeln!(out, "# events")?;
        writeln!(out, "{}", EVENT_COLUMNS)?;
        for e in &self.events {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                e.time,
                e.position,
                e.index,
                join_ids(&e.incoming),
                join_ids(&e.outgoing),
                match e.solver {
                    Solver::Accurate => "accurate",
                    Solver::Simplified => "simplified",
                },
                match e.kind {
                    EventKind::Physical => "physical",
                    EventKind::Zero => "zero",
                    EventKind::NonPhysical => "nonphysical",
                },
                e.dq,
                e.dv
            )?;
        }
        Ok(())
    }
}

fn field<T: FromStr>(line: usize, what: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {}: {:?}", what, s),
    })
}

fn parse_list<T: FromStr>(line: usize, what: &str, s: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(|v| field(line, what, v)).collect()
}

impl FromStr for TrajectoryLog {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Header,
            Fronts,
            Events,
        }
        let mut section = Section::None;
        let mut kv: Vec<(usize, String, String)> = Vec::new();
        let mut fronts = Vec::new();
        let mut events = Vec::new();
        let mut expect_columns = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            match raw {
                "# header" => {
                    section = Section::Header;
                    continue;
                }
                "# fronts" => {
                    section = Section::Fronts;
                    expect_columns = true;
                    continue;
                }
                "# events" => {
                    section = Section::Events;
                    expect_columns = true;
                    continue;
                }
                "" => continue,
                _ => {}
            }
            if expect_columns {
                expect_columns = false;
                continue;
            }
            match section {
                Section::None => {
                    return Err(Error::Parse {
                        line,
                        message: "content before the header".into(),
                    })
                }
                Section::Header => {
                    let (k, v) = raw.split_once(" = ").ok_or_else(|| Error::Parse {
                        line,
                        message: "expected `key = value`".into(),
                    })?;
                    kv.push((line, k.to_string(), v.to_string()));
                }
                Section::Fronts => {
                    let c: Vec<&str> = raw.split(',').collect();
                    if c.len() != 12 {
                        return Err(Error::Parse {
                            line,
                            message: format!("front row needs 12 columns, got {}", c.len()),
                        });
                    }
                    fronts.push(Front {
                        id: field(line, "id", c[0])?,
                        family: parse_family(c[1]).ok_or_else(|| Error::Parse {
                            line,
                            message: format!("bad family {:?}", c[1]),
                        })?,
                        kind: parse_kind(c[2]).ok_or_else(|| Error::Parse {
                            line,
                            message: format!("bad kind {:?}", c[2]),
                        })?,
                        generation: field(line, "generation", c[3])?,
                        t_birth: field(line, "t_birth", c[4])?,
                        x_birth: field(line, "x_birth", c[5])?,
                        speed: field(line, "speed", c[6])?,
                        t_death: field(line, "t_death", c[7])?,
                        strength: field(line, "strength", c[8])?,
                        lattice: if c[9].is_empty() {
                            None
                        } else {
                            Some(field(line, "lattice", c[9])?)
                        },
                        left_state: parse_list(line, "state", c[10])?,
                        right_state: parse_list(line, "state", c[11])?,
                    });
                }
                Section::Events => {
                    let c: Vec<&str> = raw.split(',').collect();
                    if c.len() != 9 {
                        return Err(Error::Parse {
                            line,
                            message: format!("event row needs 9 columns, got {}", c.len()),
                        });
                    }
                    events.push(InteractionEvent {
                        time: field(line, "time", c[0])?,
                        position: field(line, "position", c[1])?,
                        index: field(line, "index", c[2])?,
                        incoming: parse_list(line, "id", c[3])?,
                        outgoing: parse_list(line, "id", c[4])?,
                        solver: match c[5] {
                            "accurate" => Solver::Accurate,
                            "simplified" => Solver::Simplified,
                            s => {
                                return Err(Error::Parse {
                                    line,
                                    message: format!("bad solver {:?}", s),
                                })
                            }
                        },
                        kind: match c[6] {
                            "physical" => EventKind::Physical,
                            "zero" => EventKind::Zero,
                            "nonphysical" => EventKind::NonPhysical,
                            s => {
                                return Err(Error::Parse {
                                    line,
                                    message: format!("bad event kind {:?}", s),
                                })
                            }
                        },
                        dq: field(line, "dq", c[7])?,
                        dv: field(line, "dv", c[8])?,
                    });
                }
            }
        }
        let take = |key: &str| -> Result<(usize, String)> {
            kv.iter()
                .find(|(_, k, _)| k == key)
                .map(|(l, _, v)| (*l, v.clone()))
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("header lacks {}", key),
                })
        };
        let num = |key: &str| -> Result<f64> {
            let (l, v) = take(key)?;
            field(l, key, &v)
        };
        let int = |key: &str| -> Result<usize> {
            let (l, v) = take(key)?;
            field(l, key, &v)
        };
        const TYPED: [&str; 14] = [
            "far_left",
            "system",
            "source",
            "n",
            "p",
            "eps",
            "h",
            "nu",
            "lambda_hat",
            "t_end",
            "tie_tolerance",
            "omega_mass",
            "v_initial",
            "initial_count",
        ];
        let header = LogHeader {
            system: take("system")?.1,
            source: take("source")?.1,
            n: int("n")?,
            p: int("p")?,
            eps: num("eps")?,
            h: num("h")?,
            nu: num("nu")?,
            lambda_hat: num("lambda_hat")?,
            t_end: num("t_end")?,
            tie_tolerance: num("tie_tolerance")?,
            omega_mass: num("omega_mass")?,
            v_initial: num("v_initial")?,
            initial_count: int("initial_count")?,
            far_left: {
                let (l, v) = take("far_left")?;
                parse_list(l, "far_left", &v)?
            },
            extra: kv
                .iter()
                .filter(|(_, k, _)| !TYPED.contains(&k.as_str()))
                .map(|(_, k, v)| (k.clone(), v.clone()))
                .collect(),
        };
        for (i, f) in fronts.iter().enumerate() {
            if f.id != i {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("front ids must be dense, found {} at row {}", f.id, i),
                });
            }
        }
        Ok(TrajectoryLog {
            header,
            fronts,
            events,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrajectoryLog {
        let front = |id, x: f64, s: f64, l: f64, r: f64, death: f64| Front {
            id,
            family: FrontFamily::Physical(1),
            kind: FrontKind::Shock,
            generation: 1,
            t_birth: 0.0,
            x_birth: x,
            speed: s,
            t_death: death,
            strength: r - l,
            left_state: vec![l],
            right_state: vec![r],
            lattice: None,
        };
        let mut merged = front(2, 0.1, 1.0 / 3.0, 1.3, 0.7, f64::INFINITY);
        merged.t_birth = 0.3;
        TrajectoryLog {
            header: LogHeader {
                system: "burgers".into(),
                source: "none".into(),
                n: 1,
                p: 0,
                eps: 1e-6,
                h: 0.1,
                nu: 0.01,
                lambda_hat: 2.5,
                t_end: 1.0,
                tie_tolerance: 1e-12,
                omega_mass: 0.0,
                v_initial: 0.6,
                initial_count: 2,
                far_left: vec![1.3],
                extra: vec![("note".into(), "a b".into())],
            },
            fronts: vec![
                front(0, -0.2, 1.0, 1.3, 1.0, 0.3),
                front(1, 0.0, 0.1 * 3.0, 1.0, 0.7, 0.3),
                merged,
            ],
            events: vec![InteractionEvent {
                time: 0.3,
                position: 0.1,
                index: 0,
                incoming: vec![0, 1],
                outgoing: vec![2],
                solver: Solver::Accurate,
                kind: EventKind::Physical,
                dq: -0.09,
                dv: 0.0,
            }],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let log = sample();
        let text = log.to_string();
        let back: TrajectoryLog = text.parse().unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_string(), text);
    }

    #[test]
    fn replay_splices_events() {
        let log = sample();
        assert_eq!(log.order_at(0.0), vec![0, 1]);
        assert_eq!(log.order_at(0.3), vec![2]);
        let pc = log.profile_at(0.5);
        assert_eq!(pc.values, vec![vec![1.3], vec![0.7]]);
    }

    #[test]
    fn malformed_rows_report_lines() {
        let text = sample().to_string().replace("accurate", "fancy");
        match text.parse::<TrajectoryLog>() {
            Err(Error::Parse { line, .. }) => assert!(line > 0),
            other => panic!("unexpected {:?}", other),
        }
    }
}
