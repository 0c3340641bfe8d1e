//! Lower semicontinuity of `Q_h`, `Υ_h` and `μ^{i±}(J) + C₀ Q_h` along
//! L¹-convergent sequences of profiles.

use std::fmt;

use super::glimm::glimm;
use super::measure::{IntervalSet, WaveMeasureSlice};
use crate::error::Result;
use crate::log::{Front, FrontFamily, FrontKind};
use crate::profile::Profile;
use crate::riemann::{self, WaveFamily, WaveKind};
use crate::source::SourceSpec;
use crate::system::SystemSpec;
use crate::tracker::{zero_lattice, TrackerConfig};

/// Wave content of a profile: the homogeneous resolution of each jump of its
/// piecewise-constant sampling plus the zero waves of the lattice. At a
/// shared point, families `<= p` precede the zero wave.
pub fn profile_fronts(sys: &SystemSpec, src: &SourceSpec, cfg: &TrackerConfig, u0: &Profile) -> Result<Vec<Front>> {
    let pc = u0.sample(cfg.delta);
    let mut keyed: Vec<(f64, u8, usize, Front)> = Vec::new();
    let mut seq = 0;
    let mut base = |family, kind, x: f64, strength, l: Vec<f64>, r: Vec<f64>, lattice| Front {
        id: {
            seq += 1;
            seq - 1
        },
        family,
        kind,
        generation: 1,
        t_birth: 0.0,
        x_birth: x,
        speed: 0.0,
        t_death: f64::INFINITY,
        strength,
        left_state: l,
        right_state: r,
        lattice,
    };
    for (k, &x) in pc.breaks.iter().enumerate() {
        let fan = riemann::solve_homogeneous(sys, &pc.values[k], &pc.values[k + 1])?;
        for w in fan.waves {
            if let WaveFamily::Physical(fam) = w.family {
                let kind = match w.kind {
                    WaveKind::Shock => FrontKind::Shock,
                    WaveKind::Rarefaction => FrontKind::Rarefaction,
                    _ => FrontKind::Contact,
                };
                let rank = if fam <= sys.p { 0 } else { 2 };
                let f = base(FrontFamily::Physical(fam), kind, x, w.strength, w.left_state, w.right_state, None);
                keyed.push((x, rank, f.id, f));
            }
        }
    }
    for (j, s) in zero_lattice(src, cfg)? {
        let x = j as f64 * cfg.h;
        let f = base(FrontFamily::Zero, FrontKind::Zero, x, s, Vec::new(), Vec::new(), Some(j));
        keyed.push((x, 1, f.id, f));
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Ok(keyed.into_iter().map(|k| k.3).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct LscEntry {
    pub label: String,
    pub limit: f64,
    /// Minimum over the second half of the sequence.
    pub liminf: f64,
    /// `liminf - limit`; non-negative when semicontinuity holds.
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LscReport {
    pub entries: Vec<LscEntry>,
}

impl LscReport {
    pub fn min_margin(&self) -> f64 {
        self.entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn entry(&self, label: &str) -> Option<&LscEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

impl fmt::Display for LscReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{}.limit = {}", e.label, e.limit)?;
            writeln!(f, "{}.liminf = {}", e.label, e.liminf)?;
            writeln!(f, "{}.margin = {}", e.label, e.margin)?;
        }
        writeln!(f, "min_margin = {}", self.min_margin())
    }
}

/// Interval query for `μ^{i±}(J) + C₀ Q_h`.
#[derive(Clone, Debug, PartialEq)]
pub struct MuQuery {
    pub family: usize,
    pub j: IntervalSet,
}

/// Evaluates the functionals on every profile of the sequence and on the
/// limit. `liminf` is approximated by the minimum over the second half.
pub fn lsc_probe(
    sys: &SystemSpec,
    src: &SourceSpec,
    cfg: &TrackerConfig,
    profiles: &[Profile],
    limit: &Profile,
    c0: f64,
    queries: &[MuQuery],
) -> Result<LscReport> {
    struct Values {
        q_h: f64,
        upsilon: f64,
        mu: Vec<(f64, f64)>,
    }
    let eval = |u: &Profile| -> Result<Values> {
        let fronts = profile_fronts(sys, src, cfg, u)?;
        let g = glimm(&fronts, sys.n, sys.p);
        let refs: Vec<&Front> = fronts.iter().collect();
        let slice = WaveMeasureSlice::from_fronts(&refs, 0.0, sys.n);
        Ok(Values {
            q_h: g.q_h,
            upsilon: g.v + c0 * g.q_h,
            mu: queries
                .iter()
                .map(|q| (slice.positive(q.family, &q.j), slice.negative(q.family, &q.j)))
                .collect(),
        })
    };
    let seq: Vec<Values> = profiles.iter().map(eval).collect::<Result<_>>()?;
    let lim = eval(limit)?;
    let tail = &seq[seq.len() / 2..];
    let liminf = |f: &dyn Fn(&Values) -> f64| tail.iter().map(f).fold(f64::INFINITY, f64::min);
    let mut entries = Vec::new();
    let mut add = |label: String, f: &dyn Fn(&Values) -> f64| {
        let l = liminf(f);
        let v = f(&lim);
        entries.push(LscEntry {
            label,
            limit: v,
            liminf: l,
            margin: l - v,
        });
    };
    add("Q_h".into(), &|v| v.q_h);
    add("Upsilon_h".into(), &|v| v.upsilon);
    for (k, q) in queries.iter().enumerate() {
        add(format!("mu{}+[{}]", q.family, k), &|v| v.mu[k].0 + c0 * v.q_h);
        add(format!("mu{}-[{}]", q.family, k), &|v| v.mu[k].1 + c0 * v.q_h);
    }
    Ok(LscReport { entries })
}
