//! Scenario files: `[section]` headers followed by `key = value` lines.
//! `#` starts a comment line. Parsing fills every default, so serializing a
//! parsed scenario writes the full resolved configuration.

use std::fmt;
use std::str::FromStr;

use crate::diagnostics::DEFAULT_C0;
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::source::SourceSpec;
use crate::system::{DomainBox, State, SystemSpec};
use crate::tracker::TrackerConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct SystemDesc {
    /// `burgers`, `coupled2x2` or `poly`.
    pub name: String,
    /// Coefficients of `f(u) = Σ c_k u^k`, only for `poly`.
    pub coeffs: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub p: usize,
    pub c: f64,
}

impl SystemDesc {
    pub fn build(&self) -> Result<SystemSpec> {
        let domain = DomainBox::new(self.lo.clone(), self.hi.clone());
        if self.name == "poly" {
            return Ok(SystemSpec::scalar_polynomial(self.coeffs.clone(), self.lo[0], self.hi[0], self.p, self.c));
        }
        let sys = SystemSpec::by_name(&self.name)
            .ok_or_else(|| Error::InvalidInput(format!("unknown system {}", self.name)))?;
        Ok(sys.with_domain(domain).with_gap(self.c))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceDesc {
    None,
    Constant { value: State, support: Option<(f64, f64)> },
    Damping { rate: f64, support: (f64, f64), u_bound: f64 },
}

impl SourceDesc {
    pub fn build(&self) -> SourceSpec {
        match self {
            SourceDesc::None => SourceSpec::none(),
            SourceDesc::Constant { value, support } => SourceSpec::constant(value.clone(), *support),
            SourceDesc::Damping { rate, support, u_bound } => SourceSpec::damping(*rate, *support, *u_bound),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsDesc {
    pub families: Vec<usize>,
    /// Union of half-open intervals `[a, b)`.
    pub intervals: Vec<(f64, f64)>,
    /// Time pairs `(s, t)` for the decay report.
    pub pairs: Vec<(f64, f64)>,
    pub c0: f64,
    pub snapshots: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepDesc {
    /// `(eps, h, nu)` triples, coarsest first.
    pub entries: Vec<(f64, f64, f64)>,
    pub window: (f64, f64),
    /// Cells of the reference grid over the window.
    pub reference_cells: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub system: SystemDesc,
    pub source: SourceDesc,
    pub initial: Profile,
    pub tracker: TrackerConfig,
    pub diagnostics: DiagnosticsDesc,
    pub sweep: Option<SweepDesc>,
    pub output: String,
}

struct Entry {
    key: String,
    value: String,
    line: usize,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl Section {
    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for e in &self.entries {
            if !allowed.contains(&e.key.as_str()) {
                return Err(err(e.line, format!("unknown key '{}' in [{}]", e.key, self.name)));
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().rev().find(|e| e.key == key)
    }

    fn all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Entry> + 'a {
        self.entries.iter().filter(move |e| e.key == key)
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key)
            .ok_or_else(|| err(self.line, format!("missing key '{}' in [{}]", key, self.name)))
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let e = self.require(key)?;
        num(&e.value, e.line)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.get(key).map_or(Ok(default), |e| num(&e.value, e.line))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let e = self.require(key)?;
        nums(&e.value, e.line)
    }

    fn pair(&self, key: &str) -> Result<(f64, f64)> {
        let e = self.require(key)?;
        pair(&e.value, e.line)
    }
}

fn num<T: FromStr>(s: &str, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| err(line, format!("cannot read '{}' as a number", s.trim())))
}

fn nums(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split_whitespace().map(|t| num(t, line)).collect()
}

fn pair(s: &str, line: usize) -> Result<(f64, f64)> {
    match nums(s, line)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(err(line, format!("expected two numbers, got '{}'", s.trim()))),
    }
}

/// Comma-separated list of `a b` pairs; empty means none.
fn pairs(s: &str, line: usize) -> Result<Vec<(f64, f64)>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| pair(p, line)).collect()
}

/// States separated by `|`, components by whitespace.
fn states(s: &str, line: usize) -> Result<Vec<State>> {
    s.split('|').map(|p| nums(p, line)).collect()
}

fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(name) = l.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            let name = name.trim().to_string();
            if out.iter().any(|s| s.name == name) {
                return Err(err(line, format!("duplicate section [{}]", name)));
            }
            out.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = l.split_once('=') else {
            return Err(err(line, format!("expected 'key = value', got '{}'", l)));
        };
        let Some(sec) = out.last_mut() else {
            return Err(err(line, "key before any section"));
        };
        sec.entries.push(Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line,
        });
    }
    for s in &out {
        if !["system", "source", "initial", "tracker", "diagnostics", "sweep", "output"].contains(&s.name.as_str()) {
            return Err(err(s.line, format!("unknown section [{}]", s.name)));
        }
    }
    Ok(out)
}

fn parse_system(s: &Section) -> Result<SystemDesc> {
    s.check_keys(&["name", "coeffs", "domain_lo", "domain_hi", "p", "c"])?;
    let name_entry = s.require("name")?;
    let name = name_entry.value.clone();
    let (coeffs, base) = if name == "poly" {
        let coeffs = s.list("coeffs")?;
        let (lo, hi) = (s.f64("domain_lo")?, s.f64("domain_hi")?);
        let p = s.get("p").map_or(Ok(0), |e| num(&e.value, e.line))?;
        let c = s.f64("c")?;
        (coeffs.clone(), SystemSpec::scalar_polynomial(coeffs, lo, hi, p, c))
    } else {
        if let Some(e) = s.get("coeffs") {
            return Err(err(e.line, "coeffs only apply to 'poly'"));
        }
        let sys = SystemSpec::by_name(&name)
            .ok_or_else(|| err(name_entry.line, format!("unknown system '{}'", name)))?;
        (Vec::new(), sys)
    };
    let lo = s.get("domain_lo").map_or(Ok(base.domain.lo.clone()), |e| nums(&e.value, e.line))?;
    let hi = s.get("domain_hi").map_or(Ok(base.domain.hi.clone()), |e| nums(&e.value, e.line))?;
    if lo.len() != base.n || hi.len() != base.n {
        return Err(err(s.line, format!("domain bounds need {} components", base.n)));
    }
    if let (false, Some(e)) = (name == "poly", s.get("p")) {
        if num::<usize>(&e.value, e.line)? != base.p {
            return Err(err(e.line, format!("'{}' has p = {}", name, base.p)));
        }
    }
    Ok(SystemDesc {
        name,
        coeffs,
        lo,
        hi,
        p: base.p,
        c: s.f64_or("c", base.c)?,
    })
}

fn parse_source(s: Option<&Section>, n: usize) -> Result<SourceDesc> {
    let Some(s) = s else { return Ok(SourceDesc::None) };
    s.check_keys(&["kind", "value", "support", "rate", "u_bound"])?;
    let kind = s.require("kind")?;
    match kind.value.as_str() {
        "none" => Ok(SourceDesc::None),
        "constant" => {
            let e = s.require("value")?;
            let value = nums(&e.value, e.line)?;
            if value.len() != n {
                return Err(err(e.line, format!("source value needs {} components", n)));
            }
            let support = match s.get("support") {
                Some(e) if e.value == "all" => None,
                Some(e) => Some(pair(&e.value, e.line)?),
                None => None,
            };
            Ok(SourceDesc::Constant { value, support })
        }
        "damping" => Ok(SourceDesc::Damping {
            rate: s.f64("rate")?,
            support: s.pair("support")?,
            u_bound: s.f64("u_bound")?,
        }),
        other => Err(err(kind.line, format!("unknown source kind '{}'", other))),
    }
}

fn parse_initial(s: &Section, n: usize) -> Result<Profile> {
    let kind = s.require("kind")?;
    let state = |key: &str| -> Result<State> {
        let e = s.require(key)?;
        let v = nums(&e.value, e.line)?;
        if v.len() != n {
            return Err(err(e.line, format!("'{}' needs {} components", key, n)));
        }
        Ok(v)
    };
    let profile = match kind.value.as_str() {
        "constant" => {
            s.check_keys(&["kind", "value"])?;
            Profile::Constant(state("value")?)
        }
        "step" => {
            s.check_keys(&["kind", "left", "right", "at"])?;
            Profile::Step {
                left: state("left")?,
                right: state("right")?,
                at: s.f64_or("at", 0.0)?,
            }
        }
        "staircase" | "breakpoints" => {
            s.check_keys(&["kind", "breaks", "values"])?;
            let breaks = s.list("breaks")?;
            let e = s.require("values")?;
            let values = states(&e.value, e.line)?;
            if values.len() != breaks.len() + 1 || values.iter().any(|v| v.len() != n) {
                return Err(err(e.line, "need one more state than breaks, each with n components"));
            }
            if breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(err(s.require("breaks")?.line, "breaks must increase"));
            }
            Profile::Staircase { breaks, values }
        }
        "hat" => {
            s.check_keys(&["kind", "base", "amp", "center", "half_width"])?;
            Profile::Hat {
                base: state("base")?,
                amp: state("amp")?,
                center: s.f64("center")?,
                half_width: s.f64("half_width")?,
            }
        }
        "ramp" => {
            s.check_keys(&["kind", "left", "right", "from", "to"])?;
            Profile::Ramp {
                left: state("left")?,
                right: state("right")?,
                from: s.f64("from")?,
                to: s.f64("to")?,
            }
        }
        other => return Err(err(kind.line, format!("unknown initial kind '{}'", other))),
    };
    Ok(profile)
}

fn parse_tracker(s: &Section) -> Result<TrackerConfig> {
    s.check_keys(&[
        "eps",
        "h",
        "nu",
        "t_end",
        "lambda_hat",
        "tie_perturb",
        "delta",
        "event_cap",
        "max_lattice",
    ])?;
    let mut cfg = TrackerConfig::new(s.f64("eps")?, s.f64("h")?, s.f64("nu")?, s.f64("t_end")?);
    for (key, v) in [("eps", cfg.eps), ("h", cfg.h), ("nu", cfg.nu), ("t_end", cfg.t_end)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(err(s.require(key)?.line, format!("{} must be positive", key)));
        }
    }
    cfg.lambda_hat = match s.get("lambda_hat") {
        Some(e) if e.value != "auto" => Some(num(&e.value, e.line)?),
        _ => None,
    };
    cfg.tie_perturb = s.f64_or("tie_perturb", cfg.tie_perturb)?;
    cfg.delta = s.f64_or("delta", cfg.delta)?;
    if let Some(e) = s.get("event_cap") {
        cfg.event_cap = num(&e.value, e.line)?;
    }
    if let Some(e) = s.get("max_lattice") {
        cfg.max_lattice = num(&e.value, e.line)?;
    }
    Ok(cfg)
}

fn parse_diagnostics(s: Option<&Section>, n: usize, t_end: f64) -> Result<DiagnosticsDesc> {
    let mut d = DiagnosticsDesc {
        families: Vec::new(),
        intervals: Vec::new(),
        pairs: Vec::new(),
        c0: DEFAULT_C0,
        snapshots: vec![0.0, t_end],
    };
    let Some(s) = s else { return Ok(d) };
    s.check_keys(&["families", "intervals", "pairs", "c0", "snapshots"])?;
    if let Some(e) = s.get("families") {
        d.families = e
            .value
            .split_whitespace()
            .map(|t| num(t, e.line))
            .collect::<Result<_>>()?;
        if d.families.iter().any(|&i| i == 0 || i > n) {
            return Err(err(e.line, format!("families must lie in 1..={}", n)));
        }
    }
    if let Some(e) = s.get("intervals") {
        d.intervals = pairs(&e.value, e.line)?;
    }
    if let Some(e) = s.get("pairs") {
        d.pairs = pairs(&e.value, e.line)?;
    }
    d.c0 = s.f64_or("c0", d.c0)?;
    if let Some(e) = s.get("snapshots") {
        d.snapshots = nums(&e.value, e.line)?;
    }
    Ok(d)
}

fn parse_sweep(s: Option<&Section>) -> Result<Option<SweepDesc>> {
    let Some(s) = s else { return Ok(None) };
    s.check_keys(&["entry", "window", "reference_cells"])?;
    let entries = s
        .all("entry")
        .map(|e| match nums(&e.value, e.line)?.as_slice() {
            [a, b, c] => Ok((*a, *b, *c)),
            _ => Err(err(e.line, "entry needs 'eps h nu'")),
        })
        .collect::<Result<_>>()?;
    let cells = s.require("reference_cells")?;
    Ok(Some(SweepDesc {
        entries,
        window: s.pair("window")?,
        reference_cells: num(&cells.value, cells.line)?,
    }))
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let secs = sections(text)?;
        let end = text.lines().count();
        let find = |name: &str| secs.iter().find(|s| s.name == name);
        let need = |name: &str| find(name).ok_or_else(|| err(end, format!("missing section [{}]", name)));
        let system = parse_system(need("system")?)?;
        let n = system.lo.len();
        let source = parse_source(find("source"), n)?;
        let initial = parse_initial(need("initial")?, n)?;
        let tracker = parse_tracker(need("tracker")?)?;
        let diagnostics = parse_diagnostics(find("diagnostics"), n, tracker.t_end)?;
        let sweep = parse_sweep(find("sweep"))?;
        let output = match find("output") {
            Some(s) => {
                s.check_keys(&["dir"])?;
                s.require("dir")?.value.clone()
            }
            None => "out".into(),
        };
        Ok(Scenario {
            system,
            source,
            initial,
            tracker,
            diagnostics,
            sweep,
            output,
        })
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }

    pub fn build(&self) -> Result<(SystemSpec, SourceSpec)> {
        Ok((self.system.build()?, self.source.build()))
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn join_pairs(v: &[(f64, f64)]) -> String {
    v.iter().map(|(a, b)| format!("{} {}", a, b)).collect::<Vec<_>>().join(", ")
}

fn join_states(v: &[State]) -> String {
    v.iter().map(|s| join(s)).collect::<Vec<_>>().join(" | ")
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.system;
        writeln!(f, "[system]")?;
        writeln!(f, "name = {}", s.name)?;
        if s.name == "poly" {
            writeln!(f, "coeffs = {}", join(&s.coeffs))?;
        }
        writeln!(f, "domain_lo = {}", join(&s.lo))?;
        writeln!(f, "domain_hi = {}", join(&s.hi))?;
        writeln!(f, "p = {}", s.p)?;
        writeln!(f, "c = {}", s.c)?;

        writeln!(f, "\n[source]")?;
        match &self.source {
            SourceDesc::None => writeln!(f, "kind = none")?,
            SourceDesc::Constant { value, support } => {
                writeln!(f, "kind = constant")?;
                writeln!(f, "value = {}", join(value))?;
                match support {
                    Some((a, b)) => writeln!(f, "support = {} {}", a, b)?,
                    None => writeln!(f, "support = all")?,
                }
            }
            SourceDesc::Damping { rate, support, u_bound } => {
                writeln!(f, "kind = damping")?;
                writeln!(f, "rate = {}", rate)?;
                writeln!(f, "support = {} {}", support.0, support.1)?;
                writeln!(f, "u_bound = {}", u_bound)?;
            }
        }

        writeln!(f, "\n[initial]")?;
        match &self.initial {
            Profile::Constant(v) => {
                writeln!(f, "kind = constant")?;
                writeln!(f, "value = {}", join(v))?;
            }
            Profile::Step { left, right, at } => {
                writeln!(f, "kind = step")?;
                writeln!(f, "left = {}", join(left))?;
                writeln!(f, "right = {}", join(right))?;
                writeln!(f, "at = {}", at)?;
            }
            Profile::Staircase { breaks, values } => {
                writeln!(f, "kind = staircase")?;
                writeln!(f, "breaks = {}", join(breaks))?;
                writeln!(f, "values = {}", join_states(values))?;
            }
            Profile::Hat {
                base,
                amp,
                center,
                half_width,
            } => {
                writeln!(f, "kind = hat")?;
                writeln!(f, "base = {}", join(base))?;
                writeln!(f, "amp = {}", join(amp))?;
                writeln!(f, "center = {}", center)?;
                writeln!(f, "half_width = {}", half_width)?;
            }
            Profile::Ramp { left, right, from, to } => {
                writeln!(f, "kind = ramp")?;
                writeln!(f, "left = {}", join(left))?;
                writeln!(f, "right = {}", join(right))?;
                writeln!(f, "from = {}", from)?;
                writeln!(f, "to = {}", to)?;
            }
        }

        let t = &self.tracker;
        writeln!(f, "\n[tracker]")?;
        writeln!(f, "eps = {}", t.eps)?;
        writeln!(f, "h = {}", t.h)?;
        writeln!(f, "nu = {}", t.nu)?;
        writeln!(f, "t_end = {}", t.t_end)?;
        match t.lambda_hat {
            Some(l) => writeln!(f, "lambda_hat = {}", l)?,
            None => writeln!(f, "lambda_hat = auto")?,
        }
        writeln!(f, "tie_perturb = {}", t.tie_perturb)?;
        writeln!(f, "delta = {}", t.delta)?;
        writeln!(f, "event_cap = {}", t.event_cap)?;
        writeln!(f, "max_lattice = {}", t.max_lattice)?;

        let d = &self.diagnostics;
        writeln!(f, "\n[diagnostics]")?;
        let fam: Vec<String> = d.families.iter().map(|i| i.to_string()).collect();
        writeln!(f, "families = {}", fam.join(" "))?;
        writeln!(f, "intervals = {}", join_pairs(&d.intervals))?;
        writeln!(f, "pairs = {}", join_pairs(&d.pairs))?;
        writeln!(f, "c0 = {}", d.c0)?;
        writeln!(f, "snapshots = {}", join(&d.snapshots))?;

        if let Some(sw) = &self.sweep {
            writeln!(f, "\n[sweep]")?;
            for (e, h, nu) in &sw.entries {
                writeln!(f, "entry = {} {} {}", e, h, nu)?;
            }
            writeln!(f, "window = {} {}", sw.window.0, sw.window.1)?;
            writeln!(f, "reference_cells = {}", sw.reference_cells)?;
        }

        writeln!(f, "\n[output]")?;
        writeln!(f, "dir = {}", self.output)
    }
}
