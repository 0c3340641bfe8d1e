//! Scenario orchestration: parse a scenario, gate it on the structural
//! assumptions, run the tracker and write logs, reports and sweep tables.

mod scenario;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use scenario::{DiagnosticsDesc, Scenario, SourceDesc, SweepDesc, SystemDesc};

use crate::diagnostics::{functionals, glimm, lsc_probe, oleinik_report, IntervalSet, LscReport, MuQuery, OleinikReport};
use crate::error::{Error, Result};
use crate::log::{Front, TrajectoryLog};
use crate::oracle::{godunov_split, l1_distance, lax_oleinik, Grid};
use crate::profile::{PiecewiseConstant, Profile};
use crate::source::SourceSpec;
use crate::system::{validate_assumptions, SystemSpec, ValidationReport};
use crate::tracker::{run, TrackerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_ASSUMPTIONS: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Output directories given as relative paths are resolved against this.
pub const OUTPUT_ROOT_VAR: &str = "WAVEFRONT_OUTPUT_ROOT";

const VALIDATION_SAMPLES: usize = 1000;
const REFERENCE_CFL: f64 = 0.45;
/// Allowed growth of the L¹ distance from one sweep entry to the next.
const SWEEP_SLACK: f64 = 0.10;
const LSC_SEQUENCE: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub code: i32,
    pub message: String,
    pub artifacts: Vec<PathBuf>,
}

impl RunOutcome {
    fn fail(code: i32, message: String, artifacts: Vec<PathBuf>) -> Self {
        RunOutcome {
            code,
            message,
            artifacts,
        }
    }
}

pub fn load(path: &Path) -> Result<Scenario> {
    fs::read_to_string(path)?.parse()
}

pub fn output_root_from_env() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from)
}

pub fn output_dir(scn: &Scenario, root: Option<&Path>) -> PathBuf {
    let dir = PathBuf::from(&scn.output);
    match root {
        Some(r) if dir.is_relative() => r.join(dir),
        _ => dir,
    }
}

/// The scenario as `# `-prefixed lines, prepended to every report.
fn config_block(scn: &Scenario) -> String {
    scn.to_string().lines().map(|l| format!("# {}\n", l)).collect()
}

struct Writer {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: PathBuf, scn: &Scenario) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        Ok(Writer {
            dir,
            header: config_block(scn),
            written: Vec::new(),
        })
    }

    fn report(&mut self, name: &str, body: &str) -> Result<()> {
        self.raw(name, &format!("{}{}", self.header, body))
    }

    fn raw(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }
}

/// Parses and checks the structural assumptions.
pub fn validate(scn: &Scenario) -> Result<(SystemSpec, SourceSpec, ValidationReport)> {
    let (sys, src) = scn.build()?;
    let report = validate_assumptions(&sys, &src, VALIDATION_SAMPLES);
    Ok((sys, src, report))
}

fn failure_message(rep: &ValidationReport) -> String {
    let names: Vec<&str> = rep.failures().iter().map(|c| c.name.as_str()).collect();
    format!("assumption check failed: {}", names.join(", "))
}

/// `validate <scenario>`: exit 0 or 2, with the report as message.
pub fn validate_scenario(path: &Path) -> RunOutcome {
    let scn = match load(path) {
        Ok(s) => s,
        Err(e) => return RunOutcome::fail(EXIT_PARSE, e.to_string(), Vec::new()),
    };
    match validate(&scn) {
        Ok((_, _, rep)) if rep.passed() => RunOutcome::fail(EXIT_OK, rep.to_string(), Vec::new()),
        Ok((_, _, rep)) => RunOutcome::fail(EXIT_ASSUMPTIONS, format!("{}\n{}", failure_message(&rep), rep), Vec::new()),
        Err(e) => RunOutcome::fail(EXIT_PARSE, e.to_string(), Vec::new()),
    }
}

pub fn run_scenario(path: &Path) -> RunOutcome {
    run_scenario_in(path, output_root_from_env().as_deref(), false)
}

/// Runs a scenario and writes its artifacts. With `sweep_only` just the
/// convergence table is produced.
pub fn run_scenario_in(path: &Path, root: Option<&Path>, sweep_only: bool) -> RunOutcome {
    let scn = match load(path) {
        Ok(s) => s,
        Err(e) => return RunOutcome::fail(EXIT_PARSE, format!("{}: {}", path.display(), e), Vec::new()),
    };
    let (sys, src, rep) = match validate(&scn) {
        Ok(v) => v,
        Err(e) => return RunOutcome::fail(EXIT_PARSE, e.to_string(), Vec::new()),
    };
    let mut out = match Writer::new(output_dir(&scn, root), &scn) {
        Ok(w) => w,
        Err(e) => return RunOutcome::fail(EXIT_NUMERICAL, e.to_string(), Vec::new()),
    };
    if let Err(e) = out.report("validation.txt", &rep.to_string()) {
        return RunOutcome::fail(EXIT_NUMERICAL, e.to_string(), out.written);
    }
    if !rep.passed() {
        return RunOutcome::fail(EXIT_ASSUMPTIONS, failure_message(&rep), out.written);
    }
    let result = if sweep_only {
        sweep_artifacts(&scn, &mut out)
    } else {
        run_artifacts(&scn, &sys, &src, &mut out)
    };
    match result {
        Ok(msg) => RunOutcome::fail(EXIT_OK, msg, out.written),
        Err(e) => {
            let msg = e.to_string();
            let _ = out.report("failure.txt", &format!("error = {}\n", msg));
            RunOutcome::fail(EXIT_NUMERICAL, msg, out.written)
        }
    }
}

fn run_artifacts(scn: &Scenario, sys: &SystemSpec, src: &SourceSpec, out: &mut Writer) -> Result<String> {
    let log = run(sys, src, &scn.tracker, &scn.initial)?;
    log.write(&out.dir.join("trajectory.log"))?;
    out.written.push(out.dir.join("trajectory.log"));
    out.report("fronts.csv", &fronts_csv(&log))?;
    out.report("snapshots.csv", &log.snapshot_csv(&scn.diagnostics.snapshots))?;
    out.report("functionals.csv", &functionals(&log, scn.diagnostics.c0).to_csv())?;
    let d = &scn.diagnostics;
    if !d.intervals.is_empty() && !d.families.is_empty() {
        let reports = oleinik_reports(&log, d)?;
        let body: Vec<String> = reports.iter().map(|r| r.to_string()).collect();
        out.report("oleinik.txt", &body.join("\n"))?;
        out.report("lsc.txt", &lsc_report(scn, sys, src, &log)?.to_string())?;
    }
    let mut msg = format!("{} fronts, {} interactions", log.fronts.len(), log.events.len());
    if scn.sweep.is_some() {
        msg.push('\n');
        msg.push_str(&sweep_artifacts(scn, out)?);
    }
    Ok(msg)
}

fn sweep_artifacts(scn: &Scenario, out: &mut Writer) -> Result<String> {
    let table = compare_refinements(scn)?;
    out.report("convergence.csv", &table.to_csv())?;
    Ok(if table.flagged {
        "sweep flagged: L1 distance grew by more than the allowed slack".into()
    } else {
        "sweep distances non-increasing".into()
    })
}

/// `id,family,kind,generation,t_birth,x_birth,speed,t_death,strength`.
pub fn fronts_csv(log: &TrajectoryLog) -> String {
    let mut s = String::from("id,family,kind,generation,t_birth,x_birth,speed,t_death,strength\n");
    for f in &log.fronts {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            f.id,
            family_label(f),
            format!("{:?}", f.kind).to_lowercase(),
            f.generation,
            f.t_birth,
            f.x_birth,
            f.speed,
            f.t_death.min(log.header.t_end),
            f.strength
        );
    }
    s
}

fn family_label(f: &Front) -> String {
    match f.physical_family() {
        Some(i) => i.to_string(),
        None if f.is_zero() => "zero".into(),
        None => "nonphysical".into(),
    }
}

pub fn oleinik_reports(log: &TrajectoryLog, d: &DiagnosticsDesc) -> Result<Vec<OleinikReport>> {
    let j = IntervalSet::half_open(&d.intervals)?;
    let mut out = Vec::new();
    for &i in &d.families {
        for &(s, t) in &d.pairs {
            out.push(oleinik_report(log, i, &j, s, t)?);
        }
    }
    Ok(out)
}

/// Probe along `u(t_k) -> u(t_end)` with `t_k = t_end (1 - 2^{-k})`.
fn lsc_report(scn: &Scenario, sys: &SystemSpec, src: &SourceSpec, log: &TrajectoryLog) -> Result<LscReport> {
    let t = scn.tracker.t_end;
    let as_profile = |pc: PiecewiseConstant| Profile::Staircase {
        breaks: pc.breaks,
        values: pc.values,
    };
    let seq: Vec<Profile> = (1..=LSC_SEQUENCE)
        .map(|k| as_profile(log.profile_at(t * (1.0 - 0.5f64.powi(k as i32)))))
        .collect();
    let limit = as_profile(log.profile_at(t));
    let j = IntervalSet::open(&scn.diagnostics.intervals)?;
    let queries: Vec<MuQuery> = scn
        .diagnostics
        .families
        .iter()
        .map(|&family| MuQuery { family, j: j.clone() })
        .collect();
    lsc_probe(sys, src, &scn.tracker, &seq, &limit, scn.diagnostics.c0, &queries)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub h: f64,
    pub nu: f64,
    pub l1: f64,
    pub v_end: f64,
    pub q_end: f64,
    /// Largest decay constant over the requested reports; NaN if none.
    pub c_emp: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    /// `godunov` or `lax_oleinik`.
    pub reference: String,
    pub reference_cells: usize,
    pub window: (f64, f64),
    /// `‖u0‖_{L¹}` over the window.
    pub u0_l1: f64,
    pub rows: Vec<SweepRow>,
    /// Some distance exceeded its predecessor by more than the slack.
    pub flagged: bool,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# reference = {}\n# reference_cells = {}\n# window = {} {}\n# u0_l1 = {}\n# flagged = {}\n",
            self.reference, self.reference_cells, self.window.0, self.window.1, self.u0_l1, self.flagged
        );
        s.push_str("eps,h,nu,l1,v_end,q_end,c_emp\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{},{},{},{}", r.eps, r.h, r.nu, r.l1, r.v_end, r.q_end, r.c_emp);
        }
        s
    }
}

fn reference_profile(scn: &Scenario, sys: &SystemSpec, src: &SourceSpec, sw: &SweepDesc) -> Result<(String, PiecewiseConstant)> {
    let grid = Grid::new(sw.window.0, sw.window.1, sw.reference_cells);
    let t = scn.tracker.t_end;
    if src.is_zero() && sys.n == 1 && sys.kappa.is_some() {
        let values = (0..grid.cells)
            .map(|k| Ok(vec![lax_oleinik(sys, &scn.initial, t, grid.center(k))?]))
            .collect::<Result<Vec<_>>>()?;
        let dx = grid.dx();
        let breaks: Vec<f64> = (0..=grid.cells).map(|k| grid.x_min + k as f64 * dx).collect();
        let mut vals = vec![values[0].clone()];
        vals.extend(values.iter().cloned());
        vals.push(values[grid.cells - 1].clone());
        return Ok(("lax_oleinik".into(), PiecewiseConstant::new(breaks, vals)?));
    }
    let sol = godunov_split(sys, src, &scn.initial, &grid, t, REFERENCE_CFL)?;
    Ok(("godunov".into(), sol.to_piecewise()))
}

fn sweep_row(scn: &Scenario, sys: &SystemSpec, src: &SourceSpec, entry: (f64, f64, f64)) -> Result<(TrajectoryLog, SweepRow)> {
    let (eps, h, nu) = entry;
    let cfg = TrackerConfig {
        eps,
        h,
        nu,
        ..scn.tracker.clone()
    };
    let log = run(sys, src, &cfg, &scn.initial)?;
    let t = cfg.t_end;
    let g = glimm(log.fronts_at(t), sys.n, sys.p);
    let d = &scn.diagnostics;
    let c_emp = if d.intervals.is_empty() || d.families.is_empty() || d.pairs.is_empty() {
        f64::NAN
    } else {
        oleinik_reports(&log, d)?.iter().map(|r| r.c_emp).fold(0.0, f64::max)
    };
    Ok((
        log,
        SweepRow {
            eps,
            h,
            nu,
            l1: 0.0,
            v_end: g.v,
            q_end: g.q,
            c_emp,
        },
    ))
}

/// Runs every sweep entry and the reference concurrently, then measures the
/// L¹ distance at `t_end` over the sweep window.
pub fn compare_refinements(scn: &Scenario) -> Result<ConvergenceTable> {
    let sw = scn.sweep.as_ref().ok_or(Error::SweepTooShort(0))?;
    if sw.entries.len() < 2 {
        return Err(Error::SweepTooShort(sw.entries.len()));
    }
    let (sys, src) = scn.build()?;
    let (reference, runs) = std::thread::scope(|s| {
        let handles: Vec<_> = sw
            .entries
            .iter()
            .map(|&e| {
                let (sys, src) = (&sys, &src);
                s.spawn(move || sweep_row(scn, sys, src, e))
            })
            .collect();
        let reference = reference_profile(scn, &sys, &src, sw);
        let runs: Vec<Result<(TrajectoryLog, SweepRow)>> =
            handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect();
        (reference, runs)
    });
    let (name, reference) = reference?;
    let t = scn.tracker.t_end;
    let mut rows = Vec::with_capacity(runs.len());
    for r in runs {
        let (log, mut row) = r?;
        row.l1 = l1_distance(&log.profile_at(t), &reference, sw.window);
        rows.push(row);
    }
    let flagged = rows.windows(2).any(|w| w[1].l1 > (1.0 + SWEEP_SLACK) * w[0].l1);
    Ok(ConvergenceTable {
        reference: name,
        reference_cells: sw.reference_cells,
        window: sw.window,
        u0_l1: scn.initial.sample(scn.tracker.delta).l1_norm(sw.window),
        rows,
        flagged,
    })
}
