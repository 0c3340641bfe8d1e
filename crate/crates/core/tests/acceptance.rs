//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each and exits non-zero if any of them fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wavefront::diagnostics::{
    fit_interaction_constant, functionals, lsc_probe, oleinik_report, proof_functionals, IntervalSet, MuQuery,
    DEFAULT_C0,
};
use wavefront::driver::{compare_refinements, load, run_scenario_in};
use wavefront::log::{EventKind, FrontKind, Solver, TrajectoryLog};
use wavefront::profile::Profile;
use wavefront::riemann::{h_fan_residuals, solve_h, WaveFamily};
use wavefront::tracker::{run, TrackerConfig};
use wavefront::{SourceSpec, SystemSpec};

const NU: f64 = 0.005;
const EPS: f64 = 1e-6;
const DAMPING: f64 = 0.3;
const CASES: u64 = 10;
const H_LEVELS: [f64; 3] = [0.1, 0.05, 0.025];
const TIME_LIMIT: f64 = 60.0;
const DQ_NOISE: f64 = 1e-12;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

struct Run {
    label: String,
    sys: SystemSpec,
    src: SourceSpec,
    cfg: TrackerConfig,
    u0: Profile,
    log: TrajectoryLog,
}

impl Run {
    fn new(label: String, sys: SystemSpec, src: SourceSpec, cfg: TrackerConfig, u0: Profile) -> Self {
        let log = run(&sys, &src, &cfg, &u0).unwrap_or_else(|e| panic!("{}: {}", label, e));
        Run { label, sys, src, cfg, u0, log }
    }
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn damped() -> SourceSpec {
    SourceSpec::damping(DAMPING, (-1.0, 1.0), 1.5)
}

/// Step (one break) or staircase (two or three breaks) with values in [1.2, 1.45].
fn small_data(seed: u64) -> Profile {
    let mut rng = StdRng::seed_from_u64(seed);
    let k = rng.gen_range(1..=3);
    let mut breaks: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.8..0.8)).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    let values: Vec<Vec<f64>> = (0..=breaks.len()).map(|_| vec![rng.gen_range(1.2..1.45)]).collect();
    if breaks.len() == 1 {
        Profile::Step {
            left: values[0].clone(),
            right: values[1].clone(),
            at: breaks[0],
        }
    } else {
        Profile::Staircase { breaks, values }
    }
}

fn rarefaction_run() -> Run {
    let u0 = Profile::Step {
        left: vec![0.8],
        right: vec![1.2],
        at: 0.0,
    };
    let cfg = TrackerConfig::new(EPS, 0.1, NU, 1.0);
    Run::new("rarefaction".into(), SystemSpec::burgers(), SourceSpec::none(), cfg, u0)
}

/// `CASES` seeded data sets, each tracked at every `h` in `H_LEVELS`.
fn damped_runs() -> Vec<Vec<Run>> {
    (0..CASES)
        .map(|seed| {
            H_LEVELS
                .iter()
                .map(|&h| {
                    let cfg = TrackerConfig::new(EPS, h, NU, 1.0);
                    Run::new(format!("damped seed {} h {}", seed, h), SystemSpec::burgers(), damped(), cfg, small_data(seed))
                })
                .collect()
        })
        .collect()
}

fn coupled_runs() -> Vec<Run> {
    let sys = SystemSpec::coupled2x2();
    let src = SourceSpec::constant(vec![0.001, -0.001], Some((-0.5, 0.5)));
    let mut rng = StdRng::seed_from_u64(77);
    (0..3)
        .map(|k| {
            // jumps of both families cross each other inside the source support
            let values = (0..4)
                .map(|_| vec![1.0 + rng.gen_range(-0.005..0.005), 1.0 + rng.gen_range(-0.005..0.005)])
                .collect();
            let u0 = Profile::Staircase {
                breaks: vec![-0.4, 0.0, 0.4],
                values,
            };
            let cfg = TrackerConfig::new(EPS, 0.2, 0.002, 0.5);
            Run::new(format!("coupled {}", k), sys.clone(), src.clone(), cfg, u0)
        })
        .collect()
}

fn criterion_1(r: &Run) -> Verdict {
    let j = IntervalSet::half_open(&[(0.9, 1.1)]).unwrap();
    let rep = oleinik_report(&r.log, 1, &j, 0.0, 1.0).unwrap();
    let lhs_ok = (rep.lhs - 0.2).abs() <= 2.0 * NU;
    let terms_ok = rep.interaction_term == 0.0 && rep.source_term == 0.0;
    let c_ok = rep.c_emp <= 1.0 + 10.0 * NU;
    Verdict::new(
        lhs_ok && terms_ok && c_ok,
        format!(
            "mu+(J) = {:.6} (target 0.2 +- {}), Q_h drop = {:e}, source term = {:e}, C_emp = {:.6} (<= {})",
            rep.lhs,
            2.0 * NU,
            rep.interaction_term,
            rep.source_term,
            rep.c_emp,
            1.0 + 10.0 * NU
        ),
    )
}

fn criterion_2(runs: &[Vec<Run>]) -> Verdict {
    let j = IntervalSet::half_open(&[(-1.0, 3.0)]).unwrap();
    let mut worst_c: f64 = 0.0;
    let mut worst_growth: f64 = 0.0;
    let mut failures = Vec::new();
    for (seed, levels) in runs.iter().enumerate() {
        let c: Vec<f64> = levels
            .iter()
            .map(|r| oleinik_report(&r.log, 1, &j, 0.0, 1.0).unwrap().c_emp)
            .collect();
        for (k, w) in c.windows(2).enumerate() {
            let growth = if w[0] > 0.0 { w[1] / w[0] - 1.0 } else if w[1] > 1e-12 { f64::INFINITY } else { 0.0 };
            worst_growth = worst_growth.max(growth);
            if growth > 0.05 {
                failures.push(format!("seed {} h {} -> {}: {:?}", seed, H_LEVELS[k], H_LEVELS[k + 1], c));
            }
        }
        worst_c = worst_c.max(c.iter().cloned().fold(0.0, f64::max));
    }
    let pass = worst_c <= 20.0 && failures.is_empty();
    let mut detail = format!(
        "{} cases x {} levels, max C_emp = {:.4} (<= 20), worst growth under refinement = {:.2}% (<= 5%)",
        runs.len(),
        H_LEVELS.len(),
        worst_c,
        100.0 * worst_growth
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Verdict::new(pass, detail)
}

/// Largest `(u(y) - u(x)) / (y - x)` over pairs of rarefaction fronts at
/// `t`, with `u` taken as the state to the right of each front. Rarefaction
/// fronts sample the continuous part of the solution; pairs touching a shock
/// or a zero wave measure the distance to a jump, which closes to zero as
/// the shock absorbs the fan.
fn max_positive_slope(log: &TrajectoryLog, t: f64) -> f64 {
    let pts: Vec<(f64, f64)> = log
        .fronts_at(t)
        .iter()
        .filter(|f| f.kind == FrontKind::Rarefaction)
        .map(|f| (f.position(t), f.right_state[0]))
        .collect();
    let mut best = f64::NEG_INFINITY;
    for (a, &(xa, ua)) in pts.iter().enumerate() {
        for &(xb, ub) in &pts[a + 1..] {
            if ub > ua {
                best = best.max((ub - ua) / (xb - xa));
            }
        }
    }
    best
}

fn criterion_3(runs: &[Vec<Run>]) -> Verdict {
    let bound = (DAMPING * 1.0f64).exp() / 1.0 * (1.0 + 5.0 * NU);
    let mut worst = (f64::NEG_INFINITY, String::new());
    for r in runs.iter().flatten() {
        let s = max_positive_slope(&r.log, 1.0);
        if s > worst.0 {
            worst = (s, r.label.clone());
        }
    }
    Verdict::new(
        worst.0 <= bound,
        format!("max slope = {:.6} ({}), bound e^0.3 (1 + 5 nu) = {:.6}", worst.0, worst.1, bound),
    )
}

fn criterion_4() -> Verdict {
    let h = 0.1;
    let mut worst_res: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for (sys, radius, g_max) in [(SystemSpec::burgers(), 0.4, 0.3), (SystemSpec::coupled2x2(), 0.05, 0.1)] {
        let mut rng = StdRng::seed_from_u64(2024);
        let c = sys.domain.center();
        let state = |rng: &mut StdRng| -> Vec<f64> { c.iter().map(|m| m + rng.gen_range(-radius..radius)).collect() };
        for k in 0..100 {
            let ul = state(&mut rng);
            let ur = state(&mut rng);
            let g: Vec<f64> = (0..sys.n).map(|_| rng.gen_range(-g_max..g_max)).collect();
            let x_o = rng.gen_range(-1.0..1.0);
            let src = SourceSpec::constant(g.clone(), None);
            let fan = match solve_h(&sys, &src, x_o, h, &ul, &ur) {
                Ok(f) => f,
                Err(e) => {
                    failures.push(format!("{} case {}: {}", sys.name, k, e));
                    continue;
                }
            };
            let (balance, phi) = h_fan_residuals(&sys, &src, x_o, h, &fan).unwrap();
            worst_res = worst_res.max(balance).max(phi);
            if balance > 1e-9 || phi > 1e-9 {
                failures.push(format!("{} case {}: residuals {:e} {:e}", sys.name, k, balance, phi));
            }
            for w in &fan.waves {
                if let WaveFamily::Physical(i) = w.family {
                    let margin = if i <= sys.p { -w.speed_hi } else { w.speed_lo };
                    worst_margin = worst_margin.min(margin / sys.c);
                    if margin < sys.c / 2.0 {
                        failures.push(format!("{} case {} family {}: margin {}", sys.name, k, i, margin));
                    }
                }
            }
        }
    }
    let mut detail = format!(
        "200 triples, max residual = {:e} (<= 1e-9), min speed margin = {:.4} c (>= 0.5 c)",
        worst_res, worst_margin
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Verdict::new(failures.is_empty(), detail)
}

fn criterion_5(all: &[&Run]) -> (Verdict, f64) {
    let mut worst_dq = f64::NEG_INFINITY;
    let mut worst_order: f64 = 0.0;
    for r in all {
        for e in &r.log.events {
            if e.kind == EventKind::Physical && e.solver == Solver::Accurate {
                worst_dq = worst_dq.max(e.dq);
            }
        }
        worst_order = worst_order.max(functionals(&r.log, DEFAULT_C0).ordering_violation());
    }
    let c = fit_interaction_constant(all.iter().map(|r| &r.log));
    // strengths carry solver noise, so a flat Q_h may read as +1e-17
    let pass = worst_dq <= DQ_NOISE && worst_order <= 1e-12 && c.is_finite();
    (
        Verdict::new(
            pass,
            format!(
                "{} runs, max dQ_h at accurate physical events = {:e} (<= {:e}), fitted C = {:.6}, \
                 max ordering violation = {:e} (<= 1e-12)",
                all.len(),
                worst_dq,
                DQ_NOISE,
                c,
                worst_order
            ),
        ),
        c,
    )
}

fn criterion_6() -> Verdict {
    let scn = load(&scenarios().join("damped_burgers.scn")).unwrap();
    let table = compare_refinements(&scn).unwrap();
    let l1: Vec<f64> = table.rows.iter().map(|r| r.l1).collect();
    let monotone = l1.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    let finest = *l1.last().unwrap();
    let cap = 0.02 * table.u0_l1;
    Verdict::new(
        monotone && finest <= cap && !table.flagged,
        format!(
            "reference {} ({} cells), L1 distances {:?}, finest {:.5} (<= {:.5})",
            table.reference, table.reference_cells, l1, finest, cap
        ),
    )
}

fn criterion_7() -> Verdict {
    let sys = SystemSpec::burgers();
    let src = damped();
    let cfg = TrackerConfig::new(EPS, 0.1, 0.02, 1.0);
    let queries = [
        MuQuery {
            family: 1,
            j: IntervalSet::open(&[(-0.5, 0.5)]).unwrap(),
        },
        MuQuery {
            family: 1,
            j: IntervalSet::half_open(&[(-0.5, 0.5)]).unwrap(),
        },
    ];
    let ks: Vec<f64> = (1..=8).map(|k| k as f64).collect();
    let step = |l: f64, r: f64, at: f64| Profile::Step {
        left: vec![l],
        right: vec![r],
        at,
    };
    let sequences: Vec<(&str, Vec<Profile>, Profile)> = vec![
        (
            "merging shocks",
            ks.iter()
                .map(|k| Profile::Staircase {
                    breaks: vec![0.0, 0.5 / k],
                    values: vec![vec![1.4], vec![1.2], vec![0.9]],
                })
                .collect(),
            step(1.4, 0.9, 0.0),
        ),
        (
            "smoothed step",
            ks.iter()
                .map(|k| Profile::Ramp {
                    left: vec![1.3],
                    right: vec![0.8],
                    from: -0.25 / k,
                    to: 0.25 / k,
                })
                .collect(),
            step(1.3, 0.8, 0.0),
        ),
        (
            "translated profile",
            ks.iter().map(|k| step(1.3, 1.0, -0.3 / k)).collect(),
            step(1.3, 1.0, 0.0),
        ),
    ];
    let mut parts = Vec::new();
    let mut worst = f64::INFINITY;
    for (name, seq, limit) in &sequences {
        let rep = lsc_probe(&sys, &src, &cfg, seq, limit, DEFAULT_C0, &queries).unwrap();
        worst = worst.min(rep.min_margin());
        parts.push(format!("{} {:.3e}", name, rep.min_margin()));
    }
    Verdict::new(worst >= -1e-9, format!("min margins: {} (>= -1e-9)", parts.join(", ")))
}

/// Funnels `[a, b)` at the final time used for the proof functionals.
fn funnels(r: &Run) -> Vec<(usize, f64, f64)> {
    if r.sys.n == 1 {
        vec![(1, 0.5, 1.0), (1, 1.0, 1.5), (1, 1.5, 2.0)]
    } else {
        vec![(1, -0.3, 0.0), (2, 0.0, 0.3)]
    }
}

fn criterion_8(all: &[&Run], c: f64) -> Verdict {
    let (mut mono, mut kb, mut jump) = (0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut count = 0;
    let mut failures = Vec::new();
    for r in all {
        for (i, a, b) in funnels(r) {
            let series = proof_functionals(&r.sys, &r.log, i, a, b, r.cfg.t_end).unwrap();
            count += 1;
            let (m, k, j) = (series.monotonicity_violation(), series.kbound_excess(), series.jump_excess(c));
            mono = mono.max(m);
            kb = kb.max(k);
            jump = jump.max(j);
            if m > 1e-9 || k > 1e-9 || j > 1e-9 {
                failures.push(format!("{} funnel {} [{}, {}): {:e} {:e} {:e}", r.label, i, a, b, m, k, j));
            }
        }
    }
    let mut detail = format!(
        "{} funnels, max Phi decrease = {:e}, max K c_emp excess = {:e}, max |dPhi| - C |dQ_h| = {:e} (all <= 1e-9)",
        count, mono, kb, jump
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Verdict::new(failures.is_empty(), detail)
}

fn criterion_9(all: &[&Run]) -> Verdict {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().unwrap();
    for (k, r) in all.iter().enumerate() {
        let again = run(&r.sys, &r.src, &r.cfg, &r.u0).unwrap();
        if again.to_string() != r.log.to_string() {
            failures.push(format!("{} not reproducible", r.label));
        }
        let path = dir.path().join(format!("run{}.log", k));
        r.log.write(&path).unwrap();
        if TrajectoryLog::read(&path).unwrap() != r.log {
            failures.push(format!("{} log round trip", r.label));
        }
    }
    let mut files = 0;
    let mut names: Vec<PathBuf> = fs::read_dir(scenarios()).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for path in &names {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ra = run_scenario_in(path, Some(a.path()), false);
        let rb = run_scenario_in(path, Some(b.path()), false);
        if ra.code != rb.code || ra.message != rb.message || ra.artifacts.len() != rb.artifacts.len() {
            failures.push(format!("{}: outcomes differ", path.display()));
            continue;
        }
        for (x, y) in ra.artifacts.iter().zip(&rb.artifacts) {
            files += 1;
            if fs::read(x).unwrap() != fs::read(y).unwrap() {
                failures.push(format!("{} differs", x.display()));
            }
        }
    }
    let mut detail = format!("{} runs repeated and round-tripped, {} scenarios run twice, {} artifacts compared", all.len(), names.len(), files);
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Verdict::new(failures.is_empty(), detail)
}

fn report(n: usize, name: &str, start: Instant, v: Verdict) -> bool {
    let secs = start.elapsed().as_secs_f64();
    let pass = v.pass && secs <= TIME_LIMIT;
    println!(
        "criterion {} ({}): {} [{:.1} s] {}",
        n,
        name,
        if pass { "PASS" } else { "FAIL" },
        secs,
        v.detail
    );
    pass
}

fn main() {
    let mut ok = true;

    let t = Instant::now();
    let rare = rarefaction_run();
    ok &= report(1, "centered rarefaction decay", t, criterion_1(&rare));

    let t = Instant::now();
    let damped = damped_runs();
    ok &= report(2, "damped decay constant", t, criterion_2(&damped));

    let t = Instant::now();
    ok &= report(3, "one-sided slope bound", t, criterion_3(&damped));

    let t = Instant::now();
    ok &= report(4, "h-Riemann solver", t, criterion_4());

    let coupled = coupled_runs();
    let mut all: Vec<&Run> = vec![&rare];
    all.extend(damped.iter().flatten());
    all.extend(coupled.iter());

    let t = Instant::now();
    let (v, c) = criterion_5(&all);
    ok &= report(5, "functional accounting", t, v);

    let t = Instant::now();
    ok &= report(6, "refinement sweep", t, criterion_6());

    let t = Instant::now();
    ok &= report(7, "lower semicontinuity", t, criterion_7());

    let t = Instant::now();
    ok &= report(8, "funnel functionals", t, criterion_8(&all, c));

    let t = Instant::now();
    ok &= report(9, "determinism and serialization", t, criterion_9(&all));

    if !ok {
        std::process::exit(1);
    }
}
