//! Lax wave curves, the homogeneous Riemann solver and the h-Riemann solver
//! that splices a stationary zero-wave `u⁺ = Φ_h(x_o, u⁻)` between the
//! negative-speed and the positive-speed families.
//!
//! Families are numbered from 1 to `n` throughout this module.

use crate::error::{Error, Result};
use crate::newton::{self, NewtonOptions};
use crate::quad::gauss4_composite;
use crate::source::SourceSpec;
use crate::system::{FieldKind, State, SystemSpec};

/// Strengths at or below this magnitude produce no wave.
pub const NULL_STRENGTH: f64 = 1e-13;
/// Strength under which shock and contact speeds use the mean of `λ_k`.
pub const TINY_WAVE: f64 = 1e-8;
const RAREFACTION_STEP: f64 = 1e-3;
const HUGONIOT_TOL: f64 = 1e-15;
/// Roundoff floor of the Hugoniot residual for O(1) fluxes.
const HUGONIOT_ACCEPT: f64 = 1e-12;
const FAN_TOL: f64 = 1e-10;
/// Noise floor of the composed curve maps: `r` is normalized through a
/// finite-difference `∇λ`, which leaves ~1e-10 relative jitter.
const FAN_ACCEPT: f64 = 1e-9;
const PHI_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WaveFamily {
    Physical(usize),
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaveKind {
    Shock,
    Rarefaction,
    Contact,
    ZeroJump,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryWave {
    pub family: WaveFamily,
    pub kind: WaveKind,
    pub left_state: State,
    pub right_state: State,
    pub speed_lo: f64,
    pub speed_hi: f64,
    /// `λ_k(u_r) - λ_k(u_l)` for GNL families, `l_k · Δu` for LD families and
    /// `∫ ω` over the lattice cell for the zero jump.
    pub strength: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveFan {
    pub left: State,
    pub right: State,
    pub waves: Vec<ElementaryWave>,
    pub u_minus: Option<State>,
    pub u_plus: Option<State>,
}

impl WaveFan {
    /// States between consecutive waves.
    pub fn intermediate_states(&self) -> Vec<State> {
        self.waves
            .iter()
            .take(self.waves.len().saturating_sub(1))
            .map(|w| w.right_state.clone())
            .collect()
    }

    /// Strength per physical family (zero where the family is absent).
    pub fn strengths(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for w in &self.waves {
            if let WaveFamily::Physical(k) = w.family {
                out[k - 1] += w.strength;
            }
        }
        out
    }

    pub fn zero_jump(&self) -> Option<&ElementaryWave> {
        self.waves.iter().find(|w| w.kind == WaveKind::ZeroJump)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Point of the `family` Lax curve through `u0` at parameter `eps`, together
/// with the Rankine–Hugoniot speed when the point lies on a Hugoniot branch.
fn curve_point(sys: &SystemSpec, family: usize, u0: &[f64], eps: f64) -> Result<(State, Option<f64>)> {
    sys.check_domain(u0)?;
    let k = family - 1;
    if eps == 0.0 {
        return Ok((u0.to_vec(), None));
    }
    if sys.is_scalar_polynomial() {
        let target = sys.lambda(0, u0)? + eps;
        let v = sys.scalar_speed_inverse(target, u0[0])?;
        if !sys.domain.contains(&[v]) {
            return Err(Error::CurveLeftDomain {
                family,
                reached: eps,
            });
        }
        return Ok((vec![v], None));
    }
    match sys.field_kind[k] {
        FieldKind::GenuinelyNonlinear if eps > 0.0 => integral_curve(sys, family, u0, eps).map(|u| (u, None)),
        FieldKind::GenuinelyNonlinear => hugoniot_point(sys, family, u0, eps, true),
        FieldKind::LinearlyDegenerate => hugoniot_point(sys, family, u0, eps, false),
    }
}

/// Integrates `u' = r_k(u)` over `[0, eps]` with classical RK4.
fn integral_curve(sys: &SystemSpec, family: usize, u0: &[f64], eps: f64) -> Result<State> {
    let k = family - 1;
    let steps = (eps.abs() / RAREFACTION_STEP).ceil().max(1.0) as usize;
    let dt = eps / steps as f64;
    let mut u = u0.to_vec();
    let field = |v: &[f64], reached: f64| -> Result<State> {
        sys.eigen_decompose(v)
            .map(|e| e.right_vector(k))
            .map_err(|_| Error::CurveLeftDomain { family, reached })
    };
    for s in 0..steps {
        let reached = s as f64 * dt;
        let k1 = field(&u, reached)?;
        let p1: State = u.iter().zip(&k1).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k2 = field(&p1, reached)?;
        let p2: State = u.iter().zip(&k2).map(|(a, b)| a + 0.5 * dt * b).collect();
        let k3 = field(&p2, reached)?;
        let p3: State = u.iter().zip(&k3).map(|(a, b)| a + dt * b).collect();
        let k4 = field(&p3, reached)?;
        for d in 0..u.len() {
            u[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
    }
    if !sys.domain.contains(&u) {
        return Err(Error::CurveLeftDomain {
            family,
            reached: eps,
        });
    }
    Ok(u)
}

/// Solves `f(u) - f(u0) = s (u - u0)` with the parametrization
/// `λ_k(u) - λ_k(u0) = eps` (GNL) or `l_k(u0) · (u - u0) = eps` (LD).
fn hugoniot_point(
    sys: &SystemSpec,
    family: usize,
    u0: &[f64],
    eps: f64,
    gnl: bool,
) -> Result<(State, Option<f64>)> {
    let k = family - 1;
    let n = sys.n;
    let e0 = sys.eigen_decompose(u0)?;
    let lam0 = e0.values[k];
    let l0 = e0.left_vector(k);
    let r0 = e0.right_vector(k);
    let guess_u: State = if gnl {
        // Second-order contact between integral curve and Hugoniot locus.
        integral_curve(sys, family, u0, eps).unwrap_or_else(|_| u0.iter().zip(&r0).map(|(a, r)| a + eps * r).collect())
    } else {
        u0.iter().zip(&r0).map(|(a, r)| a + eps * r).collect()
    };
    let f0 = sys.flux(u0);
    let mut x0 = guess_u.clone();
    x0.push(if gnl { lam0 + 0.5 * eps } else { lam0 });
    let opts = NewtonOptions {
        tol: HUGONIOT_TOL,
        accept: HUGONIOT_ACCEPT,
        max_iter: 50,
        fd_step: 1e-7,
        context: "Hugoniot locus",
    };
    let sol = newton::solve(x0, &opts, |x| {
        let u = &x[..n];
        let s = x[n];
        if !sys.domain.contains(u) {
            return Err(Error::CurveLeftDomain {
                family,
                reached: eps,
            });
        }
        let fu = sys.flux(u);
        let mut res: Vec<f64> = (0..n).map(|d| fu[d] - f0[d] - s * (u[d] - u0[d])).collect();
        let param = if gnl {
            sys.lambda(k, u)? - lam0 - eps
        } else {
            l0.iter().zip(u.iter().zip(u0)).map(|(l, (a, b))| l * (a - b)).sum::<f64>() - eps
        };
        res.push(param);
        Ok(res)
    })?;
    let s = sol[n];
    Ok((sol[..n].to_vec(), Some(s)))
}

/// Point at parameter `eps` along the `family` Lax curve through `u0`:
/// rarefaction branch for `eps > 0`, shock branch for `eps < 0` (GNL).
pub fn wave_curve(sys: &SystemSpec, family: usize, u0: &[f64], eps: f64) -> Result<State> {
    curve_point(sys, family, u0, eps).map(|(u, _)| u)
}

/// `Φ_h(x_o, u) = f⁻¹[f(u) + ∫_0^h g(x_o + s, u) ds]`.
pub fn phi_h(sys: &SystemSpec, src: &SourceSpec, x_o: f64, h: f64, u: &[f64]) -> Result<State> {
    sys.check_domain(u)?;
    let jump = src.integrate_g(x_o, h, u);
    if jump.iter().all(|v| *v == 0.0) {
        return Ok(u.to_vec());
    }
    let fu = sys.flux(u);
    let target: State = fu.iter().zip(&jump).map(|(a, b)| a + b).collect();
    let scale = target.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut v = u.to_vec();
    let mut res_norm = f64::INFINITY;
    for _ in 0..50 {
        let fv = sys.flux(&v);
        let res: Vec<f64> = fv.iter().zip(&target).map(|(a, b)| a - b).collect();
        res_norm = res.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        if res_norm <= PHI_TOL * scale {
            break;
        }
        let jac = sys.jacobian(&v);
        let rhs = nalgebra::DVector::from_iterator(sys.n, res.iter().map(|r| -r));
        let Some(delta) = jac.lu().solve(&rhs) else {
            return Err(Error::InverseDiverged {
                state: u.to_vec(),
                residual: res_norm,
            });
        };
        for d in 0..sys.n {
            v[d] += delta[d];
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::InverseDiverged {
                state: u.to_vec(),
                residual: res_norm,
            });
        }
    }
    if res_norm > PHI_TOL * scale {
        return Err(Error::InverseDiverged {
            state: u.to_vec(),
            residual: res_norm,
        });
    }
    sys.check_domain(&v)?;
    Ok(v)
}

fn chain(sys: &SystemSpec, families: std::ops::RangeInclusive<usize>, start: &[f64], eps: &[f64]) -> Result<Vec<(State, Option<f64>)>> {
    let mut out = Vec::new();
    let mut w = start.to_vec();
    for k in families {
        let (next, s) = curve_point(sys, k, &w, eps[k - 1])?;
        out.push((next.clone(), s));
        w = next;
    }
    Ok(out)
}

fn make_wave(sys: &SystemSpec, family: usize, left: State, right: State, eps: f64) -> Result<ElementaryWave> {
    let k = family - 1;
    let (kind, lo, hi) = match sys.field_kind[k] {
        FieldKind::GenuinelyNonlinear if eps > 0.0 => {
            (WaveKind::Rarefaction, sys.lambda(k, &left)?, sys.lambda(k, &right)?)
        }
        kind => {
            let s = jump_speed(sys, family, &left, &right, eps)?;
            let kind = if kind == FieldKind::GenuinelyNonlinear {
                WaveKind::Shock
            } else {
                WaveKind::Contact
            };
            (kind, s, s)
        }
    };
    Ok(ElementaryWave {
        family: WaveFamily::Physical(family),
        kind,
        left_state: left,
        right_state: right,
        speed_lo: lo,
        speed_hi: hi,
        strength: eps,
    })
}

/// Speed of a shock or contact of `family`. Below `TINY_WAVE` the jump is at
/// solver-noise level and the projected Rankine–Hugoniot speed is
/// meaningless; the mean of `λ_k` agrees with it to `O(σ²)`.
pub fn jump_speed(sys: &SystemSpec, family: usize, left: &[f64], right: &[f64], strength: f64) -> Result<f64> {
    if strength.abs() < TINY_WAVE {
        Ok(0.5 * (sys.lambda(family - 1, left)? + sys.lambda(family - 1, right)?))
    } else {
        Ok(rh_speed(sys, left, right))
    }
}

/// Least-squares Rankine–Hugoniot speed `Δf·Δu / |Δu|²`.
pub fn rh_speed(sys: &SystemSpec, left: &[f64], right: &[f64]) -> f64 {
    let fl = sys.flux(left);
    let fr = sys.flux(right);
    let mut num = 0.0;
    let mut den = 0.0;
    for d in 0..left.len() {
        let du = right[d] - left[d];
        num += (fr[d] - fl[d]) * du;
        den += du * du;
    }
    if den == 0.0 {
        sys.lambda(0, left).unwrap_or(0.0)
    } else {
        num / den
    }
}

/// `‖s Δu - Δf‖` for a jump travelling at speed `s`.
pub fn rh_residual(sys: &SystemSpec, left: &[f64], right: &[f64], s: f64) -> f64 {
    let fl = sys.flux(left);
    let fr = sys.flux(right);
    (0..left.len())
        .map(|d| {
            let r = s * (right[d] - left[d]) - (fr[d] - fl[d]);
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Builds waves for `families` from `start`, forcing the final state to `end`.
fn build_waves(
    sys: &SystemSpec,
    families: std::ops::RangeInclusive<usize>,
    start: &[f64],
    end: &[f64],
    eps: &[f64],
) -> Result<Vec<ElementaryWave>> {
    let fams: Vec<usize> = families.clone().collect();
    let points = chain(sys, families, start, eps)?;
    let last_active = fams.iter().rposition(|&k| eps[k - 1].abs() > NULL_STRENGTH);
    let mut waves = Vec::new();
    let mut left = start.to_vec();
    for (idx, &k) in fams.iter().enumerate() {
        let e = eps[k - 1];
        if e.abs() <= NULL_STRENGTH {
            continue;
        }
        let right = if Some(idx) == last_active {
            end.to_vec()
        } else {
            points[idx].0.clone()
        };
        let w = make_wave(sys, k, left, right.clone(), e)?;
        waves.push(w);
        left = right;
    }
    Ok(waves)
}

/// Solves the homogeneous Riemann problem `(u_l, u_r)` by Newton on the
/// composed wave-curve map in strength coordinates.
pub fn solve_homogeneous(sys: &SystemSpec, u_l: &[f64], u_r: &[f64]) -> Result<WaveFan> {
    sys.check_domain(u_l)?;
    sys.check_domain(u_r)?;
    let n = sys.n;
    let eps: Vec<f64> = if u_l == u_r {
        vec![0.0; n]
    } else if sys.is_scalar_polynomial() {
        vec![sys.lambda(0, u_r)? - sys.lambda(0, u_l)?]
    } else {
        let opts = NewtonOptions {
            tol: FAN_TOL,
            accept: FAN_ACCEPT,
            max_iter: 50,
            fd_step: 1e-7,
            context: "homogeneous Riemann problem",
        };
        newton::solve(vec![0.0; n], &opts, |e| {
            let pts = chain(sys, 1..=n, u_l, e)?;
            let end = &pts.last().expect("n >= 1").0;
            Ok(end.iter().zip(u_r).map(|(a, b)| a - b).collect())
        })?
    };
    let waves = build_waves(sys, 1..=n, u_l, u_r, &eps)?;
    Ok(WaveFan {
        left: u_l.to_vec(),
        right: u_r.to_vec(),
        waves,
        u_minus: None,
        u_plus: None,
    })
}

/// `∫_{x_o}^{x_o+h} ω`, the strength of a zero-wave at `x_o`.
pub fn zero_wave_strength(src: &SourceSpec, x_o: f64, h: f64) -> f64 {
    gauss4_composite(x_o, x_o + h, 8, |x| src.omega(x))
}

/// Solves the h-Riemann problem at `x_o`: families `1..=p` with negative
/// speed from `u_l` to `u⁻`, the zero jump to `u⁺ = Φ_h(x_o, u⁻)`, then
/// families `p+1..=n` with positive speed from `u⁺` to `u_r`.
pub fn solve_h(
    sys: &SystemSpec,
    src: &SourceSpec,
    x_o: f64,
    h: f64,
    u_l: &[f64],
    u_r: &[f64],
) -> Result<WaveFan> {
    sys.check_domain(u_l)?;
    sys.check_domain(u_r)?;
    let n = sys.n;
    let p = sys.p;
    let compose = |e: &[f64]| -> Result<(State, State, State)> {
        let minus = if p == 0 {
            u_l.to_vec()
        } else {
            chain(sys, 1..=p, u_l, e)?.pop().expect("p >= 1").0
        };
        let plus = phi_h(sys, src, x_o, h, &minus)?;
        let end = if p == n {
            plus.clone()
        } else {
            chain(sys, p + 1..=n, &plus, e)?.pop().expect("p < n").0
        };
        Ok((minus, plus, end))
    };
    let eps: Vec<f64> = if sys.is_scalar_polynomial() && p == 0 {
        let plus = phi_h(sys, src, x_o, h, u_l)?;
        vec![sys.lambda(0, u_r)? - sys.lambda(0, &plus)?]
    } else {
        let opts = NewtonOptions {
            tol: FAN_TOL,
            accept: FAN_ACCEPT,
            max_iter: 50,
            fd_step: 1e-7,
            context: "h-Riemann problem",
        };
        newton::solve(vec![0.0; n], &opts, |e| {
            let (_, _, end) = compose(e)?;
            Ok(end.iter().zip(u_r).map(|(a, b)| a - b).collect())
        })?
    };
    let (mut minus, mut plus, _) = compose(&eps)?;
    if p == n {
        // The right group is empty: pin u⁺ to u_r and pull u⁻ back consistently.
        plus = u_r.to_vec();
    }
    if p == 0 {
        minus = u_l.to_vec();
    }
    let mut waves = if p == 0 {
        Vec::new()
    } else {
        build_waves(sys, 1..=p, u_l, &minus, &eps)?
    };
    waves.push(ElementaryWave {
        family: WaveFamily::Zero,
        kind: WaveKind::ZeroJump,
        left_state: minus.clone(),
        right_state: plus.clone(),
        speed_lo: 0.0,
        speed_hi: 0.0,
        strength: zero_wave_strength(src, x_o, h),
    });
    if p < n {
        waves.extend(build_waves(sys, p + 1..=n, &plus, u_r, &eps)?);
    }
    Ok(WaveFan {
        left: u_l.to_vec(),
        right: u_r.to_vec(),
        waves,
        u_minus: Some(minus),
        u_plus: Some(plus),
    })
}

/// Self-similar state at ray `ξ = (x - x_o)/t`.
pub fn sample_fan(sys: &SystemSpec, fan: &WaveFan, xi: f64) -> State {
    for w in &fan.waves {
        if xi < w.speed_lo {
            return w.left_state.clone();
        }
        if w.kind == WaveKind::Rarefaction && xi < w.speed_hi {
            if let WaveFamily::Physical(k) = w.family {
                let eps = xi - w.speed_lo;
                if let Ok(u) = wave_curve(sys, k, &w.left_state, eps) {
                    return u;
                }
            }
            return w.left_state.clone();
        }
    }
    fan.right.clone()
}

/// Maximum flux-balance and Φ_h residuals of an h-fan.
pub fn h_fan_residuals(sys: &SystemSpec, src: &SourceSpec, x_o: f64, h: f64, fan: &WaveFan) -> Result<(f64, f64)> {
    let minus = fan.u_minus.as_ref().ok_or_else(|| Error::InvalidInput("not an h-fan".into()))?;
    let plus = fan.u_plus.as_ref().expect("h-fan carries u_plus");
    let jump = src.integrate_g(x_o, h, minus);
    let fm = sys.flux(minus);
    let fp = sys.flux(plus);
    let balance = (0..sys.n)
        .map(|d| (fp[d] - fm[d] - jump[d]).abs())
        .fold(0.0, f64::max);
    let phi = phi_h(sys, src, x_o, h, minus)?;
    Ok((balance, max_abs_diff(&phi, plus)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::DomainBox;

    #[test]
    fn scalar_wave_curve_examples() {
        let sys = SystemSpec::burgers();
        assert!((wave_curve(&sys, 1, &[1.0], 0.2).unwrap()[0] - 1.2).abs() < 1e-15);
        assert!((wave_curve(&sys, 1, &[1.2], -0.4).unwrap()[0] - 0.8).abs() < 1e-15);
        assert!(matches!(
            wave_curve(&sys, 1, &[1.4], 0.3),
            Err(Error::CurveLeftDomain { .. })
        ));
    }

    #[test]
    fn coupled_zero_parameter_is_identity() {
        let sys = SystemSpec::coupled2x2().with_domain(DomainBox::around(&[0.0, 0.0], 0.5));
        assert_eq!(wave_curve(&sys, 2, &[0.0, 0.0], 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn coupled_curves_are_parametrized_by_speed() {
        let sys = SystemSpec::coupled2x2();
        let u0 = [1.0, 1.0];
        for fam in 1..=2 {
            for eps in [-2e-3, -5e-4, 5e-4, 2e-3] {
                let (u, s) = curve_point(&sys, fam, &u0, eps).unwrap();
                let dl = sys.lambda(fam - 1, &u).unwrap() - sys.lambda(fam - 1, &u0).unwrap();
                assert!((dl - eps).abs() < 1e-6 * eps.abs().max(1e-3), "{fam} {eps} {dl}");
                if let Some(s) = s {
                    assert!(rh_residual(&sys, &u0, &u, s) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn burgers_homogeneous_examples() {
        let sys = SystemSpec::burgers();
        let fan = solve_homogeneous(&sys, &[1.2], &[0.8]).unwrap();
        assert_eq!(fan.waves.len(), 1);
        let w = &fan.waves[0];
        assert_eq!(w.kind, WaveKind::Shock);
        assert!((w.speed_lo - 1.0).abs() < 1e-15 && (w.strength + 0.4).abs() < 1e-15);

        let fan = solve_homogeneous(&sys, &[0.8], &[1.2]).unwrap();
        let w = &fan.waves[0];
        assert_eq!(w.kind, WaveKind::Rarefaction);
        assert_eq!((w.speed_lo, w.speed_hi), (0.8, 1.2));
        assert!((w.strength - 0.4).abs() < 1e-15);

        let fan = solve_homogeneous(&sys, &[1.0], &[1.0]).unwrap();
        assert!(fan.waves.is_empty());
        assert_eq!(fan.strengths(1), vec![0.0]);
    }

    #[test]
    fn phi_h_examples() {
        let sys = SystemSpec::burgers();
        assert_eq!(phi_h(&sys, &SourceSpec::none(), 0.0, 0.1, &[1.0]).unwrap(), vec![1.0]);
        let up = SourceSpec::constant(vec![0.5], None);
        let v = phi_h(&sys, &up, 0.0, 0.1, &[1.0]).unwrap()[0];
        assert!((v - 1.048_808_848_2).abs() < 1e-10);
        let down = SourceSpec::constant(vec![-0.5], None);
        let v = phi_h(&sys, &down, 0.0, 0.1, &[0.8]).unwrap()[0];
        assert!((v - 0.734_846_922_8).abs() < 1e-10);
    }

    #[test]
    fn burgers_h_fan() {
        let sys = SystemSpec::burgers();
        let src = SourceSpec::constant(vec![0.5], None);
        let fan = solve_h(&sys, &src, 0.0, 0.1, &[1.0], &[1.0]).unwrap();
        assert_eq!(fan.u_minus.as_deref(), Some(&[1.0][..]));
        let up = fan.u_plus.as_ref().unwrap()[0];
        assert!((up - 1.048_808_848_2).abs() < 1e-10);
        assert_eq!(fan.waves.len(), 2);
        assert_eq!(fan.waves[0].kind, WaveKind::ZeroJump);
        assert!((fan.waves[0].strength - 0.05).abs() < 1e-15);
        let shock = &fan.waves[1];
        assert_eq!(shock.kind, WaveKind::Shock);
        assert!((shock.speed_lo - 1.024_404_424_1).abs() < 1e-10);
    }

    #[test]
    fn zero_source_h_fan_matches_homogeneous() {
        let sys = SystemSpec::coupled2x2();
        let ul = [1.0, 1.0];
        let ur = [1.02, 0.99];
        let hom = solve_homogeneous(&sys, &ul, &ur).unwrap();
        let hf = solve_h(&sys, &SourceSpec::none(), 0.0, 0.1, &ul, &ur).unwrap();
        let zj = hf.zero_jump().unwrap();
        assert_eq!(zj.strength, 0.0);
        assert_eq!(zj.left_state, zj.right_state);
        let a = hom.strengths(2);
        let b = hf.strengths(2);
        for k in 0..2 {
            assert!((a[k] - b[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn coupled_h_fan_at_reference_state() {
        let sys = SystemSpec::coupled2x2();
        let src = SourceSpec::constant(vec![0.1, 0.1], None);
        let u = [1.0, 1.0];
        let fan = solve_h(&sys, &src, 0.0, 0.1, &u, &u).unwrap();
        let (bal, phi) = h_fan_residuals(&sys, &src, 0.0, 0.1, &fan).unwrap();
        assert!(bal <= 1e-9 && phi <= 1e-9, "{bal} {phi}");
        let zi = fan.waves.iter().position(|w| w.kind == WaveKind::ZeroJump).unwrap();
        assert_eq!(zi, 1);
        assert!(fan.waves[0].speed_hi < 0.0);
        assert!(fan.waves[2].speed_lo > 0.0);
        let minus = fan.u_minus.as_ref().unwrap();
        let plus = fan.u_plus.as_ref().unwrap();
        let fm = sys.flux(minus);
        let fp = sys.flux(plus);
        for d in 0..2 {
            assert!((fp[d] - fm[d] - 0.01).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_fan_examples() {
        let sys = SystemSpec::burgers();
        let fan = solve_homogeneous(&sys, &[0.8], &[1.2]).unwrap();
        assert!((sample_fan(&sys, &fan, 1.0)[0] - 1.0).abs() < 1e-14);
        assert_eq!(sample_fan(&sys, &fan, 0.8 - 1.0 - 1e-9), vec![0.8]);
        assert_eq!(sample_fan(&sys, &fan, 1.2 + 1.0 + 1e-9), vec![1.2]);
    }

    #[test]
    fn linear_contacts_satisfy_rankine_hugoniot() {
        let a = nalgebra::DMatrix::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, 1.0]);
        let sys = SystemSpec::linear("lin", a, DomainBox::around(&[0.0, 0.0], 1.0), 1, 0.5);
        let fan = solve_homogeneous(&sys, &[0.1, 0.2], &[-0.1, 0.3]).unwrap();
        assert_eq!(fan.waves.len(), 2);
        for w in &fan.waves {
            assert_eq!(w.kind, WaveKind::Contact);
            assert!(rh_residual(&sys, &w.left_state, &w.right_state, w.speed_lo) < 1e-9);
        }
        assert!((fan.waves[0].speed_lo + 1.0).abs() < 1e-8);
        assert!((fan.waves[1].speed_lo - 1.0).abs() < 1e-8);
    }
}
