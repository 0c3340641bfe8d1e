//! Reference solutions independent of the front tracker: the Lax–Oleinik
//! formula for convex scalar laws, the Riccati slope bound, and a Godunov
//! scheme Strang-split with the source.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::profile::{PiecewiseConstant, Profile};
use crate::riemann;
use crate::source::SourceSpec;
use crate::system::{State, SystemSpec};

pub use crate::profile::l1_distance;

const LAX_OLEINIK_STEP: f64 = 1e-4;

/// `e^{Lip(g) t} / (κ t)`.
pub fn riccati_bound(kappa: f64, lip_g: f64, t: f64) -> f64 {
    (lip_g * t).exp() / (kappa * t)
}

fn scalar_range(u0: &Profile) -> (f64, f64) {
    let (lo, hi) = u0.window();
    let mut vals: Vec<f64> = u0.sample(1e-3).values.iter().map(|v| v[0]).collect();
    for x in [lo, 0.5 * (lo + hi), hi] {
        vals.push(u0.value(x)[0]);
    }
    vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)))
}

/// Exact entropy solution of a convex scalar law without source at `(t, x)`,
/// by minimizing `U0(y) + t f*((x - y)/t)` over initial points `y`.
pub fn lax_oleinik(sys: &SystemSpec, u0: &Profile, t: f64, x: f64) -> Result<f64> {
    if sys.n != 1 || sys.kappa.is_none() {
        return Err(Error::InvalidInput("the variational formula needs a convex scalar flux".into()));
    }
    if let Profile::Constant(c) = u0 {
        return Ok(c[0]);
    }
    let (umin, umax) = scalar_range(u0);
    let speed = |u: f64| sys.lambda(0, &[u]);
    let (smin, smax) = (speed(umin)?, speed(umax)?);
    let inverse = |q: f64| sys.scalar_speed_inverse(q, 0.5 * (umin + umax));
    // f*(q) = q v - f(v) with f'(v) = q
    let conjugate = |q: f64| -> Result<f64> {
        let v = inverse(q)?;
        Ok(q * v - sys.flux(&[v])[0])
    };
    let big_u = |y: f64| -> f64 {
        if y >= 0.0 {
            u0.integral(0.0, y)[0]
        } else {
            -u0.integral(y, 0.0)[0]
        }
    };
    let objective = |y: f64| -> Result<f64> { Ok(big_u(y) + t * conjugate((x - y) / t)?) };
    let (ylo, yhi) = (x - t * smax, x - t * smin);
    let steps = ((yhi - ylo) / LAX_OLEINIK_STEP).ceil().max(1.0) as usize;
    let mut best = (f64::INFINITY, ylo);
    for k in 0..=steps {
        let y = ylo + (yhi - ylo) * k as f64 / steps as f64;
        let v = objective(y)?;
        if v < best.0 {
            best = (v, y);
        }
    }
    let h = (yhi - ylo) / steps as f64;
    let (mut a, mut b) = ((best.1 - h).max(ylo), (best.1 + h).min(yhi));
    for _ in 0..100 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if objective(m1)? <= objective(m2)? {
            b = m2;
        } else {
            a = m1;
        }
    }
    let y = 0.5 * (a + b);
    inverse((x - y) / t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, cells: usize) -> Self {
        Grid { x_min, x_max, cells }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.cells as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        self.x_min + (k as f64 + 0.5) * self.dx()
    }
}

/// Cell averages on a uniform grid at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub grid: Grid,
    pub t: f64,
    pub cfl: f64,
    pub steps: usize,
    pub values: Vec<State>,
}

impl GridSolution {
    /// Piecewise constant on cells, extended by the edge values.
    pub fn to_piecewise(&self) -> PiecewiseConstant {
        let dx = self.grid.dx();
        let breaks = (0..=self.grid.cells).map(|k| self.grid.x_min + k as f64 * dx).collect();
        let mut values = Vec::with_capacity(self.grid.cells + 2);
        values.push(self.values[0].clone());
        values.extend(self.values.iter().cloned());
        values.push(self.values[self.grid.cells - 1].clone());
        PiecewiseConstant { breaks, values }
    }

    /// `t,x,value` rows with the cell centre as `x`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let joined: Vec<String> = v.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "{},{},{}", self.t, self.grid.center(k), joined.join(";"));
        }
        out
    }
}

/// Interface flux from the exact Riemann solution at `ξ = 0`; the convex
/// scalar case uses the closed form.
struct GodunovFlux<'a> {
    sys: &'a SystemSpec,
    /// Minimizer of a convex scalar flux.
    sonic: Option<f64>,
}

impl<'a> GodunovFlux<'a> {
    fn new(sys: &'a SystemSpec) -> Result<Self> {
        let sonic = if sys.n == 1 && sys.kappa.is_some() && sys.is_scalar_polynomial() {
            Some(sys.scalar_speed_inverse(0.0, sys.domain.center()[0])?)
        } else {
            None
        };
        Ok(GodunovFlux { sys, sonic })
    }

    fn flux(&self, ul: &[f64], ur: &[f64]) -> Result<State> {
        if let Some(star) = self.sonic {
            let f = |u: f64| self.sys.flux(&[u])[0];
            let (a, b) = (ul[0], ur[0]);
            let v = if a <= b { f(star.clamp(a, b)) } else { f(a).max(f(b)) };
            return Ok(vec![v]);
        }
        if ul == ur {
            return Ok(self.sys.flux(ul));
        }
        let fan = riemann::solve_homogeneous(self.sys, ul, ur)?;
        Ok(self.sys.flux(&riemann::sample_fan(self.sys, &fan, 0.0)))
    }
}

fn source_step(src: &SourceSpec, grid: &Grid, values: &mut [State], dt: f64) {
    if src.is_zero() {
        return;
    }
    for (k, u) in values.iter_mut().enumerate() {
        let x = grid.center(k);
        let g1 = src.g(x, u);
        let mid: State = u.iter().zip(&g1).map(|(a, g)| a + 0.5 * dt * g).collect();
        let g2 = src.g(x, &mid);
        for (c, g) in u.iter_mut().zip(g2) {
            *c += dt * g;
        }
    }
}

/// First-order Godunov scheme, Strang-split with an explicit midpoint step
/// for `u_t = g(x, u)` evaluated at cell centres; transmissive boundaries.
pub fn godunov_split(
    sys: &SystemSpec,
    src: &SourceSpec,
    u0: &Profile,
    grid: &Grid,
    t_end: f64,
    cfl: f64,
) -> Result<GridSolution> {
    if cfl > 0.5 {
        return Err(Error::CflViolation { cfl });
    }
    if grid.cells == 0 || !(grid.x_max > grid.x_min) {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    let dx = grid.dx();
    let pc = u0.as_piecewise_constant();
    let mut values: Vec<State> = (0..grid.cells)
        .map(|k| {
            let a = grid.x_min + k as f64 * dx;
            let b = a + dx;
            // cells inside one constant piece keep the exact value
            if let Some(pc) = &pc {
                if !pc.breaks.iter().any(|&x| a < x && x < b) {
                    return pc.value(a).clone();
                }
            }
            u0.integral(a, b).into_iter().map(|v| v / dx).collect()
        })
        .collect();
    for (k, v) in values.iter().enumerate() {
        if !sys.domain.contains(v) {
            return Err(Error::DomainEscape {
                time: 0.0,
                position: grid.center(k),
                state: v.clone(),
            });
        }
    }
    let speed = sys.max_abs_speed().max(1e-12);
    let steps = if t_end > 0.0 {
        (t_end * speed / (cfl * dx)).ceil().max(1.0) as usize
    } else {
        0
    };
    let dt = if steps > 0 { t_end / steps as f64 } else { 0.0 };
    let used_cfl = dt * speed / dx;
    let flux = GodunovFlux::new(sys)?;
    let n = sys.n;
    let mut fluxes: Vec<State> = vec![vec![0.0; n]; grid.cells + 1];
    for step in 0..steps {
        source_step(src, grid, &mut values, 0.5 * dt);
        for (e, slot) in fluxes.iter_mut().enumerate() {
            let l = &values[e.saturating_sub(1)];
            let r = &values[e.min(grid.cells - 1)];
            *slot = flux.flux(l, r)?;
        }
        for (k, u) in values.iter_mut().enumerate() {
            for d in 0..n {
                u[d] -= dt / dx * (fluxes[k + 1][d] - fluxes[k][d]);
            }
        }
        source_step(src, grid, &mut values, 0.5 * dt);
        let time = (step + 1) as f64 * dt;
        for (k, v) in values.iter().enumerate() {
            if !sys.domain.contains(v) {
                return Err(Error::DomainEscape {
                    time,
                    position: grid.center(k),
                    state: v.clone(),
                });
            }
        }
    }
    Ok(GridSolution {
        grid: grid.clone(),
        t: t_end,
        cfl: used_cfl,
        steps,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(l: f64, r: f64) -> Profile {
        Profile::Step {
            left: vec![l],
            right: vec![r],
            at: 0.0,
        }
    }

    #[test]
    fn riccati_examples() {
        assert!((riccati_bound(1.0, 1.0, 1.0) - std::f64::consts::E).abs() < 1e-12);
        assert_eq!(riccati_bound(1.0, 0.0, 2.0), 0.5);
        assert!((riccati_bound(2.0, 0.5, 1.0) - 0.824360635).abs() < 1e-9);
        for t in [0.1, 0.5, 1.0, 3.0] {
            assert!(riccati_bound(1.0, 0.0, t) > riccati_bound(1.0, 0.0, t + 0.1));
            assert!(riccati_bound(1.0, 0.2, t) > 1.0 / t);
        }
    }

    #[test]
    fn lax_oleinik_examples() {
        let sys = SystemSpec::burgers();
        assert!((lax_oleinik(&sys, &step(0.8, 1.2), 1.0, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((lax_oleinik(&sys, &step(1.2, 0.8), 1.0, 0.99).unwrap() - 1.2).abs() < 1e-6);
        assert!((lax_oleinik(&sys, &step(1.2, 0.8), 1.0, 1.01).unwrap() - 0.8).abs() < 1e-6);
        assert_eq!(lax_oleinik(&sys, &Profile::Constant(vec![0.7]), 1.0, 3.0).unwrap(), 0.7);
    }

    #[test]
    fn lax_oleinik_satisfies_the_one_sided_bound() {
        let sys = SystemSpec::burgers();
        let u0 = Profile::Staircase {
            breaks: vec![-0.5, 0.0, 0.3],
            values: vec![vec![0.9], vec![1.3], vec![0.8], vec![1.1]],
        };
        let t = 0.7;
        let xs: Vec<f64> = (0..40).map(|k| -1.0 + 0.06 * k as f64).collect();
        let us: Vec<f64> = xs.iter().map(|x| lax_oleinik(&sys, &u0, t, *x).unwrap()).collect();
        for a in 0..xs.len() {
            for b in a + 1..xs.len() {
                let slope = (us[b] - us[a]) / (xs[b] - xs[a]);
                assert!(slope <= 1.0 / t + 1e-6);
            }
        }
    }

    #[test]
    fn godunov_shock_matches_the_exact_solution() {
        let sys = SystemSpec::burgers();
        let dx = 1e-3;
        let grid = Grid::new(-1.0, 3.0, 4000);
        let sol = godunov_split(&sys, &SourceSpec::none(), &step(1.2, 0.8), &grid, 1.0, 0.45).unwrap();
        let exact = PiecewiseConstant::new(vec![1.0], vec![vec![1.2], vec![0.8]]).unwrap();
        let err = l1_distance(&sol.to_piecewise(), &exact, (-1.0, 3.0));
        assert!(err <= 5.0 * dx, "L1 error {}", err);
        assert!(sol.cfl <= 0.45 + 1e-12);
        let k = sol.values.iter().position(|v| v[0] < 1.0).unwrap();
        assert!((sol.grid.center(k) - 1.0).abs() <= dx);
        for x in [0.5, 0.99, 1.01, 2.0] {
            let lo = lax_oleinik(&sys, &step(1.2, 0.8), 1.0, x).unwrap();
            assert!((lo - exact.value(x)[0]).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_state_is_preserved() {
        let sys = SystemSpec::burgers();
        let grid = Grid::new(-1.0, 1.0, 50);
        let sol = godunov_split(&sys, &SourceSpec::none(), &Profile::Constant(vec![1.1]), &grid, 0.5, 0.45).unwrap();
        assert!(sol.values.iter().all(|v| v[0] == 1.1));
        assert!(matches!(
            godunov_split(&sys, &SourceSpec::none(), &Profile::Constant(vec![1.1]), &grid, 0.5, 0.6),
            Err(Error::CflViolation { .. })
        ));
    }

    #[test]
    fn damped_state_self_converges() {
        let sys = SystemSpec::burgers();
        let src = SourceSpec::damping(1.0, (-1.0, 1.0), 1.5);
        let u0 = Profile::Constant(vec![1.0]);
        let run = |cells| {
            godunov_split(&sys, &src, &u0, &Grid::new(-2.0, 2.0, cells), 0.2, 0.45)
                .unwrap()
                .to_piecewise()
        };
        let (c, m, f, r) = (run(100), run(200), run(400), run(3200));
        let w = (-2.0, 2.0);
        let (e1, e2, e3) = (l1_distance(&c, &r, w), l1_distance(&m, &r, w), l1_distance(&f, &r, w));
        assert!(e2 < e1 && e3 < e2);
        let order = (e1 / e3).log2() / 2.0;
        assert!(order >= 0.8, "order {}", order);
        // deep inside the damped region the solution is the ODE value
        let mid = f.value(-0.5)[0];
        assert!((mid - (-0.2f64).exp()).abs() < 1e-3);
    }
}
