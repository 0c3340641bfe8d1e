//! Hyperbolic systems `u_t + f(u)_x = g(x, u)`: fluxes, eigenstructure and
//! the standing structural assumptions (strict hyperbolicity, non-resonance,
//! field classification, domination of the source).

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::source::SourceSpec;

pub type State = Vec<f64>;

pub type FluxFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Step of the forward-difference Jacobian used when none is supplied.
pub const JACOBIAN_STEP: f64 = 1e-7;
/// Eigenvalues closer than this are treated as coincident.
pub const EIGEN_GAP_TOL: f64 = 1e-12;
const GNL_PROBE_STEP: f64 = 1e-6;
const DEGENERATE_GNL: f64 = 1e-9;
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    GenuinelyNonlinear,
    LinearlyDegenerate,
}

#[derive(Clone)]
pub enum Flux {
    /// Scalar `f(u) = Σ_k c_k u^k`.
    Polynomial(Vec<f64>),
    /// `f(u, v) = (a u + b v², b u² - a v)`.
    Coupled { speed: f64, coupling: f64 },
    /// `f(u) = A u`.
    Linear(DMatrix<f64>),
    Custom {
        f: FluxFn,
        jacobian: Option<JacobianFn>,
        label: String,
    },
}

impl Flux {
    pub fn label(&self) -> String {
        match self {
            Flux::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                format!("poly {}", parts.join(" "))
            }
            Flux::Coupled { speed, coupling } => format!("coupled {speed} {coupling}"),
            Flux::Linear(a) => format!("linear {}x{}", a.nrows(), a.ncols()),
            Flux::Custom { label, .. } => label.clone(),
        }
    }
}

/// Axis-aligned box `Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        DomainBox { lo, hi }
    }

    pub fn around(center: &[f64], radius: f64) -> Self {
        DomainBox {
            lo: center.iter().map(|c| c - radius).collect(),
            hi: center.iter().map(|c| c + radius).collect(),
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.lo.len()
            && u.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (lo, hi))| {
                v.is_finite() && *v >= lo - DOMAIN_SLACK && *v <= hi + DOMAIN_SLACK
            })
    }

    pub fn center(&self) -> State {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Tensor grid with `1 + 2^k` points per axis, endpoints included.
    pub fn grid(&self, k: u32) -> Vec<State> {
        let per_axis = (1usize << k) + 1;
        let n = self.lo.len();
        let total = per_axis.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut u = Vec::with_capacity(n);
            for d in 0..n {
                let idx = rem % per_axis;
                rem /= per_axis;
                let frac = idx as f64 / (per_axis - 1) as f64;
                u.push(self.lo[d] + frac * (self.hi[d] - self.lo[d]));
            }
            out.push(u);
        }
        out
    }

    /// Smallest `k` such that the grid holds at least `samples` points.
    pub fn grid_level_for(&self, samples: usize) -> u32 {
        let n = self.lo.len() as u32;
        let mut k = 0;
        while ((1usize << k) + 1).pow(n) < samples && k < 24 {
            k += 1;
        }
        k
    }
}

/// Sorted eigenvalues with normalized right vectors (columns) and the dual
/// left vectors (rows), `l_i · r_j = δ_ij`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub right: DMatrix<f64>,
    pub left: DMatrix<f64>,
}

impl Eigen {
    pub fn right_vector(&self, i: usize) -> Vec<f64> {
        self.right.column(i).iter().copied().collect()
    }

    pub fn left_vector(&self, i: usize) -> Vec<f64> {
        self.left.row(i).iter().copied().collect()
    }
}

#[derive(Clone)]
pub struct SystemSpec {
    pub name: String,
    pub n: usize,
    /// Number of families with negative speed.
    pub p: usize,
    pub flux: Flux,
    pub field_kind: Vec<FieldKind>,
    pub domain: DomainBox,
    /// Non-resonance gap: `λ_i <= -c` for `i <= p`, `λ_i >= c` otherwise.
    pub c: f64,
    /// Convexity bound `f'' >= κ` for scalar fluxes.
    pub kappa: Option<f64>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("p", &self.p)
            .field("flux", &self.flux.label())
            .field("domain", &self.domain)
            .field("c", &self.c)
            .finish()
    }
}

impl SystemSpec {
    /// `f(u) = u²/2` on `Ω = [0.5, 1.5]`, all speeds positive.
    pub fn burgers() -> Self {
        SystemSpec {
            name: "burgers".into(),
            n: 1,
            p: 0,
            flux: Flux::Polynomial(vec![0.0, 0.0, 0.5]),
            field_kind: vec![FieldKind::GenuinelyNonlinear],
            domain: DomainBox::new(vec![0.5], vec![1.5]),
            c: 0.5,
            kappa: Some(1.0),
        }
    }

    /// `f(u, v) = (2u + 0.1 v², 0.1 u² - 2v)` on `[0.5, 1.5]²`, one family of
    /// each sign.
    pub fn coupled2x2() -> Self {
        SystemSpec {
            name: "coupled2x2".into(),
            n: 2,
            p: 1,
            flux: Flux::Coupled {
                speed: 2.0,
                coupling: 0.1,
            },
            field_kind: vec![FieldKind::GenuinelyNonlinear; 2],
            domain: DomainBox::new(vec![0.5, 0.5], vec![1.5, 1.5]),
            c: 1.9,
            kappa: None,
        }
    }

    /// Scalar polynomial flux, classified GNL and given `κ` from the minimum
    /// of `f''` over the domain grid.
    pub fn scalar_polynomial(coeffs: Vec<f64>, lo: f64, hi: f64, p: usize, c: f64) -> Self {
        let mut sys = SystemSpec {
            name: "poly".into(),
            n: 1,
            p,
            flux: Flux::Polynomial(coeffs),
            field_kind: vec![FieldKind::GenuinelyNonlinear],
            domain: DomainBox::new(vec![lo], vec![hi]),
            c,
            kappa: None,
        };
        let kappa = sys
            .domain
            .grid(10)
            .iter()
            .map(|u| sys.scalar_second_derivative(u[0]))
            .fold(f64::INFINITY, f64::min);
        if kappa > 0.0 {
            sys.kappa = Some(kappa);
        }
        sys
    }

    /// Constant-coefficient system `f(u) = A u`; every field is linearly degenerate.
    pub fn linear(name: &str, a: DMatrix<f64>, domain: DomainBox, p: usize, c: f64) -> Self {
        let n = a.nrows();
        SystemSpec {
            name: name.into(),
            n,
            p,
            flux: Flux::Linear(a),
            field_kind: vec![FieldKind::LinearlyDegenerate; n],
            domain,
            c,
            kappa: None,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "burgers" => Some(Self::burgers()),
            "coupled2x2" => Some(Self::coupled2x2()),
            _ => None,
        }
    }

    pub fn with_domain(mut self, domain: DomainBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_gap(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn is_scalar_polynomial(&self) -> bool {
        self.n == 1 && matches!(self.flux, Flux::Polynomial(_))
    }

    pub fn flux(&self, u: &[f64]) -> State {
        match &self.flux {
            Flux::Polynomial(c) => vec![poly_eval(c, u[0])],
            Flux::Coupled { speed, coupling } => vec![
                speed * u[0] + coupling * u[1] * u[1],
                coupling * u[0] * u[0] - speed * u[1],
            ],
            Flux::Linear(a) => (0..a.nrows())
                .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * u[j]).sum())
                .collect(),
            Flux::Custom { f, .. } => f(u),
        }
    }

    pub fn jacobian(&self, u: &[f64]) -> DMatrix<f64> {
        match &self.flux {
            Flux::Polynomial(c) => DMatrix::from_element(1, 1, poly_eval(&poly_derivative(c), u[0])),
            Flux::Coupled { speed, coupling } => DMatrix::from_row_slice(
                2,
                2,
                &[
                    *speed,
                    2.0 * coupling * u[1],
                    2.0 * coupling * u[0],
                    -speed,
                ],
            ),
            Flux::Linear(a) => a.clone(),
            Flux::Custom {
                jacobian: Some(jac),
                ..
            } => jac(u),
            Flux::Custom { f, .. } => {
                let f0 = f(u);
                let mut m = DMatrix::zeros(self.n, self.n);
                let mut up = u.to_vec();
                for j in 0..self.n {
                    let step = JACOBIAN_STEP * u[j].abs().max(1.0);
                    up[j] = u[j] + step;
                    let f1 = f(&up);
                    for i in 0..self.n {
                        m[(i, j)] = (f1[i] - f0[i]) / step;
                    }
                    up[j] = u[j];
                }
                m
            }
        }
    }

    /// `f''(u)` for scalar polynomial fluxes (central difference otherwise).
    pub fn scalar_second_derivative(&self, u: f64) -> f64 {
        match &self.flux {
            Flux::Polynomial(c) => poly_eval(&poly_derivative(&poly_derivative(c)), u),
            _ => {
                let t = 1e-5;
                (self.jacobian(&[u + t])[(0, 0)] - self.jacobian(&[u - t])[(0, 0)]) / (2.0 * t)
            }
        }
    }

    pub fn check_domain(&self, u: &[f64]) -> Result<()> {
        if self.domain.contains(u) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { state: u.to_vec() })
        }
    }

    /// Sorted real eigenvalues of `Df(u)` without the domain check.
    pub fn eigenvalues_unchecked(&self, u: &[f64]) -> Result<Vec<f64>> {
        let a = self.jacobian(u);
        let mut values = match self.n {
            1 => vec![a[(0, 0)]],
            2 => {
                let tr = a[(0, 0)] + a[(1, 1)];
                let half = 0.5 * (a[(0, 0)] - a[(1, 1)]);
                let disc = half * half + a[(0, 1)] * a[(1, 0)];
                if disc < 0.0 {
                    return Err(Error::NonHyperbolic {
                        state: u.to_vec(),
                        reason: "complex eigenvalues".into(),
                    });
                }
                let root = disc.sqrt();
                vec![0.5 * tr - root, 0.5 * tr + root]
            }
            _ => {
                let complex = a.complex_eigenvalues();
                let mut vals = Vec::with_capacity(self.n);
                for z in complex.iter() {
                    if z.im.abs() > 1e-12 * z.re.abs().max(1.0) {
                        return Err(Error::NonHyperbolic {
                            state: u.to_vec(),
                            reason: "complex eigenvalues".into(),
                        });
                    }
                    vals.push(z.re);
                }
                vals
            }
        };
        values.sort_by(|x, y| x.total_cmp(y));
        for w in values.windows(2) {
            if w[1] - w[0] <= EIGEN_GAP_TOL {
                return Err(Error::NonHyperbolic {
                    state: u.to_vec(),
                    reason: format!("coincident eigenvalues {} and {}", w[0], w[1]),
                });
            }
        }
        Ok(values)
    }

    pub fn eigenvalues(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(u)?;
        self.eigenvalues_unchecked(u)
    }

    /// `λ_i(u)` with zero-based family index.
    pub fn lambda(&self, i: usize, u: &[f64]) -> Result<f64> {
        if self.is_scalar_polynomial() {
            self.check_domain(u)?;
            return Ok(self.jacobian(u)[(0, 0)]);
        }
        Ok(self.eigenvalues(u)?[i])
    }

    fn lambda_unchecked(&self, i: usize, u: &[f64]) -> Result<f64> {
        if self.is_scalar_polynomial() {
            return Ok(self.jacobian(u)[(0, 0)]);
        }
        Ok(self.eigenvalues_unchecked(u)?[i])
    }

    /// Central-difference directional derivative `∇λ_i(u) · dir`.
    pub fn lambda_derivative_along(&self, i: usize, u: &[f64], dir: &[f64]) -> Result<f64> {
        let t = GNL_PROBE_STEP;
        let plus: State = u.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let minus: State = u.iter().zip(dir).map(|(a, d)| a - t * d).collect();
        Ok((self.lambda_unchecked(i, &plus)? - self.lambda_unchecked(i, &minus)?) / (2.0 * t))
    }

    /// Unit right eigenvectors in ascending-eigenvalue order, with the largest
    /// component made positive.
    fn unit_right_vectors(&self, u: &[f64], values: &[f64]) -> DMatrix<f64> {
        let a = self.jacobian(u);
        let n = self.n;
        let mut r = DMatrix::zeros(n, n);
        for (k, &lam) in values.iter().enumerate() {
            let v: Vec<f64> = if n == 1 {
                vec![1.0]
            } else if n == 2 {
                let c1 = [a[(0, 1)], lam - a[(0, 0)]];
                let c2 = [lam - a[(1, 1)], a[(1, 0)]];
                let n1 = c1[0].hypot(c1[1]);
                let n2 = c2[0].hypot(c2[1]);
                if n1.max(n2) < 1e-300 {
                    let mut e = vec![0.0; 2];
                    e[k] = 1.0;
                    e
                } else if n1 >= n2 {
                    c1.to_vec()
                } else {
                    c2.to_vec()
                }
            } else {
                let shifted = &a - DMatrix::identity(n, n) * lam;
                let svd = shifted.svd(false, true);
                let vt = svd.v_t.expect("requested v_t");
                let (imin, _) = svd
                    .singular_values
                    .iter()
                    .enumerate()
                    .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
                vt.row(imin).iter().copied().collect()
            };
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let big = v
                .iter()
                .copied()
                .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            let sign = if big < 0.0 { -1.0 } else { 1.0 };
            for d in 0..n {
                r[(d, k)] = sign * v[d] / norm;
            }
        }
        r
    }

    /// Eigen-decomposition of `Df(u)`. GNL right vectors satisfy
    /// `∇λ_i · r_i = 1`; LD (or degenerate GNL) vectors have unit length.
    pub fn eigen_decompose(&self, u: &[f64]) -> Result<Eigen> {
        self.check_domain(u)?;
        if self.is_scalar_polynomial() {
            let lam = self.jacobian(u)[(0, 0)];
            let fpp = self.scalar_second_derivative(u[0]);
            let r = match self.field_kind[0] {
                FieldKind::GenuinelyNonlinear if fpp.abs() > DEGENERATE_GNL => 1.0 / fpp,
                _ => 1.0,
            };
            return Ok(Eigen {
                values: vec![lam],
                right: DMatrix::from_element(1, 1, r),
                left: DMatrix::from_element(1, 1, 1.0 / r),
            });
        }
        let values = self.eigenvalues_unchecked(u)?;
        let mut right = self.unit_right_vectors(u, &values);
        for i in 0..self.n {
            if self.field_kind[i] != FieldKind::GenuinelyNonlinear {
                continue;
            }
            let col: Vec<f64> = right.column(i).iter().copied().collect();
            let d = self.lambda_derivative_along(i, u, &col)?;
            if d.abs() > DEGENERATE_GNL {
                for row in 0..self.n {
                    right[(row, i)] /= d;
                }
            }
        }
        let left = right.clone().try_inverse().ok_or_else(|| Error::NonHyperbolic {
            state: u.to_vec(),
            reason: "eigenvectors are not independent".into(),
        })?;
        Ok(Eigen {
            values,
            right,
            left,
        })
    }

    /// NonPhysical front speed: one above the largest characteristic speed on `Ω`.
    pub fn lambda_hat(&self) -> f64 {
        let k = self.domain.grid_level_for(64);
        let max = self
            .domain
            .grid(k)
            .iter()
            .filter_map(|u| self.eigenvalues_unchecked(u).ok())
            .filter_map(|v| v.last().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        max + 1.0
    }

    /// `max |λ_i|` over the domain grid.
    pub fn max_abs_speed(&self) -> f64 {
        let k = self.domain.grid_level_for(256);
        self.domain
            .grid(k)
            .iter()
            .filter_map(|u| self.eigenvalues_unchecked(u).ok())
            .flat_map(|v| v.into_iter())
            .fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }

    /// Solves `f'(v) = target` for scalar fluxes by Newton from `guess`.
    pub fn scalar_speed_inverse(&self, target: f64, guess: f64) -> Result<f64> {
        if let Flux::Polynomial(c) = &self.flux {
            if c.len() == 3 && c[2] != 0.0 {
                return Ok((target - c[1]) / (2.0 * c[2]));
            }
        }
        let mut v = guess;
        for it in 0..60 {
            let res = self.jacobian(&[v])[(0, 0)] - target;
            if res.abs() <= 1e-14 * target.abs().max(1.0) {
                return Ok(v);
            }
            let d = self.scalar_second_derivative(v);
            if d == 0.0 || !d.is_finite() {
                return Err(Error::NewtonDiverged {
                    context: "scalar speed inverse",
                    residual: res.abs(),
                    iterations: it,
                });
            }
            v -= res / d;
        }
        Err(Error::NewtonDiverged {
            context: "scalar speed inverse",
            residual: (self.jacobian(&[v])[(0, 0)] - target).abs(),
            iterations: 60,
        })
    }
}

pub(crate) fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, k| acc * x + k)
}

pub(crate) fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| k as f64 * v)
        .collect()
}

/// One assumption check with the worst margin found over the samples.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub worst_at: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
    pub samples: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples = {}", self.samples)?;
        for c in &self.checks {
            write!(
                f,
                "{}.passed = {}\n{}.margin = {}\n",
                c.name, c.passed, c.name, c.margin
            )?;
            if let Some(at) = &c.worst_at {
                let parts: Vec<String> = at.iter().map(|v| v.to_string()).collect();
                writeln!(f, "{}.worst_at = {}", c.name, parts.join(","))?;
            }
        }
        Ok(())
    }
}

struct Worst {
    margin: f64,
    at: Option<Vec<f64>>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            at: None,
        }
    }

    fn update(&mut self, margin: f64, at: &[f64]) {
        if margin < self.margin || self.at.is_none() {
            self.margin = margin;
            self.at = Some(at.to_vec());
        }
    }

    fn into_check(self, name: &str, passed: impl Fn(f64) -> bool) -> AssumptionCheck {
        AssumptionCheck {
            name: name.into(),
            passed: passed(self.margin),
            margin: self.margin,
            worst_at: self.at,
        }
    }
}

/// Checks strict hyperbolicity, non-resonance, field classification and
/// source domination on a grid over `Ω` (and over the support of `ω`).
pub fn validate_assumptions(sys: &SystemSpec, src: &SourceSpec, samples: usize) -> ValidationReport {
    let k = sys.domain.grid_level_for(samples.max(1));
    let grid = sys.domain.grid(k);
    let mut hyper = Worst::new();
    let mut nonres = Worst::new();
    let center = sys.domain.center();
    let center_vectors = sys.eigenvalues_unchecked(&center).ok().map(|v| sys.unit_right_vectors(&center, &v));
    let mut fields: Vec<Worst> = (0..sys.n).map(|_| Worst::new()).collect();
    let mut orientation = vec![1.0; sys.n];
    if let Some(rc) = &center_vectors {
        for (i, o) in orientation.iter_mut().enumerate() {
            let col: Vec<f64> = rc.column(i).iter().copied().collect();
            if let Ok(d) = sys.lambda_derivative_along(i, &center, &col) {
                if d < 0.0 {
                    *o = -1.0;
                }
            }
        }
    }
    for u in &grid {
        let values = match sys.eigenvalues_unchecked(u) {
            Ok(v) => v,
            Err(_) => {
                hyper.update(f64::NEG_INFINITY, u);
                continue;
            }
        };
        let gap = values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        hyper.update(gap, u);
        for (i, &lam) in values.iter().enumerate() {
            let m = if i < sys.p { -sys.c - lam } else { lam - sys.c };
            nonres.update(m, u);
        }
        let r = sys.unit_right_vectors(u, &values);
        for i in 0..sys.n {
            let mut col: Vec<f64> = r.column(i).iter().copied().collect();
            if let Some(rc) = &center_vectors {
                let dot: f64 = col.iter().zip(rc.column(i).iter()).map(|(a, b)| a * b).sum();
                if dot < 0.0 {
                    col.iter_mut().for_each(|v| *v = -*v);
                }
            }
            let d = sys.lambda_derivative_along(i, u, &col).unwrap_or(f64::NAN);
            let m = match sys.field_kind[i] {
                FieldKind::GenuinelyNonlinear => orientation[i] * d,
                FieldKind::LinearlyDegenerate => 1e-10 - d.abs(),
            };
            fields[i].update(if m.is_nan() { f64::NEG_INFINITY } else { m }, u);
        }
    }
    let mut checks = vec![
        hyper.into_check("hyperbolicity", |m| m > EIGEN_GAP_TOL),
        nonres.into_check("non_resonance", |m| m >= 0.0),
    ];
    for (i, w) in fields.into_iter().enumerate() {
        let name = match sys.field_kind[i] {
            FieldKind::GenuinelyNonlinear => format!("field_{}_genuinely_nonlinear", i + 1),
            FieldKind::LinearlyDegenerate => format!("field_{}_linearly_degenerate", i + 1),
        };
        let gnl = sys.field_kind[i] == FieldKind::GenuinelyNonlinear;
        checks.push(w.into_check(&name, |m| if gnl { m > 0.0 } else { m >= 0.0 }));
    }
    checks.extend(source_checks(sys, src, k, &grid));
    ValidationReport {
        checks,
        samples: grid.len(),
    }
}

fn source_checks(sys: &SystemSpec, src: &SourceSpec, k: u32, grid: &[State]) -> Vec<AssumptionCheck> {
    let (lo, hi) = match src.omega_support() {
        Some((a, b)) if b > a => (a, b),
        Some(_) => (-1.0, 1.0),
        None => (-10.0, 10.0),
    };
    let nx = (1usize << k.min(8)) + 1;
    let xs: Vec<f64> = (0..nx)
        .map(|j| lo + (hi - lo) * j as f64 / (nx - 1) as f64)
        .collect();
    let mut dom = Worst::new();
    let step = 1e-6;
    for &x in &xs {
        let w = src.omega(x);
        for u in grid {
            let g = src.g(x, u);
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if w == 0.0 && gnorm == 0.0 && src.is_zero() {
                continue;
            }
            // Frobenius norm of D_u g by central differences.
            let mut frob = 0.0;
            let mut up = u.clone();
            let mut um = u.clone();
            for j in 0..sys.n {
                up[j] = u[j] + step;
                um[j] = u[j] - step;
                let gp = src.g(x, &up);
                let gm = src.g(x, &um);
                for i in 0..sys.n {
                    let d = (gp[i] - gm[i]) / (2.0 * step);
                    frob += d * d;
                }
                up[j] = u[j];
                um[j] = u[j];
            }
            let margin = (w - gnorm).min(w - frob.sqrt());
            let mut at = vec![x];
            at.extend_from_slice(u);
            if w > 0.0 || gnorm > 0.0 {
                dom.update(margin, &at);
            }
        }
    }
    if dom.at.is_none() {
        dom.margin = 0.0;
    }
    let dom_check = dom.into_check("source_domination", |m| m >= -1e-12);

    let declared = src.omega_mass();
    let (mass_ok, mass_margin) = if declared == 0.0 {
        (true, 0.0)
    } else if !declared.is_finite() {
        (false, f64::NEG_INFINITY)
    } else {
        let numeric = crate::quad::gauss4_composite(lo, hi, 4096, |x| src.omega(x));
        let rel = (numeric - declared).abs() / declared.abs();
        (rel <= 1e-6, 1e-6 - rel)
    };
    vec![
        dom_check,
        AssumptionCheck {
            name: "omega_integrable".into(),
            passed: mass_ok,
            margin: mass_margin,
            worst_at: None,
        },
    ]
}
