//! Source terms `g(x, u)` and their dominating weights `ω(x)`.

use std::fmt;
use std::sync::Arc;

use crate::quad::{gauss4, gauss4_vec};
use crate::system::State;

pub type SourceFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
pub type WeightFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The right-hand side `g(x, u)` of the balance law.
#[derive(Clone)]
pub enum SourceTerm {
    Zero,
    /// `g(x, u) = value` on `support` (the whole line when `None`).
    Constant {
        value: Vec<f64>,
        support: Option<(f64, f64)>,
    },
    /// `g(x, u) = -rate * u` on `support`.
    Damping { rate: f64, support: (f64, f64) },
    Custom { g: SourceFn, label: String },
}

/// Dominating weight `ω` with `|g(x,u)| <= ω(x)` and `|D_u g(x,u)| <= ω(x)`.
#[derive(Clone)]
pub enum Omega {
    Zero,
    /// `level` on the closed `support` (the whole line when `None`).
    Indicator {
        level: f64,
        support: Option<(f64, f64)>,
    },
    /// `peak * max(0, 1 - |x - center| / half_width)`.
    Hat {
        peak: f64,
        center: f64,
        half_width: f64,
    },
    Custom {
        w: WeightFn,
        mass: f64,
        linf: f64,
        support: (f64, f64),
    },
}

#[derive(Clone)]
pub struct SourceSpec {
    pub term: SourceTerm,
    pub omega: Omega,
    /// Lipschitz constant of `g` in `u`.
    pub lip_g: f64,
}

fn in_support(x: f64, support: Option<(f64, f64)>) -> bool {
    match support {
        None => true,
        Some((lo, hi)) => x >= lo && x <= hi,
    }
}

impl SourceSpec {
    pub fn none() -> Self {
        SourceSpec {
            term: SourceTerm::Zero,
            omega: Omega::Zero,
            lip_g: 0.0,
        }
    }

    /// Constant source with the tightest indicator weight.
    pub fn constant(value: Vec<f64>, support: Option<(f64, f64)>) -> Self {
        let level = value.iter().map(|v| v * v).sum::<f64>().sqrt();
        SourceSpec {
            term: SourceTerm::Constant { value, support },
            omega: Omega::Indicator { level, support },
            lip_g: 0.0,
        }
    }

    /// Linear damping `g = -rate * u` on `support`; `u_bound` bounds `|u|` on the domain.
    pub fn damping(rate: f64, support: (f64, f64), u_bound: f64) -> Self {
        SourceSpec {
            term: SourceTerm::Damping { rate, support },
            omega: Omega::Indicator {
                level: rate * u_bound.max(1.0),
                support: Some(support),
            },
            lip_g: rate,
        }
    }

    pub fn with_omega(mut self, omega: Omega) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_lip_g(mut self, lip_g: f64) -> Self {
        self.lip_g = lip_g;
        self
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.term, SourceTerm::Zero)
    }

    pub fn g(&self, x: f64, u: &[f64]) -> State {
        match &self.term {
            SourceTerm::Zero => vec![0.0; u.len()],
            SourceTerm::Constant { value, support } => {
                if in_support(x, *support) {
                    value.clone()
                } else {
                    vec![0.0; u.len()]
                }
            }
            SourceTerm::Damping { rate, support } => {
                if in_support(x, Some(*support)) {
                    u.iter().map(|v| -rate * v).collect()
                } else {
                    vec![0.0; u.len()]
                }
            }
            SourceTerm::Custom { g, .. } => g(x, u),
        }
    }

    pub fn omega(&self, x: f64) -> f64 {
        match &self.omega {
            Omega::Zero => 0.0,
            Omega::Indicator { level, support } => {
                if in_support(x, *support) {
                    *level
                } else {
                    0.0
                }
            }
            Omega::Hat {
                peak,
                center,
                half_width,
            } => peak * (1.0 - (x - center).abs() / half_width).max(0.0),
            Omega::Custom { w, .. } => w(x),
        }
    }

    /// Declared `‖ω‖_{L¹}`; infinite for unbounded indicator supports.
    pub fn omega_mass(&self) -> f64 {
        match &self.omega {
            Omega::Zero => 0.0,
            Omega::Indicator { level, support } => match support {
                None if *level == 0.0 => 0.0,
                None => f64::INFINITY,
                Some((lo, hi)) => level * (hi - lo),
            },
            Omega::Hat {
                peak, half_width, ..
            } => peak * half_width,
            Omega::Custom { mass, .. } => *mass,
        }
    }

    pub fn omega_linf(&self) -> f64 {
        match &self.omega {
            Omega::Zero => 0.0,
            Omega::Indicator { level, .. } => *level,
            Omega::Hat { peak, .. } => *peak,
            Omega::Custom { linf, .. } => *linf,
        }
    }

    /// Closed interval outside which `ω` vanishes; `None` if unbounded, and an
    /// empty interval `(0, 0)` for the zero weight.
    pub fn omega_support(&self) -> Option<(f64, f64)> {
        match &self.omega {
            Omega::Zero => Some((0.0, 0.0)),
            Omega::Indicator { level, support } => {
                if *level == 0.0 {
                    Some((0.0, 0.0))
                } else {
                    *support
                }
            }
            Omega::Hat {
                center, half_width, ..
            } => Some((center - half_width, center + half_width)),
            Omega::Custom { support, .. } => Some(*support),
        }
    }

    /// `∫_0^h g(x_o + s, u) ds` with `u` frozen, by four-point Gauss–Legendre.
    pub fn integrate_g(&self, x_o: f64, h: f64, u: &[f64]) -> State {
        if self.is_zero() {
            return vec![0.0; u.len()];
        }
        gauss4_vec(x_o, x_o + h, u.len(), |x| self.g(x, u))
    }

    /// `∫_0^h ω(j h + s) ds`, composite Gauss–Legendre over 8 sub-intervals.
    pub fn zero_strength(&self, j: i64, h: f64) -> f64 {
        if matches!(self.omega, Omega::Zero) {
            return 0.0;
        }
        let x0 = j as f64 * h;
        let panels = 8;
        let w = h / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = x0 + k as f64 * w;
                gauss4(lo, lo + w, |x| self.omega(x))
            })
            .sum()
    }

    pub fn label(&self) -> String {
        match &self.term {
            SourceTerm::Zero => "none".into(),
            SourceTerm::Constant { value, support } => match support {
                Some((lo, hi)) => format!("constant {value:?} on [{lo}, {hi}]"),
                None => format!("constant {value:?}"),
            },
            SourceTerm::Damping { rate, support } => {
                format!("damping {rate} on [{}, {}]", support.0, support.1)
            }
            SourceTerm::Custom { label, .. } => label.clone(),
        }
    }
}

impl fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceSpec")
            .field("term", &self.label())
            .field("omega_mass", &self.omega_mass())
            .field("lip_g", &self.lip_g)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_strength_examples() {
        let src = SourceSpec::constant(vec![0.5], None);
        assert!((src.zero_strength(3, 0.1) - 0.05).abs() < 1e-15);
        assert_eq!(SourceSpec::none().zero_strength(0, 0.1), 0.0);
        let hat = SourceSpec::none().with_omega(Omega::Hat {
            peak: 1.0,
            center: 0.0,
            half_width: 1.0,
        });
        assert!((hat.zero_strength(0, 0.1) - 0.095).abs() < 1e-14);
    }

    #[test]
    fn damping_weight_dominates() {
        let src = SourceSpec::damping(0.3, (-1.0, 1.0), 1.5);
        assert!((src.omega(0.0) - 0.45).abs() < 1e-15);
        assert_eq!(src.omega(1.5), 0.0);
        assert!((src.omega_mass() - 0.9).abs() < 1e-15);
        let g = src.integrate_g(0.0, 0.1, &[1.0]);
        assert!((g[0] + 0.03).abs() < 1e-15);
    }
}
