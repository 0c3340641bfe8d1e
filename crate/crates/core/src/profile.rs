//! Initial profiles and piecewise-constant functions on the line.

use crate::error::{Error, Result};
use crate::quad::gauss4_composite;
use crate::system::State;

/// Right-continuous piecewise-constant function: `values[0]` left of
/// `breaks[0]`, `values[k]` on `[breaks[k-1], breaks[k])`, `values[m]` right of
/// the last break. Breaks are non-decreasing; zero-width pieces are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant {
    pub breaks: Vec<f64>,
    pub values: Vec<State>,
}

fn norm1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

impl PiecewiseConstant {
    pub fn constant(u: State) -> Self {
        PiecewiseConstant {
            breaks: Vec::new(),
            values: vec![u],
        }
    }

    pub fn new(breaks: Vec<f64>, values: Vec<State>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breaks need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("breaks must be sorted".into()));
        }
        Ok(PiecewiseConstant { breaks, values })
    }

    pub fn value(&self, x: f64) -> &State {
        let idx = self.breaks.partition_point(|b| *b <= x);
        &self.values[idx]
    }

    /// Value just left of `x`.
    pub fn value_left(&self, x: f64) -> &State {
        let idx = self.breaks.partition_point(|b| *b < x);
        &self.values[idx]
    }

    /// Sum of `|Δu|₁` over the breaks.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| norm1(&w[0], &w[1])).sum()
    }

    /// Drops zero-width pieces and merges equal neighbours.
    pub fn simplified(&self) -> Self {
        let mut breaks = Vec::new();
        let mut values = vec![self.values[0].clone()];
        for (k, b) in self.breaks.iter().enumerate() {
            let next = &self.values[k + 1];
            if next == values.last().expect("non-empty") {
                continue;
            }
            if breaks.last() == Some(b) {
                // zero-width piece: overwrite it
                values.pop();
                breaks.pop();
                if next == values.last().expect("non-empty") {
                    continue;
                }
            }
            breaks.push(*b);
            values.push(next.clone());
        }
        PiecewiseConstant { breaks, values }
    }

    /// `∫_window |u|₁`.
    pub fn l1_norm(&self, window: (f64, f64)) -> f64 {
        let zero = PiecewiseConstant::constant(vec![0.0; self.values[0].len()]);
        l1_distance(self, &zero, window)
    }
}

/// Exact `∫_window |a - b|₁` over the merged breakpoint partition.
pub fn l1_distance(a: &PiecewiseConstant, b: &PiecewiseConstant, window: (f64, f64)) -> f64 {
    let (lo, hi) = window;
    if hi <= lo {
        return 0.0;
    }
    let mut pts: Vec<f64> = a
        .breaks
        .iter()
        .chain(b.breaks.iter())
        .copied()
        .filter(|x| *x > lo && *x < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    pts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            (w[1] - w[0]) * norm1(a.value(mid), b.value(mid))
        })
        .sum()
}

/// Initial data.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Constant(State),
    Step {
        left: State,
        right: State,
        at: f64,
    },
    /// Piecewise constant with explicit breakpoints.
    Staircase {
        breaks: Vec<f64>,
        values: Vec<State>,
    },
    /// `base + amp * max(0, 1 - |x - center| / half_width)`.
    Hat {
        base: State,
        amp: State,
        center: f64,
        half_width: f64,
    },
    /// Linear ramp from `left` at `from` to `right` at `to`.
    Ramp {
        left: State,
        right: State,
        from: f64,
        to: f64,
    },
}

impl Profile {
    pub fn dim(&self) -> usize {
        match self {
            Profile::Constant(u) => u.len(),
            Profile::Step { left, .. } | Profile::Ramp { left, .. } => left.len(),
            Profile::Staircase { values, .. } => values[0].len(),
            Profile::Hat { base, .. } => base.len(),
        }
    }

    pub fn value(&self, x: f64) -> State {
        match self {
            Profile::Constant(u) => u.clone(),
            Profile::Step { left, right, at } => {
                if x < *at {
                    left.clone()
                } else {
                    right.clone()
                }
            }
            Profile::Staircase { breaks, values } => {
                let idx = breaks.partition_point(|b| *b <= x);
                values[idx].clone()
            }
            Profile::Hat {
                base,
                amp,
                center,
                half_width,
            } => {
                let w = (1.0 - (x - center).abs() / half_width).max(0.0);
                base.iter().zip(amp).map(|(b, a)| b + a * w).collect()
            }
            Profile::Ramp {
                left,
                right,
                from,
                to,
            } => {
                let w = ((x - from) / (to - from)).clamp(0.0, 1.0);
                left.iter().zip(right).map(|(l, r)| l + (r - l) * w).collect()
            }
        }
    }

    /// Interval outside which the profile is constant.
    pub fn window(&self) -> (f64, f64) {
        match self {
            Profile::Constant(_) => (0.0, 0.0),
            Profile::Step { at, .. } => (*at, *at),
            Profile::Staircase { breaks, .. } => (
                breaks.first().copied().unwrap_or(0.0),
                breaks.last().copied().unwrap_or(0.0),
            ),
            Profile::Hat {
                center, half_width, ..
            } => (center - half_width, center + half_width),
            Profile::Ramp { from, to, .. } => (*from, *to),
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        matches!(
            self,
            Profile::Constant(_) | Profile::Step { .. } | Profile::Staircase { .. }
        )
    }

    /// Exact piecewise-constant form, if any.
    pub fn as_piecewise_constant(&self) -> Option<PiecewiseConstant> {
        match self {
            Profile::Constant(u) => Some(PiecewiseConstant::constant(u.clone())),
            Profile::Step { left, right, at } => Some(PiecewiseConstant {
                breaks: vec![*at],
                values: vec![left.clone(), right.clone()],
            }),
            Profile::Staircase { breaks, values } => Some(PiecewiseConstant {
                breaks: breaks.clone(),
                values: values.clone(),
            }),
            _ => None,
        }
    }

    /// Kinks and jumps, used to split quadratures.
    fn nodes(&self) -> Vec<f64> {
        match self {
            Profile::Hat {
                center, half_width, ..
            } => vec![center - half_width, *center, center + half_width],
            Profile::Ramp { from, to, .. } => vec![*from, *to],
            Profile::Step { at, .. } => vec![*at],
            Profile::Staircase { breaks, .. } => breaks.clone(),
            Profile::Constant(_) => vec![],
        }
    }

    /// `∫_a^b u` componentwise.
    pub fn integral(&self, a: f64, b: f64) -> State {
        let dim = self.dim();
        if b <= a {
            return vec![0.0; dim];
        }
        let mut pts: Vec<f64> = self.nodes().into_iter().filter(|x| *x > a && *x < b).collect();
        pts.push(a);
        pts.push(b);
        pts.sort_by(|x, y| x.total_cmp(y));
        let mut out = vec![0.0; dim];
        for w in pts.windows(2) {
            for (d, o) in out.iter_mut().enumerate() {
                *o += gauss4_composite(w[0], w[1], 4, |x| self.value(x)[d]);
            }
        }
        out
    }

    /// Piecewise-constant sampling on cells of width `w` centred at `k w`,
    /// using the profile value at each centre; `None` for already
    /// piecewise-constant profiles.
    fn sample_cells(&self, w: f64) -> PiecewiseConstant {
        let (lo, hi) = self.window();
        let k_lo = (lo / w).floor() as i64 - 1;
        let k_hi = (hi / w).ceil() as i64 + 1;
        let mut breaks = Vec::new();
        let mut values = vec![self.value(k_lo as f64 * w)];
        for k in (k_lo + 1)..=k_hi {
            breaks.push((k as f64 - 0.5) * w);
            values.push(self.value(k as f64 * w));
        }
        PiecewiseConstant { breaks, values }.simplified()
    }

    /// Piecewise-constant approximation within `delta` in L¹ whose total
    /// variation does not exceed the profile's.
    pub fn sample(&self, delta: f64) -> PiecewiseConstant {
        if let Some(pc) = self.as_piecewise_constant() {
            return pc.simplified();
        }
        let (lo, hi) = self.window();
        let mut w = ((hi - lo) / 8.0).max(1e-6);
        loop {
            let pc = self.sample_cells(w);
            let err = self.l1_distance_to(&pc, (lo - w, hi + w));
            if err <= delta || w < 1e-7 {
                return pc;
            }
            w *= 0.5;
        }
    }

    /// `∫_window |u - pc|₁` by composite quadrature on the merged partition.
    pub fn l1_distance_to(&self, pc: &PiecewiseConstant, window: (f64, f64)) -> f64 {
        let (lo, hi) = window;
        let mut pts: Vec<f64> = self
            .nodes()
            .into_iter()
            .chain(pc.breaks.iter().copied())
            .filter(|x| *x > lo && *x < hi)
            .collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(|x, y| x.total_cmp(y));
        pts.dedup();
        pts.windows(2)
            .map(|seg| {
                let mid = 0.5 * (seg[0] + seg[1]);
                let v = pc.value(mid).clone();
                gauss4_composite(seg[0], seg[1], 4, |x| norm1(&self.value(x), &v))
            })
            .sum()
    }

    pub fn total_variation(&self) -> f64 {
        match self {
            Profile::Hat { amp, .. } => 2.0 * amp.iter().map(|a| a.abs()).sum::<f64>(),
            Profile::Ramp { left, right, .. } => norm1(left, right),
            _ => self.as_piecewise_constant().expect("piecewise constant").total_variation(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn l1_examples() {
        let a = PiecewiseConstant::constant(vec![1.0]);
        let b = PiecewiseConstant::constant(vec![0.0]);
        assert_eq!(l1_distance(&a, &a, (-1.0, 1.0)), 0.0);
        assert_eq!(l1_distance(&a, &b, (-1.0, 1.0)), 2.0);
        let s1 = PiecewiseConstant::new(vec![0.0], vec![vec![1.2], vec![0.8]]).unwrap();
        let s2 = PiecewiseConstant::new(vec![0.5], vec![vec![1.2], vec![0.8]]).unwrap();
        assert!((l1_distance(&s1, &s2, (-2.0, 2.0)) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn hat_sampling_keeps_variation() {
        let hat = Profile::Hat {
            base: vec![1.0],
            amp: vec![0.2],
            center: 0.0,
            half_width: 1.0,
        };
        let pc = hat.sample(0.01);
        assert!((pc.total_variation() - 0.4).abs() < 1e-12);
        assert!(hat.l1_distance_to(&pc, (-3.0, 3.0)) <= 0.01);
    }

    #[test]
    fn simplify_merges() {
        let pc = PiecewiseConstant {
            breaks: vec![0.0, 0.0, 1.0, 2.0],
            values: vec![vec![1.0], vec![2.0], vec![1.0], vec![1.0], vec![3.0]],
        };
        let s = pc.simplified();
        assert_eq!(s.breaks, vec![2.0]);
        assert_eq!(s.values, vec![vec![1.0], vec![3.0]]);
    }

    proptest! {
        #[test]
        fn l1_is_symmetric_and_triangular(
            xa in proptest::collection::vec(-2.0f64..2.0, 1..5),
            xb in proptest::collection::vec(-2.0f64..2.0, 1..5),
            va in proptest::collection::vec(0.5f64..1.5, 6),
            vb in proptest::collection::vec(0.5f64..1.5, 6),
        ) {
            let mut xa = xa; xa.sort_by(|a, b| a.total_cmp(b));
            let mut xb = xb; xb.sort_by(|a, b| a.total_cmp(b));
            let a = PiecewiseConstant::new(xa.clone(), va[..=xa.len()].iter().map(|v| vec![*v]).collect()).unwrap();
            let b = PiecewiseConstant::new(xb.clone(), vb[..=xb.len()].iter().map(|v| vec![*v]).collect()).unwrap();
            let c = PiecewiseConstant::constant(vec![1.0]);
            let w = (-3.0, 3.0);
            let ab = l1_distance(&a, &b, w);
            prop_assert!((ab - l1_distance(&b, &a, w)).abs() < 1e-12);
            prop_assert!(ab <= l1_distance(&a, &c, w) + l1_distance(&c, &b, w) + 1e-12);
        }
    }
}
