//! Total strength and interaction potential over the extended approaching set.

use crate::log::{Front, FrontFamily, FrontKind};

/// Whether `a`, lying left of `b`, approaches `b`.
pub fn approaching(a: &Front, b: &Front, p: usize) -> bool {
    match (a.family, b.family) {
        (FrontFamily::NonPhysical, _) | (_, FrontFamily::NonPhysical) => false,
        (FrontFamily::Zero, FrontFamily::Zero) => false,
        (FrontFamily::Zero, FrontFamily::Physical(kb)) => kb <= p,
        (FrontFamily::Physical(ka), FrontFamily::Zero) => ka > p,
        (FrontFamily::Physical(ka), FrontFamily::Physical(kb)) => {
            ka > kb || (ka == kb && (a.kind == FrontKind::Shock || b.kind == FrontKind::Shock))
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Glimm {
    /// `Σ|σ|` over every front.
    pub v: f64,
    /// Physical fronts only.
    pub v_physical: f64,
    pub v_nonphysical: f64,
    pub v_zero: f64,
    /// Approaching pairs of physical fronts.
    pub q: f64,
    /// Approaching pairs including zero fronts.
    pub q_h: f64,
}

/// Functionals of an ordered front list in `O(N n)`.
pub fn glimm<'a, I>(fronts: I, n: usize, p: usize) -> Glimm
where
    I: IntoIterator<Item = &'a Front>,
{
    // running sums of |σ| to the left, per family (1-based)
    let mut all = vec![0.0; n + 2];
    let mut shocks = vec![0.0; n + 2];
    let mut zero_left = 0.0;
    let mut g = Glimm::default();
    for f in fronts {
        let s = f.strength.abs();
        g.v += s;
        match f.family {
            FrontFamily::NonPhysical => g.v_nonphysical += s,
            FrontFamily::Zero => {
                g.v_zero += s;
                let faster: f64 = all[p + 1..=n].iter().sum();
                g.q_h += s * faster;
                zero_left += s;
            }
            FrontFamily::Physical(k) => {
                g.v_physical += s;
                let higher: f64 = all[k + 1..=n].iter().sum();
                let same = if f.kind == FrontKind::Shock {
                    all[k]
                } else {
                    shocks[k]
                };
                let pq = s * (higher + same);
                g.q += pq;
                g.q_h += pq;
                if k <= p {
                    g.q_h += s * zero_left;
                }
                all[k] += s;
                if f.kind == FrontKind::Shock {
                    shocks[k] += s;
                }
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn front(family: FrontFamily, kind: FrontKind, strength: f64) -> Front {
        Front {
            id: 0,
            family,
            kind,
            generation: 1,
            t_birth: 0.0,
            x_birth: 0.0,
            speed: 0.0,
            t_death: f64::INFINITY,
            strength,
            left_state: vec![],
            right_state: vec![],
            lattice: None,
        }
    }

    fn brute(fs: &[Front], n: usize, p: usize) -> (f64, f64) {
        let mut q = 0.0;
        let mut qh = 0.0;
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                if approaching(&fs[i], &fs[j], p) {
                    let w = (fs[i].strength * fs[j].strength).abs();
                    qh += w;
                    if fs[i].is_physical() && fs[j].is_physical() {
                        q += w;
                    }
                }
            }
        }
        let g = glimm(fs, n, p);
        assert!((g.q - q).abs() < 1e-14 && (g.q_h - qh).abs() < 1e-14);
        (q, qh)
    }

    #[test]
    fn rule_examples() {
        let s2 = front(FrontFamily::Physical(2), FrontKind::Shock, -0.1);
        let s1 = front(FrontFamily::Physical(1), FrontKind::Shock, -0.1);
        let z = front(FrontFamily::Zero, FrontKind::Zero, 0.05);
        assert!(approaching(&s2, &s1, 1));
        assert!(!approaching(&z, &s1, 0));
        assert!(approaching(&s1, &z, 0));
    }

    #[test]
    fn shock_and_zero_wave() {
        let fs = vec![
            front(FrontFamily::Physical(1), FrontKind::Shock, -0.4),
            front(FrontFamily::Zero, FrontKind::Zero, 0.05),
        ];
        let g = glimm(&fs, 1, 0);
        assert!((g.v - 0.45).abs() < 1e-15);
        assert!((g.q_h - 0.02).abs() < 1e-15);
        assert_eq!(g.q, 0.0);
        assert_eq!(glimm(&[], 1, 0), Glimm::default());
    }

    #[test]
    fn prefix_sums_match_pair_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..4);
            let p = rng.gen_range(0..=n);
            let fs: Vec<Front> = (0..rng.gen_range(0..12))
                .map(|_| match rng.gen_range(0..5) {
                    0 => front(FrontFamily::Zero, FrontKind::Zero, rng.gen_range(0.0..0.1)),
                    1 => front(FrontFamily::NonPhysical, FrontKind::NonPhysical, 1e-7),
                    2 => front(FrontFamily::Physical(rng.gen_range(1..=n)), FrontKind::Rarefaction, 0.02),
                    _ => front(
                        FrontFamily::Physical(rng.gen_range(1..=n)),
                        FrontKind::Shock,
                        -rng.gen_range(0.0..0.2),
                    ),
                })
                .collect();
            brute(&fs, n, p);
        }
    }
}
