//! Gauss–Legendre quadrature helpers.

const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_86,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_86,
];

/// Four-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss4<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (node, weight) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
        acc += weight * f(mid + half * node);
    }
    acc * half
}

/// Composite four-point rule with `panels` equal sub-intervals.
pub fn gauss4_composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * w;
            gauss4(lo, lo + w, &mut f)
        })
        .sum()
}

/// Vector-valued four-point rule on `[a, b]`.
pub fn gauss4_vec<F: FnMut(f64) -> Vec<f64>>(a: f64, b: f64, dim: usize, mut f: F) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = vec![0.0; dim];
    for (node, weight) in GL4_NODES.iter().zip(GL4_WEIGHTS.iter()) {
        let v = f(mid + half * node);
        for (a, vi) in acc.iter_mut().zip(v) {
            *a += weight * vi;
        }
    }
    acc.iter_mut().for_each(|a| *a *= half);
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics() {
        let v = gauss4(0.0, 2.0, |x| x * x * x - x + 1.0);
        assert!((v - 4.0).abs() < 1e-14);
    }

    #[test]
    fn composite_handles_kinks_at_panel_edges() {
        let v = gauss4_composite(-1.0, 1.0, 2, |x: f64| (1.0 - x.abs()).max(0.0));
        assert!((v - 1.0).abs() < 1e-14);
    }
}
