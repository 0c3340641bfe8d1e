use proptest::prelude::*;
use wavefront::riemann::{h_fan_residuals, sample_fan, solve_h, solve_homogeneous, WaveFamily};
use wavefront::{SourceSpec, SystemSpec};

fn near_center(sys: &SystemSpec, radius: f64) -> impl Strategy<Value = Vec<f64>> {
    let c = sys.domain.center();
    c.into_iter()
        .map(|x| (x - radius)..(x + radius))
        .collect::<Vec<_>>()
}

fn systems() -> Vec<SystemSpec> {
    vec![SystemSpec::burgers(), SystemSpec::coupled2x2()]
}

fn coupled_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let sys = SystemSpec::coupled2x2();
    (near_center(&sys, 0.05), near_center(&sys, 0.05))
}

fn burgers_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let sys = SystemSpec::burgers();
    (near_center(&sys, 0.4), near_center(&sys, 0.4))
}

fn check_eigen(sys: &SystemSpec, u: &[f64]) {
    let e = sys.eigen_decompose(u).unwrap();
    let a = sys.jacobian(u);
    for i in 0..sys.n {
        let r = nalgebra::DVector::from_vec(e.right_vector(i));
        let res = (&a * &r - &r * e.values[i]).norm();
        assert!(res <= 1e-8, "{} at {:?}: {}", sys.name, u, res);
        if i + 1 < sys.n {
            assert!(e.values[i + 1] - e.values[i] > 0.0);
        }
        // GNL normalization
        let t = 1e-6;
        let shifted: Vec<f64> = u.iter().zip(r.iter()).map(|(x, d)| x + t * d).collect();
        let slope = (sys.lambda(i, &shifted).unwrap() - sys.lambda(i, u).unwrap()) / t;
        assert!((slope - 1.0).abs() <= 1e-3, "{} family {}: {}", sys.name, i + 1, slope);
    }
}

fn check_fan_consistency(sys: &SystemSpec, ul: &[f64], ur: &[f64]) {
    let fan = solve_homogeneous(sys, ul, ur).unwrap();
    assert_eq!(sample_fan(sys, &fan, f64::NEG_INFINITY), ul.to_vec());
    assert_eq!(sample_fan(sys, &fan, f64::INFINITY), ur.to_vec());
    // splitting at an interior state reproduces the same waves
    for (k, mid) in fan.intermediate_states().iter().enumerate() {
        let a = solve_homogeneous(sys, ul, mid).unwrap();
        let b = solve_homogeneous(sys, mid, ur).unwrap();
        let whole = fan.strengths(sys.n);
        let (sa, sb) = (a.strengths(sys.n), b.strengths(sys.n));
        for i in 0..sys.n {
            assert!((sa[i] + sb[i] - whole[i]).abs() <= 1e-8, "split {} family {}", k, i + 1);
        }
    }
}

fn check_h_fan(sys: &SystemSpec, src: &SourceSpec, x_o: f64, ul: &[f64], ur: &[f64]) {
    let h = 0.1;
    let fan = solve_h(sys, src, x_o, h, ul, ur).unwrap();
    let (balance, phi) = h_fan_residuals(sys, src, x_o, h, &fan).unwrap();
    assert!(balance <= 1e-9 && phi <= 1e-9, "{} {}", balance, phi);
    for w in &fan.waves {
        if let WaveFamily::Physical(k) = w.family {
            let margin = if k <= sys.p { -w.speed_hi } else { w.speed_lo };
            assert!(margin >= sys.c / 2.0, "family {} margin {}", k, margin);
        }
    }
    // small perturbations move strengths continuously
    let d = 1e-6;
    let ul2: Vec<f64> = ul.iter().map(|x| x + d).collect();
    let fan2 = solve_h(sys, src, x_o, h, &ul2, ur).unwrap();
    let (s1, s2) = (fan.strengths(sys.n), fan2.strengths(sys.n));
    for i in 0..sys.n {
        assert!((s1[i] - s2[i]).abs() <= 1e-4);
    }
}

#[test]
fn eigenstructure_at_domain_samples() {
    for sys in systems() {
        let c = sys.domain.center();
        for u in sys.domain.grid(5) {
            // pulled inside so the probe step stays in the domain
            let u: Vec<f64> = u.iter().zip(&c).map(|(x, m)| m + 0.98 * (x - m)).collect();
            check_eigen(&sys, &u);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn burgers_fans_are_consistent((ul, ur) in burgers_pair()) {
        check_fan_consistency(&SystemSpec::burgers(), &ul, &ur);
    }

    #[test]
    fn coupled_fans_are_consistent((ul, ur) in coupled_pair()) {
        check_fan_consistency(&SystemSpec::coupled2x2(), &ul, &ur);
    }

    #[test]
    fn burgers_h_fans_balance((ul, ur) in burgers_pair(), g in -0.3f64..0.3, x_o in -1.0f64..1.0) {
        let src = SourceSpec::constant(vec![g], None);
        check_h_fan(&SystemSpec::burgers(), &src, x_o, &ul, &ur);
    }

    #[test]
    fn coupled_h_fans_balance((ul, ur) in coupled_pair(), g0 in -0.1f64..0.1, g1 in -0.1f64..0.1) {
        let src = SourceSpec::constant(vec![g0, g1], None);
        check_h_fan(&SystemSpec::coupled2x2(), &src, 0.0, &ul, &ur);
    }
}
