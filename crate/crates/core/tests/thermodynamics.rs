use ising_kw::critical::beta_c_from_j3;
use ising_kw::kacward::MomentumPoint;
use ising_kw::oracle::cylinder_free_energy_tm;
use ising_kw::thermodynamics::{
    cylinder_free_energy, eval_gh, log_singularity_fit, plane_free_energy, plane_free_energy_tensor, thermo_sample,
};
use ising_kw::{Couplings, QuadratureSpec};
use proptest::prelude::*;

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn coupling() -> impl Strategy<Value = Couplings> {
    (-1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64).prop_map(|(a, b, c)| Couplings::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn plane_is_symmetric_in_the_couplings(j in coupling()) {
        let [a, b, c] = j.as_array();
        let base = plane_free_energy(&j, &quad()).unwrap().value;
        for p in [[b, a, c], [c, b, a], [a, c, b], [b, c, a]] {
            let other = plane_free_energy(&Couplings::from_array(p), &quad()).unwrap().value;
            prop_assert!((base - other).abs() < 1e-10);
        }
    }

    #[test]
    fn h_vanishes_at_the_origin(beta in 0.01..3.0f64, j in coupling()) {
        prop_assert_eq!(eval_gh(beta, &MomentumPoint::origin(), &j).h, 0.0);
    }

    #[test]
    fn even_cylinders_match_transfer_matrix(j in coupling(), half in 1usize..=3) {
        let m = 2 * half;
        let a = cylinder_free_energy(m, &j, &quad()).unwrap().value;
        let b = cylinder_free_energy_tm(m, &j).unwrap();
        prop_assert!((a - b).abs() < 1e-8, "M={} {} vs {}", m, a, b);
    }

    #[test]
    fn odd_cylinders_match_in_the_unfrustrated_sector(
        j1 in 0.05..1.5f64, j2 in 0.05..1.5f64, j3 in 0.05..1.5f64, s in prop::bool::ANY, m in prop::sample::select(vec![3usize, 5, 7]),
    ) {
        let sign = if s { 1.0 } else { -1.0 };
        let j = Couplings::new(sign * j1, j2, sign * j3);
        let a = cylinder_free_energy(m, &j, &quad()).unwrap().value;
        let b = cylinder_free_energy_tm(m, &j).unwrap();
        prop_assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn odd_cylinder_discrepancy_is_a_seam_cost_per_column() {
    // outside J2 > 0, J1 J3 > 0 the odd-M integral misses a fixed amount per column
    let j = Couplings::new(1.021, -0.915, -0.495);
    let c: Vec<f64> = [3usize, 5, 7, 9]
        .iter()
        .map(|&m| {
            let d = cylinder_free_energy_tm(m, &j).unwrap() - cylinder_free_energy(m, &j, &quad()).unwrap().value;
            d * m as f64
        })
        .collect();
    assert!(c[0] > 0.1);
    for x in &c[1..] {
        assert!((x - c[0]).abs() < 1e-8, "{c:?}");
    }
}

#[test]
fn concave_along_a_sweep() {
    let j = Couplings::new(1.0, 1.0, 1.0);
    let f: Vec<f64> = (0..40)
        .map(|i| plane_free_energy(&j.scaled(0.05 + 0.015 * i as f64), &quad()).unwrap().value)
        .collect();
    for w in f.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-6);
    }
}

#[test]
fn derivatives_match_finite_differences_off_critical() {
    let quad = quad();
    for (j, beta) in [
        (Couplings::new(1.0, 1.0, 1.0), 0.5),
        (Couplings::new(0.7, -1.2, 0.4), 0.8),
        (Couplings::new(-0.3, -0.9, -1.4), 0.35),
    ] {
        let s = thermo_sample(beta, &j, &quad).unwrap();
        let f = |b: f64| plane_free_energy(&j.scaled(b), &quad).unwrap().value;
        let h = 1e-4;
        let fd1 = (f(beta + h) - f(beta - h)) / (2.0 * h);
        let fd2 = (f(beta + h) - 2.0 * f(beta) + f(beta - h)) / (h * h);
        assert!((s.f1 - fd1).abs() < 1e-5 && (s.f2 - fd2).abs() < 1e-5, "{j:?}");
    }
}

#[test]
fn plane_agrees_with_tensor_grid_and_cylinder_limit() {
    let j = Couplings::new(0.8, -0.5, 0.3);
    let f = plane_free_energy(&j, &quad()).unwrap().value;
    assert!((f - plane_free_energy_tensor(&j, 256)).abs() < 1e-10);
    let f64_ = cylinder_free_energy(64, &j, &quad()).unwrap().value;
    assert!((f - f64_).abs() <= 4.0 * 0.8 / 64.0 + 2e-10);
}

#[test]
fn onsager_critical_integrand_vanishes() {
    let bc = 0.5 * (1.0 + 2f64.sqrt()).ln();
    let gh = eval_gh(1.0, &MomentumPoint::origin(), &Couplings::new(bc, bc, 0.0));
    assert!(gh.g.abs() < 1e-14);
}

#[test]
fn midpoint_doubling_contracts_fast_for_analytic_points() {
    let j = Couplings::new(0.6, 0.9, -0.2);
    let sweep: Vec<f64> = [8usize, 16, 32, 64]
        .iter()
        .map(|&n| {
            let h = 2.0 * std::f64::consts::PI / n as f64;
            (0..n)
                .map(|i| {
                    let k = -std::f64::consts::PI + (i as f64 + 0.5) * h;
                    let gh = eval_gh(1.0, &MomentumPoint::new(k, 0.7), &j);
                    (gh.g + gh.h).ln() * h
                })
                .sum()
        })
        .collect();
    for w in sweep.windows(3) {
        let (a, b) = ((w[1] - w[0]).abs(), (w[2] - w[1]).abs());
        assert!(b * 4.0 <= a || b < 1e-14, "{sweep:?}");
    }
}

#[test]
fn log_singularity_in_the_onsager_case() {
    let bc = beta_c_from_j3(0.0).beta_c.unwrap();
    let fit = log_singularity_fit(&Couplings::new(1.0, 1.0, 0.0), bc, &[0.02, 0.01, 0.005, 0.0025], &quad()).unwrap();
    assert!(fit.consistent(0.01, 0.05), "{fit:?}");
}
