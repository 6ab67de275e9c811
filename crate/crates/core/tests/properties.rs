use proptest::prelude::*;
use spinbath_core::dynamics::{coherence_elements, critical_coupling, population_difference};
use spinbath_core::niba::NibaKernel;
use spinbath_core::renorm::{solve_eta_boson, solve_eta_spin, spin_log_map};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eta_is_a_fixed_point_in_unit_interval(delta in 1e-4f64..0.5, alpha in 0.0f64..0.95) {
        let sys = solve_eta_spin(delta, alpha, 1e-12).unwrap();
        prop_assert!(sys.eta > 0.0 && sys.eta <= 1.0);
        let image = spin_log_map(sys.eta, delta, alpha).exp();
        prop_assert!((image - sys.eta).abs() <= 1e-10 * sys.eta);
    }

    #[test]
    fn eta_decreases_with_coupling(delta in 1e-3f64..0.5, alpha in 0.01f64..0.9, step in 0.001f64..0.05) {
        let a = solve_eta_spin(delta, alpha, 1e-12).unwrap().eta;
        let b = solve_eta_spin(delta, alpha + step, 1e-12).unwrap().eta;
        prop_assert!(b < a);
    }

    #[test]
    fn thermal_eta_never_exceeds_spin_eta(delta in 0.01f64..0.3, alpha in 0.01f64..0.4, temp in 0.0f64..0.3) {
        let spin = solve_eta_spin(delta, alpha, 1e-12).unwrap();
        let boson = solve_eta_boson(delta, alpha, temp, 1e-12).unwrap();
        prop_assert!(boson.eta <= spin.eta);
    }

    #[test]
    fn population_is_bounded(delta in 0.02f64..0.3, alpha in 0.01f64..0.45, s in 0.0f64..40.0) {
        let sys = solve_eta_spin(delta, alpha, 1e-12).unwrap();
        let p = population_difference(s / sys.effective_tunneling, &sys).unwrap();
        prop_assert!(p.abs() <= 1.0 + 1e-6, "P = {}", p);
    }

    #[test]
    fn offdiagonal_sum_is_bounded(temp in 0.0f64..0.5, s in 0.0f64..50.0) {
        let sys = solve_eta_spin(0.1, 0.1, 1e-12).unwrap();
        let t = s / sys.effective_tunneling;
        let c = coherence_elements(t, temp, &sys).unwrap();
        let cap = if temp == 0.0 { 1.0 } else { (sys.effective_tunneling / (2.0 * temp)).tanh() };
        prop_assert!(c.offdiag_sum >= 0.0 && c.offdiag_sum <= cap);
        prop_assert_eq!(c.trace, 1.0);
    }

    #[test]
    fn niba_damping_is_monotone(alpha in 0.0f64..1.5, temp in 0.0f64..0.2, t in 0.0f64..200.0, dt in 0.01f64..5.0) {
        for kernel in [NibaKernel::spin(alpha, temp).unwrap(), NibaKernel::boson(alpha, temp).unwrap()] {
            prop_assert!(kernel.q2(t + dt).unwrap() >= kernel.q2(t).unwrap() - 1e-10);
        }
    }
}

#[test]
fn critical_coupling_is_monotone_in_delta() {
    let grid: Vec<f64> = (1..=12).map(|k| 0.025 * k as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&d| critical_coupling(d).unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
    assert!(values.iter().all(|&a| a > 0.5 && a < 1.0));
}
