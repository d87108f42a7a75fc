use densitylab_core::ansatz::{check_delta_f_equals_v, eval_f, AnsatzFactors};
use densitylab_core::density::{rho_point, rho_point_mc};
use densitylab_core::integration::{fd_gradient, FdScheme};
use densitylab_core::model::{evaluate_grad_psi, JastrowPrefactor};
use densitylab_core::{Configuration, Nucleus, SystemSpec, Vec3, WavefunctionModel};
use proptest::prelude::*;

fn models() -> Vec<WavefunctionModel> {
    vec![
        WavefunctionModel::hydrogenic_ground(1.3).unwrap(),
        WavefunctionModel::hydrogenic_2s(2.0).unwrap(),
        WavefunctionModel::product(2.0, 0.84375).unwrap(),
        WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap(),
        WavefunctionModel::jastrow(3.0, JastrowPrefactor { b: 0.3, c: 0.1 }).unwrap(),
    ]
}

fn rotation(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

fn point() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn config(n: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(point(), n).prop_map(|p| Configuration::new(p).unwrap())
}

fn axis() -> impl Strategy<Value = [f64; 3]> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64).prop_map(|(a, b, c)| [a, b, c])
}

fn spec_for(m: &WavefunctionModel) -> SystemSpec {
    m.system()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn psi_is_rotation_invariant(c2 in config(2), axis in axis(), angle in 0.0..6.28f64) {
        let rot = rotation(axis, angle);
        for m in models() {
            let c = if m.electron_count() == 1 {
                Configuration::new(vec![c2.positions()[0]]).unwrap()
            } else {
                c2.clone()
            };
            let a = m.psi(&c).unwrap();
            let b = m.psi(&c.rotated(&rot)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{} {a} {b}", m.kind.label());
        }
    }

    #[test]
    fn two_electron_models_are_exchange_symmetric(c in config(2)) {
        for m in models().into_iter().filter(|m| m.electron_count() == 2) {
            let a = m.psi(&c).unwrap();
            let b = m.psi(&c.swapped(0, 1)).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn f_is_rotation_and_exchange_invariant(c in config(3), axis in axis(), angle in 0.0..6.28f64) {
        let spec = SystemSpec::atom(3.0, 3).unwrap();
        let f = eval_f(&spec, &c).unwrap();
        let fr = eval_f(&spec, &c.rotated(&rotation(axis, angle))).unwrap();
        let fs = eval_f(&spec, &c.swapped(0, 2)).unwrap();
        prop_assert!((f - fr).abs() < 1e-12 * f.abs().max(1.0));
        prop_assert!((f - fs).abs() < 1e-14 * f.abs().max(1.0));
    }

    #[test]
    fn analytic_gradient_matches_finite_differences(c in config(2)) {
        let fd = FdScheme::new(1e-4, 3).unwrap();
        for m in models() {
            let c = if m.electron_count() == 1 {
                Configuration::new(vec![c.positions()[0]]).unwrap()
            } else {
                c.clone()
            };
            // kinks sit at the nucleus and at coalescence
            prop_assume!(spec_for(&m).min_singular_distance(&c) > 0.05);
            let g = evaluate_grad_psi(&m, &c).unwrap();
            let n = fd_gradient(|x| m.psi(&Configuration::from_flat(x)?), &c.to_flat(), &fd).unwrap();
            let scale = g.iter().fold(1e-3f64, |a, v| a.max(v.abs()));
            for (a, b) in g.iter().zip(&n) {
                prop_assert!((a - b).abs() < 1e-6 * scale, "{} {a} vs {b}", m.kind.label());
            }
        }
    }

    #[test]
    fn delta_f_equals_v_away_from_coalescence(c in config(3), z in 1.0..6.0f64) {
        let spec = SystemSpec::atom(z, 3).unwrap();
        prop_assume!(spec.min_singular_distance(&c) > 0.05);
        let r = check_delta_f_equals_v(&spec, &c, &FdScheme::default()).unwrap();
        prop_assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn delta_f_equals_v_for_a_molecule(c in config(2)) {
        let spec = SystemSpec::new(2, vec![
            Nucleus { charge: 1.0, position: Vec3::new(0.7, 0.0, 0.0) },
            Nucleus { charge: 1.0, position: Vec3::new(-0.7, 0.0, 0.0) },
        ]).unwrap();
        prop_assume!(spec.min_singular_distance(&c) > 0.05);
        let r = check_delta_f_equals_v(&spec, &c, &FdScheme::default()).unwrap();
        prop_assert!(r < 1e-6, "residual {r}");
    }

    #[test]
    fn regularised_factor_stays_within_a_fixed_distance(
        c in prop::collection::vec(
            (-50.0..50.0f64, -50.0..50.0f64, -50.0..50.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z)),
            3,
        ),
        z in 0.5..8.0f64,
    ) {
        let c = Configuration::new(c).unwrap();
        let spec = SystemSpec::atom(z, 3).unwrap();
        prop_assume!(spec.min_singular_distance(&c) > 1e-6);
        let a = AnsatzFactors::at(&spec, &c).unwrap();
        // each regularised distance differs from the bare one by at most 1
        let pairs = 3.0;
        let bound = 0.5 * z * 3.0 + 0.25 * pairs;
        prop_assert!(a.difference().abs() <= bound + 1e-9);
        // and so does each distance gradient
        let grad_bound = 3f64.sqrt() * (0.5 * z + 0.25 * 2.0);
        prop_assert!(a.difference_grad_norm() <= grad_bound + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn reduced_density_agrees_with_monte_carlo(r in 0.05..2.0f64, seed in 0u64..1000) {
        let m = WavefunctionModel::jastrow(2.0, JastrowPrefactor::ONE).unwrap();
        let x = Vec3::new(0.0, 0.0, r);
        let q = rho_point(&m, x).unwrap();
        let mc = rho_point_mc(&m, x, 200_000, seed).unwrap();
        prop_assert!((q.value - mc.value).abs() <= 5.0 * mc.stderr + 1e-10, "{} vs {} ± {}", q.value, mc.value, mc.stderr);
    }

    #[test]
    fn s_state_density_depends_only_on_radius(r in 0.05..3.0f64, axis in axis()) {
        let m = WavefunctionModel::product(2.0, 0.84375).unwrap();
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let a = rho_point(&m, Vec3::new(0.0, 0.0, r)).unwrap();
        let b = rho_point(&m, Vec3::new(axis[0] * r / n, axis[1] * r / n, axis[2] * r / n)).unwrap();
        prop_assert!((a.value - b.value).abs() <= 1e-10 * a.value + a.stderr + b.stderr);
    }
}
