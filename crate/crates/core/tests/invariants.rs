use nsys_core::doppler::{average, make_grid};
use nsys_core::liouville::min_eigenvalue;
use nsys_core::superop::{hermiticity_error, MaxNorm, Operator, ONE};
use nsys_core::{
    assemble_liouvillian, build_decay_superop, build_delta_h, build_h0, solve_delta_rho,
    steady_state, DecayModel, FieldConfig, LevelScheme, ProbeOptions, ProbeReadout,
};
use num_complex::Complex64;
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Point {
    o1: f64,
    o1_off: f64,
    o2: f64,
    o2_e1: f64,
    aom: f64,
    delta10: f64,
    velocity: f64,
    to_minus: [f64; 2],
    gg: f64,
}

fn point() -> impl Strategy<Value = Point> {
    (
        (0.0..25.0f64, 0.0..25.0f64, 0.0..12.0f64, 0.0..12.0f64),
        (-10.0..10.0f64, -35.0..35.0f64, -700.0..700.0f64),
        (0.0..=1.0f64, 0.0..=1.0f64, 0.002..0.6f64),
    )
        .prop_map(|((o1, o1_off, o2, o2_e1), (aom, delta10, velocity), (b0, b1, gg))| Point {
            o1,
            o1_off,
            o2,
            o2_e1,
            aom,
            delta10,
            velocity,
            to_minus: [b0, b1],
            gg,
        })
}

fn liouvillian(p: &Point) -> nsys_core::Liouvillian {
    let h = build_h0(
        &LevelScheme::default(),
        &FieldConfig::l1(p.o1, p.o1_off).unwrap(),
        &FieldConfig::l2(p.o2, p.o2_e1, p.aom).unwrap(),
        p.delta10,
        p.velocity,
    )
    .unwrap();
    let decay = DecayModel::with_fraction(6.07, p.to_minus, p.gg).unwrap();
    assemble_liouvillian(&h, &build_decay_superop(&decay))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn liouvillian_preserves_trace(p in point()) {
        prop_assert!(liouvillian(&p).trace_defect() < 1e-12);
    }

    #[test]
    fn steady_state_is_a_density_matrix(p in point()) {
        let l = liouvillian(&p);
        let rho = steady_state(&l).unwrap();
        let m = rho.matrix();
        prop_assert!((m.trace() - ONE).norm() < 1e-10);
        prop_assert!(hermiticity_error(m) < 1e-9);
        prop_assert!(min_eigenvalue(m) > -1e-8);
        prop_assert!(l.residual(m) < 1e-9);
    }

    #[test]
    fn probe_correction_is_traceless_and_hermitian(
        p in point(),
        o3 in 0.0..1.0f64,
        ratio in 0.0..1.5f64,
        beat in any::<bool>(),
        total in any::<bool>(),
    ) {
        let l = liouvillian(&p);
        let rho = steady_state(&l).unwrap();
        let dh = build_delta_h(&LevelScheme::default(), &FieldConfig::l3(o3, o3 * ratio).unwrap(), p.delta10, p.velocity).unwrap();
        let readout = if total { ProbeReadout::Total } else { ProbeReadout::PhaseMatched };
        let r = solve_delta_rho(&l, &dh, &rho, 6.07, ProbeOptions { readout, beat }).unwrap();
        prop_assert!(r.delta_rho.trace().norm() < 1e-10);
        prop_assert!(hermiticity_error(&r.delta_rho) < 1e-9);
        prop_assert!(r.absorption_coefficient.is_finite());
    }

    #[test]
    fn probe_response_is_linear_in_probe_amplitude(p in point(), o3 in 0.01..1.0f64, k in 0.1..5.0f64) {
        let l = liouvillian(&p);
        let rho = steady_state(&l).unwrap();
        let scheme = LevelScheme::default();
        let a = build_delta_h(&scheme, &FieldConfig::l3(o3, o3).unwrap(), p.delta10, p.velocity).unwrap();
        let b = a.scaled(k);
        let opts = ProbeOptions { readout: ProbeReadout::Total, beat: true };
        let ra = solve_delta_rho(&l, &a, &rho, 6.07, opts).unwrap();
        let rb = solve_delta_rho(&l, &b, &rho, 6.07, opts).unwrap();
        let scale = ra.delta_rho.max_norm().max(1e-300);
        prop_assert!((rb.delta_rho - ra.delta_rho * Complex64::new(k, 0.0)).max_norm() <= 1e-8 * k * scale + 1e-14);
        prop_assert!((rb.absorption_coefficient - ra.absorption_coefficient).abs() <= 1e-8 * ra.absorption_coefficient.abs() + 1e-12);
    }

    #[test]
    fn ground_relabeling_permutes_the_steady_state(p in point()) {
        // Swap g- and g+: L1 and L2 exchange roles and the branching flips.
        let scheme = LevelScheme::default();
        let a = build_h0(&scheme, &FieldConfig::l1(p.o1, p.o1_off).unwrap(), &FieldConfig::l2(p.o2, p.o2_e1, 0.0).unwrap(), p.delta10, 0.0).unwrap();
        let b = build_h0(&scheme, &FieldConfig::l1(p.o2, p.o2_e1).unwrap(), &FieldConfig::l2(p.o1, p.o1_off, 0.0).unwrap(), p.delta10, 0.0).unwrap();
        let da = DecayModel::with_fraction(6.07, p.to_minus, p.gg).unwrap();
        let db = DecayModel::with_fraction(6.07, [1.0 - p.to_minus[0], 1.0 - p.to_minus[1]], p.gg).unwrap();
        let ra = steady_state(&assemble_liouvillian(&a, &build_decay_superop(&da))).unwrap();
        let rb = steady_state(&assemble_liouvillian(&b, &build_decay_superop(&db))).unwrap();
        let mut perm = Operator::identity();
        perm[(0, 0)] = Complex64::new(0.0, 0.0);
        perm[(1, 1)] = Complex64::new(0.0, 0.0);
        perm[(0, 1)] = ONE;
        perm[(1, 0)] = ONE;
        prop_assert!(ra.max_abs_diff(&(perm * rb.matrix() * perm)) < 1e-9);
    }

    #[test]
    fn doppler_average_is_linear_and_exact_for_constants(
        t in 200.0..500.0f64,
        half in 1usize..300,
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let grid = make_grid(t, 87.0, 2 * half + 1, 3.0).unwrap();
        let one = average(|_| Ok(1.0), &grid).unwrap();
        prop_assert!((one - 1.0).abs() < 1e-12);
        let f = |v: f64| (v / 100.0).sin() + 0.3;
        let g = |v: f64| (v / 57.0).cos();
        let lhs = average(|v| Ok(a * f(v) + b * g(v)), &grid).unwrap();
        let rhs = a * average(|v| Ok(f(v)), &grid).unwrap() + b * average(|v| Ok(g(v)), &grid).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        let odd = average(|v| Ok(v * v * v), &grid).unwrap();
        prop_assert!(odd.abs() < 1e-6 * grid.most_probable_speed().powi(3));
    }
}
