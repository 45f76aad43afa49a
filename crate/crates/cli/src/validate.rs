//! Invariant and oracle suite run by `nsys validate`.

use nsys_core::liouville::min_eigenvalue;
use nsys_core::model::{build_decay_superop, Hamiltonian, Level};
use nsys_core::scan::PointModel;
use nsys_core::superop::{
    hermiticity_error, lindblad_dissipator, trace_functional, vectorize, MaxNorm, Operator, ONE,
};
use nsys_core::{
    assemble_liouvillian, build_delta_h, build_h0, run_scan, solve_delta_rho, steady_state,
    time_evolve, Axis, DecayModel, DensityMatrix, FieldConfig, LevelScheme, Liouvillian,
    ProbeOptions, ScanConfig, SystemConfig,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::output::spectrum_csv;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn bound(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            passed: value.is_finite() && value < limit,
            detail: format!("{value:.3e} (limit {limit:.1e})"),
        }
    }

    fn failed(name: &'static str, detail: impl std::fmt::Display) -> Self {
        Self {
            name,
            passed: false,
            detail: detail.to_string(),
        }
    }
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Points sampled from the configured scan: both ends and the middle of each
/// axis, at rest and at `±v_p` when Doppler averaging is configured.
fn sample_points(run: &RunConfig) -> Vec<(f64, f64, f64)> {
    let pick = |axis: &Axis| {
        let p = axis.points();
        let mut v = vec![p[0], p[p.len() / 2], p[p.len() - 1], p[p.len() / 4]];
        v.dedup();
        v
    };
    let vp = nsys_core::units::most_probable_speed(
        run.system.doppler.temperature,
        run.system.doppler.mass_amu,
    );
    let velocities = [run.system.doppler.velocity, vp, -vp];
    let mut out = Vec::new();
    for d in pick(&run.scan.delta10) {
        for a in pick(&run.scan.aom) {
            for &v in &velocities {
                out.push((d, a, v));
            }
        }
    }
    out
}

fn point_invariants(run: &RunConfig) -> Vec<Check> {
    let mut trace_l: f64 = 0.0;
    let mut trace_rho: f64 = 0.0;
    let mut herm_rho: f64 = 0.0;
    let mut positivity: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let mut trace_drho: f64 = 0.0;
    let mut herm_drho: f64 = 0.0;
    for off_resonant in [true, false] {
        let model = match PointModel::new(&run.system, off_resonant) {
            Ok(m) => m,
            Err(e) => return vec![Check::failed("point model", e)],
        };
        for (d, a, v) in sample_points(run) {
            let p = match model.solve(d, a, v) {
                Ok(p) => p,
                Err(e) => {
                    return vec![Check::failed(
                        "solve sample points",
                        format!("delta10 = {d}, aom = {a}, v = {v}: {e}"),
                    )]
                }
            };
            let rho = p.rho.matrix();
            trace_l = trace_l.max(p.liouvillian.trace_defect());
            trace_rho = trace_rho.max((rho.trace() - ONE).norm());
            herm_rho = herm_rho.max(hermiticity_error(rho));
            positivity = positivity.max(-min_eigenvalue(rho));
            residual = residual.max(p.liouvillian.residual(rho));
            trace_drho = trace_drho.max(p.probe.delta_rho.trace().norm());
            herm_drho = herm_drho.max(hermiticity_error(&p.probe.delta_rho));
        }
    }
    vec![
        Check::bound("liouvillian trace preservation", trace_l, 1e-12),
        Check::bound("steady-state unit trace", trace_rho, 1e-10),
        Check::bound("steady-state hermiticity", herm_rho, 1e-9),
        Check::bound("steady-state positivity (-min eigenvalue)", positivity, 1e-8),
        Check::bound("steady-state residual", residual, 1e-9),
        Check::bound("probe correction zero trace", trace_drho, 1e-10),
        Check::bound("probe correction hermiticity", herm_drho, 1e-9),
    ]
}

fn decay_trace_annihilation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let decay = DecayModel::with_fraction(6.07, [0.35, 0.6], 0.02).expect("valid");
    let frag = build_decay_superop(&decay);
    let t = trace_functional();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a = Operator::from_fn(|_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let rho = a + a.adjoint();
        worst = worst.max((t * (frag.matrix() * vectorize(&rho)))[0].norm());
    }
    Check::bound("decay fragment annihilates trace", worst, 1e-12)
}

/// L1 alone on `(g-, e0)`, all decay back to `g-`, and a fast repump `g+ → g-`
/// that confines the population to the two-level manifold `{g-, e0}`.
pub fn two_level_liouvillian(rabi: f64, detuning: f64, gamma: f64) -> Liouvillian {
    let scheme = LevelScheme::default();
    let decay = DecayModel::with_fraction(gamma, [1.0, 1.0], 0.0).expect("valid");
    let h = build_h0(
        &scheme,
        &FieldConfig::l1(rabi, 0.0).expect("valid"),
        &FieldConfig::l2(0.0, 0.0, 0.0).expect("valid"),
        detuning,
        0.0,
    )
    .expect("valid");
    let mut jump = Operator::zeros();
    jump[(Level::GroundMinus.index(), Level::GroundPlus.index())] = c((10.0 * gamma).sqrt());
    assemble_liouvillian(&h, &build_decay_superop(&decay)).plus(&lindblad_dissipator(&jump))
}

pub fn two_level_population(rabi: f64, detuning: f64, gamma: f64) -> f64 {
    let s = rabi * rabi / 4.0;
    s / (detuning * detuning + gamma * gamma / 4.0 + 2.0 * s)
}

pub fn two_level_oracle() -> Vec<Check> {
    let gamma = 6.07;
    let mut worst: f64 = 0.0;
    for (rabi, detuning) in [(gamma, 0.0), (0.3 * gamma, 2.0), (3.0 * gamma, -12.0)] {
        match steady_state(&two_level_liouvillian(rabi, detuning, gamma)) {
            Ok(rho) => {
                let got = rho.population(Level::Excited0);
                worst = worst.max((got - two_level_population(rabi, detuning, gamma)).abs());
            }
            Err(e) => return vec![Check::failed("two-level analytic population", e)],
        }
    }
    let at_resonance = steady_state(&two_level_liouvillian(gamma, 0.0, gamma))
        .map(|r| (r.population(Level::Excited0) - 1.0 / 3.0).abs())
        .unwrap_or(f64::NAN);
    vec![
        Check::bound("two-level excited population 1/3 at Omega = Gamma", at_resonance, 1e-6),
        Check::bound("two-level analytic population", worst, 1e-6),
    ]
}

pub fn lambda_liouvillian(rabi: f64, aom: f64, gamma_ground: f64) -> Liouvillian {
    let scheme = LevelScheme::default();
    let decay = DecayModel::default()
        .with_gamma_ground(gamma_ground)
        .expect("valid");
    let h = build_h0(
        &scheme,
        &FieldConfig::l1(rabi, 0.0).expect("valid"),
        &FieldConfig::l2(rabi, 0.0, aom).expect("valid"),
        0.0,
        0.0,
    )
    .expect("valid");
    assemble_liouvillian(&h, &build_decay_superop(&decay))
}

pub fn cpt_oracle() -> Vec<Check> {
    let gamma = DecayModel::default().gamma_e();
    let l = lambda_liouvillian(gamma / 2.0, 0.0, 0.001);
    let steady = match steady_state(&l) {
        Ok(r) => r,
        Err(e) => return vec![Check::failed("lambda CPT dark state", e)],
    };
    let dt = 0.05 / l.inf_norm();
    let evolved = time_evolve(&l, &DensityMatrix::ground_mixture(), 1e4 / gamma, dt)
        .map(|r| r.excited_population())
        .unwrap_or(f64::NAN);
    let coeff = nsys_core::probe::leg_absorption(
        steady.matrix(),
        FieldConfig::l2(gamma / 2.0, 0.0, 0.0).expect("valid").legs(),
        gamma,
    );
    vec![
        Check::bound("lambda CPT excited population (steady state)", steady.excited_population(), 1e-3),
        Check::bound("lambda CPT excited population (time evolution)", evolved, 1e-3),
        Check::bound("lambda CPT L2 transparency", coeff.abs(), 1e-3),
    ]
}

/// A random configuration inside the ranges used by the oracle checks.
pub struct RandomPoint {
    pub system: SystemConfig,
    pub delta10: f64,
    pub aom: f64,
    pub velocity: f64,
}

pub fn random_point(rng: &mut ChaCha8Rng, gamma_ground: (f64, f64), moving: bool) -> RandomPoint {
    let mut system = SystemConfig::default();
    let r = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| rng.random_range(lo..hi);
    system.l1 = FieldConfig::l1(r(rng, 1.0, 12.0), r(rng, 0.0, 12.0)).expect("valid");
    system.l2 = FieldConfig::l2(r(rng, 0.5, 8.0), r(rng, 0.0, 8.0), 0.0).expect("valid");
    let b = [r(rng, 0.2, 0.8), r(rng, 0.2, 0.8)];
    system.decay =
        DecayModel::with_fraction(6.07, b, r(rng, gamma_ground.0, gamma_ground.1)).expect("valid");
    RandomPoint {
        system,
        delta10: r(rng, -30.0, 30.0),
        aom: r(rng, -5.0, 5.0),
        velocity: if moving { r(rng, -150.0, 150.0) } else { 0.0 },
    }
}

fn point_liouvillian(p: &RandomPoint) -> Liouvillian {
    let s = &p.system;
    let h = build_h0(
        &s.scheme,
        &s.l1,
        &s.l2.with_detuning_offset(p.aom).expect("valid"),
        p.delta10,
        p.velocity,
    )
    .expect("valid");
    assemble_liouvillian(&h, &build_decay_superop(&s.decay))
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let a = Operator::from_fn(|_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let m = a * a.adjoint();
    DensityMatrix::new(m / m.trace()).expect("positive by construction")
}

/// `‖steady_state − time_evolve‖∞` for one random configuration.
pub fn evolution_gap(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let p = random_point(rng, (0.05, 0.3), true);
    let l = point_liouvillian(&p);
    let rho0 = random_state(rng);
    let steady = steady_state(&l).map_err(|e| e.to_string())?;
    let gamma = p.system.decay.gamma_e();
    let duration = 200.0 / gamma + 30.0 / p.system.decay.gamma_ground();
    let evolved = time_evolve(&l, &rho0, duration, 0.05 / l.inf_norm()).map_err(|e| e.to_string())?;
    Ok(steady.max_abs_diff(evolved.matrix()))
}

pub fn evolution_agreement() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        match evolution_gap(&mut rng) {
            Ok(g) => worst = worst.max(g),
            Err(e) => return Check::failed("time evolution agrees with steady state", e),
        }
    }
    Check::bound("time evolution agrees with steady state (25 configs)", worst, 1e-6)
}

/// `‖(ρ + Δρ) − ρ_full‖∞ / ‖…‖∞` at `Ω3` over the same at `Ω3 / 2`; ~4 for a quadratic error.
pub fn perturbation_ratio(system: &SystemConfig, delta10: f64, aom: f64, rabi3: f64) -> Result<f64, String> {
    let err = |o3: f64| -> Result<f64, String> {
        let s = system;
        let l2 = s.l2.with_detuning_offset(aom).map_err(|e| e.to_string())?;
        let h0 = build_h0(&s.scheme, &s.l1, &l2, delta10, 0.0).map_err(|e| e.to_string())?;
        let decay = build_decay_superop(&s.decay);
        let l = assemble_liouvillian(&h0, &decay);
        let rho = steady_state(&l).map_err(|e| e.to_string())?;
        let l3 = FieldConfig::l3(o3, s.l3.rabi(Level::Excited1) / s.l3.rabi(Level::Excited0).max(1e-300) * o3)
            .map_err(|e| e.to_string())?;
        let dh = build_delta_h(&s.scheme, &l3, delta10, 0.0).map_err(|e| e.to_string())?;
        let resp = solve_delta_rho(&l, &dh, &rho, s.decay.gamma_e(), ProbeOptions::default())
            .map_err(|e| e.to_string())?;
        let full_h = Hamiltonian::from_matrix(h0.matrix() + dh.coupling().matrix())
            .map_err(|e| e.to_string())?;
        let full = steady_state(&assemble_liouvillian(&full_h, &decay)).map_err(|e| e.to_string())?;
        Ok((rho.matrix() + resp.delta_rho - full.matrix()).max_norm())
    };
    Ok(err(rabi3)? / err(rabi3 / 2.0)?)
}

pub fn perturbation_order() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..10 {
        let mut p = random_point(&mut rng, (0.005, 0.1), false);
        p.system.l3 = FieldConfig::l3(1.0, rng.random_range(0.0..1.0)).expect("valid");
        let o3 = 0.02 * p.system.decay.gamma_e();
        match perturbation_ratio(&p.system, p.delta10, p.aom, o3) {
            Ok(r) => {
                lo = lo.min(r);
                hi = hi.max(r);
            }
            Err(e) => return Check::failed("probe linearization error is quadratic", e),
        }
    }
    Check {
        name: "probe linearization error is quadratic (10 configs)",
        passed: lo >= 3.5 && hi <= 4.5,
        detail: format!("halving ratios in [{lo:.3}, {hi:.3}] (required 4.0 +/- 0.5)"),
    }
}

/// Swapping `g-`/`g+` together with L1/L2 and the branching entries permutes the steady state.
fn relabeling_symmetry() -> Check {
    let scheme = LevelScheme::default();
    let (o1, o2) = (4.0, 2.5);
    let decay = DecayModel::with_fraction(6.07, [0.3, 0.3], 0.02).expect("valid");
    let swapped = DecayModel::with_fraction(6.07, [0.7, 0.7], 0.02).expect("valid");
    let solve = |a: f64, b: f64, d: &DecayModel| {
        let h = build_h0(
            &scheme,
            &FieldConfig::l1(a, 0.0).expect("valid"),
            &FieldConfig::l2(b, 0.0, 0.0).expect("valid"),
            3.0,
            0.0,
        )
        .expect("valid");
        steady_state(&assemble_liouvillian(&h, &build_decay_superop(d)))
    };
    match (solve(o1, o2, &decay), solve(o2, o1, &swapped)) {
        (Ok(a), Ok(b)) => {
            let mut perm = Operator::identity();
            perm[(0, 0)] = c(0.0);
            perm[(1, 1)] = c(0.0);
            perm[(0, 1)] = ONE;
            perm[(1, 0)] = ONE;
            let mapped = perm * b.matrix() * perm;
            Check::bound("ground relabeling symmetry", a.max_abs_diff(&mapped), 1e-10)
        }
        (Err(e), _) | (_, Err(e)) => Check::failed("ground relabeling symmetry", e),
    }
}

/// Largest change of the averaged coefficients, relative to each trace's peak, when the
/// node count goes from `n` to `2n - 1`.
pub fn doppler_refinement(run: &RunConfig, delta10: &[f64]) -> Result<f64, String> {
    let mut scan = run.scan.clone();
    scan.doppler = true;
    scan.aom = Axis::new(run.scan.aom.start, run.scan.aom.stop, (run.scan.aom.stop - run.scan.aom.start) / 40.0)
        .map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for &d in delta10 {
        scan.delta10 = Axis::new(d, d, 1.0).map_err(|e| e.to_string())?;
        let coarse = run_scan(&run.system, &scan, 1).map_err(|e| e.to_string())?;
        let mut fine_sys = run.system.clone();
        fine_sys.doppler.nodes = 2 * run.system.doppler.nodes - 1;
        let fine = run_scan(&fine_sys, &scan, 1).map_err(|e| e.to_string())?;
        for pick in [|p: &nsys_core::scan::SpectrumPoint| p.l2_coeff, |p: &nsys_core::scan::SpectrumPoint| p.l3_coeff] {
            let a: Vec<f64> = coarse.points.iter().map(pick).collect();
            let b: Vec<f64> = fine.points.iter().map(pick).collect();
            let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if scale > 0.0 {
                let diff = a.iter().zip(&b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
                worst = worst.max(diff / scale);
            }
        }
    }
    Ok(worst)
}

fn doppler_convergence(run: &RunConfig) -> Check {
    let p = run.scan.delta10.points();
    let picks = [p[0], p[p.len() / 2], p[p.len() - 1]];
    match doppler_refinement(run, &picks) {
        Ok(w) => Check::bound("doppler grid converged on node doubling", w, 5e-3),
        Err(e) => Check::failed("doppler grid converged on node doubling", e),
    }
}

fn worker_determinism(run: &RunConfig) -> Check {
    let p = run.scan.delta10.points();
    let q = run.scan.aom.points();
    let scan = ScanConfig {
        delta10: Axis::new(p[0], p[p.len() - 1], (p[p.len() - 1] - p[0]).max(1.0) / 6.0).expect("valid"),
        aom: Axis::new(q[0], q[q.len() - 1], (q[q.len() - 1] - q[0]) / 20.0).expect("valid"),
        doppler: false,
        off_resonant: run.scan.off_resonant,
    };
    let mut outputs = Vec::new();
    for workers in [1, 2, 3] {
        match run_scan(&run.system, &scan, workers) {
            Ok(s) => outputs.push(spectrum_csv(&s)),
            Err(e) => return Check::failed("bit-identical output across worker counts", e),
        }
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    Check {
        name: "bit-identical output across worker counts",
        passed: identical,
        detail: format!("1, 2 and 3 workers {}", if identical { "agree" } else { "differ" }),
    }
}

fn base_state_precondition() -> Check {
    let l = lambda_liouvillian(3.0, 0.5, 0.01);
    let dh = build_delta_h(&LevelScheme::default(), &FieldConfig::l3(0.1, 0.1).expect("valid"), 0.0, 0.0)
        .expect("valid");
    let wrong = DensityMatrix::ground_mixture();
    let rejected = solve_delta_rho(&l, &dh, &wrong, 6.07, ProbeOptions::default()).is_err();
    Check {
        name: "probe solve rejects a non-steady base state",
        passed: rejected,
        detail: String::new(),
    }
}

/// Runs the whole suite against `run`; one entry per check.
pub fn run_suite(run: &RunConfig) -> Vec<Check> {
    let mut checks = point_invariants(run);
    checks.push(decay_trace_annihilation());
    checks.extend(two_level_oracle());
    checks.extend(cpt_oracle());
    checks.push(evolution_agreement());
    checks.push(perturbation_order());
    checks.push(relabeling_symmetry());
    checks.push(base_state_precondition());
    checks.push(doppler_convergence(run));
    checks.push(worker_determinism(run));
    checks
}
