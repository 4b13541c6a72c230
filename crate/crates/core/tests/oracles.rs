//! Independent checks of the numerical kernels against closed forms and
//! alternative algorithms.

use bloch_thermo::bloch::{
    bloch_from_density, density_from_bloch, heat_capacity_at, temperature, thermal_bloch, von_neumann_entropy,
    BlochVector, FieldVector, QubitThermoState,
};
use bloch_thermo::dynamics::{
    integrate, integrate_with_diagnostics, jc_equilibrium_temperature, planck_occupation, reduced_thermo_view,
    rhs_single_qubit_thermal, rhs_two_atom, ClosedPairExchange, IntegratorConfig, ModelSpec, SingleQubitThermal,
    TwoAtomDissipative,
};
use bloch_thermo::ledger::{
    accumulate, mutual_information, mutual_information_divergence, relative_entropy, EnvironmentSpec, Trajectory,
    TrajectoryPoint,
};
use bloch_thermo::smalg::{hermitian_eigenvalues, kron, partial_trace, ComplexMatrix, Subsystem};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
        for j in i + 1..n {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(n);
    for z in g.entries_mut()[..n * n].iter_mut() {
        *z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    let p = g * g.adjoint();
    p.scale_real(1.0 / p.trace().re)
}

fn random_bloch(rng: &mut ChaCha8Rng, max_modulus: f64) -> BlochVector {
    loop {
        let v: [f64; 3] = [0; 3].map(|_| rng.gen_range(-1.0..1.0));
        let m = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if m <= 1.0 && m > 1e-3 {
            let r = rng.gen_range(0.0..max_modulus);
            return BlochVector::new(r * v[0] / m, r * v[1] / m, r * v[2] / m).unwrap();
        }
    }
}

/// Characteristic polynomial coefficients by Faddeev–LeVerrier, `λⁿ + c[n-1]λⁿ⁻¹ + … + c[0]`.
fn char_poly(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = ComplexMatrix::zeros(n);
    for k in 1..=n {
        m = *a * (m + ComplexMatrix::identity(n).scale_real(c[n - k + 1]));
        c[n - k] = -m.trace().re / k as f64;
    }
    c
}

fn eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn roots_by_bisection(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let n = 4000;
    let mut roots = Vec::new();
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (eval(c, a), eval(c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = eval(c, m);
            if fm * fa <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

#[test]
fn jacobi_matches_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for _ in 0..300 {
        let m = random_hermitian(&mut rng, 4);
        let bound = (0..4)
            .map(|i| (0..4).map(|j| m.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let roots = roots_by_bisection(&char_poly(&m), -bound - 1e-9, bound + 1e-9);
        if roots.len() != 4 {
            // Nearly degenerate pair inside one grid cell; nothing to compare.
            continue;
        }
        let values = hermitian_eigenvalues(&m).unwrap();
        for (a, b) in values.iter().zip(&roots) {
            assert!((a - b).abs() < 1e-9, "{values:?} vs {roots:?}");
        }
        checked += 1;
    }
    assert!(checked > 250, "only {checked} matrices compared");
}

#[test]
fn two_by_two_eigenvalues_match_trace_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10_000 {
        let m = random_hermitian(&mut rng, 2);
        let tr = m.trace().re;
        let det = (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re;
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        let v = hermitian_eigenvalues(&m).unwrap();
        assert!((v[0] - (0.5 * tr - disc)).abs() < 1e-13);
        assert!((v[1] - (0.5 * tr + disc)).abs() < 1e-13);
    }
}

/// `D(ρ‖σ)` for qubits in terms of the Bloch vectors `r` and `s`.
fn qubit_relative_entropy(r: &BlochVector, s: &BlochVector) -> f64 {
    let rm = r.modulus();
    let sm = s.modulus();
    let neg_entropy = -von_neumann_entropy(rm).unwrap();
    let r_dot_shat = if sm > 0.0 { r.dot(s.as_array()) / sm } else { 0.0 };
    let cross = 0.5 * ((1.0 - sm * sm) / 4.0).ln() + sm.atanh() * r_dot_shat;
    neg_entropy - cross
}

#[test]
fn qubit_relative_entropy_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10_000 {
        let r = random_bloch(&mut rng, 0.999);
        let s = random_bloch(&mut rng, 0.999);
        let d = relative_entropy(&density_from_bloch(&r), &density_from_bloch(&s)).unwrap();
        let exact = qubit_relative_entropy(&r, &s);
        assert!(d >= -1e-14);
        assert!((d - exact).abs() < 1e-10 * exact.abs().max(1.0), "{d} vs {exact}");
    }
}

#[test]
fn mutual_information_forms_agree_and_are_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..10_000 {
        let rho = if i % 2 == 0 {
            random_density(&mut rng, 4)
        } else {
            kron(&random_density(&mut rng, 2), &random_density(&mut rng, 2))
        };
        let mi = mutual_information(&rho).unwrap();
        let div = mutual_information_divergence(&rho).unwrap();
        assert!(mi >= -1e-12, "{mi}");
        assert!((mi - div).abs() < 1e-9, "{mi} vs {div}");
        if i % 2 == 1 {
            assert!(mi.abs() < 1e-12);
        }
    }
}

#[test]
fn relative_entropy_of_random_states_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..10_000 {
        let a = random_density(&mut rng, 4);
        let b = random_density(&mut rng, 4);
        assert!(relative_entropy(&a, &b).unwrap() >= -1e-12);
    }
}

#[test]
fn bloch_density_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..10_000 {
        let b = random_bloch(&mut rng, 1.0);
        let back = bloch_from_density(&density_from_bloch(&b)).unwrap();
        for (x, y) in b.as_array().iter().zip(back.as_array()) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}

#[test]
fn heat_capacity_is_nonnegative_on_a_million_points() {
    let n = 1000i64;
    let mut count = 0usize;
    let mut max = 0.0f64;
    for i in 0..=n {
        let b = i as f64 / n as f64;
        for j in -i..=i {
            let c = heat_capacity_at(b, j as f64 / n as f64);
            assert!(c >= 0.0 && c.is_finite(), "C({b}, {j}) = {c}");
            max = max.max(c);
            count += 1;
        }
    }
    assert!(count >= 1_000_000);
    assert!(max < 0.4393);
}

#[test]
fn temperature_matches_entropy_derivative() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let field = FieldVector::along_z(1.0).unwrap();
    let mut n = 0;
    while n < 1000 {
        let b = random_bloch(&mut rng, 0.99);
        let s = QubitThermoState::new(b, field);
        if s.parallel().abs() < 1e-3 {
            continue;
        }
        let perp = s.perpendicular();
        let entropy = |bp: f64| von_neumann_entropy((perp * perp + bp * bp).sqrt()).unwrap();
        let h = 1e-6;
        let beta = -(entropy(s.parallel() + h) - entropy(s.parallel() - h)) / (2.0 * h);
        let t = temperature(&s).value().unwrap();
        assert!((t * beta - 1.0).abs() < 1e-5, "T = {t}, FD 1/T = {beta}");
        n += 1;
    }
}

#[test]
fn planck_and_equilibrium_temperature() {
    let x = 1.0f64;
    assert!((planck_occupation(x, 1.0) - 1.0 / (x.exp() - 1.0)).abs() < 1e-15);
    // Monotone on the domain of the low-temperature formula.
    let mut prev = 0.0;
    for k in 1..=1000 {
        let t_env = 0.05 + 1.35 * k as f64 / 1000.0;
        let t = jc_equilibrium_temperature(1.0, t_env).unwrap();
        assert!(t > prev, "not increasing at T_env = {t_env}");
        prev = t;
    }
}

#[test]
fn thermal_bloch_equations_have_the_analytic_solution() {
    let spec = SingleQubitThermal {
        gamma0: 0.8,
        omega0: 2.0,
        t_env: 1.5,
    };
    let n = spec.occupation();
    let rate = spec.gamma0 * (2.0 * n + 1.0);
    let b_eq = 1.0 / (2.0 * n + 1.0);
    let b0 = BlochVector::new(0.5, -0.3, -0.4).unwrap();
    let cfg = IntegratorConfig {
        t_end: 6.0,
        sample_interval: 0.05,
        ..Default::default()
    };
    let traj = integrate(&ModelSpec::SingleQubitThermal(spec), &density_from_bloch(&b0), &cfg).unwrap();
    for p in traj.points() {
        let b = bloch_from_density(&p.rho).unwrap();
        let decay = (-0.5 * rate * p.t).exp();
        assert!((b.x() - 0.5 * decay).abs() < 1e-8);
        assert!((b.y() + 0.3 * decay).abs() < 1e-8);
        assert!((b.z() - (b_eq + (-0.4 - b_eq) * (-rate * p.t).exp())).abs() < 1e-8);
    }
}

#[test]
fn error_shrinks_with_tolerance() {
    let model = ModelSpec::SingleQubitThermal(SingleQubitThermal {
        gamma0: 1.0,
        omega0: 2.0,
        t_env: 1e-3,
    });
    let rho0 = density_from_bloch(&BlochVector::new(0.0, 0.0, -1.0).unwrap());
    let error = |tol: f64| {
        let cfg = IntegratorConfig {
            rel_tol: tol,
            abs_tol: tol,
            max_step: 5.0,
            t_end: 5.0,
            sample_interval: 5.0,
        };
        let traj = integrate(&model, &rho0, &cfg).unwrap();
        let z = bloch_from_density(&traj.last().unwrap().rho).unwrap().z();
        (z - (1.0 - 2.0 * (-5.0f64).exp())).abs()
    };
    let coarse = error(1e-5);
    let fine = error(1e-7);
    let finer = error(1e-9);
    assert!(coarse > fine && fine > finer, "{coarse:e} {fine:e} {finer:e}");
    // A fifth-order pair with per-step control: global error ∝ tol^(4/5) or better.
    assert!(coarse / fine > 20.0 && fine / finer > 20.0, "{coarse:e} {fine:e} {finer:e}");
}

#[test]
fn uncoupled_atoms_decay_independently() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let single = SingleQubitThermal {
        gamma0: 1.0,
        omega0: 2.0,
        t_env: 1e-3,
    };
    let pair = TwoAtomDissipative {
        gamma0: 1.0,
        g: 0.0,
        omega0: 2.0,
    };
    for _ in 0..100 {
        let a = density_from_bloch(&random_bloch(&mut rng, 1.0));
        let b = density_from_bloch(&random_bloch(&mut rng, 1.0));
        let d = rhs_two_atom(&kron(&a, &b), &pair);
        let expected = kron(&rhs_single_qubit_thermal(&a, &single), &b) + kron(&a, &rhs_single_qubit_thermal(&b, &single));
        assert!(d.max_abs_diff(&expected) < 1e-14);
    }
}

#[test]
fn closed_pair_preserves_spectrum_and_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let spec = ClosedPairExchange {
        coupling: 0.7,
        eps_a: 1.0,
        eps_b: 1.3,
    };
    let rho0 = random_density(&mut rng, 4);
    let cfg = IntegratorConfig {
        t_end: 10.0,
        sample_interval: 0.05,
        ..Default::default()
    };
    let traj = integrate(&ModelSpec::ClosedPairExchange(spec), &rho0, &cfg).unwrap();
    let spec0 = hermitian_eigenvalues(&rho0).unwrap();
    for p in traj.points() {
        for (a, b) in hermitian_eigenvalues(&p.rho).unwrap().iter().zip(&spec0) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn uncoupled_pair_marginals_precess() {
    let spec = ClosedPairExchange {
        coupling: 0.0,
        eps_a: 1.0,
        eps_b: 0.5,
    };
    let a0 = BlochVector::new(0.6, 0.0, 0.3).unwrap();
    let b0 = BlochVector::new(0.0, 0.4, -0.2).unwrap();
    let rho0 = kron(&density_from_bloch(&a0), &density_from_bloch(&b0));
    let cfg = IntegratorConfig {
        t_end: 3.0,
        sample_interval: 0.1,
        ..Default::default()
    };
    let traj = integrate(&ModelSpec::ClosedPairExchange(spec), &rho0, &cfg).unwrap();
    let view = reduced_thermo_view(&traj, Subsystem::A, &spec.field_a()).unwrap();
    for (p, full) in view.points().iter().zip(traj.points()) {
        let b = bloch_from_density(&p.rho).unwrap();
        assert!((b.z() - 0.3).abs() < 1e-9);
        assert!((b.x().hypot(b.y()) - 0.6).abs() < 1e-9);
        let angle = b.y().atan2(b.x()).abs();
        let expected = (2.0 * p.t + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        assert!((angle - expected.abs()).abs() < 1e-8, "t = {}", p.t);
        // The product structure survives.
        let rb = partial_trace(&full.rho, Subsystem::B).unwrap();
        assert!(kron(&p.rho, &rb).max_abs_diff(&full.rho) < 1e-9);
    }
}

#[test]
fn moving_field_satisfies_first_law_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let points = (0..200)
        .map(|i| {
            let t = i as f64 * 0.01;
            let field = FieldVector::new(0.3 * t.sin(), 0.1, 1.0 + 0.5 * t).unwrap();
            TrajectoryPoint {
                t,
                rho: density_from_bloch(&random_bloch(&mut rng, 0.9)),
                field: Some(field),
            }
        })
        .collect();
    let series = accumulate(&Trajectory::new(points).unwrap(), &EnvironmentSpec::Thermal { temperature: 2.0 }).unwrap();
    assert!(series.max_first_law_residual < 1e-14);
    let last = series.last();
    let de = last.energy - series.records[0].energy;
    assert!((last.heat_cum + last.work_cum - de).abs() < 1e-13);
    assert!(last.sgen_tot_relative.is_none());
}

#[test]
fn relaxation_from_equilibrium_produces_nothing() {
    let spec = SingleQubitThermal {
        gamma0: 1.0,
        omega0: 2.0,
        t_env: 2.0,
    };
    let env = EnvironmentSpec::Thermal { temperature: 2.0 };
    let rho0 = density_from_bloch(&thermal_bloch(2.0, &spec.field()).unwrap());
    let cfg = IntegratorConfig {
        t_end: 2.0,
        sample_interval: 0.01,
        ..Default::default()
    };
    let (traj, diag) = integrate_with_diagnostics(&ModelSpec::SingleQubitThermal(spec), &rho0, &cfg).unwrap();
    let series = accumulate(&traj, &env).unwrap();
    for r in &series.records {
        assert!(r.sgen_tot_relative.unwrap().abs() < 1e-12);
        assert!(r.sgen_tot_cum.unwrap().abs() < 1e-12);
    }
    assert!(diag.max_trace_drift < 1e-14);
}
