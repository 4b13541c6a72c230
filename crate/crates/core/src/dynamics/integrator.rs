//! Adaptive Dormand–Prince 5(4) on the entries of a density matrix.

use num_complex::Complex64;

use super::{DynamicsError, ModelSpec};
use crate::ledger::{Trajectory, TrajectoryPoint};
use crate::smalg::{hermitian_eigenvalues, ComplexMatrix};

/// Trace drift above which the state is renormalized.
const TRACE_RENORMALIZE: f64 = 1e-13;
/// Minimum eigenvalue below which a step is rejected.
const POSITIVITY_FLOOR: f64 = -1e-10;
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_end: f64,
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: 0.1,
            t_end: 20.0,
            sample_interval: 1e-3,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fields = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("t_end", self.t_end),
            ("sample_interval", self.sample_interval),
        ];
        for (name, value) in fields {
            super::check_positive(name, value)?;
        }
        Ok(())
    }

    /// Sample times `k·Δ` up to `t_end`, plus `t_end` itself.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.sample_interval + 1e-9).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * self.sample_interval).collect();
        let last = *times.last().unwrap();
        if self.t_end - last > 1e-9 * self.sample_interval {
            times.push(self.t_end);
        } else if let Some(t) = times.last_mut() {
            *t = t.min(self.t_end);
        }
        times
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationDiagnostics {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub positivity_rejections: usize,
    /// Largest `|tr ρ - 1|` seen after a step, before renormalization.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue over all accepted states.
    pub min_eigenvalue: f64,
    pub max_hermitian_violation: f64,
}

// The generators are autonomous, so the stage nodes are not needed.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// Fifth-order minus fourth-order weights, including the FSAL stage.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn combine(y: &ComplexMatrix, h: f64, weights: &[f64], k: &[ComplexMatrix]) -> ComplexMatrix {
    let mut out = *y;
    for (w, ki) in weights.iter().zip(k) {
        if *w != 0.0 {
            out = out + ki.scale_real(h * w);
        }
    }
    out
}

fn error_norm(err: &ComplexMatrix, y0: &ComplexMatrix, y1: &ComplexMatrix, cfg: &IntegratorConfig) -> f64 {
    let n = y0.dim() * y0.dim();
    let mut sum = 0.0;
    for i in 0..n {
        let (a, b, e) = (y0.entries()[i], y1.entries()[i], err.entries()[i]);
        let part = |e: f64, a: f64, b: f64| {
            let scale = cfg.abs_tol + cfg.rel_tol * a.abs().max(b.abs());
            (e / scale).powi(2)
        };
        sum += part(e.re, a.re, b.re) + part(e.im, a.im, b.im);
    }
    (sum / (2 * n) as f64).sqrt()
}

fn is_finite(m: &ComplexMatrix) -> bool {
    m.entries()[..m.dim() * m.dim()]
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Integrates the model from `rho0` and samples the state on the configured grid.
pub fn integrate(model: &ModelSpec, rho0: &ComplexMatrix, cfg: &IntegratorConfig) -> Result<Trajectory, DynamicsError> {
    integrate_with_diagnostics(model, rho0, cfg).map(|(traj, _)| traj)
}

pub fn integrate_with_diagnostics(
    model: &ModelSpec,
    rho0: &ComplexMatrix,
    cfg: &IntegratorConfig,
) -> Result<(Trajectory, IntegrationDiagnostics), DynamicsError> {
    model.validate()?;
    cfg.validate()?;
    if rho0.dim() != model.dim() {
        return Err(DynamicsError::Dimension {
            expected: model.dim(),
            found: rho0.dim(),
        });
    }
    let violation = rho0.hermitian_violation();
    let trace = rho0.trace();
    if violation > 1e-10 || (trace - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(DynamicsError::InvalidState(format!(
            "trace {trace}, hermiticity violation {violation:e}"
        )));
    }
    let min0 = hermitian_eigenvalues(&rho0.hermitian_part())?[0];
    if min0 < POSITIVITY_FLOOR {
        return Err(DynamicsError::InvalidState(format!("minimum eigenvalue {min0:e}")));
    }

    let field = model.sample_field();
    let times = cfg.sample_times();
    let mut diag = IntegrationDiagnostics {
        min_eigenvalue: min0,
        ..Default::default()
    };

    let mut y = rho0.hermitian_part();
    let mut t = 0.0;
    let mut points = Vec::with_capacity(times.len());
    points.push(TrajectoryPoint { t, rho: y, field });

    let mut h = cfg.max_step.min(cfg.sample_interval).min(1e-3);
    let mut k1 = model.rhs(&y);
    let mut step = 0usize;

    for &target in &times[1..] {
        while t < target {
            step += 1;
            let remaining = target - t;
            let land = h >= remaining;
            let hs = if land { remaining } else { h };

            let mut k = [k1; 7];
            k[1] = model.rhs(&combine(&y, hs, &A2, &k[..1]));
            k[2] = model.rhs(&combine(&y, hs, &A3, &k[..2]));
            k[3] = model.rhs(&combine(&y, hs, &A4, &k[..3]));
            k[4] = model.rhs(&combine(&y, hs, &A5, &k[..4]));
            k[5] = model.rhs(&combine(&y, hs, &A6, &k[..5]));
            let y_new = combine(&y, hs, &B5, &k[..6]);
            k[6] = model.rhs(&y_new);
            let err = combine(&ComplexMatrix::zeros(y.dim()), hs, &E, &k);

            if !is_finite(&y_new) || !is_finite(&err) {
                return Err(DynamicsError::NonFinite { t, step });
            }
            let norm = error_norm(&err, &y, &y_new, cfg);
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };

            if norm > 1.0 {
                diag.rejected_steps += 1;
                h = hs * factor;
                if h < MIN_STEP {
                    return Err(DynamicsError::StepUnderflow { t, h, step });
                }
                continue;
            }

            let mut candidate = y_new.hermitian_part();
            diag.max_hermitian_violation = diag.max_hermitian_violation.max(y_new.hermitian_violation());
            let tr = candidate.trace().re;
            let drift = (tr - 1.0).abs();
            let min_eig = hermitian_eigenvalues(&candidate)?[0];
            if min_eig < POSITIVITY_FLOOR {
                diag.rejected_steps += 1;
                diag.positivity_rejections += 1;
                h = 0.5 * hs;
                if h < MIN_STEP {
                    return Err(DynamicsError::PositivityLost {
                        t,
                        min_eigenvalue: min_eig,
                        step,
                    });
                }
                continue;
            }
            diag.max_trace_drift = diag.max_trace_drift.max(drift);
            if drift > TRACE_RENORMALIZE {
                candidate = candidate.scale_real(1.0 / tr);
            }
            diag.min_eigenvalue = diag.min_eigenvalue.min(min_eig);
            diag.accepted_steps += 1;

            t = if land { target } else { t + hs };
            y = candidate;
            k1 = if candidate == y_new { k[6] } else { model.rhs(&y) };
            // A step shortened to land on a sample says nothing about the natural step.
            if !land || factor < 1.0 {
                h = (hs * factor).min(cfg.max_step);
            }
        }
        points.push(TrajectoryPoint { t: target, rho: y, field });
    }

    Ok((Trajectory::new(points)?, diag))
}
