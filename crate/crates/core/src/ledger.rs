//! Process-level accounting along trajectories.
//!
//! Heat and work follow the first law `dE = δQ + δW` with `δQ = -dB·v` and
//! `δW = -B·dv`. Entropy production is split into an internal part, driven
//! by loss of coherence, and a boundary part from heat exchanged across a
//! temperature difference:
//!
//! ```text
//! δS_int = -atanh(B) [B̂ - (v̂·B̂) v̂]·dB
//! δS_ht  = δQ (1/T - 1/T_env)
//! δS_tot = dS - δQ/T_env = δS_int + δS_ht
//! ```
//!
//! All increments use the chord midpoint of consecutive samples, which makes
//! them second-order accurate in the sampling interval. The total is also
//! available as a difference of relative entropies to the Gibbs state,
//! which involves no time discretization.

use thiserror::Error;

use crate::bloch::{
    atanh_ratio, bloch_from_density, coherence_l1, internal_energy, temperature, thermal_bloch,
    von_neumann_entropy, BlochError, BlochVector, FieldVector, QubitThermoState, Temperature,
};
use crate::smalg::{hermitian_eigensystem, kron, partial_trace, ComplexMatrix, LinalgError, Subsystem};

/// Eigenvalues below this are treated as outside the support.
pub const SUPPORT_FLOOR: f64 = 1e-14;

/// Maximum drift of the global entropy accepted as unitary evolution.
pub const UNITARY_ENTROPY_DRIFT: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error("support of the first state is not contained in the second (eigenvalue {eigenvalue:e} carries weight {weight:e})")]
    Support { eigenvalue: f64, weight: f64 },
    #[error("environment temperature is unspecified")]
    EnvironmentUnspecified,
    #[error("environment temperature must be finite and nonzero, got {0}")]
    InvalidEnvironment(f64),
    #[error("heat exchanged at zero system temperature (singular boundary term); subdivide the step")]
    SingularTemperature,
    #[error("trajectory times must be strictly increasing (sample {index})")]
    NonMonotonicTime { index: usize },
    #[error("trajectory needs at least two samples, found {0}")]
    TooShort(usize),
    #[error("trajectory sample {index} carries no field")]
    MissingField { index: usize },
    #[error("expected {expected}×{expected} states, found {found}×{found}")]
    Dimension { expected: usize, found: usize },
    #[error("global entropy drifted by {drift:e}; evolution is not unitary")]
    NotUnitary { drift: f64 },
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<LedgerError>,
    },
}

impl LedgerError {
    fn at(self, step: usize) -> Self {
        LedgerError::AtStep {
            step,
            source: Box::new(self),
        }
    }
}

/// One sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub rho: ComplexMatrix,
    /// Qubit field; absent for two-qubit states.
    pub field: Option<FieldVector>,
}

/// Time-ordered samples of a density matrix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self, LedgerError> {
        for (i, w) in points.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(LedgerError::NonMonotonicTime { index: i + 1 });
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.points.last()
    }
}

/// Reservoir temperature, when one exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvironmentSpec {
    Unspecified,
    Thermal { temperature: f64 },
}

impl EnvironmentSpec {
    pub fn temperature(&self) -> Option<f64> {
        match *self {
            EnvironmentSpec::Unspecified => None,
            EnvironmentSpec::Thermal { temperature } => Some(temperature),
        }
    }

    /// Gibbs state of `-v·σ` at the environment temperature.
    pub fn equilibrium_state(&self, field: &FieldVector) -> Result<ComplexMatrix, LedgerError> {
        let t = self.temperature().ok_or(LedgerError::EnvironmentUnspecified)?;
        if t == 0.0 || !t.is_finite() {
            return Err(LedgerError::InvalidEnvironment(t));
        }
        Ok(crate::bloch::density_from_bloch(&thermal_bloch(t, field)?))
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `δQ = -(b1 - b0)·v`, with `v` the midpoint field of the step.
pub fn heat_increment(b0: &BlochVector, b1: &BlochVector, field: &FieldVector) -> f64 {
    let db = b1.delta(b0);
    let v = field.as_array();
    -(db[0] * v[0] + db[1] * v[1] + db[2] * v[2])
}

/// `δW = -b·(v1 - v0)`, with `b` the midpoint Bloch vector of the step.
pub fn work_increment(b: &BlochVector, v0: &FieldVector, v1: &FieldVector) -> f64 {
    -b.dot(v1.delta(v0))
}

/// Midpoint state of a step: chord midpoint of the Bloch vectors and of the fields.
fn midpoint_state(s0: &QubitThermoState, s1: &QubitThermoState) -> QubitThermoState {
    let field = s0.field().midpoint(s1.field()).unwrap_or(*s1.field());
    QubitThermoState::new(s0.bloch().midpoint(s1.bloch()), field)
}

/// Internal entropy production of one step, `-atanh(B) B̂⊥·ΔB` at the midpoint.
pub fn internal_entropy_increment(s0: &QubitThermoState, s1: &QubitThermoState) -> f64 {
    let mid = midpoint_state(s0, s1);
    let perp = mid.perpendicular_vector();
    let db = s1.bloch().delta(s0.bloch());
    let projected = perp[0] * db[0] + perp[1] * db[1] + perp[2] * db[2];
    -atanh_ratio(mid.modulus()) * projected
}

/// The same increment written as coherence loss, `-atanh(B) sinθ ΔC_l1`.
pub fn internal_entropy_increment_coherence(s0: &QubitThermoState, s1: &QubitThermoState) -> f64 {
    let mid = midpoint_state(s0, s1);
    let dc = coherence_l1(s1) - coherence_l1(s0);
    -atanh_ratio(mid.modulus()) * mid.perpendicular() * dc
}

/// `δQ (1/T_sys - 1/T_env)`; `1/T_sys = 0` on the undefined plane.
pub fn heat_transfer_entropy_increment(
    heat: f64,
    t_sys: Temperature,
    t_env: f64,
) -> Result<f64, LedgerError> {
    if t_env == 0.0 || !t_env.is_finite() {
        return Err(LedgerError::InvalidEnvironment(t_env));
    }
    if heat == 0.0 {
        return Ok(0.0);
    }
    let beta_sys = t_sys.inverse().ok_or(LedgerError::SingularTemperature)?;
    Ok(heat * (beta_sys - 1.0 / t_env))
}

/// `D(ρ‖σ) = tr ρ ln ρ - tr ρ ln σ`, evaluated in the eigenbases of both states.
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64, LedgerError> {
    if rho.dim() != sigma.dim() {
        return Err(LedgerError::Dimension {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let rs = hermitian_eigensystem(rho)?;
    let ss = hermitian_eigensystem(sigma)?;
    let n = rho.dim();

    let mut rho_log_rho = 0.0;
    for &p in &rs.values {
        if p > 0.0 {
            rho_log_rho += p * p.ln();
        }
    }

    let mut rho_log_sigma = 0.0;
    for (j, &mu) in ss.values.iter().enumerate() {
        // ⟨w_j|ρ|w_j⟩
        let mut weight = 0.0;
        for a in 0..n {
            for b in 0..n {
                weight += (ss.vectors.get(a, j).conj() * rho.get(a, b) * ss.vectors.get(b, j)).re;
            }
        }
        if mu <= SUPPORT_FLOOR {
            if weight > SUPPORT_FLOOR {
                return Err(LedgerError::Support {
                    eigenvalue: mu,
                    weight,
                });
            }
            continue;
        }
        rho_log_sigma += weight * mu.ln();
    }
    Ok(rho_log_rho - rho_log_sigma)
}

/// `D(ρ0‖ρ_eq) - D(ρt‖ρ_eq)` with `ρ_eq` the Gibbs state in `field`.
pub fn total_entropy_production_relative(
    rho0: &ComplexMatrix,
    rho_t: &ComplexMatrix,
    env: &EnvironmentSpec,
    field: &FieldVector,
) -> Result<f64, LedgerError> {
    let eq = env.equilibrium_state(field)?;
    Ok(relative_entropy(rho0, &eq)? - relative_entropy(rho_t, &eq)?)
}

/// Von Neumann entropy of any supported state, from its eigenvalues.
pub fn entropy_of(rho: &ComplexMatrix) -> Result<f64, LedgerError> {
    let values = hermitian_eigensystem(rho)?.values;
    Ok(values
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum())
}

/// Quantum mutual information `S_A + S_B - S_AB`.
pub fn mutual_information(rho_ab: &ComplexMatrix) -> Result<f64, LedgerError> {
    if rho_ab.dim() != 4 {
        return Err(LedgerError::Dimension {
            expected: 4,
            found: rho_ab.dim(),
        });
    }
    let a = partial_trace(rho_ab, Subsystem::A)?;
    let b = partial_trace(rho_ab, Subsystem::B)?;
    Ok(entropy_of(&a)? + entropy_of(&b)? - entropy_of(rho_ab)?)
}

/// Mutual information as `D(ρ_AB‖ρ_A⊗ρ_B)`.
pub fn mutual_information_divergence(rho_ab: &ComplexMatrix) -> Result<f64, LedgerError> {
    if rho_ab.dim() != 4 {
        return Err(LedgerError::Dimension {
            expected: 4,
            found: rho_ab.dim(),
        });
    }
    let a = partial_trace(rho_ab, Subsystem::A)?;
    let b = partial_trace(rho_ab, Subsystem::B)?;
    relative_entropy(rho_ab, &kron(&a, &b))
}

/// Accounting at one trajectory sample. Cumulative quantities start at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRecord {
    pub t: f64,
    pub bloch: BlochVector,
    pub epsilon: f64,
    pub energy: f64,
    pub entropy: f64,
    pub temperature: Temperature,
    pub coherence: f64,
    pub heat_cum: f64,
    pub work_cum: f64,
    pub sgen_int_cum: f64,
    /// Internal production accumulated through the coherence form.
    pub sgen_int_coherence_cum: f64,
    /// Boundary term; `None` without an environment temperature.
    pub sgen_ht_cum: Option<f64>,
    /// `Σ (ΔS - δQ/T_env)`; `None` without an environment temperature.
    pub sgen_tot_cum: Option<f64>,
    /// Relative-entropy route; `None` without an environment or with a moving field.
    pub sgen_tot_relative: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerSeries {
    pub records: Vec<LedgerRecord>,
    pub environment: EnvironmentSpec,
    /// max |ΔE - δQ - δW| over all steps.
    pub max_first_law_residual: f64,
}

impl LedgerSeries {
    pub fn last(&self) -> &LedgerRecord {
        self.records.last().expect("ledger series is never empty")
    }

    /// max |S_tot - (S_int + S_ht)| over all samples.
    pub fn max_decomposition_gap(&self) -> Option<f64> {
        self.records
            .iter()
            .map(|r| Some((r.sgen_tot_cum? - r.sgen_int_cum - r.sgen_ht_cum?).abs()))
            .try_fold(0.0f64, |acc, g| g.map(|g| acc.max(g)))
    }
}

fn qubit_state(point: &TrajectoryPoint, index: usize) -> Result<QubitThermoState, LedgerError> {
    if point.rho.dim() != 2 {
        return Err(LedgerError::Dimension {
            expected: 2,
            found: point.rho.dim(),
        });
    }
    let field = point.field.ok_or(LedgerError::MissingField { index })?;
    let bloch = bloch_from_density(&point.rho).map_err(|e| LedgerError::from(e).at(index))?;
    Ok(QubitThermoState::new(bloch, field))
}

/// Runs the full heat/work/entropy accounting over a single-qubit trajectory.
pub fn accumulate(traj: &Trajectory, env: &EnvironmentSpec) -> Result<LedgerSeries, LedgerError> {
    let points = traj.points();
    if points.len() < 2 {
        return Err(LedgerError::TooShort(points.len()));
    }
    let t_env = match env.temperature() {
        Some(t) if t == 0.0 || !t.is_finite() => return Err(LedgerError::InvalidEnvironment(t)),
        other => other,
    };

    let states = points
        .iter()
        .enumerate()
        .map(|(i, p)| qubit_state(p, i))
        .collect::<Result<Vec<_>, _>>()?;

    let constant_field = states.windows(2).all(|w| w[0].field() == w[1].field());
    let relative_route = match (t_env, constant_field) {
        (Some(_), true) => {
            let eq = env.equilibrium_state(states[0].field())?;
            Some((relative_entropy(&points[0].rho, &eq)?, eq))
        }
        _ => None,
    };

    let mut heat = CompensatedSum::default();
    let mut work = CompensatedSum::default();
    let mut sgen_int = CompensatedSum::default();
    let mut sgen_int_coh = CompensatedSum::default();
    let mut sgen_ht = CompensatedSum::default();
    let mut sgen_tot = CompensatedSum::default();
    let mut max_residual = 0.0f64;

    let mut records = Vec::with_capacity(points.len());
    let mut entropy_prev = 0.0;
    for (i, (point, state)) in points.iter().zip(&states).enumerate() {
        let entropy = von_neumann_entropy(state.modulus().min(1.0)).map_err(|e| LedgerError::from(e).at(i))?;
        let energy = internal_energy(state);
        if i > 0 {
            let prev = &states[i - 1];
            let mid_field = prev.field().midpoint(state.field()).unwrap_or(*state.field());
            let mid_bloch = prev.bloch().midpoint(state.bloch());
            let dq = heat_increment(prev.bloch(), state.bloch(), &mid_field);
            let dw = work_increment(&mid_bloch, prev.field(), state.field());
            let de = energy - internal_energy(prev);
            max_residual = max_residual.max((de - dq - dw).abs());

            heat.add(dq);
            work.add(dw);
            sgen_int.add(internal_entropy_increment(prev, state));
            sgen_int_coh.add(internal_entropy_increment_coherence(prev, state));
            if let Some(te) = t_env {
                let t_mid = temperature(&QubitThermoState::new(mid_bloch, mid_field));
                sgen_ht.add(heat_transfer_entropy_increment(dq, t_mid, te).map_err(|e| e.at(i))?);
                sgen_tot.add(entropy - entropy_prev - dq / te);
            }
        }
        entropy_prev = entropy;

        let sgen_tot_relative = match &relative_route {
            Some((d0, eq)) => Some(d0 - relative_entropy(&point.rho, eq).map_err(|e| e.at(i))?),
            None => None,
        };
        records.push(LedgerRecord {
            t: point.t,
            bloch: *state.bloch(),
            epsilon: state.epsilon(),
            energy,
            entropy,
            temperature: temperature(state),
            coherence: coherence_l1(state),
            heat_cum: heat.value(),
            work_cum: work.value(),
            sgen_int_cum: sgen_int.value(),
            sgen_int_coherence_cum: sgen_int_coh.value(),
            sgen_ht_cum: t_env.map(|_| sgen_ht.value()),
            sgen_tot_cum: t_env.map(|_| sgen_tot.value()),
            sgen_tot_relative,
        });
    }

    Ok(LedgerSeries {
        records,
        environment: *env,
        max_first_law_residual: max_residual,
    })
}

/// Entropy balance of a closed two-qubit system at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairBalanceRecord {
    pub t: f64,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub entropy_ab: f64,
    pub mutual_information: f64,
    pub temperature_a: Temperature,
    pub temperature_b: Temperature,
    pub energy_a: f64,
    pub energy_b: f64,
    pub sgen_int_a: f64,
    pub sgen_int_b: f64,
    pub sgen_ht: f64,
}

impl PairBalanceRecord {
    pub fn total(&self) -> f64 {
        self.sgen_int_a + self.sgen_int_b + self.sgen_ht
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairBalance {
    pub records: Vec<PairBalanceRecord>,
    /// Change of mutual information between the first and last sample.
    pub delta_mutual_information: f64,
    /// max |S_AB(t) - S_AB(0)|.
    pub max_entropy_drift: f64,
}

impl PairBalance {
    pub fn total(&self) -> f64 {
        self.records.last().map(PairBalanceRecord::total).unwrap_or(0.0)
    }

    pub fn residual(&self) -> f64 {
        self.total() - self.delta_mutual_information
    }
}

/// Entropy-production balance for two qubits under closed (unitary) evolution.
///
/// Each qubit carries its own internal production and exchanges heat with the
/// other at its instantaneous temperature. The boundary term is
/// `Σ_X ∫ δQ_X / T_X`, which reduces to `∫ δQ (1/T_A - 1/T_B)` whenever the
/// local energies are conserved together. The sum of all three terms equals
/// the change in mutual information.
pub fn pair_entropy_balance(
    traj_ab: &Trajectory,
    field_a: &FieldVector,
    field_b: &FieldVector,
) -> Result<PairBalance, LedgerError> {
    let points = traj_ab.points();
    if points.len() < 2 {
        return Err(LedgerError::TooShort(points.len()));
    }

    struct Local {
        a: QubitThermoState,
        b: QubitThermoState,
        s_a: f64,
        s_b: f64,
        s_ab: f64,
    }
    let locals = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.rho.dim() != 4 {
                return Err(LedgerError::Dimension {
                    expected: 4,
                    found: p.rho.dim(),
                });
            }
            let build = || -> Result<Local, LedgerError> {
                let ra = partial_trace(&p.rho, Subsystem::A)?;
                let rb = partial_trace(&p.rho, Subsystem::B)?;
                Ok(Local {
                    a: QubitThermoState::new(bloch_from_density(&ra)?, *field_a),
                    b: QubitThermoState::new(bloch_from_density(&rb)?, *field_b),
                    s_a: entropy_of(&ra)?,
                    s_b: entropy_of(&rb)?,
                    s_ab: entropy_of(&p.rho)?,
                })
            };
            build().map_err(|e| e.at(i))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let s_ab0 = locals[0].s_ab;
    let max_entropy_drift = locals
        .iter()
        .map(|l| (l.s_ab - s_ab0).abs())
        .fold(0.0, f64::max);
    if max_entropy_drift > UNITARY_ENTROPY_DRIFT {
        return Err(LedgerError::NotUnitary {
            drift: max_entropy_drift,
        });
    }

    let boundary = |s0: &QubitThermoState, s1: &QubitThermoState| -> Result<f64, LedgerError> {
        let mid = midpoint_state(s0, s1);
        let dq = heat_increment(s0.bloch(), s1.bloch(), mid.field());
        if dq == 0.0 {
            return Ok(0.0);
        }
        let beta = temperature(&mid).inverse().ok_or(LedgerError::SingularTemperature)?;
        Ok(dq * beta)
    };

    let mut int_a = CompensatedSum::default();
    let mut int_b = CompensatedSum::default();
    let mut ht = CompensatedSum::default();
    let mut records = Vec::with_capacity(points.len());
    for (i, (p, l)) in points.iter().zip(&locals).enumerate() {
        if i > 0 {
            let prev = &locals[i - 1];
            int_a.add(internal_entropy_increment(&prev.a, &l.a));
            int_b.add(internal_entropy_increment(&prev.b, &l.b));
            ht.add(boundary(&prev.a, &l.a).map_err(|e| e.at(i))?);
            ht.add(boundary(&prev.b, &l.b).map_err(|e| e.at(i))?);
        }
        records.push(PairBalanceRecord {
            t: p.t,
            entropy_a: l.s_a,
            entropy_b: l.s_b,
            entropy_ab: l.s_ab,
            mutual_information: l.s_a + l.s_b - l.s_ab,
            temperature_a: temperature(&l.a),
            temperature_b: temperature(&l.b),
            energy_a: internal_energy(&l.a),
            energy_b: internal_energy(&l.b),
            sgen_int_a: int_a.value(),
            sgen_int_b: int_b.value(),
            sgen_ht: ht.value(),
        });
    }
    let delta_mutual_information =
        records.last().unwrap().mutual_information - records[0].mutual_information;
    Ok(PairBalance {
        records,
        delta_mutual_information,
        max_entropy_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::density_from_bloch;
    use num_complex::Complex64;

    fn z_field(eps: f64) -> FieldVector {
        FieldVector::along_z(eps).unwrap()
    }

    fn bv(x: f64, y: f64, z: f64) -> BlochVector {
        BlochVector::new(x, y, z).unwrap()
    }

    #[test]
    fn heat_vanishes_for_rotation_about_field() {
        let f = z_field(1.3);
        let (s, c) = 0.7f64.sin_cos();
        let b0 = bv(0.5, 0.0, 0.4);
        let b1 = bv(0.5 * c, 0.5 * s, 0.4);
        assert_eq!(heat_increment(&b0, &b1, &f), 0.0);
        assert!((heat_increment(&bv(0.0, 0.0, 0.1), &bv(0.0, 0.0, 0.35), &f) + 1.3 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn work_examples() {
        let v = z_field(1.0);
        assert_eq!(work_increment(&bv(0.3, 0.1, 0.2), &v, &v), 0.0);
        let v1 = z_field(1.25);
        assert!((work_increment(&bv(0.0, 0.0, 1.0), &v, &v1) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn internal_entropy_zero_cases() {
        let f = z_field(1.0);
        let (s, c) = 0.3f64.sin_cos();
        let s0 = QubitThermoState::new(bv(0.4, 0.0, 0.5), f);
        let s1 = QubitThermoState::new(bv(0.4 * c, 0.4 * s, 0.5), f);
        assert!(internal_entropy_increment(&s0, &s1).abs() < 1e-16);
        assert!(internal_entropy_increment_coherence(&s0, &s1).abs() < 1e-16);

        let a = QubitThermoState::new(bv(0.0, 0.0, 0.2), f);
        let b = QubitThermoState::new(bv(0.0, 0.0, 0.6), f);
        assert_eq!(internal_entropy_increment(&a, &b), 0.0);
        assert_eq!(internal_entropy_increment_coherence(&a, &b), 0.0);
    }

    #[test]
    fn decoherence_step_matches_coherence_form() {
        let f = z_field(1.0);
        let h = 1e-5;
        let s0 = QubitThermoState::new(bv(0.3, 0.2, 0.5), f);
        // Shrink the transverse part and grow B∥ slightly, without rotating.
        let s1 = QubitThermoState::new(bv(0.3 * (1.0 - h), 0.2 * (1.0 - h), 0.5 + h), f);
        let a = internal_entropy_increment(&s0, &s1);
        let b = internal_entropy_increment_coherence(&s0, &s1);
        assert!(a > 0.0);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn heat_transfer_term_cases() {
        assert_eq!(heat_transfer_entropy_increment(0.3, Temperature::Finite(2.0), 2.0).unwrap(), 0.0);
        assert_eq!(heat_transfer_entropy_increment(0.0, Temperature::Finite(5.0), 2.0).unwrap(), 0.0);
        assert!(heat_transfer_entropy_increment(-0.1, Temperature::Finite(15.0), 10.0).unwrap() > 0.0);
        assert!(heat_transfer_entropy_increment(0.1, Temperature::Finite(5.0), 10.0).unwrap() > 0.0);
        assert_eq!(
            heat_transfer_entropy_increment(0.1, Temperature::Zero { negative: false }, 10.0),
            Err(LedgerError::SingularTemperature)
        );
        assert!((heat_transfer_entropy_increment(0.1, Temperature::Undefined, 10.0).unwrap() + 0.01).abs() < 1e-17);
        assert!(heat_transfer_entropy_increment(0.1, Temperature::Finite(1.0), 0.0).is_err());
    }

    #[test]
    fn relative_entropy_cases() {
        let rho = density_from_bloch(&bv(0.1, -0.3, 0.4));
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-14);
        let pure = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let mixed = ComplexMatrix::identity(2).scale_real(0.5);
        assert!((relative_entropy(&pure, &mixed).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(relative_entropy(&mixed, &pure), Err(LedgerError::Support { .. })));
    }

    #[test]
    fn relative_route_vanishes_without_change() {
        let f = z_field(1.0);
        let env = EnvironmentSpec::Thermal { temperature: 2.0 };
        let rho = density_from_bloch(&bv(0.2, 0.1, 0.3));
        assert!(total_entropy_production_relative(&rho, &rho, &env, &f).unwrap().abs() < 1e-15);
        let eq = env.equilibrium_state(&f).unwrap();
        assert!(total_entropy_production_relative(&eq, &eq, &env, &f).unwrap().abs() < 1e-15);
        assert!(matches!(
            total_entropy_production_relative(&rho, &rho, &EnvironmentSpec::Thermal { temperature: 0.0 }, &f),
            Err(LedgerError::InvalidEnvironment(_))
        ));
    }

    #[test]
    fn mutual_information_of_bell_and_product() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [h, 0.0, 0.0, h];
        let mut bell = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                bell.set(i, j, Complex64::new(psi[i] * psi[j], 0.0));
            }
        }
        assert!((mutual_information(&bell).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);

        let prod = kron(&density_from_bloch(&bv(0.1, 0.2, 0.3)), &density_from_bloch(&bv(-0.5, 0.0, 0.1)));
        assert!(mutual_information(&prod).unwrap().abs() < 1e-13);
        assert!(mutual_information_divergence(&prod).unwrap().abs() < 1e-13);
    }

    #[test]
    fn constant_trajectory_has_zero_increments() {
        let f = z_field(1.0);
        let rho = density_from_bloch(&bv(0.2, 0.3, 0.1));
        let traj = Trajectory::new(
            (0..5)
                .map(|i| TrajectoryPoint {
                    t: i as f64,
                    rho,
                    field: Some(f),
                })
                .collect(),
        )
        .unwrap();
        let series = accumulate(&traj, &EnvironmentSpec::Thermal { temperature: 3.0 }).unwrap();
        for r in &series.records {
            assert_eq!(r.heat_cum, 0.0);
            assert_eq!(r.work_cum, 0.0);
            assert_eq!(r.sgen_int_cum, 0.0);
            assert_eq!(r.sgen_ht_cum, Some(0.0));
            assert_eq!(r.sgen_tot_cum, Some(0.0));
            assert!(r.sgen_tot_relative.unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn unspecified_environment_omits_boundary_channels() {
        let f = z_field(1.0);
        let traj = Trajectory::new(vec![
            TrajectoryPoint { t: 0.0, rho: density_from_bloch(&bv(0.3, 0.0, 0.3)), field: Some(f) },
            TrajectoryPoint { t: 1.0, rho: density_from_bloch(&bv(0.2, 0.0, 0.4)), field: Some(f) },
        ])
        .unwrap();
        let series = accumulate(&traj, &EnvironmentSpec::Unspecified).unwrap();
        let last = series.last();
        assert!(last.sgen_ht_cum.is_none() && last.sgen_tot_cum.is_none() && last.sgen_tot_relative.is_none());
        assert!(last.sgen_int_cum > 0.0);
        assert!((last.heat_cum + 0.1).abs() < 1e-15);
    }

    #[test]
    fn accumulate_rejects_bad_trajectories() {
        let f = z_field(1.0);
        let p = TrajectoryPoint { t: 0.0, rho: density_from_bloch(&BlochVector::ORIGIN), field: Some(f) };
        assert!(matches!(
            Trajectory::new(vec![p, TrajectoryPoint { t: 0.0, ..p }]),
            Err(LedgerError::NonMonotonicTime { index: 1 })
        ));
        let single = Trajectory::new(vec![p]).unwrap();
        assert_eq!(accumulate(&single, &EnvironmentSpec::Unspecified), Err(LedgerError::TooShort(1)));
        let no_field = Trajectory::new(vec![p, TrajectoryPoint { t: 1.0, field: None, ..p }]).unwrap();
        assert_eq!(
            accumulate(&no_field, &EnvironmentSpec::Unspecified),
            Err(LedgerError::MissingField { index: 1 })
        );
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-10).abs() < 1e-20);
    }
}
