//! Closed-form thermodynamics of a single qubit on the Bloch sphere.
//!
//! Units: `k_B = ħ = 1`. Energies, fields and temperatures share one unit;
//! entropies and heat capacities are dimensionless (in units of `k_B`).
//!
//! The qubit Hamiltonian is `H = -v·σ`. The ground state is the Bloch
//! vector aligned with `v̂` and the eigenenergies are `±ε` with `ε = |v|`.

use num_complex::Complex64;
use thiserror::Error;

use crate::smalg::{pauli, ComplexMatrix};

/// Bloch moduli above `1 - PURE_THRESHOLD` are treated as pure states.
pub const PURE_THRESHOLD: f64 = 1e-12;

/// Overshoot of the unit sphere that construction silently clamps.
pub const MODULUS_CLAMP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlochError {
    #[error("Bloch vector modulus {modulus} exceeds 1 (non-physical state)")]
    NonPhysical { modulus: f64 },
    #[error("non-finite component in {what}")]
    NonFinite { what: &'static str },
    #[error("field vector has zero modulus")]
    ZeroField,
    #[error("Bloch modulus {modulus} outside [0, 1]")]
    ModulusOutOfRange { modulus: f64 },
    #[error("density matrix must be 2×2, found {dim}×{dim}")]
    Dimension { dim: usize },
    #[error("density matrix is not a unit-trace Hermitian matrix (trace {trace}, hermiticity violation {violation:e})")]
    NotDensity { trace: f64, violation: f64 },
    #[error("temperature must be nonzero")]
    ZeroTemperature,
    #[error("invalid populations ({ground}, {excited})")]
    InvalidPopulations { ground: f64, excited: f64 },
    #[error("energy scale must be positive, got {0}")]
    NonPositiveEnergy(f64),
}

/// Real 3-vector helpers shared by the Bloch and field vectors.
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Pauli-basis components of a qubit state, `|b| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    components: [f64; 3],
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector {
        components: [0.0; 3],
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, BlochError> {
        Self::from_array([x, y, z])
    }

    pub fn from_array(components: [f64; 3]) -> Result<Self, BlochError> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(BlochError::NonFinite { what: "Bloch vector" });
        }
        let modulus = norm(components);
        if modulus > 1.0 + MODULUS_CLAMP {
            return Err(BlochError::NonPhysical { modulus });
        }
        if modulus > 1.0 {
            let s = 1.0 / modulus;
            return Ok(Self {
                components: components.map(|c| c * s),
            });
        }
        Ok(Self { components })
    }

    /// Bloch vector with modulus `modulus` at polar angle `theta` from the
    /// field direction `axis`, in the plane spanned by `axis` and `x̂` (or `ŷ`
    /// when `axis ∥ x̂`).
    pub fn at_angle(modulus: f64, theta: f64, axis: &FieldVector) -> Result<Self, BlochError> {
        let n = axis.direction();
        let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let proj = dot(helper, n);
        let mut e = [helper[0] - proj * n[0], helper[1] - proj * n[1], helper[2] - proj * n[2]];
        let en = norm(e);
        e = e.map(|c| c / en);
        let (s, c) = theta.sin_cos();
        Self::from_array([0, 1, 2].map(|k| modulus * (c * n[k] + s * e[k])))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.components
    }

    pub fn x(&self) -> f64 {
        self.components[0]
    }

    pub fn y(&self) -> f64 {
        self.components[1]
    }

    pub fn z(&self) -> f64 {
        self.components[2]
    }

    pub fn modulus(&self) -> f64 {
        norm(self.components)
    }

    pub fn dot(&self, v: [f64; 3]) -> f64 {
        dot(self.components, v)
    }

    /// Componentwise `self - other`.
    pub fn delta(&self, other: &BlochVector) -> [f64; 3] {
        [0, 1, 2].map(|k| self.components[k] - other.components[k])
    }

    /// The chord midpoint; always inside the ball.
    pub fn midpoint(&self, other: &BlochVector) -> BlochVector {
        BlochVector {
            components: [0, 1, 2].map(|k| 0.5 * (self.components[k] + other.components[k])),
        }
    }
}

/// Effective field `v` of `H = -v·σ`; `ε = |v|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector {
    components: [f64; 3],
}

impl FieldVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self, BlochError> {
        Self::from_array([x, y, z])
    }

    pub fn from_array(components: [f64; 3]) -> Result<Self, BlochError> {
        if components.iter().any(|c| !c.is_finite()) {
            return Err(BlochError::NonFinite { what: "field vector" });
        }
        if norm(components) == 0.0 {
            return Err(BlochError::ZeroField);
        }
        Ok(Self { components })
    }

    /// Field of magnitude `epsilon` along `+ẑ`.
    pub fn along_z(epsilon: f64) -> Result<Self, BlochError> {
        Self::new(0.0, 0.0, epsilon)
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.components
    }

    /// Eigenenergy `ε = |v|`.
    pub fn energy(&self) -> f64 {
        norm(self.components)
    }

    pub fn direction(&self) -> [f64; 3] {
        let e = self.energy();
        self.components.map(|c| c / e)
    }

    pub fn delta(&self, other: &FieldVector) -> [f64; 3] {
        [0, 1, 2].map(|k| self.components[k] - other.components[k])
    }

    /// Midpoint of two fields. `None` if they cancel.
    pub fn midpoint(&self, other: &FieldVector) -> Option<FieldVector> {
        FieldVector::from_array([0, 1, 2].map(|k| 0.5 * (self.components[k] + other.components[k]))).ok()
    }

    /// The qubit Hamiltonian `-v·σ`.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        let [x, y, z] = self.components;
        -(pauli::x().scale_real(x) + pauli::y().scale_real(y) + pauli::z().scale_real(z))
    }
}

/// A Bloch vector together with the field that defines its energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitThermoState {
    bloch: BlochVector,
    field: FieldVector,
    parallel: f64,
    perpendicular: f64,
}

impl QubitThermoState {
    pub fn new(bloch: BlochVector, field: FieldVector) -> Self {
        let modulus = bloch.modulus();
        let parallel = bloch.dot(field.direction()).clamp(-modulus, modulus);
        let n = field.direction();
        let b = bloch.as_array();
        let perp = [0, 1, 2].map(|k| b[k] - parallel * n[k]);
        Self {
            bloch,
            field,
            parallel,
            perpendicular: norm(perp),
        }
    }

    pub fn bloch(&self) -> &BlochVector {
        &self.bloch
    }

    pub fn field(&self) -> &FieldVector {
        &self.field
    }

    pub fn modulus(&self) -> f64 {
        self.bloch.modulus()
    }

    /// `B∥ = B·v̂`.
    pub fn parallel(&self) -> f64 {
        self.parallel
    }

    /// `B⊥ = |B - B∥ v̂|`.
    pub fn perpendicular(&self) -> f64 {
        self.perpendicular
    }

    /// The component of the Bloch vector orthogonal to the field.
    pub fn perpendicular_vector(&self) -> [f64; 3] {
        let n = self.field.direction();
        let b = self.bloch.as_array();
        [0, 1, 2].map(|k| b[k] - self.parallel * n[k])
    }

    pub fn epsilon(&self) -> f64 {
        self.field.energy()
    }
}

/// Classified qubit temperature (`k_B T` in energy units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Finite(f64),
    /// Pure state off the `B∥ = 0` plane: `T → 0` with the sign of `B∥`.
    Zero { negative: bool },
    /// `B∥ = 0`: the temperature diverges (`1/T = 0`).
    Undefined,
}

impl Temperature {
    /// Numeric value, with signed zero for pure states and `None` when undefined.
    pub fn value(&self) -> Option<f64> {
        match *self {
            Temperature::Finite(t) => Some(t),
            Temperature::Zero { negative } => Some(if negative { -0.0 } else { 0.0 }),
            Temperature::Undefined => None,
        }
    }

    /// `1/T`, continued as zero on the undefined plane; `None` at `T = 0`.
    pub fn inverse(&self) -> Option<f64> {
        match *self {
            Temperature::Finite(t) => Some(1.0 / t),
            Temperature::Zero { .. } => None,
            Temperature::Undefined => Some(0.0),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Temperature::Finite(_) => "finite",
            Temperature::Zero { .. } => "zero",
            Temperature::Undefined => "undefined",
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Temperature::Finite(_))
    }
}

/// `atanh(B)/B`, continuous at `B = 0`.
pub(crate) fn atanh_ratio(b: f64) -> f64 {
    if b < 1e-4 {
        let b2 = b * b;
        1.0 + b2 * (1.0 / 3.0 + b2 / 5.0)
    } else {
        b.atanh() / b
    }
}

/// `ρ = (I + b·σ)/2`.
pub fn density_from_bloch(b: &BlochVector) -> ComplexMatrix {
    let [x, y, z] = b.as_array();
    ComplexMatrix::from_row_major(
        2,
        &[
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        ],
    )
    .expect("2×2 layout")
}

/// `b_k = tr(ρ σ_k)`.
pub fn bloch_from_density(rho: &ComplexMatrix) -> Result<BlochVector, BlochError> {
    if rho.dim() != 2 {
        return Err(BlochError::Dimension { dim: rho.dim() });
    }
    let trace = rho.trace();
    let violation = rho.hermitian_violation();
    if violation > 1e-10 || (trace.re - 1.0).abs() > 1e-8 || trace.im.abs() > 1e-10 {
        return Err(BlochError::NotDensity {
            trace: trace.re,
            violation,
        });
    }
    let off = 0.5 * (rho.get(0, 1) + rho.get(1, 0).conj());
    BlochVector::new(
        2.0 * off.re,
        -2.0 * off.im,
        rho.get(0, 0).re - rho.get(1, 1).re,
    )
}

/// Von Neumann entropy `S/k_B` of a qubit with Bloch modulus `b`.
pub fn von_neumann_entropy(b: f64) -> Result<f64, BlochError> {
    if !(0.0..=1.0).contains(&b) {
        return Err(BlochError::ModulusOutOfRange { modulus: b });
    }
    if b > 1.0 - PURE_THRESHOLD {
        return Ok(0.0);
    }
    let p = 0.5 * (1.0 + b);
    let q = 0.5 * (1.0 - b);
    Ok(-p * p.ln() - q * q.ln())
}

/// `E = -B·v = -ε B∥`.
pub fn internal_energy(s: &QubitThermoState) -> f64 {
    -s.bloch().dot(s.field().as_array())
}

/// Temperature from modulus `b`, projection `b_par` and energy scale `epsilon`.
pub fn temperature_at(b: f64, b_par: f64, epsilon: f64) -> Temperature {
    if b_par == 0.0 || b == 0.0 {
        return Temperature::Undefined;
    }
    if b > 1.0 - PURE_THRESHOLD {
        return Temperature::Zero {
            negative: b_par < 0.0,
        };
    }
    Temperature::Finite(epsilon / (b_par * atanh_ratio(b)))
}

/// Qubit temperature `T = ε B / (B∥ atanh B)`.
pub fn temperature(s: &QubitThermoState) -> Temperature {
    temperature_at(s.modulus(), s.parallel(), s.epsilon())
}

/// `1/T = B∥ atanh(B) / (ε B)`; finite everywhere except at pure states off
/// the `B∥ = 0` plane.
pub fn inverse_temperature(s: &QubitThermoState) -> Option<f64> {
    temperature(s).inverse()
}

/// `B_eq = tanh(ε/T)`. Negative temperatures give a negative value.
pub fn equilibrium_bloch_modulus(t_env: f64, epsilon: f64) -> Result<f64, BlochError> {
    if t_env == 0.0 {
        return Err(BlochError::ZeroTemperature);
    }
    Ok((epsilon / t_env).tanh())
}

/// The Gibbs state of `-v·σ` at temperature `t_env`, as a Bloch vector.
pub fn thermal_bloch(t_env: f64, field: &FieldVector) -> Result<BlochVector, BlochError> {
    let b = equilibrium_bloch_modulus(t_env, field.energy())?;
    BlochVector::from_array(field.direction().map(|n| b * n))
}

/// A state at temperature `t` whose Bloch vector makes angle `theta` with the
/// field: `B = tanh(ε / (T cos θ))`.
pub fn state_on_isotherm(t: f64, theta: f64, field: &FieldVector) -> Result<BlochVector, BlochError> {
    if t == 0.0 {
        return Err(BlochError::ZeroTemperature);
    }
    let b = (field.energy() / (t * theta.cos())).tanh().abs();
    BlochVector::at_angle(b, theta, field)
}

/// `T = 2ε / ln(P_g/P_e)` from thermal populations.
pub fn population_temperature(p_ground: f64, p_excited: f64, epsilon: f64) -> Result<Temperature, BlochError> {
    let valid = |p: f64| p > 0.0 && p < 1.0;
    if !valid(p_ground) || !valid(p_excited) || (p_ground + p_excited - 1.0).abs() > 1e-12 {
        return Err(BlochError::InvalidPopulations {
            ground: p_ground,
            excited: p_excited,
        });
    }
    if epsilon <= 0.0 {
        return Err(BlochError::NonPositiveEnergy(epsilon));
    }
    if p_ground == p_excited {
        return Ok(Temperature::Undefined);
    }
    Ok(Temperature::Finite(2.0 * epsilon / (p_ground / p_excited).ln()))
}

/// Heat capacity `C_ε/k_B` from modulus and projection.
pub fn heat_capacity_at(b: f64, b_par: f64) -> f64 {
    if b > 1.0 - PURE_THRESHOLD || b_par == 0.0 || b == 0.0 {
        return 0.0;
    }
    let perp_sq = (b * b - b_par * b_par).max(0.0);
    heat_capacity_parts(b, b_par, perp_sq)
}

fn heat_capacity_parts(b: f64, b_par: f64, perp_sq: f64) -> f64 {
    let a = b.atanh();
    let one_minus = 1.0 - b * b;
    let par_sq = b_par * b_par;
    let numerator = b * one_minus * a * a * par_sq;
    let denominator = a * perp_sq * one_minus + b * par_sq;
    numerator / denominator
}

/// Heat capacity at fixed field, `C_ε = (∂E/∂T)_ε`. Nonnegative everywhere.
pub fn heat_capacity(s: &QubitThermoState) -> f64 {
    let b = s.modulus();
    let b_par = s.parallel();
    if b > 1.0 - PURE_THRESHOLD || b_par == 0.0 || b == 0.0 {
        return 0.0;
    }
    let perp = s.perpendicular();
    heat_capacity_parts(b, b_par, perp * perp)
}

/// Two-level Schottky heat capacity `[x / cosh x]²`, `x = ε/T`.
pub fn heat_capacity_equilibrium(t: f64, epsilon: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let x = epsilon / t;
    let r = x / x.cosh();
    if r.is_finite() {
        r * r
    } else {
        0.0
    }
}

/// l1-norm coherence in the energy eigenbasis: the distance from the Bloch
/// point to the field axis.
pub fn coherence_l1(s: &QubitThermoState) -> f64 {
    s.perpendicular()
}

/// Location and value of the global heat-capacity maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCapacityMaximum {
    pub modulus: f64,
    pub parallel: f64,
    pub value: f64,
    /// `C` at the mirrored point `(B, -B∥)`.
    pub mirrored_value: f64,
    /// `k_B T/ε` of the maximizing state.
    pub reduced_temperature: f64,
}

/// Grid scan of `C(B, B∥)` over the physical domain followed by a
/// golden-section refinement along the `B = B∥` ridge.
pub fn find_heat_capacity_max() -> HeatCapacityMaximum {
    find_heat_capacity_max_with(1e-3, 1e-8)
}

pub fn find_heat_capacity_max_with(grid_step: f64, tolerance: f64) -> HeatCapacityMaximum {
    let n = (1.0 / grid_step).round() as i64;
    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    for i in 0..=n {
        let b = i as f64 / n as f64;
        for j in -i..=i {
            let b_par = j as f64 / n as f64;
            let c = heat_capacity_at(b, b_par);
            if c > best.2 {
                best = (b, b_par, c);
            }
        }
    }

    let ridge = |b: f64| heat_capacity_at(b, b);
    let step = 1.0 / n as f64;
    let lo = (best.0 - step).max(0.0);
    let hi = (best.0 + step).min(1.0 - PURE_THRESHOLD);
    let b = golden_section_max(ridge, lo, hi, tolerance);
    let value = ridge(b);
    HeatCapacityMaximum {
        modulus: b,
        parallel: b,
        value,
        mirrored_value: heat_capacity_at(b, -b),
        reduced_temperature: 1.0 / b.atanh(),
    }
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tolerance: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tolerance {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_field(eps: f64) -> FieldVector {
        FieldVector::along_z(eps).unwrap()
    }

    #[test]
    fn density_of_origin_and_pole() {
        let rho = density_from_bloch(&BlochVector::ORIGIN);
        assert!(rho.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-16);
        let rho = density_from_bloch(&BlochVector::new(0.0, 0.0, 1.0).unwrap());
        assert!(rho.max_abs_diff(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0])) < 1e-16);
    }

    #[test]
    fn two_atom_b_state_round_trip() {
        let b = BlochVector::new(0.2, 0.2, 0.8).unwrap();
        let rho = density_from_bloch(&b);
        assert!((rho.get(0, 1) - Complex64::new(0.1, -0.1)).norm() < 1e-16);
        assert!((rho.get(1, 0) - Complex64::new(0.1, 0.1)).norm() < 1e-16);
        let back = bloch_from_density(&rho).unwrap();
        for (a, b) in back.as_array().iter().zip(b.as_array()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn bloch_from_density_inverse_cases() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert_eq!(bloch_from_density(&half).unwrap().as_array(), [0.0; 3]);
        let up = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert_eq!(bloch_from_density(&up).unwrap().as_array(), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_non_physical_density() {
        let m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(bloch_from_density(&m), Err(BlochError::NonPhysical { .. })));
    }

    #[test]
    fn construction_clamps_small_overshoot() {
        let b = BlochVector::new(0.0, 0.0, 1.0 + 5e-10).unwrap();
        assert_eq!(b.modulus(), 1.0);
        assert!(BlochVector::new(0.0, 0.0, 1.0 + 1e-6).is_err());
        assert!(FieldVector::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn entropy_values() {
        assert!((von_neumann_entropy(0.0).unwrap() - 2f64.ln()).abs() < 1e-16);
        assert_eq!(von_neumann_entropy(1.0).unwrap(), 0.0);
        // -(3/4)ln(3/4) - (1/4)ln(1/4), evaluated independently.
        let expected = -(0.75f64 * 0.75f64.ln()) - 0.25 * 0.25f64.ln();
        let s = von_neumann_entropy(0.5).unwrap();
        assert!((s - expected).abs() < 1e-15);
        assert!((s - 0.562335).abs() < 1e-6);
        assert!(von_neumann_entropy(1.1).is_err());
        assert!(von_neumann_entropy(-0.1).is_err());
    }

    #[test]
    fn energy_examples() {
        let eps = 1.7;
        let ground = QubitThermoState::new(BlochVector::new(0.0, 0.0, 1.0).unwrap(), z_field(eps));
        assert_eq!(internal_energy(&ground), -eps);
        let ortho = QubitThermoState::new(BlochVector::new(0.3, -0.4, 0.0).unwrap(), z_field(eps));
        assert_eq!(internal_energy(&ortho), 0.0);
        let b = QubitThermoState::new(BlochVector::new(0.2, 0.2, 0.8).unwrap(), z_field(1.0));
        assert!((internal_energy(&b) + 0.8).abs() < 1e-16);
    }

    #[test]
    fn temperature_examples() {
        let t1 = 1f64.tanh();
        for field in [z_field(1.0), FieldVector::new(1.0, -2.0, 0.5).unwrap()] {
            let eps = field.energy();
            let up = BlochVector::from_array(field.direction().map(|n| t1 * n)).unwrap();
            let s = QubitThermoState::new(up, field);
            assert!((temperature(&s).value().unwrap() / eps - 1.0).abs() < 1e-14);
            let down = BlochVector::from_array(field.direction().map(|n| -t1 * n)).unwrap();
            let s = QubitThermoState::new(down, field);
            assert!((temperature(&s).value().unwrap() / eps + 1.0).abs() < 1e-14);
        }

        let s = QubitThermoState::new(BlochVector::new(0.6, 0.0, 0.3).unwrap(), z_field(1.0));
        assert!((s.modulus() - 0.670820).abs() < 1e-6);
        let t = temperature(&s).value().unwrap();
        let b = s.modulus();
        assert!((t - b / (0.3 * b.atanh())).abs() < 1e-15);
        assert!((t - 2.752_987_458_965_5).abs() < 1e-12);
        // 1/T = ∂S/∂E at fixed B⊥, with E = -B∥.
        let entropy = |b_par: f64| von_neumann_entropy((0.36 + b_par * b_par).sqrt()).unwrap();
        let h = 1e-6;
        let fd = -(entropy(0.3 + h) - entropy(0.3 - h)) / (2.0 * h);
        assert!((1.0 / fd - t).abs() / t < 1e-8);
    }

    #[test]
    fn temperature_classification() {
        let f = z_field(1.0);
        let pure_up = QubitThermoState::new(BlochVector::new(0.0, 0.0, 1.0).unwrap(), f);
        assert_eq!(temperature(&pure_up), Temperature::Zero { negative: false });
        let pure_down = QubitThermoState::new(BlochVector::new(0.0, 0.6, -0.8).unwrap(), f);
        assert_eq!(temperature(&pure_down), Temperature::Zero { negative: true });
        let equator = QubitThermoState::new(BlochVector::new(0.5, 0.0, 0.0).unwrap(), f);
        assert_eq!(temperature(&equator), Temperature::Undefined);
        assert_eq!(temperature(&equator).inverse(), Some(0.0));
        let center = QubitThermoState::new(BlochVector::ORIGIN, f);
        assert_eq!(temperature(&center), Temperature::Undefined);
    }

    #[test]
    fn equilibrium_modulus() {
        assert!((equilibrium_bloch_modulus(1.0, 1.0).unwrap() - 0.761594).abs() < 1e-6);
        assert_eq!(equilibrium_bloch_modulus(f64::INFINITY, 1.0).unwrap(), 0.0);
        assert!((equilibrium_bloch_modulus(10.0, 1.0).unwrap() - 0.099668).abs() < 1e-6);
        assert!(equilibrium_bloch_modulus(-1.0, 1.0).unwrap() < 0.0);
        assert_eq!(equilibrium_bloch_modulus(0.0, 1.0), Err(BlochError::ZeroTemperature));
    }

    #[test]
    fn population_temperature_cases() {
        assert_eq!(population_temperature(0.5, 0.5, 1.0).unwrap(), Temperature::Undefined);
        let t1 = 1f64.tanh();
        let t = population_temperature(0.5 * (1.0 + t1), 0.5 * (1.0 - t1), 1.0).unwrap();
        assert!((t.value().unwrap() - 1.0).abs() < 1e-14);
        assert!(population_temperature(0.7, 0.2, 1.0).is_err());
        assert!(population_temperature(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn heat_capacity_examples() {
        let f = z_field(1.0);
        let pure = QubitThermoState::new(BlochVector::new(0.6, 0.0, 0.8).unwrap(), f);
        assert_eq!(heat_capacity(&pure), 0.0);
        let plane = QubitThermoState::new(BlochVector::new(0.6, 0.0, 0.0).unwrap(), f);
        assert_eq!(heat_capacity(&plane), 0.0);
        let thermal = QubitThermoState::new(thermal_bloch(1.0, &f).unwrap(), f);
        let expected = 1.0 / 1f64.cosh().powi(2);
        assert!((heat_capacity(&thermal) - expected).abs() < 1e-15);
        assert!((expected - 0.419974).abs() < 1e-6);
        assert!((heat_capacity_equilibrium(1.0, 1.0) - expected).abs() < 1e-15);
        assert_eq!(heat_capacity_equilibrium(f64::INFINITY, 1.0), 0.0);
        assert_eq!(heat_capacity_equilibrium(0.0, 1.0), 0.0);
        assert_eq!(heat_capacity_equilibrium(1e-300, 1.0), 0.0);
    }

    #[test]
    fn coherence_examples() {
        let f = z_field(2.0);
        let aligned = QubitThermoState::new(BlochVector::new(0.0, 0.0, -0.4).unwrap(), f);
        assert_eq!(coherence_l1(&aligned), 0.0);
        let s = QubitThermoState::new(BlochVector::new(0.6, 0.0, 0.3).unwrap(), f);
        assert!((coherence_l1(&s) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn state_on_isotherm_has_requested_temperature() {
        let f = z_field(1.0);
        for theta_deg in [0.0f64, 30.0, 45.0, 60.0] {
            let b = state_on_isotherm(1.0, theta_deg.to_radians(), &f).unwrap();
            let s = QubitThermoState::new(b, f);
            assert!((temperature(&s).value().unwrap() - 1.0).abs() < 1e-12);
            assert!((s.parallel() / s.modulus() - theta_deg.to_radians().cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn heat_capacity_max_on_ridge() {
        let m = find_heat_capacity_max();
        assert!((m.value - 0.4392).abs() < 5e-4);
        assert_eq!(m.modulus, m.parallel);
        assert!((m.value - m.mirrored_value).abs() < 1e-15);
        let t = m.reduced_temperature;
        assert!((heat_capacity_equilibrium(t, 1.0) - m.value).abs() < 1e-12);
    }
}
