//! Master-equation generators for the application models.
//!
//! Every model uses the same frame: basis state `|0⟩` is the ground state,
//! with Bloch vector `(0, 0, 1)`, and the lowering operator is
//! `σ₋ = |0⟩⟨1|`. The local field of a qubit with splitting `ω₀` is
//! `v = (0, 0, ω₀/2)`, so `ε = ω₀/2` and the ground energy is `-ε`.
//! Two-qubit states are ordered `|a b⟩ ↦ 2a + b` with atom A on the left.

mod integrator;

pub use integrator::{integrate, integrate_with_diagnostics, IntegrationDiagnostics, IntegratorConfig};

use thiserror::Error;

use crate::bloch::{BlochError, FieldVector};
use crate::ledger::{LedgerError, Trajectory, TrajectoryPoint};
use crate::smalg::{kron, partial_trace, pauli, ComplexMatrix, LinalgError, Subsystem};
use num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("initial state has dimension {found}, model needs {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("initial state is not a density matrix: {0}")]
    InvalidState(String),
    #[error("step size underflow at t = {t} (h = {h:e}, step {step})")]
    StepUnderflow { t: f64, h: f64, step: usize },
    #[error("positivity lost at t = {t} (minimum eigenvalue {min_eigenvalue:e}, step {step})")]
    PositivityLost { t: f64, min_eigenvalue: f64, step: usize },
    #[error("non-finite state at t = {t} (step {step})")]
    NonFinite { t: f64, step: usize },
    #[error("argument of atanh is {0}, outside (0, 1)")]
    OutsideDomain(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

fn check_positive(name: &'static str, value: f64) -> Result<(), DynamicsError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DynamicsError::InvalidParameter {
            name,
            reason: format!("must be finite and positive, got {value}"),
        })
    }
}

/// Thermal single-qubit Lindblad dynamics in the interaction picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitThermal {
    pub gamma0: f64,
    pub omega0: f64,
    pub t_env: f64,
}

impl SingleQubitThermal {
    pub fn occupation(&self) -> f64 {
        planck_occupation(self.omega0, self.t_env)
    }

    pub fn field(&self) -> FieldVector {
        qubit_field(self.omega0)
    }
}

/// Two atoms decaying into a common zero-temperature field.
///
/// `g` is the ratio of the cross rate to the individual rate, `γ = g γ₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoAtomDissipative {
    pub gamma0: f64,
    pub g: f64,
    pub omega0: f64,
}

impl TwoAtomDissipative {
    pub fn field(&self) -> FieldVector {
        qubit_field(self.omega0)
    }
}

/// Two qubits exchanging an excitation under a closed Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedPairExchange {
    pub coupling: f64,
    pub eps_a: f64,
    pub eps_b: f64,
}

impl ClosedPairExchange {
    pub fn field_a(&self) -> FieldVector {
        FieldVector::along_z(self.eps_a).expect("validated energy")
    }

    pub fn field_b(&self) -> FieldVector {
        FieldVector::along_z(self.eps_b).expect("validated energy")
    }

    /// `-ε_a σz⊗I - ε_b I⊗σz + g (σ₊⊗σ₋ + σ₋⊗σ₊)`.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        let id = ComplexMatrix::identity(2);
        let z = pauli::z();
        let flip = kron(&pauli::raising(), &pauli::lowering()) + kron(&pauli::lowering(), &pauli::raising());
        -(kron(&z, &id).scale_real(self.eps_a) + kron(&id, &z).scale_real(self.eps_b))
            + flip.scale_real(self.coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    SingleQubitThermal(SingleQubitThermal),
    TwoAtomDissipative(TwoAtomDissipative),
    ClosedPairExchange(ClosedPairExchange),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        match self {
            ModelSpec::SingleQubitThermal(m) => {
                check_positive("gamma0", m.gamma0)?;
                check_positive("omega0", m.omega0)?;
                check_positive("t_env", m.t_env)
            }
            ModelSpec::TwoAtomDissipative(m) => {
                check_positive("gamma0", m.gamma0)?;
                check_positive("omega0", m.omega0)?;
                if !(m.g > 0.0 && m.g <= 1.0) {
                    return Err(DynamicsError::InvalidParameter {
                        name: "g",
                        reason: format!("must lie in (0, 1], got {}", m.g),
                    });
                }
                Ok(())
            }
            ModelSpec::ClosedPairExchange(m) => {
                check_positive("eps_a", m.eps_a)?;
                check_positive("eps_b", m.eps_b)?;
                if !m.coupling.is_finite() {
                    return Err(DynamicsError::InvalidParameter {
                        name: "coupling",
                        reason: format!("must be finite, got {}", m.coupling),
                    });
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::SingleQubitThermal(_) => 2,
            _ => 4,
        }
    }

    /// Field attached to trajectory samples; two-qubit models carry none.
    pub fn sample_field(&self) -> Option<FieldVector> {
        match self {
            ModelSpec::SingleQubitThermal(m) => Some(m.field()),
            _ => None,
        }
    }

    pub fn rhs(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        match self {
            ModelSpec::SingleQubitThermal(m) => rhs_single_qubit_thermal(rho, m),
            ModelSpec::TwoAtomDissipative(m) => rhs_two_atom(rho, m),
            ModelSpec::ClosedPairExchange(m) => rhs_unitary_pair(rho, m),
        }
    }
}

/// `v = (0, 0, ω₀/2)`.
pub fn qubit_field(omega0: f64) -> FieldVector {
    FieldVector::along_z(0.5 * omega0).expect("positive splitting")
}

/// Mean photon number `1/(e^{ω₀/T} - 1)`.
pub fn planck_occupation(omega0: f64, t_env: f64) -> f64 {
    1.0 / (omega0 / t_env).exp_m1()
}

/// `L ρ L† - ½{L†L, ρ}`.
fn dissipator(l: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let ld = l.adjoint();
    let ldl = ld * *l;
    *l * *rho * ld - (ldl * *rho + *rho * ldl).scale_real(0.5)
}

/// Emission at rate `γ₀(N+1)` and absorption at rate `γ₀N`.
pub fn rhs_single_qubit_thermal(rho: &ComplexMatrix, spec: &SingleQubitThermal) -> ComplexMatrix {
    let n = spec.occupation();
    let down = dissipator(&pauli::lowering(), rho).scale_real(spec.gamma0 * (n + 1.0));
    let up = dissipator(&pauli::raising(), rho).scale_real(spec.gamma0 * n);
    down + up
}

/// Collective decay `Σ_kl (γ_kl/2)(2σ₋ᵏρσ₊ˡ - σ₊ˡσ₋ᵏρ - ρσ₊ˡσ₋ᵏ)`.
pub fn rhs_two_atom(rho: &ComplexMatrix, spec: &TwoAtomDissipative) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let lower = [kron(&pauli::lowering(), &id), kron(&id, &pauli::lowering())];
    let raise = lower.map(|l| l.adjoint());
    let mut out = ComplexMatrix::zeros(4);
    for k in 0..2 {
        for l in 0..2 {
            let rate = if k == l { spec.gamma0 } else { spec.g * spec.gamma0 };
            let jump = lower[k] * *rho * raise[l];
            let number = raise[l] * lower[k];
            let term = jump.scale_real(2.0) - number * *rho - *rho * number;
            out = out + term.scale_real(0.5 * rate);
        }
    }
    out
}

/// `-i[H, ρ]`.
pub fn rhs_unitary_pair(rho: &ComplexMatrix, spec: &ClosedPairExchange) -> ComplexMatrix {
    spec.hamiltonian().commutator(rho).scale(Complex64::new(0.0, -1.0))
}

/// Marginal trajectory of one qubit, with `field` attached to every sample.
pub fn reduced_thermo_view(
    traj: &Trajectory,
    which: Subsystem,
    field: &FieldVector,
) -> Result<Trajectory, DynamicsError> {
    let points = traj
        .points()
        .iter()
        .map(|p| {
            Ok(TrajectoryPoint {
                t: p.t,
                rho: partial_trace(&p.rho, which)?,
                field: Some(*field),
            })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(Trajectory::new(points)?)
}

/// Low-temperature equilibrium temperature of an atom in a thermal cavity,
/// `ω₀ / atanh(1 - 2e^{-ω₀/T})`.
pub fn jc_equilibrium_temperature(omega0: f64, t_env: f64) -> Result<f64, DynamicsError> {
    check_positive("omega0", omega0)?;
    check_positive("t_env", t_env)?;
    let arg = 1.0 - 2.0 * (-omega0 / t_env).exp();
    if !(arg > 0.0 && arg < 1.0) {
        return Err(DynamicsError::OutsideDomain(arg));
    }
    Ok(omega0 / arg.atanh())
}
