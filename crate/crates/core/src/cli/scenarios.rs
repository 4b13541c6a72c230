//! Scenario runners. Each returns a typed report plus the tables written to disk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{
    ClosedPairConfig, CmaxConfig, IsothermalConfig, JcMarkovConfig, RunConfig, ScenarioParams, SurfacesConfig,
    TwoAtomsConfig,
};
use super::table::{Cell, Table};
use crate::bloch::{
    density_from_bloch, find_heat_capacity_max_with, heat_capacity_at, state_on_isotherm, temperature_at,
    BlochVector, FieldVector, HeatCapacityMaximum, Temperature,
};
use crate::dynamics::{
    integrate, qubit_field, reduced_thermo_view, ClosedPairExchange, DynamicsError, IntegratorConfig, ModelSpec,
    SingleQubitThermal, TwoAtomDissipative,
};
use crate::ledger::{accumulate, pair_entropy_balance, EnvironmentSpec, LedgerError, LedgerSeries, PairBalance};
use crate::smalg::{hermitian_eigenvalues, kron, ComplexMatrix, Subsystem};
use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum NumericalError {
    #[error("{context}: {source}")]
    Dynamics {
        context: String,
        #[source]
        source: DynamicsError,
    },
    #[error("{context}: {source}")]
    Ledger {
        context: String,
        #[source]
        source: LedgerError,
    },
    #[error("{0}")]
    Setup(String),
}

trait Context<T> {
    fn context(self, what: &str) -> Result<T, NumericalError>;
}

impl<T> Context<T> for Result<T, DynamicsError> {
    fn context(self, what: &str) -> Result<T, NumericalError> {
        self.map_err(|source| NumericalError::Dynamics {
            context: what.to_string(),
            source,
        })
    }
}

impl<T> Context<T> for Result<T, LedgerError> {
    fn context(self, what: &str) -> Result<T, NumericalError> {
        self.map_err(|source| NumericalError::Ledger {
            context: what.to_string(),
            source,
        })
    }
}

pub fn run_scenario(cfg: &RunConfig) -> Result<Vec<Table>, NumericalError> {
    let integ = cfg.integrator.unwrap_or_default();
    Ok(match &cfg.params {
        ScenarioParams::Surfaces(c) => vec![surfaces(c)],
        ScenarioParams::Cmax(c) => vec![cmax(c).1],
        ScenarioParams::TwoAtoms(c) => two_atoms(c, &integ)?.tables(),
        ScenarioParams::JcMarkov(c) => jc_markov(c, &integ)?.tables(),
        ScenarioParams::Isothermal(c) => isothermal(c, &integ)?.tables(),
        ScenarioParams::ClosedPair(c) => closed_pair(c, &integ)?.tables(),
    })
}

fn temperature_cells(t: Temperature, epsilon: f64) -> [Cell; 2] {
    [Cell::opt(t.value().map(|v| v / epsilon)), t.label().into()]
}

fn summary_table(name: &str, rows: Vec<(&str, Cell)>) -> Table {
    let mut t = Table::new(name, &["quantity", "value"]);
    for (k, v) in rows {
        t.push(vec![k.into(), v]);
    }
    t
}

/// Smallest and largest consecutive difference of a series.
fn step_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    v.windows(2).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| {
        let d = w[1] - w[0];
        (lo.min(d), hi.max(d))
    })
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Temperature class and heat capacity on the grid `B = i·step`, `B∥ = j·step`, `|j| ≤ i`.
pub fn surfaces(cfg: &SurfacesConfig) -> Table {
    let n = (1.0 / cfg.step).round() as i64;
    let mut table = Table::new("surfaces", &["B", "B_par", "temperature_class", "kT_over_eps", "C_eps"]);
    for i in 0..=n {
        let b = i as f64 / n as f64;
        for j in -i..=i {
            let b_par = j as f64 / n as f64;
            let [t, class] = temperature_cells(temperature_at(b, b_par, 1.0), 1.0);
            table.push(vec![b.into(), b_par.into(), class, t, heat_capacity_at(b, b_par).into()]);
        }
    }
    table
}

pub fn cmax(cfg: &CmaxConfig) -> (HeatCapacityMaximum, Table) {
    let m = find_heat_capacity_max_with(cfg.grid_step, cfg.tolerance);
    let mut table = Table::new(
        "cmax",
        &["C_max", "B", "B_par", "C_mirrored", "kT_over_eps", "grid_step", "tolerance"],
    );
    table.push(vec![
        m.value.into(),
        m.modulus.into(),
        m.parallel.into(),
        m.mirrored_value.into(),
        m.reduced_temperature.into(),
        cfg.grid_step.into(),
        cfg.tolerance.into(),
    ]);
    (m, table)
}

pub struct TwoAtomReport {
    pub epsilon: f64,
    pub gamma0: f64,
    pub equal_tolerance: f64,
    pub atom_a: LedgerSeries,
    pub atom_b: LedgerSeries,
    pub peak_time_temperature: f64,
    pub peak_time_energy: f64,
    pub peak_temperature: f64,
    /// First sample from which `|T_a - T_b|/|T_a|` stays within the tolerance.
    pub equal_from: Option<f64>,
    /// First sample where the gap is within tolerance, and the largest gap afterwards.
    pub first_within: Option<f64>,
    pub max_gap_after_first: f64,
    /// First genuine sign change of `T_a - T_b`.
    pub strict_crossing: Option<f64>,
    pub min_sgen_int_a: f64,
    pub min_step_sgen_int_sum: f64,
    pub max_step_total_energy: f64,
}

impl TwoAtomReport {
    pub fn sample_interval(&self) -> f64 {
        self.atom_a.records[1].t - self.atom_a.records[0].t
    }

    pub fn tables(&self) -> Vec<Table> {
        let eps = self.epsilon;
        let mut table = Table::new(
            "two-atoms",
            &[
                "t_gamma0", "T_a", "T_b", "class_a", "class_b", "E_a", "E_b", "sgen_int_a", "sgen_int_b",
                "sgen_int_sum",
            ],
        );
        for (a, b) in self.atom_a.records.iter().zip(&self.atom_b.records) {
            let [ta, ca] = temperature_cells(a.temperature, eps);
            let [tb, cb] = temperature_cells(b.temperature, eps);
            table.push(vec![
                (a.t * self.gamma0).into(),
                ta,
                tb,
                ca,
                cb,
                (a.energy / eps).into(),
                (b.energy / eps).into(),
                a.sgen_int_cum.into(),
                b.sgen_int_cum.into(),
                (a.sgen_int_cum + b.sgen_int_cum).into(),
            ]);
        }
        let last_a = self.atom_a.last();
        let last_b = self.atom_b.last();
        let summary = summary_table(
            "two-atoms_summary",
            vec![
                ("peak_time_T_a", (self.peak_time_temperature * self.gamma0).into()),
                ("peak_time_E_a", (self.peak_time_energy * self.gamma0).into()),
                ("peak_T_a", (self.peak_temperature / eps).into()),
                ("equal_tolerance", self.equal_tolerance.into()),
                ("first_within_tolerance", Cell::opt(self.first_within.map(|t| t * self.gamma0))),
                ("within_tolerance_from", Cell::opt(self.equal_from.map(|t| t * self.gamma0))),
                ("max_gap_after_first", self.max_gap_after_first.into()),
                ("strict_crossing", Cell::opt(self.strict_crossing.map(|t| t * self.gamma0))),
                ("min_sgen_int_a", self.min_sgen_int_a.into()),
                ("min_step_sgen_int_sum", self.min_step_sgen_int_sum.into()),
                ("max_step_total_energy", self.max_step_total_energy.into()),
                ("final_E_a", (last_a.energy / eps).into()),
                ("final_E_b", (last_b.energy / eps).into()),
                ("final_sgen_int_a", last_a.sgen_int_cum.into()),
                ("final_sgen_int_b", last_b.sgen_int_cum.into()),
            ],
        );
        vec![table, summary]
    }
}

pub fn two_atoms(cfg: &TwoAtomsConfig, integ: &IntegratorConfig) -> Result<TwoAtomReport, NumericalError> {
    let spec = TwoAtomDissipative {
        gamma0: cfg.gamma0,
        g: cfg.g,
        omega0: cfg.omega0,
    };
    let field = spec.field();
    let bloch = |b: [f64; 3]| BlochVector::from_array(b).map_err(|e| NumericalError::Setup(e.to_string()));
    let rho0 = kron(
        &density_from_bloch(&bloch(cfg.bloch_a)?),
        &density_from_bloch(&bloch(cfg.bloch_b)?),
    );
    let traj = integrate(&ModelSpec::TwoAtomDissipative(spec), &rho0, integ).context("two-atom integration")?;
    let view_a = reduced_thermo_view(&traj, Subsystem::A, &field).context("atom a")?;
    let view_b = reduced_thermo_view(&traj, Subsystem::B, &field).context("atom b")?;
    let atom_a = accumulate(&view_a, &EnvironmentSpec::Unspecified).context("atom a ledger")?;
    let atom_b = accumulate(&view_b, &EnvironmentSpec::Unspecified).context("atom b ledger")?;

    let ra = &atom_a.records;
    let rb = &atom_b.records;
    let temp = |t: Temperature| t.value().unwrap_or(f64::NAN);
    let i_t = argmax(ra.iter().map(|r| temp(r.temperature)));
    let i_e = argmax(ra.iter().map(|r| r.energy));

    let gaps: Vec<Option<f64>> = ra
        .iter()
        .zip(rb)
        .map(|(a, b)| match (a.temperature, b.temperature) {
            (Temperature::Finite(x), Temperature::Finite(y)) => Some((x - y).abs() / x.abs()),
            _ => None,
        })
        .collect();
    let within = |g: &Option<f64>| g.is_some_and(|g| g <= cfg.equal_tolerance);
    let first = gaps.iter().position(within);
    let max_gap_after_first = first.map_or(f64::INFINITY, |i| {
        gaps[i..].iter().map(|g| g.unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    });
    let equal_from = gaps.iter().rposition(|g| !within(g)).map_or(Some(0), |i| {
        (i + 1 < gaps.len()).then_some(i + 1)
    });

    let mut strict_crossing = None;
    let mut sign = 0.0;
    for (a, b) in ra.iter().zip(rb) {
        if let (Temperature::Finite(x), Temperature::Finite(y)) = (a.temperature, b.temperature) {
            let d = x - y;
            if d.abs() <= 1e-9 * x.abs() {
                continue;
            }
            if sign != 0.0 && d.signum() != sign {
                strict_crossing = Some(a.t);
                break;
            }
            sign = d.signum();
        }
    }

    let (min_step_sgen_int_sum, _) = step_range(ra.iter().zip(rb).map(|(a, b)| a.sgen_int_cum + b.sgen_int_cum));
    let (_, max_step_total_energy) = step_range(ra.iter().zip(rb).map(|(a, b)| a.energy + b.energy));
    Ok(TwoAtomReport {
        epsilon: field.energy(),
        gamma0: cfg.gamma0,
        equal_tolerance: cfg.equal_tolerance,
        peak_time_temperature: ra[i_t].t,
        peak_time_energy: ra[i_e].t,
        peak_temperature: temp(ra[i_t].temperature),
        equal_from: equal_from.map(|i| ra[i].t),
        first_within: first.map(|i| ra[i].t),
        max_gap_after_first,
        strict_crossing,
        min_sgen_int_a: ra.iter().map(|r| r.sgen_int_cum).fold(f64::INFINITY, f64::min),
        min_step_sgen_int_sum,
        max_step_total_energy,
        atom_a,
        atom_b,
    })
}

/// One single-qubit relaxation run toward a thermal environment.
pub struct RelaxationRun {
    pub label: String,
    pub epsilon: f64,
    pub gamma0: f64,
    /// Environment temperature in energy units.
    pub t_env: f64,
    pub initial: BlochVector,
    pub series: LedgerSeries,
}

impl RelaxationRun {
    fn temperatures(&self) -> impl Iterator<Item = f64> + '_ {
        self.series
            .records
            .iter()
            .map(|r| r.temperature.value().unwrap_or(f64::NAN))
    }

    pub fn final_relative_deviation(&self) -> f64 {
        let t = self.series.last().temperature.value().unwrap_or(f64::NAN);
        (t - self.t_env).abs() / self.t_env
    }

    pub fn max_relative_deviation(&self) -> f64 {
        self.temperatures()
            .map(|t| (t - self.t_env).abs() / self.t_env)
            .fold(0.0, |m, d| if d.is_nan() { f64::INFINITY } else { m.max(d) })
    }

    /// (min, max) consecutive change of the internal energy.
    pub fn energy_steps(&self) -> (f64, f64) {
        step_range(self.series.records.iter().map(|r| r.energy))
    }

    pub fn min_step_sgen_int(&self) -> f64 {
        step_range(self.series.records.iter().map(|r| r.sgen_int_cum)).0
    }

    pub fn min_step_sgen_ht(&self) -> f64 {
        step_range(self.series.records.iter().map(|r| r.sgen_ht_cum.unwrap_or(f64::NAN))).0
    }

    pub fn min_step_sgen_tot(&self) -> f64 {
        step_range(self.series.records.iter().map(|r| r.sgen_tot_cum.unwrap_or(f64::NAN))).0
    }

    /// max |increment route - relative-entropy route| for the total production.
    pub fn max_relative_route_gap(&self) -> f64 {
        self.series
            .records
            .iter()
            .map(|r| match (r.sgen_tot_cum, r.sgen_tot_relative) {
                (Some(a), Some(b)) => (a - b).abs(),
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max)
    }

    pub fn max_coherence_form_gap(&self) -> f64 {
        self.series
            .records
            .iter()
            .map(|r| (r.sgen_int_cum - r.sgen_int_coherence_cum).abs())
            .fold(0.0, f64::max)
    }

    /// `|S_ht| / S_tot` at the end of the run.
    pub fn boundary_fraction(&self) -> f64 {
        let last = self.series.last();
        last.sgen_ht_cum.unwrap_or(f64::NAN).abs() / last.sgen_tot_cum.unwrap_or(f64::NAN)
    }

    fn push_rows(&self, table: &mut Table) {
        let eps = self.epsilon;
        for r in &self.series.records {
            let [t, class] = temperature_cells(r.temperature, eps);
            let [x, y, z] = r.bloch.as_array();
            table.push(vec![
                self.label.clone().into(),
                (r.t * self.gamma0).into(),
                x.into(),
                y.into(),
                z.into(),
                t,
                class,
                (r.energy / eps).into(),
                r.coherence.into(),
                (r.heat_cum / eps).into(),
                r.sgen_int_cum.into(),
                r.sgen_int_coherence_cum.into(),
                Cell::opt(r.sgen_ht_cum),
                Cell::opt(r.sgen_tot_cum),
                Cell::opt(r.sgen_tot_relative),
            ]);
        }
    }

    fn summary_rows(&self) -> Vec<(&'static str, Cell)> {
        let last = self.series.last();
        let (e_lo, e_hi) = self.energy_steps();
        vec![
            ("initial_x", self.initial.x().into()),
            ("initial_z", self.initial.z().into()),
            ("final_T", Cell::opt(last.temperature.value().map(|t| t / self.epsilon))),
            ("final_relative_deviation", self.final_relative_deviation().into()),
            ("max_relative_deviation", self.max_relative_deviation().into()),
            ("min_step_E", (e_lo / self.epsilon).into()),
            ("max_step_E", (e_hi / self.epsilon).into()),
            ("final_sgen_int", last.sgen_int_cum.into()),
            ("final_sgen_ht", Cell::opt(last.sgen_ht_cum)),
            ("final_sgen_tot", Cell::opt(last.sgen_tot_cum)),
            ("final_sgen_tot_relative", Cell::opt(last.sgen_tot_relative)),
            ("min_step_sgen_int", self.min_step_sgen_int().into()),
            ("min_step_sgen_ht", self.min_step_sgen_ht().into()),
            ("min_step_sgen_tot", self.min_step_sgen_tot().into()),
            ("max_decomposition_gap", Cell::opt(self.series.max_decomposition_gap())),
            ("max_relative_route_gap", self.max_relative_route_gap().into()),
            ("max_coherence_form_gap", self.max_coherence_form_gap().into()),
            ("max_first_law_residual", self.series.max_first_law_residual.into()),
            ("boundary_fraction", self.boundary_fraction().into()),
        ]
    }
}

const RUN_COLUMNS: [&str; 15] = [
    "run",
    "t_gamma0",
    "x",
    "y",
    "z",
    "T",
    "temperature_class",
    "E",
    "coherence",
    "heat",
    "sgen_int",
    "sgen_int_coherence",
    "sgen_ht",
    "sgen_tot",
    "sgen_tot_relative",
];

fn runs_table(name: &str, runs: &[RelaxationRun]) -> Table {
    let mut table = Table::new(name, &RUN_COLUMNS);
    for run in runs {
        run.push_rows(&mut table);
    }
    table
}

fn runs_summary(name: &str, runs: &[RelaxationRun], extra: impl Fn(&RelaxationRun) -> Vec<(&'static str, Cell)>) -> Table {
    let mut table = Table::new(name, &["run", "quantity", "value"]);
    for run in runs {
        for (k, v) in run.summary_rows().into_iter().chain(extra(run)) {
            table.push(vec![run.label.clone().into(), k.into(), v]);
        }
    }
    table
}

/// Relaxes a qubit starting at reduced temperature `t0` (in units of `ε`) at angle `theta` from the field.
pub fn relaxation_run(
    label: String,
    gamma0: f64,
    omega0: f64,
    t_env_reduced: f64,
    t0_reduced: f64,
    theta: f64,
    integ: &IntegratorConfig,
) -> Result<RelaxationRun, NumericalError> {
    let field = qubit_field(omega0);
    let eps = field.energy();
    let spec = SingleQubitThermal {
        gamma0,
        omega0,
        t_env: t_env_reduced * eps,
    };
    let initial = state_on_isotherm(t0_reduced * eps, theta, &field).map_err(|e| NumericalError::Setup(e.to_string()))?;
    let traj = integrate(&ModelSpec::SingleQubitThermal(spec), &density_from_bloch(&initial), integ).context(&label)?;
    let env = EnvironmentSpec::Thermal {
        temperature: spec.t_env,
    };
    let series = accumulate(&traj, &env).context(&label)?;
    Ok(RelaxationRun {
        label,
        epsilon: eps,
        gamma0,
        t_env: spec.t_env,
        initial,
        series,
    })
}

pub struct JcReport {
    pub runs: Vec<RelaxationRun>,
}

impl JcReport {
    pub fn tables(&self) -> Vec<Table> {
        vec![
            runs_table("jc-markov", &self.runs),
            runs_summary("jc-markov_summary", &self.runs, |_| Vec::new()),
        ]
    }
}

pub fn jc_markov(cfg: &JcMarkovConfig, integ: &IntegratorConfig) -> Result<JcReport, NumericalError> {
    let theta = cfg.theta_deg.to_radians();
    let runs = cfg
        .initial_temperatures
        .iter()
        .map(|&t0| relaxation_run(format!("T0={t0}"), cfg.gamma0, cfg.omega0, cfg.t_env, t0, theta, integ))
        .collect::<Result<_, _>>()?;
    Ok(JcReport { runs })
}

pub struct IsothermalPair {
    pub theta_deg: f64,
    pub on_isotherm: RelaxationRun,
    pub reference: RelaxationRun,
}

impl IsothermalPair {
    /// Reference deviation over on-isotherm deviation.
    pub fn deviation_ratio(&self) -> f64 {
        self.reference.max_relative_deviation() / self.on_isotherm.max_relative_deviation()
    }
}

pub struct IsothermalReport {
    pub t_env_reduced: f64,
    pub pairs: Vec<IsothermalPair>,
}

impl IsothermalReport {
    pub fn tables(&self) -> Vec<Table> {
        let runs: Vec<&RelaxationRun> = self.pairs.iter().flat_map(|p| [&p.on_isotherm, &p.reference]).collect();
        let mut table = Table::new("isothermal", &RUN_COLUMNS);
        let mut summary = Table::new("isothermal_summary", &["run", "quantity", "value"]);
        for run in &runs {
            run.push_rows(&mut table);
            for (k, v) in run.summary_rows() {
                summary.push(vec![run.label.clone().into(), k.into(), v]);
            }
        }
        for p in &self.pairs {
            let label = p.on_isotherm.label.clone();
            summary.push(vec![label.clone().into(), "deviation_ratio".into(), p.deviation_ratio().into()]);
            summary.push(vec![label.into(), "initial_state".into(), "chosen on the isotherm".into()]);
        }
        vec![table, summary]
    }
}

pub fn isothermal(cfg: &IsothermalConfig, integ: &IntegratorConfig) -> Result<IsothermalReport, NumericalError> {
    let pairs = cfg
        .theta_deg
        .iter()
        .map(|&deg| {
            let theta = deg.to_radians();
            let run = |label: String, t0| relaxation_run(label, cfg.gamma0, cfg.omega0, cfg.t_env, t0, theta, integ);
            Ok(IsothermalPair {
                theta_deg: deg,
                on_isotherm: run(format!("theta={deg}"), cfg.t_env)?,
                reference: run(format!("theta={deg},T0={}", cfg.reference_temperature), cfg.reference_temperature)?,
            })
        })
        .collect::<Result<_, NumericalError>>()?;
    Ok(IsothermalReport {
        t_env_reduced: cfg.t_env,
        pairs,
    })
}

pub struct ClosedPairReport {
    pub field_a: FieldVector,
    pub field_b: FieldVector,
    pub initial: ComplexMatrix,
    pub balance: PairBalance,
    /// max over samples of the largest eigenvalue shift of the global state.
    pub spectrum_drift: f64,
    /// (sample interval, final residual) for successive halvings.
    pub refinement: Vec<(f64, f64)>,
}

impl ClosedPairReport {
    pub fn residual(&self) -> f64 {
        self.balance.residual()
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut table = Table::new(
            "closed-pair",
            &[
                "t", "S_A", "S_B", "S_AB", "I", "T_a", "T_b", "E_a", "E_b", "sgen_int_a", "sgen_int_b", "sgen_ht",
                "sgen_total", "delta_I", "residual",
            ],
        );
        let i0 = self.balance.records[0].mutual_information;
        for r in &self.balance.records {
            let di = r.mutual_information - i0;
            table.push(vec![
                r.t.into(),
                r.entropy_a.into(),
                r.entropy_b.into(),
                r.entropy_ab.into(),
                r.mutual_information.into(),
                Cell::opt(r.temperature_a.value()),
                Cell::opt(r.temperature_b.value()),
                r.energy_a.into(),
                r.energy_b.into(),
                r.sgen_int_a.into(),
                r.sgen_int_b.into(),
                r.sgen_ht.into(),
                r.total().into(),
                di.into(),
                (r.total() - di).into(),
            ]);
        }
        let mut refinement = Table::new("closed-pair_refinement", &["sample_interval", "residual", "ratio"]);
        for (i, &(dt, res)) in self.refinement.iter().enumerate() {
            let ratio = if i == 0 { Cell::Empty } else { (self.refinement[i - 1].1 / res).into() };
            refinement.push(vec![dt.into(), res.into(), ratio]);
        }
        let summary = summary_table(
            "closed-pair_summary",
            vec![
                ("residual", self.residual().into()),
                ("delta_I", self.balance.delta_mutual_information.into()),
                ("max_entropy_drift", self.balance.max_entropy_drift.into()),
                ("spectrum_drift", self.spectrum_drift.into()),
            ],
        );
        vec![table, refinement, summary]
    }
}

/// A product of two mixed states with uniformly random directions and moduli in [0.2, 0.9].
pub fn random_product_state(seed: u64) -> (BlochVector, BlochVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let cos: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r: f64 = rng.gen_range(0.2..=0.9);
        let sin = (1.0 - cos * cos).sqrt();
        BlochVector::new(r * sin * phi.cos(), r * sin * phi.sin(), r * cos).expect("inside the ball")
    };
    (draw(), draw())
}

fn closed_pair_initial(cfg: &ClosedPairConfig) -> Result<ComplexMatrix, NumericalError> {
    let setup = |e: String| NumericalError::Setup(e);
    if let Some(entries) = &cfg.density {
        let values: Vec<Complex64> = entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        return ComplexMatrix::from_row_major(4, &values).map_err(|e| setup(e.to_string()));
    }
    let (a, b) = match (cfg.bloch_a, cfg.bloch_b) {
        (Some(a), Some(b)) => (
            BlochVector::from_array(a).map_err(|e| setup(e.to_string()))?,
            BlochVector::from_array(b).map_err(|e| setup(e.to_string()))?,
        ),
        _ => random_product_state(cfg.seed),
    };
    Ok(kron(&density_from_bloch(&a), &density_from_bloch(&b)))
}

pub fn closed_pair(cfg: &ClosedPairConfig, integ: &IntegratorConfig) -> Result<ClosedPairReport, NumericalError> {
    let spec = ClosedPairExchange {
        coupling: cfg.coupling,
        eps_a: cfg.eps_a,
        eps_b: cfg.eps_b,
    };
    let model = ModelSpec::ClosedPairExchange(spec);
    let rho0 = closed_pair_initial(cfg)?;
    let (field_a, field_b) = (spec.field_a(), spec.field_b());

    let run = |integ: &IntegratorConfig| -> Result<_, NumericalError> {
        let traj = integrate(&model, &rho0, integ).context("closed-pair integration")?;
        let balance = pair_entropy_balance(&traj, &field_a, &field_b).context("closed-pair balance")?;
        Ok((traj, balance))
    };
    let (traj, balance) = run(integ)?;

    let spectrum = |m: &ComplexMatrix| hermitian_eigenvalues(m).map_err(|e| NumericalError::Setup(e.to_string()));
    let spec0 = spectrum(&rho0)?;
    let mut spectrum_drift = 0.0f64;
    for p in traj.points() {
        for (a, b) in spectrum(&p.rho)?.iter().zip(&spec0) {
            spectrum_drift = spectrum_drift.max((a - b).abs());
        }
    }

    let mut refinement = vec![(integ.sample_interval, balance.residual())];
    for k in 1..=cfg.refinements {
        let finer = IntegratorConfig {
            sample_interval: integ.sample_interval / f64::from(1u32 << k),
            ..*integ
        };
        refinement.push((finer.sample_interval, run(&finer)?.1.residual()));
    }

    Ok(ClosedPairReport {
        field_a,
        field_b,
        initial: rho0,
        balance,
        spectrum_drift,
        refinement,
    })
}
