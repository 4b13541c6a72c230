//! Scenario configuration files.
//!
//! A config is a TOML document with a `scenario` key, optional `out_dir` and
//! `svg` keys, an optional `[integrator]` table and at most one table named
//! after the scenario. Omitted values take the defaults below. Temperatures
//! are given as `k_B T / ε` with `ε = ω₀/2`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::dynamics::IntegratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Surfaces,
    Cmax,
    TwoAtoms,
    JcMarkov,
    Isothermal,
    ClosedPair,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Surfaces,
        Scenario::Cmax,
        Scenario::TwoAtoms,
        Scenario::JcMarkov,
        Scenario::Isothermal,
        Scenario::ClosedPair,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Surfaces => "surfaces",
            Scenario::Cmax => "cmax",
            Scenario::TwoAtoms => "two-atoms",
            Scenario::JcMarkov => "jc-markov",
            Scenario::Isothermal => "isothermal",
            Scenario::ClosedPair => "closed-pair",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Scenario::Surfaces => "temperature and heat capacity over the (B, B_par) half-disk",
            Scenario::Cmax => "global maximum of the heat capacity at fixed field",
            Scenario::TwoAtoms => "two atoms in a common vacuum: temperatures, energies, internal entropy",
            Scenario::JcMarkov => "single atom relaxing in a thermal field from hot and cold starts",
            Scenario::Isothermal => "relaxation from states on the environment isotherm",
            Scenario::ClosedPair => "closed two-qubit exchange: entropy balance against mutual information",
        }
    }

    fn uses_integrator(&self) -> bool {
        !matches!(self, Scenario::Surfaces | Scenario::Cmax)
    }

    fn default_integrator(&self) -> IntegratorConfig {
        let (t_end, sample_interval) = match self {
            Scenario::TwoAtoms => (30.0, 1e-2),
            Scenario::ClosedPair => (10.0, 1e-2),
            _ => (20.0, 1e-3),
        };
        IntegratorConfig {
            t_end,
            sample_interval,
            ..IntegratorConfig::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_interval: Option<f64>,
}

impl IntegratorSection {
    fn resolve(&self, defaults: IntegratorConfig) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol.unwrap_or(defaults.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(defaults.abs_tol),
            max_step: self.max_step.unwrap_or(defaults.max_step),
            t_end: self.t_end.unwrap_or(defaults.t_end),
            sample_interval: self.sample_interval.unwrap_or(defaults.sample_interval),
        }
    }

    fn from_config(cfg: &IntegratorConfig) -> Self {
        Self {
            rel_tol: Some(cfg.rel_tol),
            abs_tol: Some(cfg.abs_tol),
            max_step: Some(cfg.max_step),
            t_end: Some(cfg.t_end),
            sample_interval: Some(cfg.sample_interval),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfacesConfig {
    /// Grid spacing in `B` and `B∥`; `1/step` must be an integer.
    pub step: f64,
}

impl Default for SurfacesConfig {
    fn default() -> Self {
        Self { step: 0.005 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmaxConfig {
    pub grid_step: f64,
    pub tolerance: f64,
}

impl Default for CmaxConfig {
    fn default() -> Self {
        Self {
            grid_step: 1e-3,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoAtomsConfig {
    pub gamma0: f64,
    pub g: f64,
    pub omega0: f64,
    pub bloch_a: [f64; 3],
    pub bloch_b: [f64; 3],
    /// Relative temperature gap that counts as "equal".
    pub equal_tolerance: f64,
}

impl Default for TwoAtomsConfig {
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            g: 0.5,
            omega0: 2.0,
            bloch_a: [0.0, 0.0, 1.0],
            bloch_b: [0.2, 0.2, 0.8],
            equal_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JcMarkovConfig {
    pub gamma0: f64,
    pub omega0: f64,
    pub t_env: f64,
    pub initial_temperatures: Vec<f64>,
    /// Angle between the initial Bloch vector and the field, in degrees.
    pub theta_deg: f64,
}

impl Default for JcMarkovConfig {
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            omega0: 2.0,
            t_env: 10.0,
            initial_temperatures: vec![5.0, 15.0],
            theta_deg: 45.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsothermalConfig {
    pub gamma0: f64,
    pub omega0: f64,
    /// Environment temperature; runs start on this isotherm.
    pub t_env: f64,
    pub theta_deg: Vec<f64>,
    /// Starting temperature of the off-isotherm comparison run.
    pub reference_temperature: f64,
}

impl Default for IsothermalConfig {
    fn default() -> Self {
        Self {
            gamma0: 1.0,
            omega0: 2.0,
            t_env: 1.0,
            theta_deg: vec![30.0, 45.0],
            reference_temperature: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosedPairConfig {
    pub coupling: f64,
    pub eps_a: f64,
    pub eps_b: f64,
    /// Seed for the random product state used when no state is given.
    pub seed: u64,
    pub bloch_a: Option<[f64; 3]>,
    pub bloch_b: Option<[f64; 3]>,
    /// Row-major 4×4 density matrix as `[re, im]` pairs.
    pub density: Option<Vec<[f64; 2]>>,
    /// Number of successive halvings of the sample interval in the refinement table.
    pub refinements: usize,
}

impl Default for ClosedPairConfig {
    fn default() -> Self {
        Self {
            coupling: 0.5,
            eps_a: 1.0,
            eps_b: 1.0,
            seed: 2024,
            bloch_a: None,
            bloch_b: None,
            density: None,
            refinements: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioParams {
    Surfaces(SurfacesConfig),
    Cmax(CmaxConfig),
    TwoAtoms(TwoAtomsConfig),
    JcMarkov(JcMarkovConfig),
    Isothermal(IsothermalConfig),
    ClosedPair(ClosedPairConfig),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<Scenario>,
    out_dir: Option<PathBuf>,
    svg: Option<bool>,
    integrator: Option<IntegratorSection>,
    surfaces: Option<SurfacesConfig>,
    cmax: Option<CmaxConfig>,
    #[serde(rename = "two-atoms")]
    two_atoms: Option<TwoAtomsConfig>,
    #[serde(rename = "jc-markov")]
    jc_markov: Option<JcMarkovConfig>,
    isothermal: Option<IsothermalConfig>,
    #[serde(rename = "closed-pair")]
    closed_pair: Option<ClosedPairConfig>,
}

/// A fully defaulted configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub integrator: Option<IntegratorConfig>,
    pub params: ScenarioParams,
}

#[derive(Serialize)]
struct ResolvedView<'a> {
    scenario: Scenario,
    out_dir: &'a std::path::Path,
    svg: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    integrator: Option<IntegratorSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    surfaces: Option<&'a SurfacesConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cmax: Option<&'a CmaxConfig>,
    #[serde(rename = "two-atoms", skip_serializing_if = "Option::is_none")]
    two_atoms: Option<&'a TwoAtomsConfig>,
    #[serde(rename = "jc-markov", skip_serializing_if = "Option::is_none")]
    jc_markov: Option<&'a JcMarkovConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    isothermal: Option<&'a IsothermalConfig>,
    #[serde(rename = "closed-pair", skip_serializing_if = "Option::is_none")]
    closed_pair: Option<&'a ClosedPairConfig>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad(key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("`{key}`: {reason}"))
}

fn positive(key: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(bad(key, format!("must be finite and positive, got {x}")))
    }
}

impl RunConfig {
    /// Defaults for a scenario, as if the config named only the scenario.
    pub fn defaults(scenario: Scenario) -> Self {
        let params = match scenario {
            Scenario::Surfaces => ScenarioParams::Surfaces(Default::default()),
            Scenario::Cmax => ScenarioParams::Cmax(Default::default()),
            Scenario::TwoAtoms => ScenarioParams::TwoAtoms(Default::default()),
            Scenario::JcMarkov => ScenarioParams::JcMarkov(Default::default()),
            Scenario::Isothermal => ScenarioParams::Isothermal(Default::default()),
            Scenario::ClosedPair => ScenarioParams::ClosedPair(Default::default()),
        };
        Self {
            scenario,
            out_dir: PathBuf::from("out"),
            svg: false,
            integrator: scenario.uses_integrator().then(|| scenario.default_integrator()),
            params,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        let scenario = raw.scenario.ok_or_else(|| bad("scenario", "missing"))?;
        let mut cfg = Self::defaults(scenario);
        if let Some(dir) = raw.out_dir {
            cfg.out_dir = dir;
        }
        cfg.svg = raw.svg.unwrap_or(false);

        match (&raw.integrator, cfg.integrator) {
            (Some(_), None) => return Err(bad("integrator", format!("not used by scenario {}", scenario.name()))),
            (Some(section), Some(defaults)) => cfg.integrator = Some(section.resolve(defaults)),
            _ => {}
        }

        let sections: [(&str, bool); 6] = [
            ("surfaces", raw.surfaces.is_some()),
            ("cmax", raw.cmax.is_some()),
            ("two-atoms", raw.two_atoms.is_some()),
            ("jc-markov", raw.jc_markov.is_some()),
            ("isothermal", raw.isothermal.is_some()),
            ("closed-pair", raw.closed_pair.is_some()),
        ];
        for (name, present) in sections {
            if present && name != scenario.name() {
                return Err(bad(name, format!("section does not apply to scenario {}", scenario.name())));
            }
        }
        cfg.params = match scenario {
            Scenario::Surfaces => ScenarioParams::Surfaces(raw.surfaces.unwrap_or_default()),
            Scenario::Cmax => ScenarioParams::Cmax(raw.cmax.unwrap_or_default()),
            Scenario::TwoAtoms => ScenarioParams::TwoAtoms(raw.two_atoms.unwrap_or_default()),
            Scenario::JcMarkov => ScenarioParams::JcMarkov(raw.jc_markov.unwrap_or_default()),
            Scenario::Isothermal => ScenarioParams::Isothermal(raw.isothermal.unwrap_or_default()),
            Scenario::ClosedPair => ScenarioParams::ClosedPair(raw.closed_pair.unwrap_or_default()),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(integ) = &self.integrator {
            integ.validate().map_err(|e| ConfigError(format!("integrator: {e}")))?;
        }
        match &self.params {
            ScenarioParams::Surfaces(s) => {
                positive("surfaces.step", s.step)?;
                let n = 1.0 / s.step;
                if (n - n.round()).abs() > 1e-9 || n.round() > 1e5 {
                    return Err(bad("surfaces.step", "1/step must be an integer no larger than 1e5"));
                }
            }
            ScenarioParams::Cmax(c) => {
                positive("cmax.grid_step", c.grid_step)?;
                positive("cmax.tolerance", c.tolerance)?;
                if c.grid_step > 0.1 {
                    return Err(bad("cmax.grid_step", "must not exceed 0.1"));
                }
            }
            ScenarioParams::TwoAtoms(c) => {
                positive("two-atoms.gamma0", c.gamma0)?;
                positive("two-atoms.omega0", c.omega0)?;
                positive("two-atoms.equal_tolerance", c.equal_tolerance)?;
                if !(c.g > 0.0 && c.g <= 1.0) {
                    return Err(bad("two-atoms.g", format!("must lie in (0, 1], got {}", c.g)));
                }
                check_bloch("two-atoms.bloch_a", c.bloch_a)?;
                check_bloch("two-atoms.bloch_b", c.bloch_b)?;
            }
            ScenarioParams::JcMarkov(c) => {
                positive("jc-markov.gamma0", c.gamma0)?;
                positive("jc-markov.omega0", c.omega0)?;
                positive("jc-markov.t_env", c.t_env)?;
                if c.initial_temperatures.is_empty() {
                    return Err(bad("jc-markov.initial_temperatures", "must not be empty"));
                }
                for &t in &c.initial_temperatures {
                    positive("jc-markov.initial_temperatures", t)?;
                }
                check_angle("jc-markov.theta_deg", c.theta_deg)?;
            }
            ScenarioParams::Isothermal(c) => {
                positive("isothermal.gamma0", c.gamma0)?;
                positive("isothermal.omega0", c.omega0)?;
                positive("isothermal.t_env", c.t_env)?;
                positive("isothermal.reference_temperature", c.reference_temperature)?;
                if c.theta_deg.is_empty() {
                    return Err(bad("isothermal.theta_deg", "must not be empty"));
                }
                for &a in &c.theta_deg {
                    check_angle("isothermal.theta_deg", a)?;
                }
            }
            ScenarioParams::ClosedPair(c) => {
                positive("closed-pair.eps_a", c.eps_a)?;
                positive("closed-pair.eps_b", c.eps_b)?;
                if !c.coupling.is_finite() {
                    return Err(bad("closed-pair.coupling", "must be finite"));
                }
                if c.refinements > 6 {
                    return Err(bad("closed-pair.refinements", "at most 6"));
                }
                match (&c.density, c.bloch_a, c.bloch_b) {
                    (Some(d), None, None) => {
                        if d.len() != 16 {
                            return Err(bad("closed-pair.density", format!("needs 16 entries, got {}", d.len())));
                        }
                    }
                    (Some(_), _, _) => {
                        return Err(bad("closed-pair.density", "cannot be combined with bloch_a/bloch_b"));
                    }
                    (None, Some(a), Some(b)) => {
                        check_bloch("closed-pair.bloch_a", a)?;
                        check_bloch("closed-pair.bloch_b", b)?;
                    }
                    (None, None, None) => {}
                    (None, _, _) => return Err(bad("closed-pair.bloch_a", "bloch_a and bloch_b must be given together")),
                }
            }
        }
        Ok(())
    }

    fn resolved_view(&self) -> ResolvedView<'_> {
        let mut view = ResolvedView {
            scenario: self.scenario,
            out_dir: &self.out_dir,
            svg: self.svg,
            integrator: self.integrator.as_ref().map(IntegratorSection::from_config),
            surfaces: None,
            cmax: None,
            two_atoms: None,
            jc_markov: None,
            isothermal: None,
            closed_pair: None,
        };
        match &self.params {
            ScenarioParams::Surfaces(c) => view.surfaces = Some(c),
            ScenarioParams::Cmax(c) => view.cmax = Some(c),
            ScenarioParams::TwoAtoms(c) => view.two_atoms = Some(c),
            ScenarioParams::JcMarkov(c) => view.jc_markov = Some(c),
            ScenarioParams::Isothermal(c) => view.isothermal = Some(c),
            ScenarioParams::ClosedPair(c) => view.closed_pair = Some(c),
        }
        view
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.resolved_view()).expect("config serializes")
    }

    /// Single-line JSON form, written at the top of every CSV.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.resolved_view()).expect("config serializes")
    }
}

fn check_bloch(key: &str, b: [f64; 3]) -> Result<(), ConfigError> {
    if b.iter().any(|x| !x.is_finite()) {
        return Err(bad(key, "non-finite component"));
    }
    let m = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    if m > 1.0 + crate::bloch::MODULUS_CLAMP {
        return Err(bad(key, format!("modulus {m} exceeds 1")));
    }
    Ok(())
}

fn check_angle(key: &str, deg: f64) -> Result<(), ConfigError> {
    if deg.is_finite() && (0.0..90.0).contains(&deg) {
        Ok(())
    } else {
        Err(bad(key, format!("must lie in [0, 90) degrees, got {deg}")))
    }
}
