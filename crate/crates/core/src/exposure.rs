//! Environmental and material influence factors for chloride diffusivity.
//!
//! Every factor is a pure function of its inputs. [`ExposureScenario`] bundles
//! them, and [`ExposureScenario::resolve`] collapses the time-independent ones
//! into a single multiplier so the diffusivity at `(age, depth)` is cheap to
//! evaluate inside the solver.
//!
//! Canonical units: millimetres, years, mass-% of concrete. The initial
//! diffusivity is computed in m²/s and converted to mm²/year exactly once.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Length of a year used for all unit conversions.
pub const SECONDS_PER_YEAR: f64 = 3.1536e7;
pub const DAYS_PER_YEAR: f64 = 365.0;
pub const M2_TO_MM2: f64 = 1.0e6;

/// Slope of the freeze-thaw multiplier per laboratory-equivalent cycle.
pub const FREEZE_THAW_SLOPE: f64 = 0.0196876;
/// Hong's linear fit of diffusivity against laboratory cycles: slope and intercept.
pub const FREEZE_THAW_FIT_SLOPE: f64 = 0.1064;
pub const FREEZE_THAW_FIT_INTERCEPT: f64 = 5.4044;

/// Converts a diffusivity from m²/s to mm²/year.
pub fn m2_per_s_to_mm2_per_year(d: f64) -> f64 {
    d * M2_TO_MM2 * SECONDS_PER_YEAR
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixDesign {
    pub water_cement_ratio: f64,
}

impl MixDesign {
    pub fn new(water_cement_ratio: f64) -> Result<Self> {
        let mix = Self { water_cement_ratio };
        mix.validate()?;
        Ok(mix)
    }

    pub fn validate(&self) -> Result<()> {
        let wc = self.water_cement_ratio;
        if !(wc > 0.0 && wc <= 1.0) {
            return Err(Error::invalid(
                "water_cement_ratio",
                format!("must lie in (0, 1], got {wc}"),
            ));
        }
        Ok(())
    }
}

/// Mean ambient temperature and the reference temperature, both in kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalEnvironment {
    pub temperature: f64,
    pub reference_temperature: f64,
}

impl Default for ThermalEnvironment {
    fn default() -> Self {
        Self {
            temperature: 278.3,
            reference_temperature: 293.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreezeThawEnvironment {
    /// Days per year with sub-zero mean temperature.
    pub annual_negative_temperature_days: f64,
    pub lambda_correction: f64,
    pub water_content_coefficient: f64,
    /// Severity ratio between laboratory and field cycles.
    pub damage_ratio: f64,
}

impl Default for FreezeThawEnvironment {
    fn default() -> Self {
        Self {
            annual_negative_temperature_days: 133.4,
            lambda_correction: 0.7,
            water_content_coefficient: 1.0,
            damage_ratio: 11.5,
        }
    }
}

impl FreezeThawEnvironment {
    pub fn validate(&self) -> Result<()> {
        if self.annual_negative_temperature_days < 0.0 {
            return Err(Error::invalid("annual_negative_temperature_days", "must be >= 0"));
        }
        if self.lambda_correction < 0.0 {
            return Err(Error::invalid("lambda_correction", "must be >= 0"));
        }
        if self.water_content_coefficient < 0.0 {
            return Err(Error::invalid("water_content_coefficient", "must be >= 0"));
        }
        if !(self.damage_ratio > 0.0) {
            return Err(Error::invalid("damage_ratio", "must be > 0"));
        }
        Ok(())
    }
}

/// Carbonation front growth and its effect on chloride diffusivity.
///
/// `depth_coefficient` drives the square-root-of-time carbonation depth;
/// `influence_polynomial` is the cubic multiplier on diffusivity as a function
/// of depth below the surface, stored highest power first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarbonationModel {
    /// mm/√year
    pub depth_coefficient: f64,
    pub influence_polynomial: [f64; 4],
    /// Depths beyond this are evaluated at this depth (mm); the cubic turns
    /// upward outside the range it was fitted on.
    pub max_fit_depth: f64,
}

pub const DEFAULT_CARBONATION_POLYNOMIAL: [f64; 4] = [2.999e-6, -1.14e-4, -8.723e-3, 0.9903];

impl Default for CarbonationModel {
    fn default() -> Self {
        Self {
            depth_coefficient: 3.656,
            influence_polynomial: DEFAULT_CARBONATION_POLYNOMIAL,
            max_fit_depth: 60.0,
        }
    }
}

impl CarbonationModel {
    /// A model whose influence factor is the constant `value` at every depth.
    pub fn uniform(value: f64) -> Self {
        Self {
            influence_polynomial: [0.0, 0.0, 0.0, value],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth_coefficient < 0.0 {
            return Err(Error::invalid("carbonation_depth_coefficient", "must be >= 0"));
        }
        if !(self.max_fit_depth >= 0.0) {
            return Err(Error::invalid("carbonation_max_fit_depth", "must be >= 0"));
        }
        if self.influence_polynomial.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("carbonation_polynomial", "coefficients must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BindingModel {
    /// Ratio of bound to free chloride.
    pub binding_capacity: f64,
}

impl Default for BindingModel {
    fn default() -> Self {
        Self {
            binding_capacity: 2.14,
        }
    }
}

/// Range of binding capacities reported for ordinary concrete. Values outside
/// it are accepted but flagged in diagnostics.
pub const TYPICAL_BINDING_RANGE: (f64, f64) = (2.0, 4.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgingModel {
    /// Reference age in days.
    pub reference_age: f64,
    pub decay_index: f64,
}

impl Default for AgingModel {
    fn default() -> Self {
        Self {
            reference_age: 28.0,
            decay_index: 0.264,
        }
    }
}

impl AgingModel {
    pub fn reference_age_years(&self) -> f64 {
        self.reference_age / DAYS_PER_YEAR
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reference_age > 0.0) {
            return Err(Error::invalid("reference_age_days", "must be > 0"));
        }
        if !(0.0..1.0).contains(&self.decay_index) {
            return Err(Error::invalid("aging_decay_index", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Exponential build-up of surface chloride, in mass-% of concrete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceChlorideModel {
    pub initial_surface_concentration: f64,
    pub ultimate_increment: f64,
    /// 1/year
    pub rate_constant: f64,
}

impl Default for SurfaceChlorideModel {
    fn default() -> Self {
        Self {
            initial_surface_concentration: 0.0,
            ultimate_increment: 0.37,
            rate_constant: 0.18738,
        }
    }
}

impl SurfaceChlorideModel {
    pub fn constant(value: f64) -> Self {
        Self {
            initial_surface_concentration: value,
            ultimate_increment: 0.0,
            rate_constant: 0.0,
        }
    }

    /// Surface jumps from zero to `value` as soon as exposure starts, with an
    /// initially chloride-free interior.
    pub fn instantaneous(value: f64) -> Self {
        Self {
            initial_surface_concentration: 0.0,
            ultimate_increment: value,
            rate_constant: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_surface_concentration < 0.0 {
            return Err(Error::invalid("surface_initial", "must be >= 0"));
        }
        if self.ultimate_increment < 0.0 {
            return Err(Error::invalid("surface_ultimate_increment", "must be >= 0"));
        }
        if !(self.rate_constant >= 0.0) {
            return Err(Error::invalid("surface_rate_constant", "must be >= 0"));
        }
        Ok(())
    }
}

/// Precomputed factor values that replace the derived ones when present.
///
/// `d0` is in mm²/year.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FactorOverrides {
    pub q: Option<f64>,
    pub k_t: Option<f64>,
    pub k_k: Option<f64>,
    pub k_f: Option<f64>,
    pub n_in: Option<f64>,
    pub d0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureScenario {
    pub mix: MixDesign,
    pub thermal: ThermalEnvironment,
    pub freeze_thaw: FreezeThawEnvironment,
    pub carbonation: CarbonationModel,
    pub binding: BindingModel,
    pub aging: AgingModel,
    pub surface: SurfaceChlorideModel,
    pub overrides: FactorOverrides,
}

impl Default for ExposureScenario {
    /// Field defaults: w/c 0.49 with the tabulated factor values pinned as
    /// overrides so runs reproduce the field-survey inputs.
    fn default() -> Self {
        Self {
            mix: MixDesign {
                water_cement_ratio: 0.49,
            },
            thermal: ThermalEnvironment::default(),
            freeze_thaw: FreezeThawEnvironment::default(),
            carbonation: CarbonationModel::default(),
            binding: BindingModel::default(),
            aging: AgingModel::default(),
            surface: SurfaceChlorideModel::default(),
            overrides: FactorOverrides {
                q: Some(5175.25),
                k_t: Some(0.3808),
                k_k: Some(4.223),
                k_f: None,
                n_in: Some(8.1),
                d0: None,
            },
        }
    }
}

impl ExposureScenario {
    /// The girder scenario at the w/c implied by its tabulated k_k.
    pub fn girder() -> Self {
        Self {
            mix: MixDesign {
                water_cement_ratio: 0.4887,
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.mix.validate()?;
        if !(self.thermal.temperature > 0.0) {
            return Err(Error::invalid("temperature_k", "must be > 0 K"));
        }
        if !(self.thermal.reference_temperature > 0.0) {
            return Err(Error::invalid("reference_temperature_k", "must be > 0 K"));
        }
        self.freeze_thaw.validate()?;
        self.carbonation.validate()?;
        if self.binding.binding_capacity < 0.0 {
            return Err(Error::invalid("binding_capacity", "must be >= 0"));
        }
        self.aging.validate()?;
        self.surface.validate()?;
        let o = &self.overrides;
        for (name, v) in [
            ("override_k_t", o.k_t),
            ("override_k_k", o.k_k),
            ("override_k_f", o.k_f),
            ("override_n_in", o.n_in),
            ("override_d0", o.d0),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
                }
            }
        }
        if let Some(q) = o.q {
            if !q.is_finite() {
                return Err(Error::invalid("override_q", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<ResolvedExposure> {
        self.validate()?;
        let o = &self.overrides;
        let derived_q = activation_constant(&self.mix);
        let q = o.q.unwrap_or(derived_q);
        let derived_k_t = temperature_factor(&self.thermal, q)?;
        let k_t = o.k_t.unwrap_or(derived_k_t);
        let n_act = natural_freeze_thaw_cycles(&self.freeze_thaw);
        let derived_n_in = lab_equivalent_cycles(&self.freeze_thaw, n_act)?;
        let n_in = o.n_in.unwrap_or(derived_n_in);
        let derived_k_f = freeze_thaw_factor(n_in);
        let k_f = o.k_f.unwrap_or(derived_k_f);
        let derived_k_k = construction_factor(&self.mix);
        let k_k = o.k_k.unwrap_or(derived_k_k);
        let derived_d0 = m2_per_s_to_mm2_per_year(initial_diffusivity(&self.mix));
        let d0 = o.d0.unwrap_or(derived_d0);
        let binding_factor = 1.0 / (1.0 + self.binding.binding_capacity);

        let factors = vec![
            FactorReport::new("q", derived_q, o.q),
            FactorReport::new("k_T", derived_k_t, o.k_t),
            FactorReport::new("n_act", n_act, None),
            FactorReport::new("n_in", derived_n_in, o.n_in),
            FactorReport::new("k_F", derived_k_f, o.k_f),
            FactorReport::new("k_k", derived_k_k, o.k_k),
            FactorReport::new("D0_mm2_per_year", derived_d0, o.d0),
            FactorReport::new("binding_factor", binding_factor, None),
        ];
        let mut warnings = Vec::new();
        if derived_q < 0.0 {
            warnings.push(format!("derived activation constant q = {derived_q} is negative"));
        }
        let r = self.binding.binding_capacity;
        if r < TYPICAL_BINDING_RANGE.0 || r > TYPICAL_BINDING_RANGE.1 {
            warnings.push(format!(
                "binding capacity R = {r} outside the typical range [{}, {}]",
                TYPICAL_BINDING_RANGE.0, TYPICAL_BINDING_RANGE.1
            ));
        }

        Ok(ResolvedExposure {
            constant_multiplier: binding_factor * k_f * k_t * k_k * d0,
            carbonation: self.carbonation,
            aging: self.aging,
            surface: self.surface,
            factors,
            warnings,
        })
    }
}

/// One factor's derived value next to the value actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorReport {
    pub name: &'static str,
    pub derived: f64,
    pub overridden: Option<f64>,
}

impl FactorReport {
    fn new(name: &'static str, derived: f64, overridden: Option<f64>) -> Self {
        Self {
            name,
            derived,
            overridden,
        }
    }

    pub fn used(&self) -> f64 {
        self.overridden.unwrap_or(self.derived)
    }
}

/// A scenario with its time-independent factors folded together.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedExposure {
    /// binding · k_F · k_T · k_k · D0, in mm²/year.
    pub constant_multiplier: f64,
    pub carbonation: CarbonationModel,
    pub aging: AgingModel,
    pub surface: SurfaceChlorideModel,
    pub factors: Vec<FactorReport>,
    pub warnings: Vec<String>,
}

impl ResolvedExposure {
    /// Effective diffusivity in mm²/year at `age` years and `depth` mm.
    pub fn effective_diffusivity(&self, age: f64, depth: f64) -> Result<f64> {
        if age < 0.0 {
            return Err(Error::invalid("age", "must be >= 0"));
        }
        let k_c = carbonation_influence(&self.carbonation, depth)?;
        Ok(self.constant_multiplier * k_c * aging_factor(&self.aging, age))
    }

    pub fn surface_concentration(&self, age: f64) -> f64 {
        surface_concentration(&self.surface, age)
    }

    /// Key-value diagnostics block: one line per factor.
    pub fn diagnostics(&self) -> String {
        let mut out = String::new();
        for f in &self.factors {
            let _ = write!(out, "{} = {} (derived {}", f.name, f.used(), f.derived);
            match f.overridden {
                Some(v) => {
                    let _ = writeln!(out, ", overridden {v})");
                }
                None => out.push_str(")\n"),
            }
        }
        let _ = writeln!(out, "constant_multiplier_mm2_per_year = {}", self.constant_multiplier);
        for w in &self.warnings {
            let _ = writeln!(out, "warning = {w}");
        }
        out
    }
}

/// Activation constant from the water-cement ratio. May be negative for
/// w/c above ~0.974; [`ExposureScenario::resolve`] flags that case.
pub fn activation_constant(mix: &MixDesign) -> f64 {
    10475.0 - 10750.0 * mix.water_cement_ratio
}

/// Arrhenius-type temperature multiplier `(T/T0)·exp(q(1/T0 − 1/T))`.
pub fn temperature_factor(thermal: &ThermalEnvironment, q: f64) -> Result<f64> {
    let t = thermal.temperature;
    let t0 = thermal.reference_temperature;
    if !(t > 0.0) {
        return Err(Error::invalid("temperature", "must be > 0 K"));
    }
    if !(t0 > 0.0) {
        return Err(Error::invalid("reference_temperature", "must be > 0 K"));
    }
    Ok((t / t0) * (q * (1.0 / t0 - 1.0 / t)).exp())
}

/// Carbonation depth in mm after `age` years.
pub fn carbonation_depth(model: &CarbonationModel, age: f64) -> Result<f64> {
    if age < 0.0 {
        return Err(Error::invalid("age", "must be >= 0"));
    }
    Ok(model.depth_coefficient * age.sqrt())
}

pub fn carbonation_influence(model: &CarbonationModel, depth: f64) -> Result<f64> {
    if !(depth >= 0.0) {
        return Err(Error::invalid("depth", format!("must be >= 0, got {depth}")));
    }
    let x = depth.min(model.max_fit_depth);
    let [a, b, c, d] = model.influence_polynomial;
    Ok((((a * x + b) * x + c) * x + d).max(0.0))
}

pub fn natural_freeze_thaw_cycles(env: &FreezeThawEnvironment) -> f64 {
    env.lambda_correction * env.annual_negative_temperature_days
}

pub fn lab_equivalent_cycles(env: &FreezeThawEnvironment, n_act: f64) -> Result<f64> {
    if !(env.damage_ratio > 0.0) {
        return Err(Error::invalid("damage_ratio", "must be > 0"));
    }
    Ok(env.water_content_coefficient * n_act / env.damage_ratio)
}

/// Freeze-thaw multiplier for `n_in` laboratory-equivalent cycles per year,
/// held constant over the service life.
pub fn freeze_thaw_factor(n_in: f64) -> f64 {
    1.0 + FREEZE_THAW_SLOPE * n_in
}

/// `(t0/t)^m` for `age ≥ t0`, and 1 before the reference age.
pub fn aging_factor(model: &AgingModel, age: f64) -> f64 {
    let t0 = model.reference_age_years();
    if age <= t0 {
        1.0
    } else {
        (t0 / age).powf(model.decay_index)
    }
}

/// Free chloride from total chloride.
pub fn binding_partition(total_concentration: f64, binding: &BindingModel) -> f64 {
    total_concentration / (1.0 + binding.binding_capacity)
}

pub fn construction_factor(mix: &MixDesign) -> f64 {
    let wc = mix.water_cement_ratio;
    if wc <= 0.5 {
        (1000.0 * wc * wc - 1050.0 * wc + 287.0) / 3.0
    } else {
        4.0
    }
}

/// Initial diffusivity in m²/s.
pub fn initial_diffusivity(mix: &MixDesign) -> f64 {
    10f64.powf(-12.06 + 2.4 * mix.water_cement_ratio)
}

pub fn surface_concentration(model: &SurfaceChlorideModel, age: f64) -> f64 {
    if !(age > 0.0) {
        return model.initial_surface_concentration;
    }
    model.initial_surface_concentration
        + model.ultimate_increment * (1.0 - (-model.rate_constant * age).exp())
}

/// Effective diffusivity in mm²/year at `age` years and `depth` mm.
pub fn effective_diffusivity(scenario: &ExposureScenario, age: f64, depth: f64) -> Result<f64> {
    scenario.resolve()?.effective_diffusivity(age, depth)
}
