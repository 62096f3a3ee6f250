//! Run configuration file.
//!
//! The file is TOML with four optional sections, `[scenario]`, `[geometry]`,
//! `[solver]` and `[analysis]`, each holding flat `key = value` pairs. Every
//! key has a default, so an empty file is a valid configuration. Unknown
//! sections or keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exposure::{
    AgingModel, BindingModel, CarbonationModel, ExposureScenario, FactorOverrides,
    FreezeThawEnvironment, MixDesign, SurfaceChlorideModel, ThermalEnvironment,
    DEFAULT_CARBONATION_POLYNOMIAL,
};
use crate::geometry::Point;
use crate::mesostructure::{DomainRect, Grading, MesoConfig, PolygonRule, TendonDuct};
use crate::solver::{SolverConfig, SurfaceBoundary, DEFAULT_OUTPUT_TIMES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub water_cement_ratio: f64,
    pub temperature_k: f64,
    pub reference_temperature_k: f64,
    pub annual_negative_temperature_days: f64,
    pub lambda_correction: f64,
    pub water_content_coefficient: f64,
    pub damage_ratio: f64,
    pub carbonation_depth_coefficient: f64,
    /// Cubic in carbonation depth, highest power first.
    pub carbonation_polynomial: [f64; 4],
    pub carbonation_max_fit_depth_mm: f64,
    pub binding_capacity: f64,
    pub reference_age_days: f64,
    pub aging_decay_index: f64,
    pub surface_initial_percent: f64,
    pub surface_ultimate_increment_percent: f64,
    pub surface_rate_constant: f64,
    /// Pin q, k_T, k_k and n_in to their tabulated girder values unless an
    /// explicit override below is given.
    pub use_tabulated_factors: bool,
    pub q_override: Option<f64>,
    pub k_t_override: Option<f64>,
    pub k_k_override: Option<f64>,
    pub k_f_override: Option<f64>,
    pub n_in_override: Option<f64>,
    pub d0_override_mm2_per_year: Option<f64>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let s = ExposureScenario::default();
        Self {
            water_cement_ratio: s.mix.water_cement_ratio,
            temperature_k: s.thermal.temperature,
            reference_temperature_k: s.thermal.reference_temperature,
            annual_negative_temperature_days: s.freeze_thaw.annual_negative_temperature_days,
            lambda_correction: s.freeze_thaw.lambda_correction,
            water_content_coefficient: s.freeze_thaw.water_content_coefficient,
            damage_ratio: s.freeze_thaw.damage_ratio,
            carbonation_depth_coefficient: s.carbonation.depth_coefficient,
            carbonation_polynomial: DEFAULT_CARBONATION_POLYNOMIAL,
            carbonation_max_fit_depth_mm: s.carbonation.max_fit_depth,
            binding_capacity: s.binding.binding_capacity,
            reference_age_days: s.aging.reference_age,
            aging_decay_index: s.aging.decay_index,
            surface_initial_percent: s.surface.initial_surface_concentration,
            surface_ultimate_increment_percent: s.surface.ultimate_increment,
            surface_rate_constant: s.surface.rate_constant,
            use_tabulated_factors: true,
            q_override: None,
            k_t_override: None,
            k_k_override: None,
            k_f_override: None,
            n_in_override: None,
            d0_override_mm2_per_year: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub width_mm: f64,
    pub height_mm: f64,
    pub target_fraction: f64,
    pub d_min_mm: f64,
    pub d_max_mm: f64,
    pub fuller_exponent: f64,
    pub eta: f64,
    pub itz_width_mm: f64,
    pub itz_multiplier: f64,
    pub duct: bool,
    pub duct_center_x_mm: f64,
    pub duct_center_y_mm: f64,
    pub duct_diameter_mm: f64,
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub min_angle_deg: f64,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let m = MesoConfig::default();
        let duct = m.duct.expect("default geometry has a duct");
        Self {
            width_mm: m.domain.width,
            height_mm: m.domain.height,
            target_fraction: m.target_fraction,
            d_min_mm: m.grading.d_min,
            d_max_mm: m.grading.d_max,
            fuller_exponent: m.grading.exponent,
            eta: m.eta,
            itz_width_mm: m.itz_width,
            itz_multiplier: SolverConfig::default().itz_multiplier,
            duct: true,
            duct_center_x_mm: duct.center.x,
            duct_center_y_mm: duct.center.y,
            duct_diameter_mm: duct.diameter,
            min_vertices: m.polygon.min_vertices,
            max_vertices: m.polygon.max_vertices,
            min_angle_deg: m.polygon.min_angle_deg,
            seed: m.seed,
            max_attempts: m.max_attempts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub h_mm: f64,
    pub time_step_years: f64,
    pub end_time_years: f64,
    /// Defaults to the standard report years up to `end_time_years`.
    pub output_times_years: Option<Vec<f64>>,
    pub linear_tolerance: f64,
    pub max_iterations: usize,
    pub startup_duration_years: f64,
    pub startup_refinement: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        Self {
            h_mm: 1.0,
            time_step_years: s.time_step,
            end_time_years: s.end_time,
            output_times_years: None,
            linear_tolerance: s.linear_tolerance,
            max_iterations: s.max_iterations,
            startup_duration_years: s.startup_duration,
            startup_refinement: s.startup_refinement,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonBasis {
    /// Convert the model's total chloride to free chloride first.
    Free,
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub threshold_percent: f64,
    /// Empty means the shallowest duct boundary.
    pub probe_depths_mm: Vec<f64>,
    pub measured_profile: Option<PathBuf>,
    pub titration: Option<PathBuf>,
    /// Structure age at sampling; the nearest output time is compared.
    pub measured_age_years: f64,
    pub compare_basis: ComparisonBasis,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            threshold_percent: crate::analysis::CRITICAL_CHLORIDE,
            probe_depths_mm: Vec::new(),
            measured_profile: None,
            titration: None,
            measured_age_years: 27.0,
            compare_basis: ComparisonBasis::Free,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub geometry: GeometrySection,
    pub solver: SolverSection,
    pub analysis: AnalysisSection,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Canonical TOML rendering with every default filled in.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical rendering, lowercase hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario()
            .validate()
            .and_then(|_| self.meso_config().validate())
            .and_then(|_| self.solver_config().validate())
            .map_err(|e| Error::Config(e.to_string()))?;
        let s = &self.solver;
        if !(s.h_mm > 0.0 && s.h_mm.is_finite()) {
            return Err(Error::Config("solver.h_mm must be > 0".into()));
        }
        let a = &self.analysis;
        if !(a.threshold_percent >= 0.0 && a.threshold_percent.is_finite()) {
            return Err(Error::Config("analysis.threshold_percent must be >= 0".into()));
        }
        if a.probe_depths_mm.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::Config("analysis.probe_depths_mm must be >= 0".into()));
        }
        Ok(())
    }

    pub fn scenario(&self) -> ExposureScenario {
        let s = &self.scenario;
        let tab = ExposureScenario::default().overrides;
        let pick = |explicit: Option<f64>, tabulated: Option<f64>| {
            explicit.or(if s.use_tabulated_factors { tabulated } else { None })
        };
        ExposureScenario {
            mix: MixDesign {
                water_cement_ratio: s.water_cement_ratio,
            },
            thermal: ThermalEnvironment {
                temperature: s.temperature_k,
                reference_temperature: s.reference_temperature_k,
            },
            freeze_thaw: FreezeThawEnvironment {
                annual_negative_temperature_days: s.annual_negative_temperature_days,
                lambda_correction: s.lambda_correction,
                water_content_coefficient: s.water_content_coefficient,
                damage_ratio: s.damage_ratio,
            },
            carbonation: CarbonationModel {
                depth_coefficient: s.carbonation_depth_coefficient,
                influence_polynomial: s.carbonation_polynomial,
                max_fit_depth: s.carbonation_max_fit_depth_mm,
            },
            binding: BindingModel {
                binding_capacity: s.binding_capacity,
            },
            aging: AgingModel {
                reference_age: s.reference_age_days,
                decay_index: s.aging_decay_index,
            },
            surface: SurfaceChlorideModel {
                initial_surface_concentration: s.surface_initial_percent,
                ultimate_increment: s.surface_ultimate_increment_percent,
                rate_constant: s.surface_rate_constant,
            },
            overrides: FactorOverrides {
                q: pick(s.q_override, tab.q),
                k_t: pick(s.k_t_override, tab.k_t),
                k_k: pick(s.k_k_override, tab.k_k),
                k_f: pick(s.k_f_override, tab.k_f),
                n_in: pick(s.n_in_override, tab.n_in),
                d0: pick(s.d0_override_mm2_per_year, tab.d0),
            },
        }
    }

    pub fn meso_config(&self) -> MesoConfig {
        let g = &self.geometry;
        MesoConfig {
            domain: DomainRect {
                width: g.width_mm,
                height: g.height_mm,
            },
            target_fraction: g.target_fraction,
            grading: Grading {
                d_min: g.d_min_mm,
                d_max: g.d_max_mm,
                exponent: g.fuller_exponent,
            },
            eta: g.eta,
            itz_width: g.itz_width_mm,
            duct: g.duct.then(|| TendonDuct {
                center: Point::new(g.duct_center_x_mm, g.duct_center_y_mm),
                diameter: g.duct_diameter_mm,
            }),
            polygon: PolygonRule {
                min_vertices: g.min_vertices,
                max_vertices: g.max_vertices,
                min_angle_deg: g.min_angle_deg,
            },
            seed: g.seed,
            max_attempts: g.max_attempts,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        let output_times = match &s.output_times_years {
            Some(t) => t.clone(),
            None => DEFAULT_OUTPUT_TIMES
                .iter()
                .copied()
                .filter(|t| *t <= s.end_time_years)
                .collect(),
        };
        SolverConfig {
            time_step: s.time_step_years,
            end_time: s.end_time_years,
            output_times,
            linear_tolerance: s.linear_tolerance,
            max_iterations: s.max_iterations,
            itz_multiplier: self.geometry.itz_multiplier,
            startup_duration: s.startup_duration_years,
            startup_refinement: s.startup_refinement,
            surface: SurfaceBoundary::Exposed,
        }
    }

    /// Depths probed by threshold reports.
    pub fn probe_depths(&self) -> Vec<f64> {
        if !self.analysis.probe_depths_mm.is_empty() {
            return self.analysis.probe_depths_mm.clone();
        }
        match self.meso_config().duct {
            Some(d) => vec![d.shallowest_depth()],
            None => Vec::new(),
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.geometry.seed = seed;
    }

    /// Sets the end time and drops explicit output times beyond it.
    pub fn set_years(&mut self, years: f64) {
        self.solver.end_time_years = years;
        if let Some(t) = &mut self.solver.output_times_years {
            t.retain(|t| *t <= years);
        }
    }

    pub fn set_resolution(&mut self, h: f64) {
        self.solver.h_mm = h;
    }
}
