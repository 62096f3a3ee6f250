//! Verification ladder: each rung compares one modelling ingredient against a
//! simpler trusted reference.

use std::sync::Arc;

use crate::analysis::{titration_concentration, TitrationRecord};
use crate::config::RunConfig;
use crate::error::Result;
use crate::exposure::{CarbonationModel, ExposureScenario, SurfaceChlorideModel};
use crate::grid::{Material, MaterialGrid};
use crate::mesostructure::build_mesostructure;
use crate::oracle::{erf_profile_tau, fd1d_reference, integrated_diffusivity};
use crate::solver::{run_simulation, DiffusionSolver, SolverConfig, SurfaceBoundary};

#[derive(Debug, Clone, PartialEq)]
pub struct LadderCheck {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl LadderCheck {
    fn below(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self {
            name,
            measured,
            tolerance,
            passed: measured.is_finite() && measured < tolerance,
        }
    }
}

const SURFACE: f64 = 0.37;
const HORIZON: f64 = 27.0;
const EXTENT: f64 = 200.0;
/// Column depth for erf comparisons, deep enough to act as semi-infinite.
const SEMI_INFINITE_EXTENT: f64 = 800.0;

/// Scenario whose diffusivity varies in time only, with a step surface.
pub fn time_varying_scenario(base: &ExposureScenario) -> ExposureScenario {
    ExposureScenario {
        carbonation: CarbonationModel::uniform(1.0),
        surface: SurfaceChlorideModel::instantaneous(SURFACE),
        ..*base
    }
}

/// Time-varying scenario with aging switched off.
pub fn constant_scenario(base: &ExposureScenario) -> ExposureScenario {
    let mut s = time_varying_scenario(base);
    s.aging.decay_index = 0.0;
    s
}

fn erf_gap(scenario: &ExposureScenario, h: f64, dt: f64) -> Result<f64> {
    let column = fd1d_reference(scenario, SEMI_INFINITE_EXTENT, h, dt, HORIZON)?;
    let tau = integrated_diffusivity(scenario, HORIZON, 0.0)?;
    let worst = column
        .depths
        .iter()
        .zip(&column.concentrations)
        .map(|(x, c)| (c - erf_profile_tau(0.0, SURFACE, tau, *x)).abs())
        .fold(0.0, f64::max);
    Ok(worst / SURFACE)
}

/// Largest deviation of any 2D column from the 1D reference, relative to the
/// surface value, on an aggregate-free strip `width` mm wide.
pub fn homogeneous_gap(scenario: &ExposureScenario, width: f64, h: f64, dt: f64, end: f64) -> Result<f64> {
    let nx = (width / h).round() as usize;
    let ny = (EXTENT / h).round() as usize;
    let grid = Arc::new(MaterialGrid::uniform(nx, ny, h, Material::Mortar)?);
    let cfg = SolverConfig {
        time_step: dt,
        end_time: end,
        output_times: vec![end],
        ..SolverConfig::default()
    };
    let field = run_simulation(grid.clone(), scenario, &cfg)?
        .pop()
        .expect("end time is always emitted");
    let column = fd1d_reference(scenario, EXTENT, h, dt, end)?;
    let cs = scenario.resolve()?.surface_concentration(end).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            worst = worst.max((field.value(i, j) - column.concentrations[j]).abs());
        }
    }
    Ok(worst / cs)
}

fn sealed_mass_drift(scenario: &ExposureScenario) -> Result<f64> {
    let mut grid = MaterialGrid::uniform(24, 16, 1.0, Material::Mortar)?;
    grid.set(5, 5, Material::Aggregate);
    let grid = Arc::new(grid);
    let cfg = SolverConfig {
        surface: SurfaceBoundary::Sealed,
        ..SolverConfig::default()
    };
    let solver = DiffusionSolver::new(grid.clone(), scenario, &cfg)?;
    let mut field = solver.initial_field();
    for (k, v) in field.values.iter_mut().enumerate() {
        *v = if k % 7 == 0 { 0.4 } else { 0.05 };
    }
    let before = field.total_mass();
    solver.step(&mut field, 0.5)?;
    Ok((field.total_mass() - before).abs() / before)
}

pub fn run_ladder(config: &RunConfig) -> Result<Vec<LadderCheck>> {
    let base = config.scenario();
    let mut out = vec![LadderCheck::below(
        "erf(0.5) against tabulated value",
        (libm::erf(0.5) - 0.520_499_877_813_046_5).abs(),
        1e-12,
    )];

    let constant = constant_scenario(&base);
    out.push(LadderCheck::below(
        "1D reference vs erf, constant D (L-inf / C_s)",
        erf_gap(&constant, 1.0, 0.05)?,
        0.01,
    ));
    let varying = time_varying_scenario(&base);
    out.push(LadderCheck::below(
        "1D reference vs erf with integrated diffusivity (L-inf / C_s)",
        erf_gap(&varying, 1.0, 0.05)?,
        0.01,
    ));
    out.push(LadderCheck::below(
        "2D homogeneous strip vs 1D reference (L-inf / C_s)",
        homogeneous_gap(&base, 10.0, 1.0, 0.05, HORIZON)?,
        0.005,
    ));
    out.push(LadderCheck::below(
        "sealed-box mass drift per step (relative)",
        sealed_mass_drift(&constant)?,
        1e-10,
    ));

    let meso = build_mesostructure(&config.meso_config())?;
    let worst_inscription = meso
        .aggregates
        .iter()
        .map(|a| a.inscription_residual())
        .fold(0.0, f64::max);
    out.push(LadderCheck::below("polygon inscription residual", worst_inscription, 1e-9));
    out.push(LadderCheck {
        name: "separation and convexity of every aggregate",
        measured: meso.aggregates.len() as f64,
        tolerance: 0.0,
        passed: meso.separation_holds() && meso.aggregates.iter().all(|a| a.is_convex()),
    });
    out.push(LadderCheck::below(
        "packed fraction vs target (absolute)",
        (meso.achieved_area_fraction - meso.target_fraction).abs(),
        0.02,
    ));

    let titration = titration_concentration(&TitrationRecord {
        depth: 0.0,
        silver_nitrate_titer: 1.0,
        titrant_volume: 2.0,
        water_volume: 250.0,
        extract_volume: 20.0,
        powder_mass: 10.0,
    })?;
    out.push(LadderCheck::below(
        "titration worked example (relative error vs 0.25 %)",
        (titration - 0.25).abs() / 0.25,
        1e-12,
    ));
    Ok(out)
}
