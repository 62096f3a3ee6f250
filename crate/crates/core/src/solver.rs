//! Implicit finite-volume solver for transient chloride diffusion on a
//! [`MaterialGrid`].
//!
//! Unknowns live on mortar and ITZ cells only; aggregate and duct cells are
//! removed from the system, which makes every face next to them zero-flux.
//! Face diffusivities are harmonic means of the two adjacent cells. The top
//! edge of the grid is the exposed surface and carries the time-dependent
//! surface concentration as a Dirichlet value half a cell away from the first
//! row of centres; the other three edges are sealed.
//!
//! Each step is backward Euler with the diffusivity frozen at the step
//! midpoint. The system is solved for the increment `C_{n+1} − C_n`, so the
//! CG tolerance bounds the error of the change rather than of the state.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exposure::{ExposureScenario, ResolvedExposure};
use crate::grid::{Material, MaterialGrid};
use crate::linalg::pcg;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceBoundary {
    /// Dirichlet surface concentration on the top edge.
    Exposed,
    /// Zero flux on every edge; used for conservation checks.
    Sealed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Years.
    pub time_step: f64,
    pub end_time: f64,
    pub output_times: Vec<f64>,
    pub linear_tolerance: f64,
    pub max_iterations: usize,
    /// ITZ diffusivity relative to the co-located mortar value.
    pub itz_multiplier: f64,
    /// The first `startup_duration` years use `time_step / startup_refinement`.
    pub startup_duration: f64,
    pub startup_refinement: usize,
    pub surface: SurfaceBoundary,
}

pub const DEFAULT_OUTPUT_TIMES: [f64; 7] = [5.0, 10.0, 20.0, 27.0, 30.0, 40.0, 50.0];

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_step: 0.05,
            end_time: 50.0,
            output_times: DEFAULT_OUTPUT_TIMES.to_vec(),
            linear_tolerance: 1e-10,
            max_iterations: 10_000,
            itz_multiplier: 5.0,
            startup_duration: 1.0,
            startup_refinement: 10,
            surface: SurfaceBoundary::Exposed,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(Error::invalid("time_step", "must be > 0"));
        }
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err(Error::invalid("end_time", "must be >= 0"));
        }
        if let Some(t) = self
            .output_times
            .iter()
            .find(|t| !(**t >= 0.0 && **t <= self.end_time))
        {
            return Err(Error::invalid(
                "output_times",
                format!("{t} lies outside [0, {}]", self.end_time),
            ));
        }
        if !(self.linear_tolerance > 0.0) {
            return Err(Error::invalid("linear_tolerance", "must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be > 0"));
        }
        if !(self.itz_multiplier >= 0.0) {
            return Err(Error::invalid("itz_multiplier", "must be >= 0"));
        }
        if !(self.startup_duration >= 0.0) || self.startup_refinement == 0 {
            return Err(Error::invalid("startup", "duration must be >= 0 and refinement >= 1"));
        }
        Ok(())
    }

    /// Requested output times inside `[0, end_time]`, sorted and deduplicated.
    /// Falls back to `end_time` alone when none are requested.
    pub fn effective_output_times(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .output_times
            .iter()
            .copied()
            .filter(|t| *t >= 0.0 && *t <= self.end_time)
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        if t.is_empty() {
            t.push(self.end_time);
        }
        t
    }
}

/// Step boundaries from 0 to `end_time`, hitting every mark exactly. Segments
/// ending at or before `startup_duration` use the refined step.
pub(crate) fn time_schedule(
    end_time: f64,
    dt: f64,
    startup_duration: f64,
    startup_refinement: usize,
    marks: &[f64],
) -> Vec<f64> {
    let mut stops: Vec<f64> = marks
        .iter()
        .copied()
        .filter(|t| *t > 0.0 && *t < end_time)
        .collect();
    if startup_duration > 0.0 && startup_duration < end_time {
        stops.push(startup_duration);
    }
    if end_time > 0.0 {
        stops.push(end_time);
    }
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let mut times = vec![0.0];
    let mut a = 0.0;
    for b in stops {
        let step = if b <= startup_duration {
            dt / startup_refinement as f64
        } else {
            dt
        };
        let n = (((b - a) / step) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..n {
            times.push(a + (b - a) * k as f64 / n as f64);
        }
        times.push(b);
        a = b;
    }
    times
}

/// Per-cell chloride concentration (mass-% of concrete). Inactive cells hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationField {
    pub grid: Arc<MaterialGrid>,
    pub values: Vec<f64>,
    pub time: f64,
}

impl ConcentrationField {
    /// `value` on every active cell, 0 elsewhere.
    pub fn uniform(grid: Arc<MaterialGrid>, value: f64, time: f64) -> Self {
        let values = grid
            .codes
            .iter()
            .map(|m| if m.is_active() { value } else { 0.0 })
            .collect();
        Self { grid, values, time }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn active_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .iter()
            .zip(&self.grid.codes)
            .filter(|(_, m)| m.is_active())
            .map(|(v, _)| *v)
    }

    /// Concentration summed over active cells times the cell area.
    pub fn total_mass(&self) -> f64 {
        let h = self.grid.h;
        self.active_values().sum::<f64>() * h * h
    }
}

/// Diffusivity (mm²/year) of one cell at `time`: zero for aggregate and duct,
/// the composed effective value at the cell-centre depth for mortar, and that
/// value times `itz_multiplier` for ITZ.
pub fn cell_diffusivity(
    exposure: &ResolvedExposure,
    grid: &MaterialGrid,
    i: usize,
    j: usize,
    time: f64,
    itz_multiplier: f64,
) -> Result<f64> {
    let m = grid.get(i, j);
    if !m.is_active() {
        return Ok(0.0);
    }
    let base = exposure.effective_diffusivity(time, grid.row_depth(j))?;
    Ok(match m {
        Material::Itz => base * itz_multiplier,
        _ => base,
    })
}

#[inline]
fn harmonic(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s > 0.0 {
        2.0 * a * b / s
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub surface_concentration: f64,
}

/// Precomputed topology of the active cells for repeated steps.
#[derive(Debug, Clone)]
pub struct DiffusionSolver {
    grid: Arc<MaterialGrid>,
    exposure: ResolvedExposure,
    config: SolverConfig,
    active: Vec<usize>,
    row: Vec<usize>,
    multiplier: Vec<f64>,
    east: Vec<u32>,
    south: Vec<u32>,
    top: Vec<bool>,
}

impl DiffusionSolver {
    pub fn new(grid: Arc<MaterialGrid>, scenario: &ExposureScenario, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let exposure = scenario.resolve()?;
        if grid.len() >= NONE as usize {
            return Err(Error::invalid("grid", "too many cells"));
        }
        let mut map = vec![NONE; grid.len()];
        let mut active = Vec::new();
        for (k, m) in grid.codes.iter().enumerate() {
            if m.is_active() {
                map[k] = active.len() as u32;
                active.push(k);
            }
        }
        let nx = grid.nx;
        let ny = grid.ny;
        let mut row = Vec::with_capacity(active.len());
        let mut multiplier = Vec::with_capacity(active.len());
        let mut east = Vec::with_capacity(active.len());
        let mut south = Vec::with_capacity(active.len());
        let mut top = Vec::with_capacity(active.len());
        for &k in &active {
            let i = k % nx;
            let j = k / nx;
            row.push(j);
            multiplier.push(match grid.codes[k] {
                Material::Itz => config.itz_multiplier,
                _ => 1.0,
            });
            east.push(if i + 1 < nx { map[k + 1] } else { NONE });
            south.push(if j + 1 < ny { map[k + nx] } else { NONE });
            top.push(j == 0);
        }
        Ok(Self {
            grid,
            exposure,
            config: config.clone(),
            active,
            row,
            multiplier,
            east,
            south,
            top,
        })
    }

    pub fn grid(&self) -> &Arc<MaterialGrid> {
        &self.grid
    }

    pub fn exposure(&self) -> &ResolvedExposure {
        &self.exposure
    }

    pub fn active_cells(&self) -> usize {
        self.active.len()
    }

    pub fn initial_field(&self) -> ConcentrationField {
        ConcentrationField::uniform(
            self.grid.clone(),
            self.exposure.surface.initial_surface_concentration,
            0.0,
        )
    }

    /// Advances `field` by one backward-Euler step of `dt` years.
    pub fn step(&self, field: &mut ConcentrationField, dt: f64) -> Result<StepStats> {
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", "must be > 0"));
        }
        let n = self.active.len();
        let t_new = field.time + dt;
        let t_mid = field.time + 0.5 * dt;
        let surface = self.exposure.surface_concentration(t_new);
        if n == 0 {
            field.time = t_new;
            return Ok(StepStats {
                iterations: 0,
                relative_residual: 0.0,
                surface_concentration: surface,
            });
        }

        let h2 = self.grid.h * self.grid.h;
        let row_d: Vec<f64> = (0..self.grid.ny)
            .map(|j| self.exposure.effective_diffusivity(t_mid, self.grid.row_depth(j)))
            .collect::<Result<_>>()?;
        let d: Vec<f64> = (0..n).map(|a| row_d[self.row[a]] * self.multiplier[a]).collect();

        // Face coefficients scaled by dt, per unit cell area.
        let mut ce = vec![0.0; n];
        let mut cs = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut boundary = vec![0.0; n];
        let exposed = self.config.surface == SurfaceBoundary::Exposed;
        for a in 0..n {
            let e = self.east[a];
            if e != NONE {
                let c = dt * harmonic(d[a], d[e as usize]) / h2;
                ce[a] = c;
                diag[a] += c;
                diag[e as usize] += c;
            }
            let s = self.south[a];
            if s != NONE {
                let c = dt * harmonic(d[a], d[s as usize]) / h2;
                cs[a] = c;
                diag[a] += c;
                diag[s as usize] += c;
            }
            if exposed && self.top[a] {
                let c = dt * 2.0 * d[a] / h2;
                boundary[a] = c;
                diag[a] += c;
            }
        }

        let apply = |x: &[f64], y: &mut [f64]| {
            for a in 0..n {
                y[a] = diag[a] * x[a];
            }
            for a in 0..n {
                let e = self.east[a];
                if e != NONE {
                    let e = e as usize;
                    y[a] -= ce[a] * x[e];
                    y[e] -= ce[a] * x[a];
                }
                let s = self.south[a];
                if s != NONE {
                    let s = s as usize;
                    y[a] -= cs[a] * x[s];
                    y[s] -= cs[a] * x[a];
                }
            }
        };

        let old: Vec<f64> = self.active.iter().map(|&k| field.values[k]).collect();
        // rhs = C_n + b − M C_n
        let mut rhs = vec![0.0; n];
        apply(&old, &mut rhs);
        for a in 0..n {
            rhs[a] = old[a] + boundary[a] * surface - rhs[a];
        }
        let inv_diag: Vec<f64> = diag.iter().map(|v| 1.0 / v).collect();
        let mut delta = vec![0.0; n];
        let outcome = pcg(
            apply,
            &inv_diag,
            &rhs,
            &mut delta,
            self.config.linear_tolerance,
            self.config.max_iterations,
        );
        if !outcome.converged {
            return Err(Error::LinearSolveFailure {
                time: t_new,
                residual: outcome.relative_residual,
                iterations: outcome.iterations,
            });
        }
        for (a, &k) in self.active.iter().enumerate() {
            field.values[k] = old[a] + delta[a];
        }
        field.time = t_new;
        Ok(StepStats {
            iterations: outcome.iterations,
            relative_residual: outcome.relative_residual,
            surface_concentration: surface,
        })
    }

    /// Step boundaries used by [`DiffusionSolver::run`].
    pub fn schedule(&self) -> Vec<f64> {
        let c = &self.config;
        time_schedule(
            c.end_time,
            c.time_step,
            c.startup_duration,
            c.startup_refinement,
            &c.effective_output_times(),
        )
    }

    /// Runs from the initial state to `end_time`, returning the fields at the
    /// output times. `observer` sees the field after every step together with
    /// the surface concentration applied in that step.
    pub fn run<F>(&self, mut observer: F) -> Result<Vec<ConcentrationField>>
    where
        F: FnMut(&ConcentrationField, &StepStats),
    {
        let outputs = self.config.effective_output_times();
        let schedule = self.schedule();
        let mut field = self.initial_field();
        let mut emitted = Vec::with_capacity(outputs.len());
        let mut next = 0;
        while next < outputs.len() && outputs[next] <= 0.0 {
            emitted.push(field.clone());
            next += 1;
        }
        for w in schedule.windows(2) {
            let target = w[1];
            let dt = target - field.time;
            let stats = self.step(&mut field, dt)?;
            field.time = target;
            observer(&field, &stats);
            while next < outputs.len() && outputs[next] <= target {
                emitted.push(field.clone());
                next += 1;
            }
        }
        Ok(emitted)
    }
}

/// One step on a freshly assembled solver.
pub fn step(
    field: &ConcentrationField,
    scenario: &ExposureScenario,
    config: &SolverConfig,
    dt: f64,
) -> Result<ConcentrationField> {
    let solver = DiffusionSolver::new(field.grid.clone(), scenario, config)?;
    let mut next = field.clone();
    solver.step(&mut next, dt)?;
    Ok(next)
}

pub fn run_simulation(
    grid: Arc<MaterialGrid>,
    scenario: &ExposureScenario,
    config: &SolverConfig,
) -> Result<Vec<ConcentrationField>> {
    DiffusionSolver::new(grid, scenario, config)?.run(|_, _| {})
}
