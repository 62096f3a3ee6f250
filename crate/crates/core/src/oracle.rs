//! Closed-form and one-dimensional reference solutions.
//!
//! These back the verification ladder: the error-function profile for
//! constant coefficients, its time-integrated diffusivity substitution for
//! time-varying but spatially uniform `D`, and a direct tridiagonal
//! backward-Euler column solve that uses the same discretization as the 2D
//! solver.

use libm::erf;

use crate::error::{Error, Result};
use crate::exposure::{ExposureScenario, ResolvedExposure};
use crate::linalg::solve_tridiagonal;
use crate::solver::{time_schedule, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FickQuery {
    pub initial_concentration: f64,
    pub surface_concentration: f64,
    /// mm²/year
    pub diffusivity: f64,
    /// years
    pub age: f64,
    /// mm
    pub depth: f64,
}

/// Semi-infinite constant-boundary solution
/// `C0 + (Cs − C0)·(1 − erf(x / (2√(D t))))`.
pub fn erf_profile(q: &FickQuery) -> f64 {
    erf_profile_tau(
        q.initial_concentration,
        q.surface_concentration,
        q.diffusivity * q.age,
        q.depth,
    )
}

/// Same profile written in terms of `τ = ∫ D dt` (mm²).
pub fn erf_profile_tau(c0: f64, cs: f64, tau: f64, depth: f64) -> f64 {
    if tau <= 0.0 {
        return if depth <= 0.0 { cs } else { c0 };
    }
    c0 + (cs - c0) * (1.0 - erf(depth / (2.0 * tau.sqrt())))
}

// 15-point Gauss–Kronrod nodes and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gauss_kronrod(f, a, b);
    if err <= tol || depth == 0 {
        return value;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` with the given
/// relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (rough, _) = gauss_kronrod(&f, a, b);
    let tol = (rel_tol * rough.abs()).max(f64::MIN_POSITIVE);
    adaptive(&f, a, b, tol, 40)
}

/// `τ = ∫₀^t_end D_eff(t, depth) dt` in mm², split at the aging reference age
/// where the integrand has a kink.
pub fn integrated_diffusivity(scenario: &ExposureScenario, t_end: f64, depth: f64) -> Result<f64> {
    let resolved = scenario.resolve()?;
    integrated_diffusivity_resolved(&resolved, t_end, depth)
}

pub fn integrated_diffusivity_resolved(resolved: &ResolvedExposure, t_end: f64, depth: f64) -> Result<f64> {
    if !(t_end >= 0.0) {
        return Err(Error::invalid("t_end", "must be >= 0"));
    }
    // surface errors such as a negative depth before integrating
    resolved.effective_diffusivity(0.0, depth)?;
    let d = |t: f64| resolved.effective_diffusivity(t, depth).unwrap_or(0.0);
    let t0 = resolved.aging.reference_age_years();
    let kink = t0.min(t_end);
    Ok(integrate(d, 0.0, kink, 1e-10) + integrate(d, kink, t_end, 1e-10))
}

/// Concentration down one homogeneous column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnProfile {
    /// Cell-centre depths (mm).
    pub depths: Vec<f64>,
    pub concentrations: Vec<f64>,
    pub time: f64,
}

impl ColumnProfile {
    /// Linear interpolation at `depth`, clamped to the end values.
    pub fn at(&self, depth: f64) -> f64 {
        let d = &self.depths;
        let c = &self.concentrations;
        if depth <= d[0] {
            return c[0];
        }
        if depth >= d[d.len() - 1] {
            return c[c.len() - 1];
        }
        let k = d.partition_point(|x| *x <= depth);
        let w = (depth - d[k - 1]) / (d[k] - d[k - 1]);
        c[k - 1] + w * (c[k] - c[k - 1])
    }
}

/// Backward-Euler column solve on `depth_extent` mm with cell size `h`, the
/// same surface boundary, face averaging, midpoint diffusivity and startup
/// refinement as the 2D solver. The bottom of the column is sealed.
pub fn fd1d_reference(
    scenario: &ExposureScenario,
    depth_extent: f64,
    h: f64,
    dt: f64,
    t_end: f64,
) -> Result<ColumnProfile> {
    let defaults = SolverConfig::default();
    fd1d_reference_with(
        scenario,
        depth_extent,
        h,
        dt,
        t_end,
        defaults.startup_duration,
        defaults.startup_refinement,
    )
}

pub fn fd1d_reference_with(
    scenario: &ExposureScenario,
    depth_extent: f64,
    h: f64,
    dt: f64,
    t_end: f64,
    startup_duration: f64,
    startup_refinement: usize,
) -> Result<ColumnProfile> {
    if !(h > 0.0) {
        return Err(Error::invalid("h", "must be > 0"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    if !(t_end >= 0.0) {
        return Err(Error::invalid("t_end", "must be >= 0"));
    }
    if !(depth_extent >= h) {
        return Err(Error::invalid("depth_extent", "must hold at least one cell"));
    }
    if startup_refinement == 0 {
        return Err(Error::invalid("startup_refinement", "must be >= 1"));
    }
    let ex = scenario.resolve()?;
    let n = (depth_extent / h).round() as usize;
    let depths: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
    let mut c = vec![ex.surface.initial_surface_concentration; n];
    let h2 = h * h;

    let schedule = time_schedule(t_end, dt, startup_duration, startup_refinement, &[]);
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for w in schedule.windows(2) {
        let step = w[1] - w[0];
        let t_mid = 0.5 * (w[0] + w[1]);
        let d: Vec<f64> = depths
            .iter()
            .map(|&x| ex.effective_diffusivity(t_mid, x))
            .collect::<Result<_>>()?;
        let cs = ex.surface_concentration(w[1]);
        for j in 0..n {
            let up = if j == 0 {
                2.0 * d[0]
            } else {
                let s = d[j - 1] + d[j];
                if s > 0.0 { 2.0 * d[j - 1] * d[j] / s } else { 0.0 }
            };
            let down = if j + 1 < n {
                let s = d[j] + d[j + 1];
                if s > 0.0 { 2.0 * d[j] * d[j + 1] / s } else { 0.0 }
            } else {
                0.0
            };
            let ku = step * up / h2;
            let kd = step * down / h2;
            diag[j] = 1.0 + ku + kd;
            sub[j] = if j == 0 { 0.0 } else { -ku };
            sup[j] = -kd;
            rhs[j] = c[j] + if j == 0 { ku * cs } else { 0.0 };
        }
        c = solve_tridiagonal(&sub, &diag, &sup, &rhs);
    }
    Ok(ColumnProfile {
        depths,
        concentrations: c,
        time: t_end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exposure::{
        AgingModel, BindingModel, CarbonationModel, FactorOverrides, SurfaceChlorideModel,
    };
    use approx::assert_relative_eq;

    fn constant(d: f64, cs: f64, decay: f64) -> ExposureScenario {
        ExposureScenario {
            binding: BindingModel { binding_capacity: 0.0 },
            carbonation: CarbonationModel::uniform(1.0),
            surface: SurfaceChlorideModel::instantaneous(cs),
            aging: AgingModel {
                decay_index: decay,
                ..AgingModel::default()
            },
            overrides: FactorOverrides {
                q: None,
                k_t: Some(1.0),
                k_k: Some(1.0),
                k_f: Some(1.0),
                n_in: None,
                d0: Some(d),
            },
            ..ExposureScenario::default()
        }
    }

    #[test]
    fn erf_tabulated() {
        // mpmath erf(0.5) = 0.520499877813046537682746653892
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(2.0) - 0.995_322_265_018_952_7).abs() < 1e-15);
    }

    #[test]
    fn erf_profile_examples() {
        let q = FickQuery {
            initial_concentration: 0.0,
            surface_concentration: 0.37,
            diffusivity: 50.0,
            age: 27.0,
            depth: 0.0,
        };
        assert_eq!(erf_profile(&q), 0.37);
        assert!(erf_profile(&FickQuery { depth: 1e4, ..q }).abs() < 1e-15);
        // mpmath: 0.163324780909359847
        assert_relative_eq!(
            erf_profile(&FickQuery { depth: 40.0, ..q }),
            0.163_324_780_909_359_85,
            max_relative = 1e-12
        );
    }

    #[test]
    fn quadrature_closed_form() {
        let v = integrate(|t| t.powf(-0.264), 1.0, 50.0, 1e-12);
        let exact = (50f64.powf(0.736) - 1.0) / 0.736;
        assert_relative_eq!(v, exact, max_relative = 1e-11);
    }

    #[test]
    fn integrated_diffusivity_constant() {
        let s = constant(37.0, 0.3, 0.0);
        assert_relative_eq!(integrated_diffusivity(&s, 12.5, 3.0).unwrap(), 37.0 * 12.5, max_relative = 1e-13);
        assert_eq!(integrated_diffusivity(&s, 0.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn integrated_diffusivity_aging_closed_form() {
        let s = constant(100.0, 0.3, 0.264);
        let t0: f64 = 28.0 / 365.0;
        let t: f64 = 50.0;
        let exact = 100.0 * (t0 + t0.powf(0.264) * (t.powf(0.736) - t0.powf(0.736)) / 0.736);
        assert_relative_eq!(integrated_diffusivity(&s, t, 0.0).unwrap(), exact, max_relative = 1e-9);
    }

    #[test]
    fn integrated_diffusivity_girder() {
        // mpmath quadrature of the composed chain: 2946.42452084489
        let v = integrated_diffusivity(&ExposureScenario::girder(), 50.0, 0.0).unwrap();
        assert_relative_eq!(v, 2_946.424_520_844_89, max_relative = 1e-8);
    }

    #[test]
    fn fd1d_zero_time_is_initial() {
        let p = fd1d_reference(&constant(50.0, 0.37, 0.0), 50.0, 1.0, 0.05, 0.0).unwrap();
        assert!(p.concentrations.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn fd1d_tracks_erf() {
        let s = constant(50.0, 0.37, 0.0);
        let p = fd1d_reference(&s, 200.0, 1.0, 0.05, 27.0).unwrap();
        let worst = p
            .depths
            .iter()
            .zip(&p.concentrations)
            .map(|(x, c)| {
                let e = erf_profile_tau(0.0, 0.37, 50.0 * 27.0, *x);
                (c - e).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.01 * 0.37, "worst {worst}");
    }

    #[test]
    fn column_interpolation() {
        let p = ColumnProfile {
            depths: vec![0.5, 1.5, 2.5],
            concentrations: vec![3.0, 2.0, 0.0],
            time: 1.0,
        };
        assert_eq!(p.at(0.0), 3.0);
        assert_eq!(p.at(1.0), 2.5);
        assert_eq!(p.at(2.0), 1.0);
        assert_eq!(p.at(9.0), 0.0);
    }
}
