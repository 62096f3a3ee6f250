//! End-to-end acceptance criteria. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits non-zero if any gating criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use chloride_core::analysis::{depth_max_profile, titration_concentration, DepthProfile, TitrationRecord};
use chloride_core::exposure::{
    carbonation_depth, construction_factor, freeze_thaw_factor, temperature_factor, CarbonationModel,
    ExposureScenario, MixDesign, SurfaceChlorideModel, ThermalEnvironment, FREEZE_THAW_FIT_INTERCEPT,
    FREEZE_THAW_FIT_SLOPE, FREEZE_THAW_SLOPE,
};
use chloride_core::grid::{rasterize, Material, MaterialGrid};
use chloride_core::io::{write_grid, write_mesostructure, ArtifactHeader};
use chloride_core::mesostructure::{build_mesostructure, MesoConfig};
use chloride_core::oracle::{erf_profile, erf_profile_tau, fd1d_reference, integrated_diffusivity, FickQuery};
use chloride_core::solver::{run_simulation, DiffusionSolver, SolverConfig};
use rand::{Rng, SeedableRng};

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, passed: bool, id: &str, text: String) {
        if !passed {
            self.failures += 1;
        }
        println!("[{}] {id}: {text}", if passed { "PASS" } else { "FAIL" });
    }
}

const CS: f64 = 0.37;

fn girder() -> ExposureScenario {
    ExposureScenario::girder()
}

/// Girder coefficients with depth-uniform diffusivity and a step surface.
fn time_only(aging: bool) -> ExposureScenario {
    let mut s = ExposureScenario {
        carbonation: CarbonationModel::uniform(1.0),
        surface: SurfaceChlorideModel::instantaneous(CS),
        ..girder()
    };
    if !aging {
        s.aging.decay_index = 0.0;
    }
    s
}

fn strip(width: f64, height: f64, h: f64) -> Arc<MaterialGrid> {
    let nx = (width / h).round() as usize;
    let ny = (height / h).round() as usize;
    Arc::new(MaterialGrid::uniform(nx, ny, h, Material::Mortar).unwrap())
}

fn solver_cfg(dt: f64, end: f64) -> SolverConfig {
    SolverConfig {
        time_step: dt,
        end_time: end,
        output_times: vec![end],
        ..SolverConfig::default()
    }
}

fn criterion_1(r: &mut Report) {
    let d = carbonation_depth(&CarbonationModel::default(), 27.0).unwrap();
    r.line((d - 19.0).abs() <= 0.01, "1 carbonation depth", format!("x_c(27 yr) = {d:.4} mm, expected 19.00 +/- 0.01"));
}

fn criterion_2(r: &mut Report) {
    let kf = freeze_thaw_factor(8.1);
    let slope_gap = (FREEZE_THAW_SLOPE - FREEZE_THAW_FIT_SLOPE / FREEZE_THAW_FIT_INTERCEPT).abs();
    let at = |wc: f64| construction_factor(&MixDesign { water_cement_ratio: wc });
    let kk = at(0.5);
    let left = at(0.5 - 1e-9);
    let right = at(0.5 + 1e-9);
    let kt = temperature_factor(&ThermalEnvironment::default(), 5175.25).unwrap();
    let deviation = (kt - 0.3808).abs() / 0.3808;
    let passed = (kf - 1.15947).abs() <= 1e-4
        && slope_gap <= 1e-6
        && kk == 4.0
        && (left - 4.0).abs() < 1e-6
        && right == 4.0
        && (kt - 0.3736).abs() <= 5e-4
        && deviation <= 0.025;
    r.line(
        passed,
        "2 factor golden values",
        format!(
            "k_F(8.1) = {kf:.6}; slope gap {slope_gap:.2e}; k_k(0.5) = {kk}, k_k(0.5-1e-9) = {left:.9}; \
             k_T = {kt:.6} (tabulated 0.3808, deviation {:.2} %)",
            100.0 * deviation
        ),
    );
}

/// L-inf gap between the 1D reference and erf, relative to the surface value.
fn erf_gap(scenario: &ExposureScenario, t: f64) -> f64 {
    let column = fd1d_reference(scenario, 800.0, 1.0, 0.05, t).unwrap();
    let tau = integrated_diffusivity(scenario, t, 0.0).unwrap();
    column
        .depths
        .iter()
        .zip(&column.concentrations)
        .map(|(x, c)| (c - erf_profile_tau(0.0, CS, tau, *x)).abs())
        .fold(0.0, f64::max)
        / CS
}

fn criterion_3(r: &mut Report) {
    let start = Instant::now();
    let constant = time_only(false);
    let gap_c = erf_gap(&constant, 27.0);
    let d = constant.resolve().unwrap().effective_diffusivity(1.0, 0.0).unwrap();
    // erf_profile with D·t must agree with the τ form for constant D.
    let direct = erf_profile(&FickQuery {
        initial_concentration: 0.0,
        surface_concentration: CS,
        diffusivity: d,
        age: 27.0,
        depth: 40.0,
    });
    let via_tau = erf_profile_tau(0.0, CS, integrated_diffusivity(&constant, 27.0, 0.0).unwrap(), 40.0);
    let t_c = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let gap_v = erf_gap(&time_only(true), 27.0);
    let t_v = start.elapsed().as_secs_f64();
    r.line(
        gap_c < 0.01 && gap_v < 0.01 && (direct - via_tau).abs() < 1e-9 && t_c < 10.0 && t_v < 10.0,
        "3 oracle ladder",
        format!(
            "constant D {d:.3} mm2/yr: L-inf {:.4} % of C_s ({t_c:.2} s); aging D: {:.4} % of C_s ({t_v:.2} s); limit 1 %",
            100.0 * gap_c,
            100.0 * gap_v
        ),
    );
}

fn criterion_4(r: &mut Report) {
    let start = Instant::now();
    let scenario = girder();
    let grid = strip(300.0, 200.0, 1.0);
    let field = run_simulation(grid.clone(), &scenario, &solver_cfg(0.05, 27.0)).unwrap().pop().unwrap();
    let column = fd1d_reference(&scenario, 200.0, 1.0, 0.05, 27.0).unwrap();
    let cs = scenario.resolve().unwrap().surface_concentration(27.0);
    let mut worst: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            worst = worst.max((field.value(i, j) - column.concentrations[j]).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        worst / cs < 0.005 && secs < 60.0,
        "4 2D/1D equivalence",
        format!("300x200 mm at h = 1 mm, 27 yr: max column gap {:.3e} % of C_s; {secs:.1} s (limit 0.5 %, 60 s)", 100.0 * worst / cs),
    );
}

struct MesoRun {
    violations_upper: usize,
    violations_lower: usize,
    violations_monotone: usize,
    worst_excess: f64,
    worst_decrease: f64,
    steps: usize,
    profiles: Vec<DepthProfile>,
    duct_depth: f64,
    seconds: f64,
}

fn default_mesoscale_run() -> MesoRun {
    let start = Instant::now();
    let meso_cfg = MesoConfig::default();
    let meso = build_mesostructure(&meso_cfg).unwrap();
    let grid = Arc::new(rasterize(&meso, 1.0).unwrap());
    let scenario = girder();
    let cfg = SolverConfig::default();
    let solver = DiffusionSolver::new(grid.clone(), &scenario, &cfg).unwrap();
    let resolved = scenario.resolve().unwrap();
    let active: Vec<usize> = (0..grid.len()).filter(|&k| grid.codes[k].is_active()).collect();
    let mut previous = solver.initial_field().values;
    let mut run = MesoRun {
        violations_upper: 0,
        violations_lower: 0,
        violations_monotone: 0,
        worst_excess: f64::NEG_INFINITY,
        worst_decrease: 0.0,
        steps: 0,
        profiles: Vec::new(),
        duct_depth: meso_cfg.duct.unwrap().shallowest_depth(),
        seconds: 0.0,
    };
    let fields = solver
        .run(|field, _| {
            let cap = resolved.surface_concentration(field.time);
            for &k in &active {
                let v = field.values[k];
                run.worst_excess = run.worst_excess.max(v - cap);
                if v > cap + 1e-9 {
                    run.violations_upper += 1;
                }
                if v < -1e-9 {
                    run.violations_lower += 1;
                }
                let drop = previous[k] - v;
                run.worst_decrease = run.worst_decrease.max(drop);
                if drop > 1e-9 {
                    run.violations_monotone += 1;
                }
                previous[k] = v;
            }
            run.steps += 1;
        })
        .unwrap();
    run.profiles = fields.iter().map(|f| depth_max_profile(f).unwrap()).collect();
    run.seconds = start.elapsed().as_secs_f64();
    run
}

fn criterion_5(r: &mut Report, run: &MesoRun) {
    let passed = run.violations_upper == 0 && run.violations_lower == 0 && run.violations_monotone == 0;
    r.line(
        passed,
        "5 maximum principle and monotonicity",
        format!(
            "{} steps over 50 yr ({:.1} s): {} cells above C_s(t) (worst excess {:.2e}), {} below 0, {} decreases (worst {:.2e})",
            run.steps,
            run.seconds,
            run.violations_upper,
            run.worst_excess,
            run.violations_lower,
            run.violations_monotone,
            run.worst_decrease
        ),
    );
}

fn criterion_6(r: &mut Report) {
    let mut notes = Vec::new();
    let mut passed = true;
    for seed in 0..10u64 {
        let cfg = MesoConfig {
            seed,
            ..MesoConfig::default()
        };
        let meso = match build_mesostructure(&cfg) {
            Ok(m) => m,
            Err(e) => {
                passed = false;
                notes.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let residual = meso.aggregates.iter().map(|a| a.inscription_residual()).fold(0.0, f64::max);
        let convex = meso.aggregates.iter().all(|a| a.is_convex());
        let fraction_ok = (meso.achieved_area_fraction - 0.45).abs() <= 0.02;
        let header = ArtifactHeader::new("acceptance", seed);
        let again = build_mesostructure(&cfg).unwrap();
        let grid_a = rasterize(&meso, 1.0).unwrap();
        let grid_b = rasterize(&again, 1.0).unwrap();
        let identical = write_mesostructure(&meso, &header) == write_mesostructure(&again, &header)
            && write_grid(&grid_a, &header) == write_grid(&grid_b, &header);
        let ok = meso.separation_holds() && convex && residual < 1e-9 && fraction_ok && identical;
        passed &= ok;
        if !ok || seed == 0 {
            notes.push(format!(
                "seed {seed}: {} polygons, fraction {:.4}, residual {residual:.1e}, identical {identical}",
                meso.aggregates.len(),
                meso.achieved_area_fraction
            ));
        }
    }
    r.line(passed, "6 packing invariants (10 seeds)", notes.join("; "));
}

fn profile_on_strip(h: f64, dt: f64) -> Vec<(f64, f64)> {
    let grid = strip(10.0, 200.0, h);
    let field = run_simulation(grid.clone(), &girder(), &solver_cfg(dt, 27.0)).unwrap().pop().unwrap();
    let p = depth_max_profile(&field).unwrap();
    p.depths.into_iter().zip(p.max_concentration).collect()
}

fn relative_linf(coarse: &[(f64, f64)], fine: &[(f64, f64)]) -> f64 {
    let interp = |x: f64| -> f64 {
        let k = fine.partition_point(|p| p.0 <= x).clamp(1, fine.len() - 1);
        let (x0, y0) = fine[k - 1];
        let (x1, y1) = fine[k];
        y0 + (x - x0) / (x1 - x0) * (y1 - y0)
    };
    let scale = fine.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    coarse.iter().map(|(x, y)| (y - interp(*x)).abs()).fold(0.0, f64::max) / scale
}

fn criterion_7(r: &mut Report) {
    let h2 = profile_on_strip(2.0, 0.05);
    let h1 = profile_on_strip(1.0, 0.05);
    let half_dt = profile_on_strip(1.0, 0.025);
    let space = relative_linf(&h2, &h1);
    let time = relative_linf(&h1, &half_dt);
    r.line(
        space < 0.02 && time < 0.005,
        "7 grid convergence",
        format!(
            "h 2 -> 1 mm: {:.3} % (limit 2 %); dt 0.05 -> 0.025 yr: {:.3} % (limit 0.5 %)",
            100.0 * space,
            100.0 * time
        ),
    );
}

fn criterion_8(r: &mut Report, run: &MesoRun) {
    let at = |year: f64| {
        run.profiles
            .iter()
            .find(|p| p.time == year)
            .map(|p| p.nearest(run.duct_depth).unwrap())
    };
    let threshold = 0.06;
    let (Some(v27), Some(v50)) = (at(27.0), at(50.0)) else {
        r.line(false, "8 field-claim soft checks", "years 27 and 50 missing from the outputs".into());
        return;
    };
    let verdict = |ok: bool| if ok { "agrees" } else { "does not agree" };
    r.line(
        true,
        "8 field-claim soft checks (reported, non-gating)",
        format!(
            "depth {:.1} mm: year 27 max {v27:.5} % vs threshold {threshold} (ratio {:.3}, {} with 'has reached'); \
             year 50 max {v50:.5} % vs 3x threshold (ratio {:.3}, {} with 'more than 3 times')",
            run.duct_depth,
            v27 / threshold,
            verdict(v27 >= threshold),
            v50 / threshold,
            verdict(v50 > 3.0 * threshold)
        ),
    );
}

fn criterion_9(r: &mut Report) {
    let base = TitrationRecord {
        depth: 5.0,
        silver_nitrate_titer: 1.0,
        titrant_volume: 2.0,
        water_volume: 250.0,
        extract_volume: 20.0,
        powder_mass: 10.0,
    };
    let worked = titration_concentration(&base).unwrap();
    let worked_err = (worked - 0.25).abs() / 0.25;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let rec = TitrationRecord {
            depth: 0.0,
            silver_nitrate_titer: rng.random_range(0.1..5.0),
            titrant_volume: rng.random_range(0.1..20.0),
            water_volume: rng.random_range(1.0..500.0),
            extract_volume: rng.random_range(1.0..50.0),
            powder_mass: rng.random_range(0.5..50.0),
        };
        let k: f64 = rng.random_range(0.1..10.0);
        let c = titration_concentration(&rec).unwrap();
        let cases = [
            (TitrationRecord { silver_nitrate_titer: k * rec.silver_nitrate_titer, ..rec }, k * c),
            (TitrationRecord { titrant_volume: k * rec.titrant_volume, ..rec }, k * c),
            (TitrationRecord { water_volume: k * rec.water_volume, ..rec }, k * c),
            (TitrationRecord { powder_mass: k * rec.powder_mass, ..rec }, c / k),
            (TitrationRecord { extract_volume: k * rec.extract_volume, ..rec }, c / k),
        ];
        for (scaled, expected) in cases {
            let v = titration_concentration(&scaled).unwrap();
            worst = worst.max((v - expected).abs() / expected);
        }
    }
    r.line(
        worked_err <= 1e-12 && worst <= 1e-12,
        "9 titration ingestion",
        format!("worked example {worked} % (rel. error {worked_err:.1e}); worst linearity error {worst:.1e} over 1000 draws"),
    );
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    let run = default_mesoscale_run();
    criterion_5(&mut r, &run);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r, &run);
    criterion_9(&mut r);
    if r.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", r.failures);
        ExitCode::FAILURE
    }
}
