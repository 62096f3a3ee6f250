use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chloride_core::analysis::{
    compare_profiles, depth_max_profile, time_to_threshold, DepthProfile, MeasuredProfile, ThresholdCrossing,
};
use chloride_core::config::{ComparisonBasis, RunConfig};
use chloride_core::grid::{rasterize, MaterialGrid};
use chloride_core::io::{self, ArtifactHeader};
use chloride_core::mesostructure::{build_mesostructure, Mesostructure};
use chloride_core::oracle::{erf_profile_tau, fd1d_reference_with, integrated_diffusivity};
use chloride_core::solver::{run_simulation, ConcentrationField};
use chloride_core::validation::run_ladder;
use chloride_core::{Error, Result};

fn header(cfg: &RunConfig) -> ArtifactHeader {
    ArtifactHeader::new(cfg.hash(), cfg.geometry.seed)
}

fn time_tag(t: f64) -> String {
    format!("t{t:.2}")
}

fn write(out: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = out.join(name);
    io::write_file(&path, contents)?;
    Ok(path)
}

fn build(cfg: &RunConfig, out: &Path) -> Result<(Mesostructure, MaterialGrid)> {
    let meso = build_mesostructure(&cfg.meso_config())?;
    let grid = rasterize(&meso, cfg.solver.h_mm)?;
    let h = header(cfg);
    write(out, "config.toml", &cfg.to_toml_string())?;
    write(out, "mesostructure.txt", &io::write_mesostructure(&meso, &h))?;
    write(out, "grid.csv", &io::write_grid(&grid, &h))?;
    println!(
        "mesostructure: {} aggregates, area fraction {:.4} (target {:.4}), grid {}x{} at {} mm",
        meso.aggregates.len(),
        meso.achieved_area_fraction,
        meso.target_fraction,
        grid.nx,
        grid.ny,
        grid.h
    );
    Ok((meso, grid))
}

pub fn generate(cfg: &RunConfig, out: &Path) -> Result<()> {
    build(cfg, out).map(|_| ())
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let (_, grid) = build(cfg, out)?;
    let fields = run_simulation(Arc::new(grid), &cfg.scenario(), &cfg.solver_config())?;
    let h = header(cfg);
    for f in &fields {
        let tag = time_tag(f.time);
        write(out, &format!("field_{tag}.csv"), &io::write_field(f, &h))?;
        write(out, &format!("field_{tag}.vtk"), &io::write_vtk(f, &h))?;
    }
    println!("simulate: wrote {} field dumps to {}", fields.len(), out.display());
    Ok(())
}

fn load_fields(input: &Path) -> Result<Vec<ConcentrationField>> {
    let entries = std::fs::read_dir(input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("field_t") && n.ends_with(".csv"))
        })
        .collect();
    paths.sort();
    let mut fields = paths
        .iter()
        .map(|p| io::parse_field(&io::read_file(p)?).map(|f| f.field))
        .collect::<Result<Vec<_>>>()?;
    if fields.is_empty() {
        return Err(Error::EmptyField);
    }
    fields.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(fields)
}

fn threshold_report(cfg: &RunConfig, profiles: &[DepthProfile], depths: &[f64]) -> Result<String> {
    let threshold = cfg.analysis.threshold_percent;
    let mut out = String::new();
    header_block(cfg, &mut out);
    out.push_str("depth_mm,threshold_percent,status,year,final_value_percent\n");
    for &d in depths {
        match time_to_threshold(profiles, d, threshold)? {
            ThresholdCrossing::Reached { time } => {
                let _ = writeln!(out, "{d},{threshold},reached,{time},");
                println!("depth {d} mm: reaches {threshold} % at year {time:.2}");
            }
            ThresholdCrossing::NotReached { final_value } => {
                let _ = writeln!(out, "{d},{threshold},not_reached,,{final_value}");
                println!("depth {d} mm: below {threshold} % through the last output ({final_value:.5} %)");
            }
        }
    }
    Ok(out)
}

fn header_block(cfg: &RunConfig, out: &mut String) {
    header(cfg).write_to(out);
}

fn measured(cfg: &RunConfig) -> Result<Option<MeasuredProfile>> {
    let a = &cfg.analysis;
    let mut points = Vec::new();
    let mut any = false;
    if let Some(p) = &a.measured_profile {
        points.extend(io::parse_measured_profile(&io::read_file(p)?)?.points);
        any = true;
    }
    if let Some(p) = &a.titration {
        let records = io::parse_titration(&io::read_file(p)?)?;
        points.extend(MeasuredProfile::from_titration(&records)?.points);
        any = true;
    }
    if !any {
        return Ok(None);
    }
    MeasuredProfile::new(points).map(Some)
}

pub fn profile(cfg: &RunConfig, input: &Path, out: &Path) -> Result<()> {
    let fields = load_fields(input)?;
    let profiles = fields.iter().map(depth_max_profile).collect::<Result<Vec<_>>>()?;
    let h = header(cfg);
    for p in &profiles {
        write(out, &format!("profile_{}.csv", time_tag(p.time)), &io::write_depth_profile(p, &h))?;
    }
    let report = threshold_report(cfg, &profiles, &cfg.probe_depths())?;
    write(out, "threshold.csv", &report)?;

    if let Some(m) = measured(cfg)? {
        let age = cfg.analysis.measured_age_years;
        let model = profiles
            .iter()
            .min_by(|a, b| (a.time - age).abs().total_cmp(&(b.time - age).abs()))
            .expect("at least one profile");
        let (model, basis) = match cfg.analysis.compare_basis {
            ComparisonBasis::Free => (model.to_free(&cfg.scenario().binding), "free"),
            ComparisonBasis::Total => (model.clone(), "total"),
        };
        let c = compare_profiles(&model, &m)?;
        let mut text = String::new();
        header_block(cfg, &mut text);
        text.push_str("time_years,basis,points,rmse_percent,max_abs_error_percent,bias_percent\n");
        let _ = writeln!(text, "{},{basis},{},{},{},{}", model.time, c.points, c.rmse, c.max_abs_error, c.bias);
        write(out, "comparison.csv", &text)?;
        println!(
            "comparison at year {} ({basis} chloride, {} points): rmse {:.5} %, max {:.5} %, bias {:+.5} %",
            model.time, c.points, c.rmse, c.max_abs_error, c.bias
        );
    }
    Ok(())
}

pub fn predict(cfg: &RunConfig, depths: &[f64], out: &Path) -> Result<()> {
    let depths = if depths.is_empty() { cfg.probe_depths() } else { depths.to_vec() };
    if depths.is_empty() {
        return Err(Error::Config("predict needs probe depths (--depths or analysis.probe_depths_mm)".into()));
    }
    let scenario = cfg.scenario();
    let resolved = scenario.resolve()?;
    let s = &cfg.solver;
    let end = s.end_time_years;
    let mut years: Vec<f64> = (1..=end.floor() as usize).map(|y| y as f64).collect();
    if years.last().is_none_or(|y| *y < end) && end > 0.0 {
        years.push(end);
    }

    let mut table = String::new();
    header_block(cfg, &mut table);
    table.push_str("year,depth_mm,fd1d_percent,erf_estimate_percent\n");
    let mut profiles = Vec::with_capacity(years.len());
    for &t in &years {
        let column = fd1d_reference_with(
            &scenario,
            cfg.geometry.height_mm,
            s.h_mm,
            s.time_step_years,
            t,
            s.startup_duration_years,
            s.startup_refinement,
        )?;
        let cs = resolved.surface_concentration(t);
        let c0 = resolved.surface.initial_surface_concentration;
        for &d in &depths {
            let tau = integrated_diffusivity(&scenario, t, d)?;
            let _ = writeln!(table, "{t},{d},{},{}", column.at(d), erf_profile_tau(c0, cs, tau, d));
        }
        profiles.push(DepthProfile {
            depths: column.depths,
            max_concentration: column.concentrations,
            time: t,
            skipped_depths: Vec::new(),
        });
    }
    write(out, "prediction.csv", &table)?;
    if profiles.is_empty() {
        println!("predict: end time 0, nothing to report");
        return Ok(());
    }
    let report = threshold_report(cfg, &profiles, &depths)?;
    write(out, "prediction_threshold.csv", &report)?;
    Ok(())
}

pub fn validate(cfg: &RunConfig) -> Result<bool> {
    let checks = run_ladder(cfg)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut all = true;
    for c in &checks {
        all &= c.passed;
        println!(
            "[{}] {:<width$}  measured {:.3e}  tolerance {:.1e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance
        );
    }
    println!("{} of {} checks passed", checks.iter().filter(|c| c.passed).count(), checks.len());
    Ok(all)
}
