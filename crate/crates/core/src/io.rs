//! Text artifacts: writers are byte-deterministic, readers reject malformed
//! input with a line number instead of panicking.
//!
//! Every artifact starts with `# key value` comment lines carrying at least
//! `tool`, `config_hash` and `seed` (the legacy VTK format keeps them in its
//! title line instead).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::analysis::{DepthProfile, MeasuredProfile, TitrationRecord};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::{Material, MaterialGrid};
use crate::mesostructure::{CircleAggregate, DomainRect, Mesostructure, PolygonAggregate, TendonDuct};
use crate::oracle::ColumnProfile;
use crate::solver::ConcentrationField;

pub const TOOL_NAME: &str = "chloride";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Upper bound on cells accepted by the grid and field readers.
pub const MAX_CELLS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactHeader {
    pub tool: String,
    pub config_hash: String,
    pub seed: u64,
}

impl ArtifactHeader {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Self {
            tool: format!("{TOOL_NAME} {TOOL_VERSION}"),
            config_hash: config_hash.into(),
            seed,
        }
    }

    /// Appends the `# key value` block.
    pub fn write_to(&self, out: &mut String) {
        let _ = writeln!(out, "# tool {}", self.tool);
        let _ = writeln!(out, "# config_hash {}", self.config_hash);
        let _ = writeln!(out, "# seed {}", self.seed);
    }

    fn from_comments(c: &Comments) -> Option<Self> {
        Some(Self {
            tool: c.get("tool")?.to_string(),
            config_hash: c.get("config_hash")?.to_string(),
            seed: c.get("seed")?.parse().ok()?,
        })
    }

    fn one_line(&self) -> String {
        format!("{} config_hash={} seed={}", self.tool, self.config_hash, self.seed)
    }
}

/// Leading `# key value` lines of a text artifact.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Comments {
    entries: BTreeMap<String, String>,
}

impl Comments {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| parse_finite(v, 0, key))
            .transpose()
    }
}

/// Splits off the leading `#` block; returns it with the remaining non-blank,
/// non-comment lines tagged by 1-based line number.
fn split_comments(text: &str) -> (Comments, Vec<(usize, &str)>) {
    let mut comments = Comments::default();
    let mut body = Vec::new();
    let mut in_header = true;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if in_header {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                let (key, value) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                if !key.is_empty() {
                    comments.entries.insert(key.to_string(), value.trim().to_string());
                }
                continue;
            }
            in_header = false;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        body.push((k + 1, line));
    }
    (comments, body)
}

fn parse_finite(token: &str, line: usize, what: &str) -> Result<f64> {
    match token.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("{what}: expected a finite number, got `{token}`"))),
    }
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize> {
    token
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::parse(line, format!("{what}: expected a non-negative integer, got `{token}`")))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------- mesostructure

/// Record format, one item per line:
///
/// ```text
/// domain <width> <height>
/// itz_width <mm>
/// eta <coefficient>
/// target_fraction <fraction>
/// duct <cx> <cy> <diameter>
/// polygon <cx> <cy> <r> <n> <x1> <y1> ... <xn> <yn>
/// ```
pub fn write_mesostructure(meso: &Mesostructure, header: &ArtifactHeader) -> String {
    let mut out = String::new();
    header.write_to(&mut out);
    let _ = writeln!(out, "# achieved_fraction {}", meso.achieved_area_fraction);
    let _ = writeln!(out, "# aggregates {}", meso.aggregates.len());
    let _ = writeln!(out, "domain {} {}", meso.domain.width, meso.domain.height);
    let _ = writeln!(out, "itz_width {}", meso.itz_width);
    let _ = writeln!(out, "eta {}", meso.eta);
    let _ = writeln!(out, "target_fraction {}", meso.target_fraction);
    if let Some(d) = &meso.duct {
        let _ = writeln!(out, "duct {} {} {}", d.center.x, d.center.y, d.diameter);
    }
    for a in &meso.aggregates {
        let c = a.circumscribed;
        let _ = write!(out, "polygon {} {} {} {}", c.center.x, c.center.y, c.radius, a.vertices.len());
        for v in &a.vertices {
            let _ = write!(out, " {} {}", v.x, v.y);
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MesostructureFile {
    pub header: Option<ArtifactHeader>,
    pub mesostructure: Mesostructure,
}

pub fn parse_mesostructure(text: &str) -> Result<MesostructureFile> {
    let (comments, body) = split_comments(text);
    let header = ArtifactHeader::from_comments(&comments);
    let mut domain = None;
    let mut itz_width = 0.0;
    let mut eta = 1.0;
    let mut target_fraction = 0.0;
    let mut duct = None;
    let mut aggregates = Vec::new();

    for (ln, line) in body {
        let mut tok = line.split_whitespace();
        let kind = tok.next().unwrap_or("");
        let nums: Vec<&str> = tok.collect();
        let num = |k: usize, what: &str| -> Result<f64> {
            nums.get(k)
                .ok_or_else(|| Error::parse(ln, format!("{kind}: missing {what}")))
                .and_then(|t| parse_finite(t, ln, what))
        };
        let expect_len = |n: usize| -> Result<()> {
            if nums.len() != n {
                return Err(Error::parse(ln, format!("{kind}: expected {n} values, got {}", nums.len())));
            }
            Ok(())
        };
        match kind {
            "domain" => {
                expect_len(2)?;
                let d = DomainRect::new(num(0, "width")?, num(1, "height")?)
                    .map_err(|e| Error::parse(ln, e.to_string()))?;
                domain = Some(d);
            }
            "itz_width" => {
                expect_len(1)?;
                itz_width = num(0, "itz_width")?;
                if itz_width < 0.0 {
                    return Err(Error::parse(ln, "itz_width must be >= 0"));
                }
            }
            "eta" => {
                expect_len(1)?;
                eta = num(0, "eta")?;
            }
            "target_fraction" => {
                expect_len(1)?;
                target_fraction = num(0, "target_fraction")?;
            }
            "duct" => {
                expect_len(3)?;
                let diameter = num(2, "diameter")?;
                if !(diameter > 0.0) {
                    return Err(Error::parse(ln, "duct diameter must be > 0"));
                }
                duct = Some(TendonDuct {
                    center: Point::new(num(0, "cx")?, num(1, "cy")?),
                    diameter,
                });
            }
            "polygon" => {
                let radius = num(2, "r")?;
                if !(radius > 0.0) {
                    return Err(Error::parse(ln, "polygon radius must be > 0"));
                }
                let n = nums
                    .get(3)
                    .ok_or_else(|| Error::parse(ln, "polygon: missing vertex count"))
                    .and_then(|t| parse_usize(t, ln, "vertex count"))?;
                if n < 3 {
                    return Err(Error::parse(ln, "polygon needs at least 3 vertices"));
                }
                if n.checked_mul(2) != Some(nums.len() - 4) {
                    return Err(Error::parse(
                        ln,
                        format!("polygon: {n} vertices need twice as many coordinates, got {}", nums.len() - 4),
                    ));
                }
                let vertices = (0..n)
                    .map(|k| Ok(Point::new(num(4 + 2 * k, "x")?, num(5 + 2 * k, "y")?)))
                    .collect::<Result<Vec<_>>>()?;
                let poly = PolygonAggregate {
                    vertices,
                    circumscribed: CircleAggregate {
                        center: Point::new(num(0, "cx")?, num(1, "cy")?),
                        radius,
                    },
                };
                if !poly.is_convex() {
                    return Err(Error::parse(ln, "polygon is not convex and counter-clockwise"));
                }
                aggregates.push(poly);
            }
            other => return Err(Error::parse(ln, format!("unknown record `{other}`"))),
        }
    }

    let domain = domain.ok_or_else(|| Error::parse(0, "missing `domain` record"))?;
    let mut meso = Mesostructure {
        domain,
        aggregates,
        itz_width,
        duct,
        seed: header.as_ref().map_or(0, |h| h.seed),
        eta,
        target_fraction,
        achieved_area_fraction: 0.0,
    };
    meso.achieved_area_fraction = meso.polygon_area_fraction();
    Ok(MesostructureFile {
        header,
        mesostructure: meso,
    })
}

// ---------------------------------------------------------------- material grid

/// `nx,ny,h` followed by `ny` rows of `nx` material codes, surface row first.
pub fn write_grid(grid: &MaterialGrid, header: &ArtifactHeader) -> String {
    let mut out = String::with_capacity(grid.len() * 2 + 256);
    header.write_to(&mut out);
    let _ = writeln!(
        out,
        "# codes mortar={} aggregate={} itz={} duct={}",
        Material::Mortar.code(),
        Material::Aggregate.code(),
        Material::Itz.code(),
        Material::Duct.code()
    );
    out.push_str("nx,ny,h\n");
    let _ = writeln!(out, "{},{},{}", grid.nx, grid.ny, grid.h);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if i > 0 {
                out.push(',');
            }
            out.push(char::from(b'0' + grid.get(i, j).code()));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub header: Option<ArtifactHeader>,
    pub grid: MaterialGrid,
}

fn checked_cells(nx: usize, ny: usize, line: usize) -> Result<usize> {
    match nx.checked_mul(ny) {
        Some(n) if n > 0 && n <= MAX_CELLS => Ok(n),
        _ => Err(Error::parse(line, format!("grid size {nx}x{ny} out of range"))),
    }
}

fn parse_material(token: &str, line: usize) -> Result<Material> {
    token
        .trim()
        .parse::<u8>()
        .ok()
        .and_then(Material::from_code)
        .ok_or_else(|| Error::parse(line, format!("unknown material code `{token}`")))
}

pub fn parse_grid(text: &str) -> Result<GridFile> {
    let (comments, body) = split_comments(text);
    let mut lines = body.into_iter();
    match lines.next() {
        Some((_, l)) if l.replace(' ', "") == "nx,ny,h" => {}
        Some((ln, _)) => return Err(Error::parse(ln, "expected `nx,ny,h` header")),
        None => return Err(Error::parse(0, "empty grid file")),
    }
    let (ln, dims) = lines.next().ok_or_else(|| Error::parse(0, "missing grid dimensions"))?;
    let parts: Vec<&str> = dims.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::parse(ln, "expected `nx,ny,h`"));
    }
    let nx = parse_usize(parts[0], ln, "nx")?;
    let ny = parse_usize(parts[1], ln, "ny")?;
    let h = parse_finite(parts[2], ln, "h")?;
    checked_cells(nx, ny, ln)?;
    let mut codes = Vec::new();
    let mut rows = 0;
    for (ln, line) in lines {
        if rows == ny {
            return Err(Error::parse(ln, format!("more than {ny} rows")));
        }
        let before = codes.len();
        for t in line.split(',') {
            codes.push(parse_material(t, ln)?);
            if codes.len() - before > nx {
                break;
            }
        }
        if codes.len() - before != nx {
            return Err(Error::parse(ln, format!("expected {nx} codes in row")));
        }
        rows += 1;
    }
    if rows != ny {
        return Err(Error::parse(0, format!("expected {ny} rows, got {rows}")));
    }
    let grid = MaterialGrid::from_codes(nx, ny, h, codes).map_err(|e| Error::parse(ln, e.to_string()))?;
    Ok(GridFile {
        header: ArtifactHeader::from_comments(&comments),
        grid,
    })
}

// ---------------------------------------------------------------- fields

pub const FIELD_COLUMNS: &str = "x_mm,y_mm,material_code,concentration_percent";

/// One row per cell, surface row first. Inactive cells carry their stored
/// value (the initial one).
pub fn write_field(field: &ConcentrationField, header: &ArtifactHeader) -> String {
    let g = &field.grid;
    let mut out = String::with_capacity(g.len() * 32 + 256);
    header.write_to(&mut out);
    let _ = writeln!(out, "# time_years {}", field.time);
    let _ = writeln!(out, "# grid {} {} {}", g.nx, g.ny, g.h);
    out.push_str(FIELD_COLUMNS);
    out.push('\n');
    for j in 0..g.ny {
        for i in 0..g.nx {
            let p = g.cell_center(i, j);
            let _ = writeln!(out, "{},{},{},{}", p.x, p.y, g.get(i, j).code(), field.value(i, j));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub header: Option<ArtifactHeader>,
    pub field: ConcentrationField,
}

pub fn parse_field(text: &str) -> Result<FieldFile> {
    let (comments, body) = split_comments(text);
    let time = comments
        .parse_f64("time_years")?
        .ok_or_else(|| Error::parse(0, "missing `# time_years` header"))?;
    let grid_spec = comments
        .get("grid")
        .ok_or_else(|| Error::parse(0, "missing `# grid nx ny h` header"))?;
    let parts: Vec<&str> = grid_spec.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(Error::parse(0, "`# grid` expects nx ny h"));
    }
    let nx = parse_usize(parts[0], 0, "nx")?;
    let ny = parse_usize(parts[1], 0, "ny")?;
    let h = parse_finite(parts[2], 0, "h")?;
    let n = checked_cells(nx, ny, 0)?;

    let mut lines = body.into_iter();
    match lines.next() {
        Some((_, l)) if l.replace(' ', "") == FIELD_COLUMNS => {}
        Some((ln, _)) => return Err(Error::parse(ln, format!("expected `{FIELD_COLUMNS}` header"))),
        None => return Err(Error::parse(0, "missing column header")),
    }
    let mut codes = Vec::new();
    let mut values = Vec::new();
    for (ln, line) in lines {
        if values.len() == n {
            return Err(Error::parse(ln, format!("more than {n} cells")));
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::parse(ln, "expected 4 columns"));
        }
        let k = values.len();
        let (i, j) = (k % nx, k / nx);
        let x = parse_finite(cols[0], ln, "x_mm")?;
        let y = parse_finite(cols[1], ln, "y_mm")?;
        let expected = Point::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
        if (x - expected.x).abs() > 1e-6 * h.abs().max(1.0) || (y - expected.y).abs() > 1e-6 * h.abs().max(1.0) {
            return Err(Error::parse(ln, format!("cell ({i}, {j}) expected at ({}, {})", expected.x, expected.y)));
        }
        codes.push(parse_material(cols[2], ln)?);
        values.push(parse_finite(cols[3], ln, "concentration_percent")?);
    }
    if values.len() != n {
        return Err(Error::parse(0, format!("expected {n} cells, got {}", values.len())));
    }
    let grid = MaterialGrid::from_codes(nx, ny, h, codes).map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(FieldFile {
        header: ArtifactHeader::from_comments(&comments),
        field: ConcentrationField {
            grid: Arc::new(grid),
            values,
            time,
        },
    })
}

/// Legacy ASCII VTK structured points with material and concentration as
/// cell data.
pub fn write_vtk(field: &ConcentrationField, header: &ArtifactHeader) -> String {
    let g = &field.grid;
    let mut out = String::with_capacity(g.len() * 24 + 512);
    out.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(out, "{} time_years={}", header.one_line(), field.time);
    out.push_str("ASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(out, "DIMENSIONS {} {} 1", g.nx + 1, g.ny + 1);
    out.push_str("ORIGIN 0 0 0\n");
    let _ = writeln!(out, "SPACING {} {} 1", g.h, g.h);
    let _ = writeln!(out, "CELL_DATA {}", g.len());
    out.push_str("SCALARS material_code int 1\nLOOKUP_TABLE default\n");
    for m in &g.codes {
        let _ = writeln!(out, "{}", m.code());
    }
    out.push_str("SCALARS concentration_percent double 1\nLOOKUP_TABLE default\n");
    for v in &field.values {
        let _ = writeln!(out, "{v}");
    }
    out
}

// ---------------------------------------------------------------- profiles

pub fn write_depth_profile(profile: &DepthProfile, header: &ArtifactHeader) -> String {
    let mut out = String::new();
    header.write_to(&mut out);
    let _ = writeln!(out, "# time_years {}", profile.time);
    if !profile.skipped_depths.is_empty() {
        let skipped: Vec<String> = profile.skipped_depths.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "# skipped_depths_mm {}", skipped.join(" "));
    }
    out.push_str("depth_mm,max_concentration_percent\n");
    for (d, c) in profile.depths.iter().zip(&profile.max_concentration) {
        let _ = writeln!(out, "{d},{c}");
    }
    out
}

pub fn write_column_profile(profile: &ColumnProfile, header: &ArtifactHeader) -> String {
    let mut out = String::new();
    header.write_to(&mut out);
    let _ = writeln!(out, "# time_years {}", profile.time);
    out.push_str("depth_mm,concentration_percent\n");
    for (d, c) in profile.depths.iter().zip(&profile.concentrations) {
        let _ = writeln!(out, "{d},{c}");
    }
    out
}

// ---------------------------------------------------------------- measurements

#[derive(Debug, Deserialize)]
struct MeasuredRow {
    depth_mm: f64,
    free_chloride_percent: f64,
}

#[derive(Debug, Deserialize)]
struct TitrationRow {
    depth_mm: f64,
    titer_mg_per_ml: f64,
    titrant_volume_ml: f64,
    water_volume_ml: f64,
    extract_volume_ml: f64,
    powder_mass_g: f64,
}

fn csv_rows<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.deserialize() {
        let row: T = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        rows.push(row);
    }
    Ok(rows)
}

/// CSV with columns `depth_mm,free_chloride_percent`.
pub fn parse_measured_profile(text: &str) -> Result<MeasuredProfile> {
    let rows: Vec<MeasuredRow> = csv_rows(text)?;
    MeasuredProfile::new(rows.into_iter().map(|r| (r.depth_mm, r.free_chloride_percent)).collect())
}

/// CSV with columns
/// `depth_mm,titer_mg_per_ml,titrant_volume_ml,water_volume_ml,extract_volume_ml,powder_mass_g`.
pub fn parse_titration(text: &str) -> Result<Vec<TitrationRecord>> {
    let rows: Vec<TitrationRow> = csv_rows(text)?;
    rows.into_iter()
        .enumerate()
        .map(|(k, r)| {
            let rec = TitrationRecord {
                depth: r.depth_mm,
                silver_nitrate_titer: r.titer_mg_per_ml,
                titrant_volume: r.titrant_volume_ml,
                water_volume: r.water_volume_ml,
                extract_volume: r.extract_volume_ml,
                powder_mass: r.powder_mass_g,
            };
            let finite = [rec.depth, rec.silver_nitrate_titer, rec.titrant_volume, rec.water_volume, rec.extract_volume, rec.powder_mass]
                .iter()
                .all(|v| v.is_finite());
            if !finite || rec.depth < 0.0 {
                return Err(Error::parse(k + 2, "values must be finite and depth >= 0"));
            }
            Ok(rec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::rasterize;
    use crate::mesostructure::{build_mesostructure, MesoConfig};

    fn header() -> ArtifactHeader {
        ArtifactHeader::new("00ff", 42)
    }

    fn small_meso() -> Mesostructure {
        let cfg = MesoConfig {
            domain: DomainRect::new(80.0, 60.0).unwrap(),
            duct: Some(TendonDuct {
                center: Point::new(40.0, 35.0),
                diameter: 20.0,
            }),
            target_fraction: 0.3,
            ..MesoConfig::default()
        };
        build_mesostructure(&cfg).unwrap()
    }

    #[test]
    fn mesostructure_round_trip() {
        let m = small_meso();
        let text = write_mesostructure(&m, &header());
        let back = parse_mesostructure(&text).unwrap();
        assert_eq!(back.header, Some(header()));
        assert_eq!(back.mesostructure, m);
        assert_eq!(write_mesostructure(&back.mesostructure, &header()), text);
    }

    #[test]
    fn mesostructure_rejects_bad_records() {
        assert!(parse_mesostructure("").is_err());
        assert!(parse_mesostructure("domain 10 10\nblob 1\n").is_err());
        assert!(parse_mesostructure("domain 10 10\npolygon 5 5 1 3 1 0 0 1\n").is_err());
        assert!(parse_mesostructure("domain 10 10\npolygon 5 5 1 99999999999999 1 0\n").is_err());
        // clockwise triangle
        assert!(parse_mesostructure("domain 10 10\npolygon 5 5 1 3 6 5 5 4 4 5\n").is_err());
        assert!(parse_mesostructure("domain 10 nan\n").is_err());
        let ok = parse_mesostructure("domain 10 10\npolygon 5 5 1 3 6 5 5 6 4 5\n").unwrap();
        assert_eq!(ok.mesostructure.aggregates.len(), 1);
        assert!(ok.header.is_none());
    }

    #[test]
    fn grid_round_trip() {
        let g = rasterize(&small_meso(), 1.0).unwrap();
        let text = write_grid(&g, &header());
        let back = parse_grid(&text).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.header, Some(header()));
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(parse_grid("nx,ny,h\n2,1,1\n0,7\n").is_err());
        assert!(parse_grid("nx,ny,h\n2,1,1\n0\n").is_err());
        assert!(parse_grid("nx,ny,h\n2,1,1\n0,0\n0,0\n").is_err());
        assert!(parse_grid("nx,ny,h\n99999999999,99999999999,1\n").is_err());
        assert!(parse_grid("nx,ny,h\n1,1,0\n0\n").is_err());
        assert!(parse_grid("nx,ny,h\n2,1,1\n0,3\n").is_ok());
    }

    #[test]
    fn field_round_trip_is_exact() {
        let g = Arc::new(rasterize(&small_meso(), 2.0).unwrap());
        let mut f = ConcentrationField::uniform(g, 0.0, 27.0);
        for (k, v) in f.values.iter_mut().enumerate() {
            *v = (k as f64 * 0.37).sin().abs() / 3.0;
        }
        let text = write_field(&f, &header());
        let back = parse_field(&text).unwrap();
        assert_eq!(back.field, f);
        assert_eq!(write_field(&back.field, &header()), text);
    }

    #[test]
    fn field_rejects_bad_input() {
        let good = "# time_years 1\n# grid 1 1 1\nx_mm,y_mm,material_code,concentration_percent\n0.5,0.5,0,0.1\n";
        assert!(parse_field(good).is_ok());
        assert!(parse_field(&good.replace("0.5,0.5,0", "3.5,0.5,0")).is_err());
        assert!(parse_field(&good.replace(",0.1", ",inf")).is_err());
        assert!(parse_field(&good.replace("# time_years 1\n", "")).is_err());
        assert!(parse_field(&format!("{good}0.5,1.5,0,0.1\n")).is_err());
    }

    #[test]
    fn vtk_layout() {
        let g = Arc::new(MaterialGrid::uniform(3, 2, 0.5, Material::Mortar).unwrap());
        let f = ConcentrationField::uniform(g, 0.25, 5.0);
        let text = write_vtk(&f, &header());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert!(lines[1].contains("config_hash=00ff") && lines[1].contains("seed=42"));
        assert!(text.contains("DIMENSIONS 4 3 1\n"));
        assert!(text.contains("CELL_DATA 6\n"));
        assert_eq!(lines.iter().filter(|l| **l == "0.25").count(), 6);
    }

    #[test]
    fn measured_profile_csv() {
        let p = parse_measured_profile("# lab sample\ndepth_mm,free_chloride_percent\n20, 0.1\n5,0.2\n").unwrap();
        assert_eq!(p.points, vec![(5.0, 0.2), (20.0, 0.1)]);
        assert!(parse_measured_profile("depth_mm,free_chloride_percent\n-1,0.1\n").is_err());
        assert!(parse_measured_profile("depth,value\n1,0.1\n").is_err());
        assert!(parse_measured_profile("depth_mm,free_chloride_percent\n1,x\n").is_err());
    }

    #[test]
    fn titration_csv() {
        let text = "depth_mm,titer_mg_per_ml,titrant_volume_ml,water_volume_ml,extract_volume_ml,powder_mass_g\n5,1,2,250,20,10\n";
        let recs = parse_titration(text).unwrap();
        assert_eq!(recs.len(), 1);
        let p = MeasuredProfile::from_titration(&recs).unwrap();
        assert!((p.points[0].1 - 0.25).abs() < 1e-12);
        assert!(parse_titration(&text.replace("5,1,2", "5,nan,2")).is_err());
    }

    #[test]
    fn header_only_comments_are_collected() {
        let (c, body) = split_comments("# a 1\n\n# b two words\nrow\n# trailing\nrow2\n");
        assert_eq!(c.get("a"), Some("1"));
        assert_eq!(c.get("b"), Some("two words"));
        assert_eq!(body, vec![(4, "row"), (6, "row2")]);
    }
}
