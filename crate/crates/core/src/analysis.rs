//! Post-processing of simulated fields and measured chloride profiles.

use crate::error::{Error, Result};
use crate::exposure::{binding_partition, BindingModel};
use crate::solver::ConcentrationField;

/// Critical chloride content for tendon depassivation, mass-% of concrete.
pub const CRITICAL_CHLORIDE: f64 = 0.06;

/// Per-depth maximum over the cross-section width.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    pub depths: Vec<f64>,
    pub max_concentration: Vec<f64>,
    pub time: f64,
    /// Rows without any active cell, by depth.
    pub skipped_depths: Vec<f64>,
}

impl DepthProfile {
    /// Value of the row whose centre is nearest to `depth`.
    pub fn nearest(&self, depth: f64) -> Result<f64> {
        let (min, max) = self.range();
        if self.depths.is_empty() || depth < min || depth > max {
            return Err(Error::DepthOutOfRange { depth, min, max });
        }
        let k = self
            .depths
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - depth).abs().total_cmp(&(b.1 - depth).abs()))
            .map(|(k, _)| k)
            .expect("non-empty");
        Ok(self.max_concentration[k])
    }

    /// Linear interpolation between row centres; outside the centre range
    /// the end value is used.
    pub fn interpolate(&self, depth: f64) -> f64 {
        let d = &self.depths;
        let c = &self.max_concentration;
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

    /// Depth extent covered by the rows, including half a cell around the
    /// first and last centres.
    pub fn range(&self) -> (f64, f64) {
        if self.depths.is_empty() {
            return (0.0, 0.0);
        }
        let half = if self.depths.len() > 1 {
            0.5 * (self.depths[1] - self.depths[0])
        } else {
            self.depths[0]
        };
        (
            (self.depths[0] - half).max(0.0),
            self.depths[self.depths.len() - 1] + half,
        )
    }

    /// The same profile with every value mapped to free chloride.
    pub fn to_free(&self, binding: &BindingModel) -> Self {
        Self {
            max_concentration: self
                .max_concentration
                .iter()
                .map(|c| binding_partition(*c, binding))
                .collect(),
            ..self.clone()
        }
    }
}

pub fn depth_max_profile(field: &ConcentrationField) -> Result<DepthProfile> {
    let g = &field.grid;
    let mut depths = Vec::new();
    let mut maxima = Vec::new();
    let mut skipped = Vec::new();
    for j in 0..g.ny {
        let row_max = (0..g.nx)
            .filter(|&i| g.get(i, j).is_active())
            .map(|i| field.value(i, j))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        match row_max {
            Some(v) => {
                depths.push(g.row_depth(j));
                maxima.push(v);
            }
            None => skipped.push(g.row_depth(j)),
        }
    }
    if depths.is_empty() {
        return Err(Error::EmptyField);
    }
    Ok(DepthProfile {
        depths,
        max_concentration: maxima,
        time: field.time,
        skipped_depths: skipped,
    })
}

/// One row of a silver-nitrate titration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TitrationRecord {
    pub depth: f64,
    /// mg of chloride per mL of titrant.
    pub silver_nitrate_titer: f64,
    /// mL of titrant used.
    pub titrant_volume: f64,
    /// mL of distilled water the powder was soaked in.
    pub water_volume: f64,
    /// mL of filtrate titrated.
    pub extract_volume: f64,
    /// g of powder.
    pub powder_mass: f64,
}

/// mg → g for the titer-over-powder-mass ratio.
pub const MG_PER_G: f64 = 1000.0;

/// Free chloride as mass-% of powder:
/// `C·V1·V2 / (m·V3) · 100 / 1000`.
pub fn titration_concentration(r: &TitrationRecord) -> Result<f64> {
    if !(r.powder_mass > 0.0) {
        return Err(Error::invalid("powder_mass", "must be > 0"));
    }
    if !(r.extract_volume > 0.0) {
        return Err(Error::invalid("extract_volume", "must be > 0"));
    }
    if r.silver_nitrate_titer < 0.0 || r.titrant_volume < 0.0 || r.water_volume < 0.0 {
        return Err(Error::invalid("titration", "titer and volumes must be >= 0"));
    }
    let chloride_mg = r.silver_nitrate_titer * r.titrant_volume * r.water_volume / r.extract_volume;
    Ok(chloride_mg / (r.powder_mass * MG_PER_G) * 100.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredProfile {
    /// `(depth mm, free chloride mass-%)`, sorted by depth.
    pub points: Vec<(f64, f64)>,
}

impl MeasuredProfile {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(d, c)| !(*d >= 0.0) || !c.is_finite()) {
            return Err(Error::invalid("measured profile", "depths must be >= 0 and values finite"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { points })
    }

    pub fn from_titration(records: &[TitrationRecord]) -> Result<Self> {
        let points = records
            .iter()
            .map(|r| Ok((r.depth, titration_concentration(r)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdCrossing {
    Reached { time: f64 },
    NotReached { final_value: f64 },
}

/// First time the profile value at `depth` (nearest row) reaches `threshold`,
/// interpolating linearly between output times.
pub fn time_to_threshold(profiles: &[DepthProfile], depth: f64, threshold: f64) -> Result<ThresholdCrossing> {
    let Some(first) = profiles.first() else {
        return Err(Error::EmptyField);
    };
    let mut prev_t = first.time;
    let mut prev_v = first.nearest(depth)?;
    if prev_v >= threshold {
        return Ok(ThresholdCrossing::Reached { time: prev_t });
    }
    for p in &profiles[1..] {
        let v = p.nearest(depth)?;
        if v >= threshold {
            let time = if v > prev_v {
                prev_t + (threshold - prev_v) / (v - prev_v) * (p.time - prev_t)
            } else {
                p.time
            };
            return Ok(ThresholdCrossing::Reached { time });
        }
        prev_t = p.time;
        prev_v = v;
    }
    Ok(ThresholdCrossing::NotReached { final_value: prev_v })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileComparison {
    pub rmse: f64,
    pub max_abs_error: f64,
    /// Mean of model − measured.
    pub bias: f64,
    pub points: usize,
}

/// Error metrics of the model profile interpolated at measured depths inside
/// its range.
pub fn compare_profiles(model: &DepthProfile, measured: &MeasuredProfile) -> Result<ProfileComparison> {
    let (lo, hi) = model.range();
    let inside: Vec<(f64, f64)> = measured
        .points
        .iter()
        .copied()
        .filter(|(d, _)| *d >= lo && *d <= hi)
        .collect();
    if inside.len() < 2 {
        return Err(Error::InsufficientOverlap { found: inside.len() });
    }
    let n = inside.len() as f64;
    let mut sq = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut sum = 0.0;
    for (d, m) in &inside {
        let e = model.interpolate(*d) - m;
        sq += e * e;
        max_abs = max_abs.max(e.abs());
        sum += e;
    }
    Ok(ProfileComparison {
        rmse: (sq / n).sqrt(),
        max_abs_error: max_abs,
        bias: sum / n,
        points: inside.len(),
    })
}
