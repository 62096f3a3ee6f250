//! Random aggregate cross-sections.
//!
//! Aggregates start as circles drawn from a Fuller grading curve and placed
//! by random sequential addition, largest first. Each accepted circle carries
//! an inscribed convex polygon, which is the aggregate that is actually
//! rasterized. Two circumscribed circles may not come closer than
//! `eta · (r1 + r2)` centre to centre, which also keeps the polygons apart.
//! The tendon duct is inserted before any aggregate and takes part in the same
//! separation test.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{self, Point};

/// Aggregate volume fraction measured by CT on the girder cores. The 2D
/// generator defaults to a lower target because non-overlapping packing with
/// a 5 % gap jams below it.
pub const CT_AGGREGATE_FRACTION: f64 = 0.5403;

/// Consecutive particles that may fail placement before packing gives up.
pub const MAX_CONSECUTIVE_PLACEMENT_FAILURES: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainRect {
    pub width: f64,
    /// Extent in the depth direction, measured from the exposed surface.
    pub height: f64,
}

impl DomainRect {
    pub fn new(width: f64, height: f64) -> Result<Self> {
        let d = Self { width, height };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid("domain_width", "must be > 0"));
        }
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(Error::invalid("domain_height", "must be > 0"));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    fn contains_disc(&self, center: Point, radius: f64) -> bool {
        center.x - radius >= 0.0
            && center.x + radius <= self.width
            && center.y - radius >= 0.0
            && center.y + radius <= self.height
    }
}

impl Default for DomainRect {
    fn default() -> Self {
        Self {
            width: 300.0,
            height: 200.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleAggregate {
    pub center: Point,
    pub radius: f64,
}

impl CircleAggregate {
    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolygonAggregate {
    /// Counter-clockwise, all on the circumscribed circle.
    pub vertices: Vec<Point>,
    pub circumscribed: CircleAggregate,
}

impl PolygonAggregate {
    pub fn area(&self) -> f64 {
        geometry::signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        geometry::perimeter(&self.vertices)
    }

    pub fn contains(&self, p: Point) -> bool {
        geometry::contains_convex(&self.vertices, p)
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        geometry::boundary_distance(&self.vertices, p)
    }

    /// Largest relative deviation of a vertex from the circumscribed circle.
    pub fn inscription_residual(&self) -> f64 {
        let c = self.circumscribed;
        self.vertices
            .iter()
            .map(|v| (v.distance(c.center) - c.radius).abs() / c.radius)
            .fold(0.0, f64::max)
    }

    pub fn is_convex(&self) -> bool {
        geometry::is_convex_ccw(&self.vertices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TendonDuct {
    /// `y` is the centroid depth below the exposed surface.
    pub center: Point,
    pub diameter: f64,
}

impl TendonDuct {
    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    /// Depth of the duct wall closest to the exposed surface.
    pub fn shallowest_depth(&self) -> f64 {
        self.center.y - self.radius()
    }

    pub fn deepest_depth(&self) -> f64 {
        self.center.y + self.radius()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.distance(self.center) <= self.radius()
    }

    fn as_circle(&self) -> CircleAggregate {
        CircleAggregate {
            center: self.center,
            radius: self.radius(),
        }
    }
}

/// Fuller grading restricted to `[d_min, d_max]` (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grading {
    pub d_min: f64,
    pub d_max: f64,
    pub exponent: f64,
}

impl Default for Grading {
    fn default() -> Self {
        Self {
            d_min: 5.0,
            d_max: 20.0,
            exponent: 0.5,
        }
    }
}

impl Grading {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_min <= self.d_max && self.d_max.is_finite()) {
            return Err(Error::invalid(
                "grading",
                format!("need 0 < d_min <= d_max, got [{}, {}]", self.d_min, self.d_max),
            ));
        }
        if !(self.exponent > 0.0) {
            return Err(Error::invalid("fuller_exponent", "must be > 0"));
        }
        Ok(())
    }

    /// Inverse-transform sample of the restricted Fuller curve for a uniform
    /// variate `u ∈ [0, 1]`, capped at `cap` mm.
    pub fn diameter_at(&self, u: f64, cap: f64) -> f64 {
        let hi = self.d_max.min(cap).max(self.d_min);
        let lo_frac = (self.d_min / hi).powf(self.exponent);
        let f = lo_frac + u.clamp(0.0, 1.0) * (1.0 - lo_frac);
        (hi * f.powf(1.0 / self.exponent)).clamp(self.d_min, hi)
    }
}

/// Cumulative passing fraction of the ideal Fuller curve, `(d/d_max)^0.5`.
pub fn fuller_fraction(diameter: f64, max_diameter: f64) -> Result<f64> {
    fuller_fraction_with_exponent(diameter, max_diameter, 0.5)
}

pub fn fuller_fraction_with_exponent(diameter: f64, max_diameter: f64, exponent: f64) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(Error::invalid("diameter", "must be > 0"));
    }
    if diameter > max_diameter {
        return Err(Error::invalid(
            "diameter",
            format!("{diameter} exceeds the maximum diameter {max_diameter}"),
        ));
    }
    Ok((diameter / max_diameter).powf(exponent))
}

/// Draws an aggregate radius (mm) whose diameter follows the Fuller curve
/// restricted to `[d_min, d_max]`.
pub fn sample_radius<R: Rng + ?Sized>(rng: &mut R, d_min: f64, d_max: f64) -> f64 {
    let g = Grading {
        d_min,
        d_max,
        exponent: 0.5,
    };
    0.5 * g.diameter_at(rng.random::<f64>(), f64::INFINITY)
}

/// Interference rule: the candidate keeps at least `eta · (r_n + r_j)` from
/// every placed circle. Touching exactly at the limit is accepted.
pub fn separation_ok(candidate: &CircleAggregate, placed: &[CircleAggregate], eta: f64) -> bool {
    placed.iter().all(|c| separated(candidate, c, eta))
}

#[inline]
fn separated(a: &CircleAggregate, b: &CircleAggregate, eta: f64) -> bool {
    let dx = a.center.x - b.center.x;
    let dy = a.center.y - b.center.y;
    (dx * dx + dy * dy).sqrt() >= eta * (a.radius + b.radius)
}

/// Vertex-count and angle constraints for inscribed polygons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolygonRule {
    pub min_vertices: usize,
    pub max_vertices: usize,
    /// Minimum central angle between consecutive vertices, in degrees.
    pub min_angle_deg: f64,
}

impl Default for PolygonRule {
    fn default() -> Self {
        Self {
            min_vertices: 4,
            max_vertices: 8,
            min_angle_deg: 30.0,
        }
    }
}

impl PolygonRule {
    pub fn validate(&self) -> Result<()> {
        if self.min_vertices < 3 {
            return Err(Error::invalid("min_vertices", "must be >= 3"));
        }
        if self.max_vertices < self.min_vertices {
            return Err(Error::invalid("max_vertices", "must be >= min_vertices"));
        }
        if !(self.min_angle_deg >= 0.0) {
            return Err(Error::invalid("min_angle_deg", "must be >= 0"));
        }
        if self.max_vertices as f64 * self.min_angle_deg > 360.0 {
            return Err(Error::invalid(
                "min_angle_deg",
                format!(
                    "{} vertices with central angles >= {} deg cannot close the circle",
                    self.max_vertices, self.min_angle_deg
                ),
            ));
        }
        Ok(())
    }
}

/// Central angles (radians, summing to 2π) and the angle of the first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonShape {
    pub start: f64,
    pub angles: Vec<f64>,
}

impl PolygonShape {
    pub fn regular(n: usize) -> Self {
        Self {
            start: 0.0,
            angles: vec![TAU / n as f64; n],
        }
    }

    pub fn random<R: Rng + ?Sized>(rule: &PolygonRule, rng: &mut R) -> Result<Self> {
        rule.validate()?;
        let n = rng.random_range(rule.min_vertices..=rule.max_vertices);
        let min = rule.min_angle_deg.to_radians();
        let free = TAU - n as f64 * min;
        // uniform spacings: normalized exponentials
        let weights: Vec<f64> = (0..n)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        let angles = weights.iter().map(|w| min + free * w / total).collect();
        let start = rng.random::<f64>() * TAU;
        Ok(Self { start, angles })
    }

    /// Area of the polygon inscribed in a circle of radius `r`.
    pub fn area(&self, r: f64) -> f64 {
        0.5 * r * r * self.angles.iter().map(|a| a.sin()).sum::<f64>()
    }

    pub fn vertices(&self, circle: &CircleAggregate) -> Vec<Point> {
        let mut theta = self.start;
        let mut out = Vec::with_capacity(self.angles.len());
        for a in &self.angles {
            out.push(Point::new(
                circle.center.x + circle.radius * theta.cos(),
                circle.center.y + circle.radius * theta.sin(),
            ));
            theta += a;
        }
        out
    }
}

/// Inscribes a random convex polygon in `circle`.
pub fn polygonize<R: Rng + ?Sized>(
    circle: &CircleAggregate,
    rule: &PolygonRule,
    rng: &mut R,
) -> Result<PolygonAggregate> {
    let shape = PolygonShape::random(rule, rng)?;
    Ok(polygon_from_shape(circle, &shape))
}

pub fn polygon_from_shape(circle: &CircleAggregate, shape: &PolygonShape) -> PolygonAggregate {
    PolygonAggregate {
        vertices: shape.vertices(circle),
        circumscribed: *circle,
    }
}

/// Uniform bucket grid over circle centres for neighbour queries.
struct SpatialIndex {
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl SpatialIndex {
    fn new(domain: &DomainRect, cell: f64) -> Self {
        let nx = ((domain.width / cell).ceil() as usize).max(1);
        let ny = ((domain.height / cell).ceil() as usize).max(1);
        Self {
            cell,
            nx,
            ny,
            buckets: vec![Vec::new(); nx * ny],
        }
    }

    fn bucket_of(&self, p: Point) -> (usize, usize) {
        let i = ((p.x / self.cell) as usize).min(self.nx - 1);
        let j = ((p.y / self.cell) as usize).min(self.ny - 1);
        (i, j)
    }

    fn insert(&mut self, p: Point, id: usize) {
        let (i, j) = self.bucket_of(p);
        self.buckets[j * self.nx + i].push(id);
    }

    fn neighbours(&self, p: Point) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.bucket_of(p);
        let i0 = i.saturating_sub(1);
        let j0 = j.saturating_sub(1);
        let i1 = (i + 1).min(self.nx - 1);
        let j1 = (j + 1).min(self.ny - 1);
        (j0..=j1).flat_map(move |jj| {
            (i0..=i1).flat_map(move |ii| self.buckets[jj * self.nx + ii].iter().copied())
        })
    }
}

struct Template {
    radius: f64,
    area: f64,
    shape: Option<PolygonShape>,
}

struct Packing {
    placed: Vec<(CircleAggregate, Option<PolygonShape>)>,
    achieved_area: f64,
    complete: bool,
}

/// Random sequential addition shared by [`place_circles`] and
/// [`build_mesostructure`]. Templates are generated until their summed area
/// covers the remaining deficit, then placed largest first. A template that
/// exhausts `max_attempts` random positions is dropped and later refills are
/// capped at its diameter.
#[allow(clippy::too_many_arguments)]
fn pack<R, F>(
    domain: &DomainRect,
    obstacles: &[CircleAggregate],
    target_area: f64,
    grading: &Grading,
    eta: f64,
    max_attempts: usize,
    rng: &mut R,
    mut make_template: F,
) -> Result<Packing>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R, f64) -> Result<Template>,
{
    let mut index = SpatialIndex::new(domain, eta * grading.d_max);
    let mut placed: Vec<(CircleAggregate, Option<PolygonShape>)> = Vec::new();
    let mut achieved = 0.0;
    let mut cap = grading.d_max;
    let mut queue: Vec<Template> = Vec::new();
    let mut failures = 0usize;

    while achieved < target_area {
        if queue.is_empty() {
            let mut pending = 0.0;
            while achieved + pending < target_area {
                let t = make_template(rng, cap)?;
                pending += t.area;
                queue.push(t);
            }
            // ascending so that pop() yields the largest
            queue.sort_by(|a, b| a.radius.total_cmp(&b.radius));
        }
        let Some(t) = queue.pop() else { break };

        let r = t.radius;
        let mut accepted = None;
        if domain.width >= 2.0 * r && domain.height >= 2.0 * r {
            for _ in 0..max_attempts {
                let c = Point::new(
                    r + rng.random::<f64>() * (domain.width - 2.0 * r),
                    r + rng.random::<f64>() * (domain.height - 2.0 * r),
                );
                let cand = CircleAggregate { center: c, radius: r };
                let clear_of_obstacles = obstacles.iter().all(|o| separated(&cand, o, eta));
                if clear_of_obstacles
                    && index
                        .neighbours(c)
                        .all(|id| separated(&cand, &placed[id].0, eta))
                {
                    accepted = Some(cand);
                    break;
                }
            }
        }

        match accepted {
            Some(c) => {
                index.insert(c.center, placed.len());
                placed.push((c, t.shape));
                achieved += t.area;
                failures = 0;
            }
            None => {
                failures += 1;
                cap = cap.min(2.0 * r);
                if failures >= MAX_CONSECUTIVE_PLACEMENT_FAILURES {
                    return Ok(Packing {
                        placed,
                        achieved_area: achieved,
                        complete: false,
                    });
                }
            }
        }
    }

    Ok(Packing {
        placed,
        achieved_area: achieved,
        complete: true,
    })
}

/// Places circles by random sequential addition until their summed area
/// reaches `target_fraction` of the domain.
pub fn place_circles(
    domain: &DomainRect,
    target_fraction: f64,
    grading: &Grading,
    eta: f64,
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<CircleAggregate>> {
    domain.validate()?;
    grading.validate()?;
    if !(target_fraction > 0.0 && target_fraction < 1.0) {
        return Err(Error::invalid("target_fraction", "must lie in (0, 1)"));
    }
    if !(eta >= 1.0) {
        return Err(Error::invalid("eta", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target_area = target_fraction * domain.area();
    let packing = pack(
        domain,
        &[],
        target_area,
        grading,
        eta,
        max_attempts,
        &mut rng,
        |rng, cap| {
            let r = 0.5 * grading.diameter_at(rng.random::<f64>(), cap);
            Ok(Template {
                radius: r,
                area: PI * r * r,
                shape: None,
            })
        },
    )?;
    if !packing.complete {
        return Err(Error::PackingIncomplete {
            achieved: packing.achieved_area / domain.area(),
            target: target_fraction,
        });
    }
    Ok(packing.placed.into_iter().map(|(c, _)| c).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MesoConfig {
    pub domain: DomainRect,
    /// Target polygon area fraction of the domain; 0 requests no aggregate.
    pub target_fraction: f64,
    pub grading: Grading,
    pub eta: f64,
    pub itz_width: f64,
    pub duct: Option<TendonDuct>,
    pub polygon: PolygonRule,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for MesoConfig {
    fn default() -> Self {
        let domain = DomainRect::default();
        Self {
            domain,
            target_fraction: 0.45,
            grading: Grading::default(),
            eta: 1.05,
            itz_width: 0.5,
            duct: Some(TendonDuct {
                center: Point::new(0.5 * domain.width, 140.0),
                diameter: 60.0,
            }),
            polygon: PolygonRule::default(),
            seed: 42,
            max_attempts: 20_000,
        }
    }
}

impl MesoConfig {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.grading.validate()?;
        self.polygon.validate()?;
        if !(0.0..1.0).contains(&self.target_fraction) {
            return Err(Error::invalid("target_fraction", "must lie in [0, 1)"));
        }
        if !(self.eta >= 1.0) {
            return Err(Error::invalid("eta", "must be >= 1"));
        }
        if !(self.itz_width >= 0.0) {
            return Err(Error::invalid("itz_width", "must be >= 0"));
        }
        if self.max_attempts == 0 {
            return Err(Error::invalid("max_attempts", "must be > 0"));
        }
        if let Some(d) = &self.duct {
            if !(d.diameter > 0.0) {
                return Err(Error::invalid("duct_diameter", "must be > 0"));
            }
            if !self.domain.contains_disc(d.center, d.radius()) {
                return Err(Error::invalid("duct", "disc must lie inside the domain"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesostructure {
    pub domain: DomainRect,
    pub aggregates: Vec<PolygonAggregate>,
    pub itz_width: f64,
    pub duct: Option<TendonDuct>,
    pub seed: u64,
    pub eta: f64,
    pub target_fraction: f64,
    pub achieved_area_fraction: f64,
}

impl Mesostructure {
    /// Summed polygon area over the domain area.
    pub fn polygon_area_fraction(&self) -> f64 {
        self.aggregates.iter().map(|a| a.area()).sum::<f64>() / self.domain.area()
    }

    pub fn total_perimeter(&self) -> f64 {
        self.aggregates.iter().map(|a| a.perimeter()).sum()
    }

    /// Every pair of circumscribed circles (and the duct) respects the
    /// separation rule.
    pub fn separation_holds(&self) -> bool {
        let circles: Vec<CircleAggregate> = self.aggregates.iter().map(|a| a.circumscribed).collect();
        for (i, c) in circles.iter().enumerate() {
            if !separation_ok(c, &circles[i + 1..], self.eta) {
                return false;
            }
            if let Some(d) = &self.duct {
                if !separated(c, &d.as_circle(), self.eta) {
                    return false;
                }
            }
        }
        true
    }
}

/// Generates the aggregate cross-section for `config`.
pub fn build_mesostructure(config: &MesoConfig) -> Result<Mesostructure> {
    config.validate()?;
    let domain = config.domain;
    let mut aggregates = Vec::new();

    if config.target_fraction > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let obstacles: Vec<CircleAggregate> = config.duct.iter().map(|d| d.as_circle()).collect();
        let grading = config.grading;
        let rule = config.polygon;
        let packing = pack(
            &domain,
            &obstacles,
            config.target_fraction * domain.area(),
            &grading,
            config.eta,
            config.max_attempts,
            &mut rng,
            |rng, cap| {
                let r = 0.5 * grading.diameter_at(rng.random::<f64>(), cap);
                let shape = PolygonShape::random(&rule, rng)?;
                Ok(Template {
                    radius: r,
                    area: shape.area(r),
                    shape: Some(shape),
                })
            },
        )?;
        if !packing.complete {
            return Err(Error::PackingIncomplete {
                achieved: packing.achieved_area / domain.area(),
                target: config.target_fraction,
            });
        }
        aggregates = packing
            .placed
            .iter()
            .map(|(c, s)| polygon_from_shape(c, s.as_ref().expect("polygon template")))
            .collect();
    }

    let mut meso = Mesostructure {
        domain,
        aggregates,
        itz_width: config.itz_width,
        duct: config.duct,
        seed: config.seed,
        eta: config.eta,
        target_fraction: config.target_fraction,
        achieved_area_fraction: 0.0,
    };
    meso.achieved_area_fraction = meso.polygon_area_fraction();
    Ok(meso)
}
