//! Uniform raster of material phases.
//!
//! Cells are stored row-major with row 0 adjacent to the exposed surface, so
//! row `j` spans depths `[j·h, (j+1)·h]`.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesostructure::Mesostructure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Material {
    Mortar = 0,
    Aggregate = 1,
    Itz = 2,
    Duct = 3,
}

impl Material {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Material::Mortar),
            1 => Some(Material::Aggregate),
            2 => Some(Material::Itz),
            3 => Some(Material::Duct),
            _ => None,
        }
    }

    /// Whether chloride moves through this phase.
    pub fn is_active(self) -> bool {
        matches!(self, Material::Mortar | Material::Itz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialGrid {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub codes: Vec<Material>,
}

impl MaterialGrid {
    pub fn uniform(nx: usize, ny: usize, h: f64, material: Material) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid("grid", "needs at least one cell in each direction"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid("h", "must be > 0"));
        }
        Ok(Self {
            nx,
            ny,
            h,
            codes: vec![material; nx * ny],
        })
    }

    pub fn from_codes(nx: usize, ny: usize, h: f64, codes: Vec<Material>) -> Result<Self> {
        let mut g = Self::uniform(nx, ny, h, Material::Mortar)?;
        if codes.len() != nx * ny {
            return Err(Error::invalid(
                "grid",
                format!("expected {} codes, got {}", nx * ny, codes.len()),
            ));
        }
        g.codes = codes;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Material {
        self.codes[self.index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, m: Material) {
        let k = self.index(i, j);
        self.codes[k] = m;
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        Point::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    /// Depth of the centre of row `j` below the exposed surface.
    pub fn row_depth(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.h
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.h
    }

    pub fn count(&self, m: Material) -> usize {
        self.codes.iter().filter(|&&c| c == m).count()
    }

    pub fn area_of(&self, m: Material) -> f64 {
        self.count(m) as f64 * self.h * self.h
    }

    pub fn active_count(&self) -> usize {
        self.codes.iter().filter(|c| c.is_active()).count()
    }
}

/// Classifies every cell of an `h`-spaced raster over the mesostructure by
/// its centre point: duct first, then aggregate, then the ITZ band outside
/// each polygon, mortar otherwise.
pub fn rasterize(meso: &Mesostructure, h: f64) -> Result<MaterialGrid> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", "must be > 0"));
    }
    let min_radius = meso
        .aggregates
        .iter()
        .map(|a| a.circumscribed.radius)
        .fold(f64::INFINITY, f64::min);
    if h > min_radius {
        return Err(Error::invalid(
            "h",
            format!("cell size {h} exceeds the smallest aggregate radius {min_radius}"),
        ));
    }
    let nx = ((meso.domain.width / h).round() as usize).max(1);
    let ny = ((meso.domain.height / h).round() as usize).max(1);
    let mut grid = MaterialGrid::uniform(nx, ny, h, Material::Mortar)?;
    let itz = meso.itz_width;

    let cell_range = |lo: f64, hi: f64, n: usize| -> (usize, usize) {
        // cells whose centre lies in [lo, hi]
        let a = ((lo / h - 0.5).ceil().max(0.0)) as usize;
        let b = (((hi / h - 0.5).floor()).min(n as f64 - 1.0)).max(-1.0);
        (a, (b + 1.0) as usize)
    };

    for agg in &meso.aggregates {
        let c = agg.circumscribed;
        let (i0, i1) = cell_range(c.center.x - c.radius, c.center.x + c.radius, nx);
        let (j0, j1) = cell_range(c.center.y - c.radius, c.center.y + c.radius, ny);
        for j in j0..j1 {
            for i in i0..i1 {
                if agg.contains(grid.cell_center(i, j)) {
                    grid.set(i, j, Material::Aggregate);
                }
            }
        }
    }

    if itz > 0.0 {
        for agg in &meso.aggregates {
            let c = agg.circumscribed;
            let reach = c.radius + itz;
            let (i0, i1) = cell_range(c.center.x - reach, c.center.x + reach, nx);
            let (j0, j1) = cell_range(c.center.y - reach, c.center.y + reach, ny);
            for j in j0..j1 {
                for i in i0..i1 {
                    if grid.get(i, j) != Material::Mortar {
                        continue;
                    }
                    let p = grid.cell_center(i, j);
                    if !agg.contains(p) && agg.boundary_distance(p) <= itz {
                        grid.set(i, j, Material::Itz);
                    }
                }
            }
        }
    }

    if let Some(duct) = &meso.duct {
        let r = duct.radius();
        let (i0, i1) = cell_range(duct.center.x - r, duct.center.x + r, nx);
        let (j0, j1) = cell_range(duct.center.y - r, duct.center.y + r, ny);
        for j in j0..j1 {
            for i in i0..i1 {
                if duct.contains(grid.cell_center(i, j)) {
                    grid.set(i, j, Material::Duct);
                }
            }
        }
    }

    Ok(grid)
}
