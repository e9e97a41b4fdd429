use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A point of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Reflection across the real axis.
    pub fn conj(self) -> Point {
        Point::new(self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// `[0,1]²`.
    UnitSquare,
    /// The open unit disk centred at the origin.
    UnitDisk,
    /// Upper half of the unit disk, including the diameter `[-1,1]`.
    UpperUnitDisk,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::UnitSquare => "square",
            Shape::UnitDisk => "disk",
            Shape::UpperUnitDisk => "upper-disk",
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" | "unit-square" | "unitsquare" => Ok(Shape::UnitSquare),
            "disk" | "unit-disk" | "unitdisk" => Ok(Shape::UnitDisk),
            "upper-disk" | "upper-unit-disk" | "upperunitdisk" | "half-disk" => {
                Ok(Shape::UpperUnitDisk)
            }
            other => Err(Error::Config(format!("unknown domain shape `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Dirichlet,
    /// Neumann on the diameter, Dirichlet on the arc.
    MixedDirichletNeumann,
}

/// A discretised planar domain: shape, lattice resolution and boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DomainSpec {
    shape: Shape,
    resolution: u32,
    boundary: BoundaryCondition,
}

impl DomainSpec {
    /// Validates and builds a domain. `resolution` is `n`, the inverse
    /// lattice spacing; it must be a power of two no smaller than 8.
    pub fn new(shape: Shape, resolution: u32, boundary: BoundaryCondition) -> Result<Self> {
        if resolution < 8 || !resolution.is_power_of_two() {
            return Err(Error::Config(format!(
                "resolution must be a power of two >= 8, got {resolution}"
            )));
        }
        if resolution > 4096 {
            return Err(Error::Config(format!("resolution {resolution} exceeds 4096")));
        }
        if boundary == BoundaryCondition::MixedDirichletNeumann && shape != Shape::UpperUnitDisk {
            return Err(Error::Config(
                "mixed Dirichlet/Neumann boundary is only defined on the upper unit disk".into(),
            ));
        }
        Ok(DomainSpec { shape, resolution, boundary })
    }

    pub fn square(n: u32) -> Result<Self> {
        Self::new(Shape::UnitSquare, n, BoundaryCondition::Dirichlet)
    }

    pub fn disk(n: u32) -> Result<Self> {
        Self::new(Shape::UnitDisk, n, BoundaryCondition::Dirichlet)
    }

    pub fn upper_disk(n: u32) -> Result<Self> {
        Self::new(Shape::UpperUnitDisk, n, BoundaryCondition::MixedDirichletNeumann)
    }

    /// The natural domain for a shape: Dirichlet everywhere, except the upper
    /// disk which carries the free boundary on its diameter.
    pub fn with_default_boundary(shape: Shape, n: u32) -> Result<Self> {
        match shape {
            Shape::UpperUnitDisk => Self::upper_disk(n),
            _ => Self::new(shape, n, BoundaryCondition::Dirichlet),
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.shape, self.resolution)
    }

    /// The full disk whose reflection realises this mixed-boundary domain.
    pub fn reflection_parent(&self) -> Option<DomainSpec> {
        (self.shape == Shape::UpperUnitDisk).then(|| {
            DomainSpec::new(Shape::UnitDisk, self.resolution, BoundaryCondition::Dirichlet)
                .expect("resolution already validated")
        })
    }
}

const INSIDE_TOL: f64 = 1e-12;

/// Node and cell layout of the bounding box of a domain.
///
/// Nodes sit at `(x0 + i h, y0 + j h)` for `0 <= i < nx`, `0 <= j < ny` and
/// are stored row-major (`j * nx + i`). Cell `(ci, cj)` is the square with
/// lower-left node `(ci, cj)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub shape: Shape,
    pub n: u32,
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
}

impl Lattice {
    pub fn new(shape: Shape, n: u32) -> Self {
        let nn = n as usize;
        let h = 1.0 / n as f64;
        match shape {
            Shape::UnitSquare => Lattice { shape, n, nx: nn + 1, ny: nn + 1, x0: 0.0, y0: 0.0, h },
            Shape::UnitDisk => {
                Lattice { shape, n, nx: 2 * nn + 1, ny: 2 * nn + 1, x0: -1.0, y0: -1.0, h }
            }
            Shape::UpperUnitDisk => {
                Lattice { shape, n, nx: 2 * nn + 1, ny: nn + 1, x0: -1.0, y0: 0.0, h }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node_pos(&self, i: usize, j: usize) -> Point {
        Point::new(self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    /// Continuous node coordinates of a point.
    #[inline]
    pub fn to_grid(&self, p: Point) -> (f64, f64) {
        ((p.x - self.x0) / self.h, (p.y - self.y0) / self.h)
    }

    /// The lattice node at `p`, if `p` is a node up to rounding.
    pub fn node_at(&self, p: Point) -> Option<(usize, usize)> {
        let (u, v) = self.to_grid(p);
        let (i, j) = (u.round(), v.round());
        if (u - i).abs() > 1e-6 || (v - j).abs() > 1e-6 || i < 0.0 || j < 0.0 {
            return None;
        }
        let (i, j) = (i as usize, j as usize);
        (i < self.nx && j < self.ny).then_some((i, j))
    }

    /// Whether `p` lies in the (relatively) open domain. For the upper disk
    /// the free diameter belongs to the domain.
    pub fn contains(&self, p: Point) -> bool {
        match self.shape {
            Shape::UnitSquare => p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 1.0,
            Shape::UnitDisk => p.x * p.x + p.y * p.y < 1.0,
            Shape::UpperUnitDisk => p.y >= 0.0 && p.x * p.x + p.y * p.y < 1.0,
        }
    }

    /// Whether `p` lies in the closure of the domain, up to rounding.
    pub fn contains_closed(&self, p: Point) -> bool {
        const T: f64 = 1e-12;
        match self.shape {
            Shape::UnitSquare => p.x >= -T && p.x <= 1.0 + T && p.y >= -T && p.y <= 1.0 + T,
            Shape::UnitDisk => p.x * p.x + p.y * p.y <= 1.0 + T,
            Shape::UpperUnitDisk => p.y >= -T && p.x * p.x + p.y * p.y <= 1.0 + T,
        }
    }

    /// Whether node `(i, j)` carries a free value (not a Dirichlet node).
    #[inline]
    pub fn is_free(&self, i: usize, j: usize) -> bool {
        match self.shape {
            Shape::UnitSquare => i > 0 && j > 0 && i + 1 < self.nx && j + 1 < self.ny,
            Shape::UnitDisk | Shape::UpperUnitDisk => {
                let p = self.node_pos(i, j);
                p.x * p.x + p.y * p.y < 1.0 - INSIDE_TOL
            }
        }
    }

    /// Mask of free nodes.
    pub fn free_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.node_count()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                mask[self.idx(i, j)] = self.is_free(i, j);
            }
        }
        mask
    }

    /// Distance from `p` to the Dirichlet part of the boundary.
    pub fn dirichlet_distance(&self, p: Point) -> f64 {
        match self.shape {
            Shape::UnitSquare => p.x.min(1.0 - p.x).min(p.y).min(1.0 - p.y),
            Shape::UnitDisk | Shape::UpperUnitDisk => 1.0 - p.norm(),
        }
    }

    /// Distance from `p` to the whole boundary (including the free diameter).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        match self.shape {
            Shape::UpperUnitDisk => self.dirichlet_distance(p).min(p.y),
            _ => self.dirichlet_distance(p),
        }
    }

    pub fn cells_x(&self) -> usize {
        self.nx - 1
    }

    pub fn cells_y(&self) -> usize {
        self.ny - 1
    }

    pub fn cell_center(&self, ci: usize, cj: usize) -> Point {
        Point::new(
            self.x0 + (ci as f64 + 0.5) * self.h,
            self.y0 + (cj as f64 + 0.5) * self.h,
        )
    }

    /// Cells whose centre lies in the domain carry area; the rest carry none.
    pub fn cell_in_domain(&self, ci: usize, cj: usize) -> bool {
        self.contains(self.cell_center(ci, cj))
    }

    pub fn cell_area(&self) -> f64 {
        self.h * self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_rules() {
        assert!(DomainSpec::square(16).is_ok());
        assert!(DomainSpec::square(12).is_err());
        assert!(DomainSpec::square(4).is_err());
        assert!(DomainSpec::new(Shape::UnitDisk, 16, BoundaryCondition::MixedDirichletNeumann)
            .is_err());
        assert!(DomainSpec::upper_disk(16).is_ok());
    }

    #[test]
    fn lattice_layout() {
        let l = DomainSpec::disk(8).unwrap().lattice();
        assert_eq!((l.nx, l.ny), (17, 17));
        assert_eq!(l.node_pos(8, 8), Point::ORIGIN);
        assert!(l.is_free(8, 8));
        assert!(!l.is_free(16, 8));
        assert_eq!(l.node_at(Point::new(0.25, -0.5)), Some((10, 4)));
        assert_eq!(l.node_at(Point::new(0.2, 0.0)), None);

        let u = DomainSpec::upper_disk(8).unwrap().lattice();
        assert_eq!((u.nx, u.ny), (17, 9));
        assert!(u.is_free(8, 0));
        assert!(!u.is_free(0, 0));

        let s = DomainSpec::square(8).unwrap().lattice();
        assert!(!s.is_free(0, 3));
        assert!(s.is_free(1, 7));
        assert!(!s.is_free(8, 7));
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("disk".parse::<Shape>().unwrap(), Shape::UnitDisk);
        assert_eq!("Square".parse::<Shape>().unwrap(), Shape::UnitSquare);
        assert!("torus".parse::<Shape>().is_err());
    }
}
