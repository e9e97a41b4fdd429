use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid_field::{DomainSpec, Point, Shape};
use crate::rng::{stream_rng, streams};

/// Radius of the concentric subdomain `D₀` of the unit disk.
pub const SUBDOMAIN_RADIUS: f64 = 0.5;

/// Which circle stopped the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// The boundary of the subdomain `D₀`.
    Subdomain,
    /// The boundary of the unit disk `D`.
    Domain,
}

/// A discretised planar Brownian path from the origin, stopped on a circle.
///
/// `steps()[j]` is the duration of the move from `positions()[j]` to
/// `positions()[j + 1]`; timestamps are their running sums, so
/// `times()[0] = 0`. The final step is shortened to land on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    dt: f64,
    stop_radius: f64,
    exit: ExitKind,
    steps: Vec<f64>,
    times: Vec<f64>,
    positions: Vec<Point>,
}

impl BrownianPath {
    /// Builds a path from explicit positions and step durations.
    pub fn from_parts(dt: f64, stop_radius: f64, exit: ExitKind, positions: Vec<Point>, steps: Vec<f64>) -> Result<Self> {
        if positions.len() != steps.len() + 1 {
            return Err(Error::Shape("a path needs one more position than steps".into()));
        }
        let mut times = Vec::with_capacity(positions.len());
        let mut t = 0.0;
        times.push(t);
        for s in &steps {
            t += s;
            times.push(t);
        }
        Ok(BrownianPath { dt, stop_radius, exit, steps, times, positions })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stop_radius(&self) -> f64 {
        self.stop_radius
    }

    pub fn exit(&self) -> ExitKind {
        self.exit
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// The stopping time.
    pub fn exit_time(&self) -> f64 {
        *self.times.last().expect("paths are never empty")
    }

    pub fn exit_point(&self) -> Point {
        *self.positions.last().expect("paths are never empty")
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Step size keeping a typical move below half a lattice spacing.
pub fn default_dt(n: u32) -> f64 {
    let h = 1.0 / n as f64;
    h * h / 4.0
}

/// Path from the origin stopped on `∂D₀`, `D₀` the disk of radius 1/2.
pub fn sample_brownian_path(domain: &DomainSpec, dt: f64, seed: u64) -> Result<BrownianPath> {
    sample_brownian_path_until(domain, SUBDOMAIN_RADIUS, dt, seed)
}

/// Path from the origin stopped on the circle of radius `radius <= 1`.
pub fn sample_brownian_path_until(domain: &DomainSpec, radius: f64, dt: f64, seed: u64) -> Result<BrownianPath> {
    if domain.shape() != Shape::UnitDisk {
        return Err(Error::Config("Brownian paths run in the unit disk".into()));
    }
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::Parameter(format!("stopping radius {radius} outside (0, 1]")));
    }
    let h = domain.spacing();
    if !(dt > 0.0 && dt <= h * h) {
        return Err(Error::Precondition(format!("time step {dt} exceeds the squared lattice spacing {}", h * h)));
    }
    let exit = if radius < 1.0 { ExitKind::Subdomain } else { ExitKind::Domain };
    let mut rng = stream_rng(seed, streams::PATH);
    let sd = dt.sqrt();
    let r2 = radius * radius;
    let mut p = Point::ORIGIN;
    let mut positions = vec![p];
    let mut steps = Vec::new();
    loop {
        let dx = sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let dy = sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let q = Point::new(p.x + dx, p.y + dy);
        if q.x * q.x + q.y * q.y < r2 {
            positions.push(q);
            steps.push(dt);
            p = q;
            continue;
        }
        // Fraction s of the move with |p + s d| = radius.
        let a = dx * dx + dy * dy;
        let b = 2.0 * (p.x * dx + p.y * dy);
        let c = p.x * p.x + p.y * p.y - r2;
        let s = ((-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a)).clamp(0.0, 1.0);
        let e = Point::new(p.x + s * dx, p.y + s * dy);
        let k = radius / e.norm();
        positions.push(Point::new(e.x * k, e.y * k));
        steps.push(s * dt);
        break;
    }
    BrownianPath::from_parts(dt, radius, exit, positions, steps)
}
