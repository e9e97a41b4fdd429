//! Circle and semicircle averages of lattice fields.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::Stencil;

use super::domain::{Lattice, Point, Shape};
use super::field::FieldGrid;
use super::green::GreenTable;

/// Number of sample points on a circle of radius `eps` at resolution `n`.
pub fn circle_point_count(eps: f64, n: u32) -> usize {
    ((2.0 * PI * eps * n as f64).ceil() as usize).max(16)
}

/// Number of sample points on an upper semicircle of radius `eps`.
pub fn semicircle_point_count(eps: f64, n: u32) -> usize {
    ((PI * eps * n as f64).ceil() as usize).max(8)
}

/// Offsets `ε e^{iθ}` of the circle sample points, `θ = 2πm/M`.
pub fn circle_offsets(eps: f64, n: u32) -> Vec<Point> {
    let m = circle_point_count(eps, n);
    (0..m)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / m as f64;
            Point::new(eps * t.cos(), eps * t.sin())
        })
        .collect()
}

/// Offsets of the upper semicircle sample points, `θ = π(m + 1/2)/M`.
pub fn semicircle_offsets(eps: f64, n: u32) -> Vec<Point> {
    let m = semicircle_point_count(eps, n);
    (0..m)
        .map(|k| {
            let t = PI * (k as f64 + 0.5) / m as f64;
            Point::new(eps * t.cos(), eps * t.sin())
        })
        .collect()
}

/// Rejects radii below two lattice spacings.
pub fn check_scale(lattice: &Lattice, eps: f64) -> Result<()> {
    if !(eps.is_finite() && eps >= 2.0 * lattice.h * (1.0 - 1e-9)) {
        return Err(Error::Precondition(format!(
            "radius {eps} is below two lattice spacings ({})",
            2.0 * lattice.h
        )));
    }
    Ok(())
}

/// Whether the closed ball `B(center, eps)` lies in the domain, counting
/// the free diameter of the upper disk as boundary.
pub fn ball_inside(lattice: &Lattice, center: Point, eps: f64) -> bool {
    lattice.contains_closed(center) && lattice.boundary_distance(center) >= eps - 1e-12
}

/// Average of the bilinearly interpolated field over the circle
/// `∂B(center, eps)`.
pub fn circle_average(field: &FieldGrid, center: Point, eps: f64) -> Result<f64> {
    let l = field.lattice();
    check_scale(l, eps)?;
    if !ball_inside(l, center, eps) {
        return Err(Error::Domain(format!(
            "circle of radius {eps} around ({}, {}) leaves the domain",
            center.x, center.y
        )));
    }
    let offs = circle_offsets(eps, l.n);
    let s: f64 = offs
        .iter()
        .map(|o| field.interpolate(Point::new(center.x + o.x, center.y + o.y)))
        .sum();
    Ok(s / offs.len() as f64)
}

/// Average over the part of the circle inside the closed domain; zero if no
/// sample point is inside. Equals [`circle_average`] for interior circles.
pub fn truncated_circle_average(field: &FieldGrid, center: Point, eps: f64) -> Result<f64> {
    let l = field.lattice();
    check_scale(l, eps)?;
    Ok(truncated_mean(field, center, &circle_offsets(eps, l.n)))
}

fn truncated_mean(field: &FieldGrid, center: Point, offs: &[Point]) -> f64 {
    let l = field.lattice();
    let (mut s, mut k) = (0.0, 0usize);
    for o in offs {
        let p = Point::new(center.x + o.x, center.y + o.y);
        if l.contains_closed(p) {
            s += field.interpolate(p);
            k += 1;
        }
    }
    if k == 0 {
        0.0
    } else {
        s / k as f64
    }
}

fn check_diameter(field: &FieldGrid, x: f64) -> Result<()> {
    if field.lattice().shape != Shape::UpperUnitDisk {
        return Err(Error::Config("semicircle averages need the upper unit disk".into()));
    }
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::Domain(format!("centre {x} is not on the open diameter")));
    }
    Ok(())
}

/// Average over the upper semicircle of radius `eps` centred at `(x, 0)`.
pub fn semicircle_average(field: &FieldGrid, x: f64, eps: f64) -> Result<f64> {
    check_diameter(field, x)?;
    let l = field.lattice();
    check_scale(l, eps)?;
    if x.abs() + eps > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("semicircle of radius {eps} at {x} leaves the disk")));
    }
    let offs = semicircle_offsets(eps, l.n);
    let s: f64 = offs.iter().map(|o| field.interpolate(Point::new(x + o.x, o.y))).sum();
    Ok(s / offs.len() as f64)
}

/// Semicircle average over the sample points inside the closed disk.
pub fn truncated_semicircle_average(field: &FieldGrid, x: f64, eps: f64) -> Result<f64> {
    check_diameter(field, x)?;
    let l = field.lattice();
    check_scale(l, eps)?;
    Ok(truncated_mean(field, Point::new(x, 0.0), &semicircle_offsets(eps, l.n)))
}

/// Bilinear weights of `p`: node indices and coefficients, clamped to the
/// lattice exactly as [`FieldGrid::interpolate`].
pub fn bilinear_weights(lattice: &Lattice, p: Point) -> [(usize, f64); 4] {
    let (u, v) = lattice.to_grid(p);
    let i = (u.floor().max(0.0) as usize).min(lattice.nx - 2);
    let j = (v.floor().max(0.0) as usize).min(lattice.ny - 2);
    let fx = u - i as f64;
    let fy = v - j as f64;
    let k = lattice.idx(i, j);
    [
        (k, (1.0 - fy) * (1.0 - fx)),
        (k + 1, (1.0 - fy) * fx),
        (k + lattice.nx, fy * (1.0 - fx)),
        (k + lattice.nx + 1, fy * fx),
    ]
}

/// Node weights `w` with `circle_average(h) = Σ w h` for an interior circle.
pub fn circle_weights(lattice: &Lattice, center: Point, eps: f64) -> Result<Vec<f64>> {
    check_scale(lattice, eps)?;
    if !ball_inside(lattice, center, eps) {
        return Err(Error::Domain("circle leaves the domain".into()));
    }
    let offs = circle_offsets(eps, lattice.n);
    let mut w = vec![0.0; lattice.node_count()];
    let share = 1.0 / offs.len() as f64;
    for o in &offs {
        for (k, c) in bilinear_weights(lattice, Point::new(center.x + o.x, center.y + o.y)) {
            w[k] += c * share;
        }
    }
    Ok(w)
}

/// Node weights of the semicircle average at `(x, 0)` on the upper disk.
pub fn semicircle_weights(lattice: &Lattice, x: f64, eps: f64) -> Result<Vec<f64>> {
    check_scale(lattice, eps)?;
    if lattice.shape != Shape::UpperUnitDisk || x.abs() + eps > 1.0 + 1e-12 {
        return Err(Error::Domain("semicircle leaves the upper disk".into()));
    }
    let offs = semicircle_offsets(eps, lattice.n);
    let mut w = vec![0.0; lattice.node_count()];
    let share = 1.0 / offs.len() as f64;
    for o in &offs {
        for (k, c) in bilinear_weights(lattice, Point::new(x + o.x, o.y)) {
            w[k] += c * share;
        }
    }
    Ok(w)
}

/// Translation-invariant stencil of the circle average for centres at
/// fractional grid position `frac` (in lattice units) relative to the node
/// the stencil is anchored at. `(0.5, 0.5)` anchors cell centres at their
/// lower-left node.
pub fn circle_stencil(eps: f64, n: u32, frac: (f64, f64)) -> Stencil {
    let h = 1.0 / n as f64;
    let offs = circle_offsets(eps, n);
    let share = 1.0 / offs.len() as f64;
    let mut acc: std::collections::BTreeMap<(i32, i32), f64> = Default::default();
    for o in &offs {
        let u = frac.0 + o.x / h;
        let v = frac.1 + o.y / h;
        let (i, j) = (u.floor(), v.floor());
        let (fx, fy) = (u - i, v - j);
        let (i, j) = (i as i32, j as i32);
        for (a, b, c) in [
            (0, 0, (1.0 - fy) * (1.0 - fx)),
            (1, 0, (1.0 - fy) * fx),
            (0, 1, fy * (1.0 - fx)),
            (1, 1, fy * fx),
        ] {
            *acc.entry((i + a, j + b)).or_insert(0.0) += c * share;
        }
    }
    let (offsets, weights) = acc.into_iter().unzip();
    Stencil::new(offsets, weights)
}

/// `Var h_ε(center)` under the Green's function: the double circle average.
pub fn circle_variance(green: &GreenTable, center: Point, eps: f64) -> Result<f64> {
    let w = circle_weights(green.lattice(), center, eps)?;
    green.quadratic_form(&w)
}

/// Offset `c` in `Var h_ε(center) ≈ log(1/ε) + c`, measured at `ε = 1/8`.
/// For the unit disk at the origin the continuum value is `0`.
pub fn log_calibration(green: &GreenTable, center: Point) -> Result<f64> {
    let eps = 0.125;
    Ok(circle_variance(green, center, eps)? + eps.ln())
}
