use crate::error::{Error, Result};
use crate::grid_field::{circle_average, FieldGrid, Point};

use super::clock::QuantumClock;
use super::harmonic::HarmonicMeasureSample;
use super::path::BrownianPath;

/// Output of the clock-based harmonic extension estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionEstimate {
    pub value: f64,
    /// Range hit cells skipped because their window saw no clock mass.
    pub excluded: usize,
    pub excluded_weight: f64,
}

/// For each range hit cell of a harmonic-measure sample, the path steps
/// whose left endpoint lies in the ball of radius `eps` around the cell
/// centre. Reusable across clocks built on the same path.
#[derive(Debug, Clone)]
pub struct ExtensionWindows {
    eps: f64,
    steps: usize,
    windows: Vec<(f64, Option<Vec<u32>>)>,
}

impl ExtensionWindows {
    pub fn new(omega: &HarmonicMeasureSample, path: &BrownianPath, eps: f64) -> Result<Self> {
        let lattice = omega.lattice();
        if eps < 2.0 * lattice.h - 1e-15 {
            return Err(Error::Precondition(format!("eps = {eps} is below two lattice spacings")));
        }
        let steps = path.steps().len();
        let starts = &path.positions()[..steps];

        // Bucket the step endpoints on an eps-grid over [-1, 1]².
        let m = ((2.0 / eps).ceil() as usize).max(1);
        let bucket = |v: f64| (((v + 1.0) / eps).floor().max(0.0) as usize).min(m - 1);
        let mut heads = vec![Vec::<u32>::new(); m * m];
        for (j, p) in starts.iter().enumerate() {
            heads[bucket(p.y) * m + bucket(p.x)].push(j as u32);
        }

        let r2 = eps * eps;
        let windows = omega
            .cells()
            .iter()
            .map(|cell| {
                if cell.is_boundary {
                    return (cell.weight, None);
                }
                let x = omega.cell_center(cell);
                let (bi, bj) = (bucket(x.x), bucket(x.y));
                let mut idx = Vec::new();
                for cj in bj.saturating_sub(1)..=(bj + 1).min(m - 1) {
                    for ci in bi.saturating_sub(1)..=(bi + 1).min(m - 1) {
                        idx.extend(heads[cj * m + ci].iter().copied().filter(|&j| {
                            let p = starts[j as usize];
                            let (dx, dy) = (p.x - x.x, p.y - x.y);
                            dx * dx + dy * dy < r2
                        }));
                    }
                }
                idx.sort_unstable();
                (cell.weight, Some(idx))
            })
            .collect();
        Ok(ExtensionWindows { eps, steps, windows })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `Σ_x ω(x) (1/γ) log ∫ 1{B_s ∈ B_ε(x)} dφ(s)` over range hit cells;
    /// outer-circle hits contribute 0.
    pub fn estimate(&self, clock: &QuantumClock, gamma: f64) -> Result<ExtensionEstimate> {
        if gamma == 0.0 {
            return Err(Error::Parameter("the estimator divides by gamma, which is 0".into()));
        }
        if clock.increments().len() != self.steps {
            return Err(Error::Config("clock does not belong to the path".into()));
        }
        let inc = clock.increments();
        let mut out = ExtensionEstimate { value: 0.0, excluded: 0, excluded_weight: 0.0 };
        // Outer-circle hits have no window and contribute 0.
        for (weight, idx) in &self.windows {
            let Some(idx) = idx.as_ref() else { continue };
            let occupation: f64 = idx.iter().map(|&j| inc[j as usize]).sum();
            if occupation > 0.0 {
                out.value += weight * occupation.ln() / gamma;
            } else {
                out.excluded += 1;
                out.excluded_weight += weight;
            }
        }
        if out.excluded > 0 {
            log::warn!("{} hit cells with empty clock windows excluded", out.excluded);
        }
        Ok(out)
    }
}

/// The clock-based estimate of the `ε`-regularised harmonic extension at
/// `z`.
pub fn harmonic_extension_estimator(
    z: Point,
    omega: &HarmonicMeasureSample,
    path: &BrownianPath,
    clock: &QuantumClock,
    gamma: f64,
    eps: f64,
) -> Result<ExtensionEstimate> {
    if z.dist(omega.z) > 1e-12 {
        return Err(Error::Config("harmonic measure was sampled from another viewpoint".into()));
    }
    ExtensionWindows::new(omega, path, eps)?.estimate(clock, gamma)
}

/// `Σ_x ω(x) h_ε(x)` over range hit cells, with outer-circle hits
/// contributing 0.
pub fn harmonic_extension_true(field: &FieldGrid, omega: &HarmonicMeasureSample, eps: f64) -> Result<f64> {
    if field.lattice() != omega.lattice() {
        return Err(Error::Shape("field and harmonic measure live on different lattices".into()));
    }
    omega
        .cells()
        .iter()
        .filter(|c| !c.is_boundary)
        .map(|c| Ok(c.weight * circle_average(field, omega.cell_center(c), eps)?))
        .sum()
}
