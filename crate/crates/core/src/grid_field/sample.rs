//! Exact sampling of the discrete GFF.
//!
//! The square is sampled in the sine eigenbasis. The disk is sampled on the
//! enclosing square `[-1,1]²` and corrected by subtracting the discrete
//! harmonic extension of the values outside the disk (the lattice Markov
//! property). The mixed-boundary upper disk is the even reflection
//! `(h(x) + h(x̄)) / √2` of a disk field.

use std::f64::consts::{PI, SQRT_2};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams};

use super::domain::{DomainSpec, Lattice, Shape};
use super::field::FieldGrid;
use super::multigrid::Multigrid;
use super::spectral::{square_eigenvalues, Dst1};

const CORRECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
struct SquareSampler {
    intervals: usize,
    dst: Dst1,
    /// `sqrt(2π/λ) · 2/N` per mode.
    amplitude: Vec<f64>,
}

impl SquareSampler {
    fn new(intervals: usize) -> Self {
        let nf = intervals as f64;
        let amplitude = square_eigenvalues(intervals)
            .into_iter()
            .map(|l| (2.0 * PI / l).sqrt() * 2.0 / nf)
            .collect();
        SquareSampler { intervals, dst: Dst1::new(intervals), amplitude }
    }

    /// Node values on the `(N+1)²` grid, zero on its border.
    fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, streams::FIELD);
        let m = self.intervals - 1;
        let mut c: Vec<f64> = self
            .amplitude
            .iter()
            .map(|a| a * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        self.dst.transform_2d(&mut c);
        let side = self.intervals + 1;
        let mut out = vec![0.0; side * side];
        for j in 0..m {
            out[(j + 1) * side + 1..(j + 1) * side + 1 + m].copy_from_slice(&c[j * m..(j + 1) * m]);
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Square(SquareSampler),
    Disk { square: SquareSampler, mg: Multigrid, lattice: Lattice },
    Upper(Box<GffSampler>),
}

/// Reusable sampler holding transform plans and solver hierarchies for one
/// domain. Each sample is a pure function of the seed.
#[derive(Debug, Clone)]
pub struct GffSampler {
    domain: DomainSpec,
    kind: Kind,
}

impl GffSampler {
    pub fn new(domain: DomainSpec) -> Result<Self> {
        let n = domain.resolution() as usize;
        let kind = match domain.shape() {
            Shape::UnitSquare => Kind::Square(SquareSampler::new(n)),
            Shape::UnitDisk => {
                let lattice = domain.lattice();
                Kind::Disk {
                    square: SquareSampler::new(2 * n),
                    mg: Multigrid::new(lattice.nx, lattice.free_mask())?,
                    lattice,
                }
            }
            Shape::UpperUnitDisk => {
                let parent = domain.reflection_parent().ok_or_else(|| {
                    Error::Config("upper disk requires the mixed boundary condition".into())
                })?;
                if domain.boundary() != super::BoundaryCondition::MixedDirichletNeumann {
                    return Err(Error::Config(
                        "the upper disk is only supported with the mixed boundary condition".into(),
                    ));
                }
                Kind::Upper(Box::new(GffSampler::new(parent)?))
            }
        };
        Ok(GffSampler { domain, kind })
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// One field replicate for `seed`.
    pub fn sample(&self, seed: u64) -> Result<FieldGrid> {
        let values = match &self.kind {
            Kind::Square(s) => s.sample(seed),
            Kind::Disk { square, mg, lattice } => {
                let hs = square.sample(seed);
                let nx = lattice.nx;
                let mask = mg.mask();
                let mut b = vec![0.0; hs.len()];
                for (p, bp) in b.iter_mut().enumerate() {
                    if mask[p] {
                        *bp = [p - 1, p + 1, p - nx, p + nx]
                            .iter()
                            .filter(|&&q| !mask[q])
                            .map(|&q| hs[q])
                            .sum();
                    }
                }
                let u = mg.solve(&b, CORRECTION_TOL)?;
                hs.iter()
                    .zip(&u)
                    .zip(mask)
                    .map(|((h, u), &f)| if f { h - u } else { 0.0 })
                    .collect()
            }
            Kind::Upper(parent) => {
                let disk = parent.sample(seed)?;
                return Ok(reflect_to_upper(&disk)?.with_seed(Some(seed)));
            }
        };
        Ok(FieldGrid::from_values(self.domain, values)?.with_seed(Some(seed)))
    }
}

/// One replicate of the discrete GFF on `domain`.
pub fn sample_gff(domain: DomainSpec, seed: u64) -> Result<FieldGrid> {
    GffSampler::new(domain)?.sample(seed)
}

/// Mixed-boundary field on the upper disk from a Dirichlet field on the
/// disk: `(h(x) + h(x̄)) / √2`.
pub fn reflect_to_upper(disk: &FieldGrid) -> Result<FieldGrid> {
    let d = disk.domain();
    if d.shape() != Shape::UnitDisk {
        return Err(Error::Config("reflection needs a field on the unit disk".into()));
    }
    let upper = DomainSpec::upper_disk(d.resolution())?;
    let ul = upper.lattice();
    let off = d.resolution() as usize;
    let mut values = vec![0.0; ul.node_count()];
    for j in 0..ul.ny {
        for i in 0..ul.nx {
            values[ul.idx(i, j)] = (disk.at(i, off + j) + disk.at(i, off - j)) / SQRT_2;
        }
    }
    Ok(FieldGrid::from_values(upper, values)?
        .with_seed(disk.seed())
        .with_gamma(disk.gamma()))
}
