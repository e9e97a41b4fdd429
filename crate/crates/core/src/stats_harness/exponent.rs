//! Monte Carlo estimates of planar non-intersection exponents with simple
//! random walks.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::exec::{map_indices, ExecutionMode};
use crate::rng::{streams, substream_rng};

use super::fit::{linear_fit, slope_weights};

const BATCH: usize = 1000;
const MIN_TRIALS: usize = 10_000;
const MIN_SURVIVORS: u64 = 10;

/// Which packets of walks must avoid each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSpec {
    /// One walk from `(-1, 0)` against one from `(1, 0)`.
    OneVsOne,
    /// Two walks from `(-1, 0)` against two from `(1, 0)`; walks in the
    /// same packet may cross each other.
    TwoVsTwoProxy,
    /// A single walk against nothing. Survives with probability one.
    Single,
}

impl PairSpec {
    pub fn name(self) -> &'static str {
        match self {
            PairSpec::OneVsOne => "1v1",
            PairSpec::TwoVsTwoProxy => "2v2-proxy",
            PairSpec::Single => "single",
        }
    }

    /// Packet sizes `(a, b)`.
    fn packets(self) -> (usize, usize) {
        match self {
            PairSpec::OneVsOne => (1, 1),
            PairSpec::TwoVsTwoProxy => (2, 2),
            PairSpec::Single => (1, 0),
        }
    }
}

impl fmt::Display for PairSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PairSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1v1" | "one" => Ok(PairSpec::OneVsOne),
            "2v2" | "2v2-proxy" | "two" => Ok(PairSpec::TwoVsTwoProxy),
            "single" | "1v0" => Ok(PairSpec::Single),
            other => Err(Error::Config(format!("unknown pair spec '{other}'"))),
        }
    }
}

/// Dyadic radii `4, 8, ..., max_radius` (lattice units).
pub fn radius_ladder(max_radius: u32) -> Result<Vec<u32>> {
    if max_radius < 32 || !max_radius.is_power_of_two() {
        return Err(Error::Precondition(format!("max radius must be a power of two >= 32, got {max_radius}")));
    }
    Ok(std::iter::successors(Some(4u32), |r| (*r < max_radius).then_some(r * 2)).collect())
}

/// Site ownership marks on a square grid, reset through the list of
/// touched sites.
struct Arena {
    offset: i32,
    side: usize,
    marks: Vec<u8>,
    touched: Vec<usize>,
}

impl Arena {
    fn new(max_radius: u32) -> Self {
        let side = 2 * max_radius as usize + 3;
        Arena { offset: max_radius as i32 + 1, side, marks: vec![0; side * side], touched: Vec::new() }
    }

    fn reset(&mut self) {
        for &k in &self.touched {
            self.marks[k] = 0;
        }
        self.touched.clear();
    }

    /// Marks `(x, y)` for `owner`; false if another packet got there first.
    #[inline]
    fn visit(&mut self, x: i32, y: i32, owner: u8) -> bool {
        let k = (y + self.offset) as usize * self.side + (x + self.offset) as usize;
        match self.marks[k] {
            0 => {
                self.marks[k] = owner;
                self.touched.push(k);
                true
            }
            m => m == owner,
        }
    }
}

/// Two random bits at a time from a 64-bit buffer.
struct Steps<'a, R: RngCore> {
    rng: &'a mut R,
    bits: u64,
    left: u32,
}

impl<R: RngCore> Steps<'_, R> {
    #[inline]
    fn next(&mut self) -> u64 {
        if self.left == 0 {
            self.bits = self.rng.next_u64();
            self.left = 32;
        }
        let d = self.bits & 3;
        self.bits >>= 2;
        self.left -= 1;
        d
    }
}

/// Runs `trials` trials and returns, for each radius, the number of trials
/// in which no walk of one packet met a walk of the other before every walk
/// reached that radius.
pub fn survival_counts<R: Rng>(pair: PairSpec, radii: &[u32], trials: usize, rng: &mut R) -> Vec<u64> {
    let max_radius = *radii.last().expect("empty radius ladder");
    let mut arena = Arena::new(max_radius);
    let mut counts = vec![0u64; radii.len()];
    let (a, b) = pair.packets();
    let starts: Vec<((i32, i32), u8)> =
        std::iter::repeat_n(((-1, 0), 1u8), a).chain(std::iter::repeat_n(((1, 0), 2u8), b)).collect();
    let mut steps = Steps { rng, bits: 0, left: 0 };
    let mut pos = vec![(0i32, 0i32); starts.len()];

    for _ in 0..trials {
        arena.reset();
        let mut alive = true;
        for (k, &((x, y), owner)) in starts.iter().enumerate() {
            pos[k] = (x, y);
            alive &= arena.visit(x, y, owner);
        }
        for (rung, &r) in radii.iter().enumerate() {
            let r2 = (r as i64) * (r as i64);
            for (k, &(_, owner)) in starts.iter().enumerate() {
                let (mut x, mut y) = pos[k];
                while alive && (x as i64 * x as i64 + y as i64 * y as i64) < r2 {
                    match steps.next() {
                        0 => x += 1,
                        1 => x -= 1,
                        2 => y += 1,
                        _ => y -= 1,
                    }
                    alive = arena.visit(x, y, owner);
                }
                pos[k] = (x, y);
            }
            if !alive {
                break;
            }
            counts[rung] += 1;
        }
    }
    counts
}

/// Fitted exponent with the survival data it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    pub pair: PairSpec,
    pub zeta: f64,
    pub stderr: f64,
    pub r2: f64,
    pub trials: usize,
    pub radii: Vec<u32>,
    pub survivors: Vec<u64>,
    /// Leading radii used in the fit (those with enough survivors).
    pub used: usize,
}

/// `ζ = -slope` of `log P̂(r)` against `log r`, over radii with at least ten
/// survivors. The standard error is the delta-method one for nested
/// binomial events, where `Cov(log P̂_i, log P̂_j) = (1 - p_i)/(N p_i)` for
/// `r_i <= r_j`.
pub fn exponent_from_counts(pair: PairSpec, radii: &[u32], survivors: &[u64], trials: usize) -> Result<ExponentEstimate> {
    if radii.len() != survivors.len() {
        return Err(Error::Shape("one survivor count per radius is needed".into()));
    }
    let used = survivors.iter().take_while(|&&s| s >= MIN_SURVIVORS).count();
    if used < 3 {
        return Err(Error::Input(format!("only {used} radii have {MIN_SURVIVORS} or more survivors")));
    }
    let n = trials as f64;
    let xs: Vec<f64> = radii[..used].iter().map(|&r| (r as f64).ln()).collect();
    let p: Vec<f64> = survivors[..used].iter().map(|&s| s as f64 / n).collect();
    let ys: Vec<f64> = p.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let c = slope_weights(&xs);
    let mut var = 0.0;
    for i in 0..used {
        for j in 0..used {
            let a = i.min(j);
            var += c[i] * c[j] * (1.0 - p[a]) / (n * p[a]);
        }
    }
    Ok(ExponentEstimate {
        pair,
        zeta: -fit.slope,
        stderr: var.max(0.0).sqrt(),
        r2: fit.r2,
        trials,
        radii: radii.to_vec(),
        survivors: survivors.to_vec(),
        used,
    })
}

/// Survival counts for batch `index` of a seeded run.
pub fn survival_batch(pair: PairSpec, radii: &[u32], trials: usize, seed: u64, index: u64) -> Vec<u64> {
    survival_counts(pair, radii, trials, &mut substream_rng(seed, streams::EXPONENT, index))
}

/// Estimates the non-intersection exponent of `pair` from `trials` trials
/// up to `max_radius`.
pub fn estimate_nonintersection_exponent(pair: PairSpec, max_radius: u32, trials: usize, seed: u64) -> Result<ExponentEstimate> {
    estimate_nonintersection_exponent_with(pair, max_radius, trials, seed, ExecutionMode::default())
}

pub fn estimate_nonintersection_exponent_with(
    pair: PairSpec,
    max_radius: u32,
    trials: usize,
    seed: u64,
    mode: ExecutionMode,
) -> Result<ExponentEstimate> {
    let radii = radius_ladder(max_radius)?;
    if trials < MIN_TRIALS {
        return Err(Error::Precondition(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let batches = trials.div_ceil(BATCH);
    let per_batch = map_indices(mode, batches, |b| {
        let size = BATCH.min(trials - b * BATCH);
        survival_batch(pair, &radii, size, seed, b as u64)
    });
    let mut survivors = vec![0u64; radii.len()];
    for counts in per_batch {
        survivors.iter_mut().zip(counts).for_each(|(s, c)| *s += c);
    }
    exponent_from_counts(pair, &radii, &survivors, trials)
}
