use crate::error::{Error, Result};

/// Which exponent is given to [`kpz_exponents`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KpzInput {
    /// Euclidean scaling exponent `x`.
    Euclidean(f64),
    /// Quantum scaling exponent `Δ`.
    Quantum(f64),
}

/// Exponents linked by `x = (γ²/4)Δ² + (1 - γ²/4)Δ`, together with
/// `γ̂ = γ(1 - Δ)` and `Q = γ/2 + 2/γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentTriple {
    pub gamma: f64,
    pub x: f64,
    pub delta: f64,
    pub hat_gamma: f64,
    pub q_constant: f64,
}

/// Completes the KPZ exponents from either `x` or `Δ`. Both are restricted
/// to `[0, 1]`, on which the relation is an increasing bijection.
pub fn kpz_exponents(input: KpzInput, gamma: f64) -> Result<ExponentTriple> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Parameter(format!("gamma {gamma} outside (0, 2)")));
    }
    let a = gamma * gamma / 4.0;
    let b = 1.0 - a;
    let (x, delta) = match input {
        KpzInput::Quantum(delta) => {
            if !(0.0..=1.0).contains(&delta) {
                return Err(Error::Domain(format!(
                    "quantum exponent {delta} outside the attainable range [0, 1]"
                )));
            }
            (a * delta * delta + b * delta, delta)
        }
        KpzInput::Euclidean(x) => {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!(
                    "Euclidean exponent {x} outside the attainable range [0, 1]"
                )));
            }
            // Nonnegative root of aΔ² + bΔ - x = 0, written without cancellation.
            (x, 2.0 * x / (b + (b * b + 4.0 * a * x).sqrt()))
        }
    };
    Ok(ExponentTriple {
        gamma,
        x,
        delta,
        hat_gamma: gamma * (1.0 - delta),
        q_constant: gamma / 2.0 + 2.0 / gamma,
    })
}
