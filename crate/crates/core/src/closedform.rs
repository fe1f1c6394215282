//! Analytic fidelities for the Gaussian channel. These serve as oracles for
//! the numeric routes in [`crate::fidelity`].

use crate::error::{Error, Result};
use crate::phasespace::ChannelNoise;

/// `1/(1+γ/2)`: the largest pure-state fidelity, reached by coherent states.
pub fn max_fidelity(noise: ChannelNoise) -> f64 {
    1.0 / (1.0 + noise.gamma() / 2.0)
}

/// `F(|n⟩, γ) = (1−γ/2)^n/(1+γ/2)^{n+1} · P_n((1+γ²/4)/(1−γ²/4))`.
///
/// The recurrence runs on `Q_n = (1−γ/2)^n P_n(x)`, which stays regular
/// through the pole of `x` at γ = 2:
/// `(n+1)Q_{n+1} = (2n+1) b Q_n − n t² Q_{n−1}` with `t = 1−γ/2` and
/// `b = (1+γ²/4)/(1+γ/2)`. At exactly γ = 2 the value is
/// `(2n)!/(2^{2n+1}(n!)²)`.
pub fn fidelity_number(n: usize, noise: ChannelNoise) -> f64 {
    let g = noise.gamma();
    if g == 2.0 {
        // (2n)!/(n!)² / 2^{2n+1} as a running product
        return (1..=n).fold(0.5, |acc, k| acc * (2 * k - 1) as f64 / (2 * k) as f64);
    }
    let t = 1.0 - g / 2.0;
    let denom = 1.0 + g / 2.0;
    let b = (1.0 + g * g / 4.0) / denom;
    // divide by (1+γ/2) each step to keep the iterate O(1)
    let (mut q_prev, mut q) = (1.0 / denom, b / (denom * denom));
    if n == 0 {
        return q_prev;
    }
    let t2 = t * t / (denom * denom);
    let b = b / denom;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * b * q - kf * t2 * q_prev) / (kf + 1.0);
        q_prev = q;
        q = next;
    }
    q
}

/// `Σ_n λ^n F(|n⟩, γ) = 1/√([(1−λ)+(1+λ)γ/2]² − λγ²)`.
pub fn generating_function(noise: ChannelNoise, lambda: f64) -> Result<f64> {
    if !(lambda.abs() < 1.0) {
        return Err(Error::domain(format!("generating function needs |lambda| < 1, got {lambda}")));
    }
    let g = noise.gamma();
    let a = (1.0 - lambda) + (1.0 + lambda) * g / 2.0;
    let radicand = a * a - lambda * g * g;
    if !(radicand > 0.0) {
        return Err(Error::domain(format!("nonpositive radicand {radicand}")));
    }
    Ok(1.0 / radicand.sqrt())
}

/// Fidelity of `(|0⟩+|1⟩)/√2`: `(1+3γ/4+γ²/4)/(1+γ/2)³`.
pub fn fidelity_superposition01(noise: ChannelNoise) -> f64 {
    let g = noise.gamma();
    (1.0 + 0.75 * g + g * g / 4.0) / (1.0 + g / 2.0).powi(3)
}

/// Squeezed vacuum with `⟨n⟩ = n̄`: `1/√(1+(2n̄+1)γ+γ²/4)`.
pub fn fidelity_squeezed(nbar: f64, noise: ChannelNoise) -> Result<f64> {
    check_nbar(nbar)?;
    let g = noise.gamma();
    Ok(1.0 / (1.0 + (2.0 * nbar + 1.0) * g + g * g / 4.0).sqrt())
}

/// Mean fidelity over the Bose-Einstein ensemble of number states. Equal
/// to [`fidelity_squeezed`] at the same `n̄`.
pub fn thermal_ensemble_fidelity(nbar: f64, noise: ChannelNoise) -> Result<f64> {
    fidelity_squeezed(nbar, noise)
}

/// Entanglement fidelity of a thermal state: `1/(1+(2n̄+1)γ/2)`.
pub fn thermal_entanglement_fidelity(nbar: f64, noise: ChannelNoise) -> Result<f64> {
    check_nbar(nbar)?;
    Ok(1.0 / (1.0 + (2.0 * nbar + 1.0) * noise.gamma() / 2.0))
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::domain(format!("mean photon number must be nonnegative, got {nbar}")));
    }
    Ok(())
}

/// Optimal symmetric 1→2 cloning of coherent states acts on each copy as
/// the channel with γ = 1.
///
/// An amplifier of gain 2 followed by a 50:50 beamsplitter adds one unit of
/// vacuum noise per copy, so each clone is the input convolved with a
/// Gaussian of `⟨|α|²⟩ = 1/2`. The clone fidelity is then `F(Ψ, 1)`, which
/// equals `2F(Ψ, 4)` by the scaling law, and is at most 2/3.
pub fn cloning_gamma() -> ChannelNoise {
    ChannelNoise::new(1.0).expect("gamma = 1 is valid")
}

/// Second moments `(n, m)` of a two-mode Gaussian resource:
/// `⟨x₁²⟩ = ⟨x₂²⟩ = n + 1/2`, `⟨x₁x₂⟩ = −⟨p₁p₂⟩ = m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceMoments {
    n: f64,
    m: f64,
}

impl ResourceMoments {
    /// Requires `n ≥ 0` and `|m| ≤ √(n(n+1))`.
    pub fn new(n: f64, m: f64) -> Result<Self> {
        if !(n >= 0.0) || !n.is_finite() || !m.is_finite() {
            return Err(Error::domain(format!("invalid resource moments n={n}, m={m}")));
        }
        let limit = (n * (n + 1.0)).sqrt();
        if m.abs() > limit * (1.0 + 1e-15) {
            return Err(Error::domain(format!("|m| = {} exceeds sqrt(n(n+1)) = {limit}", m.abs())));
        }
        Ok(ResourceMoments { n, m })
    }

    /// Two-mode squeezed vacuum: `m = −√(n(n+1))`.
    pub fn pure(n: f64) -> Result<Self> {
        if !(n >= 0.0) || !n.is_finite() {
            return Err(Error::domain(format!("invalid resource moment n={n}")));
        }
        Ok(ResourceMoments { n, m: -(n * (n + 1.0)).sqrt() })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `n ≥ |m|`.
    pub fn is_separable(&self) -> bool {
        self.n >= self.m.abs()
    }
}

/// Standard teleportation with resource `res` acts as the channel with
/// `γ = 2[1 + 2(n+m)]`.
pub fn teleport_gamma(res: ResourceMoments) -> Result<ChannelNoise> {
    // n + m for the pure branch cancels badly; use n − √(n(n+1)) = −n/(n+√(n(n+1)))
    let limit = (res.n * (res.n + 1.0)).sqrt();
    let sum = if res.m == -limit && res.n > 0.0 { -res.n / (res.n + limit) } else { res.n + res.m };
    ChannelNoise::new(2.0 * (1.0 + 2.0 * sum))
}
