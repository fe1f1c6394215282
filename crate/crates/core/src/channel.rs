//! The Gaussian displacement channel
//! `Φ(ρ) = ∫ d²α G(α) D(α) ρ D†(α)` on density matrices.
//!
//! The deterministic route replaces the integral by a product
//! Gauss-Hermite rule over `(Re α, Im α)`; the Monte-Carlo route averages
//! over seeded Gaussian draws and serves as an independent oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fock::{displacement_block, DensityMatrix};
use crate::phasespace::ChannelNoise;
use crate::special::GaussHermite;

/// Default Gauss-Hermite order per axis.
pub const DEFAULT_ORDER: usize = 40;
/// Smallest order accepted by the accuracy-bearing routes.
pub const MIN_ORDER: usize = 4;
/// Trace drift above which channel application is reported as inaccurate.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
/// Eigenvalues of `ρ` below this are dropped before propagation.
pub(crate) const RANK_CUTOFF: f64 = 1e-17;

/// Product Gauss-Hermite rule: `order_per_axis²` nodes, node spacing set by
/// `scale` (the standard deviation of the Gaussian weight per axis of `α`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    order_per_axis: usize,
    scale: f64,
}

impl QuadratureSpec {
    pub fn new(order_per_axis: usize, scale: f64) -> Result<Self> {
        if order_per_axis == 0 {
            return Err(Error::domain("quadrature order must be positive"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::domain(format!("quadrature scale must be positive, got {scale}")));
        }
        Ok(QuadratureSpec { order_per_axis, scale })
    }

    /// Default order with the scale matched to `noise`.
    pub fn for_noise(noise: ChannelNoise) -> Self {
        Self::matched(DEFAULT_ORDER, noise)
    }

    /// Scale `√(γ/(2(2+γ)))`: the width of `G(α)e^{−|α|²}`. Matrix elements
    /// of `D(α)ρD†(α)` on a finite support are `e^{−|α|²}` times a
    /// polynomial, so this weight integrates them exactly up to degree
    /// `2·order − 1` per axis.
    pub fn matched(order_per_axis: usize, noise: ChannelNoise) -> Self {
        let g = noise.gamma();
        let scale = if g > 0.0 { (g / (2.0 * (2.0 + g))).sqrt() } else { 1.0 };
        QuadratureSpec { order_per_axis: order_per_axis.max(1), scale }
    }

    pub fn order_per_axis(&self) -> usize {
        self.order_per_axis
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same scale, different order.
    pub fn with_order(&self, order_per_axis: usize) -> Self {
        QuadratureSpec { order_per_axis: order_per_axis.max(1), scale: self.scale }
    }

    pub(crate) fn check_accuracy_order(&self) -> Result<()> {
        if self.order_per_axis < MIN_ORDER {
            return Err(Error::domain(format!(
                "quadrature order {} below the minimum {MIN_ORDER}",
                self.order_per_axis
            )));
        }
        Ok(())
    }
}

/// Monte-Carlo sampling parameters; the seed fixes the output bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSpec {
    samples: usize,
    seed: u64,
}

impl McSpec {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::domain("Monte-Carlo needs at least one sample"));
        }
        Ok(McSpec { samples, seed })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// One term `w D(α) · D†(α)` of the discretized channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausNode {
    pub weight: f64,
    pub alpha: Complex64,
}

/// Discrete Kraus set `{√w_j D(α_j)}` from the product rule.
///
/// With node scale `s` and Hermite nodes `t`, `α = √2 s (t_i + i t_j)` and
/// `w = 2s² (2/πγ) w_i e^{c t_i²} w_j e^{c t_j²}` with `c = 1 − 4s²/γ`.
/// Order 1 is the degenerate midpoint rule: one node at the origin with
/// unit weight.
pub fn kraus_weights(noise: ChannelNoise, quad: QuadratureSpec) -> Result<Vec<KrausNode>> {
    let gamma = noise.gamma();
    if gamma <= 0.0 {
        return Err(Error::domain("kraus_weights needs gamma > 0"));
    }
    if quad.order_per_axis == 1 {
        return Ok(vec![KrausNode { weight: 1.0, alpha: Complex64::new(0.0, 0.0) }]);
    }
    let gh = GaussHermite::new(quad.order_per_axis);
    let s = quad.scale;
    let c = 1.0 - 4.0 * s * s / gamma;
    let pref = 2.0 * s * s * 2.0 / (std::f64::consts::PI * gamma);
    let axis: Vec<(f64, f64)> = gh
        .nodes
        .iter()
        .zip(&gh.ln_weights)
        .map(|(&t, &lw)| (2f64.sqrt() * s * t, (lw + c * t * t).exp()))
        .collect();
    let mut nodes = Vec::with_capacity(axis.len() * axis.len());
    for &(x, wx) in &axis {
        for &(y, wy) in &axis {
            nodes.push(KrausNode { weight: pref * wx * wy, alpha: Complex64::new(x, y) });
        }
    }
    Ok(nodes)
}

fn propagate(
    factor: &DMatrix<Complex64>,
    dim: usize,
    terms: impl Iterator<Item = KrausNode>,
) -> DMatrix<Complex64> {
    let support = factor.nrows();
    let mut out = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for node in terms {
        let moved = displacement_block(node.alpha, dim, support) * factor;
        out.gemm(Complex64::from(node.weight), &moved, &moved.adjoint(), Complex64::from(1.0));
    }
    out
}

fn support_factor(rho: &DensityMatrix) -> DMatrix<Complex64> {
    let f = rho.factor(RANK_CUTOFF);
    let s = rho.support();
    f.rows(0, s).into_owned()
}

fn hermitize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.adjoint()) * Complex64::from(0.5)
}

/// `Φ(ρ)` by Gauss-Hermite quadrature.
///
/// Propagates a low-rank factor of `ρ` through each node, so the cost per
/// node is `O(dim² · rank)`. Output trace falls short of the input only by
/// weight displaced above the truncation; a drift beyond
/// [`TRACE_DRIFT_LIMIT`] is an accuracy error.
pub fn apply_channel(rho: &DensityMatrix, noise: ChannelNoise, quad: QuadratureSpec) -> Result<DensityMatrix> {
    if noise.is_identity() {
        return Ok(rho.clone());
    }
    quad.check_accuracy_order()?;
    let nodes = kraus_weights(noise, quad)?;
    let out = hermitize(propagate(&support_factor(rho), rho.dim(), nodes.into_iter()));
    let out = DensityMatrix::from_raw(out, rho.tail());
    let drift = (out.trace() - rho.trace()).abs();
    if drift > TRACE_DRIFT_LIMIT {
        return Err(Error::Accuracy {
            what: "channel trace drift",
            value: drift,
            limit: TRACE_DRIFT_LIMIT,
            hint: "raise the truncation dim or the quadrature order",
        });
    }
    Ok(DensityMatrix::from_raw(out.matrix().clone(), rho.tail() + drift))
}

/// Monte-Carlo channel output with per-element standard errors.
#[derive(Debug, Clone)]
pub struct McEstimate {
    pub output: DensityMatrix,
    /// Standard errors of the real and imaginary parts, packed as
    /// `re + i·im` per element.
    pub std_err: DMatrix<Complex64>,
}

/// `Φ(ρ)` averaged over `samples` draws `α` with independent
/// `N(0, γ/4)` real and imaginary parts (so `⟨|α|²⟩ = γ/2`).
pub fn apply_channel_mc(rho: &DensityMatrix, noise: ChannelNoise, mc: McSpec) -> Result<DensityMatrix> {
    apply_channel_mc_with_stderr(rho, noise, mc).map(|e| e.output)
}

pub fn apply_channel_mc_with_stderr(rho: &DensityMatrix, noise: ChannelNoise, mc: McSpec) -> Result<McEstimate> {
    if noise.is_identity() {
        return Err(Error::domain("gamma = 0 gives degenerate sampling; use apply_channel"));
    }
    let draws = sample_displacements(noise, mc);
    let factor = support_factor(rho);
    let dim = rho.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut sum = DMatrix::from_element(dim, dim, zero);
    let mut sum_sq = DMatrix::from_element(dim, dim, zero);
    for alpha in &draws {
        let moved = displacement_block(*alpha, dim, factor.nrows()) * &factor;
        let term = &moved * moved.adjoint();
        for (acc, (sq, t)) in sum.iter_mut().zip(sum_sq.iter_mut().zip(term.iter())) {
            *acc += t;
            *sq += Complex64::new(t.re * t.re, t.im * t.im);
        }
    }
    let n = draws.len() as f64;
    let mean = sum / Complex64::from(n);
    let std_err = if draws.len() > 1 {
        DMatrix::from_fn(dim, dim, |i, j| {
            let m = mean[(i, j)];
            let sq = sum_sq[(i, j)];
            let var_re = ((sq.re / n - m.re * m.re) * n / (n - 1.0)).max(0.0);
            let var_im = ((sq.im / n - m.im * m.im) * n / (n - 1.0)).max(0.0);
            Complex64::new((var_re / n).sqrt(), (var_im / n).sqrt())
        })
    } else {
        DMatrix::from_element(dim, dim, Complex64::new(f64::INFINITY, f64::INFINITY))
    };
    Ok(McEstimate { output: DensityMatrix::from_raw(hermitize(mean), rho.tail()), std_err })
}

/// The seeded displacement draws used by the Monte-Carlo route.
pub fn sample_displacements(noise: ChannelNoise, mc: McSpec) -> Vec<Complex64> {
    let sigma = (noise.gamma() / 4.0).sqrt();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    (0..mc.samples)
        .map(|_| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect()
}
