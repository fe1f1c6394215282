//! Channel fidelity by several independent routes.
//!
//! | route | integrand | function |
//! |---|---|---|
//! | Weyl | `∫ G(α) \|C_ψ(α)\|²` | [`fidelity_pure`] |
//! | direct | `⟨ψ\|Φ(ρ)\|ψ⟩` | [`fidelity_pure_direct`] |
//! | Wigner | `π ∫ (G ⋆ W_ψ) W_ψ` | [`fidelity_wigner`] |
//! | two-copy | `Tr(A_γ ρ_D)` after a 50:50 beamsplitter | [`fidelity_a_gamma`] |
//! | sampling | `⟨\|C_ψ(α)\|²⟩_G` | [`fidelity_pure_mc`] |

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{kraus_weights, sample_displacements, KrausNode, McSpec, QuadratureSpec};
use crate::error::{Error, Result};
use crate::fock::{displacement_block, number_state, DensityMatrix, TruncatedPureState};
use crate::phasespace::{weyl_of_block, wigner_convolve, wigner_grid, ChannelNoise, GridSpec};

/// Convergence limit for the quadrature routes.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Largest per-mode dimension accepted by the two-mode routes.
pub const TWO_MODE_GUARD: usize = 32;
/// Default Bose-Einstein ensemble cutoff.
pub const DEFAULT_ENSEMBLE_NMAX: usize = 40;
/// Slack allowed above the physical range before a value is rejected as
/// out of bounds.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WeylQuadrature,
    WignerOverlap,
    DirectOverlap,
    AGamma,
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::WeylQuadrature => "weyl_quadrature",
            Method::WignerOverlap => "wigner_overlap",
            Method::DirectOverlap => "direct_overlap",
            Method::AGamma => "a_gamma",
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A fidelity in `[0, 1]` with the route that produced it.
///
/// Raw values within [`BOUND_SLACK`] outside `[0, 1]` are clamped; the
/// unclamped number is kept in `raw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityValue {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
    pub raw: f64,
}

impl FidelityValue {
    pub fn new(raw: f64, method: Method, error_estimate: f64) -> Result<Self> {
        if !raw.is_finite() || raw < -BOUND_SLACK || raw > 1.0 + BOUND_SLACK {
            return Err(Error::Accuracy {
                what: "fidelity outside [0, 1]",
                value: raw,
                limit: 1.0,
                hint: "raise the truncation dim or the quadrature order",
            });
        }
        Ok(FidelityValue { value: raw.clamp(0.0, 1.0), method, error_estimate: error_estimate.abs(), raw })
    }
}

/// Weighted mixture of pure states. Probabilities plus the truncated
/// `tail` sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    members: Vec<(f64, TruncatedPureState)>,
    tail: f64,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, TruncatedPureState)>) -> Result<Self> {
        Self::with_tail(members, 0.0)
    }

    /// An ensemble whose members omit probability `tail`.
    pub fn with_tail(members: Vec<(f64, TruncatedPureState)>, tail: f64) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidState("ensemble has no members".into()));
        }
        if let Some((p, _)) = members.iter().find(|(p, _)| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidState(format!("probability {p} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&tail) {
            return Err(Error::InvalidState(format!("tail {tail} outside [0, 1]")));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum::<f64>() + tail;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Ensemble { members, tail })
    }

    /// Number states `|0⟩..|n_max⟩` with Bose-Einstein weights; the omitted
    /// geometric tail is `(n̄/(1+n̄))^{n_max+1}`.
    pub fn bose_einstein(nbar: f64, n_max: usize) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::domain(format!("mean photon number must be nonnegative, got {nbar}")));
        }
        let ratio = nbar / (1.0 + nbar);
        let weights = crate::fock::bose_einstein_weights(nbar, n_max + 1);
        let members = weights
            .into_iter()
            .enumerate()
            .map(|(n, p)| Ok((p, number_state(n, n + 1)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::with_tail(members, ratio.powi(n_max as i32 + 1))
    }

    pub fn members(&self) -> &[(f64, TruncatedPureState)] {
        &self.members
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `Σ p_k |ψ_k⟩⟨ψ_k|`, renormalized, on the largest member dimension.
    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        let dim = self.members.iter().map(|(_, s)| s.dim()).max().unwrap_or(1);
        let mut mat = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for (p, state) in &self.members {
            let v = state.resized(dim)?;
            mat += v.amps() * v.amps().adjoint() * Complex64::from(*p);
        }
        let kept = 1.0 - self.tail;
        Ok(DensityMatrix::from_raw(mat / Complex64::from(kept), self.tail))
    }
}

fn weyl_integral(rho: &DMatrix<Complex64>, support: usize, nodes: &[KrausNode]) -> f64 {
    nodes
        .iter()
        .map(|n| n.weight * weyl_of_block(rho, support, n.alpha).norm_sqr())
        .sum()
}

fn weyl_route(rho: &DMatrix<Complex64>, support: usize, noise: ChannelNoise, quad: QuadratureSpec) -> Result<(f64, f64)> {
    if noise.is_identity() {
        let c0 = weyl_of_block(rho, support, Complex64::new(0.0, 0.0));
        return Ok((c0.norm_sqr(), 0.0));
    }
    quad.check_accuracy_order()?;
    with_error_estimate(quad, |q| Ok(weyl_integral(rho, support, &kraus_weights(noise, q)?)))
}

/// Evaluates at orders `N`, `N − N/4` and `N − N/2` and returns the
/// order-`N` value with an error estimate. With geometric convergence at
/// ratio `r = d₁/d₂` per step, the remaining error is `d₁ r/(1−r)`; if the
/// differences do not shrink, `d₁` itself is reported.
fn with_error_estimate(quad: QuadratureSpec, mut eval: impl FnMut(QuadratureSpec) -> Result<f64>) -> Result<(f64, f64)> {
    let n = quad.order_per_axis();
    let f0 = eval(quad)?;
    let f1 = eval(quad.with_order(n - n / 4))?;
    let f2 = eval(quad.with_order(n - n / 2))?;
    let (d1, d2) = ((f0 - f1).abs(), (f1 - f2).abs());
    let err = if d1 < d2 {
        let r = d1 / d2;
        d1 * r / (1.0 - r)
    } else {
        d1
    };
    Ok((f0, err))
}

fn converged(err: f64) -> Result<()> {
    if err > QUADRATURE_TOL {
        return Err(Error::Accuracy {
            what: "quadrature error estimate",
            value: err,
            limit: QUADRATURE_TOL,
            hint: "raise the quadrature order",
        });
    }
    Ok(())
}

fn pure_block(psi: &TruncatedPureState) -> (DMatrix<Complex64>, usize) {
    let s = psi.support();
    let v = psi.amps().rows(0, s);
    (&v * v.adjoint(), s)
}

/// `F = ∫ d²α G(α) |C_ψ(α)|²` by Gauss-Hermite quadrature.
pub fn fidelity_pure(psi: &TruncatedPureState, noise: ChannelNoise, quad: QuadratureSpec) -> Result<FidelityValue> {
    let (rho, s) = pure_block(psi);
    let (f, err) = weyl_route(&rho, s, noise, quad)?;
    converged(err)?;
    FidelityValue::new(f, Method::WeylQuadrature, err)
}

/// `⟨ψ|Φ(|ψ⟩⟨ψ|)|ψ⟩` through the density-matrix channel.
///
/// Only the support block of the output is needed for the overlap, and
/// displacement blocks are exact, so the channel is evaluated on that
/// block.
pub fn fidelity_pure_direct(psi: &TruncatedPureState, noise: ChannelNoise, quad: QuadratureSpec) -> Result<FidelityValue> {
    if noise.is_identity() {
        return FidelityValue::new(1.0, Method::DirectOverlap, 0.0);
    }
    quad.check_accuracy_order()?;
    let s = psi.support();
    let v = psi.amps().rows(0, s).into_owned();
    let overlap = |nodes: Vec<KrausNode>| -> f64 {
        let mut out = DMatrix::from_element(s, s, Complex64::new(0.0, 0.0));
        for node in nodes {
            let moved = displacement_block(node.alpha, s, s) * &v;
            out.gemm(Complex64::from(node.weight), &moved, &moved.adjoint(), Complex64::from(1.0));
        }
        v.dotc(&(&out * &v)).re
    };
    let (fine, err) = with_error_estimate(quad, |q| Ok(overlap(kraus_weights(noise, q)?)))?;
    converged(err)?;
    FidelityValue::new(fine, Method::DirectOverlap, err)
}

/// `F = π ∫ W_{Φ(ψ)} W_ψ`, with `W_{Φ(ψ)}` from FFT convolution on `grid`.
/// The error estimate is the boundary-ring mass of the convolved grid.
pub fn fidelity_wigner(psi: &TruncatedPureState, noise: ChannelNoise, grid: &GridSpec) -> Result<FidelityValue> {
    let w = wigner_grid(&psi.density_matrix(), grid);
    let out = wigner_convolve(&w, noise);
    let f = PI * out.overlap(&w);
    FidelityValue::new(f, Method::WignerOverlap, out.boundary_mass() + w.boundary_mass())
}

/// Sample mean of `|C_ψ(α)|²` over seeded draws from `G`; the error
/// estimate is the standard error.
pub fn fidelity_pure_mc(psi: &TruncatedPureState, noise: ChannelNoise, mc: McSpec) -> Result<FidelityValue> {
    if noise.is_identity() {
        return Err(Error::domain("gamma = 0 gives degenerate sampling; use a quadrature route"));
    }
    let (rho, s) = pure_block(psi);
    let draws = sample_displacements(noise, mc);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for alpha in &draws {
        let x = weyl_of_block(&rho, s, *alpha).norm_sqr();
        sum += x;
        sum_sq += x * x;
    }
    let n = draws.len() as f64;
    let mean = sum / n;
    let stderr = if draws.len() > 1 {
        ((sum_sq / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()
    } else {
        f64::INFINITY
    };
    FidelityValue::new(mean, Method::MonteCarlo, stderr)
}

/// `F_e = ∫ d²α G(α) |C_ρ(α)|²`.
///
/// `F_e` is quadratic in `ρ`, so renormalizing a truncated state moves it by
/// at most about twice the truncated weight; that is added to the estimate.
pub fn entanglement_fidelity(rho: &DensityMatrix, noise: ChannelNoise, quad: QuadratureSpec) -> Result<FidelityValue> {
    let s = rho.support();
    let block = rho.matrix().view((0, 0), (s, s)).into_owned();
    let (f, err) = weyl_route(&block, s, noise, quad)?;
    converged(err)?;
    FidelityValue::new(f, Method::WeylQuadrature, err + 2.0 * rho.tail())
}

/// Entanglement fidelity from the purification `|ψ⟩ = Σ_n √ρ|n⟩⊗|n⟩`:
/// `Σ_j w_j |⟨ψ|D(α_j)⊗I|ψ⟩|²`. Needs `dim ≤ 32`.
pub fn entanglement_fidelity_via_purification(
    rho: &DensityMatrix,
    noise: ChannelNoise,
    quad: QuadratureSpec,
) -> Result<FidelityValue> {
    if rho.dim() > TWO_MODE_GUARD {
        return Err(Error::DimensionGuard { dim: rho.dim(), max: TWO_MODE_GUARD });
    }
    let s = rho.support();
    let root = rho.sqrt().view((0, 0), (s, s)).into_owned();
    let norm: f64 = root.iter().map(|z| z.norm_sqr()).sum();
    if noise.is_identity() {
        return FidelityValue::new(norm * norm, Method::DirectOverlap, 2.0 * rho.tail());
    }
    quad.check_accuracy_order()?;
    let integral = |nodes: Vec<KrausNode>| -> f64 {
        nodes
            .iter()
            .map(|n| {
                let moved = displacement_block(n.alpha, s, s) * &root;
                let amp: Complex64 = root.iter().zip(moved.iter()).map(|(a, b)| a.conj() * b).sum();
                n.weight * amp.norm_sqr()
            })
            .sum()
    };
    let (fine, err) = with_error_estimate(quad, |q| Ok(integral(kraus_weights(noise, q)?)))?;
    converged(err)?;
    FidelityValue::new(fine, Method::DirectOverlap, err + 2.0 * rho.tail())
}

/// `Σ p_k F(ψ_k, γ)` over the listed members.
///
/// Members are evaluated without the per-member convergence check: high
/// members of long ensembles carry negligible weight. The error estimate
/// is the weighted quadrature error estimate plus the omitted tail times the
/// maximum fidelity.
pub fn ensemble_fidelity(ens: &Ensemble, noise: ChannelNoise, quad: QuadratureSpec) -> Result<FidelityValue> {
    let mut total = 0.0;
    let mut err = 0.0;
    for (p, psi) in &ens.members {
        let (rho, s) = pure_block(psi);
        let (f, e) = weyl_route(&rho, s, noise, quad)?;
        total += p * f;
        err += p * e;
    }
    converged(err)?;
    let bound = 1.0 / (1.0 + noise.gamma() / 2.0);
    FidelityValue::new(total, Method::WeylQuadrature, err + ens.tail * bound)
}

/// Two-copy route: `F = Tr(A_γ ρ_D)` with
/// `A_γ = (1+γ/2)^{−1} ((1−γ/2)/(1+γ/2))^{d†d}`, where `D` is the
/// difference port of a 50:50 beamsplitter fed with `|ψ⟩⊗|ψ⟩`.
///
/// The beamsplitter conserves total photon number, so it is applied
/// exactly on each fixed-`N` block as `exp(−(π/4)(a†b − b†a))`. At γ = 2
/// the base vanishes and only the `D`-vacuum term survives.
pub fn fidelity_a_gamma(psi: &TruncatedPureState, noise: ChannelNoise) -> Result<FidelityValue> {
    if psi.dim() > TWO_MODE_GUARD {
        return Err(Error::DimensionGuard { dim: psi.dim(), max: TWO_MODE_GUARD });
    }
    let p_d = difference_port_distribution(psi);
    let g = noise.gamma();
    let base = (1.0 - g / 2.0) / (1.0 + g / 2.0);
    let f: f64 = p_d.iter().enumerate().map(|(k, p)| base.powi(k as i32) * p).sum::<f64>() / (1.0 + g / 2.0);
    let norm_defect = (p_d.iter().sum::<f64>() - 1.0).abs();
    FidelityValue::new(f, Method::AGamma, norm_defect)
}

/// Photon-number distribution of the difference port for `|ψ⟩⊗|ψ⟩`.
pub fn difference_port_distribution(psi: &TruncatedPureState) -> Vec<f64> {
    let s = psi.support();
    let amps = psi.amps();
    let max_n = 2 * (s - 1);
    let mut p_d = vec![0.0; max_n + 1];
    for total in 0..=max_n {
        let len = total + 1;
        let mut re = DVector::zeros(len);
        let mut im = DVector::zeros(len);
        for i in 0..len {
            let j = total - i;
            if i < s && j < s {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                let c = amps[i] * amps[j] * sign;
                re[i] = c.re;
                im[i] = c.im;
            }
        }
        if re.iter().chain(im.iter()).all(|x| *x == 0.0) {
            continue;
        }
        let mut gen = DMatrix::<f64>::zeros(len, len);
        for i in 0..total {
            let amp = (((i + 1) * (total - i)) as f64).sqrt();
            gen[(i + 1, i)] = amp;
            gen[(i, i + 1)] = -amp;
        }
        let u = (gen * (-PI / 4.0)).exp();
        let (re, im) = (&u * re, &u * im);
        for c in 0..len {
            p_d[total - c] += re[c] * re[c] + im[c] * im[c];
        }
    }
    p_d
}

/// `|F(ψ,γ) − (2/γ) F(ψ,4/γ)|` with the Weyl route on both sides; the
/// second evaluation uses the same order with a scale matched to `4/γ`.
pub fn check_scaling_law(psi: &TruncatedPureState, noise: ChannelNoise, quad: QuadratureSpec) -> Result<f64> {
    if noise.is_identity() {
        return Err(Error::domain("the scaling law needs gamma > 0"));
    }
    let g = noise.gamma();
    let dual = noise.dual()?;
    let lhs = fidelity_pure(psi, noise, quad)?.raw;
    let rhs = fidelity_pure(psi, dual, QuadratureSpec::matched(quad.order_per_axis(), dual))?.raw;
    Ok((lhs - 2.0 / g * rhs).abs())
}

/// `value ≤ 1/(1+γ/2) + 1e-9`.
pub fn check_max_bound(value: &FidelityValue, noise: ChannelNoise) -> bool {
    value.value <= 1.0 / (1.0 + noise.gamma() / 2.0) + BOUND_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, squeezed_state, superposition01, thermal_state_with_tol, SqueezeSpec, ThermalSpec};

    fn noise(g: f64) -> ChannelNoise {
        ChannelNoise::new(g).unwrap()
    }

    fn quad(g: f64) -> QuadratureSpec {
        QuadratureSpec::for_noise(noise(g))
    }

    // F(|1⟩,γ) and F(|2⟩,γ) as explicit rationals
    fn f1(g: f64) -> f64 {
        2.0 * (4.0 + g * g) / (2.0 + g).powi(3)
    }

    fn f2(g: f64) -> f64 {
        2.0 * (16.0 + 16.0 * g * g + g.powi(4)) / (2.0 + g).powi(5)
    }

    #[test]
    fn weyl_route_examples() {
        let one = number_state(1, 64).unwrap();
        let f = fidelity_pure(&one, noise(1.0), quad(1.0)).unwrap();
        assert!((f.value - 10.0 / 27.0).abs() < 1e-12, "{f:?}");
        assert_eq!(f.method, Method::WeylQuadrature);
        let coh = coherent_state(Complex64::new(1.2, -0.4), 64).unwrap();
        for g in [0.5, 1.0, 3.0] {
            let f = fidelity_pure(&coh, noise(g), quad(g)).unwrap();
            assert!((f.value - 1.0 / (1.0 + g / 2.0)).abs() < 1e-8);
            assert!(check_max_bound(&f, noise(g)));
        }
        assert_eq!(fidelity_pure(&one, noise(0.0), quad(0.0)).unwrap().value, 1.0);
    }

    #[test]
    fn direct_route_examples() {
        let vac = number_state(0, 64).unwrap();
        assert!((fidelity_pure_direct(&vac, noise(2.0), quad(2.0)).unwrap().value - 0.5).abs() < 1e-12);
        let two = number_state(2, 64).unwrap();
        assert!((fidelity_pure_direct(&two, noise(2.0), quad(2.0)).unwrap().value - 3.0 / 16.0).abs() < 1e-12);
        for g in [0.5, 4.0] {
            let d = fidelity_pure_direct(&two, noise(g), quad(g)).unwrap().value;
            assert!((d - f2(g)).abs() < 1e-10);
        }
    }

    #[test]
    fn wigner_route_examples() {
        let spec = GridSpec::default();
        let vac = number_state(0, 8).unwrap();
        let f = fidelity_wigner(&vac, noise(1.0), &spec).unwrap();
        assert!((f.value - 2.0 / 3.0).abs() < 1e-4, "{f:?}");
        let one = number_state(1, 8).unwrap();
        assert!((fidelity_wigner(&one, noise(0.0), &spec).unwrap().value - 1.0).abs() < 1e-4);
        assert!((fidelity_wigner(&one, noise(1.0), &spec).unwrap().value - f1(1.0)).abs() < 1e-4);
    }

    #[test]
    fn a_gamma_examples() {
        let coh = coherent_state(Complex64::new(0.8, 0.5), 24).unwrap();
        let p = difference_port_distribution(&coh);
        assert!((p[0] - 1.0).abs() < 1e-9, "difference port not in vacuum: {p:?}");
        for g in [0.5, 2.0, 3.0] {
            let f = fidelity_a_gamma(&coh, noise(g)).unwrap();
            assert!((f.value - 1.0 / (1.0 + g / 2.0)).abs() < 1e-8);
        }
        let one = number_state(1, 24).unwrap();
        assert!((fidelity_a_gamma(&one, noise(1.0)).unwrap().value - 10.0 / 27.0).abs() < 1e-12);
        let two = number_state(2, 24).unwrap();
        for g in [0.5, 2.0, 4.0] {
            assert!((fidelity_a_gamma(&two, noise(g)).unwrap().value - f2(g)).abs() < 1e-12);
        }
        let sup = superposition01(24).unwrap();
        assert!((fidelity_a_gamma(&sup, noise(0.0)).unwrap().value - 1.0).abs() < 1e-12);
        let big = number_state(0, 33).unwrap();
        assert!(matches!(fidelity_a_gamma(&big, noise(1.0)), Err(Error::DimensionGuard { .. })));
    }

    #[test]
    fn entanglement_examples() {
        let th = thermal_state_with_tol(&ThermalSpec::new(1.0).unwrap(), 64, 1e-15).unwrap();
        let f = entanglement_fidelity(&th, noise(1.0), quad(1.0)).unwrap();
        assert!((f.value - 0.4).abs() < 1e-9, "{f:?}");
        assert_eq!(entanglement_fidelity(&th, noise(0.0), quad(0.0)).unwrap().value, 1.0);

        let one = number_state(1, 16).unwrap();
        let e = entanglement_fidelity(&one.density_matrix(), noise(0.7), quad(0.7)).unwrap();
        let p = fidelity_pure(&one, noise(0.7), quad(0.7)).unwrap();
        assert!((e.value - p.value).abs() < 1e-10);

        let small = thermal_state_with_tol(&ThermalSpec::new(1.0).unwrap(), 16, 1e-4).unwrap();
        let pur = entanglement_fidelity_via_purification(&small, noise(1.0), quad(1.0)).unwrap();
        let weyl = entanglement_fidelity(&small, noise(1.0), quad(1.0)).unwrap();
        assert!((pur.value - 0.4).abs() < 1e-4);
        assert!((pur.value - weyl.value).abs() < 1e-7);
        assert!((entanglement_fidelity_via_purification(&small, noise(0.0), quad(0.0)).unwrap().value - 1.0).abs() < 1e-12);
        let sq = squeezed_state(&SqueezeSpec::new(0.3).unwrap(), 24).unwrap();
        let a = entanglement_fidelity_via_purification(&sq.density_matrix(), noise(0.5), quad(0.5)).unwrap();
        let b = fidelity_pure(&sq, noise(0.5), quad(0.5)).unwrap();
        assert!((a.value - b.value).abs() < 1e-7);
        let big = thermal_state_with_tol(&ThermalSpec::new(1.0).unwrap(), 40, 1e-4).unwrap();
        assert!(entanglement_fidelity_via_purification(&big, noise(1.0), quad(1.0)).is_err());
    }

    #[test]
    fn ensemble_examples() {
        let ens = Ensemble::bose_einstein(1.0, DEFAULT_ENSEMBLE_NMAX).unwrap();
        let f = ensemble_fidelity(&ens, noise(1.0), quad(1.0)).unwrap();
        assert!((f.value - 1.0 / 4.25f64.sqrt()).abs() < 1e-6, "{f:?}");
        let rho = ens.density_matrix().unwrap();
        let e = entanglement_fidelity(&rho, noise(1.0), quad(1.0)).unwrap();
        assert!(e.value <= f.value);

        let one = number_state(1, 8).unwrap();
        let single = Ensemble::new(vec![(1.0, one.clone())]).unwrap();
        let a = ensemble_fidelity(&single, noise(0.5), quad(0.5)).unwrap();
        assert_eq!(a.value, fidelity_pure(&one, noise(0.5), quad(0.5)).unwrap().value);
        assert!(Ensemble::new(vec![(0.5, one.clone())]).is_err());
        assert!(Ensemble::new(vec![(1.5, one.clone()), (-0.5, one)]).is_err());
    }

    #[test]
    fn scaling_law_examples() {
        let one = number_state(1, 64).unwrap();
        assert_eq!(check_scaling_law(&one, noise(2.0), quad(2.0)).unwrap(), 0.0);
        assert!(check_scaling_law(&one, noise(1.0), quad(1.0)).unwrap() < 1e-7);
        let sq = squeezed_state(&SqueezeSpec::new(1.0).unwrap(), 64).unwrap();
        assert!(check_scaling_law(&sq, noise(0.5), quad(0.5)).unwrap() < 1e-6);
        assert!(check_scaling_law(&one, noise(0.0), quad(0.0)).is_err());
    }

    #[test]
    fn monte_carlo_route() {
        let one = number_state(1, 16).unwrap();
        let mc = McSpec::new(20_000, 11).unwrap();
        let f = fidelity_pure_mc(&one, noise(1.0), mc).unwrap();
        assert!((f.value - 10.0 / 27.0).abs() < 5.0 * f.error_estimate);
        assert_eq!(f, fidelity_pure_mc(&one, noise(1.0), mc).unwrap());
    }

    #[test]
    fn low_order_is_not_converged() {
        let two = number_state(2, 16).unwrap();
        let q = QuadratureSpec::matched(4, noise(1.0));
        assert!(matches!(fidelity_pure(&two, noise(1.0), q), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn clamping() {
        let v = FidelityValue::new(1.0 + 5e-10, Method::ClosedForm, 0.0).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.raw, 1.0 + 5e-10);
        assert_eq!(FidelityValue::new(-1e-12, Method::ClosedForm, 0.0).unwrap().value, 0.0);
        assert!(FidelityValue::new(1.1, Method::ClosedForm, 0.0).is_err());
        assert_eq!(Method::AGamma.to_string(), "a_gamma");
    }
}
