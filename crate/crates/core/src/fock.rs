//! Truncated Fock-space states and operators.
//!
//! States live on the basis `|0⟩ … |dim-1⟩`. Constructors for states with
//! infinite support (coherent, squeezed, thermal) compute the weight that
//! falls outside the truncation, refuse to build the state when it exceeds
//! the tail tolerance, and otherwise renormalize and keep the lost weight
//! in [`TruncatedPureState::tail`] / [`DensityMatrix::tail`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Default tail tolerance for state constructors.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
/// Default truncation for single-mode work.
pub const DEFAULT_DIM: usize = 64;
/// Default per-mode truncation for two-mode constructions.
pub const DEFAULT_TWO_MODE_DIM: usize = 24;
/// Smallest eigenvalue tolerated in a density matrix.
pub const POSITIVITY_TOL: f64 = -1e-9;
/// Allowed deviation of `Tr ρ` from 1 for a [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-6;
const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Normalized pure state over a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPureState {
    amps: DVector<Complex64>,
    tail: f64,
}

impl TruncatedPureState {
    /// Normalizes `amps`. Fails on an empty or zero vector.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        Self::normalized(DVector::from_vec(amps), 0.0)
    }

    fn normalized(amps: DVector<Complex64>, tail: f64) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidState("dimension must be at least 1".into()));
        }
        let norm = amps.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(format!("cannot normalize vector of norm {norm}")));
        }
        Ok(TruncatedPureState { amps: amps / Complex64::from(norm), tail })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// Weight lost to truncation before renormalization.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix {
            mat: &self.amps * self.amps.adjoint(),
            tail: self.tail,
        }
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expect(&self, op: &DMatrix<Complex64>) -> Complex64 {
        self.amps.dotc(&(op * &self.amps))
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(k, a)| k as f64 * a.norm_sqr())
            .sum()
    }

    /// `⟨self|other⟩`; both states must share a truncation.
    pub fn inner(&self, other: &TruncatedPureState) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    /// Same state on a different truncation. Growing pads with zeros;
    /// shrinking drops the upper levels, renormalizes, and adds the dropped
    /// weight to the tail.
    pub fn resized(&self, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidState("dimension must be at least 1".into()));
        }
        let mut amps = DVector::from_element(dim, ZERO);
        let keep = dim.min(self.dim());
        amps.rows_mut(0, keep).copy_from(&self.amps.rows(0, keep));
        let dropped: f64 = self.amps.iter().skip(keep).map(|a| a.norm_sqr()).sum();
        Self::normalized(amps, self.tail + dropped)
    }

    /// Highest level with non-negligible amplitude, plus one.
    pub fn support(&self) -> usize {
        self.amps
            .iter()
            .rposition(|a| a.norm_sqr() > 1e-30)
            .map_or(1, |k| k + 1)
    }
}

/// Hermitian, positive, unit-trace matrix over a truncated Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
    tail: f64,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_raw(mat, 0.0);
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(mat: DMatrix<Complex64>, tail: f64) -> Self {
        DensityMatrix { mat, tail }
    }

    fn validate(&self) -> Result<()> {
        let n = self.mat.nrows();
        if n == 0 || n != self.mat.ncols() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square and non-empty, got {}x{}",
                self.mat.nrows(),
                self.mat.ncols()
            )));
        }
        if self.mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let skew = self.hermiticity_defect();
        if skew > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {skew:.2e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Weight lost to truncation (construction tail or channel leakage).
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `max |ρ_{mn} − conj(ρ_{nm})|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.mat.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.hermitian_part().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    fn hermitian_part(&self) -> DMatrix<Complex64> {
        (&self.mat + self.mat.adjoint()) * Complex64::from(0.5)
    }

    /// `Tr(ρ A)`.
    pub fn expect(&self, op: &DMatrix<Complex64>) -> Complex64 {
        (&self.mat * op).trace()
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.mat
            .diagonal()
            .iter()
            .enumerate()
            .map(|(k, z)| k as f64 * z.re)
            .sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `ρ ≈ Σ λ_k |v_k⟩⟨v_k|` keeping eigenvalues above `cutoff`; returns the
    /// columns `√λ_k v_k`.
    pub fn factor(&self, cutoff: f64) -> DMatrix<Complex64> {
        let eig = self.hermitian_part().symmetric_eigen();
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&k| eig.eigenvalues[k] > cutoff)
            .collect();
        let mut out = DMatrix::from_element(self.dim(), keep.len().max(1), ZERO);
        for (col, &k) in keep.iter().enumerate() {
            let s = Complex64::from(eig.eigenvalues[k].sqrt());
            out.set_column(col, &(eig.eigenvectors.column(k) * s));
        }
        out
    }

    /// Principal square root `√ρ` (negative rounding noise clipped to zero).
    pub fn sqrt(&self) -> DMatrix<Complex64> {
        let eig = self.hermitian_part().symmetric_eigen();
        let n = self.dim();
        let mut out = DMatrix::from_element(n, n, ZERO);
        for k in 0..n {
            let s = eig.eigenvalues[k].max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            out += (&v * v.adjoint()) * Complex64::from(s);
        }
        out
    }

    /// Highest level with non-negligible population, plus one. Rows and
    /// columns beyond it vanish for a positive matrix.
    pub fn support(&self) -> usize {
        self.mat
            .diagonal()
            .iter()
            .rposition(|z| z.re.abs() > 1e-30)
            .map_or(1, |k| k + 1)
    }

    /// Photon-number distribution `⟨k|ρ|k⟩`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.mat.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Squeezed vacuum parameters; `|μ| = tanh r = √(n̄/(1+n̄))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeSpec {
    nbar: f64,
    mu: Complex64,
}

impl SqueezeSpec {
    /// Real, positive `μ` for mean photon number `nbar`.
    pub fn new(nbar: f64) -> Result<Self> {
        Self::with_phase(nbar, 0.0)
    }

    pub fn with_phase(nbar: f64, phase: f64) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::domain(format!("squeezing nbar must be finite and >= 0, got {nbar}")));
        }
        let mag = (nbar / (1.0 + nbar)).sqrt();
        Ok(SqueezeSpec { nbar, mu: Complex64::from_polar(mag, phase) })
    }

    pub fn from_mu(mu: Complex64) -> Result<Self> {
        let m2 = mu.norm_sqr();
        if !(m2 < 1.0) {
            return Err(Error::domain(format!("|mu| must be < 1, got {}", m2.sqrt())));
        }
        Ok(SqueezeSpec { nbar: m2 / (1.0 - m2), mu })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }
}

/// Thermal state parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    nbar: f64,
}

impl ThermalSpec {
    pub fn new(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::domain(format!("thermal nbar must be finite and >= 0, got {nbar}")));
        }
        Ok(ThermalSpec { nbar })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidState("dimension must be at least 1".into()));
    }
    Ok(())
}

fn finish_truncated(amps: DVector<Complex64>, tol: f64) -> Result<TruncatedPureState> {
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let lost = (1.0 - kept).max(0.0);
    if lost > tol {
        return Err(Error::Truncation { dim: amps.len(), lost, tol });
    }
    TruncatedPureState::normalized(amps, lost)
}

/// `|n⟩` in a `dim`-level truncation.
pub fn number_state(n: usize, dim: usize) -> Result<TruncatedPureState> {
    check_dim(dim)?;
    if n >= dim {
        return Err(Error::OutOfRange { index: n, dim });
    }
    let mut amps = DVector::from_element(dim, ZERO);
    amps[n] = Complex64::from(1.0);
    Ok(TruncatedPureState { amps, tail: 0.0 })
}

/// Unnormalized coherent amplitudes `e^{−|α|²/2} α^k/√k!`, `k < dim`.
pub fn coherent_amplitudes(alpha: Complex64, dim: usize) -> DVector<Complex64> {
    let mut amps = DVector::from_element(dim, ZERO);
    if dim == 0 {
        return amps;
    }
    amps[0] = Complex64::from((-0.5 * alpha.norm_sqr()).exp());
    for k in 1..dim {
        amps[k] = amps[k - 1] * alpha / (k as f64).sqrt();
    }
    amps
}

pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<TruncatedPureState> {
    coherent_state_with_tol(alpha, dim, DEFAULT_TAIL_TOL)
}

pub fn coherent_state_with_tol(alpha: Complex64, dim: usize, tail_tol: f64) -> Result<TruncatedPureState> {
    check_dim(dim)?;
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::domain("coherent amplitude must be finite"));
    }
    finish_truncated(coherent_amplitudes(alpha, dim), tail_tol)
}

/// Unnormalized squeezed-vacuum amplitudes
/// `(1−|μ|²)^{1/4} (−μ/2)^k √((2k)!)/k!` on `|2k⟩`.
pub fn squeezed_amplitudes(spec: &SqueezeSpec, dim: usize) -> DVector<Complex64> {
    let mut amps = DVector::from_element(dim, ZERO);
    if dim == 0 {
        return amps;
    }
    let mu = spec.mu();
    amps[0] = Complex64::from((1.0 - mu.norm_sqr()).powf(0.25));
    let step = -mu * 0.5;
    let mut k = 1;
    while 2 * k < dim {
        let kf = k as f64;
        let ratio = ((2.0 * kf) * (2.0 * kf - 1.0)).sqrt() / kf;
        amps[2 * k] = amps[2 * k - 2] * step * ratio;
        k += 1;
    }
    amps
}

pub fn squeezed_state(spec: &SqueezeSpec, dim: usize) -> Result<TruncatedPureState> {
    squeezed_state_with_tol(spec, dim, DEFAULT_TAIL_TOL)
}

pub fn squeezed_state_with_tol(spec: &SqueezeSpec, dim: usize, tail_tol: f64) -> Result<TruncatedPureState> {
    check_dim(dim)?;
    finish_truncated(squeezed_amplitudes(spec, dim), tail_tol)
}

/// `(|0⟩ + |1⟩)/√2`.
pub fn superposition01(dim: usize) -> Result<TruncatedPureState> {
    check_dim(dim)?;
    if dim < 2 {
        return Err(Error::OutOfRange { index: 1, dim });
    }
    let mut amps = DVector::from_element(dim, ZERO);
    amps[0] = Complex64::from(1.0);
    amps[1] = Complex64::from(1.0);
    TruncatedPureState::normalized(amps, 0.0)
}

/// Bose-Einstein weights `n̄^k/(1+n̄)^{k+1}` for `k < dim`, not renormalized.
pub fn bose_einstein_weights(nbar: f64, dim: usize) -> Vec<f64> {
    let ratio = nbar / (1.0 + nbar);
    let mut p = 1.0 / (1.0 + nbar);
    (0..dim)
        .map(|_| {
            let out = p;
            p *= ratio;
            out
        })
        .collect()
}

pub fn thermal_state(spec: &ThermalSpec, dim: usize) -> Result<DensityMatrix> {
    thermal_state_with_tol(spec, dim, DEFAULT_TAIL_TOL)
}

pub fn thermal_state_with_tol(spec: &ThermalSpec, dim: usize, tail_tol: f64) -> Result<DensityMatrix> {
    check_dim(dim)?;
    let p = bose_einstein_weights(spec.nbar(), dim);
    // Geometric tail, computed directly rather than as 1 − Σp.
    let lost = (spec.nbar() / (1.0 + spec.nbar())).powi(dim as i32);
    if lost > tail_tol {
        return Err(Error::Truncation { dim, lost, tol: tail_tol });
    }
    let total: f64 = p.iter().sum();
    let mut mat = DMatrix::from_element(dim, dim, ZERO);
    for (k, pk) in p.iter().enumerate() {
        mat[(k, k)] = Complex64::from(pk / total);
    }
    Ok(DensityMatrix::from_raw(mat, lost))
}

/// Random pure state with complex-Gaussian amplitudes on the first `support`
/// levels of a `dim`-level truncation.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, support: usize, dim: usize) -> Result<TruncatedPureState> {
    check_dim(dim)?;
    if support == 0 || support > dim {
        return Err(Error::OutOfRange { index: support, dim });
    }
    let mut amps = DVector::from_element(dim, ZERO);
    for k in 0..support {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        amps[k] = Complex64::new(re, im);
    }
    TruncatedPureState::normalized(amps, 0.0)
}

/// `a` with `⟨m|a|n⟩ = √n δ_{m,n−1}`.
pub fn annihilation_matrix(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |m, n| {
        if n == m + 1 {
            Complex64::from((n as f64).sqrt())
        } else {
            ZERO
        }
    })
}

/// Calls `f(m, n, ⟨m|D(α)|n⟩)` for every `m < rows`, `n < cols`.
///
/// Uses the closed form
/// `⟨j+k|D(α)|j⟩ = √(j!/(j+k)!) α^k e^{−|α|²/2} L_j^{(k)}(|α|²)` and
/// `⟨j|D(α)|j+k⟩ = √(j!/(j+k)!) (−α*)^k e^{−|α|²/2} L_j^{(k)}(|α|²)`,
/// running the Laguerre recurrence upward in `j` with the normalization
/// folded in. A running log-scale keeps large `|α|` finite. Each element is
/// exact (no truncation error), so any sub-block of `D` can be requested.
pub fn for_each_displacement_element(
    alpha: Complex64,
    rows: usize,
    cols: usize,
    mut f: impl FnMut(usize, usize, Complex64),
) {
    let x = alpha.norm_sqr();
    let r = x.sqrt();
    if r == 0.0 {
        for m in 0..rows {
            for n in 0..cols {
                f(m, n, if m == n { Complex64::from(1.0) } else { ZERO });
            }
        }
        return;
    }
    let unit = alpha / r;
    let ln_r = r.ln();
    let mut phase = Complex64::from(1.0);
    let mut ln_kfact = 0.0;
    for k in 0..rows.max(cols) {
        if k > 1 {
            ln_kfact += (k as f64).ln();
        }
        let n_down = cols.min(rows.saturating_sub(k));
        let n_up = if k == 0 { 0 } else { rows.min(cols.saturating_sub(k)) };
        let len = n_down.max(n_up);
        let kf = k as f64;
        let down = phase;
        let up = if k % 2 == 0 { phase.conj() } else { -phase.conj() };
        phase *= unit;
        if len == 0 {
            continue;
        }
        let mut ln_scale = kf * ln_r - 0.5 * x - 0.5 * ln_kfact;
        let mut scale = scale_of(ln_scale);
        let mut emit = |j: usize, v: f64, scale: f64, ln_scale: f64| {
            let val = if scale > 0.0 {
                v * scale
            } else if v == 0.0 {
                0.0
            } else {
                v.signum() * (v.abs().ln() + ln_scale).exp()
            };
            if j < n_down {
                f(j + k, j, down * val);
            }
            if j < n_up {
                f(j, j + k, up * val);
            }
        };
        let mut v_prev = 1.0;
        emit(0, v_prev, scale, ln_scale);
        if len > 1 {
            let mut v = (1.0 + kf - x) / (1.0 + kf).sqrt();
            emit(1, v, scale, ln_scale);
            for j in 1..len - 1 {
                let jf = j as f64;
                let a = (2.0 * jf + 1.0 + kf - x) * ((jf + 1.0) / (jf + 1.0 + kf)).sqrt();
                let b = (jf + kf) * ((jf * (jf + 1.0)) / ((jf + kf) * (jf + kf + 1.0))).sqrt();
                let mut next = (a * v - b * v_prev) / (jf + 1.0);
                if next.abs() > 1e150 {
                    next *= 1e-150;
                    v *= 1e-150;
                    ln_scale += 150.0 * std::f64::consts::LN_10;
                    scale = scale_of(ln_scale);
                }
                v_prev = v;
                v = next;
                emit(j + 1, v, scale, ln_scale);
            }
        }
    }
}

// Below this the direct product would go subnormal; emit via logs instead.
fn scale_of(ln_scale: f64) -> f64 {
    if ln_scale > -700.0 {
        ln_scale.exp()
    } else {
        0.0
    }
}

/// `⟨m|D(α)|n⟩` as a dense matrix. See [`for_each_displacement_element`].
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    let mut d = DMatrix::from_element(dim, dim, ZERO);
    for_each_displacement_element(alpha, dim, dim, |m, n, v| d[(m, n)] = v);
    d
}

/// Rows `m < rows`, columns `n < cols` of `D(α)`.
pub fn displacement_block(alpha: Complex64, rows: usize, cols: usize) -> DMatrix<Complex64> {
    let mut d = DMatrix::from_element(rows, cols, ZERO);
    for_each_displacement_element(alpha, rows, cols, |m, n, v| d[(m, n)] = v);
    d
}

/// `D(α)|ψ⟩` on the first `dim` levels; exact for the truncated `ψ`.
pub fn displace_vector(alpha: Complex64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let dim = psi.len();
    let cols = psi.iter().rposition(|a| *a != ZERO).map_or(0, |k| k + 1);
    let mut out = DVector::from_element(dim, ZERO);
    for_each_displacement_element(alpha, dim, cols, |m, n, v| out[m] += v * psi[n]);
    out
}
