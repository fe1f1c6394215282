//! Weyl characteristic and Wigner functions, and the channel's phase-space
//! action (Gaussian smoothing of `W`, Gaussian damping of `C`).
//!
//! Phase-space points are `α = (q + ip)/√2`. Grids are square lattices in
//! `(q, p)` with `points_per_axis` samples on `[−half_width, half_width]`,
//! both endpoints included, so the lattice is symmetric about the origin.
//! Integrals over `d²α` become Riemann sums with cell area `h²/2`.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::fock::{for_each_displacement_element, DensityMatrix};
use crate::format::sig12;

/// Default grid half-width in `q`, `p` units.
pub const DEFAULT_HALF_WIDTH: f64 = 6.0;
/// Default lattice size per axis.
pub const DEFAULT_POINTS: usize = 128;
/// Mass tolerance for grid coverage and normalization checks.
pub const GRID_TOL: f64 = 1e-6;

/// A phase-space point `α = (q + ip)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    alpha: Complex64,
}

impl PhasePoint {
    pub fn new(alpha: Complex64) -> Result<Self> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::domain("phase-space point must be finite"));
        }
        Ok(PhasePoint { alpha })
    }

    pub fn from_qp(q: f64, p: f64) -> Result<Self> {
        Self::new(Complex64::new(q, p) / 2f64.sqrt())
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn q(&self) -> f64 {
        self.alpha.re * 2f64.sqrt()
    }

    pub fn p(&self) -> f64 {
        self.alpha.im * 2f64.sqrt()
    }
}

impl From<Complex64> for PhasePoint {
    /// Panics on non-finite input; use [`PhasePoint::new`] for fallible construction.
    fn from(alpha: Complex64) -> Self {
        PhasePoint::new(alpha).expect("finite phase-space point")
    }
}

/// Gaussian channel noise `γ ≥ 0`; phase-space variance `σ² = γ/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ChannelNoise {
    gamma: f64,
}

impl ChannelNoise {
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::domain(format!("channel noise gamma must be finite and >= 0, got {gamma}")));
        }
        Ok(ChannelNoise { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn variance(&self) -> f64 {
        self.gamma / 2.0
    }

    pub fn is_identity(&self) -> bool {
        self.gamma == 0.0
    }

    /// Noise density `G(α) = (2/πγ) e^{−2|α|²/γ}`. Undefined at `γ = 0`.
    pub fn density(&self, alpha: Complex64) -> f64 {
        2.0 / (PI * self.gamma) * (-2.0 * alpha.norm_sqr() / self.gamma).exp()
    }

    /// The dual noise `4/γ` of the scaling law.
    pub fn dual(&self) -> Result<Self> {
        if self.gamma == 0.0 {
            return Err(Error::domain("gamma = 0 has no dual"));
        }
        ChannelNoise::new(4.0 / self.gamma)
    }
}

/// Lattice geometry of a [`PhaseGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_width: f64,
    points_per_axis: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::domain(format!("grid half-width must be positive, got {half_width}")));
        }
        if points_per_axis < 2 {
            return Err(Error::domain("grid needs at least 2 points per axis"));
        }
        Ok(GridSpec { half_width, points_per_axis })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points_per_axis - 1) as f64
    }

    /// `d²α` per lattice cell.
    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2) / 2.0
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|i| self.coord(i)).collect()
    }

    /// `α` at lattice site `(iq, ip)`.
    pub fn alpha(&self, iq: usize, ip: usize) -> Complex64 {
        Complex64::new(self.coord(iq), self.coord(ip)) / 2f64.sqrt()
    }

    pub fn len(&self) -> usize {
        self.points_per_axis * self.points_per_axis
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn is_boundary(&self, iq: usize, ip: usize) -> bool {
        let last = self.points_per_axis - 1;
        iq == 0 || ip == 0 || iq == last || ip == last
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { half_width: DEFAULT_HALF_WIDTH, points_per_axis: DEFAULT_POINTS }
    }
}

/// Values on a [`GridSpec`] lattice, stored row-major over `p` then `q`
/// (index `ip * points + iq`).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid<T> {
    spec: GridSpec,
    values: Vec<T>,
}

impl<T: Copy> PhaseGrid<T> {
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(Complex64) -> T) -> Self {
        let m = spec.points_per_axis;
        let mut values = Vec::with_capacity(spec.len());
        for ip in 0..m {
            for iq in 0..m {
                values.push(f(spec.alpha(iq, ip)));
            }
        }
        PhaseGrid { spec, values }
    }

    pub fn from_values(spec: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::domain(format!("grid needs {} values, got {}", spec.len(), values.len())));
        }
        Ok(PhaseGrid { spec, values })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, iq: usize, ip: usize) -> T {
        self.values[ip * self.spec.points_per_axis + iq]
    }
}

impl PhaseGrid<f64> {
    /// Riemann sum `Σ W · h²/2`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// `Σ |W| · h²/2` over the outermost ring of cells.
    pub fn boundary_mass(&self) -> f64 {
        let m = self.spec.points_per_axis;
        let mut acc = 0.0;
        for ip in 0..m {
            for iq in 0..m {
                if self.spec.is_boundary(iq, ip) {
                    acc += self.get(iq, ip).abs();
                }
            }
        }
        acc * self.spec.cell_area()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &PhaseGrid<f64>) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `∫ d²α A(α) B(α)` by Riemann sum.
    pub fn overlap(&self, other: &PhaseGrid<f64>) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.spec.cell_area()
    }

    /// CSV with header `q,p,value`, rows ordered by `p` then `q`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "q,p,value")?;
        let m = self.spec.points_per_axis;
        for ip in 0..m {
            for iq in 0..m {
                writeln!(
                    out,
                    "{},{},{}",
                    sig12(self.spec.coord(iq)),
                    sig12(self.spec.coord(ip)),
                    sig12(self.get(iq, ip))
                )?;
            }
        }
        Ok(())
    }
}

/// `Tr[ρ D(α)] = Σ_{mn} ρ_{nm} ⟨m|D(α)|n⟩`.
pub fn weyl_function(rho: &DensityMatrix, point: PhasePoint) -> Complex64 {
    weyl_of_block(rho.matrix(), rho.support(), point.alpha())
}

pub(crate) fn weyl_of_block(rho: &DMatrix<Complex64>, support: usize, alpha: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for_each_displacement_element(alpha, support, support, |m, n, d| acc += rho[(n, m)] * d);
    acc
}

/// `(2/π) Tr[ρ D(α)(−1)^{a†a}D†(α)]`.
///
/// Evaluated as `(2/π) Tr[ρ D(2α)(−1)^{a†a}]`, which needs only the
/// support block of `D(2α)` and so carries no truncation error.
pub fn wigner_function(rho: &DensityMatrix, point: PhasePoint) -> f64 {
    WignerKernel::new(rho).eval(point.alpha())
}

struct WignerKernel {
    support: usize,
    // ρ_{nm}(−1)^n at [m * support + n]
    signed: Vec<Complex64>,
}

impl WignerKernel {
    fn new(rho: &DensityMatrix) -> Self {
        let s = rho.support();
        let mut signed = Vec::with_capacity(s * s);
        for m in 0..s {
            for n in 0..s {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                signed.push(rho.matrix()[(n, m)] * sign);
            }
        }
        WignerKernel { support: s, signed }
    }

    fn eval(&self, alpha: Complex64) -> f64 {
        let s = self.support;
        let mut acc = Complex64::new(0.0, 0.0);
        for_each_displacement_element(alpha * 2.0, s, s, |m, n, d| acc += self.signed[m * s + n] * d);
        2.0 / PI * acc.re
    }
}

/// Wigner function sampled on a lattice.
///
/// Logs a warning when the state's mean photon number suggests it extends
/// past the grid, or when the boundary ring carries more than [`GRID_TOL`]
/// of mass.
pub fn wigner_grid(rho: &DensityMatrix, spec: &GridSpec) -> PhaseGrid<f64> {
    let radius = (2.0 * rho.mean_photon_number() + 1.0).sqrt() + 3.0;
    if radius > spec.half_width() {
        log::warn!(
            "grid half-width {} may not cover a state with <n> = {:.3}",
            spec.half_width(),
            rho.mean_photon_number()
        );
    }
    let kernel = WignerKernel::new(rho);
    let grid = PhaseGrid::from_fn(*spec, |alpha| kernel.eval(alpha));
    let edge = grid.boundary_mass();
    if edge > GRID_TOL {
        log::warn!("Wigner grid boundary carries mass {edge:.2e}; widen the grid");
    }
    grid
}

/// Weyl function sampled on a lattice (complex values).
pub fn weyl_grid(rho: &DensityMatrix, spec: &GridSpec) -> PhaseGrid<Complex64> {
    let s = rho.support();
    PhaseGrid::from_fn(*spec, |alpha| weyl_of_block(rho.matrix(), s, alpha))
}

/// Wigner function from a sampled Weyl function by direct quadrature of
/// `W(α) = ∫ d²β/π² e^{αβ*−α*β} C(β)`. The Weyl lattice must cover the
/// support of `C` and be fine enough that `W` does not alias.
pub fn wigner_from_weyl(weyl: &PhaseGrid<Complex64>, out: &GridSpec) -> PhaseGrid<f64> {
    // αβ* − α*β = i(p u − q v) for α = (q+ip)/√2, β = (u+iv)/√2
    let src = weyl.spec();
    let us = src.coords();
    let qs = out.coords();
    let ns = src.points_per_axis();
    let no = out.points_per_axis();
    // partial[ip][iv] = Σ_u e^{i p u} C(u, v)
    let mut partial = vec![Complex64::new(0.0, 0.0); no * ns];
    for ip in 0..no {
        let p = qs[ip];
        let phases: Vec<Complex64> = us.iter().map(|&u| Complex64::from_polar(1.0, p * u)).collect();
        for iv in 0..ns {
            let row = &weyl.values()[iv * ns..(iv + 1) * ns];
            partial[ip * ns + iv] = row.iter().zip(&phases).map(|(c, e)| c * e).sum();
        }
    }
    let norm = src.cell_area() / (PI * PI);
    let mut values = Vec::with_capacity(out.len());
    for ip in 0..no {
        for iq in 0..no {
            let q = qs[iq];
            let acc: Complex64 = us
                .iter()
                .enumerate()
                .map(|(iv, &v)| partial[ip * ns + iv] * Complex64::from_polar(1.0, -q * v))
                .sum();
            values.push(acc.re * norm);
        }
    }
    PhaseGrid { spec: *out, values }
}

/// `C_{Φ(ρ)}(α) = e^{−γ|α|²/2} C_ρ(α)`.
pub fn weyl_damp<F>(weyl: F, noise: ChannelNoise) -> impl Fn(PhasePoint) -> Complex64
where
    F: Fn(PhasePoint) -> Complex64,
{
    let gamma = noise.gamma();
    move |point| weyl(point) * (-gamma * point.alpha().norm_sqr() / 2.0).exp()
}

/// `W_{Φ(ρ)} = G ⋆ W_ρ` by zero-padded FFT convolution with the sampled
/// kernel `G(α) = (2/πγ) e^{−2|α|²/γ}`. `γ = 0` returns the input.
pub fn wigner_convolve(grid: &PhaseGrid<f64>, noise: ChannelNoise) -> PhaseGrid<f64> {
    if noise.is_identity() {
        return grid.clone();
    }
    let spec = *grid.spec();
    let m = spec.points_per_axis();
    let size = (2 * m - 1).next_power_of_two();
    let h = spec.spacing();
    let area = spec.cell_area();
    let mut data = vec![Complex64::new(0.0, 0.0); size * size];
    let mut kernel = data.clone();
    for ip in 0..m {
        for iq in 0..m {
            data[ip * size + iq] = Complex64::from(grid.get(iq, ip));
        }
    }
    let offset = m as isize - 1;
    for dp in -offset..=offset {
        for dq in -offset..=offset {
            let alpha = Complex64::new(dq as f64 * h, dp as f64 * h) / 2f64.sqrt();
            let row = dp.rem_euclid(size as isize) as usize;
            let col = dq.rem_euclid(size as isize) as usize;
            kernel[row * size + col] = Complex64::from(noise.density(alpha) * area);
        }
    }
    let mut planner = FftPlanner::new();
    fft2(&mut planner, &mut data, size, false);
    fft2(&mut planner, &mut kernel, size, false);
    for (d, k) in data.iter_mut().zip(&kernel) {
        *d *= k;
    }
    fft2(&mut planner, &mut data, size, true);
    let scale = 1.0 / (size * size) as f64;
    let mut values = Vec::with_capacity(spec.len());
    for ip in 0..m {
        for iq in 0..m {
            values.push(data[ip * size + iq].re * scale);
        }
    }
    let out = PhaseGrid { spec, values };
    let edge = out.boundary_mass();
    if edge > GRID_TOL {
        log::warn!("convolved grid boundary carries mass {edge:.2e}; widen the grid by ~4 sigma");
    }
    out
}

fn fft2(planner: &mut FftPlanner<f64>, buf: &mut [Complex64], size: usize, inverse: bool) {
    let fft = if inverse {
        planner.plan_fft_inverse(size)
    } else {
        planner.plan_fft_forward(size)
    };
    for row in buf.chunks_mut(size) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); size];
    for c in 0..size {
        for r in 0..size {
            col[r] = buf[r * size + c];
        }
        fft.process(&mut col);
        for r in 0..size {
            buf[r * size + c] = col[r];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state, number_state, thermal_state, ThermalSpec};
    use crate::special::laguerre;

    fn pt(re: f64, im: f64) -> PhasePoint {
        PhasePoint::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn weyl_examples() {
        let thermal = thermal_state(&ThermalSpec::new(0.8).unwrap(), 64).unwrap();
        assert!((weyl_function(&thermal, pt(0.0, 0.0)) - 1.0).norm() < 1e-12);
        for &(re, im) in &[(0.3, 0.1), (1.0, -0.5), (0.0, 2.0)] {
            let a = Complex64::new(re, im);
            let c = weyl_function(&thermal, pt(re, im));
            let expect = (-a.norm_sqr() * (0.8 + 0.5)).exp();
            assert!((c - expect).norm() < 1e-12, "{c} vs {expect}");
        }
        for n in 0..6 {
            let rho = number_state(n, 16).unwrap().density_matrix();
            let a = Complex64::new(0.7, 0.4);
            let x = a.norm_sqr();
            let expect = (-x / 2.0).exp() * laguerre(n, 0, x);
            assert!((weyl_function(&rho, a.into()) - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn weyl_hermiticity() {
        let rho = coherent_state(Complex64::new(0.8, -0.3), 32).unwrap().density_matrix();
        for &(re, im) in &[(0.2, 0.9), (-1.1, 0.4), (2.0, 2.0)] {
            let c = weyl_function(&rho, pt(re, im));
            let cm = weyl_function(&rho, pt(-re, -im));
            assert!((cm - c.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn wigner_parity_values() {
        let vac = number_state(0, 8).unwrap().density_matrix();
        let one = number_state(1, 8).unwrap().density_matrix();
        assert!((wigner_function(&vac, pt(0.0, 0.0)) - 2.0 / PI).abs() < 1e-14);
        assert!((wigner_function(&one, pt(0.0, 0.0)) + 2.0 / PI).abs() < 1e-14);
        // vacuum: (2/π) e^{−2|α|²}
        let a = Complex64::new(0.4, -0.7);
        let w = wigner_function(&vac, a.into());
        assert!((w - 2.0 / PI * (-2.0 * a.norm_sqr()).exp()).abs() < 1e-14);
    }

    #[test]
    fn wigner_grid_examples() {
        let spec = GridSpec::default();
        let vac = wigner_grid(&number_state(0, 8).unwrap().density_matrix(), &spec);
        assert!((vac.mass() - 1.0).abs() < 1e-6);
        let one = wigner_grid(&number_state(1, 8).unwrap().density_matrix(), &spec);
        assert!((one.mass() - 1.0).abs() < 1e-6);
        assert!((one.min() + 2.0 / PI).abs() < 0.01);
        let thermal = thermal_state(&ThermalSpec::new(1.0).unwrap(), 64).unwrap();
        // n̄ = 1 has quadrature variance 3/2; widen so the tail is below 1e-9
        let wide = GridSpec::new(9.0, 181).unwrap();
        let tg = wigner_grid(&thermal, &wide);
        assert!(tg.min() >= 0.0);
        assert!((tg.mass() - 1.0).abs() < 1e-6, "{}", tg.mass());
    }

    #[test]
    fn weyl_damp_examples() {
        let thermal = thermal_state(&ThermalSpec::new(1.0).unwrap(), 64).unwrap();
        let c = |p: PhasePoint| weyl_function(&thermal, p);
        let same = weyl_damp(c, ChannelNoise::new(0.0).unwrap());
        let p = pt(0.6, 0.2);
        assert_eq!(same(p), weyl_function(&thermal, p));
        let damped = weyl_damp(c, ChannelNoise::new(1.5).unwrap());
        assert!((damped(pt(0.0, 0.0)) - 1.0).norm() < 1e-12);
        let expect = (-p.alpha().norm_sqr() * (1.0 + 0.5 + 0.75)).exp();
        assert!((damped(p) - expect).norm() < 1e-12);
    }

    #[test]
    fn convolution_examples() {
        let spec = GridSpec::default();
        let vac = wigner_grid(&number_state(0, 4).unwrap().density_matrix(), &spec);
        assert_eq!(wigner_convolve(&vac, ChannelNoise::new(0.0).unwrap()), vac);
        let out = wigner_convolve(&vac, ChannelNoise::new(1.0).unwrap());
        assert!((out.mass() - vac.mass()).abs() < 1e-6);
        // variance per q axis grows from 1/2 to 1: W = e^{−(q²+p²)/2}/(2π) in q,p,
        // i.e. (1/π) e^{−|α|²} per d²α
        let worst = (0..spec.len())
            .map(|i| {
                let (iq, ip) = (i % spec.points_per_axis(), i / spec.points_per_axis());
                let a = spec.alpha(iq, ip);
                (out.get(iq, ip) - (-a.norm_sqr()).exp() / PI).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "worst {worst}");
    }

    #[test]
    fn grid_csv_layout() {
        let spec = GridSpec::new(1.0, 3).unwrap();
        let g = PhaseGrid::from_values(spec, (0..9).map(|i| i as f64).collect()).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "q,p,value");
        assert_eq!(lines[1], "-1,-1,0");
        assert_eq!(lines[2], "0,-1,1");
        assert_eq!(lines[4], "-1,0,3");
        assert_eq!(lines.len(), 10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ChannelNoise::new(-0.1).is_err());
        assert!(ChannelNoise::new(f64::NAN).is_err());
        assert!(GridSpec::new(6.0, 1).is_err());
        assert!(GridSpec::new(0.0, 10).is_err());
        assert!(PhasePoint::new(Complex64::new(f64::INFINITY, 0.0)).is_err());
    }
}
