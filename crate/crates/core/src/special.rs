//! Orthogonal-polynomial recurrences and Gauss-Hermite rules.
//!
//! Everything here is evaluated by upward three-term recurrences in double
//! precision. The ranges used by the rest of the crate (orders up to a few
//! hundred, moderate arguments) stay well inside the stable regime.

use std::f64::consts::PI;

/// `ln(n!)` for every `n < len`.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 1 {
            acc += (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Legendre polynomial `P_n(x)`.
pub fn legendre_p(n: usize, x: f64) -> f64 {
    let (mut p_prev, mut p) = (1.0, x);
    if n == 0 {
        return p_prev;
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    p
}

/// Associated Laguerre polynomial `L_n^{(k)}(x)`; `k = 0` gives the ordinary `L_n`.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let (mut l_prev, mut l) = (1.0, 1.0 + kf - x);
    if n == 0 {
        return l_prev;
    }
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * l - (jf + kf) * l_prev) / (jf + 1.0);
        l_prev = l;
        l = next;
    }
    l
}

/// Gauss-Hermite rule for `∫ e^{-t²} f(t) dt`.
///
/// Weights are stored as logarithms: outer nodes of high-order rules carry
/// weights far below `f64::MIN_POSITIVE` relative to their `e^{t²}` growth,
/// and callers that rescale the weight function need them to full relative
/// precision.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub ln_weights: Vec<f64>,
}

impl GaussHermite {
    /// Nodes and weights of the `order`-point rule, ascending nodes.
    ///
    /// Roots by Newton iteration on the orthonormal Hermite recurrence, with
    /// the usual asymptotic starting guesses.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Hermite order must be positive");
        let n = order;
        let nf = n as f64;
        let half = (n + 1) / 2;
        let pim4 = PI.powf(-0.25);
        let mut roots = vec![0.0; half];
        let mut ln_w = vec![0.0; half];
        let mut z = 0.0f64;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * roots[0],
                3 => 1.91 * z - 0.91 * roots[1],
                _ => 2.0 * z - roots[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                // Orthonormal recurrence, scaled by e^{-z²/2} to stay finite.
                let mut p1 = pim4 * (-0.5 * z * z).exp();
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            roots[i] = z;
            // w = 2 / pp_unscaled², pp_unscaled = pp e^{z²/2}
            ln_w[i] = 2f64.ln() - 2.0 * pp.abs().ln() - z * z;
        }
        let mut nodes = Vec::with_capacity(n);
        let mut ln_weights = Vec::with_capacity(n);
        for i in 0..half {
            nodes.push(-roots[i]);
            ln_weights.push(ln_w[i]);
        }
        let mirror = if n % 2 == 1 { half - 1 } else { half };
        for i in (0..mirror).rev() {
            nodes.push(roots[i]);
            ln_weights.push(ln_w[i]);
        }
        if n % 2 == 1 {
            nodes[half - 1] = 0.0;
        }
        GaussHermite { nodes, ln_weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.ln_weights.iter().map(|lw| lw.exp())
    }
}
