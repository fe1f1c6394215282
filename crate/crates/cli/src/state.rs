//! The `--state` grammar.
//!
//! ```text
//! vacuum | number:N | coherent:RE[,IM] | squeezed:NBAR | superposition01
//! thermal:NBAR[:entanglement|ensemble]
//! ```

use std::fmt;
use std::str::FromStr;

use gaussfid::fock::{
    coherent_state_with_tol, number_state, squeezed_state_with_tol, superposition01, thermal_state_with_tol,
};
use gaussfid::{DensityMatrix, Result, SqueezeSpec, ThermalSpec, TruncatedPureState};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThermalMode {
    Entanglement,
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    Vacuum,
    Number(usize),
    Coherent(Complex64),
    Squeezed(f64),
    Superposition01,
    Thermal(f64, ThermalMode),
}

impl StateSpec {
    pub fn pure_state(&self, dim: usize, tail_tol: f64) -> Result<Option<TruncatedPureState>> {
        let psi = match *self {
            StateSpec::Vacuum => number_state(0, dim)?,
            StateSpec::Number(n) => number_state(n, dim)?,
            StateSpec::Coherent(a) => coherent_state_with_tol(a, dim, tail_tol)?,
            StateSpec::Squeezed(nbar) => squeezed_state_with_tol(&SqueezeSpec::new(nbar)?, dim, tail_tol)?,
            StateSpec::Superposition01 => superposition01(dim)?,
            StateSpec::Thermal(..) => return Ok(None),
        };
        Ok(Some(psi))
    }

    pub fn density_matrix(&self, dim: usize, tail_tol: f64) -> Result<DensityMatrix> {
        match *self {
            StateSpec::Thermal(nbar, _) => thermal_state_with_tol(&ThermalSpec::new(nbar)?, dim, tail_tol),
            _ => Ok(self.pure_state(dim, tail_tol)?.expect("pure spec").density_matrix()),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Vacuum => write!(f, "vacuum"),
            StateSpec::Number(n) => write!(f, "number:{n}"),
            StateSpec::Coherent(a) => write!(f, "coherent:{},{}", a.re, a.im),
            StateSpec::Squeezed(nbar) => write!(f, "squeezed:{nbar}"),
            StateSpec::Superposition01 => write!(f, "superposition01"),
            StateSpec::Thermal(nbar, ThermalMode::Entanglement) => write!(f, "thermal:{nbar}:entanglement"),
            StateSpec::Thermal(nbar, ThermalMode::Ensemble) => write!(f, "thermal:{nbar}:ensemble"),
        }
    }
}

fn real(s: &str, what: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("invalid {what} '{s}'"))?;
    if !x.is_finite() {
        return Err(format!("{what} must be finite"));
    }
    Ok(x)
}

fn nonneg(s: &str, what: &str) -> std::result::Result<f64, String> {
    let x = real(s, what)?;
    if x < 0.0 {
        return Err(format!("{what} must be nonnegative, got {x}"));
    }
    Ok(x)
}

impl FromStr for StateSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (kind, rest) = match s.split_once(':') {
            Some((k, r)) => (k, Some(r)),
            None => (s, None),
        };
        match (kind, rest) {
            ("vacuum", None) => Ok(StateSpec::Vacuum),
            ("superposition01", None) => Ok(StateSpec::Superposition01),
            ("number", Some(n)) => n
                .trim()
                .parse()
                .map(StateSpec::Number)
                .map_err(|_| format!("invalid photon number '{n}'")),
            ("coherent", Some(a)) => {
                let (re, im) = match a.split_once(',') {
                    Some((re, im)) => (real(re, "real part")?, real(im, "imaginary part")?),
                    None => (real(a, "amplitude")?, 0.0),
                };
                Ok(StateSpec::Coherent(Complex64::new(re, im)))
            }
            ("squeezed", Some(n)) => Ok(StateSpec::Squeezed(nonneg(n, "mean photon number")?)),
            ("thermal", Some(r)) => {
                let (n, mode) = match r.split_once(':') {
                    Some((n, "entanglement")) => (n, ThermalMode::Entanglement),
                    Some((n, "ensemble")) => (n, ThermalMode::Ensemble),
                    Some((_, m)) => return Err(format!("unknown thermal mode '{m}' (entanglement|ensemble)")),
                    None => (r, ThermalMode::Entanglement),
                };
                Ok(StateSpec::Thermal(nonneg(n, "mean photon number")?, mode))
            }
            _ => Err(format!(
                "malformed state '{s}'; expected vacuum, number:N, coherent:RE[,IM], squeezed:NBAR, \
                 superposition01 or thermal:NBAR[:entanglement|ensemble]"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        assert_eq!("vacuum".parse(), Ok(StateSpec::Vacuum));
        assert_eq!("number:3".parse(), Ok(StateSpec::Number(3)));
        assert_eq!("coherent:1.5".parse(), Ok(StateSpec::Coherent(Complex64::new(1.5, 0.0))));
        assert_eq!("coherent:1,-2".parse(), Ok(StateSpec::Coherent(Complex64::new(1.0, -2.0))));
        assert_eq!("squeezed:1".parse(), Ok(StateSpec::Squeezed(1.0)));
        assert_eq!("superposition01".parse(), Ok(StateSpec::Superposition01));
        assert_eq!("thermal:0.5".parse(), Ok(StateSpec::Thermal(0.5, ThermalMode::Entanglement)));
        assert_eq!("thermal:2:ensemble".parse(), Ok(StateSpec::Thermal(2.0, ThermalMode::Ensemble)));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "number", "number:-1", "number:x", "squeezed:-1", "thermal:1:mixed", "vacuum:1", "coherent:nan", "fock:1"] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["vacuum", "number:2", "squeezed:1", "superposition01", "thermal:1:ensemble"] {
            let spec: StateSpec = s.parse().unwrap();
            assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
        }
    }
}
