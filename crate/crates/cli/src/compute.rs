use std::fmt;

use clap::ValueEnum;
use gaussfid::channel::{apply_channel, apply_channel_mc, McSpec, QuadratureSpec, DEFAULT_ORDER};
use gaussfid::closedform;
use gaussfid::fidelity::{
    ensemble_fidelity, entanglement_fidelity, entanglement_fidelity_via_purification, fidelity_a_gamma,
    fidelity_pure, fidelity_pure_direct, fidelity_pure_mc, fidelity_wigner, DEFAULT_ENSEMBLE_NMAX, TWO_MODE_GUARD,
};
use gaussfid::fock::{DEFAULT_DIM, DEFAULT_TAIL_TOL, DEFAULT_TWO_MODE_DIM};
use gaussfid::{ChannelNoise, DensityMatrix, Ensemble, FidelityValue, GridSpec, Method};

use crate::state::{StateSpec, ThermalMode};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(gaussfid::Error),
    Io(std::io::Error),
}

impl CliError {
    /// 2 for usage and domain problems, 3 for numerical-accuracy failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(gaussfid::Error::Accuracy { .. } | gaussfid::Error::Truncation { .. }) => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<gaussfid::Error> for CliError {
    fn from(e: gaussfid::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Gauss-Hermite quadrature of the Weyl-function integral
    Weyl,
    /// Overlap with the channel output density matrix
    Direct,
    /// Phase-space overlap of Wigner grids
    Wigner,
    /// Two-copy beamsplitter expectation
    AGamma,
    /// Analytic formula
    ClosedForm,
    /// Seeded Monte-Carlo average
    Mc,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub method: MethodArg,
    pub dim: Option<usize>,
    pub quad_order: usize,
    pub samples: usize,
    pub seed: u64,
    pub tail_tol: f64,
    pub grid: GridSpec,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            method: MethodArg::Weyl,
            dim: None,
            quad_order: DEFAULT_ORDER,
            samples: 100_000,
            seed: 0,
            tail_tol: DEFAULT_TAIL_TOL,
            grid: GridSpec::default(),
        }
    }
}

impl Settings {
    fn dim(&self, state: &StateSpec) -> usize {
        let default = match (self.method, state) {
            (MethodArg::AGamma, _) => DEFAULT_TWO_MODE_DIM,
            // the purification doubles the mode; thermal tails need the full guard
            (MethodArg::Direct, StateSpec::Thermal(..)) => TWO_MODE_GUARD,
            _ => DEFAULT_DIM,
        };
        self.dim.unwrap_or(default)
    }

    fn quad(&self, noise: ChannelNoise) -> QuadratureSpec {
        QuadratureSpec::matched(self.quad_order, noise)
    }

    fn mc(&self) -> CliResult<McSpec> {
        Ok(McSpec::new(self.samples, self.seed)?)
    }
}

pub fn noise(gamma: f64) -> CliResult<ChannelNoise> {
    Ok(ChannelNoise::new(gamma)?)
}

/// The fidelity of `state` under the channel `γ`, by the selected route.
pub fn fidelity(state: &StateSpec, gamma: f64, s: &Settings) -> CliResult<FidelityValue> {
    let noise = noise(gamma)?;
    if s.method == MethodArg::ClosedForm {
        return Ok(FidelityValue::new(closed_form(state, noise)?, Method::ClosedForm, 0.0)?);
    }
    let value = match *state {
        StateSpec::Thermal(nbar, ThermalMode::Ensemble) => match s.method {
            MethodArg::Weyl => {
                let ens = Ensemble::bose_einstein(nbar, DEFAULT_ENSEMBLE_NMAX)?;
                ensemble_fidelity(&ens, noise, s.quad(noise))?
            }
            m => return Err(unsupported(m, state)),
        },
        StateSpec::Thermal(_, ThermalMode::Entanglement) => {
            let rho = state.density_matrix(s.dim(state), s.tail_tol)?;
            match s.method {
                MethodArg::Weyl => entanglement_fidelity(&rho, noise, s.quad(noise))?,
                MethodArg::Direct => entanglement_fidelity_via_purification(&rho, noise, s.quad(noise))?,
                m => return Err(unsupported(m, state)),
            }
        }
        _ => {
            let psi = state.pure_state(s.dim(state), s.tail_tol)?.expect("pure spec");
            match s.method {
                MethodArg::Weyl => fidelity_pure(&psi, noise, s.quad(noise))?,
                MethodArg::Direct => fidelity_pure_direct(&psi, noise, s.quad(noise))?,
                MethodArg::Wigner => fidelity_wigner(&psi, noise, &s.grid)?,
                MethodArg::AGamma => fidelity_a_gamma(&psi, noise)?,
                MethodArg::Mc => fidelity_pure_mc(&psi, noise, s.mc()?)?,
                MethodArg::ClosedForm => unreachable!(),
            }
        }
    };
    Ok(value)
}

fn unsupported(m: MethodArg, state: &StateSpec) -> CliError {
    let name = m.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    CliError::Usage(format!("method '{name}' does not apply to state '{state}'"))
}

pub fn closed_form(state: &StateSpec, noise: ChannelNoise) -> CliResult<f64> {
    Ok(match *state {
        StateSpec::Vacuum | StateSpec::Coherent(_) => closedform::max_fidelity(noise),
        StateSpec::Number(n) => closedform::fidelity_number(n, noise),
        StateSpec::Squeezed(nbar) => closedform::fidelity_squeezed(nbar, noise)?,
        StateSpec::Superposition01 => closedform::fidelity_superposition01(noise),
        StateSpec::Thermal(nbar, ThermalMode::Ensemble) => closedform::thermal_ensemble_fidelity(nbar, noise)?,
        StateSpec::Thermal(nbar, ThermalMode::Entanglement) => closedform::thermal_entanglement_fidelity(nbar, noise)?,
    })
}

/// `Φ(ρ)` by quadrature, or by sampling when the method is `mc`.
pub fn channel_output(state: &StateSpec, gamma: f64, s: &Settings) -> CliResult<DensityMatrix> {
    let noise = noise(gamma)?;
    let rho = state.density_matrix(s.dim(state), s.tail_tol)?;
    match s.method {
        MethodArg::Weyl | MethodArg::Direct => Ok(apply_channel(&rho, noise, s.quad(noise))?),
        MethodArg::Mc => Ok(apply_channel_mc(&rho, noise, s.mc()?)?),
        m => Err(CliError::Usage(format!(
            "channel supports methods weyl/direct (quadrature) and mc, not {}",
            m.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
        ))),
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
pub fn gamma_ladder(min: f64, max: f64, steps: usize) -> CliResult<Vec<f64>> {
    if !(min >= 0.0) || !(max > min) || !max.is_finite() {
        return Err(CliError::Usage(format!("need 0 <= gamma-min < gamma-max, got {min} and {max}")));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!("need at least 2 steps, got {steps}")));
    }
    let h = (max - min) / (steps - 1) as f64;
    Ok((0..steps).map(|i| if i + 1 == steps { max } else { min + i as f64 * h }).collect())
}
