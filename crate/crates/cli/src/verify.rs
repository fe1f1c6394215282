//! Self-check suites behind `gaussfid verify`.

use clap::ValueEnum;
use gaussfid::channel::QuadratureSpec;
use gaussfid::closedform::{
    fidelity_number, generating_function, max_fidelity, thermal_ensemble_fidelity, thermal_entanglement_fidelity,
};
use gaussfid::fidelity::{
    check_max_bound, check_scaling_law, ensemble_fidelity, entanglement_fidelity, fidelity_a_gamma, fidelity_pure,
    fidelity_pure_direct, fidelity_wigner, DEFAULT_ENSEMBLE_NMAX,
};
use gaussfid::fock::{
    coherent_state, number_state, random_pure_state, squeezed_state_with_tol, superposition01, thermal_state,
    DEFAULT_DIM, DEFAULT_TWO_MODE_DIM,
};
use gaussfid::{ChannelNoise, Ensemble, GridSpec, SqueezeSpec, ThermalSpec, TruncatedPureState};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compute::{noise, CliError, CliResult};
use crate::state::StateSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    /// F(ψ,γ) = (2/γ) F(ψ,4/γ)
    Scaling,
    /// F ≤ 1/(1+γ/2), saturated by coherent states
    Bound,
    /// Weyl, direct, Wigner and two-copy routes agree
    Routes,
    /// Number-state fidelities sum to the generating function
    Genfun,
    /// Thermal entanglement < ensemble < coherent, numeric vs analytic
    Thermal,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    /// Largest observed deviation relative to its tolerance.
    pub worst_ratio: f64,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        SuiteReport { suite, checks: 0, failures: Vec::new(), worst_ratio: 0.0 }
    }

    fn check(&mut self, label: impl FnOnce() -> String, deviation: f64, tol: f64) {
        self.checks += 1;
        let ratio = deviation / tol;
        if ratio.is_nan() || ratio >= 1.0 {
            self.failures.push(format!("{}: deviation {deviation:.3e} (tol {tol:.0e})", label()));
        }
        if ratio > self.worst_ratio || ratio.is_nan() {
            self.worst_ratio = ratio;
        }
    }

    fn holds(&mut self, label: impl FnOnce() -> String, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures.push(label());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub suite: Suite,
    pub state: Option<StateSpec>,
    pub gamma: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub quad_order: usize,
}

fn quad(order: usize, n: ChannelNoise) -> QuadratureSpec {
    QuadratureSpec::matched(order, n)
}

fn nz(g: f64) -> ChannelNoise {
    ChannelNoise::new(g).expect("suite gamma is valid")
}

/// The six reference inputs at truncation `dim`; the squeezed state takes
/// a looser tail tolerance when `dim` is small.
pub fn battery(dim: usize) -> CliResult<Vec<(&'static str, TruncatedPureState)>> {
    let tol = if dim >= DEFAULT_DIM { 1e-8 } else { 1e-4 };
    Ok(vec![
        ("vacuum", number_state(0, dim)?),
        ("number:1", number_state(1, dim)?),
        ("number:2", number_state(2, dim)?),
        ("coherent:1", coherent_state(Complex64::new(1.0, 0.0), dim)?),
        ("squeezed:1", squeezed_state_with_tol(&SqueezeSpec::new(1.0)?, dim, tol)?),
        ("superposition01", superposition01(dim)?),
    ])
}

pub fn run(args: &VerifyArgs) -> CliResult<Vec<SuiteReport>> {
    let suites: Vec<Suite> = match args.suite {
        Suite::All => vec![Suite::Scaling, Suite::Bound, Suite::Routes, Suite::Genfun, Suite::Thermal],
        s => vec![s],
    };
    suites.into_iter().map(|s| run_one(s, args)).collect()
}

fn run_one(suite: Suite, args: &VerifyArgs) -> CliResult<SuiteReport> {
    match suite {
        Suite::Scaling => scaling(args),
        Suite::Bound => bound(args),
        Suite::Routes => routes(args),
        Suite::Genfun => genfun(),
        Suite::Thermal => thermal(args),
        Suite::All => unreachable!(),
    }
}

fn scaling(args: &VerifyArgs) -> CliResult<SuiteReport> {
    let mut r = SuiteReport::new("scaling");
    let states: Vec<(String, TruncatedPureState)> = match &args.state {
        Some(spec) => {
            let psi = spec
                .pure_state(DEFAULT_DIM, 1e-8)?
                .ok_or_else(|| CliError::Usage(format!("the scaling suite needs a pure state, got '{spec}'")))?;
            vec![(spec.to_string(), psi)]
        }
        None => battery(DEFAULT_DIM)?.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
    };
    let gammas = match args.gamma {
        Some(g) => vec![g],
        None => vec![0.25, 0.5, 1.0, 4.0],
    };
    for (name, psi) in &states {
        for &g in &gammas {
            let n = noise(g)?;
            let res = check_scaling_law(psi, n, quad(args.quad_order, n))?;
            r.check(|| format!("{name} gamma={g}"), res, 1e-6);
        }
    }
    Ok(r)
}

fn bound(args: &VerifyArgs) -> CliResult<SuiteReport> {
    let mut r = SuiteReport::new("bound");
    let gammas = [0.5, 1.0, 2.0];
    for a in [0.0, 1.0, 2.0] {
        let coh = coherent_state(Complex64::new(a, 0.0), DEFAULT_DIM)?;
        for g in gammas {
            let f = fidelity_pure(&coh, nz(g), quad(args.quad_order, nz(g)))?;
            r.check(|| format!("coherent:{a} gamma={g} saturation"), (f.value - max_fidelity(nz(g))).abs(), 1e-8);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for trial in 0..args.trials {
        let psi = random_pure_state(&mut rng, 8, 16)?;
        for g in gammas {
            let f = fidelity_pure(&psi, nz(g), quad(args.quad_order, nz(g)))?;
            r.holds(|| format!("random trial {trial} gamma={g}: {} above bound", f.raw), check_max_bound(&f, nz(g)));
        }
    }
    Ok(r)
}

fn routes(args: &VerifyArgs) -> CliResult<SuiteReport> {
    let mut r = SuiteReport::new("routes");
    let gammas = [0.25, 0.5, 1.0, 2.0, 4.0];
    let grid = GridSpec::default();
    let small = battery(DEFAULT_TWO_MODE_DIM)?;
    for ((name, psi), (_, psi24)) in battery(DEFAULT_DIM)?.iter().zip(&small) {
        for g in gammas {
            let n = nz(g);
            let q = quad(args.quad_order, n);
            let weyl = fidelity_pure(psi, n, q)?.value;
            let direct = fidelity_pure_direct(psi, n, q)?.value;
            r.check(|| format!("{name} gamma={g} weyl vs direct"), (weyl - direct).abs(), 1e-6);
            let wigner = fidelity_wigner(psi, n, &grid)?.value;
            r.check(|| format!("{name} gamma={g} weyl vs wigner"), (weyl - wigner).abs(), 1e-4);
            let same = fidelity_pure(psi24, n, q)?.value;
            let two_copy = fidelity_a_gamma(psi24, n)?.value;
            r.check(|| format!("{name} gamma={g} weyl vs a_gamma (dim 24)"), (same - two_copy).abs(), 1e-6);
        }
    }
    Ok(r)
}

fn genfun() -> CliResult<SuiteReport> {
    let mut r = SuiteReport::new("genfun");
    for g in [0.5, 1.0, 2.0, 3.0] {
        for lam in [0.2f64, 0.5] {
            let partial: f64 = (0..=40).map(|n| lam.powi(n) * fidelity_number(n as usize, nz(g))).sum();
            let tail = lam.powi(41) / (1.0 - lam);
            let exact = generating_function(nz(g), lam)?;
            r.check(|| format!("gamma={g} lambda={lam}"), (partial - exact).abs(), 1e-8 + tail);
        }
    }
    Ok(r)
}

fn thermal(args: &VerifyArgs) -> CliResult<SuiteReport> {
    let mut r = SuiteReport::new("thermal");
    let nbar = 1.0;
    let rho = thermal_state(&ThermalSpec::new(nbar)?, DEFAULT_DIM)?;
    let ens = Ensemble::bose_einstein(nbar, DEFAULT_ENSEMBLE_NMAX)?;
    for k in 1..=16 {
        let g = 0.25 * k as f64;
        let n = nz(g);
        let ent = thermal_entanglement_fidelity(nbar, n)?;
        let mean = thermal_ensemble_fidelity(nbar, n)?;
        let top = max_fidelity(n);
        r.holds(|| format!("gamma={g}: ordering {ent} < {mean} < {top}"), ent < mean && mean < top);
        let q = quad(args.quad_order, n);
        let num_ent = entanglement_fidelity(&rho, n, q)?.value;
        r.check(|| format!("gamma={g} entanglement numeric"), (num_ent - ent).abs(), 1e-6);
        let num_mean = ensemble_fidelity(&ens, n, q)?.value;
        r.check(|| format!("gamma={g} ensemble numeric"), (num_mean - mean).abs(), 1e-6);
    }
    Ok(r)
}
