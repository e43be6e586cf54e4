//! Normalized gradient flows for ground states.
//!
//! Each iteration takes one semi-implicit step of the steepest-descent flow,
//! `((1/tau) + (-Delta)^s + W) u_tilde = u / tau`, and projects `u_tilde`
//! back onto the constraint sphere.
//!
//! * [`Constraint::MassL2`]: minimize `J` on `||u||_2 = c`, with
//!   `W = V - |u|^{2 sigma}`.
//! * [`Constraint::LpNorm`]: minimize `K` on `||u||_{2 sigma + 2} = c`, with
//!   `W = V + omega - lambda_n |u|^{2 sigma}`, where
//!   `lambda_n = <(H + omega) u, u> / ||u||_p^p` is the current Lagrange
//!   multiplier. Fixed points satisfy
//!   `(-Delta)^s u + V u + omega u = lambda |u|^{2 sigma} u`, and
//!   [`rescale_standing_wave`] turns them into standing waves.
//!
//! `linear_mode` drops the `|u|^{2 sigma}` term from `W`.

use crate::diagnostics::{self, discrete_lp_norm, discrete_mass};
use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::field::RealField;
use crate::grid::Grid;
use crate::spectral::{ShiftedOperator, Spectral};

/// Number of times the flow step may be halved before giving up.
pub const MAX_TAU_HALVINGS: u32 = 5;

const SIGN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `||u||_2 = c`
    MassL2 { c: f64 },
    /// `||u||_{2 sigma + 2} = c`, energy shifted by `omega/2 ||u||_2^2`
    LpNorm { c: f64, omega: f64 },
}

impl Constraint {
    pub fn c(&self) -> f64 {
        match *self {
            Constraint::MassL2 { c } | Constraint::LpNorm { c, .. } => c,
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match *self {
            Constraint::MassL2 { .. } => None,
            Constraint::LpNorm { omega, .. } => Some(omega),
        }
    }

    fn norm(&self, u: &RealField, sigma: f64) -> f64 {
        match self {
            Constraint::MassL2 { .. } => discrete_mass(u),
            Constraint::LpNorm { .. } => {
                discrete_lp_norm(u, 2.0 * sigma + 2.0).expect("p > 2")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `exp(-x^2 / 2)` scaled onto the constraint set.
    Gaussian,
    FromField(RealField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NgfConfig {
    pub constraint: Constraint,
    pub tau: f64,
    /// Stop once `||u_{n+1} - u_n||_inf / tau < tol`.
    pub tol: f64,
    pub max_iters: usize,
    pub initial_guess: InitialGuess,
    pub linear_mode: bool,
    /// Keep the energy (`J` or `K`) of every iterate.
    pub record_energy: bool,
}

impl NgfConfig {
    pub fn new(constraint: Constraint) -> Self {
        NgfConfig {
            constraint,
            tau: 0.01,
            tol: 1e-8,
            max_iters: 100_000,
            initial_guess: InitialGuess::Gaussian,
            linear_mode: false,
            record_energy: false,
        }
    }

    pub fn mass(c: f64) -> Self {
        Self::new(Constraint::MassL2 { c })
    }

    pub fn lp(c: f64, omega: f64) -> Self {
        Self::new(Constraint::LpNorm { c, omega })
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.constraint.c();
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("constraint level c must be positive, got {c}")));
        }
        if let Some(omega) = self.constraint.omega() {
            if !omega.is_finite() {
                return Err(Error::invalid("omega must be finite"));
            }
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("flow step tau must be positive, got {}", self.tau)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateResult {
    pub u: RealField,
    /// Mass constraint: chemical potential `lambda` of
    /// `(-Delta)^s u + V u - |u|^{2 sigma} u = lambda u`.
    /// Lp constraint: Lagrange multiplier of
    /// `(-Delta)^s u + V u + omega u = lambda |u|^{2 sigma} u`.
    pub lambda: f64,
    pub energy_j: f64,
    /// `K(u)`, only for the Lp constraint.
    pub energy_k: Option<f64>,
    pub iterations: usize,
    /// Relative residual of the stationary equation matching `lambda`.
    pub residual: f64,
    pub converged: bool,
    pub tau_final: f64,
    pub constraint: Constraint,
    pub params: ModelParams,
    pub linear_mode: bool,
    pub energy_trace: Vec<f64>,
    pub warnings: Vec<String>,
}

impl GroundStateResult {
    /// Standing-wave profile carried by this result: `u` itself for the mass
    /// constraint, `lambda^{1/(2 sigma)} u` for the Lp constraint.
    pub fn standing_wave(&self) -> Result<RealField> {
        match self.constraint {
            Constraint::MassL2 { .. } => Ok(self.u.clone()),
            Constraint::LpNorm { .. } => rescale_standing_wave(&self.u, self.lambda, self.params.sigma),
        }
    }

    /// Frequency of the standing wave `e^{-i lambda t} u`.
    pub fn standing_wave_frequency(&self) -> f64 {
        match self.constraint {
            Constraint::MassL2 { .. } => self.lambda,
            Constraint::LpNorm { omega, .. } => -omega,
        }
    }
}

fn gaussian_guess(grid: &Grid) -> RealField {
    RealField::from_fn(*grid, |x| (-0.5 * x * x).exp())
}

fn nonlinear_weight(u: &[f64], sigma: f64) -> impl Iterator<Item = f64> + '_ {
    u.iter().map(move |v| {
        let a = v.abs();
        if sigma == 1.0 {
            a * a
        } else {
            a.powf(2.0 * sigma)
        }
    })
}

/// `<(-Delta)^s u, u> + h sum V u^2`
fn quadratic_form(spectral: &Spectral, u: &RealField, symbol: &[f64], potential: &RealField) -> f64 {
    let h = u.grid().spacing();
    let buf: Vec<_> = u.values().iter().map(|&v| num_complex::Complex64::new(v, 0.0)).collect();
    let kin = spectral.kinetic_form_with(&buf, symbol);
    let pot: f64 = u.values().iter().zip(potential.values()).map(|(a, v)| v * a * a).sum();
    kin + h * pot
}

/// `lambda` for which `u` best satisfies `(-Delta)^s u + V u - |u|^{2 sigma} u = lambda u`.
pub fn chemical_potential(
    spectral: &Spectral,
    u: &RealField,
    params: &ModelParams,
    potential: &RealField,
) -> Result<f64> {
    chemical_potential_impl(spectral, u, params, potential, false)
}

/// As [`chemical_potential`] without the focusing term.
pub fn linear_chemical_potential(
    spectral: &Spectral,
    u: &RealField,
    params: &ModelParams,
    potential: &RealField,
) -> Result<f64> {
    chemical_potential_impl(spectral, u, params, potential, true)
}

fn chemical_potential_impl(
    spectral: &Spectral,
    u: &RealField,
    params: &ModelParams,
    potential: &RealField,
    linear: bool,
) -> Result<f64> {
    params.validate()?;
    let mass2 = discrete_mass(u).powi(2);
    if mass2 == 0.0 {
        return Err(Error::invalid("chemical potential of a zero field"));
    }
    let symbol = spectral.symbol(params.s)?;
    let mut num = quadratic_form(spectral, u, &symbol, potential);
    if !linear {
        let h = u.grid().spacing();
        let inter: f64 = u
            .values()
            .iter()
            .zip(nonlinear_weight(u.values(), params.sigma))
            .map(|(a, w)| w * a * a)
            .sum();
        num -= h * inter;
    }
    Ok(num / mass2)
}

/// `(-Delta)^s u + (V + shift) u - coupling |u|^{2 sigma} u`
fn stationary_operator(
    spectral: &Spectral,
    u: &RealField,
    params: &ModelParams,
    potential: &RealField,
    shift: f64,
    coupling: f64,
) -> Result<RealField> {
    let mut out = spectral.apply_fractional_laplacian_real(u, params.s)?;
    for ((o, (&a, &v)), w) in out
        .values_mut()
        .iter_mut()
        .zip(u.values().iter().zip(potential.values()))
        .zip(nonlinear_weight(u.values(), params.sigma))
    {
        *o += (v + shift) * a - coupling * w * a;
    }
    Ok(out)
}

fn relative_l2(r: &RealField, u: &RealField) -> Result<f64> {
    let denom = discrete_mass(u);
    if denom == 0.0 {
        return Err(Error::invalid("residual of a zero field"));
    }
    Ok(discrete_mass(r) / denom)
}

/// `||(-Delta)^s u + V u - |u|^{2 sigma} u - lambda u||_2 / ||u||_2`
pub fn stationarity_residual(
    spectral: &Spectral,
    u: &RealField,
    params: &ModelParams,
    potential: &RealField,
    lambda: f64,
) -> Result<f64> {
    let r = stationary_operator(spectral, u, params, potential, -lambda, 1.0)?;
    relative_l2(&r, u)
}

fn linear_residual(
    spectral: &Spectral,
    u: &RealField,
    params: &ModelParams,
    potential: &RealField,
    lambda: f64,
) -> Result<f64> {
    let r = stationary_operator(spectral, u, params, potential, -lambda, 0.0)?;
    relative_l2(&r, u)
}

/// Residual of `(-Delta)^s u + V u + omega u - lambda |u|^{2 sigma} u = 0`.
pub fn lagrange_residual(
    spectral: &Spectral,
    u: &RealField,
    params: &ModelParams,
    potential: &RealField,
    omega: f64,
    lambda: f64,
) -> Result<f64> {
    let r = stationary_operator(spectral, u, params, potential, omega, lambda)?;
    relative_l2(&r, u)
}

/// Residual of the standing-wave equation
/// `(-Delta)^s w + V w - |w|^{2 sigma} w + omega w = 0`.
pub fn standing_wave_residual(
    spectral: &Spectral,
    w: &RealField,
    params: &ModelParams,
    potential: &RealField,
    omega: f64,
) -> Result<f64> {
    stationarity_residual(spectral, w, params, potential, -omega)
}

/// `lambda^{1/(2 sigma)} u_star`
pub fn rescale_standing_wave(u_star: &RealField, lambda_mult: f64, sigma: f64) -> Result<RealField> {
    if !(lambda_mult > 0.0) {
        return Err(Error::NonpositiveMultiplier(lambda_mult));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    Ok(u_star.scale(lambda_mult.powf(0.5 / sigma)))
}

/// Lagrange multiplier of the Lp-constrained problem at `u`.
fn lp_multiplier(
    spectral: &Spectral,
    u: &RealField,
    symbol: &[f64],
    potential: &RealField,
    omega: f64,
    sigma: f64,
) -> f64 {
    let p = 2.0 * sigma + 2.0;
    let q = quadratic_form(spectral, u, symbol, potential) + omega * discrete_mass(u).powi(2);
    q / discrete_lp_norm(u, p).expect("p > 2").powf(p)
}

/// Outcome of one attempted flow step.
enum Step {
    Accepted(Vec<f64>),
    Retry(String),
}

/// Minimizes `J` (or `K`) over the configured constraint set.
///
/// Stalled linear solves and sign violations halve `tau`, at most
/// [`MAX_TAU_HALVINGS`] times. Running out of iterations yields
/// [`Error::NotConverged`] carrying the last iterate.
pub fn ngf_minimize(grid: &Grid, params: &ModelParams, cfg: &NgfConfig) -> Result<GroundStateResult> {
    params.validate()?;
    cfg.validate()?;
    let spectral = Spectral::new(grid);
    let potential = params.potential.eval(grid);
    let symbol = spectral.symbol(params.s)?;
    let constraint = cfg.constraint;
    let c = constraint.c();
    let sigma = params.sigma;

    let mut warnings = Vec::new();
    match constraint {
        Constraint::MassL2 { .. } if !cfg.linear_mode && !params.is_mass_subcritical() => {
            warnings.push(format!(
                "sigma = {} >= 2s = {}: the mass-constrained energy may be unbounded below",
                sigma,
                2.0 * params.s
            ));
        }
        Constraint::LpNorm { .. } if params.s < 0.5 && sigma >= 2.0 * params.s / (1.0 - 2.0 * params.s) => {
            warnings.push(format!(
                "sigma = {sigma} is not below 2s/(1-2s); the Lp-constrained problem may have no minimizer"
            ));
        }
        _ => {}
    }

    let guess = match &cfg.initial_guess {
        InitialGuess::Gaussian => gaussian_guess(grid),
        InitialGuess::FromField(f) => {
            if f.grid() != grid {
                return Err(Error::invalid("initial guess lives on a different grid"));
            }
            f.clone()
        }
    };
    if !guess.is_finite() {
        return Err(Error::invalid("initial guess has non-finite entries"));
    }
    let guess_norm = constraint.norm(&guess, sigma);
    if guess_norm == 0.0 {
        return Err(Error::invalid("initial guess has zero norm"));
    }
    let check_sign = guess.values().iter().all(|&v| v >= 0.0);
    let mut u = guess.scale(c / guess_norm);

    let mut tau = cfg.tau;
    let mut halvings = 0;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut shift = vec![0.0; grid.len()];

    let flow_energy = |u: &RealField| -> f64 {
        let q = quadratic_form(&spectral, u, &symbol, &potential);
        match constraint {
            Constraint::MassL2 { .. } => {
                if cfg.linear_mode {
                    0.5 * q
                } else {
                    let p = 2.0 * sigma + 2.0;
                    0.5 * q - discrete_lp_norm(u, p).expect("p > 2").powf(p) / p
                }
            }
            Constraint::LpNorm { omega, .. } => 0.5 * (q + omega * discrete_mass(u).powi(2)),
        }
    };
    if cfg.record_energy {
        trace.push(flow_energy(&u));
    }

    while iterations < cfg.max_iters {
        let coupling = match (constraint, cfg.linear_mode) {
            (_, true) => 0.0,
            (Constraint::MassL2 { .. }, false) => 1.0,
            (Constraint::LpNorm { omega, .. }, false) => {
                lp_multiplier(&spectral, &u, &symbol, &potential, omega, sigma)
            }
        };
        let offset = constraint.omega().unwrap_or(0.0);
        for ((w, &v), nl) in shift
            .iter_mut()
            .zip(potential.values())
            .zip(nonlinear_weight(u.values(), sigma))
        {
            *w = v + offset - coupling * nl;
        }

        let op = ShiftedOperator::new(&spectral, &symbol, &shift, tau);
        let step = match op.solve(u.values()) {
            Ok(sol) => {
                let peak = sol.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let floor = sol.iter().cloned().fold(f64::INFINITY, f64::min);
                if check_sign && floor < -SIGN_SLACK * peak {
                    Step::Retry(format!("iterate lost its sign (min {floor:.3e})"))
                } else {
                    Step::Accepted(sol)
                }
            }
            Err(Error::SolverStalled { reason, .. }) => Step::Retry(reason),
            Err(e) => return Err(e),
        };
        let sol = match step {
            Step::Accepted(sol) => sol,
            Step::Retry(reason) => {
                if halvings == MAX_TAU_HALVINGS {
                    return Err(Error::SolverStalled {
                        iterations,
                        reason: format!("{reason}; tau halved {MAX_TAU_HALVINGS} times to {tau:e}"),
                    });
                }
                halvings += 1;
                tau *= 0.5;
                continue;
            }
        };

        let next = RealField::new(*grid, sol)?;
        let norm = constraint.norm(&next, sigma);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::SolverStalled {
                iterations,
                reason: format!("flow step produced a field of norm {norm}"),
            });
        }
        let next = next.scale(c / norm);
        let change = next
            .values()
            .iter()
            .zip(u.values())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            / tau;
        u = next;
        iterations += 1;
        if cfg.record_energy {
            trace.push(flow_energy(&u));
        }
        if change < cfg.tol {
            converged = true;
            break;
        }
    }

    let energies = diagnostics::energy(&spectral, &u, params, &potential)?;
    let energy_j = if cfg.linear_mode { energies.linear_j() } else { energies.j };
    let (lambda, residual, energy_k) = match constraint {
        Constraint::MassL2 { .. } => {
            if cfg.linear_mode {
                let lambda = linear_chemical_potential(&spectral, &u, params, &potential)?;
                (lambda, linear_residual(&spectral, &u, params, &potential, lambda)?, None)
            } else {
                let lambda = chemical_potential(&spectral, &u, params, &potential)?;
                (lambda, stationarity_residual(&spectral, &u, params, &potential, lambda)?, None)
            }
        }
        Constraint::LpNorm { omega, .. } => {
            let lambda = lp_multiplier(&spectral, &u, &symbol, &potential, omega, sigma);
            let residual = lagrange_residual(&spectral, &u, params, &potential, omega, lambda)?;
            let k = 0.5 * (energies.kinetic + energies.potential + omega * discrete_mass(&u).powi(2));
            (lambda, residual, Some(k))
        }
    };

    let result = GroundStateResult {
        u,
        lambda,
        energy_j,
        energy_k,
        iterations,
        residual,
        converged,
        tau_final: tau,
        constraint,
        params: *params,
        linear_mode: cfg.linear_mode,
        energy_trace: trace,
        warnings,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::NotConverged {
            best: Box::new(result),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn harmonic(s: f64, sigma: f64) -> ModelParams {
        ModelParams::new(s, sigma, Potential::Harmonic).unwrap()
    }

    #[test]
    fn linear_gaussian_chemical_potential() {
        let g = Grid::new(8.0, 256).unwrap();
        let sp = Spectral::new(&g);
        let v = Potential::Harmonic.eval(&g);
        let u = RealField::from_fn(g, |x| PI.powf(-0.25) * (-0.5 * x * x).exp());
        let lam = linear_chemical_potential(&sp, &u, &harmonic(1.0, 1.0), &v).unwrap();
        assert!((lam - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chemical_potential_scaling() {
        let g = Grid::new(10.0, 256).unwrap();
        let sp = Spectral::new(&g);
        let v = Potential::Harmonic.eval(&g);
        let params = harmonic(0.7, 1.4);
        let u = RealField::from_fn(g, |x| 1.0 / (1.0 + x * x));
        let lam_lin = linear_chemical_potential(&sp, &u, &params, &v).unwrap();
        let ratio = u.values().iter().map(|a| a.abs().powf(2.0 * 1.4 + 2.0)).sum::<f64>()
            / u.values().iter().map(|a| a * a).sum::<f64>();
        for alpha in [0.5, 2.0, 3.0] {
            let direct = chemical_potential(&sp, &u.scale(alpha), &params, &v).unwrap();
            let predicted = lam_lin - alpha.powf(2.0 * 1.4) * ratio;
            assert_relative_eq!(direct, predicted, max_relative = 1e-12);
        }
        assert!(chemical_potential(&sp, &RealField::zeros(g), &params, &v).is_err());
    }

    #[test]
    fn rescale_examples() {
        let g = Grid::new(10.0, 16).unwrap();
        let u = RealField::from_fn(g, |x| (-x * x).exp());
        assert_eq!(rescale_standing_wave(&u, 1.0, 1.0).unwrap(), u);
        let r = rescale_standing_wave(&u, 4.0, 1.0).unwrap();
        for (a, b) in r.values().iter().zip(u.values()) {
            assert!((a - 2.0 * b).abs() < 1e-15);
        }
        assert!(matches!(
            rescale_standing_wave(&u, 0.0, 1.0),
            Err(Error::NonpositiveMultiplier(_))
        ));
        assert!(matches!(
            rescale_standing_wave(&u, -2.0, 1.0),
            Err(Error::NonpositiveMultiplier(_))
        ));
    }

    #[test]
    fn linear_mode_recovers_hermite_ground_state_from_wide_guess() {
        let g = Grid::new(8.0, 256).unwrap();
        let params = harmonic(1.0, 1.0);
        let mut cfg = NgfConfig::mass(1.0);
        cfg.linear_mode = true;
        cfg.initial_guess = InitialGuess::FromField(RealField::from_fn(g, |x| 1.0 / (1.0 + x * x)));
        let res = ngf_minimize(&g, &params, &cfg).unwrap();
        assert!((res.lambda - 1.0).abs() < 1e-6, "{}", res.lambda);
        let exact = RealField::from_fn(g, |x| PI.powf(-0.25) * (-0.5 * x * x).exp());
        assert!(discrete_mass(&res.u.sub(&exact)) < 1e-6);
    }

    #[test]
    fn mass_flow_invariants() {
        let g = Grid::new(10.0, 256).unwrap();
        let params = harmonic(0.8, 1.0);
        let mut cfg = NgfConfig::mass(1.0);
        cfg.record_energy = true;
        let res = ngf_minimize(&g, &params, &cfg).unwrap();
        assert!(res.converged);
        assert!((discrete_mass(&res.u) - 1.0).abs() < 1e-13);
        assert!(res.residual < 1e-6);
        // nonnegative, even, non-increasing away from the origin
        let v = res.u.values();
        assert!(v.iter().all(|&a| a >= -1e-12));
        for j in 1..g.len() {
            assert!((v[j] - v[g.mirror(j).unwrap()]).abs() < 1e-12);
        }
        let mid = g.len() / 2;
        assert!(v[mid..].windows(2).all(|w| w[1] <= w[0] + 1e-10));
        // energy decreases after a short transient
        for w in res.energy_trace[10..].windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{} -> {}", w[0], w[1]);
        }
        assert!(res.warnings.is_empty());
    }

    #[test]
    fn lp_flow_yields_standing_wave() {
        let g = Grid::new(10.0, 256).unwrap();
        let params = harmonic(0.5, 1.0);
        let res = ngf_minimize(&g, &params, &NgfConfig::lp(1.0, -0.5)).unwrap();
        let sp = Spectral::new(&g);
        let v = params.potential.eval(&g);
        let p_norm = discrete_lp_norm(&res.u, 4.0).unwrap();
        assert!((p_norm - 1.0).abs() < 1e-12);
        assert!(res.lambda > 0.0);
        assert!(res.energy_k.unwrap() > 0.0);
        let w = res.standing_wave().unwrap();
        assert!(standing_wave_residual(&sp, &w, &params, &v, -0.5).unwrap() < 1e-6);
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let g = Grid::new(10.0, 64).unwrap();
        let mut cfg = NgfConfig::mass(1.0);
        cfg.max_iters = 3;
        match ngf_minimize(&g, &harmonic(0.8, 1.0), &cfg) {
            Err(Error::NotConverged { best }) => {
                assert!(!best.converged);
                assert_eq!(best.iterations, 3);
                assert!((discrete_mass(&best.u) - 1.0).abs() < 1e-13);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn stiff_well_triggers_tau_halving() {
        let g = Grid::new(10.0, 128).unwrap();
        let mut cfg = NgfConfig::mass(6.0);
        cfg.tau = 1.0;
        cfg.max_iters = 20;
        let out = ngf_minimize(&g, &harmonic(1.0, 1.0), &cfg);
        let tau_final = match out {
            Ok(r) => r.tau_final,
            Err(Error::NotConverged { best }) => best.tau_final,
            Err(Error::SolverStalled { .. }) => return,
            Err(e) => panic!("{e}"),
        };
        assert!(tau_final < 1.0);
    }

    #[test]
    fn rejects_degenerate_configurations() {
        let g = Grid::new(10.0, 64).unwrap();
        let params = harmonic(0.8, 1.0);
        let mut cfg = NgfConfig::mass(1.0);
        cfg.initial_guess = InitialGuess::FromField(RealField::zeros(g));
        assert!(matches!(ngf_minimize(&g, &params, &cfg), Err(Error::InvalidConfig(_))));
        assert!(matches!(
            ngf_minimize(&g, &params, &NgfConfig::mass(-1.0)),
            Err(Error::InvalidConfig(_))
        ));
        let mut cfg = NgfConfig::mass(1.0);
        cfg.tau = 0.0;
        assert!(matches!(ngf_minimize(&g, &params, &cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn supercritical_mass_run_warns() {
        let g = Grid::new(10.0, 64).unwrap();
        let mut cfg = NgfConfig::mass(0.5);
        cfg.max_iters = 2;
        let best = match ngf_minimize(&g, &harmonic(0.5, 1.0), &cfg) {
            Ok(r) => r,
            Err(Error::NotConverged { best }) => *best,
            Err(e) => panic!("{e}"),
        };
        assert_eq!(best.warnings.len(), 1);
    }
}
