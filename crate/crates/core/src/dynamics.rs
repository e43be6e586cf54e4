//! Strang split-step Fourier integration of
//! `i psi_t = (-Delta)^s psi + V psi - |psi|^{2 sigma} psi`.
//!
//! One step is a half step of the pointwise phase flow (exact, since it keeps
//! `|psi|` fixed), a full kinetic step diagonal in Fourier space, and another
//! half phase step. Both sub-flows are unitary, so discrete mass is conserved
//! to rounding.

use num_complex::Complex64;

use crate::diagnostics::{self, StabilityReference, TimeSeriesRecord};
use crate::error::{BlowUp, Error, Result};
use crate::field::{ComplexField, RealField};
use crate::potential::Potential;
use crate::spectral::{check_order, Spectral};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Fractional order in `(0, 1]`.
    pub s: f64,
    /// Nonlinearity power, `> 0`.
    pub sigma: f64,
    pub potential: Potential,
}

impl ModelParams {
    pub fn new(s: f64, sigma: f64, potential: Potential) -> Result<Self> {
        let p = ModelParams { s, sigma, potential };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.s)?;
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "nonlinearity power sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    /// `sigma < 2s/N` (here `N = 1`): mass-constrained minimization is bounded below.
    pub fn is_mass_subcritical(&self) -> bool {
        self.sigma < 2.0 * self.s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub tau: f64,
    pub t_end: f64,
    /// Record a checkpoint every this many steps (the final step is always recorded).
    pub checkpoint_every: usize,
    /// Absolute cap on `||psi||_inf`.
    pub blowup_threshold: f64,
    /// Growth cap relative to `||psi_0||_inf`. Discrete mass is conserved,
    /// which bounds `||psi||_inf <= M / sqrt(h)`; a collapse therefore shows as
    /// growth up to the grid resolution, not as divergence.
    pub blowup_growth: Option<f64>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            tau: 1e-3,
            t_end: 1.0,
            checkpoint_every: 100,
            blowup_threshold: 1e6,
            blowup_growth: Some(4.0),
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {}", self.tau)));
        }
        if !(self.t_end >= self.tau && self.t_end.is_finite()) {
            return Err(Error::invalid(format!(
                "t_end = {} must be at least the time step {}",
                self.t_end, self.tau
            )));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::invalid("checkpoint_every must be at least 1"));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::invalid("blow-up threshold must be positive"));
        }
        if let Some(g) = self.blowup_growth {
            if !(g > 1.0) {
                return Err(Error::invalid(format!("blow-up growth factor must exceed 1, got {g}")));
            }
        }
        Ok(())
    }

    /// Step sizes covering `[0, t_end]`: uniform `tau`, with a shorter last
    /// step when `t_end` is not a multiple of `tau`.
    fn schedule(&self) -> (usize, f64) {
        let ratio = self.t_end / self.tau;
        let whole = ratio.round();
        if (ratio - whole).abs() < 1e-9 * ratio.max(1.0) {
            (whole as usize, self.tau)
        } else {
            let n = ratio.ceil() as usize;
            (n, self.t_end - (n - 1) as f64 * self.tau)
        }
    }
}

/// `psi_j <- psi_j exp(-i (V_j - |psi_j|^{2 sigma}) dt)`
pub fn half_step_phase(psi: &ComplexField, potential: &RealField, sigma: f64, dt: f64) -> ComplexField {
    let mut out = psi.clone();
    phase_in_place(out.values_mut(), potential.values(), sigma, dt);
    out
}

fn phase_in_place(values: &mut [Complex64], potential: &[f64], sigma: f64, dt: f64) {
    for (z, v) in values.iter_mut().zip(potential) {
        let a2 = z.norm_sqr();
        let nonlinear = if sigma == 1.0 { a2 } else { a2.powf(sigma) };
        let angle = -(v - nonlinear) * dt;
        *z *= Complex64::from_polar(1.0, angle);
    }
}

fn kinetic_factors(symbol: &[f64], dt: f64) -> Vec<Complex64> {
    symbol.iter().map(|m| Complex64::from_polar(1.0, -m * dt)).collect()
}

/// `psi_hat_k <- exp(-i |mu_k|^{2s} dt) psi_hat_k`
pub fn kinetic_step(spectral: &Spectral, psi: &ComplexField, s: f64, dt: f64) -> Result<ComplexField> {
    let factors = kinetic_factors(&spectral.symbol(s)?, dt);
    let mut out = psi.clone();
    spectral.apply_complex_symbol(out.values_mut(), &factors);
    Ok(out)
}

/// One Strang step of length `tau` (negative `tau` runs backwards).
pub fn strang_step(
    spectral: &Spectral,
    psi: &ComplexField,
    params: &ModelParams,
    potential: &RealField,
    tau: f64,
) -> Result<ComplexField> {
    params.validate()?;
    let stepper = Stepper::new(spectral, params, potential, tau)?;
    let mut out = psi.clone();
    stepper.step(out.values_mut());
    Ok(out)
}

/// Precomputed multipliers for repeated steps of a fixed length.
pub struct Stepper<'a> {
    spectral: &'a Spectral,
    potential: &'a RealField,
    sigma: f64,
    tau: f64,
    kinetic: Vec<Complex64>,
}

impl<'a> Stepper<'a> {
    pub fn new(spectral: &'a Spectral, params: &ModelParams, potential: &'a RealField, tau: f64) -> Result<Self> {
        Ok(Stepper {
            spectral,
            potential,
            sigma: params.sigma,
            tau,
            kinetic: kinetic_factors(&spectral.symbol(params.s)?, tau),
        })
    }

    pub fn step(&self, values: &mut [Complex64]) {
        let half = 0.5 * self.tau;
        phase_in_place(values, self.potential.values(), self.sigma, half);
        self.spectral.apply_complex_symbol(values, &self.kinetic);
        phase_in_place(values, self.potential.values(), self.sigma, half);
    }
}

/// Result of a completed evolution.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub records: Vec<TimeSeriesRecord>,
    pub final_state: ComplexField,
}

fn record(
    spectral: &Spectral,
    psi: &ComplexField,
    params: &ModelParams,
    potential: &RealField,
    t: f64,
    reference: Option<&StabilityReference>,
) -> Result<TimeSeriesRecord> {
    let energy = diagnostics::energy(spectral, psi, params, potential)?;
    let stability_d = reference
        .map(|r| r.distance(spectral, psi, t, params.s))
        .transpose()?;
    Ok(TimeSeriesRecord {
        t,
        mass: diagnostics::discrete_mass(psi),
        energy: energy.e,
        linf: psi.linf(),
        stability_d,
    })
}

/// Runs the Strang scheme from `psi0` to `cfg.t_end`.
pub fn evolve(
    psi0: &ComplexField,
    params: &ModelParams,
    cfg: &EvolveConfig,
    reference: Option<&StabilityReference>,
) -> Result<Evolution> {
    evolve_with(psi0, params, cfg, reference, |_, _, _| {})
}

/// Like [`evolve`], calling `observer(step, t, psi)` at `t = 0` and after every step.
pub fn evolve_with<F>(
    psi0: &ComplexField,
    params: &ModelParams,
    cfg: &EvolveConfig,
    reference: Option<&StabilityReference>,
    mut observer: F,
) -> Result<Evolution>
where
    F: FnMut(usize, f64, &ComplexField),
{
    params.validate()?;
    cfg.validate()?;
    if !psi0.is_finite() {
        return Err(Error::invalid("initial state has non-finite entries"));
    }
    let grid = *psi0.grid();
    let spectral = Spectral::new(&grid);
    let potential = params.potential.eval(&grid);
    let (steps, last_dt) = cfg.schedule();
    let stepper = Stepper::new(&spectral, params, &potential, cfg.tau)?;
    let last_stepper = if last_dt != cfg.tau {
        Some(Stepper::new(&spectral, params, &potential, last_dt)?)
    } else {
        None
    };

    let linf0 = psi0.linf();
    let cap = match cfg.blowup_growth {
        Some(g) if linf0 > 0.0 => cfg.blowup_threshold.min(g * linf0),
        _ => cfg.blowup_threshold,
    };

    let mut psi = psi0.clone();
    let mut records = vec![record(&spectral, &psi, params, &potential, 0.0, reference)?];
    observer(0, 0.0, &psi);

    for n in 1..=steps {
        let is_last = n == steps;
        match (&last_stepper, is_last) {
            (Some(last), true) => last.step(psi.values_mut()),
            _ => stepper.step(psi.values_mut()),
        }
        let t = if is_last { cfg.t_end } else { n as f64 * cfg.tau };
        let linf = psi.linf();
        if !psi.is_finite() || !linf.is_finite() || linf > cap {
            return Err(Error::BlowUpDetected(Box::new(BlowUp {
                t,
                linf,
                records,
                last: psi,
            })));
        }
        observer(n, t, &psi);
        if n % cfg.checkpoint_every == 0 || is_last {
            records.push(record(&spectral, &psi, params, &potential, t, reference)?);
        }
    }
    Ok(Evolution {
        records,
        final_state: psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::discrete_mass;
    use crate::grid::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn max_diff(a: &ComplexField, b: &ComplexField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn random_field(g: Grid, seed: u64) -> ComplexField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexField::new(g, v).unwrap()
    }

    #[test]
    fn phase_step_keeps_modulus() {
        let g = Grid::new(10.0, 128).unwrap();
        let psi = random_field(g, 1);
        let v = Potential::Harmonic.eval(&g);
        let out = half_step_phase(&psi, &v, 1.3, 0.05);
        for (a, b) in out.values().iter().zip(psi.values()) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn phase_step_on_unit_constant() {
        let g = Grid::new(10.0, 16).unwrap();
        let psi = ComplexField::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let tau = 0.01;
        let out = half_step_phase(&psi, &RealField::zeros(g), 1.0, tau / 2.0);
        let expect = Complex64::from_polar(1.0, tau / 2.0);
        assert!(out.values().iter().all(|z| (z - expect).norm() < 1e-15));
    }

    #[test]
    fn phase_advance_at_origin() {
        let g = Grid::new(10.0, 16).unwrap();
        let psi = ComplexField::from_fn(g, |x| Complex64::new(1.5 * (-x * x).exp(), 0.0));
        let v = Potential::Harmonic.eval(&g);
        let dt = 0.02;
        let out = half_step_phase(&psi, &v, 1.0, dt);
        let j0 = g.len() / 2;
        assert_eq!(g.node(j0), 0.0);
        assert!((out.values()[j0].arg() - 2.25 * dt).abs() < 1e-15);
    }

    #[test]
    fn kinetic_step_examples() {
        let g = Grid::new(10.0, 64).unwrap();
        let sp = Spectral::new(&g);
        let ones = ComplexField::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!(max_diff(&kinetic_step(&sp, &ones, 0.8, 0.3).unwrap(), &ones) < 1e-15);

        let (s, dt, mu1) = (0.8, 0.3, PI / 10.0);
        let wave = ComplexField::from_fn(g, |x| Complex64::new(0.0, mu1 * x).exp());
        let out = kinetic_step(&sp, &wave, s, dt).unwrap();
        let expect = wave.scale(Complex64::from_polar(1.0, -mu1.powf(2.0 * s) * dt));
        assert!(max_diff(&out, &expect) < 1e-14);

        let psi = random_field(g, 2);
        let m0 = discrete_mass(&psi);
        let m1 = discrete_mass(&kinetic_step(&sp, &psi, 0.55, 0.7).unwrap());
        assert!(((m1 - m0) / m0).abs() < 1e-14);
    }

    #[test]
    fn plane_wave_closed_form() {
        let g = Grid::new(10.0, 256).unwrap();
        let sp = Spectral::new(&g);
        let params = ModelParams::new(0.7, 1.5, Potential::Harmonic).unwrap();
        let zero = RealField::zeros(g);
        let (amp, k, tau) = (0.8_f64, 7.0, 0.01);
        let mu = k * PI / 10.0;
        let psi = ComplexField::from_fn(g, |x| Complex64::from_polar(amp, mu * x));
        let out = strang_step(&sp, &psi, &params, &zero, tau).unwrap();
        let omega = mu.powf(2.0 * params.s) - amp.powf(2.0 * params.sigma);
        let expect = ComplexField::from_fn(g, |x| Complex64::from_polar(amp, mu * x - omega * tau));
        assert!(max_diff(&out, &expect) < 1e-13);
    }

    #[test]
    fn vanishing_step_is_identity_and_backward_step_inverts() {
        let g = Grid::new(10.0, 128).unwrap();
        let sp = Spectral::new(&g);
        let params = ModelParams::new(0.8, 1.0, Potential::Harmonic).unwrap();
        let v = params.potential.eval(&g);
        let psi = ComplexField::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.3 * (-x * x / 2.0).exp()));
        let tiny = strang_step(&sp, &psi, &params, &v, 1e-14).unwrap();
        assert!(max_diff(&tiny, &psi) < 1e-12);

        let mut cur = psi.clone();
        for _ in 0..50 {
            cur = strang_step(&sp, &cur, &params, &v, 1e-3).unwrap();
        }
        for _ in 0..50 {
            cur = strang_step(&sp, &cur, &params, &v, -1e-3).unwrap();
        }
        assert!(max_diff(&cur, &psi) < 1e-11);
    }

    #[test]
    fn mass_preserved_per_step() {
        let g = Grid::new(10.0, 256).unwrap();
        let sp = Spectral::new(&g);
        let params = ModelParams::new(0.8, 1.0, Potential::Harmonic).unwrap();
        let v = params.potential.eval(&g);
        let psi = random_field(g, 5);
        let out = strang_step(&sp, &psi, &params, &v, 1e-3).unwrap();
        let (m0, m1) = (discrete_mass(&psi), discrete_mass(&out));
        assert!(((m1 - m0) / m0).abs() < 1e-13);
    }

    #[test]
    fn evolve_records_checkpoints_and_final_time() {
        let g = Grid::new(10.0, 128).unwrap();
        let params = ModelParams::new(0.8, 1.0, Potential::Harmonic).unwrap();
        let psi = ComplexField::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.0));
        let cfg = EvolveConfig {
            tau: 0.01,
            t_end: 1.005,
            checkpoint_every: 25,
            ..EvolveConfig::default()
        };
        let ev = evolve(&psi, &params, &cfg, None).unwrap();
        let ts: Vec<f64> = ev.records.iter().map(|r| r.t).collect();
        assert_eq!(ts.len(), 6);
        assert_eq!(ts[0], 0.0);
        assert!((ts[1] - 0.25).abs() < 1e-12);
        assert_eq!(*ts.last().unwrap(), 1.005);
        assert!(ev.records.iter().all(|r| r.stability_d.is_none()));
    }

    #[test]
    fn evolve_rejects_bad_config() {
        let g = Grid::new(10.0, 16).unwrap();
        let params = ModelParams::new(0.8, 1.0, Potential::Harmonic).unwrap();
        let psi = ComplexField::zeros(g);
        let bad = EvolveConfig {
            checkpoint_every: 0,
            ..EvolveConfig::default()
        };
        assert!(matches!(evolve(&psi, &params, &bad, None), Err(Error::InvalidConfig(_))));
        let bad = EvolveConfig {
            tau: 0.1,
            t_end: 0.01,
            ..EvolveConfig::default()
        };
        assert!(matches!(evolve(&psi, &params, &bad, None), Err(Error::InvalidConfig(_))));
        assert!(ModelParams::new(1.5, 1.0, Potential::Harmonic).is_err());
        assert!(ModelParams::new(0.5, 0.0, Potential::Harmonic).is_err());
    }

    #[test]
    fn absolute_threshold_reports_blow_up_with_partial_records() {
        let g = Grid::new(10.0, 128).unwrap();
        let params = ModelParams::new(0.8, 1.0, Potential::Harmonic).unwrap();
        // cap below the initial peak trips on the first step
        let psi = ComplexField::from_fn(g, |x| Complex64::new((-4.0 * x * x).exp(), 0.0));
        let cfg = EvolveConfig {
            tau: 0.01,
            t_end: 2.0,
            checkpoint_every: 10,
            blowup_threshold: 0.5,
            blowup_growth: None,
        };
        match evolve(&psi, &params, &cfg, None) {
            Err(Error::BlowUpDetected(b)) => {
                assert!(b.t > 0.0);
                assert!(b.linf > 0.5);
                assert!(!b.records.is_empty());
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
