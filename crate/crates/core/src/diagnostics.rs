//! Scalar functionals of grid functions: discrete norms, energies, the
//! `Sigma_s` norm and the stability distance `D(s, t)`.
//!
//! Local terms use `h`-weighted quadrature; the kinetic term uses the
//! Parseval-consistent spectral sum from [`Spectral::kinetic_form`].

use num_complex::Complex64;

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::field::{ComplexField, RealField, Sampled};
use crate::spectral::Spectral;

/// One checkpoint of an evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub mass: f64,
    /// Total energy `E = 2 J`.
    pub energy: f64,
    pub linf: f64,
    pub stability_d: Option<f64>,
}

/// `M = (h sum_j |psi_j|^2)^{1/2}`
pub fn discrete_mass<F: Sampled>(field: &F) -> f64 {
    let h = field.grid().spacing();
    let sum: f64 = (0..field.len()).map(|j| field.abs_at(j).powi(2)).sum();
    (h * sum).sqrt()
}

/// `(h sum_j |psi_j|^p)^{1/p}` for `p >= 1`.
pub fn discrete_lp_norm<F: Sampled>(field: &F, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("L^p norm needs p >= 1, got {p}")));
    }
    if p == 2.0 {
        return Ok(discrete_mass(field));
    }
    let h = field.grid().spacing();
    let sum: f64 = (0..field.len()).map(|j| field.abs_at(j).powf(p)).sum();
    Ok((h * sum).powf(1.0 / p))
}

/// Parts of the energy functional for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energies {
    /// `<psi, (-Delta)^s psi>`
    pub kinetic: f64,
    /// `h sum V_j |psi_j|^2`
    pub potential: f64,
    /// `h sum |psi_j|^{2 sigma + 2}`
    pub interaction: f64,
    /// `J = kinetic/2 + potential/2 - interaction/(2 sigma + 2)`
    pub j: f64,
    /// `E = 2 J`
    pub e: f64,
}

impl Energies {
    /// `J` without the focusing term.
    pub fn linear_j(&self) -> f64 {
        0.5 * (self.kinetic + self.potential)
    }
}

pub fn energy<F: Sampled>(
    spectral: &Spectral,
    field: &F,
    params: &ModelParams,
    potential: &RealField,
) -> Result<Energies> {
    params.validate()?;
    let h = field.grid().spacing();
    let values: Vec<Complex64> = (0..field.len()).map(|j| field.complex_at(j)).collect();
    let symbol = spectral.symbol(params.s)?;
    let kinetic = spectral.kinetic_form_with(&values, &symbol);
    let p = 2.0 * params.sigma + 2.0;
    let mut pot = 0.0;
    let mut inter = 0.0;
    for (z, v) in values.iter().zip(potential.values()) {
        let a2 = z.norm_sqr();
        pot += v * a2;
        inter += a2.powf(0.5 * p);
    }
    let potential_term = h * pot;
    let interaction = h * inter;
    let j = 0.5 * kinetic + 0.5 * potential_term - interaction / p;
    Ok(Energies {
        kinetic,
        potential: potential_term,
        interaction,
        j,
        e: 2.0 * j,
    })
}

fn real_sigma_norm(spectral: &Spectral, values: &[f64], symbol: &[f64]) -> f64 {
    let grid = spectral.grid();
    let h = grid.spacing();
    let l2 = (h * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let weighted = (h * values
        .iter()
        .enumerate()
        .map(|(j, v)| (grid.node(j) * v).powi(2))
        .sum::<f64>())
    .sqrt();
    let buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let kinetic = spectral.kinetic_form_with(&buf, symbol).max(0.0);
    l2 + kinetic.sqrt() + weighted
}

/// `||u||_2 + ||(-Delta)^{s/2} u||_2 + ||x u||_2`; complex fields combine the
/// real and imaginary parts as `sqrt(|Re|^2 + |Im|^2)`.
pub fn sigma_norm<F: Sampled>(spectral: &Spectral, field: &F, s: f64) -> Result<f64> {
    let symbol = spectral.symbol(s)?;
    let n = field.len();
    let re: Vec<f64> = (0..n).map(|j| field.complex_at(j).re).collect();
    let im: Vec<f64> = (0..n).map(|j| field.complex_at(j).im).collect();
    let a = real_sigma_norm(spectral, &re, &symbol);
    if im.iter().all(|&v| v == 0.0) {
        return Ok(a);
    }
    let b = real_sigma_norm(spectral, &im, &symbol);
    Ok(a.hypot(b))
}

/// `D = ||u_ref - psi|| / ||u_ref||` in the `Sigma_s` norm for complex fields.
pub fn stability_distance<R: Sampled>(
    spectral: &Spectral,
    reference: &R,
    psi: &ComplexField,
    s: f64,
) -> Result<f64> {
    let denom = sigma_norm(spectral, reference, s)?;
    if denom == 0.0 {
        return Err(Error::invalid("stability distance needs a nonzero reference"));
    }
    let diff = ComplexField::new(
        *psi.grid(),
        (0..psi.len())
            .map(|j| reference.complex_at(j) - psi.values()[j])
            .collect(),
    )?;
    Ok(sigma_norm(spectral, &diff, s)? / denom)
}

/// Reference standing wave for `D(s, t)`.
#[derive(Debug, Clone)]
pub struct StabilityReference {
    pub profile: RealField,
    pub lambda: f64,
    /// Compare against `u e^{-i lambda t}` rather than the bare profile.
    pub phase_rotate_reference: bool,
}

impl StabilityReference {
    pub fn new(profile: RealField, lambda: f64) -> Self {
        StabilityReference {
            profile,
            lambda,
            phase_rotate_reference: true,
        }
    }

    pub fn at(&self, t: f64) -> ComplexField {
        if self.phase_rotate_reference {
            let phase = Complex64::from_polar(1.0, -self.lambda * t);
            self.profile.to_complex().scale(phase)
        } else {
            self.profile.to_complex()
        }
    }

    pub fn distance(&self, spectral: &Spectral, psi: &ComplexField, t: f64, s: f64) -> Result<f64> {
        stability_distance(spectral, &self.at(t), psi, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::potential::Potential;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gaussian(g: Grid) -> RealField {
        RealField::from_fn(g, |x| PI.powf(-0.25) * (-0.5 * x * x).exp())
    }

    #[test]
    fn mass_of_constant_and_gaussian() {
        let g = Grid::new(10.0, 512).unwrap();
        assert_relative_eq!(discrete_mass(&RealField::constant(g, 1.0)), 20.0_f64.sqrt(), max_relative = 1e-14);
        let u = RealField::from_fn(g, |x| (-0.5 * x * x).exp());
        assert!((discrete_mass(&u) - PI.powf(0.25)).abs() < 1e-10);
        assert!((discrete_mass(&u) - 1.33133536).abs() < 1e-8);
    }

    #[test]
    fn lp_norms() {
        let g = Grid::new(10.0, 512).unwrap();
        let ones = RealField::constant(g, 1.0);
        assert!((discrete_lp_norm(&ones, 4.0).unwrap() - 2.11474).abs() < 1e-5);
        let u = gaussian(g);
        let expect = (1.0 / (2.0 * PI).sqrt()).powf(0.25);
        assert!((discrete_lp_norm(&u, 4.0).unwrap() - expect).abs() < 1e-8);
        assert!((discrete_lp_norm(&u, 4.0).unwrap() - 0.7947445).abs() < 1e-6);
        assert_eq!(discrete_lp_norm(&u, 2.0).unwrap(), discrete_mass(&u));
        assert!(discrete_lp_norm(&u, 0.5).is_err());
    }

    #[test]
    fn gaussian_energies() {
        let g = Grid::new(10.0, 512).unwrap();
        let sp = Spectral::new(&g);
        let v = Potential::Harmonic.eval(&g);
        let params = ModelParams::new(1.0, 1.0, Potential::Harmonic).unwrap();
        let u = gaussian(g);
        let en = energy(&sp, &u, &params, &v).unwrap();
        assert!((en.linear_j() - 0.5).abs() < 1e-8);
        let expect = 0.5 - 1.0 / (4.0 * (2.0 * PI).sqrt());
        assert!((en.j - expect).abs() < 1e-6);
        assert!((en.j - 0.40026).abs() < 1e-5);
        assert_relative_eq!(en.e, 2.0 * en.j, max_relative = 1e-15);

        let zero = energy(&sp, &RealField::zeros(g), &params, &v).unwrap();
        assert_eq!((zero.j, zero.e), (0.0, 0.0));
    }

    #[test]
    fn sigma_norm_of_gaussian() {
        let g = Grid::new(10.0, 512).unwrap();
        let sp = Spectral::new(&g);
        let u = gaussian(g);
        let expect = 1.0 + 2.0 * 0.5_f64.sqrt();
        assert!((sigma_norm(&sp, &u, 1.0).unwrap() - expect).abs() < 1e-6);
        assert_eq!(sigma_norm(&sp, &RealField::zeros(g), 0.7).unwrap(), 0.0);
        let scaled = u.scale(3.5);
        assert_relative_eq!(
            sigma_norm(&sp, &scaled, 0.6).unwrap(),
            3.5 * sigma_norm(&sp, &u, 0.6).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn stability_distance_examples() {
        let g = Grid::new(10.0, 256).unwrap();
        let sp = Spectral::new(&g);
        let u = gaussian(g);
        let psi = u.scale(0.9).to_complex();
        assert!((stability_distance(&sp, &u, &psi, 0.8).unwrap() - 0.1).abs() < 1e-13);
        assert!(stability_distance(&sp, &u, &u.to_complex(), 0.8).unwrap() < 1e-15);
        let theta: f64 = 0.7;
        let rotated = u.to_complex().scale(Complex64::from_polar(1.0, theta));
        let d = stability_distance(&sp, &u, &rotated, 0.8).unwrap();
        assert!((d - 2.0 * (theta / 2.0).sin().abs()).abs() < 1e-13);
        assert!(stability_distance(&sp, &RealField::zeros(g), &psi, 0.8).is_err());
    }

    #[test]
    fn rotated_reference() {
        let g = Grid::new(10.0, 64).unwrap();
        let u = gaussian(g);
        let r = StabilityReference::new(u.clone(), 0.5);
        let at = r.at(2.0);
        let z = Complex64::from_polar(1.0, -1.0);
        for (a, b) in at.values().iter().zip(u.values()) {
            assert!((a - z * b).norm() < 1e-15);
        }
        let raw = StabilityReference {
            phase_rotate_reference: false,
            ..r
        };
        assert_eq!(raw.at(2.0), u.to_complex());
    }
}
