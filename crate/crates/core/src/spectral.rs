//! Discrete Fourier transforms on a [`Grid`], the spectral fractional
//! Laplacian and the semi-implicit linear solve shared by the gradient flows.
//!
//! Coefficients follow the ansatz `psi(x_j) = sum_k psi_hat_k exp(i mu_k x_j)`,
//! so `forward` divides by `J`. Because `mu_k x_j = -k pi + 2 pi k j / J`, the
//! coefficients differ from a plain DFT by the sign `(-1)^k`; diagonal
//! multipliers do not see that sign and skip it.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::Grid;

pub use crate::field::{ComplexField, RealField};

/// Iteration cap of the preconditioned conjugate gradient solve.
pub const CG_MAX_ITERS: usize = 500;
/// Relative residual guaranteed by [`Spectral::solve_shifted_system`].
pub const CG_TOLERANCE: f64 = 1e-12;

/// Fourier coefficients `psi_hat_k` in DFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::invalid(format!(
                "spectrum has {} coefficients but the grid has {} nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "fractional order s must lie in (0, 1], got {s}"
        )))
    }
}

/// FFT plans for one grid. Cheap to clone; safe to share between threads.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid: *grid,
            fwd: planner.plan_fft_forward(grid.len()),
            inv: planner.plan_fft_inverse(grid.len()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Multipliers `|mu_k|^{2s}` in storage order; the zero mode is exactly 0.
    pub fn symbol(&self, s: f64) -> Result<Vec<f64>> {
        check_order(s)?;
        Ok(self
            .grid
            .modes()
            .into_iter()
            .map(|mu| {
                if s == 1.0 {
                    mu * mu
                } else {
                    mu.abs().powf(2.0 * s)
                }
            })
            .collect())
    }

    pub fn forward(&self, field: &ComplexField) -> Spectrum {
        let mut buf = field.values().to_vec();
        self.fwd.process(&mut buf);
        let inv_j = 1.0 / self.grid.len() as f64;
        for (idx, c) in buf.iter_mut().enumerate() {
            // (-1)^k == (-1)^idx because J is even
            let sign = if idx % 2 == 0 { inv_j } else { -inv_j };
            *c *= sign;
        }
        Spectrum {
            grid: self.grid,
            coeffs: buf,
        }
    }

    pub fn inverse(&self, spec: &Spectrum) -> ComplexField {
        let mut buf: Vec<Complex64> = spec
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| if idx % 2 == 0 { c } else { -c })
            .collect();
        self.inv.process(&mut buf);
        ComplexField::new(self.grid, buf).expect("length preserved")
    }

    /// Multiplies the spectrum of `buf` by `symbol` in place.
    pub(crate) fn apply_symbol(&self, buf: &mut [Complex64], symbol: &[f64]) {
        self.fwd.process(buf);
        let inv_j = 1.0 / self.grid.len() as f64;
        for (c, m) in buf.iter_mut().zip(symbol) {
            *c *= m * inv_j;
        }
        self.inv.process(buf);
    }

    /// Multiplies the spectrum of `buf` by a complex `factor` in place.
    pub(crate) fn apply_complex_symbol(&self, buf: &mut [Complex64], factor: &[Complex64]) {
        self.fwd.process(buf);
        let inv_j = 1.0 / self.grid.len() as f64;
        for (c, m) in buf.iter_mut().zip(factor) {
            *c *= m * inv_j;
        }
        self.inv.process(buf);
    }

    /// Applies a real, even multiplier to a real vector.
    pub(crate) fn apply_symbol_real(
        &self,
        input: &[f64],
        symbol: &[f64],
        scratch: &mut [Complex64],
        out: &mut [f64],
    ) {
        for (z, &v) in scratch.iter_mut().zip(input) {
            *z = Complex64::new(v, 0.0);
        }
        self.apply_symbol(scratch, symbol);
        for (o, z) in out.iter_mut().zip(scratch.iter()) {
            *o = z.re;
        }
    }

    /// `(-Delta)^s` through the Fourier symbol `|mu_k|^{2s}`.
    pub fn apply_fractional_laplacian(&self, field: &ComplexField, s: f64) -> Result<ComplexField> {
        let symbol = self.symbol(s)?;
        let mut buf = field.values().to_vec();
        self.apply_symbol(&mut buf, &symbol);
        ComplexField::new(self.grid, buf)
    }

    pub fn apply_fractional_laplacian_real(&self, field: &RealField, s: f64) -> Result<RealField> {
        let symbol = self.symbol(s)?;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let mut out = vec![0.0; self.grid.len()];
        self.apply_symbol_real(field.values(), &symbol, &mut scratch, &mut out);
        RealField::new(self.grid, out)
    }

    /// Discrete `<u, (-Delta)^s u> = 2L sum_k |mu_k|^{2s} |u_hat_k|^2`.
    pub fn kinetic_form(&self, field: &ComplexField, s: f64) -> Result<f64> {
        let symbol = self.symbol(s)?;
        Ok(self.kinetic_form_with(field.values(), &symbol))
    }

    pub fn kinetic_form_real(&self, field: &RealField, s: f64) -> Result<f64> {
        let symbol = self.symbol(s)?;
        let buf: Vec<Complex64> = field.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.kinetic_form_with(&buf, &symbol))
    }

    pub(crate) fn kinetic_form_with(&self, values: &[Complex64], symbol: &[f64]) -> f64 {
        let mut buf = values.to_vec();
        self.fwd.process(&mut buf);
        let j = self.grid.len() as f64;
        let sum: f64 = buf.iter().zip(symbol).map(|(c, m)| m * c.norm_sqr()).sum();
        2.0 * self.grid.half_width() * sum / (j * j)
    }

    /// Solves `((1/tau) I + (-Delta)^s + diag(W)) u = rhs / tau`.
    ///
    /// Matrix-free preconditioned CG; the preconditioner inverts
    /// `(1/tau) I + (-Delta)^s` exactly in Fourier space. Stops with
    /// [`Error::SolverStalled`] on non-positive curvature or after
    /// [`CG_MAX_ITERS`] iterations.
    pub fn solve_shifted_system(
        &self,
        rhs: &RealField,
        potential: &RealField,
        tau: f64,
        s: f64,
    ) -> Result<RealField> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {tau}")));
        }
        if !potential.is_finite() {
            return Err(Error::invalid("shift field W has non-finite entries"));
        }
        let symbol = self.symbol(s)?;
        let op = ShiftedOperator::new(self, &symbol, potential.values(), tau);
        let sol = op.solve(rhs.values())?;
        RealField::new(self.grid, sol)
    }
}

/// `A = (1/tau) I + (-Delta)^s + diag(W)` acting on real vectors.
pub(crate) struct ShiftedOperator<'a> {
    spectral: &'a Spectral,
    symbol: &'a [f64],
    shift: &'a [f64],
    inv_tau: f64,
    precond: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl<'a> ShiftedOperator<'a> {
    pub(crate) fn new(spectral: &'a Spectral, symbol: &'a [f64], shift: &'a [f64], tau: f64) -> Self {
        let inv_tau = 1.0 / tau;
        let precond = symbol.iter().map(|m| 1.0 / (inv_tau + m)).collect();
        ShiftedOperator {
            spectral,
            symbol,
            shift,
            inv_tau,
            precond,
        }
    }

    fn apply(&self, v: &[f64], scratch: &mut [Complex64], out: &mut [f64]) {
        self.spectral.apply_symbol_real(v, self.symbol, scratch, out);
        for ((o, &vi), &w) in out.iter_mut().zip(v).zip(self.shift) {
            *o += (self.inv_tau + w) * vi;
        }
    }

    fn precondition(&self, r: &[f64], scratch: &mut [Complex64], out: &mut [f64]) {
        self.spectral.apply_symbol_real(r, &self.precond, scratch, out);
    }

    fn residual(&self, x: &[f64], b: &[f64], scratch: &mut [Complex64], r: &mut [f64]) {
        self.apply(x, scratch, r);
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let b: Vec<f64> = rhs.iter().map(|v| v * self.inv_tau).collect();
        let b_norm = norm(&b);
        if b_norm == 0.0 {
            return Ok(vec![0.0; n]);
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); n];
        let mut x = vec![0.0; n];
        self.precondition(&b, &mut scratch, &mut x);
        let mut r = vec![0.0; n];
        self.residual(&x, &b, &mut scratch, &mut r);
        let mut z = vec![0.0; n];
        self.precondition(&r, &mut scratch, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        // the recurrence drifts from the true residual; aim a little lower
        let target = 0.1 * CG_TOLERANCE * b_norm;

        for iter in 0..CG_MAX_ITERS {
            if norm(&r) <= target {
                self.residual(&x, &b, &mut scratch, &mut r);
                if norm(&r) <= CG_TOLERANCE * b_norm {
                    return Ok(x);
                }
                self.precondition(&r, &mut scratch, &mut z);
                p.copy_from_slice(&z);
                rz = dot(&r, &z);
            }
            self.apply(&p, &mut scratch, &mut ap);
            let curvature = dot(&p, &ap);
            if !(curvature > 0.0) {
                return Err(Error::SolverStalled {
                    iterations: iter,
                    reason: format!("non-positive curvature {curvature:.3e}"),
                });
            }
            let alpha = rz / curvature;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            self.precondition(&r, &mut scratch, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        self.residual(&x, &b, &mut scratch, &mut r);
        if norm(&r) <= CG_TOLERANCE * b_norm {
            return Ok(x);
        }
        Err(Error::SolverStalled {
            iterations: CG_MAX_ITERS,
            reason: format!(
                "relative residual {:.3e} above {CG_TOLERANCE:e}",
                norm(&r) / b_norm
            ),
        })
    }
}
