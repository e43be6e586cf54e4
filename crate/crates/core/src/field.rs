//! Grid-sampled wave functions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Complex wave function `psi(x_j)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

/// Real candidate profile `u(x_j)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::invalid(format!(
            "field has {len} samples but the grid has {} nodes",
            grid.len()
        )));
    }
    Ok(())
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(ComplexField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn modulus(&self) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn re(&self) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.re).collect(),
        }
    }

    pub fn im(&self) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|z| z.im).collect(),
        }
    }

    /// Largest modulus over the grid.
    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn sub(&self, other: &ComplexField) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(RealField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        RealField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        RealField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        RealField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, factor: f64) -> Self {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn sub(&self, other: &RealField) -> RealField {
        RealField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Common read access to real and complex grid functions.
pub trait Sampled {
    fn grid(&self) -> &Grid;
    fn len(&self) -> usize {
        self.grid().len()
    }
    fn is_empty(&self) -> bool {
        false
    }
    fn abs_at(&self, j: usize) -> f64;
    fn complex_at(&self, j: usize) -> Complex64;
}

impl Sampled for ComplexField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn abs_at(&self, j: usize) -> f64 {
        self.values[j].norm()
    }
    fn complex_at(&self, j: usize) -> Complex64 {
        self.values[j]
    }
}

impl Sampled for RealField {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn abs_at(&self, j: usize) -> f64 {
        self.values[j].abs()
    }
    fn complex_at(&self, j: usize) -> Complex64 {
        Complex64::new(self.values[j], 0.0)
    }
}
