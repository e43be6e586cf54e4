//! Periodic truncated domain `[-L, L)` and its discrete Fourier modes.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)` with `J` nodes per axis.
///
/// Nodes are `x_j = -L + j h`, `h = 2L / J`. Only one spatial dimension is
/// supported; `dim` is kept so that callers can check it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    nodes: usize,
    spacing: f64,
    dim: usize,
}

impl Grid {
    pub fn new(half_width: f64, nodes: usize) -> Result<Self> {
        Self::with_dim(half_width, nodes, 1)
    }

    pub fn with_dim(half_width: f64, nodes: usize, dim: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!(
                "half-width L must be positive, got {half_width}"
            )));
        }
        if nodes < 4 || !nodes.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "node count J must be even and at least 4, got {nodes}"
            )));
        }
        match dim {
            1 => {}
            0 => return Err(Error::invalid("dimension must be at least 1")),
            d => {
                return Err(Error::NotImplemented(format!(
                    "{d}-dimensional grids"
                )))
            }
        }
        Ok(Grid {
            half_width,
            nodes,
            spacing: 2.0 * half_width / nodes as f64,
            dim,
        })
    }

    /// Half-width `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of nodes `J`.
    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mesh size `h = 2L / J`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.node(j)).collect()
    }

    /// Integer wavenumber stored at transform index `idx`
    /// (standard DFT order `0, 1, .., J/2-1, -J/2, .., -1`).
    pub fn wavenumber(&self, idx: usize) -> i64 {
        let half = self.nodes / 2;
        if idx < half {
            idx as i64
        } else {
            idx as i64 - self.nodes as i64
        }
    }

    /// Angular frequencies `mu_k = k pi / L` in transform storage order.
    pub fn modes(&self) -> Vec<f64> {
        (0..self.nodes)
            .map(|idx| self.wavenumber(idx) as f64 * PI / self.half_width)
            .collect()
    }

    /// Index of the node closest to `x`, wrapping periodically.
    pub fn nearest_node(&self, x: f64) -> usize {
        let shifted = (x + self.half_width) / self.spacing;
        (shifted.round() as i64).rem_euclid(self.nodes as i64) as usize
    }

    /// Partner of node `j` under `x -> -x`, when it lies on the grid.
    pub fn mirror(&self, j: usize) -> Option<usize> {
        if j == 0 {
            None
        } else {
            Some(self.nodes - j)
        }
    }
}
