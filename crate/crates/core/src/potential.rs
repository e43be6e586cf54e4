//! Trapping potentials.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::field::RealField;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Potential {
    /// `V(x) = x^2`
    #[default]
    Harmonic,
    /// `V(x) = x^2 + a sin(2 pi x)`, a non-symmetric perturbation of the trap.
    HarmonicPlusSine { amplitude: f64 },
}

impl Potential {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Potential::Harmonic => x * x,
            Potential::HarmonicPlusSine { amplitude } => x * x + amplitude * (2.0 * PI * x).sin(),
        }
    }

    pub fn eval(&self, grid: &Grid) -> RealField {
        RealField::from_fn(*grid, |x| self.at(x))
    }

    pub fn is_even(&self) -> bool {
        match *self {
            Potential::Harmonic => true,
            Potential::HarmonicPlusSine { amplitude } => amplitude == 0.0,
        }
    }

    /// Perturbation amplitude `a` (zero for the plain trap).
    pub fn amplitude(&self) -> f64 {
        match *self {
            Potential::Harmonic => 0.0,
            Potential::HarmonicPlusSine { amplitude } => amplitude,
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Harmonic => write!(f, "harmonic"),
            Potential::HarmonicPlusSine { amplitude } => write!(f, "harmonic+sine:a={amplitude}"),
        }
    }
}

impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "harmonic" {
            return Ok(Potential::Harmonic);
        }
        let amplitude = s
            .strip_prefix("harmonic+sine:a=")
            .and_then(|a| a.trim().parse::<f64>().ok())
            .filter(|a| a.is_finite())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown potential {s:?}; expected \"harmonic\" or \"harmonic+sine:a=<real>\""
                ))
            })?;
        Ok(Potential::HarmonicPlusSine { amplitude })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert_eq!(Potential::Harmonic.at(0.0), 0.0);
        assert_eq!(Potential::Harmonic.at(5.0), 25.0);
        let p = Potential::HarmonicPlusSine { amplitude: 1.0 };
        assert!((p.at(0.25) - 1.0625).abs() < 1e-15);
    }

    #[test]
    fn harmonic_is_even_on_paired_nodes() {
        let g = Grid::new(10.0, 64).unwrap();
        let v = Potential::Harmonic.eval(&g);
        for j in 1..64 {
            let m = g.mirror(j).unwrap();
            assert!((v.values()[j] - v.values()[m]).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_amplitude_matches_harmonic() {
        let g = Grid::new(6.0, 32).unwrap();
        let a = Potential::HarmonicPlusSine { amplitude: 0.0 }.eval(&g);
        let b = Potential::Harmonic.eval(&g);
        assert_eq!(a, b);
    }

    #[test]
    fn parses_config_strings() {
        assert_eq!("harmonic".parse::<Potential>().unwrap(), Potential::Harmonic);
        assert_eq!(
            "harmonic+sine:a=5".parse::<Potential>().unwrap(),
            Potential::HarmonicPlusSine { amplitude: 5.0 }
        );
        assert!("quartic".parse::<Potential>().is_err());
        assert!("harmonic+sine:a=x".parse::<Potential>().is_err());
        let p = Potential::HarmonicPlusSine { amplitude: -0.5 };
        assert_eq!(p.to_string().parse::<Potential>().unwrap(), p);
    }
}
