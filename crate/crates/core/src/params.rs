//! Model parameters.
//!
//! All internal computation runs with the mode frequency fixed to one.
//! [`RabiParams::rescaled`] and friends map a physical parameter set with
//! arbitrary `omega` onto that convention; energies come back multiplied by
//! `omega`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue of the parity operator selecting a reduced Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];

    /// `+1` for even, `-1` for odd.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn flipped(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Quantum Rabi model in one parity chain, `H = w a'a + g(a + a') +- delta (-1)^(a'a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    pub omega: f64,
    pub g: f64,
    pub delta: f64,
    pub parity: Parity,
}

impl RabiParams {
    /// Parameters at unit mode frequency.
    pub fn new(g: f64, delta: f64, parity: Parity) -> Result<Self> {
        Self::with_omega(1.0, g, delta, parity)
    }

    pub fn with_omega(omega: f64, g: f64, delta: f64, parity: Parity) -> Result<Self> {
        let p = RabiParams { omega, g, delta, parity };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be > 0, got {}", self.omega)));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidParameter(format!("g must be >= 0, got {}", self.g)));
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be >= 0, got {}", self.delta)));
        }
        Ok(())
    }

    /// The same physics at `omega = 1`.
    pub fn rescaled(&self) -> RabiParams {
        RabiParams {
            omega: 1.0,
            g: self.g / self.omega,
            delta: self.delta / self.omega,
            parity: self.parity,
        }
    }

    pub fn with_parity(&self, parity: Parity) -> RabiParams {
        RabiParams { parity, ..*self }
    }

    pub fn with_g(&self, g: f64) -> RabiParams {
        RabiParams { g, ..*self }
    }

    /// `delta` with the parity sign folded in. Odd-parity formulas are the
    /// even ones with `delta -> -delta`.
    pub fn signed_delta(&self) -> f64 {
        self.parity.sign() * self.delta
    }

    /// `x = E + g^2` for an energy in units of `omega`.
    pub fn spectral_parameter(&self, energy: f64) -> SpectralParameter {
        SpectralParameter(energy + self.g * self.g)
    }

    pub fn energy(&self, x: SpectralParameter) -> f64 {
        x.0 - self.g * self.g
    }
}

/// Shifted energy `x = E + g^2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SpectralParameter(pub f64);

impl SpectralParameter {
    pub fn value(self) -> f64 {
        self.0
    }

    /// Closest non-negative integer and the distance to it.
    pub fn nearest_integer(self) -> (u64, f64) {
        let n = self.0.round().max(0.0);
        (n as u64, (self.0 - n).abs())
    }

    /// Regular iff `x` is not within `tol_int` of a non-negative integer.
    pub fn is_regular(self, tol_int: f64) -> bool {
        let (_, d) = self.nearest_integer();
        d >= tol_int
    }
}

/// Asymmetric two-qubit Dicke model
/// `H = w a'a + (g1 s1x + g2 s2x)(a + a') + d1 s1z + d2 s2z`,
/// reduced to one parity chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dicke2Params {
    pub omega: f64,
    pub g1: f64,
    pub g2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub parity: Parity,
}

impl Dicke2Params {
    pub fn new(g1: f64, g2: f64, delta1: f64, delta2: f64, parity: Parity) -> Result<Self> {
        let p = Dicke2Params { omega: 1.0, g1, g2, delta1, delta2, parity };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be > 0, got {}", self.omega)));
        }
        for (name, v) in [("g1", self.g1), ("g2", self.g2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("delta1", self.delta1), ("delta2", self.delta2)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    /// `g = g1 + g2`, location of one pair of singular points.
    pub fn g_sum(&self) -> f64 {
        self.g1 + self.g2
    }

    /// `g' = g1 - g2`.
    pub fn g_diff(&self) -> f64 {
        self.g1 - self.g2
    }

    pub fn rescaled(&self) -> Dicke2Params {
        let w = self.omega;
        Dicke2Params {
            omega: 1.0,
            g1: self.g1 / w,
            g2: self.g2 / w,
            delta1: self.delta1 / w,
            delta2: self.delta2 / w,
            parity: self.parity,
        }
    }

    pub fn with_parity(&self, parity: Parity) -> Dicke2Params {
        Dicke2Params { parity, ..*self }
    }

    /// Rescales both couplings so that `g1 + g2 = g`, keeping their ratio.
    /// With both base couplings zero the split is even.
    pub fn with_total_coupling(&self, g: f64) -> Dicke2Params {
        let sum = self.g_sum();
        let share = if sum > 0.0 { self.g1 / sum } else { 0.5 };
        Dicke2Params { g1: g * share, g2: g * (1.0 - share), ..*self }
    }
}

/// Spin-3/2 sector of the symmetric three-qubit Dicke model,
/// `H = a'a + 2 delta Jz + 2 g (a + a') Jx`, in one parity chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dicke3Params {
    pub omega: f64,
    pub g: f64,
    pub delta: f64,
    pub parity: Parity,
}

impl Dicke3Params {
    pub fn new(g: f64, delta: f64, parity: Parity) -> Result<Self> {
        let p = Dicke3Params { omega: 1.0, g, delta, parity };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be > 0, got {}", self.omega)));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidParameter(format!("g must be >= 0, got {}", self.g)));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta must be finite, got {}", self.delta)));
        }
        Ok(())
    }

    pub fn rescaled(&self) -> Dicke3Params {
        Dicke3Params {
            omega: 1.0,
            g: self.g / self.omega,
            delta: self.delta / self.omega,
            parity: self.parity,
        }
    }

    pub fn with_parity(&self, parity: Parity) -> Dicke3Params {
        Dicke3Params { parity, ..*self }
    }

    /// Regular singular points of the reduced system, `+-g` and `+-3g`.
    pub fn singular_points(&self) -> [f64; 4] {
        [-3.0 * self.g, -self.g, self.g, 3.0 * self.g]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_coupling() {
        assert!(RabiParams::new(-0.1, 0.4, Parity::Even).is_err());
        assert!(RabiParams::with_omega(0.0, 0.1, 0.4, Parity::Even).is_err());
        assert!(RabiParams::new(0.0, 0.0, Parity::Odd).is_ok());
    }

    #[test]
    fn rescaling_divides_by_omega() {
        let p = RabiParams::with_omega(2.0, 1.0, 0.8, Parity::Odd).unwrap().rescaled();
        assert_eq!((p.omega, p.g, p.delta), (1.0, 0.5, 0.4));
        assert_eq!(p.signed_delta(), -0.4);
    }

    #[test]
    fn spectral_parameter_classification() {
        assert!(SpectralParameter(0.5).is_regular(1e-9));
        assert!(!SpectralParameter(3.0 + 1e-12).is_regular(1e-9));
        assert_eq!(SpectralParameter(-0.2).nearest_integer().0, 0);
    }

    #[test]
    fn total_coupling_keeps_ratio() {
        let p = Dicke2Params::new(0.8, 0.2, 0.6, 0.2, Parity::Even).unwrap();
        let q = p.with_total_coupling(2.0);
        assert!((q.g1 - 1.6).abs() < 1e-15 && (q.g2 - 0.4).abs() < 1e-15);
    }
}
