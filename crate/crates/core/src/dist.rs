//! State distributions given by their quantile function.
//!
//! The quantile `F^{-1}` lives on `[0, 1]` and may be discontinuous: a jump
//! encodes an atom of the distribution, a flat stretch encodes a
//! zero-density interval. An optional density is carried for problems that
//! consume `f` directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::PiecewisePoly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileDistribution {
    quantile: PiecewisePoly,
    density: Option<PiecewisePoly>,
    support: (f64, f64),
}

impl QuantileDistribution {
    pub fn new(quantile: PiecewisePoly, density: Option<PiecewisePoly>) -> Result<Self> {
        let (qlo, qhi) = quantile.domain();
        if qlo.abs() > 1e-9 || (qhi - 1.0).abs() > 1e-9 {
            return Err(Error::DomainMismatch(format!(
                "quantile must live on [0, 1], got [{qlo}, {qhi}]"
            )));
        }
        if quantile.min_slope_on_grid(64) < -1e-12 {
            return Err(Error::NonMonotone("quantile must be nondecreasing".into()));
        }
        for &b in quantile.breakpoints() {
            if quantile.eval_right(b) < quantile.eval_left(b) - 1e-12 {
                return Err(Error::NonMonotone(format!("quantile jumps down at {b}")));
            }
        }
        let support = (quantile.eval_right(0.0), quantile.eval_left(1.0));
        if let Some(f) = &density {
            let (flo, fhi) = f.domain();
            if (flo - support.0).abs() > 1e-9 || (fhi - support.1).abs() > 1e-9 {
                return Err(Error::DomainMismatch(format!(
                    "density domain [{flo}, {fhi}] must equal the support [{}, {}]",
                    support.0, support.1
                )));
            }
            validate_density(f)?;
        }
        Ok(Self { quantile, density, support })
    }

    /// Uniform distribution on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self {
            quantile: PiecewisePoly::affine(0.0, 1.0, lo, hi - lo),
            density: Some(PiecewisePoly::constant(lo, hi, 1.0 / (hi - lo))),
            support: (lo, hi),
        }
    }

    /// Exact construction from a piecewise-constant density (the cdf is
    /// piecewise affine, so its inverse is too).
    pub fn from_step_density(f: &PiecewisePoly) -> Result<Self> {
        validate_density(f)?;
        if f.degree() > 0 {
            return Err(Error::Invalid(
                "exact quantile inversion requires a piecewise-constant density".into(),
            ));
        }
        let cdf = f.antiderivative();
        let mut breaks = Vec::with_capacity(f.breakpoints().len());
        let mut coeffs = Vec::new();
        let bps = f.breakpoints();
        for (i, window) in bps.windows(2).enumerate() {
            let u0 = cdf.eval(window[0]);
            let value = f.piece_coeffs()[i][0];
            breaks.push(u0);
            coeffs.push(vec![window[0], 1.0 / value]);
        }
        breaks.push(cdf.eval(*bps.last().unwrap()));
        // normalize rounding: masses must span exactly [0, 1]
        let last = breaks.len() - 1;
        breaks[0] = 0.0;
        breaks[last] = 1.0;
        let quantile = PiecewisePoly::new(breaks, coeffs)?;
        Self::new(quantile, Some(f.clone()))
    }

    pub fn quantile(&self) -> &PiecewisePoly {
        &self.quantile
    }

    pub fn density(&self) -> Option<&PiecewisePoly> {
        self.density.as_ref()
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Whether this is (numerically) the uniform distribution on `[0, 1]`.
    pub fn is_unit_uniform(&self) -> bool {
        if (self.support.0.abs() > 1e-12) || ((self.support.1 - 1.0).abs() > 1e-12) {
            return false;
        }
        (0..=64).all(|k| {
            let u = k as f64 / 64.0;
            (self.quantile.eval(u) - u).abs() <= 1e-12
        })
    }

    /// Cumulative distribution value, available when a density is present.
    pub fn cdf(&self) -> Result<PiecewisePoly> {
        let f = self.density.as_ref().ok_or(Error::MissingDensity)?;
        Ok(f.antiderivative())
    }
}

/// Check positivity (on a 1024-point grid) and unit mass (exact
/// integration, tolerance 1e-10). Continuity is not required here; step
/// densities are legitimate and encode piecewise-affine quantiles. Consumers
/// that need a continuous density check it themselves.
pub fn validate_density(f: &PiecewisePoly) -> Result<()> {
    let (lo, hi) = f.domain();
    // positivity on the interior (densities may vanish at the endpoints)
    for k in 0..1024 {
        let x = lo + (hi - lo) * (k as f64 + 0.5) / 1024.0;
        let v = f.eval(x);
        if !(v > 0.0) {
            return Err(Error::Invalid(format!("density must be positive; f({x}) = {v}")));
        }
    }
    if f.eval(lo) < 0.0 || f.eval_left(hi) < 0.0 {
        return Err(Error::Invalid("density is negative at a support endpoint".into()));
    }
    let mass = f.definite_integral(lo, hi)?;
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid(format!("density must integrate to 1, got {mass}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_has_identity_quantile() {
        let u = QuantileDistribution::uniform(0.0, 1.0);
        assert!(u.is_unit_uniform());
        assert_eq!(u.support(), (0.0, 1.0));
    }

    #[test]
    fn two_point_distribution_via_jump() {
        // P(w = 0) = 0.7, P(w = 1) = 0.3
        let q = PiecewisePoly::new(vec![0.0, 0.7, 1.0], vec![vec![0.0], vec![1.0]]).unwrap();
        let d = QuantileDistribution::new(q, None).unwrap();
        assert_eq!(d.support(), (0.0, 1.0));
        assert_eq!(d.quantile().eval(0.3), 0.0);
        assert_eq!(d.quantile().eval(0.7), 1.0); // right limit at the jump
        assert_eq!(d.quantile().eval_left(0.7), 0.0);
    }

    #[test]
    fn step_density_round_trip() {
        // histogram density: 0.5 on [0, 0.4), 1.5 on [0.4, 0.8), 1.0 on [0.8, 1]
        let f = PiecewisePoly::new(
            vec![0.0, 0.4, 0.8, 1.0],
            vec![vec![0.5], vec![1.5], vec![1.0]],
        )
        .unwrap();
        let d = QuantileDistribution::from_step_density(&f).unwrap();
        let cdf = d.cdf().unwrap();
        for k in 0..=100 {
            let theta = k as f64 / 100.0;
            let w = d.quantile().eval(theta);
            assert!((cdf.eval(w) - theta).abs() < 1e-10, "theta = {theta}");
        }
    }

    #[test]
    fn rejects_decreasing_quantile() {
        let q = PiecewisePoly::affine(0.0, 1.0, 1.0, -1.0);
        assert!(QuantileDistribution::new(q, None).is_err());
    }

    #[test]
    fn rejects_non_unit_mass() {
        let f = PiecewisePoly::constant(0.0, 1.0, 1.5);
        assert!(validate_density(&f).is_err());
    }
}
