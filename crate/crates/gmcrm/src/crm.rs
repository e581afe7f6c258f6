//! The gamma and σ-stable CRM families: Laplace exponents `ψ`, moment
//! kernels `τ_q`, and the joint exponent `h_z` of a GM-dependent pair.

use crate::error::{domain, Result};
use crate::specialfn::{ln_gamma, ln_poch};

/// Marginal CRM law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrmFamily {
    Gamma,
    Stable(f64),
}

impl CrmFamily {
    pub fn stable(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma < 1.0 {
            Ok(CrmFamily::Stable(sigma))
        } else {
            domain(format!("stable index must lie in (0,1), got {sigma}"))
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CrmFamily::Gamma => Ok(()),
            CrmFamily::Stable(s) => CrmFamily::stable(s).map(|_| ()),
        }
    }
}

/// Total mass `c` and idiosyncrasy weight `z` of the GM construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmDependenceParams {
    pub c: f64,
    pub z: f64,
}

impl GmDependenceParams {
    pub fn new(c: f64, z: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return domain(format!("total mass c must be positive, got {c}"));
        }
        if !(0.0..=1.0).contains(&z) {
            return domain(format!("z must lie in [0,1], got {z}"));
        }
        Ok(Self { c, z })
    }
}

/// Laplace exponent at a constant.
pub fn psi(family: CrmFamily, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return domain(format!("psi needs u >= 0, got {u}"));
    }
    Ok(psi_unchecked(family, u))
}

#[inline]
pub(crate) fn psi_unchecked(family: CrmFamily, u: f64) -> f64 {
    match family {
        CrmFamily::Gamma => u.ln_1p(),
        CrmFamily::Stable(s) => u.powf(s),
    }
}

/// `ln τ_q(u)`.
pub fn log_tau(family: CrmFamily, q: u64, u: f64) -> Result<f64> {
    if q < 1 {
        return domain("tau needs q >= 1");
    }
    match family {
        CrmFamily::Gamma if u >= 0.0 => Ok(log_tau_unchecked(family, q, u)),
        CrmFamily::Stable(_) if u > 0.0 => Ok(log_tau_unchecked(family, q, u)),
        _ => domain(format!("tau argument out of range: u = {u}")),
    }
}

#[inline]
pub(crate) fn log_tau_unchecked(family: CrmFamily, q: u64, u: f64) -> f64 {
    match family {
        CrmFamily::Gamma => ln_gamma(q as f64) - q as f64 * u.ln_1p(),
        CrmFamily::Stable(s) => s.ln() + ln_poch(1.0 - s, q - 1) + (s - q as f64) * u.ln(),
    }
}

/// `τ_q(u) = ∫ s^q e^{-us} ρ(s) ds`.
pub fn tau(family: CrmFamily, q: u64, u: f64) -> Result<f64> {
    log_tau(family, q, u).map(f64::exp)
}

/// `z(ψ(u)+ψ(v)) + (1-z)ψ(u+v)`.
pub fn h_z(family: CrmFamily, params: GmDependenceParams, u: f64, v: f64) -> Result<f64> {
    let z = params.z;
    Ok(z * (psi(family, u)? + psi(family, v)?) + (1.0 - z) * psi(family, u + v)?)
}

#[inline]
pub(crate) fn h_z_unchecked(family: CrmFamily, z: f64, u: f64, v: f64) -> f64 {
    z * (psi_unchecked(family, u) + psi_unchecked(family, v))
        + (1.0 - z) * psi_unchecked(family, u + v)
}
