//! Closed-form constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 1.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::KappaOutOfRange(kappa))
    }
}

/// Bound on the number of pieces per level: `2^Q (8κ/(κ-1))^Q`.
pub fn layer_bound(q: f64, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(2f64.powf(q) * (8.0 * kappa / (kappa - 1.0)).powf(q))
}

/// `2^(Q(α+1)) κ^(3αQ+4β) (8κ/(κ-1))^Q`.
pub fn theoretical_q2(q: f64, kappa: f64, alpha: f64, beta: f64) -> f64 {
    2f64.powf(q * (alpha + 1.0))
        * kappa.powf(3.0 * alpha * q + 4.0 * beta)
        * (8.0 * kappa / (kappa - 1.0)).powf(q)
}

/// `C_e = (16κ/(κ-1))^Q`.
pub fn c_e(q: f64, kappa: f64) -> f64 {
    (16.0 * kappa / (kappa - 1.0)).powf(q)
}

/// Lower bound on the isoperimetric constant of the covering graph.
#[allow(clippy::too_many_arguments)]
pub fn theoretical_isoperimetric_bound(
    q: f64,
    kappa: f64,
    c_o: f64,
    eta: f64,
    s: f64,
    t: f64,
    c_e: f64,
    h: f64,
) -> Result<f64> {
    if eta <= s {
        return Err(Error::SeriesDiverges { eta, s });
    }
    let series = 1.0 / (1.0 - kappa.powf(t * (1.0 - eta / s)));
    let k2t = kappa.powf(2.0 * t);
    let inner = c_o.powf(t / s) * k2t * series
        + 1.0
        + 2f64.powf(q * t / s) * k2t * (1.0 + kappa.powf(t * (1.0 - q / s)));
    Ok(1.0 / (c_e * c_e * h * inner))
}

/// `(4^η C_o C_P 484^Q)^(1/(η-p))`.
pub fn rca_kappa(q: f64, p: f64, _lambda: f64, c_p: f64, eta: f64, c_o: f64) -> Result<f64> {
    if eta <= p {
        return Err(Error::EtaNotAboveP { eta, p });
    }
    let direct = (4f64.powf(eta) * c_o * c_p * 484f64.powf(q)).powf(1.0 / (eta - p));
    if direct.is_finite() {
        return Ok(direct);
    }
    // the base overflows for large η; its root does not
    let log_base = eta * 4f64.ln() + c_o.ln() + c_p.ln() + q * 484f64.ln();
    Ok((log_base / (eta - p)).exp())
}

/// `2 C τ (AB)^(1-1/τ)`.
pub fn upgrade_constant(c: f64, a: f64, b: f64, tau: f64) -> f64 {
    2.0 * c * tau * (a * b).powf(1.0 - 1.0 / tau)
}

/// `2^(t-1) [C1^t Q1^(t/s) + (2 C1 C2)^t Q2 Q1^(3t/s)]`.
pub fn patching_constant(c1: f64, c2: f64, q1: f64, q2: f64, s: f64, t: f64) -> f64 {
    2f64.powf(t - 1.0)
        * (c1.powf(t) * q1.powf(t / s) + (2.0 * c1 * c2).powf(t) * q2 * q1.powf(3.0 * t / s))
}

/// `N (N-1)^(s-1)`.
pub fn neumann_counting(n: usize, s: f64) -> f64 {
    let n = n as f64;
    n * (n - 1.0).powf(s - 1.0)
}

/// `2^s N (N-1)^(s-1) K^2`.
pub fn neumann_comparable(n: usize, s: f64, k: f64) -> f64 {
    2f64.powf(s) * neumann_counting(n, s) * k * k
}

/// `pQ/(Q-p)`.
pub fn p_star(p: f64, q: f64) -> Result<f64> {
    if p >= q {
        return Err(Error::PNotBelowQ { p, q });
    }
    Ok(p * q / (q - p))
}

pub fn c_lambda(lambda: f64) -> f64 {
    (2.0 * lambda - 1.0) / (2.0 * lambda)
}

pub fn omega_lambda(lambda: f64) -> f64 {
    let c = c_lambda(lambda);
    2.0 * lambda / (1.0 / (1.0 - c) + lambda / c)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszConstants {
    pub q: f64,
    pub c_p: f64,
    pub lambda: f64,
    pub s: f64,
    pub eta: f64,
    pub c_lambda: f64,
    pub omega_lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c_s: f64,
    /// `C₂'`; infinite when `η >= Q`.
    pub c2_prime: f64,
    pub c_ls: f64,
}

pub fn riesz_constants(q: f64, c_p: f64, lambda: f64, s: f64, eta: f64) -> Result<RieszConstants> {
    if s < 1.0 || s >= q {
        return Err(Error::ExponentOutOfRange(format!("need 1 <= s < Q, got s = {s}, Q = {q}")));
    }
    if lambda < 1.0 {
        return Err(Error::ExponentOutOfRange(format!("lambda must be >= 1, got {lambda}")));
    }
    let c = c_lambda(lambda);
    let omega = omega_lambda(lambda);
    let c1 = (2.0 * (2.0 * lambda).powf(3.0 * q)).max((2.0 / omega).powf(q)) * c_p;
    let qs = q / s;
    let c3 = 8f64.powf(qs) / (2.0 * (1.0 - c.powf(qs - 1.0)));
    let c4 = 2f64.powf(qs) * (4.0 * lambda + 1.0).powf(qs) / (2.0 * (1.0 - c));
    let c5 = 2.0 * c3.max(c4);
    let c2 = 4.0 * c3.max(c4);
    let c2_prime = if eta < q {
        2f64.powf(q + 1.0)
            * (4f64.powf(q) / (1.0 - c.powf(q / eta - 1.0))).max((4.0 * lambda + 1.0).powf(q) / (1.0 - c))
    } else {
        f64::INFINITY
    };
    Ok(RieszConstants {
        q,
        c_p,
        lambda,
        s,
        eta,
        c_lambda: c,
        omega_lambda: omega,
        c1,
        c2,
        c3,
        c4,
        c5,
        c_s: c1 * c2,
        c2_prime,
        c_ls: c1 * c2_prime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_bound_values() {
        assert_eq!(layer_bound(1.0, 2.0).unwrap(), 32.0);
        assert_eq!(layer_bound(2.0, 2.0).unwrap(), 1024.0);
        assert!(layer_bound(1.0, 1.0).is_err());
        let far = layer_bound(1.0, 1e12).unwrap();
        assert!((far - 16.0).abs() < 1e-9);
    }

    #[test]
    fn q2_values() {
        assert_eq!(theoretical_q2(2.0, 2.0, 0.0, 1.0), 16384.0);
        assert_eq!(theoretical_q2(2.0, 2.0, 1.0, 2.0), 67_108_864.0);
        assert_eq!(theoretical_q2(2.0, 2.0, 0.0, 0.0), 1024.0);
    }

    #[test]
    fn iso_bound() {
        let i = theoretical_isoperimetric_bound(2.0, 2.0, 1.0, 2.0, 1.0, 1.0, 1024.0, 1024.0).unwrap();
        assert!((i * 1024f64.powi(3) * 33.0 - 1.0).abs() < 1e-12);
        assert!(matches!(
            theoretical_isoperimetric_bound(2.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
            Err(Error::SeriesDiverges { .. })
        ));
    }

    #[test]
    fn upgrade() {
        assert_eq!(upgrade_constant(1.0, 1.0, 1.0, 2.0), 4.0);
        assert_eq!(upgrade_constant(3.0, 5.0, 7.0, 1.0), 6.0);
        assert!((upgrade_constant(2.0, 3.0, 2.0, 3.0) - 12.0 * 6f64.powf(2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn riesz_example() {
        let r = riesz_constants(2.0, 1.0, 1.0, 1.0, 1.5).unwrap();
        assert_eq!(r.c1, 128.0);
        assert_eq!(r.c2, 400.0);
        assert_eq!(r.c_s, 51200.0);
        assert_eq!(r.omega_lambda, 0.5);
        assert_eq!(r.c5 * 2.0, r.c2);
        assert!(riesz_constants(2.0, 1.0, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn pstar() {
        assert_eq!(p_star(1.0, 2.0).unwrap(), 2.0);
        assert_eq!(p_star(2.0, 4.0).unwrap(), 4.0);
        assert!(p_star(2.0, 2.0).is_err());
    }
}
