//! Borel and transposed Borel transforms.
//!
//! For exponential polynomials the transform is exact: `z^k e^{αz}` maps to
//! `k!/(z−α)^{k+1}`, so the singular set is exactly the frequency set and its
//! hull reproduces the conjugate indicator diagram. Building blocks are not
//! exponential polynomials (the `1/z²` factor is not entire term-by-term), so
//! their transform is evaluated from the Maclaurin coefficients instead.

use crate::expfun::{ExpPolyFunction, FunctionExpr};
use crate::geometry::{hull, ConvexCompact};
use crate::{C, Error, Result};
use serde::{Deserialize, Serialize};

/// A rational function vanishing at infinity, stored by poles:
/// `Σ_j Σ_{m=1}^{order_j} coefs[m−1]/(z − at_j)^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalExpr {
    pub poles: Vec<Pole>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    #[serde(rename = "at", with = "crate::cjson")]
    pub location: C,
    pub order: usize,
    #[serde(rename = "coefs", with = "crate::cjson::vec")]
    pub coefficients: Vec<C>,
}

impl RationalExpr {
    pub fn evaluate(&self, z: C) -> C {
        let mut acc = C::new(0.0, 0.0);
        for p in &self.poles {
            let d = z - p.location;
            let mut dp = d;
            for c in &p.coefficients {
                acc += c / dp;
                dp *= d;
            }
        }
        acc
    }

    /// Residue at a simple-pole location (first-order coefficient).
    pub fn residue(&self, at: C) -> C {
        self.poles
            .iter()
            .find(|p| (p.location - at).norm() < 1e-12)
            .map(|p| p.coefficients[0])
            .unwrap_or(C::new(0.0, 0.0))
    }
}

/// Exact Borel transform of an exponential polynomial:
/// `Σ_k c_k z^k e^{αz} ↦ Σ_k c_k k!/(z−α)^{k+1}`.
pub fn borel_closed_form(f: &ExpPolyFunction) -> RationalExpr {
    let mut poles = Vec::new();
    for t in &f.terms {
        let mut coefs = Vec::with_capacity(t.poly.len());
        let mut fact = 1.0;
        for (k, &ck) in t.poly.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            coefs.push(ck * fact);
        }
        while coefs.len() > 1 && coefs.last().unwrap().norm() == 0.0 {
            coefs.pop();
        }
        if coefs.iter().all(|c| c.norm() == 0.0) {
            continue;
        }
        poles.push(Pole {
            location: t.freq,
            order: coefs.len(),
            coefficients: coefs,
        });
    }
    RationalExpr { poles }
}

/// Truncated defining series `Σ_{n<terms} f^{(n)}(0)/z^{n+1}` with the
/// magnitude of the last term reported as a truncation certificate.
/// Converges for `|z|` above the exponential type of `f`.
pub fn borel_series(f: &FunctionExpr, z: C, terms: usize, tau: f64) -> Result<(C, f64)> {
    if z.norm() <= tau {
        return Err(Error::SeriesDivergent {
            z_abs: z.norm(),
            tau,
        });
    }
    let coeffs = f.taylor_coefficients(terms);
    // f^{(n)}(0)/z^{n+1} = a_n · n!/z^{n+1}, accumulated without overflow
    let mut acc = C::new(0.0, 0.0);
    let mut scale = 1.0 / z; // n!/z^{n+1}
    let mut last = 0.0;
    for (n, a) in coeffs.iter().enumerate() {
        let term = a * scale;
        acc += term;
        last = term.norm();
        scale *= (n + 1) as f64 / z;
    }
    Ok((acc, last))
}

/// Transposed transform `B̃f(z) = Σ f^{(n)}(0) z^n`, converging for
/// `|z| < 1/τ`.
pub fn transposed_borel(f: &FunctionExpr, z: C, terms: usize, tau: f64) -> Result<(C, f64)> {
    if tau > 0.0 && z.norm() >= 1.0 / tau {
        return Err(Error::SeriesDivergent {
            z_abs: z.norm(),
            tau,
        });
    }
    let coeffs = f.taylor_coefficients(terms);
    let mut acc = C::new(0.0, 0.0);
    let mut fact = 1.0; // n!
    let mut zp = C::new(1.0, 0.0);
    let mut last = 0.0;
    for (n, a) in coeffs.iter().enumerate() {
        let term = a * fact * zp;
        acc += term;
        last = term.norm();
        fact *= (n + 1) as f64;
        zp *= z;
    }
    Ok((acc, last))
}

/// Convex hull of the pole locations; for exponential polynomials this is
/// the conjugate indicator diagram.
pub fn singular_hull(b: &RationalExpr) -> Result<ConvexCompact> {
    if b.poles.is_empty() {
        return Err(Error::EmptyInput("rational expression has no poles"));
    }
    let locs: Vec<C> = b.poles.iter().map(|p| p.location).collect();
    hull(&locs)
}

/// Residue of `g` at `at` by 256-point trapezoid quadrature on a small
/// circle (spectrally accurate for analytic integrands).
pub fn contour_residue(g: impl Fn(C) -> C, at: C, radius: f64) -> C {
    let n = 256;
    let mut acc = C::new(0.0, 0.0);
    for j in 0..n {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let w = C::from_polar(radius, theta);
        // (1/2πi)∮ g dz with dz = i·w dθ
        acc += g(at + w) * w;
    }
    acc / n as f64
}
