//! Adaptive Gauss–Legendre quadrature on panels.

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 40;

/// Integrates `f` over `[a, b]` by recursive bisection, comparing 10- and 20-point
/// Gauss–Legendre rules on each panel until they agree within `tol` (absolute).
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration limits must be finite"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }
    if a == b {
        return Ok(0.0);
    }
    let coarse = GaussLegendre::new(10).expect("degree 10 is valid");
    let fine = GaussLegendre::new(20).expect("degree 20 is valid");
    let rules = Rules { coarse, fine };
    rules.panel(&f, a, b, tol, 0)
}

struct Rules {
    coarse: GaussLegendre,
    fine: GaussLegendre,
}

impl Rules {
    fn panel<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, tol: f64, depth: usize) -> Result<f64> {
        let lo = self.coarse.integrate(a, b, f);
        let hi = self.fine.integrate(a, b, f);
        if !hi.is_finite() {
            return Err(Error::invalid("integrand is not finite on the integration interval"));
        }
        if (hi - lo).abs() <= tol || depth >= MAX_DEPTH {
            return Ok(hi);
        }
        let mid = 0.5 * (a + b);
        Ok(self.panel(f, a, mid, 0.5 * tol, depth + 1)? + self.panel(f, mid, b, 0.5 * tol, depth + 1)?)
    }
}
