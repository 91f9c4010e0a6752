//! Central finite differences for parameter derivatives.

use crate::error::{Error, Result};

/// Step size balancing truncation against roundoff for central differences:
/// `eps^(1/3) * max(1, |x0|)`.
pub fn default_step(x0: f64) -> f64 {
    f64::EPSILON.cbrt() * x0.abs().max(1.0)
}

fn eval(f: &impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Evaluation { at: x })
    }
}

/// First derivative `(f(x0+h) - f(x0-h)) / (2h)`.
pub fn central_difference(f: impl Fn(f64) -> f64, x0: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    Ok((eval(&f, x0 + h)? - eval(&f, x0 - h)?) / (2.0 * h))
}

/// Mixed second derivative by the 4-point stencil
/// `(f(+,+) - f(+,-) - f(-,+) + f(-,-)) / (4 hx hy)`.
pub fn central_difference_mixed(
    f: impl Fn(f64, f64) -> f64,
    x0: f64,
    y0: f64,
    hx: f64,
    hy: f64,
) -> Result<f64> {
    if !(hx > 0.0 && hy > 0.0) {
        return Err(Error::Domain(format!(
            "steps must be positive, got ({hx}, {hy})"
        )));
    }
    let eval2 = |x: f64, y: f64| -> Result<f64> {
        let v = f(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { at: x })
        }
    };
    let pp = eval2(x0 + hx, y0 + hy)?;
    let pm = eval2(x0 + hx, y0 - hy)?;
    let mp = eval2(x0 - hx, y0 + hy)?;
    let mm = eval2(x0 - hx, y0 - hy)?;
    Ok((pp - pm - mp + mm) / (4.0 * hx * hy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_exact_up_to_roundoff() {
        let d = central_difference(|x| x * x, 3.0, 1e-4).unwrap();
        assert!((d - 6.0).abs() < 1e-7);
    }

    #[test]
    fn exponential_matches_taylor_bound() {
        let d = central_difference(f64::exp, 0.0, 1e-5).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_stencil_on_bilinear() {
        let d = central_difference_mixed(|x, y| x * y, 1.0, 2.0, 1e-4, 1e-4).unwrap();
        assert!((d - 1.0).abs() < 1e-8);
    }

    #[test]
    fn nonfinite_evaluation_is_reported() {
        let r = central_difference(|x| (1.0 / (x - 1.00001)).ln(), 1.0, 1e-4);
        assert!(matches!(r, Err(Error::Evaluation { .. })));
        assert!(matches!(
            central_difference(|x| x, 0.0, 0.0),
            Err(Error::Domain(_))
        ));
    }
}
