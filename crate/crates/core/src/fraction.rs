//! Small-denominator rational forms for design weights.

use num_rational::Ratio;

pub type Fraction = Ratio<i64>;

/// Largest denominator reported for a recovered rational weight.
pub const MAX_DENOMINATOR: i64 = 1000;

/// Tolerance for accepting a recovered rational weight.
pub const RATIONAL_TOLERANCE: f64 = 1e-11;

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only if it lies within `tol` of `x`.
pub fn rational_form(x: f64, max_den: i64, tol: f64) -> Option<Fraction> {
    if !x.is_finite() {
        return None;
    }
    // Continued-fraction convergents h/k.
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - x).abs() <= tol {
            return Some(Fraction::new(h1, k1));
        }
        let frac = rest - a as f64;
        if frac.abs() < f64::EPSILON {
            break;
        }
        rest = 1.0 / frac;
    }
    None
}

pub fn to_f64(r: &Fraction) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
