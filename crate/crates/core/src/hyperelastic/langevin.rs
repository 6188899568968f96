use crate::error::{Error, Result};

/// Rational approximation x(15 − (6x² + x⁴ − 2x⁶))/(5(1 − x²)) of the inverse
/// Langevin function, with its derivative.
pub fn inv_langevin_with_derivative(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() < 1.0) {
        return Err(Error::domain("inverse Langevin function needs |x| < 1", x));
    }
    let x2 = x * x;
    let num = x * (15.0 - 6.0 * x2 - x2 * x2 + 2.0 * x2 * x2 * x2);
    let dnum = 15.0 - 18.0 * x2 - 5.0 * x2 * x2 + 14.0 * x2 * x2 * x2;
    let den = 5.0 * (1.0 - x2);
    let dden = -10.0 * x;
    Ok((num / den, (dnum * den - num * dden) / (den * den)))
}

pub fn inv_langevin(x: f64) -> Result<f64> {
    Ok(inv_langevin_with_derivative(x)?.0)
}

/// g(x) = 𝔏⁻¹(x)/x and g′(x), regular at x = 0.
pub(crate) fn inv_langevin_ratio(x: f64) -> Result<(f64, f64)> {
    if !(x.abs() < 1.0) {
        return Err(Error::domain("inverse Langevin function needs |x| < 1", x));
    }
    let x2 = x * x;
    let num = 15.0 - 6.0 * x2 - x2 * x2 + 2.0 * x2 * x2 * x2;
    let dnum = -12.0 * x - 4.0 * x2 * x + 12.0 * x2 * x2 * x;
    let den = 5.0 * (1.0 - x2);
    let dden = -10.0 * x;
    Ok((num / den, (dnum * den - num * dden) / (den * den)))
}
