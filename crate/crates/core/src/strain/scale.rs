use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scale function E(λ) with E(1) = 0, E′(1) = 1 and E′ > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleFunction {
    /// (λ^m − 1)/m; m = 2 is Green–Lagrange, m = −2 Euler–Almansi.
    SethHill { m: f64 },
    /// ln λ.
    Hencky,
    /// (λ^m − λ^−n)/(m + n).
    CurnierRakotomanana { m: f64, n: f64 },
    /// (2+m)/8 λ² − (2−m)/8 λ⁻² − m/4.
    CurnierZysset { m: f64 },
    /// (e^{m(λ−1)} − e^{n(1/λ−1)})/(m + n).
    DarijaniNaghdabadi { m: f64, n: f64 },
}

/// Value and first two derivatives of a scale function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleEval {
    pub e: f64,
    pub d1: f64,
    pub d2: f64,
}

impl ScaleFunction {
    pub const GREEN_LAGRANGE: ScaleFunction = ScaleFunction::SethHill { m: 2.0 };
    pub const EULER_ALMANSI: ScaleFunction = ScaleFunction::SethHill { m: -2.0 };

    /// Checks the parameter domain of the family.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("{self:?}: {msg}")));
        match *self {
            ScaleFunction::SethHill { m } => {
                if !m.is_finite() || m == 0.0 {
                    return bad("m must be finite and nonzero (m = 0 is the Hencky strain)");
                }
            }
            ScaleFunction::Hencky => {}
            ScaleFunction::CurnierRakotomanana { m, n } => {
                if !(m.is_finite() && n.is_finite()) || m * n <= 0.0 {
                    return bad("m and n must be nonzero with equal sign");
                }
            }
            ScaleFunction::CurnierZysset { m } => {
                if !(-2.0..=2.0).contains(&m) {
                    return bad("m must lie in [-2, 2]");
                }
            }
            ScaleFunction::DarijaniNaghdabadi { m, n } => {
                if !(m.is_finite() && n.is_finite()) || m <= 0.0 || n <= 0.0 {
                    return bad("m and n must be positive");
                }
            }
        }
        Ok(())
    }

    /// Whether E maps (0, ∞) onto all of ℝ.
    pub fn is_coercive(&self) -> bool {
        match *self {
            ScaleFunction::SethHill { .. } => false,
            ScaleFunction::CurnierZysset { m } => m.abs() < 2.0,
            _ => true,
        }
    }

    /// Open interval (lo, hi) of attainable strain values.
    pub fn range(&self) -> (f64, f64) {
        match *self {
            ScaleFunction::SethHill { m } if m > 0.0 => (-1.0 / m, f64::INFINITY),
            ScaleFunction::SethHill { m } => (f64::NEG_INFINITY, -1.0 / m),
            ScaleFunction::CurnierZysset { m } if m >= 2.0 => (-0.5, f64::INFINITY),
            ScaleFunction::CurnierZysset { m } if m <= -2.0 => (f64::NEG_INFINITY, 0.5),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// E(λ), E′(λ), E″(λ).
    pub fn eval(&self, lambda: f64) -> Result<ScaleEval> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain("scale function needs a positive stretch", lambda));
        }
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_unchecked(&self, l: f64) -> ScaleEval {
        match *self {
            ScaleFunction::SethHill { m } => {
                if m == 2.0 {
                    ScaleEval { e: 0.5 * (l * l - 1.0), d1: l, d2: 1.0 }
                } else if m == -2.0 {
                    let il = 1.0 / l;
                    ScaleEval { e: 0.5 * (1.0 - il * il), d1: il * il * il, d2: -3.0 * il * il * il * il }
                } else {
                    let lm = l.powf(m);
                    ScaleEval {
                        e: (lm - 1.0) / m,
                        d1: lm / l,
                        d2: (m - 1.0) * lm / (l * l),
                    }
                }
            }
            ScaleFunction::Hencky => ScaleEval { e: l.ln(), d1: 1.0 / l, d2: -1.0 / (l * l) },
            ScaleFunction::CurnierRakotomanana { m, n } => {
                let lm = l.powf(m);
                let ln = l.powf(-n);
                let s = m + n;
                ScaleEval {
                    e: (lm - ln) / s,
                    d1: (m * lm + n * ln) / (s * l),
                    d2: (m * (m - 1.0) * lm - n * (n + 1.0) * ln) / (s * l * l),
                }
            }
            ScaleFunction::CurnierZysset { m } => {
                let l2 = l * l;
                let il2 = 1.0 / l2;
                let (a, b) = ((2.0 + m) / 8.0, (2.0 - m) / 8.0);
                ScaleEval {
                    e: a * (l2 - 1.0) - b * (il2 - 1.0),
                    d1: 2.0 * a * l + 2.0 * b * il2 / l,
                    d2: 2.0 * a - 6.0 * b * il2 * il2,
                }
            }
            ScaleFunction::DarijaniNaghdabadi { m, n } => {
                let s = m + n;
                let il = 1.0 / l;
                let ep = (m * (l - 1.0)).exp();
                let en = (n * (il - 1.0)).exp();
                ScaleEval {
                    e: (ep - en) / s,
                    d1: (m * ep + n * il * il * en) / s,
                    d2: (m * m * ep - (n * n * il.powi(4) + 2.0 * n * il.powi(3)) * en) / s,
                }
            }
        }
    }

    /// The stretch λ > 0 with E(λ) = w.
    pub fn inverse(&self, w: f64) -> Result<f64> {
        if !w.is_finite() {
            return Err(Error::range("inverse scale function", w));
        }
        let (lo, hi) = self.range();
        if w <= lo || w >= hi {
            return Err(Error::range("inverse scale function", w));
        }
        match *self {
            ScaleFunction::Hencky => return finite_stretch(w.exp(), w),
            ScaleFunction::SethHill { m } => return finite_stretch((1.0 + m * w).powf(1.0 / m), w),
            _ => {}
        }
        self.inverse_by_newton(w)
    }

    /// Bracketed, safeguarded Newton iteration on s = ln λ.
    fn inverse_by_newton(&self, w: f64) -> Result<f64> {
        const S_MAX: f64 = 700.0;
        let f = |s: f64| {
            let l = s.exp();
            let ev = self.eval_unchecked(l);
            (ev.e - w, ev.d1 * l)
        };
        let (mut a, mut b) = (-0.5_f64, 0.5_f64);
        while f(a).0 > 0.0 {
            if a <= -S_MAX {
                return Err(Error::range("inverse scale function", w));
            }
            b = a;
            a = (2.0 * a).max(-S_MAX);
        }
        while f(b).0 < 0.0 {
            if b >= S_MAX {
                return Err(Error::range("inverse scale function", w));
            }
            a = b;
            b = (2.0 * b).min(S_MAX);
        }
        let mut s = 0.5 * (a + b);
        let tol = 4.0 * f64::EPSILON * w.abs().max(1.0);
        for _ in 0..200 {
            let (r, dr) = f(s);
            if !r.is_finite() {
                b = s;
                s = 0.5 * (a + b);
                continue;
            }
            if r.abs() <= tol {
                break;
            }
            if r < 0.0 {
                a = s;
            } else {
                b = s;
            }
            let newton = s - r / dr;
            s = if dr > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a <= 1e-15 * s.abs().max(1.0) {
                break;
            }
        }
        finite_stretch(s.exp(), w)
    }
}

fn finite_stretch(l: f64, w: f64) -> Result<f64> {
    if l.is_finite() && l > 0.0 {
        Ok(l)
    } else {
        Err(Error::range("inverse scale function", w))
    }
}
