//! Smearing functions with closed-form Fourier transforms.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussians are treated as zero beyond this many widths from their center
/// when a quadrature domain is needed.
const GAUSSIAN_REACH: f64 = 12.0;

/// Target relative accuracy of the quadrature fallback for product integrals.
pub const QUADRATURE_REL_TOL: f64 = 1e-12;

/// A real test function `phi(t)`.
///
/// The Fourier convention is `phi~(xi) = int dt phi(t) e^{i t xi}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    /// `amplitude * exp(-(t - center)^2 / (2 width^2))`
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `height` on `[lo, hi]`, zero elsewhere.
    Indicator { lo: f64, hi: f64, height: f64 },
    /// Pointwise sum of the listed functions.
    Superposition { terms: Vec<TestFunction> },
}

impl TestFunction {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        let f = TestFunction::Gaussian {
            amplitude,
            center,
            width,
        };
        f.validate()?;
        Ok(f)
    }

    /// Gaussian normalized to unit integral.
    pub fn unit_gaussian(center: f64, width: f64) -> Result<Self> {
        Self::gaussian(1.0 / (width * (TAU).sqrt()), center, width)
    }

    pub fn indicator(lo: f64, hi: f64, height: f64) -> Result<Self> {
        let f = TestFunction::Indicator { lo, hi, height };
        f.validate()?;
        Ok(f)
    }

    /// `(2 pi)^{-1}` on `[0, 2 pi]`.
    pub fn phi0() -> Self {
        TestFunction::Indicator {
            lo: 0.0,
            hi: TAU,
            height: 1.0 / TAU,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !(amplitude.is_finite() && center.is_finite() && width.is_finite()) {
                    return Err(Error::InvalidTestFunction("non-finite gaussian parameter".into()));
                }
                if *width <= 0.0 {
                    return Err(Error::InvalidTestFunction(format!(
                        "gaussian width must be positive, got {width}"
                    )));
                }
            }
            TestFunction::Indicator { lo, hi, height } => {
                if !(lo.is_finite() && hi.is_finite() && height.is_finite()) {
                    return Err(Error::InvalidTestFunction("non-finite indicator parameter".into()));
                }
                if hi <= lo {
                    return Err(Error::InvalidTestFunction(format!(
                        "indicator needs hi > lo, got [{lo}, {hi}]"
                    )));
                }
            }
            TestFunction::Superposition { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidTestFunction("empty superposition".into()));
                }
                for t in terms {
                    t.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TestFunction::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (t - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            TestFunction::Indicator { lo, hi, height } => {
                if t >= *lo && t <= *hi {
                    *height
                } else {
                    0.0
                }
            }
            TestFunction::Superposition { terms } => terms.iter().map(|f| f.eval(t)).sum(),
        }
    }

    /// `int dt phi(t) e^{i t xi}`.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        match self {
            TestFunction::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let mag = amplitude * width * TAU.sqrt() * (-0.5 * (width * xi).powi(2)).exp();
                Complex64::from_polar(mag, center * xi)
            }
            TestFunction::Indicator { lo, hi, height } => {
                let len = hi - lo;
                let mid = 0.5 * (lo + hi);
                Complex64::from_polar(height * len * sinc(0.5 * len * xi), mid * xi)
            }
            TestFunction::Superposition { terms } => terms.iter().map(|f| f.fourier(xi)).sum(),
        }
    }

    /// `int dt phi(t)`, equal to `fourier(0)`.
    pub fn integral(&self) -> f64 {
        match self {
            TestFunction::Gaussian {
                amplitude, width, ..
            } => amplitude * width * TAU.sqrt(),
            TestFunction::Indicator { lo, hi, height } => height * (hi - lo),
            TestFunction::Superposition { terms } => terms.iter().map(|f| f.integral()).sum(),
        }
    }

    /// Characteristic time width: `width` for a gaussian, support length
    /// for an indicator.
    pub fn time_width(&self) -> f64 {
        match self {
            TestFunction::Gaussian { width, .. } => *width,
            TestFunction::Indicator { lo, hi, .. } => hi - lo,
            TestFunction::Superposition { terms } => terms
                .iter()
                .map(|f| f.time_width())
                .fold(0.0, f64::max),
        }
    }

    /// Location of the function's mass, used to judge separation.
    pub fn center(&self) -> f64 {
        match self {
            TestFunction::Gaussian { center, .. } => *center,
            TestFunction::Indicator { lo, hi, .. } => 0.5 * (lo + hi),
            TestFunction::Superposition { terms } => {
                terms.iter().map(|f| f.center()).sum::<f64>() / terms.len() as f64
            }
        }
    }

    /// Copy of the function translated by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        match self {
            TestFunction::Gaussian {
                amplitude,
                center,
                width,
            } => TestFunction::Gaussian {
                amplitude: *amplitude,
                center: center + shift,
                width: *width,
            },
            TestFunction::Indicator { lo, hi, height } => TestFunction::Indicator {
                lo: lo + shift,
                hi: hi + shift,
                height: *height,
            },
            TestFunction::Superposition { terms } => TestFunction::Superposition {
                terms: terms.iter().map(|f| f.shifted(shift)).collect(),
            },
        }
    }

    /// Copy of the function multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            TestFunction::Gaussian {
                amplitude,
                center,
                width,
            } => TestFunction::Gaussian {
                amplitude: amplitude * c,
                center: *center,
                width: *width,
            },
            TestFunction::Indicator { lo, hi, height } => TestFunction::Indicator {
                lo: *lo,
                hi: *hi,
                height: height * c,
            },
            TestFunction::Superposition { terms } => TestFunction::Superposition {
                terms: terms.iter().map(|f| f.scaled(c)).collect(),
            },
        }
    }

    /// Interval outside of which the function is (numerically) zero.
    pub fn support(&self) -> (f64, f64) {
        match self {
            TestFunction::Gaussian { center, width, .. } => {
                (center - GAUSSIAN_REACH * width, center + GAUSSIAN_REACH * width)
            }
            TestFunction::Indicator { lo, hi, .. } => (*lo, *hi),
            TestFunction::Superposition { terms } => terms.iter().map(|f| f.support()).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(a, b), (c, d)| (a.min(c), b.max(d)),
            ),
        }
    }

    /// Frequency beyond which `|phi~|` is negligible, if it decays that fast.
    pub(crate) fn fourier_reach(&self) -> Option<f64> {
        match self {
            TestFunction::Gaussian { width, .. } => Some(GAUSSIAN_REACH / width),
            TestFunction::Indicator { .. } => None,
            TestFunction::Superposition { terms } => terms
                .iter()
                .map(|f| f.fourier_reach())
                .try_fold(0.0, |acc: f64, r| r.map(|r| acc.max(r))),
        }
    }

    pub(crate) fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            TestFunction::Gaussian { center, .. } => out.push(*center),
            TestFunction::Indicator { lo, hi, .. } => {
                out.push(*lo);
                out.push(*hi);
            }
            TestFunction::Superposition { terms } => {
                for t in terms {
                    t.breakpoints(out);
                }
            }
        }
    }
}

fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-4 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// Value of `int dt phi_1(t) ... phi_n(t)` and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductIntegral {
    pub value: f64,
    pub closed_form: bool,
}

/// `int dt prod_l phi_l(t)`.
///
/// Products of gaussians and products of indicators are done in closed
/// form. Any other combination is integrated by double-exponential
/// quadrature, split at every indicator edge and gaussian center, to a
/// relative accuracy of [`QUADRATURE_REL_TOL`].
pub fn product_integral(phis: &[TestFunction]) -> ProductIntegral {
    if phis.is_empty() {
        return ProductIntegral {
            value: 1.0,
            closed_form: true,
        };
    }
    if let Some(v) = gaussian_product(phis) {
        return ProductIntegral {
            value: v,
            closed_form: true,
        };
    }
    if let Some(v) = indicator_product(phis) {
        return ProductIntegral {
            value: v,
            closed_form: true,
        };
    }
    ProductIntegral {
        value: quadrature_product(phis),
        closed_form: false,
    }
}

fn gaussian_product(phis: &[TestFunction]) -> Option<f64> {
    let mut amp = 1.0;
    let mut params = Vec::with_capacity(phis.len());
    for f in phis {
        match f {
            TestFunction::Gaussian {
                amplitude,
                center,
                width,
            } => {
                amp *= amplitude;
                params.push((*center, 1.0 / (width * width)));
            }
            _ => return None,
        }
    }
    let precision: f64 = params.iter().map(|p| p.1).sum();
    // Pairwise form of  sum c_i^2 p_i - (sum c_i p_i)^2 / P, free of cancellation.
    let mut spread = 0.0;
    for (i, &(ci, pi)) in params.iter().enumerate() {
        for &(cj, pj) in &params[i + 1..] {
            spread += (ci - cj).powi(2) * pi * pj;
        }
    }
    spread /= precision;
    Some(amp * (-0.5 * spread).exp() * (TAU / precision).sqrt())
}

fn indicator_product(phis: &[TestFunction]) -> Option<f64> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut h = 1.0;
    for f in phis {
        match f {
            TestFunction::Indicator {
                lo: a,
                hi: b,
                height,
            } => {
                lo = lo.max(*a);
                hi = hi.min(*b);
                h *= height;
            }
            _ => return None,
        }
    }
    Some(if hi > lo { h * (hi - lo) } else { 0.0 })
}

fn quadrature_product(phis: &[TestFunction]) -> f64 {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for f in phis {
        let (a, b) = f.support();
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if hi <= lo {
        return 0.0;
    }
    let integrand = |t: f64| phis.iter().map(|f| f.eval(t)).product::<f64>();
    integrate_piecewise(integrand, lo, hi, &{
        let mut pts = Vec::new();
        for f in phis {
            f.breakpoints(&mut pts);
        }
        pts
    })
}

/// Double-exponential quadrature over `[lo, hi]`, split at the given points.
pub(crate) fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cuts: &[f64]) -> f64 {
    let mut pts: Vec<f64> = cuts
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    // First pass fixes a scale for the absolute target.
    let rough: f64 = pts
        .windows(2)
        .map(|w| quadrature::integrate(&f, w[0], w[1], 1e-6).integral.abs())
        .sum();
    let target = (rough * QUADRATURE_REL_TOL).max(1e-300) / pts.len() as f64;
    pts.windows(2)
        .map(|w| quadrature::integrate(&f, w[0], w[1], target).integral)
        .sum()
}
