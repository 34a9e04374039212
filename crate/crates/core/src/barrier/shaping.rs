//! Shaping functions composed with a signed distance to form a barrier, and
//! a numerical certificate for the admissible class (T1-T4).

use std::fmt;
use std::str::FromStr;

/// A monotone, sign-preserving, Lipschitz, bounded scalar map.
pub trait ShapingFunction {
    fn value(&self, s: f64) -> f64;
    fn derivative(&self, s: f64) -> f64;
    /// Upper bound on `|derivative|`.
    fn lipschitz_bound(&self) -> f64;
    fn name(&self) -> String;
}

/// The shipped instantiations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shaping {
    /// `tanh(s)`.
    #[default]
    Tanh,
    /// `s / (1 + |s|)`.
    Rational,
    /// Rational approximation of `erf(s)`.
    Erf,
}

impl Shaping {
    pub const ALL: [Shaping; 3] = [Shaping::Tanh, Shaping::Rational, Shaping::Erf];

    pub fn key(self) -> &'static str {
        match self {
            Shaping::Tanh => "tanh",
            Shaping::Rational => "rational",
            Shaping::Erf => "erf",
        }
    }
}

impl fmt::Display for Shaping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Shaping {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tanh" => Ok(Shaping::Tanh),
            "rational" => Ok(Shaping::Rational),
            "erf" => Ok(Shaping::Erf),
            other => Err(format!("unknown shaping {other:?} (expected tanh, rational or erf)")),
        }
    }
}

impl ShapingFunction for Shaping {
    fn value(&self, s: f64) -> f64 {
        match self {
            Shaping::Tanh => s.tanh(),
            Shaping::Rational => s / (1.0 + s.abs()),
            Shaping::Erf => erf_approx(s),
        }
    }

    fn derivative(&self, s: f64) -> f64 {
        match self {
            Shaping::Tanh => {
                // sech^2 via cosh stays positive where 1 - tanh^2 rounds to 0.
                let c = s.cosh();
                1.0 / (c * c)
            }
            Shaping::Rational => {
                let d = 1.0 + s.abs();
                1.0 / (d * d)
            }
            Shaping::Erf => erf_approx_derivative(s),
        }
    }

    fn lipschitz_bound(&self) -> f64 {
        match self {
            Shaping::Tanh | Shaping::Rational => 1.0,
            // 2/sqrt(pi) = 1.1284 at the origin.
            Shaping::Erf => 1.13,
        }
    }

    fn name(&self) -> String {
        self.key().to_string()
    }
}

// Abramowitz & Stegun 7.1.26, |error| <= 1.5e-7.
const ERF_P: f64 = 0.327_591_1;
const ERF_A: [f64; 5] = [
    0.254_829_592,
    -0.284_496_736,
    1.421_413_741,
    -1.453_152_027,
    1.061_405_429,
];

fn erf_poly(t: f64) -> f64 {
    t * (ERF_A[0] + t * (ERF_A[1] + t * (ERF_A[2] + t * (ERF_A[3] + t * ERF_A[4]))))
}

fn erf_poly_derivative(t: f64) -> f64 {
    ERF_A[0] + t * (2.0 * ERF_A[1] + t * (3.0 * ERF_A[2] + t * (4.0 * ERF_A[3] + t * 5.0 * ERF_A[4])))
}

/// The raw approximation gives erf(0) = 1e-9; dividing the tail by its value
/// at the origin pins the zero exactly while staying within 2e-7 of erf.
fn erf_approx(s: f64) -> f64 {
    let x = s.abs();
    let t = 1.0 / (1.0 + ERF_P * x);
    let y = 1.0 - erf_poly(t) * (-x * x).exp() / erf_poly(1.0);
    y.copysign(s)
}

/// Exact derivative of `erf_approx`, so finite differences agree with it.
fn erf_approx_derivative(s: f64) -> f64 {
    let x = s.abs();
    let t = 1.0 / (1.0 + ERF_P * x);
    let e = (-x * x).exp();
    // d/dx [P(t) e^{-x^2}] with dt/dx = -p t^2.
    let d_tail = -ERF_P * t * t * erf_poly_derivative(t) * e - 2.0 * x * erf_poly(t) * e;
    -d_tail / erf_poly(1.0)
}

/// `s -> T(a s)`, admissible with bound `a L(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub inner: T,
    pub scale: f64,
}

impl<T: ShapingFunction> ShapingFunction for Scaled<T> {
    fn value(&self, s: f64) -> f64 {
        self.inner.value(self.scale * s)
    }

    fn derivative(&self, s: f64) -> f64 {
        self.scale * self.inner.derivative(self.scale * s)
    }

    fn lipschitz_bound(&self) -> f64 {
        self.scale * self.inner.lipschitz_bound()
    }

    fn name(&self) -> String {
        format!("{}({}*s)", self.inner.name(), self.scale)
    }
}

/// Pass/fail for each property of the admissible class.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub name: String,
    /// T(0) = 0 and sign(T(s)) = sign(s).
    pub sign_preserving: bool,
    /// Strictly increasing on the sample grid.
    pub strictly_increasing: bool,
    /// |T'| <= L, and T' agrees with central differences.
    pub lipschitz: bool,
    /// Bounded: the sampled supremum is finite and decade probes stop growing.
    pub bounded: bool,
    pub max_abs_derivative: f64,
    pub max_derivative_error: f64,
    pub sup_abs_value: f64,
}

impl AdmissibilityReport {
    pub fn all_pass(&self) -> bool {
        self.sign_preserving && self.strictly_increasing && self.lipschitz && self.bounded
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |b: bool| if b { "pass" } else { "FAIL" };
        write!(
            f,
            "{:<24} T1 {}  T2 {}  T3 {}  T4 {}  (max|T'| {:.4}, fd err {:.2e}, sup|T| {:.4})",
            self.name,
            mark(self.sign_preserving),
            mark(self.strictly_increasing),
            mark(self.lipschitz),
            mark(self.bounded),
            self.max_abs_derivative,
            self.max_derivative_error,
            self.sup_abs_value
        )
    }
}

pub const DEFAULT_ADMISSIBILITY_RANGE: f64 = 20.0;
pub const DEFAULT_ADMISSIBILITY_SAMPLES: usize = 4001;

const FD_STEP: f64 = 1e-7;
const FD_REL_TOL: f64 = 1e-6;
// Relative FD tolerance is taken against max(|T'|, this floor); below it the
// rounding error of the difference quotient dominates.
const FD_FLOOR: f64 = 1e-2;
const DECADE_PROBES: i32 = 8;

/// Certifies T1-T4 numerically on `n_samples` evenly spaced points of
/// `[-half_range, half_range]`.
///
/// Strict increase is demanded wherever the predicted step `T'(s) ds` is
/// resolvable in floating point; in the saturated tails only non-decrease
/// with `T' > 0` is required.
pub fn check_admissibility<F: ShapingFunction + ?Sized>(
    f: &F,
    half_range: f64,
    n_samples: usize,
) -> AdmissibilityReport {
    assert!(n_samples >= 3, "need at least three samples");
    assert!(half_range > 0.0, "sample range must be symmetric and non-empty");
    let step = 2.0 * half_range / (n_samples - 1) as f64;
    let samples: Vec<f64> = (0..n_samples).map(|k| -half_range + k as f64 * step).collect();
    let values: Vec<f64> = samples.iter().map(|&s| f.value(s)).collect();

    let sign_preserving = f.value(0.0) == 0.0
        && samples.iter().zip(&values).all(|(&s, &v)| {
            if s > 0.0 {
                v > 0.0
            } else if s < 0.0 {
                v < 0.0
            } else {
                v == 0.0
            }
        });

    let sup_abs_value = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let strictly_increasing = samples.windows(2).zip(values.windows(2)).all(|(s, v)| {
        let slope = f.derivative(0.5 * (s[0] + s[1]));
        let resolvable = slope * step > 8.0 * f64::EPSILON * v[0].abs().max(1.0);
        // A vanishing slope is only accepted once the value has rounded onto
        // its supremum, where the derivative may underflow.
        let plateau = v[0] == v[1] && v[0].abs() == sup_abs_value;
        (slope > 0.0 || plateau) && v[1] >= v[0] && (!resolvable || v[1] > v[0])
    });

    let bound = f.lipschitz_bound();
    let mut max_abs_derivative: f64 = 0.0;
    let mut max_derivative_error: f64 = 0.0;
    let mut derivative_ok = bound.is_finite() && bound > 0.0;
    for &s in &samples {
        let d = f.derivative(s);
        max_abs_derivative = max_abs_derivative.max(d.abs());
        let fd = (f.value(s + FD_STEP) - f.value(s - FD_STEP)) / (2.0 * FD_STEP);
        let err = (d - fd).abs() / d.abs().max(FD_FLOOR);
        max_derivative_error = max_derivative_error.max(err);
        if d.is_nan() || d.abs() > bound || err > FD_REL_TOL {
            derivative_ok = false;
        }
    }

    let mut bounded = sup_abs_value.is_finite();
    if bounded {
        let mut prev = f.value(half_range).abs().max(f.value(-half_range).abs());
        let mut last_increment = 0.0;
        for k in 1..=DECADE_PROBES {
            let s = half_range * 10f64.powi(k);
            let cur = f.value(s).abs().max(f.value(-s).abs());
            if !cur.is_finite() {
                bounded = false;
                break;
            }
            last_increment = cur - prev;
            prev = cur;
        }
        bounded = bounded && last_increment <= 1e-6 * prev.max(1.0);
    }

    AdmissibilityReport {
        name: f.name(),
        sign_preserving,
        strictly_increasing,
        lipschitz: derivative_ok,
        bounded,
        max_abs_derivative,
        max_derivative_error,
        sup_abs_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Identity;

    impl ShapingFunction for Identity {
        fn value(&self, s: f64) -> f64 {
            s
        }
        fn derivative(&self, _s: f64) -> f64 {
            1.0
        }
        fn lipschitz_bound(&self) -> f64 {
            1.0
        }
        fn name(&self) -> String {
            "identity".into()
        }
    }

    #[test]
    fn shipped_functions_are_admissible() {
        for f in Shaping::ALL {
            let report = check_admissibility(&f, DEFAULT_ADMISSIBILITY_RANGE, DEFAULT_ADMISSIBILITY_SAMPLES);
            assert!(report.all_pass(), "{report}");
        }
    }

    #[test]
    fn identity_fails_boundedness_only() {
        let report = check_admissibility(&Identity, DEFAULT_ADMISSIBILITY_RANGE, DEFAULT_ADMISSIBILITY_SAMPLES);
        assert!(report.sign_preserving && report.strictly_increasing && report.lipschitz);
        assert!(!report.bounded);
    }

    #[test]
    fn saturated_tail_of_a_steep_scaling_passes() {
        let f = Scaled {
            inner: Shaping::Erf,
            scale: 5.0,
        };
        assert!(f.derivative(DEFAULT_ADMISSIBILITY_RANGE) == 0.0);
        let report = check_admissibility(&f, DEFAULT_ADMISSIBILITY_RANGE, DEFAULT_ADMISSIBILITY_SAMPLES);
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn interior_flat_segment_fails_t2() {
        struct Stepped;
        impl ShapingFunction for Stepped {
            fn value(&self, s: f64) -> f64 {
                let t = if s.abs() < 1.0 {
                    s
                } else if s.abs() < 2.0 {
                    s.signum()
                } else {
                    s - s.signum()
                };
                t.tanh()
            }
            fn derivative(&self, s: f64) -> f64 {
                if (1.0..2.0).contains(&s.abs()) {
                    0.0
                } else {
                    Shaping::Tanh.derivative(if s.abs() < 1.0 { s } else { s - s.signum() })
                }
            }
            fn lipschitz_bound(&self) -> f64 {
                1.0
            }
            fn name(&self) -> String {
                "stepped".into()
            }
        }
        assert!(!check_admissibility(&Stepped, 5.0, 101).strictly_increasing);
    }

    #[test]
    fn understated_lipschitz_bound_fails_t3() {
        let f = Scaled {
            inner: Shaping::Tanh,
            scale: 2.0,
        };
        struct Lying<T>(T);
        impl<T: ShapingFunction> ShapingFunction for Lying<T> {
            fn value(&self, s: f64) -> f64 {
                self.0.value(s)
            }
            fn derivative(&self, s: f64) -> f64 {
                self.0.derivative(s)
            }
            fn lipschitz_bound(&self) -> f64 {
                1.0
            }
            fn name(&self) -> String {
                "lying".into()
            }
        }
        assert!(!check_admissibility(&Lying(f), 5.0, 101).lipschitz);
    }

    #[test]
    fn erf_approximation_accuracy() {
        // Reference values of erf to 10 digits.
        let reference = [
            (0.1, 0.1124629160),
            (0.5, 0.5204998778),
            (1.0, 0.8427007929),
            (2.0, 0.9953222650),
            (3.0, 0.9999779095),
        ];
        for (x, e) in reference {
            assert!((Shaping::Erf.value(x) - e).abs() < 2e-7, "erf({x})");
            assert!((Shaping::Erf.value(-x) + e).abs() < 2e-7);
        }
        assert_eq!(Shaping::Erf.value(0.0), 0.0);
        let slope0 = Shaping::Erf.derivative(0.0);
        assert!((slope0 - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn shaping_keys_parse() {
        for f in Shaping::ALL {
            assert_eq!(f.key().parse::<Shaping>().unwrap(), f);
        }
        assert!("sigmoid".parse::<Shaping>().is_err());
    }
}
