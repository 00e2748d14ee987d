//! Solar-powered irrigation design problem.
//!
//! Four design variables (`x_a` pressure in MPa, `x_b` temperature in K,
//! `x_c` collector temperature in K, `x_d` flowrate in kg/s) and two noise
//! factors (`Z_a` ambient temperature in K, `Z_b` insolation in W/m²) feed
//! three response-surface polynomials:
//!
//! * `f1` pump power output (kW), scaled by `10^s1`
//! * `f2` overall efficiency (%)
//! * `f3` fiscal savings (USD), scaled by `10^s3`
//!
//! Coefficients are the printed ones with two repairs, both switchable:
//! the `f2` constant is read as `0.18507` (printed `018507`) and the
//! undefined `x_f` in `f3` is read as `x_d`. The printed outer minus signs
//! are dropped so all three objectives are maximized. Note that `f2`
//! carries two separate `x_c` terms (`+0.01041 x_c` and `-0.0035 x_c`);
//! both are kept as printed.

use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfa::FitnessFunction;
use crate::fuzzy::{scurve_invert, FuzzyError, Type2FuzzyVariable};
use crate::scalar::{Interval, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("objective evaluation produced a non-finite value")]
    NonFiniteResult,
    #[error("weights must be >= 0 and sum to 1 (got {0}, {1}, {2})")]
    InvalidWeights(f64, f64, f64),
    #[error("cannot parse weights `{0}`: expected three comma-separated numbers")]
    WeightSyntax(String),
    #[error("bound `{name}` needs lo < hi")]
    InvalidBound { name: &'static str },
    #[error("noise interval is empty after intersecting with the annual domain")]
    EmptyInterval,
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DesignVector<T> {
    pub x_a: T,
    pub x_b: T,
    pub x_c: T,
    pub x_d: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NoiseVector<T> {
    pub z_a: T,
    pub z_b: T,
}

/// `(f1, f2, f3)`, oriented for maximization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ObjectiveTriple<T> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
}

impl<T: Scalar> ObjectiveTriple<T> {
    pub fn new(f1: T, f2: T, f3: T) -> Self {
        Self { f1, f2, f3 }
    }

    pub fn to_array(self) -> [T; 3] {
        [self.f1, self.f2, self.f3]
    }

    pub fn is_finite(&self) -> bool {
        self.f1.is_finite() && self.f2.is_finite() && self.f3.is_finite()
    }
}

impl<T: Scalar> Add for ObjectiveTriple<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.f1 + o.f1, self.f2 + o.f2, self.f3 + o.f3)
    }
}

impl<T: Scalar> Mul<T> for ObjectiveTriple<T> {
    type Output = Self;
    fn mul(self, c: T) -> Self {
        Self::new(self.f1 * c, self.f2 * c, self.f3 * c)
    }
}

/// Convex weights for the weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(try_from = "[T; 3]", into = "[T; 3]")]
pub struct WeightVector<T> {
    w: [T; 3],
}

impl<T: Scalar> WeightVector<T> {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(w1: T, w2: T, w3: T) -> Result<Self, ProblemError> {
        let w = [w1, w2, w3];
        let sum = w1 + w2 + w3;
        let tol = T::lit(Self::SUM_TOLERANCE).max(T::epsilon() * T::lit(4.0));
        if w.iter().any(|&x| !(x.is_finite() && x >= T::zero())) || (sum - T::one()).abs() > tol {
            return Err(ProblemError::InvalidWeights(
                w1.to_f64_lossy(),
                w2.to_f64_lossy(),
                w3.to_f64_lossy(),
            ));
        }
        Ok(Self { w })
    }

    pub fn w1(&self) -> T {
        self.w[0]
    }
    pub fn w2(&self) -> T {
        self.w[1]
    }
    pub fn w3(&self) -> T {
        self.w[2]
    }

    pub fn as_array(&self) -> [T; 3] {
        self.w
    }
}

impl<T: Scalar> TryFrom<[T; 3]> for WeightVector<T> {
    type Error = ProblemError;
    fn try_from(w: [T; 3]) -> Result<Self, Self::Error> {
        Self::new(w[0], w[1], w[2])
    }
}

impl<T: Scalar> From<WeightVector<T>> for [T; 3] {
    fn from(w: WeightVector<T>) -> Self {
        w.w
    }
}

impl<T: Scalar> FromStr for WeightVector<T> {
    type Err = ProblemError;

    /// Parses `a,b,c`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<T> = s
            .split(',')
            .map(|p| p.trim().parse::<T>())
            .collect::<Result<_, _>>()
            .map_err(|_| ProblemError::WeightSyntax(s.to_string()))?;
        match parts[..] {
            [a, b, c] => Self::new(a, b, c),
            _ => Err(ProblemError::WeightSyntax(s.to_string())),
        }
    }
}

/// Weighted sum `w1 f1 + w2 f2 + w3 f3`.
pub fn aggregate<T: Scalar>(o: &ObjectiveTriple<T>, w: &WeightVector<T>) -> T {
    w.w1() * o.f1 + w.w2() * o.f2 + w.w3() * o.f3
}

/// How the polynomials see their inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableMode {
    /// Physical units, as printed.
    Raw,
    /// Each variable mapped linearly from its coding interval onto [-1, 1].
    #[default]
    Coded,
}

/// Corrections applied to the printed coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Repairs {
    /// Read the `f2` constant `018507` as `0.18507` (otherwise `18507`).
    pub decimal_f2_constant: bool,
    /// Read `x_f` in `f3` as `x_d` (otherwise the term is dropped).
    pub xf_as_xd: bool,
}

impl Default for Repairs {
    fn default() -> Self {
        Self {
            decimal_f2_constant: true,
            xf_as_xd: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DesignBounds<T> {
    pub x_a: Interval<T>,
    pub x_b: Interval<T>,
    pub x_c: Interval<T>,
    pub x_d: Interval<T>,
}

impl<T: Scalar> Default for DesignBounds<T> {
    fn default() -> Self {
        let iv = |a, b| Interval::new(T::lit(a), T::lit(b));
        Self {
            x_a: iv(0.3, 3.0),
            x_b: iv(450.0, 520.0),
            x_c: iv(520.0, 800.0),
            x_d: iv(0.01, 0.2),
        }
    }
}

impl<T: Scalar> DesignBounds<T> {
    pub fn as_array(&self) -> [Interval<T>; 4] {
        [self.x_a, self.x_b, self.x_c, self.x_d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NoiseBounds<T> {
    pub z_a: Interval<T>,
    pub z_b: Interval<T>,
}

impl<T: Scalar> Default for NoiseBounds<T> {
    /// The crisp noise ranges.
    fn default() -> Self {
        Self {
            z_a: Interval::new(T::lit(293.0), T::lit(303.0)),
            z_b: Interval::new(T::lit(800.0), T::lit(1000.0)),
        }
    }
}

/// Everything `eval_objectives` and `feasible` need to know.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", default, deny_unknown_fields)]
pub struct ProblemSpec<T> {
    pub design_bounds: DesignBounds<T>,
    /// Active search interval for the noise factors.
    pub noise_bounds: NoiseBounds<T>,
    /// Reference intervals used to code the noise factors in coded mode.
    pub noise_coding: NoiseBounds<T>,
    pub s1: T,
    pub s3: T,
    pub mode: VariableMode,
    pub repairs: Repairs,
    /// Keep the printed leading minus signs (minimization orientation).
    pub printed_sign: bool,
}

impl<T: Scalar> Default for ProblemSpec<T> {
    fn default() -> Self {
        Self {
            design_bounds: DesignBounds::default(),
            noise_bounds: NoiseBounds::default(),
            noise_coding: NoiseBounds::default(),
            s1: T::lit(3.24),
            s3: T::lit(3.23),
            mode: VariableMode::Coded,
            repairs: Repairs::default(),
            printed_sign: false,
        }
    }
}

impl<T: Scalar> ProblemSpec<T> {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let named = [
            ("x_a", self.design_bounds.x_a),
            ("x_b", self.design_bounds.x_b),
            ("x_c", self.design_bounds.x_c),
            ("x_d", self.design_bounds.x_d),
            ("z_a", self.noise_bounds.z_a),
            ("z_b", self.noise_bounds.z_b),
            ("z_a coding", self.noise_coding.z_a),
            ("z_b coding", self.noise_coding.z_b),
        ];
        for (name, iv) in named {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo < iv.hi) {
                return Err(ProblemError::InvalidBound { name });
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let spec: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    /// All six search bounds in position order `x_a, x_b, x_c, x_d, Z_a, Z_b`.
    pub fn search_bounds(&self) -> [Interval<T>; 6] {
        let d = self.design_bounds;
        [d.x_a, d.x_b, d.x_c, d.x_d, self.noise_bounds.z_a, self.noise_bounds.z_b]
    }
}

/// The four `(lo, hi)` design bounds.
pub fn design_bounds<T: Scalar>(spec: &ProblemSpec<T>) -> [Interval<T>; 4] {
    spec.design_bounds.as_array()
}

fn code<T: Scalar>(x: T, iv: Interval<T>) -> T {
    T::lit(2.0) * (x - iv.lo) / (iv.hi - iv.lo) - T::one()
}

/// Evaluates `(f1, f2, f3)` at one design and noise point.
pub fn eval_objectives<T: Scalar>(
    d: &DesignVector<T>,
    z: &NoiseVector<T>,
    spec: &ProblemSpec<T>,
) -> Result<ObjectiveTriple<T>, ProblemError> {
    let (xa, xb, xc, xd, za, zb) = match spec.mode {
        VariableMode::Raw => (d.x_a, d.x_b, d.x_c, d.x_d, z.z_a, z.z_b),
        VariableMode::Coded => {
            let b = &spec.design_bounds;
            let n = &spec.noise_coding;
            (
                code(d.x_a, b.x_a),
                code(d.x_b, b.x_b),
                code(d.x_c, b.x_c),
                code(d.x_d, b.x_d),
                code(z.z_a, n.z_a),
                code(z.z_b, n.z_b),
            )
        }
    };
    let k = T::lit;
    let xf = if spec.repairs.xf_as_xd { xd } else { T::zero() };
    let f2_const = if spec.repairs.decimal_f2_constant {
        k(0.18507)
    } else {
        k(18507.0)
    };

    let p1 = k(24.947) + k(16.011) * xd + k(1.306) * xb + k(0.820) * xb * xd
        - k(0.785) * za
        - k(0.497) * xd * za
        + k(0.228) * xa * xb
        + k(0.212) * xa
        - k(0.15) * xb * xb
        + k(0.13) * xa * xd
        - k(0.11) * xa * xa
        - k(0.034) * xb * za
        + k(0.002) * xa * za;
    let p2 = f2_const + k(0.01041) * xc + k(0.0038) * zb - k(0.00366) * za - k(0.0035) * xc
        - k(0.00157) * xb;
    let p3 = k(174695.73) + k(112114.69) * xf + k(9133.8) * xb + k(5733.05) * xb * xd
        - k(5487.76) * za
        - k(3478.84) * xd * za
        + k(1586.48) * xa * xb
        + k(1486.84) * xa
        - k(1067.42) * xb * xb
        + k(916.26) * xa * xd
        - k(768.9) * xa * xa
        - k(242.88) * xb * za
        + k(152.4) * xa * za;

    let ten = k(10.0);
    let mut out = ObjectiveTriple::new(
        p1 * ten.powf(spec.s1),
        k(43.4783) * p2,
        p3 * ten.powf(spec.s3),
    );
    if spec.printed_sign {
        out = out * -T::one();
    }
    if out.is_finite() {
        Ok(out)
    } else {
        Err(ProblemError::NonFiniteResult)
    }
}

/// `true` iff every design coordinate is inside its bound and every noise
/// coordinate inside the active noise interval (closed intervals).
pub fn feasible<T: Scalar>(d: &DesignVector<T>, z: &NoiseVector<T>, spec: &ProblemSpec<T>) -> bool {
    let b = &spec.design_bounds;
    let n = &spec.noise_bounds;
    b.x_a.contains(d.x_a)
        && b.x_b.contains(d.x_b)
        && b.x_c.contains(d.x_c)
        && b.x_d.contains(d.x_d)
        && n.z_a.contains(z.z_a)
        && n.z_b.contains(z.z_b)
}

/// A grade given either as a single value or as a range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", untagged)]
pub enum GradeSpec<T> {
    Point(T),
    Range(T, T),
}

impl<T: Scalar> GradeSpec<T> {
    pub fn bounds(&self) -> (T, T) {
        match *self {
            GradeSpec::Point(g) => (g, g),
            GradeSpec::Range(a, b) => (a.min(b), a.max(b)),
        }
    }
}

/// Primary and secondary grades specified for one factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FactorGrades<T> {
    pub primary: GradeSpec<T>,
    pub secondary: GradeSpec<T>,
}

/// Grade context of one frontier: which grades pin each noise factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GradeContext<T> {
    pub label: String,
    pub temperature: FactorGrades<T>,
    pub insolation: FactorGrades<T>,
}

impl<T: Scalar> GradeContext<T> {
    /// The three published frontier settings (1, 2 or 3). Temperature grades
    /// are fixed per frontier; insolation grades span the same ranges in all
    /// three.
    pub fn published(frontier: u8) -> Option<Self> {
        let (mu, eta) = match frontier {
            1 => (0.8967, 0.17169),
            2 => (0.9565, 0.15725),
            3 => (0.9871, 0.06648),
            _ => return None,
        };
        let l = T::lit;
        Some(Self {
            label: format!("frontier-{frontier}"),
            temperature: FactorGrades {
                primary: GradeSpec::Point(l(mu)),
                secondary: GradeSpec::Point(l(eta)),
            },
            insolation: FactorGrades {
                primary: GradeSpec::Range(l(0.25264), l(0.39913)),
                secondary: GradeSpec::Range(l(0.02907), l(0.92274)),
            },
        })
    }
}

/// Default half-width padding around a point grade, as a fraction of the
/// annual range.
pub const DEFAULT_NOISE_PAD: f64 = 0.005;

/// Crisp noise interval implied by a factor's grades.
///
/// The secondary grade is inverted on the annual S-curve. A range maps to
/// `[invert(g_hi), invert(g_lo)]` (the curve is decreasing); a point maps to
/// its preimage widened by `pad` times the annual width on each side. The
/// result is intersected with the annual domain. The primary grade must lie
/// inside the monthly curves' smooth range but does not move the interval.
pub fn noise_interval_from_grades<T: Scalar>(
    model: &Type2FuzzyVariable<T>,
    grades: &FactorGrades<T>,
    pad: T,
) -> Result<Interval<T>, ProblemError> {
    let (p_lo, p_hi) = grades.primary.bounds();
    for month in model.monthly_primary() {
        let (lo, hi) = month.smooth_range();
        for g in [p_lo, p_hi] {
            if !(g > lo && g < hi) {
                return Err(FuzzyError::GradeOutOfSmoothRange {
                    grade: g.to_f64_lossy(),
                    lo: lo.to_f64_lossy(),
                    hi: hi.to_f64_lossy(),
                }
                .into());
            }
        }
    }

    let annual = model.annual_secondary();
    let domain = model.annual_domain();
    let raw = match grades.secondary {
        GradeSpec::Point(g) => {
            let x = scurve_invert(g, annual)?;
            let half = pad * domain.width();
            Interval::new(x - half, x + half)
        }
        GradeSpec::Range(a, b) => {
            let (g_lo, g_hi) = (a.min(b), a.max(b));
            Interval::new(scurve_invert(g_hi, annual)?, scurve_invert(g_lo, annual)?)
        }
    };
    if raw.lo > raw.hi {
        return Err(ProblemError::EmptyInterval);
    }
    raw.intersect(&domain).ok_or(ProblemError::EmptyInterval)
}

/// Replaces the active noise bounds with the intervals implied by `ctx`.
pub fn apply_grade_context<T: Scalar>(
    spec: &ProblemSpec<T>,
    temperature: &Type2FuzzyVariable<T>,
    insolation: &Type2FuzzyVariable<T>,
    ctx: &GradeContext<T>,
    pad: T,
) -> Result<ProblemSpec<T>, ProblemError> {
    let z_a = noise_interval_from_grades(temperature, &ctx.temperature, pad)?;
    let z_b = noise_interval_from_grades(insolation, &ctx.insolation, pad)?;
    let mut out = spec.clone();
    out.noise_bounds = NoiseBounds { z_a, z_b };
    Ok(out)
}

/// Weighted-sum fitness over the six-dimensional search box
/// `(x_a, x_b, x_c, x_d, Z_a, Z_b)`.
#[derive(Debug, Clone)]
pub struct IrrigationProblem<T> {
    spec: ProblemSpec<T>,
    weights: WeightVector<T>,
    bounds: [Interval<T>; 6],
}

impl<T: Scalar> IrrigationProblem<T> {
    pub fn new(spec: ProblemSpec<T>, weights: WeightVector<T>) -> Result<Self, ProblemError> {
        spec.validate()?;
        let bounds = spec.search_bounds();
        Ok(Self {
            spec,
            weights,
            bounds,
        })
    }

    pub fn spec(&self) -> &ProblemSpec<T> {
        &self.spec
    }

    pub fn weights(&self) -> &WeightVector<T> {
        &self.weights
    }

    pub fn split(position: &[T]) -> (DesignVector<T>, NoiseVector<T>) {
        (
            DesignVector {
                x_a: position[0],
                x_b: position[1],
                x_c: position[2],
                x_d: position[3],
            },
            NoiseVector {
                z_a: position[4],
                z_b: position[5],
            },
        )
    }
}

impl<T: Scalar> FitnessFunction<T> for IrrigationProblem<T> {
    fn dimension(&self) -> usize {
        6
    }

    fn bounds(&self) -> &[Interval<T>] {
        &self.bounds
    }

    fn evaluate(&self, position: &[T]) -> T {
        let (d, z) = Self::split(position);
        match eval_objectives(&d, &z, &self.spec) {
            Ok(o) => aggregate(&o, &self.weights),
            Err(_) => T::nan(),
        }
    }
}
