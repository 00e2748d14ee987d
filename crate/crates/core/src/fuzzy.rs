//! Type-2 fuzzy modelling of a noisy environmental factor.
//!
//! Each month's observed `[min, max]` gets a decreasing S-curve (the primary
//! membership); the annual envelope gets another (the secondary membership).
//! The spread of the twelve primaries is the footprint of uncertainty, the
//! secondary curve is sliced into alpha-planes for type reduction, and a
//! credibility level picks the alpha-cut used as the crisp interval.
//!
//! The S-curve is the piecewise form
//!
//! ```text
//!          1                                   b <= b_lo
//! g(b) =   B / (1 + C exp(alpha (b - b_lo) / (b_hi - b_lo)))   b_lo < b < b_hi
//!          0                                   b >= b_hi
//! ```
//!
//! kept verbatim, including the jump of `1 - B/(1+C)` at `b_lo`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::climate::{annual_extrema, ClimateTable, Factor};
use crate::scalar::{Interval, Scalar};

/// Number of alpha-planes used when none is configured.
pub const DEFAULT_PLANES: usize = 11;
/// Grid size for sampled footprints.
pub const DEFAULT_FOU_GRID: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuzzyError {
    #[error("degenerate range: lo ({lo}) must be strictly below hi ({hi})")]
    DegenerateRange { lo: f64, hi: f64 },
    #[error("grade {grade} outside the open smooth-branch range ({lo}, {hi})")]
    GradeOutOfSmoothRange { grade: f64, lo: f64, hi: f64 },
    #[error("type reduction needs at least 2 planes, got {0}")]
    TooFewPlanes(usize),
    #[error("credibility level {0} exceeds every alpha-plane level")]
    EmptyCut(f64),
    #[error("month {0} outside 1..=12")]
    MonthOutOfRange(i64),
    #[error("invalid S-curve parameters: {0}")]
    InvalidParams(String),
    #[error("membership grade {0} outside [0, 1]")]
    InvalidGrade(f64),
    #[error("credibility level {eps} must lie in (0, {max})")]
    InvalidCredibility { eps: f64, max: f64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// Shape constants `(B, C, alpha)` shared by every curve of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ScurveShape<T> {
    #[serde(rename = "B")]
    pub b: T,
    #[serde(rename = "C")]
    pub c: T,
    pub alpha: T,
}

impl<T: Scalar> Default for ScurveShape<T> {
    /// `(1, 0.001001, 13.8135)`: grades run from 0.999 at `b_lo` down to
    /// 0.001 at `b_hi`.
    fn default() -> Self {
        Self {
            b: T::one(),
            c: T::lit(0.001001),
            alpha: T::lit(13.8135),
        }
    }
}

impl<T: Scalar> ScurveShape<T> {
    pub fn validate(&self) -> Result<(), FuzzyError> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if !(ok(self.b) && ok(self.c) && ok(self.alpha)) {
            return Err(FuzzyError::InvalidParams(
                "B, C and alpha must be finite and > 0".into(),
            ));
        }
        if self.b / (T::one() + self.c) > T::one() {
            return Err(FuzzyError::InvalidParams(
                "B/(1+C) must not exceed 1".into(),
            ));
        }
        Ok(())
    }

    /// Open range of grades produced by the smooth branch:
    /// `(B/(1+C e^alpha), B/(1+C))`.
    pub fn smooth_range(&self) -> (T, T) {
        let one = T::one();
        (
            self.b / (one + self.c * self.alpha.exp()),
            self.b / (one + self.c),
        )
    }
}

/// One S-curve: a shape stretched over `[b_lo, b_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SCurveParams<T> {
    pub b_lo: T,
    pub b_hi: T,
    #[serde(flatten)]
    pub shape: ScurveShape<T>,
}

impl<T: Scalar> SCurveParams<T> {
    pub fn new(b_lo: T, b_hi: T, shape: ScurveShape<T>) -> Result<Self, FuzzyError> {
        shape.validate()?;
        if !(b_lo.is_finite() && b_hi.is_finite() && b_lo < b_hi) {
            return Err(FuzzyError::DegenerateRange {
                lo: b_lo.to_f64_lossy(),
                hi: b_hi.to_f64_lossy(),
            });
        }
        Ok(Self { b_lo, b_hi, shape })
    }

    pub fn domain(&self) -> Interval<T> {
        Interval::new(self.b_lo, self.b_hi)
    }

    pub fn smooth_range(&self) -> (T, T) {
        self.shape.smooth_range()
    }

    /// Smooth-branch inverse without range checks.
    fn invert_unchecked(&self, g: T) -> T {
        let ScurveShape { b, c, alpha } = self.shape;
        self.b_lo + (self.b_hi - self.b_lo) * ((b - g) / (g * c)).ln() / alpha
    }
}

/// A grade in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "T: Scalar")]
pub struct MembershipGrade<T>(T);

impl<T: Scalar> MembershipGrade<T> {
    pub fn new(value: T) -> Result<Self, FuzzyError> {
        if value >= T::zero() && value <= T::one() {
            Ok(Self(value))
        } else {
            Err(FuzzyError::InvalidGrade(value.to_f64_lossy()))
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// Evaluates the piecewise S-curve. Non-increasing in `b`.
pub fn scurve_grade<T: Scalar>(b: T, p: &SCurveParams<T>) -> MembershipGrade<T> {
    if b <= p.b_lo {
        return MembershipGrade(T::one());
    }
    if b >= p.b_hi {
        return MembershipGrade(T::zero());
    }
    let ScurveShape { b: big_b, c, alpha } = p.shape;
    let t = (b - p.b_lo) / (p.b_hi - p.b_lo);
    MembershipGrade(big_b / (T::one() + c * (alpha * t).exp()))
}

/// Domain value whose smooth-branch grade is `g`.
///
/// `g` must lie strictly inside [`ScurveShape::smooth_range`].
pub fn scurve_invert<T: Scalar>(g: T, p: &SCurveParams<T>) -> Result<T, FuzzyError> {
    let (lo, hi) = p.smooth_range();
    if !(g > lo && g < hi) {
        return Err(FuzzyError::GradeOutOfSmoothRange {
            grade: g.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    }
    Ok(p.invert_unchecked(g))
}

/// Fits a curve to an observed `[lo, hi]` using the configured shape.
pub fn fit_scurve<T: Scalar>(
    lo: T,
    hi: T,
    shape: ScurveShape<T>,
) -> Result<SCurveParams<T>, FuzzyError> {
    SCurveParams::new(lo, hi, shape)
}

/// Twelve monthly primaries plus the annual secondary of one factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
#[serde(try_from = "RawModel<T>")]
pub struct Type2FuzzyVariable<T> {
    pub factor_name: String,
    monthly_primary: Vec<SCurveParams<T>>,
    annual_secondary: SCurveParams<T>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawModel<T> {
    factor_name: String,
    monthly_primary: Vec<SCurveParams<T>>,
    annual_secondary: SCurveParams<T>,
}

impl<T: Scalar> TryFrom<RawModel<T>> for Type2FuzzyVariable<T> {
    type Error = FuzzyError;

    fn try_from(raw: RawModel<T>) -> Result<Self, Self::Error> {
        Self::new(raw.factor_name, raw.monthly_primary, raw.annual_secondary)
    }
}

impl<T: Scalar> Type2FuzzyVariable<T> {
    /// Checks the month count, each curve, and that every monthly domain
    /// sits inside the annual one.
    pub fn new(
        factor_name: impl Into<String>,
        monthly_primary: Vec<SCurveParams<T>>,
        annual_secondary: SCurveParams<T>,
    ) -> Result<Self, FuzzyError> {
        if monthly_primary.len() != 12 {
            return Err(FuzzyError::InvalidModel(format!(
                "expected 12 monthly curves, got {}",
                monthly_primary.len()
            )));
        }
        let annual = annual_secondary.domain();
        for (i, p) in monthly_primary
            .iter()
            .chain(std::iter::once(&annual_secondary))
            .enumerate()
        {
            SCurveParams::new(p.b_lo, p.b_hi, p.shape)
                .map_err(|e| FuzzyError::InvalidModel(format!("curve {i}: {e}")))?;
        }
        for (i, p) in monthly_primary.iter().enumerate() {
            if !annual.contains_interval(&p.domain()) {
                return Err(FuzzyError::InvalidModel(format!(
                    "month {} domain not inside the annual domain",
                    i + 1
                )));
            }
        }
        Ok(Self {
            factor_name: factor_name.into(),
            monthly_primary,
            annual_secondary,
        })
    }

    pub fn monthly_primary(&self) -> &[SCurveParams<T>] {
        &self.monthly_primary
    }

    pub fn primary(&self, month: i64) -> Result<&SCurveParams<T>, FuzzyError> {
        if !(1..=12).contains(&month) {
            return Err(FuzzyError::MonthOutOfRange(month));
        }
        Ok(&self.monthly_primary[(month - 1) as usize])
    }

    pub fn annual_secondary(&self) -> &SCurveParams<T> {
        &self.annual_secondary
    }

    pub fn annual_domain(&self) -> Interval<T> {
        self.annual_secondary.domain()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FuzzyError> {
        serde_json::from_str(text).map_err(|e| FuzzyError::InvalidModel(e.to_string()))
    }
}

/// Fits primaries to each month's `(min, max)` and the secondary to the
/// annual extrema.
pub fn build_type2_model<T: Scalar>(
    table: &ClimateTable<T>,
    factor: Factor,
    shape: ScurveShape<T>,
) -> Result<Type2FuzzyVariable<T>, FuzzyError> {
    let monthly = table
        .records()
        .iter()
        .map(|r| {
            let iv = r.interval(factor);
            fit_scurve(iv.lo, iv.hi, shape)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let annual = annual_extrema(table, factor);
    let secondary = fit_scurve(annual.lo, annual.hi, shape)?;
    Type2FuzzyVariable::new(factor.name(), monthly, secondary)
}

/// Lower and upper envelopes of the twelve primary grades at `x`.
pub fn fou_bounds<T: Scalar>(
    model: &Type2FuzzyVariable<T>,
    x: T,
) -> (MembershipGrade<T>, MembershipGrade<T>) {
    let mut lower = T::one();
    let mut upper = T::zero();
    for p in model.monthly_primary() {
        let g = scurve_grade(x, p).value();
        lower = lower.min(g);
        upper = upper.max(g);
    }
    (MembershipGrade(lower), MembershipGrade(upper))
}

/// Footprint of uncertainty sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FootprintOfUncertainty<T> {
    pub grid: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> FootprintOfUncertainty<T> {
    /// Samples `points` equally spaced values across the annual domain,
    /// endpoints included. At least two points are always taken.
    pub fn sample(model: &Type2FuzzyVariable<T>, points: usize) -> Self {
        let points = points.max(2);
        let dom = model.annual_domain();
        let step = dom.width() / T::from_usize(points - 1).expect("grid size fits");
        let mut fou = Self {
            grid: Vec::with_capacity(points),
            lower: Vec::with_capacity(points),
            upper: Vec::with_capacity(points),
        };
        for i in 0..points {
            let x = if i == points - 1 {
                dom.hi
            } else {
                dom.lo + step * T::from_usize(i).expect("grid index fits")
            };
            let (l, u) = fou_bounds(model, x);
            fou.grid.push(x);
            fou.lower.push(l.value());
            fou.upper.push(u.value());
        }
        fou
    }

    /// Mean vertical width `upper - lower` over the grid.
    pub fn mean_width(&self) -> T {
        let n = T::from_usize(self.grid.len()).expect("grid size fits");
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| u - l)
            .sum::<T>()
            / n
    }
}

/// Level set of the secondary membership at `level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AlphaPlane<T> {
    pub level: T,
    pub interval: Interval<T>,
}

/// `{x in annual domain : secondary grade(x) >= level}`.
///
/// Level 0 keeps the whole annual domain, level 1 keeps only the saturated
/// point `b_lo`. For levels at or below the grade reached at `b_hi` the set
/// is `[b_lo, b_hi)`; its closure is returned.
pub fn alpha_plane_cut<T: Scalar>(
    model: &Type2FuzzyVariable<T>,
    level: T,
) -> Result<AlphaPlane<T>, FuzzyError> {
    if !(level >= T::zero() && level <= T::one()) {
        return Err(FuzzyError::InvalidGrade(level.to_f64_lossy()));
    }
    let sec = model.annual_secondary();
    let (smooth_lo, smooth_hi) = sec.smooth_range();
    let hi = if level > smooth_hi {
        sec.b_lo
    } else if level <= smooth_lo {
        sec.b_hi
    } else {
        sec.invert_unchecked(level).max(sec.b_lo).min(sec.b_hi)
    };
    Ok(AlphaPlane {
        level,
        interval: Interval::new(sec.b_lo, hi),
    })
}

/// Alpha-plane decomposition at levels `0, 1/(n-1), ..., 1`.
pub fn type_reduce<T: Scalar>(
    model: &Type2FuzzyVariable<T>,
    n_planes: usize,
) -> Result<Vec<AlphaPlane<T>>, FuzzyError> {
    if n_planes < 2 {
        return Err(FuzzyError::TooFewPlanes(n_planes));
    }
    let denom = T::from_usize(n_planes - 1).expect("plane count fits");
    (0..n_planes)
        .map(|i| {
            let level = if i == n_planes - 1 {
                T::one()
            } else {
                T::from_usize(i).expect("plane index fits") / denom
            };
            alpha_plane_cut(model, level)
        })
        .collect()
}

/// Minimum grade a decision maker accepts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "T: Scalar")]
pub struct CredibilityLevel<T>(T);

impl<T: Scalar> CredibilityLevel<T> {
    /// Requires `0 < eps < B/(1+C)` for the curve it will be applied to.
    pub fn new(eps: T, params: &SCurveParams<T>) -> Result<Self, FuzzyError> {
        let (_, max) = params.smooth_range();
        if eps > T::zero() && eps < max {
            Ok(Self(eps))
        } else {
            Err(FuzzyError::InvalidCredibility {
                eps: eps.to_f64_lossy(),
                max: max.to_f64_lossy(),
            })
        }
    }

    /// Level zero: nothing is discarded.
    pub fn none() -> Self {
        Self(T::zero())
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// Crisp interval of the plane with the smallest level `>= eps`.
pub fn defuzzify_interval<T: Scalar>(
    planes: &[AlphaPlane<T>],
    eps: CredibilityLevel<T>,
) -> Result<Interval<T>, FuzzyError> {
    planes
        .iter()
        .filter(|p| p.level >= eps.value())
        .min_by(|a, b| a.level.partial_cmp(&b.level).expect("finite levels"))
        .map(|p| p.interval)
        .ok_or(FuzzyError::EmptyCut(eps.value().to_f64_lossy()))
}

/// `(primary grade for the month, annual secondary grade)` at `x`.
pub fn grade_pair<T: Scalar>(
    model: &Type2FuzzyVariable<T>,
    x: T,
    month: i64,
) -> Result<(MembershipGrade<T>, MembershipGrade<T>), FuzzyError> {
    let primary = scurve_grade(x, model.primary(month)?);
    let secondary = scurve_grade(x, model.annual_secondary());
    Ok((primary, secondary))
}
