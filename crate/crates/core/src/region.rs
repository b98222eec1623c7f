//! Geometry of the admissible mixture-parameter region.
//!
//! `λ = (λ2, λ3, λ4)` is admissible when the expanded densities stay
//! nonnegative for every `y > 0`, i.e. when both
//!
//! ```text
//! p(y) = λ4 y^4 - λ3 y^3 + λ2 y^2 + 1
//! q(y) = λ4 y^4 - (4λ4 + λ3) y^3 + (3λ3 + λ2) y^2 - 2λ2 y + 1
//! ```
//!
//! are nonnegative on the positive axis. Since `q = p - p'`, nonnegativity of
//! `q` implies that of `p` whenever the leading coefficient is positive, so
//! membership is decided on `q` alone with the Ulrich–Watson quartic
//! certificate. The region is closed and convex; its curved boundary is the
//! set where `q` has a positive double root `y*`, and the plane `λ4 = 0`
//! closes it where the double root escapes to infinity.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::data::LmmParams;
use crate::error::{Error, Result};
use crate::poly;

/// `min_{y>0} q(y)` within this band counts as touching zero.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// `|λ4|` below this on a point without a finite double root puts it on the `λ4 = 0` face.
pub const FACE_TOL: f64 = 1e-9;

/// Relative band around `Δ = 0` in which the certificate falls back to
/// evaluating the quartic at its critical points.
const DISCRIMINANT_BAND: f64 = 1e-10;

/// Rounding allowance on the minimum when the fallback decides membership.
const CLOSURE_SLACK: f64 = 1e-12;

/// `a x^4 + b x^3 + c x^2 + d x + e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl QuarticCoeffs {
    pub const fn new(a: f64, b: f64, c: f64, d: f64, e: f64) -> Self {
        Self { a, b, c, d, e }
    }

    /// Ascending coefficient array, `[e, d, c, b, a]`.
    pub fn ascending(&self) -> [f64; 5] {
        [self.e, self.d, self.c, self.b, self.a]
    }

    pub fn eval(&self, x: f64) -> f64 {
        (((self.a * x + self.b) * x + self.c) * x + self.d) * x + self.e
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        ((4.0 * self.a * x + 3.0 * self.b) * x + 2.0 * self.c) * x + self.d
    }

    pub fn eval_second_derivative(&self, x: f64) -> f64 {
        (12.0 * self.a * x + 6.0 * self.b) * x + 2.0 * self.c
    }

    pub fn is_finite(&self) -> bool {
        self.ascending().iter().all(|v| v.is_finite())
    }
}

/// `q(y) = λ4 y^4 - (4λ4 + λ3) y^3 + (3λ3 + λ2) y^2 - 2λ2 y + 1`, the event-record factor.
pub fn q_coeffs(lmm: &LmmParams) -> QuarticCoeffs {
    let LmmParams {
        lambda2: l2,
        lambda3: l3,
        lambda4: l4,
    } = *lmm;
    QuarticCoeffs::new(l4, -(4.0 * l4 + l3), 3.0 * l3 + l2, -2.0 * l2, 1.0)
}

/// `p(y) = λ4 y^4 - λ3 y^3 + λ2 y^2 + 1`, the censored-record factor.
pub fn p_coeffs(lmm: &LmmParams) -> QuarticCoeffs {
    QuarticCoeffs::new(lmm.lambda4, -lmm.lambda3, lmm.lambda2, 0.0, 1.0)
}

/// Scaled quantities of the Ulrich–Watson nonnegativity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateInvariants {
    pub alpha: f64,
    pub beta_scaled: f64,
    pub gamma: f64,
    pub discriminant: f64,
    /// Magnitude of the two competing terms of `Delta`, the rounding scale of `discriminant`.
    pub delta_scale: f64,
    pub l1: f64,
    /// Only defined for `beta_scaled > 2`.
    pub l2: Option<f64>,
}

impl CertificateInvariants {
    pub fn compute(c: &QuarticCoeffs) -> Result<Self> {
        if !(c.a > 0.0 && c.e > 0.0) || !c.is_finite() {
            return Err(Error::Domain(format!(
                "positivity certificate needs a > 0 and e > 0, got a = {}, e = {}",
                c.a, c.e
            )));
        }
        let alpha = c.b * c.a.powf(-0.75) * c.e.powf(-0.25);
        let beta = c.c * (c.a * c.e).powf(-0.5);
        let gamma = c.d * c.a.powf(-0.25) * c.e.powf(-0.75);

        let k1 = beta * beta - 3.0 * alpha * gamma + 12.0;
        let k2 = 72.0 * beta + 9.0 * alpha * beta * gamma
            - 2.0 * beta.powi(3)
            - 27.0 * alpha * alpha
            - 27.0 * gamma * gamma;
        let first = 4.0 * k1.powi(3);
        let second = k2 * k2;
        let l1 = (alpha - gamma).powi(2) - 16.0 * (alpha + beta + gamma + 2.0);
        let l2 = (beta > 2.0).then(|| {
            let s = (beta - 2.0).sqrt();
            (alpha - gamma).powi(2) - 4.0 * (beta + 2.0) / s * (alpha + gamma + 4.0 * s)
        });
        Ok(Self {
            alpha,
            beta_scaled: beta,
            gamma,
            discriminant: first - second,
            delta_scale: first.abs().max(second),
            l1,
            l2,
        })
    }

    fn is_finite(&self) -> bool {
        self.alpha.is_finite()
            && self.beta_scaled.is_finite()
            && self.gamma.is_finite()
            && self.discriminant.is_finite()
            && self.l1.is_finite()
            && self.l2.is_none_or(f64::is_finite)
    }

    /// The three-branch decision with explicit signs for `Δ ≤ 0` and `Δ ≥ 0`.
    fn verdict(&self, delta_le0: bool, delta_ge0: bool) -> bool {
        let (a, b, g) = (self.alpha, self.beta_scaled, self.gamma);
        let neg_branch = delta_le0 && a + g > 0.0;
        if b < -2.0 {
            neg_branch
        } else if b <= 6.0 {
            neg_branch || (delta_ge0 && self.l1 <= 0.0)
        } else {
            let l2 = self.l2.expect("l2 is defined for beta_scaled > 6");
            neg_branch || (a > 0.0 && g > 0.0) || (delta_ge0 && l2 <= 0.0)
        }
    }
}

/// Whether the quartic is nonnegative on `(0, ∞)`. Requires `a > 0` and `e > 0`.
///
/// The decision comes from the closed-form certificate. When `Δ` is zero to
/// within rounding (the quartic has a multiple root) the sign of `Δ` carries
/// no information, and the minimum over the critical points decides instead.
pub fn nonneg_on_positive_axis(coeffs: &QuarticCoeffs) -> Result<bool> {
    let inv = CertificateInvariants::compute(coeffs)?;
    if !inv.is_finite() || inv.discriminant.abs() <= DISCRIMINANT_BAND * inv.delta_scale {
        return Ok(positive_axis_min(&coeffs.ascending()).value >= -CLOSURE_SLACK);
    }
    Ok(inv.verdict(inv.discriminant <= 0.0, inv.discriminant >= 0.0))
}

/// Infimum of a polynomial over `(0, ∞)` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveMin {
    /// May be `-∞`.
    pub value: f64,
    /// `None` when the infimum is a limit (`y → 0+` or `y → ∞`).
    pub argmin: Option<f64>,
}

/// Infimum over the positive axis from the critical points and both limits.
/// Critical points come from root isolation of the derivative.
pub fn positive_axis_min(ascending: &[f64]) -> PositiveMin {
    let c = poly::trim(ascending);
    if c.is_empty() {
        return PositiveMin {
            value: 0.0,
            argmin: None,
        };
    }
    let lead = *c.last().unwrap();
    if c.len() > 1 && lead < 0.0 {
        return PositiveMin {
            value: f64::NEG_INFINITY,
            argmin: None,
        };
    }
    let mut best = PositiveMin {
        value: c[0],
        argmin: None,
    };
    let dc = poly::derivative(c);
    for y in poly::real_roots_in(&dc, 0.0, f64::INFINITY) {
        if y <= 0.0 {
            continue;
        }
        let v = poly::eval(c, y);
        if v < best.value {
            best = PositiveMin {
                value: v,
                argmin: Some(y),
            };
        }
    }
    best
}

/// `min_{y>0} q(y)`: negative outside the region, zero on the curved boundary.
pub fn boundary_defect(lmm: &LmmParams) -> f64 {
    positive_axis_min(&q_coeffs(lmm).ascending()).value
}

/// Membership of the closed region.
pub fn membership(lmm: &LmmParams) -> bool {
    if !lmm.is_finite() {
        return false;
    }
    if lmm.lambda4 > 0.0 {
        return nonneg_on_positive_axis(&q_coeffs(lmm)).unwrap_or(false);
    }
    if lmm.lambda4 < 0.0 {
        return false;
    }
    // Degenerate leading coefficient: decide the reduced cubic/quadratic
    // directly. Both factors are checked since the reduction argument from q
    // to p needs a positive leading coefficient.
    positive_axis_min(&q_coeffs(lmm).ascending()).value >= 0.0
        && positive_axis_min(&p_coeffs(lmm).ascending()).value >= 0.0
}

/// Point of the boundary sheet through the double root `y` of `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryCandidate {
    pub lambda: LmmParams,
    /// `λ4 > 0` and the point is a member; the locus equations also describe
    /// sheets where `y` is a double root but not the global minimum of `q`.
    pub valid: bool,
}

/// Solves `q(y) = q'(y) = 0` for `(λ3, λ4)` given `y > 0` and `λ2`.
pub fn boundary_param(y: f64, lambda2: f64) -> Result<BoundaryCandidate> {
    if !(y > 0.0 && y.is_finite() && lambda2.is_finite()) {
        return Err(Error::Domain(format!(
            "boundary parametrization needs y > 0, got y = {y}, λ2 = {lambda2}"
        )));
    }
    // y^2 - 6y + 12 has no real roots.
    let w = y * y - 6.0 * y + 12.0;
    let lambda3 = (2.0 * (y.powi(3) - 5.0 * y * y + 8.0 * y) * lambda2 + 4.0 * y - 12.0)
        / (y * y * w);
    let lambda4 =
        ((y.powi(3) - 4.0 * y * y + 6.0 * y) * lambda2 + 3.0 * y - 6.0) / (y.powi(3) * w);
    let lambda = LmmParams::new(lambda2, lambda3, lambda4);
    Ok(BoundaryCandidate {
        lambda,
        valid: lambda4 > 0.0 && membership(&lambda),
    })
}

/// Gradient of `q(y)` with respect to `λ`, unnormalized.
pub fn raw_normal(y: f64) -> Vector3<f64> {
    Vector3::new(y * y - 2.0 * y, -y.powi(3) + 3.0 * y * y, y.powi(4) - 4.0 * y.powi(3))
}

/// Derivative of [`raw_normal`] in `y`.
pub fn raw_normal_dy(y: f64) -> Vector3<f64> {
    Vector3::new(2.0 * y - 2.0, -3.0 * y * y + 6.0 * y, 4.0 * y.powi(3) - 12.0 * y * y)
}

/// Unit normal of the supporting plane at the boundary point with double
/// root `y_star`. Points into the region.
pub fn supporting_plane_normal(y_star: f64) -> Result<Vector3<f64>> {
    if !(y_star > 0.0 && y_star.is_finite()) {
        return Err(Error::Domain(format!("double root must be positive, got {y_star}")));
    }
    let n = raw_normal(y_star);
    let norm = n.norm();
    if !(norm > 1e-300) {
        return Err(Error::DegenerateNormal(y_star));
    }
    Ok(n / norm)
}

/// Positive double root of `q` for a boundary point.
pub fn double_root(lmm: &LmmParams) -> Result<f64> {
    let q = q_coeffs(lmm);
    let m = positive_axis_min(&q.ascending());
    match m.argmin {
        Some(mut y) if m.value.abs() <= BOUNDARY_TOL => {
            // Newton on q' sharpens the closed-form critical point.
            for _ in 0..3 {
                let d2 = q.eval_second_derivative(y);
                if d2 <= 0.0 {
                    break;
                }
                let next = y - q.eval_derivative(y) / d2;
                if !(next > 0.0) || q.eval_derivative(next).abs() >= q.eval_derivative(y).abs() {
                    break;
                }
                y = next;
            }
            Ok(y)
        }
        _ => Err(Error::NotOnBoundary { min_q: m.value }),
    }
}

/// Where a boundary point touches the positivity constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Contact {
    /// `q` has a double root at `y_star`.
    DoubleRoot { y_star: f64 },
    /// The `λ4 = 0` face, where the touching point sits at `y = ∞`.
    Face,
    /// Where the face meets the curved sheet: `λ4 = 0` and `q` has a double
    /// root at `y_star`. The boundary is not smooth here.
    Edge { y_star: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub lambda: LmmParams,
    pub contact: Contact,
    /// Unit normal, pointing into the region.
    pub normal: Vector3<f64>,
}

impl BoundaryPoint {
    pub fn y_star(&self) -> Option<f64> {
        match self.contact {
            Contact::DoubleRoot { y_star } | Contact::Edge { y_star } => Some(y_star),
            Contact::Face => None,
        }
    }
}

/// Identifies the boundary piece a (numerically) boundary point lies on.
/// Edge points report the sheet's normal.
pub fn classify_boundary(lmm: &LmmParams) -> Result<BoundaryPoint> {
    let snapped = LmmParams::new(lmm.lambda2, lmm.lambda3, 0.0);
    let near_face = lmm.lambda4.abs() <= FACE_TOL;
    match double_root(lmm) {
        Ok(y_star) if near_face && membership(&snapped) => Ok(BoundaryPoint {
            lambda: snapped,
            contact: Contact::Edge { y_star },
            normal: supporting_plane_normal(y_star)?,
        }),
        Ok(y_star) => Ok(BoundaryPoint {
            lambda: *lmm,
            contact: Contact::DoubleRoot { y_star },
            normal: supporting_plane_normal(y_star)?,
        }),
        Err(err) => {
            if near_face && membership(&snapped) {
                Ok(BoundaryPoint {
                    lambda: snapped,
                    contact: Contact::Face,
                    normal: Vector3::z(),
                })
            } else {
                Err(err)
            }
        }
    }
}

/// Point of the face–sheet edge with double root `y`, with its first and
/// second derivatives in `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCurvePoint {
    pub lambda: LmmParams,
    pub d1: Vector3<f64>,
    pub d2: Vector3<f64>,
}

/// The edge curve: with `λ4 = 0`, `q(y) = q'(y) = 0` is linear in `(λ2, λ3)`:
///
/// ```text
/// λ2 = 3(2 - y) / (y (y² - 4y + 6)),   λ3 = -2(y - 1) / (y² (y² - 4y + 6))
/// ```
///
/// Only `y ≥ 1` can be admissible (the cubic's leading coefficient is `-λ3`).
pub fn edge_point(y: f64) -> Result<EdgeCurvePoint> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("edge parameter must be positive, got {y}")));
    }
    // Rows: q(y) = 0 and q'(y) = 0 in the unknowns (λ2, λ3).
    let m = |y: f64| nalgebra::Matrix2::new(y * y - 2.0 * y, 3.0 * y * y - y.powi(3), 2.0 * y - 2.0, 6.0 * y - 3.0 * y * y);
    let m1 = nalgebra::Matrix2::new(2.0 * y - 2.0, 6.0 * y - 3.0 * y * y, 2.0, 6.0 - 6.0 * y);
    let m2 = nalgebra::Matrix2::new(2.0, 6.0 - 6.0 * y, 0.0, -6.0);
    let lu = m(y).lu();
    let solve = |r: nalgebra::Vector2<f64>| {
        lu.solve(&r)
            .ok_or_else(|| Error::Domain(format!("edge system singular at y = {y}")))
    };
    let v = solve(nalgebra::Vector2::new(-1.0, 0.0))?;
    let v1 = solve(-(m1 * v))?;
    let v2 = solve(-(m1 * v1 * 2.0) - m2 * v)?;
    Ok(EdgeCurvePoint {
        lambda: LmmParams::new(v[0], v[1], 0.0),
        d1: Vector3::new(v1[0], v1[1], 0.0),
        d2: Vector3::new(v2[0], v2[1], 0.0),
    })
}

/// Crossing of the segment `inside → outside` with the boundary, by
/// bisection on [`membership`] down to floating-point resolution. Returns
/// the member end of the final bracket.
pub fn segment_boundary_intersection(inside: &LmmParams, outside: &LmmParams) -> Result<LmmParams> {
    if !membership(inside) {
        return Err(Error::Domain(format!("{inside:?} is not in the region")));
    }
    if membership(outside) {
        return Err(Error::Domain(format!("{outside:?} is in the region")));
    }
    let a = inside.to_vector();
    let dir = outside.to_vector() - a;
    let at = |t: f64| LmmParams::from_vector(&(a + dir * t));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > f64::EPSILON * 0.25 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if membership(&at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(lo))
}
