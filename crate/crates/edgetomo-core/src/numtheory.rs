//! Number-theoretic genericity checks for the evaluation point.
//!
//! The pointwise error analysis behind the resolution experiments only holds
//! at points whose lattice phases do not resonate with the detector grid.
//! Two scalar quantities control this: the radial value `kappa * |x0|` and,
//! when `x0` lies on the boundary, the tangential value `kappa * tau0 . x0`
//! (`tau0` the unit tangent at the foot point). Each must stay quantifiably
//! far from the rationals: the distance from `m * s` to the nearest integer
//! may not shrink faster than a negative power of `m`. This module estimates
//! that power from the record minima of the fractional distances, extracts
//! continued-fraction partial quotients as supporting evidence, and bundles
//! the four point conditions into a [`GenericityReport`].
//!
//! Everything here is evidence, not certification. A floating-point input is
//! rational by construction, so irrationality cannot be proven, only probed
//! down to the resolution floor of the arithmetic; the report records how far
//! the probe went and refuses to speak beyond it.

use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::geometry::{BoundaryCurve, PointClass};
use crate::math;

/// Fractional distances below this floor are treated as exact hits on a
/// rational: `1e5 * 1 ulp(1e5)` is about `1e-11`, so the floor sits three
/// orders of magnitude under the worst rounding noise the probe loop can
/// produce, and a genuine near-hit this deep at modest `m` cannot come from
/// an irrational of moderate type.
pub const RATIONAL_FLOOR: f64 = 1e-14;

/// Largest probe bound accepted by [`estimate_type`]. Past `10^6` multiples,
/// accumulated rounding in `m * s` starts competing with the record minima
/// of well-approximable inputs, so larger sweeps would manufacture evidence.
pub const MAX_PROBE_BOUND: u64 = 1_000_000;

/// Probe bound used by [`check_point_conditions`] for both scalar values.
pub const REPORT_PROBE_BOUND: u64 = 100_000;

/// Number of partial quotients requested for the report evidence.
pub const REPORT_QUOTIENTS: usize = 40;

/// Golden ratio `(1 + sqrt 5) / 2` to 60 significant digits, for the exact
/// continued-fraction path.
pub const GOLDEN_RATIO_DECIMAL: &str =
    "1.618033988749894848204586834365638117720309179805762862135450";

/// `sqrt 2` to 60 significant digits, for the exact continued-fraction path.
pub const SQRT2_DECIMAL: &str =
    "1.414213562373095048801688724209698078569671875376948073176680";

/// Failures of the number-theoretic probes.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumTheoryError {
    /// The probed value is rational to working precision: `<m s>` fell below
    /// [`RATIONAL_FLOOR`] at the reported multiplier.
    #[error("input is rational to working precision: <{m} s> underflows the resolution floor")]
    RationalInput {
        /// Multiplier at which the fractional distance collapsed.
        m: u64,
    },
    /// A parameter fails its documented precondition.
    #[error("bad parameter: {0}")]
    BadParameter(&'static str),
}

/// Distance from `s` to the nearest integer, in `[0, 1/2]`.
///
/// `frac_dist(2.3) == 0.3`, `frac_dist(2.5) == 0.5`, `frac_dist(-1.2)` is
/// `0.2` up to one rounding of the fractional part.
#[must_use]
pub fn frac_dist(s: f64) -> f64 {
    let f = math::fract_pos(s);
    f.min(1.0 - f)
}

/// Least-squares slope of `y` against `x` (both already transformed).
fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

/// Estimates the approximation type of `s` from the record minima of the
/// fractional distances `<m s>`, `1 <= m <= m_max`.
///
/// A value of type `eta` satisfies `<m s> >= c / m^eta` for all `m`, with
/// `eta = 1` the badly-approximable (constant-type) case. The estimator
/// collects the multipliers where `<m s>` reaches a new minimum (by the
/// best-approximation property these are exactly the continued-fraction
/// convergent denominators) and fits `ln(1 / <m s>)` against `ln m` over
/// them by least squares; the slope is the reported type. For the golden
/// ratio the records sit at the Fibonacci numbers with
/// `ln(1 / <m s>) = ln m + ln sqrt 5` up to terms that vanish geometrically,
/// so the fit returns `1` to within a few percent, and any other quadratic
/// irrational behaves the same way. The slope is a property of the record
/// set: enlarging `m_max` leaves the estimate bit-identical until a new
/// record minimum enters the window.
///
/// The fit is evidence, not proof: it cannot distinguish an irrational from
/// a rational whose denominator exceeds the probe range, and it reports
/// whatever power law the visible records follow.
///
/// # Errors
/// [`NumTheoryError::RationalInput`] when some `<m s>` falls below
/// [`RATIONAL_FLOOR`], naming the multiplier; [`NumTheoryError::BadParameter`]
/// for a non-finite `s`, a probe bound outside `[8, 10^6]`, or a record set
/// too small to fit (fewer than three minima).
pub fn estimate_type(s: f64, m_max: u64) -> Result<f64, NumTheoryError> {
    if !s.is_finite() {
        return Err(NumTheoryError::BadParameter("value must be finite"));
    }
    if m_max < 8 {
        return Err(NumTheoryError::BadParameter("probe bound below 8"));
    }
    if m_max > MAX_PROBE_BOUND {
        return Err(NumTheoryError::BadParameter("probe bound above 10^6"));
    }
    let mut best = f64::INFINITY;
    let mut log_m = Vec::new();
    let mut log_inv = Vec::new();
    for m in 1..=m_max {
        let d = frac_dist(m as f64 * s);
        if d < RATIONAL_FLOOR {
            return Err(NumTheoryError::RationalInput { m });
        }
        if d < best {
            best = d;
            log_m.push(math::ln(m as f64));
            log_inv.push(math::ln(1.0 / d));
        }
    }
    if log_m.len() < 3 {
        return Err(NumTheoryError::BadParameter(
            "too few record minima to fit a type",
        ));
    }
    Ok(ls_slope(&log_m, &log_inv))
}

/// Partial quotients of the continued fraction of a nonnegative decimal
/// string, computed in exact rational arithmetic.
///
/// The input is digits with at most one decimal point and an optional sign;
/// the quotients describe the absolute value. At most `max_quotients` terms
/// are returned, fewer when the expansion of the (rational) input
/// terminates. For a badly approximable constant given to 60 significant
/// digits the first 40 quotients are those of the underlying constant: the
/// 40th convergent denominator stays below `10^9`, far under the `10^30`
/// half-precision threshold where the truncated input starts telling a
/// different story.
///
/// # Errors
/// [`NumTheoryError::BadParameter`] for an empty or malformed string or a
/// partial quotient overflowing `u64` (impossible for inputs of moderate
/// size and type).
pub fn continued_fraction_decimal(
    s: &str,
    max_quotients: usize,
) -> Result<Vec<u64>, NumTheoryError> {
    let body = s
        .strip_prefix('-')
        .or_else(|| s.strip_prefix('+'))
        .unwrap_or(s);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(NumTheoryError::BadParameter("empty decimal string"));
    }
    let all_digits = int_part.chars().chain(frac_part.chars());
    let mut digits = alloc::string::String::new();
    for c in all_digits {
        if !c.is_ascii_digit() {
            return Err(NumTheoryError::BadParameter(
                "decimal string holds a non-digit",
            ));
        }
        digits.push(c);
    }
    let p = BigUint::parse_bytes(digits.as_bytes(), 10)
        .ok_or(NumTheoryError::BadParameter("empty decimal string"))?;
    let q = BigUint::from(10u32).pow(frac_part.len() as u32);
    euclid_quotients(p, q, max_quotients)
}

/// Partial quotients of the continued fraction of the exact rational value
/// of a float.
///
/// The quotients describe `|s|`. The expansion is truncated at
/// `max_quotients` terms or as soon as the convergent denominator passes
/// `2^26` (half the significand width): beyond that point the quotients
/// describe the binary truncation of the input rather than the quantity it
/// approximates, so the report stops certifying. The returned list is
/// therefore a reliable prefix, not the full expansion of the float.
///
/// # Errors
/// [`NumTheoryError::BadParameter`] for a non-finite input.
pub fn continued_fraction_f64(s: f64, max_quotients: usize) -> Result<Vec<u64>, NumTheoryError> {
    if !s.is_finite() {
        return Err(NumTheoryError::BadParameter("value must be finite"));
    }
    let bits = s.abs().to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let raw_mant = bits & ((1u64 << 52) - 1);
    let (mant, e2) = if raw_exp == 0 {
        (raw_mant, -1074i64)
    } else {
        (raw_mant | (1u64 << 52), raw_exp - 1075)
    };
    let mant = BigUint::from(mant);
    let (p, q) = if e2 >= 0 {
        (mant << (e2 as u64), BigUint::from(1u32))
    } else {
        (mant, BigUint::from(1u32) << ((-e2) as u64))
    };
    let quotients = euclid_quotients(p, q, max_quotients)?;
    // Trim to the reliable prefix: stop once the convergent denominator
    // q_k = a_k q_{k-1} + q_{k-2} exceeds 2^26.
    let cutoff = BigUint::from(1u64 << 26);
    let mut den_prev = BigUint::from(0u32);
    let mut den = BigUint::from(1u32);
    let mut keep = 0usize;
    for &a in &quotients {
        let next = BigUint::from(a) * &den + &den_prev;
        den_prev = den;
        den = next;
        if den > cutoff {
            break;
        }
        keep += 1;
    }
    let mut quotients = quotients;
    quotients.truncate(keep.max(1));
    Ok(quotients)
}

/// Euclid's algorithm on `p / q`, emitting at most `n` partial quotients.
fn euclid_quotients(
    mut p: BigUint,
    mut q: BigUint,
    n: usize,
) -> Result<Vec<u64>, NumTheoryError> {
    if q == BigUint::from(0u32) {
        return Err(NumTheoryError::BadParameter("zero denominator"));
    }
    let mut out = Vec::new();
    while out.len() < n && q != BigUint::from(0u32) {
        let a = &p / &q;
        let r = &p % &q;
        let a: u64 = a
            .try_into()
            .map_err(|_| NumTheoryError::BadParameter("partial quotient overflows u64"))?;
        out.push(a);
        p = q;
        q = r;
    }
    Ok(out)
}

/// Evidence collected about one evaluation point: the two resonance-driving
/// scalar values, their continued-fraction and type estimates, and the four
/// point conditions.
///
/// Condition fields hold what the numeric probes found, and probe failures
/// land in the fields rather than in errors: a rational detection makes the
/// corresponding condition `false` and leaves its type estimate `None`. The
/// tangential entries exist only when the point lies on the boundary arc,
/// because only there does a foot point define a tangent direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericityReport {
    /// Evaluation point.
    pub x0: [f64; 2],
    /// Angular-to-radial lattice aspect ratio.
    pub kappa: f64,
    /// `kappa * |x0|`, the radial resonance value.
    pub radial_value: f64,
    /// `kappa * tau0 . x0` with `tau0` the unit tangent at the foot point;
    /// present only for on-curve points.
    pub tangential_value: Option<f64>,
    /// Reliable partial quotients of the radial value.
    pub radial_quotients: Vec<u64>,
    /// Reliable partial quotients of the tangential value, when present.
    pub tangential_quotients: Option<Vec<u64>>,
    /// Estimated type of the radial value; `None` when the probe detected a
    /// rational.
    pub radial_type: Option<f64>,
    /// Estimated type of the tangential value; `None` off the curve or when
    /// the probe detected a rational.
    pub tangential_type: Option<f64>,
    /// All tangent lines of the arc have strictly positive, finite curvature
    /// radius at the tangency point (no flat spots).
    pub p1: bool,
    /// The line through the origin and `x0` is not tangent to the arc.
    pub p2: bool,
    /// The radial value resists rational resonance up to the probe bound.
    pub p3: bool,
    /// The tangential value resists rational resonance; `None` off the
    /// curve, where the condition does not apply.
    pub p4: Option<bool>,
    /// Largest estimated type among the applicable values; `None` when any
    /// applicable probe detected a rational.
    pub eta0: Option<f64>,
}

/// Runs the four point conditions for an evaluation point `x0` and lattice
/// aspect ratio `kappa` against the boundary arc.
///
/// * Flat spots: the curvature radius is scanned across the arc; the arc
///   construction already rejects degenerate curvature, so this re-checks
///   numerically what holds by construction.
/// * Origin tangency: every tangent line of the arc through the origin is
///   located and tested against `x0`; a point sitting on one of those lines
///   (within `1e-9` of the geometry scale) fails.
/// * Radial and tangential resonance: [`estimate_type`] with probe bound
///   [`REPORT_PROBE_BOUND`]; a rational detection marks the condition
///   failed. `x0 = 0` fails the tangential condition at multiplier 1, which
///   is the arithmetic form of "the origin is never a generic point".
///
/// # Errors
/// [`NumTheoryError::BadParameter`] for non-finite `x0` or a non-positive or
/// non-finite `kappa`. Condition failures are report fields, not errors.
pub fn check_point_conditions(
    curve: &BoundaryCurve,
    x0: [f64; 2],
    kappa: f64,
) -> Result<GenericityReport, NumTheoryError> {
    if !x0[0].is_finite() || !x0[1].is_finite() {
        return Err(NumTheoryError::BadParameter("point must be finite"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(NumTheoryError::BadParameter(
            "lattice aspect ratio must be positive and finite",
        ));
    }
    let scale = curve.base_radius().max(1.0);
    let on_curve_tol = 1e-12 * scale;
    let line_tol = 1e-9 * (scale + math::hypot(x0[0], x0[1]));

    // Flat spots along the arc.
    let (lo, hi) = curve.theta_range();
    let mut p1 = true;
    for i in 0..=256 {
        let theta = lo + (hi - lo) * i as f64 / 256.0;
        let r = curve.curvature_radius(theta);
        if !(r > 0.0) || !r.is_finite() {
            p1 = false;
        }
    }

    // Tangency of the line through the origin and x0.
    let p2 = if math::hypot(x0[0], x0[1]) <= line_tol {
        // The probe line is undefined at the origin; the tangential
        // condition below carries the rejection.
        true
    } else {
        match curve.classify([0.0, 0.0], on_curve_tol) {
            PointClass::NoTangent => true,
            PointClass::OnCurve { theta } => curve.tangent_line_miss(x0, theta).abs() > line_tol,
            PointClass::TangentThrough { thetas } => thetas
                .iter()
                .all(|&theta| curve.tangent_line_miss(x0, theta).abs() > line_tol),
        }
    };

    let radial_value = kappa * math::hypot(x0[0], x0[1]);
    let radial_quotients = continued_fraction_f64(radial_value, REPORT_QUOTIENTS)?;
    let radial_type = match estimate_type(radial_value, REPORT_PROBE_BOUND) {
        Ok(v) => Some(v),
        Err(NumTheoryError::RationalInput { .. }) => None,
        Err(e) => return Err(e),
    };
    let p3 = radial_type.is_some();

    let foot = match curve.classify(x0, on_curve_tol) {
        PointClass::OnCurve { theta } => Some(theta),
        _ => None,
    };
    let (tangential_value, tangential_quotients, tangential_type, p4) = match foot {
        Some(theta) => {
            // Unit tangent along the arc's own orientation (velocity / R).
            let (sv, cv) = math::sin_cos(theta);
            let value = kappa * (sv * x0[0] - cv * x0[1]);
            let quotients = continued_fraction_f64(value, REPORT_QUOTIENTS)?;
            let estimated = match estimate_type(value, REPORT_PROBE_BOUND) {
                Ok(v) => Some(v),
                Err(NumTheoryError::RationalInput { .. }) => None,
                Err(e) => return Err(e),
            };
            let ok = estimated.is_some();
            (Some(value), Some(quotients), estimated, Some(ok))
        }
        None => (None, None, None, None),
    };

    let eta0 = match (radial_type, foot) {
        (Some(r), None) => Some(r),
        (Some(r), Some(_)) => tangential_type.map(|t| r.max(t)),
        (None, _) => None,
    };

    Ok(GenericityReport {
        x0,
        kappa,
        radial_value,
        tangential_value,
        radial_quotients,
        tangential_quotients,
        radial_type,
        tangential_type,
        p1,
        p2,
        p3,
        p4,
        eta0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Bounds asserted by the tests. The type window covers the few-percent
    /// least-squares wobble of a constant-type fit; the prefix floor keeps
    /// the float path honest about how much expansion it certifies.
    const TYPE_WINDOW: (f64, f64) = (0.95, 1.05);
    const MIN_FLOAT_PREFIX: usize = 30;

    fn golden() -> f64 {
        (1.0 + math::sqrt(5.0)) / 2.0
    }

    #[test]
    fn nearest_integer_distance_matches_hand_values() {
        assert!((frac_dist(2.3) - 0.3).abs() < 1e-15);
        assert!((frac_dist(2.5) - 0.5).abs() < 1e-15);
        assert!((frac_dist(-1.2) - 0.2).abs() < 1e-15);
        assert_eq!(frac_dist(7.0), 0.0);
        assert_eq!(frac_dist(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn nearest_integer_distance_is_periodic_and_even(s in -1.0e3..1.0e3f64) {
            let d = frac_dist(s);
            prop_assert!((0.0..=0.5).contains(&d));
            prop_assert!((frac_dist(s + 1.0) - d).abs() <= 1e-12);
            prop_assert!((frac_dist(-s) - d).abs() <= 1e-12);
        }
    }

    #[test]
    fn golden_ratio_fits_constant_type() {
        let eta = estimate_type(golden(), 100_000).unwrap();
        assert!(
            eta > TYPE_WINDOW.0 && eta < TYPE_WINDOW.1,
            "estimated type {eta}"
        );
    }

    #[test]
    fn sqrt_two_fits_constant_type() {
        let eta = estimate_type(math::sqrt(2.0), 100_000).unwrap();
        assert!(
            eta > TYPE_WINDOW.0 && eta < TYPE_WINDOW.1,
            "estimated type {eta}"
        );
    }

    #[test]
    fn a_half_is_flagged_rational_at_its_denominator() {
        assert_eq!(
            estimate_type(0.5, 1000),
            Err(NumTheoryError::RationalInput { m: 2 })
        );
    }

    #[test]
    fn type_estimate_is_stable_until_a_new_record_appears() {
        // Golden-ratio records sit at the Fibonacci numbers: after 89 the
        // next record is 144, so every bound in 89..144 sees the same record
        // set and must return the same fit bit for bit.
        let base = estimate_type(golden(), 89).unwrap();
        for m_max in [90u64, 100, 120, 143] {
            let again = estimate_type(golden(), m_max).unwrap();
            assert_eq!(again.to_bits(), base.to_bits(), "m_max = {m_max}");
        }
        assert_ne!(
            estimate_type(golden(), 144).unwrap().to_bits(),
            base.to_bits()
        );
    }

    #[test]
    fn probe_bound_limits_are_enforced() {
        assert!(matches!(
            estimate_type(golden(), 4),
            Err(NumTheoryError::BadParameter(_))
        ));
        assert!(matches!(
            estimate_type(golden(), MAX_PROBE_BOUND + 1),
            Err(NumTheoryError::BadParameter(_))
        ));
        assert!(matches!(
            estimate_type(f64::NAN, 100),
            Err(NumTheoryError::BadParameter(_))
        ));
    }

    #[test]
    fn decimal_quotients_of_the_golden_ratio_are_all_ones() {
        let q = continued_fraction_decimal(GOLDEN_RATIO_DECIMAL, 40).unwrap();
        assert_eq!(q.len(), 40);
        assert!(q.iter().all(|&a| a == 1), "{q:?}");
    }

    #[test]
    fn decimal_quotients_of_sqrt_two_are_one_then_twos() {
        let q = continued_fraction_decimal(SQRT2_DECIMAL, 40).unwrap();
        assert_eq!(q[0], 1);
        assert!(q[1..].iter().all(|&a| a == 2), "{q:?}");
    }

    #[test]
    fn decimal_quotients_terminate_for_exact_rationals() {
        // 2.75 = [2; 1, 3]
        assert_eq!(continued_fraction_decimal("2.75", 40).unwrap(), [2, 1, 3]);
        assert_eq!(continued_fraction_decimal("7", 40).unwrap(), [7]);
        assert_eq!(continued_fraction_decimal("-0.5", 40).unwrap(), [0, 2]);
        assert!(continued_fraction_decimal("", 40).is_err());
        assert!(continued_fraction_decimal("1.2.3", 40).is_err());
        assert!(continued_fraction_decimal("12a", 40).is_err());
    }

    #[test]
    fn float_quotients_prefix_the_decimal_expansion() {
        let exact = continued_fraction_decimal(GOLDEN_RATIO_DECIMAL, 60).unwrap();
        let float = continued_fraction_f64(golden(), REPORT_QUOTIENTS).unwrap();
        assert!(float.len() >= MIN_FLOAT_PREFIX, "only {} terms", float.len());
        assert_eq!(float[..], exact[..float.len()]);

        let exact = continued_fraction_decimal(SQRT2_DECIMAL, 60).unwrap();
        let float = continued_fraction_f64(math::sqrt(2.0), REPORT_QUOTIENTS).unwrap();
        assert!(float.len() >= 10, "only {} terms", float.len());
        assert_eq!(float[..], exact[..float.len()]);
    }

    #[test]
    fn float_quotients_handle_edge_values() {
        assert_eq!(continued_fraction_f64(0.0, 10).unwrap(), [0]);
        assert_eq!(continued_fraction_f64(-3.0, 10).unwrap(), [3]);
        assert_eq!(continued_fraction_f64(0.25, 10).unwrap(), [0, 4]);
        assert!(continued_fraction_f64(f64::INFINITY, 10).is_err());
    }

    #[test]
    fn golden_length_point_reports_constant_type() {
        // Circle of radius golden around the origin: every point on it has
        // kappa * |x0| equal to the golden ratio, the canonical
        // badly-approximable value.
        let curve = BoundaryCurve::circle([0.0, 0.0], golden(), 0.7, 0.6).unwrap();
        let x0 = curve.point(0.7);
        let report = check_point_conditions(&curve, x0, 1.0).unwrap();
        assert!(report.p1);
        assert!(report.p2);
        assert!(report.p3);
        let eta = report.radial_type.unwrap();
        assert!(eta > TYPE_WINDOW.0 && eta < TYPE_WINDOW.1, "type {eta}");
        assert!(report.radial_quotients.len() >= MIN_FLOAT_PREFIX);
        assert!(report.radial_quotients.iter().all(|&a| a == 1));
        // Centered circle: the tangential component of an on-curve point
        // vanishes, so the tangential condition fails at multiplier 1.
        assert_eq!(report.p4, Some(false));
        assert_eq!(report.tangential_type, None);
        assert_eq!(report.eta0, None);
    }

    #[test]
    fn off_center_on_curve_point_passes_all_conditions() {
        let curve = BoundaryCurve::circle([0.31, -0.24], 1.0, 0.5, 0.7).unwrap();
        let x0 = curve.point(0.8);
        let report = check_point_conditions(&curve, x0, 1.0).unwrap();
        assert!(report.p1 && report.p2 && report.p3);
        assert_eq!(report.p4, Some(true));
        let t = report.tangential_value.unwrap();
        assert!(t != 0.0);
        let eta0 = report.eta0.unwrap();
        assert!(
            eta0 >= report.radial_type.unwrap() && eta0 >= report.tangential_type.unwrap()
        );
    }

    #[test]
    fn rational_radius_fails_the_radial_condition() {
        let curve = BoundaryCurve::circle([0.0, 0.0], 1.5, 0.9, 0.6).unwrap();
        let x0 = curve.point(0.9);
        let report = check_point_conditions(&curve, x0, 1.0).unwrap();
        assert!(!report.p3);
        assert_eq!(report.radial_type, None);
        assert_eq!(report.eta0, None);
    }

    #[test]
    fn origin_on_the_curve_is_rejected_by_the_tangential_condition() {
        // Inward normal angle 0 at the origin: y(0) = (1,0) - (1,0).
        let curve = BoundaryCurve::circle([1.0, 0.0], 1.0, 0.0, 0.8).unwrap();
        let report = check_point_conditions(&curve, [0.0, 0.0], 1.0).unwrap();
        assert_eq!(report.p4, Some(false));
        assert!(!report.p3);
        assert_eq!(report.tangential_value, Some(0.0));
        assert!(report.p2);
    }

    #[test]
    fn tangency_through_the_origin_is_detected() {
        // Circle center (2, 0), radius 1: the two tangent lines through the
        // origin touch at inward normal angles +- pi / 3. The touch point
        // itself sits on such a line and must fail; nudging it off the line
        // must pass.
        let curve = BoundaryCurve::circle([2.0, 0.0], 1.0, 0.0, 1.5).unwrap();
        let theta_t = core::f64::consts::FRAC_PI_3;
        let on_line = curve.point(theta_t);
        let report = check_point_conditions(&curve, on_line, 1.0).unwrap();
        assert!(!report.p2);

        let (sv, cv) = math::sin_cos(theta_t);
        let off_line = [on_line[0] + 0.05 * cv, on_line[1] + 0.05 * sv];
        let report = check_point_conditions(&curve, off_line, 1.0).unwrap();
        assert!(report.p2);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let curve = BoundaryCurve::circle([0.0, 0.0], 1.0, 0.0, 0.5).unwrap();
        assert!(check_point_conditions(&curve, [f64::NAN, 0.0], 1.0).is_err());
        assert!(check_point_conditions(&curve, [1.0, 0.0], 0.0).is_err());
        assert!(check_point_conditions(&curve, [1.0, 0.0], f64::NAN).is_err());
    }
}
