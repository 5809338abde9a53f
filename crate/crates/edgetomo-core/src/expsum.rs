//! Oscillatory-sum probes for the lattice-resonance mechanism.
//!
//! The pointwise reconstruction error decomposes over angular frequencies
//! `m` into sums of the form
//!
//! ```text
//! W_m = sqrt(eps) | sum_k e(theta_k) g(alpha_k) | ,
//! theta_k = -m <v(alpha_k), x> / eps ,
//! ```
//!
//! where `alpha_k` runs over the detector's angle lattice, `e(t)` is the
//! unit complex exponential `exp(2 pi i t)`, and `g` gathers the boundary
//! layer seen at one fixed level of the rough-edge coordinate. When the
//! phase increments stay quantifiably away from integers the terms
//! interfere destructively and the sum decays under refinement; when
//! `kappa |x|` resonates with a rational, whole stretches of the lattice add
//! coherently and the decay stalls. This module computes such sums directly
//! ([`exp_sum_w`]), bounds them through the Kusmin-Landau inequality
//! ([`kusmin_landau_bound`] and the per-probe envelope), and provides the
//! crude decay-model envelope for modes far beyond the tabulated band
//! ([`w_sum_envelope`]).

use alloc::vec::Vec;

use crate::geometry::BoundaryCurve;
use crate::kernels::{KernelError, KernelTables};
use crate::ksum::KahanSum;
use crate::math;
use crate::numtheory::frac_dist;
use crate::profile::{JumpField, PerturbationProfile, ProfileError};
use crate::quad;
use crate::sinogram::SinogramGrid;

use core::f64::consts::TAU;

/// Envelope constant of the Kusmin-Landau bound `|sum e(theta(n))| <= c /
/// lambda`. The classical chain `cot(pi lambda / 2) <= (2 / pi) / lambda`
/// shows any `c >= 2 / pi` works; `3` was calibrated once against the
/// linear and quadratic probes in this module's tests and is recorded here
/// as an engineering constant with a wide margin.
pub const KUSMIN_LANDAU_C: f64 = 3.0;

/// Phase increments whose fractional distance falls below this floor are
/// treated as resonant: the Kusmin-Landau factor `c / lambda` would exceed
/// any realistic term count, so such stretches fall back to the trivial
/// term-count bound.
const LAMBDA_FLOOR: f64 = 1e-9;

/// Gauss-Legendre order of the level-set quadrature panels.
const G_NODES: usize = 8;

/// Panels per unit of combined sweep rate in the level-set quadrature: at
/// `1.5` a panel sees at most two thirds of one carrier cycle, where the
/// 8-point rule is accurate to ten digits.
const PANELS_PER_SWEEP: f64 = 1.5;

/// Safety factor applied to the decay-envelope constant measured on the
/// tabulated band before it is extrapolated past the band.
const ENVELOPE_MARGIN: f64 = 1.5;

/// Failures of the oscillatory-sum probes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpSumError {
    /// A parameter fails its documented precondition.
    #[error("bad parameter: {0}")]
    BadParameter(&'static str),
    /// A phase increment came closer to an integer than the stated `lambda`.
    #[error("phase increment {index} is closer to an integer than lambda")]
    PhaseGap {
        /// Index of the offending increment.
        index: usize,
    },
    /// Consecutive phase increments straddle an integer, leaving the band
    /// where the Kusmin-Landau hypothesis holds.
    #[error("phase increments cross an integer at {index}")]
    PhaseBandCrossing {
        /// Index of the first increment in the new band.
        index: usize,
    },
    /// The phase increments reversed direction.
    #[error("phase increments are not monotone at {index}")]
    PhaseNonMonotone {
        /// Index of the increment that broke the direction.
        index: usize,
    },
    /// The directly computed sum exceeded the claimed envelope; the stated
    /// `lambda` does not actually govern the phases.
    #[error("computed sum {computed} exceeds the envelope {envelope}")]
    EnvelopeExceeded {
        /// Magnitude of the directly computed sum.
        computed: f64,
        /// Claimed envelope value.
        envelope: f64,
    },
    /// Level-set extraction failed.
    #[error(transparent)]
    Profile(#[from] ProfileError),
    /// Kernel table lookup failed.
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Direct sum against a Kusmin-Landau envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSumCheck {
    /// Directly computed `|sum e(theta(n))|`.
    pub computed: f64,
    /// Envelope value `c / lambda`.
    pub envelope: f64,
}

/// One evaluation of the lattice exponential sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumProbe {
    /// Angular frequency of the probed mode.
    pub m: i64,
    /// Lattice scale the sum was evaluated at.
    pub eps: f64,
    /// Angle interval the lattice sum ranged over.
    pub interval: (f64, f64),
    /// Level of the rough-edge coordinate the `g`-factor was sliced at.
    pub t_hat: f64,
    /// Directly computed magnitude `sqrt(eps) |sum_k e(theta_k) g_k|`.
    pub w_mag: f64,
    /// Kusmin-Landau / summation-by-parts envelope of the same sum: the
    /// lattice is split into maximal stretches with monotone, integer-free
    /// phase increments, each bounded by `min(c / lambda, length)` times the
    /// variation of its weights, with resonant stretches falling back to
    /// the trivial term-count bound. `w_mag <= envelope` always; a tight
    /// gap means the phases, not the weights, control the size.
    pub envelope: f64,
    /// Number of lattice angles that entered the sum.
    pub n_terms: usize,
}

/// Directly computed `|sum_n e(theta(n))|` for explicit phase values,
/// verified against the Kusmin-Landau hypotheses.
///
/// The hypotheses are checked on the first differences of `phases` (the
/// derivative samples of the underlying phase function): every difference
/// must keep a fractional distance of at least `lambda` from the integers,
/// all differences must lie between the same two consecutive integers, and
/// they must be monotone up to the rounding noise of the inputs (direction
/// flips below a few ulps of the largest phase are ignored). The returned
/// envelope is
/// [`KUSMIN_LANDAU_C`]` / lambda`; the computed magnitude is checked
/// against it, so a violated envelope surfaces as an error instead of a
/// quietly wrong certificate.
///
/// # Errors
/// [`ExpSumError::BadParameter`] for fewer than two phases, a non-finite
/// entry, or `lambda` outside `(0, 1/2]`; [`ExpSumError::PhaseGap`],
/// [`ExpSumError::PhaseBandCrossing`], or [`ExpSumError::PhaseNonMonotone`]
/// when the increments violate the hypotheses;
/// [`ExpSumError::EnvelopeExceeded`] when the direct sum lands above the
/// envelope.
pub fn kusmin_landau_bound(phases: &[f64], lambda: f64) -> Result<PhaseSumCheck, ExpSumError> {
    if !(lambda > 0.0) || lambda > 0.5 {
        return Err(ExpSumError::BadParameter("lambda must lie in (0, 1/2]"));
    }
    if phases.len() < 2 {
        return Err(ExpSumError::BadParameter("need at least two phase values"));
    }
    if phases.iter().any(|p| !p.is_finite()) {
        return Err(ExpSumError::BadParameter("phases must be finite"));
    }
    let mut band = None;
    let mut prev_diff: Option<f64> = None;
    let mut dir = 0i8;
    // Differences of accumulated phases carry rounding noise on the order of
    // an ulp of the largest phase; direction changes below that slack are
    // noise, not a monotonicity violation.
    let peak = phases.iter().fold(1.0f64, |a, p| a.max(p.abs()));
    let slack = 16.0 * f64::EPSILON * peak;
    for (i, w) in phases.windows(2).enumerate() {
        let d = w[1] - w[0];
        if frac_dist(d) < lambda {
            return Err(ExpSumError::PhaseGap { index: i });
        }
        let b = math::floor(d);
        match band {
            None => band = Some(b),
            Some(prev) if prev != b => return Err(ExpSumError::PhaseBandCrossing { index: i }),
            Some(_) => {}
        }
        if let Some(pd) = prev_diff {
            let step = d - pd;
            let s = if step > slack {
                1
            } else if step < -slack {
                -1
            } else {
                0
            };
            if s != 0 {
                if dir == 0 {
                    dir = s;
                } else if s != dir {
                    return Err(ExpSumError::PhaseNonMonotone { index: i });
                }
            }
        }
        prev_diff = Some(d);
    }
    let ones: Vec<(f64, f64)> = alloc::vec![(1.0, 0.0); phases.len()];
    let (re, im) = phase_weighted_sum(phases, &ones);
    let computed = math::hypot(re, im);
    let envelope = KUSMIN_LANDAU_C / lambda;
    if computed > envelope {
        return Err(ExpSumError::EnvelopeExceeded { computed, envelope });
    }
    Ok(PhaseSumCheck { computed, envelope })
}

/// Evaluates the lattice exponential sum for mode `m` at level `t_hat`.
///
/// The lattice angles are those of `grid` that fall in `interval`; for each
/// the weight `g` integrates the kernel's `m`-th Fourier row against the
/// boundary layer over the level set `{u : sgn(t_hat) (H0(u) - t_hat) >= 0}`
/// of the profile, in the stretched angle `u = (theta - frame) / sqrt(eps)`,
/// with the same geometry and kernel code paths the reconstruction itself
/// uses. The phase of term `k` is `-m <v(alpha_k), x> / eps` at the
/// evaluation point `x = x0 + eps * x_check`.
///
/// The quadrature is a composite Gauss rule whose panel density follows the
/// worst-case sweep rate of the kernel argument (`(|m| + 1)` carrier and
/// envelope cycles per `R_max / sqrt(eps)` of angle), so refinement in
/// `eps` keeps the per-term accuracy near ten digits while the runtime
/// grows like the number of lattice angles.
///
/// # Errors
/// [`ExpSumError::BadParameter`] for non-finite inputs, a zero `t_hat`, an
/// empty interval, or a grid/kernel mismatch in `eps`;
/// [`ExpSumError::Kernel`] when `|m|` exceeds the tabulated Fourier band;
/// [`ExpSumError::Profile`] when the level-set extraction fails.
#[allow(clippy::too_many_arguments)]
pub fn exp_sum_w(
    tables: &KernelTables,
    field: &JumpField,
    profile: &PerturbationProfile,
    m: i64,
    grid: &SinogramGrid,
    x0: [f64; 2],
    x_check: [f64; 2],
    interval: (f64, f64),
    t_hat: f64,
) -> Result<ExpSumProbe, ExpSumError> {
    if x0.iter().chain(&x_check).any(|v| !v.is_finite()) {
        return Err(ExpSumError::BadParameter("points must be finite"));
    }
    if !t_hat.is_finite() || t_hat == 0.0 {
        return Err(ExpSumError::BadParameter(
            "level parameter must be finite and nonzero",
        ));
    }
    let (i_lo, i_hi) = interval;
    if !(i_lo < i_hi) || !i_lo.is_finite() || !i_hi.is_finite() {
        return Err(ExpSumError::BadParameter("interval must be nonempty"));
    }
    // Surface an out-of-band mode before any work happens.
    tables.psi_fourier(m, 0.0)?;

    let eps = grid.eps();
    let root = math::sqrt(eps);
    let curve = field.curve();
    let frame = curve.frame();
    let (th_lo, th_hi) = curve.theta_range();
    let sets = profile
        .level_set_intervals(((th_lo - frame) / root, (th_hi - frame) / root), t_hat, eps)?
        .intervals;

    let k_lo = math::ceil((i_lo - grid.alpha_bar()) / grid.delta_alpha()) as i64;
    let k_hi = math::floor((i_hi - grid.alpha_bar()) / grid.delta_alpha()) as i64;
    let k_lo = k_lo.max(grid.k_min());
    let k_hi = k_hi.min(grid.k_max());
    if k_lo > k_hi || sets.is_empty() {
        return Ok(ExpSumProbe {
            m,
            eps,
            interval,
            t_hat,
            w_mag: 0.0,
            envelope: 0.0,
            n_terms: if k_lo > k_hi {
                0
            } else {
                (k_hi - k_lo + 1) as usize
            },
        });
    }

    let x = [x0[0] + eps * x_check[0], x0[1] + eps * x_check[1]];
    let r_max = max_curvature_radius(curve);
    let (nodes, weights) = quad::gauss_legendre(G_NODES);

    let n_terms = (k_hi - k_lo + 1) as usize;
    let mut phases = Vec::with_capacity(n_terms);
    let mut gs = Vec::with_capacity(n_terms);
    for k in k_lo..=k_hi {
        let alpha = grid.alpha(k);
        let (sa, ca) = math::sin_cos(alpha);
        phases.push(-m as f64 * (ca * x[0] + sa * x[1]) / eps);
        gs.push(g_factor(
            tables, field, m, eps, alpha, x, t_hat, &sets, &nodes, &weights, r_max,
        )?);
    }

    let (re, im) = phase_weighted_sum(&phases, &gs);
    let w_mag = root * math::hypot(re, im);
    let envelope = root * abel_kusmin_envelope(&phases, &gs);
    Ok(ExpSumProbe {
        m,
        eps,
        interval,
        t_hat,
        w_mag,
        envelope,
        n_terms,
    })
}

/// Decay-model envelope of the lattice sum for arbitrary mode `m`.
///
/// The kernel's Fourier rows obey `|row_m| <= C rho(m) / (1 + t^2)` with
/// `rho(m) = (1 + |m|^beta)^{-1}`; the constant is measured on the
/// tabulated band (with margin [`ENVELOPE_MARGIN`]) and the model is
/// extrapolated past the band, which is exactly where direct evaluation
/// stops being possible. Combining it with the trivial term count, the
/// layer thickness, and the level-set length bounds the sum by
///
/// ```text
/// sqrt(eps) * n_terms * C * rho(m) * |jump| * (R_max + eps |t_hat|) * L ,
/// ```
///
/// `L` the total level-set length. This is evidence for the tail regime
/// (modes with `rho(m)` below any tolerance contribute nothing visible),
/// not a certificate: past the band the constant is a model.
///
/// # Errors
/// As [`exp_sum_w`], except any `m` is accepted.
pub fn w_sum_envelope(
    tables: &KernelTables,
    field: &JumpField,
    profile: &PerturbationProfile,
    m: i64,
    grid: &SinogramGrid,
    interval: (f64, f64),
    t_hat: f64,
) -> Result<f64, ExpSumError> {
    if !t_hat.is_finite() || t_hat == 0.0 {
        return Err(ExpSumError::BadParameter(
            "level parameter must be finite and nonzero",
        ));
    }
    let (i_lo, i_hi) = interval;
    if !(i_lo < i_hi) || !i_lo.is_finite() || !i_hi.is_finite() {
        return Err(ExpSumError::BadParameter("interval must be nonempty"));
    }
    let eps = grid.eps();
    let root = math::sqrt(eps);
    let curve = field.curve();
    let frame = curve.frame();
    let (th_lo, th_hi) = curve.theta_range();
    let sets =
        profile.level_set_intervals(((th_lo - frame) / root, (th_hi - frame) / root), t_hat, eps)?;
    let level_len = sets.total_length();

    let k_lo = (math::ceil((i_lo - grid.alpha_bar()) / grid.delta_alpha()) as i64).max(grid.k_min());
    let k_hi = (math::floor((i_hi - grid.alpha_bar()) / grid.delta_alpha()) as i64).min(grid.k_max());
    if k_lo > k_hi {
        return Ok(0.0);
    }
    let n_terms = (k_hi - k_lo + 1) as f64;

    let beta = tables.config().smoothness_order;
    let rho = 1.0 / (1.0 + math::powf(m.unsigned_abs() as f64, beta));
    let c_env = measured_row_envelope_constant(tables);
    let r_max = max_curvature_radius(curve);
    let thickness = field.amplitude().abs() * (r_max + eps * t_hat.abs());
    Ok(root * n_terms * c_env * rho * thickness * level_len)
}

/// Weight factor of one lattice term: the kernel's `m`-th Fourier row
/// integrated against the boundary layer over the level-set intervals, in
/// the stretched angle variable.
#[allow(clippy::too_many_arguments)]
fn g_factor(
    tables: &KernelTables,
    field: &JumpField,
    m: i64,
    eps: f64,
    alpha: f64,
    x: [f64; 2],
    t_hat: f64,
    sets: &[(f64, f64)],
    nodes: &[f64],
    weights: &[f64],
    r_max: f64,
) -> Result<(f64, f64), ExpSumError> {
    let curve = field.curve();
    let frame = curve.frame();
    let root = math::sqrt(eps);
    let (sa, ca) = math::sin_cos(alpha);
    // Combined sweep rate of the kernel argument per unit of stretched
    // angle: the carrier adds |m| cycles and the row's own profile one more.
    let sweep = (m.unsigned_abs() as f64 + 1.0) * (r_max / root + root * t_hat.abs());
    let mut acc_re = KahanSum::new();
    let mut acc_im = KahanSum::new();
    for &(ua, ub) in sets {
        let len = ub - ua;
        if !(len > 0.0) {
            continue;
        }
        let panels = (math::ceil(PANELS_PER_SWEEP * sweep * len) as usize).max(2);
        let width = len / panels as f64;
        for p in 0..panels {
            let mid = ua + width * (p as f64 + 0.5);
            let half = 0.5 * width;
            for (&node, &wgt) in nodes.iter().zip(weights) {
                let u = mid + half * node;
                let theta = frame + root * u;
                let df = field.delta_f(theta);
                if df == 0.0 {
                    continue;
                }
                let y = curve.point(theta);
                let radius = curve.curvature_radius(theta);
                let arg = (ca * (y[0] - x[0]) + sa * (y[1] - x[1])) / eps
                    + t_hat * math::cos(theta - alpha);
                let (pr, pi) = tables.psi_fourier(m, arg)?;
                let f_val = df * (radius - eps * t_hat) * wgt * half;
                acc_re.add(f_val * pr);
                acc_im.add(f_val * pi);
            }
        }
    }
    Ok((acc_re.total(), acc_im.total()))
}

/// `sum_k e(phases[k]) * weights[k]` with compensated accumulation.
fn phase_weighted_sum(phases: &[f64], weights: &[(f64, f64)]) -> (f64, f64) {
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (&p, &(gr, gi)) in phases.iter().zip(weights) {
        let (sv, cv) = math::sin_cos(TAU * math::fract_pos(p));
        re.add(gr * cv - gi * sv);
        im.add(gi * cv + gr * sv);
    }
    (re.total(), im.total())
}

/// Summation-by-parts envelope: split the lattice into maximal stretches
/// with monotone, integer-free phase increments, bound each stretch's phase
/// sums by `min(c / lambda, length)`, and multiply by the weight variation.
fn abel_kusmin_envelope(phases: &[f64], weights: &[(f64, f64)]) -> f64 {
    let n = phases.len();
    if n == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut start = 0usize;
    while start < n {
        let mut end = start;
        let mut lambda = f64::INFINITY;
        let mut band: Option<f64> = None;
        let mut dir = 0i8;
        let mut prev_diff: Option<f64> = None;
        while end + 1 < n {
            let d = phases[end + 1] - phases[end];
            let fd = frac_dist(d);
            if fd < LAMBDA_FLOOR {
                break;
            }
            let b = math::floor(d);
            if let Some(prev) = band {
                if prev != b {
                    break;
                }
            }
            if let Some(pd) = prev_diff {
                let step = d - pd;
                let s = if step > 0.0 {
                    1
                } else if step < 0.0 {
                    -1
                } else {
                    0
                };
                if s != 0 {
                    if dir == 0 {
                        dir = s;
                    } else if s != dir {
                        break;
                    }
                }
            }
            band = Some(b);
            lambda = lambda.min(fd);
            prev_diff = Some(d);
            end += 1;
        }
        let len = end - start + 1;
        let phase_bound = if len == 1 {
            1.0
        } else {
            (KUSMIN_LANDAU_C / lambda).min(len as f64)
        };
        let seg = &weights[start..=end];
        let last = seg[len - 1];
        let mut variation = math::hypot(last.0, last.1);
        for w in seg.windows(2) {
            variation += math::hypot(w[1].0 - w[0].0, w[1].1 - w[0].1);
        }
        total += phase_bound * variation;
        start = end + 1;
    }
    total
}

/// Largest curvature radius over the arc (scan with the construction-time
/// convexity guarantee as a floor).
fn max_curvature_radius(curve: &BoundaryCurve) -> f64 {
    let (lo, hi) = curve.theta_range();
    let mut r_max = curve.min_curvature_radius();
    for i in 0..=128 {
        let theta = lo + (hi - lo) * i as f64 / 128.0;
        r_max = r_max.max(curve.curvature_radius(theta));
    }
    r_max
}

/// Measures the decay-envelope constant `max |row_m(t)| (1 + m^beta)
/// (1 + t^2)` over the tabulated band, with margin.
fn measured_row_envelope_constant(tables: &KernelTables) -> f64 {
    let band = tables.config().fourier_max as i64;
    let beta = tables.config().smoothness_order;
    let mut c = 0.0f64;
    for m in 0..=band {
        for i in 0..=80 {
            let t = -20.0 + 0.5 * i as f64;
            // Inside the band the lookup cannot fail.
            let (re, im) = tables.psi_fourier(m, t).unwrap_or((0.0, 0.0));
            let model = 1.0 / ((1.0 + math::powf(m as f64, beta)) * (1.0 + t * t));
            c = c.max(math::hypot(re, im) / model);
        }
    }
    ENVELOPE_MARGIN * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::KernelConfig;
    use crate::rate;
    use core::f64::consts::{FRAC_PI_2, PI};
    use std::sync::OnceLock;

    /// Tolerances and probe settings used by this module's tests.
    const GEOMETRIC_MATCH: f64 = 1e-10;
    const QUAD_CROSS_REL: f64 = 1e-7;
    const LEVEL: f64 = 0.35;
    const FRAME: f64 = 0.5;
    const P_BAR: f64 = 0.0417;
    const A_BAR: f64 = 0.0831;

    fn tables() -> &'static KernelTables {
        static TABLES: OnceLock<KernelTables> = OnceLock::new();
        TABLES.get_or_init(|| KernelTables::build(KernelConfig::default()).expect("tables"))
    }

    /// Unit-circle arc through `offset * tangent(FRAME)`, so the probe point
    /// sits on the curve with its position vector along the tangent there.
    /// That alignment puts the stationary angle of the phase increment at the
    /// window center, where the angular weight peaks, so the arithmetic of
    /// `kappa * |x0| = offset` alone decides resonance versus decay.
    fn tangent_offset_scene(offset: f64) -> (JumpField, PerturbationProfile) {
        let (sf, cf) = math::sin_cos(FRAME);
        let x0 = [offset * sf, -offset * cf];
        let center = [x0[0] + cf, x0[1] + sf];
        let curve = BoundaryCurve::circle(center, 1.0, FRAME, 0.5).expect("arc");
        (
            JumpField::new(curve, 1.0),
            PerturbationProfile::single_bump(0.9).expect("profile"),
        )
    }

    fn golden_scene() -> (JumpField, PerturbationProfile) {
        tangent_offset_scene((1.0 + math::sqrt(5.0)) / 2.0)
    }

    fn resonant_scene() -> (JumpField, PerturbationProfile) {
        tangent_offset_scene(1.5)
    }

    fn layer_grid(field: &JumpField, profile: &PerturbationProfile, eps: f64) -> SinogramGrid {
        SinogramGrid::for_layer(field, profile, tables().aperture(), eps, 1.0, P_BAR, A_BAR)
            .expect("grid")
    }

    fn probe(
        field: &JumpField,
        profile: &PerturbationProfile,
        m: i64,
        eps: f64,
    ) -> ExpSumProbe {
        let grid = layer_grid(field, profile, eps);
        let x0 = field.curve().point(field.curve().frame());
        exp_sum_w(
            tables(),
            field,
            profile,
            m,
            &grid,
            x0,
            [0.0, 0.0],
            (field.curve().frame() - FRAC_PI_2, field.curve().frame() + FRAC_PI_2),
            LEVEL,
        )
        .expect("probe")
    }

    #[test]
    fn unit_weight_phase_sum_matches_the_geometric_closed_form() {
        // |sum_{k<N} e(k d)| = |sin(pi N d) / sin(pi d)| for any d not an
        // integer; a full period (N d integral) collapses the sum to zero.
        for &(d, n) in &[(0.3f64, 1000usize), (0.137, 513), (0.25, 16), (1.0 / 7.0, 7000)] {
            let phases: Vec<f64> = (0..n).map(|k| d * k as f64).collect();
            let ones: Vec<(f64, f64)> = alloc::vec![(1.0, 0.0); n];
            let (re, im) = phase_weighted_sum(&phases, &ones);
            let computed = math::hypot(re, im);
            let oracle = (math::sin(PI * n as f64 * d) / math::sin(PI * d)).abs();
            assert!(
                (computed - oracle).abs() <= GEOMETRIC_MATCH * n as f64,
                "d = {d}, n = {n}: {computed} vs {oracle}"
            );
        }
    }

    #[test]
    fn linear_phase_obeys_the_geometric_oracle() {
        let n = 10_000usize;
        // Keep lambda a hair below the nominal slope: the increments are
        // recovered as differences of accumulated phases, so they wobble by
        // an ulp of the largest phase and would otherwise trip the gap check.
        let lambda = 0.3 - 1e-9;
        let phases: Vec<f64> = (0..n).map(|k| 0.3 * k as f64).collect();
        let check = kusmin_landau_bound(&phases, lambda).expect("linear phase is admissible");
        let oracle = (math::sin(PI * n as f64 * 0.3) / math::sin(PI * 0.3)).abs();
        assert!((check.computed - oracle).abs() <= 1e-8 * n as f64);
        // Ten thousand terms of a full-period lattice cancel almost exactly,
        // landing far under the half-cosecant peak of the geometric series.
        assert!(check.computed <= 1.0 / (2.0 * math::sin(0.3 * PI)));
        assert!((check.envelope - KUSMIN_LANDAU_C / lambda).abs() < 1e-12);
    }

    #[test]
    fn integer_crossings_and_reversals_are_rejected() {
        // Quadratic phase whose increments sweep 0.7 .. 1.3: they come
        // closer to 1 than lambda before they cross it.
        let n = 200usize;
        let phases: Vec<f64> = (0..n)
            .map(|k| {
                let kf = k as f64;
                0.7 * kf + 0.3 * kf * kf / (n as f64 - 1.0)
            })
            .collect();
        assert!(matches!(
            kusmin_landau_bound(&phases, 0.25),
            Err(ExpSumError::PhaseGap { .. })
        ));

        // Coarse jumps that hop over the integer without entering the gap.
        let steps = [0.4f64, 0.4, 1.4];
        let mut phases = alloc::vec![0.0f64];
        for s in steps {
            phases.push(phases.last().unwrap() + s);
        }
        assert!(matches!(
            kusmin_landau_bound(&phases, 0.1),
            Err(ExpSumError::PhaseBandCrossing { index: 2 })
        ));

        let steps = [0.3f64, 0.4, 0.3];
        let mut phases = alloc::vec![0.0f64];
        for s in steps {
            phases.push(phases.last().unwrap() + s);
        }
        assert!(matches!(
            kusmin_landau_bound(&phases, 0.1),
            Err(ExpSumError::PhaseNonMonotone { index: 2 })
        ));

        assert!(kusmin_landau_bound(&[0.0], 0.1).is_err());
        assert!(kusmin_landau_bound(&[0.0, 0.3], 0.0).is_err());
        assert!(kusmin_landau_bound(&[0.0, f64::NAN], 0.1).is_err());
    }

    #[test]
    fn quadratic_phase_stays_under_the_envelope() {
        let n = 2000usize;
        let phases: Vec<f64> = (0..n)
            .map(|k| {
                let kf = k as f64;
                0.11 * kf + 0.3 * kf * kf / n as f64
            })
            .collect();
        let check = kusmin_landau_bound(&phases, 0.1).expect("quadratic phase is admissible");
        assert!(check.computed <= check.envelope);
        assert!((check.envelope - KUSMIN_LANDAU_C / 0.1).abs() < 1e-12);
    }

    #[test]
    fn probe_vanishes_when_the_level_misses_the_profile() {
        let (field, profile) = golden_scene();
        let grid = layer_grid(&field, &profile, 0.03125);
        let x0 = field.curve().point(0.5);
        let window = (FRAME - FRAC_PI_2, FRAME + FRAC_PI_2);

        // A level above the profile's range has an empty level set.
        let high = exp_sum_w(
            tables(),
            &field,
            &profile,
            1,
            &grid,
            x0,
            [0.0, 0.0],
            window,
            profile.sup_bound() + 0.5,
        )
        .unwrap();
        assert_eq!(high.w_mag, 0.0);
        assert_eq!(high.envelope, 0.0);

        // An interval with no lattice angles contributes no terms.
        let empty = exp_sum_w(
            tables(),
            &field,
            &profile,
            1,
            &grid,
            x0,
            [0.0, 0.0],
            (9.0, 9.1),
            LEVEL,
        )
        .unwrap();
        assert_eq!(empty.n_terms, 0);
        assert_eq!(empty.w_mag, 0.0);
    }

    #[test]
    fn weight_quadrature_matches_an_adaptive_cross_check() {
        let (field, profile) = golden_scene();
        let eps = 0.0625;
        let root = math::sqrt(eps);
        let curve = field.curve();
        let frame = curve.frame();
        let (th_lo, th_hi) = curve.theta_range();
        let sets = profile
            .level_set_intervals(((th_lo - frame) / root, (th_hi - frame) / root), LEVEL, eps)
            .unwrap()
            .intervals;
        assert!(!sets.is_empty());
        let (nodes, weights) = quad::gauss_legendre(G_NODES);
        let r_max = max_curvature_radius(curve);
        let alpha = 0.61;
        let x0 = curve.point(frame);
        let m = 1i64;
        let fast = g_factor(
            tables(),
            &field,
            m,
            eps,
            alpha,
            x0,
            LEVEL,
            &sets,
            &nodes,
            &weights,
            r_max,
        )
        .unwrap();

        let (sa, ca) = math::sin_cos(alpha);
        let part = |imag: bool| {
            let mut total = 0.0;
            for &(ua, ub) in &sets {
                let mut f = |u: f64| {
                    let theta = frame + root * u;
                    let y = curve.point(theta);
                    let arg = (ca * (y[0] - x0[0]) + sa * (y[1] - x0[1])) / eps
                        + LEVEL * math::cos(theta - alpha);
                    let (pr, pi) = tables().psi_fourier(m, arg).unwrap();
                    let f_val =
                        field.delta_f(theta) * (curve.curvature_radius(theta) - eps * LEVEL);
                    f_val * if imag { pi } else { pr }
                };
                let (v, err) =
                    quad::adaptive_checked(&mut f, ua, ub, 1e-11, 24);
                assert!(err < 1e-9);
                total += v;
            }
            total
        };
        let slow = (part(false), part(true));
        let scale = math::hypot(slow.0, slow.1).max(1e-12);
        assert!(
            math::hypot(fast.0 - slow.0, fast.1 - slow.1) <= QUAD_CROSS_REL * scale,
            "fast {fast:?} vs adaptive {slow:?}"
        );
    }

    #[test]
    fn generic_point_decays_under_refinement() {
        let (field, profile) = golden_scene();
        let eps: Vec<f64> = (5..=8).map(|k| math::powi(2.0, -k)).collect();
        let mags: Vec<f64> = eps.iter().map(|&e| probe(&field, &profile, 1, e).w_mag).collect();
        let fit = rate::fit_power_law(&eps, &mags).expect("positive magnitudes");
        assert!(
            fit.rate >= 0.4,
            "fitted decay rate {} from {mags:?}",
            fit.rate
        );
    }

    #[test]
    fn rational_offset_resonates_while_the_golden_one_decays() {
        // kappa |x0| = 3/2 makes the mode m = 2 phase increments touch the
        // integer 3 exactly where they are stationary, so those terms add
        // coherently and refinement does not drain the sum the way it does
        // at the golden-length point.
        let (res_field, res_profile) = resonant_scene();
        let (gen_field, gen_profile) = golden_scene();
        let eps = [0.03125, 0.015625, 0.0078125, 0.00390625];
        let res: Vec<f64> = eps
            .iter()
            .map(|&e| probe(&res_field, &res_profile, 2, e).w_mag)
            .collect();
        let gen: Vec<f64> = eps
            .iter()
            .map(|&e| probe(&gen_field, &gen_profile, 2, e).w_mag)
            .collect();
        let res_fit = rate::fit_power_law(&eps, &res).expect("positive magnitudes");
        let gen_fit = rate::fit_power_law(&eps, &gen).expect("positive magnitudes");
        assert!(
            res_fit.rate < 0.1,
            "resonant magnitudes should not decay: rate {} from {res:?}",
            res_fit.rate
        );
        assert!(
            gen_fit.rate > 0.3,
            "golden-length magnitudes should decay: rate {} from {gen:?}",
            gen_fit.rate
        );
        assert!(
            res.last().unwrap() > &(5.0 * gen.last().unwrap()),
            "resonant {res:?} vs generic {gen:?}"
        );
    }

    #[test]
    fn probe_magnitude_stays_under_its_envelope() {
        let (field, profile) = golden_scene();
        for m in [0i64, 1, 2, 5] {
            let p = probe(&field, &profile, m, 0.015625);
            assert!(
                p.w_mag <= p.envelope * (1.0 + 1e-9),
                "m = {m}: {} vs {}",
                p.w_mag,
                p.envelope
            );
        }
        let (field, profile) = resonant_scene();
        let p = probe(&field, &profile, 2, 0.015625);
        assert!(p.w_mag <= p.envelope * (1.0 + 1e-9));
    }

    #[test]
    fn far_modes_fall_under_the_decay_model_envelope() {
        let (field, profile) = golden_scene();
        let grid = layer_grid(&field, &profile, 0.015625);
        let m = 2048i64;
        let beta = tables().config().smoothness_order;
        let rho = 1.0 / (1.0 + math::powf(m as f64, beta));
        assert!(rho < 1e-10, "rho({m}) = {rho}");
        let bound = w_sum_envelope(
            tables(),
            &field,
            &profile,
            m,
            &grid,
            (FRAME - FRAC_PI_2, FRAME + FRAC_PI_2),
            LEVEL,
        )
        .unwrap();
        assert!(bound < 1e-8, "envelope {bound}");
        // Direct evaluation of such a mode is out of the tabulated band and
        // says so instead of fabricating a value.
        assert!(matches!(
            exp_sum_w(
                tables(),
                &field,
                &profile,
                m,
                &grid,
                [0.0, 0.0],
                [0.0, 0.0],
                (0.0, 1.0),
                LEVEL
            ),
            Err(ExpSumError::Kernel(KernelError::FourierRange(_, _)))
        ));
    }

    #[test]
    fn bad_probe_inputs_are_rejected() {
        let (field, profile) = golden_scene();
        let grid = layer_grid(&field, &profile, 0.03125);
        let x0 = field.curve().point(0.5);
        let window = (0.0, 1.0);
        assert!(matches!(
            exp_sum_w(tables(), &field, &profile, 1, &grid, x0, [0.0, 0.0], window, 0.0),
            Err(ExpSumError::BadParameter(_))
        ));
        assert!(matches!(
            exp_sum_w(
                tables(),
                &field,
                &profile,
                1,
                &grid,
                [f64::NAN, 0.0],
                [0.0, 0.0],
                window,
                LEVEL
            ),
            Err(ExpSumError::BadParameter(_))
        ));
        assert!(matches!(
            exp_sum_w(tables(), &field, &profile, 1, &grid, x0, [0.0, 0.0], (1.0, 1.0), LEVEL),
            Err(ExpSumError::BadParameter(_))
        ));
        assert!(matches!(
            w_sum_envelope(tables(), &field, &profile, 1, &grid, window, f64::NAN),
            Err(ExpSumError::BadParameter(_))
        ));
    }
}
