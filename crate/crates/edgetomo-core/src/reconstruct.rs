//! Pointwise filtered backprojection and its transition-limit comparison.
//!
//! Filtered backprojection turns the sampled sinogram back into image values
//! through a double lattice sum: each row is filtered with the Hilbert
//! derivative of the interpolation kernel and the rows are accumulated over
//! the angular window,
//!
//! ```text
//! f_rec(x) = (da / (2 pi eps)) * sum_k sum_j Hphi'((<v_k, x> - p_j) / eps) * fhat(k, j).
//! ```
//!
//! Near a jump across a rough boundary the reconstruction does not converge
//! pointwise as the sampling refines. Instead, on the zoomed patch
//! `x = x0 + eps * xc` it tracks the discrete transition behavior
//!
//! ```text
//! DTB(xc, eps) = eps^{-2} * ∬ K((x - y) / eps) f_eps(y) dy,
//! ```
//!
//! the convolution of the jump layer with the radial transition kernel `K`.
//! This module evaluates both quantities point by point and assembles zoomed
//! patches of their difference, the data behind the scaling measurements of
//! the reconstruction error.
//!
//! A third evaluator exposes the angular density behind the transition
//! integral: the dc lattice mode
//!
//! ```text
//! A0(alpha, eps) = eps^{-2} * ∬ psi_0((<v(alpha), y - x>) / eps) f_eps(y) dy
//! ```
//!
//! satisfies `DTB = (1/2pi) * int A0(alpha) dalpha` over any half turn, and
//! the accuracy of its angular Riemann sums is one of the quantities the
//! scaling analysis tracks.
//!
//! All layer integrals run in boundary coordinates `y = y(theta) + t * v(theta)`
//! with the exact Jacobian `R(theta) - t`: an outer adaptive quadrature in
//! `theta`, split at the profile's jump and kink images, and an inner fixed
//! Gauss rule across the layer thickness, which is smooth on the kernel scale.

use alloc::vec::Vec;

use core::f64::consts::{PI, TAU};

use crate::geometry::{BoundaryCurve, PointClass};
use crate::kernels::KernelTables;
use crate::ksum::KahanSum;
use crate::math;
use crate::profile::{JumpField, PerturbationProfile};
use crate::quad;
use crate::sinogram::Sinogram;

/// Gauss order for the through-thickness integral of transition evaluations.
/// The kernel argument moves by at most `sup|H0|` kernel units across the
/// layer, a couple of units for the profiles in use, so sixteen nodes leave
/// the thickness integral exact to well below the angular tolerance.
const T_NODES: usize = 16;

/// Absolute tolerance factor for the angular quadrature of one transition
/// value, as a fraction of the natural magnitude
/// `K(0) * eps * sup|H0| * |amplitude| * R_max * window`. After the
/// `1/eps^2` prefactor this holds transition values to about `1e-7` of their
/// peak scale, inside the `1e-6` relative target.
const DTB_TOL_FACTOR: f64 = 1e-8;

/// Depth cap for the transition quadrature. The window spans a few dozen
/// profile oscillations at the deepest sampling scale; 26 halvings resolve
/// features six orders below that.
const DTB_MAX_DEPTH: u32 = 26;

/// Absolute tolerance factor for the angular-density quadrature, relative to
/// `|psi_0(0)| * eps * sup|H0| * |amplitude| * R_max * arc`. The density is
/// only ever consumed through cell-size differences of order `eps^{1/2}`, so
/// this keeps quadrature noise several orders below the measured signal.
const A0_TOL_FACTOR: f64 = 1e-7;

/// Depth cap for the angular-density quadrature, which sweeps the whole arc:
/// the kernel argument varies on the sampling scale, so more levels are
/// needed than for the windowed transition integral.
const A0_MAX_DEPTH: u32 = 30;

/// Accepted-error slack before a quadrature result is rejected: estimates up
/// to this multiple of the requested tolerance still round to answers within
/// the target, anything beyond signals an unresolved integrand.
const FAIL_FACTOR: f64 = 4.0;

/// Number of cells used to bracket the kernel footprint on the arc. The
/// footprint is located from samples of the distance to the evaluation
/// point, padded by one Lipschitz step, so a finer scan only trims dead
/// margin from the quadrature window.
const WINDOW_SCAN: usize = 1024;

/// Reconstruction-side failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReconstructError {
    /// A parameter is outside its valid domain.
    #[error("invalid parameter: {0}")]
    BadParameter(&'static str),
    /// An adaptive quadrature hit its depth cap before reaching the target.
    #[error("{what} quadrature achieved {achieved:.3e}, requested {requested:.3e}")]
    Accuracy {
        /// Which integral failed.
        what: &'static str,
        /// Requested absolute tolerance.
        requested: f64,
        /// Error estimate actually achieved.
        achieved: f64,
    },
}

/// Filtered backprojection of a sampled sinogram at one image point.
///
/// Rows are consumed in ascending angle order and cells in ascending offset
/// order, with compensated accumulation, so the result is bit-reproducible
/// regardless of how the sinogram was assembled. The filter lookup covers
/// every argument: inside the tabulated range it interpolates the table, and
/// beyond it the certified far-field series `-(1/pi) (1/s^2 + 3 m2 / s^4)`
/// supplies the tail, so distant cells contribute their exact asymptotic
/// correction rather than being truncated.
///
/// Zero cells are skipped; they are exact zeros by construction of the
/// samplers, so the skip does not change the sum.
pub fn fbp_point(sino: &Sinogram, tables: &KernelTables, x: [f64; 2]) -> f64 {
    let grid = sino.grid();
    let eps = grid.eps();
    let mut acc = KahanSum::new();
    for k in grid.k_min()..=grid.k_max() {
        let alpha = grid.alpha(k);
        let (sv, cv) = math::sin_cos(alpha);
        // Offsets step by exactly eps, so the filter argument steps by
        // exactly one cell per column.
        let mut s = (cv * x[0] + sv * x[1] - grid.p_bar()) / eps - grid.j_min() as f64;
        for &v in sino.row(k) {
            if v != 0.0 {
                acc.add(tables.hilbert_deriv(s) * v);
            }
            s -= 1.0;
        }
    }
    acc.total() * grid.delta_alpha() / (TAU * eps)
}

/// Discrete transition behavior at the zoomed offset `xc` from `x0`:
/// `eps^{-2} ∬ K((x - y)/eps) f_eps(y) dy` with `x = x0 + eps * xc`.
///
/// The kernel footprint reaches at most `eps * (r_K + sup|H0|)` from `x`, so
/// the angular quadrature runs only over the bracketed stretch of arc whose
/// points come that close; when no arc point does, the value is an exact
/// zero. Inside the window the integrand splits at the images of the
/// profile's jumps and kinks, and the thickness integral uses a fixed Gauss
/// rule, exact to far below the angular tolerance because the kernel is
/// smooth on the layer scale.
///
/// # Errors
/// [`ReconstructError::BadParameter`] for non-finite inputs or `eps <= 0`;
/// [`ReconstructError::Accuracy`] when the angular quadrature cannot reach
/// its tolerance.
pub fn dtb_point(
    field: &JumpField,
    profile: &PerturbationProfile,
    tables: &KernelTables,
    x0: [f64; 2],
    xc: [f64; 2],
    eps: f64,
) -> Result<f64, ReconstructError> {
    check_point_inputs(x0, xc, eps)?;
    let sup_h = profile.sup_bound();
    let amp = field.amplitude();
    if sup_h == 0.0 || amp == 0.0 {
        return Ok(0.0);
    }
    let x = [x0[0] + eps * xc[0], x0[1] + eps * xc[1]];
    let curve = field.curve();
    // Half a unit of padding past the tabulated kernel edge keeps the cutoff
    // conservative; the table is certified negligible out there.
    let reach = eps * (tables.transition_support() + sup_h + 0.5);
    let Some((th_lo, th_hi, r_max)) = kernel_window(curve, x, reach) else {
        return Ok(0.0);
    };

    let (nodes, weights) = quad::gauss_legendre(T_NODES);
    let frame = curve.frame();
    let rt_eps = math::sqrt(eps);
    let mut breaks = profile.breakpoints((th_lo - frame) / rt_eps, (th_hi - frame) / rt_eps);
    for b in &mut breaks {
        *b = frame + *b * rt_eps;
    }

    let mut g = |theta: f64| -> f64 {
        let h = profile.h_eps(theta - frame, eps);
        if h == 0.0 {
            return 0.0;
        }
        let df = field.delta_f(theta);
        if df == 0.0 {
            return 0.0;
        }
        let y = curve.point(theta);
        let (sv, cv) = math::sin_cos(theta);
        let r = curve.curvature_radius(theta);
        let (t_lo, t_hi, sign) = if h > 0.0 { (0.0, h, 1.0) } else { (h, 0.0, -1.0) };
        let mid = 0.5 * (t_lo + t_hi);
        let half = 0.5 * (t_hi - t_lo);
        let mut inner = 0.0;
        for (xi, wgt) in nodes.iter().zip(weights.iter()) {
            let t = mid + half * xi;
            let dx = x[0] - y[0] - t * cv;
            let dy = x[1] - y[1] - t * sv;
            let kv = tables.dtb_kernel(math::sqrt(dx * dx + dy * dy) / eps);
            if kv != 0.0 {
                inner += wgt * kv * (r - t);
            }
        }
        df * sign * half * inner
    };

    let scale = tables.dtb_kernel(0.0).abs() * eps * sup_h * amp.abs() * r_max * (th_hi - th_lo);
    let tol = DTB_TOL_FACTOR * scale;
    let (value, err) = quad::adaptive_with_breakpoints_checked(&mut g, th_lo, th_hi, &breaks, tol, DTB_MAX_DEPTH);
    if err > FAIL_FACTOR * tol {
        return Err(ReconstructError::Accuracy {
            what: "transition kernel",
            requested: tol,
            achieved: err,
        });
    }
    Ok(value / (eps * eps))
}

/// Angular density of the transition integral at viewing angle `alpha`:
/// `A0(alpha) = eps^{-2} ∬ psi_0((<v(alpha), y - x>) / eps) f_eps(y) dy`
/// with `x = x0 + eps * xc` and `psi_0` the dc Fourier row of the lattice
/// kernel. Averaging over a half turn recovers the transition value,
/// `DTB = (1/2pi) int A0(alpha) dalpha`, and the gap between the angular
/// Riemann sums of `A0` and that integral is one of the measured error
/// contributions.
///
/// The dc row has a slowly decaying tail, so the quadrature sweeps the whole
/// arc; it splits at the profile's jump and kink images and at the tangency
/// angles `theta = alpha mod pi`, where the argument of `psi_0` turns around.
///
/// # Errors
/// [`ReconstructError::BadParameter`] for non-finite inputs or `eps <= 0`;
/// [`ReconstructError::Accuracy`] when the quadrature cannot reach its
/// tolerance.
pub fn a0_point(
    field: &JumpField,
    profile: &PerturbationProfile,
    tables: &KernelTables,
    x0: [f64; 2],
    xc: [f64; 2],
    eps: f64,
    alpha: f64,
) -> Result<f64, ReconstructError> {
    check_point_inputs(x0, xc, eps)?;
    if !alpha.is_finite() {
        return Err(ReconstructError::BadParameter("alpha must be finite"));
    }
    let sup_h = profile.sup_bound();
    let amp = field.amplitude();
    if sup_h == 0.0 || amp == 0.0 {
        return Ok(0.0);
    }
    let x = [x0[0] + eps * xc[0], x0[1] + eps * xc[1]];
    let curve = field.curve();
    let (th_lo, th_hi) = curve.theta_range();
    let frame = curve.frame();
    let rt_eps = math::sqrt(eps);
    let mut breaks = profile.breakpoints((th_lo - frame) / rt_eps, (th_hi - frame) / rt_eps);
    for b in &mut breaks {
        *b = frame + *b * rt_eps;
    }
    // Turning points of the density argument: <v(alpha), y'(theta)> vanishes
    // where theta is a tangency angle of the viewing direction.
    for n in -2..=2 {
        let th = alpha + n as f64 * PI;
        if th > th_lo && th < th_hi {
            breaks.push(th);
        }
    }

    let (nodes, weights) = quad::gauss_legendre(T_NODES);
    let (sv_a, cv_a) = math::sin_cos(alpha);
    // The dc row is always inside the tabulated band, so the lookup cannot
    // fail; route it through a closure to keep the integrand infallible.
    let psi0 = |u: f64| -> f64 {
        match tables.psi_fourier(0, u) {
            Ok((re, _)) => re,
            Err(_) => 0.0,
        }
    };

    let mut r_max = 0.0f64;
    let mut g = |theta: f64| -> f64 {
        let h = profile.h_eps(theta - frame, eps);
        if h == 0.0 {
            return 0.0;
        }
        let df = field.delta_f(theta);
        if df == 0.0 {
            return 0.0;
        }
        let y = curve.point(theta);
        let (sv, cv) = math::sin_cos(theta);
        let r = curve.curvature_radius(theta);
        let (t_lo, t_hi, sign) = if h > 0.0 { (0.0, h, 1.0) } else { (h, 0.0, -1.0) };
        let mid = 0.5 * (t_lo + t_hi);
        let half = 0.5 * (t_hi - t_lo);
        let mut inner = 0.0;
        for (xi, wgt) in nodes.iter().zip(weights.iter()) {
            let t = mid + half * xi;
            let u = (cv_a * (y[0] + t * cv - x[0]) + sv_a * (y[1] + t * sv - x[1])) / eps;
            inner += wgt * psi0(u) * (r - t);
        }
        df * sign * half * inner
    };

    // Crude curvature-radius bound for the tolerance scale only.
    for i in 0..=128 {
        let th = th_lo + (th_hi - th_lo) * i as f64 / 128.0;
        r_max = r_max.max(curve.curvature_radius(th));
    }
    let scale = psi0(0.0).abs() * eps * sup_h * amp.abs() * r_max * (th_hi - th_lo);
    let tol = A0_TOL_FACTOR * scale;
    let (value, err) = quad::adaptive_with_breakpoints_checked(&mut g, th_lo, th_hi, &breaks, tol, A0_MAX_DEPTH);
    if err > FAIL_FACTOR * tol {
        return Err(ReconstructError::Accuracy {
            what: "angular density",
            requested: tol,
            achieved: err,
        });
    }
    Ok(value / (eps * eps))
}

/// Square grid of zoomed offsets on which a patch is evaluated: offsets run
/// over `[-half_extent, half_extent]^2` in steps of `step`, in units of the
/// sampling scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSpec {
    half_extent: f64,
    step: f64,
    n_side: usize,
}

impl PatchSpec {
    /// Grid over `[-half_extent, half_extent]^2` with the given step.
    ///
    /// # Errors
    /// [`ReconstructError::BadParameter`] unless both values are positive and
    /// finite, the step no larger than the extent, and the side at most 1025
    /// points.
    pub fn new(half_extent: f64, step: f64) -> Result<Self, ReconstructError> {
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(ReconstructError::BadParameter(
                "patch half-extent must be positive and finite",
            ));
        }
        if !(step > 0.0) || !step.is_finite() || step > 2.0 * half_extent {
            return Err(ReconstructError::BadParameter(
                "patch step must be positive and no larger than the patch",
            ));
        }
        let per_side = 2.0 * half_extent / step;
        if per_side > 1024.0 {
            return Err(ReconstructError::BadParameter("patch side is capped at 1025 points"));
        }
        // Nudge absorbs representation error in half_extent / step so that a
        // nominally exact ratio yields the full closed grid.
        let n_side = (per_side + 1e-9) as usize + 1;
        Ok(Self { half_extent, step, n_side })
    }

    /// Offset half-extent, in sampling-scale units.
    #[inline]
    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    /// Offset step, in sampling-scale units.
    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Points per side.
    #[inline]
    pub fn n_side(&self) -> usize {
        self.n_side
    }

    /// Total grid points.
    #[inline]
    pub fn n_points(&self) -> usize {
        self.n_side * self.n_side
    }

    /// Offset of flat index `i`; the first coordinate varies fastest.
    pub fn offset(&self, i: usize) -> [f64; 2] {
        let ix = i % self.n_side;
        let iy = i / self.n_side;
        [
            -self.half_extent + self.step * ix as f64,
            -self.half_extent + self.step * iy as f64,
        ]
    }
}

impl Default for PatchSpec {
    /// The measurement default: `[-4, 4]^2` in steps of `0.25` (33 x 33).
    fn default() -> Self {
        Self::new(4.0, 0.25).expect("default patch dimensions are valid")
    }
}

/// Reconstruction and transition values on a zoomed patch around one
/// boundary point, with their pointwise absolute difference.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPatch {
    x0: [f64; 2],
    eps: f64,
    spec: PatchSpec,
    class: PointClass,
    f_rec: Vec<f64>,
    dtb: Vec<f64>,
    abs_err: Vec<f64>,
}

impl LocalPatch {
    /// Patch center in the plane.
    #[inline]
    pub fn x0(&self) -> [f64; 2] {
        self.x0
    }

    /// Sampling scale the patch was measured at.
    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Offset grid layout.
    #[inline]
    pub fn spec(&self) -> &PatchSpec {
        &self.spec
    }

    /// Geometric classification of the patch center.
    #[inline]
    pub fn class(&self) -> &PointClass {
        &self.class
    }

    /// Reconstructed values, indexed like [`PatchSpec::offset`].
    #[inline]
    pub fn f_rec(&self) -> &[f64] {
        &self.f_rec
    }

    /// Transition values, indexed like [`PatchSpec::offset`].
    #[inline]
    pub fn dtb(&self) -> &[f64] {
        &self.dtb
    }

    /// Pointwise absolute differences, indexed like [`PatchSpec::offset`].
    #[inline]
    pub fn abs_err(&self) -> &[f64] {
        &self.abs_err
    }

    /// Largest absolute difference on the patch.
    pub fn max_err(&self) -> f64 {
        self.abs_err.iter().fold(0.0f64, |a, &v| a.max(v))
    }

    /// Mean absolute difference over the patch.
    pub fn mean_err(&self) -> f64 {
        let mut acc = KahanSum::new();
        for &v in &self.abs_err {
            acc.add(v);
        }
        acc.total() / self.abs_err.len() as f64
    }

    /// Offset of the first grid point attaining [`Self::max_err`].
    pub fn argmax_offset(&self) -> [f64; 2] {
        let m = self.max_err();
        let i = self.abs_err.iter().position(|&v| v >= m).unwrap_or(0);
        self.spec.offset(i)
    }

    /// Largest reconstructed magnitude on the patch.
    pub fn max_abs_rec(&self) -> f64 {
        self.f_rec.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Largest transition magnitude on the patch.
    pub fn max_abs_dtb(&self) -> f64 {
        self.dtb.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }
}

/// Evaluates reconstruction and transition behavior over a zoomed patch and
/// records their pointwise difference.
///
/// Points are evaluated in flat index order, so the result is deterministic;
/// each point is independent, so callers needing speed can instead fan the
/// same per-point evaluators over threads and assemble an identical patch.
///
/// # Errors
/// [`ReconstructError::BadParameter`] when the patch scale does not match
/// the sinogram lattice or inputs are out of domain, any error of
/// [`dtb_point`], and [`ReconstructError::BadParameter`] if an evaluation
/// produced a non-finite value.
pub fn compare_patch(
    sino: &Sinogram,
    field: &JumpField,
    profile: &PerturbationProfile,
    tables: &KernelTables,
    x0: [f64; 2],
    eps: f64,
    spec: &PatchSpec,
) -> Result<LocalPatch, ReconstructError> {
    check_point_inputs(x0, [0.0, 0.0], eps)?;
    if sino.grid().eps() != eps {
        return Err(ReconstructError::BadParameter(
            "patch scale must match the sinogram lattice scale",
        ));
    }
    let n = spec.n_points();
    let mut f_rec = Vec::with_capacity(n);
    let mut dtb = Vec::with_capacity(n);
    let mut abs_err = Vec::with_capacity(n);
    for i in 0..n {
        let xc = spec.offset(i);
        let x = [x0[0] + eps * xc[0], x0[1] + eps * xc[1]];
        let rec = fbp_point(sino, tables, x);
        let lim = dtb_point(field, profile, tables, x0, xc, eps)?;
        if !rec.is_finite() || !lim.is_finite() {
            return Err(ReconstructError::BadParameter(
                "patch evaluation produced a non-finite value",
            ));
        }
        f_rec.push(rec);
        dtb.push(lim);
        abs_err.push((rec - lim).abs());
    }
    let class = field.curve().classify(x0, 1e-12 * field.curve().base_radius().max(1.0));
    Ok(LocalPatch {
        x0,
        eps,
        spec: spec.clone(),
        class,
        f_rec,
        dtb,
        abs_err,
    })
}

/// Shared validation for pointwise evaluators.
fn check_point_inputs(x0: [f64; 2], xc: [f64; 2], eps: f64) -> Result<(), ReconstructError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(ReconstructError::BadParameter("eps must be positive and finite"));
    }
    if !(x0[0].is_finite() && x0[1].is_finite() && xc[0].is_finite() && xc[1].is_finite()) {
        return Err(ReconstructError::BadParameter("evaluation point must be finite"));
    }
    Ok(())
}

/// Brackets the stretch of arc whose points lie within `reach` of `x`.
///
/// Samples the distance on a uniform grid, padded by one Lipschitz step of
/// the boundary speed `R(theta)`, and returns the hull of the flagged cells
/// together with the sampled curvature-radius maximum. `None` means no arc
/// point comes close enough, so the kernel footprint misses the layer
/// entirely.
fn kernel_window(curve: &BoundaryCurve, x: [f64; 2], reach: f64) -> Option<(f64, f64, f64)> {
    let (lo, hi) = curve.theta_range();
    let step = (hi - lo) / WINDOW_SCAN as f64;
    let mut r_max = 0.0f64;
    let mut first = None;
    let mut last = 0usize;
    let mut dists = [0.0f64; WINDOW_SCAN + 1];
    for (i, d) in dists.iter_mut().enumerate() {
        let th = lo + step * i as f64;
        let y = curve.point(th);
        *d = math::sqrt((y[0] - x[0]) * (y[0] - x[0]) + (y[1] - x[1]) * (y[1] - x[1]));
        r_max = r_max.max(curve.curvature_radius(th));
    }
    let cut = reach + r_max * step;
    for (i, &d) in dists.iter().enumerate() {
        if d <= cut {
            if first.is_none() {
                first = Some(i);
            }
            last = i;
        }
    }
    let first = first?;
    let th_lo = (lo + step * (first as f64 - 1.0)).max(lo);
    let th_hi = (lo + step * (last as f64 + 1.0)).min(hi);
    Some((th_lo, th_hi, r_max))
}
