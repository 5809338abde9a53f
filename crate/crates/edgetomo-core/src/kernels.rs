//! Reconstruction kernels for aperture-sampled tomographic data.
//!
//! The data model smooths every line integral with a detector aperture `w`
//! and interpolates the discrete detector samples with a kernel `phi`.
//! Filtered backprojection of such data is governed by three derived
//! objects, all built here:
//!
//! * the filter `H(phi')`, the Hilbert transform of the kernel derivative,
//!   which plays the role of the classical ramp filter;
//! * the lattice kernel `psi(q, t) = sum_j H(phi')(q - j) w(j - q - t)`,
//!   coupling the sampling phase `q` of a reconstruction point to its scaled
//!   distance `t` from an integration line; its Fourier coefficients in `q`
//!   drive every interference estimate downstream;
//! * the radial kernel `K`, the inverse Radon transform of the line profile
//!   `b = phi * w`; convolution with `K` at the sampling scale is the
//!   transition behavior that discrete reconstructions approach near an
//!   edge.
//!
//! Parity fixes the conventions: `phi` is even, so `phi'` is odd, and the
//! Hilbert transform swaps parity, making the filter even with a far field
//! `-1/(pi s^2)`. The backprojected average of the filtered profile is then
//! even in the ray offset, which is what makes `K` radial, of compact
//! support, and of unit mass.
//!
//! Everything is a deterministic function of [`KernelConfig`] and is
//! validated while [`KernelTables::build`] runs; a built table set is
//! immutable and safe to share across threads.

use alloc::vec::Vec;

use crate::hilbert::HilbertTransform;
use crate::ksum::KahanSum;
use crate::math;
use crate::quad;
use crate::rng;
use crate::spline::PiecewisePoly;

const PI: f64 = core::f64::consts::PI;
const TAU: f64 = core::f64::consts::TAU;

/// Errors from kernel construction and table lookups.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    /// A configuration field is outside the supported range.
    #[error("invalid kernel parameter: {0}")]
    BadParameter(&'static str),
    /// A build-time validation failed; the tables were discarded.
    #[error("kernel build check failed: {check} (observed {observed:.3e}, allowed {allowed:.3e})")]
    BuildCheck {
        /// Name of the failed validation.
        check: &'static str,
        /// Observed discrepancy.
        observed: f64,
        /// Largest discrepancy the check tolerates.
        allowed: f64,
    },
    /// A Fourier coefficient outside the tabulated band was requested.
    #[error("Fourier index {0} exceeds tabulated band {1}")]
    FourierRange(i64, u32),
    /// Raw table data does not match the configuration it claims.
    #[error("raw table length mismatch in {0}")]
    RawShape(&'static str),
}

/// Parameters of the kernel pair and the derived tables.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    /// Degree of the detector aperture B-spline `w` (support `degree + 1`).
    pub aperture_degree: u32,
    /// Degree of the interpolation B-spline `phi` (support `degree + 1`).
    pub interp_degree: u32,
    /// Smoothness order `beta` the kernel pair certifies; the Fourier
    /// envelope of the lattice kernel decays like `(1 + |m|^beta)^{-1}`.
    pub smoothness_order: f64,
    /// Largest tabulated Fourier index of the lattice kernel.
    pub fourier_max: u32,
    /// Half-extent of the filter table; the far-field series takes over
    /// beyond it.
    pub filter_table_radius: f64,
    /// Grid step of the filter table.
    pub filter_table_step: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            aperture_degree: 5,
            interp_degree: 4,
            smoothness_order: 3.5,
            fourier_max: 64,
            filter_table_radius: 32.0,
            filter_table_step: 1.0 / 1024.0,
        }
    }
}

/// Detector aperture profile: a centered B-spline of unit integral.
#[derive(Debug, Clone)]
pub struct ApertureFunction {
    degree: u32,
    spline: PiecewisePoly,
}

impl ApertureFunction {
    /// Centered B-spline aperture of the given degree.
    pub fn new(degree: u32) -> Self {
        Self { degree, spline: PiecewisePoly::bspline(degree as usize) }
    }

    /// Aperture value at `u`.
    pub fn eval(&self, u: f64) -> f64 {
        self.spline.eval(u)
    }

    /// Half-width of the support, `(degree + 1) / 2`.
    pub fn support_radius(&self) -> f64 {
        self.spline.support_radius()
    }

    /// B-spline degree.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Highest smoothness order the aperture certifies (`degree - 1`
    /// continuous derivatives with a bounded next one).
    pub fn certified_order(&self) -> f64 {
        self.degree as f64 - 1.0
    }

    /// Underlying piecewise polynomial.
    pub fn spline(&self) -> &PiecewisePoly {
        &self.spline
    }
}

/// Detector-to-continuum interpolation kernel: a centered B-spline.
///
/// Lattice shifts reproduce constants and linear functions exactly, which is
/// the order of exactness the resolution analysis relies on.
#[derive(Debug, Clone)]
pub struct InterpKernel {
    degree: u32,
    spline: PiecewisePoly,
}

impl InterpKernel {
    /// Centered B-spline kernel of the given degree.
    pub fn new(degree: u32) -> Self {
        Self { degree, spline: PiecewisePoly::bspline(degree as usize) }
    }

    /// Kernel value at `u`.
    pub fn eval(&self, u: f64) -> f64 {
        self.spline.eval(u)
    }

    /// Half-width of the support, `(degree + 1) / 2`.
    pub fn support_radius(&self) -> f64 {
        self.spline.support_radius()
    }

    /// B-spline degree.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Underlying piecewise polynomial.
    pub fn spline(&self) -> &PiecewisePoly {
        &self.spline
    }
}

/// Raw table payload of a built [`KernelTables`], for external caching.
///
/// The expensive arrays are exactly the ones stored here; everything else in
/// [`KernelTables`] is cheap to rebuild from the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RawKernelTables {
    /// Filter samples on `[-filter_table_radius, filter_table_radius]`.
    pub filter: Vec<f64>,
    /// Real parts of the lattice-kernel Fourier rows, `(fourier_max + 1)`
    /// rows of `t`-samples each, demodulated by `e(m t)`.
    pub fourier_re: Vec<f64>,
    /// Imaginary parts, same layout.
    pub fourier_im: Vec<f64>,
    /// Real far-field coefficients, seven per Fourier index (powers
    /// `t^{-2}..t^{-8}`).
    pub tail_re: Vec<f64>,
    /// Imaginary far-field coefficients, same layout.
    pub tail_im: Vec<f64>,
    /// Radial transition kernel samples on `[0, radial extent]`.
    pub radial: Vec<f64>,
}

/// Immutable kernel tables: the filter, the lattice kernel with its Fourier
/// rows, and the radial transition kernel.
#[derive(Debug, Clone)]
pub struct KernelTables {
    config: KernelConfig,
    aperture: ApertureFunction,
    interp: InterpKernel,
    /// Closed-form filter `H(phi')`, valid at every argument.
    hfilter: HilbertTransform,
    /// Filter samples on the symmetric grid, step `filter_table_step`.
    filter: Vec<f64>,
    /// Second moment of `phi`, fixing the `s^{-4}` term of the filter tail.
    interp_moment2: f64,
    fourier_re: Vec<f64>,
    fourier_im: Vec<f64>,
    tail_re: Vec<f64>,
    tail_im: Vec<f64>,
    radial: Vec<f64>,
    radial_peak: f64,
    /// Support radius of the line profile `b = phi * w`; the transition
    /// kernel vanishes beyond it.
    profile_support: f64,
}

/// Number of `q`-samples behind each Fourier row; the nearest alias band is
/// `DFT_SIZE - fourier_max`, far beyond the certified decay.
const DFT_SIZE: usize = 512;
/// Fourier rows are tabulated for `|t| <= T_MAX` ...
const T_MAX: f64 = 16.0;
/// ... on a grid of this step.
const T_STEP: f64 = 1.0 / 64.0;
/// The radial kernel is tabulated for `0 <= r <= R_MAX` ...
const R_MAX: f64 = 6.0;
/// ... on a grid of this step.
const R_STEP: f64 = 1.0 / 512.0;
/// Far-field coefficients cover `t^{-2}` through `t^{-8}`.
const TAIL_POWERS: usize = 7;

/// Four-point (cubic Lagrange) interpolation on a uniform table.
fn cubic_interp(table: &[f64], x0: f64, dx: f64, x: f64) -> f64 {
    let pos = (x - x0) / dx;
    let i = (math::floor(pos) as isize).clamp(1, table.len() as isize - 3) as usize;
    let u = pos - i as f64;
    let (a, b, c, d) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
    a * (-u * (u - 1.0) * (u - 2.0) / 6.0)
        + b * ((u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0)
        + c * (-(u + 1.0) * u * (u - 2.0) / 2.0)
        + d * ((u + 1.0) * u * (u - 1.0) / 6.0)
}

/// Binomial coefficient as a float.
fn binom(n: usize, k: usize) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out *= (n - i) as f64 / (k - i) as f64;
    }
    out
}

/// Lattice sum `sum_j H(phi')(q - j) w(j - q - t)`; the aperture support
/// truncates it to at most `supp w + 1` terms.
fn psi_value(hfilter: &HilbertTransform, aperture: &PiecewisePoly, q: f64, t: f64) -> f64 {
    let rad = aperture.support_radius();
    let lo = math::ceil(q + t - rad) as i64;
    let hi = math::floor(q + t + rad) as i64;
    let mut acc = 0.0;
    for j in lo..=hi {
        let jf = j as f64;
        acc += hfilter.eval(q - jf) * aperture.eval(jf - q - t);
    }
    acc
}

impl KernelTables {
    /// Builds and validates all tables for the given configuration.
    ///
    /// # Errors
    /// [`KernelError::BadParameter`] for out-of-range configuration;
    /// [`KernelError::BuildCheck`] when a validation fails, naming the check.
    pub fn build(config: KernelConfig) -> Result<Self, KernelError> {
        if config.aperture_degree > 8 || config.interp_degree > 8 {
            return Err(KernelError::BadParameter("kernel degrees are capped at 8"));
        }
        if config.fourier_max > 128 {
            return Err(KernelError::BadParameter(
                "fourier band is capped at 128 to keep aliasing negligible",
            ));
        }
        let aperture = ApertureFunction::new(config.aperture_degree);
        let interp = InterpKernel::new(config.interp_degree);

        // Unit integral of the aperture, exactly as the integral of the
        // piecewise polynomial.
        let mass_gap = (aperture.spline.moment(0) - 1.0).abs();
        if mass_gap > 1e-12 {
            return Err(KernelError::BuildCheck {
                check: "aperture unit integral",
                observed: mass_gap,
                allowed: 1e-12,
            });
        }

        // Lattice exactness of the interpolation kernel: shifts reproduce
        // constants and linear functions. Checked before the degree/order
        // relations so that a kernel too coarse to reproduce linears is
        // reported as exactly that.
        let mut state = 0x6b0u64;
        let mut worst_unity = 0.0f64;
        let mut worst_moment = 0.0f64;
        for _ in 0..1000 {
            let u = 20.0 * rng::uniform01(&mut state) - 10.0;
            worst_unity = worst_unity.max((interp.spline.shifted_sum(u) - 1.0).abs());
            worst_moment = worst_moment.max((interp.spline.shifted_first_moment(u) - u).abs());
        }
        if worst_unity > 1e-12 {
            return Err(KernelError::BuildCheck {
                check: "interpolation partition of unity",
                observed: worst_unity,
                allowed: 1e-12,
            });
        }
        if worst_moment > 1e-12 {
            return Err(KernelError::BuildCheck {
                check: "interpolation first moment",
                observed: worst_moment,
                allowed: 1e-12,
            });
        }

        let beta = config.smoothness_order;
        if !(3.0..=config.interp_degree as f64).contains(&beta) {
            return Err(KernelError::BadParameter(
                "smoothness order must satisfy 3 <= beta <= interp degree",
            ));
        }
        if (config.aperture_degree as f64) < math::ceil(beta) + 1.0 {
            return Err(KernelError::BadParameter(
                "aperture degree must be at least ceil(beta) + 1",
            ));
        }
        let s_max = config.filter_table_radius;
        let ds = config.filter_table_step;
        if !(8.0..=256.0).contains(&s_max) {
            return Err(KernelError::BadParameter("filter table radius must lie in [8, 256]"));
        }
        if !(ds > 0.0 && ds <= 0.125) {
            return Err(KernelError::BadParameter("filter table step must lie in (0, 0.125]"));
        }
        let half_steps = s_max / ds;
        if (half_steps - math::floor(half_steps + 0.5)).abs() > 1e-9 {
            return Err(KernelError::BadParameter(
                "filter table radius must be a multiple of the step",
            ));
        }

        let hfilter = HilbertTransform::of_derivative(interp.spline());
        let interp_moment2 = interp.spline.moment(2);

        // Filter table and the continuity of the far-field switch.
        let half = math::floor(half_steps + 0.5) as usize;
        let n_filter = 2 * half + 1;
        let mut filter = Vec::with_capacity(n_filter);
        for i in 0..n_filter {
            filter.push(hfilter.eval(-s_max + ds * i as f64));
        }
        let tail_at = |s: f64| -> f64 {
            let inv2 = 1.0 / (s * s);
            -(inv2 + 3.0 * interp_moment2 * inv2 * inv2) / PI
        };
        let seam = (filter[n_filter - 1] - tail_at(s_max)).abs();
        if seam > 1e-7 {
            return Err(KernelError::BuildCheck {
                check: "filter tail continuity",
                observed: seam,
                allowed: 1e-7,
            });
        }

        // Fourier rows of the lattice kernel. Each row is the mean of
        // psi(q, t) e(m q) over one period in q, computed as a discrete
        // Fourier transform of the exact periodization; the only error is
        // aliasing from bands |m'| >= DFT_SIZE - fourier_max, which the
        // certified decay puts below 1e-9. Rows are stored demodulated,
        // multiplied by e(m t): the coefficient itself carries an e(-m t)
        // oscillation that a fixed t-grid cannot resolve at large m, while
        // the demodulated amplitude is slowly varying uniformly in m.
        let m_rows = config.fourier_max as usize + 1;
        let n_t = 2 * (T_MAX / T_STEP) as usize + 1;
        let mut fourier_re = Vec::with_capacity(m_rows * n_t);
        let mut fourier_im = Vec::with_capacity(m_rows * n_t);
        let mut cos_lut = [0.0f64; DFT_SIZE];
        let mut sin_lut = [0.0f64; DFT_SIZE];
        for (k, (c, s)) in cos_lut.iter_mut().zip(sin_lut.iter_mut()).enumerate() {
            let (sv, cv) = math::sin_cos(TAU * k as f64 / DFT_SIZE as f64);
            *c = cv;
            *s = sv;
        }
        let mut row = [0.0f64; DFT_SIZE];
        for it in 0..n_t {
            let t = -T_MAX + T_STEP * it as f64;
            for (i, slot) in row.iter_mut().enumerate() {
                *slot = psi_value(&hfilter, aperture.spline(), i as f64 / DFT_SIZE as f64, t);
            }
            for m in 0..m_rows {
                let mut re = KahanSum::new();
                let mut im = KahanSum::new();
                for (i, &p) in row.iter().enumerate() {
                    let idx = (m * i) % DFT_SIZE;
                    re.add(p * cos_lut[idx]);
                    im.add(p * sin_lut[idx]);
                }
                let (sv, cv) = math::sin_cos(TAU * m as f64 * t);
                let raw_re = re.total() / DFT_SIZE as f64;
                let raw_im = im.total() / DFT_SIZE as f64;
                fourier_re.push(raw_re * cv - raw_im * sv);
                fourier_im.push(raw_re * sv + raw_im * cv);
            }
        }
        // The loop above is t-major; transpose to m-major rows.
        let mut re_rows = Vec::with_capacity(m_rows * n_t);
        let mut im_rows = Vec::with_capacity(m_rows * n_t);
        for m in 0..m_rows {
            for it in 0..n_t {
                re_rows.push(fourier_re[it * m_rows + m]);
                im_rows.push(fourier_im[it * m_rows + m]);
            }
        }
        let (fourier_re, fourier_im) = (re_rows, im_rows);

        // Far-field coefficients: expanding the filter's moment series
        // around q - j ~ -t gives
        //   psi_fourier(m, t) = e(-m t) / pi * sum_r c_r(m) t^{-r},
        // with c_r(m) combining the filter's far moments and the aperture's
        // oscillatory moments M_k(m) = int w(u) u^k e(-m u) du.
        let w_rad = aperture.support_radius();
        let mut moments_re = [[0.0f64; TAIL_POWERS]; 1 + 128];
        let mut moments_im = [[0.0f64; TAIL_POWERS]; 1 + 128];
        for m in 0..m_rows {
            for k in 0..TAIL_POWERS - 1 {
                let panels = 2 * w_rad as usize * 2 * (m.max(12));
                let mut f_re = |u: f64| {
                    let (sv, cv) = math::sin_cos(-TAU * m as f64 * u);
                    let _ = sv;
                    aperture.eval(u) * math::powi(u, k as i32) * cv
                };
                let mut f_im = |u: f64| {
                    let (sv, _cv) = math::sin_cos(-TAU * m as f64 * u);
                    aperture.eval(u) * math::powi(u, k as i32) * sv
                };
                moments_re[m][k] = quad::composite_gl8(&mut f_re, -w_rad, w_rad, panels);
                moments_im[m][k] = quad::composite_gl8(&mut f_im, -w_rad, w_rad, panels);
            }
        }
        let mut tail_re = Vec::with_capacity(m_rows * TAIL_POWERS);
        let mut tail_im = Vec::with_capacity(m_rows * TAIL_POWERS);
        for m in 0..m_rows {
            for r in 2..=1 + TAIL_POWERS {
                let mut cre = 0.0;
                let mut cim = 0.0;
                let mut n = 1usize;
                while n < r {
                    let k = r - 1 - n;
                    let mu = hfilter.far_moment(n);
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let factor = mu * binom(n + k, k) * sign;
                    cre += factor * moments_re[m][k];
                    cim += factor * moments_im[m][k];
                    n += 2;
                }
                tail_re.push(cre);
                tail_im.push(cim);
            }
        }

        // Consistency of the tabulated dc row against direct quadrature at
        // off-grid t, which exercises both the transform and the
        // interpolation that readers will use.
        let mut partial = Self {
            config,
            aperture,
            interp,
            hfilter,
            filter,
            interp_moment2,
            fourier_re,
            fourier_im,
            tail_re,
            tail_im,
            radial: Vec::new(),
            radial_peak: 0.0,
            profile_support: 0.0,
        };
        let mut worst_dc = 0.0f64;
        for &t in &[-10.3, -2.15, 0.4, 3.7, 9.9] {
            let direct = partial.fourier_dc_direct(t);
            let (re, _im) = partial.psi_fourier(0, t).expect("dc row is always tabulated");
            worst_dc = worst_dc.max((re - direct).abs());
        }
        if worst_dc > 1e-8 {
            return Err(KernelError::BuildCheck {
                check: "fourier dc consistency",
                observed: worst_dc,
                allowed: 1e-8,
            });
        }

        // Radial transition kernel: backprojected average of the filtered
        // line profile b = phi * w, a centered B-spline again. The integrand
        // is even about the quarter turn.
        let profile = PiecewisePoly::bspline(
            (partial.config.interp_degree + partial.config.aperture_degree + 1) as usize,
        );
        partial.profile_support = profile.support_radius();
        let hprofile = HilbertTransform::of_derivative(&profile);
        let n_r = (R_MAX / R_STEP) as usize + 1;
        let mut radial = Vec::with_capacity(n_r);
        for ir in 0..n_r {
            let r = R_STEP * ir as f64;
            let mut f = |alpha: f64| hprofile.eval(r * math::cos(alpha));
            radial.push(quad::adaptive(&mut f, 0.0, PI / 2.0, 1e-11, 24) / PI);
        }
        partial.radial_peak = radial.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        partial.radial = radial;

        let support_gap = partial.outside_support_peak();
        if support_gap > 1e-6 * partial.radial_peak {
            return Err(KernelError::BuildCheck {
                check: "transition kernel support",
                observed: support_gap,
                allowed: 1e-6 * partial.radial_peak,
            });
        }
        let mass_gap = (partial.radial_mass() - 1.0).abs();
        if mass_gap > 1e-6 {
            return Err(KernelError::BuildCheck {
                check: "transition kernel mass",
                observed: mass_gap,
                allowed: 1e-6,
            });
        }
        Ok(partial)
    }

    /// Rebuilds tables from a raw payload, skipping the expensive quadrature
    /// and transform passes but re-running the cheap validations.
    ///
    /// # Errors
    /// [`KernelError::RawShape`] on dimension mismatch, plus the same
    /// validation errors as [`KernelTables::build`].
    pub fn from_raw(config: KernelConfig, raw: RawKernelTables) -> Result<Self, KernelError> {
        if config.aperture_degree > 8 || config.interp_degree > 8 {
            return Err(KernelError::BadParameter("kernel degrees are capped at 8"));
        }
        if config.fourier_max > 128 {
            return Err(KernelError::BadParameter(
                "fourier band is capped at 128 to keep aliasing negligible",
            ));
        }
        let aperture = ApertureFunction::new(config.aperture_degree);
        let interp = InterpKernel::new(config.interp_degree);
        let hfilter = HilbertTransform::of_derivative(interp.spline());
        let interp_moment2 = interp.spline.moment(2);
        let profile_support = aperture.support_radius() + interp.support_radius();

        let n_filter = 2 * (config.filter_table_radius / config.filter_table_step) as usize + 1;
        let m_rows = config.fourier_max as usize + 1;
        let n_t = 2 * (T_MAX / T_STEP) as usize + 1;
        let n_r = (R_MAX / R_STEP) as usize + 1;
        if raw.filter.len() != n_filter {
            return Err(KernelError::RawShape("filter table"));
        }
        if raw.fourier_re.len() != m_rows * n_t || raw.fourier_im.len() != m_rows * n_t {
            return Err(KernelError::RawShape("fourier rows"));
        }
        if raw.tail_re.len() != m_rows * TAIL_POWERS || raw.tail_im.len() != m_rows * TAIL_POWERS {
            return Err(KernelError::RawShape("tail coefficients"));
        }
        if raw.radial.len() != n_r {
            return Err(KernelError::RawShape("radial table"));
        }
        let radial_peak = raw.radial.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        let tables = Self {
            config,
            aperture,
            interp,
            hfilter,
            filter: raw.filter,
            interp_moment2,
            fourier_re: raw.fourier_re,
            fourier_im: raw.fourier_im,
            tail_re: raw.tail_re,
            tail_im: raw.tail_im,
            radial: raw.radial,
            radial_peak,
            profile_support,
        };
        let tail = {
            let s = tables.config.filter_table_radius;
            let inv2 = 1.0 / (s * s);
            -(inv2 + 3.0 * tables.interp_moment2 * inv2 * inv2) / PI
        };
        let seam = (tables.filter[tables.filter.len() - 1] - tail).abs();
        if seam > 1e-7 {
            return Err(KernelError::BuildCheck {
                check: "filter tail continuity",
                observed: seam,
                allowed: 1e-7,
            });
        }
        let direct = tables.fourier_dc_direct(0.4);
        let (re, _) = tables.psi_fourier(0, 0.4).expect("dc row is always tabulated");
        if (re - direct).abs() > 1e-8 {
            return Err(KernelError::BuildCheck {
                check: "fourier dc consistency",
                observed: (re - direct).abs(),
                allowed: 1e-8,
            });
        }
        let support_gap = tables.outside_support_peak();
        if support_gap > 1e-6 * tables.radial_peak {
            return Err(KernelError::BuildCheck {
                check: "transition kernel support",
                observed: support_gap,
                allowed: 1e-6 * tables.radial_peak,
            });
        }
        let mass_gap = (tables.radial_mass() - 1.0).abs();
        if mass_gap > 1e-6 {
            return Err(KernelError::BuildCheck {
                check: "transition kernel mass",
                observed: mass_gap,
                allowed: 1e-6,
            });
        }
        Ok(tables)
    }

    /// Copies the expensive table payload out for caching.
    pub fn raw(&self) -> RawKernelTables {
        RawKernelTables {
            filter: self.filter.clone(),
            fourier_re: self.fourier_re.clone(),
            fourier_im: self.fourier_im.clone(),
            tail_re: self.tail_re.clone(),
            tail_im: self.tail_im.clone(),
            radial: self.radial.clone(),
        }
    }

    /// Direct quadrature of the dc Fourier row,
    /// `int H(phi')(q) w(-q - t) dq`, used as a build-time oracle.
    fn fourier_dc_direct(&self, t: f64) -> f64 {
        let w_rad = self.aperture.support_radius();
        let (lo, hi) = (-t - w_rad, -t + w_rad);
        let mut breaks = Vec::new();
        let mut k = math::ceil(lo);
        while k <= hi {
            breaks.push(k);
            breaks.push(k - 0.5);
            k += 1.0;
        }
        let hfilter = &self.hfilter;
        let aperture = self.aperture.spline();
        let mut f = |q: f64| hfilter.eval(q) * aperture.eval(-q - t);
        quad::adaptive_with_breakpoints(&mut f, lo, hi, &breaks, 1e-12, 24)
    }

    /// Filter value `H(phi')(s)`: cubic table interpolation inside the
    /// tabulated range, the two-term far-field series beyond it.
    pub fn hilbert_deriv(&self, s: f64) -> f64 {
        let s_max = self.config.filter_table_radius;
        if s.abs() <= s_max {
            cubic_interp(&self.filter, -s_max, self.config.filter_table_step, s)
        } else {
            let inv2 = 1.0 / (s * s);
            -(inv2 + 3.0 * self.interp_moment2 * inv2 * inv2) / PI
        }
    }

    /// Lattice kernel `psi(q, t)`, evaluated from the closed-form filter so
    /// that no table range limits apply.
    pub fn psi(&self, q: f64, t: f64) -> f64 {
        psi_value(&self.hfilter, self.aperture.spline(), q, t)
    }

    /// Integral of `psi(q, .)` over the whole real line.
    ///
    /// The aperture has unit integral, so integrating termwise leaves the
    /// plain lattice sum of the filter; its far field is summed in closed
    /// form through Hurwitz zeta values. The result vanishes identically
    /// because the filter's periodization kills every Fourier mode; this
    /// method exists so that the cancellation can be verified numerically.
    pub fn psi_mean(&self, q: f64) -> f64 {
        let reach = 12.0f64;
        let j_lo = math::ceil(q - reach) as i64;
        let j_hi = math::floor(q + reach) as i64;
        let mut acc = KahanSum::new();
        for j in j_lo..=j_hi {
            acc.add(self.hfilter.eval(q - j as f64));
        }
        // Both tails lie deep in the far field, where the filter is the
        // moment series in odd powers; term n sums to a pair of zetas.
        let a_right = j_hi as f64 + 1.0 - q;
        let a_left = q - j_lo as f64 + 1.0;
        let mut n = 1u32;
        while n <= 39 {
            let mu = self.hfilter.far_moment(n as usize);
            let zetas =
                math::hurwitz_zeta(n + 1, a_right) + math::hurwitz_zeta(n + 1, a_left);
            acc.add(mu * zetas / PI);
            n += 2;
        }
        acc.total()
    }

    /// Fourier coefficient `psi_fourier(m, t)` of the lattice kernel as
    /// `(re, im)`; rows are Hermitian in `m` because `psi` is real.
    ///
    /// # Errors
    /// [`KernelError::FourierRange`] when `|m|` exceeds the tabulated band.
    pub fn psi_fourier(&self, m: i64, t: f64) -> Result<(f64, f64), KernelError> {
        let band = self.config.fourier_max;
        if m.unsigned_abs() > band as u64 {
            return Err(KernelError::FourierRange(m, band));
        }
        let ma = m.unsigned_abs() as usize;
        let (re, im) = if t.abs() <= T_MAX {
            let n_t = 2 * (T_MAX / T_STEP) as usize + 1;
            let row_re = &self.fourier_re[ma * n_t..(ma + 1) * n_t];
            let row_im = &self.fourier_im[ma * n_t..(ma + 1) * n_t];
            let g_re = cubic_interp(row_re, -T_MAX, T_STEP, t);
            let g_im = cubic_interp(row_im, -T_MAX, T_STEP, t);
            // Rows store the demodulated amplitude; restore the e(-m t)
            // carrier.
            let (sv, cv) = math::sin_cos(TAU * ma as f64 * t);
            (g_re * cv + g_im * sv, g_im * cv - g_re * sv)
        } else {
            self.fourier_tail(ma, t)
        };
        if m < 0 {
            Ok((re, -im))
        } else {
            Ok((re, im))
        }
    }

    /// Far-field series of the `m`-th Fourier row (`m >= 0`).
    fn fourier_tail(&self, m: usize, t: f64) -> (f64, f64) {
        let coefs_re = &self.tail_re[m * TAIL_POWERS..(m + 1) * TAIL_POWERS];
        let coefs_im = &self.tail_im[m * TAIL_POWERS..(m + 1) * TAIL_POWERS];
        let inv = 1.0 / t;
        let mut power = inv * inv;
        let mut sre = 0.0;
        let mut sim = 0.0;
        for (cr, ci) in coefs_re.iter().zip(coefs_im) {
            sre += cr * power;
            sim += ci * power;
            power *= inv;
        }
        let (sv, cv) = math::sin_cos(-TAU * m as f64 * t);
        ((cv * sre - sv * sim) / PI, (cv * sim + sv * sre) / PI)
    }

    /// Radial transition kernel `K(r)`; zero beyond the tabulated extent,
    /// which itself exceeds the support of the line profile.
    pub fn dtb_kernel(&self, r: f64) -> f64 {
        let r = r.abs();
        if r >= R_MAX {
            return 0.0;
        }
        cubic_interp(&self.radial, 0.0, R_STEP, r)
    }

    /// Largest `|K|` sample beyond the line-profile support.
    fn outside_support_peak(&self) -> f64 {
        let start = math::ceil(self.profile_support / R_STEP) as usize;
        self.radial[start..].iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Total mass `2 pi int K(r) r dr` by Simpson's rule on the table.
    fn radial_mass(&self) -> f64 {
        let n = self.radial.len();
        let mut acc = KahanSum::new();
        for (i, &v) in self.radial.iter().enumerate() {
            let weight = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc.add(weight * v * (R_STEP * i as f64));
        }
        TAU * acc.total() * R_STEP / 3.0
    }

    /// Configuration the tables were built from.
    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    /// Detector aperture profile.
    pub fn aperture(&self) -> &ApertureFunction {
        &self.aperture
    }

    /// Interpolation kernel.
    pub fn interp(&self) -> &InterpKernel {
        &self.interp
    }

    /// Closed-form filter, exact at every argument.
    pub fn filter(&self) -> &HilbertTransform {
        &self.hfilter
    }

    /// Support radius of the line profile `b = phi * w`.
    pub fn transition_support(&self) -> f64 {
        self.profile_support
    }

    /// Filter table samples (symmetric grid).
    pub fn filter_samples(&self) -> &[f64] {
        &self.filter
    }

    /// Step of the filter table grid.
    pub fn filter_step(&self) -> f64 {
        self.config.filter_table_step
    }

    /// Number of tabulated Fourier rows.
    pub fn fourier_rows(&self) -> usize {
        self.config.fourier_max as usize + 1
    }

    /// The `m`-th Fourier row as `(re, im)` slices over the `t`-grid, in
    /// demodulated form (the tabulated values carry an extra `e(m t)`).
    pub fn fourier_row(&self, m: usize) -> (&[f64], &[f64]) {
        let n_t = 2 * (T_MAX / T_STEP) as usize + 1;
        (&self.fourier_re[m * n_t..(m + 1) * n_t], &self.fourier_im[m * n_t..(m + 1) * n_t])
    }

    /// Half-extent of the Fourier `t`-grid.
    pub fn fourier_extent(&self) -> f64 {
        T_MAX
    }

    /// Step of the Fourier `t`-grid.
    pub fn fourier_step(&self) -> f64 {
        T_STEP
    }

    /// Radial kernel samples on `[0, radial extent]`.
    pub fn radial_samples(&self) -> &[f64] {
        &self.radial
    }

    /// Step of the radial table grid.
    pub fn radial_step(&self) -> f64 {
        R_STEP
    }

    /// Extent of the radial table.
    pub fn radial_extent(&self) -> f64 {
        R_MAX
    }
}
