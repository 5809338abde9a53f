//! Centered cardinal B-splines as exact piecewise polynomials.
//!
//! The degree-`d` centered cardinal B-spline is the (d+1)-fold convolution of
//! the unit box `1_{[-1/2,1/2]}` with itself. It is supported on
//! `[-(d+1)/2, (d+1)/2]`, has unit integral, belongs to `C^{d-1}`, and its
//! integer translates form a partition of unity that also reproduces linear
//! functions:
//!
//! ```text
//! sum_j B_d(u - j) = 1,    sum_j j B_d(u - j) = u     (d >= 1)
//! ```
//!
//! Those two identities are what make the spline usable as an interpolation
//! kernel in the reconstruction formula, and their failure for d = 0 is
//! detected by the table validator.
//!
//! Coefficients come from the closed form
//!
//! ```text
//! B_d(x) = (1/d!) sum_{k=0}^{d+1} (-1)^k C(d+1, k) (x + (d+1)/2 - k)_+^d
//! ```
//!
//! expanded piece by piece in the local variable `u = x - knot_i`. All
//! intermediate quantities are integers well below 2^53 divided by `d!` once,
//! so the stored coefficients are correctly rounded for every degree used
//! here (d <= 12).
//!
//! A second identity carries a lot of weight downstream: convolving two
//! B-splines adds degrees plus one, `B_{d1} * B_{d2} = B_{d1+d2+1}`, because
//! both sides are box convolutions. The kernel module relies on it to turn
//! the filtered-aperture convolution into a single spline whose Hilbert
//! transform has a closed form.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Maximum supported spline degree.
///
/// Beyond this the closed-form binomial sums start losing bits; nothing in
/// the pipeline needs more than `phi` (4) convolved with `w` (5), degree 10.
pub const MAX_DEGREE: usize = 12;

/// A polynomial on each cell of a uniform knot grid, zero outside.
///
/// Piece `i` lives on `[start + i*width, start + (i+1)*width)` and is stored
/// in the local variable `u = x - (start + i*width)`, coefficients in
/// ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    start: f64,
    width: f64,
    pieces: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    /// Builds the centered cardinal B-spline of the given degree.
    ///
    /// # Panics
    /// Panics if `degree > MAX_DEGREE`; degrees are small configuration
    /// constants, so this is a programming error, not a runtime condition.
    pub fn bspline(degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE, "B-spline degree {degree} exceeds {MAX_DEGREE}");
        let d = degree;
        let n_pieces = d + 1;
        let start = -((d as f64 + 1.0) / 2.0);
        // factorials up to 12! < 2^53, exact in f64
        let mut fact = [1.0f64; MAX_DEGREE + 2];
        for i in 1..fact.len() {
            fact[i] = fact[i - 1] * i as f64;
        }
        let binom = |n: usize, k: usize| -> f64 { fact[n] / (fact[k] * fact[n - k]) };

        let mut pieces = Vec::with_capacity(n_pieces);
        for i in 0..n_pieces {
            // On piece i only the truncated powers with k <= i are active:
            // B_d(x) = (1/d!) sum_{k<=i} (-1)^k C(d+1,k) (x - knot_k)^d,
            // and (x - knot_k)^d = sum_m C(d,m) (i-k)^{d-m} u^m
            // since knot_i - knot_k = i - k (unit spacing).
            let mut coefs = vec![0.0f64; d + 1];
            for k in 0..=i {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let c = sign * binom(d + 1, k);
                for (m, slot) in coefs.iter_mut().enumerate() {
                    let shift_pow = math::powi((i - k) as f64, (d - m) as i32);
                    *slot += c * binom(d, m) * shift_pow;
                }
            }
            for c in coefs.iter_mut() {
                *c /= fact[d];
            }
            pieces.push(coefs);
        }
        Self { start, width: 1.0, pieces }
    }

    /// Left edge of the support.
    #[inline]
    pub fn support_start(&self) -> f64 {
        self.start
    }

    /// Right edge of the support.
    #[inline]
    pub fn support_end(&self) -> f64 {
        self.start + self.width * self.pieces.len() as f64
    }

    /// Half-width of the support (splines here are centered, so this is
    /// also the support radius).
    #[inline]
    pub fn support_radius(&self) -> f64 {
        0.5 * (self.support_end() - self.support_start())
    }

    /// Number of polynomial pieces.
    #[inline]
    pub fn n_pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Knot `i`, for `i` in `0..=n_pieces()`.
    #[inline]
    pub fn knot(&self, i: usize) -> f64 {
        self.start + self.width * i as f64
    }

    /// Local coefficients of piece `i` (ascending degree).
    #[inline]
    pub fn piece_coeffs(&self, i: usize) -> &[f64] {
        &self.pieces[i]
    }

    /// Polynomial degree (length of the longest piece minus one).
    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.len()).max().unwrap_or(1) - 1
    }

    /// Evaluates at `x`; zero outside the support.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let rel = (x - self.start) / self.width;
        if !(0.0..(self.pieces.len() as f64)).contains(&rel) {
            return 0.0;
        }
        let i = rel as usize; // rel >= 0, truncation == floor
        let u = x - (self.start + self.width * i as f64);
        horner(&self.pieces[i], u)
    }

    /// Derivative, as a piecewise polynomial on the same grid.
    ///
    /// Jumps of the function across knots (present only for degree 0) are
    /// *not* represented; callers that need the distributional derivative
    /// must add the knot jumps separately (see [`PiecewisePoly::knot_jumps`]).
    pub fn derivative(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                if p.len() <= 1 {
                    vec![0.0]
                } else {
                    p.iter().enumerate().skip(1).map(|(m, c)| c * m as f64).collect()
                }
            })
            .collect();
        Self { start: self.start, width: self.width, pieces }
    }

    /// Antiderivative vanishing at the left end of the support.
    pub fn antiderivative(&self) -> CumulativeIntegral {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut running = 0.0f64;
        for p in &self.pieces {
            let mut q = vec![0.0f64; p.len() + 1];
            q[0] = running;
            for (m, c) in p.iter().enumerate() {
                q[m + 1] = c / (m as f64 + 1.0);
            }
            running = horner(&q, self.width);
            pieces.push(q);
        }
        CumulativeIntegral {
            poly: Self { start: self.start, width: self.width, pieces },
            total: running,
        }
    }

    /// Moment `integral of x^n f(x) dx` over the support.
    ///
    /// Evaluated per piece by a Gauss-Legendre rule of sufficient order, so
    /// the integrand `p_i(u) (t_i + u)^n` is integrated exactly and, unlike a
    /// binomial expansion of `(t_i + u)^n`, without catastrophic cancellation
    /// at high `n` (the expansion's alternating terms reach `~1e12` while a
    /// high moment of a centered unit-support function is `~1e-29`).
    pub fn moment(&self, n: usize) -> f64 {
        let order = (n + self.degree()) / 2 + 2;
        let (nodes, weights) = crate::quad::gauss_legendre(order);
        let half = 0.5 * self.width;
        let mut acc = crate::ksum::KahanSum::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let ti = self.knot(i);
            let mid = ti + half;
            for (&x, &w) in nodes.iter().zip(&weights) {
                let q = mid + half * x;
                let u = q - ti;
                acc.add(w * horner(p, u) * math::powi(q, n as i32));
            }
        }
        acc.total() * half
    }

    /// Value jumps `p_i(knot_i) - p_{i-1}(knot_i)` at every knot, including
    /// the two support ends. Nonzero only for degree 0 (and at the ends of
    /// degree-0 pieces); the Hilbert transform needs them to represent the
    /// distributional derivative.
    pub fn knot_jumps(&self) -> Vec<f64> {
        let mut jumps = Vec::with_capacity(self.pieces.len() + 1);
        let mut prev_right = 0.0f64;
        for p in &self.pieces {
            jumps.push(horner(p, 0.0) - prev_right);
            prev_right = horner(p, self.width);
        }
        jumps.push(-prev_right);
        jumps
    }

    /// Partition-of-unity sum `sum_j f(u - j)` over all integer shifts.
    pub fn shifted_sum(&self, u: f64) -> f64 {
        let mut acc = crate::ksum::KahanSum::new();
        let j_lo = math::ceil(u - self.support_end()) as i64;
        let j_hi = math::floor(u - self.support_start()) as i64;
        for j in j_lo..=j_hi {
            acc.add(self.eval(u - j as f64));
        }
        acc.total()
    }

    /// First-moment lattice sum `sum_j j f(u - j)`.
    pub fn shifted_first_moment(&self, u: f64) -> f64 {
        let mut acc = crate::ksum::KahanSum::new();
        let j_lo = math::ceil(u - self.support_end()) as i64;
        let j_hi = math::floor(u - self.support_start()) as i64;
        for j in j_lo..=j_hi {
            acc.add(j as f64 * self.eval(u - j as f64));
        }
        acc.total()
    }
}

/// Antiderivative of a compactly supported piecewise polynomial.
///
/// Unlike the underlying [`PiecewisePoly`], this does not vanish to the right
/// of the support: it equals the total integral there.
#[derive(Debug, Clone)]
pub struct CumulativeIntegral {
    poly: PiecewisePoly,
    total: f64,
}

impl CumulativeIntegral {
    /// Value of the running integral at `x`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.poly.support_start() {
            0.0
        } else if x >= self.poly.support_end() {
            self.total
        } else {
            self.poly.eval(x)
        }
    }

    /// Integral over the full support.
    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    /// The underlying piecewise polynomial (antiderivative restricted to the
    /// support).
    #[inline]
    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }
}

/// Evaluates a polynomial given coefficients in ascending degree.
#[inline]
pub fn horner(coefs: &[f64], u: f64) -> f64 {
    let mut acc = 0.0f64;
    for &c in coefs.iter().rev() {
        acc = acc * u + c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn degree_zero_is_the_unit_box() {
        let b0 = PiecewisePoly::bspline(0);
        assert_eq!(b0.eval(0.0), 1.0);
        assert_eq!(b0.eval(0.49), 1.0);
        assert_eq!(b0.eval(0.51), 0.0);
        assert_eq!(b0.eval(-0.51), 0.0);
    }

    #[test]
    fn known_values_of_low_degrees() {
        // Hat function: B_1(0) = 1, B_1(+-1/2) = 1/2.
        let b1 = PiecewisePoly::bspline(1);
        assert_relative_eq!(b1.eval(0.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(b1.eval(0.5), 0.5, epsilon = 1e-15);
        // Quadratic: B_2(0) = 3/4, B_2(+-1/2) = 1/2, B_2(+-1) = 1/8.
        let b2 = PiecewisePoly::bspline(2);
        assert_relative_eq!(b2.eval(0.0), 0.75, epsilon = 1e-15);
        assert_relative_eq!(b2.eval(1.0), 0.125, epsilon = 1e-15);
        // Cubic at integers: B_3(0) = 2/3, B_3(+-1) = 1/6.
        let b3 = PiecewisePoly::bspline(3);
        assert_relative_eq!(b3.eval(0.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(b3.eval(-1.0), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn unit_mass_and_central_moments() {
        for d in 0..=10 {
            let b = PiecewisePoly::bspline(d);
            assert_relative_eq!(b.moment(0), 1.0, epsilon = 1e-13);
            // Sum of d+1 independent U(-1/2,1/2): variance (d+1)/12.
            assert_relative_eq!(b.moment(2), (d as f64 + 1.0) / 12.0, epsilon = 1e-13);
            // Even function: odd moments vanish.
            assert!(b.moment(1).abs() < 1e-14, "degree {d}");
            assert!(b.moment(3).abs() < 1e-13, "degree {d}");
        }
    }

    #[test]
    fn fourth_moment_from_cumulants() {
        // m4 = 3 k2^2 + k4 with k2 = (d+1)/12, k4 = -(d+1)/120.
        for d in [0usize, 4, 5, 10] {
            let b = PiecewisePoly::bspline(d);
            let n = d as f64 + 1.0;
            let m4 = 3.0 * (n / 12.0) * (n / 12.0) - n / 120.0;
            assert_relative_eq!(b.moment(4), m4, epsilon = 1e-12);
        }
    }

    #[test]
    fn partition_of_unity_and_linear_reproduction() {
        for d in 1..=10 {
            let b = PiecewisePoly::bspline(d);
            for &u in &[0.0, 0.1, core::f64::consts::FRAC_1_PI, 0.5, 0.77, 12.34] {
                assert_relative_eq!(b.shifted_sum(u), 1.0, epsilon = 1e-13);
                assert_relative_eq!(b.shifted_first_moment(u), u, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn degree_zero_fails_linear_reproduction_off_lattice() {
        // The box reproduces constants but not x; this failure mode is what
        // the validator must detect for a degree-0 interpolation kernel.
        let b0 = PiecewisePoly::bspline(0);
        assert_relative_eq!(b0.shifted_sum(0.3), 1.0, epsilon = 1e-14);
        assert!((b0.shifted_first_moment(0.3) - 0.3).abs() > 0.2);
    }

    #[test]
    fn derivative_and_antiderivative_are_inverse() {
        let b5 = PiecewisePoly::bspline(5);
        let d = b5.derivative();
        let back = d.antiderivative();
        for &x in &[-2.9, -1.0, -0.25, 0.0, 0.6, 1.5, 2.99] {
            assert_relative_eq!(back.eval(x), b5.eval(x), epsilon = 1e-13);
        }
        // B_5' integrates to zero over the support.
        assert!(back.total().abs() < 1e-14);
    }

    #[test]
    fn convolution_of_bsplines_adds_degrees_plus_one() {
        // (B_4 * B_5)(x) == B_10(x): check by direct numerical convolution.
        let phi = PiecewisePoly::bspline(4);
        let w = PiecewisePoly::bspline(5);
        let b10 = PiecewisePoly::bspline(10);
        for &x in &[0.0, 0.3, 1.1, 2.5, 4.9, -3.7] {
            let mut f = |u: f64| phi.eval(u) * w.eval(x - u);
            let conv = crate::quad::adaptive(&mut f, -2.5, 2.5, 1e-13, 30);
            assert_relative_eq!(conv, b10.eval(x), epsilon = 1e-11);
        }
    }

    #[test]
    fn knot_jumps_vanish_for_continuous_degrees() {
        for d in 1..=8 {
            let b = PiecewisePoly::bspline(d);
            for j in b.knot_jumps() {
                assert!(j.abs() < 1e-14, "degree {d}");
            }
        }
        let b0 = PiecewisePoly::bspline(0);
        assert_eq!(b0.knot_jumps(), alloc::vec![1.0, -1.0]);
    }
}
