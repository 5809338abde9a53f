//! Float math that works with and without `std`.
//!
//! With the `std` feature (the default) these forward to the intrinsics-backed
//! methods on `f64`; without it they call `libm`. Both implement the same
//! IEEE-754 operations, and every consumer in this crate goes through this
//! module so the two builds differ by at most the final ulp of a libm call.

#![allow(clippy::missing_docs_in_private_items)]

macro_rules! unary {
    ($($name:ident),* $(,)?) => {$(
        #[inline]
        pub fn $name(x: f64) -> f64 {
            #[cfg(feature = "std")]
            { f64::$name(x) }
            #[cfg(not(feature = "std"))]
            { libm::$name(x) }
        }
    )*};
}

unary!(sqrt, sin, cos, tan, asin, acos, atan, exp, floor, ceil, round, trunc, cbrt);

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::ln(x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::log(x)
    }
}

/// Four-quadrant arctangent of `y/x`.
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::atan2(y, x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::atan2(y, x)
    }
}

/// `x` raised to the floating-point power `y`.
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::powf(x, y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, y)
    }
}

/// `x` raised to an integer power, by the platform's `powi`.
#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::powi(x, n)
    }
    #[cfg(not(feature = "std"))]
    {
        // libm has no powi; exponentiation by squaring keeps it exact for
        // the small exponents used here.
        let mut base = if n < 0 { 1.0 / x } else { x };
        let mut e = n.unsigned_abs();
        let mut acc = 1.0;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }
}

/// Euclidean norm of `(x, y)` without undue overflow.
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        f64::hypot(x, y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::hypot(x, y)
    }
}

/// Simultaneous sine and cosine.
#[inline]
pub fn sin_cos(x: f64) -> (f64, f64) {
    #[cfg(feature = "std")]
    {
        f64::sin_cos(x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::sincos(x)
    }
}

/// Positive fractional part, in `[0, 1)`.
#[inline]
pub fn fract_pos(x: f64) -> f64 {
    let f = x - floor(x);
    // floor(x) == x for huge x makes f == 0; rounding can also push f to 1.0.
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}


/// Hurwitz zeta `sum_{k >= 0} (a + k)^{-s}` for integer order `s >= 2`.
///
/// Euler-Maclaurin after summing directly up to `a + n >= max(24, 2s)`:
/// the integral term, the half-sample correction, and four Bernoulli
/// corrections leave a truncation error far below 1e-12 of the result for
/// the orders used in this crate (`s <= 64`).
pub fn hurwitz_zeta(s: u32, a: f64) -> f64 {
    debug_assert!((2..=64).contains(&s) && a > 0.0);
    let cut = (2 * s) as f64;
    let cut = if cut < 24.0 { 24.0 } else { cut };
    let n = if a >= cut { 0 } else { (cut - a) as usize + 1 };
    let mut acc = crate::ksum::KahanSum::new();
    for k in 0..n {
        acc.add(powi(a + k as f64, -(s as i32)));
    }
    let x = a + n as f64;
    acc.add(powi(x, 1 - s as i32) / (s as f64 - 1.0));
    acc.add(0.5 * powi(x, -(s as i32)));
    // B_{2j} / (2j)! for j = 1..=4.
    let coefs = [1.0 / 12.0, -1.0 / 720.0, 1.0 / 30_240.0, -1.0 / 1_209_600.0];
    let mut rising = s as f64;
    let mut power = powi(x, -(s as i32) - 1);
    let inv2 = 1.0 / (x * x);
    for (j, c) in coefs.iter().enumerate() {
        acc.add(c * rising * power);
        let base = s as f64 + (2 * j + 1) as f64;
        rising *= base * (base + 1.0);
        power *= inv2;
    }
    acc.total()
}
