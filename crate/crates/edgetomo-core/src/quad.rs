//! One-dimensional quadrature: Gauss-Legendre panels and an adaptive
//! Gauss-Kronrod 7(15) integrator.
//!
//! Every integrand in this crate is piecewise smooth once the caller splits
//! at the known breakpoints (spline knots, profile breakpoints, tangency
//! points), so a 15-point Kronrod rule with bisection on the error estimate
//! converges fast; there is no need for anything fancier. All node/weight
//! tables are hard-coded to keep results bit-identical across platforms.

use alloc::vec::Vec;

use crate::ksum::KahanSum;
use crate::math;

/// Nodes of the 15-point Kronrod extension on `[-1, 1]` (nonnegative half;
/// the rule is symmetric). Odd-indexed entries are the embedded 7-point
/// Gauss nodes.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];

/// Kronrod weights matching [`XGK`].
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];

/// Weights of the embedded 7-point Gauss rule (for `XGK[1], XGK[3], ...`).
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// 8-point Gauss-Legendre nodes on `[-1, 1]` (nonnegative half).
const XG8: [f64; 4] = [
    0.1834346424956498,
    0.525532409916329,
    0.7966664774136267,
    0.9602898564975363,
];

/// 8-point Gauss-Legendre weights matching [`XG8`].
const WG8: [f64; 4] = [
    0.362683783378362,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// Result of one Gauss-Kronrod application: (integral, error estimate).
fn kronrod_pair<F: FnMut(f64) -> f64 + ?Sized>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = KahanSum::new();
    let mut gauss = KahanSum::new();
    for i in 0..8 {
        let (fl, fr) = if XGK[i] == 0.0 {
            let v = f(mid);
            (v, 0.0)
        } else {
            (f(mid - half * XGK[i]), f(mid + half * XGK[i]))
        };
        kronrod.add(WGK[i] * (fl + fr));
        if i % 2 == 1 {
            gauss.add(WG[i / 2] * (fl + fr));
        }
    }
    let ik = kronrod.total() * half;
    let ig = gauss.total() * half;
    // The classical QUADPACK error model sharpens |ik - ig|; plain difference
    // is pessimistic but robust, and robustness matters more here.
    (ik, (ik - ig).abs())
}

/// Adaptively integrates `f` over `[a, b]` to absolute tolerance `tol_abs`.
///
/// Interval halving on the largest-error subinterval, up to `max_depth`
/// bisection levels. Panels are processed in a deterministic order so the
/// result is reproducible bit for bit.
///
/// Returns the integral estimate; accuracy degrades gracefully (no panic) if
/// the depth cap is hit, which the caller-side oracles will catch.
pub fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol_abs: f64, max_depth: u32) -> f64 {
    adaptive_checked(f, a, b, tol_abs, max_depth).0
}

/// Like [`adaptive`] but also returns the summed error estimate of the
/// accepted panels.
///
/// When every panel converges before the depth cap the second component is
/// at most `tol_abs`; a value well above that means some panels were accepted
/// only because the cap was hit, so the caller can reject the result instead
/// of silently using it.
pub fn adaptive_checked(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol_abs: f64,
    max_depth: u32,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    // Work stack of (a, b, depth); accepted panels accumulate into `total`.
    let mut stack: Vec<(f64, f64, u32)> = alloc::vec![(a, b, 0)];
    let mut total = KahanSum::new();
    let mut err_sum = KahanSum::new();
    // Per-panel budget: splitting a panel halves its share of the budget.
    while let Some((pa, pb, depth)) = stack.pop() {
        let (value, err) = kronrod_pair(f, pa, pb);
        let share = tol_abs * (pb - pa).abs() / (b - a).abs();
        if err <= share.max(1e-300) || depth >= max_depth {
            total.add(value);
            err_sum.add(err);
        } else {
            let mid = 0.5 * (pa + pb);
            stack.push((mid, pb, depth + 1));
            stack.push((pa, mid, depth + 1));
        }
    }
    (total.total(), err_sum.total())
}

/// Composite 8-point Gauss-Legendre over `panels` equal subdivisions.
///
/// For integrands known to be analytic on each panel this converges
/// geometrically; the caller chooses `panels` from the oscillation scale.
pub fn composite_gl8(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(1);
    let h = (b - a) / n as f64;
    let mut total = KahanSum::new();
    for p in 0..n {
        let pa = a + h * p as f64;
        let mid = pa + 0.5 * h;
        let half = 0.5 * h;
        for i in 0..4 {
            total.add(WG8[i] * f(mid - half * XG8[i]));
            total.add(WG8[i] * f(mid + half * XG8[i]));
        }
    }
    total.total() * (b - a) / (2.0 * n as f64)
}

/// Gauss-Legendre nodes and weights of order `n` on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence from Chebyshev initial
/// guesses; each root is simple and the guesses land within its basin, so
/// five iterations reach machine precision for any practical order. Exact
/// for polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    // Legendre P_n and its derivative by upward recurrence.
    let legendre = |x: f64| -> (f64, f64) {
        let (mut p0, mut p1) = (1.0f64, x);
        if n == 1 {
            return (x, 1.0);
        }
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    for i in 0..n {
        let mut x = -math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// Integrates over `[a, b]` splitting first at the given interior breakpoints.
///
/// Breakpoints outside `(a, b)` are ignored; they need not be sorted.
pub fn adaptive_with_breakpoints(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol_abs: f64,
    max_depth: u32,
) -> f64 {
    adaptive_with_breakpoints_checked(f, a, b, breaks, tol_abs, max_depth).0
}

/// Breakpoint-splitting variant of [`adaptive_checked`]: returns the integral
/// together with the summed error estimate of all accepted panels.
pub fn adaptive_with_breakpoints_checked(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol_abs: f64,
    max_depth: u32,
) -> (f64, f64) {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a.min(b) && x < a.max(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut total = KahanSum::new();
    let mut err_sum = KahanSum::new();
    let mut prev = lo;
    for &c in cuts.iter().chain(core::iter::once(&hi)) {
        if c > prev {
            let (value, err) = adaptive_checked(f, prev, c, tol_abs * (c - prev) / (hi - lo), max_depth);
            total.add(value);
            err_sum.add(err);
            prev = c;
        }
    }
    (sign * total.total(), err_sum.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kronrod_is_exact_for_low_degree_polynomials() {
        // The 15-point Kronrod rule integrates degree <= 22 exactly.
        let mut f = |x: f64| 5.0 * x.powi(9) - x.powi(4) + 2.0;
        let (v, _) = kronrod_pair(&mut f, -1.0, 3.0);
        // Exact: 0.5*(3^10 - 1) - (3^5 + 1)/5 + 2*4
        let exact = 0.5 * (3f64.powi(10) - 1.0) - (3f64.powi(5) + 1.0) / 5.0 + 8.0;
        assert_relative_eq!(v, exact, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_a_spiky_integrand() {
        // Integral of 1/(1 + 400 (x-0.3)^2) over [0,1]: arctan form.
        let mut f = |x: f64| 1.0 / (1.0 + 400.0 * (x - 0.3) * (x - 0.3));
        let v = adaptive(&mut f, 0.0, 1.0, 1e-12, 40);
        let exact = (f64::atan(20.0 * 0.7) + f64::atan(20.0 * 0.3)) / 20.0;
        assert_relative_eq!(v, exact, epsilon = 1e-11);
    }

    #[test]
    fn checked_variant_flags_a_depth_capped_integral() {
        // Smooth integrand, generous depth: reported error stays within budget.
        let mut smooth = |x: f64| (x * x).exp();
        let (_, err) = adaptive_checked(&mut smooth, 0.0, 1.0, 1e-10, 30);
        assert!(err <= 1e-10, "converged run reported error {err}");
        // A needle that cannot be resolved in two bisection levels: the error
        // report must reveal the failure instead of hiding it.
        let mut needle = |x: f64| 1.0 / (1e-8 + (x - 0.37) * (x - 0.37));
        let (_, err) = adaptive_checked(&mut needle, 0.0, 1.0, 1e-10, 2);
        assert!(err > 1e-4, "depth-capped run reported error {err}");
    }

    #[test]
    fn composite_gl8_converges_on_oscillatory_smooth_integrand() {
        let mut f = |x: f64| (10.0 * x).cos();
        let v = composite_gl8(&mut f, 0.0, core::f64::consts::PI, 24);
        assert!(v.abs() < 1e-13, "integral of cos(10x) over a period multiple, got {v}");
    }

    #[test]
    fn breakpoint_splitting_handles_kinks_and_orientation() {
        let mut f = |x: f64| x.abs();
        let v = adaptive_with_breakpoints(&mut f, -1.0, 2.0, &[0.0], 1e-13, 30);
        assert_relative_eq!(v, 2.5, epsilon = 1e-12);
        let mut f2 = |x: f64| x.abs();
        let back = adaptive_with_breakpoints(&mut f2, 2.0, -1.0, &[0.0], 1e-13, 30);
        assert_relative_eq!(back, -2.5, epsilon = 1e-12);
    }

    #[test]
    fn generated_gauss_legendre_matches_hardcoded_gl8() {
        let (nodes, weights) = gauss_legendre(8);
        for i in 0..4 {
            assert_relative_eq!(nodes[4 + i], XG8[i], epsilon = 1e-14);
            assert_relative_eq!(nodes[3 - i], -XG8[i], epsilon = 1e-14);
            assert_relative_eq!(weights[4 + i], WG8[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn generated_gauss_legendre_is_exact_at_top_degree() {
        // Order n integrates x^{2n-1} and x^{2n-2} exactly.
        for &n in &[3usize, 17, 51, 56] {
            let (nodes, weights) = gauss_legendre(n);
            let sum_w: f64 = weights.iter().sum();
            assert_relative_eq!(sum_w, 2.0, epsilon = 1e-13);
            let deg = 2 * n - 2;
            let int: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * x.powi(deg as i32))
                .sum();
            let exact = 2.0 / (deg as f64 + 1.0);
            assert_relative_eq!(int, exact, epsilon = 1e-12, max_relative = 1e-12);
        }
    }
}
