//! Compensated (Neumaier) summation.
//!
//! The reconstruction sums reach ~10^7 terms of mixed sign whose total is
//! orders of magnitude below the largest partial sums, so naive accumulation
//! loses digits we actually need. Neumaier's variant of Kahan summation keeps
//! a running compensation term and, unlike plain Kahan, stays correct when an
//! addend is larger than the running sum.

/// Running compensated sum.
///
/// `total()` returns the sum of everything fed to [`KahanSum::add`] with an
/// error bounded by ~2 ulp independent of the number of terms, provided no
/// intermediate overflow occurs.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    /// Starts an empty sum.
    #[inline]
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term.
    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        // Whichever operand was larger in magnitude donated the low-order
        // bits that `t` dropped; recover them into the compensation.
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated total.
    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of a slice.
pub fn sum(values: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        // 1 followed by 1e16 copies-worth of 1e-16 in alternating blocks is
        // too slow; this classic 4-term case already defeats naive f64.
        let mut s = KahanSum::new();
        for &v in &[1.0, 1e100, 1.0, -1e100] {
            s.add(v);
        }
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn matches_exact_sum_of_geometric_series() {
        let terms: alloc::vec::Vec<f64> = (0..64).map(|k| 0.5f64.powi(k)).collect();
        let exact = 2.0 - 0.5f64.powi(63);
        assert_eq!(sum(&terms), exact);
    }
}
