//! Tolerance policy and the shared margin type.
//!
//! Alternating sums of nearly equal large terms lose precision in proportion
//! to the term magnitude, so every pass/fail decision is made relative to a
//! recorded scale: an inequality passes when `margin >= -rel * scale` with
//! `scale` the largest absolute term (scalar sums) or the largest operand
//! spectral radius (Loewner comparisons).

use serde::{Deserialize, Serialize};

/// Default relative tolerance for margin checks.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Minimum point spacing for divided differences, as a fraction of the span
/// of the points. Below it the product formula divides by near-zero gaps.
pub const MIN_SPACING_FRACTION: f64 = 1e-6;

/// Half-width of the window around a removable singularity inside which a
/// catalog function is evaluated by its limit.
pub const SINGULARITY_WINDOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rel: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rel: DEFAULT_REL_TOL }
    }
}

impl TolerancePolicy {
    pub fn new(rel: f64) -> Self {
        Self { rel }
    }

    /// Absolute tolerance at a given scale.
    pub fn at_scale(&self, scale: f64) -> f64 {
        self.rel * scale.abs()
    }
}

/// Signed left-minus-right value of an inequality, with the scale it was
/// computed at. For Loewner comparisons `value` is the smallest eigenvalue
/// of the difference and `scale` the largest operand spectral radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub value: f64,
    pub scale: f64,
}

impl Margin {
    pub fn new(value: f64, scale: f64) -> Self {
        Self { value, scale }
    }

    pub fn passes(&self, tol: TolerancePolicy) -> bool {
        self.value >= -tol.at_scale(self.scale)
    }
}

/// Compensated (Kahan-Babuska) accumulator for alternating sums.
///
/// Tracks the running maximum absolute addend, which becomes the margin
/// scale.
#[derive(Debug, Default, Clone, Copy)]
pub struct SignedSum {
    sum: f64,
    comp: f64,
    max_abs: f64,
}

impl SignedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: f64) {
        self.add_with_magnitude(term, term.abs());
    }

    /// Add a term whose computation carries a larger intrinsic magnitude
    /// than its value (e.g. the determinant of a near-singular matrix,
    /// where the elimination works at the scale of the Hadamard bound).
    /// The magnitude feeds the scale, the value feeds the sum.
    pub fn add_with_magnitude(&mut self, term: f64, magnitude: f64) {
        self.max_abs = self.max_abs.max(magnitude.abs()).max(term.abs());
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Largest absolute addend seen so far.
    pub fn scale(&self) -> f64 {
        self.max_abs
    }

    pub fn into_margin(self) -> Margin {
        Margin::new(self.value(), self.scale())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_pass_rule() {
        let tol = TolerancePolicy::default();
        assert!(Margin::new(0.0, 1.0).passes(tol));
        assert!(Margin::new(-0.5e-9, 1.0).passes(tol));
        assert!(!Margin::new(-2e-9, 1.0).passes(tol));
        // Tolerance grows with scale.
        assert!(Margin::new(-2e-9, 10.0).passes(tol));
    }

    #[test]
    fn compensated_sum_cancellation() {
        let mut s = SignedSum::new();
        s.add(1e16);
        s.add(1.0);
        s.add(-1e16);
        assert_eq!(s.value(), 1.0);
        assert_eq!(s.scale(), 1e16);
    }

    #[test]
    fn zero_scale_zero_margin_passes() {
        let tol = TolerancePolicy::default();
        assert!(Margin::new(0.0, 0.0).passes(tol));
    }
}
