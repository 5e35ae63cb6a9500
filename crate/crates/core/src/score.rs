//! Objective scores kept in natural-log space.
//!
//! A score is a product of probabilities or commonalities; with a hundred
//! or more factors the plain product underflows f64, so the factors are
//! accumulated as a sum of logs. Exact zero stays exact: it is stored as
//! negative infinity and survives any further multiplication, which is what
//! the blocking mechanism relies on.

use std::cmp::Ordering;
use std::ops::{Mul, MulAssign};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Score {
    ln: f64,
}

impl Score {
    pub const ZERO: Score = Score {
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: Score = Score { ln: 0.0 };

    /// Builds a score from a plain value in [0, 1]. Zero maps to the exact
    /// zero representation.
    pub fn from_value(v: f64) -> Score {
        if v == 0.0 {
            Score::ZERO
        } else {
            Score { ln: v.ln() }
        }
    }

    pub fn from_ln(ln: f64) -> Score {
        Score { ln }
    }

    /// The score as a plain value; exponentiates back out of log space.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    /// Natural log of the score; negative infinity for exact zero.
    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// Total order on scores (log values never become NaN for factor
    /// sequences in [0, 1]).
    pub fn total_cmp(&self, other: &Score) -> Ordering {
        self.ln.total_cmp(&other.ln)
    }
}

impl Mul for Score {
    type Output = Score;

    // Multiplication of values is addition of logs.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: Score) -> Score {
        Score {
            ln: self.ln + rhs.ln,
        }
    }
}

impl MulAssign for Score {
    #[allow(clippy::suspicious_op_assign_impl)]
    fn mul_assign(&mut self, rhs: Score) {
        self.ln += rhs.ln;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_annihilates() {
        let s = Score::from_value(0.25) * Score::ZERO * Score::from_value(0.5);
        assert!(s.is_zero());
        assert_eq!(s.value(), 0.0);
    }

    #[test]
    fn one_is_neutral() {
        let s = Score::ONE * Score::from_value(0.37);
        assert!((s.value() - 0.37).abs() < 1e-15);
    }

    #[test]
    fn products_match_direct_multiplication() {
        let factors = [0.9, 0.8, 0.7, 0.4, 0.6, 0.6, 0.6, 0.54, 0.6, 0.78];
        let mut s = Score::ONE;
        let mut direct = 1.0;
        for f in factors {
            s *= Score::from_value(f);
            direct *= f;
        }
        assert!((s.value() - direct).abs() < 1e-12);
    }

    #[test]
    fn ordering_is_total_and_zero_smallest() {
        let a = Score::from_value(1e-200);
        let b = Score::from_value(1e-201);
        assert_eq!(a.total_cmp(&b), Ordering::Greater);
        assert_eq!(Score::ZERO.total_cmp(&b), Ordering::Less);
    }
}
