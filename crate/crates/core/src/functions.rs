//! Reference Boolean functions on {−1, +1}^n.

use crate::bits::BitVector;
use crate::error::{check_len, invalid, Result};

/// sign with the convention sign(0) = +1.
#[inline]
pub fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// A deterministic map {−1,+1}^n → {−1,+1}.
pub trait BooleanMap: Send + Sync {
    fn arity(&self) -> usize;

    /// Evaluate on a raw ±1 slice of length [`arity`](Self::arity).
    fn eval_slice(&self, x: &[i8]) -> i8;

    fn eval(&self, x: &BitVector) -> Result<i8> {
        check_len(self.arity(), x.len())?;
        Ok(self.eval_slice(x.as_slice()))
    }
}

/// Declared symmetry of a function under global negation of its input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// f(−x) = −f(x)
    Odd,
    /// f(−x) = f(x)
    Even,
    Neither,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceFunction {
    Majority {
        n: usize,
    },
    WeightedMajority {
        weights: Vec<f64>,
    },
    Parity {
        n: usize,
    },
    Dictator {
        n: usize,
        index: usize,
    },
    /// ω(1)·ω(2): an even function.
    EvenPairProduct {
        n: usize,
    },
    Constant {
        n: usize,
        value: i8,
    },
    Negated(Box<ReferenceFunction>),
}

impl ReferenceFunction {
    pub fn majority(n: usize) -> Result<Self> {
        if n == 0 || n.is_multiple_of(2) {
            return Err(invalid(format!("majority needs an odd number of inputs, got {n}")));
        }
        Ok(Self::Majority { n })
    }

    pub fn weighted_majority(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("weighted majority needs non-empty finite weights"));
        }
        Ok(Self::WeightedMajority { weights })
    }

    /// Majority on an even number of inputs with ties broken by the first coordinate.
    ///
    /// Implemented as the weighted majority with weights (3/2, 1, …, 1): the
    /// remaining n − 1 terms sum to an odd integer, so the total is never zero,
    /// the result is odd in ω, and it agrees with plain majority off ties.
    pub fn tie_broken_majority(n: usize) -> Result<Self> {
        if n % 2 == 1 {
            return Self::majority(n);
        }
        let mut w = vec![1.0; n];
        w[0] = 1.5;
        Self::weighted_majority(w)
    }

    pub fn parity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("parity needs n >= 1"));
        }
        Ok(Self::Parity { n })
    }

    /// Dictator of coordinate `index` (0-based).
    pub fn dictator(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(invalid(format!("dictator index {index} out of range for n = {n}")));
        }
        Ok(Self::Dictator { n, index })
    }

    pub fn even_pair_product(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("even pair product needs n >= 2"));
        }
        Ok(Self::EvenPairProduct { n })
    }

    pub fn constant(n: usize, value: i8) -> Result<Self> {
        if n == 0 || (value != 1 && value != -1) {
            return Err(invalid("constant needs n >= 1 and value ±1"));
        }
        Ok(Self::Constant { n, value })
    }

    pub fn negated(self) -> Self {
        match self {
            Self::Negated(inner) => *inner,
            f => Self::Negated(Box::new(f)),
        }
    }

    pub fn parity_class(&self) -> Parity {
        match self {
            Self::Majority { .. } | Self::Dictator { .. } => Parity::Odd,
            // Odd as long as no ±1 input sums to exactly zero.
            Self::WeightedMajority { .. } => Parity::Odd,
            Self::Parity { n } => {
                if n % 2 == 1 {
                    Parity::Odd
                } else {
                    Parity::Even
                }
            }
            Self::EvenPairProduct { .. } | Self::Constant { .. } => Parity::Even,
            Self::Negated(inner) => inner.parity_class(),
        }
    }
}

impl BooleanMap for ReferenceFunction {
    fn arity(&self) -> usize {
        match self {
            Self::Majority { n }
            | Self::Parity { n }
            | Self::Dictator { n, .. }
            | Self::EvenPairProduct { n }
            | Self::Constant { n, .. } => *n,
            Self::WeightedMajority { weights } => weights.len(),
            Self::Negated(inner) => inner.arity(),
        }
    }

    fn eval_slice(&self, x: &[i8]) -> i8 {
        match self {
            Self::Majority { .. } => {
                let s: i64 = x.iter().map(|&b| b as i64).sum();
                if s > 0 {
                    1
                } else {
                    -1
                }
            }
            Self::WeightedMajority { weights } => sign(weights.iter().zip(x).map(|(w, &b)| w * b as f64).sum()),
            Self::Parity { .. } => {
                if x.iter().filter(|&&b| b == -1).count() % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
            Self::Dictator { index, .. } => x[*index],
            Self::EvenPairProduct { .. } => x[0] * x[1],
            Self::Constant { value, .. } => *value,
            Self::Negated(inner) => -inner.eval_slice(x),
        }
    }
}
