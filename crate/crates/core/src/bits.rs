//! ±1 vectors, uniform sampling and the independent bit-flip noise operator.

use rand::Rng;

use crate::error::{check_len, invalid, Error, Result};
use crate::seed::SeedStream;

/// A non-empty vector over {−1, +1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVector(Vec<i8>);

impl BitVector {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidDimension("bit vector must be non-empty".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b != 1 && b != -1) {
            return Err(invalid(format!("bit value {b} is not ±1")));
        }
        Ok(Self(bits))
    }

    /// All-equal vector of length `n`.
    pub fn constant(n: usize, value: i8) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// Vector whose bit `i` is `+1` iff bit `i` of `mask` is set.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!((1..=64).contains(&n));
        Self((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    /// Every vector of length `n`, in mask order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = BitVector> {
        assert!((1..32).contains(&n), "exhaustive enumeration limited to n < 32");
        (0..1u64 << n).map(move |m| Self::from_mask(n, m))
    }

    pub(crate) fn from_vec_unchecked(bits: Vec<i8>) -> Self {
        debug_assert!(!bits.is_empty() && bits.iter().all(|&b| b == 1 || b == -1));
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn into_inner(self) -> Vec<i8> {
        self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        self.0.iter().copied()
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().map(|&b| b as i64).sum()
    }

    /// The vector with bit `i` negated.
    pub fn flipped(&self, i: usize) -> Self {
        let mut out = self.0.clone();
        out[i] = -out[i];
        Self(out)
    }

    pub fn flip_in_place(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn set(&mut self, i: usize, value: i8) {
        assert!(value == 1 || value == -1);
        self.0[i] = value;
    }
}

impl std::ops::Neg for &BitVector {
    type Output = BitVector;

    fn neg(self) -> BitVector {
        BitVector(self.0.iter().map(|&b| -b).collect())
    }
}

impl std::ops::Neg for BitVector {
    type Output = BitVector;

    fn neg(self) -> BitVector {
        -&self
    }
}

/// Noise level ε ∈ [0, 1/2]: each bit is negated independently with probability ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec(f64);

impl NoiseSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(invalid(format!("noise level {epsilon} outside [0, 1/2]")));
        }
        Ok(Self(epsilon))
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }
}

pub fn sample_uniform(n: usize, seed: &SeedStream) -> Result<BitVector> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be at least 1".into()));
    }
    Ok(sample_uniform_with(n, &mut seed.rng()))
}

/// Uniform vector drawn from an existing generator (hot-loop variant).
pub fn sample_uniform_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitVector {
    assert!(n >= 1);
    let mut bits = Vec::with_capacity(n);
    let mut word = 0u64;
    for i in 0..n {
        if i % 64 == 0 {
            word = rng.random();
        }
        bits.push(if word & 1 == 1 { 1 } else { -1 });
        word >>= 1;
    }
    BitVector(bits)
}

/// Vector of i.i.d. bits equal to +1 with probability `p`.
pub fn sample_biased_with<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> BitVector {
    assert!(n >= 1);
    BitVector((0..n).map(|_| if rng.random::<f64>() < p { 1 } else { -1 }).collect())
}

pub fn apply_noise(omega: &BitVector, eps: NoiseSpec, seed: &SeedStream) -> BitVector {
    apply_noise_with(omega, eps, &mut seed.rng())
}

pub fn apply_noise_with<R: Rng + ?Sized>(omega: &BitVector, eps: NoiseSpec, rng: &mut R) -> BitVector {
    let e = eps.epsilon();
    if e == 0.0 {
        return omega.clone();
    }
    BitVector(omega.0.iter().map(|&b| if rng.random::<f64>() < e { -b } else { b }).collect())
}

/// Number of coordinates where `x` and `y` differ.
pub fn disagreements(x: &BitVector, y: &BitVector) -> Result<usize> {
    check_len(x.len(), y.len())?;
    Ok(x.0.iter().zip(&y.0).filter(|(a, b)| a != b).count())
}
