use std::ops::{Deref, DerefMut};

use num_complex::Complex64 as C64;

/// Complex amplitudes over the states of a [`Basis`](crate::model::Basis),
/// in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn from_vec(amps: Vec<C64>) -> Self {
        StateVector(amps)
    }

    pub fn from_real(amps: &[f64]) -> Self {
        StateVector(amps.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the norm before scaling.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.0.iter_mut().for_each(|a| *a *= inv);
        }
        n
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.0, &other.0)
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Deref for StateVector {
    type Target = [C64];
    fn deref(&self) -> &[C64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [C64] {
        &mut self.0
    }
}

/// `<a|b>` with a fixed left-to-right summation order.
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}
