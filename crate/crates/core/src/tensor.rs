//! Small dense tensors of expressions and their trace-free projections.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{KernelError, TensorError};
use crate::expr::Expr;
use crate::rational::{normalize, RationalForm};

/// Position of a tensor index. Labels only: no metric raises or lowers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Upper,
    Lower,
}

/// Commutative-ring operations shared by [`Expr`] and [`RationalForm`].
pub trait Ring: Clone + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, c: &BigRational) -> Self;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&BigRational::from_integer(BigInt::from(-1))))
    }
}

impl Ring for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, c: &BigRational) -> Self {
        self.scaled(c.clone())
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

impl Ring for RationalForm {
    fn zero() -> Self {
        RationalForm::zero()
    }
    fn add(&self, other: &Self) -> Self {
        RationalForm::add(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RationalForm::mul(self, other)
    }
    fn scale(&self, c: &BigRational) -> Self {
        RationalForm::scale(self, c)
    }
    fn sub(&self, other: &Self) -> Self {
        RationalForm::sub(self, other)
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// An `m x m` array, row-major, with index positions recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor2<T = Expr> {
    m: usize,
    entries: Vec<T>,
    slots: [Slot; 2],
}

impl<T> Tensor2<T> {
    pub fn from_fn(m: usize, slots: [Slot; 2], mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                entries.push(f(i, j));
            }
        }
        Tensor2 { m, entries, slots }
    }

    /// Like [`Tensor2::from_fn`] with entries computed on the rayon pool.
    pub fn par_from_fn(m: usize, slots: [Slot; 2], f: impl Fn(usize, usize) -> T + Sync) -> Self
    where
        T: Send,
    {
        let entries = (0..m * m).into_par_iter().map(|n| f(n / m, n % m)).collect();
        Tensor2 { m, entries, slots }
    }

    /// Mixed tensor `T^i_j`.
    pub fn mixed(m: usize, f: impl FnMut(usize, usize) -> T) -> Self {
        Tensor2::from_fn(m, [Slot::Upper, Slot::Lower], f)
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let m = rows.len();
        assert!(rows.iter().all(|r| r.len() == m), "tensor must be square");
        Tensor2 {
            m,
            entries: rows.into_iter().flatten().collect(),
            slots: [Slot::Upper, Slot::Lower],
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn slots(&self) -> [Slot; 2] {
        self.slots
    }

    pub fn with_slots(mut self, slots: [Slot; 2]) -> Self {
        self.slots = slots;
        self
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.m.max(1))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor2<U> {
        Tensor2 {
            m: self.m,
            entries: self.entries.iter().map(f).collect(),
            slots: self.slots,
        }
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> Result<U, E>) -> Result<Tensor2<U>, E> {
        Ok(Tensor2 {
            m: self.m,
            entries: self.entries.iter().map(f).collect::<Result<_, _>>()?,
            slots: self.slots,
        })
    }
}

impl<T: Ring> Tensor2<T> {
    pub fn trace(&self) -> T {
        (0..self.m).fold(T::zero(), |acc, i| acc.add(self.get(i, i)))
    }

    /// Matrix product `(self * other)^i_j = self^i_k other^k_j`.
    pub fn matmul(&self, other: &Tensor2<T>) -> Tensor2<T> {
        Tensor2::from_fn(self.m, self.slots, |i, j| {
            (0..self.m).fold(T::zero(), |acc, k| acc.add(&self.get(i, k).mul(other.get(k, j))))
        })
    }

    pub fn add(&self, other: &Tensor2<T>) -> Tensor2<T> {
        Tensor2::from_fn(self.m, self.slots, |i, j| self.get(i, j).add(other.get(i, j)))
    }

    pub fn sub(&self, other: &Tensor2<T>) -> Tensor2<T> {
        Tensor2::from_fn(self.m, self.slots, |i, j| self.get(i, j).sub(other.get(i, j)))
    }

    pub fn scale(&self, c: &BigRational) -> Tensor2<T> {
        self.map(|e| e.scale(c))
    }

    /// `T - (1/m) tr(T) delta`.
    pub fn traceless(&self) -> Tensor2<T> {
        let shift = self.trace().scale(&ratio(1, self.m as i64));
        Tensor2::from_fn(self.m, self.slots, |i, j| {
            if i == j {
                self.get(i, j).sub(&shift)
            } else {
                self.get(i, j).clone()
            }
        })
    }
}

/// An `m x m x m` array `S^i_{jk}`, index order `(i, j, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T = Expr> {
    m: usize,
    entries: Vec<T>,
}

impl<T> Tensor3<T> {
    pub fn from_fn(m: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(m * m * m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    entries.push(f(i, j, k));
                }
            }
        }
        Tensor3 { m, entries }
    }

    pub fn par_from_fn(m: usize, f: impl Fn(usize, usize, usize) -> T + Sync) -> Self
    where
        T: Send,
    {
        let entries = (0..m * m * m)
            .into_par_iter()
            .map(|n| f(n / (m * m), (n / m) % m, n % m))
            .collect();
        Tensor3 { m, entries }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &T {
        &self.entries[(i * self.m + j) * self.m + k]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor3<U> {
        Tensor3 {
            m: self.m,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> Result<U, E>) -> Result<Tensor3<U>, E> {
        Ok(Tensor3 {
            m: self.m,
            entries: self.entries.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    /// Nested `[i][j][k]` vectors.
    pub fn to_nested(&self) -> Vec<Vec<Vec<T>>>
    where
        T: Clone,
    {
        (0..self.m)
            .map(|i| {
                (0..self.m)
                    .map(|j| (0..self.m).map(|k| self.get(i, j, k).clone()).collect())
                    .collect()
            })
            .collect()
    }
}

impl<T: Ring> Tensor3<T> {
    /// `T_j = sum_l S^l_{lj}`, the contraction of the upper index with the
    /// first lower one.
    pub fn contraction_first(&self) -> Vec<T> {
        (0..self.m)
            .map(|j| (0..self.m).fold(T::zero(), |acc, l| acc.add(self.get(l, l, j))))
            .collect()
    }

    /// `sum_l S^l_{jl}`.
    pub fn contraction_second(&self) -> Vec<T> {
        (0..self.m)
            .map(|j| (0..self.m).fold(T::zero(), |acc, l| acc.add(self.get(l, j, l))))
            .collect()
    }

    /// Trace-free part of a tensor symmetric in its lower indices:
    /// `S^i_{jk} - (delta^i_j T_k + delta^i_k T_j) / (m + 1)`. This is the
    /// projection onto trace-free symmetric tensors, killing both
    /// contractions. Symmetry is not checked here.
    pub fn traceless_symmetric_unchecked(&self) -> Tensor3<T> {
        let t = self.contraction_first();
        let c = ratio(1, self.m as i64 + 1);
        Tensor3::from_fn(self.m, |i, j, k| {
            let mut v = self.get(i, j, k).clone();
            if i == j {
                v = v.sub(&t[k].scale(&c));
            }
            if i == k {
                v = v.sub(&t[j].scale(&c));
            }
            v
        })
    }
}

/// Checks `S^i_{jk} = S^i_{kj}` exactly.
fn check_symmetric(s: &Tensor3<RationalForm>) -> Result<(), TensorError> {
    let m = s.dim();
    for i in 0..m {
        for j in 0..m {
            for k in j + 1..m {
                if !s.get(i, j, k).sub(s.get(i, k, j)).is_zero() {
                    return Err(TensorError::NotSymmetric { i, j, k });
                }
            }
        }
    }
    Ok(())
}

/// `T - (1/m) tr(T) delta`.
pub fn traceless2(t: &Tensor2<Expr>) -> Tensor2<Expr> {
    t.traceless()
}

/// Trace-free part of a symmetric 3-tensor; fails with `NotSymmetric` when
/// the lower indices are not symmetric under exact comparison.
pub fn traceless3(s: &Tensor3<Expr>) -> Result<Tensor3<Expr>, TensorError> {
    let rf = s.try_map(normalize)?;
    check_symmetric(&rf)?;
    Ok(s.traceless_symmetric_unchecked())
}

pub(crate) fn traceless3_rf(s: &Tensor3<RationalForm>) -> Result<Tensor3<RationalForm>, TensorError> {
    check_symmetric(s)?;
    Ok(s.traceless_symmetric_unchecked())
}

/// Normal-form conversion of every entry.
pub fn normalize2(t: &Tensor2<Expr>) -> Result<Tensor2<RationalForm>, KernelError> {
    t.try_map(normalize)
}
