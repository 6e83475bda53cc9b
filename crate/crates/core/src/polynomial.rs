//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients over the model parameters `λ_ij` and `ω_ij`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// A model parameter. Vertices are 0-based; `Omega(i, j)` has `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    /// Arrow `i -> j`.
    Lambda(usize, usize),
    /// Undirected edge `i -- j`, or the diagonal when `i == j`.
    Omega(usize, usize),
}

impl Variable {
    pub fn omega(i: usize, j: usize) -> Self {
        Variable::Omega(i.min(j), i.max(j))
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Variable::Lambda(i, j) => write!(f, "l{}_{}", i + 1, j + 1),
            Variable::Omega(i, j) => write!(f, "w{}_{}", i + 1, j + 1),
        }
    }
}

/// Product of variables with positive exponents, sorted by variable.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Variable, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Variable) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn factors(&self) -> &[(Variable, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    /// Total degree in the `ω` variables.
    pub fn omega_degree(&self) -> u32 {
        self.0
            .iter()
            .filter(|(v, _)| matches!(v, Variable::Omega(..)))
            .map(|&(_, e)| e)
            .sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut merged: BTreeMap<Variable, u32> = self.0.iter().copied().collect();
        for &(v, e) in &other.0 {
            *merged.entry(v).or_insert(0) += e;
        }
        Monomial(merged.into_iter().collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{v}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Map from monomials to nonzero integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonomialPolynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

impl MonomialPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::term(Monomial::one(), BigInt::one())
    }

    pub fn var(v: Variable) -> Self {
        Self::term(Monomial::var(v), BigInt::one())
    }

    pub fn term(m: Monomial, c: BigInt) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Evaluates with `value(v)` for every variable.
    pub fn evaluate(&self, value: impl Fn(Variable) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let c: f64 = c.to_string().parse().expect("integer");
                m.factors().iter().fold(c, |acc, &(v, e)| acc * value(v).powi(e as i32))
            })
            .sum()
    }
}

impl Add for &MonomialPolynomial {
    type Output = MonomialPolynomial;

    fn add(self, rhs: &MonomialPolynomial) -> MonomialPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MonomialPolynomial {
    type Output = MonomialPolynomial;

    fn sub(self, rhs: &MonomialPolynomial) -> MonomialPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &MonomialPolynomial {
    type Output = MonomialPolynomial;

    fn neg(self) -> MonomialPolynomial {
        MonomialPolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MonomialPolynomial {
    type Output = MonomialPolynomial;

    fn mul(self, rhs: &MonomialPolynomial) -> MonomialPolynomial {
        let mut out = MonomialPolynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for MonomialPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() {
                "-"
            } else if k > 0 {
                "+"
            } else {
                ""
            };
            if k > 0 {
                f.write_str(" ")?;
            }
            let abs = c.abs();
            if abs.is_one() {
                write!(f, "{sign}{m}")?;
            } else {
                write!(f, "{sign}{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_cancels() {
        let x = MonomialPolynomial::var(Variable::Lambda(0, 1));
        let y = MonomialPolynomial::var(Variable::omega(2, 1));
        let s = &x + &y;
        let d = &x - &y;
        // (x + y)(x - y) = x^2 - y^2
        let p = &s * &d;
        assert_eq!(p.len(), 2);
        let q = &(&x * &x) - &(&y * &y);
        assert_eq!(p, q);
        assert!((&p - &q).is_zero());
        assert_eq!(p.to_string(), "l1_2^2 -w2_3^2");
    }

    #[test]
    fn evaluation_and_degrees() {
        let x = MonomialPolynomial::var(Variable::Lambda(0, 1));
        let w = MonomialPolynomial::var(Variable::omega(0, 0));
        let p = &(&x * &w) + &MonomialPolynomial::one();
        let val = p.evaluate(|v| if v == Variable::Lambda(0, 1) { 2.0 } else { 3.0 });
        assert_eq!(val, 7.0);
        let (m, _) = (&x * &w).terms().next().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        assert_eq!(m.degree(), 2);
        assert_eq!(m.omega_degree(), 1);
    }
}
