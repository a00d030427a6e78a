use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Rational;
use crate::error::{Error, Result};

/// Increment variable `a_{func,level}`, both indices 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IncVar {
    pub func: usize,
    pub level: usize,
}

impl IncVar {
    pub fn new(func: usize, level: usize) -> Self {
        IncVar { func, level }
    }
}

/// Multilinear monomial: variables sorted by `(func, level)`, each function
/// index present at most once.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial(Vec<IncVar>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(func: usize, level: usize) -> Self {
        Monomial(vec![IncVar::new(func, level)])
    }

    pub fn new(mut vars: Vec<IncVar>) -> Result<Self> {
        vars.sort();
        if vars.windows(2).any(|w| w[0].func == w[1].func) {
            return Err(Error::Contract(
                "monomial repeats a function index".into(),
            ));
        }
        Ok(Monomial(vars))
    }

    /// Monomial `∏_i a_{i, levels[i-1]}`.
    pub fn from_levels(levels: &[usize]) -> Self {
        Monomial(
            levels
                .iter()
                .enumerate()
                .map(|(i, &j)| IncVar::new(i + 1, j))
                .collect(),
        )
    }

    pub fn vars(&self) -> &[IncVar] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Level assigned to each function `1..=n`, if the monomial covers exactly
    /// those functions.
    pub fn levels(&self, n: usize) -> Option<Vec<usize>> {
        if self.0.len() != n || self.0.iter().enumerate().any(|(k, v)| v.func != k + 1) {
            return None;
        }
        Some(self.0.iter().map(|v| v.level).collect())
    }

    fn product(&self, other: &Monomial) -> Result<Monomial> {
        let mut vars = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if x.func == y.func {
                        return Err(Error::Contract(format!(
                            "product shares function index {} (multilinearity)",
                            x.func
                        )));
                    }
                    if x < y {
                        vars.push(**x);
                        a.next();
                    } else {
                        vars.push(**y);
                        b.next();
                    }
                }
                (Some(x), None) => {
                    vars.push(**x);
                    a.next();
                }
                (None, Some(y)) => {
                    vars.push(**y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Ok(Monomial(vars))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|v| format!("a{},{}", v.func, v.level))
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Sparse polynomial in the increment variables, multilinear in each
/// function's increments. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IncrementPolynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl IncrementPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(func: usize, level: usize) -> Self {
        Self::term(Monomial::var(func, level), Rational::one())
    }

    /// `Σ_{t ≤ level} a_{func,t}`, the value `f_func(level)` in increment form.
    pub fn prefix_sum(func: usize, level: usize) -> Self {
        let mut p = Self::zero();
        for t in 1..=level {
            p.add_term(Monomial::var(func, t), Rational::one());
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
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

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &IncrementPolynomial) -> IncrementPolynomial {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &IncrementPolynomial) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &IncrementPolynomial, scale: &Rational) {
        if scale.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * scale);
        }
    }

    pub fn scale(&self, c: &Rational) -> IncrementPolynomial {
        let mut out = Self::zero();
        out.add_scaled(self, c);
        out
    }

    /// Product; fails if any pair of monomials shares a function index.
    pub fn mul(&self, other: &IncrementPolynomial) -> Result<IncrementPolynomial> {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.product(mb)?, ca * cb);
            }
        }
        Ok(out)
    }

    /// Evaluates at `a_{i,j} = increments[i-1][j-1]`.
    pub fn eval(&self, increments: &[Vec<Rational>]) -> Result<Rational> {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for var in m.vars() {
                let x = increments
                    .get(var.func - 1)
                    .and_then(|row| row.get(var.level - 1))
                    .ok_or_else(|| {
                        Error::Domain(format!("no value for a{},{}", var.func, var.level))
                    })?;
                v *= x;
            }
            total += v;
        }
        Ok(total)
    }
}
