//! Sparse multivariate polynomials in `(x_1, x_2, x_N)` with `f64`
//! coefficients.
//!
//! This is the carrier for every exact (spectral-path) object: harmonic
//! extensions, vertical primitives, equatorial corrections and `|∇v|^2`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Exponent triple `(i, j, k)` for `x_1^i x_2^j x_N^k`.
pub type Exponent = [u32; 3];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Exponent, f64>,
}

/// Serialized form of a single term.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Term {
    pub exponents: Exponent,
    pub coefficient: f64,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(e: Exponent, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(e, c);
        p
    }

    /// The coordinate function `x_{axis+1}`.
    pub fn var(axis: usize) -> Self {
        let mut e = [0; 3];
        e[axis] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponent, f64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, e: Exponent, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &f64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: Exponent) -> f64 {
        self.terms.get(&e).copied().unwrap_or(0.0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum total degree of the stored terms (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e[0] + e[1] + e[2]).max().unwrap_or(0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Drops coefficients with magnitude `<= tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(e, c)| (*e, *c))
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, c * s)).collect(),
        }
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut f = *e;
                f[axis] -= 1;
                out.add_term(f, c * e[axis] as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> [Self; 3] {
        [self.derivative(0), self.derivative(1), self.derivative(2)]
    }

    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            for axis in 0..3 {
                if e[axis] >= 2 {
                    let mut f = *e;
                    f[axis] -= 2;
                    out.add_term(f, c * (e[axis] * (e[axis] - 1)) as f64);
                }
            }
        }
        out
    }

    /// Laplacian in the first two variables only.
    pub fn horizontal_laplacian(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            for axis in 0..2 {
                if e[axis] >= 2 {
                    let mut f = *e;
                    f[axis] -= 2;
                    out.add_term(f, c * (e[axis] * (e[axis] - 1)) as f64);
                }
            }
        }
        out
    }

    /// `∫_0^{x_N} p(x', t) dt`.
    pub fn integrate_xn_from_zero(&self) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let mut f = *e;
            f[2] += 1;
            out.add_term(f, c / f[2] as f64);
        }
        out
    }

    /// Restriction to the plane `x_N = 0`.
    pub fn restrict_xn_zero(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[2] == 0)
                .map(|(e, c)| (*e, *c))
                .collect(),
        }
    }

    /// `p(x', -x_N)`.
    pub fn reflect_xn(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (*e, if e[2] % 2 == 1 { -c } else { *c }))
                .collect(),
        }
    }

    /// Terms of even degree in `x_N`.
    pub fn even_part_xn(&self) -> Self {
        self.filter_terms(|e| e[2] % 2 == 0)
    }

    /// Terms of odd degree in `x_N`.
    pub fn odd_part_xn(&self) -> Self {
        self.filter_terms(|e| e[2] % 2 == 1)
    }

    fn filter_terms<F: Fn(&Exponent) -> bool>(&self, keep: F) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (*e, *c))
                .collect(),
        }
    }

    /// Exact quotient by `x_N`; `None` when a term has no factor of `x_N`.
    pub fn divide_by_xn(&self) -> Option<Self> {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[2] == 0 {
                return None;
            }
            out.add_term([e[0], e[1], e[2] - 1], *c);
        }
        Some(out)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Nested Horner evaluation (`x_1` outermost, `x_N` innermost) in a fixed
    /// term order.
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let flat: Vec<(Exponent, f64)> = self.terms.iter().map(|(e, c)| (*e, *c)).collect();
        horner_level(&flat, 0, x)
    }

    pub fn to_terms(&self) -> Vec<Term> {
        self.terms
            .iter()
            .map(|(e, c)| Term {
                exponents: *e,
                coefficient: *c,
            })
            .collect()
    }

    pub fn from_term_list(terms: &[Term]) -> Self {
        Self::from_terms(terms.iter().map(|t| (t.exponents, t.coefficient)))
    }

    /// Largest coefficient-wise difference.
    pub fn max_coefficient_distance(&self, other: &Poly) -> f64 {
        (self - other).max_abs_coefficient()
    }
}

fn horner_level(terms: &[(Exponent, f64)], level: usize, x: &[f64; 3]) -> f64 {
    // `terms` is sorted lexicographically and shares exponents below `level`.
    let mut groups: Vec<(u32, &[(Exponent, f64)])> = Vec::new();
    let mut start = 0;
    while start < terms.len() {
        let e = terms[start].0[level];
        let mut end = start + 1;
        while end < terms.len() && terms[end].0[level] == e {
            end += 1;
        }
        groups.push((e, &terms[start..end]));
        start = end;
    }
    let mut acc = 0.0;
    let mut prev: Option<u32> = None;
    for (e, group) in groups.iter().rev() {
        let val = if level == 2 {
            group[0].1
        } else {
            horner_level(group, level + 1, x)
        };
        acc = match prev {
            None => val,
            Some(p) => acc * x[level].powi((p - e) as i32) + val,
        };
        prev = Some(*e);
    }
    acc * x[level].powi(prev.unwrap_or(0) as i32)
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, -c);
        }
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut acc: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
                *acc.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != 0.0);
        Poly { terms: acc }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_terms().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<Term>::deserialize(d)?;
        Ok(Poly::from_term_list(&terms))
    }
}
