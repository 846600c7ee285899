//! Exact multivariate polynomials over the rationals on a fixed chart.
//!
//! Coefficients are arbitrary-precision rationals, never floats, so every
//! identity downstream is checked by asking whether a polynomial is literally
//! zero. Terms live in a sorted map keyed by exponent vector; the key order is
//! graded-lexicographic, which fixes the canonical text rendering.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};

use crate::chart::Chart;
use crate::error::{Error, Result};

/// Exact rational scalar. Always stored reduced with positive denominator.
pub type Rat = BigRational;

/// Small-integer rational, handy in tests and generators.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from(BigInt::from(num))
}

/// Exponent vector of a monomial, one entry per chart coordinate.
///
/// Ordered graded-lexicographically: first by total degree, ties by
/// lexicographic comparison of the exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expo(pub Vec<u16>);

impl Expo {
    pub fn zero(dim: usize) -> Expo {
        Expo(vec![0; dim])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for Expo {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Expo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineKind {
    Add,
    Sub,
    Mul,
}

/// Sparse exact polynomial on a chart. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    chart: Chart,
    terms: BTreeMap<Expo, Rat>,
}

impl Poly {
    pub fn zero(chart: &Chart) -> Poly {
        Poly {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(chart: &Chart) -> Poly {
        Poly::constant(chart, Rat::one())
    }

    pub fn constant(chart: &Chart, c: Rat) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Expo::zero(chart.dim()), c);
        }
        Poly {
            chart: chart.clone(),
            terms,
        }
    }

    pub fn int(chart: &Chart, n: i64) -> Poly {
        Poly::constant(chart, rat_int(n))
    }

    /// The coordinate function x_i.
    pub fn coord(chart: &Chart, i: usize) -> Result<Poly> {
        if i >= chart.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: chart.dim(),
            });
        }
        let mut e = Expo::zero(chart.dim());
        e.0[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, Rat::one());
        Ok(Poly {
            chart: chart.clone(),
            terms,
        })
    }

    /// Single term c * prod x_i^e_i given as (coordinate index, exponent) pairs.
    pub fn monomial(chart: &Chart, pairs: &[(usize, u16)], c: Rat) -> Result<Poly> {
        let mut e = Expo::zero(chart.dim());
        for &(i, p) in pairs {
            if i >= chart.dim() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    dim: chart.dim(),
                });
            }
            e.0[i] += p;
        }
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Ok(Poly {
            chart: chart.clone(),
            terms,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Some(c) when the polynomial is the constant c (including zero).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.is_constant().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Expo::total_degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &Rat)> {
        self.terms.iter()
    }

    fn insert_term(&mut self, e: Expo, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    /// Checked arithmetic entry point; the operator impls assume equal charts.
    pub fn combine(a: &Poly, b: &Poly, kind: CombineKind) -> Result<Poly> {
        a.chart.expect_same(&b.chart)?;
        Ok(match kind {
            CombineKind::Add => a + b,
            CombineKind::Sub => a - b,
            CombineKind::Mul => a * b,
        })
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.chart);
        }
        Poly {
            chart: self.chart.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Exact partial derivative with respect to coordinate i.
    pub fn partial(&self, i: usize) -> Result<Poly> {
        if i >= self.chart.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.chart.dim(),
            });
        }
        let mut out = Poly::zero(&self.chart);
        for (e, c) in &self.terms {
            if e.0[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2.0[i] -= 1;
            out.insert_term(e2, c * rat_int(e.0[i] as i64));
        }
        Ok(out)
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.chart, rhs.chart, "polynomial charts differ");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.chart, rhs.chart, "polynomial charts differ");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(e.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            chart: self.chart.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.chart, rhs.chart, "polynomial charts differ");
        let mut out = Poly::zero(&self.chart);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = Expo(ea.0.iter().zip(&eb.0).map(|(x, y)| x + y).collect());
                out.insert_term(e, ca * cb);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Canonical text grammar
//
//   poly   := '0' | ['-'] term (('+'|'-') term)*
//   term   := rational? factor*          (at least one of the two)
//   rational := int ['/' int]
//   factor := name ['^' int]
//
// Rendering emits terms in descending graded-lex order, coefficient 1 and
// exponent 1 omitted, factors separated by single spaces.
// ---------------------------------------------------------------------------

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (e, c)) in self.terms.iter().rev().enumerate() {
            if pos == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let constant = e.is_constant();
            if !mag.is_one() || constant {
                if mag.denom().is_one() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "{}/{}", mag.numer(), mag.denom())?;
                }
                if !constant {
                    write!(f, " ")?;
                }
            }
            let mut first = true;
            for (i, &p) in e.0.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                if !first {
                    write!(f, " ")?;
                }
                first = false;
                write!(f, "{}", self.chart.name(i))?;
                if p > 1 {
                    write!(f, "^{p}")?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Caret,
    Slash,
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let mut it = text.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '+' => {
                it.next();
                toks.push(Tok::Plus);
            }
            '-' => {
                it.next();
                toks.push(Tok::Minus);
            }
            '^' => {
                it.next();
                toks.push(Tok::Caret);
            }
            '/' => {
                it.next();
                toks.push(Tok::Slash);
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = it.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                let n = s
                    .parse::<BigInt>()
                    .map_err(|e| Error::Parse(e.to_string()))?;
                toks.push(Tok::Num(n));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Ident(s));
            }
            other => return Err(Error::Parse(format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

impl Poly {
    /// Parse the canonical polynomial grammar over the given chart.
    pub fn parse(chart: &Chart, text: &str) -> Result<Poly> {
        let toks = tokenize(text)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut out = Poly::zero(chart);
        let mut pos = 0;

        // leading sign
        let mut sign = Rat::one();
        if toks[0] == Tok::Minus {
            sign = -Rat::one();
            pos = 1;
        }
        loop {
            let (term, next) = parse_term(chart, &toks, pos)?;
            out = &out + &term.scale(&sign);
            pos = next;
            match toks.get(pos) {
                None => break,
                Some(Tok::Plus) => {
                    sign = Rat::one();
                    pos += 1;
                }
                Some(Tok::Minus) => {
                    sign = -Rat::one();
                    pos += 1;
                }
                Some(t) => return Err(Error::Parse(format!("unexpected token {t:?}"))),
            }
        }
        Ok(out)
    }
}

fn parse_term(chart: &Chart, toks: &[Tok], mut pos: usize) -> Result<(Poly, usize)> {
    let mut coeff = Rat::one();
    let mut saw_anything = false;

    if let Some(Tok::Num(n)) = toks.get(pos) {
        saw_anything = true;
        let num = n.clone();
        let mut den = BigInt::one();
        pos += 1;
        if toks.get(pos) == Some(&Tok::Slash) {
            pos += 1;
            match toks.get(pos) {
                Some(Tok::Num(d)) if !d.is_zero() => {
                    den = d.clone();
                    pos += 1;
                }
                Some(Tok::Num(_)) => return Err(Error::Parse("zero denominator".into())),
                _ => return Err(Error::Parse("expected denominator after `/`".into())),
            }
        }
        coeff = Rat::new(num, den);
    }

    let mut expo = Expo::zero(chart.dim());
    while let Some(Tok::Ident(name)) = toks.get(pos) {
        saw_anything = true;
        let idx = chart
            .index_of(name)
            .ok_or_else(|| Error::Parse(format!("unknown coordinate `{name}`")))?;
        pos += 1;
        let mut power: u16 = 1;
        if toks.get(pos) == Some(&Tok::Caret) {
            pos += 1;
            match toks.get(pos) {
                Some(Tok::Num(n)) => {
                    power = u16::try_from(n.clone())
                        .map_err(|_| Error::Parse(format!("exponent {n} too large")))?;
                    pos += 1;
                }
                _ => return Err(Error::Parse("expected exponent after `^`".into())),
            }
        }
        expo.0[idx] += power;
    }

    if !saw_anything {
        return Err(Error::Parse("empty term".into()));
    }
    let mut terms = BTreeMap::new();
    if !coeff.is_zero() {
        terms.insert(expo, coeff);
    }
    Ok((
        Poly {
            chart: chart.clone(),
            terms,
        },
        pos,
    ))
}
