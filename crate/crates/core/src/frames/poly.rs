//! Sparse multivariate polynomials with rational coefficients, polynomial
//! vector fields, and truncated Taylor expansions ("jets") around a point.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactla::{rat_to_string, Mat, Rat};

/// Maximum number of variables; exponents are packed one byte per variable.
pub const MAX_VARS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("polynomial parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("variable x{index} out of range for {n} variables")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("at most {MAX_VARS} variables are supported, got {0}")]
    TooManyVariables(usize),
    #[error("exponent {0} exceeds 255")]
    ExponentTooLarge(u64),
}

/// Exponent multi-index packed into a `u128`, one byte per variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(u128);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn var(i: usize) -> Self {
        Monomial(1u128 << (8 * i))
    }

    pub fn from_exponents(e: &[u32]) -> Option<Self> {
        if e.len() > MAX_VARS {
            return None;
        }
        let mut m = 0u128;
        for (i, &a) in e.iter().enumerate() {
            if a > 255 {
                return None;
            }
            m |= (a as u128) << (8 * i);
        }
        Some(Monomial(m))
    }

    pub fn exponent(self, i: usize) -> u32 {
        ((self.0 >> (8 * i)) & 0xff) as u32
    }

    pub fn exponents(self, n: usize) -> Vec<u32> {
        (0..n).map(|i| self.exponent(i)).collect()
    }

    pub fn degree(self) -> u32 {
        let mut d = 0;
        let mut m = self.0;
        while m != 0 {
            d += (m & 0xff) as u32;
            m >>= 8;
        }
        d
    }

    pub fn mul(self, other: Monomial) -> Monomial {
        debug_assert!((0..MAX_VARS).all(|i| self.exponent(i) + other.exponent(i) <= 255));
        Monomial(self.0 + other.0)
    }

    /// `x^self / x_i`, if `x_i` divides.
    fn lower(self, i: usize) -> Option<Monomial> {
        (self.exponent(i) > 0).then(|| Monomial(self.0 - (1u128 << (8 * i))))
    }
}

/// Polynomial in `x1..xn`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

impl Poly {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_VARS, "too many variables");
        Poly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Poly::zero(n);
        p.add_term(Monomial::ONE, c);
        p
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Poly::zero(n);
        p.add_term(Monomial::var(i), Rat::one());
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Poly::zero(n);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> Rat {
        self.terms.get(&m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(Monomial::ONE)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, -c);
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.n);
        }
        Poly { n: self.n, terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect() }
    }

    pub fn neg(&self) -> Poly {
        Poly { n: self.n, terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.mul_truncated(other, u32::MAX)
    }

    /// Product with every term of degree above `max_degree` dropped.
    pub fn mul_truncated(&self, other: &Poly, max_degree: u32) -> Poly {
        let mut out = Poly::zero(self.n);
        let by_deg: Vec<(Monomial, u32, &Rat)> = other.terms.iter().map(|(m, c)| (*m, m.degree(), c)).collect();
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            if d1 > max_degree {
                continue;
            }
            for (m2, d2, c2) in &by_deg {
                if d1 + d2 <= max_degree {
                    out.add_term(m1.mul(*m2), c1 * *c2);
                }
            }
        }
        out
    }

    pub fn truncate(&self, max_degree: u32) -> Poly {
        Poly {
            n: self.n,
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= max_degree).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            if let Some(lo) = m.lower(i) {
                out.add_term(lo, c * Rat::from_integer(BigInt::from(m.exponent(i))));
            }
        }
        out
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, x) in point.iter().enumerate().take(self.n) {
                let e = m.exponent(i);
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Rewrites the polynomial in the shifted variables `y = x − p`.
    pub fn shift(&self, p: &[Rat]) -> Poly {
        let mut out = Poly::zero(self.n);
        for (m, c) in &self.terms {
            // (y_i + p_i)^e expanded one variable at a time
            let mut acc = Poly::constant(self.n, c.clone());
            for i in 0..self.n {
                let e = m.exponent(i);
                if e == 0 {
                    continue;
                }
                let mut factor = Poly::zero(self.n);
                let mut binom = BigInt::one();
                for k in 0..=e {
                    let coeff = Rat::from_integer(binom.clone()) * num_traits::pow(p[i].clone(), (e - k) as usize);
                    let mono = Monomial::from_exponents(&unit_exponent(self.n, i, k)).expect("exponent fits");
                    factor.add_term(mono, coeff);
                    binom = binom * BigInt::from(e - k) / BigInt::from(k + 1);
                }
                acc = acc.mul(&factor);
            }
            out = out.add(&acc);
        }
        out
    }

    /// Parses a sum of terms `c * x1^a1 * x2^a2 ...` over `x1..xn`.
    pub fn parse(s: &str, n: usize) -> Result<Poly, PolyError> {
        if n > MAX_VARS {
            return Err(PolyError::TooManyVariables(n));
        }
        Parser { src: s.as_bytes(), pos: 0, n }.poly()
    }
}

fn unit_exponent(n: usize, i: usize, k: u32) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = k;
    e
}

impl fmt::Display for Poly {
    /// Highest degree first; inverse of [`Poly::parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<(&Monomial, &Rat)> = self.terms.iter().collect();
        order.sort_by(|(a, _), (b, _)| {
            b.degree().cmp(&a.degree()).then_with(|| b.exponents(self.n).cmp(&a.exponents(self.n)))
        });
        for (k, (m, c)) in order.into_iter().enumerate() {
            let neg = c < &Rat::zero();
            let abs = if neg { -c } else { c.clone() };
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = Vec::new();
            if !abs.is_one() || m.degree() == 0 {
                factors.push(rat_to_string(&abs));
            }
            for i in 0..self.n {
                match m.exponent(i) {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    e => factors.push(format!("x{}^{}", i + 1, e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<BigInt, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected digits"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn poly(&mut self) -> Result<Poly, PolyError> {
        let mut out = Poly::zero(self.n);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                None if first => return Err(self.err("empty polynomial")),
                None => break,
                Some(b'+') => {
                    self.pos += 1;
                    Rat::one()
                }
                Some(b'-') => {
                    self.pos += 1;
                    -Rat::one()
                }
                Some(_) if first => Rat::one(),
                Some(_) => return Err(self.err("expected '+' or '-'")),
            };
            first = false;
            let (m, c) = self.term()?;
            out.add_term(m, sign * c);
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(Monomial, Rat), PolyError> {
        let mut coeff = Rat::one();
        let mut exps = vec![0u32; self.n];
        loop {
            match self.peek() {
                Some(b'x') => {
                    self.pos += 1;
                    let idx = self.integer()?;
                    let idx: usize = idx.try_into().map_err(|_| self.err("bad variable index"))?;
                    if idx == 0 || idx > self.n {
                        return Err(PolyError::VariableOutOfRange { index: idx, n: self.n });
                    }
                    let mut e = 1u64;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        e = self.integer()?.try_into().map_err(|_| self.err("bad exponent"))?;
                    }
                    let total = exps[idx - 1] as u64 + e;
                    if total > 255 {
                        return Err(PolyError::ExponentTooLarge(total));
                    }
                    exps[idx - 1] = total as u32;
                }
                Some(c) if c.is_ascii_digit() => {
                    let num = self.integer()?;
                    let mut r = Rat::from_integer(num);
                    if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let den = self.integer()?;
                        if den.is_zero() {
                            return Err(self.err("zero denominator"));
                        }
                        r /= Rat::from_integer(den);
                    }
                    coeff *= r;
                }
                _ => return Err(self.err("expected a number or a variable")),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((Monomial::from_exponents(&exps).expect("checked"), coeff))
    }
}

/// Polynomial vector field `Σ Xⁱ ∂_i` on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyVec {
    comps: Vec<Poly>,
}

impl PolyVec {
    pub fn new(comps: Vec<Poly>) -> Self {
        let n = comps.len();
        assert!(comps.iter().all(|c| c.nvars() == n), "component count must equal the number of variables");
        PolyVec { comps }
    }

    pub fn zero(n: usize) -> Self {
        PolyVec { comps: vec![Poly::zero(n); n] }
    }

    /// `∂_i`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut v = PolyVec::zero(n);
        v.comps[i] = Poly::constant(n, Rat::one());
        v
    }

    pub fn parse(comps: &[&str]) -> Result<Self, PolyError> {
        let n = comps.len();
        Ok(PolyVec { comps: comps.iter().map(|s| Poly::parse(s, n)).collect::<Result<_, _>>()? })
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Poly] {
        &self.comps
    }

    pub fn add(&self, other: &PolyVec) -> PolyVec {
        PolyVec { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &PolyVec) -> PolyVec {
        PolyVec { comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn scale(&self, s: &Rat) -> PolyVec {
        PolyVec { comps: self.comps.iter().map(|a| a.scale(s)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// `X(f) = Σ Xʲ ∂_j f`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(f.nvars());
        for (j, xj) in self.comps.iter().enumerate() {
            if !xj.is_zero() {
                out = out.add(&xj.mul(&f.derivative(j)));
            }
        }
        out
    }

    pub fn eval(&self, point: &[Rat]) -> Vec<Rat> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }
}

impl fmt::Display for PolyVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `[X, Y]ⁱ = Σⱼ (Xʲ ∂ⱼYⁱ − Yʲ ∂ⱼXⁱ)`.
pub fn bracket(x: &PolyVec, y: &PolyVec) -> PolyVec {
    assert_eq!(x.dim(), y.dim());
    PolyVec { comps: (0..x.dim()).map(|i| x.apply(&y.comps[i]).sub(&y.apply(&x.comps[i]))).collect() }
}

/// Taylor polynomial in `y = x − p`, exact through degree `order`.
///
/// A negative order means that no coefficient is known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Jet {
    poly: Poly,
    order: i32,
}

impl Jet {
    pub fn zero(n: usize, order: i32) -> Self {
        Jet { poly: Poly::zero(n), order }
    }

    pub fn constant(n: usize, c: Rat, order: i32) -> Self {
        Jet::new(Poly::constant(n, c), order)
    }

    pub fn new(poly: Poly, order: i32) -> Self {
        let poly = if order < 0 { Poly::zero(poly.nvars()) } else { poly.truncate(order as u32) };
        Jet { poly, order }
    }

    /// Expansion of `f` around `p`.
    pub fn expand(f: &Poly, p: &[Rat], order: i32) -> Self {
        Jet::new(f.shift(p), order)
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    /// Value at the base point, if known.
    pub fn value(&self) -> Option<Rat> {
        (self.order >= 0).then(|| self.poly.constant_term())
    }

    /// Zero through its order of validity.
    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn add(&self, other: &Jet) -> Jet {
        Jet::new(self.poly.add(&other.poly), self.order.min(other.order))
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        Jet::new(self.poly.sub(&other.poly), self.order.min(other.order))
    }

    pub fn scale(&self, s: &Rat) -> Jet {
        Jet { poly: self.poly.scale(s), order: self.order }
    }

    pub fn neg(&self) -> Jet {
        Jet { poly: self.poly.neg(), order: self.order }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order.min(other.order);
        if order < 0 {
            return Jet::zero(self.nvars(), order);
        }
        Jet { poly: self.poly.mul_truncated(&other.poly, order as u32), order }
    }

    pub fn derivative(&self, i: usize) -> Jet {
        Jet::new(self.poly.derivative(i), self.order - 1)
    }

    /// `1/f` by the geometric series; `None` if `f(p) = 0` or unknown.
    pub fn recip(&self) -> Option<Jet> {
        let c = self.value()?;
        if c.is_zero() {
            return None;
        }
        let inv = Rat::one() / &c;
        // 1/f = (1/c) Σ (−g)^k with g = f/c − 1
        let mut g = self.scale(&inv);
        g.poly.add_term(Monomial::ONE, -Rat::one());
        let g = g.neg();
        let mut acc = Jet::constant(self.nvars(), Rat::one(), self.order);
        for _ in 0..self.order.max(0) {
            acc = Jet::constant(self.nvars(), Rat::one(), self.order).add(&g.mul(&acc));
        }
        Some(acc.scale(&inv))
    }
}

/// Vector field given by jets of its components.
pub type JetField = Vec<Jet>;

pub fn field_zero(n: usize, order: i32) -> JetField {
    vec![Jet::zero(n, order); n]
}

pub fn field_expand(x: &PolyVec, p: &[Rat], order: i32) -> JetField {
    x.comps().iter().map(|c| Jet::expand(c, p, order)).collect()
}

pub fn field_add(a: &[Jet], b: &[Jet]) -> JetField {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn field_sub(a: &[Jet], b: &[Jet]) -> JetField {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn field_scale(a: &[Jet], s: &Rat) -> JetField {
    a.iter().map(|x| x.scale(s)).collect()
}

pub fn field_value(a: &[Jet]) -> Option<Vec<Rat>> {
    a.iter().map(Jet::value).collect()
}

/// `X(f)` for a jet field and a jet function.
pub fn field_apply(x: &[Jet], f: &Jet) -> Jet {
    let mut out = Jet::zero(f.nvars(), f.order() - 1);
    for (j, xj) in x.iter().enumerate() {
        let df = f.derivative(j);
        if !xj.is_zero() && !df.is_zero() {
            out = out.add(&xj.mul(&df));
        } else {
            out = Jet::new(out.poly, out.order.min(xj.order()));
        }
    }
    out
}

pub fn field_bracket(x: &[Jet], y: &[Jet]) -> JetField {
    (0..x.len()).map(|i| field_apply(x, &y[i]).sub(&field_apply(y, &x[i]))).collect()
}

/// Square matrix of jets, stored by columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetMat {
    cols: Vec<JetField>,
}

impl JetMat {
    pub fn from_columns(cols: Vec<JetField>) -> Self {
        JetMat { cols }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[Jet] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.cols[j][i]
    }

    pub fn value(&self) -> Option<Mat> {
        let n = self.dim();
        let mut m = Mat::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                m[(i, j)] = self.cols[j][i].value()?;
            }
        }
        Some(m)
    }

    pub fn mul_vec(&self, v: &[Jet]) -> JetField {
        let n = self.dim();
        let order = v.iter().map(Jet::order).min().unwrap_or(i32::MAX);
        let mut out = vec![Jet::zero(v[0].nvars(), order); n];
        for (j, vj) in v.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o = o.add(&self.cols[j][i].mul(vj));
            }
        }
        out
    }

    pub fn mul(&self, other: &JetMat) -> JetMat {
        JetMat { cols: other.cols.iter().map(|c| self.mul_vec(c)).collect() }
    }

    /// Inverse via the Neumann series around the value at the base point.
    pub fn inverse(&self) -> Option<JetMat> {
        let n = self.dim();
        let nv = self.cols[0][0].nvars();
        let f0 = self.value()?;
        let m0 = f0.inverse().ok()?;
        let order = self.cols.iter().flatten().map(Jet::order).min().unwrap_or(0);
        // G = −M0 (F − F0), which vanishes at the base point
        let mut g_cols = Vec::with_capacity(n);
        for j in 0..n {
            let shifted: Vec<Jet> = (0..n)
                .map(|i| {
                    let mut p = self.cols[j][i].poly.clone();
                    p.add_term(Monomial::ONE, -f0[(i, j)].clone());
                    Jet::new(p, order)
                })
                .collect();
            let col: JetField = (0..n)
                .map(|i| {
                    let mut acc = Jet::zero(nv, order);
                    for (k, s) in shifted.iter().enumerate() {
                        if !m0[(i, k)].is_zero() {
                            acc = acc.sub(&s.scale(&m0[(i, k)]));
                        }
                    }
                    acc
                })
                .collect();
            g_cols.push(col);
        }
        let g = JetMat { cols: g_cols };
        let ident = |i: usize, j: usize| Jet::constant(nv, if i == j { Rat::one() } else { Rat::zero() }, order);
        let eye = JetMat { cols: (0..n).map(|j| (0..n).map(|i| ident(i, j)).collect()).collect() };
        // S = I + G S, iterated; F⁻¹ = S M0
        let mut s = eye.clone();
        for _ in 0..order.max(0) {
            let gs = g.mul(&s);
            s = JetMat {
                cols: eye.cols.iter().zip(&gs.cols).map(|(a, b)| field_add(a, b)).collect(),
            };
        }
        let m0_cols: Vec<JetField> = (0..n)
            .map(|j| (0..n).map(|i| Jet::constant(nv, m0[(i, j)].clone(), order)).collect())
            .collect();
        Some(s.mul(&JetMat { cols: m0_cols }))
    }
}
