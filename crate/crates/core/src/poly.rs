//! Polynomials with coefficients in the integers mod `p`.
//!
//! Addition and multiplication work for any modulus `p >= 2` (the coefficient
//! ring may be `Z/16`, for example, when reading coefficient-permutation
//! polynomials). Division, gcd and irreducibility need a field and are gated
//! behind a primality check.
//!
//! Coefficients are stored low degree first: `coeffs[i]` is the coefficient of
//! `x^i`. The zero polynomial has an empty coefficient list and no degree.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

/// Above this degree, or above this many trial divisors, irreducibility is
/// decided with the gcd criterion instead of trial division.
const TRIAL_DIVISION_MAX_DEGREE: usize = 31;
const TRIAL_DIVISION_MAX_DIVISORS: u128 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GfPolynomial {
    modulus: u64,
    coeffs: Vec<u64>,
}

/// Trial-division test for primality of the coefficient modulus.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p < 4 {
        return true;
    }
    if p.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

impl GfPolynomial {
    /// Builds a polynomial from raw coefficients (low degree first), reducing
    /// each mod `p` and stripping trailing zeros.
    pub fn new(raw: Vec<u64>, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidModulus(modulus));
        }
        let mut coeffs = raw;
        for c in coeffs.iter_mut() {
            *c %= modulus;
        }
        Ok(Self::canonical(coeffs, modulus))
    }

    fn canonical(mut coeffs: Vec<u64>, modulus: u64) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Self { modulus, coeffs }
    }

    pub fn zero(modulus: u64) -> Result<Self> {
        Self::new(Vec::new(), modulus)
    }

    pub fn one(modulus: u64) -> Result<Self> {
        Self::new(vec![1], modulus)
    }

    /// `c * x^k`
    pub fn monomial(c: u64, k: usize, modulus: u64) -> Result<Self> {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs, modulus)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Coefficient of `x^i`; zero beyond the degree.
    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> Option<u64> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff() == Some(1)
    }

    /// Number of nonzero terms.
    pub fn weight(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    fn check_same_ring(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(())
    }

    fn require_field(&self) -> Result<()> {
        if !is_prime(self.modulus) {
            return Err(Error::CompositeModulus(self.modulus));
        }
        Ok(())
    }

    fn mul_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    fn add_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.modulus as u128) as u64
    }

    fn sub_mod(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.modulus - (b - a)
        }
    }

    /// Inverse of `a` mod a prime modulus (Fermat).
    fn inv_mod(&self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.modulus));
        let mut result = 1u64;
        let mut base = a % self.modulus;
        let mut e = self.modulus - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul_mod(result, base);
            }
            base = self.mul_mod(base, base);
            e >>= 1;
        }
        result
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.add_mod(self.coeff(i), other.coeff(i)))
            .collect();
        Ok(Self::canonical(coeffs, self.modulus))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| self.sub_mod(self.coeff(i), other.coeff(i)))
            .collect();
        Ok(Self::canonical(coeffs, self.modulus))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::canonical(Vec::new(), self.modulus));
        }
        let mut coeffs = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = self.add_mod(coeffs[i + j], self.mul_mod(a, b));
            }
        }
        Ok(Self::canonical(coeffs, self.modulus))
    }

    /// Euclidean division: `self = divisor * quotient + remainder` with
    /// `deg(remainder) < deg(divisor)`.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        self.check_same_ring(divisor)?;
        self.require_field()?;
        let Some(dd) = divisor.degree() else {
            return Err(Error::DivisionByZero);
        };
        let lead_inv = self.inv_mod(divisor.coeffs[dd]);
        let mut rem = self.coeffs.clone();
        let qlen = rem.len().saturating_sub(dd);
        let mut quot = vec![0u64; qlen];
        for shift in (0..qlen).rev() {
            let top = rem[shift + dd];
            if top == 0 {
                continue;
            }
            let factor = self.mul_mod(top, lead_inv);
            quot[shift] = factor;
            for (i, &d) in divisor.coeffs.iter().enumerate() {
                rem[shift + i] = self.sub_mod(rem[shift + i], self.mul_mod(factor, d));
            }
        }
        rem.truncate(dd);
        Ok((
            Self::canonical(quot, self.modulus),
            Self::canonical(rem, self.modulus),
        ))
    }

    pub fn rem(&self, divisor: &Self) -> Result<Self> {
        self.div_rem(divisor).map(|(_, r)| r)
    }

    /// Scales to leading coefficient 1. The zero polynomial is returned as is.
    pub fn to_monic(&self) -> Result<Self> {
        self.require_field()?;
        let Some(lead) = self.leading_coeff() else {
            return Ok(self.clone());
        };
        let inv = self.inv_mod(lead);
        let coeffs = self.coeffs.iter().map(|&c| self.mul_mod(c, inv)).collect();
        Ok(Self::canonical(coeffs, self.modulus))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Result<Self> {
        self.check_same_ring(other)?;
        self.require_field()?;
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        a.to_monic()
    }

    /// `self^exp mod modulus_poly` by square-and-multiply.
    pub fn pow_mod(&self, mut exp: u64, modulus_poly: &Self) -> Result<Self> {
        let mut result = Self::one(self.modulus)?.rem(modulus_poly)?;
        let mut base = self.rem(modulus_poly)?;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base)?.rem(modulus_poly)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base)?.rem(modulus_poly)?;
            }
        }
        Ok(result)
    }

    fn irreducibility_precheck(&self) -> Result<usize> {
        self.require_field()?;
        match self.degree() {
            None | Some(0) => Err(Error::ConstantPolynomial),
            Some(d) => Ok(d),
        }
    }

    /// True iff the polynomial admits no factorization into two nonconstant
    /// polynomials over GF(p).
    ///
    /// Small cases use trial division by every monic polynomial of degree at
    /// most `deg / 2`; larger ones use the gcd criterion
    /// `gcd(f, x^(p^i) - x) = 1` for `1 <= i <= deg / 2`.
    pub fn is_irreducible(&self) -> Result<bool> {
        let degree = self.irreducibility_precheck()?;
        if degree <= TRIAL_DIVISION_MAX_DEGREE
            && trial_divisor_count(self.modulus, degree / 2) <= TRIAL_DIVISION_MAX_DIVISORS
        {
            self.is_irreducible_trial_division()
        } else {
            self.is_irreducible_gcd()
        }
    }

    /// Irreducibility by dividing by every monic polynomial of degree
    /// `1..=deg/2`. Exponential in the degree.
    pub fn is_irreducible_trial_division(&self) -> Result<bool> {
        let degree = self.irreducibility_precheck()?;
        for d in 1..=degree / 2 {
            for divisor in MonicPolynomials::new(self.modulus, d) {
                if self.rem(&divisor)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Irreducibility by the gcd criterion with repeated `p`-th powering of
    /// `x` modulo the polynomial.
    pub fn is_irreducible_gcd(&self) -> Result<bool> {
        let degree = self.irreducibility_precheck()?;
        let f = self.to_monic()?;
        let x = Self::monomial(1, 1, self.modulus)?;
        let mut power = x.rem(&f)?;
        for _ in 1..=degree / 2 {
            power = power.pow_mod(self.modulus, &f)?;
            let g = f.gcd(&power.sub(&x)?)?;
            if g.degree() != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Classifies the polynomial relative to a context degree `q`.
    pub fn classify(&self, q: usize) -> PolyClass {
        let rank = match self.degree() {
            Some(d) if d == q => Rank::Basic,
            Some(d) if d + 1 == q => Rank::Elemental,
            _ => Rank::Other,
        };
        let reducibility = match self.degree() {
            Some(d) if d >= 2 && is_prime(self.modulus) => match self.is_irreducible() {
                Ok(true) => Reducibility::Irreducible,
                Ok(false) => Reducibility::Reducible,
                Err(_) => Reducibility::NotApplicable,
            },
            _ => Reducibility::NotApplicable,
        };
        PolyClass {
            monic: self.is_monic(),
            rank,
            reducibility,
        }
    }
}

fn trial_divisor_count(p: u64, max_degree: usize) -> u128 {
    let mut total = 0u128;
    let mut count = 1u128;
    for _ in 0..max_degree {
        count = count.saturating_mul(p as u128);
        total = total.saturating_add(count);
    }
    total
}

/// Iterates every monic polynomial of an exact degree over `Z/p`.
#[derive(Debug, Clone)]
pub struct MonicPolynomials {
    modulus: u64,
    lower: Vec<u64>,
    done: bool,
}

impl MonicPolynomials {
    pub fn new(modulus: u64, degree: usize) -> Self {
        Self {
            modulus,
            lower: vec![0; degree],
            done: modulus < 2,
        }
    }
}

impl Iterator for MonicPolynomials {
    type Item = GfPolynomial;

    fn next(&mut self) -> Option<GfPolynomial> {
        if self.done {
            return None;
        }
        let mut coeffs = self.lower.clone();
        coeffs.push(1);
        let item = GfPolynomial {
            modulus: self.modulus,
            coeffs,
        };
        // odometer increment over the lower coefficients
        self.done = true;
        for c in self.lower.iter_mut() {
            *c += 1;
            if *c < self.modulus {
                self.done = false;
                break;
            }
            *c = 0;
        }
        Some(item)
    }
}

/// Degree relative to a context degree `q`: `q` is basic, `q - 1` elemental.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rank {
    Basic,
    Elemental,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reducibility {
    Irreducible,
    Reducible,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolyClass {
    pub monic: bool,
    pub rank: Rank,
    pub reducibility: Reducibility,
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rank::Basic => "basic",
            Rank::Elemental => "elemental",
            Rank::Other => "other",
        })
    }
}

impl fmt::Display for Reducibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reducibility::Irreducible => "irreducible",
            Reducibility::Reducible => "reducible",
            Reducibility::NotApplicable => "not-applicable",
        })
    }
}

/// Descending-power sum: `x^7 + x^6 + ... + x^1 + 1`, coefficients other
/// than one written as `c*x^k`, zero written as `0`.
impl fmt::Display for GfPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match (k, c) {
                (0, c) => write!(f, "{c}")?,
                (k, 1) => write!(f, "x^{k}")?,
                (k, c) => write!(f, "{c}*x^{k}")?,
            }
        }
        Ok(())
    }
}

impl GfPolynomial {
    /// `p=<modulus>; <descending sum>`
    pub fn to_text(&self) -> String {
        format!("p={}; {}", self.modulus, self)
    }
}

/// Accepts `p=<m>; <sum of terms>` or `p=<m>; [c0, c1, ..., ck]`.
///
/// Terms may be written `c*x^k`, `cx^k`, `c.x^k`, `x^k`, `x`, or `c`; a
/// leading `BP(x) =` label and a trailing period are ignored. Repeated
/// degrees are summed.
impl FromStr for GfPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, body) = s
            .split_once(';')
            .ok_or_else(|| parse_err("polynomial must start with `p=<modulus>;`"))?;
        let modulus = head
            .trim()
            .strip_prefix("p=")
            .ok_or_else(|| parse_err("missing `p=` prefix"))?
            .trim()
            .parse::<u64>()
            .map_err(|e| parse_err(format!("bad modulus: {e}")))?;
        if modulus < 2 {
            return Err(Error::InvalidModulus(modulus));
        }
        let mut body = body.trim();
        if let Some((_, rhs)) = body.split_once('=') {
            body = rhs.trim();
        }
        let body = body.strip_suffix('.').unwrap_or(body).trim();

        if let Some(list) = body.strip_prefix('[') {
            let list = list
                .strip_suffix(']')
                .ok_or_else(|| parse_err("unterminated coefficient list"))?;
            let coeffs = list
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<u64>()
                        .map_err(|e| parse_err(format!("bad coefficient `{t}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return GfPolynomial::new(coeffs, modulus);
        }

        let mut coeffs: Vec<u64> = Vec::new();
        for term in body.split('+') {
            let term: String = term.chars().filter(|c| !c.is_whitespace()).collect();
            if term.is_empty() {
                return Err(parse_err("empty term"));
            }
            let (c, k) = parse_term(&term)?;
            if coeffs.len() <= k {
                coeffs.resize(k + 1, 0);
            }
            coeffs[k] = ((coeffs[k] as u128 + (c % modulus) as u128) % modulus as u128) as u64;
        }
        GfPolynomial::new(coeffs, modulus)
    }
}

fn parse_term(term: &str) -> Result<(u64, usize)> {
    let bad = |e: &dyn fmt::Display| parse_err(format!("bad term `{term}`: {e}"));
    match term.find('x') {
        None => Ok((term.parse::<u64>().map_err(|e| bad(&e))?, 0)),
        Some(pos) => {
            let coef = term[..pos].trim_end_matches(['*', '.']);
            let c = if coef.is_empty() {
                1
            } else {
                coef.parse::<u64>().map_err(|e| bad(&e))?
            };
            let rest = &term[pos + 1..];
            let k = if rest.is_empty() {
                1
            } else {
                rest.strip_prefix('^')
                    .ok_or_else(|| bad(&"expected `^` after x"))?
                    .trim_matches(['{', '}'])
                    .parse::<usize>()
                    .map_err(|e| bad(&e))?
            };
            Ok((c, k))
        }
    }
}

impl PartialOrd for GfPolynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by modulus, then degree, then coefficients from the top down.
impl Ord for GfPolynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.modulus
            .cmp(&other.modulus)
            .then(self.coeffs.len().cmp(&other.coeffs.len()))
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}
