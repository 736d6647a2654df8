//! Binary coefficient numbers: the bit-planes of an S-box.
//!
//! For an n-bit box, output plane `k` (1 = least significant output bit) is
//! the `2^n`-bit vector whose bit `j` is bit `k` of `S(j)`. Input plane `k`
//! is the same construction applied to the index `j` itself, so it depends
//! only on `n`.
//!
//! Index 0 is the most significant position of the plane. Read as an integer
//! the plane is `sum_j bit[j] * 2^(2^n - 1 - j)`; read as a polynomial over
//! GF(2), bit `j` is the coefficient of `x^(2^n - 1 - j)`. Plane lists are
//! always exchanged highest plane first.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::poly::GfPolynomial;
use crate::sbox::{check_bits, SBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[serde(rename = "in")]
    Input,
    #[serde(rename = "out")]
    Output,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Input => "in",
            Role::Output => "out",
        })
    }
}

impl FromStr for Role {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in" => Ok(Role::Input),
            "out" => Ok(Role::Output),
            other => Err(parse_err(format!(
                "role must be `in` or `out`, found `{other}`"
            ))),
        }
    }
}

/// One labelled bit-plane of an n-bit S-box, `2^n` bits long.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bcn {
    width: u32,
    plane: u32,
    role: Role,
    words: Vec<u64>,
}

fn check_plane(width: u32, plane: u32) -> Result<()> {
    if plane == 0 || plane > width {
        return Err(parse_err(format!("plane {plane} outside 1..={width}")));
    }
    Ok(())
}

impl Bcn {
    fn empty(width: u32, plane: u32, role: Role) -> Result<Self> {
        check_bits(width)?;
        check_plane(width, plane)?;
        let len = 1usize << width;
        Ok(Self {
            width,
            plane,
            role,
            words: vec![0; len.div_ceil(64)],
        })
    }

    /// Builds a plane from `2^n` bits, index 0 first.
    pub fn from_bits(width: u32, plane: u32, role: Role, bits: &[bool]) -> Result<Self> {
        let mut bcn = Self::empty(width, plane, role)?;
        if bits.len() != bcn.len() {
            return Err(Error::LengthMismatch {
                expected: bcn.len(),
                found: bits.len(),
            });
        }
        for (j, &b) in bits.iter().enumerate() {
            if b {
                bcn.set(j);
            }
        }
        Ok(bcn)
    }

    /// Builds a plane with ones exactly at the given indices.
    pub fn from_positions(
        width: u32,
        plane: u32,
        role: Role,
        positions: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut bcn = Self::empty(width, plane, role)?;
        for j in positions {
            if j >= bcn.len() {
                return Err(Error::LengthMismatch {
                    expected: bcn.len(),
                    found: j + 1,
                });
            }
            bcn.set(j);
        }
        Ok(bcn)
    }

    /// Inverse of [`Bcn::to_decimal`].
    pub fn from_decimal(width: u32, plane: u32, role: Role, value: &BigUint) -> Result<Self> {
        let mut bcn = Self::empty(width, plane, role)?;
        let len = bcn.len();
        if value.bits() > len as u64 {
            return Err(parse_err(format!(
                "decimal {value} does not fit in {len} bits"
            )));
        }
        for j in 0..len {
            if value.bit((len - 1 - j) as u64) {
                bcn.set(j);
            }
        }
        Ok(bcn)
    }

    /// Inverse of [`Bcn::to_polynomial`]: `x^(2^n - 1 - j)` drives bit `j`.
    pub fn from_polynomial(
        poly: &GfPolynomial,
        width: u32,
        plane: u32,
        role: Role,
    ) -> Result<Self> {
        if poly.modulus() != 2 {
            return Err(Error::NotBinary(poly.modulus()));
        }
        let mut bcn = Self::empty(width, plane, role)?;
        let len = bcn.len();
        if let Some(degree) = poly.degree() {
            if degree >= len {
                return Err(Error::DegreeTooHigh {
                    degree,
                    max: len - 1,
                });
            }
        }
        for (i, &c) in poly.coeffs().iter().enumerate() {
            if c == 1 {
                bcn.set(len - 1 - i);
            }
        }
        Ok(bcn)
    }

    /// Same bits under a different plane label.
    pub fn relabel(&self, plane: u32, role: Role) -> Result<Self> {
        check_plane(self.width, plane)?;
        Ok(Self {
            plane,
            role,
            ..self.clone()
        })
    }

    #[inline]
    fn set(&mut self, j: usize) {
        self.words[j / 64] |= 1 << (j % 64);
    }

    /// S-box bit-width `n`.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn plane(&self) -> u32 {
        self.plane
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// Number of bits, `2^n`.
    pub fn len(&self) -> usize {
        1 << self.width
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn bit(&self, j: usize) -> bool {
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |j| self.bit(j))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Exactly half of the bits are set.
    pub fn is_balanced(&self) -> bool {
        self.count_ones() == self.len() / 2
    }

    pub fn same_bits(&self, other: &Bcn) -> bool {
        self.width == other.width && self.words == other.words
    }

    /// `sum_j bit[j] * 2^(2^n - 1 - j)`
    pub fn to_decimal(&self) -> BigUint {
        let len = self.len();
        let mut value = BigUint::zero();
        for j in 0..len {
            if self.bit(j) {
                value.set_bit((len - 1 - j) as u64, true);
            }
        }
        value
    }

    /// Polynomial over GF(2) with `bit[j]` as the coefficient of `x^(2^n - 1 - j)`.
    pub fn to_polynomial(&self) -> GfPolynomial {
        let len = self.len();
        let coeffs = (0..len).map(|i| self.bit(len - 1 - i) as u64).collect();
        GfPolynomial::new(coeffs, 2).expect("modulus 2 is valid")
    }

    pub fn to_bit_string(&self) -> String {
        self.bits().map(|b| if b { '1' } else { '0' }).collect()
    }

    /// `n=<bits> plane=<k> role=<in|out> bits=<0/1 string>`
    pub fn to_text(&self) -> String {
        format!(
            "n={} plane={} role={} bits={}",
            self.width,
            self.plane,
            self.role,
            self.to_bit_string()
        )
    }

    /// Parses one BCN line. Either `bits=` or `dec=` must be present; if both
    /// are, they must agree. Anything after `#` is a comment.
    pub fn from_text(line: &str) -> Result<Self> {
        let line = line.split('#').next().unwrap_or("").trim();
        let mut width = None;
        let mut plane = None;
        let mut role = None;
        let mut bits = None;
        let mut dec = None;
        for token in line.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, found `{token}`")))?;
            let num = |v: &str| {
                v.parse::<u32>()
                    .map_err(|e| parse_err(format!("bad `{key}` value `{v}`: {e}")))
            };
            match key {
                "n" => width = Some(num(value)?),
                "plane" => plane = Some(num(value)?),
                "role" => role = Some(value.parse::<Role>()?),
                "bits" => bits = Some(value.to_owned()),
                "dec" => {
                    dec = Some(
                        value
                            .parse::<BigUint>()
                            .map_err(|e| parse_err(format!("bad decimal `{value}`: {e}")))?,
                    )
                }
                other => return Err(parse_err(format!("unknown BCN field `{other}`"))),
            }
        }
        let width = width.ok_or_else(|| parse_err("BCN line missing `n=`"))?;
        let plane = plane.ok_or_else(|| parse_err("BCN line missing `plane=`"))?;
        let role = role.ok_or_else(|| parse_err("BCN line missing `role=`"))?;
        let from_bits = bits
            .map(|s| {
                let bools = s
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(parse_err(format!("bit string contains `{other}`"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Bcn::from_bits(width, plane, role, &bools)
            })
            .transpose()?;
        let from_dec = dec
            .map(|d| Bcn::from_decimal(width, plane, role, &d))
            .transpose()?;
        match (from_bits, from_dec) {
            (Some(a), Some(b)) if a != b => Err(parse_err("`bits=` and `dec=` disagree")),
            (Some(a), _) => Ok(a),
            (None, Some(b)) => Ok(b),
            (None, None) => Err(parse_err("BCN line needs `bits=` or `dec=`")),
        }
    }
}

impl FromStr for Bcn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

impl fmt::Display for Bcn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses every non-blank, non-comment line as a BCN.
pub fn parse_bcn_lines(text: &str) -> Result<Vec<Bcn>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(Bcn::from_text)
        .collect()
}

/// Output planes of `sbox`, highest plane first.
pub fn output_bcns(sbox: &SBox) -> Vec<Bcn> {
    let width = sbox.bits();
    (1..=width)
        .rev()
        .map(|plane| {
            let positions = sbox
                .entries()
                .iter()
                .enumerate()
                .filter(move |(_, &v)| (v >> (plane - 1)) & 1 == 1)
                .map(|(j, _)| j);
            Bcn::from_positions(width, plane, Role::Output, positions)
                .expect("S-box width already validated")
        })
        .collect()
}

/// Input planes for width `n`, highest plane first.
pub fn input_bcns(width: u32) -> Result<Vec<Bcn>> {
    check_bits(width)?;
    Ok((1..=width)
        .rev()
        .map(|plane| {
            let positions = (0..1usize << width).filter(move |j| (j >> (plane - 1)) & 1 == 1);
            Bcn::from_positions(width, plane, Role::Input, positions)
                .expect("width already validated")
        })
        .collect())
}

/// `(input planes, output planes)`, each highest plane first.
pub fn sbox_to_bcns(sbox: &SBox) -> (Vec<Bcn>, Vec<Bcn>) {
    let inputs = input_bcns(sbox.bits()).expect("S-box width already validated");
    (inputs, output_bcns(sbox))
}

/// Reassembles an S-box from its output planes, given highest plane first.
///
/// The planes must be labelled `n, n-1, ..., 1` in that order and carry the
/// output role, so a transposed list is rejected instead of silently
/// producing a different box.
pub fn bcns_to_sbox(bcns: &[Bcn]) -> Result<SBox> {
    let first = bcns.first().ok_or(Error::BcnCount {
        expected: 0,
        found: 0,
    })?;
    let width = first.width();
    if bcns.len() != width as usize {
        return Err(Error::BcnCount {
            expected: width as usize,
            found: bcns.len(),
        });
    }
    for (position, b) in bcns.iter().enumerate() {
        if b.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: b.width(),
            });
        }
        let expected = width - position as u32;
        if b.plane() != expected {
            return Err(Error::PlaneOrder {
                position,
                expected,
                found: b.plane(),
            });
        }
        if b.role() != Role::Output {
            return Err(Error::WrongRole(position));
        }
    }
    Ok(assemble(width, bcns))
}

/// Step that turns highest-first planes into entries; labels are not checked.
pub(crate) fn assemble(width: u32, bcns: &[Bcn]) -> SBox {
    let entries = (0..1usize << width)
        .map(|j| {
            bcns.iter()
                .fold(0u32, |acc, b| (acc << 1) | b.bit(j) as u32)
        })
        .collect();
    SBox::from_parts_unchecked(width, entries)
}

/// Builds output planes `n..1` from decimal values given highest plane first.
pub fn output_bcns_from_decimals(width: u32, values: &[BigUint]) -> Result<Vec<Bcn>> {
    if values.len() != width as usize {
        return Err(Error::BcnCount {
            expected: width as usize,
            found: values.len(),
        });
    }
    values
        .iter()
        .enumerate()
        .map(|(i, v)| Bcn::from_decimal(width, width - i as u32, Role::Output, v))
        .collect()
}
