//! S-boxes read directly off the `2^n` coefficients of a single polynomial of
//! degree `2^n - 1` with coefficients mod `2^n`.
//!
//! Reading highest-first, `S(j)` is the coefficient of `x^(2^n - 1 - j)`;
//! reading lowest-first, `S(j)` is the coefficient of `x^j`. The box is proper
//! exactly when the coefficients are a permutation of `0..2^n`. No arithmetic
//! is done on the coefficients, so the composite modulus `2^n` is harmless.
//!
//! For 32- and 64-bit widths nothing is materialized: a box is an index to
//! value function and can only be probed at chosen points.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::exec::Exec;
use crate::poly::GfPolynomial;
use crate::sbox::{check_bits, SBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    #[serde(rename = "highest")]
    HighestFirst,
    #[serde(rename = "lowest")]
    LowestFirst,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::HighestFirst => "highest",
            Order::LowestFirst => "lowest",
        })
    }
}

impl FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "highest" | "highest-first" => Ok(Order::HighestFirst),
            "lowest" | "lowest-first" => Ok(Order::LowestFirst),
            other => Err(parse_err(format!(
                "order must be `highest` or `lowest`, found `{other}`"
            ))),
        }
    }
}

/// A degree-`(2^n - 1)` polynomial with all `2^n` coefficients in `[0, 2^n)`.
/// `coeffs[i]` is the coefficient of `x^i`; the leading one may be zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoeffPermPoly {
    width: u32,
    coeffs: Vec<u32>,
}

impl CoeffPermPoly {
    pub fn new(width: u32, coeffs: Vec<u32>) -> Result<Self> {
        // same structural rules as an S-box table
        let table = SBox::new(width, coeffs)?;
        Ok(Self {
            width,
            coeffs: table.into_entries(),
        })
    }

    /// Pads a polynomial over `Z/2^n` out to all `2^n` coefficients.
    pub fn from_polynomial(poly: &GfPolynomial, width: u32) -> Result<Self> {
        check_bits(width)?;
        let size = 1usize << width;
        if poly.modulus() != size as u64 {
            return Err(Error::ModulusMismatch(size as u64, poly.modulus()));
        }
        if let Some(degree) = poly.degree() {
            if degree >= size {
                return Err(Error::DegreeTooHigh {
                    degree,
                    max: size - 1,
                });
            }
        }
        let coeffs = (0..size).map(|i| poly.coeff(i) as u32).collect();
        Ok(Self { width, coeffs })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficients listed in reading order.
    pub fn listed(&self, order: Order) -> Vec<u32> {
        match order {
            Order::LowestFirst => self.coeffs.clone(),
            Order::HighestFirst => self.coeffs.iter().rev().copied().collect(),
        }
    }

    pub fn to_polynomial(&self) -> GfPolynomial {
        GfPolynomial::new(
            self.coeffs.iter().map(|&c| c as u64).collect(),
            1u64 << self.width,
        )
        .expect("modulus 2^n >= 4")
    }

    /// Coefficient file: `n=<bits> order=<highest|lowest>` then the
    /// coefficients in reading order.
    pub fn to_text(&self, order: Order) -> String {
        let body: Vec<String> = self.listed(order).iter().map(u32::to_string).collect();
        format!("n={} order={}\n{}\n", self.width, order, body.join(" "))
    }
}

/// Result of reading a box off a coefficient list; improper boxes are
/// reported rather than rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constructed {
    pub sbox: SBox,
    pub proper: bool,
}

pub fn sbox_from_coeffs(poly: &CoeffPermPoly, order: Order) -> Constructed {
    let sbox = SBox::from_parts_unchecked(poly.width, poly.listed(order));
    let proper = sbox.is_proper();
    Constructed { sbox, proper }
}

pub fn coeffs_from_sbox(sbox: &SBox, order: Order) -> CoeffPermPoly {
    let coeffs = match order {
        Order::LowestFirst => sbox.entries().to_vec(),
        Order::HighestFirst => sbox.entries().iter().rev().copied().collect(),
    };
    CoeffPermPoly {
        width: sbox.bits(),
        coeffs,
    }
}

/// Named index-to-value functions for widths too large to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    Identity,
    Reverse,
    /// `S(j) = a*j + b mod 2^n`; bijective iff `a` is odd.
    Affine {
        mul: u64,
        add: u64,
    },
}

fn width_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl Generator {
    pub fn eval(&self, width: u32, index: u64) -> u64 {
        let mask = width_mask(width);
        match *self {
            Generator::Identity => index & mask,
            Generator::Reverse => mask - (index & mask),
            Generator::Affine { mul, add } => mul.wrapping_mul(index).wrapping_add(add) & mask,
        }
    }

    /// Known from the structure of the function, not from sampling.
    pub fn is_bijective(&self) -> bool {
        match *self {
            Generator::Identity | Generator::Reverse => true,
            Generator::Affine { mul, .. } => mul & 1 == 1,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Identity => f.write_str("identity"),
            Generator::Reverse => f.write_str("reverse"),
            Generator::Affine { mul, add } => write!(f, "affine:{mul},{add}"),
        }
    }
}

impl FromStr for Generator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Generator::Identity),
            "reverse" => Ok(Generator::Reverse),
            _ => {
                let args = s
                    .strip_prefix("affine:")
                    .ok_or_else(|| parse_err(format!("unknown generator `{s}`")))?;
                let (a, b) = args
                    .split_once(',')
                    .ok_or_else(|| parse_err("affine generator needs `affine:a,b`"))?;
                let num = |t: &str| {
                    t.trim()
                        .parse::<u64>()
                        .map_err(|e| parse_err(format!("bad affine parameter `{t}`: {e}")))
                };
                Ok(Generator::Affine {
                    mul: num(a)?,
                    add: num(b)?,
                })
            }
        }
    }
}

/// Values sampled from a functional S-box, with any collisions among them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub width: u32,
    pub samples: Vec<(u64, u64)>,
    /// `(first index, later index, shared value)` for each repeated value.
    pub duplicates: Vec<(u64, u64, u64)>,
}

impl ProbeReport {
    pub fn has_duplicates(&self) -> bool {
        !self.duplicates.is_empty()
    }

    fn from_samples(width: u32, samples: Vec<(u64, u64)>) -> Result<Self> {
        let mask = width_mask(width);
        let mut first_seen: HashMap<u64, u64> = HashMap::with_capacity(samples.len());
        let mut duplicates = Vec::new();
        for &(index, value) in &samples {
            if value > mask {
                return Err(Error::ProbeValueOutOfRange {
                    index,
                    value,
                    bits: width,
                });
            }
            match first_seen.get(&value) {
                Some(&first) if first != index => duplicates.push((first, index, value)),
                Some(_) => {}
                None => {
                    first_seen.insert(value, index);
                }
            }
        }
        Ok(Self {
            width,
            samples,
            duplicates,
        })
    }
}

fn check_probe(width: u32, indices: &[u64]) -> Result<()> {
    if width != 32 && width != 64 {
        return Err(Error::ProbeWidth(width));
    }
    let mask = width_mask(width);
    if let Some(&index) = indices.iter().find(|&&i| i > mask) {
        return Err(Error::ProbeIndexOutOfRange { index, bits: width });
    }
    Ok(())
}

/// Evaluates a 32- or 64-bit functional S-box at the given indices, one call
/// at a time in the order given.
pub fn big_sbox_probe<F>(mut coeff_fn: F, width: u32, indices: &[u64]) -> Result<ProbeReport>
where
    F: FnMut(u64) -> u64,
{
    check_probe(width, indices)?;
    let samples = indices.iter().map(|&i| (i, coeff_fn(i))).collect();
    ProbeReport::from_samples(width, samples)
}

/// Like [`big_sbox_probe`] but may evaluate probes concurrently, so the
/// function must be safe to share.
pub fn big_sbox_probe_concurrent<F>(
    coeff_fn: F,
    width: u32,
    indices: &[u64],
    exec: Exec,
) -> Result<ProbeReport>
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    check_probe(width, indices)?;
    let samples = exec.map(0..indices.len() as u64, |k| {
        let i = indices[k as usize];
        (i, coeff_fn(i))
    });
    ProbeReport::from_samples(width, samples)
}

/// Parsed coefficient file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoeffSource {
    Table { poly: CoeffPermPoly, order: Order },
    Generated { width: u32, generator: Generator },
}

/// Parses a coefficient file.
///
/// The header is `n=<bits> order=<highest|lowest>` followed by `2^n`
/// coefficients in reading order, or a polynomial in `p=<2^n>; ...` form.
/// A header carrying `gen=<identity|reverse|affine:a,b>` names a built-in
/// generator instead and has no body.
pub fn parse_coeff_file(text: &str) -> Result<CoeffSource> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| parse_err("empty coefficient file"))?;
    let mut width = None;
    let mut order = None;
    let mut generator = None;
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, found `{token}`")))?;
        match key {
            "n" => {
                width = Some(
                    value
                        .parse::<u32>()
                        .map_err(|e| parse_err(format!("bad width `{value}`: {e}")))?,
                )
            }
            "order" => order = Some(value.parse::<Order>()?),
            "gen" => generator = Some(value.parse::<Generator>()?),
            other => return Err(parse_err(format!("unknown header field `{other}`"))),
        }
    }
    let width = width.ok_or_else(|| parse_err("coefficient header missing `n=`"))?;

    if let Some(generator) = generator {
        if width != 32 && width != 64 {
            return Err(Error::ProbeWidth(width));
        }
        if lines.next().is_some() {
            return Err(parse_err("generator files take no coefficient body"));
        }
        return Ok(CoeffSource::Generated { width, generator });
    }

    let order = order.ok_or_else(|| parse_err("coefficient header missing `order=`"))?;
    check_bits(width)?;
    let body: Vec<&str> = lines.collect();
    let poly = if body.first().is_some_and(|l| l.starts_with("p=")) {
        let p: GfPolynomial = body.join(" ").parse()?;
        CoeffPermPoly::from_polynomial(&p, width)?
    } else {
        let listed = body
            .iter()
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|e| parse_err(format!("bad coefficient `{t}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let table = SBox::new(width, listed)?;
        coeffs_from_sbox(&table, order)
    };
    Ok(CoeffSource::Table { poly, order })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `0x^15 + 1x^14 + ... + 15`, so the coefficient of x^i is 15 - i.
    fn descending_coeffs(width: u32) -> CoeffPermPoly {
        let max = (1u32 << width) - 1;
        CoeffPermPoly::new(width, (0..=max).map(|i| max - i).collect()).unwrap()
    }

    /// `15x^15 + ... + 1x + 0`, so the coefficient of x^i is i.
    fn ascending_coeffs(width: u32) -> CoeffPermPoly {
        CoeffPermPoly::new(width, (0..1u32 << width).collect()).unwrap()
    }

    #[test]
    fn reference_constructions() {
        let c = sbox_from_coeffs(&descending_coeffs(4), Order::HighestFirst);
        assert!(c.proper);
        assert_eq!(c.sbox, SBox::identity(4).unwrap());
        let c = sbox_from_coeffs(&ascending_coeffs(4), Order::HighestFirst);
        assert_eq!(c.sbox, SBox::reverse(4).unwrap());
        let c = sbox_from_coeffs(&descending_coeffs(8), Order::HighestFirst);
        assert_eq!(c.sbox, SBox::identity(8).unwrap());
    }

    #[test]
    fn inverse_reading() {
        let id = SBox::identity(4).unwrap();
        assert_eq!(
            coeffs_from_sbox(&id, Order::HighestFirst),
            descending_coeffs(4)
        );
        let low = coeffs_from_sbox(&id, Order::LowestFirst);
        assert_eq!(low, ascending_coeffs(4));
        assert_eq!(sbox_from_coeffs(&low, Order::LowestFirst).sbox, id);
        let rev = SBox::reverse(4).unwrap();
        assert_eq!(
            coeffs_from_sbox(&rev, Order::HighestFirst),
            ascending_coeffs(4)
        );
    }

    #[test]
    fn improper_coefficients_are_flagged() {
        let poly = CoeffPermPoly::new(2, vec![1, 1, 2, 3]).unwrap();
        let c = sbox_from_coeffs(&poly, Order::LowestFirst);
        assert!(!c.proper);
        assert_eq!(c.sbox.entries(), &[1, 1, 2, 3]);
    }

    #[test]
    fn coefficient_bounds() {
        assert!(CoeffPermPoly::new(4, vec![16; 16]).is_err());
        assert!(CoeffPermPoly::new(4, vec![0; 15]).is_err());
    }

    #[test]
    fn polynomial_form_keeps_zero_leading_coefficient() {
        let p: GfPolynomial = "p=16; 0x^15 + 1x^14 + 2x^13 + 3x^12 + 4x^11 + 5x^10 + 6x^9 + 7x^8 + 8x^7 + 9x^6 + 10x^5 + 11x^4 + 12x^3 + 13x^2 + 14x + 15"
            .parse()
            .unwrap();
        assert_eq!(p.degree(), Some(14));
        let c = CoeffPermPoly::from_polynomial(&p, 4).unwrap();
        assert_eq!(c, descending_coeffs(4));
        assert_eq!(c.to_polynomial(), p);
        assert!(CoeffPermPoly::from_polynomial(&p, 3).is_err());
    }

    #[test]
    fn probe_examples() {
        let r = big_sbox_probe(|j| j, 32, &[0, 1, (1 << 32) - 1]).unwrap();
        assert_eq!(
            r.samples,
            vec![(0, 0), (1, 1), ((1 << 32) - 1, (1 << 32) - 1)]
        );
        assert!(!r.has_duplicates());
        let r = big_sbox_probe(|j| u64::MAX - j, 64, &[0]).unwrap();
        assert_eq!(r.samples, vec![(0, u64::MAX)]);
        let r = big_sbox_probe(|_| 0, 32, &[0, 1]).unwrap();
        assert_eq!(r.duplicates, vec![(0, 1, 0)]);
    }

    #[test]
    fn probe_errors() {
        assert_eq!(
            big_sbox_probe(|j| j, 32, &[1 << 32]),
            Err(Error::ProbeIndexOutOfRange {
                index: 1 << 32,
                bits: 32
            })
        );
        assert!(matches!(
            big_sbox_probe(|j| j << 33, 32, &[1]),
            Err(Error::ProbeValueOutOfRange { .. })
        ));
        assert_eq!(big_sbox_probe(|j| j, 16, &[0]), Err(Error::ProbeWidth(16)));
    }

    #[test]
    fn repeated_probe_index_is_not_a_duplicate() {
        let r = big_sbox_probe(|j| j, 64, &[5, 5]).unwrap();
        assert!(!r.has_duplicates());
    }

    #[test]
    fn concurrent_probe_matches_sequential() {
        let g = Generator::Affine {
            mul: 0x9E37_79B9,
            add: 7,
        };
        let idx: Vec<u64> = (0..5000).map(|i| i * 0x1_0001).collect();
        let seq = big_sbox_probe(|j| g.eval(32, j), 32, &idx).unwrap();
        let par = big_sbox_probe_concurrent(|j| g.eval(32, j), 32, &idx, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        assert!(!seq.has_duplicates());
    }

    #[test]
    fn generators() {
        assert_eq!(Generator::Reverse.eval(64, 0), u64::MAX);
        assert_eq!(Generator::Reverse.eval(32, 0), u32::MAX as u64);
        assert_eq!(Generator::Identity.eval(32, 12345), 12345);
        let even = Generator::Affine { mul: 2, add: 1 };
        assert!(!even.is_bijective());
        let r = big_sbox_probe(|j| even.eval(32, j), 32, &[0, 1 << 31]).unwrap();
        assert!(r.has_duplicates());
        for text in ["identity", "reverse", "affine:3,7"] {
            assert_eq!(text.parse::<Generator>().unwrap().to_string(), text);
        }
        assert!("affine:3".parse::<Generator>().is_err());
        assert!("cubic".parse::<Generator>().is_err());
    }

    #[test]
    fn coefficient_file_forms() {
        let text = "n=4 order=highest\n15 14 13 12 11 10 9 8 7 6 5 4 3 2 1 0\n";
        let CoeffSource::Table { poly, order } = parse_coeff_file(text).unwrap() else {
            panic!("expected table");
        };
        assert_eq!(order, Order::HighestFirst);
        assert_eq!(poly, ascending_coeffs(4));
        assert_eq!(poly.to_text(order), text);
        assert_eq!(
            sbox_from_coeffs(&poly, order).sbox,
            SBox::reverse(4).unwrap()
        );

        let gen = parse_coeff_file("n=64 gen=affine:5,1").unwrap();
        assert_eq!(
            gen,
            CoeffSource::Generated {
                width: 64,
                generator: Generator::Affine { mul: 5, add: 1 }
            }
        );

        let poly_form = "n=4 order=highest\np=16; 15x^15 + 14x^14 + 13x^13 + 12x^12 + 11x^11 + 10x^10 + 9x^9 + 8x^8 + 7x^7 + 6x^6 + 5x^5 + 4x^4 + 3x^3 + 2x^2 + 1x + 0\n";
        let CoeffSource::Table { poly, .. } = parse_coeff_file(poly_form).unwrap() else {
            panic!("expected table");
        };
        assert_eq!(poly, ascending_coeffs(4));
    }

    #[test]
    fn coefficient_file_errors() {
        for bad in [
            "",
            "n=4\n0 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15",
            "n=4 order=sideways\n0",
            "n=4 order=highest\n0 1 2",
            "n=8 gen=identity",
            "n=32 gen=identity\n1 2 3",
            "order=highest\n0 1 2 3",
        ] {
            assert!(parse_coeff_file(bad).is_err(), "{bad:?}");
        }
    }
}
