//! The n-bit substitution table and its properness check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

pub const MIN_BITS: u32 = 2;
/// Widest table that is materialized (65536 entries).
pub const MAX_BITS: u32 = 16;

/// An n-in/n-out lookup table with `2^n` entries, each in `[0, 2^n)`.
///
/// Bijectivity is not enforced on construction; see [`SBox::is_proper`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SBoxRepr", into = "SBoxRepr")]
pub struct SBox {
    bits: u32,
    entries: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SBoxRepr {
    n: u32,
    entries: Vec<u32>,
}

impl TryFrom<SBoxRepr> for SBox {
    type Error = Error;
    fn try_from(r: SBoxRepr) -> Result<Self> {
        SBox::new(r.n, r.entries)
    }
}

impl From<SBox> for SBoxRepr {
    fn from(s: SBox) -> Self {
        SBoxRepr {
            n: s.bits,
            entries: s.entries,
        }
    }
}

pub(crate) fn check_bits(bits: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::WidthOutOfRange {
            found: bits,
            min: MIN_BITS,
            max: MAX_BITS,
        });
    }
    Ok(())
}

impl SBox {
    pub fn new(bits: u32, entries: Vec<u32>) -> Result<Self> {
        check_bits(bits)?;
        let size = 1usize << bits;
        if entries.len() != size {
            return Err(Error::LengthMismatch {
                expected: size,
                found: entries.len(),
            });
        }
        if let Some((index, &value)) = entries
            .iter()
            .enumerate()
            .find(|(_, &v)| v as usize >= size)
        {
            return Err(Error::EntryOutOfRange {
                index,
                value: value as u64,
                bits,
            });
        }
        Ok(Self { bits, entries })
    }

    /// Caller guarantees the structural invariants.
    pub(crate) fn from_parts_unchecked(bits: u32, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), 1 << bits);
        Self { bits, entries }
    }

    /// `S(j) = j`
    pub fn identity(bits: u32) -> Result<Self> {
        check_bits(bits)?;
        Ok(Self {
            bits,
            entries: (0..1u32 << bits).collect(),
        })
    }

    /// `S(j) = 2^n - 1 - j`
    pub fn reverse(bits: u32) -> Result<Self> {
        check_bits(bits)?;
        let max = (1u32 << bits) - 1;
        Ok(Self {
            bits,
            entries: (0..=max).map(|j| max - j).collect(),
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.entries[x as usize]
    }

    /// True iff every value in `[0, 2^n)` appears exactly once.
    pub fn is_proper(&self) -> bool {
        let mut seen = vec![false; self.entries.len()];
        for &v in &self.entries {
            let slot = &mut seen[v as usize];
            if *slot {
                return false;
            }
            *slot = true;
        }
        true
    }

    /// Inverse table, if the box is a permutation.
    pub fn inverse(&self) -> Option<SBox> {
        if !self.is_proper() {
            return None;
        }
        let mut inv = vec![0u32; self.entries.len()];
        for (x, &y) in self.entries.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Some(Self::from_parts_unchecked(self.bits, inv))
    }

    /// Entry-wise composition `self(other(x))`.
    pub fn compose(&self, other: &SBox) -> Result<SBox> {
        if self.bits != other.bits {
            return Err(Error::WidthMismatch {
                expected: self.bits,
                found: other.bits,
            });
        }
        let entries = other.entries.iter().map(|&y| self.apply(y)).collect();
        Ok(Self::from_parts_unchecked(self.bits, entries))
    }

    /// Two-line text form: `n=<bits>` then the entries. Widths up to 4 bits
    /// print single uppercase hex digits, wider boxes print decimal.
    pub fn to_text(&self) -> String {
        let body: Vec<String> = if self.bits <= 4 {
            self.entries.iter().map(|v| format!("{v:X}")).collect()
        } else {
            self.entries.iter().map(u32::to_string).collect()
        };
        format!("n={}\n{}\n", self.bits, body.join(" "))
    }

    /// Parses the two-line text form.
    ///
    /// Tokens prefixed `0x` are always hex. Otherwise, for `n <= 4` a
    /// single-character token is a hex digit and a longer one is decimal
    /// (`15` is never valid hex at that width); for `n > 4` tokens are decimal.
    /// Lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| parse_err("empty S-box text"))?;
        let bits = header
            .strip_prefix("n=")
            .ok_or_else(|| parse_err("S-box header must be `n=<bits>`"))?
            .trim()
            .parse::<u32>()
            .map_err(|e| parse_err(format!("bad width: {e}")))?;
        check_bits(bits)?;
        let entries = lines
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|t| !t.is_empty())
            .map(|t| parse_entry(t, bits))
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits, entries)
    }

    pub fn to_json(&self) -> String {
        format!(
            "{{\"n\":{},\"entries\":[{}]}}",
            self.bits,
            self.entries
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

fn parse_entry(token: &str, bits: u32) -> Result<u32> {
    let parsed = if let Some(hex) = token
        .strip_prefix("0x")
        .or_else(|| token.strip_prefix("0X"))
    {
        u32::from_str_radix(hex, 16)
    } else if bits <= 4 && token.len() == 1 {
        u32::from_str_radix(token, 16)
    } else {
        token.parse::<u32>()
    };
    parsed.map_err(|e| parse_err(format!("bad entry `{token}`: {e}")))
}

impl FromStr for SBox {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

impl fmt::Display for SBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// First row of the DES S1 box, used as a reference vector throughout.
pub const DES_S1_ROW0: [u32; 16] = [
    0xE, 0x4, 0xD, 0x1, 0x2, 0xF, 0xB, 0x8, 0x3, 0xA, 0x6, 0xC, 0x5, 0x9, 0x0, 0x7,
];

pub fn des_s1_row0() -> SBox {
    SBox::from_parts_unchecked(4, DES_S1_ROW0.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn properness_examples() {
        assert!(SBox::identity(4).unwrap().is_proper());
        assert!(des_s1_row0().is_proper());
        assert!(!SBox::new(4, vec![0; 16]).unwrap().is_proper());
    }

    #[test]
    fn identity_and_reverse() {
        assert_eq!(
            SBox::identity(4).unwrap().entries(),
            (0..16).collect::<Vec<_>>().as_slice()
        );
        assert_eq!(
            SBox::identity(8).unwrap().entries(),
            (0..256).collect::<Vec<_>>().as_slice()
        );
        assert_eq!(SBox::identity(2).unwrap().entries(), &[0, 1, 2, 3]);
        assert_eq!(
            SBox::reverse(4).unwrap().entries(),
            (0..16).rev().collect::<Vec<_>>().as_slice()
        );
        assert_eq!(SBox::reverse(2).unwrap().entries(), &[3, 2, 1, 0]);
        assert_eq!(SBox::reverse(8).unwrap().apply(0), 255);
    }

    #[test]
    fn width_bounds() {
        for bad in [0, 1, 17, 32] {
            assert!(matches!(
                SBox::identity(bad),
                Err(Error::WidthOutOfRange { .. })
            ));
            assert!(SBox::reverse(bad).is_err());
        }
        assert_eq!(SBox::identity(16).unwrap().len(), 65536);
    }

    #[test]
    fn structural_errors() {
        assert_eq!(
            SBox::new(2, vec![0, 1, 2]),
            Err(Error::LengthMismatch {
                expected: 4,
                found: 3
            })
        );
        assert_eq!(
            SBox::new(2, vec![0, 1, 2, 4]),
            Err(Error::EntryOutOfRange {
                index: 3,
                value: 4,
                bits: 2
            })
        );
    }

    #[test]
    fn reverse_is_an_involution() {
        for n in MIN_BITS..=12 {
            let r = SBox::reverse(n).unwrap();
            assert_eq!(r.compose(&r).unwrap(), SBox::identity(n).unwrap());
        }
    }

    #[test]
    fn inverse_of_des_row() {
        let s = des_s1_row0();
        let inv = s.inverse().unwrap();
        assert_eq!(inv.compose(&s).unwrap(), SBox::identity(4).unwrap());
        assert!(SBox::new(2, vec![0, 0, 1, 2]).unwrap().inverse().is_none());
    }

    #[test]
    fn text_format_styles() {
        let s = des_s1_row0();
        assert_eq!(s.to_text(), "n=4\nE 4 D 1 2 F B 8 3 A 6 C 5 9 0 7\n");
        assert_eq!(SBox::from_text(&s.to_text()).unwrap(), s);
        // decimal is accepted for 4-bit boxes when tokens are multi-digit
        let dec = "n=4\n15 14 13 12 11 10 9 8 7 6 5 4 3 2 1 0";
        assert_eq!(SBox::from_text(dec).unwrap(), SBox::reverse(4).unwrap());
        let wide = SBox::identity(8).unwrap();
        assert!(wide.to_text().contains(" 255\n"));
        assert_eq!(SBox::from_text(&wide.to_text()).unwrap(), wide);
        let hex8 = format!(
            "n=8\n{}",
            (0..256)
                .map(|v| format!("0x{v:02x}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
        assert_eq!(SBox::from_text(&hex8).unwrap(), wide);
    }

    #[test]
    fn text_format_errors() {
        assert!(SBox::from_text("").is_err());
        assert!(SBox::from_text("n=4\n0 1 2").is_err());
        assert!(SBox::from_text("bits=4\n0").is_err());
        assert!(SBox::from_text("n=4\nG 1 2 3 4 5 6 7 8 9 A B C D E F").is_err());
        assert!(SBox::from_text("n=1\n0 1").is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = des_s1_row0();
        let json = s.to_json();
        assert_eq!(
            json,
            "{\"n\":4,\"entries\":[14,4,13,1,2,15,11,8,3,10,6,12,5,9,0,7]}"
        );
        let back: SBox = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<SBox>("{\"n\":2,\"entries\":[0,1,2,9]}").is_err());
    }
}
