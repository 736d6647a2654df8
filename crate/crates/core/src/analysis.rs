//! Quality metrics for generated boxes.
//!
//! Component functions are `x -> b . S(x)` over GF(2) for nonzero output
//! masks `b`. Nonlinearity is `2^(n-1) - max|W|/2` where `W` ranges over the
//! Walsh spectra of all components; differential uniformity is the largest
//! entry of the difference table over nonzero input differences.

use serde::{Deserialize, Serialize};

use crate::bcn::output_bcns;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sbox::SBox;

/// Widest box analysed without an explicit override; the DDT is `O(4^n)`.
pub const DEFAULT_MAX_ANALYSIS_BITS: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: u32,
    pub proper: bool,
    /// Highest output plane first.
    pub balanced_planes: Vec<bool>,
    pub nonlinearity: u64,
    pub differential_uniformity: u64,
    pub fixed_points: u64,
}

impl MetricsReport {
    /// Flat `key=value` lines.
    pub fn to_text(&self) -> String {
        let planes: Vec<&str> = self
            .balanced_planes
            .iter()
            .map(|&b| if b { "true" } else { "false" })
            .collect();
        format!(
            "n={}\nproper={}\nbalanced_planes={}\nnonlinearity={}\ndifferential_uniformity={}\nfixed_points={}\n",
            self.n,
            self.proper,
            planes.join(","),
            self.nonlinearity,
            self.differential_uniformity,
            self.fixed_points
        )
    }
}

/// Computes every metric. Boxes wider than 12 bits need `allow_large`.
pub fn analyze(sbox: &SBox, allow_large: bool) -> Result<MetricsReport> {
    analyze_with(sbox, allow_large, Exec::default())
}

pub fn analyze_with(sbox: &SBox, allow_large: bool, exec: Exec) -> Result<MetricsReport> {
    if sbox.bits() > DEFAULT_MAX_ANALYSIS_BITS && !allow_large {
        return Err(Error::TooLargeForMetrics(sbox.bits()));
    }
    Ok(MetricsReport {
        n: sbox.bits(),
        proper: sbox.is_proper(),
        balanced_planes: balancedness_profile(sbox),
        nonlinearity: nonlinearity_with(sbox, exec),
        differential_uniformity: differential_uniformity_with(sbox, exec),
        fixed_points: fixed_points(sbox),
    })
}

/// Balance of each output plane, highest plane first.
pub fn balancedness_profile(sbox: &SBox) -> Vec<bool> {
    output_bcns(sbox).iter().map(|b| b.is_balanced()).collect()
}

pub fn fixed_points(sbox: &SBox) -> u64 {
    sbox.entries()
        .iter()
        .enumerate()
        .filter(|&(j, &v)| j as u32 == v)
        .count() as u64
}

/// In-place fast Walsh-Hadamard transform (unnormalized).
pub fn fwht(values: &mut [i64]) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in values.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Walsh spectrum of the component `x -> parity(mask & S(x))`; entry `a` is
/// `sum_x (-1)^(mask.S(x) xor a.x)`.
pub fn walsh_spectrum(sbox: &SBox, mask: u32) -> Vec<i64> {
    let mut values: Vec<i64> = sbox
        .entries()
        .iter()
        .map(|&y| {
            if (y & mask).count_ones() & 1 == 0 {
                1
            } else {
                -1
            }
        })
        .collect();
    fwht(&mut values);
    values
}

pub fn nonlinearity(sbox: &SBox) -> u64 {
    nonlinearity_with(sbox, Exec::default())
}

pub fn nonlinearity_with(sbox: &SBox, exec: Exec) -> u64 {
    let size = sbox.len() as u64;
    let max_abs = exec.max(1..size, |mask| {
        walsh_spectrum(sbox, mask as u32)
            .iter()
            .map(|w| w.unsigned_abs())
            .max()
            .unwrap_or(0)
    });
    size / 2 - max_abs / 2
}

/// Row `dx` of the difference distribution table.
pub fn ddt_row(sbox: &SBox, dx: u32) -> Vec<u64> {
    let mut row = vec![0u64; sbox.len()];
    for x in 0..sbox.len() as u32 {
        row[(sbox.apply(x ^ dx) ^ sbox.apply(x)) as usize] += 1;
    }
    row
}

pub fn ddt(sbox: &SBox) -> Vec<Vec<u64>> {
    (0..sbox.len() as u32).map(|dx| ddt_row(sbox, dx)).collect()
}

pub fn differential_uniformity(sbox: &SBox) -> u64 {
    differential_uniformity_with(sbox, Exec::default())
}

pub fn differential_uniformity_with(sbox: &SBox, exec: Exec) -> u64 {
    exec.max(1..sbox.len() as u64, |dx| {
        ddt_row(sbox, dx as u32).into_iter().max().unwrap_or(0)
    })
}
