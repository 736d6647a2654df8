//! S-box generation from chosen bit-planes.
//!
//! A candidate is a tuple of `n` planes, highest first. It is rejected unless
//! every plane is balanced; surviving tuples are assembled into a table,
//! which is then rejected unless it is a permutation. Balanced planes are
//! necessary for a permutation but not sufficient: four copies of the same
//! balanced plane assemble into a box with only two distinct values.
//!
//! Search draws candidates from a counter-based generator: candidate `i` is
//! sampled from ChaCha8 keyed by the seed with stream number `i`, so each
//! candidate is reproducible on its own and results do not depend on how the
//! candidates are scheduled across threads. Accepted boxes are emitted in
//! candidate-index order.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bcn::{assemble, Bcn, Role};
use crate::error::{parse_err, Error, Result};
use crate::exec::Exec;
use crate::sbox::{check_bits, SBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accepted,
    RejectedUnbalanced,
    RejectedNotBijective,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Accepted => "accepted",
            Verdict::RejectedUnbalanced => "rejected-unbalanced",
            Verdict::RejectedNotBijective => "rejected-not-bijective",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateReport {
    /// Output planes `n..1`, relabelled by position.
    pub bcns: Vec<Bcn>,
    pub balanced: Vec<bool>,
    /// Present iff every plane is balanced.
    pub assembled: Option<SBox>,
    pub proper: Option<bool>,
    pub verdict: Verdict,
}

/// Runs one candidate tuple (highest plane first) through the balance gate,
/// assembly and the bijectivity gate.
pub fn generate(bcns: &[Bcn]) -> Result<CandidateReport> {
    let width = bcns
        .first()
        .ok_or(Error::BcnCount {
            expected: 0,
            found: 0,
        })?
        .width();
    if bcns.len() != width as usize {
        return Err(Error::BcnCount {
            expected: width as usize,
            found: bcns.len(),
        });
    }
    let bcns = bcns
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if b.width() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: b.width(),
                });
            }
            b.relabel(width - i as u32, Role::Output)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(judge(width, bcns))
}

fn judge(width: u32, bcns: Vec<Bcn>) -> CandidateReport {
    let balanced: Vec<bool> = bcns.iter().map(Bcn::is_balanced).collect();
    if !balanced.iter().all(|&b| b) {
        return CandidateReport {
            bcns,
            balanced,
            assembled: None,
            proper: None,
            verdict: Verdict::RejectedUnbalanced,
        };
    }
    let sbox = assemble(width, &bcns);
    let proper = sbox.is_proper();
    CandidateReport {
        bcns,
        balanced,
        assembled: Some(sbox),
        proper: Some(proper),
        verdict: if proper {
            Verdict::Accepted
        } else {
            Verdict::RejectedNotBijective
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Random,
    /// Every tuple in index order; only for `n = 2`.
    Exhaustive,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Mode::Random),
            "exhaustive" => Ok(Mode::Exhaustive),
            other => Err(parse_err(format!(
                "mode must be `random` or `exhaustive`, found `{other}`"
            ))),
        }
    }
}

/// How each candidate plane is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Uniform over balanced planes: `2^(n-1)` one-positions drawn without
    /// replacement. The balance gate never fires.
    #[default]
    Balanced,
    /// Uniform over all `2^(2^n)` planes; most are stopped by the balance gate.
    Uniform,
}

impl FromStr for Sampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(Sampling::Balanced),
            "uniform" => Ok(Sampling::Uniform),
            other => Err(parse_err(format!(
                "sampling must be `balanced` or `uniform`, found `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchConfig {
    pub width: u32,
    pub seed: u64,
    /// Accepted boxes to emit.
    pub count: usize,
    pub mode: Mode,
    /// Also demand every plane's polynomial be irreducible over GF(2).
    pub require_irreducible: bool,
    pub sampling: Sampling,
    /// Upper bound on candidates examined in random mode; `None` is unbounded.
    pub max_candidates: Option<u64>,
}

impl SearchConfig {
    pub fn random(width: u32, seed: u64, count: usize) -> Self {
        Self {
            width,
            seed,
            count,
            mode: Mode::Random,
            require_irreducible: false,
            sampling: Sampling::Balanced,
            max_candidates: None,
        }
    }

    /// The full tuple space at `n = 2`, with no cap on the number emitted.
    pub fn exhaustive(width: u32) -> Self {
        Self {
            width,
            seed: 0,
            count: usize::MAX,
            mode: Mode::Exhaustive,
            require_irreducible: false,
            sampling: Sampling::Balanced,
            max_candidates: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_bits(self.width)?;
        if self.mode == Mode::Exhaustive && self.width != 2 {
            return Err(Error::ExhaustiveTooLarge(self.width));
        }
        Ok(())
    }

    /// Number of candidate indices available, `None` when unbounded.
    pub fn candidate_space(&self) -> Option<u64> {
        match self.mode {
            Mode::Exhaustive => {
                let planes = exhaustive_planes(self.width, self.sampling).len() as u64;
                Some(planes.pow(self.width))
            }
            Mode::Random => self.max_candidates,
        }
    }
}

/// All candidate planes for the exhaustive mode, in increasing decimal order.
fn exhaustive_planes(width: u32, sampling: Sampling) -> Vec<Vec<usize>> {
    let len = 1usize << width;
    (0u64..1 << len)
        .filter(|v| sampling == Sampling::Uniform || v.count_ones() as usize == len / 2)
        .map(|v| {
            (0..len)
                .filter(|&j| (v >> (len - 1 - j)) & 1 == 1)
                .collect()
        })
        .collect()
}

fn candidate_bcns(config: &SearchConfig, index: u64) -> Vec<Bcn> {
    let width = config.width;
    let len = 1usize << width;
    let plane_of = |i: u32| width - i;
    match config.mode {
        Mode::Exhaustive => {
            let planes = exhaustive_planes(width, config.sampling);
            let base = planes.len() as u64;
            // mixed radix, first plane most significant
            let mut digits = vec![0usize; width as usize];
            let mut rest = index;
            for d in digits.iter_mut().rev() {
                *d = (rest % base) as usize;
                rest /= base;
            }
            digits
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    Bcn::from_positions(width, plane_of(i as u32), Role::Output, planes[d].clone())
                        .expect("positions in range")
                })
                .collect()
        }
        Mode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(index);
            (0..width)
                .map(|i| {
                    let positions: Vec<usize> = match config.sampling {
                        Sampling::Balanced => sample(&mut rng, len, len / 2).into_vec(),
                        Sampling::Uniform => (0..len).filter(|_| rng.gen::<bool>()).collect(),
                    };
                    Bcn::from_positions(width, plane_of(i), Role::Output, positions)
                        .expect("positions in range")
                })
                .collect()
        }
    }
}

fn all_irreducible(bcns: &[Bcn]) -> bool {
    bcns.iter().all(|b| {
        let p = b.to_polynomial();
        p.degree().is_some_and(|d| d >= 1) && p.is_irreducible().unwrap_or(false)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Outcome {
    Unbalanced,
    NotBijective,
    Reducible,
    Accepted,
}

fn classify_report(config: &SearchConfig, report: &CandidateReport) -> Outcome {
    match report.verdict {
        Verdict::RejectedUnbalanced => Outcome::Unbalanced,
        Verdict::RejectedNotBijective => Outcome::NotBijective,
        Verdict::Accepted if config.require_irreducible && !all_irreducible(&report.bcns) => {
            Outcome::Reducible
        }
        Verdict::Accepted => Outcome::Accepted,
    }
}

/// Evaluates candidate `index` of the configured stream.
pub fn evaluate_candidate(config: &SearchConfig, index: u64) -> CandidateReport {
    judge(config.width, candidate_bcns(config, index))
}

/// Evaluates a contiguous block of candidates, returned in index order.
pub fn evaluate_candidates(
    config: &SearchConfig,
    indices: std::ops::Range<u64>,
    exec: Exec,
) -> Result<Vec<CandidateReport>> {
    config.validate()?;
    Ok(exec.map(indices, |i| evaluate_candidate(config, i)))
}

/// An accepted candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found {
    pub index: u64,
    pub bcns: Vec<Bcn>,
    pub sbox: SBox,
}

const CHUNK: u64 = 256;

/// Lazy stream of accepted candidates; see [`search`].
#[derive(Debug)]
pub struct Search {
    config: SearchConfig,
    exec: Exec,
    next_index: u64,
    end: Option<u64>,
    emitted: usize,
    buffer: VecDeque<Found>,
}

impl Search {
    /// Candidates examined so far (a multiple of the internal chunk size,
    /// clamped to the candidate space).
    pub fn examined(&self) -> u64 {
        self.next_index
    }

    fn fill(&mut self) -> bool {
        let start = self.next_index;
        let stop = match self.end {
            Some(end) if start >= end => return false,
            Some(end) => end.min(start.saturating_add(CHUNK)),
            None => start.saturating_add(CHUNK),
        };
        if stop == start {
            return false;
        }
        let config = &self.config;
        let accepted = self.exec.map(start..stop, |i| {
            let report = evaluate_candidate(config, i);
            match classify_report(config, &report) {
                Outcome::Accepted => Some(Found {
                    index: i,
                    sbox: report.assembled.expect("accepted implies assembled"),
                    bcns: report.bcns,
                }),
                _ => None,
            }
        });
        self.buffer.extend(accepted.into_iter().flatten());
        self.next_index = stop;
        true
    }
}

impl Iterator for Search {
    type Item = Found;

    fn next(&mut self) -> Option<Found> {
        loop {
            if self.emitted >= self.config.count {
                return None;
            }
            if let Some(found) = self.buffer.pop_front() {
                self.emitted += 1;
                return Some(found);
            }
            if !self.fill() {
                return None;
            }
        }
    }
}

/// Streams accepted `(planes, box)` pairs for the configuration.
///
/// Emits `count` boxes, or fewer if the candidate space (exhaustive mode) or
/// `max_candidates` runs out first. Any balanced plane has an even number of
/// ones, so its polynomial vanishes at 1 and is divisible by `x + 1`; with
/// `require_irreducible` the only admissible plane is `x + 1` itself at
/// `n = 2`, and the stream is empty in practice. Bound `max_candidates` when
/// using that filter in random mode.
pub fn search(config: &SearchConfig) -> Result<Search> {
    search_with(config, Exec::default())
}

pub fn search_with(config: &SearchConfig, exec: Exec) -> Result<Search> {
    config.validate()?;
    Ok(Search {
        config: config.clone(),
        exec,
        next_index: 0,
        end: config.candidate_space(),
        emitted: 0,
        buffer: VecDeque::new(),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateStats {
    pub trials: u64,
    pub rejected_unbalanced: u64,
    pub rejected_not_bijective: u64,
    /// Accepted by the gates but failing the irreducibility filter.
    pub rejected_reducible: u64,
    pub accepted: u64,
}

impl CandidateStats {
    fn record(&mut self, outcome: Outcome) {
        self.trials += 1;
        match outcome {
            Outcome::Unbalanced => self.rejected_unbalanced += 1,
            Outcome::NotBijective => self.rejected_not_bijective += 1,
            Outcome::Reducible => self.rejected_reducible += 1,
            Outcome::Accepted => self.accepted += 1,
        }
    }

    /// Flat `key=value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "trials={}\nrejected_unbalanced={}\nrejected_not_bijective={}\nrejected_reducible={}\naccepted={}\n",
            self.trials,
            self.rejected_unbalanced,
            self.rejected_not_bijective,
            self.rejected_reducible,
            self.accepted
        )
    }
}

/// Tallies verdicts over the first `trials` candidates of the stream (all
/// of them in exhaustive mode if the space is smaller). `count` and
/// `max_candidates` are ignored.
pub fn candidate_stats(config: &SearchConfig, trials: u64) -> Result<CandidateStats> {
    candidate_stats_with(config, trials, Exec::default())
}

pub fn candidate_stats_with(
    config: &SearchConfig,
    trials: u64,
    exec: Exec,
) -> Result<CandidateStats> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    config.validate()?;
    let n = match config.mode {
        Mode::Exhaustive => trials.min(config.candidate_space().unwrap_or(trials)),
        Mode::Random => trials,
    };
    let outcomes = exec.map(0..n, |i| {
        classify_report(config, &evaluate_candidate(config, i))
    });
    let mut stats = CandidateStats::default();
    for o in outcomes {
        stats.record(o);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcn::output_bcns;
    use crate::sbox::des_s1_row0;
    use num_bigint::BigUint;

    fn bcn4(value: u32, plane: u32) -> Bcn {
        Bcn::from_decimal(4, plane, Role::Output, &BigUint::from(value)).unwrap()
    }

    #[test]
    fn identity_planes_accepted() {
        let planes: Vec<Bcn> = [255, 3855, 13107, 21845]
            .iter()
            .zip([4, 3, 2, 1])
            .map(|(&v, p)| bcn4(v, p))
            .collect();
        let r = generate(&planes).unwrap();
        assert_eq!(r.verdict, Verdict::Accepted);
        assert_eq!(r.assembled, Some(SBox::identity(4).unwrap()));
        assert_eq!(r.proper, Some(true));
    }

    #[test]
    fn zero_plane_rejected_unbalanced() {
        let planes = vec![bcn4(255, 4), bcn4(0, 3), bcn4(13107, 2), bcn4(21845, 1)];
        let r = generate(&planes).unwrap();
        assert_eq!(r.verdict, Verdict::RejectedUnbalanced);
        assert_eq!(r.balanced, vec![true, false, true, true]);
        assert!(r.assembled.is_none());
        assert!(r.proper.is_none());
    }

    #[test]
    fn repeated_plane_rejected_not_bijective() {
        let planes = vec![bcn4(255, 1); 4];
        let r = generate(&planes).unwrap();
        assert_eq!(r.balanced, vec![true; 4]);
        assert_eq!(r.verdict, Verdict::RejectedNotBijective);
        let sbox = r.assembled.unwrap();
        let mut values: Vec<u32> = sbox.entries().to_vec();
        values.sort_unstable();
        values.dedup();
        assert_eq!(values, vec![0, 15]);
        // relabelled by position
        assert_eq!(
            r.bcns.iter().map(Bcn::plane).collect::<Vec<_>>(),
            vec![4, 3, 2, 1]
        );
    }

    #[test]
    fn generate_errors() {
        assert!(matches!(
            generate(&[bcn4(255, 4)]),
            Err(Error::BcnCount {
                expected: 4,
                found: 1
            })
        ));
        let wide = output_bcns(&SBox::identity(8).unwrap());
        let mut mixed = output_bcns(&des_s1_row0());
        mixed[2] = wide[0].clone();
        assert!(matches!(generate(&mixed), Err(Error::WidthMismatch { .. })));
        assert!(generate(&[]).is_err());
    }

    #[test]
    fn pipeline_consistency_on_des_row() {
        let s = des_s1_row0();
        let r = generate(&output_bcns(&s)).unwrap();
        assert_eq!(r.verdict, Verdict::Accepted);
        assert_eq!(r.assembled, Some(s));
    }

    #[test]
    fn exhaustive_requires_n2() {
        let mut c = SearchConfig::exhaustive(4);
        assert_eq!(search(&c).err(), Some(Error::ExhaustiveTooLarge(4)));
        c.width = 2;
        assert!(search(&c).is_ok());
    }

    #[test]
    fn exhaustive_space_sizes() {
        let c = SearchConfig::exhaustive(2);
        assert_eq!(c.candidate_space(), Some(36));
        let u = SearchConfig {
            sampling: Sampling::Uniform,
            ..c
        };
        assert_eq!(u.candidate_space(), Some(256));
    }

    #[test]
    fn exhaustive_n2_yields_all_permutations() {
        let found: Vec<Found> = search(&SearchConfig::exhaustive(2)).unwrap().collect();
        assert_eq!(found.len(), 24);
        let mut boxes: Vec<Vec<u32>> = found.iter().map(|f| f.sbox.entries().to_vec()).collect();
        boxes.sort();
        boxes.dedup();
        assert_eq!(boxes.len(), 24);
        assert!(found.iter().all(|f| f.sbox.is_proper()));
    }

    #[test]
    fn zero_count_is_empty() {
        let c = SearchConfig::random(4, 1, 0);
        assert_eq!(search(&c).unwrap().count(), 0);
        let mut e = SearchConfig::exhaustive(2);
        e.count = 0;
        assert_eq!(search(&e).unwrap().count(), 0);
    }

    #[test]
    fn random_search_is_reproducible() {
        let c = SearchConfig::random(4, 0xC0FFEE, 2);
        let a: Vec<Found> = search(&c).unwrap().collect();
        let b: Vec<Found> = search_with(&c, Exec::Sequential).unwrap().collect();
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
        for f in &a {
            assert!(f.sbox.is_proper());
            assert!(f.bcns.iter().all(Bcn::is_balanced));
            assert_eq!(generate(&f.bcns).unwrap().assembled.as_ref(), Some(&f.sbox));
        }
        let other: Vec<Found> = search(&SearchConfig::random(4, 0xC0FFEF, 2))
            .unwrap()
            .collect();
        assert_ne!(a, other);
    }

    #[test]
    fn max_candidates_bounds_random_search() {
        let mut c = SearchConfig::random(8, 7, 1);
        c.max_candidates = Some(300);
        let mut s = search(&c).unwrap();
        assert!(s.next().is_none());
        assert_eq!(s.examined(), 300);
    }

    #[test]
    fn irreducible_filter_finds_nothing() {
        let mut c = SearchConfig::exhaustive(2);
        c.require_irreducible = true;
        assert_eq!(search(&c).unwrap().count(), 0);
        let stats = candidate_stats(&c, 36).unwrap();
        assert_eq!(stats.accepted, 0);
        assert_eq!(stats.rejected_reducible, 24);

        let mut r = SearchConfig::random(4, 3, 1);
        r.require_irreducible = true;
        r.max_candidates = Some(4096);
        assert_eq!(search(&r).unwrap().count(), 0);
    }

    #[test]
    fn stats_n2_exhaustive() {
        let stats = candidate_stats(&SearchConfig::exhaustive(2), 1000).unwrap();
        assert_eq!(
            stats,
            CandidateStats {
                trials: 36,
                rejected_unbalanced: 0,
                rejected_not_bijective: 12,
                rejected_reducible: 0,
                accepted: 24,
            }
        );
    }

    #[test]
    fn stats_uniform_sampling_hits_balance_gate() {
        let c = SearchConfig {
            sampling: Sampling::Uniform,
            ..SearchConfig::exhaustive(2)
        };
        let stats = candidate_stats(&c, 1000).unwrap();
        assert_eq!(stats.trials, 256);
        assert_eq!(stats.accepted, 24);
        assert_eq!(stats.rejected_not_bijective, 12);
        assert_eq!(stats.rejected_unbalanced, 256 - 36);
    }

    #[test]
    fn stats_errors_and_determinism() {
        assert_eq!(
            candidate_stats(&SearchConfig::random(4, 1, 1), 0),
            Err(Error::ZeroTrials)
        );
        let c = SearchConfig::random(4, 99, 1);
        let a = candidate_stats_with(&c, 1000, Exec::Parallel).unwrap();
        let b = candidate_stats_with(&c, 1000, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials, 1000);
        assert_eq!(a.rejected_unbalanced, 0);
    }

    #[test]
    fn stats_text_block() {
        let s = candidate_stats(&SearchConfig::exhaustive(2), 36).unwrap();
        assert_eq!(
            s.to_text(),
            "trials=36\nrejected_unbalanced=0\nrejected_not_bijective=12\nrejected_reducible=0\naccepted=24\n"
        );
    }
}
