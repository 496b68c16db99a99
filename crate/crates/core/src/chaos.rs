//! Empirical distribution functions of orbit-distance streams, pair
//! verdicts, and control-sequence families.
//!
//! `Φ` and `Φ*` are liminf/limsup quantities; here they are estimated as the
//! min/max of `(1/N)·#{i < N : d_i < s}` over a finite list of checkpoints
//! `N`, and the checkpoint list travels with every result.

use alloc::vec::Vec;

use crate::odometer::{self, d_omega, OdometerError, OmegaWord, SequenceParams, SkewState, Z_LIMIT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChaosError {
    #[error("stream ended after {got} values, checkpoint needs {needed}")]
    ShortStream { needed: u64, got: u64 },
    #[error("distance {index} is not a finite nonnegative number")]
    NonFiniteDistance { index: u64 },
    #[error("{0} must be strictly ascending")]
    Unsorted(&'static str),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("checkpoints must be positive")]
    ZeroCheckpoint,
    #[error("{count} sequences need {needed} coding positions below depth {depth}, found {available}")]
    CountTooLarge { count: usize, needed: usize, available: usize, depth: u64 },
    #[error("pattern has no shared positions below depth {0}")]
    NoSharedPositions(u64),
    #[error(transparent)]
    Odometer(#[from] OdometerError),
}

/// Frequencies `freq[k][j]` at checkpoint `checkpoints[k]` and threshold
/// `thresholds[j]`, plus their min (`lower`) and max (`upper`) across
/// checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionProfile {
    pub thresholds: Vec<f64>,
    pub checkpoints: Vec<u64>,
    pub freq: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

fn check_grid(thresholds: &[f64], checkpoints: &[u64]) -> Result<(), ChaosError> {
    if thresholds.is_empty() {
        return Err(ChaosError::Empty("thresholds"));
    }
    if checkpoints.is_empty() {
        return Err(ChaosError::Empty("checkpoints"));
    }
    if thresholds.iter().any(|s| s.is_nan()) || thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ChaosError::Unsorted("thresholds"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ChaosError::Unsorted("checkpoints"));
    }
    if checkpoints[0] == 0 {
        return Err(ChaosError::ZeroCheckpoint);
    }
    Ok(())
}

fn profile_from<I>(stream: I, thresholds: &[f64], checkpoints: &[u64]) -> Result<DistributionProfile, ChaosError>
where
    I: IntoIterator<Item = Result<f64, ChaosError>>,
{
    check_grid(thresholds, checkpoints)?;
    // bump[j] counts distances whose smallest threshold strictly above them is thresholds[j]
    let mut bump = alloc::vec![0u64; thresholds.len() + 1];
    let mut freq = Vec::with_capacity(checkpoints.len());
    let mut seen = 0u64;
    let mut stream = stream.into_iter();
    for &cp in checkpoints {
        while seen < cp {
            let d = match stream.next() {
                Some(d) => d?,
                None => return Err(ChaosError::ShortStream { needed: cp, got: seen }),
            };
            if !d.is_finite() || d < 0.0 {
                return Err(ChaosError::NonFiniteDistance { index: seen });
            }
            bump[thresholds.partition_point(|&s| s <= d)] += 1;
            seen += 1;
        }
        let mut acc = 0u64;
        let row = bump[..thresholds.len()]
            .iter()
            .map(|&b| {
                acc += b;
                acc as f64 / cp as f64
            })
            .collect();
        freq.push(row);
    }
    let fold = |init: f64, pick: fn(f64, f64) -> f64| -> Vec<f64> {
        (0..thresholds.len())
            .map(|j| freq.iter().map(|row: &Vec<f64>| row[j]).fold(init, pick))
            .collect()
    };
    let lower = fold(f64::INFINITY, f64::min);
    let upper = fold(f64::NEG_INFINITY, f64::max);
    Ok(DistributionProfile {
        thresholds: thresholds.to_vec(),
        checkpoints: checkpoints.to_vec(),
        freq,
        lower,
        upper,
    })
}

/// Profile of a distance stream; only the first `max(checkpoints)` values
/// are consumed.
pub fn distribution_profile<I>(distances: I, thresholds: &[f64], checkpoints: &[u64]) -> Result<DistributionProfile, ChaosError>
where
    I: IntoIterator<Item = f64>,
{
    profile_from(distances.into_iter().map(Ok), thresholds, checkpoints)
}

/// A run of thresholds on which upper and lower estimates stay apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Dc3Evidence {
    pub s_lo: f64,
    pub s_hi: f64,
    /// Smallest `upper − lower` across the run.
    pub gap: f64,
    pub checkpoints: Vec<u64>,
}

impl DistributionProfile {
    /// The widest run of consecutive thresholds with `upper − lower > min_gap`.
    /// Ties go to the run with smaller thresholds.
    pub fn dc3_evidence(&self, min_gap: f64) -> Option<Dc3Evidence> {
        let mut best: Option<(usize, usize)> = None;
        let mut j = 0;
        let n = self.thresholds.len();
        let apart = |j: usize| self.upper[j] - self.lower[j] > min_gap;
        while j < n {
            if !apart(j) {
                j += 1;
                continue;
            }
            let start = j;
            while j + 1 < n && apart(j + 1) {
                j += 1;
            }
            let width = |(a, b): (usize, usize)| self.thresholds[b] - self.thresholds[a];
            if best.is_none_or(|b| width((start, j)) > width(b)) {
                best = Some((start, j));
            }
            j += 1;
        }
        best.map(|(a, b)| Dc3Evidence {
            s_lo: self.thresholds[a],
            s_hi: self.thresholds[b],
            gap: (a..=b).map(|j| self.upper[j] - self.lower[j]).fold(f64::INFINITY, f64::min),
            checkpoints: self.checkpoints.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairVerdict {
    /// A lower bound on every orbit distance of the pair.
    pub proximal_lower_bound: f64,
    pub li_yorke_possible: bool,
    pub dc3: Option<Dc3Evidence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyConfig {
    pub horizon: u64,
    pub thresholds: Vec<f64>,
    pub checkpoints: Vec<u64>,
    pub min_gap: f64,
}

pub const DEFAULT_MIN_GAP: f64 = 0.5;

/// Thresholds on which the default sequences separate the lower and upper
/// distribution functions.
pub const DC3_WINDOW: (f64, f64) = (1.0, 4.0);

/// Threshold interval guaranteed for the given sequences:
/// `(max(1, 2·y₁), 2·lim z)`.
pub fn dc3_interval(params: &SequenceParams) -> (f64, f64) {
    (1.0f64.max(2.0 * (params.y)(1)), 2.0 * Z_LIMIT)
}

/// `count` evenly spaced thresholds in `(lo, hi]`.
pub fn threshold_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|k| lo + (hi - lo) * k as f64 / count as f64).collect()
}

impl ClassifyConfig {
    /// Checkpoints at the ends of columns `columns`, thresholds on `(1, 4]`.
    pub fn for_columns(columns: &[u32], grid: usize) -> Result<Self, ChaosError> {
        let checkpoints = columns
            .iter()
            .map(|&n| odometer::column_horizon(n).ok_or(OdometerError::IndexOverflow(n as u64)))
            .collect::<Result<Vec<u64>, _>>()?;
        Ok(ClassifyConfig {
            horizon: checkpoints.last().copied().unwrap_or(0),
            thresholds: threshold_grid(DC3_WINDOW.0, DC3_WINDOW.1, grid),
            checkpoints,
            min_gap: DEFAULT_MIN_GAP,
        })
    }
}

/// Simulates the pair up to the last checkpoint and classifies it.
pub fn classify_pair(
    a: &SkewState,
    b: &SkewState,
    params: &SequenceParams,
    config: &ClassifyConfig,
) -> Result<PairVerdict, ChaosError> {
    classify_pair_profiled(a, b, params, config).map(|(verdict, _)| verdict)
}

/// [`classify_pair`] together with the profile it was read from.
pub fn classify_pair_profiled(
    a: &SkewState,
    b: &SkewState,
    params: &SequenceParams,
    config: &ClassifyConfig,
) -> Result<(PairVerdict, DistributionProfile), ChaosError> {
    let bound = d_omega(&a.omega, &b.omega).max(d_omega(&a.eta, &b.eta));
    check_grid(&config.thresholds, &config.checkpoints)?;
    let needed = *config.checkpoints.last().expect("checked nonempty");
    if needed > config.horizon {
        return Err(ChaosError::ShortStream {
            needed,
            got: config.horizon,
        });
    }
    let stream = odometer::orbit_distances(a, b, needed, params)?.map(|d| d.map_err(ChaosError::from));
    let profile = profile_from(stream, &config.thresholds, &config.checkpoints)?;
    Ok((
        PairVerdict {
            proximal_lower_bound: bound,
            li_yorke_possible: bound == 0.0,
            dc3: profile.dc3_evidence(config.min_gap),
        },
        profile,
    ))
}

/// Classifies a recorded stream; `bound` is whatever lower bound the caller
/// can certify (or the observed minimum).
pub fn classify_distances(
    distances: &[f64],
    bound: f64,
    config: &ClassifyConfig,
) -> Result<(PairVerdict, DistributionProfile), ChaosError> {
    let profile = distribution_profile(distances.iter().copied(), &config.thresholds, &config.checkpoints)?;
    Ok((
        PairVerdict {
            proximal_lower_bound: bound,
            li_yorke_possible: bound == 0.0,
            dc3: profile.dc3_evidence(config.min_gap),
        },
        profile,
    ))
}

/// `count` control sequences that share every non-coding position (all
/// zero) and spell distinct binary codes, cyclically repeated, along the
/// coding positions below `depth`.
pub fn scrambled_family<P>(pattern: P, count: usize, depth: u64) -> Result<Vec<OmegaWord>, ChaosError>
where
    P: Fn(u64) -> bool,
{
    if count == 0 {
        return Err(ChaosError::Empty("family"));
    }
    let coding: Vec<u64> = (0..depth).filter(|&p| pattern(p)).collect();
    let bits = if count == 1 { 0 } else { (usize::BITS - (count - 1).leading_zeros()) as usize };
    if coding.len() < bits {
        return Err(ChaosError::CountTooLarge {
            count,
            needed: bits,
            available: coding.len(),
            depth,
        });
    }
    if count > 1 && coding.len() as u64 == depth {
        return Err(ChaosError::NoSharedPositions(depth));
    }
    Ok((0..count)
        .map(|k| {
            let mut w = OmegaWord::zero();
            if bits > 0 {
                for (r, &p) in coding.iter().enumerate() {
                    w.set_bit(p, (k >> (r % bits)) & 1 == 1);
                }
            }
            w
        })
        .collect())
}

/// Worst case over all pairs of a family, positions `0..depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyCheck {
    pub pairs: usize,
    pub distinct: bool,
    pub min_agreements: u64,
    pub min_disagreements: u64,
    /// Longest stretch of consecutive positions without an agreement.
    pub longest_without_agreement: u64,
    /// Longest stretch of consecutive positions without a disagreement.
    pub longest_without_disagreement: u64,
}

/// Scans positions `from..depth` of every pair.
pub fn verify_family(words: &[OmegaWord], from: u64, depth: u64) -> FamilyCheck {
    let mut check = FamilyCheck {
        pairs: 0,
        distinct: true,
        min_agreements: u64::MAX,
        min_disagreements: u64::MAX,
        longest_without_agreement: 0,
        longest_without_disagreement: 0,
    };
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            check.pairs += 1;
            check.distinct &= a != b;
            let (mut agree, mut disagree) = (0, 0);
            let (mut run_a, mut run_d) = (0, 0);
            for p in from..depth {
                if a.bit(p) == b.bit(p) {
                    agree += 1;
                    run_a = 0;
                    run_d += 1;
                } else {
                    disagree += 1;
                    run_d = 0;
                    run_a += 1;
                }
                check.longest_without_agreement = check.longest_without_agreement.max(run_a);
                check.longest_without_disagreement = check.longest_without_disagreement.max(run_d);
            }
            check.min_agreements = check.min_agreements.min(agree);
            check.min_disagreements = check.min_disagreements.min(disagree);
        }
    }
    if check.pairs == 0 {
        check.min_agreements = 0;
        check.min_disagreements = 0;
    }
    check
}
