//! The skew product `(ω, η, c) ↦ (τω, η, φ_{ω,η}(c))`.
//!
//! * `ω` is a timer driven by the binary adding machine `τ`.
//! * `η` is a fixed control sequence; its symbol at position `n` decides
//!   whether the fiber walk continues in the upper (`P`) or lower (`Q`) half
//!   after the top of column `n`.
//! * `c` walks the countable compact fiber space `C = P ∪ Q ∪ L`.
//!
//! Sequences in `Ω` are restricted to eventually-zero words, which is closed
//! under `τ` and contains every `τ^t(0̄)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::spaces::{MetricSpace, SpaceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdometerError {
    #[error("fiber index {0} lies beyond column {MAX_COLUMN}")]
    IndexOverflow(u64),
    #[error("invalid fiber point: {0}")]
    BadFiber(String),
    #[error("invalid bit string: {0:?}")]
    BadBits(String),
    #[error("sequence parameters violate constraints: {0}")]
    BadSequence(String),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("bad truncation parameters: {0}")]
    BadTruncation(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// `2^{-i}`, exact for every representable power and `0.0` past the
/// subnormal range.
pub fn pow2_neg(i: u64) -> f64 {
    if i <= 1022 {
        f64::from_bits((1023 - i) << 52)
    } else if i <= 1074 {
        f64::from_bits(1u64 << (1074 - i))
    } else {
        0.0
    }
}

/// An eventually-zero element of `Ω = {0,1}^ℕ₀`, bit 0 first.
///
/// Stored as little-endian 64-bit limbs with trailing zero limbs trimmed, so
/// derived equality is semantic equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OmegaWord {
    limbs: Vec<u64>,
}

impl OmegaWord {
    pub fn zero() -> Self {
        OmegaWord { limbs: Vec::new() }
    }

    /// The word whose binary expansion (LSB first) is `value`, i.e. `τ^value(0̄)`.
    pub fn from_u64(value: u64) -> Self {
        let mut w = OmegaWord {
            limbs: alloc::vec![value],
        };
        w.trim();
        w
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut limbs = alloc::vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            if b {
                limbs[i / 64] |= 1 << (i % 64);
            }
        }
        let mut w = OmegaWord { limbs };
        w.trim();
        w
    }

    fn trim(&mut self) {
        while self.limbs.last() == Some(&0) {
            self.limbs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.is_empty()
    }

    pub fn bit(&self, i: u64) -> bool {
        let limb = (i / 64) as usize;
        limb < self.limbs.len() && (self.limbs[limb] >> (i % 64)) & 1 == 1
    }

    pub fn set_bit(&mut self, i: u64, value: bool) {
        let limb = (i / 64) as usize;
        if value {
            if limb >= self.limbs.len() {
                self.limbs.resize(limb + 1, 0);
            }
            self.limbs[limb] |= 1 << (i % 64);
        } else if limb < self.limbs.len() {
            self.limbs[limb] &= !(1 << (i % 64));
            self.trim();
        }
    }

    /// Number of bits up to and including the highest one bit.
    pub fn significant_bits(&self) -> u64 {
        match self.limbs.last() {
            None => 0,
            Some(&top) => (self.limbs.len() as u64 - 1) * 64 + (64 - top.leading_zeros() as u64),
        }
    }

    /// The lowest 64 bits as an integer.
    pub fn low_u64(&self) -> u64 {
        self.limbs.first().copied().unwrap_or(0)
    }

    /// Adds `1000…` with carry to the right, in place.
    pub fn tau_in_place(&mut self) {
        for limb in self.limbs.iter_mut() {
            let (v, overflow) = limb.overflowing_add(1);
            *limb = v;
            if !overflow {
                return;
            }
        }
        self.limbs.push(1);
    }

    /// Index of the first position where the two words differ.
    pub fn first_difference(&self, other: &OmegaWord) -> Option<u64> {
        let n = self.limbs.len().max(other.limbs.len());
        (0..n).find_map(|k| {
            let a = self.limbs.get(k).copied().unwrap_or(0);
            let b = other.limbs.get(k).copied().unwrap_or(0);
            let x = a ^ b;
            (x != 0).then(|| k as u64 * 64 + x.trailing_zeros() as u64)
        })
    }

    /// True when bits `0..nbits` equal those of `value` (`nbits ≤ 64`).
    pub fn agrees_below(&self, value: u64, nbits: u32) -> bool {
        let mask = if nbits >= 64 { u64::MAX } else { (1u64 << nbits) - 1 };
        (self.low_u64() ^ value) & mask == 0
    }

    /// Keeps only bits `0..nbits`.
    pub fn truncated(&self, nbits: u64) -> OmegaWord {
        let mut w = self.clone();
        let full = (nbits / 64) as usize;
        if w.limbs.len() > full {
            let rem = nbits % 64;
            w.limbs.truncate(full + usize::from(rem != 0));
            if rem != 0 {
                w.limbs[full] &= (1u64 << rem) - 1;
            }
        }
        w.trim();
        w
    }
}

impl fmt::Display for OmegaWord {
    /// LSB-first bit string; the zero word prints as `0`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.significant_bits().max(1);
        for i in 0..n {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for OmegaWord {
    type Err = OdometerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(OdometerError::BadBits(String::from(s)));
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(OdometerError::BadBits(String::from(s))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OmegaWord::from_bits(&bits))
    }
}

/// The adding machine.
pub fn tau(omega: &OmegaWord) -> OmegaWord {
    let mut w = omega.clone();
    w.tau_in_place();
    w
}

/// `d_Ω(a, b) = 2^{-first differing index}`.
pub fn d_omega(a: &OmegaWord, b: &OmegaWord) -> f64 {
    a.first_difference(b).map_or(0.0, pow2_neg)
}

/// Largest supported column index; `T_18 ≈ 1.1·10^18` still fits in `u64`.
pub const MAX_COLUMN: u32 = 18;

const fn compute_tops() -> [u64; MAX_COLUMN as usize] {
    let mut out = [0u64; MAX_COLUMN as usize];
    let mut sum: u64 = 0;
    let mut pow10: u64 = 1;
    let mut i = 1;
    while i <= MAX_COLUMN as usize {
        pow10 *= 10;
        sum += i as u64 + pow10;
        out[i - 1] = sum - 1;
        i += 1;
    }
    out
}

const TOPS: [u64; MAX_COLUMN as usize] = compute_tops();

/// `T_n = -1 + Σ_{i=1}^{n} (i + 10^i)`, the index of the top point of column `n`.
pub fn top_index(n: u32) -> Option<u64> {
    (1..=MAX_COLUMN).contains(&n).then(|| TOPS[n as usize - 1])
}

/// First index of column `n` (`T_{n-1} + 1`, with column 1 starting at 0).
pub fn column_start(n: u32) -> Option<u64> {
    match n {
        1 => Some(0),
        _ => top_index(n - 1).map(|t| t + 1).filter(|_| n <= MAX_COLUMN),
    }
}

/// Horizon `T_n + 1`: the number of steps `0..=T_n`.
pub fn column_horizon(n: u32) -> Option<u64> {
    top_index(n).map(|t| t + 1)
}

/// Column containing fiber index `t`.
pub fn column_of(t: u64) -> Result<u32, OdometerError> {
    let idx = TOPS.partition_point(|&top| top < t);
    if idx == TOPS.len() {
        Err(OdometerError::IndexOverflow(t))
    } else {
        Ok(idx as u32 + 1)
    }
}

fn pow10(n: u32) -> u64 {
    10u64.pow(n)
}

/// The three decreasing sequences shaping the fiber space.
///
/// Rules are closed forms indexed from 1 with `x₁ = y₁ = 1`, `z₁ = 3` and
/// limits `0, 0, 2`.
#[derive(Debug, Clone, Copy)]
pub struct SequenceParams {
    pub x: fn(u64) -> f64,
    pub y: fn(u64) -> f64,
    pub z: fn(u64) -> f64,
}

/// Limit of the `z` sequence.
pub const Z_LIMIT: f64 = 2.0;
/// Number of leading terms checked by [`SequenceParams::new`].
pub const CHECKED_TERMS: u64 = 10_000;

fn reciprocal(i: u64) -> f64 {
    1.0 / i as f64
}

fn two_plus_reciprocal(i: u64) -> f64 {
    2.0 + 1.0 / i as f64
}

impl Default for SequenceParams {
    /// `x_i = 1/i`, `y_i = 1/i`, `z_i = 2 + 1/i`.
    fn default() -> Self {
        SequenceParams {
            x: reciprocal,
            y: reciprocal,
            z: two_plus_reciprocal,
        }
    }
}

impl SequenceParams {
    pub fn new(x: fn(u64) -> f64, y: fn(u64) -> f64, z: fn(u64) -> f64) -> Result<Self, OdometerError> {
        let bad = |msg: String| Err(OdometerError::BadSequence(msg));
        if x(1) != 1.0 || y(1) != 1.0 || z(1) != 3.0 {
            return bad(String::from("need x1 = 1, y1 = 1, z1 = 3"));
        }
        for (name, seq, limit) in [("x", x, 0.0), ("y", y, 0.0), ("z", z, Z_LIMIT)] {
            let mut prev = seq(1);
            for i in 2..=CHECKED_TERMS {
                let v = seq(i);
                if v.is_nan() || v >= prev || v <= limit {
                    return bad(format!("{name}_{i} = {v} breaks strict decrease above {limit}"));
                }
                prev = v;
            }
        }
        Ok(SequenceParams { x, y, z })
    }
}

/// Location of `p_t` inside the column layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnPoint {
    pub coords: (f64, f64),
    pub column: u32,
    pub is_top: bool,
}

/// Decodes `p_t`: column `n` lists `(x_n, y_n), …, (x_n, y_1), (x_n, z_{10^n}), …, (x_n, z_1)`
/// bottom to top.
pub fn fiber_point(t: u64, params: &SequenceParams) -> Result<ColumnPoint, OdometerError> {
    let n = column_of(t)?;
    let row = t - column_start(n).expect("valid column");
    let x = (params.x)(n as u64);
    let y = if row < n as u64 {
        (params.y)(n as u64 - row)
    } else {
        (params.z)(pow10(n) - (row - n as u64))
    };
    Ok(ColumnPoint {
        coords: (x, y),
        column: n,
        is_top: t == TOPS[n as usize - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// A point of `C = P ∪ Q ∪ L`.
///
/// `L` lies on the y-axis: `AxisY(±, j) = (0, ±y_j)`, `AxisZ(±, j) = (0, ±z_j)`,
/// `AxisTwo(±) = (0, ±2)` and the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiberPoint {
    P(u64),
    Q(u64),
    Origin,
    AxisY(Sign, u64),
    AxisTwo(Sign),
    AxisZ(Sign, u64),
}

impl FiberPoint {
    pub fn coords(&self, params: &SequenceParams) -> Result<(f64, f64), OdometerError> {
        let axis_index = |j: u64| {
            if j == 0 {
                Err(OdometerError::BadFiber(format!("{self}")))
            } else {
                Ok(j)
            }
        };
        Ok(match *self {
            FiberPoint::P(t) => fiber_point(t, params)?.coords,
            FiberPoint::Q(t) => {
                let (x, y) = fiber_point(t, params)?.coords;
                (x, -y)
            }
            FiberPoint::Origin => (0.0, 0.0),
            FiberPoint::AxisY(s, j) => (0.0, s.factor() * (params.y)(axis_index(j)?)),
            FiberPoint::AxisTwo(s) => (0.0, s.factor() * Z_LIMIT),
            FiberPoint::AxisZ(s, j) => (0.0, s.factor() * (params.z)(axis_index(j)?)),
        })
    }

    pub fn is_limit_point(&self) -> bool {
        !matches!(self, FiberPoint::P(_) | FiberPoint::Q(_))
    }
}

impl fmt::Display for FiberPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FiberPoint::P(t) => write!(f, "P:{t}"),
            FiberPoint::Q(t) => write!(f, "Q:{t}"),
            FiberPoint::Origin => f.write_str("origin"),
            FiberPoint::AxisY(s, j) => write!(f, "y{}:{j}", s.symbol()),
            FiberPoint::AxisTwo(s) => write!(f, "two{}", s.symbol()),
            FiberPoint::AxisZ(s, j) => write!(f, "z{}:{j}", s.symbol()),
        }
    }
}

impl FromStr for FiberPoint {
    type Err = OdometerError;

    /// Accepts `P:t`, `Q:t`, `origin`, `y±:j`, `two±`, `z±:j`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OdometerError::BadFiber(String::from(s));
        let index = |v: &str, min: u64| v.parse::<u64>().ok().filter(|&j| j >= min).ok_or_else(bad);
        match s {
            "origin" => return Ok(FiberPoint::Origin),
            "two+" => return Ok(FiberPoint::AxisTwo(Sign::Plus)),
            "two-" => return Ok(FiberPoint::AxisTwo(Sign::Minus)),
            _ => {}
        }
        let (head, tail) = s.split_once(':').ok_or_else(bad)?;
        match head {
            "P" | "p" => Ok(FiberPoint::P(index(tail, 0)?)),
            "Q" | "q" => Ok(FiberPoint::Q(index(tail, 0)?)),
            "y+" => Ok(FiberPoint::AxisY(Sign::Plus, index(tail, 1)?)),
            "y-" => Ok(FiberPoint::AxisY(Sign::Minus, index(tail, 1)?)),
            "z+" => Ok(FiberPoint::AxisZ(Sign::Plus, index(tail, 1)?)),
            "z-" => Ok(FiberPoint::AxisZ(Sign::Minus, index(tail, 1)?)),
            _ => Err(bad()),
        }
    }
}

/// Max-coordinate distance between realized fiber points.
pub fn d_fiber(a: &FiberPoint, b: &FiberPoint, params: &SequenceParams) -> Result<f64, OdometerError> {
    let (p, q) = (a.coords(params)?, b.coords(params)?);
    Ok((p.0 - q.0).abs().max((p.1 - q.1).abs()))
}

/// True when `d_Ω(ω, τ^{T_n}(0̄)) < 2^{-n}`, i.e. bits `0..=n` of `ω` match `T_n`.
pub fn timer_ok(omega: &OmegaWord, n: u32) -> bool {
    match top_index(n) {
        Some(top) => omega.agrees_below(top, n + 1),
        None => false,
    }
}

/// One step of the fiber map `φ_{ω,η}`.
pub fn phi(omega: &OmegaWord, eta: &OmegaWord, c: FiberPoint) -> Result<FiberPoint, OdometerError> {
    let advance = |t: u64, upper: bool| -> Result<FiberPoint, OdometerError> {
        let n = column_of(t)?;
        if t != TOPS[n as usize - 1] {
            return Ok(if upper { FiberPoint::P(t + 1) } else { FiberPoint::Q(t + 1) });
        }
        if !timer_ok(omega, n) {
            return Ok(FiberPoint::Origin);
        }
        if n == MAX_COLUMN {
            return Err(OdometerError::IndexOverflow(t + 1));
        }
        Ok(if eta.bit(n as u64) {
            FiberPoint::Q(t + 1)
        } else {
            FiberPoint::P(t + 1)
        })
    };
    match c {
        FiberPoint::P(t) => advance(t, true),
        FiberPoint::Q(t) => advance(t, false),
        FiberPoint::Origin | FiberPoint::AxisTwo(_) => Ok(c),
        FiberPoint::AxisZ(_, 1) => Ok(FiberPoint::Origin),
        FiberPoint::AxisZ(s, j) if j >= 2 => Ok(FiberPoint::AxisZ(s, j - 1)),
        // (0, ±y_1) continues to the next limit point (0, ±2)
        FiberPoint::AxisY(s, 1) => Ok(FiberPoint::AxisTwo(s)),
        FiberPoint::AxisY(s, j) if j >= 2 => Ok(FiberPoint::AxisY(s, j - 1)),
        other => Err(OdometerError::BadFiber(format!("{other}"))),
    }
}

/// A point `(ω, η, c)` of `X = Ω × Ω × C`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SkewState {
    pub omega: OmegaWord,
    pub eta: OmegaWord,
    pub fiber: FiberPoint,
}

impl SkewState {
    pub fn new(omega: OmegaWord, eta: OmegaWord, fiber: FiberPoint) -> Self {
        SkewState { omega, eta, fiber }
    }

    /// Applies `f` in place.
    pub fn step(&mut self) -> Result<(), OdometerError> {
        self.fiber = phi(&self.omega, &self.eta, self.fiber)?;
        self.omega.tau_in_place();
        Ok(())
    }

    pub fn stepped(&self) -> Result<SkewState, OdometerError> {
        let mut next = self.clone();
        next.step()?;
        Ok(next)
    }
}

/// `d = max{d_Ω(ω,ω'), d_Ω(η,η'), d_C(c,c')}`.
pub fn distance(a: &SkewState, b: &SkewState, params: &SequenceParams) -> Result<f64, OdometerError> {
    let base = d_omega(&a.omega, &b.omega).max(d_omega(&a.eta, &b.eta));
    Ok(base.max(d_fiber(&a.fiber, &b.fiber, params)?))
}

/// Iterator over `d(f^t(a), f^t(b))` for `t = 0..horizon`.
///
/// Yields an error once and then stops if a fiber index overflows.
#[derive(Debug, Clone)]
pub struct OrbitDistances<'p> {
    a: SkewState,
    b: SkewState,
    params: &'p SequenceParams,
    remaining: u64,
    failed: bool,
}

impl Iterator for OrbitDistances<'_> {
    type Item = Result<f64, OdometerError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 || self.failed {
            return None;
        }
        self.remaining -= 1;
        let out = distance(&self.a, &self.b, self.params);
        let advanced = if self.remaining > 0 {
            self.a.step().and_then(|_| self.b.step())
        } else {
            Ok(())
        };
        match (out, advanced) {
            (Ok(d), Ok(())) => Some(Ok(d)),
            (Err(e), _) | (_, Err(e)) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (0, usize::try_from(self.remaining).ok())
    }
}

pub fn orbit_distances<'p>(
    a: &SkewState,
    b: &SkewState,
    horizon: u64,
    params: &'p SequenceParams,
) -> Result<OrbitDistances<'p>, OdometerError> {
    if horizon == 0 {
        return Err(OdometerError::ZeroHorizon);
    }
    Ok(OrbitDistances {
        a: a.clone(),
        b: b.clone(),
        params,
        remaining: horizon,
        failed: false,
    })
}

/// Diameter of all possible images of the top points `p_{T_n}`, `from ≤ n ≤ to`:
/// `{p_{T_n+1}, q_{T_n+1}, (0,0)}`. Shrinks to zero as `from` grows, which is
/// what makes `φ` continuous at `(0, ±3)`.
pub fn top_image_spread(params: &SequenceParams, from: u32, to: u32) -> Result<f64, OdometerError> {
    let mut pts = alloc::vec![(0.0, 0.0)];
    for n in from..=to {
        let next = top_index(n).ok_or(OdometerError::IndexOverflow(u64::MAX))? + 1;
        pts.push(FiberPoint::P(next).coords(params)?);
        pts.push(FiberPoint::Q(next).coords(params)?);
    }
    let mut diam = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            diam = diam.max((a.0 - b.0).abs().max((a.1 - b.1).abs()));
        }
    }
    Ok(diam)
}

/// A finite self-map of a truncated copy of `X`, ready for embedding.
#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    pub space: MetricSpace,
    pub states: Vec<SkewState>,
    /// `map[i]` is the index of the image of `states[i]`.
    pub map: Vec<usize>,
}

/// Truncates `X` to `ω ∈ {0,1}^omega_bits` (τ taken mod `2^omega_bits`),
/// `η ∈ {0,1}^eta_bits`, and fibers `p_t, q_t` for `t ≤ T_columns` plus the
/// origin.
///
/// The map is `f` itself except where `f` would leave the truncation: the
/// continuation `p/q_{T_columns+1}` is folded back to `p_0`/`q_0`.
pub fn truncated_system(
    omega_bits: u32,
    eta_bits: u32,
    columns: u32,
    params: &SequenceParams,
) -> Result<TruncatedSystem, OdometerError> {
    let bad = |m: String| Err(OdometerError::BadTruncation(m));
    if columns == 0 || columns > 2 {
        return bad(format!("columns must be 1 or 2, got {columns}"));
    }
    if omega_bits <= columns || omega_bits > 8 || eta_bits <= columns || eta_bits > 8 {
        return bad(format!(
            "need columns < omega_bits, eta_bits <= 8 (got {omega_bits}, {eta_bits}, {columns})"
        ));
    }
    let top = TOPS[columns as usize - 1];
    let mut fibers: Vec<FiberPoint> = (0..=top).map(FiberPoint::P).collect();
    fibers.extend((0..=top).map(FiberPoint::Q));
    fibers.push(FiberPoint::Origin);

    let words = |bits: u32| -> Vec<OmegaWord> { (0..1u64 << bits).map(OmegaWord::from_u64).collect() };
    let omegas = words(omega_bits);
    let etas = words(eta_bits);
    let mut states = Vec::with_capacity(omegas.len() * etas.len() * fibers.len());
    for w in &omegas {
        for e in &etas {
            for &c in &fibers {
                states.push(SkewState::new(w.clone(), e.clone(), c));
            }
        }
    }
    let index_of = |w: u64, e: u64, c: FiberPoint| -> usize {
        let ci = match c {
            FiberPoint::P(t) => t as usize,
            FiberPoint::Q(t) => (top + 1 + t) as usize,
            _ => fibers.len() - 1,
        };
        ((w as usize * etas.len()) + e as usize) * fibers.len() + ci
    };
    let mut map = Vec::with_capacity(states.len());
    for s in &states {
        let image = match phi(&s.omega, &s.eta, s.fiber)? {
            FiberPoint::P(t) if t > top => FiberPoint::P(0),
            FiberPoint::Q(t) if t > top => FiberPoint::Q(0),
            c => c,
        };
        let w = (s.omega.low_u64() + 1) % (1u64 << omega_bits);
        map.push(index_of(w, s.eta.low_u64(), image));
    }
    let labels = states
        .iter()
        .map(|s| format!("{}|{}|{}", s.omega, s.eta, s.fiber))
        .collect();
    let space = MetricSpace::from_fn(labels, |i, j| {
        distance(&states[i], &states[j], params).expect("truncated fibers are in range")
    })?;
    Ok(TruncatedSystem { space, states, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn w(s: &str) -> OmegaWord {
        s.parse().unwrap()
    }

    #[test]
    fn adding_machine_examples() {
        assert_eq!(tau(&OmegaWord::zero()), w("1"));
        assert_eq!(tau(&w("11")), w("001"));
        let mut x = OmegaWord::zero();
        for _ in 0..(1 << 5) {
            x.tau_in_place();
        }
        assert!((0..5).all(|i| !x.bit(i)));
        assert!(x.bit(5));
        // carry across a limb boundary
        let mut ones = OmegaWord::from_u64(u64::MAX);
        ones.tau_in_place();
        assert_eq!(ones.significant_bits(), 65);
        assert!(ones.bit(64));
    }

    #[test]
    fn d_omega_examples() {
        let z = OmegaWord::zero();
        assert_eq!(d_omega(&z, &w("1")), 1.0);
        assert_eq!(d_omega(&w("0101"), &w("0101000")), 0.0);
        assert_eq!(d_omega(&w("0101"), &w("0111")), 0.25);
        assert_eq!(pow2_neg(0), 1.0);
        assert_eq!(pow2_neg(1074), f64::from_bits(1));
        assert_eq!(pow2_neg(1075), 0.0);
    }

    #[test]
    fn display_roundtrip() {
        for s in ["0", "1", "0101", "00000001"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!("01x".parse::<OmegaWord>().is_err());
        assert!("".parse::<OmegaWord>().is_err());
        for s in ["P:0", "Q:12", "origin", "y+:3", "y-:1", "two+", "two-", "z+:1", "z-:9"] {
            assert_eq!(s.parse::<FiberPoint>().unwrap().to_string(), s);
        }
        assert!("y+:0".parse::<FiberPoint>().is_err());
        assert!("R:1".parse::<FiberPoint>().is_err());
    }

    #[test]
    fn column_layout() {
        assert_eq!(top_index(1), Some(10));
        assert_eq!(top_index(2), Some(112));
        assert_eq!(top_index(0), None);
        assert_eq!(top_index(19), None);
        assert_eq!(column_of(0).unwrap(), 1);
        assert_eq!(column_of(10).unwrap(), 1);
        assert_eq!(column_of(11).unwrap(), 2);
        assert!(column_of(top_index(18).unwrap()).is_ok());
        assert_eq!(
            column_of(top_index(18).unwrap() + 1),
            Err(OdometerError::IndexOverflow(top_index(18).unwrap() + 1))
        );
        let p = SequenceParams::default();
        let site = fiber_point(0, &p).unwrap();
        assert_eq!((site.coords, site.column, site.is_top), ((1.0, 1.0), 1, false));
        let site = fiber_point(10, &p).unwrap();
        assert_eq!((site.coords, site.column, site.is_top), ((1.0, 3.0), 1, true));
        let site = fiber_point(112, &p).unwrap();
        assert_eq!((site.coords, site.column, site.is_top), ((0.5, 3.0), 2, true));
        // column 2 starts at (x_2, y_2), then (x_2, y_1), then z_100
        assert_eq!(fiber_point(11, &p).unwrap().coords, (0.5, 0.5));
        assert_eq!(fiber_point(12, &p).unwrap().coords, (0.5, 1.0));
        assert_eq!(fiber_point(13, &p).unwrap().coords, (0.5, 2.01));
    }

    #[test]
    fn phi_cases() {
        let z = OmegaWord::zero();
        assert_eq!(phi(&z, &z, FiberPoint::P(3)).unwrap(), FiberPoint::P(4));
        assert_eq!(phi(&z, &z, FiberPoint::Q(3)).unwrap(), FiberPoint::Q(4));
        let timer = OmegaWord::from_u64(10);
        let eta1 = w("01");
        assert_eq!(phi(&timer, &eta1, FiberPoint::P(10)).unwrap(), FiberPoint::Q(11));
        assert_eq!(phi(&timer, &z, FiberPoint::P(10)).unwrap(), FiberPoint::P(11));
        assert_eq!(phi(&z, &eta1, FiberPoint::P(10)).unwrap(), FiberPoint::Origin);
        // tops behave the same from either half
        for (om, et) in [(&timer, &eta1), (&timer, &z), (&z, &z)] {
            assert_eq!(
                phi(om, et, FiberPoint::P(112)).unwrap(),
                phi(om, et, FiberPoint::Q(112)).unwrap()
            );
        }
        use Sign::*;
        assert_eq!(phi(&z, &z, FiberPoint::Origin).unwrap(), FiberPoint::Origin);
        assert_eq!(phi(&z, &z, FiberPoint::AxisTwo(Minus)).unwrap(), FiberPoint::AxisTwo(Minus));
        assert_eq!(phi(&z, &z, FiberPoint::AxisZ(Plus, 1)).unwrap(), FiberPoint::Origin);
        assert_eq!(phi(&z, &z, FiberPoint::AxisZ(Minus, 4)).unwrap(), FiberPoint::AxisZ(Minus, 3));
        assert_eq!(phi(&z, &z, FiberPoint::AxisY(Plus, 1)).unwrap(), FiberPoint::AxisTwo(Plus));
        assert_eq!(phi(&z, &z, FiberPoint::AxisY(Minus, 5)).unwrap(), FiberPoint::AxisY(Minus, 4));
    }

    #[test]
    fn limit_dynamics_move_away_from_origin() {
        let p = SequenceParams::default();
        let z = OmegaWord::zero();
        for c in [FiberPoint::AxisY(Sign::Plus, 7), FiberPoint::AxisZ(Sign::Minus, 7)] {
            let before = c.coords(&p).unwrap().1.abs();
            let after = phi(&z, &z, c).unwrap().coords(&p).unwrap().1.abs();
            assert!(after > before);
        }
    }

    #[test]
    fn orbit_distance_examples() {
        let p = SequenceParams::default();
        let z = OmegaWord::zero();
        let a = SkewState::new(z.clone(), z.clone(), FiberPoint::P(0));
        let b = SkewState::new(z.clone(), z.clone(), FiberPoint::Q(0));
        let first = orbit_distances(&a, &b, 1, &p).unwrap().next().unwrap().unwrap();
        assert_eq!(first, 2.0);
        assert!(orbit_distances(&a, &a, 20, &p).unwrap().all(|d| d.unwrap() == 0.0));
        assert_eq!(orbit_distances(&a, &b, 0, &p).unwrap_err(), OdometerError::ZeroHorizon);

        // η and η' differ at position 1; the split happens after T_1 = 10
        let eta = w("00");
        let eta2 = w("01");
        let a = SkewState::new(z.clone(), eta, FiberPoint::P(0));
        let b = SkewState::new(z.clone(), eta2, FiberPoint::P(0));
        let ds: Vec<f64> = orbit_distances(&a, &b, 12, &p).unwrap().map(Result::unwrap).collect();
        assert!(ds[..11].iter().all(|&d| d == 0.5));
        // P(11) = (1/2, 1/2), Q(11) = (1/2, -1/2)
        assert_eq!(ds[11], 1.0);
    }

    #[test]
    fn overflow_is_reported() {
        let p = SequenceParams::default();
        let t18 = top_index(18).unwrap();
        let z = OmegaWord::zero();
        let timer = OmegaWord::from_u64(t18);
        assert_eq!(
            phi(&timer, &z, FiberPoint::P(t18)),
            Err(OdometerError::IndexOverflow(t18 + 1))
        );
        let a = SkewState::new(timer.clone(), z.clone(), FiberPoint::P(t18));
        let mut it = orbit_distances(&a, &a, 5, &p).unwrap();
        assert!(it.next().unwrap().is_err());
        assert!(it.next().is_none());
    }

    #[test]
    fn sequence_params_validation() {
        assert!(SequenceParams::new(reciprocal, reciprocal, two_plus_reciprocal).is_ok());
        fn flat(_: u64) -> f64 {
            1.0
        }
        assert!(matches!(
            SequenceParams::new(reciprocal, flat, two_plus_reciprocal),
            Err(OdometerError::BadSequence(_))
        ));
        fn wrong_start(i: u64) -> f64 {
            2.0 / i as f64
        }
        assert!(SequenceParams::new(wrong_start, reciprocal, two_plus_reciprocal).is_err());
    }

    #[test]
    fn top_images_shrink() {
        let p = SequenceParams::default();
        let spreads: Vec<f64> = (1..=8).map(|n| top_image_spread(&p, n, 17).unwrap()).collect();
        assert!(spreads.windows(2).all(|w| w[1] < w[0]), "{spreads:?}");
    }

    #[test]
    fn truncation_is_a_self_map() {
        let p = SequenceParams::default();
        let sys = truncated_system(2, 2, 1, &p).unwrap();
        assert_eq!(sys.states.len(), 4 * 4 * 23);
        assert_eq!(sys.map.len(), sys.states.len());
        for (i, &j) in sys.map.iter().enumerate() {
            let (s, img) = (&sys.states[i], &sys.states[j]);
            assert_eq!(img.eta, s.eta);
            assert_eq!(img.omega.low_u64(), (s.omega.low_u64() + 1) % 4);
            match (s.fiber, phi(&s.omega, &s.eta, s.fiber).unwrap()) {
                (_, FiberPoint::P(11)) => assert_eq!(img.fiber, FiberPoint::P(0)),
                (_, FiberPoint::Q(11)) => assert_eq!(img.fiber, FiberPoint::Q(0)),
                (_, c) => assert_eq!(img.fiber, c),
            }
        }
        assert!(truncated_system(1, 2, 1, &p).is_err());
    }
}
