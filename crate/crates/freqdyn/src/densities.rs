//! Generalized weighted densities.
//!
//! A [`DensitySeq`] is a positive non-decreasing weight sequence `α`; the lower
//! `α`-density of a set `E ⊂ ℕ` is the liminf of `Σ_{k≤n, k∈E} α_k / Σ_{k≤n} α_k`.
//! Everything here works on finite windows `[n0, H]`: the liminf is replaced by the
//! minimum over the window and the limsup by the maximum.
//!
//! Weights are stored as `ln α_k`. All partial sums are accumulated with
//! log-sum-exp, so sequences like `exp(k / ln k)` are usable up to `k = 10^6`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logspace::LogAccumulator;

/// `ln` applied `s` times. Returns `NaN` once the argument leaves `(0, ∞)`.
pub fn iterated_log(x: f64, s: u32) -> f64 {
    let mut v = x;
    for _ in 0..s {
        v = v.ln();
    }
    v
}

/// `exp` applied `s` times.
pub fn iterated_exp(x: f64, s: u32) -> f64 {
    let mut v = x;
    for _ in 0..s {
        v = v.exp();
    }
    v
}

/// The standard families. `ExpD(None)` is `𝓓_∞ = 𝓔 = (e^k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensityKind {
    Constant(f64),
    PowerP(f64),
    ExpE(f64),
    ExpD(Option<u32>),
    LogL(u32),
    Custom,
}

type LogFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// A completely admissible weight sequence, stored in log-domain.
#[derive(Clone)]
pub struct DensitySeq {
    kind: DensityKind,
    k_min: u64,
    custom: Option<LogFn>,
}

impl fmt::Debug for DensitySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensitySeq")
            .field("kind", &self.kind)
            .field("k_min", &self.k_min)
            .finish()
    }
}

impl fmt::Display for DensitySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DensityKind::Constant(c) => write!(f, "const:{c}"),
            DensityKind::PowerP(r) => write!(f, "pow:{r}"),
            DensityKind::ExpE(e) => write!(f, "expE:{e}"),
            DensityKind::ExpD(Some(s)) => write!(f, "expD:{s}"),
            DensityKind::ExpD(None) => write!(f, "expD:inf"),
            DensityKind::LogL(l) => write!(f, "logL:{l}"),
            DensityKind::Custom => write!(f, "custom(k_min={})", self.k_min),
        }
    }
}

impl DensitySeq {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!(
                "constant weight must be positive, got {c}"
            )));
        }
        Ok(Self {
            kind: DensityKind::Constant(c),
            k_min: 1,
            custom: None,
        })
    }

    /// `𝓟_r = (k^r)`. Only `r ≥ 0` is non-decreasing.
    pub fn power(r: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!(
                "power exponent must be >= 0, got {r}"
            )));
        }
        Ok(Self {
            kind: DensityKind::PowerP(r),
            k_min: 1,
            custom: None,
        })
    }

    /// `𝓔_ε = (exp(k^ε))` for `0 < ε ≤ 1`.
    pub fn exp_e(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Domain(format!(
                "expE exponent must lie in (0, 1], got {eps}"
            )));
        }
        Ok(Self {
            kind: DensityKind::ExpE(eps),
            k_min: 1,
            custom: None,
        })
    }

    /// `𝓓_s = (exp(k / log_(s) k))`, defined from the first `k` with `log_(s) k > 1`.
    pub fn exp_d(s: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::Domain("expD order must be >= 1".into()));
        }
        let threshold = iterated_exp(1.0, s);
        if !(threshold < 1e15) {
            return Err(Error::Domain(format!(
                "expD:{s} starts beyond 64-bit indices"
            )));
        }
        let k_min = threshold.ceil() as u64 + 1;
        Ok(Self {
            kind: DensityKind::ExpD(Some(s)),
            k_min,
            custom: None,
        })
    }

    /// `𝓔 = 𝓓_∞ = (e^k)`.
    pub fn exp_full() -> Self {
        Self {
            kind: DensityKind::ExpD(None),
            k_min: 1,
            custom: None,
        }
    }

    /// `𝓛_l = (exp(ln k · log_(l) k))`, defined from the first `k` with `log_(l) k > 0`.
    pub fn log_l(l: u32) -> Result<Self> {
        if l == 0 {
            return Err(Error::Domain("logL order must be >= 1".into()));
        }
        let threshold = iterated_exp(1.0, l - 1);
        if !(threshold < 1e15) {
            return Err(Error::Domain(format!(
                "logL:{l} starts beyond 64-bit indices"
            )));
        }
        let k_min = threshold.floor() as u64 + 1;
        Ok(Self {
            kind: DensityKind::LogL(l),
            k_min,
            custom: None,
        })
    }

    /// A user supplied `k ↦ ln α_k`, valid from `k_min ≥ 1`.
    pub fn custom(
        k_min: u64,
        log_alpha: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if k_min == 0 {
            return Err(Error::Domain("k_min must be a positive integer".into()));
        }
        Ok(Self {
            kind: DensityKind::Custom,
            k_min,
            custom: Some(Arc::new(log_alpha)),
        })
    }

    /// Parses `const:1`, `pow:2`, `expE:0.5`, `expD:1`, `expD:inf`, `logL:2`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("density spec `{spec}` lacks `kind:value`")))?;
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{s}` in `{spec}`")))
        };
        let int = |s: &str| -> Result<u32> {
            s.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad integer `{s}` in `{spec}`")))
        };
        match name.trim() {
            "const" => Self::constant(num(arg)?),
            "pow" => Self::power(num(arg)?),
            "expE" => Self::exp_e(num(arg)?),
            "expD" if arg.trim() == "inf" => Ok(Self::exp_full()),
            "expD" => Self::exp_d(int(arg)?),
            "logL" => Self::log_l(int(arg)?),
            other => Err(Error::Parse(format!("unknown density kind `{other}`"))),
        }
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn k_min(&self) -> u64 {
        self.k_min
    }

    /// `ln α_k`. Callers are expected to stay at `k ≥ k_min`.
    #[inline]
    pub fn log_alpha(&self, k: u64) -> f64 {
        let x = k as f64;
        match self.kind {
            DensityKind::Constant(c) => c.ln(),
            DensityKind::PowerP(r) => r * x.ln(),
            DensityKind::ExpE(e) => x.powf(e),
            DensityKind::ExpD(Some(s)) => x / iterated_log(x, s),
            DensityKind::ExpD(None) => x,
            DensityKind::LogL(l) => x.ln() * iterated_log(x, l),
            DensityKind::Custom => (self
                .custom
                .as_ref()
                .expect("custom density without function"))(k),
        }
    }
}

/// `ln φ_α(n) = ln Σ_{k_min ≤ k ≤ n} α_k`.
pub fn phi(alpha: &DensitySeq, n: u64) -> Result<f64> {
    if n < alpha.k_min() {
        return Err(Error::Domain(format!(
            "phi needs n >= k_min = {}, got {n}",
            alpha.k_min()
        )));
    }
    let mut acc = LogAccumulator::new();
    for k in alpha.k_min()..=n {
        acc.push(alpha.log_alpha(k));
    }
    Ok(acc.value())
}

/// `ln φ_α(n)` for every `n` in `[0, horizon]` (entries below `k_min` are `-inf`).
pub fn phi_table(alpha: &DensitySeq, horizon: u64) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; horizon as usize + 1];
    let mut acc = LogAccumulator::new();
    for k in alpha.k_min()..=horizon {
        acc.push(alpha.log_alpha(k));
        out[k as usize] = acc.value();
    }
    out
}

// ---------------------------------------------------------------------------
// Index sets
// ---------------------------------------------------------------------------

type Predicate = Arc<dyn Fn(u64) -> bool + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Sorted(Arc<Vec<u64>>),
    Predicate(Predicate),
}

/// A subset of `ℕ` known on `[0, horizon]`, either materialized or given by a predicate.
#[derive(Clone)]
pub struct IndexSet {
    repr: Repr,
    horizon: u64,
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Sorted(v) => write!(
                f,
                "IndexSet(sorted, {} elements, horizon {})",
                v.len(),
                self.horizon
            ),
            Repr::Predicate(_) => write!(f, "IndexSet(predicate, horizon {})", self.horizon),
        }
    }
}

impl IndexSet {
    /// From a strictly increasing list; elements beyond `horizon` are dropped.
    pub fn from_sorted(elements: Vec<u64>, horizon: u64) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "index set elements must be strictly increasing".into(),
            ));
        }
        let mut elements = elements;
        let cut = elements.partition_point(|&x| x <= horizon);
        elements.truncate(cut);
        Ok(Self {
            repr: Repr::Sorted(Arc::new(elements)),
            horizon,
        })
    }

    /// From any list; sorts and deduplicates.
    pub fn from_unsorted(mut elements: Vec<u64>, horizon: u64) -> Self {
        elements.sort_unstable();
        elements.dedup();
        Self::from_sorted(elements, horizon).expect("sorted and deduplicated")
    }

    pub fn from_predicate(
        horizon: u64,
        pred: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            repr: Repr::Predicate(Arc::new(pred)),
            horizon,
        }
    }

    pub fn all(horizon: u64) -> Self {
        Self::from_predicate(horizon, |_| true)
    }

    pub fn empty(horizon: u64) -> Self {
        Self {
            repr: Repr::Sorted(Arc::new(Vec::new())),
            horizon,
        }
    }

    /// `{offset + step·k : k ∈ ℕ}`.
    pub fn arithmetic(step: u64, offset: u64, horizon: u64) -> Result<Self> {
        if step == 0 {
            return Err(Error::Domain(
                "arithmetic progression needs a positive step".into(),
            ));
        }
        Ok(Self::from_predicate(horizon, move |k| {
            k >= offset && (k - offset).is_multiple_of(step)
        }))
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn is_materialized(&self) -> bool {
        matches!(self.repr, Repr::Sorted(_))
    }

    pub fn contains(&self, k: u64) -> bool {
        if k > self.horizon {
            return false;
        }
        match &self.repr {
            Repr::Sorted(v) => v.binary_search(&k).is_ok(),
            Repr::Predicate(p) => p(k),
        }
    }

    /// Increasing enumeration of the elements in `[0, horizon]`.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match &self.repr {
            Repr::Sorted(v) => Box::new(v.iter().copied()),
            Repr::Predicate(p) => Box::new((0..=self.horizon).filter(move |&k| p(k))),
        }
    }

    /// Smallest element `≥ from`, if any within the horizon.
    pub fn next_from(&self, from: u64) -> Option<u64> {
        match &self.repr {
            Repr::Sorted(v) => {
                let i = v.partition_point(|&x| x < from);
                v.get(i).copied()
            }
            Repr::Predicate(p) => (from..=self.horizon).find(|&k| p(k)),
        }
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.iter().collect()
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Sorted(v) => v.len(),
            Repr::Predicate(_) => self.iter().count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.iter().next().is_none()
    }

    /// Materialized copy (no-op for sorted sets).
    pub fn materialize(&self) -> Self {
        match &self.repr {
            Repr::Sorted(_) => self.clone(),
            Repr::Predicate(_) => Self {
                repr: Repr::Sorted(Arc::new(self.to_vec())),
                horizon: self.horizon,
            },
        }
    }

    /// `ℕ ∖ E` on the same horizon.
    pub fn complement(&self) -> Self {
        let inner = self.clone();
        Self::from_predicate(self.horizon, move |k| !inner.contains(k))
    }

    /// Membership of every integer in `[0, upto]` as a dense mask.
    pub fn mask(&self, upto: u64) -> Vec<bool> {
        let mut m = vec![false; upto as usize + 1];
        match &self.repr {
            Repr::Sorted(v) => {
                for &x in v.iter().take_while(|&&x| x <= upto) {
                    m[x as usize] = true;
                }
            }
            Repr::Predicate(p) => {
                let top = upto.min(self.horizon);
                for k in 0..=top {
                    m[k as usize] = p(k);
                }
            }
        }
        m
    }

    /// Newline-delimited decimal serialization.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for x in self.iter() {
            s.push_str(&x.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str, horizon: u64) -> Result<Self> {
        let mut v = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let x = line.parse::<u64>().map_err(|_| {
                Error::Parse(format!(
                    "line {}: `{line}` is not a non-negative integer",
                    i + 1
                ))
            })?;
            v.push(x);
        }
        Self::from_sorted(v, horizon)
    }
}

// ---------------------------------------------------------------------------
// Window densities
// ---------------------------------------------------------------------------

fn check_window(alpha: &DensitySeq, e: &IndexSet, window: (u64, u64)) -> Result<()> {
    let (n0, h) = window;
    if n0 >= h {
        return Err(Error::Domain(format!("empty window [{n0}, {h}]")));
    }
    if n0 < alpha.k_min() {
        return Err(Error::Domain(format!(
            "window start {n0} below k_min = {}",
            alpha.k_min()
        )));
    }
    if h > e.horizon() {
        return Err(Error::Domain(format!(
            "window end {h} beyond set horizon {}",
            e.horizon()
        )));
    }
    Ok(())
}

/// Partial ratios `Σ_{k≤n, k∈E} α_k / Σ_{k≤n} α_k` for every `n` in the window.
///
/// Logs are shifted by `ln α_{k_min}` first, so a constant sequence gives the
/// same bits whatever the constant.
pub fn density_ratios(alpha: &DensitySeq, e: &IndexSet, window: (u64, u64)) -> Result<Vec<f64>> {
    check_window(alpha, e, window)?;
    let (n0, h) = window;
    let shift = alpha.log_alpha(alpha.k_min());
    let mask = e.mask(h);
    let mut total = LogAccumulator::new();
    let mut inside = LogAccumulator::new();
    let mut out = Vec::with_capacity((h - n0 + 1) as usize);
    for k in alpha.k_min()..=h {
        let la = alpha.log_alpha(k) - shift;
        total.push(la);
        if mask[k as usize] {
            inside.push(la);
        }
        if k >= n0 {
            let r = if inside.value() == f64::NEG_INFINITY {
                0.0
            } else {
                (inside.value() - total.value()).exp()
            };
            out.push(r.min(1.0));
        }
    }
    Ok(out)
}

/// Finite-window lower `α`-density: minimum of the partial ratios over `[n0, H]`.
pub fn emp_lower_density(alpha: &DensitySeq, e: &IndexSet, window: (u64, u64)) -> Result<f64> {
    let r = density_ratios(alpha, e, window)?;
    Ok(r.into_iter().fold(f64::INFINITY, f64::min))
}

/// Finite-window upper `α`-density, evaluated as `1 − lower(ℕ ∖ E)` so that the
/// duality holds bit for bit. It agrees with the direct maximum of the partial
/// ratios up to rounding.
pub fn emp_upper_density(alpha: &DensitySeq, e: &IndexSet, window: (u64, u64)) -> Result<f64> {
    Ok(1.0 - emp_lower_density(alpha, &e.complement(), window)?)
}

// ---------------------------------------------------------------------------
// Ordering and the Δ₂ condition
// ---------------------------------------------------------------------------

/// Three-valued answer for finite-horizon tests of asymptotic statements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trilean {
    True,
    False,
    Inconclusive,
}

/// Tests `α ≲ β`: `ln α_k − ln β_k` eventually non-increasing.
///
/// True when the last increase happens before `horizon/2`; false when increases
/// occupy at least 90% of the steps in `[horizon/2, horizon]`.
pub fn precedes(alpha: &DensitySeq, beta: &DensitySeq, horizon: u64) -> Trilean {
    let k0 = alpha.k_min().max(beta.k_min());
    if horizon <= k0 + 2 {
        return Trilean::Inconclusive;
    }
    let half = horizon / 2;
    let d = |k: u64| alpha.log_alpha(k) - beta.log_alpha(k);
    let mut last_violation: Option<u64> = None;
    let mut late_violations = 0u64;
    let mut prev = d(k0);
    for k in k0..horizon {
        let a1 = alpha.log_alpha(k + 1);
        let b1 = beta.log_alpha(k + 1);
        let next = a1 - b1;
        let tol = 1e-12 * (1.0 + a1.abs() + b1.abs());
        if next - prev > tol {
            last_violation = Some(k);
            if k >= half {
                late_violations += 1;
            }
        }
        prev = next;
    }
    match last_violation {
        None => Trilean::True,
        Some(k) if k < half => Trilean::True,
        Some(_) => {
            let late_steps = horizon - half.max(k0);
            if late_violations as f64 >= 0.9 * late_steps as f64 {
                Trilean::False
            } else {
                Trilean::Inconclusive
            }
        }
    }
}

/// Result of the `Δ₂` test `φ(2x) ≤ K φ(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta2 {
    Holds(f64),
    Fails,
    Inconclusive,
}

/// Doubling ratios `R(x) = φ(2x)/φ(x)` on the grid `x = k_min·2^j ≤ horizon/2`.
pub fn doubling_ratios(alpha: &DensitySeq, horizon: u64) -> Vec<(u64, f64)> {
    let mut grid = Vec::new();
    let mut x = alpha.k_min();
    while x <= horizon {
        grid.push(x);
        x *= 2;
    }
    let mut acc = LogAccumulator::new();
    let mut logs = Vec::with_capacity(grid.len());
    let mut gi = 0;
    for k in alpha.k_min()..=*grid.last().unwrap_or(&0) {
        acc.push(alpha.log_alpha(k));
        if gi < grid.len() && k == grid[gi] {
            logs.push(acc.value());
            gi += 1;
        }
    }
    (0..logs.len().saturating_sub(1))
        .map(|j| (grid[j], (logs[j + 1] - logs[j]).exp()))
        .collect()
}

/// Δ₂ verdict. `R` above `10^6` fails. Over the last decade of the grid, a
/// non-increasing `R` holds with `K = max R`; an increasing `R` whose increments
/// shrink geometrically (ratio ≤ 3/4) holds with `K = max R` plus the geometric
/// remainder; any other increasing `R` fails.
pub fn delta2_verdict(alpha: &DensitySeq, horizon: u64) -> Delta2 {
    if horizon < 2 * alpha.k_min() {
        return Delta2::Inconclusive;
    }
    let rs = doubling_ratios(alpha, horizon);
    if rs.len() < 3 {
        return Delta2::Inconclusive;
    }
    if rs.iter().any(|&(_, r)| !(r <= 1e6)) {
        return Delta2::Fails;
    }
    let x_last = rs.last().unwrap().0;
    let tail: Vec<f64> = rs
        .iter()
        .filter(|&&(x, _)| x * 10 >= x_last)
        .map(|&(_, r)| r)
        .collect();
    let tail = if tail.len() < 3 {
        rs[rs.len() - 3..].iter().map(|&(_, r)| r).collect()
    } else {
        tail
    };
    let k_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let incs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let tol = 1e-9 * k_max;
    if incs.iter().all(|&d| d <= tol) {
        return Delta2::Holds(k_max);
    }
    if incs.iter().all(|&d| d > 0.0) {
        let shrinking = incs.windows(2).all(|w| w[1] <= 0.75 * w[0]);
        if shrinking {
            let last = *incs.last().unwrap();
            let q = incs.windows(2).map(|w| w[1] / w[0]).fold(0.0_f64, f64::max);
            return Delta2::Holds(k_max + last * q / (1.0 - q));
        }
        return Delta2::Fails;
    }
    Delta2::Inconclusive
}

// ---------------------------------------------------------------------------
// The sequence n_k(f)
// ---------------------------------------------------------------------------

/// Tower thresholds: `a_1 = 1`, `a_m = 2^2^…^(2^m)` with `m` twos. `None` once
/// the value exceeds `u64`.
pub fn tower_threshold(m: u32) -> Option<u64> {
    match m {
        0 => None,
        1 => Some(1),
        _ => {
            let mut v: u64 = 1u64.checked_shl(m).filter(|_| m < 64)?;
            for _ in 0..m - 1 {
                if v >= 64 {
                    return None;
                }
                v = 1u64 << v;
            }
            Some(v)
        }
    }
}

/// `f(j) = m` for `j ∈ [a_m, a_{m+1})`, i.e. the number of thresholds `≤ j`.
pub fn f_tower(j: u64) -> u64 {
    let mut m = 0;
    loop {
        match tower_threshold(m as u32 + 1) {
            Some(a) if a <= j => m += 1,
            _ => return m,
        }
    }
}

/// 1-based position of the first zero binary digit of `j` (`δ_11 = 3`).
pub fn first_zero_bit(j: u64) -> u32 {
    j.trailing_ones() + 1
}

/// `Σ_{i=1}^{k} f(δ_i)`, counted threshold by threshold:
/// `#{i ≤ k : δ_i ≥ d} = #{i ≤ k : i has ≥ d−1 trailing ones}`.
fn f_delta_prefix(k: u64) -> u64 {
    let mut total = 0u64;
    let mut m = 1;
    while let Some(a) = tower_threshold(m) {
        let t = a - 1; // trailing ones needed
        let count = if t == 0 {
            k
        } else if t >= 64 {
            0
        } else {
            ((k as u128 + 1) >> t) as u64
        };
        if count == 0 {
            break;
        }
        total += count;
        m += 1;
    }
    total
}

/// `n_1 = 2`, `n_k = 2 Σ_{i<k} f(δ_i) + f(δ_k)`.
pub fn nk_f(k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::Domain("n_k(f) is indexed from k = 1".into()));
    }
    if k >= 1 << 62 {
        return Err(Error::Domain("n_k(f) requires k < 2^62".into()));
    }
    if k == 1 {
        return Ok(2);
    }
    Ok(2 * f_delta_prefix(k - 1) + f_tower(first_zero_bit(k) as u64))
}

/// `n_1(f), …, n_count(f)` by direct recursion.
pub fn nk_sequence(count: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(count as usize);
    let mut prefix = 0u64;
    for k in 1..=count {
        let fk = f_tower(first_zero_bit(k) as u64);
        out.push(if k == 1 { 2 } else { 2 * prefix + fk });
        prefix += fk;
    }
    out
}

// ---------------------------------------------------------------------------
// Shifted unions
// ---------------------------------------------------------------------------

/// `B = ∪_j (n_j + A ∩ I_j)`, materialized on the horizon of `A`.
pub fn shift_union(
    a: &IndexSet,
    shifts: &[u64],
    partition: &[Arc<dyn Fn(u64) -> bool + Send + Sync>],
) -> Result<IndexSet> {
    if shifts.len() != partition.len() || shifts.is_empty() {
        return Err(Error::Validation(format!(
            "need one shift per partition piece, got {} shifts and {} pieces",
            shifts.len(),
            partition.len()
        )));
    }
    let h = a.horizon();
    if let Some(k) = (0..=h).find(|&k| !partition.iter().any(|p| p(k))) {
        return Err(Error::Validation(format!("partition does not cover {k}")));
    }
    let mut out = Vec::new();
    for x in a.iter() {
        for (n, piece) in shifts.iter().zip(partition) {
            if piece(x) {
                if let Some(y) = x.checked_add(*n).filter(|&y| y <= h) {
                    out.push(y);
                }
            }
        }
    }
    Ok(IndexSet::from_unsorted(out, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_min_defaults() {
        assert_eq!(DensitySeq::exp_d(1).unwrap().k_min(), 4);
        assert_eq!(DensitySeq::log_l(1).unwrap().k_min(), 2);
        assert_eq!(DensitySeq::log_l(2).unwrap().k_min(), 3);
        assert_eq!(DensitySeq::power(2.0).unwrap().k_min(), 1);
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            "const:1", "pow:2", "expE:0.5", "expD:1", "logL:2", "expD:inf",
        ] {
            let d = DensitySeq::parse(s).unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!(DensitySeq::parse("pow").is_err());
        assert!(DensitySeq::parse("zeta:2").is_err());
        assert!(DensitySeq::parse("expE:2").is_err());
    }

    #[test]
    fn towers() {
        assert_eq!(tower_threshold(1), Some(1));
        assert_eq!(tower_threshold(2), Some(16));
        assert_eq!(tower_threshold(3), None);
        assert_eq!(f_tower(1), 1);
        assert_eq!(f_tower(15), 1);
        assert_eq!(f_tower(16), 2);
        assert_eq!(f_tower(u64::MAX), 2);
    }

    #[test]
    fn first_zero_bit_examples() {
        assert_eq!(first_zero_bit(11), 3);
        assert_eq!(first_zero_bit(1), 2);
        assert_eq!(first_zero_bit(2), 1);
        assert_eq!(first_zero_bit(3), 3);
    }

    #[test]
    fn index_set_text_round_trip() {
        let e = IndexSet::from_sorted(vec![1, 4, 9], 10).unwrap();
        let back = IndexSet::from_text(&e.to_text(), 10).unwrap();
        assert_eq!(back.to_vec(), vec![1, 4, 9]);
        assert!(IndexSet::from_text("3\n2\n", 10).is_err());
    }
}
