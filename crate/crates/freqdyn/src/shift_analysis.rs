//! Weighted backward shifts `B_w e_n = w_n e_{n-1}` on `ℓ^p`.
//!
//! Everything is driven by the log-products `ln(w_i ⋯ w_j)`, evaluated in closed
//! form whenever the weight has one.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::logspace::{pairwise_sum, LogAccumulator};

/// Default seed for the sampled starting points of the `r_w` estimator.
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// Largest admissible `ln(w_1⋯w_n)/n` before the estimators refuse to continue.
pub const GROWTH_LIMIT: f64 = 700.0;

type WeightFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum WeightKind {
    Constant(f64),
    /// `w_n = ((n+1)/n)²`.
    Rational2,
    /// `w_n = 1 + λ/n`.
    CostakisSambarino(f64),
    /// Levels of `a`-runs, a single `d`, short `c`-runs and long `b`-runs.
    FourBlock {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    },
    /// `w_1, …, w_m`, continued by `w_m`.
    Tabulated(Arc<Vec<f64>>),
    Custom(WeightFn),
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Constant(c) => write!(f, "Constant({c})"),
            WeightKind::Rational2 => write!(f, "Rational2"),
            WeightKind::CostakisSambarino(l) => write!(f, "CostakisSambarino({l})"),
            WeightKind::FourBlock { a, b, c, d } => write!(f, "FourBlock({a},{b},{c},{d})"),
            WeightKind::Tabulated(v) => write!(f, "Tabulated(len {})", v.len()),
            WeightKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A positive weight sequence `(w_n)_{n ≥ 1}`.
#[derive(Clone, Debug)]
pub struct WeightSeq {
    kind: WeightKind,
    /// Prefix sums of `ln w_n` for tabulated weights (`prefix[m] = Σ_{n≤m}`).
    prefix: Option<Arc<Vec<f64>>>,
}

/// A maximal run `[start, end]` of equal weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: u128,
    pub end: u128,
    pub value: f64,
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Domain(format!(
            "{name} must be a positive finite real, got {x}"
        )))
    }
}

impl WeightSeq {
    pub fn constant(c: f64) -> Result<Self> {
        Ok(Self {
            kind: WeightKind::Constant(positive("weight", c)?),
            prefix: None,
        })
    }

    pub fn rational2() -> Self {
        Self {
            kind: WeightKind::Rational2,
            prefix: None,
        }
    }

    /// `w_n = 1 + λ/n`; needs `λ > -1` so every weight is positive.
    pub fn costakis_sambarino(lambda: f64) -> Result<Self> {
        if !(lambda > -1.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!(
                "cosam parameter must exceed -1, got {lambda}"
            )));
        }
        Ok(Self {
            kind: WeightKind::CostakisSambarino(lambda),
            prefix: None,
        })
    }

    pub fn four_block(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let kind = WeightKind::FourBlock {
            a: positive("a", a)?,
            b: positive("b", b)?,
            c: positive("c", c)?,
            d: positive("d", d)?,
        };
        Ok(Self { kind, prefix: None })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation(
                "tabulated weight needs at least one value".into(),
            ));
        }
        let mut prefix = Vec::with_capacity(values.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        let mut comp = 0.0;
        for (i, &w) in values.iter().enumerate() {
            positive(&format!("w_{}", i + 1), w)?;
            // Kahan summation keeps differences of prefix sums accurate.
            let y = w.ln() - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            prefix.push(acc);
        }
        Ok(Self {
            kind: WeightKind::Tabulated(Arc::new(values)),
            prefix: Some(Arc::new(prefix)),
        })
    }

    /// An arbitrary positive weight `n ↦ w_n`. Positivity is checked lazily.
    pub fn custom(w: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            kind: WeightKind::Custom(Arc::new(w)),
            prefix: None,
        }
    }

    /// Reads `index,weight` rows with indices `1, 2, …, m`. A header row is allowed.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!(
                    "row {}: expected `index,weight`",
                    row + 1
                )));
            }
            let idx = rec[0].parse::<u64>();
            let w = rec[1].parse::<f64>();
            match (idx, w) {
                (Ok(i), Ok(w)) => {
                    if i != values.len() as u64 + 1 {
                        return Err(Error::Parse(format!(
                            "row {}: expected index {}, got {i}",
                            row + 1,
                            values.len() + 1
                        )));
                    }
                    values.push(w);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::Parse(format!("row {}: not numeric", row + 1))),
            }
        }
        Self::tabulated(values)
    }

    /// `const:2`, `rational2`, `cosam:1.0`, `fourblock:1,2,3,4`, `table:@file.csv`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{s}` in `{spec}`")))
        };
        match name {
            "const" => Self::constant(num(arg)?),
            "rational2" if arg.is_empty() => Ok(Self::rational2()),
            "cosam" => Self::costakis_sambarino(num(arg)?),
            "fourblock" => {
                let v = arg.split(',').map(num).collect::<Result<Vec<_>>>()?;
                if v.len() != 4 {
                    return Err(Error::Parse(format!(
                        "fourblock needs four values, got {}",
                        v.len()
                    )));
                }
                Self::four_block(v[0], v[1], v[2], v[3])
            }
            "table" => {
                let path = arg.strip_prefix('@').ok_or_else(|| {
                    Error::Parse("table weights are given as `table:@file.csv`".into())
                })?;
                Self::from_csv_path(path)
            }
            _ => Err(Error::Parse(format!("unknown weight spec `{spec}`"))),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn is_piecewise(&self) -> bool {
        matches!(self.kind, WeightKind::FourBlock { .. })
    }

    /// `w_n` for `n ≥ 1`.
    pub fn w(&self, n: u64) -> f64 {
        assert!(n >= 1, "weights are indexed from 1");
        let x = n as f64;
        match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::Rational2 => ((x + 1.0) / x).powi(2),
            WeightKind::CostakisSambarino(l) => 1.0 + l / x,
            WeightKind::FourBlock { .. } => self
                .segments_through(n as u128)
                .into_iter()
                .find(|s| s.start <= n as u128 && n as u128 <= s.end)
                .map(|s| s.value)
                .expect("segments cover every index"),
            WeightKind::Tabulated(v) => v[(n as usize).min(v.len()) - 1],
            WeightKind::Custom(f) => f(n),
        }
    }

    /// Runs of a piecewise-constant weight, covering `[1, upto]`. Empty for other kinds.
    pub fn segments_through(&self, upto: u128) -> Vec<Segment> {
        let WeightKind::FourBlock { a, b, c, d } = self.kind else {
            return Vec::new();
        };
        let mut out = vec![Segment {
            start: 1,
            end: 4,
            value: a,
        }];
        let mut k: u32 = 2;
        while out.last().is_none_or(|s| s.end < upto) {
            if k > 11 {
                break; // (k+1)·2^{k²} leaves u128 beyond this level
            }
            let kk = k as u128;
            let p = 1u128 << (k * k);
            let lo = kk * (1u128 << ((k - 1) * (k - 1))) + 1;
            out.push(Segment {
                start: lo,
                end: p - 1,
                value: a,
            });
            out.push(Segment {
                start: p,
                end: p,
                value: d,
            });
            out.push(Segment {
                start: p + 1,
                end: p + kk + 1,
                value: c,
            });
            out.push(Segment {
                start: p + kk + 2,
                end: (kk + 1) * p,
                value: b,
            });
            k += 1;
        }
        out.retain(|s| s.start <= upto);
        out
    }

    /// `sup_{n ≤ horizon} w_n`.
    pub fn sup_weight(&self, horizon: u64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => *c,
            WeightKind::Rational2 => 4.0,
            WeightKind::CostakisSambarino(l) => (1.0 + l).max(1.0 + l / horizon as f64),
            WeightKind::FourBlock { .. } => self
                .segments_through(horizon as u128)
                .iter()
                .map(|s| s.value)
                .fold(f64::NEG_INFINITY, f64::max),
            WeightKind::Tabulated(v) => v.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            WeightKind::Custom(f) => (1..=horizon)
                .map(|n| f(n))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `Σ_{n=i}^{j} ln w_n`.
    pub fn log_product(&self, i: u64, j: u64) -> Result<f64> {
        if i == 0 || i > j {
            return Err(Error::Domain(format!(
                "log_product needs 1 <= i <= j, got [{i}, {j}]"
            )));
        }
        Ok(self.log_product_unchecked(i, j))
    }

    fn log_product_unchecked(&self, i: u64, j: u64) -> f64 {
        match &self.kind {
            WeightKind::Constant(c) => (j - i + 1) as f64 * c.ln(),
            WeightKind::Rational2 => 2.0 * ((j as f64 + 1.0) / i as f64).ln(),
            WeightKind::CostakisSambarino(l) => {
                // Π (n+λ)/n = Γ(j+1+λ) Γ(i) / (Γ(i+λ) Γ(j+1))
                let (fi, fj) = (i as f64, j as f64);
                (libm::lgamma(fj + 1.0 + l) - libm::lgamma(fj + 1.0))
                    - (libm::lgamma(fi + l) - libm::lgamma(fi))
            }
            WeightKind::FourBlock { .. } => {
                let (i, j) = (i as u128, j as u128);
                let terms: Vec<f64> = self
                    .segments_through(j)
                    .iter()
                    .filter(|s| s.end >= i)
                    .map(|s| (s.end.min(j) - s.start.max(i) + 1) as f64 * s.value.ln())
                    .collect();
                pairwise_sum(&terms)
            }
            WeightKind::Tabulated(v) => {
                let p = self
                    .prefix
                    .as_ref()
                    .expect("tabulated weights carry prefix sums");
                let m = v.len() as u64;
                let inside = p[j.min(m) as usize] - p[(i - 1).min(m) as usize];
                let beyond = j.saturating_sub((i - 1).max(m));
                inside + beyond as f64 * v[v.len() - 1].ln()
            }
            WeightKind::Custom(f) => {
                let logs: Vec<f64> = (i..=j).map(|n| f(n).ln()).collect();
                pairwise_sum(&logs)
            }
        }
    }

    /// Same sequence, but with `ln w` prefix sums through `upto` so that log-products
    /// of custom weights cost O(1).
    fn prefixed(&self, upto: u64) -> Self {
        match &self.kind {
            WeightKind::Custom(f) => {
                let values: Vec<f64> = (1..=upto).map(|n| f(n)).collect();
                Self::tabulated(values).unwrap_or_else(|_| self.clone())
            }
            _ => self.clone(),
        }
    }
}

/// Finite-horizon estimates of `‖B_w‖⁻¹`, `r_w`, `λ_w` and `r_{p,w}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftQuantities {
    pub norm_inv: f64,
    pub r_w: f64,
    pub lambda_w: f64,
    pub r_pw: f64,
    /// Spread of `ln(w_1⋯w_n)/n` over the sampled `n ∈ [H/4, H]`.
    pub width: f64,
    pub horizon: u64,
}

impl ShiftQuantities {
    pub const CSV_HEADER: &'static str = "norm_inv,r_w,lambda_w,r_pw,width,horizon";

    pub fn csv_row(&self, fmt_float: impl Fn(f64) -> String) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_float(self.norm_inv),
            fmt_float(self.r_w),
            fmt_float(self.lambda_w),
            fmt_float(self.r_pw),
            fmt_float(self.width),
            self.horizon
        )
    }

    /// `‖B_w‖⁻¹ ≤ r_w⁻¹ ≤ λ_w⁻¹ ≤ r_{p,w}⁻¹`, each comparison relaxed by `e^width`.
    pub fn chain_holds(&self) -> bool {
        let slack = self.width.exp() * (1.0 + 1e-12);
        self.norm_inv <= slack / self.r_w
            && 1.0 / self.r_w <= slack / self.lambda_w
            && 1.0 / self.lambda_w <= slack / self.r_pw
    }
}

fn geometric_grid(lo: u64, hi: u64, points: usize) -> Vec<u64> {
    let (l, h) = (lo as f64, hi as f64);
    let mut g: Vec<u64> = (0..points)
        .map(|i| (l * (h / l).powf(i as f64 / (points - 1) as f64)).round() as u64)
        .map(|n| n.clamp(lo, hi))
        .collect();
    g.sort_unstable();
    g.dedup();
    g
}

/// [`shift_quantities_seeded`] with [`DEFAULT_SEED`].
pub fn shift_quantities(w: &WeightSeq, horizon: u64, p: f64) -> Result<ShiftQuantities> {
    shift_quantities_seeded(w, horizon, p, DEFAULT_SEED)
}

/// Estimates on a 64-point geometric grid of `n ∈ [H/2, H]`; piecewise weights also
/// sample every run boundary in `[H/64, H]`, since the extremes of
/// `ln(w_1⋯w_n)/n` sit at the ends of runs.
///
/// The inner supremum of `r_w` runs over starting points `k`: run boundaries for
/// piecewise weights, otherwise `k = 1` and 63 seeded uniform draws from `[1, H]`.
pub fn shift_quantities_seeded(
    w: &WeightSeq,
    horizon: u64,
    p: f64,
    seed: u64,
) -> Result<ShiftQuantities> {
    if horizon < 1000 {
        return Err(Error::Horizon(format!(
            "shift quantities need H >= 1000, got {horizon}"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!(
            "ell^p exponent must be >= 1, got {p}"
        )));
    }
    let w = &w.prefixed(2 * horizon);
    let mut grid = geometric_grid(horizon / 2, horizon, 64);
    let mut starts: Vec<u64> = vec![1];
    if w.is_piecewise() {
        for s in w.segments_through(horizon as u128) {
            for edge in [s.start, s.end] {
                if edge as u64 >= horizon / 64 && edge as u64 <= horizon {
                    grid.push(edge as u64);
                }
            }
            if (s.start as u64) <= horizon {
                starts.push(s.start as u64);
            }
        }
        grid.sort_unstable();
        grid.dedup();
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        starts.extend((0..63).map(|_| rng.gen_range(1..=horizon)));
    }
    starts.sort_unstable();
    starts.dedup();

    let rate = |n: u64| -> Result<f64> {
        let r = w.log_product_unchecked(1, n) / n as f64;
        if !(r <= GROWTH_LIMIT) {
            return Err(Error::Overflow(format!("ln(w_1...w_n)/n = {r} at n = {n}")));
        }
        Ok(r)
    };

    let mut lam = f64::NEG_INFINITY;
    let mut rpw = f64::INFINITY;
    let mut rw = f64::NEG_INFINITY;
    for &n in &grid {
        let r = rate(n)?;
        lam = lam.max(r);
        rpw = rpw.min(r);
        let best = starts
            .iter()
            .map(|&k| w.log_product_unchecked(k, k + n - 1) / n as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        rw = rw.max(best);
    }
    if !(rw <= GROWTH_LIMIT) {
        return Err(Error::Overflow(format!(
            "window growth rate {rw} exceeds {GROWTH_LIMIT}"
        )));
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for n in geometric_grid(horizon / 4, horizon, 64) {
        let r = rate(n)?;
        lo = lo.min(r);
        hi = hi.max(r);
    }

    Ok(ShiftQuantities {
        norm_inv: 1.0 / w.sup_weight(horizon),
        r_w: rw.exp(),
        lambda_w: lam.exp(),
        r_pw: rpw.exp(),
        width: hi - lo,
        horizon,
    })
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FhcVerdict {
    /// The series `Σ (w_1⋯w_n)^{-p}` converges; carries the sum over `[H/2, H]`.
    Satisfied {
        tail_bound: f64,
    },
    NotSatisfied,
    Inconclusive,
}

/// Finite-horizon test of `Σ_n (w_1⋯w_n)^{-p} < ∞`.
///
/// Satisfied: the sum over `[H/2, H]` is below `10⁻⁸·S(H)` and the terms are
/// non-increasing over `[H/10, H]`. Not satisfied: the terms stay `≥ 10⁻³` over
/// `[H/10, H]`, or the sum over `[H/2, H]` is still `≥ 10⁻²·S(H)`.
pub fn fhc_verdict(w: &WeightSeq, p: f64, horizon: u64) -> Result<FhcVerdict> {
    if horizon < 1000 {
        return Err(Error::Horizon(format!(
            "fhc verdict needs H >= 1000, got {horizon}"
        )));
    }
    let mut total = LogAccumulator::new();
    let mut tail = LogAccumulator::new();
    let decade = horizon / 10;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    let mut floor = f64::INFINITY;
    let mut lp = 0.0;
    for n in 1..=horizon {
        lp += w.w(n).ln();
        if n % 4096 == 0 || n == horizon {
            lp = w.log_product_unchecked(1, n); // resynchronise the running sum
        }
        let t = -p * lp;
        total.push(t);
        if n >= horizon / 2 {
            tail.push(t);
        }
        if n >= decade {
            if t > prev + 1e-12 * (1.0 + prev.abs()) {
                monotone = false;
            }
            floor = floor.min(t);
        }
        prev = t;
    }
    let ratio = tail.value() - total.value();
    if ratio < (1e-8f64).ln() && monotone {
        return Ok(FhcVerdict::Satisfied {
            tail_bound: tail.value().exp(),
        });
    }
    if floor >= (1e-3f64).ln() || ratio >= (1e-2f64).ln() {
        return Ok(FhcVerdict::NotSatisfied);
    }
    Ok(FhcVerdict::Inconclusive)
}

/// A set `Λ` of scalars, given by a finite sample together with flags fixed by
/// whoever produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSet {
    pub sample: Vec<f64>,
    pub countable: bool,
    pub unbounded: bool,
}

impl LambdaSet {
    pub fn finite(values: Vec<f64>) -> Self {
        Self {
            sample: values,
            countable: true,
            unbounded: false,
        }
    }

    pub fn countable(sample: Vec<f64>, unbounded: bool) -> Self {
        Self {
            sample,
            countable: true,
            unbounded,
        }
    }

    pub fn uncountable(sample: Vec<f64>, unbounded: bool) -> Self {
        Self {
            sample,
            countable: false,
            unbounded,
        }
    }

    pub fn parse_list(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad scalar `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::finite(values))
    }

    pub fn inf(&self) -> f64 {
        self.sample.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sup(&self) -> f64 {
        self.sample
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn distinct(&self) -> usize {
        let mut v = self.sample.clone();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommonVerdict {
    Nonempty(String),
    Empty(String),
    /// Neither criterion applies; `inf Λ` falls in the gap `(1/r_pw, 1/λ_w]`.
    Unknown {
        gap: (f64, f64),
    },
}

/// Existence of a common frequently hypercyclic vector for `{λB_w : λ ∈ Λ}`.
/// Thresholds are compared after multiplying by `e^width`.
pub fn common_fhc_verdict(lambda: &LambdaSet, q: &ShiftQuantities) -> Result<CommonVerdict> {
    if lambda.sample.is_empty() {
        return Err(Error::Validation("Lambda must be non-empty".into()));
    }
    if let Some(bad) = lambda.sample.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Validation(format!(
            "Lambda must contain positive reals, found {bad}"
        )));
    }
    let slack = q.width.exp();
    let inf = lambda.inf();
    if !lambda.countable {
        return Ok(CommonVerdict::Empty("Lambda is uncountable".into()));
    }
    if lambda.unbounded {
        return Ok(CommonVerdict::Empty("Lambda is unbounded".into()));
    }
    let lam_bound = slack / q.lambda_w;
    if lambda.distinct() >= 2 && inf <= lam_bound {
        return Ok(CommonVerdict::Empty(format!(
            "inf Lambda = {inf} <= 1/lambda_w = {lam_bound}"
        )));
    }
    let rpw_bound = slack / q.r_pw;
    if inf > rpw_bound {
        return Ok(CommonVerdict::Nonempty(format!(
            "Lambda is countable, bounded and inf Lambda = {inf} > 1/r_pw = {rpw_bound}"
        )));
    }
    Ok(CommonVerdict::Unknown {
        gap: (1.0 / q.r_pw, 1.0 / q.lambda_w),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairEquiv {
    Comparable(f64),
    NotComparable,
    Inconclusive,
}

/// Are the products `w1_1⋯w1_n` and `w2_1⋯w2_n` within a bounded ratio?
pub fn pair_equiv_check(w1: &WeightSeq, w2: &WeightSeq, horizon: u64) -> Result<PairEquiv> {
    if horizon < 10 {
        return Err(Error::Horizon(format!(
            "pair check needs H >= 10, got {horizon}"
        )));
    }
    let decade = horizon / 10;
    let mut max_abs = 0.0_f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut growing = true;
    let mut prev_abs = f64::NEG_INFINITY;
    let mut d = 0.0;
    for n in 1..=horizon {
        d += w1.w(n).ln() - w2.w(n).ln();
        if n % 4096 == 0 || n == horizon {
            d = w1.log_product_unchecked(1, n) - w2.log_product_unchecked(1, n);
        }
        max_abs = max_abs.max(d.abs());
        if n >= decade {
            lo = lo.min(d);
            hi = hi.max(d);
            if d.abs() <= prev_abs {
                growing = false;
            }
            prev_abs = d.abs();
        }
    }
    if max_abs == 0.0 {
        return Ok(PairEquiv::Comparable(1.0));
    }
    if max_abs <= 50.0 && hi - lo < 0.1 * max_abs {
        return Ok(PairEquiv::Comparable(max_abs.exp()));
    }
    if growing {
        return Ok(PairEquiv::NotComparable);
    }
    Ok(PairEquiv::Inconclusive)
}
