//! Construction of a common frequently hypercyclic vector for finitely many
//! multiples `λ_i B_w` of one weighted shift, with right inverses `S_i = F_w / λ_i`.
//!
//! Labels are pairs `(p, i)`: target `y_p` and operator `λ_i B_w`. The pipeline is
//! tail thresholds `N_p(i)` → separated index sets `E_p(i)` → the vector
//! `x = Σ_{(p,i)} Σ_{n ∈ E_p(i)} λ_i^{-n} F_w^n y_p` → verification of
//! `‖(λ_j B_w)^m x − y_q‖ < r_q` for every `m ∈ E_q(j)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::densities::{emp_lower_density, DensitySeq, IndexSet};
use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, LogAccumulator};
use crate::operators::{orbit_distance, LogSparseVec, SparseVec};
use crate::shift_analysis::{ShiftQuantities, WeightSeq};

/// A label `(p, i)`: target index and operator index.
pub type Label = (usize, usize);

/// The error budget `ε_p`, `J_p` and the hit radii `r_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonBudget {
    /// `ε_p = 2^{-(p+2)}`, `J_p = p + 2`.
    Geometric,
    /// `ε_p ≡ c`; only meaningful for threshold tables, since `Σ ε_p` diverges.
    Constant(f64),
}

impl EpsilonBudget {
    pub fn eps(&self, p: usize) -> f64 {
        match self {
            EpsilonBudget::Geometric => 2f64.powi(-(p as i32 + 2)),
            EpsilonBudget::Constant(c) => *c,
        }
    }

    pub fn j(&self, p: usize) -> usize {
        p + 2
    }

    /// `Σ_{p ≥ q} ε_p`.
    pub fn tail_sum(&self, q: usize) -> f64 {
        match self {
            EpsilonBudget::Geometric => 2.0 * self.eps(q),
            EpsilonBudget::Constant(_) => f64::INFINITY,
        }
    }

    /// `r_{1,q} = 2 Σ_{p<q} ε_q + 2 Σ_{p≥q} ε_p`.
    pub fn r1(&self, q: usize) -> f64 {
        2.0 * q as f64 * self.eps(q) + 2.0 * self.tail_sum(q)
    }

    /// `r_{2,q} = Σ_{p≥q} ε_p + q ε_q + q ε_q J_q ε_{J_q}`.
    pub fn r2(&self, q: usize) -> f64 {
        let e = self.eps(q);
        let jq = self.j(q);
        self.tail_sum(q) + q as f64 * e + q as f64 * e * jq as f64 * self.eps(jq)
    }

    /// `r_q = ε_q + r_{1,q} + 2 r_{2,q}`.
    pub fn r(&self, q: usize) -> f64 {
        self.eps(q) + self.r1(q) + 2.0 * self.r2(q)
    }
}

/// Default finite stand-in for a dense set of targets:
/// `e₀, e₀+e₁, 2e₁, e₂−e₀, (e₀+e₁+e₂)/2`.
pub fn default_targets(p: f64) -> Vec<SparseVec> {
    vec![
        SparseVec::basis(0, p),
        SparseVec::from_pairs([(0, 1.0), (1, 1.0)], p),
        SparseVec::from_pairs([(1, 2.0)], p),
        SparseVec::from_pairs([(2, 1.0), (0, -1.0)], p),
        SparseVec::from_pairs([(0, 0.5), (1, 0.5), (2, 0.5)], p),
    ]
}

/// Multiples `λ_i B_w` of one weighted shift.
#[derive(Debug, Clone)]
pub struct Multiples {
    pub w: WeightSeq,
    pub lambdas: Vec<f64>,
}

impl Multiples {
    pub fn new(w: WeightSeq, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Validation("need at least one multiple".into()));
        }
        if let Some(bad) = lambdas.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Validation(format!(
                "multiples must be positive, got {bad}"
            )));
        }
        Ok(Self { w, lambdas })
    }

    fn inf(&self) -> f64 {
        self.lambdas.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn sup(&self) -> f64 {
        self.lambdas
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Lower end `a = e^{width} / r_{p,w}` of the admissible multiples.
pub fn admissible_floor(q: &ShiftQuantities) -> f64 {
    q.width.exp() / q.r_pw
}

/// Is there `d ∈ (a, inf Λ)` with `(sup Λ / inf Λ)(d / inf Λ)^{c−1} ≤ 1`?
pub fn c_is_valid(m: &Multiples, q: &ShiftQuantities, c: f64) -> bool {
    if !(c > 1.0) {
        return false;
    }
    let (lo, hi) = (m.inf(), m.sup());
    lo * (lo / hi).powf(1.0 / (c - 1.0)) > admissible_floor(q)
}

/// `(d, c)` with `d` the midpoint of `(a, inf Λ)` and the smallest matching `c`
/// (`c = 2` when all multiples coincide).
pub fn separation_scale(m: &Multiples, q: &ShiftQuantities) -> Result<(f64, f64)> {
    let a = admissible_floor(q);
    let (lo, hi) = (m.inf(), m.sup());
    if lo <= a {
        return Err(Error::Precondition(format!(
            "inf Lambda = {lo} is not above 1/r_pw = {a}"
        )));
    }
    let d = 0.5 * (a + lo);
    let c = if hi > lo {
        1.0 + (hi / lo).ln() / (lo / d).ln()
    } else {
        2.0
    };
    Ok((d, c))
}

// ---------------------------------------------------------------------------
// Tail thresholds
// ---------------------------------------------------------------------------

/// Log-terms `ln(λ^{-n} ‖F_w^n y‖)` for `n ≤ upto` and their suffix sums, with a
/// geometric continuation past `upto`.
struct TailProfile {
    suffix: Vec<f64>,
    last: f64,
    log_ratio: f64,
}

fn log_forward_norm(w: &WeightSeq, y: &SparseVec, n: u64) -> f64 {
    let p = y.p();
    let mut acc = LogAccumulator::new();
    for (j, c) in y.iter() {
        let lp = if n == 0 {
            0.0
        } else {
            w.log_product(j + 1, j + n).expect("valid range")
        };
        acc.push(p * (c.abs().ln() - lp));
    }
    acc.value() / p
}

impl TailProfile {
    fn new(w: &WeightSeq, lambda: f64, y: &SparseVec, upto: u64) -> Self {
        let ll = lambda.ln();
        let terms: Vec<f64> = (0..=upto)
            .map(|n| log_forward_norm(w, y, n) - n as f64 * ll)
            .collect();
        let u = upto as usize;
        let log_ratio = terms[u] - terms[u - 1];
        let rest = if log_ratio < 0.0 {
            terms[u] + log_ratio - (-(log_ratio.exp_m1())).ln()
        } else {
            f64::INFINITY
        };
        let mut suffix = vec![0.0; u + 1];
        let mut acc = rest;
        for n in (0..=u).rev() {
            acc = log_add_exp(acc, terms[n]);
            suffix[n] = acc;
        }
        Self {
            suffix,
            last: terms[u],
            log_ratio,
        }
    }

    /// `ln Σ_{n ≥ from} λ^{-n} ‖F^n y‖`.
    fn suffix_at(&self, from: u64) -> f64 {
        let u = self.suffix.len() as u64 - 1;
        if from <= u {
            return self.suffix[from as usize];
        }
        if self.log_ratio >= 0.0 {
            return f64::INFINITY;
        }
        self.last + (from - u) as f64 * self.log_ratio - (-(self.log_ratio.exp_m1())).ln()
    }
}

/// The smallest `N` per condition; the table entry is their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConditionBreakdown {
    /// Conditions (i), (v), (vi): vanish once `N` exceeds every target support.
    pub support: u64,
    /// Condition (ii): `Σ_{n≥N} λ_k^{-n} ‖F^n y‖ < ε_p`.
    pub ii: u64,
    /// Conditions (iii)/(iv): cross terms with `n ≥ (c−1)m`.
    pub iii: u64,
    /// Condition (vii): `Σ_{n≥N} λ_k^{-n} ‖F^n y‖ < ε_p ε_i`.
    pub vii: u64,
}

impl ConditionBreakdown {
    pub fn overall(&self) -> u64 {
        self.support.max(self.ii).max(self.iii).max(self.vii).max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdTable {
    pub n: BTreeMap<Label, u64>,
    pub breakdown: BTreeMap<Label, ConditionBreakdown>,
}

/// Smallest `N ∈ [1, cap]` with `f(N) < thr` for non-increasing `f`.
fn first_below(cap: u64, thr: f64, condition: &'static str, f: impl Fn(u64) -> f64) -> Result<u64> {
    if !(f(cap) < thr) {
        return Err(Error::DivergingTail { condition, cap });
    }
    let (mut lo, mut hi) = (1u64, cap);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if f(mid) < thr {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `N_p(i)` for every label with `p < targets.len()` and `i < lambdas.len()`.
///
/// Norms of series are replaced by sums of norms. Tails are summed up to `5·cap`
/// and continued geometrically.
pub fn tail_threshold_table(
    m: &Multiples,
    targets: &[SparseVec],
    budget: EpsilonBudget,
    c: f64,
    cap: u64,
    quantities: &ShiftQuantities,
) -> Result<ThresholdTable> {
    if targets.is_empty() {
        return Err(Error::Validation("need at least one target".into()));
    }
    let a = admissible_floor(quantities);
    if let Some(&l) = m.lambdas.iter().find(|&&l| l <= a) {
        return Err(Error::Precondition(format!(
            "multiple {l} is not above 1/r_pw = {a}"
        )));
    }
    if !c_is_valid(m, quantities, c) {
        return Err(Error::Precondition(format!(
            "c = {c} admits no d in (1/r_pw, inf Lambda)"
        )));
    }
    if cap < 2 {
        return Err(Error::Domain("cap must be at least 2".into()));
    }
    let upto = 5 * cap;
    let profiles: Vec<Vec<TailProfile>> = targets
        .par_iter()
        .map(|y| {
            m.lambdas
                .iter()
                .map(|&l| TailProfile::new(&m.w, l, y, upto))
                .collect()
        })
        .collect();
    let nl = m.lambdas.len();
    let m_max = (upto as f64 / (c - 1.0)).ceil() as u64;

    let mut table = BTreeMap::new();
    let mut breakdown = BTreeMap::new();
    for i in 0..nl {
        let mut prev = ConditionBreakdown::default();
        for p in 0..targets.len() {
            let eps_p = budget.eps(p);
            let eps_i = budget.eps(i);
            let thr_ii = eps_p.ln();
            let thr_iii = (eps_p * eps_i).min(budget.eps(budget.j(p)) * eps_p).ln();
            let thr_vii = (eps_p * eps_i).ln();
            let mut b = ConditionBreakdown::default();
            for q in 0..=p {
                b.support = b.support.max(targets[q].max_index().map_or(0, |s| s + 1));
                for k in 0..nl {
                    let prof = &profiles[q][k];
                    b.ii =
                        b.ii.max(first_below(cap, thr_ii, "ii", |n| prof.suffix_at(n))?);
                    b.vii = b
                        .vii
                        .max(first_below(cap, thr_vii, "vii", |n| prof.suffix_at(n))?);
                    for l in (0..nl).filter(|&l| l != k) {
                        let lr = (m.lambdas[k] / m.lambdas[l]).ln();
                        let pl = &profiles[q][l];
                        let worst = |n: u64| -> f64 {
                            (0..=m_max)
                                .map(|mm| {
                                    let start = n.max(((c - 1.0) * mm as f64).ceil() as u64);
                                    mm as f64 * lr + pl.suffix_at(start)
                                })
                                .fold(f64::NEG_INFINITY, f64::max)
                        };
                        b.iii = b.iii.max(first_below(cap, thr_iii, "iii", worst)?);
                    }
                }
            }
            // monotone in p by construction; enforce it against rounding
            b.support = b.support.max(prev.support);
            b.ii = b.ii.max(prev.ii);
            b.iii = b.iii.max(prev.iii);
            b.vii = b.vii.max(prev.vii);
            prev = b;
            table.insert((p, i), b.overall());
            breakdown.insert((p, i), b);
        }
    }
    Ok(ThresholdTable {
        n: table,
        breakdown,
    })
}

// ---------------------------------------------------------------------------
// Separated index sets
// ---------------------------------------------------------------------------

/// Index sets `E_p(i) = ∪_{u ∈ A_p(i), u ≥ u_min} ([⌈(1−ε)a^u⌉, ⌊(1+ε)a^u⌋] ∩ N_p(i)ℕ)`
/// with `A_p(i)` a residue class modulo the number of labels.
#[derive(Debug, Clone)]
pub struct SeparatedFamily {
    pub labels: Vec<Label>,
    pub k: f64,
    pub eps: f64,
    pub a: f64,
    /// Number of labels, which is also the largest gap in every `A_p(i)`.
    pub modulus: u64,
    pub n: BTreeMap<Label, u64>,
    pub residue: BTreeMap<Label, u64>,
    pub u_min: BTreeMap<Label, u32>,
    pub sets: BTreeMap<Label, IndexSet>,
    pub horizon: u64,
}

pub const DEFAULT_EPS: f64 = 0.1;

/// `a = 1.1·K(1+2ε)/(1−2ε)`.
pub fn default_a(k: f64, eps: f64) -> f64 {
    1.1 * k * (1.0 + 2.0 * eps) / (1.0 - 2.0 * eps)
}

/// [`build_index_sets_with`] using `ε = 1/10` and the default `a`.
pub fn build_index_sets(
    n_table: &BTreeMap<Label, u64>,
    k: f64,
    horizon: u64,
) -> Result<SeparatedFamily> {
    build_index_sets_with(n_table, k, DEFAULT_EPS, default_a(k, DEFAULT_EPS), horizon)
}

pub fn build_index_sets_with(
    n_table: &BTreeMap<Label, u64>,
    k: f64,
    eps: f64,
    a: f64,
    horizon: u64,
) -> Result<SeparatedFamily> {
    if !(k > 1.0) {
        return Err(Error::Domain(format!("K must exceed 1, got {k}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!(
            "eps must lie in (0, 1/2), got {eps}"
        )));
    }
    if !((1.0 - 2.0 * eps) / (1.0 + 2.0 * eps) * a > k) {
        return Err(Error::Validation(format!(
            "a = {a} violates (1-2eps)a/(1+2eps) > K = {k}"
        )));
    }
    if let Some((l, _)) = n_table.iter().find(|(_, &n)| n == 0) {
        return Err(Error::Validation(format!("N{l:?} must be positive")));
    }
    let labels: Vec<Label> = n_table.keys().copied().collect();
    let modulus = labels.len() as u64;
    let mut fam = SeparatedFamily {
        labels: labels.clone(),
        k,
        eps,
        a,
        modulus,
        n: n_table.clone(),
        residue: BTreeMap::new(),
        u_min: BTreeMap::new(),
        sets: BTreeMap::new(),
        horizon,
    };
    for (idx, &label) in labels.iter().enumerate() {
        let n = n_table[&label];
        let mut u_min = 0u32;
        while eps * a.powi(u_min as i32) < n as f64 {
            u_min += 1;
        }
        let mut elems = Vec::new();
        let mut u = u_min;
        loop {
            let centre = a.powi(u as i32);
            let lo = ((1.0 - eps) * centre).ceil() as u64;
            if lo > horizon {
                break;
            }
            if u as u64 % modulus == idx as u64 {
                let hi = (((1.0 + eps) * centre).floor() as u64).min(horizon);
                let mut x = lo.div_ceil(n) * n;
                while x <= hi {
                    elems.push(x);
                    x += n;
                }
            }
            u += 1;
        }
        fam.residue.insert(label, idx as u64);
        fam.u_min.insert(label, u_min);
        fam.sets
            .insert(label, IndexSet::from_sorted(elems, horizon)?);
    }
    Ok(fam)
}

impl SeparatedFamily {
    /// Admissible blocks `u ≥ u_min` of a label, in increasing order, below the horizon.
    pub fn blocks(&self, label: Label) -> Vec<u32> {
        let r = self.residue[&label];
        let mut out = Vec::new();
        let mut u = self.u_min[&label];
        while ((1.0 - self.eps) * self.a.powi(u as i32)).ceil() <= self.horizon as f64 {
            if u as u64 % self.modulus == r {
                out.push(u);
            }
            u += 1;
        }
        out
    }

    /// Labels whose set is empty on the horizon.
    pub fn empty_labels(&self) -> Vec<Label> {
        self.sets
            .iter()
            .filter(|(_, s)| s.is_empty())
            .map(|(&l, _)| l)
            .collect()
    }

    /// Checks the separation properties on the merged, sorted elements.
    ///
    /// Comparing neighbours suffices: gaps add up along the sorted list, and the
    /// ratio condition propagates through any intermediate element.
    pub fn check_separation(&self) -> Result<()> {
        let mut all: Vec<(u64, Label)> = Vec::new();
        for (&l, s) in &self.sets {
            if let Some(first) = s.iter().next() {
                if first < self.n[&l] {
                    return Err(Error::Validation(format!(
                        "min E{l:?} = {first} is below N = {}",
                        self.n[&l]
                    )));
                }
            }
            all.extend(s.iter().map(|x| (x, l)));
        }
        all.sort_unstable();
        for w in all.windows(2) {
            let ((m, lm), (n, ln)) = (w[0], w[1]);
            if n == m {
                return Err(Error::Validation(format!(
                    "{n} belongs to both {lm:?} and {ln:?}"
                )));
            }
            let need = self.n[&lm].max(self.n[&ln]);
            if n - m < need {
                return Err(Error::Validation(format!("gap {m} -> {n} is below {need}")));
            }
            if lm != ln && (n as f64) < self.k * m as f64 {
                return Err(Error::Validation(format!(
                    "{n} in {ln:?} is below K * {m} ({lm:?})"
                )));
            }
        }
        Ok(())
    }

    /// The lower-density floor `ε / (N a^M + 1)` of a label.
    pub fn density_floor(&self, label: Label) -> f64 {
        self.eps / (self.n[&label] as f64 * self.a.powi(self.modulus as i32) + 1.0)
    }

    pub const CSV_HEADER: &'static str = "p,i,N,u_min,count";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for &l in &self.labels {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                l.0,
                l.1,
                self.n[&l],
                self.u_min[&l],
                self.sets[&l].len()
            );
        }
        s
    }
}

// ---------------------------------------------------------------------------
// The common vector
// ---------------------------------------------------------------------------

/// The truncated vector `x` and a bound on the norm of what was left out.
#[derive(Debug, Clone)]
pub struct AssembledVector {
    pub x: LogSparseVec,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Sums `λ_i^{-n} F_w^n y_p` over `n ∈ E_p(i)` with `n + max supp y_p ≤ support_cap`.
pub fn assemble_common_vector(
    family: &SeparatedFamily,
    m: &Multiples,
    targets: &[SparseVec],
    support_cap: u64,
    budget: EpsilonBudget,
) -> Result<AssembledVector> {
    let mut x = LogSparseVec::new();
    let mut terms = 0usize;
    let mut tail = LogAccumulator::new();
    let mut max_q = 0;
    for &(p, i) in &family.labels {
        let y = targets
            .get(p)
            .ok_or_else(|| Error::Validation(format!("label ({p}, {i}) has no target")))?;
        let lambda = *m
            .lambdas
            .get(i)
            .ok_or_else(|| Error::Validation(format!("label ({p}, {i}) has no multiple")))?;
        max_q = max_q.max(p);
        let supp = y.max_index().unwrap_or(0);
        let ll = lambda.ln();
        for n in family.sets[&(p, i)].iter() {
            if n + supp > support_cap {
                break;
            }
            for (j, c) in y.iter() {
                let lp = if n == 0 {
                    0.0
                } else {
                    m.w.log_product(j + 1, j + n)?
                };
                x.add_log(j + n, c.signum(), c.abs().ln() - n as f64 * ll - lp);
            }
            terms += 1;
        }
        if y.is_empty() {
            continue;
        }
        let from = support_cap.saturating_sub(supp) + 1;
        let prof = TailProfile::new(&m.w, lambda, y, from + 64);
        tail.push(prof.suffix_at(from));
    }
    let tail_bound = tail.value().exp();
    if !family.labels.is_empty() {
        let allowance = (0..=max_q)
            .map(|q| budget.r(q))
            .fold(f64::INFINITY, f64::min)
            / 10.0;
        if !(tail_bound <= allowance) {
            return Err(Error::Truncation {
                bound: tail_bound,
                allowance,
            });
        }
    }
    Ok(AssembledVector {
        x,
        tail_bound,
        terms,
    })
}

/// One probe `‖(λ_j B_w)^m x − y_q‖` against `r_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRow {
    pub q: usize,
    pub j: usize,
    pub m: u64,
    pub norm: f64,
    pub r_q: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitReport {
    pub rows: Vec<HitRow>,
    /// Lower density of `E_q(j)` over `[min(E_q(j) ∩ window), window end]`; `0` if empty.
    pub densities: BTreeMap<Label, f64>,
}

impl HitReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<HitRow> {
        self.rows.iter().filter(|r| !r.pass).copied().collect()
    }

    pub const CSV_HEADER: &'static str = "q,j,m,norm,r_q,pass";

    pub fn to_csv(&self, fmt_float: impl Fn(f64) -> String) -> String {
        let mut s = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.q,
                r.j,
                r.m,
                fmt_float(r.norm),
                fmt_float(r.r_q),
                r.pass
            );
        }
        s
    }
}

/// Probes every `m ∈ E_q(j) ∩ window` for every label; labels run in parallel
/// and rows come back in label order.
pub fn verify_frequent_hits(
    x: &LogSparseVec,
    family: &SeparatedFamily,
    m: &Multiples,
    targets: &[SparseVec],
    budget: EpsilonBudget,
    window: (u64, u64),
) -> Result<HitReport> {
    let (lo, hi) = window;
    if lo > hi || hi > family.horizon {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] must lie inside [0, {}]",
            family.horizon
        )));
    }
    let constant = DensitySeq::constant(1.0)?;
    let per_label: Vec<Result<(Label, Vec<HitRow>, f64)>> = family
        .labels
        .par_iter()
        .map(|&(q, j)| {
            let y = &targets[q];
            let lambda = m.lambdas[j];
            let r_q = budget.r(q);
            let set = &family.sets[&(q, j)];
            let rows: Vec<HitRow> = set
                .iter()
                .filter(|&n| n >= lo && n <= hi)
                .map(|mm| {
                    let norm = orbit_distance(x, &m.w, lambda, mm, y);
                    HitRow {
                        q,
                        j,
                        m: mm,
                        norm,
                        r_q,
                        pass: norm < r_q,
                    }
                })
                .collect();
            let density = match set.next_from(lo.max(1)).filter(|&s| s < hi) {
                Some(start) => emp_lower_density(&constant, set, (start, hi))?,
                None => 0.0,
            };
            Ok(((q, j), rows, density))
        })
        .collect();
    let mut rows = Vec::new();
    let mut densities = BTreeMap::new();
    for r in per_label {
        let (label, mut rs, d) = r?;
        rows.append(&mut rs);
        densities.insert(label, d);
    }
    Ok(HitReport { rows, densities })
}

// ---------------------------------------------------------------------------
// Hit sets built from periods
// ---------------------------------------------------------------------------

/// Layers `A_0 = {n + k d_0 + k' p : k' ≤ αd_0/p, k ≤ αd_1/d_0 − 2}` and
/// `A_j = ∪_{1 ≤ k ≤ αd_{j+1}/d_j − 1} (A_{j−1} + k d_j)`; returns `∪_{j ≤ depth} A_j`.
///
/// `d` lists `d_{j_m}, d_{j_m+1}, …` and needs `depth + 2` entries.
pub fn build_period_hit_sets(
    n: u64,
    d: &[u64],
    period: u64,
    alpha: f64,
    depth: usize,
) -> Result<IndexSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if period == 0 {
        return Err(Error::Domain("period must be positive".into()));
    }
    if d.len() < depth + 2 {
        return Err(Error::Validation(format!(
            "need {} scales, got {}",
            depth + 2,
            d.len()
        )));
    }
    for j in 1..d.len() {
        if !(alpha * d[j] as f64 > 4.0 * d[j - 1] as f64) {
            return Err(Error::Validation(format!(
                "growth condition alpha d_{j} > 4 d_{} fails ({} vs {})",
                j - 1,
                alpha * d[j] as f64,
                4 * d[j - 1]
            )));
        }
    }
    let k_prime_max = (alpha * d[0] as f64 / period as f64).floor() as u64;
    let k_max = (alpha * d[1] as f64 / d[0] as f64 - 2.0).floor() as i64;
    let mut layer: Vec<u64> = Vec::new();
    for k in 0..=k_max.max(-1) {
        for kp in 0..=k_prime_max {
            layer.push(n + k as u64 * d[0] + kp * period);
        }
    }
    layer.sort_unstable();
    layer.dedup();
    let mut all = layer.clone();
    let check = |layer: &[u64], j: usize| -> Result<()> {
        if let Some(&mx) = layer.last() {
            if mx as f64 > alpha * d[j + 1] as f64 {
                return Err(Error::Validation(format!(
                    "max A_{j} = {mx} exceeds alpha d_{} = {}",
                    j + 1,
                    alpha * d[j + 1] as f64
                )));
            }
        }
        Ok(())
    };
    check(&layer, 0)?;
    for j in 1..=depth {
        let kmax = (alpha * d[j + 1] as f64 / d[j] as f64 - 1.0).floor() as u64;
        let mut next = Vec::with_capacity(layer.len() * kmax as usize);
        for k in 1..=kmax {
            next.extend(layer.iter().map(|&a| a + k * d[j]));
        }
        next.sort_unstable();
        next.dedup();
        check(&next, j)?;
        all.extend_from_slice(&next);
        layer = next;
    }
    let horizon = all.iter().copied().max().unwrap_or(0);
    Ok(IndexSet::from_unsorted(all, horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_values() {
        let b = EpsilonBudget::Geometric;
        assert_eq!(b.eps(0), 0.25);
        assert_eq!(b.r(0), 2.25);
        assert!((b.r(1) - 1.6484375).abs() < 1e-12);
    }

    #[test]
    fn default_a_value() {
        assert!((default_a(2.0, 0.1) - 3.3).abs() < 1e-12);
    }
}
