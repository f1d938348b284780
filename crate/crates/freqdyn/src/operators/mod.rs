//! Finitely supported vectors of `ℓ^p` and the operators acting on them.

mod ctype;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use ctype::{
    block_transition, cplus_common_verdict, ctype_apply, ctype_period, CPlusVerdict, CTypeFlavor,
    CTypeParams, GrowthWitness,
};

use crate::error::{Error, Result};
use crate::shift_analysis::WeightSeq;

/// Coefficients below this magnitude are dropped.
pub const PRUNE: f64 = 1e-300;

/// A finitely supported vector `Σ x_k e_k` in `ℓ^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    entries: BTreeMap<u64, f64>,
    p: f64,
}

impl SparseVec {
    pub fn zero(p: f64) -> Self {
        assert!(p >= 1.0, "ell^p needs p >= 1");
        Self {
            entries: BTreeMap::new(),
            p,
        }
    }

    pub fn basis(k: u64, p: f64) -> Self {
        let mut v = Self::zero(p);
        v.set(k, 1.0);
        v
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, f64)>, p: f64) -> Self {
        let mut v = Self::zero(p);
        for (k, c) in pairs {
            v.add_at(k, c);
        }
        v
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn get(&self, k: u64) -> f64 {
        self.entries.get(&k).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, k: u64, c: f64) {
        if c.abs() < PRUNE {
            self.entries.remove(&k);
        } else {
            self.entries.insert(k, c);
        }
    }

    pub fn add_at(&mut self, k: u64, c: f64) {
        let v = self.get(k) + c;
        self.set(k, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.entries.iter().map(|(&k, &c)| (k, c))
    }

    pub fn support(&self) -> Vec<u64> {
        self.entries.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_pairs(self.iter().map(|(k, c)| (k, a * c)), self.p)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &SparseVec) -> Self {
        let mut out = self.clone();
        for (k, c) in other.iter() {
            out.add_at(k, a * c);
        }
        out
    }

    pub fn norm(&self) -> f64 {
        lp_norm(self.entries.values().copied(), self.p)
    }

    pub fn distance(&self, other: &SparseVec) -> f64 {
        self.axpy(-1.0, other).norm()
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &SparseVec) -> f64 {
        let mut keys: Vec<u64> = self.support();
        keys.extend(other.support());
        keys.into_iter()
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self, fmt_float: impl Fn(f64) -> String) -> String {
        let mut s = String::from("index,coefficient\n");
        for (k, c) in self.iter() {
            let _ = writeln!(s, "{k},{}", fmt_float(c));
        }
        s
    }

    pub fn from_csv(text: &str, p: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut v = Self::zero(p);
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse_err =
                || Error::Parse(format!("row {}: expected `index,coefficient`", row + 2));
            if rec.len() != 2 {
                return Err(parse_err());
            }
            let k = rec[0].parse::<u64>().map_err(|_| parse_err())?;
            let c = rec[1].parse::<f64>().map_err(|_| parse_err())?;
            v.add_at(k, c);
        }
        Ok(v)
    }
}

/// `(Σ |x|^p)^{1/p}`, scaled by the largest entry to avoid overflow.
pub fn lp_norm(values: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    let m = values.clone().fold(0.0_f64, |a, x| a.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    let s: f64 = values.map(|x| (x.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// A finitely supported vector with coefficients stored as `(sign, ln|c|)`, for
/// coefficients such as `λ^{-n}` that leave the `f64` range.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LogSparseVec {
    entries: BTreeMap<u64, (f64, f64)>,
}

impl LogSparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `sign·e^{log_abs}` at `k`.
    pub fn add_log(&mut self, k: u64, sign: f64, log_abs: f64) {
        if sign == 0.0 || log_abs == f64::NEG_INFINITY {
            return;
        }
        let s = sign.signum();
        match self.entries.get(&k).copied() {
            None => {
                self.entries.insert(k, (s, log_abs));
            }
            Some((s0, l0)) => {
                let (hi_s, hi, lo_s, lo) = if l0 >= log_abs {
                    (s0, l0, s, log_abs)
                } else {
                    (s, log_abs, s0, l0)
                };
                let r = (lo - hi).exp();
                let mag = if hi_s == lo_s { 1.0 + r } else { 1.0 - r };
                if mag <= 0.0 {
                    self.entries.remove(&k);
                } else {
                    self.entries.insert(k, (hi_s, hi + mag.ln()));
                }
            }
        }
    }

    pub fn remove(&mut self, k: u64) -> Option<(f64, f64)> {
        self.entries.remove(&k)
    }

    pub fn get(&self, k: u64) -> Option<(f64, f64)> {
        self.entries.get(&k).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64, f64)> + '_ {
        self.entries.iter().map(|(&k, &(s, l))| (k, s, l))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries representable in `f64` (tiny ones are pruned).
    pub fn to_sparse(&self, p: f64) -> SparseVec {
        SparseVec::from_pairs(self.iter().map(|(k, s, l)| (k, s * l.exp())), p)
    }

    pub fn from_sparse(x: &SparseVec) -> Self {
        let mut v = Self::new();
        for (k, c) in x.iter() {
            v.add_log(k, c.signum(), c.abs().ln());
        }
        v
    }

    /// `ln ‖x‖_p`.
    pub fn log_norm(&self, p: f64) -> f64 {
        let m = self
            .entries
            .values()
            .map(|&(_, l)| l)
            .fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        let s: f64 = self
            .entries
            .values()
            .map(|&(_, l)| (p * (l - m)).exp())
            .sum();
        m + s.ln() / p
    }
}

/// `B_w x = Σ_{k≥0} w_{k+1} x_{k+1} e_k`.
pub fn apply_backward(w: &WeightSeq, x: &SparseVec) -> SparseVec {
    SparseVec::from_pairs(
        x.iter()
            .filter(|&(k, _)| k >= 1)
            .map(|(k, c)| (k - 1, w.w(k) * c)),
        x.p(),
    )
}

/// `F_w x = Σ_{k≥0} x_k / w_{k+1} e_{k+1}`, a right inverse of `B_w`.
pub fn apply_forward(w: &WeightSeq, x: &SparseVec) -> SparseVec {
    SparseVec::from_pairs(x.iter().map(|(k, c)| (k + 1, c / w.w(k + 1))), x.p())
}

/// `B_{w_num}^m F_{w_den}^l e_k` as `(ln|coefficient|, index)`; `None` when `m > k + l`.
pub fn shift_word_log2(
    w_num: &WeightSeq,
    w_den: &WeightSeq,
    m: u64,
    l: u64,
    k: u64,
) -> Option<(f64, u64)> {
    let top = k.checked_add(l).expect("index overflow");
    if m > top {
        return None;
    }
    let num = if m == 0 {
        0.0
    } else {
        w_num.log_product(top - m + 1, top).expect("valid range")
    };
    let den = if l == 0 {
        0.0
    } else {
        w_den.log_product(k + 1, top).expect("valid range")
    };
    Some((num - den, top - m))
}

pub fn shift_word_log(w: &WeightSeq, m: u64, l: u64, k: u64) -> Option<(f64, u64)> {
    shift_word_log2(w, w, m, l, k)
}

/// `B_w^m F_w^l e_k = (w_{k+l-m+1}⋯w_{k+l}) / (w_{k+1}⋯w_{k+l}) e_{k+l-m}`.
pub fn shift_word(w: &WeightSeq, m: u64, l: u64, k: u64) -> Option<(f64, u64)> {
    shift_word_log(w, m, l, k).map(|(lc, i)| (lc.exp(), i))
}

pub fn shift_word2(
    w_num: &WeightSeq,
    w_den: &WeightSeq,
    m: u64,
    l: u64,
    k: u64,
) -> Option<(f64, u64)> {
    shift_word_log2(w_num, w_den, m, l, k).map(|(lc, i)| (lc.exp(), i))
}

/// `‖(λB_w)^m x − center‖_p`, evaluated term by term in log-domain.
pub fn orbit_distance(
    x: &LogSparseVec,
    w: &WeightSeq,
    lambda: f64,
    m: u64,
    center: &SparseVec,
) -> f64 {
    let p = center.p();
    let lead = m as f64 * lambda.ln();
    let mut image = LogSparseVec::new();
    for (t, s, l) in x.iter().filter(|&(t, _, _)| t >= m) {
        let lp = if m == 0 {
            0.0
        } else {
            w.log_product(t - m + 1, t).expect("valid range")
        };
        image.add_log(t - m, s, l + lead + lp);
    }
    for (k, c) in center.iter() {
        image.add_log(k, -c.signum(), c.abs().ln());
    }
    image.log_norm(p).exp()
}
