//! Operators of C-type `T_{v,w,φ,b}` and the `C₊` / `C₊,₁` subclasses.
//!
//! The block `[b_n, b_{n+1})` is walked forward by the weights `w`; its last basis
//! vector is sent to `v_n e_{b_{φ(n)}} − (Π_{b_n<j<b_{n+1}} w_j)^{-1} e_{b_n}`.
//! For the structured flavors, block `n ≥ 1` sits at level `k = ⌊log₂ n⌋ + 1`
//! and `φ(n) = n − 2^{k−1}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::SparseVec;
use crate::error::{Error, Result};
use crate::logspace::LogAccumulator;

type PhiFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;
type RealFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CTypeFlavor {
    General,
    CPlus,
    CPlusOne,
}

#[derive(Clone)]
enum Rule {
    General {
        phi: PhiFn,
        v: RealFn,
        w: RealFn,
    },
    /// Tables indexed by level `k − 1`; `w[k-1][i-1] = w_i^{(k)}`.
    CPlus {
        big_delta: Vec<u64>,
        v: Vec<f64>,
        w: Vec<Vec<f64>>,
        block0_w: Vec<f64>,
    },
    /// `v^{(k)} = 2^{-τ^{(k)}}`, `w_i^{(k)} = 2` for `i ≤ δ^{(k)}`, else `1`.
    CPlusOne {
        big_delta: Vec<u64>,
        tau: Vec<u64>,
        delta: Vec<u64>,
        block0_w: Vec<f64>,
    },
}

/// Parameters `(v, w, φ, b)` with `b` materialized through a finite number of blocks.
#[derive(Clone)]
pub struct CTypeParams {
    rule: Rule,
    b: Arc<Vec<u64>>,
}

impl fmt::Debug for CTypeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CTypeParams")
            .field("flavor", &self.flavor())
            .field("blocks", &self.num_blocks())
            .field("end", &self.end())
            .finish()
    }
}

/// Level of block `n`: `0` for `n = 0`, else `⌊log₂ n⌋ + 1`.
pub fn level_of(n: u64) -> u32 {
    if n == 0 {
        0
    } else {
        64 - n.leading_zeros()
    }
}

fn structured_b(b1: u64, big_delta: &[u64]) -> Result<Vec<u64>> {
    let levels = big_delta.len() as u32;
    if levels == 0 || levels > 20 {
        return Err(Error::Validation(format!(
            "need between 1 and 20 levels, got {levels}"
        )));
    }
    let blocks = 1u64 << levels;
    let mut b = Vec::with_capacity(blocks as usize + 1);
    b.push(0);
    b.push(b1);
    for n in 1..blocks {
        let len = big_delta[level_of(n) as usize - 1];
        let next = b[n as usize]
            .checked_add(len)
            .ok_or_else(|| Error::Overflow("block boundaries exceed 64 bits".into()))?;
        b.push(next);
    }
    Ok(b)
}

impl CTypeParams {
    /// `C₊,₁` parameters for levels `1..=τ.len()`, with block 0 of length `b1`
    /// carrying unit weights.
    pub fn cplus_one(tau: Vec<u64>, delta: Vec<u64>, big_delta: Vec<u64>, b1: u64) -> Result<Self> {
        if tau.len() != delta.len() || tau.len() != big_delta.len() {
            return Err(Error::Validation(
                "tau, delta and Delta tables differ in length".into(),
            ));
        }
        let b = structured_b(b1, &big_delta)?;
        let block0_w = vec![1.0; b1.saturating_sub(1) as usize];
        Ok(Self {
            rule: Rule::CPlusOne {
                big_delta,
                tau,
                delta,
                block0_w,
            },
            b: Arc::new(b),
        })
    }

    /// `C₊` parameters from per-level tables; `w[k-1]` has length `Δ^{(k)} − 1`.
    pub fn cplus(v: Vec<f64>, w: Vec<Vec<f64>>, big_delta: Vec<u64>, b1: u64) -> Result<Self> {
        if v.len() != w.len() || v.len() != big_delta.len() {
            return Err(Error::Validation(
                "v, w and Delta tables differ in length".into(),
            ));
        }
        let b = structured_b(b1, &big_delta)?;
        let block0_w = vec![1.0; b1.saturating_sub(1) as usize];
        Ok(Self {
            rule: Rule::CPlus {
                big_delta,
                v,
                w,
                block0_w,
            },
            b: Arc::new(b),
        })
    }

    /// The reference `C₊,₁` instance: `Δ^{(k)} = 4^k`, `δ^{(k)} = Δ^{(k)}/2`,
    /// `τ^{(k)} = Δ^{(k)}/4`, `b_1 = 2`.
    pub fn reference(levels: u32) -> Self {
        let big: Vec<u64> = (1..=levels).map(|k| 4u64.pow(k)).collect();
        let delta = big.iter().map(|d| d / 2).collect();
        let tau = big.iter().map(|d| d / 4).collect();
        Self::cplus_one(tau, delta, big, 2).expect("reference instance is well formed")
    }

    pub fn general(
        b: Vec<u64>,
        phi: impl Fn(u64) -> u64 + Send + Sync + 'static,
        v: impl Fn(u64) -> f64 + Send + Sync + 'static,
        w: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::Validation("b needs at least b_0 and b_1".into()));
        }
        Ok(Self {
            rule: Rule::General {
                phi: Arc::new(phi),
                v: Arc::new(v),
                w: Arc::new(w),
            },
            b: Arc::new(b),
        })
    }

    pub fn flavor(&self) -> CTypeFlavor {
        match self.rule {
            Rule::General { .. } => CTypeFlavor::General,
            Rule::CPlus { .. } => CTypeFlavor::CPlus,
            Rule::CPlusOne { .. } => CTypeFlavor::CPlusOne,
        }
    }

    /// Number of materialized blocks.
    pub fn num_blocks(&self) -> u64 {
        self.b.len() as u64 - 1
    }

    /// Number of structured levels (0 for the general flavor).
    pub fn levels(&self) -> u32 {
        match &self.rule {
            Rule::General { .. } => 0,
            Rule::CPlus { big_delta, .. } | Rule::CPlusOne { big_delta, .. } => {
                big_delta.len() as u32
            }
        }
    }

    pub fn b(&self, n: u64) -> u64 {
        self.b[n as usize]
    }

    pub fn b_table(&self) -> &[u64] {
        &self.b
    }

    /// First index outside the materialized blocks.
    pub fn end(&self) -> u64 {
        *self.b.last().unwrap()
    }

    pub fn block_of(&self, k: u64) -> Option<u64> {
        if k >= self.end() {
            return None;
        }
        Some(self.b.partition_point(|&x| x <= k) as u64 - 1)
    }

    pub fn block_len(&self, n: u64) -> u64 {
        self.b(n + 1) - self.b(n)
    }

    pub fn phi(&self, n: u64) -> u64 {
        match &self.rule {
            Rule::General { phi, .. } => phi(n),
            _ if n == 0 => 0,
            _ => n - (1 << (level_of(n) - 1)),
        }
    }

    pub fn v(&self, n: u64) -> f64 {
        match &self.rule {
            Rule::General { v, .. } => v(n),
            Rule::CPlus { v, .. } => v[level_of(n) as usize - 1],
            Rule::CPlusOne { tau, .. } => 2f64.powi(-(tau[level_of(n) as usize - 1] as i32)),
        }
    }

    fn log_abs_v(&self, n: u64) -> f64 {
        match &self.rule {
            Rule::CPlusOne { tau, .. } => {
                -(tau[level_of(n) as usize - 1] as f64) * std::f64::consts::LN_2
            }
            _ => self.v(n).abs().ln(),
        }
    }

    /// `w_j`. Indices that are block starts carry no weight and return 1.
    pub fn w(&self, j: u64) -> f64 {
        if let Rule::General { w, .. } = &self.rule {
            return w(j);
        }
        let n = self.block_of(j).unwrap_or(self.num_blocks() - 1);
        let i = j - self.b(n);
        if i == 0 {
            return 1.0;
        }
        match &self.rule {
            Rule::CPlus { w, block0_w, .. } if n == 0 => {
                block0_w.get(i as usize - 1).copied().unwrap_or(1.0)
            }
            Rule::CPlusOne { block0_w, .. } if n == 0 => {
                block0_w.get(i as usize - 1).copied().unwrap_or(1.0)
            }
            Rule::CPlus { w, .. } => w[level_of(n) as usize - 1][i as usize - 1],
            Rule::CPlusOne { delta, .. } => {
                if i <= delta[level_of(n) as usize - 1] {
                    2.0
                } else {
                    1.0
                }
            }
            Rule::General { .. } => unreachable!(),
        }
    }

    /// `Δ^{(k)}` for the structured flavors.
    pub fn big_delta(&self, k: u32) -> Option<u64> {
        match &self.rule {
            Rule::CPlus { big_delta, .. } | Rule::CPlusOne { big_delta, .. } => {
                big_delta.get(k as usize - 1).copied()
            }
            Rule::General { .. } => None,
        }
    }

    /// `(τ^{(k)}, δ^{(k)})` for the `C₊,₁` flavor.
    pub fn tau_delta(&self, k: u32) -> Option<(u64, u64)> {
        match &self.rule {
            Rule::CPlusOne { tau, delta, .. } => {
                Some((*tau.get(k as usize - 1)?, *delta.get(k as usize - 1)?))
            }
            _ => None,
        }
    }

    /// `w_i^{(k)}` for `1 ≤ i < Δ^{(k)}`.
    pub fn level_weight(&self, k: u32, i: u64) -> Option<f64> {
        match &self.rule {
            Rule::CPlus { w, .. } => w.get(k as usize - 1)?.get(i as usize - 1).copied(),
            Rule::CPlusOne { delta, .. } => Some(if i <= *delta.get(k as usize - 1)? {
                2.0
            } else {
                1.0
            }),
            Rule::General { .. } => None,
        }
    }

    /// `(sign, ln|Π_{b_n<j<b_{n+1}} w_j|)`.
    fn block_product(&self, n: u64) -> (f64, f64) {
        if let Rule::CPlusOne { delta, .. } = &self.rule {
            if n >= 1 {
                return (
                    1.0,
                    delta[level_of(n) as usize - 1] as f64 * std::f64::consts::LN_2,
                );
            }
        }
        let mut sign = 1.0;
        let mut log = 0.0;
        for j in self.b(n) + 1..self.b(n + 1) {
            let w = self.w(j);
            sign *= w.signum();
            log += w.abs().ln();
        }
        (sign, log)
    }

    /// Checks the C-type hypotheses on every materialized block.
    pub fn validate(&self) -> Result<()> {
        let b = &self.b;
        let nb = self.num_blocks();
        if b[0] != 0 {
            return Err(Error::Validation(format!("b_0 must be 0, got {}", b[0])));
        }
        if let Some(i) = b.windows(2).position(|p| p[0] >= p[1]) {
            return Err(Error::Validation(format!("b is not increasing at n = {i}")));
        }
        if b[1] < 2 {
            return Err(Error::Validation("b_1 must be at least 2".into()));
        }
        if self.phi(0) != 0 {
            return Err(Error::Validation("phi(0) must be 0".into()));
        }
        for n in 1..nb {
            let f = self.phi(n);
            if f >= n {
                return Err(Error::Validation(format!(
                    "phi({n}) = {f} is not below {n}"
                )));
            }
            let need = 2 * self.block_len(f);
            if !self.block_len(n).is_multiple_of(need) {
                return Err(Error::Validation(format!(
                    "b_{} - b_{n} = {} is not a multiple of 2(b_{} - b_{f}) = {need}",
                    n + 1,
                    self.block_len(n),
                    f + 1
                )));
            }
        }
        for n in 1..nb {
            let lv = self.log_abs_v(n);
            if !lv.is_finite() {
                return Err(Error::Validation(format!(
                    "v_{n} must be a non-zero finite real"
                )));
            }
        }
        if nb >= 4 {
            let mut head = LogAccumulator::new();
            let mut tail = LogAccumulator::new();
            for n in 1..nb {
                if n < nb / 2 {
                    head.push(self.log_abs_v(n));
                } else {
                    tail.push(self.log_abs_v(n));
                }
            }
            if tail.value() > head.value() - std::f64::consts::LN_2 {
                return Err(Error::Validation(
                    "sum of |v_n| shows no decaying tail".into(),
                ));
            }
        }
        self.validate_weights()?;
        for n in 0..nb {
            let (_, l) = self.block_product(n);
            if !l.is_finite() {
                return Err(Error::Validation(format!(
                    "block product of block {n} vanishes"
                )));
            }
        }
        match &self.rule {
            Rule::CPlusOne {
                tau,
                delta,
                big_delta,
                ..
            } => {
                if tau.windows(2).any(|p| p[0] >= p[1]) || delta.windows(2).any(|p| p[0] >= p[1]) {
                    return Err(Error::Validation(
                        "tau and delta must be strictly increasing".into(),
                    ));
                }
                if let Some(k) = (0..delta.len()).find(|&k| delta[k] >= big_delta[k]) {
                    return Err(Error::Validation(format!(
                        "delta^({}) must be below Delta^({})",
                        k + 1,
                        k + 1
                    )));
                }
            }
            Rule::CPlus { w, big_delta, .. } => {
                if let Some(k) = (0..w.len()).find(|&k| w[k].len() as u64 + 1 != big_delta[k]) {
                    return Err(Error::Validation(format!(
                        "w^({}) must have Delta^({}) - 1 entries",
                        k + 1,
                        k + 1
                    )));
                }
            }
            Rule::General { .. } => {}
        }
        Ok(())
    }

    fn validate_weights(&self) -> Result<()> {
        let check = |x: f64, what: &str| -> Result<()> {
            if x != 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{what} must be a non-zero finite real, got {x}"
                )))
            }
        };
        match &self.rule {
            Rule::General { w, .. } => {
                for j in 1..self.end() {
                    check(w(j), &format!("w_{j}"))?;
                }
            }
            Rule::CPlus { w, block0_w, v, .. } => {
                for (k, row) in w.iter().enumerate() {
                    for (i, &x) in row.iter().enumerate() {
                        check(x, &format!("w_{}^({})", i + 1, k + 1))?;
                    }
                    check(v[k], &format!("v^({})", k + 1))?;
                }
                for &x in block0_w {
                    check(x, "block-0 weight")?;
                }
            }
            Rule::CPlusOne { .. } => {}
        }
        Ok(())
    }

    fn generators(&self) -> (PhiFn, RealFn, RealFn) {
        if let Rule::General { phi, v, w } = &self.rule {
            return (phi.clone(), v.clone(), w.clone());
        }
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        (
            Arc::new(move |n| a.phi(n)),
            Arc::new(move |n| b.v(n)),
            Arc::new(move |j| c.w(j)),
        )
    }

    /// Same data with `φ` replaced (general flavor).
    pub fn with_phi(&self, phi: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        let (_, v, w) = self.generators();
        Self {
            rule: Rule::General {
                phi: Arc::new(phi),
                v,
                w,
            },
            b: self.b.clone(),
        }
    }

    /// Same data with `v` replaced (general flavor).
    pub fn with_v(&self, v: impl Fn(u64) -> f64 + Send + Sync + 'static) -> Self {
        let (phi, _, w) = self.generators();
        Self {
            rule: Rule::General {
                phi,
                v: Arc::new(v),
                w,
            },
            b: self.b.clone(),
        }
    }

    /// Same `φ, v` and index-wise `w`, with the block boundaries replaced.
    pub fn with_b(&self, b: Vec<u64>) -> Self {
        let (phi, v, w) = self.generators();
        Self {
            rule: Rule::General { phi, v, w },
            b: Arc::new(b),
        }
    }

    /// Reads `key = value` lines. Keys: `flavor` (`cplus1` or `cplus`),
    /// `b_horizon` (number of levels), `b1` (default 2), and per level `k`:
    /// `sigma_delta[k]` (block size `Δ^{(k)}`), `delta[k]`, `tau[k]` for `cplus1`,
    /// or `v[k]` and `w[k]` (comma list) for `cplus`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", i + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |key: &str| -> Result<&String> {
            kv.get(key)
                .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
        };
        let int = |key: &str| -> Result<u64> {
            get(key)?
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("`{key}` must be a non-negative integer")))
        };
        let levels = int("b_horizon")? as u32;
        let b1 = if kv.contains_key("b1") { int("b1")? } else { 2 };
        let big: Vec<u64> = (1..=levels)
            .map(|k| int(&format!("sigma_delta[{k}]")))
            .collect::<Result<_>>()?;
        match get("flavor")?.as_str() {
            "cplus1" => {
                let delta = (1..=levels)
                    .map(|k| int(&format!("delta[{k}]")))
                    .collect::<Result<_>>()?;
                let tau = (1..=levels)
                    .map(|k| int(&format!("tau[{k}]")))
                    .collect::<Result<_>>()?;
                Self::cplus_one(tau, delta, big, b1)
            }
            "cplus" => {
                let real = |s: &str, key: &str| -> Result<f64> {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("`{key}` must hold reals")))
                };
                let mut v = Vec::new();
                let mut w = Vec::new();
                for k in 1..=levels {
                    let vk = format!("v[{k}]");
                    v.push(real(get(&vk)?, &vk)?);
                    let wk = format!("w[{k}]");
                    w.push(
                        get(&wk)?
                            .split(',')
                            .map(|s| real(s, &wk))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                Self::cplus(v, w, big, b1)
            }
            other => Err(Error::Parse(format!("unknown flavor `{other}`"))),
        }
    }

    /// Configuration text of a `C₊,₁` instance, readable by [`Self::from_config_str`].
    pub fn to_config_string(&self) -> Option<String> {
        let Rule::CPlusOne {
            tau,
            delta,
            big_delta,
            ..
        } = &self.rule
        else {
            return None;
        };
        let mut s = format!(
            "flavor = cplus1\nb_horizon = {}\nb1 = {}\n",
            tau.len(),
            self.b(1)
        );
        for k in 0..tau.len() {
            s.push_str(&format!(
                "sigma_delta[{0}] = {1}\ndelta[{0}] = {2}\ntau[{0}] = {3}\n",
                k + 1,
                big_delta[k],
                delta[k],
                tau[k]
            ));
        }
        Some(s)
    }

    /// `T e_k` as a list of `(index, coefficient)`.
    fn step_basis(&self, k: u64) -> Result<Vec<(u64, f64)>> {
        let n = self.block_of(k).ok_or_else(|| {
            Error::Horizon(format!(
                "index {k} lies beyond the materialized blocks (end {})",
                self.end()
            ))
        })?;
        let last = self.b(n + 1) - 1;
        if k < last {
            return Ok(vec![(k + 1, self.w(k + 1))]);
        }
        let (sign, log) = self.block_product(n);
        let inv = -sign * (-log).exp();
        if n == 0 {
            return Ok(vec![(0, inv)]);
        }
        let v = match &self.rule {
            Rule::CPlusOne { tau, .. } => {
                let e = tau[level_of(n) as usize - 1];
                if e > 1074 {
                    return Err(Error::Overflow(format!(
                        "v_{n} = 2^-{e} is not representable"
                    )));
                }
                2f64.powi(-(e as i32))
            }
            _ => self.v(n),
        };
        if inv == 0.0 || !inv.is_finite() {
            return Err(Error::Overflow(format!(
                "inverse block product of block {n} is not representable"
            )));
        }
        if self.phi(n) >= n {
            return Err(Error::Validation(format!(
                "phi({n}) = {} is not below {n}",
                self.phi(n)
            )));
        }
        Ok(vec![(self.b(self.phi(n)), v), (self.b(n), inv)])
    }
}

/// `T^times x`.
pub fn ctype_apply(params: &CTypeParams, x: &SparseVec, times: u64) -> Result<SparseVec> {
    let mut cur = x.clone();
    for _ in 0..times {
        let mut next = SparseVec::zero(x.p());
        for (k, c) in cur.iter() {
            for (j, a) in params.step_basis(k)? {
                let t = c * a;
                if !t.is_finite() {
                    return Err(Error::Overflow(format!(
                        "coefficient at e_{j} is not finite"
                    )));
                }
                next.add_at(j, t);
            }
        }
        cur = next;
    }
    Ok(cur)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `lcm` of `2(b_{n+1} − b_n)` over the blocks meeting the support of `x`.
pub fn ctype_period(params: &CTypeParams, x: &SparseVec) -> Result<u64> {
    let mut l = 1u64;
    for k in x.support() {
        let n = params.block_of(k).ok_or_else(|| {
            Error::Horizon(format!("index {k} lies beyond the materialized blocks"))
        })?;
        let p = 2 * params.block_len(n);
        l = (l / gcd(l, p))
            .checked_mul(p)
            .ok_or_else(|| Error::Overflow("period exceeds 64 bits".into()))?;
    }
    Ok(l)
}

/// Closed form of `T^m e_{b_{2^{k−1}+l+1} − m}` for structured parameters.
/// Empty products equal 1.
pub fn block_transition(params: &CTypeParams, k: u32, l: u64, m: u64, p: f64) -> Result<SparseVec> {
    if params.flavor() == CTypeFlavor::General {
        return Err(Error::Domain(
            "closed form needs a C+ or C+,1 flavor".into(),
        ));
    }
    if k == 0 || k > params.levels() {
        return Err(Error::Domain(format!(
            "level {k} outside 1..={}",
            params.levels()
        )));
    }
    let big = params.big_delta(k).unwrap();
    let half = 1u64 << (k - 1);
    if l >= half {
        return Err(Error::Domain(format!(
            "l = {l} must be below 2^(k-1) = {half}"
        )));
    }
    if m == 0 || m > big {
        return Err(Error::Domain(format!("m = {m} must lie in 1..={big}")));
    }
    let n = half + l;
    let v = params.v(n);
    let (c1, c2) = match params.tau_delta(k) {
        Some((tau, delta)) => {
            // Exponents of 2 are exact integers.
            let e1 = -(tau as i64) + (delta as i64 - big as i64 + m as i64).max(0);
            let e2 = -((delta).min(big - m) as i64);
            (2f64.powi(e1 as i32), -(2f64.powi(e2 as i32)))
        }
        None => {
            let prod = |lo: u64, hi: u64| -> f64 {
                (lo..=hi)
                    .map(|i| params.level_weight(k, i).unwrap())
                    .product()
            };
            let upper = if m >= 2 {
                prod(big - m + 1, big - 1)
            } else {
                1.0
            };
            let lower = if big > m { prod(1, big - m) } else { 1.0 };
            (v * upper, -1.0 / lower)
        }
    };
    let mut out = SparseVec::zero(p);
    out.add_at(params.b(l), c1);
    out.add_at(params.b(n), c2);
    Ok(out)
}

/// A level `k ≥ k0` at which `|v^{(k)}| Π_{i=n+1}^{Δ^{(k)}-1} |w_i^{(k)}| > C` for all `n ≤ αΔ^{(k)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthWitness {
    pub s: usize,
    pub c: f64,
    pub k0: u32,
    pub k: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CPlusVerdict {
    HypothesesHold {
        /// `inf_t max_{k ∈ [⌈k_max/2⌉, k_max]} (δ^{(k)}(t) − τ^{(k)}(t)) / Δ^{(k)}`.
        ratio: f64,
        witnesses: Vec<GrowthWitness>,
        /// `(s, t, log₂ K_{s,t})` on the materialized blocks; informational only.
        block_log2_bounds: Vec<(usize, usize, i64)>,
    },
    Fail(String),
}

/// Constants `C` and starting levels `k0` probed for the witness grid.
pub const WITNESS_CONSTANTS: [f64; 3] = [10.0, 1e3, 1e6];
pub const WITNESS_START_LEVELS: [u32; 3] = [1, 2, 4];

fn exceeds(e: i64, c: f64) -> bool {
    if e <= 0 {
        return 1.0 > c;
    }
    if e >= 120 {
        return true;
    }
    (1u128 << e) as f64 > c
}

/// Checks the hypotheses of the common-vector criterion for a family of `C₊,₁`
/// operators sharing `b`, using levels up to `k_max`.
pub fn cplus_common_verdict(
    family: &[CTypeParams],
    alpha_frac: f64,
    k_max: u32,
) -> Result<CPlusVerdict> {
    if family.is_empty() {
        return Err(Error::Validation("family is empty".into()));
    }
    if !(alpha_frac > 0.0 && alpha_frac < 1.0) {
        return Err(Error::Domain(format!(
            "alpha must lie in (0, 1), got {alpha_frac}"
        )));
    }
    for (s, t) in family.iter().enumerate() {
        if t.flavor() != CTypeFlavor::CPlusOne {
            return Err(Error::Validation(format!(
                "member {s} is not of C+,1 flavor"
            )));
        }
        if t.b_table() != family[0].b_table() {
            return Err(Error::Validation(format!(
                "member {s} does not share b with member 0"
            )));
        }
    }
    if k_max == 0 || k_max > family[0].levels() {
        return Err(Error::Domain(format!(
            "k_max must lie in 1..={}",
            family[0].levels()
        )));
    }
    let k_lo = k_max.div_ceil(2).max(1);
    let mut ratio = f64::INFINITY;
    for t in family {
        let best = (k_lo..=k_max)
            .map(|k| {
                let (tau, delta) = t.tau_delta(k).unwrap();
                (delta as f64 - tau as f64) / t.big_delta(k).unwrap() as f64
            })
            .fold(f64::NEG_INFINITY, f64::max);
        ratio = ratio.min(best);
    }
    if ratio < 2.0 * alpha_frac {
        return Ok(CPlusVerdict::Fail(format!(
            "inf_t max_k (delta - tau)/Delta = {ratio} is below 2 alpha = {}",
            2.0 * alpha_frac
        )));
    }
    let mut witnesses = Vec::new();
    for (s, t) in family.iter().enumerate() {
        for &c in &WITNESS_CONSTANTS {
            for &k0 in WITNESS_START_LEVELS.iter().filter(|&&k0| k0 <= k_max) {
                let found = (k0..=k_max).find(|&k| {
                    let big = t.big_delta(k).unwrap();
                    let (tau, delta) = t.tau_delta(k).unwrap();
                    let n_max = (alpha_frac * big as f64).floor() as i64;
                    let e = -(tau as i64) + (delta as i64 - n_max).max(0);
                    exceeds(e, c)
                });
                match found {
                    Some(k) => witnesses.push(GrowthWitness { s, c, k0, k }),
                    None => {
                        return Ok(CPlusVerdict::Fail(format!(
                            "member {s}: no level in {k0}..={k_max} beats C = {c}"
                        )))
                    }
                }
            }
        }
    }
    let mut bounds = Vec::new();
    for s in 0..family.len() {
        for t in 0..family.len() {
            // Maximal subarray of per-block exponent differences.
            let (mut best, mut cur) = (0i64, 0i64);
            for n in 1..family[0].num_blocks() {
                let k = level_of(n);
                let d = family[t].tau_delta(k).unwrap().1 as i64
                    - family[s].tau_delta(k).unwrap().1 as i64;
                cur = (cur + d).max(0);
                best = best.max(cur);
            }
            bounds.push((s, t, best));
        }
    }
    Ok(CPlusVerdict::HypothesesHold {
        ratio,
        witnesses,
        block_log2_bounds: bounds,
    })
}
