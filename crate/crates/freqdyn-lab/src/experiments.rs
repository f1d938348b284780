//! Orbit return sets, the two-multiple ratio diagnostic and the density-gap demo.

use freqdyn::densities::{
    density_ratios, emp_lower_density, emp_upper_density, DensitySeq, IndexSet,
};
use freqdyn::operators::{orbit_distance, LogSparseVec, SparseVec};
use freqdyn::shift_analysis::WeightSeq;
use freqdyn::{Error, Result};

use crate::output::{fmt_g12, Table};

/// `{m ≤ horizon : ‖(λB_w)^m x − center‖_p < radius}`.
pub fn return_set(
    x: &LogSparseVec,
    w: &WeightSeq,
    lambda: f64,
    center: &SparseVec,
    radius: f64,
    horizon: u64,
) -> Result<IndexSet> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let top = x.iter().map(|(k, _, _)| k).max();
    let dead = center.norm() < radius;
    let mut hits = Vec::new();
    for m in 0..=horizon {
        if top.is_none_or(|t| m > t) {
            // the orbit has left the support: only the center remains
            if dead {
                hits.extend(m..=horizon);
            }
            break;
        }
        if orbit_distance(x, w, lambda, m, center) < radius {
            hits.push(m);
        }
    }
    IndexSet::from_sorted(hits, horizon)
}

/// One row of the ratio diagnostic; `-1` marks a missing value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRow {
    pub k: usize,
    pub n_k: i64,
    pub m_k: i64,
    pub ratio: f64,
}

/// With `N₀ = {n : ‖λ₀ⁿBⁿx‖ < radius}` and `N_k = {m : ‖λ_k^mB^mx − e₀‖ < radius/2}`,
/// takes the increasing choice `m_k = min{m ∈ N_k : m > m_{k−1}}` and
/// `n_k = max{n ∈ N₀ : n < m_k}`.
pub fn ratio_witness(
    x: &LogSparseVec,
    w: &WeightSeq,
    lambda0: f64,
    lambda_seq: &[f64],
    radius: f64,
    horizon: u64,
    p: f64,
) -> Result<Vec<RatioRow>> {
    if lambda_seq.windows(2).any(|v| !(v[1] < v[0])) {
        return Err(Error::Validation(
            "lambda_seq must be strictly decreasing".into(),
        ));
    }
    if lambda_seq.first().is_some_and(|&l| !(l < lambda0)) {
        return Err(Error::Validation(
            "lambda_seq must lie below lambda0".into(),
        ));
    }
    if lambda_seq.last().is_some_and(|&l| !(l > 0.0)) {
        return Err(Error::Validation("lambda_seq must be positive".into()));
    }
    let zero = SparseVec::zero(p);
    let e0 = SparseVec::basis(0, p);
    let n0 = return_set(x, w, lambda0, &zero, radius, horizon)?;
    let mut rows = Vec::with_capacity(lambda_seq.len());
    let mut last: i64 = -1;
    for (idx, &lk) in lambda_seq.iter().enumerate() {
        let nk_set = return_set(x, w, lk, &e0, radius / 2.0, horizon)?;
        let m_k = if last < 0 && idx > 0 {
            None
        } else {
            nk_set.next_from((last + 1) as u64)
        };
        let n_k = m_k.and_then(|m| n0.iter().take_while(|&n| n < m).last());
        if let Some(m) = m_k {
            last = m as i64;
        } else {
            last = -1;
        }
        let (n_i, m_i) = (n_k.map_or(-1, |v| v as i64), m_k.map_or(-1, |v| v as i64));
        let ratio = match (n_k, m_k) {
            (Some(n), Some(m)) if m > 0 => n as f64 / m as f64,
            _ => -1.0,
        };
        rows.push(RatioRow {
            k: idx + 1,
            n_k: n_i,
            m_k: m_i,
            ratio,
        });
    }
    Ok(rows)
}

pub fn ratio_table(rows: &[RatioRow]) -> Table {
    let mut t = Table::new(&["k", "n_k", "m_k", "ratio"]);
    for r in rows {
        t.push(vec![
            r.k.to_string(),
            r.n_k.to_string(),
            r.m_k.to_string(),
            fmt_g12(r.ratio),
        ]);
    }
    t
}

/// Outcome of [`density_gap_demo`].
#[derive(Debug, Clone)]
pub struct DensityGap {
    pub c: f64,
    pub c_prime: f64,
    /// `∪_k [p_k, ⌊(1+C)p_k⌋]`.
    pub near: IndexSet,
    /// `∪_k [⌊C'p_k⌋+1, p_k]`.
    pub far: IndexSet,
    pub upper_est: f64,
    pub lower_est: f64,
}

fn interval_union(pk: &IndexSet, horizon: u64, f: impl Fn(u64) -> (u64, u64)) -> Result<IndexSet> {
    let mut mask = vec![false; horizon as usize + 1];
    for p in pk.iter().take_while(|&p| p <= horizon) {
        let (a, b) = f(p);
        for n in a..=b.min(horizon) {
            mask[n as usize] = true;
        }
    }
    IndexSet::from_sorted(
        (0..=horizon).filter(|&n| mask[n as usize]).collect(),
        horizon,
    )
}

/// Upper density of `∪[p_k, ⌊(1+C)p_k⌋]` with `C = ln(μ/λ)/ln(λ‖T‖)`, and lower
/// density of the complement of `∪[⌊C'p_k⌋+1, p_k]` with `C' = ln(μ/λ)/ln(μ‖T‖)`.
pub fn density_gap_demo(
    alpha: &DensitySeq,
    lambda: f64,
    mu: f64,
    norm_t: f64,
    pk: &IndexSet,
    window: (u64, u64),
) -> Result<DensityGap> {
    if !(lambda > 0.0 && norm_t > 0.0) {
        return Err(Error::Domain("lambda and ||T|| must be positive".into()));
    }
    if !(mu > lambda) {
        return Err(Error::Domain(format!(
            "mu = {mu} must exceed lambda = {lambda}"
        )));
    }
    if !(lambda * norm_t > 1.0) {
        return Err(Error::Precondition(format!(
            "lambda*||T|| = {} <= 1",
            lambda * norm_t
        )));
    }
    let pv: Vec<u64> = pk.iter().take_while(|&p| p <= window.1).collect();
    if pv.windows(2).any(|v| v[1] <= v[0]) {
        return Err(Error::Validation("p_k must be increasing".into()));
    }
    let gap = (mu / lambda).ln();
    let c = gap / (lambda * norm_t).ln();
    let c_prime = gap / (mu * norm_t).ln();
    let h = window.1;
    let near = interval_union(pk, h, |p| (p, ((1.0 + c) * p as f64).floor() as u64))?;
    let far = interval_union(pk, h, |p| ((c_prime * p as f64).floor() as u64 + 1, p))?;
    let upper_est = emp_upper_density(alpha, &near, window)?;
    let lower_est = emp_lower_density(alpha, &far.complement(), window)?;
    Ok(DensityGap {
        c,
        c_prime,
        near,
        far,
        upper_est,
        lower_est,
    })
}

/// `p_k = 2^k` up to `horizon`.
pub fn powers_of_two(horizon: u64) -> IndexSet {
    let v: Vec<u64> = (0..64)
        .map(|k| 1u64 << k)
        .take_while(|&p| p <= horizon)
        .collect();
    IndexSet::from_sorted(v, horizon).expect("sorted")
}

/// `p_k = k!` up to `horizon`, starting at `2! = 2`.
pub fn factorials(horizon: u64) -> IndexSet {
    let mut v = Vec::new();
    let mut f = 2u64;
    let mut k = 2u64;
    while f <= horizon {
        v.push(f);
        k += 1;
        match f.checked_mul(k) {
            Some(g) => f = g,
            None => break,
        }
    }
    IndexSet::from_sorted(v, horizon).expect("sorted")
}

/// Partial ratios of `set` sampled on about 40 points per decade of the window.
pub fn partial_ratio_table(
    alpha: &DensitySeq,
    set: &IndexSet,
    window: (u64, u64),
) -> Result<Table> {
    let ratios = density_ratios(alpha, set, window)?;
    let (n0, h) = window;
    let mut grid: Vec<u64> = Vec::new();
    let mut t = (n0.max(1)) as f64;
    while (t as u64) <= h {
        grid.push(t as u64);
        t *= 10f64.powf(1.0 / 40.0);
    }
    grid.push(h);
    grid.dedup();
    let mut table = Table::new(&["n", "partial_ratio"]);
    for n in grid.into_iter().filter(|&n| n >= n0) {
        table.push(vec![n.to_string(), fmt_g12(ratios[(n - n0) as usize])]);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_powers() {
        assert_eq!(factorials(1000).to_vec(), vec![2, 6, 24, 120, 720]);
        assert_eq!(powers_of_two(10).to_vec(), vec![1, 2, 4, 8]);
    }
}
