//! End-to-end scenario runs.

use std::path::PathBuf;

use freqdyn::construction::{
    assemble_common_vector, build_index_sets, default_targets, separation_scale,
    tail_threshold_table, verify_frequent_hits, AssembledVector, EpsilonBudget, HitReport,
    Multiples, SeparatedFamily,
};
use freqdyn::densities::{
    delta2_verdict, emp_lower_density, emp_upper_density, nk_sequence, Delta2, DensitySeq, IndexSet,
};
use freqdyn::operators::{
    block_transition, cplus_common_verdict, ctype_apply, ctype_period, CPlusVerdict, CTypeFlavor,
    CTypeParams, SparseVec,
};
use freqdyn::shift_analysis::{
    common_fhc_verdict, fhc_verdict, shift_quantities, shift_quantities_seeded, CommonVerdict,
    FhcVerdict, LambdaSet, ShiftQuantities, WeightSeq,
};

use crate::config::{ExperimentConfig, PkKind, Scenario};
use crate::experiments::{
    density_gap_demo, factorials, partial_ratio_table, powers_of_two, ratio_table, ratio_witness,
};
use crate::output::{fmt_g12, write_table, write_table_with, Table};
use crate::LabResult;

/// Horizon used for the shift estimates that feed a construction.
pub const QUANTITY_HORIZON: u64 = 100_000;
/// Cap on the tail thresholds of a construction.
pub const THRESHOLD_CAP: u64 = 10_000;
/// Tolerance of the operator identities checked by `ctype_demo`.
pub const CTYPE_TOL: f64 = 1e-9;

/// What a scenario produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Lines meant for standard output.
    pub log: Vec<String>,
    /// Failed embedded assertions, one line each.
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// `0` when every embedded assertion held, `2` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

pub fn run_scenario(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Quantities => quantities(cfg),
        Scenario::ConstructVerify => construct_verify(cfg),
        Scenario::NoCommon => no_common(cfg),
        Scenario::DensityGap => density_gap(cfg),
        Scenario::CtypeDemo => ctype_demo(cfg),
        Scenario::DensitiesReport => densities_report(cfg),
    }
}

fn quantities(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    let w = WeightSeq::parse(&cfg.weight)?;
    let q = shift_quantities_seeded(&w, cfg.horizon, cfg.p, cfg.seed)?;
    let mut table = Table::new(&ShiftQuantities::CSV_HEADER.split(',').collect::<Vec<_>>());
    table.push(q.csv_row(fmt_g12).split(',').map(str::to_string).collect());
    let points: Vec<(f64, f64)> = [q.norm_inv, 1.0 / q.r_w, 1.0 / q.lambda_w, 1.0 / q.r_pw]
        .iter()
        .enumerate()
        .map(|(i, &v)| (i as f64, v))
        .collect();
    out.files.extend(write_table_with(
        &cfg.output_dir,
        "quantities",
        &table,
        ("chain position", "threshold"),
        &points,
    )?);
    out.log.push(ShiftQuantities::CSV_HEADER.to_string());
    out.log.push(q.csv_row(fmt_g12));
    let chain = q.chain_holds();
    out.log.push(format!(
        "chain: {}",
        if chain { "holds" } else { "violated" }
    ));
    let fhc = fhc_verdict(&w, cfg.p, cfg.horizon.min(1_000_000))?;
    out.log.push(format!("fhc: {}", fhc_label(&fhc)));
    out.check(chain, || {
        format!(
            "chain ordering violated: norm_inv={} 1/r_w={} 1/lambda_w={} 1/r_pw={}",
            fmt_g12(q.norm_inv),
            fmt_g12(1.0 / q.r_w),
            fmt_g12(1.0 / q.lambda_w),
            fmt_g12(1.0 / q.r_pw)
        )
    });
    Ok(out)
}

fn fhc_label(v: &FhcVerdict) -> String {
    match v {
        FhcVerdict::Satisfied { tail_bound } => {
            format!("satisfied (tail {})", fmt_g12(*tail_bound))
        }
        FhcVerdict::NotSatisfied => "not satisfied".into(),
        FhcVerdict::Inconclusive => "inconclusive".into(),
    }
}

/// A built and assembled common vector, with everything needed to probe it.
pub struct Construction {
    pub multiples: Multiples,
    pub targets: Vec<SparseVec>,
    pub quantities: ShiftQuantities,
    pub c: f64,
    pub family: SeparatedFamily,
    pub vector: AssembledVector,
}

/// Thresholds, separated sets and the truncated common vector for `λ_i B_w`,
/// with sets and support cut at `horizon`.
pub fn build_construction(
    w: WeightSeq,
    lambdas: Vec<f64>,
    p: f64,
    horizon: u64,
) -> LabResult<(Construction, Table)> {
    let quantities = shift_quantities(&w, QUANTITY_HORIZON, p)?;
    let multiples = Multiples::new(w, lambdas)?;
    let targets = default_targets(p);
    let (_, c) = separation_scale(&multiples, &quantities)?;
    let budget = EpsilonBudget::Geometric;
    let table = tail_threshold_table(&multiples, &targets, budget, c, THRESHOLD_CAP, &quantities)?;
    let mut t = Table::new(&["p", "i", "N", "support", "ii", "iii", "vii"]);
    for (&(pp, i), b) in &table.breakdown {
        t.push(vec![
            pp.to_string(),
            i.to_string(),
            table.n[&(pp, i)].to_string(),
            b.support.to_string(),
            b.ii.to_string(),
            b.iii.to_string(),
            b.vii.to_string(),
        ]);
    }
    let family = build_index_sets(&table.n, c, horizon)?;
    let vector = assemble_common_vector(&family, &multiples, &targets, horizon, budget)?;
    Ok((
        Construction {
            multiples,
            targets,
            quantities,
            c,
            family,
            vector,
        },
        t,
    ))
}

fn label_table(family: &SeparatedFamily) -> Table {
    let mut t = Table::new(&SeparatedFamily::CSV_HEADER.split(',').collect::<Vec<_>>());
    for line in family.to_csv().lines().skip(1) {
        t.push(line.split(',').map(str::to_string).collect());
    }
    t
}

fn construct_verify(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    let w = WeightSeq::parse(&cfg.weight)?;
    let (con, thresholds) = build_construction(w, cfg.lambda_set.clone(), cfg.p, cfg.horizon)?;
    let dir = &cfg.output_dir;
    let index: Vec<(f64, f64)> = thresholds
        .column("N")
        .into_iter()
        .enumerate()
        .filter_map(|(i, v)| Some((i as f64, v?)))
        .collect();
    out.files.extend(write_table_with(
        dir,
        "thresholds",
        &thresholds,
        ("label index", "N"),
        &index,
    )?);
    let labels = label_table(&con.family);
    let counts: Vec<(f64, f64)> = labels
        .column("count")
        .into_iter()
        .enumerate()
        .filter_map(|(i, v)| Some((i as f64, v?)))
        .collect();
    out.files.extend(write_table_with(
        dir,
        "family",
        &labels,
        ("label index", "count"),
        &counts,
    )?);

    let sep = con.family.check_separation();
    out.check(sep.is_ok(), || {
        format!("separation: {}", sep.as_ref().unwrap_err())
    });
    let report = verify_frequent_hits(
        &con.vector.x,
        &con.family,
        &con.multiples,
        &con.targets,
        EpsilonBudget::Geometric,
        cfg.window,
    )?;
    let hits = hits_table(&report);
    out.files
        .extend(write_table(dir, "hits", &hits, "m", "norm")?);
    let x = con.vector.x.to_sparse(cfg.p);
    let mut xt = Table::new(&["index", "coefficient"]);
    for (k, c) in x.iter() {
        xt.push(vec![k.to_string(), fmt_g12(c)]);
    }
    out.files
        .extend(write_table(dir, "vector", &xt, "index", "coefficient")?);

    out.log.push(format!(
        "c = {}, a = {}, labels = {}, terms = {}, tail = {}",
        fmt_g12(con.c),
        fmt_g12(con.family.a),
        con.family.labels.len(),
        con.vector.terms,
        fmt_g12(con.vector.tail_bound)
    ));
    for (l, d) in &report.densities {
        let probes = report.rows.iter().filter(|r| (r.q, r.j) == *l).count();
        out.log.push(format!(
            "label ({}, {}): probes = {probes}, lower density = {}",
            l.0,
            l.1,
            fmt_g12(*d)
        ));
    }
    out.log.push(format!(
        "probes: {} passed of {}",
        report.rows.len() - report.failures().len(),
        report.rows.len()
    ));
    for r in report.failures().iter().take(10) {
        out.failures.push(format!(
            "probe q={} j={} m={}: norm {} >= r_q {}",
            r.q,
            r.j,
            r.m,
            fmt_g12(r.norm),
            fmt_g12(r.r_q)
        ));
    }
    let extra = report.failures().len().saturating_sub(10);
    if extra > 0 {
        out.failures
            .push(format!("... and {extra} more failing probes"));
    }
    Ok(out)
}

fn hits_table(report: &HitReport) -> Table {
    let mut t = Table::new(&HitReport::CSV_HEADER.split(',').collect::<Vec<_>>());
    for r in &report.rows {
        t.push(vec![
            r.q.to_string(),
            r.j.to_string(),
            r.m.to_string(),
            fmt_g12(r.norm),
            fmt_g12(r.r_q),
            r.pass.to_string(),
        ]);
    }
    t
}

fn verdict_line(v: &CommonVerdict) -> String {
    match v {
        CommonVerdict::Nonempty(why) => format!("verdict: nonempty ({why})"),
        CommonVerdict::Empty(why) => format!("verdict: empty ({why})"),
        CommonVerdict::Unknown { gap } => {
            format!(
                "verdict: unknown (inf Lambda in ({}, {}])",
                fmt_g12(gap.0),
                fmt_g12(gap.1)
            )
        }
    }
}

fn no_common(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    let w = WeightSeq::parse(&cfg.weight)?;
    let q = shift_quantities(&w, QUANTITY_HORIZON, cfg.p)?;
    let set = LambdaSet::countable(cfg.lambda_set.clone(), cfg.unbounded);
    let verdict = common_fhc_verdict(&set, &q)?;
    out.log.push(verdict_line(&verdict));

    let mut lams = cfg.lambda_set.clone();
    lams.sort_by(|a, b| b.total_cmp(a));
    lams.dedup();
    let lambda0 = lams[0];
    let seq = lams[1..].to_vec();
    // the vector is built for the largest multiple that admits a construction
    let floor = q.width.exp() / q.r_pw;
    let target = seq.iter().copied().find(|&l| l > floor).unwrap_or(lambda0);
    out.log.push(format!(
        "probe vector built for lambda = {}",
        fmt_g12(target)
    ));
    let (con, _) = build_construction(w.clone(), vec![target], cfg.p, cfg.horizon)?;
    let rows = ratio_witness(&con.vector.x, &w, lambda0, &seq, 1.0, cfg.horizon, cfg.p)?;
    let table = ratio_table(&rows);
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ratio >= 0.0)
        .map(|r| (r.k as f64, r.ratio))
        .collect();
    out.files.extend(write_table_with(
        &cfg.output_dir,
        "ratio",
        &table,
        ("k", "n_k/m_k"),
        &points,
    )?);
    out.log.extend(table.to_csv().lines().map(str::to_string));
    Ok(out)
}

fn density_gap(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    if cfg.lambda_set.len() != 2 {
        return Err(crate::LabError::Config(
            "density_gap needs lambdas = lambda,mu".into(),
        ));
    }
    let (lambda, mu) = (cfg.lambda_set[0], cfg.lambda_set[1]);
    let alpha = DensitySeq::parse(&cfg.alpha)?;
    let natural = DensitySeq::constant(1.0)?;
    let pk = match cfg.pk {
        PkKind::PowersOfTwo => powers_of_two(cfg.window.1),
        PkKind::Factorials => factorials(cfg.window.1),
    };
    let gap = density_gap_demo(&alpha, lambda, mu, cfg.norm_t, &pk, cfg.window)?;
    let plain = density_gap_demo(&natural, lambda, mu, cfg.norm_t, &pk, cfg.window)?;
    let d2 = delta2_verdict(&alpha, cfg.horizon);

    let ratios = partial_ratio_table(&alpha, &gap.near, cfg.window)?;
    out.files.extend(write_table(
        &cfg.output_dir,
        "density",
        &ratios,
        "n",
        "partial_ratio",
    )?);
    let mut summary = Table::new(&["alpha", "delta2", "c", "c_prime", "upper_est", "lower_est"]);
    for (name, g, v) in [
        (alpha.to_string(), &gap, d2),
        (
            natural.to_string(),
            &plain,
            delta2_verdict(&natural, cfg.horizon),
        ),
    ] {
        summary.push(vec![
            name,
            delta2_label(&v),
            fmt_g12(g.c),
            fmt_g12(g.c_prime),
            fmt_g12(g.upper_est),
            fmt_g12(g.lower_est),
        ]);
    }
    let points = vec![(0.0, gap.upper_est), (1.0, plain.upper_est)];
    out.files.extend(write_table_with(
        &cfg.output_dir,
        "gap",
        &summary,
        ("row", "upper_est"),
        &points,
    )?);
    out.log.extend(summary.to_csv().lines().map(str::to_string));
    match d2 {
        Delta2::Fails => out.check(gap.upper_est >= 0.95, || {
            format!(
                "upper_est = {} < 0.95 for a density without the doubling bound",
                fmt_g12(gap.upper_est)
            )
        }),
        Delta2::Holds(_) => out.check((gap.upper_est - plain.upper_est).abs() <= 0.02, || {
            format!(
                "upper_est = {} differs from the natural-density value {} by more than 0.02",
                fmt_g12(gap.upper_est),
                fmt_g12(plain.upper_est)
            )
        }),
        Delta2::Inconclusive => {}
    }
    Ok(out)
}

fn delta2_label(v: &Delta2) -> String {
    match v {
        Delta2::Holds(k) => format!("holds({})", fmt_g12(*k)),
        Delta2::Fails => "fails".into(),
        Delta2::Inconclusive => "inconclusive".into(),
    }
}

fn ctype_demo(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    let params = match &cfg.ctype_params {
        Some(path) => CTypeParams::from_config_str(&std::fs::read_to_string(path)?)?,
        None => CTypeParams::reference(cfg.levels),
    };
    params.validate()?;
    let p = cfg.p;

    let mut periods = Table::new(&["block", "index", "period", "max_error", "pass"]);
    for n in 0..params.num_blocks().min(8) {
        let k = params.b(n);
        let e = SparseVec::basis(k, p);
        let period = ctype_period(&params, &e)?;
        let err = ctype_apply(&params, &e, period)?.max_abs_diff(&e);
        let pass = err <= CTYPE_TOL;
        out.check(pass, || {
            format!(
                "block {n}: T^{period} e_{k} misses e_{k} by {}",
                fmt_g12(err)
            )
        });
        periods.push(vec![
            n.to_string(),
            k.to_string(),
            period.to_string(),
            fmt_g12(err),
            pass.to_string(),
        ]);
    }
    out.files.extend(write_table(
        &cfg.output_dir,
        "periods",
        &periods,
        "block",
        "max_error",
    )?);

    if params.flavor() != CTypeFlavor::General {
        let mut closed = Table::new(&["k", "l", "m", "max_error", "pass"]);
        let mut worst = 0.0_f64;
        for k in 1..=params.levels().min(3) {
            let big = params.big_delta(k).expect("level exists");
            for l in 0..(1u64 << (k - 1)) {
                let n = (1u64 << (k - 1)) + l;
                for m in 1..=big {
                    let start = SparseVec::basis(params.b(n + 1) - m, p);
                    let err = ctype_apply(&params, &start, m)?
                        .max_abs_diff(&block_transition(&params, k, l, m, p)?);
                    worst = worst.max(err);
                    let pass = err <= CTYPE_TOL;
                    out.check(pass, || {
                        format!("closed form k={k} l={l} m={m} off by {}", fmt_g12(err))
                    });
                    closed.push(vec![
                        k.to_string(),
                        l.to_string(),
                        m.to_string(),
                        fmt_g12(err),
                        pass.to_string(),
                    ]);
                }
            }
        }
        let points: Vec<(f64, f64)> = closed
            .column("max_error")
            .into_iter()
            .enumerate()
            .filter_map(|(i, v)| Some((i as f64, v?)))
            .collect();
        out.files.extend(write_table_with(
            &cfg.output_dir,
            "closed_form",
            &closed,
            ("case", "max_error"),
            &points,
        )?);
        out.log.push(format!(
            "closed form: {} cases, max error {}",
            closed.rows.len(),
            fmt_g12(worst)
        ));
    }
    if params.flavor() == CTypeFlavor::CPlusOne {
        let v = cplus_common_verdict(std::slice::from_ref(&params), 0.1, params.levels())?;
        out.log.push(match v {
            CPlusVerdict::HypothesesHold {
                ratio, witnesses, ..
            } => {
                format!(
                    "common-vector hypotheses hold: ratio {}, {} witnesses",
                    fmt_g12(ratio),
                    witnesses.len()
                )
            }
            CPlusVerdict::Fail(why) => format!("common-vector hypotheses fail: {why}"),
        });
    }
    out.log.push(format!(
        "periodicity: {} blocks checked",
        periods.rows.len()
    ));
    Ok(out)
}

/// Standard densities and the outcome expected from the doubling test.
const REPORT_DENSITIES: [(&str, Option<(f64, f64)>); 5] = [
    ("const:1", Some((1.99, 2.01))),
    ("pow:2", Some((7.9, 8.1))),
    ("logL:1", None),
    ("expE:0.5", None),
    ("expD:1", None),
];

/// Density spec with its expected doubling outcome; `None` for an unchecked extra row.
type ReportRow = (String, Option<Option<(f64, f64)>>);

fn densities_report(cfg: &ExperimentConfig) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    let mut specs: Vec<ReportRow> = REPORT_DENSITIES
        .iter()
        .map(|(s, e)| (s.to_string(), Some(*e)))
        .collect();
    let extra = DensitySeq::parse(&cfg.alpha)?.to_string();
    if !specs.iter().any(|(s, _)| *s == extra) {
        specs.push((extra, None));
    }
    let (n0, h) = cfg.window;
    let multiples = IndexSet::arithmetic(3, 0, h)?;
    let mut table = Table::new(&["alpha", "delta2", "lower_mult3", "upper_mult3"]);
    let mut points = Vec::new();
    for (idx, (spec, expect)) in specs.iter().enumerate() {
        let alpha = DensitySeq::parse(spec)?;
        let v = delta2_verdict(&alpha, cfg.horizon);
        let win = (n0.max(alpha.k_min()), h);
        let lower = emp_lower_density(&alpha, &multiples, win)?;
        let upper = emp_upper_density(&alpha, &multiples, win)?;
        let dual = 1.0 - emp_lower_density(&alpha, &multiples.complement(), win)?;
        out.check(upper == dual, || {
            format!(
                "{spec}: duality broken ({} vs {})",
                fmt_g12(upper),
                fmt_g12(dual)
            )
        });
        if let Some(expect) = expect {
            let ok = match (expect, v) {
                (Some((lo, hi)), Delta2::Holds(k)) => (*lo..=*hi).contains(&k),
                (None, Delta2::Fails) => true,
                _ => false,
            };
            out.check(ok, || {
                format!("{spec}: unexpected doubling verdict {}", delta2_label(&v))
            });
        }
        table.push(vec![
            spec.clone(),
            delta2_label(&v),
            fmt_g12(lower),
            fmt_g12(upper),
        ]);
        points.push((idx as f64, upper));
    }
    out.files.extend(write_table_with(
        &cfg.output_dir,
        "densities",
        &table,
        ("density", "upper_mult3"),
        &points,
    )?);
    out.log.extend(table.to_csv().lines().map(str::to_string));

    let mut nk = Table::new(&["k", "n_k"]);
    for (k, n) in nk_sequence(40).into_iter().enumerate() {
        nk.push(vec![(k + 1).to_string(), n.to_string()]);
    }
    out.files
        .extend(write_table(&cfg.output_dir, "nk", &nk, "k", "n_k")?);
    Ok(out)
}
