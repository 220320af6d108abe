//! One runner per subcommand. A runner returns `Some(message)` when a checked
//! bound fails; its outputs are complete either way.

use num_bigint::BigInt;
use num_traits::Signed;
use parabola_core::asymptotics::{
    classify_series, condensation_compare, estimate_dimension, ls_slope, pointwise_exponent, DimensionOptions,
    SeriesOptions,
};
use parabola_core::cover::{chop_scale, cover_level, tail_report, CoverOptions};
use parabola_core::scale::{decay_threshold, DECAY_CAP};
use parabola_core::poly::{classify, deriv_bound_check, IntegerQuadratic};
use parabola_core::sets::census::{level_census, lemma1_level, total_measure};
use parabola_core::sets::{delta_parts, delta_set, inclusion_check_at, lemma1_verify, Interval, LemmaOneReport};
use parabola_core::{Enclosure, QuadIrr, Rational};
use serde_json::json;

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Artifacts;

pub type Outcome = CliResult<Option<String>>;

pub fn run(cmd: Command, cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    match cmd {
        Command::Enumerate => enumerate(cfg, out),
        Command::Delta => delta(cfg, out),
        Command::Lemma1 => lemma1(cfg, out),
        Command::Cover => cover(cfg, out),
        Command::Tailsum => tailsum(cfg, out),
        Command::Series => series(cfg, out),
        Command::Dimension => dimension(cfg, out),
        Command::Pointwise => pointwise(cfg, out),
    }
}

fn levels(cfg: &RunConfig) -> CliResult<std::ops::RangeInclusive<u32>> {
    if cfg.n_max > cfg.cap_level {
        return Err(CliError::Resource(format!("level {} exceeds the configured cap {}", cfg.n_max, cfg.cap_level)));
    }
    Ok(cfg.n_min..=cfg.n_max)
}

fn required<T: Copy>(name: &str, v: Option<T>, cmd: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Config(format!("field `{name}`: required by `{cmd}`")))
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn enc(e: &Enclosure) -> [String; 2] {
    [f(e.lo), f(e.hi)]
}

fn cover_options(cfg: &RunConfig) -> CoverOptions {
    CoverOptions {
        repeated_mode: cfg.repeated_mode,
        exhaustive_max_level: cfg.exhaustive_max_level,
        sample_budget: cfg.sample_budget,
        cap_level: cfg.cap_level,
    }
}

/// Decimal lower bound of `x` with at least `bits` binary digits after the point.
pub fn decimal_floor(x: &QuadIrr, bits: u32) -> String {
    let digits = (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize;
    let scale = Rational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let v = x.scale(&scale).floor();
    let neg = v.is_negative();
    let s = v.abs().to_string();
    let s = format!("{s:0>width$}", width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    let frac = frac.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac.is_empty() { format!("{sign}{int}") } else { format!("{sign}{int}.{frac}") }
}

fn enumerate(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    let mut rows = Vec::new();
    let mut all = Vec::new();
    let mut listed: Vec<Vec<String>> = Vec::new();
    for n in levels(cfg)? {
        let c = out.timed(n, || level_census(n, &cfg.psi))?;
        rows.push(vec![
            c.n.to_string(),
            c.pairs.to_string(),
            c.triples.to_string(),
            c.repeated.to_string(),
            c.distinct_real.to_string(),
            c.complex.to_string(),
            c.nonempty_repeated.to_string(),
            c.nonempty_distinct.to_string(),
            c.nonempty_complex.to_string(),
            c.deriv_violations.to_string(),
            c.repeated_param_violations.to_string(),
        ]);
        if cfg.list {
            let t = parabola_core::sets::Threshold::for_level(&cfg.psi, n)?;
            for p in parabola_core::poly::DyadicBlock::new(n).triples() {
                let (a2, a1, a0) = p.coefficients();
                if cfg.a2.is_some_and(|v| v != a2) || cfg.a1.is_some_and(|v| v != a1) || cfg.a0.is_some_and(|v| v != a0) {
                    continue;
                }
                let kind = classify(&p).kind;
                let nonempty = t.delta_nonempty(&p);
                listed.push(vec![
                    n.to_string(),
                    a2.to_string(),
                    a1.to_string(),
                    a0.to_string(),
                    p.height().to_string(),
                    p.discriminant().to_string(),
                    kind.as_str().to_string(),
                    nonempty.to_string(),
                ]);
            }
        }
        all.push(c);
    }
    out.csv(
        "census.csv",
        &[
            "n",
            "pairs",
            "triples",
            "repeated",
            "distinct_real",
            "complex",
            "nonempty_repeated",
            "nonempty_distinct",
            "nonempty_complex",
            "deriv_violations",
            "repeated_param_violations",
        ],
        rows,
    )?;
    if cfg.list {
        out.csv("triples.csv", &["n", "a2", "a1", "a0", "height", "discriminant", "kind", "delta_nonempty"], listed)?;
    }
    out.json("census.json", &json!({ "psi": cfg.psi.to_string(), "levels": all }))?;
    let bad: u64 = all.iter().map(|c| c.deriv_violations + c.repeated_param_violations).sum();
    Ok((bad > 0).then(|| format!("{bad} census member(s) violate the derivative or repeated-root bounds")))
}

fn interval_row(part: &str, iv: &Interval, bits: u32) -> Vec<String> {
    let len = iv.length();
    vec![
        part.to_string(),
        iv.lo.to_string(),
        iv.hi.to_string(),
        iv.lo_open.to_string(),
        iv.hi_open.to_string(),
        decimal_floor(&iv.lo, bits),
        decimal_floor(&iv.hi, bits),
        f(len.lo),
        f(len.hi),
    ]
}

fn delta(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    let a2 = required("a2", cfg.a2, "delta")?;
    let a1 = required("a1", cfg.a1, "delta")?;
    let a0 = required("a0", cfg.a0, "delta")?;
    let p = IntegerQuadratic::new(a2, a1, a0)?;
    let n = cfg.n_min;
    let t = match &cfg.t {
        Some(t) => t.clone(),
        None => cfg.psi.level_threshold(n)?,
    };
    let parts = delta_parts(&p, &t);
    let union = delta_set(&p, &t);
    let roots = classify(&p);
    let inclusion = if roots.discriminant > 0 { Some(inclusion_check_at(&p, n, &t)?) } else { None };
    let bits = cfg.precision_bits;
    let mut rows = Vec::new();
    for iv in parts.left.intervals() {
        rows.push(interval_row("left", iv, bits));
    }
    if parts.vertex_in {
        rows.push(interval_row("vertex", &Interval::point(QuadIrr::rational(p.vertex())), bits));
    }
    for iv in parts.right.intervals() {
        rows.push(interval_row("right", iv, bits));
    }
    out.csv(
        "delta.csv",
        &["part", "lo", "hi", "lo_open", "hi_open", "lo_decimal", "hi_decimal", "length_lo", "length_hi"],
        rows,
    )?;
    let root_text = roots.roots.as_ref().map(|(r1, r2)| {
        json!({
            "alpha1": r1, "alpha2": r2,
            "alpha1_decimal": decimal_floor(r1, bits), "alpha2_decimal": decimal_floor(r2, bits),
        })
    });
    out.json(
        "delta.json",
        &json!({
            "a2": a2, "a1": a1, "a0": a0,
            "n": n,
            "t": t,
            "kind": roots.kind.as_str(),
            "discriminant": roots.discriminant.to_string(),
            "roots": root_text,
            "deriv_bound_ok": (roots.discriminant > 0).then(|| deriv_bound_check(&p, n)),
            "left": parts.left,
            "right": parts.right,
            "vertex_in": parts.vertex_in,
            "measure": union.measure(),
            "inclusion_ok": inclusion,
        }),
    )?;
    // the chain is only a checked bound at the level threshold past the decay level
    let checked = cfg.t.is_none() && n >= decay_threshold(&cfg.psi, 2, DECAY_CAP)?;
    let failed = checked && inclusion.is_some_and(|ok| !ok);
    Ok(failed.then(|| format!("inclusion chain fails for ({a2}, {a1}, {a0}) at level {n}")))
}

fn lemma1_row(r: &LemmaOneReport) -> Vec<String> {
    let [lo, hi] = enc(&r.measure);
    vec![
        r.n.to_string(),
        r.a2.to_string(),
        r.a1.to_string(),
        lo,
        hi,
        r.bound.to_string(),
        r.components.to_string(),
        r.passed.to_string(),
    ]
}

fn lemma1(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut failed_total = 0usize;
    for n in levels(cfg)? {
        let reps = match (cfg.all_pairs, cfg.a2, cfg.a1) {
            (false, Some(a2), Some(a1)) => vec![out.timed(n, || lemma1_verify(a2, a1, n, &cfg.psi))?],
            _ => {
                let mut v = out.timed(n, || lemma1_level(n, &cfg.psi))?;
                v.retain(|r| cfg.a2.is_none_or(|a| a == r.a2) && cfg.a1.is_none_or(|a| a == r.a1));
                v
            }
        };
        let failed = reps.iter().filter(|r| !r.passed).count();
        failed_total += failed;
        summary.push(json!({
            "n": n,
            "pairs": reps.len(),
            "failed": failed,
            "total_measure": total_measure(&reps),
            "max_measure_hi": reps.iter().map(|r| r.measure.hi).fold(0.0, f64::max),
            "bound": reps.first().map(|r| r.bound.clone()),
        }));
        rows.extend(reps.iter().map(lemma1_row));
    }
    out.csv(
        "lemma1.csv",
        &["n", "a2", "a1", "measure_lo", "measure_hi", "bound", "components", "passed"],
        rows,
    )?;
    out.json("lemma1.json", &json!({ "psi": cfg.psi.to_string(), "levels": summary }))?;
    Ok((failed_total > 0).then(|| format!("{failed_total} pair(s) exceed the measure bound")))
}

fn cover(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    let opts = cover_options(cfg);
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for n in levels(cfg)? {
        let r = out.timed(n, || cover_level(n, &cfg.psi, std::slice::from_ref(&cfg.g), &opts))?.remove(0);
        let t = cfg.psi.level_threshold(n)?;
        let [rl, rh] = enc(&r.repeated_gsum);
        let [dl, dh] = enc(&r.distinct_gsum);
        let [tl, th] = enc(&r.total_gsum);
        rows.push(vec![
            n.to_string(),
            r.repeated_count.to_string(),
            rl,
            rh,
            r.distinct_pair_count.to_string(),
            r.chopped_piece_count.to_string(),
            dl,
            dh,
            tl,
            th,
            chop_scale(&t, n).to_string(),
            r.chop_bound.to_string(),
            r.max_pieces_per_pair.to_string(),
            r.exact_fallbacks.to_string(),
            r.violations.len().to_string(),
            r.sampling.as_ref().map_or(String::new(), |s| s.stride.to_string()),
            r.sampling.as_ref().map_or(String::new(), |s| s.sampled_pairs.to_string()),
        ]);
        reports.push(r);
    }
    out.csv(
        "cover.csv",
        &[
            "n",
            "rep_count",
            "rep_gsum_lo",
            "rep_gsum_hi",
            "pairs",
            "pieces",
            "gsum_lo",
            "gsum_hi",
            "total_gsum_lo",
            "total_gsum_hi",
            "delta",
            "chop_bound",
            "max_pieces_per_pair",
            "exact_fallbacks",
            "violations",
            "sample_stride",
            "sampled_pairs",
        ],
        rows,
    )?;
    out.json("cover.json", &json!({ "psi": cfg.psi.to_string(), "g": cfg.g.to_string(), "levels": reports }))?;
    let bad: usize = reports.iter().map(|r| r.violations.len()).sum();
    Ok((bad > 0).then(|| format!("{bad} pair(s) exceed the chop-count bound")))
}

fn tailsum(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    let opts = cover_options(cfg);
    let mut levels_done = Vec::new();
    for n in levels(cfg)? {
        levels_done.push(out.timed(n, || cover_level(n, &cfg.psi, std::slice::from_ref(&cfg.g), &opts))?.remove(0));
    }
    let rep = tail_report(cfg.n_min, cfg.n_max, levels_done);
    let pts: Vec<(f64, f64)> = rep
        .levels
        .iter()
        .filter(|r| r.total_gsum.mid() > 0.0)
        .map(|r| (r.n as f64, r.total_gsum.mid().log2()))
        .collect();
    let exponent = ls_slope(&pts);
    let rows = rep.trend.iter().zip(&rep.levels).map(|((n, tail), r)| {
        let [a, b] = enc(tail);
        let [c, d] = enc(&r.total_gsum);
        vec![n.to_string(), a, b, c, d]
    });
    out.csv("tailsum.csv", &["N", "tail_lo", "tail_hi", "level_gsum_lo", "level_gsum_hi"], rows)?;
    out.json(
        "tailsum.json",
        &json!({
            "psi": cfg.psi.to_string(),
            "g": cfg.g.to_string(),
            "n_start": rep.n_start,
            "n_end": rep.n_end,
            "tail": rep.tail,
            "trend": rep.trend,
            "level_growth_exponent": exponent,
            "levels": rep.levels,
        }),
    )?;
    Ok(None)
}

fn series(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    let opts = SeriesOptions {
        q_max: cfg.q_max,
        condensation_base: cfg.condensation_base,
        condensation_levels: cfg.condensation_levels,
        ..SeriesOptions::default()
    };
    let rep = classify_series(&cfg.psi, &cfg.g, &opts)?;
    let cond = condensation_compare(&cfg.psi, &cfg.g, cfg.condensation_base, cfg.condensation_levels)?;
    out.csv(
        "partial_sums.csv",
        &["Q", "sum_lo", "sum_hi"],
        rep.partial_sums.iter().map(|(q, s)| {
            let [a, b] = enc(s);
            vec![q.to_string(), a, b]
        }),
    )?;
    out.csv(
        "condensation.csv",
        &["n", "ratio_lo", "ratio_hi", "lower_lo", "lower_hi", "upper"],
        cond.rows.iter().map(|r| {
            let [a, b] = enc(&r.ratio);
            let [c, d] = enc(&r.lower);
            vec![r.n.to_string(), a, b, c, d, f(r.upper)]
        }),
    )?;
    out.json(
        "series.json",
        &json!({
            "psi": cfg.psi.to_string(),
            "g": cfg.g.to_string(),
            "classification": rep.classification.as_str(),
            "report": rep,
            "condensation": cond,
        }),
    )?;
    Ok(None)
}

fn dimension(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    levels(cfg)?;
    let opts = DimensionOptions {
        stripes: cfg.stripes,
        repeated_mode: cfg.repeated_mode,
        cap_level: cfg.cap_level,
        ..DimensionOptions::default()
    };
    let rep = estimate_dimension(&cfg.tau, cfg.n_min, cfg.n_max, &opts)?;
    out.csv(
        "dimension.csv",
        &[
            "n",
            "delta",
            "box_size",
            "count",
            "repeated_boxes",
            "distinct_boxes",
            "width_exp",
            "sampled_fraction",
            "neg_ln_delta",
            "ln_count",
        ],
        rep.box_counts.iter().map(|b| {
            vec![
                b.n.to_string(),
                b.box_size_exact.to_string(),
                f(b.box_size),
                b.count.to_string(),
                b.repeated_boxes.to_string(),
                f(b.distinct_boxes),
                b.width_exp.to_string(),
                f(b.sampled_fraction),
                f(-b.box_size.ln()),
                f((b.count as f64).ln()),
            ]
        }),
    )?;
    out.json("dimension.json", &rep)?;
    Ok(None)
}

fn pointwise(cfg: &RunConfig, out: &mut Artifacts) -> Outcome {
    let x = cfg.x.clone().ok_or_else(|| CliError::Config("field `x`: required by `pointwise`".into()))?;
    let rep = pointwise_exponent(&x, cfg.q_max)?;
    out.json("pointwise.json", &rep)?;
    Ok(None)
}
