//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are always printed.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use parabola_core::asymptotics::{classify_series, estimate_dimension, ls_slope, DimensionOptions, SeriesClass, SeriesOptions};
use parabola_core::cover::{cover_level, tail_sums, CoverOptions};
use parabola_core::poly::{classify, DyadicBlock};
use parabola_core::scale::{decay_threshold, DimFnSpec, PsiSpec, DECAY_CAP};
use parabola_core::sets::census::{inclusion_level, lemma1_level, level_census, repeated_params_ok};
use parabola_core::sets::{complex_exclusion_level, complex_violations, Threshold};
use parabola_core::Rational;

type Check = Result<String, String>;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn psi_pow(tau: Rational) -> PsiSpec {
    PsiSpec::power(tau).unwrap()
}

fn g_pow(s: Rational) -> DimFnSpec {
    DimFnSpec::power(s).unwrap()
}

fn n0(psi: &PsiSpec) -> u32 {
    decay_threshold(psi, 2, DECAY_CAP).unwrap()
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok { Ok(msg) } else { Err(msg) }
}

fn measure_bound() -> Check {
    let psi = psi_pow(r(3, 1));
    let mut pairs = 0;
    let mut worst: f64 = 0.0;
    for n in 2..=6 {
        let t = psi.level_threshold(n).unwrap().to_f64();
        for rep in lemma1_level(n, &psi).unwrap() {
            pairs += 1;
            worst = worst.max(rep.measure.hi / t);
            if !rep.passed {
                return Err(format!("n={n} ({}, {}): measure.hi {} > {}", rep.a2, rep.a1, rep.measure.hi, rep.bound));
            }
        }
    }
    Ok(format!("{pairs} pairs, max measure/ψ(2^n) = {worst:.4} <= 16"))
}

fn derivative_bounds() -> Check {
    let psi = psi_pow(r(3, 1));
    let mut checked = 0;
    for n in 0..=6 {
        let c = level_census(n, &psi).unwrap();
        checked += c.nonempty_distinct;
        if c.deriv_violations > 0 {
            return Err(format!("n={n}: {} violations", c.deriv_violations));
        }
    }
    Ok(format!("{checked} nonempty distinct-real members, 0 violations"))
}

fn inclusion_chain() -> Check {
    let psi = psi_pow(r(3, 1));
    let (mut checked, mut exact) = (0, 0);
    for n in n0(&psi)..=6 {
        let rep = inclusion_level(n, &psi).unwrap();
        checked += rep.checked;
        exact += rep.exact_checks;
        if let Some(f) = rep.violations.first() {
            return Err(format!("n={n}: {} violations, first {f:?}", rep.violations.len()));
        }
    }
    Ok(format!("n from {} to 6: {checked} members ({exact} rechecked exactly), 0 violations", n0(&psi)))
}

fn chop_count() -> Check {
    let psi = psi_pow(r(3, 1));
    let g = g_pow(r(3, 5));
    let mut worst = 0.0f64;
    for n in n0(&psi)..=6 {
        let rep = cover_level(n, &psi, std::slice::from_ref(&g), &CoverOptions::default()).unwrap().remove(0);
        if rep.sampling.is_some() {
            return Err(format!("n={n} was sampled"));
        }
        if !rep.violations.is_empty() || rep.max_pieces_per_pair > rep.chop_bound {
            return Err(format!("n={n}: {} pairs over {}", rep.violations.len(), rep.chop_bound));
        }
        worst = worst.max(rep.max_pieces_per_pair as f64 / rep.chop_bound as f64);
    }
    Ok(format!("max pieces/(640·2^n) = {worst:.4}"))
}

fn repeated_params() -> Check {
    let psi = psi_pow(r(3, 1));
    let mut nonempty = 0;
    let mut outside_empty = 0;
    for n in 1..=8 {
        let c = level_census(n, &psi).unwrap();
        nonempty += c.nonempty_repeated;
        if c.repeated_param_violations > 0 {
            return Err(format!("n={n}: {} violations", c.repeated_param_violations));
        }
        // members outside the window only ever have empty solution sets
        let t = Threshold::for_level(&psi, n).unwrap();
        for f in DyadicBlock::new(n).repeated_members() {
            let p = classify(&f).repeated.unwrap();
            if p.k == 1 && !repeated_params_ok(p.u, p.v, n) {
                if t.delta_nonempty(&f) {
                    return Err(format!("n={n}: {f:?} outside the window with nonempty Δ"));
                }
                outside_empty += 1;
            }
        }
    }
    Ok(format!("{nonempty} nonempty k=1 members in the window; {outside_empty} outside it, all with empty Δ"))
}

fn complex_emptiness() -> Check {
    let psi = psi_pow(r(3, 1));
    let nc = complex_exclusion_level(&psi, 8).map_err(|e| e.to_string())?;
    for n in nc..=8 {
        let c = level_census(n, &psi).unwrap();
        if c.nonempty_complex > 0 {
            return Err(format!("n={n}: {} complex members with nonempty Δ", c.nonempty_complex));
        }
        if n <= 6 {
            let t = Threshold::for_level(&psi, n).unwrap();
            let v = complex_violations(n, &t);
            if !v.is_empty() {
                return Err(format!("n={n}: scan found {:?}", v[0]));
            }
        }
    }
    ensure(nc <= 8, format!("n_c = {nc}; empty on [{nc}, 8]"))
}

fn series_rule() -> Check {
    let opts = SeriesOptions::default();
    let mut cases = 0;
    for tau in [r(5, 2), r(3, 1), r(4, 1), r(6, 1)] {
        let crit = Rational::from(3) / (&tau + &Rational::one());
        for s in [r(3, 10), r(1, 2), &crit - &r(1, 20), &crit + &r(1, 20), r(9, 10)] {
            let rep = classify_series(&psi_pow(tau.clone()), &g_pow(s.clone()), &opts).map_err(|e| e.to_string())?;
            let want = if s > crit { SeriesClass::Convergent } else { SeriesClass::Divergent };
            if rep.classification != want {
                return Err(format!("τ={tau} s={s}: {:?}", rep.classification));
            }
            let inc = rep.last_increment.map_or(f64::INFINITY, |e| e.hi);
            let growth = rep.growth_exponent.unwrap_or(f64::NAN);
            match want {
                SeriesClass::Convergent if inc >= 1e-6 => return Err(format!("τ={tau} s={s}: last increment {inc}")),
                SeriesClass::Divergent if growth.is_nan() || growth <= 0.0 => {
                    return Err(format!("τ={tau} s={s}: growth exponent {growth}"))
                }
                _ => {}
            }
            cases += 1;
        }
    }
    // at s = 3/(τ+1) the log exponents decide
    let psi4 = psi_pow(r(4, 1));
    let boundary: Vec<(PsiSpec, Vec<Rational>, SeriesClass)> = vec![
        (psi4.clone(), vec![], SeriesClass::Divergent),
        (psi4.clone(), vec![r(-2, 1)], SeriesClass::Convergent),
        (psi4.clone(), vec![r(-1, 1)], SeriesClass::Divergent),
        (psi4.clone(), vec![r(0, 1)], SeriesClass::Divergent),
        (psi4.clone(), vec![r(-1, 1), r(-2, 1)], SeriesClass::Convergent),
        (psi4.clone(), vec![r(-1, 1), r(-1, 1)], SeriesClass::Divergent),
        (PsiSpec::new(r(4, 1), vec![r(0, 1)], r(0, 1)).unwrap(), vec![r(-1, 1)], SeriesClass::Divergent),
        (PsiSpec::new(r(4, 1), vec![r(0, 1)], r(-1, 2)).unwrap(), vec![r(-1, 1)], SeriesClass::Convergent),
        (PsiSpec::new(r(4, 1), vec![r(0, 1)], r(1, 2)).unwrap(), vec![r(-1, 1)], SeriesClass::Divergent),
    ];
    let quick = SeriesOptions { q_max: 10_000, ..SeriesOptions::default() };
    for (psi, betas, want) in boundary {
        let g = DimFnSpec::new(r(3, 5), betas.clone()).unwrap();
        let rep = classify_series(&psi, &g, &quick).map_err(|e| e.to_string())?;
        if rep.classification != want || !rep.exact_rule_applied {
            return Err(format!("ψ={psi} β={betas:?}: {:?}", rep.classification));
        }
        cases += 1;
    }
    Ok(format!("{cases} cases match the sign rule and the log cascade"))
}

fn tail_behaviour() -> Check {
    let psi = psi_pow(r(4, 1));
    let start = n0(&psi);
    let gs = [g_pow(r(7, 10)), g_pow(r(1, 2))];
    let reps = tail_sums(start, 12, &psi, &gs, &CoverOptions::default()).map_err(|e| e.to_string())?;
    let (fast, slow) = (&reps[0], &reps[1]);
    for w in fast.trend.windows(2) {
        if w[1].1.hi >= w[0].1.lo {
            return Err(format!("g=r^0.7 tail does not decrease from N={} to N={}", w[0].0, w[1].0));
        }
    }
    let first = fast.levels.first().unwrap().total_gsum;
    let last = fast.levels.last().unwrap().total_gsum;
    let limit = first.lo * 2f64.powf(-((12 - start) as f64) * 0.4);
    if last.hi >= limit {
        return Err(format!("g=r^0.7 last level {} >= {limit}", last.hi));
    }
    let pts: Vec<(f64, f64)> = slow.levels.iter().map(|l| (l.n as f64, l.total_gsum.mid().log2())).collect();
    let slope = ls_slope(&pts).ok_or("no fit")?;
    ensure(
        (slope - 0.5).abs() <= 0.15,
        format!(
            "N={start}..12; r^0.7: last/first = {:.3e} < {:.3e}; r^0.5 level growth exponent {slope:.4} (0.5 ± 0.15)",
            last.hi / first.lo,
            limit / first.lo
        ),
    )
}

fn dimension_estimate() -> Check {
    let rep = estimate_dimension(&r(4, 1), 6, 12, &DimensionOptions::default()).map_err(|e| e.to_string())?;
    let slope = rep.slope_estimate.ok_or("no slope")?;
    ensure((slope - 0.6).abs() <= 0.1, format!("slope {slope:.4} on n = 6..12, target {} ± 0.1", rep.target))
}

fn run_cli(args: &[&str], threads: u32, out: &Path) -> Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_parabola"))
        .args(args)
        .args(["--threads", &threads.to_string(), "--out"])
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    Ok(status.status.code().unwrap_or(-1))
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "manifest.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

fn determinism() -> Check {
    let runs: [&[&str]; 7] = [
        &["enumerate", "--nmin", "0", "--nmax", "6"],
        &["lemma1", "--nmin", "2", "--nmax", "5", "--all-pairs"],
        &["cover", "--nmin", "1", "--nmax", "6"],
        &["tailsum", "--psi", "pow:4", "--g", "pow:1/2", "--nmin", "1", "--nmax", "8"],
        &["series", "--psi", "pow:4", "--g", "pow:3/5", "--qmax", "100000"],
        &["dimension", "--nmin", "6", "--nmax", "8"],
        &["delta", "--a2", "5", "--a1", "-3", "--a0", "0", "--n", "2"],
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (i, args) in runs.iter().enumerate() {
        let mut seen = Vec::new();
        for threads in [1, 4] {
            let dir = tmp.path().join(format!("{i}-{threads}"));
            let code = run_cli(args, threads, &dir)?;
            if code != 0 {
                return Err(format!("{args:?} --threads {threads} exited {code}"));
            }
            seen.push(outputs(&dir));
        }
        if seen[0] != seen[1] {
            return Err(format!("{args:?}: outputs differ between 1 and 4 threads"));
        }
        files += seen[0].len();
    }
    Ok(format!("{} commands, {files} output files byte-identical for threads 1 and 4", runs.len()))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [(&str, fn() -> Check); 10] = [
        ("measure bound 16·ψ(2^n), n = 2..6", measure_bound),
        ("derivative bounds 1 <= D <= 100·4^n, n = 0..6", derivative_bounds),
        ("inclusion chain σ1 ⊆ σ2 ⊆ Δ1, n = n0..6", inclusion_chain),
        ("chop count <= 640·2^n, n = n0..6", chop_count),
        ("repeated-root parameter window, n = 1..8", repeated_params),
        ("complex-root emptiness from n_c <= 8", complex_emptiness),
        ("series sign rule and log cascade", series_rule),
        ("tail sums for τ = 4", tail_behaviour),
        ("dimension estimate for τ = 4", dimension_estimate),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
