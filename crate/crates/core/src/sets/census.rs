//! Per-level counts of block members by root type, with the structural checks
//! that hold for every member meeting the threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::exact::Enclosure;
use crate::poly::{classify, deriv_bound_check, DyadicBlock, IntegerQuadratic};
use crate::scale::PsiSpec;

use super::fast::{inclusion_certain, nonempty_a0, pair_sets, FastThreshold};
use super::{inclusion_check_at, lemma1_report, pair_union, LemmaOneReport, Threshold};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LevelCensus {
    pub n: u32,
    pub pairs: u64,
    pub triples: u64,
    pub repeated: u64,
    pub distinct_real: u64,
    pub complex: u64,
    pub nonempty_repeated: u64,
    pub nonempty_distinct: u64,
    pub nonempty_complex: u64,
    /// Nonempty distinct-real members outside `1 <= D <= 100·4^n`.
    pub deriv_violations: u64,
    /// Nonempty `k = 1` repeated members with `u` or `v` outside the parameter window.
    pub repeated_param_violations: u64,
}

impl LevelCensus {
    fn add(&mut self, o: &LevelCensus) {
        self.pairs += o.pairs;
        self.triples += o.triples;
        self.repeated += o.repeated;
        self.distinct_real += o.distinct_real;
        self.complex += o.complex;
        self.nonempty_repeated += o.nonempty_repeated;
        self.nonempty_distinct += o.nonempty_distinct;
        self.nonempty_complex += o.nonempty_complex;
        self.deriv_violations += o.deriv_violations;
        self.repeated_param_violations += o.repeated_param_violations;
    }
}

/// `2^((n-3)/2) < u < 2^((n+1)/2)` and `-1 < v <= 1 + u`.
pub fn repeated_params_ok(u: i64, v: i64, n: u32) -> bool {
    let u2 = (u as i128) * (u as i128);
    8 * u2 > 1i128 << n && u2 < 1i128 << (n + 1) && v > -1 && v <= 1 + u
}

/// Integers `a0` in `lo..hi` with `a1² - 4 a2 a0` negative, zero, positive.
fn split_by_discriminant(a2: i64, a1: i64, lo: i64, hi: i64) -> (u64, u64, u64) {
    if lo >= hi {
        return (0, 0, 0);
    }
    let sq = a1 as i128 * a1 as i128;
    let den = 4 * a2 as i128;
    // D > 0  <=>  a0 < a1²/(4 a2);  D = 0  <=>  a0 = a1²/(4 a2)
    let zero_at = (sq % den == 0).then(|| (sq / den) as i64);
    let first_nonpos = sq.div_euclid(den) as i64 + if sq % den == 0 { 0 } else { 1 };
    let pos = (first_nonpos.clamp(lo, hi) - lo) as u64;
    let zero = zero_at.is_some_and(|z| (lo..hi).contains(&z)) as u64;
    let total = (hi - lo) as u64;
    (total - pos - zero, zero, pos)
}

fn pair_census(a2: i64, a1: i64, n: u32, t: &Threshold) -> LevelCensus {
    let block = DyadicBlock::new(n);
    let bound = block.a0_bound();
    let (neg, zero, pos) = split_by_discriminant(a2, a1, -bound + 1, bound);
    let r = nonempty_a0(a2, a1, n, t);
    let (ne_neg, ne_zero, ne_pos) = split_by_discriminant(a2, a1, r.start, r.end);
    let mut c = LevelCensus {
        n,
        pairs: 1,
        triples: neg + zero + pos,
        repeated: zero,
        distinct_real: pos,
        complex: neg,
        nonempty_repeated: ne_zero,
        nonempty_distinct: ne_pos,
        nonempty_complex: ne_neg,
        ..LevelCensus::default()
    };
    for a0 in r {
        let f = IntegerQuadratic::new(a2, a1, a0).expect("a2 > 0");
        let d = f.discriminant();
        if d > 0 && !deriv_bound_check(&f, n) {
            c.deriv_violations += 1;
        }
        if d == 0 {
            let p = classify(&f).repeated.expect("D = 0");
            if p.k == 1 && !repeated_params_ok(p.u, p.v, n) {
                c.repeated_param_violations += 1;
            }
        }
    }
    c
}

pub fn level_census(n: u32, psi: &PsiSpec) -> Result<LevelCensus> {
    let t = Threshold::for_level(psi, n)?;
    let pairs: Vec<(i64, i64)> = DyadicBlock::new(n).pairs().collect();
    let parts: Vec<LevelCensus> = pairs.par_iter().map(|&(a2, a1)| pair_census(a2, a1, n, &t)).collect();
    let mut total = LevelCensus { n, ..LevelCensus::default() };
    for p in &parts {
        total.add(p);
    }
    Ok(total)
}

/// Measure bound for every pair of block `n`, certified on the float path and
/// recomputed exactly when the float enclosure does not settle it.
pub fn lemma1_level(n: u32, psi: &PsiSpec) -> Result<Vec<LemmaOneReport>> {
    let t = Threshold::for_level(psi, n)?;
    let ft = FastThreshold::new(t.clone());
    let pairs: Vec<(i64, i64)> = DyadicBlock::new(n).pairs().collect();
    Ok(pairs
        .par_iter()
        .map(|&(a2, a1)| {
            let s = pair_sets(a2, a1, n, &ft);
            let rep = lemma1_report(a2, a1, n, t.value(), s.measure, s.components.len());
            if rep.passed || s.exact_fallback {
                return rep;
            }
            let u = pair_union(a2, a1, n, &t);
            lemma1_report(a2, a1, n, t.value(), u.measure(), u.len())
        })
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InclusionReport {
    pub n: u32,
    /// Distinct-real members checked.
    pub checked: u64,
    /// Members the float path could not settle, rechecked exactly.
    pub exact_checks: u64,
    pub violations: Vec<(i64, i64, i64)>,
}

/// Inclusion chain for every distinct-real member of block `n`.
pub fn inclusion_level(n: u32, psi: &PsiSpec) -> Result<InclusionReport> {
    let t = FastThreshold::new(Threshold::for_level(psi, n)?);
    let block = DyadicBlock::new(n);
    let pairs: Vec<(i64, i64)> = block.pairs().collect();
    let parts: Vec<Result<InclusionReport>> = pairs
        .par_iter()
        .map(|&(a2, a1)| {
            let mut r = InclusionReport { n, ..InclusionReport::default() };
            for a0 in block.a0_values() {
                let f = IntegerQuadratic::new(a2, a1, a0).expect("a2 > 0");
                if f.discriminant() <= 0 {
                    continue;
                }
                r.checked += 1;
                if inclusion_certain(&f, n, &t) {
                    continue;
                }
                r.exact_checks += 1;
                if !inclusion_check_at(&f, n, t.exact.value())? {
                    r.violations.push((a2, a1, a0));
                }
            }
            Ok(r)
        })
        .collect();
    let mut total = InclusionReport { n, ..InclusionReport::default() };
    for p in parts {
        let p = p?;
        total.checked += p.checked;
        total.exact_checks += p.exact_checks;
        total.violations.extend(p.violations);
    }
    Ok(total)
}

/// Sum of the certified measures, handy as a level fingerprint.
pub fn total_measure(reports: &[LemmaOneReport]) -> Enclosure {
    Enclosure::sum(reports.iter().map(|r| &r.measure))
}
