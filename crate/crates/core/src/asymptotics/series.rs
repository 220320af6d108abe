//! Convergence of `Σ g(ψ(q)/q)·q²` for power × iterated-log families.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Enclosure, Rational};
use crate::scale::{DimFnSpec, PreparedDimFn, PsiSpec, MAX_LOG_DEPTH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesClass {
    Convergent,
    Divergent,
    BoundaryUndecided,
}

impl SeriesClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeriesClass::Convergent => "convergent",
            SeriesClass::Divergent => "divergent",
            SeriesClass::BoundaryUndecided => "boundary-undecided",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesOptions {
    /// Largest `q` in the numerical partial sums.
    pub q_max: u64,
    /// Iterated-log levels the exact rule may inspect.
    pub max_depth: usize,
    pub condensation_base: u32,
    pub condensation_levels: u32,
    /// Constant factor applied to ψ in the numerical sums only.
    pub psi_scale: Rational,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions {
            q_max: 1_000_000,
            max_depth: MAX_LOG_DEPTH,
            condensation_base: 2,
            condensation_levels: 12,
            psi_scale: Rational::one(),
        }
    }
}

/// Asymptotic shape of the general term: `q^power · Π_i (log_i q)^log_exponents[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermShape {
    pub power: Rational,
    pub log_exponents: Vec<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub classification: SeriesClass,
    pub exact_rule_applied: bool,
    pub shape: TermShape,
    /// `(Q, Σ_{q0 <= q <= Q} term(q))` at powers of ten and at `q_max`.
    pub partial_sums: Vec<(u64, Enclosure)>,
    /// `term(q_max)`, the last increment of the partial sums.
    pub last_increment: Option<Enclosure>,
    /// Least-squares slope of `ln S(Q)` against `ln Q`.
    pub growth_exponent: Option<f64>,
    pub condensation_ratio: Vec<(u32, Enclosure)>,
}

/// Exponents of `g(ψ(q)/q)·q²` up to bounded factors.
///
/// With `r = ψ(q)/q`, `log_1(1/r) ~ (τ+1)·log q` and `log_i(1/r) ~ log_i q` for `i >= 2`,
/// so the `β` of `g` carry over unchanged.
pub fn term_shape(psi: &PsiSpec, g: &DimFnSpec) -> Result<TermShape> {
    let tau = psi.effective_tau();
    let decay = &tau + &Rational::one();
    if !decay.is_positive() {
        return Err(Error::Domain(format!("psi(q)/q does not tend to 0 for tau = {tau}")));
    }
    let power = Rational::from(2) - &g.s * &decay;
    let depth = psi.depth().max(g.depth());
    let mut logs = vec![Rational::zero(); depth];
    for (i, a) in psi.alphas.iter().enumerate() {
        logs[i] = &logs[i] - &(&g.s * a);
    }
    if psi.depth() > 0 {
        let t = psi.depth() - 1;
        logs[t] = &logs[t] + &(&g.s * &psi.eps);
    }
    for (i, b) in g.betas.iter().enumerate() {
        logs[i] = &logs[i] + b;
    }
    Ok(TermShape { power, log_exponents: logs })
}

/// Iterated Bertrand rule on a term shape.
pub fn bertrand(shape: &TermShape, max_depth: usize) -> SeriesClass {
    let minus_one = -Rational::one();
    let decide = |e: &Rational| match e.cmp(&minus_one) {
        std::cmp::Ordering::Less => Some(SeriesClass::Convergent),
        std::cmp::Ordering::Greater => Some(SeriesClass::Divergent),
        std::cmp::Ordering::Equal => None,
    };
    if let Some(c) = decide(&shape.power) {
        return c;
    }
    for (i, e) in shape.log_exponents.iter().enumerate() {
        if i >= max_depth {
            return SeriesClass::BoundaryUndecided;
        }
        if let Some(c) = decide(e) {
            return c;
        }
    }
    // every exponent sits at -1; the next level has exponent 0
    SeriesClass::Divergent
}

/// The general term `c·ψ(q)` fed to `g`, times `q²`, for integer `q`.
struct Term {
    psi: PsiSpec,
    g: PreparedDimFn,
    ln_scale: Enclosure,
}

impl Term {
    fn new(psi: &PsiSpec, g: &DimFnSpec, scale: &Rational) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::Domain(format!("psi scale must be positive, got {scale}")));
        }
        Ok(Term { psi: psi.clone(), g: g.prepare(), ln_scale: scale.enclose().ln() })
    }

    fn arg(&self, q: f64) -> Result<Enclosure> {
        let lnq = Enclosure::point(q).ln();
        Ok((self.psi.ln_at(Enclosure::point(q))? + self.ln_scale - lnq).exp())
    }

    fn at(&self, q: f64) -> Result<Enclosure> {
        let lnq = Enclosure::point(q).ln();
        Ok((self.g.ln_at(self.arg(q)?)? + lnq.scale(2.0)).exp())
    }

    fn g_of_arg(&self, q: f64) -> Result<Enclosure> {
        self.g.eval_at(self.arg(q)?)
    }

    /// Whether `q` is inside both domains.
    fn defined(&self, q: f64) -> bool {
        self.at(q).is_ok()
    }

    /// First integer `q >= 1` from which on the term is defined.
    fn start(&self) -> u64 {
        let mut q = (self.psi.q_min().ceil() as u64).max(1);
        while !self.defined(q as f64) {
            q = if q < 16 { q + 1 } else { q + q / 8 };
            if q > 1 << 50 {
                break;
            }
        }
        q
    }
}

fn checkpoints(q_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(10u64), |q| q.checked_mul(10)).take_while(|&q| q < q_max).collect();
    out.push(q_max);
    out
}

/// Least-squares slope through `(x, y)`; `None` with fewer than two distinct `x`.
pub fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

fn partial_sums(term: &Term, q_max: u64) -> Result<(Vec<(u64, Enclosure)>, Option<Enclosure>)> {
    let q0 = term.start();
    if q0 > q_max {
        return Ok((Vec::new(), None));
    }
    let mut out = Vec::new();
    let mut acc = Enclosure::zero();
    let mut last = None;
    let mut q = q0;
    for cp in checkpoints(q_max) {
        if cp < q0 {
            continue;
        }
        while q <= cp {
            let v = term.at(q as f64)?;
            acc = acc + v;
            last = Some(v);
            q += 1;
        }
        out.push((cp, acc));
    }
    Ok((out, last))
}

pub fn classify_series(psi: &PsiSpec, g: &DimFnSpec, opts: &SeriesOptions) -> Result<SeriesReport> {
    psi.validate()?;
    g.validate()?;
    let shape = term_shape(psi, g)?;
    let classification = bertrand(&shape, opts.max_depth);
    let term = Term::new(psi, g, &opts.psi_scale)?;
    let (partial_sums, last_increment) = partial_sums(&term, opts.q_max)?;
    let pts: Vec<(f64, f64)> =
        partial_sums.iter().filter(|(_, s)| s.mid() > 0.0).map(|(q, s)| ((*q as f64).ln(), s.mid().ln())).collect();
    let growth_exponent = ls_slope(&pts);
    let condensation_ratio = condensation_rows(&term, opts.condensation_base, opts.condensation_levels)?
        .into_iter()
        .map(|r| (r.n, r.ratio))
        .collect();
    Ok(SeriesReport {
        classification,
        exact_rule_applied: classification != SeriesClass::BoundaryUndecided,
        shape,
        partial_sums,
        last_increment,
        growth_exponent,
        condensation_ratio,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CondensationRow {
    pub n: u32,
    /// `Σ_{a^n <= q < a^(n+1)} term(q) / (g(ψ(a^n)/a^n)·a^(3n))`.
    pub ratio: Enclosure,
    /// `(a-1)·g(ψ(a^(n+1))/a^(n+1)) / g(ψ(a^n)/a^n)`, a lower bound for the ratio.
    pub lower: Enclosure,
    /// `(a-1)·a²`, an upper bound for the ratio.
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CondensationReport {
    pub base: u32,
    pub rows: Vec<CondensationRow>,
    /// Smallest certified lower bound over the rows.
    pub c1: f64,
    pub c2: f64,
}

fn condensation_rows(term: &Term, a: u32, n_max: u32) -> Result<Vec<CondensationRow>> {
    if a < 2 {
        return Err(Error::Invalid(format!("condensation base must be at least 2, got {a}")));
    }
    let a64 = a as u64;
    let q0 = term.start();
    let mut rows = Vec::new();
    for n in 0..=n_max {
        let Some(lo) = a64.checked_pow(n) else { break };
        let Some(hi) = lo.checked_mul(a64) else { break };
        if lo < q0 {
            continue;
        }
        let mut block = Enclosure::zero();
        for q in lo..hi {
            block = block + term.at(q as f64)?;
        }
        let g_lo = term.g_of_arg(lo as f64)?;
        let g_hi = term.g_of_arg(hi as f64)?;
        let cube = Enclosure::point(lo as f64).powf(3.0);
        let ratio = block / (g_lo * cube);
        let lower = (g_hi / g_lo).scale((a - 1) as f64);
        rows.push(CondensationRow { n, ratio, lower, upper: ((a - 1) * a * a) as f64 });
    }
    Ok(rows)
}

/// Blocked partial sums against the condensed terms `g(ψ(a^n)/a^n)·a^(3n)`.
pub fn condensation_compare(psi: &PsiSpec, g: &DimFnSpec, a: u32, n_max: u32) -> Result<CondensationReport> {
    let term = Term::new(psi, g, &Rational::one())?;
    let rows = condensation_rows(&term, a, n_max)?;
    let c1 = rows.iter().map(|r| r.lower.lo).fold(f64::INFINITY, f64::min);
    let c2 = ((a - 1) * a * a) as f64;
    Ok(CondensationReport { base: a, rows, c1, c2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn psi_pow(tau: Rational) -> PsiSpec {
        PsiSpec::power(tau).unwrap()
    }

    fn g_pow(s: Rational) -> DimFnSpec {
        DimFnSpec::power(s).unwrap()
    }

    fn quick() -> SeriesOptions {
        SeriesOptions { q_max: 10_000, condensation_levels: 8, ..SeriesOptions::default() }
    }

    #[test]
    fn pure_power_examples() {
        let rep = classify_series(&psi_pow(r(4, 1)), &g_pow(r(7, 10)), &quick()).unwrap();
        assert_eq!(rep.shape.power, r(-3, 2));
        assert_eq!(rep.classification, SeriesClass::Convergent);
        assert!(rep.exact_rule_applied);

        let rep = classify_series(&psi_pow(r(2, 1)), &g_pow(r(1, 1)), &quick()).unwrap();
        assert_eq!(rep.shape.power, r(-1, 1));
        assert_eq!(rep.classification, SeriesClass::Divergent);
        // harmonic: S(10^k) - S(10^(k-1)) ≈ ln 10
        let s = &rep.partial_sums;
        let step = s[s.len() - 1].1.mid() - s[s.len() - 2].1.mid();
        assert!((step - 10f64.ln()).abs() < 1e-3, "{step}");

        let rep = classify_series(&psi_pow(r(4, 1)), &g_pow(r(1, 2)), &quick()).unwrap();
        assert_eq!(rep.shape.power, r(-1, 2));
        assert_eq!(rep.classification, SeriesClass::Divergent);
        let k = rep.growth_exponent.unwrap();
        assert!((k - 0.5).abs() < 0.05, "{k}");
    }

    #[test]
    fn bertrand_cascade() {
        let sh = |p: Rational, logs: Vec<Rational>| TermShape { power: p, log_exponents: logs };
        assert_eq!(bertrand(&sh(r(-1, 1), vec![]), 3), SeriesClass::Divergent);
        assert_eq!(bertrand(&sh(r(-1, 1), vec![r(-2, 1)]), 3), SeriesClass::Convergent);
        assert_eq!(bertrand(&sh(r(-1, 1), vec![r(-1, 1), r(-3, 2)]), 3), SeriesClass::Convergent);
        assert_eq!(bertrand(&sh(r(-1, 1), vec![r(-1, 1), r(-1, 2)]), 3), SeriesClass::Divergent);
        assert_eq!(bertrand(&sh(r(-1, 1), vec![r(-1, 1), r(-1, 1)]), 3), SeriesClass::Divergent);
        assert_eq!(bertrand(&sh(r(-1, 1), vec![r(-1, 1), r(-2, 1)]), 1), SeriesClass::BoundaryUndecided);
        assert_eq!(bertrand(&sh(r(-9, 10), vec![r(-5, 1)]), 0), SeriesClass::Divergent);
    }

    #[test]
    fn log_corrected_boundary() {
        // ψ = q^-4, g = r^(3/5)·log(1/r)^β: term ~ q^-1·(log q)^β
        let psi = psi_pow(r(4, 1));
        for (beta, want) in [(r(-2, 1), SeriesClass::Convergent), (r(-1, 1), SeriesClass::Divergent), (r(0, 1), SeriesClass::Divergent)]
        {
            let g = DimFnSpec::new(r(3, 5), vec![beta.clone()]).unwrap();
            let rep = classify_series(&psi, &g, &quick()).unwrap();
            assert_eq!(rep.classification, want, "beta = {beta}");
            assert_eq!(rep.shape.log_exponents, vec![beta]);
        }
        // log factors of ψ enter with weight s
        let psi = PsiSpec::new(r(4, 1), vec![r(5, 3)], r(0, 1)).unwrap();
        let shape = term_shape(&psi, &g_pow(r(3, 5))).unwrap();
        assert_eq!(shape, TermShape { power: r(-1, 1), log_exponents: vec![r(-1, 1)] });
        assert_eq!(bertrand(&shape, 3), SeriesClass::Divergent);
    }

    #[test]
    fn epsilon_pair_at_critical_g() {
        // ψ_ε = q^-4·(log q)^ε against g = r^(3/5)·log(1/r)^-1: log exponent -1 + 3ε/5
        let g = DimFnSpec::new(r(3, 5), vec![r(-1, 1)]).unwrap();
        let class = |eps: Rational| {
            let psi = PsiSpec::new(r(4, 1), vec![r(0, 1)], eps).unwrap();
            classify_series(&psi, &g, &quick()).unwrap().classification
        };
        assert_eq!(class(r(0, 1)), SeriesClass::Divergent);
        assert_eq!(class(r(-1, 2)), SeriesClass::Convergent);
        assert_eq!(class(r(1, 2)), SeriesClass::Divergent);
    }

    #[test]
    fn partial_sums_match_direct_sum() {
        // Σ q^2·(q^-4)^(7/10) = Σ q^-1.5 up to 10^4, summed independently in f64
        let rep = classify_series(&psi_pow(r(3, 1)), &g_pow(r(7, 10)), &quick()).unwrap();
        let direct: f64 = (1..=10_000u64).map(|q| (q as f64).powf(2.0 - 0.7 * 4.0)).sum();
        let last = rep.partial_sums.last().unwrap();
        assert_eq!(last.0, 10_000);
        assert!((last.1.mid() / direct - 1.0).abs() < 1e-12);
        assert!(last.1.width() < 1e-9 * direct);
        let inc = rep.last_increment.unwrap().mid();
        assert!((inc - 10_000f64.powf(-0.8)).abs() < 1e-15);
    }

    #[test]
    fn psi_scale_does_not_change_class() {
        for c in [r(1, 2), r(2, 1)] {
            let opts = SeriesOptions { psi_scale: c, ..quick() };
            for (tau, s) in [(r(4, 1), r(7, 10)), (r(2, 1), r(1, 1)), (r(3, 1), r(1, 2))] {
                let base = classify_series(&psi_pow(tau.clone()), &g_pow(s.clone()), &quick()).unwrap();
                let scaled = classify_series(&psi_pow(tau), &g_pow(s), &opts).unwrap();
                assert_eq!(base.classification, scaled.classification);
                let ratio = scaled.partial_sums.last().unwrap().1.mid() / base.partial_sums.last().unwrap().1.mid();
                assert!(ratio > 0.0 && ratio.is_finite());
            }
        }
    }

    #[test]
    fn condensation_examples() {
        let rep = condensation_compare(&psi_pow(r(3, 1)), &g_pow(r(1, 1)), 2, 12).unwrap();
        assert_eq!(rep.rows.len(), 13);
        for row in &rep.rows {
            assert!(row.ratio.lo >= 1.0 / 16.0 && row.ratio.hi <= 16.0, "n={} {:?}", row.n, row.ratio);
            assert!(row.lower.lo <= row.ratio.lo && row.ratio.hi <= row.upper);
        }
        assert!((rep.c1 - 1.0 / 16.0).abs() < 1e-12);

        // q^-2 summed over [2^n, 2^(n+1)) against 2^-n: tends to 1/2
        let rep = condensation_compare(&psi_pow(r(3, 1)), &g_pow(r(1, 1)), 2, 12).unwrap();
        let last = rep.rows.last().unwrap().ratio.mid();
        let direct: f64 = (4096u64..8192).map(|q| (q as f64).powi(-2)).sum::<f64>() * 4096.0;
        assert!((last - direct).abs() < 1e-12);

        let psi = PsiSpec::new(r(3, 1), vec![r(2, 1)], r(0, 1)).unwrap();
        let rep = condensation_compare(&psi, &g_pow(r(9, 10)), 2, 12).unwrap();
        assert_eq!(rep.rows.first().unwrap().n, 2);
        for row in &rep.rows {
            assert!(row.ratio.lo >= rep.c1 && row.ratio.hi <= rep.c2, "n={} {:?}", row.n, row.ratio);
        }
        assert!(condensation_compare(&psi, &g_pow(r(9, 10)), 1, 4).is_err());
    }

    #[test]
    fn invalid_specs_are_domain_errors() {
        let psi = PsiSpec { tau: r(-2, 1), alphas: vec![], eps: r(0, 1) };
        assert!(matches!(classify_series(&psi, &g_pow(r(1, 2)), &quick()), Err(Error::Domain(_))));
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!((ls_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        assert!(ls_slope(&pts[..1]).is_none());
    }
}
