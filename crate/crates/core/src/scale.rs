//! Approximating functions ψ and dimension functions g as power × iterated-log families.
//!
//! ```text
//! ψ(q) = q^(-τ) · Π_{i=1..t} (log_i q)^(-α_i) · (log_t q)^ε
//! g(r) = r^s · Π_{i=1..t} (log_i (1/r))^(β_i)
//! ```
//!
//! `log_i` is the `i`-fold iterated natural logarithm and `log_0 x = x`, so with
//! no log exponents `ε` simply shifts the power. Evaluation is only defined
//! where every iterated log exceeds 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Enclosure, Rational};

/// More iterated logs would need thresholds beyond `e^e^e^e`, which overflows f64.
pub const MAX_LOG_DEPTH: usize = 3;

/// `e↑↑k`: the point where the `k`-fold iterated log reaches 1.
fn tower(k: usize) -> f64 {
    (0..k).fold(1.0, |acc: f64, _| acc.exp())
}

/// Margin applied to domain thresholds computed in floating point.
const DOMAIN_MARGIN: f64 = 1e-12;

/// Iterated logs `log_1 x, …, log_t x` as enclosures.
fn iterated_logs(x: Enclosure, depth: usize) -> Result<Vec<Enclosure>> {
    let mut out = Vec::with_capacity(depth);
    let mut cur = x;
    for i in 0..depth {
        if cur.lo <= 0.0 {
            return Err(Error::Domain(format!("log_{} argument not positive", i + 1)));
        }
        cur = cur.ln();
        out.push(cur);
    }
    Ok(out)
}

fn rational_enc(r: &Rational) -> Enclosure {
    r.enclose()
}

/// Approximating function family ψ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiSpec {
    pub tau: Rational,
    #[serde(default)]
    pub alphas: Vec<Rational>,
    #[serde(default)]
    pub eps: Rational,
}

/// Dimension function family g.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimFnSpec {
    pub s: Rational,
    #[serde(default)]
    pub betas: Vec<Rational>,
}

impl PsiSpec {
    pub fn power(tau: Rational) -> Result<Self> {
        Self::new(tau, Vec::new(), Rational::zero())
    }

    pub fn new(tau: Rational, alphas: Vec<Rational>, eps: Rational) -> Result<Self> {
        let spec = PsiSpec { tau, alphas, eps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.effective_tau().is_positive() {
            return Err(Error::Domain(format!("psi.tau must be positive, got {}", self.tau)));
        }
        if self.alphas.len() > MAX_LOG_DEPTH {
            return Err(Error::Domain(format!(
                "psi.alphas: at most {MAX_LOG_DEPTH} iterated logs supported, got {}",
                self.alphas.len()
            )));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_pure_power(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Power exponent after folding `ε` in when there are no logs.
    pub fn effective_tau(&self) -> Rational {
        if self.alphas.is_empty() {
            &self.tau - &self.eps
        } else {
            self.tau.clone()
        }
    }

    /// Evaluation requires `q > q_min`; zero for pure powers.
    pub fn q_min(&self) -> f64 {
        if self.alphas.is_empty() { 0.0 } else { tower(self.depth()) }
    }

    fn check_domain(&self, q: &Enclosure) -> Result<()> {
        let ok = if self.alphas.is_empty() {
            q.lo > 0.0
        } else {
            q.lo > self.q_min() * (1.0 + DOMAIN_MARGIN)
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("psi evaluated at {:?}, needs q > {}", q, self.q_min())))
        }
    }

    /// Exact value when ψ is a pure power and `q^(-τ)` is rational.
    pub fn exact(&self, q: &Rational) -> Option<Rational> {
        if !self.is_pure_power() || !q.is_positive() {
            return None;
        }
        exact_power(q, &(-self.effective_tau()))
    }

    /// `ln ψ(q)` as an enclosure.
    pub fn ln_at(&self, q: Enclosure) -> Result<Enclosure> {
        self.check_domain(&q)?;
        let lnq = q.ln();
        let mut acc = -(lnq * rational_enc(&self.tau));
        if self.alphas.is_empty() {
            if !self.eps.is_zero() {
                acc = acc + lnq * rational_enc(&self.eps);
            }
            return Ok(acc);
        }
        let logs = iterated_logs(q, self.depth())?;
        for (i, alpha) in self.alphas.iter().enumerate() {
            if !alpha.is_zero() {
                acc = acc - logs[i].ln() * rational_enc(alpha);
            }
        }
        if !self.eps.is_zero() {
            acc = acc + logs[self.depth() - 1].ln() * rational_enc(&self.eps);
        }
        Ok(acc)
    }

    /// Certified enclosure of `ψ(q)` at an enclosed argument.
    pub fn eval_at(&self, q: Enclosure) -> Result<Enclosure> {
        Ok(self.ln_at(q)?.exp())
    }

    /// Threshold used for the solution sets at dyadic level `n`: exactly `ψ(2^n)`
    /// when rational, otherwise the upper end of its enclosure (a superset cover).
    pub fn level_threshold(&self, n: u32) -> Result<Rational> {
        let q = Rational::pow2(n as i64);
        if let Some(t) = self.exact(&q) {
            return Ok(t);
        }
        let e = psi_eval(self, &q)?;
        Ok(Rational::from_f64(e.hi).expect("finite enclosure"))
    }
}

impl DimFnSpec {
    pub fn power(s: Rational) -> Result<Self> {
        Self::new(s, Vec::new())
    }

    pub fn new(s: Rational, betas: Vec<Rational>) -> Result<Self> {
        let spec = DimFnSpec { s, betas };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_positive() {
            return Err(Error::Domain(format!("g.s must be positive, got {}", self.s)));
        }
        if self.betas.len() > MAX_LOG_DEPTH {
            return Err(Error::Domain(format!(
                "g.betas: at most {MAX_LOG_DEPTH} iterated logs supported, got {}",
                self.betas.len()
            )));
        }
        Ok(())
    }

    pub fn depth(&self) -> usize {
        self.betas.len()
    }

    pub fn is_pure_power(&self) -> bool {
        self.betas.is_empty()
    }

    /// Evaluation requires `0 < r < r_max`; `None` means unbounded.
    pub fn r_max(&self) -> Option<f64> {
        if self.betas.is_empty() { None } else { Some(1.0 / tower(self.depth())) }
    }

    fn check_domain(&self, r: &Enclosure) -> Result<()> {
        let ok = r.lo > 0.0 && self.r_max().is_none_or(|m| r.hi < m * (1.0 - DOMAIN_MARGIN));
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("g evaluated at {:?}, needs 0 < r < {:?}", r, self.r_max())))
        }
    }

    pub fn exact(&self, r: &Rational) -> Option<Rational> {
        if !self.is_pure_power() || !r.is_positive() {
            return None;
        }
        exact_power(r, &self.s)
    }

    pub fn ln_at(&self, r: Enclosure) -> Result<Enclosure> {
        self.prepare().ln_at(r)
    }

    pub fn eval_at(&self, r: Enclosure) -> Result<Enclosure> {
        self.prepare().eval_at(r)
    }

    /// Exponents converted to enclosures once, for repeated evaluation.
    pub fn prepare(&self) -> PreparedDimFn {
        PreparedDimFn {
            spec: self.clone(),
            s: rational_enc(&self.s),
            betas: self.betas.iter().map(rational_enc).collect(),
        }
    }
}

/// [`DimFnSpec`] with cached exponent enclosures.
#[derive(Clone, Debug)]
pub struct PreparedDimFn {
    spec: DimFnSpec,
    s: Enclosure,
    betas: Vec<Enclosure>,
}

impl PreparedDimFn {
    pub fn spec(&self) -> &DimFnSpec {
        &self.spec
    }

    pub fn ln_at(&self, r: Enclosure) -> Result<Enclosure> {
        self.spec.check_domain(&r)?;
        let mut acc = r.ln() * self.s;
        if !self.betas.is_empty() {
            let inv = Enclosure::point(1.0) / r;
            let logs = iterated_logs(inv, self.betas.len())?;
            for (i, beta) in self.betas.iter().enumerate() {
                if beta.lo != 0.0 || beta.hi != 0.0 {
                    acc = acc + logs[i].ln() * *beta;
                }
            }
        }
        Ok(acc)
    }

    pub fn eval_at(&self, r: Enclosure) -> Result<Enclosure> {
        if r.hi == 0.0 {
            return Ok(Enclosure::zero());
        }
        if r.lo <= 0.0 {
            // g(0) = 0 and g is increasing near 0
            let upper = self.eval_at(Enclosure::point(r.hi))?;
            return Ok(Enclosure::new(0.0, upper.hi));
        }
        if self.betas.is_empty() {
            // increasing in r: evaluate the endpoints separately to keep the enclosure tight
            let lo = Enclosure::point(r.lo).pow_enc(&self.s).lo;
            let hi = Enclosure::point(r.hi).pow_enc(&self.s).hi;
            return Ok(Enclosure::new(lo, hi));
        }
        Ok(self.ln_at(r)?.exp())
    }
}

/// `base^e` when it is rational: integer exponents, or a power-of-two base
/// with `k·e` integral.
fn exact_power(base: &Rational, e: &Rational) -> Option<Rational> {
    if e.is_integer() {
        let k = e.to_i64()?;
        return i32::try_from(k).ok().map(|k| base.pow(k));
    }
    let k = base.log2_exact()?;
    let prod = e * Rational::from(k);
    prod.to_i64().map(Rational::pow2)
}

/// Certified enclosure of `ψ(q)`; exact for pure powers at arguments where the
/// power is rational.
pub fn psi_eval(spec: &PsiSpec, q: &Rational) -> Result<Enclosure> {
    if !q.is_positive() {
        return Err(Error::Domain(format!("psi argument must be positive, got {q}")));
    }
    if let Some(v) = spec.exact(q) {
        return Ok(v.enclose());
    }
    spec.eval_at(q.enclose())
}

/// Certified enclosure of `g(r)`.
pub fn g_eval(spec: &DimFnSpec, r: &Rational) -> Result<Enclosure> {
    if !r.is_positive() {
        return Err(Error::Domain(format!("g argument must be positive, got {r}")));
    }
    if let Some(m) = spec.r_max() {
        if r.cmp_f64(m * (1.0 - DOMAIN_MARGIN)) != std::cmp::Ordering::Less {
            return Err(Error::Domain(format!("g evaluated at {r}, needs r < {m}")));
        }
    }
    if let Some(v) = spec.exact(r) {
        return Ok(v.enclose());
    }
    spec.eval_at(r.enclose())
}

/// Exponent window `x^s1 < g(x) < x^s2` for small `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthWindow {
    pub s1: Rational,
    pub s2: Rational,
}

impl GrowthWindow {
    pub fn new(s1: Rational, s2: Rational) -> Result<Self> {
        if !s1.is_positive() || !s2.is_positive() || s2 > Rational::one() {
            return Err(Error::Invalid(format!("growth window needs 0 < s1 and 0 < s2 <= 1, got ({s1}, {s2})")));
        }
        if Rational::from(2) * &s1 >= Rational::from(3) * &s2 {
            return Err(Error::Invalid(format!("growth window needs 2·s1 < 3·s2, got ({s1}, {s2})")));
        }
        Ok(GrowthWindow { s1, s2 })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthCheck {
    pub holds: bool,
    /// First grid point where the strict inequalities could not be certified.
    pub witness: Option<Rational>,
}

/// Certifies `x^s1 < g(x) < x^s2` at each grid point.
pub fn check_growth_window(spec: &DimFnSpec, window: &GrowthWindow, grid: &[Rational]) -> GrowthCheck {
    for x in grid {
        if !growth_holds_at(spec, window, x) {
            return GrowthCheck { holds: false, witness: Some(x.clone()) };
        }
    }
    GrowthCheck { holds: true, witness: None }
}

fn growth_holds_at(spec: &DimFnSpec, window: &GrowthWindow, x: &Rational) -> bool {
    if !x.is_positive() {
        return false;
    }
    // pure power at a power of two: compare exponents exactly
    if let (true, Some(k)) = (spec.is_pure_power(), x.log2_exact()) {
        let k = Rational::from(k);
        let lg = &spec.s * &k;
        return &window.s1 * &k < lg && lg < &window.s2 * &k;
    }
    let xe = x.enclose();
    if xe.lo <= 0.0 {
        return false;
    }
    let Ok(ln_g) = spec.ln_at(xe) else {
        return false;
    };
    let lnx = xe.ln();
    let lower = lnx * rational_enc(&window.s1);
    let upper = lnx * rational_enc(&window.s2);
    lower.certainly_lt(&ln_g) && ln_g.certainly_lt(&upper)
}

/// Default search cap for [`decay_threshold`].
pub const DECAY_CAP: u32 = 60;

/// Smallest `n0 <= cap` with `ψ(a^n) < a^(-2n)` certified for every `n` in `[n0, cap]`.
pub fn decay_threshold(psi: &PsiSpec, base: u32, cap: u32) -> Result<u32> {
    if base < 2 {
        return Err(Error::Invalid(format!("decay base must be >= 2, got {base}")));
    }
    let a = Rational::from(base as i64);
    let holds = |n: u32| -> bool {
        let an = a.pow(n as i32);
        let bound = an.pow(-2);
        if let Some(v) = psi.exact(&an) {
            return v < bound;
        }
        match psi_eval(psi, &an) {
            Ok(e) => e.certainly_lt(&bound.enclose()),
            Err(_) => false,
        }
    };
    if !holds(cap) {
        return Err(Error::NotFound { what: "psi(a^n) < a^(-2n)".into(), cap });
    }
    let mut n0 = cap;
    while n0 > 0 && holds(n0 - 1) {
        n0 -= 1;
    }
    Ok(n0)
}

/// Midpoints nonincreasing along an increasing grid (relative slack `1e-12`).
pub fn check_psi_decreasing(spec: &PsiSpec, grid: &[Rational]) -> Result<bool> {
    let vals: Vec<Enclosure> = grid.iter().map(|q| psi_eval(spec, q)).collect::<Result<_>>()?;
    Ok(vals.windows(2).all(|w| w[1].mid() <= w[0].mid() * (1.0 + 1e-12)))
}

/// Midpoints nondecreasing along an increasing grid.
pub fn check_g_increasing(spec: &DimFnSpec, grid: &[Rational]) -> Result<bool> {
    let vals: Vec<Enclosure> = grid.iter().map(|r| g_eval(spec, r)).collect::<Result<_>>()?;
    Ok(vals.windows(2).all(|w| w[1].mid() >= w[0].mid() * (1.0 - 1e-12)))
}

// ---------------------------------------------------------------------------
// Text forms

fn parse_list(s: &str) -> Result<Vec<Rational>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| x.parse()).collect()
}

fn join_list(xs: &[Rational]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Compact grammar: `pow:<tau>` or `powlog:<tau>;<a1,a2,...>;<eps>`.
impl FromStr for PsiSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("pow:") {
            return PsiSpec::power(rest.parse()?);
        }
        if let Some(rest) = s.strip_prefix("powlog:") {
            let parts: Vec<&str> = rest.split(';').collect();
            if !(1..=3).contains(&parts.len()) {
                return Err(Error::Parse(format!("psi spec {s:?}: expected powlog:<tau>;<alphas>;<eps>")));
            }
            let tau = parts[0].parse()?;
            let alphas = parts.get(1).map_or(Ok(Vec::new()), |p| parse_list(p))?;
            let eps = parts.get(2).map_or(Ok(Rational::zero()), |p| p.parse())?;
            return PsiSpec::new(tau, alphas, eps);
        }
        Err(Error::Parse(format!("psi spec {s:?}: expected pow:<tau> or powlog:<tau>;<alphas>;<eps>")))
    }
}

/// Compact grammar: `pow:<s>` or `powlog:<s>;<b1,b2,...>`.
impl FromStr for DimFnSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("pow:") {
            return DimFnSpec::power(rest.parse()?);
        }
        if let Some(rest) = s.strip_prefix("powlog:") {
            let parts: Vec<&str> = rest.split(';').collect();
            if !(1..=2).contains(&parts.len()) {
                return Err(Error::Parse(format!("g spec {s:?}: expected powlog:<s>;<betas>")));
            }
            let s_exp = parts[0].parse()?;
            let betas = parts.get(1).map_or(Ok(Vec::new()), |p| parse_list(p))?;
            return DimFnSpec::new(s_exp, betas);
        }
        Err(Error::Parse(format!("g spec {s:?}: expected pow:<s> or powlog:<s>;<betas>")))
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphas.is_empty() && self.eps.is_zero() {
            write!(f, "pow:{}", self.tau)
        } else {
            write!(f, "powlog:{};{};{}", self.tau, join_list(&self.alphas), self.eps)
        }
    }
}

impl fmt::Display for DimFnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.betas.is_empty() {
            write!(f, "pow:{}", self.s)
        } else {
            write!(f, "powlog:{};{}", self.s, join_list(&self.betas))
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PsiRepr {
    Text(String),
    Table {
        tau: Rational,
        #[serde(default)]
        alphas: Vec<Rational>,
        #[serde(default)]
        eps: Rational,
    },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DimFnRepr {
    Text(String),
    Table {
        s: Rational,
        #[serde(default)]
        betas: Vec<Rational>,
    },
}

/// Accepts either the compact string form or a `{ tau, alphas, eps }` table.
impl<'de> Deserialize<'de> for PsiSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = match PsiRepr::deserialize(d)? {
            PsiRepr::Text(s) => s.parse(),
            PsiRepr::Table { tau, alphas, eps } => PsiSpec::new(tau, alphas, eps),
        };
        spec.map_err(serde::de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for DimFnSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = match DimFnRepr::deserialize(d)? {
            DimFnRepr::Text(s) => s.parse(),
            DimFnRepr::Table { s, betas } => DimFnSpec::new(s, betas),
        };
        spec.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn dyadic_grid(ks: std::ops::RangeInclusive<i64>) -> Vec<Rational> {
        ks.map(|k| Rational::pow2(-k)).collect()
    }

    #[test]
    fn psi_exact_paths() {
        let psi = PsiSpec::power(r(2, 1)).unwrap();
        assert_eq!(psi_eval(&psi, &r(4, 1)).unwrap(), Enclosure::point(1.0 / 16.0));
        let psi3 = PsiSpec::power(r(3, 1)).unwrap();
        for n in 0..20 {
            let v = psi3.exact(&Rational::pow2(n)).unwrap();
            assert_eq!(v, Rational::pow2(-3 * n));
        }
        let half = PsiSpec::power(r(5, 2)).unwrap();
        assert_eq!(half.exact(&Rational::pow2(4)), Some(Rational::pow2(-10)));
        assert_eq!(half.exact(&Rational::pow2(3)), None);
    }

    #[test]
    fn psi_with_log_at_e_squared() {
        // ψ(q) = q^-3 / log q at q = e², oracle e^-6 / 2
        let psi = PsiSpec::new(r(3, 1), vec![r(1, 1)], r(0, 1)).unwrap();
        let q = Enclosure::point(2.0).exp();
        let v = psi.eval_at(q).unwrap();
        let oracle = (-6.0f64).exp() / 2.0;
        assert!(v.lo <= oracle * (1.0 + 1e-14) && oracle * (1.0 - 1e-14) <= v.hi, "{v:?}");
        assert!(v.width() < oracle * 1e-13);
    }

    #[test]
    fn psi_domain_errors() {
        let psi = PsiSpec::new(r(3, 1), vec![r(1, 1)], r(0, 1)).unwrap();
        assert!(matches!(psi_eval(&psi, &r(2, 1)), Err(Error::Domain(_))));
        assert!(psi_eval(&psi, &r(3, 1)).is_ok());
        assert!(PsiSpec::power(r(-1, 1)).is_err());
    }

    #[test]
    fn g_examples() {
        let id = DimFnSpec::power(r(1, 1)).unwrap();
        assert_eq!(g_eval(&id, &r(1, 8)).unwrap(), Enclosure::point(0.125));
        let g = DimFnSpec::power(r(3, 5)).unwrap();
        assert_eq!(g.exact(&Rational::pow2(-10)), Some(Rational::pow2(-6)));
        // g(r) = r^(1/2) log(1/r) at r = e^-4: oracle 4 e^-2
        let gl = DimFnSpec::new(r(1, 2), vec![r(1, 1)]).unwrap();
        let v = gl.eval_at(Enclosure::point(-4.0).exp()).unwrap();
        let oracle = 4.0 * (-2.0f64).exp();
        assert!((v.mid() - oracle).abs() < oracle * 1e-13, "{v:?}");
    }

    #[test]
    fn growth_window_examples() {
        let grid = dyadic_grid(4..=40);
        let g = DimFnSpec::power(r(3, 5)).unwrap();
        // x^s1 < x^(3/5) < x^s2 for x < 1 needs s2 < 3/5 < s1
        let w = GrowthWindow::new(r(7, 10), r(1, 2)).unwrap();
        assert!(check_growth_window(&g, &w, &grid).holds);
        let w = GrowthWindow::new(r(1, 2), r(7, 10)).unwrap();
        let res = check_growth_window(&g, &w, &grid);
        assert!(!res.holds);
        assert_eq!(res.witness, Some(Rational::pow2(-4)));

        let w = GrowthWindow::new(r(3, 5), r(1, 1)).unwrap();
        let res = check_growth_window(&g, &w, &grid);
        assert!(!res.holds);
        assert_eq!(res.witness, Some(Rational::pow2(-4)));

        // r·log(1/r) exceeds r^0.9 until log(1/r) > r^-0.1, i.e. r < e^-35.8;
        // the grid stops at 2^-40 ≈ e^-27.7, so the upper bound fails at once.
        let g = DimFnSpec::new(r(1, 1), vec![r(1, 1)]).unwrap();
        let w = GrowthWindow::new(r(1, 1), r(9, 10)).unwrap();
        let res = check_growth_window(&g, &w, &grid);
        let oracle_first_fail = (4..=40)
            .map(|k| 2f64.powi(-k))
            .find(|&x| !(x < x * (1.0 / x).ln() && x * (1.0 / x).ln() < x.powf(0.9)))
            .unwrap();
        assert!(!res.holds);
        assert_eq!(res.witness.unwrap().to_f64(), oracle_first_fail);
        // deep enough grid: the window does hold there
        let deep = dyadic_grid(60..=200);
        assert!(check_growth_window(&g, &w, &deep).holds);
    }

    #[test]
    fn growth_window_validation() {
        assert!(GrowthWindow::new(r(3, 2), r(1, 1)).is_err());
        assert!(GrowthWindow::new(r(1, 2), r(11, 10)).is_err());
    }

    #[test]
    fn decay_threshold_examples() {
        let cube = PsiSpec::power(r(3, 1)).unwrap();
        assert_eq!(decay_threshold(&cube, 2, DECAY_CAP).unwrap(), 1);
        let square = PsiSpec::power(r(2, 1)).unwrap();
        assert!(matches!(decay_threshold(&square, 2, DECAY_CAP), Err(Error::NotFound { .. })));
        // ψ(q) = q^-3 log q; oracle: first n (in domain q > e) with n ln2 < 2^n,
        // holding from there on
        let psi = PsiSpec::new(r(3, 1), vec![r(-1, 1)], r(0, 1)).unwrap();
        let oracle = (0..=DECAY_CAP)
            .rev()
            .take_while(|&n| {
                let q = 2f64.powi(n as i32);
                q > std::f64::consts::E && q.powi(-3) * q.ln() < q.powi(-2)
            })
            .last()
            .unwrap();
        assert_eq!(decay_threshold(&psi, 2, DECAY_CAP).unwrap(), oracle);
        assert!(oracle <= 5);
    }

    #[test]
    fn monotonicity_on_grids() {
        let psi = PsiSpec::new(r(3, 1), vec![r(1, 1), r(-2, 1)], r(1, 2)).unwrap();
        let qgrid: Vec<Rational> = (20..200).map(|k| Rational::from(k * 7)).collect();
        assert!(check_psi_decreasing(&psi, &qgrid).unwrap());
        // increasing only once log(1/r) > 10/3
        let g = DimFnSpec::new(r(3, 5), vec![r(2, 1)]).unwrap();
        assert!(!check_g_increasing(&g, &[Rational::new(1, 8), Rational::new(1, 4)]).unwrap());
        assert!(check_g_increasing(&g, &dyadic_grid(6..=60).into_iter().rev().collect::<Vec<_>>()).unwrap());
    }

    #[test]
    fn spec_text_roundtrip() {
        for s in ["pow:3", "powlog:3;1,-2;1/2", "powlog:5/2;1;0"] {
            let p: PsiSpec = s.parse().unwrap();
            assert_eq!(p.to_string().parse::<PsiSpec>().unwrap(), p);
        }
        let g: DimFnSpec = "powlog:3/5;1".parse().unwrap();
        assert_eq!(g.to_string(), "powlog:3/5;1");
        assert!("pow:-1".parse::<PsiSpec>().is_err());
        assert!("bogus".parse::<PsiSpec>().is_err());
        let from_table: PsiSpec = serde_json::from_str(r#"{"tau":"3","alphas":["1"],"eps":"0"}"#).unwrap();
        assert_eq!(from_table, "powlog:3;1;0".parse().unwrap());
        let from_text: PsiSpec = serde_json::from_str(r#""pow:4""#).unwrap();
        assert_eq!(from_text.tau, r(4, 1));
    }
}
