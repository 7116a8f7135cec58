//! Exponent calculus: decay rate `h(m, n, k)`, `tau`, `q(p)`, the admissible
//! sets `I_p` and `I'_p`, the threshold `n_p`, and the comparison with the
//! nondegenerate theory.

use crate::error::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Serialize a float, writing infinities as the strings `"inf"` / `"-inf"`.
pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

/// Deserialize a float that may be written as `"inf"`, `"infinity"` or `"-inf"`.
pub fn de_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            other => other.parse().map_err(serde::de::Error::custom),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IntervalKind {
    /// Target exponents `q` for `L^p -> L^q` bounds.
    Ip,
    /// Potential exponents `s` for `1 <= p <= 2`.
    IPrime,
    /// Potential exponents for `p > 2`, obtained from `I'_{p'}` by duality.
    IPrimeDual,
    /// Auxiliary interval, e.g. `(q(tau_1, p), p']`.
    Other,
}

/// An interval on the extended half-line with explicit endpoint flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub kind: IntervalKind,
    #[serde(serialize_with = "ser_f64")]
    pub lower: f64,
    pub lower_closed: bool,
    #[serde(serialize_with = "ser_f64")]
    pub upper: f64,
    pub upper_closed: bool,
    pub empty: bool,
    /// Set when a boundary convention was applied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Interval {
    pub fn new(kind: IntervalKind, lower: f64, lower_closed: bool, upper: f64, upper_closed: bool) -> Self {
        let empty = upper < lower || (upper == lower && !(lower_closed && upper_closed));
        Self {
            kind,
            lower,
            lower_closed,
            upper,
            upper_closed,
            empty,
            note: None,
        }
    }

    pub fn point(kind: IntervalKind, x: f64) -> Self {
        Self::new(kind, x, true, x, true)
    }

    pub fn empty(kind: IntervalKind) -> Self {
        Self {
            kind,
            lower: f64::NAN,
            lower_closed: false,
            upper: f64::NAN,
            upper_closed: false,
            empty: true,
            note: None,
        }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }

    pub fn contains(&self, x: f64) -> bool {
        if self.empty {
            return false;
        }
        let above = if self.lower_closed { x >= self.lower } else { x > self.lower };
        let below = if self.upper_closed { x <= self.upper } else { x < self.upper };
        above && below
    }

    pub fn is_singleton(&self) -> bool {
        !self.empty && self.lower == self.upper
    }

    /// Intersection with `[a, inf]` or `(a, inf]`.
    pub fn intersect_lower(&self, a: f64, closed: bool) -> Self {
        if self.empty {
            return self.clone();
        }
        let mut out = self.clone();
        if a > self.lower || (a == self.lower && !closed) {
            out.lower = a;
            out.lower_closed = closed;
        }
        out.empty = out.upper < out.lower || (out.upper == out.lower && !(out.lower_closed && out.upper_closed));
        out
    }

    /// `self` contains `other` and the two differ.
    pub fn properly_contains(&self, other: &Interval) -> bool {
        if other.empty {
            return !self.empty;
        }
        if self.empty {
            return false;
        }
        let lower_ok = self.lower < other.lower || (self.lower == other.lower && (self.lower_closed || !other.lower_closed));
        let upper_ok = self.upper > other.upper || (self.upper == other.upper && (self.upper_closed || !other.upper_closed));
        let equal = self.lower == other.lower
            && self.upper == other.upper
            && self.lower_closed == other.lower_closed
            && self.upper_closed == other.upper_closed;
        lower_ok && upper_ok && !equal
    }

    /// Bracket notation such as `(6.0, inf]`, `{2.0}` or `empty`.
    pub fn bracket(&self) -> String {
        self.to_string()
    }
}

fn fmt_endpoint(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:?}")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "empty");
        }
        if self.is_singleton() {
            return write!(f, "{{{}}}", fmt_endpoint(self.lower));
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            fmt_endpoint(self.lower),
            fmt_endpoint(self.upper),
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

/// Hoelder conjugate `p / (p - 1)`, infinite at `p = 1`.
pub fn conj(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// `q(tau, p)` from `1/q = 1/(tau p) + 1/(tau' p')`.
pub fn q_of(tau: f64, p: f64) -> f64 {
    if p == 2.0 {
        return 2.0;
    }
    let it = 1.0 / tau;
    let ip = 1.0 / p;
    1.0 / (it * ip + (1.0 - it) * (1.0 - ip))
}

/// `I_p(tau)` for `1 <= p <= 2`.
pub fn interval_q(tau: f64, p: f64) -> Interval {
    let tc = tau / (tau - 1.0);
    if p == 2.0 {
        return Interval::point(IntervalKind::Ip, 2.0);
    }
    let q = q_of(tau, p);
    if p < tc {
        Interval::new(IntervalKind::Ip, q, false, f64::INFINITY, true)
    } else if p == tc {
        Interval::new(IntervalKind::Ip, q, false, f64::INFINITY, false)
            .with_note("p = tau': upper endpoint p(2-tau')/(p-tau') read as +inf")
    } else {
        Interval::new(IntervalKind::Ip, q, false, p * (2.0 - tc) / (p - tc), false)
    }
}

/// `I'_p(tau)` for `1 <= p < 2 + tau'`.
pub fn interval_s(tau: f64, p: f64) -> Interval {
    let tc = tau / (tau - 1.0);
    if p == 2.0 {
        return Interval::point(IntervalKind::IPrime, f64::INFINITY);
    }
    if p > 2.0 {
        if p >= 2.0 + tc {
            return Interval::empty(IntervalKind::IPrimeDual).with_note("I'_p is empty for p >= 2 + tau'");
        }
        let mut base = interval_s(tau, conj(p)).intersect_lower(p, true);
        base.kind = IntervalKind::IPrimeDual;
        return base.with_note("dual-derived: I'_{p'} intersected with [p, inf)");
    }
    let upper = tc * p / (2.0 - p);
    if p < tc {
        Interval::new(IntervalKind::IPrime, p, true, upper, false)
    } else {
        Interval::new(IntervalKind::IPrime, p * (2.0 - tc) / (2.0 - p), false, upper, false)
    }
}

/// `n_p = n |1/2 - 1/p|`.
pub fn n_p(n: usize, p: f64) -> f64 {
    n as f64 * (0.5 - recip(p)).abs()
}

/// Exponents attached to a symbol class `(m, n, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub m: u32,
    pub n: usize,
    pub k: u32,
    pub h: f64,
    pub tau: f64,
    pub tau_conj: f64,
}

impl Exponents {
    pub fn new(m: u32, n: usize, k: u32) -> Result<Self> {
        if m < 4 || m % 2 != 0 {
            return Err(Error::InvalidArgument(format!("m = {m} must be an even integer >= 4")));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n = {n} must be >= 2")));
        }
        if k < 2 || k > m {
            return Err(Error::InvalidArgument(format!("type k = {k} must lie in [2, m = {m}]")));
        }
        let (mi, ni, ki) = (m as i64, n as i64, k as i64);
        // h = [k(m-2) + 2(m-k)(n-1)] / [2k(m-1)], reduced before the division
        let num = ki * (mi - 2) + 2 * (mi - ki) * (ni - 1);
        let den = 2 * ki * (mi - 1);
        let (hn, hd) = reduce(num, den);
        let (tn, td) = reduce(ni * hd, hn);
        Ok(Self {
            m,
            n,
            k,
            h: hn as f64 / hd as f64,
            tau: tn as f64 / td as f64,
            tau_conj: tn as f64 / (tn - td) as f64,
        })
    }

    pub fn q(&self, p: f64) -> f64 {
        q_of(self.tau, p)
    }

    pub fn admissible_q(&self, p: f64) -> Result<Interval> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("I_p needs 1 <= p <= 2, got p = {p}")));
        }
        Ok(interval_q(self.tau, p))
    }

    /// `I'_p`; empty (with a note) for `p >= 2 + tau'`.
    pub fn admissible_s(&self, p: f64) -> Result<Interval> {
        if p < 1.0 || p.is_nan() {
            return Err(Error::InvalidArgument(format!("I'_p needs p >= 1, got p = {p}")));
        }
        Ok(interval_s(self.tau, p))
    }

    /// `(n/m)(1/q - 1/p)`, the time exponent of the `L^p -> L^q` bound.
    pub fn dispersive_exponent(&self, p: f64, q: f64) -> Result<f64> {
        let ip = self.admissible_q(p)?;
        if !ip.contains(q) {
            return Err(Error::Inadmissible(format!("q = {q} is not in I_p = {ip} for p = {p}")));
        }
        Ok(self.n as f64 / self.m as f64 * (recip(q) - 1.0 / p))
    }

    /// `(n/m)(1/p - 1/q) - 1`, the `|Re lambda|` exponent of the resolvent bound.
    pub fn resolvent_exponent(&self, p: f64, q: f64) -> Result<f64> {
        let ip = self.admissible_q(p)?;
        if !ip.contains(q) {
            return Err(Error::Inadmissible(format!("q = {q} is not in I_p = {ip} for p = {p}")));
        }
        let gap = 1.0 / p - recip(q);
        let bound = self.m as f64 / self.n as f64;
        if gap >= bound {
            return Err(Error::Inadmissible(format!(
                "1/p - 1/q = {gap} must be < m/n = {bound}"
            )));
        }
        Ok(self.n as f64 / self.m as f64 * gap - 1.0)
    }

    pub fn table(&self, p: f64) -> Result<ExponentTable> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} must lie in [1, 2]")));
        }
        let np = n_p(self.n, p);
        Ok(ExponentTable {
            m: self.m,
            n: self.n,
            k: self.k,
            h: self.h,
            tau: self.tau,
            tau_conj: self.tau_conj,
            p,
            p_conj: conj(p),
            q: self.q(p),
            i_p: interval_q(self.tau, p),
            i_prime_p: interval_s(self.tau, p),
            i_p_bracket: interval_q(self.tau, p).bracket(),
            i_prime_p_bracket: interval_s(self.tau, p).bracket(),
            n_p: np,
            beta_free: np,
            beta_potential: np + 1.0,
        })
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn reduce(num: i64, den: i64) -> (i64, i64) {
    let g = gcd(num, den).max(1);
    let s = if den < 0 { -1 } else { 1 };
    (s * num / g, s * den / g)
}

/// All exponents for a class `(m, n, k)` at a given `p`.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentTable {
    pub m: u32,
    pub n: usize,
    pub k: u32,
    pub h: f64,
    pub tau: f64,
    pub tau_conj: f64,
    pub p: f64,
    #[serde(serialize_with = "ser_f64")]
    pub p_conj: f64,
    pub q: f64,
    pub i_p: Interval,
    pub i_prime_p: Interval,
    pub i_p_bracket: String,
    pub i_prime_p_bracket: String,
    pub n_p: f64,
    /// Lower bound for the integration order of the free group.
    pub beta_free: f64,
    /// Lower bound for the integration order with a potential.
    pub beta_potential: f64,
}

/// Convenience wrapper: `Exponents::new(m, n, k)?.table(p)`.
pub fn compute_table(m: u32, n: usize, k: u32, p: f64) -> Result<ExponentTable> {
    Exponents::new(m, n, k)?.table(p)
}

/// Comparison of the `k = 2` admissible set with the nondegenerate theory.
#[derive(Debug, Clone, Serialize)]
pub struct NondegenerateComparison {
    pub m: u32,
    pub n: usize,
    pub p: f64,
    pub tau0: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub tau1: Option<f64>,
    pub ours: Interval,
    pub theirs: Option<Interval>,
    pub ours_bracket: String,
    pub theirs_bracket: Option<String>,
    /// `Some(true)` when `I_p(tau0)` properly contains `(q(tau1, p), p']`.
    pub proper_containment: Option<bool>,
    /// Whether `n > 3 + 4/(m-2)` holds.
    pub h3_prime: bool,
    pub p_conj_in_ours: bool,
    pub note: String,
}

fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f64(x, s),
        None => s.serialize_none(),
    }
}

/// `tau_1 = 2n(m-1)/(mn - 2n - 3m + 2)` when the denominator is positive.
pub fn tau1(m: u32, n: usize) -> Option<f64> {
    let (m, n) = (m as i64, n as i64);
    let den = m * n - 2 * n - 3 * m + 2;
    (den > 0).then(|| {
        let (a, b) = reduce(2 * n * (m - 1), den);
        a as f64 / b as f64
    })
}

pub fn compare_nondegenerate(m: u32, n: usize, p: f64) -> Result<NondegenerateComparison> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("comparison needs 1 <= p < 2, got {p}")));
    }
    let ex = Exponents::new(m, n, 2)?;
    let tau0 = ex.tau;
    let ours = interval_q(tau0, p);
    let t1 = tau1(m, n);
    let pc = conj(p);
    let theirs = t1.map(|t| Interval::new(IntervalKind::Other, q_of(t, p), false, pc, true));
    let proper = theirs.as_ref().map(|t| ours.properly_contains(t));
    let h3 = (n as f64) > 3.0 + 4.0 / (m as f64 - 2.0);
    let note = match (t1, h3) {
        (None, _) => "tau_1 undefined (mn - 2n - 3m + 2 <= 0); containment check skipped".to_string(),
        (Some(_), false) => "n <= 3 + 4/(m-2): the nondegenerate hypothesis fails, the k = 2 set still applies".to_string(),
        (Some(_), true) => "both theories apply".to_string(),
    };
    Ok(NondegenerateComparison {
        m,
        n,
        p,
        tau0,
        tau1: t1,
        ours_bracket: ours.bracket(),
        theirs_bracket: theirs.as_ref().map(Interval::bracket),
        p_conj_in_ours: ours.contains(pc),
        ours,
        theirs,
        proper_containment: proper,
        h3_prime: h3,
        note,
    })
}

/// Verdict of the specialization `1 <= p <= 3`, `n_p < m/2`,
/// `V in L^{p/|p-2|}`.
#[derive(Debug, Clone, Serialize)]
pub struct SpecializedCheck {
    pub p: f64,
    #[serde(serialize_with = "ser_f64")]
    pub s: f64,
    pub n_p: f64,
    pub admissible: bool,
    pub reasons: Vec<String>,
}

pub fn specialized_check(ex: &Exponents, p: f64) -> SpecializedCheck {
    let s = if p == 2.0 { f64::INFINITY } else { p / (p - 2.0).abs() };
    let np = n_p(ex.n, p);
    let mut reasons = Vec::new();
    if !(1.0..=3.0).contains(&p) {
        reasons.push(format!("p = {p} outside [1, 3]"));
    }
    if np >= ex.m as f64 / 2.0 {
        reasons.push(format!("n_p = {np} is not < m/2 = {}", ex.m as f64 / 2.0));
    }
    let floor = ex.n as f64 / ex.m as f64;
    if !(s > floor) {
        reasons.push(format!("s = {s} is not > n/m = {floor}"));
    }
    let set = interval_s(ex.tau, p);
    if !set.contains(s) {
        reasons.push(format!("s = {s} not in I'_p = {set}"));
    }
    SpecializedCheck {
        p,
        s,
        n_p: np,
        admissible: reasons.is_empty(),
        reasons,
    }
}

/// Outcome of checking the structural relations over a grid of classes.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub classes: usize,
    pub cases: usize,
    pub containment_checks: usize,
    /// Largest `|h(m, n, 2) − n(m−2)/(2(m−1))|`.
    pub max_h_error: f64,
    pub violations: Vec<String>,
}

/// Check `τ ∈ (2, 3n]`, `2 < q(p) < p'` for `p < 2`, `I_2 = {2}`,
/// `I'_2 = {∞}`, the closed form of `h(m, n, 2)` and the proper containment
/// of the nondegenerate set, for every `m ∈ ms`, `n ∈ ns`, `2 <= k <= m`,
/// `p ∈ ps`.
pub fn sweep(ms: &[u32], ns: &[usize], ps: &[f64], tol: f64) -> Result<SweepReport> {
    let mut r = SweepReport {
        classes: 0,
        cases: 0,
        containment_checks: 0,
        max_h_error: 0.0,
        violations: Vec::new(),
    };
    for &m in ms {
        for &n in ns {
            for k in 2..=m {
                let ex = Exponents::new(m, n, k)?;
                r.classes += 1;
                let tag = format!("(m, n, k) = ({m}, {n}, {k})");
                if !(ex.tau > 2.0 && ex.tau <= 3.0 * n as f64 + tol) {
                    r.violations.push(format!("{tag}: tau = {} outside (2, {}]", ex.tau, 3 * n));
                }
                if k == 2 {
                    let closed = n as f64 * (m as f64 - 2.0) / (2.0 * (m as f64 - 1.0));
                    r.max_h_error = r.max_h_error.max((ex.h - closed).abs());
                }
                for &p in ps {
                    r.cases += 1;
                    let t = ex.table(p)?;
                    if p < 2.0 {
                        if !(t.q > 2.0 && t.q < t.p_conj) {
                            r.violations.push(format!("{tag}, p = {p}: q = {} not in (2, p')", t.q));
                        }
                    } else {
                        if !(t.i_p.is_singleton() && (t.i_p.lower - 2.0).abs() <= tol) {
                            r.violations.push(format!("{tag}: I_2 = {}", t.i_p_bracket));
                        }
                        if !(t.i_prime_p.is_singleton() && t.i_prime_p.lower.is_infinite()) {
                            r.violations.push(format!("{tag}: I'_2 = {}", t.i_prime_p_bracket));
                        }
                    }
                    if k == 2 && p < 2.0 {
                        let c = compare_nondegenerate(m, n, p)?;
                        if let Some(ok) = c.proper_containment {
                            r.containment_checks += 1;
                            if !ok {
                                r.violations.push(format!(
                                    "{tag}, p = {p}: {} does not properly contain {}",
                                    c.ours_bracket,
                                    c.theirs_bracket.unwrap_or_default()
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    if r.max_h_error > tol {
        r.violations.push(format!("h(m, n, 2) off its closed form by {}", r.max_h_error));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_tables() {
        let e = Exponents::new(4, 2, 2).unwrap();
        assert!((e.h - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.tau - 3.0).abs() < 1e-15);
        assert_eq!(e.h, 2.0 * (4.0 - 2.0) / (2.0 * 3.0));
        let e = Exponents::new(4, 2, 4).unwrap();
        assert!((e.h - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.tau, 6.0);
        assert!((e.tau_conj - 1.2).abs() < 1e-15);
        assert_eq!(e.q(2.0), 2.0);
        assert!((e.q(1.0) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn admissible_q_cases() {
        let e = Exponents::new(4, 2, 4).unwrap();
        assert_eq!(e.admissible_q(1.0).unwrap().bracket(), "(6.0, inf]");
        assert_eq!(e.admissible_q(2.0).unwrap().bracket(), "{2.0}");
        let e2 = Exponents::new(4, 2, 2).unwrap();
        let b = e2.admissible_q(1.5).unwrap();
        assert!(b.upper.is_infinite() && !b.upper_closed && b.note.is_some());
        let mid = e2.admissible_q(1.75).unwrap();
        assert!((mid.upper - 1.75 * 0.5 / 0.25).abs() < 1e-14 && !mid.upper_closed);
    }

    #[test]
    fn admissible_s_cases() {
        let e = Exponents::new(4, 2, 2).unwrap();
        let s = e.admissible_s(1.0).unwrap();
        assert_eq!((s.lower, s.lower_closed, s.upper, s.upper_closed), (1.0, true, 1.5, false));
        let two = e.admissible_s(2.0).unwrap();
        assert!(two.is_singleton() && two.lower.is_infinite() && two.contains(f64::INFINITY));
        assert!(e.admissible_s(2.0 + e.tau_conj).unwrap().empty);
        let d = e.admissible_s(2.5).unwrap();
        assert_eq!(d.kind, IntervalKind::IPrimeDual);
        assert!(!d.empty && d.lower >= 2.5);
    }

    #[test]
    fn dual_branch_matches_direct_formula() {
        // for p > tau, I'_p = [p, tau' p / (p - 2))
        let e = Exponents::new(4, 2, 2).unwrap(); // tau = 3, tau' = 1.5, empty from 3.5
        let d = e.admissible_s(3.2).unwrap();
        assert!((d.lower - 3.2).abs() < 1e-15 && d.lower_closed);
        assert!((d.upper - 1.5 * 3.2 / 1.2).abs() < 1e-12);
        // for 2 < p <= tau the lower end is max(p, p(2 - tau')/(p - 2))
        let d = e.admissible_s(2.2).unwrap();
        assert!((d.lower - 2.2 * 0.5 / 0.2).abs() < 1e-12 && !d.lower_closed);
    }

    #[test]
    fn exponent_formulas() {
        let e = Exponents::new(4, 2, 4).unwrap();
        assert_eq!(e.dispersive_exponent(1.0, f64::INFINITY).unwrap(), -0.5);
        assert_eq!(e.dispersive_exponent(2.0, 2.0).unwrap(), 0.0);
        assert_eq!(e.resolvent_exponent(1.0, f64::INFINITY).unwrap(), -0.5);
        for p in [1.0, 1.25, 1.5, 1.75] {
            let pc = conj(p);
            let v = e.dispersive_exponent(p, pc).unwrap();
            assert!((v - 0.5 * (1.0 - 2.0 / p)).abs() < 1e-15);
        }
        assert!(matches!(e.dispersive_exponent(1.0, 3.0), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn resolvent_gap_constraint() {
        // n/m large enough that 1/p - 1/q can reach m/n
        let e = Exponents::new(4, 8, 2).unwrap();
        assert!(matches!(e.resolvent_exponent(1.0, f64::INFINITY), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn nondegenerate_comparison() {
        let c = compare_nondegenerate(4, 2, 1.0).unwrap();
        assert!(!c.h3_prime && c.tau1.is_none() && c.proper_containment.is_none());
        let c = compare_nondegenerate(8, 4, 1.25).unwrap();
        assert_eq!(c.tau1, Some(28.0));
        assert_eq!(c.proper_containment, Some(true));
        let c = compare_nondegenerate(4, 7, 1.5).unwrap();
        assert!(c.h3_prime);
        for tau in [2.5, 3.0, 6.0, 12.0].windows(2) {
            for p in [1.0, 1.25, 1.5, 1.75] {
                assert!(q_of(tau[0], p) < q_of(tau[1], p));
            }
        }
    }

    #[test]
    fn specialization() {
        let e = Exponents::new(4, 2, 2).unwrap();
        assert!(specialized_check(&e, 2.0).admissible);
        assert!(!specialized_check(&e, 3.5).admissible);
    }

    #[test]
    fn reject_bad_classes() {
        assert!(Exponents::new(2, 2, 2).is_err());
        assert!(Exponents::new(4, 2, 5).is_err());
        assert!(Exponents::new(5, 2, 2).is_err());
        assert!(compute_table(4, 2, 2, 2.5).is_err());
    }

    #[test]
    fn table_json_has_brackets() {
        let t = compute_table(4, 2, 4, 1.0).unwrap();
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["i_p_bracket"], "(6.0, inf]");
        assert_eq!(v["p_conj"], "inf");
        assert_eq!(v["i_p"]["upper"], "inf");
    }

    proptest! {
        #[test]
        fn sweep_invariants(mi in 2u32..5, n in 2usize..5, kf in 0.0f64..1.0, pi in 0usize..4) {
            let m = 2 * mi;
            let k = 2 + ((m - 2) as f64 * kf).round() as u32;
            let p = [1.0, 1.25, 1.5, 1.75][pi];
            let e = Exponents::new(m, n, k).unwrap();
            prop_assert!(e.tau > 2.0 && e.tau <= 3.0 * n as f64);
            prop_assert!(e.h <= n as f64);
            let q = e.q(p);
            prop_assert!(q > 2.0 && q < conj(p));
            prop_assert!(!e.admissible_q(p).unwrap().empty);
            prop_assert!(e.admissible_q(p).unwrap().contains(conj(p)));
            prop_assert!((n_p(n, p) - n_p(n, conj(p))).abs() < 1e-14);
            if k < m {
                prop_assert!(Exponents::new(m, n, k + 1).unwrap().h < e.h);
            }
        }
    }
}
