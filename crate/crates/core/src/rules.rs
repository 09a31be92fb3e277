//! Distribution rules and their exact price-of-anarchy analysis.
//!
//! A distribution rule `f(1..=L)` says which fraction of a resource's value each
//! of `j` agents sharing it receives. Everything here is exact rational
//! arithmetic; factorial growth is carried by big integers.
//!
//! * [`optimal_rule`] is the PoA-maximising rule for a known cardinality `k`.
//! * [`risky_rule`] copies the optimal rule for a guessed cardinality `p` and
//!   fills the tail up to an upper bound `k̄` as well as possible.
//! * [`alg_rule`] is the optimal rule for `ℓ` held constant past `ℓ`; the
//!   learning dynamics pick one per resource.
//!
//! The price of anarchy over games of cardinality `k` is `1 / (1 + chi(f, k))`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{factorial, format_fraction, format_significant, parse_decimal, Rational};

/// Largest cardinality the CLI builds exact rules for unless told otherwise.
pub const DEFAULT_MAX_K: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule is defined on {len} entries but cardinality {k} was requested")]
    DomainTooShort { len: usize, k: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("not a distribution rule: {0}")]
    Invariant(String),
    #[error("cannot parse rule: {0}")]
    Parse(String),
}

/// Where a rule came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleLabel {
    Optimal { k: usize },
    Risky { p: usize, kbar: usize },
    Learning { ell: usize, n: usize },
    Custom,
}

impl fmt::Display for RuleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleLabel::Optimal { k } => write!(f, "optimal:{k}"),
            RuleLabel::Risky { p, kbar } => write!(f, "risky:{p}:{kbar}"),
            RuleLabel::Learning { ell, n } => write!(f, "alg:{ell}:{n}"),
            RuleLabel::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for RuleLabel {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| RuleError::Parse(format!("bad integer `{t}` in label `{s}`")))
        };
        match parts.as_slice() {
            ["custom"] => Ok(RuleLabel::Custom),
            ["optimal", k] => Ok(RuleLabel::Optimal { k: num(k)? }),
            ["risky", p, kbar] => Ok(RuleLabel::Risky { p: num(p)?, kbar: num(kbar)? }),
            ["alg", ell, n] => Ok(RuleLabel::Learning { ell: num(ell)?, n: num(n)? }),
            _ => Err(RuleError::Parse(format!("unknown label `{s}`"))),
        }
    }
}

/// A non-increasing, non-negative sequence `f(1..=L)` with `f(1) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistributionRule {
    values: Vec<Rational>,
    label: RuleLabel,
}

impl DistributionRule {
    pub fn new(values: Vec<Rational>, label: RuleLabel) -> Result<Self, RuleError> {
        if values.is_empty() {
            return Err(RuleError::Invariant("empty rule".into()));
        }
        if !values[0].is_one() {
            return Err(RuleError::Invariant(format!(
                "f(1) = {} but must be 1",
                format_fraction(&values[0])
            )));
        }
        for (j, pair) in values.windows(2).enumerate() {
            if pair[1] > pair[0] {
                return Err(RuleError::Invariant(format!("f({}) > f({})", j + 2, j + 1)));
            }
        }
        if let Some(last) = values.last() {
            if last.is_negative() {
                return Err(RuleError::Invariant("negative entry".into()));
            }
        }
        Ok(Self { values, label })
    }

    pub fn custom(values: Vec<Rational>) -> Result<Self, RuleError> {
        Self::new(values, RuleLabel::Custom)
    }

    pub fn label(&self) -> &RuleLabel {
        &self.label
    }

    /// Domain length `L`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// `f(j)` for 1-based `j`.
    pub fn get(&self, j: usize) -> Option<&Rational> {
        j.checked_sub(1).and_then(|i| self.values.get(i))
    }

    /// `f(j)`, holding the last entry constant beyond the domain.
    pub fn at_extended(&self, j: usize) -> &Rational {
        assert!(j >= 1, "distribution rules are indexed from 1");
        &self.values[(j - 1).min(self.values.len() - 1)]
    }

    /// Constant extension of the last entry up to `len` entries. Shorter
    /// targets leave the rule unchanged.
    pub fn extended(&self, len: usize) -> Self {
        let mut values = self.values.clone();
        if let Some(last) = values.last().cloned() {
            values.resize(len.max(values.len()), last);
        }
        Self { values, label: self.label.clone() }
    }

    /// Serialises as a `rule <label>` header followed by `j num/den` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("rule {}\n", self.label);
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{} {}\n", i + 1, format_fraction(v)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, RuleError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| RuleError::Parse("empty input".into()))?;
        let label = header
            .strip_prefix("rule ")
            .ok_or_else(|| RuleError::Parse(format!("expected `rule <label>`, got `{header}`")))?
            .parse::<RuleLabel>()?;
        let mut values = Vec::new();
        for line in lines {
            let (idx, value) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| RuleError::Parse(format!("bad line `{line}`")))?;
            let idx: usize =
                idx.parse().map_err(|_| RuleError::Parse(format!("bad index in `{line}`")))?;
            if idx != values.len() + 1 {
                return Err(RuleError::Parse(format!("entries out of order at `{line}`")));
            }
            values.push(parse_decimal(value).map_err(|e| RuleError::Parse(e.to_string()))?);
        }
        Self::new(values, label)
    }

    /// Text form plus a 12-significant-digit decimal column.
    pub fn render_table(&self) -> String {
        let mut out = format!("rule {}\n", self.label);
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!(
                "{:>4} {:>24} {}\n",
                i + 1,
                format_fraction(v),
                format_significant(v, 12)
            ));
        }
        out
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.values.iter().map(crate::rational::to_f64).collect()
    }
}

fn frac(n: BigInt, d: BigInt) -> Rational {
    Rational::new(n, d)
}

fn from_int(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

/// `max{ j·f(j) − f(j+1) : j < k } ∪ { (k−1)·f(k) }`.
pub fn chi(f: &DistributionRule, k: usize) -> Result<Rational, RuleError> {
    if k == 0 {
        return Err(RuleError::InvalidArgument("cardinality must be positive".into()));
    }
    if f.len() < k {
        return Err(RuleError::DomainTooShort { len: f.len(), k });
    }
    let v = f.values();
    let tail = from_int(BigInt::from(k - 1)) * &v[k - 1];
    Ok((1..k)
        .map(|j| from_int(BigInt::from(j)) * &v[j - 1] - &v[j])
        .fold(tail, |acc, x| if x > acc { x } else { acc }))
}

/// Price of anarchy of `f` over covering games of cardinality `k`.
pub fn poa_of_rule(f: &DistributionRule, k: usize) -> Result<Rational, RuleError> {
    let c = chi(f, k)?;
    Ok((Rational::one() + c).recip())
}

/// `1/((k−1)(k−1)!) + Σ_{i=start}^{k−1} 1/i!`, the building block of the optimal rule.
fn optimal_tail_sum(k: usize, start: usize) -> Rational {
    let mut acc = frac(BigInt::one(), BigInt::from(k - 1) * factorial(k - 1));
    for i in start..k {
        acc += frac(BigInt::one(), factorial(i));
    }
    acc
}

/// Entries `f*_k(1..=k)`.
fn optimal_values(k: usize) -> Vec<Rational> {
    if k == 1 {
        return vec![Rational::one()];
    }
    let denom = optimal_tail_sum(k, 1);
    (1..=k)
        .map(|j| from_int(factorial(j - 1)) * optimal_tail_sum(k, j) / &denom)
        .collect()
}

/// The optimal rule for cardinality `k`, extended constantly to `extend_to` entries.
pub fn optimal_rule(k: usize, extend_to: usize) -> Result<DistributionRule, RuleError> {
    if k == 0 {
        return Err(RuleError::InvalidArgument("k must be at least 1".into()));
    }
    if extend_to < k {
        return Err(RuleError::InvalidArgument(format!(
            "extend_to = {extend_to} is smaller than k = {k}"
        )));
    }
    let rule = DistributionRule { values: optimal_values(k), label: RuleLabel::Optimal { k } };
    Ok(rule.extended(extend_to))
}

/// Best achievable price of anarchy at cardinality `k`.
pub fn optimal_poa(k: usize) -> Result<Rational, RuleError> {
    poa_of_rule(&optimal_rule(k, k)?, k)
}

fn check_risky_args(p: usize, kbar: usize) -> Result<(), RuleError> {
    if p <= 1 || p >= kbar {
        return Err(RuleError::InvalidArgument(format!("need 1 < p < kbar, got p = {p}, kbar = {kbar}")));
    }
    Ok(())
}

/// Closed-form `chi` of the risky rule at its upper bound `kbar`.
pub fn chi_risky(p: usize, kbar: usize) -> Result<Rational, RuleError> {
    check_risky_args(p, kbar)?;
    let head_last = optimal_values(p).pop().expect("non-empty");
    let fk = factorial(kbar - 1);
    let mut denom = from_int(BigInt::from(kbar));
    for h in 1..kbar - p {
        denom += from_int(BigInt::from(kbar - 1) * &fk) / from_int(factorial(kbar - h - 1));
    }
    let lead = from_int(BigInt::from(kbar - 1) * &fk) / denom;
    Ok(lead * head_last / from_int(factorial(p - 1)))
}

/// Optimal rule for a guessed cardinality `p` on `[1, p]` with the tail on
/// `[p+1, kbar]` chosen to maximise the price of anarchy at `kbar`.
pub fn risky_rule(p: usize, kbar: usize) -> Result<DistributionRule, RuleError> {
    let c = chi_risky(p, kbar)?;
    let mut values = optimal_values(p);
    let head_last = values[p - 1].clone();
    let head_scale = frac(BigInt::one(), factorial(p - 1));
    for j in p + 1..=kbar {
        let fj1 = factorial(j - 1);
        let mut falling = Rational::one();
        for h in 1..j - p {
            falling += frac(fj1.clone(), factorial(j - h - 1));
        }
        let lead = from_int(fj1) * &head_scale * &head_last;
        values.push(lead - &c * falling);
    }
    DistributionRule::new(values, RuleLabel::Risky { p, kbar })
}

/// Rebuilds the risky rule from its defining equalities
/// `j·f(j) − f(j+1) = χ` (`j ∈ [p, kbar−1]`), `(kbar−1)·f(kbar) = χ`, with
/// `f = f*_p` on `[1, p]`. The tail is linear in the unknown `χ`, so it is
/// back-substituted symbolically and `χ` is fixed by the equation at `j = p`.
pub fn solve_tail_recursion(p: usize, kbar: usize) -> Result<DistributionRule, RuleError> {
    check_risky_args(p, kbar)?;
    let head = optimal_values(p);
    // coeff[j] = f(j) / χ for j in [p+1, kbar]
    let mut coeff = vec![Rational::zero(); kbar + 2];
    coeff[kbar] = frac(BigInt::one(), BigInt::from(kbar - 1));
    for j in (p + 1..kbar).rev() {
        coeff[j] = (Rational::one() + &coeff[j + 1]) / from_int(BigInt::from(j));
    }
    let c = from_int(BigInt::from(p)) * &head[p - 1] / (Rational::one() + &coeff[p + 1]);
    let mut values = head;
    for cj in coeff.iter().take(kbar + 1).skip(p + 1) {
        values.push(cj * &c);
    }
    DistributionRule::new(values, RuleLabel::Risky { p, kbar })
}

/// `f*_ℓ` on `[1, ℓ]`, then `f*_ℓ(ℓ)` up to `n`.
pub fn alg_rule(ell: usize, n: usize) -> Result<DistributionRule, RuleError> {
    if ell == 0 || ell > n {
        return Err(RuleError::InvalidArgument(format!("need 1 <= ell <= n, got ell = {ell}, n = {n}")));
    }
    let base = DistributionRule { values: optimal_values(ell), label: RuleLabel::Learning { ell, n } };
    Ok(base.extended(n))
}

impl RuleLabel {
    /// Builds the labelled rule, refusing any index above `max_k`.
    pub fn build(&self, max_k: usize) -> Result<DistributionRule, RuleError> {
        let too_big = |v: usize| {
            Err(RuleError::InvalidArgument(format!("{v} exceeds the supported maximum {max_k}")))
        };
        match *self {
            RuleLabel::Optimal { k } if k > max_k => too_big(k),
            RuleLabel::Risky { kbar, .. } if kbar > max_k => too_big(kbar),
            RuleLabel::Learning { n, .. } if n > max_k => too_big(n),
            RuleLabel::Optimal { k } => optimal_rule(k, k),
            RuleLabel::Risky { p, kbar } => risky_rule(p, kbar),
            RuleLabel::Learning { ell, n } => alg_rule(ell, n),
            RuleLabel::Custom => Err(RuleError::InvalidArgument("custom rules have no generator".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn rule(vals: &[(i64, i64)]) -> DistributionRule {
        DistributionRule::custom(vals.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap()
    }

    /// Optimal rule via its defining recursion `j f(j) − f(j+1) = χ`,
    /// `(k−1) f(k) = χ`, `f(1) = 1`, solved symbolically in `χ`.
    fn optimal_by_recursion(k: usize) -> Vec<Rational> {
        if k == 1 {
            return vec![int(1)];
        }
        let mut coeff = vec![int(0); k + 1];
        coeff[k] = ratio(1, k as i64 - 1);
        for j in (1..k).rev() {
            coeff[j] = (int(1) + &coeff[j + 1]) / int(j as i64);
        }
        let c = int(1) / &coeff[1];
        (1..=k).map(|j| &coeff[j] * &c).collect()
    }

    #[test]
    fn chi_examples() {
        assert_eq!(chi(&rule(&[(1, 1)]), 1).unwrap(), int(0));
        assert_eq!(chi(&optimal_rule(3, 3).unwrap(), 3).unwrap(), ratio(4, 7));
        assert_eq!(chi(&optimal_rule(2, 2).unwrap(), 2).unwrap(), ratio(1, 2));
        assert_eq!(
            chi(&rule(&[(1, 1)]), 2),
            Err(RuleError::DomainTooShort { len: 1, k: 2 })
        );
        assert!(matches!(chi(&rule(&[(1, 1)]), 0), Err(RuleError::InvalidArgument(_))));
    }

    #[test]
    fn poa_examples() {
        assert_eq!(poa_of_rule(&optimal_rule(3, 3).unwrap(), 3).unwrap(), ratio(7, 11));
        assert_eq!(poa_of_rule(&rule(&[(1, 1)]), 1).unwrap(), int(1));
        assert_eq!(poa_of_rule(&risky_rule(2, 3).unwrap(), 3).unwrap(), ratio(3, 5));
    }

    #[test]
    fn optimal_rule_examples() {
        assert_eq!(optimal_rule(2, 2).unwrap().values(), &[int(1), ratio(1, 2)]);
        assert_eq!(optimal_rule(1, 3).unwrap().values(), &[int(1), int(1), int(1)]);
        assert_eq!(optimal_rule(3, 3).unwrap().values(), &[int(1), ratio(3, 7), ratio(2, 7)]);
        assert_eq!(
            optimal_rule(3, 5).unwrap().values(),
            &[int(1), ratio(3, 7), ratio(2, 7), ratio(2, 7), ratio(2, 7)]
        );
        assert!(optimal_rule(0, 1).is_err());
        assert!(optimal_rule(3, 2).is_err());
    }

    #[test]
    fn optimal_rule_matches_recursion() {
        for k in 1..=20 {
            assert_eq!(optimal_rule(k, k).unwrap().values(), optimal_by_recursion(k).as_slice(), "k={k}");
        }
    }

    #[test]
    fn optimal_poa_examples() {
        assert_eq!(optimal_poa(3).unwrap(), ratio(7, 11));
        assert_eq!(optimal_poa(1).unwrap(), int(1));
        assert_eq!(optimal_poa(2).unwrap(), ratio(2, 3));
        let limit = 1.0 - (-1.0f64).exp();
        assert!((crate::rational::to_f64(&optimal_poa(25).unwrap()) - limit).abs() < 1e-6);
    }

    #[test]
    fn risky_examples() {
        assert_eq!(risky_rule(2, 3).unwrap().values(), &[int(1), ratio(1, 2), ratio(1, 3)]);
        assert_eq!(&risky_rule(2, 10).unwrap().values()[..2], &[int(1), ratio(1, 2)]);
        assert_eq!(chi_risky(2, 3).unwrap(), ratio(2, 3));
        assert_eq!(chi_risky(2, 3).unwrap(), chi(&risky_rule(2, 3).unwrap(), 3).unwrap());
        assert!(chi_risky(5, 6).unwrap() > chi(&optimal_rule(6, 6).unwrap(), 6).unwrap());
        for (p, kbar) in [(1, 3), (3, 3), (4, 3)] {
            assert!(matches!(risky_rule(p, kbar), Err(RuleError::InvalidArgument(_))));
            assert!(chi_risky(p, kbar).is_err());
            assert!(solve_tail_recursion(p, kbar).is_err());
        }
    }

    #[test]
    fn tail_recursion_examples() {
        assert_eq!(solve_tail_recursion(2, 3).unwrap().values(), &[int(1), ratio(1, 2), ratio(1, 3)]);
        let f = solve_tail_recursion(3, 6).unwrap();
        let c = chi_risky(3, 6).unwrap();
        for j in 3..=5 {
            let lhs = int(j as i64) * f.get(j).unwrap() - f.get(j + 1).unwrap();
            assert_eq!(lhs, c, "j={j}");
        }
        assert_eq!(int(5) * f.get(6).unwrap(), c);
    }

    #[test]
    fn alg_examples() {
        assert_eq!(alg_rule(1, 3).unwrap().values(), &[int(1), int(1), int(1)]);
        assert_eq!(alg_rule(2, 3).unwrap().values(), &[int(1), ratio(1, 2), ratio(1, 2)]);
        assert_eq!(alg_rule(4, 4).unwrap().values(), optimal_rule(4, 4).unwrap().values());
        assert!(alg_rule(4, 3).is_err());
        assert!(alg_rule(0, 3).is_err());
    }

    #[test]
    fn rejects_invalid_rules() {
        assert!(DistributionRule::custom(vec![]).is_err());
        assert!(DistributionRule::custom(vec![ratio(1, 2)]).is_err());
        assert!(DistributionRule::custom(vec![int(1), ratio(1, 2), ratio(2, 3)]).is_err());
        assert!(DistributionRule::custom(vec![int(1), ratio(-1, 2)]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let f = risky_rule(3, 7).unwrap();
        assert_eq!(DistributionRule::from_text(&f.to_text()).unwrap(), f);
        assert!(f.to_text().starts_with("rule risky:3:7\n1 1/1\n"));
        assert!(DistributionRule::from_text("rule optimal:2\n1 1/1\n3 1/2\n").is_err());
        assert!(DistributionRule::from_text("optimal:2\n1 1/1\n").is_err());
        let table = optimal_rule(3, 3).unwrap().render_table();
        assert!(table.contains("0.428571428571"), "{table}");
    }

    #[test]
    fn optimal_rule_is_admissible_and_does_not_overpay() {
        for k in 1..=30 {
            let f = optimal_rule(k, k).unwrap();
            for j in 1..=k {
                assert!(int(j as i64) * f.get(j).unwrap() <= int(1), "k={k} j={j}");
            }
        }
    }

    #[test]
    fn optimal_poa_decreases_toward_limit() {
        // poa > 1 - 1/e  <=>  1/(1 - poa) > e, and e is bounded above by its
        // 60-term series plus the tail bound 1/(60·60!).
        let mut e_upper = Rational::from_integer(factorial(60)).recip() * ratio(1, 60);
        for i in 0..=60 {
            e_upper += Rational::from_integer(factorial(i)).recip();
        }
        let mut prev = optimal_poa(1).unwrap();
        for k in 2..=30 {
            let cur = optimal_poa(k).unwrap();
            assert!(cur < prev, "k={k}");
            assert!((int(1) - &cur).recip() > e_upper, "k={k}");
            prev = cur;
        }
    }

    #[test]
    fn labels_build_their_rules() {
        assert_eq!("optimal:3".parse::<RuleLabel>().unwrap().build(DEFAULT_MAX_K).unwrap(), optimal_rule(3, 3).unwrap());
        assert_eq!("risky:2:3".parse::<RuleLabel>().unwrap().build(DEFAULT_MAX_K).unwrap(), risky_rule(2, 3).unwrap());
        assert_eq!("alg:2:3".parse::<RuleLabel>().unwrap().build(DEFAULT_MAX_K).unwrap(), alg_rule(2, 3).unwrap());
        assert!(RuleLabel::Optimal { k: 65 }.build(DEFAULT_MAX_K).is_err());
        assert!(RuleLabel::Custom.build(DEFAULT_MAX_K).is_err());
    }

    proptest! {
        #[test]
        fn optimal_chi_is_flat_below_k(m in 2usize..=12, l_off in 0usize..11) {
            // chi(f, 1) is 0 for every rule, so the identity starts at l = 2.
            let l = 2 + l_off % (m - 1);
            let f = optimal_rule(m, m).unwrap();
            prop_assert_eq!(chi(&f, l).unwrap(), chi(&f, m).unwrap());
        }

        #[test]
        fn risky_rule_invariants(kbar in 3usize..=12, p_off in 0usize..10) {
            let p = 2 + p_off % (kbar - 2);
            let f = risky_rule(p, kbar).unwrap();
            prop_assert_eq!(&f, &solve_tail_recursion(p, kbar).unwrap());
            prop_assert_eq!(chi(&f, kbar).unwrap(), chi_risky(p, kbar).unwrap());
            for j in 1..=kbar {
                prop_assert!(int(j as i64) * f.get(j).unwrap() <= int(1));
            }
            for j in p..kbar {
                let a = int(j as i64) * f.get(j).unwrap();
                let b = int(j as i64 + 1) * f.get(j + 1).unwrap();
                prop_assert!(a >= b);
            }
            prop_assert!(chi(&optimal_rule(kbar, kbar).unwrap(), kbar).unwrap() < chi_risky(p, kbar).unwrap());
        }

        #[test]
        fn extension_keeps_chi_below_domain(k in 1usize..=10, extra in 0usize..5) {
            let f = optimal_rule(k, k).unwrap();
            let g = f.extended(k + extra);
            prop_assert_eq!(chi(&f, k).unwrap(), chi(&g, k).unwrap());
            prop_assert_eq!(g.len(), k + extra);
        }
    }
}
