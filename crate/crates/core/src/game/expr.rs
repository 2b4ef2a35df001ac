//! Linear expressions over weight symbols and inequalities between them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use super::weights::{Weight, WeightAssignment};
use super::GameError;

/// Coefficients smaller than this are dropped after arithmetic.
pub const COEFF_EPS: f64 = 1e-12;

/// `Σ c_w · w + constant`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearExpr {
    terms: BTreeMap<Weight, f64>,
    constant: f64,
}

impl LinearExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: BTreeMap::new(), constant: c }
    }

    pub fn term(w: Weight, c: f64) -> Self {
        Self::zero().plus_term(w, c)
    }

    pub fn symbol(w: Weight) -> Self {
        Self::term(w, 1.0)
    }

    /// Adds `c·w`, dropping the term if it cancels.
    pub fn plus_term(mut self, w: Weight, c: f64) -> Self {
        let v = self.terms.entry(w).or_insert(0.0);
        *v += c;
        if v.abs() < COEFF_EPS {
            self.terms.remove(&w);
        }
        self
    }

    pub fn coefficient(&self, w: Weight) -> f64 {
        self.terms.get(&w).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (Weight, f64)> + '_ {
        self.terms.iter().map(|(w, c)| (*w, *c))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Weight> + '_ {
        self.terms.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.abs() < COEFF_EPS
    }

    /// True when the expression is nonnegative for every nonnegative
    /// assignment.
    pub fn is_nonnegative_everywhere(&self) -> bool {
        self.constant >= -COEFF_EPS && self.terms.values().all(|c| *c >= 0.0)
    }

    pub fn eval(&self, w: &WeightAssignment) -> Result<f64, GameError> {
        self.terms.iter().try_fold(self.constant, |acc, (s, c)| Ok(acc + c * w.get(*s)?))
    }

    /// Replaces symbols by expressions; symbols absent from `map` are kept.
    pub fn substitute(&self, map: &BTreeMap<Weight, LinearExpr>) -> LinearExpr {
        let mut out = LinearExpr::constant(self.constant);
        for (w, c) in self.terms() {
            out = match map.get(&w) {
                Some(e) => out + e.clone() * c,
                None => out.plus_term(w, c),
            };
        }
        out
    }

    /// Largest absolute coefficient (or constant) difference.
    pub fn max_abs_diff(&self, other: &LinearExpr) -> f64 {
        let diff = self.clone() - other.clone();
        diff.terms.values().map(|c| c.abs()).fold(diff.constant.abs(), f64::max)
    }

    /// True when `self = λ·other` for some `λ > 0`, up to relative `tol`.
    pub fn is_positive_multiple_of(&self, other: &LinearExpr, tol: f64) -> bool {
        let Some((w, c)) = other.terms().next() else {
            return false;
        };
        let lambda = self.coefficient(w) / c;
        lambda > 0.0 && (self.clone() - other.clone() * lambda).max_abs_diff(&LinearExpr::zero()) <= tol * lambda.max(1.0)
    }

    pub(crate) fn dense(&self) -> DenseExpr {
        let mut coeffs = [0.0; Weight::COUNT];
        for (w, c) in self.terms() {
            coeffs[w.index()] = c;
        }
        DenseExpr { coeffs, constant: self.constant }
    }

    fn write_terms<'a>(f: &mut fmt::Formatter<'_>, terms: impl Iterator<Item = (Option<Weight>, f64)> + 'a) -> fmt::Result {
        let mut first = true;
        for (w, c) in terms {
            let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
            let mag = format_coefficient(c.abs());
            match w {
                Some(w) if mag == "1" => write!(f, "{sign}{w}")?,
                Some(w) => write!(f, "{sign}{mag}{w}")?,
                None => write!(f, "{sign}{mag}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Fixed-size form for hot evaluation loops.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DenseExpr {
    coeffs: [f64; Weight::COUNT],
    constant: f64,
}

impl DenseExpr {
    pub(crate) fn eval(&self, values: &[f64; Weight::COUNT]) -> f64 {
        self.coeffs.iter().zip(values).fold(self.constant, |acc, (c, v)| acc + c * v)
    }
}

/// Four decimals with trailing zeros trimmed.
pub fn format_coefficient(c: f64) -> String {
    let s = format!("{c:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

impl fmt::Display for LinearExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let constant = (self.constant.abs() >= COEFF_EPS).then_some((None, self.constant));
        LinearExpr::write_terms(f, self.terms().map(|(w, c)| (Some(w), c)).chain(constant))
    }
}

impl Add for LinearExpr {
    type Output = LinearExpr;

    fn add(self, rhs: LinearExpr) -> LinearExpr {
        let constant = self.constant + rhs.constant;
        let mut out = rhs.terms().fold(self, |acc, (w, c)| acc.plus_term(w, c));
        out.constant = constant;
        out
    }
}

impl Sub for LinearExpr {
    type Output = LinearExpr;

    fn sub(self, rhs: LinearExpr) -> LinearExpr {
        self + (-rhs)
    }
}

impl Neg for LinearExpr {
    type Output = LinearExpr;

    fn neg(self) -> LinearExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinearExpr {
    type Output = LinearExpr;

    fn mul(self, k: f64) -> LinearExpr {
        let terms = self
            .terms
            .into_iter()
            .map(|(w, c)| (w, c * k))
            .filter(|(_, c)| c.abs() >= COEFF_EPS)
            .collect();
        LinearExpr { terms, constant: self.constant * k }
    }
}

impl FromStr for LinearExpr {
    type Err = GameError;

    /// Parses sums such as `0.311w_a-0.385w_{b}+0.5*w_c`, `-w_e+w_f` or `2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| GameError::Parse(format!("{msg} in expression '{s}'"));
        let text: String = s.chars().filter(|c| !c.is_whitespace()).map(|c| if c == '−' { '-' } else { c }).collect();
        if text.is_empty() {
            return Err(err("empty"));
        }
        let bytes = text.as_bytes();
        let mut pos = 0;
        let mut out = LinearExpr::zero();
        while pos < bytes.len() {
            let mut sign = 1.0;
            let mut saw_sign = false;
            while pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
                if saw_sign {
                    return Err(err("repeated sign"));
                }
                if bytes[pos] == b'-' {
                    sign = -1.0;
                }
                saw_sign = true;
                pos += 1;
            }
            if pos > 0 && !saw_sign {
                return Err(err("missing operator"));
            }
            let start = pos;
            while pos < bytes.len() && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.') {
                pos += 1;
            }
            if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') && pos > start {
                let mut end = pos + 1;
                if end < bytes.len() && (bytes[end] == b'+' || bytes[end] == b'-') {
                    end += 1;
                }
                if end < bytes.len() && bytes[end].is_ascii_digit() {
                    pos = end;
                    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let number = &text[start..pos];
            let coeff = if number.is_empty() {
                None
            } else {
                let v: f64 = number.parse().map_err(|_| err(&format!("bad number '{number}'")))?;
                Some(v)
            };
            if pos < bytes.len() && bytes[pos] == b'*' {
                if coeff.is_none() {
                    return Err(err("'*' without coefficient"));
                }
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'w' {
                let sym_start = pos;
                pos += 1;
                if pos < bytes.len() && bytes[pos] == b'_' {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'{' {
                    let close = text[pos..].find('}').ok_or_else(|| err("unclosed '{'"))?;
                    pos += close + 1;
                } else if pos < bytes.len() && bytes[pos].is_ascii_alphanumeric() {
                    pos += 1;
                } else {
                    return Err(err("incomplete symbol"));
                }
                let w: Weight = text[sym_start..pos].parse()?;
                out = out.plus_term(w, sign * coeff.unwrap_or(1.0));
            } else if let Some(c) = coeff {
                out.constant += sign * c;
            } else {
                return Err(err("expected a number or symbol"));
            }
        }
        if out.terms.values().any(|c| !c.is_finite()) || !out.constant.is_finite() {
            return Err(err("non-finite coefficient"));
        }
        Ok(out)
    }
}

/// `expr ≥ 0`, or `expr > 0` when strict.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub expr: LinearExpr,
    pub strict: bool,
}

impl Inequality {
    pub fn non_strict(expr: LinearExpr) -> Self {
        Self { expr, strict: false }
    }

    /// Whether the inequality holds at `w`. Non-strict inequalities allow
    /// `tol` of slack; strict ones need a value above zero. An inequality
    /// flagged strict is always checked strictly.
    pub fn holds(&self, w: &WeightAssignment, strict: bool, tol: f64) -> Result<bool, GameError> {
        let v = self.expr.eval(w)?;
        Ok(if strict || self.strict { v > 0.0 } else { v >= -tol })
    }

    /// Threshold form: a lone symbol on one side, divided through, e.g.
    /// `w_d ≤ 4w_1+2w_2+w_3`; otherwise positive terms on the left.
    pub fn threshold_form(&self) -> String {
        let (ge, le) = if self.strict { (">", "<") } else { ("≥", "≤") };
        let positive: Vec<(Option<Weight>, f64)> = self
            .expr
            .terms()
            .map(|(w, c)| (Some(w), c))
            .chain(std::iter::once((None, self.expr.constant_term())))
            .filter(|(_, c)| *c >= COEFF_EPS)
            .collect();
        let negative: Vec<(Option<Weight>, f64)> = self
            .expr
            .terms()
            .map(|(w, c)| (Some(w), -c))
            .chain(std::iter::once((None, -self.expr.constant_term())))
            .filter(|(_, c)| *c >= COEFF_EPS)
            .collect();
        let side = |terms: &[(Option<Weight>, f64)], scale: f64| Side(terms.iter().map(|(w, c)| (*w, c / scale)).collect());
        let lone = |terms: &[(Option<Weight>, f64)]| match terms {
            [(Some(_), c)] => Some(*c),
            _ => None,
        };
        match (lone(&positive), lone(&negative)) {
            (Some(p), Some(n)) if (p - n).abs() <= 1e-9 && negative[0].0 < positive[0].0 => {
                format!("{} {le} {}", side(&negative, n), side(&positive, n))
            }
            (Some(p), _) => format!("{} {ge} {}", side(&positive, p), side(&negative, p)),
            (None, Some(n)) => format!("{} {le} {}", side(&negative, n), side(&positive, n)),
            (None, None) => format!("{} {ge} {}", side(&positive, 1.0), side(&negative, 1.0)),
        }
    }
}

struct Side(Vec<(Option<Weight>, f64)>);

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        LinearExpr::write_terms(f, self.0.iter().copied())
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.expr, if self.strict { ">" } else { "≥" })
    }
}

impl FromStr for Inequality {
    type Err = GameError;

    /// Parses `lhs REL rhs` with REL one of `>=`, `<=`, `≥`, `≤`, `>`, `<`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        const RELATIONS: [(&str, bool, bool); 6] = [
            (">=", true, false),
            ("<=", false, false),
            ("≥", true, false),
            ("≤", false, false),
            (">", true, true),
            ("<", false, true),
        ];
        let (idx, op, ge, strict) = RELATIONS
            .iter()
            .filter_map(|(op, ge, strict)| s.find(op).map(|i| (i, *op, *ge, *strict)))
            .min_by_key(|(i, op, _, _)| (*i, std::cmp::Reverse(op.len())))
            .ok_or_else(|| GameError::Parse(format!("no relation in inequality '{s}'")))?;
        let lhs: LinearExpr = s[..idx].parse()?;
        let rest = &s[idx + op.len()..];
        if RELATIONS.iter().any(|(op, _, _)| rest.contains(op)) {
            return Err(GameError::Parse(format!("chained relations in '{s}'")));
        }
        let rhs: LinearExpr = rest.parse()?;
        let expr = if ge { lhs - rhs } else { rhs - lhs };
        Ok(Inequality { expr, strict })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(s: &str) -> LinearExpr {
        s.parse().unwrap()
    }

    #[test]
    fn parses_table_cells() {
        let x = e("0.311w_{a}-0.385w_{b}+0.5w_{c}");
        assert_eq!(x.coefficient(Weight::A), 0.311);
        assert_eq!(x.coefficient(Weight::B), -0.385);
        assert_eq!(x.coefficient(Weight::C), 0.5);
        assert_eq!(e("-w_e+w_f").coefficient(Weight::E), -1.0);
        assert_eq!(e("−8w_1 − 4w_2").coefficient(Weight::Two), -4.0);
        assert_eq!(e("2*w_k + 1e-1 w_l").coefficient(Weight::L), 0.1);
        assert_eq!(e("3").constant_term(), 3.0);
        assert_eq!(e("w_a-w_a"), LinearExpr::zero());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "w_", "w_z", "0.3.1w_a", "w_a w_b", "+-w_a", "w_{a", "*w_a", "x", "1e999w_a"] {
            assert!(bad.parse::<LinearExpr>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["0.311w_a-0.385w_b+0.5w_c", "-w_e+w_f", "2w_d-w_e+w_f-8w_1-4w_2-2w_3", "0", "w_I"] {
            assert_eq!(e(s).to_string(), s);
        }
        assert_eq!((e("w_a") * (1.0 / 3.0)).to_string(), "0.3333w_a");
    }

    #[test]
    fn substitution() {
        let map: BTreeMap<_, _> = [(Weight::A, e("w_I")), (Weight::B, e("w_I")), (Weight::C, e("w_P"))].into();
        let x = e("0.311w_a-0.385w_b+0.5w_c").substitute(&map);
        assert!((x.coefficient(Weight::Info) + 0.074).abs() < 1e-12);
        assert_eq!(x.coefficient(Weight::Prob), 0.5);
        let pinned: BTreeMap<_, _> = [(Weight::B, LinearExpr::zero())].into();
        assert_eq!(e("w_a-2w_b").substitute(&pinned), e("w_a"));
    }

    #[test]
    fn inequalities_parse_to_nonnegative_form() {
        let i: Inequality = "w_d <= 4w_1+2w_2+w_3".parse().unwrap();
        assert_eq!(i.expr, e("4w_1+2w_2+w_3-w_d"));
        assert_eq!(i.threshold_form(), "w_d ≤ 4w_1+2w_2+w_3");
        let i: Inequality = "0.123w_e-0.008w_d ≤ 0.5w_1+1.5w_2".parse().unwrap();
        assert_eq!(i.expr, e("0.5w_1+1.5w_2-0.123w_e+0.008w_d"));
        assert!(!i.strict);
        assert!("w_a < w_b".parse::<Inequality>().unwrap().strict);
        assert!("w_a = w_b".parse::<Inequality>().is_err());
        assert!("0 <= w_a <= 1".parse::<Inequality>().is_err());
    }

    #[test]
    fn threshold_forms() {
        let f = |s: &str| s.parse::<Inequality>().unwrap().threshold_form();
        assert_eq!(f("0.391w_b >= 0.235w_a"), "w_b ≥ 0.601w_a");
        assert_eq!(f("0.008w_d >= 0.123w_e"), "w_d ≥ 15.375w_e");
        assert_eq!(f("0.8113w_l >= 0.8113w_k"), "w_k ≤ w_l");
        assert_eq!(f("0.385w_d+0.689w_e >= 0.5w_f"), "w_f ≤ 0.77w_d+1.378w_e");
        assert_eq!(f("0.385w_d+0.689w_e >= 0.5w_f+w_1"), "0.385w_d+0.689w_e ≥ 0.5w_f+w_1");
        assert_eq!(f("w_a >= 0"), "w_a ≥ 0");
    }

    #[test]
    fn evaluation() {
        let w = WeightAssignment::new([(Weight::A, 2.0), (Weight::B, 1.0)]).unwrap();
        assert_eq!(e("0.5w_a-w_b+1").eval(&w).unwrap(), 1.0);
        assert!(matches!(e("w_c").eval(&w), Err(GameError::MissingWeight(Weight::C))));
    }

    #[test]
    fn multiples() {
        assert!(e("2w_a-4w_b").is_positive_multiple_of(&e("w_a-2w_b"), 1e-9));
        assert!(!e("-2w_a+4w_b").is_positive_multiple_of(&e("w_a-2w_b"), 1e-9));
        assert!(!e("w_a-w_b").is_positive_multiple_of(&e("w_a-2w_b"), 1e-9));
    }

    proptest! {
        #[test]
        fn display_then_parse_is_close(coeffs in proptest::collection::vec(-100.0f64..100.0, 9)) {
            let syms = crate::game::Family::Pp.symbols();
            let x = syms.iter().zip(&coeffs).fold(LinearExpr::zero(), |acc, (w, c)| acc.plus_term(*w, *c));
            let back: LinearExpr = x.to_string().parse().unwrap();
            prop_assert!(back.max_abs_diff(&x) <= 5e-5 + 1e-9);
        }

        #[test]
        fn dense_matches_sparse(coeffs in proptest::collection::vec(-10.0f64..10.0, 7), vals in proptest::collection::vec(0.0f64..5.0, 7)) {
            let syms = crate::game::Family::TwoWay.symbols();
            let x = syms.iter().zip(&coeffs).fold(LinearExpr::constant(0.25), |acc, (w, c)| acc.plus_term(*w, *c));
            let w = WeightAssignment::from_values(syms, &vals).unwrap();
            prop_assert!((x.eval(&w).unwrap() - x.dense().eval(w.dense())).abs() < 1e-9);
        }
    }
}
