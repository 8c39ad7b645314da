use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{UniPoly, C64};

/// Sparse multivariate polynomial over named variables.
///
/// Terms map exponent vectors (one entry per variable, in `vars` order) to
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, C64>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: C64,
    exps: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    vars: Vec<String>,
    terms: Vec<TermRepr>,
}

impl TryFrom<PolyRepr> for MultiPoly {
    type Error = String;

    fn try_from(repr: PolyRepr) -> Result<Self, Self::Error> {
        let mut p = MultiPoly::zero(&repr.vars);
        for t in repr.terms {
            if t.exps.len() != repr.vars.len() {
                return Err(format!(
                    "term has {} exponents but polynomial has {} variables",
                    t.exps.len(),
                    repr.vars.len()
                ));
            }
            if !super::is_finite(t.coeff) {
                return Err("non-finite coefficient".into());
            }
            p.add_term(t.exps, t.coeff);
        }
        Ok(p)
    }
}

impl From<MultiPoly> for PolyRepr {
    fn from(p: MultiPoly) -> Self {
        PolyRepr {
            terms: p
                .terms
                .into_iter()
                .map(|(exps, coeff)| TermRepr { coeff, exps })
                .collect(),
            vars: p.vars,
        }
    }
}

impl MultiPoly {
    pub fn zero<S: AsRef<str>>(vars: &[S]) -> Self {
        MultiPoly {
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant<S: AsRef<str>>(vars: &[S], c: C64) -> Self {
        let mut p = MultiPoly::zero(vars);
        p.add_term(vec![0; vars.len()], c);
        p
    }

    /// The polynomial consisting of the single variable `name`.
    ///
    /// Panics if `name` is not one of `vars`.
    pub fn var<S: AsRef<str>>(vars: &[S], name: &str) -> Self {
        let idx = vars
            .iter()
            .position(|v| v.as_ref() == name)
            .unwrap_or_else(|| panic!("unknown variable {name}"));
        let mut exps = vec![0; vars.len()];
        exps[idx] = 1;
        let mut p = MultiPoly::zero(vars);
        p.add_term(exps, C64::new(1.0, 0.0));
        p
    }

    pub fn from_terms<S: AsRef<str>>(vars: &[S], terms: impl IntoIterator<Item = (Vec<u32>, C64)>) -> Self {
        let mut p = MultiPoly::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length mismatch");
            p.add_term(e, c);
        }
        p
    }

    /// Parses expressions such as `y^2 - x^3 - 1` or `(2 + 3*i)*x*y`.
    ///
    /// `i` denotes the imaginary unit unless it is one of the variables.
    pub fn parse<S: AsRef<str>>(vars: &[S], src: &str) -> Result<Self, ParsePolyError> {
        let names: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let mut parser = Parser {
            src: src.as_bytes(),
            pos: 0,
            vars: &names,
        };
        let p = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(p)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], C64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> C64 {
        self.terms.get(exps).copied().unwrap_or_default()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == C64::new(0.0, 0.0) {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    /// Highest exponent of variable `idx` over all terms (0 for the zero polynomial).
    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms.keys().map(|e| e[idx]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    pub fn involves(&self, idx: usize) -> bool {
        self.terms.keys().any(|e| e[idx] > 0)
    }

    /// Indices of variables that actually occur.
    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.involves(i)).collect()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, point: &[C64]) -> C64 {
        debug_assert_eq!(point.len(), self.vars.len());
        let mut acc = C64::new(0.0, 0.0);
        for (e, &c) in &self.terms {
            let mut m = c;
            for (k, &ek) in e.iter().enumerate() {
                if ek > 0 {
                    m *= point[k].powu(ek);
                }
            }
            acc += m;
        }
        acc
    }

    /// `Σ |c| |m(point)|`, the scale against which `|eval(point)|` is judged.
    pub fn magnitude_at(&self, point: &[C64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.norm()
                    * e.iter()
                        .enumerate()
                        .map(|(k, &ek)| point[k].norm().powi(ek as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn derivative(&self, idx: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (e, &c) in &self.terms {
            if e[idx] > 0 {
                let mut d = e.clone();
                d[idx] -= 1;
                out.add_term(d, c * e[idx] as f64);
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(&self.vars, C64::new(1.0, 0.0));
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Replaces variable `idx` by `value` everywhere. The variable list is
    /// unchanged; `idx` simply no longer occurs in the result.
    pub fn substitute(&self, idx: usize, value: &MultiPoly) -> MultiPoly {
        assert_eq!(self.vars, value.vars, "substitution across variable sets");
        let mut powers: Vec<MultiPoly> = vec![MultiPoly::constant(&self.vars, C64::new(1.0, 0.0))];
        let mut out = MultiPoly::zero(&self.vars);
        for (e, &c) in &self.terms {
            let k = e[idx] as usize;
            while powers.len() <= k {
                let next = powers.last().expect("non-empty") * value;
                powers.push(next);
            }
            let mut rest = e.clone();
            rest[idx] = 0;
            let mono = MultiPoly::from_terms(&self.vars, [(rest, c)]);
            out = &out + &(&mono * &powers[k]);
        }
        out
    }

    /// Fixes the listed variables at numeric values.
    pub fn partial_eval(&self, fixed: &[(usize, C64)]) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (e, &c) in &self.terms {
            let mut coeff = c;
            let mut rest = e.clone();
            for &(idx, v) in fixed {
                if rest[idx] > 0 {
                    coeff *= v.powu(rest[idx]);
                    rest[idx] = 0;
                }
            }
            out.add_term(rest, coeff);
        }
        out
    }

    /// Univariate view in variable `idx`, provided no other variable occurs.
    pub fn to_univariate(&self, idx: usize) -> Option<UniPoly> {
        let mut coeffs = vec![C64::new(0.0, 0.0); self.degree_in(idx) as usize + 1];
        for (e, &c) in &self.terms {
            if e.iter().enumerate().any(|(k, &ek)| k != idx && ek > 0) {
                return None;
            }
            coeffs[e[idx] as usize] += c;
        }
        Some(UniPoly::new(coeffs))
    }

    /// Coefficients with respect to variable `idx`: `self = Σ_k c_k * v^k`
    /// where each `c_k` does not involve `v`.
    pub fn coefficients_in(&self, idx: usize) -> Vec<MultiPoly> {
        let mut out = vec![MultiPoly::zero(&self.vars); self.degree_in(idx) as usize + 1];
        for (e, &c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[idx] as usize;
            rest[idx] = 0;
            out[k].add_term(rest, c);
        }
        out
    }

    /// Re-expresses the polynomial over a different variable list, matching
    /// variables by name. Returns `None` if a used variable is missing.
    pub fn with_vars<S: AsRef<str>>(&self, vars: &[S]) -> Option<MultiPoly> {
        let names: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        let map: Vec<Option<usize>> = self.vars.iter().map(|v| names.iter().position(|n| n == v)).collect();
        let mut out = MultiPoly::zero(&names);
        for (e, &c) in &self.terms {
            let mut ne = vec![0; names.len()];
            for (k, &ek) in e.iter().enumerate() {
                if ek > 0 {
                    ne[map[k]?] = ek;
                }
            }
            out.add_term(ne, c);
        }
        Some(out)
    }

    /// Drops terms whose coefficient modulus is at most `tol` times the largest.
    pub fn snap(&self, tol: f64) -> MultiPoly {
        let max = self.max_abs_coeff();
        let mut out = MultiPoly::zero(&self.vars);
        for (e, &c) in &self.terms {
            if c.norm() > tol * max {
                out.add_term(e.clone(), c);
            }
        }
        out
    }

    /// Rounds real and imaginary parts to `digits` significant digits and
    /// zeroes parts below `10^-digits` of the largest coefficient. Meant for
    /// display.
    pub fn rounded(&self, digits: i32) -> MultiPoly {
        let floor = self.max_abs_coeff() * 10f64.powi(-digits);
        let round = |v: f64| {
            if v.abs() <= floor {
                return 0.0;
            }
            let m = 10f64.powi((digits - v.abs().log10().ceil() as i32).clamp(-300, 300));
            (v * m).round() / m
        };
        let mut out = MultiPoly::zero(&self.vars);
        for (e, c) in &self.terms {
            let c = C64::new(round(c.re), round(c.im));
            if c.norm() > 0.0 {
                out.add_term(e.clone(), c);
            }
        }
        out
    }

    fn check_compatible(&self, rhs: &MultiPoly) {
        assert_eq!(self.vars, rhs.vars, "polynomials over different variables");
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_compatible(rhs);
        let mut out = MultiPoly::zero(&self.vars);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({c})")?;
            }
            for (k, &ek) in e.iter().enumerate() {
                match ek {
                    0 => {}
                    1 => write!(f, "*{}", self.vars[k])?,
                    _ => write!(f, "*{}^{}", self.vars[k], ek)?,
                }
            }
        }
        Ok(())
    }
}

/// Error from [`MultiPoly::parse`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParsePolyError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ParsePolyError {
        ParsePolyError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly, ParsePolyError> {
        let mut acc = self.unary()?;
        while let Some(op) = self.peek() {
            match op {
                b'+' => {
                    self.pos += 1;
                    acc = &acc + &self.unary()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = &acc - &self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MultiPoly, ParsePolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.term(),
        }
    }

    fn term(&mut self) -> Result<MultiPoly, ParsePolyError> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<MultiPoly, ParsePolyError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.error("expected non-negative integer exponent"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, ParsePolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    let exp_sign =
                        (c == b'-' || c == b'+') && self.pos > start && matches!(self.src[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let v: f64 = text.parse().map_err(|_| self.error("bad number"))?;
                Ok(MultiPoly::constant(self.vars, C64::new(v, 0.0)))
            }
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if self.vars.iter().any(|v| v == name) {
                    Ok(MultiPoly::var(self.vars, name))
                } else if name == "i" {
                    Ok(MultiPoly::constant(self.vars, C64::new(0.0, 1.0)))
                } else {
                    Err(ParsePolyError {
                        pos: start,
                        msg: format!("unknown variable '{name}'"),
                    })
                }
            }
            _ => Err(self.error("expected number, variable or '('")),
        }
    }
}
