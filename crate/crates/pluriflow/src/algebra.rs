//! Real Lie algebras, almost complex structures, and the structure-equation
//! notations used to describe them.
//!
//! A [`LieAlgebra`] stores the bracket table `[e_i, e_j] = Σ_k c^k_{ij} e_k`.
//! Salamon tuples such as `"(0,0,0,12)"` are read as that table: the k-th
//! entry lists the coefficients `c^k_{ij}` on `e^{ij}` with `i < j`. Under
//! the Chevalley–Eilenberg convention `dα(X,Y) = −α([X,Y])` used by the
//! exterior module this means `de^4 = −e^1 ∧ e^2` for the tuple above; the
//! bracket-table reading is the one that reproduces the complexified
//! brackets of the calibration geometries.

use crate::{tol, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Real Lie algebra given by structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    /// c[k][i][j] flattened; antisymmetric in (i, j).
    c: Vec<f64>,
    pub name: Option<String>,
    pub params: BTreeMap<String, f64>,
}

impl LieAlgebra {
    /// Builds an algebra from a bracket-coefficient table and validates
    /// antisymmetry (enforced) and the Jacobi identity at `jacobi_tol`.
    pub fn new(
        dim: usize,
        entries: &[(usize, usize, usize, f64)],
        jacobi_tol: f64,
    ) -> Result<Self> {
        let mut a = LieAlgebra {
            dim,
            c: vec![0.0; dim * dim * dim],
            name: None,
            params: BTreeMap::new(),
        };
        for &(k, i, j, v) in entries {
            if k >= dim || i >= dim || j >= dim {
                return Err(Error::Dimension(format!(
                    "structure constant index ({k},{i},{j}) out of range for dim {dim}"
                )));
            }
            let p = a.idx(k, i, j);
            a.c[p] += v;
            let q = a.idx(k, j, i);
            a.c[q] -= v;
        }
        a.validate_jacobi(jacobi_tol)?;
        Ok(a)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra {
            dim,
            c: vec![0.0; dim * dim * dim],
            name: None,
            params: BTreeMap::new(),
        }
    }

    fn idx(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.dim + i) * self.dim + j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Structure constant `c^k_{ij}`, i.e. the `e_k` coefficient of `[e_i, e_j]`.
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[self.idx(k, i, j)]
    }

    /// `[e_i, e_j]` as a coefficient vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.c(k, i, j)).collect()
    }

    /// Bilinear extension of the bracket to coefficient vectors.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                if y[j] == 0.0 {
                    continue;
                }
                let f = x[i] * y[j];
                for k in 0..self.dim {
                    out[k] += f * self.c(k, i, j);
                }
            }
        }
        out
    }

    fn validate_jacobi(&self, tolerance: f64) -> Result<()> {
        let (res, triple) = self.jacobi_worst();
        if res > tolerance {
            return Err(Error::JacobiViolation {
                residual: res,
                triple,
            });
        }
        Ok(())
    }

    /// Max cyclic Jacobi residual together with the worst (i, j, l, k).
    pub fn jacobi_worst(&self) -> (f64, (usize, usize, usize, usize)) {
        let m = self.dim;
        let mut worst = (0.0_f64, (0, 0, 0, 0));
        for i in 0..m {
            for j in i + 1..m {
                for l in j + 1..m {
                    for k in 0..m {
                        let mut s = 0.0;
                        for a in 0..m {
                            s += self.c(a, i, j) * self.c(k, a, l)
                                + self.c(a, j, l) * self.c(k, a, i)
                                + self.c(a, l, i) * self.c(k, a, j);
                        }
                        if s.abs() > worst.0 {
                            worst = (s.abs(), (i, j, l, k));
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut cs = Vec::new();
        for k in 0..self.dim {
            for i in 0..self.dim {
                for j in i + 1..self.dim {
                    let v = self.c(k, i, j);
                    if v != 0.0 {
                        cs.push(serde_json::json!([k + 1, i + 1, j + 1, v]));
                    }
                }
            }
        }
        serde_json::json!({
            "dim": self.dim,
            "c": cs,
            "name": self.name,
            "params": self.params,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: AlgebraDoc = serde_json::from_value(v.clone())?;
        let entries: Vec<(usize, usize, usize, f64)> = doc
            .c
            .iter()
            .map(|&(k, i, j, v)| (k - 1, i - 1, j - 1, v))
            .collect();
        let mut a = LieAlgebra::new(doc.dim, &entries, tol::USER_INPUT)?;
        a.name = doc.name;
        a.params = doc.params;
        Ok(a)
    }
}

#[derive(Serialize, Deserialize)]
struct AlgebraDoc {
    dim: usize,
    c: Vec<(usize, usize, usize, f64)>,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

/// Max cyclic Jacobi residual; 0 for genuine Lie algebras.
pub fn jacobi_residual(a: &LieAlgebra) -> f64 {
    a.jacobi_worst().0
}

/// Almost complex structure as a real matrix acting on the algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    dim: usize,
    /// j[i][k]: the e_i coefficient of J e_k.
    j: Vec<f64>,
}

impl ComplexStructure {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(dim, entries, tol::CONSTRUCTION)
    }

    pub fn with_tolerance(dim: usize, entries: Vec<f64>, tolerance: f64) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "J matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let j = ComplexStructure { dim, j: entries };
        let res = j.square_defect();
        if res > tolerance {
            return Err(Error::NotAlmostComplex(res));
        }
        Ok(j)
    }

    /// Standard structure `J e_{2r} = e_{2r+1}`, `J e_{2r+1} = -e_{2r}`.
    pub fn standard(dim: usize) -> Self {
        assert!(dim % 2 == 0);
        let mut j = vec![0.0; dim * dim];
        for r in 0..dim / 2 {
            j[(2 * r + 1) * dim + 2 * r] = 1.0;
            j[2 * r * dim + (2 * r + 1)] = -1.0;
        }
        ComplexStructure { dim, j }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, k: usize) -> f64 {
        self.j[i * self.dim + k]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|k| self.entry(i, k) * x[k]).sum())
            .collect()
    }

    pub fn apply_basis(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.entry(i, k)).collect()
    }

    fn square_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for k in 0..self.dim {
            let jj = self.apply(&self.apply_basis(k));
            for i in 0..self.dim {
                let want = if i == k { -1.0 } else { 0.0 };
                worst = worst.max((jj[i] - want).abs());
            }
        }
        worst
    }
}

/// Nijenhuis tensor components `N(e_i, e_j)^k`; the structure is integrable
/// exactly when the max norm vanishes.
pub fn nijenhuis_tensor(a: &LieAlgebra, j: &ComplexStructure) -> Vec<f64> {
    let m = a.dim();
    let mut n = vec![0.0; m * m * m];
    for i in 0..m {
        let jei = j.apply_basis(i);
        for jj in 0..m {
            let jej = j.apply_basis(jj);
            let mut ei = vec![0.0; m];
            ei[i] = 1.0;
            let mut ej = vec![0.0; m];
            ej[jj] = 1.0;
            let t1 = a.bracket(&jei, &jej);
            let t2 = a.bracket(&ei, &ej);
            let inner: Vec<f64> = a
                .bracket(&jei, &ej)
                .iter()
                .zip(a.bracket(&ei, &jej))
                .map(|(u, v)| u + v)
                .collect();
            let t3 = j.apply(&inner);
            for k in 0..m {
                n[(i * m + jj) * m + k] = t1[k] - t2[k] - t3[k];
            }
        }
    }
    n
}

pub fn nijenhuis_max(a: &LieAlgebra, j: &ComplexStructure) -> f64 {
    nijenhuis_tensor(a, j)
        .iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

// ---------------------------------------------------------------------------
// Salamon notation.
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            text: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn rest(&self) -> &str {
        std::str::from_utf8(&self.text[self.pos..]).unwrap_or("")
    }

    fn eat(&mut self, expected: char) -> Result<()> {
        match self.peek() {
            Some(ch) if ch == expected => {
                self.pos += ch.len_utf8();
                Ok(())
            }
            other => Err(self.error(&format!("expected `{expected}`, found {other:?}"))),
        }
    }

    fn try_eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.pos += expected.len_utf8();
            true
        } else {
            false
        }
    }

    /// Consumes a sign token; supports ASCII `-` and U+2212.
    fn try_sign(&mut self) -> Option<f64> {
        match self.peek() {
            Some('+') => {
                self.pos += 1;
                Some(1.0)
            }
            Some('-') | Some('\u{2212}') => {
                let ch = self.peek().unwrap();
                self.pos += ch.len_utf8();
                Some(-1.0)
            }
            _ => None,
        }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() {
            let ch = self.text[self.pos] as char;
            if ch.is_ascii_digit() || ch == '.' || ((ch == 'e' || ch == 'E') && self.pos > start) {
                self.pos += 1;
            } else if (ch == '+' || ch == '-')
                && self.pos > start
                && matches!(self.text[self.pos - 1] as char, 'e' | 'E')
            {
                self.pos += 1;
            } else {
                break;
            }
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).unwrap();
        s.parse::<f64>().map_err(|_| Error::Parse {
            pos: start,
            msg: format!("bad number `{s}`"),
        })
    }

    fn identifier(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() {
            let ch = self.text[self.pos] as char;
            if ch.is_ascii_alphanumeric() || ch == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.error("expected identifier"));
        }
        Ok(std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .to_string())
    }
}

/// Parses a Salamon structure-equation tuple into a [`LieAlgebra`].
///
/// Grammar: `tuple := "(" entry ("," entry)* ")"`,
/// `entry := "0" | [sign] term (sign term)*`,
/// `term := [coef "*"] "e^{" i j "}" | [coef "*"] "e^{" i "," j "}"`,
/// `coef := number | parameter name` (two-digit index form only for m ≤ 9).
pub fn parse_salamon(text: &str, params: &BTreeMap<String, f64>) -> Result<LieAlgebra> {
    let mut cur = Cursor::new(text);
    cur.eat('(')?;
    let mut entries: Vec<Vec<(usize, usize, f64)>> = Vec::new();
    loop {
        entries.push(parse_entry(&mut cur, params)?);
        if cur.try_eat(',') {
            continue;
        }
        cur.eat(')')?;
        break;
    }
    let dim = entries.len();
    for terms in &entries {
        for &(i, j, _) in terms {
            if i >= dim || j >= dim {
                return Err(Error::Parse {
                    pos: 0,
                    msg: format!("index e^{{{}{}}} out of range for dim {dim}", i + 1, j + 1),
                });
            }
        }
    }
    let mut flat = Vec::new();
    for (k, terms) in entries.iter().enumerate() {
        for &(i, j, v) in terms {
            flat.push((k, i, j, v));
        }
    }
    LieAlgebra::new(dim, &flat, tol::CONSTRUCTION)
}

fn parse_entry(
    cur: &mut Cursor,
    params: &BTreeMap<String, f64>,
) -> Result<Vec<(usize, usize, f64)>> {
    if cur.peek() == Some('0') {
        let save = cur.pos;
        cur.pos += 1;
        // A bare zero entry; "0.5*e^{12}" style coefficients re-enter below.
        match cur.peek() {
            Some(',') | Some(')') | None => return Ok(Vec::new()),
            _ => cur.pos = save,
        }
    }
    let mut terms = Vec::new();
    let mut sign = cur.try_sign().unwrap_or(1.0);
    loop {
        let (i, j, coef) = parse_term(cur, params)?;
        terms.push((i, j, sign * coef));
        match cur.try_sign() {
            Some(s) => sign = s,
            None => break,
        }
    }
    Ok(terms)
}

fn parse_term(cur: &mut Cursor, params: &BTreeMap<String, f64>) -> Result<(usize, usize, f64)> {
    let mut coef = 1.0;
    match cur.peek() {
        Some(ch) if ch.is_ascii_digit() || ch == '.' => {
            // Either a coefficient ("0.5*e^{12}") or a bare index pair ("12").
            let num = cur.number()?;
            if cur.try_eat('*') {
                coef = num;
            } else {
                return index_pair_from_number(cur, num, 1.0);
            }
        }
        Some(ch) if ch.is_ascii_alphabetic() && ch != 'e' => {
            let name = cur.identifier()?;
            coef = *params
                .get(&name)
                .ok_or_else(|| Error::UnboundParameter(name.clone()))?;
            cur.eat('*')?;
        }
        Some('e') => {
            // Could still be a parameter starting with 'e' (e.g. "eps*e^{12}").
            let save = cur.pos;
            let name = cur.identifier()?;
            if name == "e" && cur.peek() == Some('^') {
                cur.pos = save;
            } else {
                coef = *params
                    .get(&name)
                    .ok_or_else(|| Error::UnboundParameter(name.clone()))?;
                cur.eat('*')?;
            }
        }
        _ => {}
    }
    // Bare index pair after an explicit coefficient.
    if let Some(ch) = cur.peek() {
        if ch.is_ascii_digit() {
            let num = cur.number()?;
            return index_pair_from_number(cur, num, coef);
        }
    }
    let name = cur.identifier()?;
    if name != "e" {
        return Err(cur.error(&format!("expected `e^{{..}}`, found `{name}`")));
    }
    cur.eat('^')?;
    cur.eat('{')?;
    cur.skip_ws();
    let first = cur.number()? as i64;
    let (i, j) = if cur.try_eat(',') {
        let second = cur.number()? as i64;
        (first, second)
    } else {
        // Two-digit form: the number lexer consumed both digits.
        if !(11..=99).contains(&first) {
            return Err(cur.error(&format!("bad two-digit index pair `{first}`")));
        }
        (first / 10, first % 10)
    };
    cur.eat('}')?;
    check_pair(cur, i, j)?;
    Ok(((i - 1) as usize, (j - 1) as usize, coef))
}

fn index_pair_from_number(cur: &Cursor, num: f64, coef: f64) -> Result<(usize, usize, f64)> {
    let n = num as i64;
    if num.fract() != 0.0 || !(11..=99).contains(&n) {
        return Err(cur.error(&format!("bad bare index pair `{num}`")));
    }
    let (i, j) = (n / 10, n % 10);
    check_pair(cur, i, j)?;
    Ok(((i - 1) as usize, (j - 1) as usize, coef))
}

fn check_pair(cur: &Cursor, i: i64, j: i64) -> Result<()> {
    if i < 1 || j < 1 || i == j {
        return Err(cur.error(&format!("bad index pair ({i},{j})")));
    }
    Ok(())
}

/// Inverse printer for [`parse_salamon`]; `parse ∘ render` is the identity on
/// structure constants.
pub fn render_salamon(a: &LieAlgebra) -> String {
    let dim = a.dim();
    let mut entries = Vec::new();
    for k in 0..dim {
        let mut parts: Vec<String> = Vec::new();
        for i in 0..dim {
            for j in i + 1..dim {
                let v = a.c(k, i, j);
                if v == 0.0 {
                    continue;
                }
                let idx = if dim <= 9 {
                    format!("e^{{{}{}}}", i + 1, j + 1)
                } else {
                    format!("e^{{{},{}}}", i + 1, j + 1)
                };
                let (sign, mag) = if v < 0.0 { ("-", -v) } else { ("+", v) };
                let body = if mag == 1.0 {
                    idx
                } else {
                    format!("{mag}*{idx}")
                };
                if parts.is_empty() {
                    parts.push(if sign == "-" {
                        format!("-{body}")
                    } else {
                        body
                    });
                } else {
                    parts.push(format!("{sign}{body}"));
                }
            }
        }
        entries.push(if parts.is_empty() {
            "0".to_string()
        } else {
            parts.concat()
        });
    }
    format!("({})", entries.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_kodaira_thurston() {
        let a = parse_salamon("(0,0,0,12)", &BTreeMap::new()).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(a.c(3, 0, 1), 1.0);
        assert_eq!(a.c(3, 1, 0), -1.0);
        assert_eq!(jacobi_residual(&a), 0.0);
    }

    #[test]
    fn parse_abelian_and_g2_0() {
        let ab = parse_salamon("(0,0,0,0,0,0)", &BTreeMap::new()).unwrap();
        assert_eq!(ab.dim(), 6);
        assert_eq!(jacobi_residual(&ab), 0.0);
        let g20 =
            parse_salamon("(e^{25}, -e^{15}, e^{45}, -e^{35}, 0, 0)", &BTreeMap::new()).unwrap();
        assert_eq!(g20.c(0, 1, 4), 1.0);
        assert_eq!(g20.c(1, 0, 4), -1.0);
        assert_eq!(g20.c(2, 3, 4), 1.0);
        assert_eq!(g20.c(3, 2, 4), -1.0);
        assert_eq!(jacobi_residual(&g20), 0.0);
    }

    #[test]
    fn parse_unicode_minus_and_params() {
        let mut params = BTreeMap::new();
        params.insert("alpha".to_string(), 0.5);
        let a = parse_salamon(
            "(alpha*e^{15} + e^{25}, \u{2212}e^{15} + alpha*e^{25}, -alpha*e^{35}+e^{45}, -e^{35}-alpha*e^{45}, 0, 0)",
            &params,
        )
        .unwrap();
        assert_eq!(a.c(0, 0, 4), 0.5);
        assert_eq!(a.c(1, 0, 4), -1.0);
    }

    #[test]
    fn unbound_parameter_is_reported() {
        let err = parse_salamon("(beta*e^{12},0)", &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::UnboundParameter(name) if name == "beta"));
    }

    #[test]
    fn jacobi_violation_reports_worst_triple() {
        // (0,0,0,12) plus a spurious c^1_{34} breaks Jacobi.
        let err = LieAlgebra::new(4, &[(3, 0, 1, 1.0), (0, 2, 3, 1.0)], tol::CONSTRUCTION);
        match err {
            Err(Error::JacobiViolation { residual, .. }) => assert!(residual > 0.1),
            other => panic!("expected Jacobi violation, got {other:?}"),
        }
    }

    #[test]
    fn g4_satisfies_jacobi() {
        let g4 = parse_salamon(
            "(e^{23}, -e^{36}, e^{26}, -e^{56}, e^{46}, 0)",
            &BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(jacobi_residual(&g4), 0.0);
    }

    #[test]
    fn render_round_trips() {
        for text in [
            "(0,0,0,12)",
            "(e^{25},-e^{15},e^{45},-e^{35},0,0)",
            "(e^{24}+e^{35},e^{26},e^{36},-e^{46},-e^{56},0)",
            "(e^{16}-e^{25},e^{15}+e^{26},-e^{36}+e^{45},-e^{35}-e^{46},0,0)",
        ] {
            let a = parse_salamon(text, &BTreeMap::new()).unwrap();
            let b = parse_salamon(&render_salamon(&a), &BTreeMap::new()).unwrap();
            assert_eq!(a, b, "round trip failed for {text}");
        }
    }

    #[test]
    fn nijenhuis_detects_integrability() {
        let a = parse_salamon("(0,0,0,12)", &BTreeMap::new()).unwrap();
        // Example J: J e1 = -e2, J e3 = -e4 (integrable).
        let mut good = vec![0.0; 16];
        good[4] = -1.0;
        good[1] = 1.0;
        good[14] = -1.0;
        good[11] = 1.0;
        let j = ComplexStructure::new(4, good).unwrap();
        assert!(nijenhuis_max(&a, &j) < 1e-15);

        // J e1 = -e3, J e2 = -e4 pairs a bracket direction with the center.
        let mut bad = vec![0.0; 16];
        bad[8] = -1.0;
        bad[2] = 1.0;
        bad[13] = -1.0;
        bad[7] = 1.0;
        let j2 = ComplexStructure::new(4, bad).unwrap();
        assert!(nijenhuis_max(&a, &j2) > 0.5);

        let ab = LieAlgebra::abelian(4);
        assert!(nijenhuis_max(&ab, &j2) == 0.0);
    }

    #[test]
    fn json_round_trip() {
        let a = parse_salamon("(e^{25},-e^{15},e^{45},-e^{35},0,0)", &BTreeMap::new()).unwrap();
        let b = LieAlgebra::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
    }
}
