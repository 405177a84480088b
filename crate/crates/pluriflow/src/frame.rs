//! Complexified (1,0)-frames and the bracket table `μ^C_{AB}`.
//!
//! Indices run over the alphabet `{0..n-1}` (holomorphic, `Z_r`) followed by
//! `{n..2n-1}` (antiholomorphic, `Z_r̄`). The involution [`ComplexFrame::bar`]
//! swaps the two blocks. The frame form of integrability is
//! `μ^{c̄}_{ab} = 0` for unbarred `a, b` and barred target, and reality is
//! `conj(μ^C_{AB}) = μ^{C̄}_{ĀB̄}`.

use crate::algebra::{nijenhuis_max, ComplexStructure, LieAlgebra};
use crate::linalg::CMat;
use crate::{tol, Error, Result, C64};
use std::sync::Arc;

/// Alphabet index: `0..n` holomorphic, `n..2n` antiholomorphic.
pub type Idx = usize;

/// Complexified bracket coefficients on a 2n-letter alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Mu {
    n: usize,
    coef: Vec<C64>,
}

impl Mu {
    pub fn zero(n: usize) -> Self {
        let s = 2 * n;
        Mu {
            n,
            coef: vec![C64::new(0.0, 0.0); s * s * s],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn pos(&self, c: Idx, a: Idx, b: Idx) -> usize {
        let s = 2 * self.n;
        (c * s + a) * s + b
    }

    /// Coefficient `μ^C_{AB}`.
    pub fn get(&self, c: Idx, a: Idx, b: Idx) -> C64 {
        self.coef[self.pos(c, a, b)]
    }

    /// Sets `μ^C_{AB}` and `μ^C_{BA} = −μ^C_{AB}`.
    pub fn set(&mut self, c: Idx, a: Idx, b: Idx, v: C64) {
        let p = self.pos(c, a, b);
        self.coef[p] = v;
        let q = self.pos(c, b, a);
        self.coef[q] = -v;
    }

    pub fn add(&mut self, c: Idx, a: Idx, b: Idx, v: C64) {
        let cur = self.get(c, a, b);
        self.set(c, a, b, cur + v);
    }

    pub fn bar(&self, a: Idx) -> Idx {
        (a + self.n) % (2 * self.n)
    }

    /// `μ(E_A, E_B)` as a coefficient vector over the alphabet.
    pub fn bracket_basis(&self, a: Idx, b: Idx) -> Vec<C64> {
        (0..2 * self.n).map(|c| self.get(c, a, b)).collect()
    }

    /// Bilinear extension to alphabet coefficient vectors.
    pub fn bracket(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let s = 2 * self.n;
        let mut out = vec![C64::new(0.0, 0.0); s];
        for a in 0..s {
            if x[a].norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..s {
                if y[b].norm_sqr() == 0.0 {
                    continue;
                }
                let f = x[a] * y[b];
                for c in 0..s {
                    let v = self.get(c, a, b);
                    if v.norm_sqr() != 0.0 {
                        out[c] += f * v;
                    }
                }
            }
        }
        out
    }

    /// Max violation of `conj(μ^C_{AB}) = μ^{C̄}_{ĀB̄}`.
    pub fn reality_residual(&self) -> f64 {
        let s = 2 * self.n;
        let mut worst = 0.0_f64;
        for c in 0..s {
            for a in 0..s {
                for b in 0..s {
                    let d =
                        self.get(c, a, b).conj() - self.get(self.bar(c), self.bar(a), self.bar(b));
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    /// Max `|μ^{c̄}_{ab}|` over unbarred `a, b` and barred target: the frame
    /// form of the integrability condition.
    pub fn integrability_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for c in n..2 * n {
            for a in 0..n {
                for b in 0..n {
                    worst = worst.max(self.get(c, a, b).norm());
                }
            }
        }
        worst
    }

    /// Max complex Jacobi residual.
    pub fn jacobi_residual(&self) -> f64 {
        let s = 2 * self.n;
        let mut worst = 0.0_f64;
        for a in 0..s {
            for b in a + 1..s {
                for c in b + 1..s {
                    let va = self.bracket_basis(b, c);
                    let t1 = self.bracket_with_basis_left(a, &va);
                    let vb = self.bracket_basis(c, a);
                    let t2 = self.bracket_with_basis_left(b, &vb);
                    let vc = self.bracket_basis(a, b);
                    let t3 = self.bracket_with_basis_left(c, &vc);
                    for k in 0..s {
                        worst = worst.max((t1[k] + t2[k] + t3[k]).norm());
                    }
                }
            }
        }
        worst
    }

    fn bracket_with_basis_left(&self, a: Idx, y: &[C64]) -> Vec<C64> {
        let s = 2 * self.n;
        let mut out = vec![C64::new(0.0, 0.0); s];
        for b in 0..s {
            if y[b].norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..s {
                out[c] += y[b] * self.get(c, a, b);
            }
        }
        out
    }

    /// Euclidean norm of all coefficients.
    pub fn norm(&self) -> f64 {
        self.coef.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Push the bracket through the complex-linear frame change whose
    /// unbarred block is `a` (barred block acts by conjugation):
    /// `μ'(x, y) = P⁻¹ μ(P x, P y)` with `P = diag(a, conj a)`.
    pub fn change_basis(&self, a: &CMat) -> Result<Mu> {
        let n = self.n;
        let s = 2 * n;
        let p = CMat::from_fn(s, s, |i, j| {
            if i < n && j < n {
                a[(i, j)]
            } else if i >= n && j >= n {
                a[(i - n, j - n)].conj()
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let mut out = Mu::zero(n);
        for ai in 0..s {
            let pa: Vec<C64> = (0..s).map(|r| p[(r, ai)]).collect();
            for bi in ai + 1..s {
                let pb: Vec<C64> = (0..s).map(|r| p[(r, bi)]).collect();
                let w = self.bracket(&pa, &pb);
                let x = p.solve_vec(&w)?;
                for c in 0..s {
                    if x[c].norm_sqr() != 0.0 {
                        out.set(c, ai, bi, x[c]);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// A (1,0)-frame over a real Lie algebra with its complexified brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFrame {
    n: usize,
    pub algebra: LieAlgebra,
    pub j: ComplexStructure,
    /// m×n matrix whose r-th column gives `Z_r` over the real basis.
    pub z: CMat,
    pub mu: Mu,
}

impl ComplexFrame {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        2 * self.n
    }

    pub fn bar(&self, a: Idx) -> Idx {
        (a + self.n) % (2 * self.n)
    }

    pub fn is_barred(&self, a: Idx) -> bool {
        a >= self.n
    }

    /// Eigenvalue of J on `E_A`: `+i` on holomorphic, `−i` on barred letters.
    pub fn j_eigen(&self, a: Idx) -> C64 {
        if self.is_barred(a) {
            C64::new(0.0, -1.0)
        } else {
            C64::new(0.0, 1.0)
        }
    }

    /// Coefficients of `E_A` over the real basis.
    pub fn basis_vector(&self, a: Idx) -> Vec<C64> {
        let m = self.algebra.dim();
        if self.is_barred(a) {
            (0..m).map(|i| self.z[(i, a - self.n)].conj()).collect()
        } else {
            (0..m).map(|i| self.z[(i, a)]).collect()
        }
    }

    /// Two frames are interchangeable when their alphabets and brackets agree
    /// exactly.
    pub fn compatible(&self, other: &ComplexFrame) -> bool {
        self.n == other.n && self.mu == other.mu
    }

    /// Recovers `[e_i, e_j]` from the complexified brackets alone (the
    /// de-complexification); the result must match the stored structure
    /// constants and be real.
    pub fn real_bracket_from_mu(&self, i: usize, j: usize) -> Result<Vec<f64>> {
        let m = self.algebra.dim();
        let t = CMat::from_fn(m, m, |r, col| {
            if col < self.n {
                self.z[(r, col)]
            } else {
                self.z[(r, col - self.n)].conj()
            }
        });
        let mut ei = vec![C64::new(0.0, 0.0); m];
        ei[i] = C64::new(1.0, 0.0);
        let mut ej = vec![C64::new(0.0, 0.0); m];
        ej[j] = C64::new(1.0, 0.0);
        let xi = t.solve_vec(&ei)?;
        let xj = t.solve_vec(&ej)?;
        let w = self.mu.bracket(&xi, &xj);
        let back = t.mul_vec(&w);
        let imag = back.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > crate::tol::USER_INPUT {
            return Err(Error::Reality(imag));
        }
        Ok(back.iter().map(|z| z.re).collect())
    }
}

/// Builds the (1,0)-frame of an integrable structure. The real index
/// selection is the greedy pivoted one: basis vectors are scanned in order
/// and kept when their (1,0)-projections extend an independent set.
pub fn complexify(a: &LieAlgebra, j: &ComplexStructure) -> Result<Arc<ComplexFrame>> {
    let m = a.dim();
    if m % 2 != 0 {
        return Err(Error::Dimension(format!(
            "odd-dimensional algebra (dim {m})"
        )));
    }
    if j.dim() != m {
        return Err(Error::Dimension("J dimension differs from algebra".into()));
    }
    let nij = nijenhuis_max(a, j);
    if nij > tol::USER_INPUT {
        return Err(Error::NotIntegrable(nij));
    }
    let n = m / 2;

    // (1,0)-projections P e_k = (e_k − i J e_k)/2.
    let proj = CMat::from_fn(m, m, |i, k| {
        let jk = j.entry(i, k);
        (C64::new(if i == k { 1.0 } else { 0.0 }, 0.0) - C64::new(0.0, 1.0) * jk) * 0.5
    });

    let mut selected: Vec<usize> = Vec::new();
    let mut ortho: Vec<Vec<C64>> = Vec::new();
    for k in 0..m {
        if selected.len() == n {
            break;
        }
        let mut cand: Vec<C64> = (0..m).map(|i| proj[(i, k)]).collect();
        for u in &ortho {
            let dot: C64 = u.iter().zip(&cand).map(|(a, b)| a.conj() * b).sum();
            for i in 0..m {
                cand[i] -= dot * u[i];
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for z in cand.iter_mut() {
                *z /= norm;
            }
            ortho.push(cand);
            selected.push(k);
        }
    }
    if selected.len() < n {
        return Err(Error::DegenerateEigenbasis {
            got: selected.len(),
            need: n,
        });
    }
    let z = CMat::from_fn(m, n, |i, r| proj[(i, selected[r])]);
    frame_from_z(a.clone(), j.clone(), z)
}

fn frame_from_z(a: LieAlgebra, j: ComplexStructure, z: CMat) -> Result<Arc<ComplexFrame>> {
    let m = a.dim();
    let n = m / 2;
    let t = CMat::from_fn(m, m, |i, col| {
        if col < n {
            z[(i, col)]
        } else {
            z[(i, col - n)].conj()
        }
    });
    let mut mu = Mu::zero(n);
    let cols: Vec<Vec<C64>> = (0..m)
        .map(|c| (0..m).map(|i| t[(i, c)]).collect())
        .collect();
    for ai in 0..m {
        for bi in ai + 1..m {
            // Complexified real bracket of the frame vectors.
            let mut w = vec![C64::new(0.0, 0.0); m];
            for i in 0..m {
                if cols[ai][i].norm_sqr() == 0.0 {
                    continue;
                }
                for jj in 0..m {
                    if cols[bi][jj].norm_sqr() == 0.0 {
                        continue;
                    }
                    let f = cols[ai][i] * cols[bi][jj];
                    for k in 0..m {
                        let c = a.c(k, i, jj);
                        if c != 0.0 {
                            w[k] += f * c;
                        }
                    }
                }
            }
            let x = t.solve_vec(&w)?;
            for c in 0..m {
                mu.set(c, ai, bi, x[c]);
            }
        }
    }
    // Enforce reality exactly; the solve introduces only rounding noise.
    let real_res = mu.reality_residual();
    if real_res > tol::USER_INPUT {
        return Err(Error::Reality(real_res));
    }
    let mut sym = Mu::zero(n);
    for c in 0..m {
        for ai in 0..m {
            for bi in ai + 1..m {
                let v =
                    (mu.get(c, ai, bi) + mu.get(mu.bar(c), mu.bar(ai), mu.bar(bi)).conj()) * 0.5;
                sym.set(c, ai, bi, v);
            }
        }
    }
    let frame = ComplexFrame {
        n,
        algebra: a,
        j,
        z,
        mu: sym,
    };
    let integ = frame.mu.integrability_residual();
    if integ > tol::USER_INPUT {
        return Err(Error::NotIntegrable(integ));
    }
    Ok(Arc::new(frame))
}

/// Builds a frame on an abstract real basis from the data of `dα^k`.
///
/// `dalpha[k]` lists `(A, B, coef)` monomials `coef·α^A ∧ α^B` of
/// `dα^{k+1}` over the alphabet. The brackets follow from
/// `dα^C(X, Y) = −α^C(μ(X, Y))` and extend by conjugation; monomials of
/// bidegree (0,2) are rejected (they contradict integrability).
pub fn frame_from_dalpha(n: usize, dalpha: &[Vec<(Idx, Idx, C64)>]) -> Result<Arc<ComplexFrame>> {
    if dalpha.len() != n {
        return Err(Error::Dimension(format!(
            "need {n} equations dα^k, got {}",
            dalpha.len()
        )));
    }
    let m = 2 * n;
    let mut mu = Mu::zero(n);
    for (k, terms) in dalpha.iter().enumerate() {
        for &(a, b, coef) in terms {
            if a >= m || b >= m || a == b {
                return Err(Error::Dimension(format!("bad monomial indices ({a},{b})")));
            }
            if a >= n && b >= n {
                return Err(Error::NotIntegrable(coef.norm()));
            }
            // dα^k = Σ coef α^{AB}  ⇒  μ^k_{AB} = −coef.
            mu.add(k, a, b, -coef);
        }
    }
    // Conjugate extension: μ^{k̄}_{ĀB̄} = conj(μ^k_{AB}).
    let snapshot = mu.clone();
    for c in 0..n {
        for a in 0..m {
            for b in (a + 1)..m {
                let v = snapshot.get(c, a, b);
                if v.norm_sqr() != 0.0 {
                    mu.set(mu.bar(c), mu.bar(a), mu.bar(b), v.conj());
                }
            }
        }
    }

    // Real basis f_{2r} = Z_r + Z_r̄, f_{2r+1} = i(Z_r − Z_r̄).
    let alph_of_f = |idx: usize| -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); m];
        let r = idx / 2;
        if idx % 2 == 0 {
            v[r] = C64::new(1.0, 0.0);
            v[n + r] = C64::new(1.0, 0.0);
        } else {
            v[r] = C64::new(0.0, 1.0);
            v[n + r] = C64::new(0.0, -1.0);
        }
        v
    };
    let mut entries = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let w = mu.bracket(&alph_of_f(a), &alph_of_f(b));
            for r in 0..n {
                // Real coefficients: f_{2r} gets Re w^r, f_{2r+1} gets Im w^r,
                // provided w^{r̄} = conj(w^r).
                let defect = (w[n + r] - w[r].conj()).norm();
                if defect > tol::USER_INPUT {
                    return Err(Error::Reality(defect));
                }
                if w[r].re != 0.0 {
                    entries.push((2 * r, a, b, w[r].re));
                }
                if w[r].im != 0.0 {
                    entries.push((2 * r + 1, a, b, w[r].im));
                }
            }
        }
    }
    let algebra = LieAlgebra::new(m, &entries, tol::USER_INPUT)?;
    let mut jmat = vec![0.0; m * m];
    for r in 0..n {
        jmat[(2 * r + 1) * m + 2 * r] = 1.0;
        jmat[(2 * r) * m + (2 * r + 1)] = -1.0;
    }
    let j = ComplexStructure::new(m, jmat)?;
    let z = CMat::from_fn(m, n, |i, r| {
        if i == 2 * r {
            C64::new(0.5, 0.0)
        } else if i == 2 * r + 1 {
            C64::new(0.0, -0.5)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let frame = ComplexFrame {
        n,
        algebra,
        j,
        z,
        mu,
    };
    Ok(Arc::new(frame))
}

// ---------------------------------------------------------------------------
// Complex structure-equation DSL.
// ---------------------------------------------------------------------------

/// Parses the complex structure-equation DSL, e.g. the frame of the first
/// solvable calibration algebra:
///
/// ```text
/// d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = 0
/// ```
///
/// A tilde before an index conjugates it (`a{1~3}` is `α^1 ∧ α^{3̄}`).
/// Coefficients are complex literals: `2`, `i`, `-i`, `1.5*i`, `(1+2i)`.
pub fn parse_complex_equations(
    text: &str,
) -> Result<(LieAlgebra, ComplexStructure, Arc<ComplexFrame>)> {
    let chunks: Vec<&str> = text
        .split(|ch| ch == ';' || ch == '\n')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let n = chunks.len();
    let mut dalpha: Vec<Option<Vec<(Idx, Idx, C64)>>> = vec![None; n];
    for chunk in chunks {
        let (k, terms) = parse_equation(chunk, n)?;
        if dalpha[k].is_some() {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("duplicate equation for a{}", k + 1),
            });
        }
        dalpha[k] = Some(terms);
    }
    let dalpha: Vec<Vec<(Idx, Idx, C64)>> = dalpha
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            v.ok_or(Error::Parse {
                pos: 0,
                msg: format!("missing equation for a{}", k + 1),
            })
        })
        .collect::<Result<_>>()?;
    let frame = frame_from_dalpha(n, &dalpha)?;
    Ok((frame.algebra.clone(), frame.j.clone(), frame))
}

struct DslCursor<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> DslCursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        std::str::from_utf8(&self.text[self.pos..])
            .ok()?
            .chars()
            .next()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek()?;
        self.pos += ch.len_utf8();
        Some(ch)
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
            if ch.is_ascii_digit() || ch == '.' {
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

    /// Single decimal digit (coframe indices inside `a{..}` monomials).
    fn digit(&mut self) -> Result<usize> {
        match self.peek() {
            Some(ch) if ch.is_ascii_digit() => {
                self.pos += 1;
                Ok(ch as usize - '0' as usize)
            }
            other => Err(self.error(&format!("expected digit, found {other:?}"))),
        }
    }
}

fn parse_equation(chunk: &str, n: usize) -> Result<(usize, Vec<(Idx, Idx, C64)>)> {
    let mut cur = DslCursor {
        text: chunk.as_bytes(),
        pos: 0,
    };
    if cur.bump() != Some('d') {
        return Err(cur.error("equation must start with `d`"));
    }
    if cur.bump() != Some('a') {
        return Err(cur.error("expected `a<k>` after `d`"));
    }
    let k = cur.number()? as usize;
    if k < 1 || k > n {
        return Err(cur.error(&format!("coframe index a{k} out of range 1..{n}")));
    }
    if cur.bump() != Some('=') {
        return Err(cur.error("expected `=`"));
    }
    if cur.peek() == Some('0') {
        cur.bump();
        cur.skip_ws();
        if cur.pos == cur.text.len() {
            return Ok((k - 1, Vec::new()));
        }
        return Err(cur.error("trailing input after `0`"));
    }
    let mut terms = Vec::new();
    let mut sign = match cur.peek() {
        Some('-') | Some('\u{2212}') => {
            cur.bump();
            -1.0
        }
        Some('+') => {
            cur.bump();
            1.0
        }
        _ => 1.0,
    };
    loop {
        let (a, b, coef) = parse_dsl_term(&mut cur, n)?;
        terms.push((a, b, coef * sign));
        cur.skip_ws();
        match cur.peek() {
            Some('+') => {
                cur.bump();
                sign = 1.0;
            }
            Some('-') | Some('\u{2212}') => {
                cur.bump();
                sign = -1.0;
            }
            None => break,
            Some(ch) => return Err(cur.error(&format!("unexpected `{ch}`"))),
        }
    }
    Ok((k - 1, terms))
}

fn parse_dsl_term(cur: &mut DslCursor, n: usize) -> Result<(Idx, Idx, C64)> {
    let mut coef = C64::new(1.0, 0.0);
    let mut monomial: Option<(Idx, Idx, f64)> = None;
    loop {
        match cur.peek() {
            Some('i') => {
                cur.bump();
                coef *= C64::new(0.0, 1.0);
            }
            Some('(') => {
                cur.bump();
                let re = signed_number(cur)?;
                let mut z = C64::new(re, 0.0);
                match cur.peek() {
                    Some('+') | Some('-') | Some('\u{2212}') => {
                        let neg = cur.bump() != Some('+');
                        let im = if cur.peek() == Some('i') {
                            1.0
                        } else {
                            cur.number()?
                        };
                        if cur.peek() == Some('i') {
                            cur.bump();
                        } else {
                            return Err(cur.error("expected `i` in complex literal"));
                        }
                        z.im = if neg { -im } else { im };
                    }
                    _ => {}
                }
                if cur.bump() != Some(')') {
                    return Err(cur.error("expected `)`"));
                }
                coef *= z;
            }
            Some(ch) if ch.is_ascii_digit() || ch == '.' => {
                let v = cur.number()?;
                coef *= v;
            }
            Some('a') => {
                cur.bump();
                if cur.bump() != Some('{') {
                    return Err(cur.error("expected `{` after `a`"));
                }
                let mut idxs = Vec::new();
                loop {
                    match cur.peek() {
                        Some('}') => {
                            cur.bump();
                            break;
                        }
                        Some('~') => {
                            cur.bump();
                            let i = cur.digit()?;
                            if i < 1 || i > n {
                                return Err(cur.error(&format!("index {i} out of range")));
                            }
                            idxs.push(n + i - 1);
                        }
                        Some(ch) if ch.is_ascii_digit() => {
                            let i = cur.digit()?;
                            if i < 1 || i > n {
                                return Err(cur.error(&format!("index {i} out of range")));
                            }
                            idxs.push(i - 1);
                        }
                        other => return Err(cur.error(&format!("unexpected {other:?} in a{{..}}"))),
                    }
                }
                if idxs.len() != 2 {
                    return Err(cur.error("monomial must have exactly two indices"));
                }
                let (a, b) = (idxs[0], idxs[1]);
                if a == b {
                    return Err(cur.error("repeated index in monomial"));
                }
                let (a, b, s) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
                if monomial.is_some() {
                    return Err(cur.error("two monomials in one term"));
                }
                monomial = Some((a, b, s));
            }
            Some('*') => {
                cur.bump();
            }
            _ => break,
        }
        cur.skip_ws();
        match cur.peek() {
            Some('*') => {
                cur.bump();
            }
            Some('a') | Some('i') | Some('(') => {}
            Some(ch) if ch.is_ascii_digit() || ch == '.' => {}
            _ => break,
        }
    }
    let (a, b, s) = monomial.ok_or_else(|| cur.error("term without a{..} monomial"))?;
    Ok((a, b, coef * s))
}

fn signed_number(cur: &mut DslCursor) -> Result<f64> {
    let neg = match cur.peek() {
        Some('-') | Some('\u{2212}') => {
            cur.bump();
            true
        }
        Some('+') => {
            cur.bump();
            false
        }
        _ => false,
    };
    let v = cur.number()?;
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_salamon;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn kt_frame() -> Arc<ComplexFrame> {
        let a = parse_salamon("(0,0,0,12)", &BTreeMap::new()).unwrap();
        let mut jm = vec![0.0; 16];
        jm[4] = -1.0;
        jm[1] = 1.0;
        jm[14] = -1.0;
        jm[11] = 1.0;
        let j = ComplexStructure::new(4, jm).unwrap();
        complexify(&a, &j).unwrap()
    }

    #[test]
    fn kodaira_thurston_bracket() {
        let f = kt_frame();
        // Z_1 = (e_1 + i e_2)/2, Z_2 = (e_3 + i e_4)/2.
        assert!((f.z[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((f.z[(1, 0)] - c(0.0, 0.5)).norm() < 1e-15);
        // Only nonzero bracket: μ(Z_1, Z_1̄) = −(Z_2 − Z_2̄)/2.
        let w = f.mu.bracket_basis(0, 2);
        assert!((w[1] - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((w[3] - c(0.5, 0.0)).norm() < 1e-14);
        assert!(w[0].norm() < 1e-14 && w[2].norm() < 1e-14);
        let mut total = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                if (a, b) != (0, 2) && (a, b) != (2, 0) {
                    total +=
                        f.mu.bracket_basis(a, b)
                            .iter()
                            .map(|z| z.norm())
                            .sum::<f64>();
                }
            }
        }
        assert!(total < 1e-13, "unexpected extra brackets: {total}");
        assert!(f.mu.reality_residual() < 1e-14);
        assert!(f.mu.integrability_residual() < 1e-14);
        assert!(f.mu.jacobi_residual() < 1e-13);
    }

    #[test]
    fn abelian_frame_is_trivial() {
        let a = LieAlgebra::abelian(6);
        let j = ComplexStructure::standard(6);
        let f = complexify(&a, &j).unwrap();
        assert_eq!(f.mu.norm(), 0.0);
    }

    #[test]
    fn dsl_eq14_brackets() {
        let (_, _, f) = parse_complex_equations(
            "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = 0",
        )
        .unwrap();
        // μ_{13} = −i Z_1, μ_{1 3̄} = −i Z_1, μ_{23} = i Z_2, μ_{2 3̄} = i Z_2.
        assert!((f.mu.get(0, 0, 2) - c(0.0, -1.0)).norm() < 1e-14);
        assert!((f.mu.get(0, 0, 5) - c(0.0, -1.0)).norm() < 1e-14);
        assert!((f.mu.get(1, 1, 2) - c(0.0, 1.0)).norm() < 1e-14);
        assert!((f.mu.get(1, 1, 5) - c(0.0, 1.0)).norm() < 1e-14);
        assert!(f.mu.reality_residual() < 1e-14);
        assert!(f.mu.jacobi_residual() < 1e-13);
        assert!(f.mu.integrability_residual() == 0.0);
    }

    #[test]
    fn dsl_eq15_extra_bracket() {
        let (_, _, f) = parse_complex_equations(
            "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = a{1~1}",
        )
        .unwrap();
        // Sign “+”: μ(Z_1, Z_1̄) = −Z_3 + Z_3̄.
        assert!((f.mu.get(2, 0, 3) - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((f.mu.get(5, 0, 3) - c(1.0, 0.0)).norm() < 1e-14);
        assert!(f.mu.jacobi_residual() < 1e-13);
    }

    #[test]
    fn dsl_abelian() {
        let (a, _, f) = parse_complex_equations("d a1 = 0; d a2 = 0").unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(f.mu.norm(), 0.0);
    }

    #[test]
    fn dsl_rejects_antiholomorphic_pairs() {
        let err = parse_complex_equations("d a1 = a{~1~2}; d a2 = 0").unwrap_err();
        assert!(matches!(err, Error::NotIntegrable(_)));
    }

    #[test]
    fn dsl_round_trips_through_complexify() {
        let (a, j, f) = parse_complex_equations(
            "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = 0",
        )
        .unwrap();
        let g = complexify(&a, &j).unwrap();
        assert!(
            f.compatible(&g),
            "complexify must reproduce the parsed frame"
        );
    }

    #[test]
    fn change_basis_rescales_brackets() {
        let f = kt_frame();
        // Z'_1 = 2 Z_1: μ'(Z'_1, Z'_1̄) = 4 μ(Z_1, Z_1̄), expressed in Z' basis.
        let mut a = CMat::identity(2);
        a[(0, 0)] = c(2.0, 0.0);
        let mu2 = f.mu.change_basis(&a).unwrap();
        assert!((mu2.get(1, 0, 2) - c(-2.0, 0.0)).norm() < 1e-14);
    }
}
