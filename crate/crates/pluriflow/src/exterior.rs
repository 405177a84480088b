//! Exterior calculus of invariant complex forms.
//!
//! A form is stored on canonical monomials `α^{i_1..i_p} ∧ α^{j̄_1..j̄_q}`
//! indexed by a pair of bitmasks (unbarred, barred); permutation signs are
//! applied on access. The Chevalley–Eilenberg differential follows from
//! `dα^C(X, Y) = −α^C(μ(X, Y))` extended as an antiderivation, so `d∘d = 0`
//! is exactly the Jacobi identity of the frame.

use crate::frame::{ComplexFrame, Idx};
use crate::{Error, Result, C64};
use std::collections::BTreeMap;
use std::sync::Arc;

type Mask = u16;

/// Invariant complex form over a fixed frame. Not necessarily of pure
/// bidegree; every stored monomial carries its own `(p, q)`.
#[derive(Debug, Clone)]
pub struct InvariantForm {
    pub frame: Arc<ComplexFrame>,
    terms: BTreeMap<(Mask, Mask), C64>,
}

fn popcount(m: Mask) -> usize {
    m.count_ones() as usize
}

fn letters(m: Mask) -> impl Iterator<Item = usize> {
    (0..16).filter(move |b| m & (1 << b) != 0)
}

/// Parity of merging two disjoint ascending index sets: (−1)^{#inversions}.
fn merge_sign(a: Mask, b: Mask) -> f64 {
    let mut inversions = 0;
    for bb in letters(b) {
        let above = a >> (bb + 1);
        inversions += popcount(above);
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl InvariantForm {
    pub fn zero(frame: &Arc<ComplexFrame>) -> Self {
        InvariantForm {
            frame: frame.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// Constant function 1 (degree 0).
    pub fn one(frame: &Arc<ComplexFrame>) -> Self {
        let mut f = Self::zero(frame);
        f.add_term(0, 0, C64::new(1.0, 0.0));
        f
    }

    /// `coef · α^{A_1} ∧ … ∧ α^{A_k}` for alphabet letters in any order.
    pub fn monomial(frame: &Arc<ComplexFrame>, letters_in: &[Idx], coef: C64) -> Self {
        let n = frame.n();
        let mut f = Self::zero(frame);
        let mut sorted: Vec<Idx> = letters_in.to_vec();
        // Repeated letters kill the monomial.
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                if sorted[i] == sorted[j] {
                    return f;
                }
            }
        }
        let mut sign = 1.0;
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                if sorted[i] > sorted[j] {
                    sorted.swap(i, j);
                    sign = -sign;
                }
            }
        }
        let mut iu: Mask = 0;
        let mut jb: Mask = 0;
        for &l in &sorted {
            if l < n {
                iu |= 1 << l;
            } else {
                jb |= 1 << (l - n);
            }
        }
        f.add_term(iu, jb, coef * sign);
        f
    }

    /// Basis 1-form `α^A`.
    pub fn one_form(frame: &Arc<ComplexFrame>, a: Idx) -> Self {
        Self::monomial(frame, &[a], C64::new(1.0, 0.0))
    }

    /// The dual of the i-th real basis vector, expanded over the coframe.
    pub fn real_basis_one_form(frame: &Arc<ComplexFrame>, i: usize) -> Self {
        let mut f = Self::zero(frame);
        for a in 0..frame.alphabet() {
            let v = frame.basis_vector(a)[i];
            if v.norm_sqr() != 0.0 {
                f = f.add(&Self::monomial(frame, &[a], v));
            }
        }
        f
    }

    /// Builds a degree-k form from its values on canonical letter tuples.
    pub fn from_values(
        frame: &Arc<ComplexFrame>,
        degree: usize,
        value: impl Fn(&[Idx]) -> C64,
    ) -> Self {
        let s = frame.alphabet();
        let mut f = Self::zero(frame);
        let mut tuple = vec![0usize; degree];
        fn rec(
            f: &mut InvariantForm,
            s: usize,
            degree: usize,
            start: usize,
            pos: usize,
            tuple: &mut Vec<usize>,
            value: &impl Fn(&[Idx]) -> C64,
        ) {
            if pos == degree {
                let v = value(tuple);
                if v.norm_sqr() != 0.0 {
                    let n = f.frame.n();
                    let mut iu: Mask = 0;
                    let mut jb: Mask = 0;
                    for &l in tuple.iter() {
                        if l < n {
                            iu |= 1 << l;
                        } else {
                            jb |= 1 << (l - n);
                        }
                    }
                    f.add_term(iu, jb, v);
                }
                return;
            }
            for l in start..s {
                tuple[pos] = l;
                rec(f, s, degree, l + 1, pos + 1, tuple, value);
            }
        }
        rec(&mut f, s, degree, 0, 0, &mut tuple, &value);
        f
    }

    fn add_term(&mut self, iu: Mask, jb: Mask, c: C64) {
        if c.norm_sqr() == 0.0 {
            return;
        }
        let e = self.terms.entry((iu, jb)).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if e.norm_sqr() == 0.0 {
            self.terms.remove(&(iu, jb));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| (i as usize, j as usize, c))
    }

    /// Coefficient on the canonical monomial with the given letter sets.
    pub fn coeff(&self, unbarred: &[usize], barred: &[usize]) -> C64 {
        let mut iu: Mask = 0;
        for &b in unbarred {
            iu |= 1 << b;
        }
        let mut jb: Mask = 0;
        for &b in barred {
            jb |= 1 << b;
        }
        self.terms
            .get(&(iu, jb))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Bidegree when every monomial shares one; `None` for mixed forms.
    pub fn bidegree(&self) -> Option<(usize, usize)> {
        let mut it = self.terms.keys();
        let &(i0, j0) = it.next()?;
        let pq = (popcount(i0), popcount(j0));
        for &(i, j) in it {
            if (popcount(i), popcount(j)) != pq {
                return None;
            }
        }
        Some(pq)
    }

    pub fn add(&self, rhs: &InvariantForm) -> InvariantForm {
        assert!(
            self.frame.compatible(&rhs.frame),
            "forms over different frames"
        );
        let mut out = self.clone();
        for (&(i, j), &c) in &rhs.terms {
            out.add_term(i, j, c);
        }
        out
    }

    pub fn sub(&self, rhs: &InvariantForm) -> InvariantForm {
        self.add(&rhs.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> InvariantForm {
        let mut out = InvariantForm::zero(&self.frame);
        for (&(i, j), &c) in &self.terms {
            out.add_term(i, j, c * s);
        }
        out
    }

    /// Wedge product; graded anticommutative, zero beyond top degree.
    pub fn wedge(&self, rhs: &InvariantForm) -> InvariantForm {
        assert!(
            self.frame.compatible(&rhs.frame),
            "forms over different frames"
        );
        let mut out = InvariantForm::zero(&self.frame);
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &rhs.terms {
                if i1 & i2 != 0 || j1 & j2 != 0 {
                    continue;
                }
                let sign = if (popcount(j1) * popcount(i2)) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let s = sign * merge_sign(i1, i2) * merge_sign(j1, j2);
                out.add_term(i1 | i2, j1 | j2, c1 * c2 * s);
            }
        }
        out
    }

    pub fn wedge_pow(&self, k: usize) -> InvariantForm {
        let mut out = InvariantForm::one(&self.frame);
        for _ in 0..k {
            out = out.wedge(self);
        }
        out
    }

    /// Complex conjugate form.
    pub fn conj(&self) -> InvariantForm {
        let mut out = InvariantForm::zero(&self.frame);
        for (&(i, j), &c) in &self.terms {
            let (p, q) = (popcount(i), popcount(j));
            let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
            out.add_term(j, i, c.conj() * sign);
        }
        out
    }

    pub fn is_real(&self, tolerance: f64) -> bool {
        self.sub(&self.conj()).max_abs() <= tolerance
    }

    /// Chevalley–Eilenberg differential.
    pub fn d(&self) -> InvariantForm {
        let n = self.frame.n();
        let mu = &self.frame.mu;
        let s = self.frame.alphabet();
        let mut out = InvariantForm::zero(&self.frame);
        for (&(iu, jb), &c) in &self.terms {
            // Canonical letter order is ascending alphabet order.
            let mut all: Vec<Idx> = letters(iu).collect();
            all.extend(letters(jb).map(|b| b + n));
            for (pos, &l) in all.iter().enumerate() {
                let outer = if pos % 2 == 0 { 1.0 } else { -1.0 };
                let (ru, rb) = {
                    let mut ru = iu;
                    let mut rb = jb;
                    if l < n {
                        ru &= !(1 << l);
                    } else {
                        rb &= !(1 << (l - n));
                    }
                    (ru, rb)
                };
                let rest = {
                    let mut f = InvariantForm::zero(&self.frame);
                    f.add_term(ru, rb, C64::new(1.0, 0.0));
                    f
                };
                for a in 0..s {
                    for b in a + 1..s {
                        let m = mu.get(l, a, b);
                        if m.norm_sqr() == 0.0 {
                            continue;
                        }
                        let pair = InvariantForm::monomial(&self.frame, &[a, b], -m);
                        let contrib = pair.wedge(&rest).scale(C64::new(outer * 1.0, 0.0) * c);
                        out = out.add(&contrib);
                    }
                }
            }
        }
        out
    }

    /// Components of pure bidegree, sorted by (p, q); their sum is the form.
    pub fn bidegree_split(&self) -> Vec<InvariantForm> {
        let mut buckets: BTreeMap<(usize, usize), InvariantForm> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            let key = (popcount(i), popcount(j));
            buckets
                .entry(key)
                .or_insert_with(|| InvariantForm::zero(&self.frame))
                .add_term(i, j, c);
        }
        buckets.into_values().collect()
    }

    /// Keeps the monomials of bidegree (p, q).
    pub fn component(&self, p: usize, q: usize) -> InvariantForm {
        let mut out = InvariantForm::zero(&self.frame);
        for (&(i, j), &c) in &self.terms {
            if popcount(i) == p && popcount(j) == q {
                out.add_term(i, j, c);
            }
        }
        out
    }

    /// `∂`: for each (p, q)-component the (p+1, q) part of d.
    pub fn del(&self) -> InvariantForm {
        let mut out = InvariantForm::zero(&self.frame);
        for comp in self.bidegree_split() {
            let (p, q) = comp.bidegree().unwrap();
            out = out.add(&comp.d().component(p + 1, q));
        }
        out
    }

    /// `∂̄`: for each (p, q)-component the (p, q+1) part of d.
    pub fn delbar(&self) -> InvariantForm {
        let mut out = InvariantForm::zero(&self.frame);
        for comp in self.bidegree_split() {
            let (p, q) = comp.bidegree().unwrap();
            out = out.add(&comp.d().component(p, q + 1));
        }
        out
    }

    /// J acting on forms, `Jα(X_1..X_r) = (−1)^r α(JX_1..JX_r)`; on a pure
    /// (p, q)-monomial this is multiplication by `(−1)^p i^{p+q}`.
    pub fn j_action(&self) -> InvariantForm {
        let mut out = InvariantForm::zero(&self.frame);
        for (&(i, j), &c) in &self.terms {
            let (p, q) = (popcount(i), popcount(j));
            let mut f = C64::new(0.0, 1.0).powu((p + q) as u32);
            if p % 2 == 1 {
                f = -f;
            }
            out.add_term(i, j, c * f);
        }
        out
    }

    /// `d^c = (−1)^r J d J`, which on integrable frames equals `i(∂̄ − ∂)`.
    pub fn dc(&self) -> InvariantForm {
        let mut out = InvariantForm::zero(&self.frame);
        for comp in self.bidegree_split() {
            let (p, q) = comp.bidegree().unwrap();
            let sign = if (p + q) % 2 == 0 { 1.0 } else { -1.0 };
            out = out.add(&comp.j_action().d().j_action().scale(C64::new(sign, 0.0)));
        }
        out
    }

    /// Evaluates the form on a tuple of frame vectors given by alphabet
    /// letters (repeats give zero).
    pub fn value_on(&self, args: &[Idx]) -> C64 {
        let n = self.frame.n();
        for i in 0..args.len() {
            for j in i + 1..args.len() {
                if args[i] == args[j] {
                    return C64::new(0.0, 0.0);
                }
            }
        }
        let mut iu: Mask = 0;
        let mut jb: Mask = 0;
        for &l in args {
            if l < n {
                iu |= 1 << l;
            } else {
                jb |= 1 << (l - n);
            }
        }
        let Some(&c) = self.terms.get(&(iu, jb)) else {
            return C64::new(0.0, 0.0);
        };
        // Parity of sorting the argument tuple into canonical order.
        let mut perm: Vec<Idx> = args.to_vec();
        let mut sign = 1.0;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    perm.swap(i, j);
                    sign = -sign;
                }
            }
        }
        c * sign
    }

    /// Reference volume form `ω_I^n / n!` of the identity metric.
    pub fn reference_volume(frame: &Arc<ComplexFrame>) -> InvariantForm {
        let n = frame.n();
        let mut omega = InvariantForm::zero(frame);
        for k in 0..n {
            omega = omega.add(&InvariantForm::monomial(
                frame,
                &[k, n + k],
                C64::new(0.0, -1.0),
            ));
        }
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        omega.wedge_pow(n).scale(C64::new(1.0 / fact, 0.0))
    }

    /// Wire format: `{"p":..,"q":..,"terms":[{"idx":"12|1~3~","re":..,"im":..}]}`
    /// for pure bidegrees, barred indices carrying a trailing tilde; mixed
    /// forms serialize as `{"components":[..]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let comps = self.bidegree_split();
        let encode = |f: &InvariantForm| -> serde_json::Value {
            let (p, q) = f.bidegree().unwrap_or((0, 0));
            let terms: Vec<serde_json::Value> = f
                .terms
                .iter()
                .map(|(&(iu, jb), &c)| {
                    let mut idx = String::new();
                    for b in letters(iu) {
                        idx.push_str(&(b + 1).to_string());
                    }
                    idx.push('|');
                    for b in letters(jb) {
                        idx.push_str(&(b + 1).to_string());
                        idx.push('~');
                    }
                    serde_json::json!({ "idx": idx, "re": c.re, "im": c.im })
                })
                .collect();
            serde_json::json!({ "p": p, "q": q, "terms": terms })
        };
        match comps.len() {
            0 => serde_json::json!({ "p": 0, "q": 0, "terms": [] }),
            1 => encode(&comps[0]),
            _ => serde_json::json!({ "components": comps.iter().map(encode).collect::<Vec<_>>() }),
        }
    }

    pub fn from_json(frame: &Arc<ComplexFrame>, v: &serde_json::Value) -> Result<InvariantForm> {
        if let Some(comps) = v.get("components").and_then(|c| c.as_array()) {
            let mut out = InvariantForm::zero(frame);
            for comp in comps {
                out = out.add(&Self::from_json(frame, comp)?);
            }
            return Ok(out);
        }
        let terms = v
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Parse {
                pos: 0,
                msg: "missing `terms`".into(),
            })?;
        let mut out = InvariantForm::zero(frame);
        let n = frame.n();
        for term in terms {
            let idx = term
                .get("idx")
                .and_then(|s| s.as_str())
                .ok_or_else(|| Error::Parse {
                    pos: 0,
                    msg: "missing `idx`".into(),
                })?;
            let re = term.get("re").and_then(|x| x.as_f64()).unwrap_or(0.0);
            let im = term.get("im").and_then(|x| x.as_f64()).unwrap_or(0.0);
            let (unb, bar) = idx.split_once('|').ok_or_else(|| Error::Parse {
                pos: 0,
                msg: format!("bad idx `{idx}`"),
            })?;
            let mut letters_vec = Vec::new();
            for ch in unb.chars() {
                let d = ch.to_digit(10).ok_or_else(|| Error::Parse {
                    pos: 0,
                    msg: format!("bad index digit `{ch}`"),
                })? as usize;
                letters_vec.push(d - 1);
            }
            let mut chars = bar.chars().peekable();
            while let Some(ch) = chars.next() {
                let d = ch.to_digit(10).ok_or_else(|| Error::Parse {
                    pos: 0,
                    msg: format!("bad index digit `{ch}`"),
                })? as usize;
                if chars.peek() == Some(&'~') {
                    chars.next();
                }
                letters_vec.push(n + d - 1);
            }
            out = out.add(&InvariantForm::monomial(
                frame,
                &letters_vec,
                C64::new(re, im),
            ));
        }
        Ok(out)
    }

    /// The real scalar λ with `self = λ · reference`, for top-degree forms.
    pub fn volume_coefficient(&self, reference: &InvariantForm) -> Result<f64> {
        assert!(self.frame.compatible(&reference.frame));
        let n = self.frame.n();
        let full: Mask = (1 << n) - 1;
        let rc = reference
            .terms
            .get(&(full, full))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0));
        if rc.norm_sqr() == 0.0 {
            return Err(Error::Numerical("reference volume form vanishes".into()));
        }
        for (&(i, j), _) in &self.terms {
            if (i, j) != (full, full) {
                return Err(Error::Dimension(
                    "volume_coefficient needs a top-degree form".into(),
                ));
            }
        }
        let fc = self
            .terms
            .get(&(full, full))
            .copied()
            .unwrap_or(C64::new(0.0, 0.0));
        let lambda = fc / rc;
        if lambda.im.abs() > 1e-9 * lambda.norm().max(1.0) {
            return Err(Error::NonRealVolume(
                lambda.im.abs() / lambda.norm().max(1.0),
            ));
        }
        Ok(lambda.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_salamon, ComplexStructure};
    use crate::frame::{complexify, parse_complex_equations};
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn kt() -> Arc<ComplexFrame> {
        let a = parse_salamon("(0,0,0,12)", &BTreeMap::new()).unwrap();
        let mut jm = vec![0.0; 16];
        jm[4] = -1.0;
        jm[1] = 1.0;
        jm[14] = -1.0;
        jm[11] = 1.0;
        let j = ComplexStructure::new(4, jm).unwrap();
        complexify(&a, &j).unwrap()
    }

    fn torus(n: usize) -> Arc<ComplexFrame> {
        let a = crate::algebra::LieAlgebra::abelian(2 * n);
        let j = ComplexStructure::standard(2 * n);
        complexify(&a, &j).unwrap()
    }

    #[test]
    fn wedge_basics() {
        let f = torus(2);
        let a1 = InvariantForm::one_form(&f, 0);
        assert!(a1.wedge(&a1).is_zero());
        let p = InvariantForm::monomial(&f, &[0, 2], c(1.0, 0.0));
        let q = InvariantForm::monomial(&f, &[1, 3], c(1.0, 0.0));
        let top = p.wedge(&q);
        // α^{1 1̄} ∧ α^{2 2̄} = −α^{12|1̄2̄}.
        assert!((top.coeff(&[0, 1], &[0, 1]) - c(-1.0, 0.0)).norm() < 1e-15);
        // Graded anticommutativity for even degrees: q∧p = p∧q.
        assert!(q.wedge(&p).sub(&top).max_abs() < 1e-15);
        // Odd-degree anticommutativity.
        let b1 = InvariantForm::one_form(&f, 2);
        assert!(a1.wedge(&b1).add(&b1.wedge(&a1)).max_abs() < 1e-15);
    }

    #[test]
    fn d_on_kodaira_thurston() {
        let f = kt();
        // d ζ^2 = ½ ζ^1 ∧ ζ^1̄  (from μ(Z_1, Z_1̄) = −(Z_2 − Z_2̄)/2).
        let dz2 = InvariantForm::one_form(&f, 1).d();
        assert!((dz2.coeff(&[0], &[0]) - c(0.5, 0.0)).norm() < 1e-14);
        assert_eq!(dz2.terms.len(), 1);
        // The bracket-table convention puts d(e^4-dual) = −e^1 ∧ e^2.
        let de4 = InvariantForm::real_basis_one_form(&f, 3).d();
        let e12 = InvariantForm::real_basis_one_form(&f, 0)
            .wedge(&InvariantForm::real_basis_one_form(&f, 1));
        assert!(de4.add(&e12).max_abs() < 1e-13);
        // d of the closed duals vanishes.
        for i in 0..3 {
            assert!(InvariantForm::real_basis_one_form(&f, i).d().max_abs() < 1e-14);
        }
    }

    #[test]
    fn d_squared_vanishes() {
        let (_, _, f) = parse_complex_equations(
            "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = a{1~1}",
        )
        .unwrap();
        for letters in [
            vec![0],
            vec![1],
            vec![2],
            vec![0, 3],
            vec![1, 5],
            vec![2, 4],
        ] {
            let form = InvariantForm::monomial(&f, &letters, c(1.0, 0.5));
            assert!(form.d().d().max_abs() < 1e-12, "d^2 on {letters:?}");
        }
    }

    #[test]
    fn bidegree_split_reassembles() {
        let f = kt();
        let e1 = InvariantForm::real_basis_one_form(&f, 0);
        let e3 = InvariantForm::real_basis_one_form(&f, 2);
        let mixed = e1.wedge(&e3);
        let parts = mixed.bidegree_split();
        assert_eq!(parts.len(), 3, "e^1∧e^3 has (2,0)+(1,1)+(0,2) parts");
        let mut sum = InvariantForm::zero(&f);
        for p in &parts {
            sum = sum.add(p);
        }
        assert!(sum.sub(&mixed).max_abs() < 1e-15);
        // e^1∧e^2 spans a J-invariant plane: pure (1,1).
        let e12 = e1.wedge(&InvariantForm::real_basis_one_form(&f, 1));
        assert_eq!(e12.bidegree(), Some((1, 1)));
    }

    #[test]
    fn dc_matches_i_delbar_minus_del() {
        let (_, _, f) = parse_complex_equations(
            "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = a{1~1}",
        )
        .unwrap();
        // Random-ish real (1,1) form.
        let mut om = InvariantForm::zero(&f);
        let coeffs = [
            (0, 0, c(0.0, -1.3)),
            (1, 1, c(0.0, -0.7)),
            (2, 2, c(0.0, -2.1)),
        ];
        for (i, j, v) in coeffs {
            om = om.add(&InvariantForm::monomial(&f, &[i, f.n() + j], v));
        }
        om = om.add(&InvariantForm::monomial(&f, &[0, f.n() + 2], c(0.3, 0.4)));
        om = om.add(&InvariantForm::monomial(&f, &[2, f.n()], c(-0.3, 0.4)));
        assert!(om.is_real(1e-14));
        let lhs = om.dc();
        let rhs = om.delbar().sub(&om.del()).scale(c(0.0, 1.0));
        assert!(lhs.sub(&rhs).max_abs() < 1e-12);
        // d = ∂ + ∂̄ on integrable frames.
        assert!(om.d().sub(&om.del().add(&om.delbar())).max_abs() < 1e-13);
    }

    #[test]
    fn reference_volume_normalization() {
        for n in [2usize, 3] {
            let f = torus(n);
            let reference = InvariantForm::reference_volume(&f);
            assert!((reference.volume_coefficient(&reference).unwrap() - 1.0).abs() < 1e-14);
            assert!(reference.is_real(1e-14));
            let mut omega = InvariantForm::zero(&f);
            for k in 0..n {
                omega = omega.add(&InvariantForm::monomial(&f, &[k, n + k], c(0.0, -1.0)));
            }
            let vol = omega.wedge_pow(n).volume_coefficient(&reference).unwrap();
            let mut fact = 1.0;
            for k in 1..=n {
                fact *= k as f64;
            }
            assert!((vol - fact).abs() < 1e-12, "ω_I^n = n!·reference");
        }
    }

    #[test]
    fn value_on_applies_permutation_signs() {
        let f = torus(2);
        let p = InvariantForm::monomial(&f, &[0, 1, 2], c(2.0, 0.0));
        assert!((p.value_on(&[0, 1, 2]) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((p.value_on(&[1, 0, 2]) + c(2.0, 0.0)).norm() < 1e-15);
        assert!(p.value_on(&[0, 1, 1]).norm() == 0.0);
        assert!(p.value_on(&[0, 1, 3]).norm() == 0.0);
    }
}
