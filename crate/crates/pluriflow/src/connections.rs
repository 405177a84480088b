//! Canonical Hermitian connections on a Hermitian Lie algebra.
//!
//! The family is anchored at the Levi-Civita connection (invariant Koszul
//! formula) and offset along the Gauduchon line: with `d^c = i(∂̄ − ∂)`,
//!
//! ```text
//! g(∇^t_X Y, Z) = g(D_X Y, Z) + (1−t)/4 (d^cω)(X, Y, Z) − (1+t)/4 (d^cω)(X, JY, JZ)
//! ```
//!
//! `t = −1` is the Bismut connection, whose lowered torsion is the 3-form
//! `c = d^cω`; `t = +1` is the Chern connection. The signs are pinned by
//! `∇^t g = 0`, `∇^t J = 0` and by the Bismut Ricci component
//! `ρ^B_{11̄} = −y²/(2(xy − |z|²))` on the Kodaira–Thurston geometry, which
//! also fixes the global sign of the Ricci trace below.

use crate::exterior::InvariantForm;
use crate::frame::{ComplexFrame, Idx};
use crate::linalg::CMat;
use crate::metrics::HermitianMetric;
use crate::{Result, C64};
use std::sync::Arc;

/// Connection coefficients `∇_{E_A} E_B = Γ^C_{AB} E_C` over the alphabet.
#[derive(Debug, Clone)]
pub struct Connection {
    pub frame: Arc<ComplexFrame>,
    /// `gamma[a]` is the matrix of `∇_{E_a}`: entry `(c, b)` is `Γ^C_{AB}`.
    pub gamma: Vec<CMat>,
    /// Gauduchon parameter, when the connection belongs to the family.
    pub t: Option<f64>,
}

impl Connection {
    pub fn gamma(&self, c: Idx, a: Idx, b: Idx) -> C64 {
        self.gamma[a][(c, b)]
    }

    /// Coefficient list `[c, a, b, re, im]` of the nonzero `Γ^C_{AB}`.
    pub fn to_json(&self) -> serde_json::Value {
        let s = self.frame.alphabet();
        let mut coeffs = Vec::new();
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    let v = self.gamma(c, a, b);
                    if v.norm() > 0.0 {
                        coeffs.push(serde_json::json!([c, a, b, v.re, v.im]));
                    }
                }
            }
        }
        serde_json::json!({ "t": self.t, "gamma": coeffs })
    }

    /// `∇_{E_A}` applied to an alphabet coefficient vector.
    pub fn apply(&self, a: Idx, v: &[C64]) -> Vec<C64> {
        self.gamma[a].mul_vec(v)
    }

    /// Max violation of `∇g = 0`: `g(∇_A B, C) + g(B, ∇_A C)` over basis triples.
    pub fn metric_defect(&self, g: &HermitianMetric) -> f64 {
        let s = self.frame.alphabet();
        let gm = gram(&self.frame, g);
        let mut worst = 0.0_f64;
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    let v: C64 = (0..s)
                        .map(|d| {
                            self.gamma(d, a, b) * gm[(d, c)] + self.gamma(d, a, c) * gm[(b, d)]
                        })
                        .sum();
                    worst = worst.max(v.norm());
                }
            }
        }
        worst
    }

    /// Max violation of `∇J = 0`: the connection must preserve J-eigenspaces.
    pub fn complex_defect(&self) -> f64 {
        let s = self.frame.alphabet();
        let n = self.frame.n();
        let mut worst = 0.0_f64;
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    // Γ^C_{AB} with C and B of different bar type breaks ∇J = 0.
                    if (b < n) != (c < n) {
                        worst = worst.max(self.gamma(c, a, b).norm());
                    }
                }
            }
        }
        worst
    }

    /// Torsion `T^C_{AB} = Γ^C_{AB} − Γ^C_{BA} − μ^C_{AB}`.
    pub fn torsion(&self) -> TorsionTensor {
        let s = self.frame.alphabet();
        let mu = &self.frame.mu;
        let comp = (0..s)
            .map(|a| {
                (0..s)
                    .map(|b| {
                        (0..s)
                            .map(|c| self.gamma(c, a, b) - self.gamma(c, b, a) - mu.get(c, a, b))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        TorsionTensor {
            frame: self.frame.clone(),
            comp,
        }
    }

    /// Curvature endomorphism `R(E_A, E_B) = [∇_A, ∇_B] − ∇_{μ(A,B)}`.
    pub fn curvature(&self, a: Idx, b: Idx) -> CMat {
        let s = self.frame.alphabet();
        let mut r = self.gamma[a]
            .mul(&self.gamma[b])
            .sub(&self.gamma[b].mul(&self.gamma[a]));
        let m_ab = self.frame.mu.bracket_basis(a, b);
        for c in 0..s {
            if m_ab[c].norm_sqr() != 0.0 {
                r = r.sub(&self.gamma[c].scale(m_ab[c]));
            }
        }
        r
    }
}

/// Tangent-valued antisymmetric 2-tensor, e.g. a connection's torsion.
#[derive(Debug, Clone)]
pub struct TorsionTensor {
    pub frame: Arc<ComplexFrame>,
    /// `comp[a][b]` is the coefficient vector of `T(E_A, E_B)`.
    pub comp: Vec<Vec<Vec<C64>>>,
}

impl TorsionTensor {
    pub fn max_abs(&self) -> f64 {
        self.comp
            .iter()
            .flat_map(|row| row.iter().flat_map(|v| v.iter().map(|z| z.norm())))
            .fold(0.0, f64::max)
    }

    /// Lowered tensor `T(A,B,C) = g(T(E_A, E_B), E_C)`.
    pub fn lowered(&self, g: &HermitianMetric) -> Vec<Vec<Vec<C64>>> {
        let s = self.frame.alphabet();
        let gm = gram(&self.frame, g);
        (0..s)
            .map(|a| {
                (0..s)
                    .map(|b| {
                        (0..s)
                            .map(|c| (0..s).map(|d| self.comp[a][b][d] * gm[(d, c)]).sum())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Max deviation of the lowered tensor from total antisymmetry.
    pub fn skew_defect(&self, g: &HermitianMetric) -> f64 {
        let low = self.lowered(g);
        let s = self.frame.alphabet();
        let mut worst = 0.0_f64;
        for a in 0..s {
            for b in 0..s {
                for c in 0..s {
                    let t: C64 = low[a][b][c];
                    worst = worst.max((t + low[a][c][b]).norm());
                    worst = worst.max((t + low[c][b][a]).norm());
                }
            }
        }
        worst
    }
}

/// J-type decomposition of a tangent-valued 2-form plus the b/c split of
/// its (1,1) part.
#[derive(Debug, Clone)]
pub struct TorsionParts {
    pub t20: Vec<Vec<Vec<C64>>>,
    pub t11_b: Vec<Vec<Vec<C64>>>,
    pub t11_c: Vec<Vec<Vec<C64>>>,
    pub t02: Vec<Vec<Vec<C64>>>,
}

impl TorsionParts {
    pub fn max_abs(part: &[Vec<Vec<C64>>]) -> f64 {
        part.iter()
            .flat_map(|row| row.iter().flat_map(|v| v.iter().map(|z| z.norm())))
            .fold(0.0, f64::max)
    }
}

/// Complexified Gram matrix of the real metric underlying `g`:
/// `Gc[A][B] = g(E_A, E_B)` (bilinear).
pub fn gram(frame: &ComplexFrame, g: &HermitianMetric) -> CMat {
    let n = frame.n();
    let s = 2 * n;
    CMat::from_fn(s, s, |a, b| {
        if a < n && b >= n {
            g.entry(a, b - n)
        } else if a >= n && b < n {
            g.entry(b, a - n)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn connection_from_lowered(
    frame: &Arc<ComplexFrame>,
    g: &HermitianMetric,
    t: Option<f64>,
    lowered: impl Fn(Idx, Idx, Idx) -> C64,
) -> Result<Connection> {
    let s = frame.alphabet();
    let gmt = gram(frame, g).transpose();
    let mut gamma = Vec::with_capacity(s);
    for a in 0..s {
        let mut mat = CMat::zeros(s, s);
        for b in 0..s {
            let rhs: Vec<C64> = (0..s).map(|c| lowered(a, b, c)).collect();
            let x = gmt.solve_vec(&rhs)?;
            for c in 0..s {
                mat[(c, b)] = x[c];
            }
        }
        gamma.push(mat);
    }
    Ok(Connection {
        frame: frame.clone(),
        gamma,
        t,
    })
}

/// Levi-Civita connection of the real metric underlying `g`, through the
/// invariant Koszul formula
/// `2 g(∇_X Y, Z) = g([X,Y], Z) − g([Y,Z], X) + g([Z,X], Y)`.
pub fn levi_civita(frame: &Arc<ComplexFrame>, g: &HermitianMetric) -> Result<Connection> {
    let s = frame.alphabet();
    let gm = gram(frame, g);
    let mu = &frame.mu;
    let pair = |v: &[C64], c: Idx| -> C64 { (0..s).map(|d| v[d] * gm[(d, c)]).sum() };
    let mut cache: Vec<Vec<Vec<C64>>> = vec![vec![Vec::new(); s]; s];
    for a in 0..s {
        for b in 0..s {
            cache[a][b] = mu.bracket_basis(a, b);
        }
    }
    connection_from_lowered(frame, g, None, |a, b, c| {
        (pair(&cache[a][b], c) - pair(&cache[b][c], a) + pair(&cache[c][a], b)) * 0.5
    })
}

/// Canonical connection `∇^t` of the Gauduchon family (integrable case).
pub fn gauduchon_connection(
    t: f64,
    frame: &Arc<ComplexFrame>,
    g: &HermitianMetric,
) -> Result<Connection> {
    let s = frame.alphabet();
    let lc = levi_civita(frame, g)?;
    let gm = gram(frame, g);
    let dcw = g.fundamental_form().form.dc();
    let c1 = (1.0 - t) / 4.0;
    let c2 = (1.0 + t) / 4.0;
    // Cache d^cω on basis triples.
    let mut vals = vec![C64::new(0.0, 0.0); s * s * s];
    for a in 0..s {
        for b in 0..s {
            for c in 0..s {
                vals[(a * s + b) * s + c] = dcw.value_on(&[a, b, c]);
            }
        }
    }
    connection_from_lowered(frame, g, Some(t), |a, b, c| {
        let base: C64 = (0..s).map(|d| lc.gamma(d, a, b) * gm[(d, c)]).sum();
        let v = vals[(a * s + b) * s + c];
        let twisted = frame.j_eigen(b) * frame.j_eigen(c) * v;
        base + v * c1 - twisted * c2
    })
}

/// J-type split of an antisymmetric tangent-valued tensor, then the b/c
/// split of its (1,1) part through the displayed symmetrizations
/// `2g(B_b(X,Y),Z) = g(B(X,Y),Z) − g(B(Z,X),Y) − g(B(Y,Z),X)` and
/// `2g(B_c(X,Y),Z) = g(B(X,Y),Z) + g(B(Z,X),Y) + g(B(Y,Z),X)`.
pub fn torsion_decompose(
    tt: &TorsionTensor,
    frame: &Arc<ComplexFrame>,
    g: &HermitianMetric,
) -> Result<TorsionParts> {
    let s = frame.alphabet();
    let comp = &tt.comp;
    let jeig = |a: Idx| frame.j_eigen(a);
    let zero = || vec![vec![vec![C64::new(0.0, 0.0); s]; s]; s];
    let (mut t20, mut t11, mut t02) = (zero(), zero(), zero());
    for a in 0..s {
        for b in 0..s {
            // B^{1,1}(X,Y) = (B(X,Y) + B(JX,JY))/2 on J-eigenvectors.
            let jj = jeig(a) * jeig(b);
            let b_ab = &comp[a][b];
            for c in 0..s {
                let b11 = (b_ab[c] + jj * b_ab[c]) * 0.5;
                let anti = (b_ab[c] - jj * b_ab[c]) * 0.5;
                // B^{2,0} = (C − J C(J·,·))/2, B^{0,2} = (C + J C(J·,·))/2.
                let jcj = jeig(a) * jeig(c) * anti;
                t11[a][b][c] = b11;
                t20[a][b][c] = (anti - jcj) * 0.5;
                t02[a][b][c] = (anti + jcj) * 0.5;
            }
        }
    }
    let gm = gram(frame, g);
    let low = |part: &Vec<Vec<Vec<C64>>>, a: Idx, b: Idx, c: Idx| -> C64 {
        (0..s).map(|d| part[a][b][d] * gm[(d, c)]).sum()
    };
    let gmt = gm.transpose();
    let mut t11_b = zero();
    let mut t11_c = zero();
    for a in 0..s {
        for b in 0..s {
            // The symmetrized combination leaves Λ^{1,1} in its arguments;
            // project back with (X, Y) ↦ ½(B(X,Y) + B(JX,JY)) before raising
            // (a scalar factor ½(1 + j_a j_b) on eigenvector arguments).
            let combo = |a: Idx, b: Idx, c: Idx| -> C64 {
                (low(&t11, a, b, c) - low(&t11, c, a, b) - low(&t11, b, c, a)) * 0.5
            };
            let proj = (C64::new(1.0, 0.0) + jeig(a) * jeig(b)) * 0.5;
            let rhs_b: Vec<C64> = (0..s).map(|c| proj * combo(a, b, c)).collect();
            let xb = gmt.solve_vec(&rhs_b)?;
            for c in 0..s {
                t11_b[a][b][c] = xb[c];
                t11_c[a][b][c] = t11[a][b][c] - xb[c];
            }
        }
    }
    Ok(TorsionParts {
        t20,
        t11_b,
        t11_c,
        t02,
    })
}

/// Bismut torsion 3-form `c(X, Y, Z) = g(T^B(X, Y), Z)`; equals `d^cω`.
pub fn bismut_torsion_3form(
    frame: &Arc<ComplexFrame>,
    g: &HermitianMetric,
) -> Result<InvariantForm> {
    let conn = gauduchon_connection(-1.0, frame, g)?;
    let low = conn.torsion().lowered(g);
    Ok(InvariantForm::from_values(frame, 3, |args| {
        low[args[0]][args[1]][args[2]]
    }))
}

/// Deterministic g-unitary (1,0)-frame by Gram–Schmidt in frame order;
/// the r-th column expresses `u_r` over `Z`.
fn unitary_frame(g: &HermitianMetric) -> CMat {
    let n = g.n();
    let gm = g.matrix();
    let h = |u: &[C64], w: &[C64]| -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                s += u[i] * w[j].conj() * gm[(i, j)];
            }
        }
        s
    };
    let mut cols: Vec<Vec<C64>> = Vec::new();
    for r in 0..n {
        let mut u = vec![C64::new(0.0, 0.0); n];
        u[r] = C64::new(1.0, 0.0);
        for prev in &cols {
            let p = h(&u, prev);
            for i in 0..n {
                u[i] -= p * prev[i];
            }
        }
        let norm = h(&u, &u).re.sqrt();
        for z in u.iter_mut() {
            *z /= norm;
        }
        cols.push(u);
    }
    CMat::from_fn(n, n, |i, r| cols[r][i])
}

/// Ricci form `ρ(X, Y) = −i Σ_r g(R(X, Y) u_r, ū_r)` over a g-unitary
/// (1,0)-frame. The global sign matches the calibration component
/// `ρ^B_{11̄} = −y²/(2(xy − |z|²))` with the coefficient convention
/// `ρ = −i ρ_{ij̄} α^i ∧ α^{j̄}`.
pub fn ricci_form(conn: &Connection, g: &HermitianMetric) -> Result<InvariantForm> {
    let frame = &conn.frame;
    let n = frame.n();
    let s = frame.alphabet();
    let u = unitary_frame(g);
    let gm = gram(frame, g);
    let mut curv: Vec<Vec<CMat>> = Vec::new();
    for a in 0..s {
        let mut row = Vec::new();
        for b in 0..s {
            row.push(conn.curvature(a, b));
        }
        curv.push(row);
    }
    Ok(InvariantForm::from_values(frame, 2, |args| {
        let (a, b) = (args[0], args[1]);
        let mut tr = C64::new(0.0, 0.0);
        for r in 0..n {
            let mut ur = vec![C64::new(0.0, 0.0); s];
            let mut urbar = vec![C64::new(0.0, 0.0); s];
            for i in 0..n {
                ur[i] = u[(i, r)];
                urbar[n + i] = u[(i, r)].conj();
            }
            let rv = curv[a][b].mul_vec(&ur);
            for c in 0..s {
                if rv[c].norm_sqr() == 0.0 {
                    continue;
                }
                for d in 0..s {
                    tr += rv[c] * urbar[d] * gm[(c, d)];
                }
            }
        }
        C64::new(0.0, -1.0) * tr
    }))
}

/// Bismut Ricci form computed from first principles (`t = −1` curvature).
pub fn bismut_ricci_form(frame: &Arc<ComplexFrame>, g: &HermitianMetric) -> Result<InvariantForm> {
    let conn = gauduchon_connection(-1.0, frame, g)?;
    ricci_form(&conn, g)
}

/// Trace 1-form `θ^t(X) = −i Σ_r g(∇^t_X u_r, ū_r)`, normalized so that
/// `dθ^t = ρ^t`.
pub fn theta_form(t: f64, frame: &Arc<ComplexFrame>, g: &HermitianMetric) -> Result<InvariantForm> {
    let conn = gauduchon_connection(t, frame, g)?;
    let n = frame.n();
    let s = frame.alphabet();
    let u = unitary_frame(g);
    let gm = gram(frame, g);
    Ok(InvariantForm::from_values(frame, 1, |args| {
        let a = args[0];
        let mut tr = C64::new(0.0, 0.0);
        for r in 0..n {
            let mut ur = vec![C64::new(0.0, 0.0); s];
            let mut urbar = vec![C64::new(0.0, 0.0); s];
            for i in 0..n {
                ur[i] = u[(i, r)];
                urbar[n + i] = u[(i, r)].conj();
            }
            let dv = conn.apply(a, &ur);
            for c in 0..s {
                for d in 0..s {
                    tr += dv[c] * urbar[d] * gm[(c, d)];
                }
            }
        }
        C64::new(0.0, -1.0) * tr
    }))
}
