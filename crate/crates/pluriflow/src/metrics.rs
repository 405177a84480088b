//! Hermitian metrics, fundamental forms, and the special-metric predicates.
//!
//! The coefficient convention is calibrated once: the identity metric has
//! fundamental form `ω = −i Σ_k α^k ∧ α^{k̄}`, i.e.
//! `ω = −i Σ g_{ij̄} α^i ∧ α^{j̄}` in general, and a real (1,1)-form is
//! positive exactly when the Hermitian matrix `[i ω(Z_i, Z_j̄)]` is.

use crate::exterior::InvariantForm;
use crate::frame::ComplexFrame;
use crate::linalg::CMat;
use crate::{tol, Error, Result, C64};
use rand::Rng;
use std::sync::Arc;

/// Positive-definite Hermitian coefficient matrix `g_{ij̄}` over a frame.
#[derive(Debug, Clone)]
pub struct HermitianMetric {
    pub frame: Arc<ComplexFrame>,
    g: CMat,
}

impl HermitianMetric {
    pub fn new(frame: &Arc<ComplexFrame>, g: CMat) -> Result<Self> {
        let n = frame.n();
        if g.rows != n || g.cols != n {
            return Err(Error::Dimension(format!("metric must be {n}x{n}")));
        }
        let herm_defect = g.herm_defect();
        if herm_defect > tol::CONSTRUCTION * g.max_abs().max(1.0) {
            return Err(Error::SingularMetric(format!(
                "matrix is not Hermitian (defect {herm_defect:.3e})"
            )));
        }
        let g = g.hermitize();
        let evals = g.eigh().0;
        let max = evals.last().copied().unwrap_or(0.0);
        if evals[0] <= tol::CONSTRUCTION * max.abs().max(1.0) {
            return Err(Error::SingularMetric(format!(
                "not positive definite (min eigenvalue {:.3e})",
                evals[0]
            )));
        }
        Ok(HermitianMetric {
            frame: frame.clone(),
            g,
        })
    }

    pub fn identity(frame: &Arc<ComplexFrame>) -> Self {
        HermitianMetric {
            frame: frame.clone(),
            g: CMat::identity(frame.n()),
        }
    }

    /// Diagonal metric with the given positive entries.
    pub fn diagonal(frame: &Arc<ComplexFrame>, diag: &[f64]) -> Result<Self> {
        let n = frame.n();
        let g = CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(frame, g)
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    /// `g_{ij̄}`.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.g[(i, j)]
    }

    pub fn matrix(&self) -> &CMat {
        &self.g
    }

    pub fn det(&self) -> f64 {
        self.g.det().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.g.eigh().0[0]
    }

    /// Inverse entries `g^{āb}`, i.e. `Σ_b g^{āb} g_{bc̄} = δ_ac`.
    pub fn inverse(&self) -> Result<CMat> {
        self.g.inverse()
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        Self::new(&self.frame, self.g.scale(C64::new(s, 0.0)))
    }

    /// `ω = −i Σ g_{ij̄} α^i ∧ α^{j̄}`.
    pub fn fundamental_form(&self) -> FundamentalForm {
        let n = self.n();
        let mut form = InvariantForm::zero(&self.frame);
        for i in 0..n {
            for j in 0..n {
                let c = C64::new(0.0, -1.0) * self.g[(i, j)];
                form = form.add(&InvariantForm::monomial(&self.frame, &[i, n + j], c));
            }
        }
        FundamentalForm { form }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.n();
        let rows: Vec<Vec<[f64; 2]>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| [self.g[(i, j)].re, self.g[(i, j)].im])
                    .collect()
            })
            .collect();
        serde_json::json!({ "n": n, "g": rows })
    }

    pub fn from_json(frame: &Arc<ComplexFrame>, v: &serde_json::Value) -> Result<Self> {
        let rows: Vec<Vec<[f64; 2]>> =
            serde_json::from_value(v.get("g").cloned().ok_or_else(|| Error::Parse {
                pos: 0,
                msg: "missing `g`".into(),
            })?)?;
        let n = rows.len();
        let g = CMat::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
        Self::new(frame, g)
    }
}

/// The real positive (1,1)-form `ω(X, Y) = g(X, JY)` of a metric.
#[derive(Debug, Clone)]
pub struct FundamentalForm {
    pub form: InvariantForm,
}

impl FundamentalForm {
    /// Recovers the metric: `g_{ij̄} = i ω(Z_i, Z_j̄)`.
    pub fn metric(&self) -> Result<HermitianMetric> {
        let frame = self.form.frame.clone();
        let n = frame.n();
        let g = CMat::from_fn(n, n, |i, j| {
            C64::new(0.0, 1.0) * self.form.value_on(&[i, n + j])
        });
        HermitianMetric::new(&frame, g)
    }

    /// Hermitian matrix `[i ω(Z_i, Z_j̄)]` of a (not necessarily positive)
    /// real (1,1)-form.
    pub fn hermitian_matrix_of(form: &InvariantForm) -> CMat {
        let n = form.frame.n();
        CMat::from_fn(n, n, |i, j| C64::new(0.0, 1.0) * form.value_on(&[i, n + j]))
    }
}

/// Max-norm of `∂∂̄ω`; zero exactly on SKT (pluriclosed) metrics.
pub fn skt_residual(g: &HermitianMetric) -> f64 {
    g.fundamental_form().form.delbar().del().max_abs()
}

/// Max-norm of `d(ω^{n−1})`; zero exactly on balanced metrics.
pub fn balanced_residual(g: &HermitianMetric) -> f64 {
    let n = g.n();
    g.fundamental_form().form.wedge_pow(n - 1).d().max_abs()
}

/// Max-norm of `dω`; zero exactly on Kähler metrics.
pub fn kahler_residual(g: &HermitianMetric) -> f64 {
    g.fundamental_form().form.d().max_abs()
}

/// Max-norm of `ρ^B − λω` for an SKT metric; inputs with
/// `skt_residual ≥ 1e−8` are rejected.
pub fn static_residual(g: &HermitianMetric, lambda: f64) -> Result<f64> {
    let skt = skt_residual(g);
    if skt >= tol::WITNESS_RESIDUAL {
        return Err(Error::NotSkt(skt));
    }
    let rho = crate::connections::bismut_ricci_form(&g.frame, g)?;
    let lw = g.fundamental_form().form.scale(C64::new(lambda, 0.0));
    Ok(rho.sub(&lw).max_abs())
}

/// The 6-dimensional nilpotent SKT obstruction
/// `|A|² + |D|² + |E|² + 2 Re(B̄C)`; the associated frame admits SKT metrics
/// (and then every metric is SKT) exactly when this vanishes.
pub fn skt_condition_6d(a: C64, b: C64, c: C64, d: C64, e: C64) -> f64 {
    a.norm_sqr() + d.norm_sqr() + e.norm_sqr() + 2.0 * (b.conj() * c).re
}

/// Coefficients of the first 8-dimensional family:
/// `dα^3 = B_1 α^{12} + B_4 α^{11̄} + B_5 α^{12̄} + C_3 α^{21̄} + C_4 α^{22̄}`
/// and the same shape with `F/G` letters for `dα^4`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Family1Coeffs {
    pub b1: C64,
    pub b4: C64,
    pub b5: C64,
    pub c3: C64,
    pub c4: C64,
    pub f1: C64,
    pub f4: C64,
    pub f5: C64,
    pub g3: C64,
    pub g4: C64,
}

impl Family1Coeffs {
    /// Specialization with `C_4 = −B_4`, `G_4 = −F_4` (the balanced family).
    pub fn family19(
        b1: C64,
        b4: C64,
        b5: C64,
        c3: C64,
        f1: C64,
        f4: C64,
        f5: C64,
        g3: C64,
    ) -> Self {
        Family1Coeffs {
            b1,
            b4,
            b5,
            c3,
            c4: -b4,
            f1,
            f4,
            f5,
            g3,
            g4: -f4,
        }
    }

    /// Sesquilinear pairing of two `dα` coefficient blocks; the SKT equation
    /// is `a_3 K(β_3,β_3) + a_4 K(β_4,β_4) + a_10 K(β_3,β_4) − ā_10 conj(K(β_3,β_4)) = 0`.
    fn k_pair(x: &[C64; 5], y: &[C64; 5]) -> C64 {
        // Blocks ordered (b1 on α^{12}, b4 on α^{11̄}, b5 on α^{12̄}, c3 on α^{21̄}, c4 on α^{22̄}).
        x[1] * y[4].conj() + x[4] * y[1].conj()
            - x[2] * y[2].conj()
            - x[3] * y[3].conj()
            - x[0] * y[0].conj()
    }

    fn beta3(&self) -> [C64; 5] {
        [self.b1, self.b4, self.b5, self.c3, self.c4]
    }

    fn beta4(&self) -> [C64; 5] {
        [self.f1, self.f4, self.f5, self.g3, self.g4]
    }
}

/// Left side of the family-1 SKT equation for the metric coefficients
/// `a_1..a_10` (the `ω`-expansion coefficients: `a_l = −i g_{ll̄}` for
/// `l ≤ 4`, then `a_5..a_10` on `α^{12̄}, α^{13̄}, α^{14̄}, α^{23̄}, α^{24̄},
/// α^{34̄}`). The value is the single `∂∂̄ω` coefficient, so it vanishes
/// exactly on SKT metrics; positivity of `ω` is required.
pub fn skt_equation_family1(coeffs: &Family1Coeffs, a: &[C64; 10]) -> Result<C64> {
    let g = metric_from_a_coeffs(a)?;
    // Positivity (and the purely imaginary diagonal) checked through the
    // metric construction above.
    let _ = g;
    let k33 = Family1Coeffs::k_pair(&coeffs.beta3(), &coeffs.beta3());
    let k44 = Family1Coeffs::k_pair(&coeffs.beta4(), &coeffs.beta4());
    let k34 = Family1Coeffs::k_pair(&coeffs.beta3(), &coeffs.beta4());
    let a3 = a[2];
    let a4 = a[3];
    let a10 = a[9];
    Ok(a3 * k33 + a4 * k44 + a10 * k34 - a10.conj() * k34.conj())
}

/// Assembles the Hermitian matrix behind the `a_1..a_10` expansion and
/// validates positivity.
pub fn metric_from_a_coeffs(a: &[C64; 10]) -> Result<CMat> {
    for (l, v) in a.iter().take(4).enumerate() {
        if v.re.abs() > 1e-10 * v.norm().max(1.0) {
            return Err(Error::ParameterDomain(format!(
                "a_{} must be purely imaginary (diagonal of a real (1,1)-form), got {v}",
                l + 1
            )));
        }
    }
    let i = C64::new(0.0, 1.0);
    let off = [
        (0usize, 1usize, a[4]),
        (0, 2, a[5]),
        (0, 3, a[6]),
        (1, 2, a[7]),
        (1, 3, a[8]),
        (2, 3, a[9]),
    ];
    let mut g = CMat::zeros(4, 4);
    for k in 0..4 {
        g[(k, k)] = i * a[k];
    }
    for (p, q, v) in off {
        g[(p, q)] = i * v;
        g[(q, p)] = (i * v).conj();
    }
    let evals = g.hermitize().eigh().0;
    if evals[0] <= 0.0 {
        return Err(Error::SingularMetric(format!(
            "ω is not positive definite (min eigenvalue {:.3e})",
            evals[0]
        )));
    }
    Ok(g.hermitize())
}

/// Coefficients of the second 8-dimensional family (`dα^{1,2,3} = 0`,
/// `dα^4` generic with `H_4 ≠ 0`).
#[derive(Debug, Clone, Copy, Default)]
pub struct Family2Coeffs {
    pub f1: C64,
    pub f2: C64,
    pub f4: C64,
    pub f5: C64,
    pub f6: C64,
    pub g1: C64,
    pub g3: C64,
    pub g4: C64,
    pub g5: C64,
    pub h2: C64,
    pub h3: C64,
    pub h4: C64,
}

/// The six metric-independent SKT equations of the second family; all six
/// residuals vanish exactly when the frame is SKT. Requires `H_4 ≠ 0`.
pub fn skt_system_family2(c: &Family2Coeffs) -> Result<[f64; 6]> {
    if c.h4.norm() == 0.0 {
        return Err(Error::ParameterDomain("family 2 requires H_4 ≠ 0".into()));
    }
    let eq1 = c.f4 * c.h3.conj() - c.f6 * c.f5.conj() - c.g3 * c.h2.conj() + c.g5 * c.f4.conj()
        - c.f1 * c.f2.conj();
    let eq2 = c.f5 * c.h3.conj() - c.f6 * c.g4.conj() - c.g4 * c.h2.conj() + c.g5 * c.g3.conj()
        - c.f1 * c.g1.conj();
    let eq3 = c.f5 * c.h4.conj() - c.f6 * c.g5.conj() - c.h3 * c.h2.conj() + c.h4 * c.g3.conj()
        - c.f2 * c.g1.conj();
    let eq4 = c.f2.norm_sqr() + c.f6.norm_sqr() + c.h2.norm_sqr() - 2.0 * (c.h4 * c.f4.conj()).re;
    let eq5 = c.f1.norm_sqr() + c.f5.norm_sqr() + c.g3.norm_sqr() - 2.0 * (c.f4 * c.g4.conj()).re;
    let eq6 = c.g1.norm_sqr() + c.g5.norm_sqr() + c.h3.norm_sqr() - 2.0 * (c.h4 * c.g4.conj()).re;
    Ok([
        eq1.norm(),
        eq2.norm(),
        eq3.norm(),
        eq4.abs(),
        eq5.abs(),
        eq6.abs(),
    ])
}

/// Draws a random positive Hermitian metric: log-uniform diagonal and
/// Gaussian off-diagonal entries, rejection-sampled to positive definite.
pub fn sample_metric(frame: &Arc<ComplexFrame>, rng: &mut impl Rng) -> HermitianMetric {
    let n = frame.n();
    loop {
        let mut g = CMat::zeros(n, n);
        for i in 0..n {
            let exp: f64 = rng.gen_range(-1.0..1.0);
            g[(i, i)] = C64::new(10f64.powf(exp), 0.0);
        }
        for i in 0..n {
            for j in i + 1..n {
                let scale = 0.3 * (g[(i, i)].re * g[(j, j)].re).sqrt();
                let v = C64::new(gauss(rng), gauss(rng)) * scale;
                g[(i, j)] = v;
                g[(j, i)] = v.conj();
            }
        }
        if let Ok(m) = HermitianMetric::new(frame, g) {
            if m.min_eigenvalue() > 1e-3 {
                return m;
            }
        }
    }
}

/// Random SKT-compatible metric on the calibration solvable frames: the
/// same ensemble with `g_{12̄} = 0` enforced, re-drawn until SKT.
pub fn sample_metric_with(
    frame: &Arc<ComplexFrame>,
    rng: &mut impl Rng,
    accept: impl Fn(&HermitianMetric) -> bool,
) -> HermitianMetric {
    for _ in 0..10_000 {
        let m = sample_metric(frame, rng);
        if accept(&m) {
            return m;
        }
    }
    panic!("no acceptable metric found in 10000 draws");
}

fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller; two uniform draws per call keeps the stream deterministic.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
