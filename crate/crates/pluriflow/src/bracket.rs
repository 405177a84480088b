//! The bracket-flow reformulation of the pluriclosed flow.
//!
//! The Lie algebra is identified with the model space carrying the standard
//! Hermitian structure; the metric stays fixed and the bracket evolves by
//! `dμ/dt = ½ δ_μ(P_μ)` with `ω_o(P_μ X, Y) = (ρ^B_μ)^{1,1}(X, Y)` and
//! `δ_μ(α) = μ(α·,·) + μ(·,α·) − α μ(·,·)`.
//!
//! The companion frame change integrates `dh/dt = −½ P_{μ(t)} h`; then
//! `ω(t) = h(t)^*(ω_o)` reproduces the metric flow. The ½ in the h-equation
//! is forced by the quadratic pullback `g(t) = ω_o(h·, h·)`: differentiating
//! it against the metric flow and using the equivariance of `ρ^B` under
//! frame changes yields `h⁻¹ḣ = −½ h⁻¹P_μ h`, consistent with the bracket
//! equation through `μ(t) = h(t)·μ_o`.

use crate::flow::{FlowOpts, FlowStatus};
use crate::frame::{ComplexFrame, Mu};
use crate::linalg::CMat;
use crate::metrics::HermitianMetric;
use crate::ode::{integrate as rk_integrate, RkOptions, RkOutcome};
use crate::{tol, Error, Result, C64};
use std::sync::Arc;

/// A Lie bracket on the model space with the standard Hermitian structure.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketState {
    pub mu: Mu,
}

impl BracketState {
    pub fn new(mu: Mu) -> Self {
        BracketState { mu }
    }

    pub fn n(&self) -> usize {
        self.mu.n()
    }

    pub fn norm(&self) -> f64 {
        self.mu.norm()
    }
}

/// Invertible complex frame change acting on the (1,0) model space.
#[derive(Debug, Clone)]
pub struct FrameChange {
    pub h: CMat,
}

impl FrameChange {
    pub fn identity(n: usize) -> Self {
        FrameChange {
            h: CMat::identity(n),
        }
    }

    pub fn det(&self) -> C64 {
        self.h.det()
    }

    /// Pullback `h^*(ω_o)` as a metric matrix: `g_{ij̄} = Σ_k h_{ki} h̄_{kj}`.
    pub fn reconstruct(&self) -> CMat {
        let n = self.h.rows;
        CMat::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.h[(k, i)] * self.h[(k, j)].conj()).sum()
        })
    }
}

/// Model-space pairing `⟨E_C, E_D⟩ = δ_{C, bar(D)}` extended bilinearly.
fn model_pair(n: usize, v: &[C64], w: &[C64]) -> C64 {
    let s = 2 * n;
    (0..s).map(|c| v[c] * w[(c + n) % s]).sum()
}

/// The 2-form `ρ^B_μ(X, Y) = i Σ_r (⟨μ(μ(X,Y), Z_r), Z_r̄⟩ − ⟨μ(Z_r, Z_r̄), μ(X,Y)⟩)`
/// on the standard unitary basis, as the matrix of its values on basis pairs.
pub fn rho_mu(mu: &Mu) -> CMat {
    let n = mu.n();
    let s = 2 * n;
    let mut vals = CMat::zeros(s, s);
    for a in 0..s {
        for b in a + 1..s {
            let w = mu.bracket_basis(a, b);
            let mut term_a = C64::new(0.0, 0.0);
            for r in 0..n {
                let mut er = vec![C64::new(0.0, 0.0); s];
                er[r] = C64::new(1.0, 0.0);
                let v = mu.bracket(&w, &er);
                term_a += v[r];
            }
            let mut term_b = C64::new(0.0, 0.0);
            for r in 0..n {
                let zr = mu.bracket_basis(r, n + r);
                term_b += model_pair(n, &zr, &w);
            }
            let v = C64::new(0.0, 1.0) * (term_a - term_b);
            vals[(a, b)] = v;
            vals[(b, a)] = -v;
        }
    }
    vals
}

/// The endomorphism `P_μ` with `ω_o(P_μ X, Y) = (ρ^B_μ)^{1,1}(X, Y)`;
/// returned as its n×n action on the (1,0) block (the barred block acts by
/// conjugation). With `ω_o(Z_i, Z_j̄) = −i δ_ij` this is `P_{ji} = i ρ_μ(Z_i, Z_j̄)`.
pub fn p_mu(mu: &Mu) -> CMat {
    let n = mu.n();
    let rho = rho_mu(mu);
    CMat::from_fn(n, n, |j, i| C64::new(0.0, 1.0) * rho[(i, n + j)])
}

/// Residual of the defining relation of [`p_mu`] on all basis pairs.
pub fn p_mu_defect(mu: &Mu) -> f64 {
    let n = mu.n();
    let p = p_mu(mu);
    let rho = rho_mu(mu);
    let mut worst = 0.0_f64;
    // ω_o(P Z_i, Z_j̄) = −i P_{ji} must match ρ^{1,1}(Z_i, Z_j̄) = ρ(Z_i, Z_j̄).
    for i in 0..n {
        for j in 0..n {
            let lhs = C64::new(0.0, -1.0) * p[(j, i)];
            worst = worst.max((lhs - rho[(i, n + j)]).norm());
        }
    }
    worst
}

/// Extends the complex-linear (1,0)-block action to the alphabet.
fn apply_alpha(n: usize, alpha: &CMat, v: &[C64]) -> Vec<C64> {
    let s = 2 * n;
    let mut out = vec![C64::new(0.0, 0.0); s];
    for j in 0..n {
        for i in 0..n {
            out[j] += alpha[(j, i)] * v[i];
            out[n + j] += alpha[(j, i)].conj() * v[n + i];
        }
    }
    let _ = s;
    out
}

/// `δ_μ(α) = μ(α·, ·) + μ(·, α·) − α μ(·, ·)` for a complex-linear real
/// endomorphism given by its (1,0) block.
pub fn delta_mu(mu: &Mu, alpha: &CMat) -> Mu {
    let n = mu.n();
    let s = 2 * n;
    let mut out = Mu::zero(n);
    for a in 0..s {
        let mut ea = vec![C64::new(0.0, 0.0); s];
        ea[a] = C64::new(1.0, 0.0);
        let aea = apply_alpha(n, alpha, &ea);
        for b in a + 1..s {
            let mut eb = vec![C64::new(0.0, 0.0); s];
            eb[b] = C64::new(1.0, 0.0);
            let aeb = apply_alpha(n, alpha, &eb);
            let t1 = mu.bracket(&aea, &eb);
            let t2 = mu.bracket(&ea, &aeb);
            let t3 = apply_alpha(n, alpha, &mu.bracket_basis(a, b));
            for c in 0..s {
                let v = t1[c] + t2[c] - t3[c];
                if v.norm_sqr() != 0.0 {
                    out.set(c, a, b, v);
                }
            }
        }
    }
    out
}

/// Right side of the bracket flow `dμ/dt = ½ δ_μ(P_μ)`.
pub fn bracket_rhs(mu: &Mu) -> Mu {
    let p = p_mu(mu);
    let d = delta_mu(mu, &p);
    let n = mu.n();
    let s = 2 * n;
    let mut out = Mu::zero(n);
    for c in 0..s {
        for a in 0..s {
            for b in a + 1..s {
                out.set(c, a, b, d.get(c, a, b) * 0.5);
            }
        }
    }
    out
}

/// Basis of the center `{X : μ(X, ·) = 0}` via singular values at the 1e−9
/// rank threshold.
pub fn center(mu: &Mu) -> Vec<Vec<C64>> {
    let n = mu.n();
    let s = 2 * n;
    let m = CMat::from_fn(s * s, s, |row, a| {
        let c = row / s;
        let b = row % s;
        mu.get(c, a, b)
    });
    m.kernel(tol::RANK)
}

fn pack_mu(mu: &Mu, out: &mut Vec<f64>) {
    let s = 2 * mu.n();
    out.clear();
    for c in 0..s {
        for a in 0..s {
            for b in a + 1..s {
                let v = mu.get(c, a, b);
                out.push(v.re);
                out.push(v.im);
            }
        }
    }
}

fn unpack_mu(n: usize, x: &[f64]) -> Mu {
    let s = 2 * n;
    let mut mu = Mu::zero(n);
    let mut pos = 0;
    for c in 0..s {
        for a in 0..s {
            for b in a + 1..s {
                mu.set(c, a, b, C64::new(x[pos], x[pos + 1]));
                pos += 2;
            }
        }
    }
    mu
}

/// Time-sampled bracket-flow record with structure-preservation monitors.
#[derive(Debug, Clone)]
pub struct BracketTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Mu>,
    pub monitors: Vec<(String, Vec<f64>)>,
    pub status: FlowStatus,
}

impl BracketTrajectory {
    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .states
            .iter()
            .map(|mu| {
                let s = 2 * mu.n();
                let mut terms = Vec::new();
                for c in 0..s {
                    for a in 0..s {
                        for b in a + 1..s {
                            let v = mu.get(c, a, b);
                            if v.norm() > 0.0 {
                                terms.push(serde_json::json!([c, a, b, v.re, v.im]));
                            }
                        }
                    }
                }
                serde_json::json!(terms)
            })
            .collect();
        let monitors: serde_json::Map<String, serde_json::Value> = self
            .monitors
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        serde_json::json!({
            "t": self.times,
            "mu": states,
            "monitors": monitors,
            "status": self.status,
        })
    }
}

fn sample_grid(t_end: f64, dt: f64) -> Vec<f64> {
    let dir = if t_end >= 0.0 { 1.0 } else { -1.0 };
    let mut samples = Vec::new();
    let mut k = 1usize;
    loop {
        let t = dir * (k as f64) * dt;
        if (t - t_end) * dir >= -1e-12 {
            break;
        }
        samples.push(t);
        k += 1;
    }
    if t_end != 0.0 {
        samples.push(t_end);
    }
    samples
}

/// Integrates the bracket flow `dμ/dt = ½ δ_μ(P_μ)`.
pub fn integrate_bracket(mu0: &Mu, t_end: f64, opts: &FlowOpts) -> Result<BracketTrajectory> {
    let n = mu0.n();
    let mut x0 = Vec::new();
    pack_mu(mu0, &mut x0);
    let samples = sample_grid(t_end, opts.sample_dt);

    let mut times = vec![0.0];
    let mut states = vec![mu0.clone()];
    let push_monitors = |mu: &Mu, mons: &mut [Vec<f64>]| {
        mons[0].push(mu.norm());
        mons[1].push(mu.jacobi_residual());
        mons[2].push(mu.reality_residual());
        mons[3].push(mu.integrability_residual());
        mons[4].push(center(mu).len() as f64);
    };
    let mut mons: Vec<Vec<f64>> = vec![Vec::new(); 5];
    push_monitors(mu0, &mut mons);

    let rk_opts = RkOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        ..Default::default()
    };
    let outcome = rk_integrate(
        |_t, x, dx| {
            let mu = unpack_mu(n, x);
            let rhs = bracket_rhs(&mu);
            let mut tmp = Vec::new();
            pack_mu(&rhs, &mut tmp);
            dx.copy_from_slice(&tmp);
            dx.iter().all(|v| v.is_finite())
        },
        0.0,
        &x0,
        &samples,
        &rk_opts,
        |x| x.iter().all(|v| v.is_finite()),
        |t, x| {
            let mu = unpack_mu(n, x);
            times.push(t);
            push_monitors(&mu, &mut mons);
            states.push(mu);
        },
    );
    let status = match outcome {
        RkOutcome::Completed => FlowStatus::ReachedTEnd,
        RkOutcome::StalledInvalid { t } | RkOutcome::StalledAccuracy { t } => {
            FlowStatus::StoppedStepFail { t }
        }
        RkOutcome::StepBudget { t } => FlowStatus::StoppedStepFail { t },
    };
    let names = ["norm", "jacobi", "reality", "integrability", "center_dim"];
    Ok(BracketTrajectory {
        times,
        states,
        monitors: names.iter().map(|s| s.to_string()).zip(mons).collect(),
        status,
    })
}

/// Frame-change trajectory: `dh/dt = −½ P_{μ(t)} h`, integrated jointly with
/// the bracket flow restarted from the trajectory's initial state.
#[derive(Debug, Clone)]
pub struct HTrajectory {
    pub times: Vec<f64>,
    pub frames: Vec<FrameChange>,
    pub status: FlowStatus,
}

pub fn integrate_h(
    traj: &BracketTrajectory,
    h0: &FrameChange,
    t_end: f64,
    opts: &FlowOpts,
) -> Result<HTrajectory> {
    let mu0 = traj
        .states
        .first()
        .ok_or_else(|| Error::Numerical("empty bracket trajectory".into()))?;
    let t_last = *traj.times.last().unwrap();
    if (t_end > 0.0 && t_last < t_end - 1e-12) || (t_end < 0.0 && t_last > t_end + 1e-12) {
        return Err(Error::ParameterDomain(format!(
            "bracket trajectory covers up to t = {t_last}, requested {t_end}"
        )));
    }
    let n = mu0.n();
    let mu_len = {
        let mut tmp = Vec::new();
        pack_mu(mu0, &mut tmp);
        tmp.len()
    };
    let mut x0 = Vec::new();
    pack_mu(mu0, &mut x0);
    for i in 0..n {
        for j in 0..n {
            x0.push(h0.h[(i, j)].re);
            x0.push(h0.h[(i, j)].im);
        }
    }
    let unpack_h = |x: &[f64]| -> CMat {
        let mut h = CMat::zeros(n, n);
        let mut pos = mu_len;
        for i in 0..n {
            for j in 0..n {
                h[(i, j)] = C64::new(x[pos], x[pos + 1]);
                pos += 2;
            }
        }
        h
    };
    let samples = sample_grid(t_end, opts.sample_dt);
    let mut times = vec![0.0];
    let mut frames = vec![h0.clone()];
    let rk_opts = RkOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        ..Default::default()
    };
    let mut singular_at: Option<f64> = None;
    let outcome = rk_integrate(
        |_t, x, dx| {
            let mu = unpack_mu(n, &x[..mu_len]);
            let rhs_mu = bracket_rhs(&mu);
            let mut tmp = Vec::new();
            pack_mu(&rhs_mu, &mut tmp);
            let h = unpack_h(x);
            let hdot = p_mu(&mu).mul(&h).scale(C64::new(-0.5, 0.0));
            for i in 0..n {
                for j in 0..n {
                    tmp.push(hdot[(i, j)].re);
                    tmp.push(hdot[(i, j)].im);
                }
            }
            dx.copy_from_slice(&tmp);
            dx.iter().all(|v| v.is_finite())
        },
        0.0,
        &x0,
        &samples,
        &rk_opts,
        |x| x.iter().all(|v| v.is_finite()),
        |t, x| {
            let h = unpack_h(x);
            if h.det().norm() < 1e-12 && singular_at.is_none() {
                singular_at = Some(t);
            }
            times.push(t);
            frames.push(FrameChange { h });
        },
    );
    if let Some(t) = singular_at {
        return Err(Error::Numerical(format!(
            "frame change became singular at t = {t}"
        )));
    }
    let status = match outcome {
        RkOutcome::Completed => FlowStatus::ReachedTEnd,
        RkOutcome::StalledInvalid { t } | RkOutcome::StalledAccuracy { t } => {
            FlowStatus::StoppedStepFail { t }
        }
        RkOutcome::StepBudget { t } => FlowStatus::StoppedStepFail { t },
    };
    Ok(HTrajectory {
        times,
        frames,
        status,
    })
}

/// Moves a geometry `(frame, g0)` onto the model space: returns the bracket
/// expressed in a basis that turns `g0` into the identity, together with
/// the (1,0) basis change `A` (columns give the new frame over the old).
pub fn bracket_from_frame(
    frame: &Arc<ComplexFrame>,
    g0: &HermitianMetric,
) -> Result<(BracketState, CMat)> {
    let l = g0.matrix().cholesky()?;
    let a = l.adjoint().inverse()?.conj();
    let mu = frame.mu.change_basis(&a)?;
    Ok((BracketState::new(mu), a))
}

/// Expresses a model-space metric back in the original frame coordinates:
/// `G_orig = Ainvᵀ · G_model · conj(Ainv)`.
pub fn metric_in_original_frame(a_change: &CMat, g_model: &CMat) -> Result<CMat> {
    let ainv = a_change.inverse()?;
    Ok(ainv.transpose().mul(g_model).mul(&ainv.conj()))
}
