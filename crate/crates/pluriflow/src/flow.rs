//! The invariant pluriclosed flow `d/dt g_{ij̄} = −ρ^B_{ij̄}(g)`.
//!
//! The Bismut Ricci (1,1)-components come from the structure-constant
//! formula
//!
//! ```text
//! ρ^B_{ij̄} = −μ^a_{ij̄} μ^r_{ar̄} + μ^a_{ij̄} g^{k̄r} μ^{l̄}_{rk̄} g_{al̄}
//!           + μ^{b̄}_{ij̄} μ^{r̄}_{b̄r̄} + μ^{b̄}_{ij̄} g^{kr̄} μ^l_{kr̄} g_{lb̄}
//! ```
//!
//! cross-checked in the test suite against the first-principles connection
//! curvature and against the frame-free bracket formula.

use crate::exterior::InvariantForm;
use crate::frame::ComplexFrame;
use crate::linalg::CMat;
use crate::metrics::{skt_residual, HermitianMetric};
use crate::ode::{integrate as rk_integrate, RkOptions, RkOutcome};
use crate::{Error, Result, C64};
use std::sync::Arc;

/// Bismut Ricci (1,1)-components from the structure constants; entry
/// `(i, j)` is `ρ^B_{ij̄}`.
pub fn bismut_ricci_matrix(frame: &ComplexFrame, g: &CMat) -> Result<CMat> {
    let n = frame.n();
    let mu = &frame.mu;
    let minv = g.inverse()?;
    // Partial traces Σ_r μ^r_{ar̄} and Σ_r μ^{r̄}_{b̄r̄}.
    let mut tr_hol = vec![C64::new(0.0, 0.0); n];
    let mut tr_anti = vec![C64::new(0.0, 0.0); n];
    for a in 0..n {
        for r in 0..n {
            tr_hol[a] += mu.get(r, a, n + r);
            tr_anti[a] += mu.get(n + r, n + a, n + r);
        }
    }
    // S_a = Σ_{k,r,l} g^{k̄r} μ^{l̄}_{rk̄} g_{al̄};  T_b = Σ_{k,r,l} g^{kr̄} μ^l_{kr̄} g_{lb̄}.
    let mut s_vec = vec![C64::new(0.0, 0.0); n];
    let mut t_vec = vec![C64::new(0.0, 0.0); n];
    for a in 0..n {
        let mut s = C64::new(0.0, 0.0);
        let mut t = C64::new(0.0, 0.0);
        for k in 0..n {
            for r in 0..n {
                for l in 0..n {
                    s += minv[(k, r)] * mu.get(n + l, r, n + k) * g[(a, l)];
                    t += minv[(k, r)].conj() * mu.get(l, k, n + r) * g[(l, a)];
                }
            }
        }
        s_vec[a] = s;
        t_vec[a] = t;
    }
    let mut rho = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = C64::new(0.0, 0.0);
            for a in 0..n {
                let m = mu.get(a, i, n + j);
                if m.norm_sqr() != 0.0 {
                    v += m * (s_vec[a] - tr_hol[a]);
                }
                let mb = mu.get(n + a, i, n + j);
                if mb.norm_sqr() != 0.0 {
                    v += mb * (tr_anti[a] + t_vec[a]);
                }
            }
            rho[(i, j)] = v;
        }
    }
    Ok(rho)
}

/// The (1,1) Bismut Ricci form `−i ρ^B_{ij̄} α^i ∧ α^{j̄}` from the
/// structure-constant formula.
pub fn bismut_ricci_11(frame: &Arc<ComplexFrame>, g: &HermitianMetric) -> Result<InvariantForm> {
    let n = frame.n();
    let rho = bismut_ricci_matrix(frame, g.matrix())?;
    let mut form = InvariantForm::zero(frame);
    for i in 0..n {
        for j in 0..n {
            form = form.add(&InvariantForm::monomial(
                frame,
                &[i, n + j],
                C64::new(0.0, -1.0) * rho[(i, j)],
            ));
        }
    }
    Ok(form)
}

/// Right side of the metric flow: `d/dt g_{ij̄} = −ρ^B_{ij̄}`, hermitized.
pub fn flow_rhs(frame: &ComplexFrame, g: &CMat) -> Result<CMat> {
    Ok(bismut_ricci_matrix(frame, g)?
        .scale(C64::new(-1.0, 0.0))
        .hermitize())
}

/// Flow integration options.
#[derive(Debug, Clone)]
pub struct FlowOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: Option<f64>,
    /// Spacing of recorded samples.
    pub sample_dt: f64,
    /// Hard stop: `det g < degeneracy_rel · det g(0)` at a recorded sample.
    pub degeneracy_rel: f64,
    /// Stall classification: a step-size underflow with
    /// `det g < stall_degeneracy_rel · det g(0)` counts as degeneration.
    pub stall_degeneracy_rel: f64,
}

impl Default for FlowOpts {
    fn default() -> Self {
        FlowOpts {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: None,
            sample_dt: 0.1,
            degeneracy_rel: 1e-10,
            stall_degeneracy_rel: 1e-3,
        }
    }
}

/// Terminal state of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum FlowStatus {
    ReachedTEnd,
    StoppedDegenerate { t: f64 },
    StoppedStepFail { t: f64 },
}

/// Time-sampled record of an integrated metric flow.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
    /// Named per-sample channels; always includes `det_g` and `skt_residual`.
    pub monitors: Vec<(String, Vec<f64>)>,
    pub status: FlowStatus,
}

impl FlowTrajectory {
    pub fn last_metric(&self, frame: &Arc<ComplexFrame>) -> Result<HermitianMetric> {
        HermitianMetric::new(frame, self.states.last().unwrap().clone())
    }

    pub fn monitor(&self, name: &str) -> Option<&[f64]> {
        self.monitors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Tidy CSV: `t`, then re/im of the upper triangle of g row-major, then
    /// the monitor channels.
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map(|m| m.rows).unwrap_or(0);
        let mut header = vec!["t".to_string()];
        for i in 0..n {
            for j in i..n {
                header.push(format!("re_g{}{}", i + 1, j + 1));
                header.push(format!("im_g{}{}", i + 1, j + 1));
            }
        }
        for (name, _) in &self.monitors {
            header.push(name.clone());
        }
        let mut out = header.join(",");
        out.push('\n');
        for (idx, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.16e}")];
            let m = &self.states[idx];
            for i in 0..n {
                for j in i..n {
                    row.push(format!("{:.16e}", m[(i, j)].re));
                    row.push(format!("{:.16e}", m[(i, j)].im));
                }
            }
            for (_, chan) in &self.monitors {
                row.push(format!("{:.16e}", chan[idx]));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let n = self.states.first().map(|m| m.rows).unwrap_or(0);
        let states: Vec<serde_json::Value> = self
            .states
            .iter()
            .map(|m| {
                let rows: Vec<Vec<[f64; 2]>> = (0..n)
                    .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect();
                serde_json::json!(rows)
            })
            .collect();
        let monitors: serde_json::Map<String, serde_json::Value> = self
            .monitors
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::json!(v)))
            .collect();
        serde_json::json!({
            "t": self.times,
            "g": states,
            "monitors": monitors,
            "status": self.status,
        })
    }
}

fn pack(g: &CMat, out: &mut Vec<f64>) {
    let n = g.rows;
    out.clear();
    for i in 0..n {
        for j in i..n {
            out.push(g[(i, j)].re);
            if j > i {
                out.push(g[(i, j)].im);
            }
        }
    }
}

fn unpack(n: usize, x: &[f64]) -> CMat {
    let mut g = CMat::zeros(n, n);
    let mut pos = 0;
    for i in 0..n {
        for j in i..n {
            let re = x[pos];
            pos += 1;
            let im = if j > i {
                let v = x[pos];
                pos += 1;
                v
            } else {
                0.0
            };
            g[(i, j)] = C64::new(re, im);
            if j > i {
                g[(j, i)] = C64::new(re, -im);
            }
        }
    }
    g
}

/// Integrates the pluriclosed flow from `g0` to `t_end` (negative for the
/// backward flow), recording samples every `opts.sample_dt`.
pub fn integrate(
    frame: &Arc<ComplexFrame>,
    g0: &HermitianMetric,
    t_end: f64,
    opts: &FlowOpts,
) -> Result<FlowTrajectory> {
    if !opts.sample_dt.is_finite() || opts.sample_dt <= 0.0 {
        return Err(Error::ParameterDomain("sample_dt must be positive".into()));
    }
    if !t_end.is_finite() {
        return Err(Error::ParameterDomain("t_end must be finite".into()));
    }
    let n = frame.n();
    let det0 = g0.det();
    let dir = if t_end >= 0.0 { 1.0 } else { -1.0 };
    let mut samples = Vec::new();
    let mut k = 1usize;
    loop {
        let t = dir * (k as f64) * opts.sample_dt;
        if (t - t_end) * dir >= -1e-12 {
            break;
        }
        samples.push(t);
        k += 1;
    }
    if t_end != 0.0 {
        samples.push(t_end);
    }

    let mut x0 = Vec::new();
    pack(g0.matrix(), &mut x0);

    let mut times = vec![0.0];
    let mut states = vec![g0.matrix().clone()];
    let mut dets = vec![det0];
    let mut skts = vec![skt_residual(g0)];
    let mut degenerate_hit: Option<f64> = None;

    let rk_opts = RkOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step,
        ..Default::default()
    };
    let frame2 = frame.clone();
    let deg_floor = opts.degeneracy_rel * det0;
    let mut dx_mat = CMat::zeros(n, n);
    let outcome = rk_integrate(
        |_t, x, dx| {
            let g = unpack(n, x);
            let det = g.det().re;
            if !det.is_finite() || det <= 0.0 {
                return false;
            }
            match flow_rhs(&frame2, &g) {
                Ok(r) => {
                    dx_mat = r;
                    let mut tmp = Vec::new();
                    pack(&dx_mat, &mut tmp);
                    dx.copy_from_slice(&tmp);
                    dx.iter().all(|v| v.is_finite())
                }
                Err(_) => false,
            }
        },
        0.0,
        &x0,
        &samples,
        &rk_opts,
        |x| {
            let g = unpack(n, x);
            let det = g.det().re;
            det.is_finite() && det > 0.0
        },
        |t, x| {
            if degenerate_hit.is_some() {
                return;
            }
            let g = unpack(n, x);
            let det = g.det().re;
            times.push(t);
            states.push(g.clone());
            dets.push(det);
            let skt = HermitianMetric::new(&frame2, g)
                .map(|m| skt_residual(&m))
                .unwrap_or(f64::NAN);
            skts.push(skt);
            if det < deg_floor {
                degenerate_hit = Some(t);
            }
        },
    );

    let status = if let Some(t) = degenerate_hit {
        FlowStatus::StoppedDegenerate { t }
    } else {
        match outcome {
            RkOutcome::Completed => FlowStatus::ReachedTEnd,
            RkOutcome::StalledInvalid { t } => FlowStatus::StoppedDegenerate { t },
            RkOutcome::StalledAccuracy { t } => {
                // Classify by how far the volume collapsed.
                let det_last = *dets.last().unwrap();
                if det_last < opts.stall_degeneracy_rel * det0 {
                    FlowStatus::StoppedDegenerate { t }
                } else {
                    FlowStatus::StoppedStepFail { t }
                }
            }
            RkOutcome::StepBudget { t } => FlowStatus::StoppedStepFail { t },
        }
    };

    let mut monitors = vec![
        ("det_g".to_string(), dets),
        ("skt_residual".to_string(), skts),
    ];
    if n == 3 {
        // Reduction channels of the 6d solvable calibration frames:
        // x = g_{11̄}, |v|² = |g_{13̄}|², |z|² = |g_{23̄}|².
        monitors.push((
            "x_g11".into(),
            states.iter().map(|m| m[(0, 0)].re).collect(),
        ));
        monitors.push((
            "abs2_v_g13".into(),
            states.iter().map(|m| m[(0, 2)].norm_sqr()).collect(),
        ));
        monitors.push((
            "abs2_z_g23".into(),
            states.iter().map(|m| m[(1, 2)].norm_sqr()).collect(),
        ));
    }
    Ok(FlowTrajectory {
        times,
        states,
        monitors,
        status,
    })
}

/// Reduced flow of the first calibration solvable frame in SKT normal form
/// (`g_{12̄} = 0`): the evolving components are `v = g_{13̄}`, `z = g_{23̄}`,
/// with `v̇ = v g₁₁̄ g₂₂̄ / (g₁₁̄|z|² + g₂₂̄|v|² − c)`, `c = g₁₁̄ g₂₂̄ g₃₃̄`,
/// and the same equation for `z`.
pub fn reduced_g20_rhs(v: C64, z: C64, g11: f64, g22: f64, g33: f64) -> Result<(C64, C64)> {
    let c = g11 * g22 * g33;
    let det = c - g11 * z.norm_sqr() - g22 * v.norm_sqr();
    if det <= 0.0 {
        return Err(Error::SingularMetric(format!(
            "reduced state has det {det:.3e}"
        )));
    }
    let denom = -det;
    Ok((v * g11 * g22 / denom, z * g11 * g22 / denom))
}

/// Reduced flow of the second calibration solvable frame (`J_±`, sign = ±1):
/// evolving components `x = g_{11̄}`, `v = g_{13̄}`, `z = g_{23̄}` with
/// `W = g₂₂̄ g₃₃̄ − |z|²`, `D = xW − g₂₂̄|v|²`:
/// `ẋ = 2 g₃₃̄ W / D`, `v̇ = −v (x g₂₂̄ − s·i·W)/D`, `ż = −z (x g₂₂̄ + s·i·W)/D`.
pub fn reduced_g4_rhs(
    x: f64,
    v: C64,
    z: C64,
    g22: f64,
    g33: f64,
    sign: f64,
) -> Result<(f64, C64, C64)> {
    let w = g22 * g33 - z.norm_sqr();
    let d = x * w - g22 * v.norm_sqr();
    if d <= 0.0 {
        return Err(Error::SingularMetric(format!(
            "reduced state has det {d:.3e}"
        )));
    }
    let i = C64::new(0.0, 1.0);
    let xdot = 2.0 * g33 * w / d;
    let vdot = -v * (C64::new(x * g22, 0.0) - i * (sign * w)) / d;
    let zdot = -z * (C64::new(x * g22, 0.0) + i * (sign * w)) / d;
    Ok((xdot, vdot, zdot))
}
