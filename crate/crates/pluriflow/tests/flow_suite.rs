//! Flow-level integration tests: preservation properties, reduced-system
//! oracles, and the metric-flow/bracket-flow equivalence beyond the
//! Kodaira-Thurston case.

use pluriflow::bracket::{self, FrameChange};
use pluriflow::catalog;
use pluriflow::flow::{self, reduced_g4_rhs, FlowOpts, FlowStatus};
use pluriflow::frame::ComplexFrame;
use pluriflow::linalg::CMat;
use pluriflow::metrics::{sample_metric, skt_residual, HermitianMetric};
use pluriflow::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn g4_frame(plus: bool) -> Arc<ComplexFrame> {
    let e = catalog::get("g4", &BTreeMap::new()).unwrap();
    let name = if plus { "J+" } else { "J-" };
    e.complex_structures
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, f)| f.clone())
        .unwrap()
}

#[test]
fn skt_and_hermitian_preservation_along_the_flow() {
    let f = catalog::get("g2_0", &BTreeMap::new())
        .unwrap()
        .frame()
        .unwrap()
        .clone();
    let mut rng = ChaCha8Rng::seed_from_u64(75);
    let g = sample_metric(&f, &mut rng);
    let mut m = g.matrix().clone();
    m[(0, 1)] = c(0.0, 0.0);
    m[(1, 0)] = c(0.0, 0.0);
    let g0 = HermitianMetric::new(&f, m).unwrap();
    assert!(skt_residual(&g0) < 1e-10);
    let opts = FlowOpts {
        sample_dt: 0.5,
        ..Default::default()
    };
    let traj = flow::integrate(&f, &g0, 10.0, &opts).unwrap();
    assert_eq!(traj.status, FlowStatus::ReachedTEnd);
    for st in &traj.states {
        assert!(st.herm_defect() < 1e-12, "Hermitian drift");
    }
    for &v in traj.monitor("skt_residual").unwrap() {
        assert!(v < 1e-7, "SKT preservation");
    }
    for &v in traj.monitor("det_g").unwrap() {
        assert!(v > 0.0);
    }
}

#[test]
fn g4_reduced_system_tracks_full_trajectory() {
    for (plus, sign) in [(true, 1.0), (false, -1.0)] {
        let f = g4_frame(plus);
        let mut m = CMat::identity(3);
        m[(0, 0)] = c(1.2, 0.0);
        m[(1, 1)] = c(0.9, 0.0);
        m[(2, 2)] = c(1.5, 0.0);
        m[(0, 2)] = c(0.2, -0.15);
        m[(2, 0)] = c(0.2, 0.15);
        m[(1, 2)] = c(0.1, 0.05);
        m[(2, 1)] = c(0.1, -0.05);
        let g0 = HermitianMetric::new(&f, m).unwrap();
        let opts = FlowOpts {
            sample_dt: 0.5,
            ..Default::default()
        };
        let traj = flow::integrate(&f, &g0, 5.0, &opts).unwrap();
        // Independent fixed-step RK4 on the reduced (x, v, z) system.
        let (g22, g33) = (0.9, 1.5);
        let (mut x, mut v, mut z) = (1.2, g0.entry(0, 2), g0.entry(1, 2));
        let h = 5e-5;
        let mut t = 0.0;
        let mut idx = 1;
        let rhs = |x: f64, v: C64, z: C64| reduced_g4_rhs(x, v, z, g22, g33, sign).unwrap();
        while idx < traj.times.len() {
            let (k1x, k1v, k1z) = rhs(x, v, z);
            let (k2x, k2v, k2z) = rhs(x + 0.5 * h * k1x, v + k1v * (0.5 * h), z + k1z * (0.5 * h));
            let (k3x, k3v, k3z) = rhs(x + 0.5 * h * k2x, v + k2v * (0.5 * h), z + k2z * (0.5 * h));
            let (k4x, k4v, k4z) = rhs(x + h * k3x, v + k3v * h, z + k3z * h);
            x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
            v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
            z += (k1z + k2z * 2.0 + k3z * 2.0 + k4z) * (h / 6.0);
            t += h;
            if (t - traj.times[idx]).abs() < h / 2.0 {
                let st = &traj.states[idx];
                assert!(
                    (st[(0, 0)].re - x).abs() < 1e-8,
                    "x at t = {t} (sign {sign})"
                );
                assert!((st[(0, 2)] - v).norm() < 1e-8, "v at t = {t} (sign {sign})");
                assert!((st[(1, 2)] - z).norm() < 1e-8, "z at t = {t} (sign {sign})");
                idx += 1;
            }
        }
        // ẋ decreases while x increases.
        let mut prev_rate = f64::INFINITY;
        for win in traj.times.windows(2).zip(traj.states.windows(2)) {
            let (ts, sts) = win;
            let rate = (sts[1][(0, 0)].re - sts[0][(0, 0)].re) / (ts[1] - ts[0]);
            assert!(rate > 0.0);
            assert!(rate <= prev_rate + 1e-9, "ẋ must decrease");
            prev_rate = rate;
        }
    }
}

#[test]
fn equivalence_on_a_nilpotent_skt_frame() {
    // 6d SKT frame (B = 1, C = i): metric flow from a non-identity SKT
    // metric versus bracket flow + h-reconstruction, through the model-space
    // normalization.
    let frame = catalog::skt_6d_frame(
        c(0.0, 0.0),
        c(1.0, 0.0),
        c(0.0, 1.0),
        c(0.0, 0.0),
        c(0.0, 0.0),
    )
    .unwrap();
    let mut m = CMat::identity(3);
    m[(0, 0)] = c(1.5, 0.0);
    m[(1, 1)] = c(0.8, 0.0);
    m[(0, 1)] = c(0.1, 0.2);
    m[(1, 0)] = c(0.1, -0.2);
    let g0 = HermitianMetric::new(&frame, m).unwrap();
    assert!(skt_residual(&g0) < 1e-12);
    let opts = FlowOpts {
        sample_dt: 0.25,
        ..Default::default()
    };
    let mtraj = flow::integrate(&frame, &g0, 5.0, &opts).unwrap();
    assert_eq!(mtraj.status, FlowStatus::ReachedTEnd);

    let (state, a_change) = bracket::bracket_from_frame(&frame, &g0).unwrap();
    let btraj = bracket::integrate_bracket(&state.mu, 5.0, &opts).unwrap();
    let h = bracket::integrate_h(&btraj, &FrameChange::identity(3), 5.0, &opts).unwrap();
    let mut worst = 0.0_f64;
    for (idx, fr) in h.frames.iter().enumerate() {
        let g_model = fr.reconstruct();
        let g_orig = bracket::metric_in_original_frame(&a_change, &g_model).unwrap();
        worst = worst.max(g_orig.sub(&mtraj.states[idx]).max_abs());
    }
    assert!(worst < 1e-6, "equivalence deviation {worst:.3e}");

    // Bracket-flow structure preservation along the way.
    for name in ["jacobi", "reality", "integrability"] {
        for &v in btraj.monitor(name).unwrap() {
            assert!(v < 1e-8, "{name}");
        }
    }
    let dims = btraj.monitor("center_dim").unwrap();
    assert!(
        dims.iter().all(|&d| d == dims[0]),
        "center dimension must stay constant"
    );
}

#[test]
fn kt_bracket_norm_decays_at_the_sqrt_rate() {
    let f = catalog::get("kodaira_thurston", &BTreeMap::new())
        .unwrap()
        .frame()
        .unwrap()
        .clone();
    // ‖μ(t)‖ = 1/√(t+1) for this bracket (two coefficient slots of size
    // |z| = 1/(2√(t+1)) in each argument order).
    let opts = FlowOpts {
        sample_dt: 2000.0,
        ..Default::default()
    };
    let traj = bracket::integrate_bracket(&f.mu, 10_000.0, &opts).unwrap();
    assert_eq!(traj.status, FlowStatus::ReachedTEnd);
    let norms = traj.monitor("norm").unwrap();
    for (idx, &t) in traj.times.iter().enumerate() {
        let expect = 1.0 / (t + 1.0).sqrt();
        assert!((norms[idx] - expect).abs() < 1e-5, "‖μ({t})‖");
    }
    for w in norms.windows(2) {
        assert!(w[1] <= w[0] + 1e-9);
    }
    // The √ rate needs t ≈ 1e6 to cross 1e-3, not 1e4.
    let long = bracket::integrate_bracket(
        &f.mu,
        4.0e6,
        &FlowOpts {
            sample_dt: 1.0e6,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(*long.monitor("norm").unwrap().last().unwrap() < 1e-3);
}

#[test]
fn h_flow_rejects_uncovered_range() {
    let f = catalog::get("kodaira_thurston", &BTreeMap::new())
        .unwrap()
        .frame()
        .unwrap()
        .clone();
    let opts = FlowOpts {
        sample_dt: 0.5,
        ..Default::default()
    };
    let traj = bracket::integrate_bracket(&f.mu, 2.0, &opts).unwrap();
    // Requesting beyond the covered range is an input error.
    assert!(bracket::integrate_h(&traj, &FrameChange::identity(2), 5.0, &opts).is_err());
}
