//! Embedded Dormand–Prince 5(4) integrator with step control.
//!
//! Small dense systems only; the state is a flat `Vec<f64>`. The right-hand
//! side may declare an evaluation invalid (e.g. a metric Gram matrix lost
//! positivity at a trial stage), which triggers step halving instead of a
//! hard failure — degenerating flows stall at the singularity instead of
//! stepping across it.

/// Integration options.
#[derive(Debug, Clone)]
pub struct RkOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Cap on |h|; `None` leaves the controller free.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for RkOptions {
    fn default() -> Self {
        RkOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: None,
            max_steps: 20_000_000,
        }
    }
}

/// Why the driver returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RkOutcome {
    /// Reached the final sample time.
    Completed,
    /// Step size underflowed while trial states kept failing the validity
    /// check (the flow ran into a singular region).
    StalledInvalid { t: f64 },
    /// Step size underflowed on accuracy grounds with valid states.
    StalledAccuracy { t: f64 },
    /// Step budget exhausted.
    StepBudget { t: f64 },
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

/// Drives the system from `t0` through the strictly monotone `samples`
/// (which must end at the final time). `rhs` returns `false` when the
/// evaluation is invalid; `valid` vets accepted states. `on_sample` fires
/// at every sample time hit exactly.
pub fn integrate(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]) -> bool,
    t0: f64,
    x0: &[f64],
    samples: &[f64],
    opts: &RkOptions,
    mut valid: impl FnMut(&[f64]) -> bool,
    mut on_sample: impl FnMut(f64, &[f64]),
) -> RkOutcome {
    let dim = x0.len();
    let mut t = t0;
    let mut x = x0.to_vec();
    if samples.is_empty() {
        return RkOutcome::Completed;
    }
    let dir = (samples[samples.len() - 1] - t0).signum();
    if dir == 0.0 {
        for &s in samples {
            on_sample(s, &x);
        }
        return RkOutcome::Completed;
    }

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut x5 = vec![0.0; dim];
    let mut err = vec![0.0; dim];

    if !rhs(t, &x, &mut k[0]) {
        return RkOutcome::StalledInvalid { t };
    }

    let span = (samples[samples.len() - 1] - t0).abs();
    let mut h = dir * (span * 1e-3).max(1e-10);
    if let Some(hm) = opts.max_step {
        if h.abs() > hm {
            h = dir * hm;
        }
    }

    let mut sample_idx = 0;
    let mut steps = 0usize;
    let mut fsal_valid = true;

    'outer: while sample_idx < samples.len() {
        let target = samples[sample_idx];
        if (target - t) * dir <= 1e-14 * t.abs().max(1.0) {
            on_sample(target, &x);
            sample_idx += 1;
            continue;
        }
        // Clamp the step to the next sample time.
        let mut h_try = h;
        let mut clipped = false;
        if (t + h_try - target) * dir >= 0.0 {
            h_try = target - t;
            clipped = true;
        }

        loop {
            steps += 1;
            if steps > opts.max_steps {
                return RkOutcome::StepBudget { t };
            }
            let h_min = 16.0 * f64::EPSILON * t.abs().max(1.0);
            if h_try.abs() < h_min {
                // Distinguish a singular wall from a pure accuracy stall.
                let mut probe = vec![0.0; dim];
                let wall = !rhs(t + h_try, &x, &mut probe) || !valid(&x);
                return if wall {
                    RkOutcome::StalledInvalid { t }
                } else {
                    RkOutcome::StalledAccuracy { t }
                };
            }

            if !fsal_valid {
                if !rhs(t, &x, &mut k[0]) {
                    return RkOutcome::StalledInvalid { t };
                }
                fsal_valid = true;
            }

            let ok = {
                let mut ok = true;
                // Stage 2..6.
                let coefs: [&[f64]; 5] = [
                    &[A21],
                    &[A31, A32],
                    &[A41, A42, A43],
                    &[A51, A52, A53, A54],
                    &[A61, A62, A63, A64, A65],
                ];
                for (s, cs) in coefs.iter().enumerate() {
                    for i in 0..dim {
                        let mut acc = 0.0;
                        for (j, &aj) in cs.iter().enumerate() {
                            acc += aj * k[j][i];
                        }
                        stage[i] = x[i] + h_try * acc;
                    }
                    if !rhs(t + C[s] * h_try, &stage, &mut k[s + 1]) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    for i in 0..dim {
                        x5[i] = x[i]
                            + h_try
                                * (B1 * k[0][i]
                                    + B3 * k[2][i]
                                    + B4 * k[3][i]
                                    + B5 * k[4][i]
                                    + B6 * k[5][i]);
                    }
                    if !rhs(t + h_try, &x5, &mut k[6]) || !valid(&x5) {
                        ok = false;
                    }
                }
                ok
            };

            if !ok {
                h_try *= 0.5;
                h = h_try;
                clipped = false;
                continue;
            }

            // Embedded error estimate.
            for i in 0..dim {
                err[i] = h_try
                    * (E1 * k[0][i]
                        + E3 * k[2][i]
                        + E4 * k[3][i]
                        + E5 * k[4][i]
                        + E6 * k[5][i]
                        + E7 * k[6][i]);
            }
            let mut norm = 0.0;
            for i in 0..dim {
                let sc = opts.abs_tol + opts.rel_tol * x[i].abs().max(x5[i].abs());
                let r = err[i] / sc;
                norm += r * r;
            }
            let norm = (norm / dim as f64).sqrt();

            if norm <= 1.0 {
                t += h_try;
                x.copy_from_slice(&x5);
                k.swap(0, 6); // FSAL
                fsal_valid = true;
                let factor = if norm == 0.0 {
                    5.0
                } else {
                    (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                };
                let mut h_next = if clipped { h } else { h_try * factor };
                if let Some(hm) = opts.max_step {
                    if h_next.abs() > hm {
                        h_next = dir * hm;
                    }
                }
                h = h_next;
                if clipped || (t - target) * dir >= -1e-14 * t.abs().max(1.0) {
                    if (t - target) * dir >= -1e-14 * t.abs().max(1.0) {
                        on_sample(target, &x);
                        sample_idx += 1;
                    }
                }
                continue 'outer;
            }
            let factor = (0.9 * norm.powf(-0.2)).clamp(0.1, 1.0);
            h_try *= factor;
            h = h_try;
            clipped = false;
        }
    }
    RkOutcome::Completed
}
