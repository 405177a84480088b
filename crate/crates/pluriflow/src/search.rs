//! Existence deciders over the invariant cone and algebra-level Bott–Chern
//! dimensions.
//!
//! The SKT, Kähler and taming conditions are linear in the unknown
//! coefficients, so feasibility is: compute the kernel of the linear
//! condition, then maximize the minimum eigenvalue of the associated
//! Hermitian matrix over the unit sphere of the kernel (a concave problem,
//! solved by projected supergradient ascent with multistart). Balanced and
//! static are polynomial and go through penalized Nelder–Mead multistart.
//! Infeasibility is always "at tolerance": best objective ≤ 1e−6 over the
//! configured starts, except where an empty kernel certifies it exactly.

use crate::exterior::InvariantForm;
use crate::frame::ComplexFrame;
use crate::linalg::CMat;
use crate::metrics::{
    balanced_residual, kahler_residual, skt_residual, static_residual, Family1Coeffs,
    HermitianMetric,
};
use crate::{tol, Error, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Search verdict. `InfeasibleAtTolerance` means the best objective stayed
/// at or below the feasibility margin over all starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Status {
    Feasible,
    InfeasibleAtTolerance,
}

/// Outcome of a feasibility search.
#[derive(Debug, Clone)]
pub struct FeasibilityResult {
    pub status: Status,
    pub witness_metric: Option<HermitianMetric>,
    pub witness_form: Option<InvariantForm>,
    /// Supremum reached by the search (min-eigenvalue for the linear
    /// searches, negative residual for the polynomial ones).
    pub best_objective: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status,
            "best_objective": self.best_objective,
            "iterations": self.iterations,
            "seed": self.seed,
            "witness": self.witness_metric.as_ref().map(|m| m.to_json()),
        })
    }
}

/// Options shared by all searches.
#[derive(Debug, Clone)]
pub struct SearchOpts {
    pub starts: usize,
    pub seed: u64,
    /// Worker threads for the multistart fan-out.
    pub workers: usize,
}

impl Default for SearchOpts {
    fn default() -> Self {
        SearchOpts {
            starts: 64,
            seed: 0,
            workers: default_workers(),
        }
    }
}

fn default_workers() -> usize {
    if let Ok(v) = std::env::var("PLURIFLOW_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

// ---------------------------------------------------------------------------
// Coefficient enumeration.
// ---------------------------------------------------------------------------

fn masks_of_weight(n: usize, w: usize) -> Vec<usize> {
    (0..(1usize << n))
        .filter(|m| m.count_ones() as usize == w)
        .collect()
}

/// Canonical monomial keys of pure bidegree (p, q).
fn keys_pq(n: usize, p: usize, q: usize) -> Vec<(usize, usize)> {
    let mut keys = Vec::new();
    for iu in masks_of_weight(n, p) {
        for jb in masks_of_weight(n, q) {
            keys.push((iu, jb));
        }
    }
    keys
}

/// Canonical monomial keys of total degree k (all bidegrees).
fn keys_deg(n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut keys = Vec::new();
    for p in 0..=k.min(n) {
        let q = k - p;
        if q <= n {
            keys.extend(keys_pq(n, p, q));
        }
    }
    keys
}

fn coeff_vector(form: &InvariantForm, keys: &[(usize, usize)]) -> Vec<C64> {
    let mut map = std::collections::BTreeMap::new();
    for (iu, jb, c) in form.terms() {
        map.insert((iu, jb), c);
    }
    keys.iter()
        .map(|k| map.get(k).copied().unwrap_or(C64::new(0.0, 0.0)))
        .collect()
}

// ---------------------------------------------------------------------------
// Hermitian coordinates.
// ---------------------------------------------------------------------------

/// Frobenius-orthonormal basis of the real vector space of Hermitian n×n
/// matrices: diagonal units, then (real, imaginary) off-diagonal pairs.
pub fn hermitian_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::new();
    for k in 0..n {
        let mut m = CMat::zeros(n, n);
        m[(k, k)] = C64::new(1.0, 0.0);
        out.push(m);
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            let mut re = CMat::zeros(n, n);
            re[(i, j)] = C64::new(r, 0.0);
            re[(j, i)] = C64::new(r, 0.0);
            out.push(re);
            let mut im = CMat::zeros(n, n);
            im[(i, j)] = C64::new(0.0, r);
            im[(j, i)] = C64::new(0.0, -r);
            out.push(im);
        }
    }
    out
}

fn combine(basis: &[CMat], x: &[f64]) -> CMat {
    let n = basis[0].rows;
    let mut m = CMat::zeros(n, n);
    for (b, &c) in basis.iter().zip(x) {
        if c != 0.0 {
            m = m.add(&b.scale(C64::new(c, 0.0)));
        }
    }
    m
}

/// Fundamental form of a (not necessarily positive) Hermitian matrix.
fn form_of_hermitian(frame: &Arc<ComplexFrame>, h: &CMat) -> InvariantForm {
    let n = frame.n();
    let mut form = InvariantForm::zero(frame);
    for i in 0..n {
        for j in 0..n {
            form = form.add(&InvariantForm::monomial(
                frame,
                &[i, n + j],
                C64::new(0.0, -1.0) * h[(i, j)],
            ));
        }
    }
    form
}

/// Real kernel of a linear map from coordinates to form coefficients.
/// `apply(i)` must return the image form of the i-th coordinate vector.
fn real_kernel(
    dim: usize,
    out_keys_len: usize,
    apply: impl Fn(usize) -> Vec<C64>,
) -> Vec<Vec<f64>> {
    let mut m = CMat::zeros(2 * out_keys_len, dim);
    for col in 0..dim {
        let coeffs = apply(col);
        for (row, c) in coeffs.iter().enumerate() {
            m[(2 * row, col)] = C64::new(c.re, 0.0);
            m[(2 * row + 1, col)] = C64::new(c.im, 0.0);
        }
    }
    m.kernel(tol::RANK)
        .into_iter()
        .map(|v| v.into_iter().map(|z| z.re).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// Concave min-eigenvalue maximization on the kernel sphere.
// ---------------------------------------------------------------------------

struct AscentOutcome {
    best_objective: f64,
    best_x: Vec<f64>,
    iterations: usize,
}

/// Maximize `λ_min(H(x))` over the unit sphere, `H` linear with the given
/// Hermitian images of the kernel basis vectors. The ascent runs on the
/// soft-min surrogate `−τ ln Σ_k exp(−λ_k/τ)` with annealed τ, which stays
/// smooth across eigenvalue crossings; the reported objective is the exact
/// minimum eigenvalue.
fn max_min_eig(hmats: &[CMat], opts: &SearchOpts) -> AscentOutcome {
    let k = hmats.len();
    let n = hmats[0].rows;
    let assemble = |x: &[f64]| -> CMat {
        let mut h = CMat::zeros(n, n);
        for (b, &c) in hmats.iter().zip(x) {
            if c != 0.0 {
                h = h.add(&b.scale(C64::new(c, 0.0)));
            }
        }
        h
    };
    // Soft-min value and gradient in kernel coordinates.
    let smooth = |x: &[f64], tau: f64| -> (f64, Vec<f64>) {
        let (vals, vecs) = assemble(x).eigh();
        let vmin = vals[0];
        let mut weights: Vec<f64> = vals.iter().map(|v| (-(v - vmin) / tau).exp()).collect();
        let wsum: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= wsum;
        }
        let f = vmin - tau * wsum.ln();
        let grad = hmats
            .iter()
            .map(|b| {
                let mut acc = 0.0;
                for (kk, w) in weights.iter().enumerate() {
                    if *w < 1e-14 {
                        continue;
                    }
                    let v: Vec<C64> = (0..n).map(|i| vecs[(i, kk)]).collect();
                    let bv = b.mul_vec(&v);
                    let q: f64 = v.iter().zip(&bv).map(|(v, w)| (v.conj() * w).re).sum();
                    acc += w * q;
                }
                acc
            })
            .collect();
        (f, grad)
    };
    let normalize = |x: &mut Vec<f64>| {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in x.iter_mut() {
                *v /= norm;
            }
        }
    };
    let exact_min = |x: &[f64]| -> f64 { assemble(x).eigh().0[0] };
    let run_start = |x0: Vec<f64>| -> (f64, Vec<f64>, usize) {
        let mut x = x0;
        normalize(&mut x);
        let mut iters = 0;
        for &tau in &[0.3, 0.03, 0.003, 3e-4] {
            let (mut fx, _) = smooth(&x, tau);
            let mut eta = 0.5;
            let mut stage_iters = 0;
            while eta > 1e-11 && stage_iters < 150 {
                stage_iters += 1;
                iters += 1;
                let (_, mut grad) = smooth(&x, tau);
                let dot: f64 = grad.iter().zip(&x).map(|(g, v)| g * v).sum();
                for (g, v) in grad.iter_mut().zip(&x) {
                    *g -= dot * v;
                }
                let gnorm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
                if gnorm < 1e-13 {
                    break;
                }
                let mut trial: Vec<f64> = x.iter().zip(&grad).map(|(v, g)| v + eta * g).collect();
                normalize(&mut trial);
                let (ft, _) = smooth(&trial, tau);
                if ft > fx + 1e-15 {
                    x = trial;
                    fx = ft;
                    eta *= 1.3;
                } else {
                    eta *= 0.5;
                }
            }
        }
        let fx = exact_min(&x);
        (fx, x, iters)
    };

    // Deterministic starts: each coordinate direction (±), then seeded draws.
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for i in 0..k.min(8) {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        starts.push(e.clone());
        e[i] = -1.0;
        starts.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while starts.len() < opts.starts.max(1) {
        starts.push((0..k).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    starts.truncate(opts.starts.max(starts.len().min(opts.starts.max(1))).max(1));

    let results = run_parallel(starts, opts.workers, |x0| run_start(x0));
    let mut best = (f64::NEG_INFINITY, vec![0.0; k], 0usize);
    let mut total_iters = 0;
    for (fx, x, it) in results {
        total_iters += it;
        if fx > best.0 {
            best = (fx, x, it);
        }
    }
    AscentOutcome {
        best_objective: best.0,
        best_x: best.1,
        iterations: total_iters,
    }
}

fn run_parallel<T: Send, R: Send>(
    inputs: Vec<T>,
    workers: usize,
    f: impl Fn(T) -> R + Sync,
) -> Vec<R> {
    let workers = workers.max(1);
    if workers == 1 || inputs.len() <= 1 {
        return inputs.into_iter().map(f).collect();
    }
    let inputs: Vec<(usize, T)> = inputs.into_iter().enumerate().collect();
    let mut slots: Vec<Option<R>> = (0..inputs.len()).map(|_| None).collect();
    let queue = std::sync::Mutex::new(inputs);
    let out = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let item = queue.lock().unwrap().pop();
                match item {
                    Some((idx, x)) => {
                        let r = f(x);
                        out.lock().unwrap()[idx] = Some(r);
                    }
                    None => break,
                }
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("worker dropped a slot"))
        .collect()
}

// ---------------------------------------------------------------------------
// Linear feasibility searches.
// ---------------------------------------------------------------------------

fn linear_metric_search(
    frame: &Arc<ComplexFrame>,
    opts: &SearchOpts,
    condition: impl Fn(&HermitianMetric) -> f64,
    map: impl Fn(&CMat) -> InvariantForm,
    out_keys: &[(usize, usize)],
) -> Result<FeasibilityResult> {
    let n = frame.n();
    let basis = hermitian_basis(n);
    let kernel = real_kernel(basis.len(), out_keys.len(), |i| {
        coeff_vector(&map(&basis[i]), out_keys)
    });
    if kernel.is_empty() {
        return Ok(FeasibilityResult {
            status: Status::InfeasibleAtTolerance,
            witness_metric: None,
            witness_form: None,
            best_objective: f64::NEG_INFINITY,
            iterations: 0,
            seed: opts.seed,
        });
    }
    let hmats: Vec<CMat> = kernel.iter().map(|x| combine(&basis, x)).collect();
    let outcome = max_min_eig(&hmats, opts);
    let feasible = outcome.best_objective > tol::FEASIBLE_MARGIN;
    let witness = if feasible {
        let mut h = CMat::zeros(n, n);
        for (b, &c) in hmats.iter().zip(&outcome.best_x) {
            h = h.add(&b.scale(C64::new(c, 0.0)));
        }
        // Normalize to trace n (identity-like scale).
        let tr: f64 = (0..n).map(|i| h[(i, i)].re).sum();
        let h = h.scale(C64::new(n as f64 / tr, 0.0));
        let m = HermitianMetric::new(frame, h)?;
        let residual = condition(&m);
        if residual >= tol::WITNESS_RESIDUAL || m.min_eigenvalue() <= tol::FEASIBLE_MARGIN {
            return Err(Error::Numerical(format!(
                "witness failed revalidation: residual {residual:.3e}, margin {:.3e}",
                m.min_eigenvalue()
            )));
        }
        Some(m)
    } else {
        None
    };
    Ok(FeasibilityResult {
        status: if feasible {
            Status::Feasible
        } else {
            Status::InfeasibleAtTolerance
        },
        witness_metric: witness,
        witness_form: None,
        best_objective: outcome.best_objective,
        iterations: outcome.iterations,
        seed: opts.seed,
    })
}

/// Decides invariant SKT existence: the conditions `∂∂̄ω = 0` are linear in
/// the metric, so the search runs over their kernel intersected with the
/// positive cone.
pub fn search_skt(frame: &Arc<ComplexFrame>, opts: &SearchOpts) -> Result<FeasibilityResult> {
    let n = frame.n();
    let keys = keys_pq(n, 2, 2);
    linear_metric_search(
        frame,
        opts,
        skt_residual,
        |h| form_of_hermitian(frame, h).delbar().del(),
        &keys,
    )
}

/// Decides invariant Kähler existence (`dω = 0`, linear in the metric).
pub fn search_kahler(frame: &Arc<ComplexFrame>, opts: &SearchOpts) -> Result<FeasibilityResult> {
    let n = frame.n();
    let keys = keys_deg(n, 3);
    linear_metric_search(
        frame,
        opts,
        kahler_residual,
        |h| form_of_hermitian(frame, h).d(),
        &keys,
    )
}

/// Decides existence of a symplectic form taming J: a closed real 2-form
/// whose (1,1)-part has positive definite Hermitian matrix. The coordinate
/// space is the Hermitian (1,1) block plus the real/imaginary parts of the
/// (2,0) coefficients; the (0,2) part is their conjugate.
pub fn search_taming(frame: &Arc<ComplexFrame>, opts: &SearchOpts) -> Result<FeasibilityResult> {
    let n = frame.n();
    let hbasis = hermitian_basis(n);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let dim = hbasis.len() + 2 * pairs.len();
    let assemble = |x: &[f64]| -> (InvariantForm, CMat) {
        let h = combine(&hbasis, &x[..hbasis.len()]);
        let mut form = form_of_hermitian(frame, &h);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let c = C64::new(x[hbasis.len() + 2 * k], x[hbasis.len() + 2 * k + 1]);
            form = form.add(&InvariantForm::monomial(frame, &[i, j], c));
            // Conjugate monomial keeps the form real.
            form = form.add(&InvariantForm::monomial(frame, &[n + i, n + j], c.conj()));
        }
        (form, h)
    };
    let keys = keys_deg(n, 3);
    let kernel = real_kernel(dim, keys.len(), |i| {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        coeff_vector(&assemble(&e).0.d(), &keys)
    });
    if kernel.is_empty() {
        return Ok(FeasibilityResult {
            status: Status::InfeasibleAtTolerance,
            witness_metric: None,
            witness_form: None,
            best_objective: f64::NEG_INFINITY,
            iterations: 0,
            seed: opts.seed,
        });
    }
    // Objective sees only the Hermitian part of each kernel direction.
    let hmats: Vec<CMat> = kernel
        .iter()
        .map(|x| combine(&hbasis, &x[..hbasis.len()]))
        .collect();
    let outcome = max_min_eig(&hmats, opts);
    let feasible = outcome.best_objective > tol::FEASIBLE_MARGIN;
    let witness = if feasible {
        let mut x = vec![0.0; dim];
        for (kvec, &c) in kernel.iter().zip(&outcome.best_x) {
            for (xi, ki) in x.iter_mut().zip(kvec) {
                *xi += c * ki;
            }
        }
        let (form, h) = assemble(&x);
        if form.d().max_abs() >= tol::WITNESS_RESIDUAL {
            return Err(Error::Numerical("taming witness is not closed".into()));
        }
        if h.eigh().0[0] <= tol::FEASIBLE_MARGIN {
            return Err(Error::Numerical("taming witness lost positivity".into()));
        }
        Some(form)
    } else {
        None
    };
    Ok(FeasibilityResult {
        status: if feasible {
            Status::Feasible
        } else {
            Status::InfeasibleAtTolerance
        },
        witness_metric: None,
        witness_form: witness,
        best_objective: outcome.best_objective,
        iterations: outcome.iterations,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// Polynomial searches (Nelder-Mead multistart).
// ---------------------------------------------------------------------------

fn nelder_mead(
    dim: usize,
    x0: &[f64],
    scale: f64,
    max_evals: usize,
    objective: impl Fn(&[f64]) -> f64,
) -> (f64, Vec<f64>, usize) {
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += scale;
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|x| objective(x)).collect();
    let mut evals = simplex.len();
    while evals < max_evals {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap());
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];
        if (fvals[worst] - fvals[best]).abs() < 1e-16 * (1.0 + fvals[best].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|i| order[..dim].iter().map(|&k| simplex[k][i]).sum::<f64>() / dim as f64)
            .collect();
        let point = |t: f64| -> Vec<f64> {
            (0..dim)
                .map(|i| centroid[i] + t * (simplex[worst][i] - centroid[i]))
                .collect()
        };
        let refl = point(-1.0);
        let f_refl = objective(&refl);
        evals += 1;
        if f_refl < fvals[best] {
            let exp = point(-2.0);
            let f_exp = objective(&exp);
            evals += 1;
            if f_exp < f_refl {
                simplex[worst] = exp;
                fvals[worst] = f_exp;
            } else {
                simplex[worst] = refl;
                fvals[worst] = f_refl;
            }
        } else if f_refl < fvals[second_worst] {
            simplex[worst] = refl;
            fvals[worst] = f_refl;
        } else {
            let contr = point(0.5);
            let f_contr = objective(&contr);
            evals += 1;
            if f_contr < fvals[worst] {
                simplex[worst] = contr;
                fvals[worst] = f_contr;
            } else {
                // Shrink toward the best vertex.
                let best_pt = simplex[best].clone();
                for k in 0..simplex.len() {
                    if k == best {
                        continue;
                    }
                    for i in 0..dim {
                        simplex[k][i] = best_pt[i] + 0.5 * (simplex[k][i] - best_pt[i]);
                    }
                    fvals[k] = objective(&simplex[k]);
                    evals += 1;
                }
            }
        }
    }
    let mut best_idx = 0;
    for k in 1..simplex.len() {
        if fvals[k] < fvals[best_idx] {
            best_idx = k;
        }
    }
    (fvals[best_idx], simplex[best_idx].clone(), evals)
}

fn sum_sq(form: &InvariantForm) -> f64 {
    form.terms().map(|(_, _, c)| c.norm_sqr()).sum()
}

/// Decides invariant balanced existence: `d(ω^{n−1}) = 0` is polynomial of
/// degree n−1 in the metric, minimized with a positivity penalty.
pub fn search_balanced(frame: &Arc<ComplexFrame>, opts: &SearchOpts) -> Result<FeasibilityResult> {
    let n = frame.n();
    let basis = hermitian_basis(n);
    let dim = basis.len();
    let margin = 1e-3;
    let objective = |x: &[f64]| -> f64 {
        let h = combine(&basis, x);
        let fro = h.frobenius();
        if fro < 1e-9 {
            return 1e9;
        }
        let h = h.scale(C64::new((n as f64).sqrt() / fro, 0.0));
        let min_eig = h.eigh().0[0];
        let omega = form_of_hermitian(frame, &h);
        let pen = (margin - min_eig).max(0.0);
        sum_sq(&omega.wedge_pow(n - 1).d()) + 1e4 * pen * pen
    };

    // Identity first, then seeded random starts.
    let mut starts: Vec<Vec<f64>> = Vec::new();
    let mut id = vec![0.0; dim];
    for k in 0..n {
        id[k] = 1.0;
    }
    starts.push(id);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while starts.len() < opts.starts.max(1) {
        let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for k in 0..n {
            x[k] = rng.gen_range(0.3..2.0);
        }
        starts.push(x);
    }

    let results = run_parallel(starts, opts.workers, |x0| {
        nelder_mead(dim, &x0, 0.3, 4000, objective)
    });
    let mut best = (f64::INFINITY, vec![0.0; dim]);
    let mut iterations = 0;
    for (fx, x, ev) in results {
        iterations += ev;
        if fx < best.0 {
            best = (fx, x);
        }
    }
    let h = combine(&basis, &best.1);
    let h = h.scale(C64::new((n as f64).sqrt() / h.frobenius(), 0.0));
    let feasible = match HermitianMetric::new(frame, h) {
        Ok(m) => {
            let res = balanced_residual(&m);
            if res < tol::WITNESS_RESIDUAL && m.min_eigenvalue() > tol::FEASIBLE_MARGIN {
                Some(m)
            } else {
                None
            }
        }
        Err(_) => None,
    };
    Ok(match feasible {
        Some(m) => FeasibilityResult {
            status: Status::Feasible,
            best_objective: -balanced_residual(&m),
            witness_metric: Some(m),
            witness_form: None,
            iterations,
            seed: opts.seed,
        },
        None => FeasibilityResult {
            status: Status::InfeasibleAtTolerance,
            witness_metric: None,
            witness_form: None,
            best_objective: -best.0.sqrt(),
            iterations,
            seed: opts.seed,
        },
    })
}

/// Decides static existence over the SKT cone for each λ in the grid:
/// minimizes `‖ρ^B(g) − λ ω(g)‖²` over the SKT kernel with a positivity
/// penalty. Requires SKT feasibility.
pub fn search_static(
    frame: &Arc<ComplexFrame>,
    lambda_grid: &[f64],
    opts: &SearchOpts,
) -> Result<FeasibilityResult> {
    let skt = search_skt(frame, opts)?;
    if !skt.is_feasible() {
        return Ok(FeasibilityResult {
            status: Status::InfeasibleAtTolerance,
            witness_metric: None,
            witness_form: None,
            best_objective: f64::NEG_INFINITY,
            iterations: skt.iterations,
            seed: opts.seed,
        });
    }
    let n = frame.n();
    let basis = hermitian_basis(n);
    let keys = keys_pq(n, 2, 2);
    let kernel = real_kernel(basis.len(), keys.len(), |i| {
        coeff_vector(&form_of_hermitian(frame, &basis[i]).delbar().del(), &keys)
    });
    let kdim = kernel.len();
    let hmats: Vec<CMat> = kernel.iter().map(|x| combine(&basis, x)).collect();
    let margin = 1e-3;
    let mut best_overall = (f64::INFINITY, None::<(HermitianMetric, f64)>);
    let mut iterations = 0;
    for &lambda in lambda_grid {
        let objective = |x: &[f64]| -> f64 {
            let mut h = CMat::zeros(n, n);
            for (b, &c) in hmats.iter().zip(x) {
                h = h.add(&b.scale(C64::new(c, 0.0)));
            }
            let fro = h.frobenius();
            if fro < 1e-9 {
                return 1e9;
            }
            let h = h.scale(C64::new((n as f64).sqrt() / fro, 0.0));
            let min_eig = h.eigh().0[0];
            if min_eig < 1e-6 {
                let pen = margin - min_eig;
                return 1e6 + 1e4 * pen * pen;
            }
            let m = match HermitianMetric::new(frame, h) {
                Ok(m) => m,
                Err(_) => return 1e9,
            };
            let rho = match crate::connections::bismut_ricci_form(&m.frame, &m) {
                Ok(r) => r,
                Err(_) => return 1e9,
            };
            let lw = m.fundamental_form().form.scale(C64::new(lambda, 0.0));
            let pen = (margin - min_eig).max(0.0);
            sum_sq(&rho.sub(&lw)) + 1e4 * pen * pen
        };
        // Identity projection start plus seeded draws.
        let mut starts: Vec<Vec<f64>> = Vec::new();
        let mut idc = vec![0.0; kdim];
        for (k, kvec) in kernel.iter().enumerate() {
            // Projection of the identity onto the kernel basis (orthonormal).
            let mut dot = 0.0;
            for d in 0..n {
                dot += kvec[d]; // identity has coordinate 1 on each diagonal unit
            }
            idc[k] = dot;
        }
        starts.push(idc);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ lambda.to_bits());
        while starts.len() < opts.starts.max(1) {
            starts.push((0..kdim).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        let results = run_parallel(starts, opts.workers, |x0| {
            nelder_mead(kdim, &x0, 0.25, 3000, &objective)
        });
        for (fx, x, ev) in results {
            iterations += ev;
            if fx < best_overall.0 {
                let mut h = CMat::zeros(n, n);
                for (b, &c) in hmats.iter().zip(&x) {
                    h = h.add(&b.scale(C64::new(c, 0.0)));
                }
                let fro = h.frobenius();
                if fro < 1e-9 {
                    continue;
                }
                let h = h.scale(C64::new((n as f64).sqrt() / fro, 0.0));
                if let Ok(m) = HermitianMetric::new(frame, h) {
                    best_overall = (fx, Some((m, lambda)));
                }
            }
        }
    }
    let (residual, witness) = match &best_overall.1 {
        Some((m, lambda)) => {
            let r = static_residual(m, *lambda).unwrap_or(f64::INFINITY);
            (r, Some(m.clone()))
        }
        None => (f64::INFINITY, None),
    };
    let feasible = residual < tol::WITNESS_RESIDUAL
        && witness
            .as_ref()
            .map(|m| m.min_eigenvalue() > tol::FEASIBLE_MARGIN)
            .unwrap_or(false);
    Ok(FeasibilityResult {
        status: if feasible {
            Status::Feasible
        } else {
            Status::InfeasibleAtTolerance
        },
        witness_metric: if feasible { witness } else { None },
        witness_form: None,
        best_objective: -residual,
        iterations,
        seed: opts.seed,
    })
}

// ---------------------------------------------------------------------------
// Bott-Chern dimensions.
// ---------------------------------------------------------------------------

/// Complex dimension of the algebra-level Bott-Chern group
/// `H^{p,q}_BC = ker(d|Λ^{p,q}) / im(∂∂̄: Λ^{p−1,q−1} → Λ^{p,q})`.
pub fn bott_chern_dim(frame: &Arc<ComplexFrame>, p: usize, q: usize) -> usize {
    let n = frame.n();
    assert!(p <= n && q <= n);
    let dom = keys_pq(n, p, q);
    if dom.is_empty() {
        return 0;
    }
    let out_keys = keys_deg(n, p + q + 1);
    let monomial_form = |&(iu, jb): &(usize, usize)| -> InvariantForm {
        let mut letters = Vec::new();
        for b in 0..n {
            if iu & (1 << b) != 0 {
                letters.push(b);
            }
        }
        for b in 0..n {
            if jb & (1 << b) != 0 {
                letters.push(n + b);
            }
        }
        InvariantForm::monomial(frame, &letters, C64::new(1.0, 0.0))
    };
    // ker(d | Λ^{p,q}) over ℂ.
    let mut dmat = CMat::zeros(out_keys.len().max(1), dom.len());
    for (col, key) in dom.iter().enumerate() {
        let img = coeff_vector(&monomial_form(key).d(), &out_keys);
        for (row, c) in img.iter().enumerate() {
            dmat[(row, col)] = *c;
        }
    }
    let ker_dim = dom.len() - dmat.rank(tol::RANK);
    // rank(∂∂̄ | Λ^{p−1,q−1}) over ℂ.
    let rank_ddbar = if p >= 1 && q >= 1 {
        let gam = keys_pq(n, p - 1, q - 1);
        if gam.is_empty() {
            0
        } else {
            let mut m = CMat::zeros(dom.len().max(1), gam.len());
            for (col, key) in gam.iter().enumerate() {
                let img = coeff_vector(&monomial_form(key).delbar().del(), &dom);
                for (row, c) in img.iter().enumerate() {
                    m[(row, col)] = *c;
                }
            }
            m.rank(tol::RANK)
        }
    } else {
        0
    };
    ker_dim - rank_ddbar
}

// ---------------------------------------------------------------------------
// The family-19 obstruction report.
// ---------------------------------------------------------------------------

/// Report of the positivity argument for the balanced family: the SKT
/// equation reduces to `Σ_i ω(X_i, X̄_i) = 0` for the four vectors below,
/// which positivity forces to vanish individually.
#[derive(Debug, Clone)]
pub struct Family19Report {
    /// `X_1 = B_1 Z_3 + F_1 Z_4`, `X_2 = B_5 Z_3 + F_5 Z_4`,
    /// `X_3 = C_3 Z_3 + G_3 Z_4`, `X_4 = √2 B_4 Z_3 + √2 F_4 Z_4`.
    pub x_vectors: [(C64, C64); 4],
    pub all_zero: bool,
    pub skt: FeasibilityResult,
    /// SKT is feasible exactly when every X vanishes.
    pub consistent: bool,
}

pub fn verify_family19_obstruction(co: &Family1Coeffs, opts: &SearchOpts) -> Result<Family19Report> {
    if (co.c4 + co.b4).norm() > 1e-12 || (co.g4 + co.f4).norm() > 1e-12 {
        return Err(Error::ParameterDomain(
            "family 19 requires C4 = −B4 and G4 = −F4".into(),
        ));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let x_vectors = [
        (co.b1, co.f1),
        (co.b5, co.f5),
        (co.c3, co.g3),
        (co.b4 * sqrt2, co.f4 * sqrt2),
    ];
    let all_zero = x_vectors.iter().all(|(a, b)| a.norm() + b.norm() < 1e-12);
    let frame = crate::catalog::family1_frame(co)?;
    let skt = search_skt(&frame, opts)?;
    let consistent = skt.is_feasible() == all_zero;
    Ok(Family19Report {
        x_vectors,
        all_zero,
        skt,
        consistent,
    })
}

// ---------------------------------------------------------------------------
// Soundness helper used by the catalog tests.
// ---------------------------------------------------------------------------

/// Revalidates a feasible witness through the metrics-module predicates.
pub fn witness_is_sound(
    result: &FeasibilityResult,
    predicate: impl Fn(&HermitianMetric) -> f64,
) -> bool {
    match (&result.status, &result.witness_metric) {
        (Status::Feasible, Some(m)) => {
            predicate(m) < tol::WITNESS_RESIDUAL && m.min_eigenvalue() > tol::FEASIBLE_MARGIN
        }
        (Status::Feasible, None) => result.witness_form.is_some(),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use std::collections::BTreeMap;

    fn opts_small() -> SearchOpts {
        SearchOpts {
            starts: 16,
            seed: 7,
            workers: 2,
        }
    }

    fn frame_of(key: &str) -> Arc<ComplexFrame> {
        let e = catalog::get(key, &catalog::default_params(key)).unwrap();
        e.frame().unwrap().clone()
    }

    #[test]
    fn skt_on_kodaira_thurston_returns_identity_witness() {
        let f = frame_of("kodaira_thurston");
        let r = search_skt(&f, &opts_small()).unwrap();
        assert!(r.is_feasible());
        let w = r.witness_metric.as_ref().unwrap();
        // Every metric is SKT here; the max-min-eigenvalue point is the identity.
        assert!(w.matrix().sub(&CMat::identity(2)).max_abs() < 1e-4);
        assert!(witness_is_sound(&r, skt_residual));
    }

    #[test]
    fn skt_on_g4_forces_g12_zero() {
        let f = frame_of("g4");
        let r = search_skt(&f, &opts_small()).unwrap();
        assert!(r.is_feasible());
        let w = r.witness_metric.as_ref().unwrap();
        assert!(w.entry(0, 1).norm() < 1e-9, "witness must satisfy g_12̄ = 0");
    }

    #[test]
    fn kahler_torus_and_g20_feasible_kt_not() {
        assert!(search_kahler(&frame_of("torus_n"), &opts_small())
            .unwrap()
            .is_feasible());
        assert!(search_kahler(&frame_of("g2_0"), &opts_small())
            .unwrap()
            .is_feasible());
        assert!(!search_kahler(&frame_of("kodaira_thurston"), &opts_small())
            .unwrap()
            .is_feasible());
    }

    #[test]
    fn balanced_family19_feasible_family1_generic_not() {
        let mut p = BTreeMap::new();
        p.insert("B4_re".to_string(), 0.7);
        p.insert("F4_im".to_string(), -0.4);
        p.insert("B1_re".to_string(), 0.3);
        let e = catalog::get("family19", &p).unwrap();
        let r = search_balanced(e.frame().unwrap(), &opts_small()).unwrap();
        assert!(
            r.is_feasible(),
            "family 19 admits the standard balanced metric"
        );
        assert!(witness_is_sound(&r, balanced_residual));

        // family1 with C4 ≠ −B4 has no balanced metric.
        let mut p1 = BTreeMap::new();
        p1.insert("B4_re".to_string(), 1.0);
        p1.insert("C4_re".to_string(), 1.0);
        let e1 = catalog::get("family1", &p1).unwrap();
        let r1 = search_balanced(e1.frame().unwrap(), &opts_small()).unwrap();
        assert!(!r1.is_feasible());
    }

    #[test]
    fn taming_feasible_on_torus_not_on_kt() {
        let r = search_taming(&frame_of("torus_n"), &opts_small()).unwrap();
        assert!(r.is_feasible());
        let r = search_taming(&frame_of("kodaira_thurston"), &opts_small()).unwrap();
        assert!(!r.is_feasible());
        assert!(r.best_objective <= tol::FEASIBLE_MARGIN);
    }

    #[test]
    fn static_g20_at_zero_feasible_kt_never() {
        let f = frame_of("g2_0");
        let r = search_static(&f, &[0.0], &opts_small()).unwrap();
        assert!(r.is_feasible(), "diagonal metrics are Kähler Ricci-flat");
        let f = frame_of("kodaira_thurston");
        let r = search_static(&f, &[-1.0, 0.0, 1.0], &opts_small()).unwrap();
        assert!(!r.is_feasible());
    }

    #[test]
    fn bott_chern_basics() {
        let f = frame_of("torus_n"); // n = 2
        assert_eq!(bott_chern_dim(&f, 0, 0), 1);
        assert_eq!(bott_chern_dim(&f, 1, 1), 4);
        let kt = frame_of("kodaira_thurston");
        assert_eq!(bott_chern_dim(&kt, 0, 0), 1);
        // Frozen from the rank oracle: dζ^{22̄} is the only non-closed
        // direction and nothing is ∂∂̄-exact.
        assert_eq!(bott_chern_dim(&kt, 1, 1), 3);
    }

    #[test]
    fn family19_obstruction_report() {
        let co = Family1Coeffs::family19(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        );
        let rep = verify_family19_obstruction(&co, &opts_small()).unwrap();
        assert!(!rep.all_zero);
        assert!(!rep.skt.is_feasible());
        assert!(rep.consistent);

        let zero = Family1Coeffs::default();
        let rep0 = verify_family19_obstruction(&zero, &opts_small()).unwrap();
        assert!(rep0.all_zero);
        assert!(rep0.skt.is_feasible());
        assert!(rep0.consistent);
    }
}
