//! Oracle-backed tests of the special-metric predicates and the family
//! equations.

use pluriflow::catalog;
use pluriflow::metrics::{
    sample_metric, skt_equation_family1, skt_residual, skt_system_family2, static_residual,
    Family1Coeffs, Family2Coeffs, HermitianMetric,
};
use pluriflow::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn a_coeffs_of(g: &HermitianMetric) -> [C64; 10] {
    let mi = c(0.0, -1.0);
    [
        mi * g.entry(0, 0),
        mi * g.entry(1, 1),
        mi * g.entry(2, 2),
        mi * g.entry(3, 3),
        mi * g.entry(0, 1),
        mi * g.entry(0, 2),
        mi * g.entry(0, 3),
        mi * g.entry(1, 2),
        mi * g.entry(1, 3),
        mi * g.entry(2, 3),
    ]
}

#[test]
fn family1_equation_matches_generic_ddbar_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..20 {
        let mut draw = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let co = Family1Coeffs {
            b1: draw(),
            b4: draw(),
            b5: draw(),
            c3: draw(),
            c4: draw(),
            f1: draw(),
            f4: draw(),
            f5: draw(),
            g3: draw(),
            g4: draw(),
        };
        let frame = catalog::family1_frame(&co).unwrap();
        let g = sample_metric(&frame, &mut rng);
        let val = skt_equation_family1(&co, &a_coeffs_of(&g)).unwrap();
        let res = skt_residual(&g);
        assert!(
            (val.norm() - res).abs() < 1e-9 * (1.0 + res),
            "trial {trial}: equation {:.6e} vs oracle {:.6e}",
            val.norm(),
            res
        );
    }
    // All capital coefficients zero: the equation vanishes for every metric.
    let zero = Family1Coeffs::default();
    let frame = catalog::family1_frame(&zero).unwrap();
    let g = sample_metric(&frame, &mut rng);
    assert_eq!(
        skt_equation_family1(&zero, &a_coeffs_of(&g))
            .unwrap()
            .norm(),
        0.0
    );
}

#[test]
fn family19_admits_no_positive_skt_zero() {
    // Nonzero (B, F) data: the residual cannot vanish on positive metrics
    // because it is a sum of nonpositive terms with a definite sign.
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    let co = Family1Coeffs::family19(
        c(0.4, 0.1),
        c(0.8, -0.3),
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(-0.2, 0.5),
        c(0.3, 0.3),
        c(0.0, 0.0),
        c(0.0, 0.0),
    );
    let frame = catalog::family1_frame(&co).unwrap();
    for _ in 0..25 {
        let g = sample_metric(&frame, &mut rng);
        assert!(skt_residual(&g) > 1e-6);
    }
}

#[test]
fn family2_skt_is_metric_independent() {
    // SKT instance: residual vanishes for every metric.
    let mut co = Family2Coeffs::default();
    co.h4 = c(1.0, 0.0);
    co.f4 = c(0.0, 1.0);
    assert!(skt_system_family2(&co).unwrap().iter().all(|&v| v < 1e-14));
    let frame = catalog::family2_frame(&co).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(406);
    for _ in 0..30 {
        let g = sample_metric(&frame, &mut rng);
        assert!(skt_residual(&g) < 1e-10);
    }
    // Broken instance: the fourth equation is 1, no metric is SKT.
    let mut bad = Family2Coeffs::default();
    bad.h4 = c(1.0, 0.0);
    bad.f2 = c(1.0, 0.0);
    let r = skt_system_family2(&bad).unwrap();
    assert!((r[3] - 1.0).abs() < 1e-14);
    let frame = catalog::family2_frame(&bad).unwrap();
    for _ in 0..30 {
        let g = sample_metric(&frame, &mut rng);
        assert!(skt_residual(&g) > 1e-6);
    }
    // A generic random instance violates at least one equation and is not SKT.
    let mut draw_rng = ChaCha8Rng::seed_from_u64(407);
    let mut draw = || c(draw_rng.gen_range(-1.0..1.0), draw_rng.gen_range(-1.0..1.0));
    let generic = Family2Coeffs {
        f1: draw(),
        f2: draw(),
        f4: draw(),
        f5: draw(),
        f6: draw(),
        g1: draw(),
        g3: draw(),
        g4: draw(),
        g5: draw(),
        h2: draw(),
        h3: draw(),
        h4: c(1.0, 0.4),
    };
    let res = skt_system_family2(&generic).unwrap();
    let max_eq = res.iter().cloned().fold(0.0, f64::max);
    let frame = catalog::family2_frame(&generic).unwrap();
    let g = sample_metric(&frame, &mut rng);
    let skt = skt_residual(&g);
    assert_eq!(
        max_eq > 1e-10,
        skt > 1e-10,
        "equations and oracle must agree"
    );
}

#[test]
fn static_residual_examples() {
    // Flat torus with λ = 0.
    let mut p = BTreeMap::new();
    p.insert("n".to_string(), 2.0);
    let f = catalog::get("torus_n", &p)
        .unwrap()
        .frame()
        .unwrap()
        .clone();
    let g = HermitianMetric::identity(&f);
    assert!(static_residual(&g, 0.0).unwrap() < 1e-13);
    // Diagonal metrics on the first solvable frame are static with λ = 0.
    let f = catalog::get("g2_0", &BTreeMap::new())
        .unwrap()
        .frame()
        .unwrap()
        .clone();
    let g = HermitianMetric::diagonal(&f, &[1.1, 0.6, 1.9]).unwrap();
    assert!(static_residual(&g, 0.0).unwrap() < 1e-10);
    // The Kodaira-Thurston frame has no static metric on a sampled grid.
    let f = catalog::get("kodaira_thurston", &BTreeMap::new())
        .unwrap()
        .frame()
        .unwrap()
        .clone();
    let mut rng = ChaCha8Rng::seed_from_u64(408);
    let mut best = f64::INFINITY;
    for _ in 0..20 {
        let g = sample_metric(&f, &mut rng);
        for lambda in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            best = best.min(static_residual(&g, lambda).unwrap());
        }
    }
    assert!(best > 1e-6, "sampled static residual minimum {best:.3e}");
}

#[test]
fn skt_and_balanced_jointly_force_kahler() {
    // Numeric form of the complementarity statement, over random draws on
    // every catalog frame.
    let mut rng = ChaCha8Rng::seed_from_u64(409);
    for key in [
        "kodaira_thurston",
        "g2_0",
        "g4",
        "torus_n",
        "skt_6d",
        "family19",
    ] {
        let entry = catalog::get(key, &catalog::default_params(key)).unwrap();
        for (_, frame) in &entry.complex_structures {
            for _ in 0..10 {
                let g = sample_metric(frame, &mut rng);
                let skt = skt_residual(&g);
                let bal = pluriflow::metrics::balanced_residual(&g);
                if skt < 1e-10 && bal < 1e-10 {
                    assert!(
                        pluriflow::metrics::kahler_residual(&g) < 1e-8,
                        "{key}: SKT ∧ balanced without Kähler"
                    );
                }
            }
        }
    }
}

#[test]
fn positivity_is_enforced() {
    let f = catalog::get("kodaira_thurston", &BTreeMap::new())
        .unwrap()
        .frame()
        .unwrap()
        .clone();
    let mut m = pluriflow::linalg::CMat::identity(2);
    m[(0, 0)] = c(-1.0, 0.0);
    assert!(HermitianMetric::new(&f, m).is_err());
    let mut m2 = pluriflow::linalg::CMat::identity(2);
    m2[(0, 1)] = c(0.0, 5.0);
    m2[(1, 0)] = c(0.0, -5.0);
    assert!(
        HermitianMetric::new(&f, m2).is_err(),
        "indefinite matrix must be rejected"
    );
}
