//! Property tests for the exterior calculus over the calibration frames.

use pluriflow::catalog;
use pluriflow::exterior::InvariantForm;
use pluriflow::frame::ComplexFrame;
use pluriflow::C64;
use proptest::prelude::*;
use std::sync::Arc;

fn g4_frame() -> Arc<ComplexFrame> {
    let e = catalog::get("g4", &Default::default()).unwrap();
    e.frame().unwrap().clone()
}

/// Random low-degree form over the frame from a coefficient vector.
fn form_from(frame: &Arc<ComplexFrame>, deg: usize, coeffs: &[f64]) -> InvariantForm {
    let s = frame.alphabet();
    let mut out = InvariantForm::zero(frame);
    let mut idx = 0;
    let letters: Vec<Vec<usize>> = match deg {
        1 => (0..s).map(|a| vec![a]).collect(),
        2 => (0..s)
            .flat_map(|a| ((a + 1)..s).map(move |b| vec![a, b]))
            .collect(),
        _ => panic!("degree not wired"),
    };
    for ls in letters {
        if idx + 1 >= coeffs.len() {
            break;
        }
        let c = C64::new(coeffs[idx], coeffs[idx + 1]);
        idx += 2;
        out = out.add(&InvariantForm::monomial(frame, &ls, c));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wedge_graded_anticommutative(
        a in proptest::collection::vec(-1.0f64..1.0, 12),
        b in proptest::collection::vec(-1.0f64..1.0, 12),
    ) {
        let f = g4_frame();
        let one_a = form_from(&f, 1, &a);
        let one_b = form_from(&f, 1, &b);
        // Odd degrees anticommute.
        prop_assert!(one_a.wedge(&one_b).add(&one_b.wedge(&one_a)).max_abs() < 1e-11);
        let two_a = form_from(&f, 2, &a);
        // Even-with-odd commutes.
        prop_assert!(two_a.wedge(&one_b).sub(&one_b.wedge(&two_a)).max_abs() < 1e-11);
    }

    #[test]
    fn wedge_associative(
        a in proptest::collection::vec(-1.0f64..1.0, 12),
        b in proptest::collection::vec(-1.0f64..1.0, 12),
        c in proptest::collection::vec(-1.0f64..1.0, 16),
    ) {
        let f = g4_frame();
        let fa = form_from(&f, 1, &a);
        let fb = form_from(&f, 1, &b);
        let fc = form_from(&f, 2, &c);
        let lhs = fa.wedge(&fb).wedge(&fc);
        let rhs = fa.wedge(&fb.wedge(&fc));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-11);
    }

    #[test]
    fn d_squared_and_bidegree_structure(coeffs in proptest::collection::vec(-1.0f64..1.0, 24)) {
        let f = g4_frame();
        let form = form_from(&f, 1, &coeffs);
        prop_assert!(form.d().d().max_abs() < 1e-11, "d² = 0");
        // Integrable frame: d = ∂ + ∂̄ on every pure component (no A, Ā parts).
        for comp in form.bidegree_split() {
            let d = comp.d();
            let split = comp.del().add(&comp.delbar());
            prop_assert!(d.sub(&split).max_abs() < 1e-11, "A and Ā components vanish");
        }
        // Sum of bidegree components reproduces the form.
        let two = form_from(&f, 2, &coeffs);
        let mut sum = InvariantForm::zero(&f);
        for comp in two.bidegree_split() {
            sum = sum.add(&comp);
        }
        prop_assert!(sum.sub(&two).max_abs() == 0.0);
    }

    #[test]
    fn dc_identity_and_anticommutation(coeffs in proptest::collection::vec(-1.0f64..1.0, 40)) {
        let f = g4_frame();
        let n = f.n();
        // Random real (1,1)-form.
        let mut om = InvariantForm::zero(&f);
        let mut idx = 0;
        for i in 0..n {
            for j in 0..n {
                let c = if i == j {
                    C64::new(0.0, coeffs[idx])
                } else {
                    C64::new(coeffs[idx], coeffs[idx + 1])
                };
                idx += 2;
                om = om.add(&InvariantForm::monomial(&f, &[i, n + j], c));
                if i != j {
                    om = om.add(&InvariantForm::monomial(&f, &[j, n + i], -c.conj()));
                }
            }
        }
        prop_assert!(om.is_real(1e-13));
        let lhs = om.dc();
        let rhs = om.delbar().sub(&om.del()).scale(C64::new(0.0, 1.0));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-10, "d^c = i(∂̄ − ∂)");
        // ∂∂̄ + ∂̄∂ = 0.
        let anti = om.del().delbar().add(&om.delbar().del());
        prop_assert!(anti.max_abs() < 1e-11);
    }

    #[test]
    fn form_json_round_trip(coeffs in proptest::collection::vec(-1.0f64..1.0, 24)) {
        let f = g4_frame();
        let form = form_from(&f, 2, &coeffs);
        let back = InvariantForm::from_json(&f, &form.to_json()).unwrap();
        prop_assert!(form.sub(&back).max_abs() < 1e-15);
    }
}

#[test]
fn d_alpha3_on_the_j_plus_frame_is_pure_one_one() {
    // dα³ = α^{11̄} on the J+ frame of the second solvable algebra.
    let e = catalog::get("g4", &Default::default()).unwrap();
    let f = e
        .complex_structures
        .iter()
        .find(|(n, _)| n == "J+")
        .map(|(_, f)| f.clone())
        .unwrap();
    let da3 = InvariantForm::one_form(&f, 2).d();
    assert_eq!(da3.bidegree(), Some((1, 1)));
    let expect = InvariantForm::monomial(&f, &[0, f.n()], C64::new(1.0, 0.0));
    assert!(da3.sub(&expect).max_abs() < 1e-14);
}

#[test]
fn volume_pairing_positive_for_positive_metrics() {
    use pluriflow::metrics::sample_metric;
    use rand::SeedableRng;
    let f = g4_frame();
    let reference = InvariantForm::reference_volume(&f);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let g1 = sample_metric(&f, &mut rng);
        let g2 = sample_metric(&f, &mut rng);
        let n = f.n();
        let pairing = g1
            .fundamental_form()
            .form
            .wedge(&g2.fundamental_form().form.wedge_pow(n - 1));
        assert!(pairing.volume_coefficient(&reference).unwrap() > 0.0);
    }
    // A non-real top form is rejected.
    let full: Vec<usize> = (0..2 * f.n()).collect();
    let bad = InvariantForm::monomial(&f, &full, C64::new(0.3, 1.0));
    let lambda = bad.volume_coefficient(&reference);
    assert!(lambda.is_err());
}
