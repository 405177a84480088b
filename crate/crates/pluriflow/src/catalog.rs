//! Built-in library of the calibration Lie algebras, complex structures,
//! and parametrized families.
//!
//! Keys are lowercase snake case. Complex family coefficients are passed
//! through the real-valued parameter map as `<name>_re` / `<name>_im`
//! (a bare `<name>` sets the real part).

use crate::algebra::{parse_salamon, ComplexStructure, LieAlgebra};
use crate::frame::{complexify, frame_from_dalpha, parse_complex_equations, ComplexFrame};
use crate::metrics::{Family1Coeffs, Family2Coeffs};
use crate::{Error, Result, C64};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Classification tags carried by catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Tag {
    Nilpotent,
    Solvable,
    SktExists,
    BalancedExists,
    KahlerExists,
}

impl Tag {
    pub fn parse(s: &str) -> Result<Tag> {
        match s {
            "nilpotent" => Ok(Tag::Nilpotent),
            "solvable" => Ok(Tag::Solvable),
            "skt_exists" => Ok(Tag::SktExists),
            "balanced_exists" => Ok(Tag::BalancedExists),
            "kahler_exists" => Ok(Tag::KahlerExists),
            other => Err(Error::UnknownKey(format!("tag `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Tag::Nilpotent => "nilpotent",
            Tag::Solvable => "solvable",
            Tag::SktExists => "skt_exists",
            Tag::BalancedExists => "balanced_exists",
            Tag::KahlerExists => "kahler_exists",
        }
    }
}

/// A validated catalog entry.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub key: String,
    pub algebra: LieAlgebra,
    /// Named (1,0)-frames; empty when only the real algebra is known.
    pub complex_structures: Vec<(String, Arc<ComplexFrame>)>,
    pub tags: BTreeSet<Tag>,
    /// Where the data comes from in the source material.
    pub provenance: String,
}

impl CatalogEntry {
    pub fn frame(&self) -> Result<&Arc<ComplexFrame>> {
        self.complex_structures
            .first()
            .map(|(_, f)| f)
            .ok_or_else(|| {
                Error::UnknownKey(format!("entry `{}` has no complex structure", self.key))
            })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "key": self.key,
            "algebra": self.algebra.to_json(),
            "complex_structures": self.complex_structures.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "tags": self.tags.iter().map(|t| t.as_str()).collect::<Vec<_>>(),
            "provenance": self.provenance,
        })
    }
}

fn cplx(params: &BTreeMap<String, f64>, name: &str) -> C64 {
    let re = params
        .get(&format!("{name}_re"))
        .or_else(|| params.get(name))
        .copied()
        .unwrap_or(0.0);
    let im = params.get(&format!("{name}_im")).copied().unwrap_or(0.0);
    C64::new(re, im)
}

/// All catalog keys in deterministic order.
pub fn keys() -> Vec<&'static str> {
    vec![
        "family1",
        "family19",
        "family2",
        "g1",
        "g2_0",
        "g2_alpha",
        "g3",
        "g4",
        "g5",
        "g7",
        "g8",
        "kodaira_thurston",
        "skt_6d",
        "torus_n",
    ]
}

/// Keys of entries matching every tag in `filter`.
pub fn list(filter: &BTreeSet<Tag>) -> Vec<String> {
    keys()
        .into_iter()
        .filter(|k| {
            let entry = get(k, &default_params(k)).expect("catalog entry must build");
            filter.iter().all(|t| entry.tags.contains(t))
        })
        .map(|s| s.to_string())
        .collect()
}

/// Parameters that make every entry instantiable for listings.
pub fn default_params(key: &str) -> BTreeMap<String, f64> {
    let mut p = BTreeMap::new();
    match key {
        "torus_n" => {
            p.insert("n".into(), 2.0);
        }
        "g2_alpha" => {
            p.insert("alpha".into(), 0.0);
        }
        "family2" => {
            p.insert("H4_re".into(), 1.0);
        }
        "skt_6d" => {
            p.insert("B_re".into(), 1.0);
            p.insert("C_im".into(), 1.0);
        }
        _ => {}
    }
    p
}

/// Builds a catalog entry, resolving family parameters numerically.
pub fn get(key: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let no_params = BTreeMap::new();
    match key {
        "torus_n" => {
            let nf = params.get("n").copied().unwrap_or(2.0);
            let n = nf as usize;
            if nf.fract() != 0.0 || !(1..=4).contains(&n) {
                return Err(Error::ParameterDomain(format!(
                    "torus_n needs n ∈ 1..4, got {nf}"
                )));
            }
            let a = LieAlgebra::abelian(2 * n);
            let j = ComplexStructure::standard(2 * n);
            let f = complexify(&a, &j)?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: a,
                complex_structures: vec![("standard".into(), f)],
                tags: [
                    Tag::Nilpotent,
                    Tag::SktExists,
                    Tag::BalancedExists,
                    Tag::KahlerExists,
                ]
                .into_iter()
                .collect(),
                provenance: "complex torus".into(),
            })
        }
        "kodaira_thurston" => {
            let a = parse_salamon("(0,0,0,12)", &no_params)?;
            // J e1 = −e2, J e3 = −e4 (row-major entries J[i][k] at 4i + k).
            let mut jm = vec![0.0; 16];
            jm[4] = -1.0;
            jm[1] = 1.0;
            jm[14] = -1.0;
            jm[11] = 1.0;
            let j = ComplexStructure::new(4, jm)?;
            let f = complexify(&a, &j)?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: a,
                complex_structures: vec![("standard".into(), f)],
                tags: [Tag::Nilpotent, Tag::SktExists].into_iter().collect(),
                provenance: "h3 ⊕ R with structure equations (0,0,0,12)".into(),
            })
        }
        "g2_0" => {
            let a = parse_salamon("(e^{25}, -e^{15}, e^{45}, -e^{35}, 0, 0)", &no_params)?;
            let (_, _, f) = parse_complex_equations(
                "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = 0",
            )?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: a,
                complex_structures: vec![("canonical".into(), f)],
                tags: [
                    Tag::Solvable,
                    Tag::SktExists,
                    Tag::BalancedExists,
                    Tag::KahlerExists,
                ]
                .into_iter()
                .collect(),
                provenance: "solvable; unique complex structure with trivial canonical bundle"
                    .into(),
            })
        }
        "g2_alpha" => {
            let alpha = params
                .get("alpha")
                .copied()
                .ok_or_else(|| Error::UnboundParameter("alpha".into()))?;
            if alpha < 0.0 {
                return Err(Error::ParameterDomain(format!(
                    "g2_alpha needs alpha ≥ 0, got {alpha}"
                )));
            }
            let mut p = BTreeMap::new();
            p.insert("alpha".to_string(), alpha);
            let a = parse_salamon(
                "(alpha*e^{15} + e^{25}, -e^{15} + alpha*e^{25}, -alpha*e^{35} + e^{45}, -e^{35} - alpha*e^{45}, 0, 0)",
                &p,
            )?;
            let mut complex_structures = Vec::new();
            if alpha == 0.0 {
                let (_, _, f) = parse_complex_equations(
                    "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = 0",
                )?;
                complex_structures.push(("canonical".to_string(), f));
            }
            Ok(CatalogEntry {
                key: key.into(),
                algebra: a,
                complex_structures,
                tags: [Tag::Solvable, Tag::BalancedExists].into_iter().collect(),
                provenance: "solvable family, balanced for every alpha ≥ 0".into(),
            })
        }
        "g1" | "g3" | "g5" | "g7" | "g8" => {
            let text = match key {
                "g1" => "(e^{15}, -e^{25}, -e^{35}, e^{45}, 0, 0)",
                "g3" => "(0, -e^{13}, e^{12}, 0, -e^{46}, -e^{45})",
                "g5" => "(e^{24}+e^{35}, e^{26}, e^{36}, -e^{46}, -e^{56}, 0)",
                "g7" => "(e^{24}+e^{35}, e^{46}, e^{56}, -e^{26}, -e^{36}, 0)",
                _ => "(e^{16}-e^{25}, e^{15}+e^{26}, -e^{36}+e^{45}, -e^{35}-e^{46}, 0, 0)",
            };
            let a = parse_salamon(text, &no_params)?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: a,
                complex_structures: Vec::new(),
                tags: [Tag::Solvable, Tag::BalancedExists].into_iter().collect(),
                provenance: "solvable balanced list; complex structures supplied by the caller"
                    .into(),
            })
        }
        "g4" => {
            let a = parse_salamon("(e^{23}, -e^{36}, e^{26}, -e^{56}, e^{46}, 0)", &no_params)?;
            let (_, _, fp) = parse_complex_equations(
                "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = a{1~1}",
            )?;
            let (_, _, fm) = parse_complex_equations(
                "d a1 = i*a{13} + i*a{1~3}; d a2 = -i*a{23} - i*a{2~3}; d a3 = -a{1~1}",
            )?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: a,
                complex_structures: vec![("J+".into(), fp), ("J-".into(), fm)],
                tags: [Tag::Solvable, Tag::SktExists].into_iter().collect(),
                provenance: "solvable; complex structures J± with trivial canonical bundle".into(),
            })
        }
        "skt_6d" => {
            let (a, b, c, d, e) = (
                cplx(params, "A"),
                cplx(params, "B"),
                cplx(params, "C"),
                cplx(params, "D"),
                cplx(params, "E"),
            );
            let f = skt_6d_frame(a, b, c, d, e)?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: f.algebra.clone(),
                complex_structures: vec![("normal_form".into(), f)],
                tags: [Tag::Nilpotent].into_iter().collect(),
                provenance: "6d nilpotent SKT normal form with coefficients A..E".into(),
            })
        }
        "family1" => {
            let co = Family1Coeffs {
                b1: cplx(params, "B1"),
                b4: cplx(params, "B4"),
                b5: cplx(params, "B5"),
                c3: cplx(params, "C3"),
                c4: cplx(params, "C4"),
                f1: cplx(params, "F1"),
                f4: cplx(params, "F4"),
                f5: cplx(params, "F5"),
                g3: cplx(params, "G3"),
                g4: cplx(params, "G4"),
            };
            let f = family1_frame(&co)?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: f.algebra.clone(),
                complex_structures: vec![("normal_form".into(), f)],
                tags: [Tag::Nilpotent].into_iter().collect(),
                provenance: "8d nilpotent first family".into(),
            })
        }
        "family19" => {
            let co = Family1Coeffs::family19(
                cplx(params, "B1"),
                cplx(params, "B4"),
                cplx(params, "B5"),
                cplx(params, "C3"),
                cplx(params, "F1"),
                cplx(params, "F4"),
                cplx(params, "F5"),
                cplx(params, "G3"),
            );
            let f = family1_frame(&co)?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: f.algebra.clone(),
                complex_structures: vec![("normal_form".into(), f)],
                tags: [Tag::Nilpotent, Tag::BalancedExists].into_iter().collect(),
                provenance: "8d nilpotent first family with C4 = −B4, G4 = −F4 (balanced)".into(),
            })
        }
        "family2" => {
            let co = Family2Coeffs {
                f1: cplx(params, "F1"),
                f2: cplx(params, "F2"),
                f4: cplx(params, "F4"),
                f5: cplx(params, "F5"),
                f6: cplx(params, "F6"),
                g1: cplx(params, "G1"),
                g3: cplx(params, "G3"),
                g4: cplx(params, "G4"),
                g5: cplx(params, "G5"),
                h2: cplx(params, "H2"),
                h3: cplx(params, "H3"),
                h4: cplx(params, "H4"),
            };
            if co.h4.norm() == 0.0 {
                return Err(Error::ParameterDomain("family2 requires H4 ≠ 0".into()));
            }
            let f = family2_frame(&co)?;
            Ok(CatalogEntry {
                key: key.into(),
                algebra: f.algebra.clone(),
                complex_structures: vec![("normal_form".into(), f)],
                tags: [Tag::Nilpotent].into_iter().collect(),
                provenance: "8d nilpotent second family (H4 ≠ 0)".into(),
            })
        }
        other => Err(Error::UnknownKey(other.to_string())),
    }
}

/// Frame of the 6-dimensional nilpotent SKT normal form:
/// `dα^1 = dα^2 = 0`,
/// `dα^3 = A α^{12} + B α^{11̄} + D α^{12̄} + E α^{21̄} − C α^{22̄}`,
/// the coefficient placement that makes the SKT obstruction literally
/// `|A|² + |D|² + |E|² + 2Re(B̄C)`.
pub fn skt_6d_frame(a: C64, b: C64, c: C64, d: C64, e: C64) -> Result<Arc<ComplexFrame>> {
    let n = 3;
    let bar = |i: usize| n + i;
    let dalpha = vec![
        Vec::new(),
        Vec::new(),
        vec![
            (0, 1, a),
            (0, bar(0), b),
            (0, bar(1), d),
            (1, bar(0), e),
            (1, bar(1), -c),
        ],
    ];
    frame_from_dalpha(n, &dalpha)
}

/// Frame of the first 8-dimensional family (16).
pub fn family1_frame(co: &Family1Coeffs) -> Result<Arc<ComplexFrame>> {
    let n = 4;
    let bar = |i: usize| n + i;
    let dalpha = vec![
        Vec::new(),
        Vec::new(),
        vec![
            (0, 1, co.b1),
            (0, bar(0), co.b4),
            (0, bar(1), co.b5),
            (1, bar(0), co.c3),
            (1, bar(1), co.c4),
        ],
        vec![
            (0, 1, co.f1),
            (0, bar(0), co.f4),
            (0, bar(1), co.f5),
            (1, bar(0), co.g3),
            (1, bar(1), co.g4),
        ],
    ];
    frame_from_dalpha(n, &dalpha)
}

/// Frame of the second 8-dimensional family (17).
pub fn family2_frame(co: &Family2Coeffs) -> Result<Arc<ComplexFrame>> {
    let n = 4;
    let bar = |i: usize| n + i;
    let dalpha = vec![
        Vec::new(),
        Vec::new(),
        Vec::new(),
        vec![
            (0, 1, co.f1),
            (0, 2, co.f2),
            (0, bar(0), co.f4),
            (0, bar(1), co.f5),
            (0, bar(2), co.f6),
            (1, 2, co.g1),
            (1, bar(0), co.g3),
            (1, bar(1), co.g4),
            (1, bar(2), co.g5),
            (2, bar(0), co.h2),
            (2, bar(1), co.h3),
            (2, bar(2), co.h4),
        ],
    ];
    frame_from_dalpha(n, &dalpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{sample_metric, skt_condition_6d, skt_residual, HermitianMetric};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_entry_validates() {
        for key in keys() {
            let e = get(key, &default_params(key)).unwrap_or_else(|err| panic!("{key}: {err}"));
            assert!(crate::algebra::jacobi_residual(&e.algebra) < 1e-12, "{key}");
            for (name, f) in &e.complex_structures {
                assert!(f.mu.integrability_residual() < 1e-12, "{key}/{name}");
                assert!(f.mu.reality_residual() < 1e-12, "{key}/{name}");
            }
        }
    }

    #[test]
    fn list_filters_by_tags() {
        let all = list(&BTreeSet::new());
        assert_eq!(all.len(), keys().len());
        let skt_solv: BTreeSet<Tag> = [Tag::SktExists, Tag::Solvable].into_iter().collect();
        let got = list(&skt_solv);
        assert_eq!(got, vec!["g2_0".to_string(), "g4".to_string()]);
        let kah: BTreeSet<Tag> = [Tag::KahlerExists].into_iter().collect();
        let got = list(&kah);
        assert!(got.contains(&"torus_n".to_string()) && got.contains(&"g2_0".to_string()));
    }

    #[test]
    fn g2_alpha_at_zero_matches_g2_0() {
        let mut p = BTreeMap::new();
        p.insert("alpha".to_string(), 0.0);
        let a = get("g2_alpha", &p).unwrap();
        let b = get("g2_0", &BTreeMap::new()).unwrap();
        assert_eq!(a.algebra.dim(), b.algebra.dim());
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    assert_eq!(a.algebra.c(k, i, j), b.algebra.c(k, i, j));
                }
            }
        }
        assert!(get("g2_alpha", &BTreeMap::from([("alpha".to_string(), -1.0)])).is_err());
    }

    #[test]
    fn family1_zero_is_abelian() {
        let f = family1_frame(&Family1Coeffs::default()).unwrap();
        assert_eq!(f.mu.norm(), 0.0);
        assert_eq!(f.algebra.dim(), 8);
    }

    #[test]
    fn skt_6d_condition_matches_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let c = |re: f64, im: f64| C64::new(re, im);
        // SKT instance: A = D = E = 0, B = 1, C = i.
        let f = skt_6d_frame(
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        )
        .unwrap();
        assert_eq!(
            skt_condition_6d(
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 1.0),
                c(0.0, 0.0),
                c(0.0, 0.0)
            ),
            0.0
        );
        for _ in 0..10 {
            let g = sample_metric(&f, &mut rng);
            assert!(
                skt_residual(&g) < 1e-12,
                "all metrics SKT when the obstruction vanishes"
            );
        }
        // Non-SKT instance: A = 1.
        let f2 = skt_6d_frame(
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        )
        .unwrap();
        for _ in 0..10 {
            let g = sample_metric(&f2, &mut rng);
            assert!(
                skt_residual(&g) > 1e-6,
                "no metric SKT when the obstruction is 1"
            );
        }
        let id = HermitianMetric::identity(&f2);
        assert!(
            (skt_residual(&id) - 1.0).abs() < 1e-12,
            "identity-metric residual equals the obstruction"
        );
    }

    #[test]
    fn unknown_key_is_an_error() {
        assert!(matches!(
            get("nope", &BTreeMap::new()),
            Err(Error::UnknownKey(_))
        ));
    }
}
