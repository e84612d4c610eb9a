use diracep::ep_analysis::{find_degeneracies, DegeneracyReport};
use diracep::isospectral::sorted_spectrum_distance;
use diracep::linalg::eig_dense;
use diracep::models::{BlockStackSpec, StackKind};
use diracep::sweep::{Grid2, GridAxis};
use diracep::{
    classify_degeneracy, verify_isospectral, AnalysisConfig, HamiltonianFamily, Model,
    TwoBandVariant,
};

fn grid(t: (f64, f64, usize), k: (f64, f64, usize)) -> Grid2 {
    Grid2::new(
        GridAxis::new(t.0, t.1, t.2).unwrap(),
        GridAxis::new(k.0, k.1, k.2).unwrap(),
    )
}

fn stack(kind: StackKind) -> Model {
    Model::Stack {
        v0: 1.0,
        spec: BlockStackSpec::new(vec![1.0, 2.0, 3.0], kind).unwrap(),
    }
}

fn shipped_degeneracies() -> Vec<(Model, [f64; 2])> {
    vec![
        (Model::H3 { v0: 1.0 }, [1.0, 0.0]),
        (Model::HaPrime { v0: 1.0 }, [1.0, 0.0]),
        (Model::HbPrime { v0: 1.0 }, [1.0, 0.0]),
        (Model::HaDoublePrime { v0: 1.0 }, [1.0, 0.0]),
        (Model::ImagCone, [0.0, 0.0]),
        (Model::Bloch { v0: 1.0, trunc_m: 8 }, [1.0, 0.0]),
        (Model::Bloch { v0: 1.0, trunc_m: 8 }, [1.0, 0.5]),
        (stack(StackKind::A), [1.0, 0.0]),
        (stack(StackKind::B), [1.0, 0.0]),
        (
            Model::TwoBand {
                variant: TwoBandVariant::FirstOrder,
            },
            [0.0, 0.0],
        ),
        (
            Model::TwoBand {
                variant: TwoBandVariant::Hermitian,
            },
            [0.0, 0.0],
        ),
    ]
}

fn classify(model: &Model, point: [f64; 2]) -> DegeneracyReport {
    classify_degeneracy(model, point, &AnalysisConfig::default()).unwrap()
}

#[test]
fn coalescence_agrees_with_rank() {
    for (model, point) in shipped_degeneracies() {
        let r = classify(&model, point);
        assert!(r.geometric_multiplicity <= r.algebraic_multiplicity);
        assert_eq!(
            r.geometric_multiplicity == 1,
            r.coalescence_overlap > 0.999,
            "{} at {point:?}: geo {}, overlap {}",
            model.id(),
            r.geometric_multiplicity,
            r.coalescence_overlap
        );
    }
}

#[test]
fn three_band_rays_are_linear() {
    let r = classify(&Model::H3 { v0: 1.0 }, [1.0, 0.0]);
    assert_eq!(r.ray_exponents.len(), 8);
    for p in r.ray_exponents {
        let p = p.unwrap();
        assert!((0.95..=1.05).contains(&p), "{p}");
    }
}

#[test]
fn three_band_grid_has_one_contact() {
    let found = find_degeneracies(
        &Model::H3 { v0: 1.0 },
        &grid((0.9, 1.1, 21), (-0.1, 0.1, 21)),
        None,
    )
    .unwrap();
    assert_eq!(found.len(), 1, "{found:?}");
    assert!((found[0].point[0] - 1.0).abs() < 1e-8 && found[0].point[1].abs() < 1e-8);
    assert!((found[0].omega0 - 1.0).norm() < 1e-8);
}

#[test]
fn crystal_at_threshold_has_contacts_at_centre_and_edges() {
    let found = find_degeneracies(
        &Model::Bloch { v0: 1.0, trunc_m: 8 },
        &Grid2::new(GridAxis::fixed(1.0), GridAxis::new(-0.5, 0.5, 41).unwrap()),
        None,
    )
    .unwrap();
    let lowest: Vec<_> = found.iter().filter(|c| c.band == 0).collect();
    let ks: Vec<f64> = lowest.iter().map(|c| c.point[1]).collect();
    for want in [-0.5, 0.5] {
        assert!(ks.iter().any(|k| (k - want).abs() < 1e-8), "{ks:?}");
    }
    let at_centre = found
        .iter()
        .any(|c| c.point[1].abs() < 1e-8 && (c.omega0 - 1.0).norm() < 1e-8);
    assert!(at_centre, "{found:?}");
}

#[test]
fn isospectral_pass_survives_grid_refinement() {
    let cfg = AnalysisConfig::default();
    let (a, b) = (Model::HaPrime { v0: 1.0 }, Model::HbPrime { v0: 1.0 });
    let coarse = verify_isospectral(&a, &b, &grid((0.0, 2.0, 51), (-0.5, 0.5, 51)), 1e-12, &cfg)
        .unwrap();
    let fine = verify_isospectral(&a, &b, &grid((0.0, 2.0, 101), (-0.5, 0.5, 101)), 1e-12, &cfg)
        .unwrap();
    assert!(coarse.pass && fine.pass);
    assert!(fine.max_deviation <= 1e-12);
    for d in coarse.degeneracy_comparison.iter().chain(&fine.degeneracy_comparison) {
        assert!((d.omega_a - d.omega_b).norm() <= 1e-12);
    }
}

#[test]
fn sorted_distance_is_a_pseudometric() {
    let three_band = [
        Model::H3 { v0: 0.5 },
        Model::H3 { v0: 1.0 },
        Model::H3 { v0: 1.5 },
        Model::ImagCone,
    ];
    for point in [[0.9, 0.1], [1.0, 0.0], [1.3, -0.2]] {
        let spectra: Vec<_> = three_band
            .iter()
            .map(|m: &Model| eig_dense(&m.matrix(point).unwrap()).unwrap().eigenvalues)
            .collect();
        let d = |i: usize, j: usize| sorted_spectrum_distance(&spectra[i], &spectra[j]).unwrap();
        for i in 0..spectra.len() {
            assert_eq!(d(i, i), 0.0);
            for j in 0..spectra.len() {
                assert_eq!(d(i, j), d(j, i));
                for l in 0..spectra.len() {
                    assert!(d(i, l) <= d(i, j) + d(j, l) + 1e-15);
                }
            }
        }
    }
}
