use proptest::prelude::*;
use volfield::fields::SpecDocument;
use volfield::minimizer::family_volume;
use volfield::minimizer::FamilyQuadrature;
use volfield::topology::{index_at_poles, Orientation};
use volfield::volume::{bcj_lower_bound, meridian_volume, volume_meridian_closed};
use volfield::{AngleField, DomainRegion, QuadratureSpec, SphereChart, ZetaSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn volume_grows_with_radius(k in -4i64..=4, r in 0.2f64..5.0, dr in 0.01f64..1.0) {
        prop_assert!(meridian_volume(k, r) < meridian_volume(k, r + dr));
    }

    #[test]
    fn negative_winding_is_not_cheaper(k in 1i64..=6) {
        let full = std::f64::consts::PI;
        let a = volume_meridian_closed(k, (0.0, full), 1.0, 1.0);
        let b = volume_meridian_closed(-k, (0.0, full), 1.0, 1.0);
        prop_assert!(b >= a);
    }

    #[test]
    fn phase_does_not_change_volume(k in 0i64..=3, phi0 in 0.0f64..6.28) {
        let chart = SphereChart::new(1.0).unwrap();
        let spec = QuadratureSpec::default().with_panels(64, 32);
        let field = AngleField::Meridian(ZetaSpec::meridian(k, phi0));
        let v = volfield::volume::volume(&field, &DomainRegion::Full, &spec, &chart).unwrap().value;
        prop_assert!((v / meridian_volume(k, 1.0) - 1.0).abs() < 1e-9, "{}", v);
    }

    #[test]
    fn indices_sum_to_two(k in -3i64..=5, phi0 in 0.0f64..6.28) {
        let rep = index_at_poles(&AngleField::Meridian(ZetaSpec::meridian(k, phi0)), Orientation::Mirrored).unwrap();
        prop_assert_eq!((rep.index_n, rep.index_s), (1 - k, 1 + k));
        prop_assert!(meridian_volume(k, 1.0) >= bcj_lower_bound(rep.index_s, rep.index_n) - 1e-9);
    }

    #[test]
    fn perturbations_never_beat_the_meridian(k in 0i64..=2, c in -0.4f64..0.4, s in -0.4f64..0.4, n in 1usize..=3) {
        let mut fourier = vec![(0.0, 0.0); n];
        fourier[n - 1] = (c, s);
        let zeta = ZetaSpec::meridian(k, 0.0).with_fourier(fourier);
        let v = family_volume(&zeta, &FamilyQuadrature::default(), 1.0).unwrap();
        prop_assert!(v >= meridian_volume(k, 1.0) * (1.0 - 1e-9), "{}", v);
    }

    #[test]
    fn spec_documents_round_trip(k in -5i64..=5, phi0 in -3.0f64..3.0, c in -1.0f64..1.0) {
        let field = AngleField::Meridian(ZetaSpec::meridian(k, phi0).with_fourier(vec![(c, -c)]));
        let doc = SpecDocument::from_field(&field).unwrap();
        let back = SpecDocument::from_json(&doc.to_json()).unwrap().to_field().unwrap();
        prop_assert_eq!(back, field);
    }
}
