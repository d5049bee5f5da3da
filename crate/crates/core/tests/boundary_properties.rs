mod oracles;

use fieldseg_core::boundary::{extract_fields, fuse, label_boundaries, morph_close};
use fieldseg_core::fields::signed_area;
use fieldseg_core::{GeoTransform, LabelImage, Mask};
use proptest::prelude::*;
use rand::Rng;

fn blobby_labels(rng: &mut rand_chacha::ChaCha8Rng, w: usize, h: usize) -> LabelImage {
    // Voronoi cells of a few random sites; gives irregular adjacent regions.
    let sites: Vec<(f64, f64)> = (0..rng.gen_range(1..8))
        .map(|_| (rng.gen_range(0.0..w as f64), rng.gen_range(0.0..h as f64)))
        .collect();
    let labels = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let (k, _) = sites
                .iter()
                .enumerate()
                .map(|(k, (sx, sy))| (k, (x - sx).powi(2) + (y - sy).powi(2)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            k as i32
        })
        .collect();
    LabelImage::from_labels(w, h, labels).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closing_matches_definition_and_is_idempotent(
        seed in any::<u64>(),
        w in 1usize..30,
        h in 1usize..30,
        density in 0.0f64..0.6,
        kernel in prop::sample::select(vec![1usize, 3, 5, 7]),
    ) {
        let mut rng = oracles::rng(seed);
        let m = oracles::random_mask(&mut rng, w, h, density);
        let closed = morph_close(&m, kernel).unwrap();
        prop_assert!(closed.is_superset_of(&m));
        prop_assert_eq!(&morph_close(&closed, kernel).unwrap(), &closed);
        prop_assert_eq!(&closed, &oracles::brute_close(&m, kernel));
    }

    #[test]
    fn fusion_contains_both_inputs(seed in any::<u64>(), w in 1usize..30, h in 1usize..30) {
        let mut rng = oracles::rng(seed);
        let a = oracles::random_mask(&mut rng, w, h, 0.2);
        let b = oracles::random_mask(&mut rng, w, h, 0.2);
        let f = fuse(&a, &b).unwrap();
        prop_assert!(f.is_superset_of(&a) && f.is_superset_of(&b));
        prop_assert_eq!(f.count(), a.bits().iter().zip(b.bits()).filter(|(x, y)| **x || **y).count());
    }

    #[test]
    fn polygons_agree_with_pixel_regions(seed in any::<u64>(), w in 4usize..40, h in 4usize..40, min_area in 0usize..20) {
        let mut rng = oracles::rng(seed);
        let labels = blobby_labels(&mut rng, w, h);
        let mut bounds = label_boundaries(&labels);
        // Sprinkle extra boundary pixels to create holes and small specks.
        let extra = oracles::random_mask(&mut rng, w, h, 0.05);
        bounds = fuse(&bounds, &extra).unwrap();
        let nodata: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.02)).collect();
        let (regions, fields) = extract_fields(&bounds, Some(&nodata), min_area, GeoTransform::IDENTITY).unwrap();
        fields.validate().unwrap();
        prop_assert_eq!(fields.len(), regions.cluster_count());
        for (i, &lab) in regions.labels().iter().enumerate() {
            if bounds.bits()[i] || nodata[i] {
                prop_assert_eq!(lab, -1);
            }
        }
        for (k, poly) in fields.polygons.iter().enumerate() {
            prop_assert_eq!(poly.field_id, k);
            prop_assert_eq!(poly.area_px, regions.cluster_sizes()[k]);
            prop_assert!(poly.area_px >= min_area);
            prop_assert!(signed_area(&poly.exterior) > 0.0);
            for hole in &poly.holes {
                prop_assert!(signed_area(hole) < 0.0);
            }
            prop_assert!((poly.polygon_area() - poly.area_px as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn closing_bridges_a_one_pixel_gap() {
    let mut m = Mask::empty(7, 5);
    for c in [1, 2, 4, 5] {
        m.set(c, 2, true);
    }
    let closed = morph_close(&m, 3).unwrap();
    for c in 1..=5 {
        assert!(closed.get(c, 2));
    }
    assert_eq!(closed, oracles::brute_close(&m, 3));
}
