mod common;

use ndarray::Array2;
use proptest::prelude::*;

use syllablend::dataprep::{
    iqr_clean, kmeans, kmeans_smote, make_variants, tukey_fences, Dataset, SmoteParams, Variant,
};
use syllablend::FeatureRow;

use common::on_some_segment;

fn row() -> impl Strategy<Value = FeatureRow> {
    (prop::array::uniform7(-20.0..20.0f64), 0u8..=1)
        .prop_map(|(f, l)| FeatureRow::from_features(f, l))
}

fn dataset(min: usize, max: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec(row(), min..=max).prop_map(|rows| Dataset::new(rows).unwrap())
}

fn two_class(min: usize, max: usize) -> impl Strategy<Value = Dataset> {
    dataset(min, max).prop_filter("both classes", |d| {
        let [a, b] = d.class_counts();
        a > 0 && b > 0
    })
}

fn smote_params() -> impl Strategy<Value = SmoteParams> {
    (
        1usize..6,
        prop_oneof![Just(0.0), Just(0.5), Just(1.0)],
        1usize..6,
        any::<u64>(),
    )
        .prop_map(|(n_clusters, threshold, k_neighbors, seed)| SmoteParams {
            n_clusters,
            cluster_balance_threshold: threshold,
            k_neighbors,
            seed,
            ..Default::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rows_within_fences_survive(d in dataset(0, 60), k in 0.0..3.0f64) {
        let cleaned = iqr_clean(&d, k);
        prop_assert_eq!(cleaned.variant, Variant::Cleaned);
        if d.is_empty() {
            prop_assert!(cleaned.is_empty());
        } else {
            let fences = tukey_fences(&d, k);
            let inside: Vec<FeatureRow> = d
                .rows
                .iter()
                .filter(|r| r.features().iter().zip(&fences).all(|(v, (lo, hi))| lo <= v && v <= hi))
                .copied()
                .collect();
            prop_assert_eq!(cleaned.rows, inside);
        }
    }

    #[test]
    fn cleaning_monotone_in_fence(d in dataset(1, 60), k1 in 0.0..3.0f64, dk in 0.0..3.0f64) {
        let tight = iqr_clean(&d, k1);
        let loose = iqr_clean(&d, k1 + dk);
        // Every row kept under the tighter fence is kept under the looser one.
        let mut it = loose.rows.iter();
        for r in &tight.rows {
            prop_assert!(it.any(|q| q == r));
        }
    }

    #[test]
    fn kmeans_cost_non_increasing(points in prop::collection::vec(prop::array::uniform3(-10.0..10.0f64), 1..50), k in 1usize..6, seed in any::<u64>()) {
        prop_assume!(k <= points.len());
        let x = Array2::from_shape_fn((points.len(), 3), |(i, j)| points[i][j]);
        let r = kmeans(x.view(), k, seed).unwrap();
        prop_assert!(r.cost_history.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        prop_assert_eq!(r.assignments.len(), points.len());
        prop_assert!(r.assignments.iter().all(|&a| a < k));
        prop_assert_eq!(&r, &kmeans(x.view(), k, seed).unwrap());
    }

    #[test]
    fn smote_balances_and_interpolates(d in two_class(2, 50), p in smote_params()) {
        let out = kmeans_smote(&d, &p).unwrap();
        let [a, b] = out.class_counts();
        prop_assert_eq!(a, b);
        prop_assert_eq!(&out.rows[..d.len()], &d.rows[..]);

        let [c0, c1] = d.class_counts();
        let minority_label = u8::from(c1 < c0);
        let minority: Vec<Vec<f64>> = d
            .rows
            .iter()
            .filter(|r| r.label == minority_label)
            .map(|r| r.features().to_vec())
            .collect();
        for r in &out.rows[d.len()..] {
            prop_assert_eq!(r.label, minority_label);
            prop_assert!(on_some_segment(&r.features(), &minority, 1e-9));
        }
        prop_assert_eq!(&out, &kmeans_smote(&d, &p).unwrap());
    }

    #[test]
    fn variants_compose(d in two_class(4, 40), p in smote_params()) {
        let [a, b] = iqr_clean(&d, 1.5).class_counts();
        prop_assume!(a > 0 && b > 0);
        let v = make_variants(&d, &p, 1.5).unwrap();
        let tags: Vec<Variant> = v.iter().map(|x| x.variant).collect();
        prop_assert_eq!(tags, Variant::ALL.to_vec());
        prop_assert_eq!(&v[0].rows, &d.rows);
        prop_assert_eq!(&v[1].rows, &iqr_clean(&d, 1.5).rows);
        prop_assert_eq!(&v[2].rows, &kmeans_smote(&d, &p).unwrap().rows);
    }
}

#[test]
fn balanced_clean_input_passes_through() {
    let rows: Vec<FeatureRow> = (0..8)
        .map(|i| FeatureRow::from_features([f64::from(i % 4); 7], (i % 2) as u8))
        .collect();
    let d = Dataset::new(rows).unwrap();
    for v in make_variants(&d, &SmoteParams::default(), 1.5).unwrap() {
        assert_eq!(v.rows, d.rows);
    }
}
