use corrgan::corrnn::{hidden_correlation, per_dimension_correlation};
use corrgan::metrics::{cooccurrence_matrix, occurrence_mse, occurrence_probabilities};
use ndarray::Array2;
use proptest::prelude::*;

fn binary_matrix() -> impl Strategy<Value = Array2<f64>> {
    (1usize..=30, 2usize..=12).prop_flat_map(|(n, d)| {
        proptest::collection::vec(prop::bool::ANY, n * d)
            .prop_map(move |bits| Array2::from_shape_fn((n, d), |(i, j)| bits[i * d + j] as u8 as f64))
    })
}

fn brute_force(data: &Array2<f64>, alpha: f64) -> Array2<f64> {
    let (n, d) = data.dim();
    let mut m = Array2::zeros((d, d));
    for k in 0..n {
        for i in 0..d {
            for j in 0..d {
                if i != j && data[[k, i]] > alpha && data[[k, j]] > alpha {
                    m[[i, j]] += 1.0;
                }
            }
        }
    }
    m / n as f64
}

proptest! {
    #[test]
    fn cooccurrence_matches_direct_counting(data in binary_matrix(), a in 0usize..3) {
        let alpha = [0.3, 0.5, 0.9][a];
        let m = cooccurrence_matrix(data.view(), alpha).unwrap().matrix;
        prop_assert_eq!(&m, &brute_force(&data, alpha));
        prop_assert_eq!(&m, &m.t());
        prop_assert!(m.diag().iter().all(|&v| v == 0.0));
        prop_assert!(m.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn metrics_ignore_row_order(data in binary_matrix(), seed in any::<u64>()) {
        let n = data.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let shuffled = data.select(ndarray::Axis(0), &order);
        prop_assert_eq!(
            cooccurrence_matrix(data.view(), 0.5).unwrap().matrix,
            cooccurrence_matrix(shuffled.view(), 0.5).unwrap().matrix
        );
        let p = occurrence_probabilities(data.view()).unwrap();
        let q = occurrence_probabilities(shuffled.view()).unwrap();
        prop_assert!(occurrence_mse(&p, &q).unwrap() < 1e-30);
    }

    #[test]
    fn correlation_symmetric_and_affine_invariant(
        values in proptest::collection::vec(-1.0f64..1.0, 24),
        scale in 0.5f64..5.0,
        shift in -2.0f64..2.0,
    ) {
        let hx = Array2::from_shape_vec((6, 2), values[..12].to_vec()).unwrap();
        let hy = Array2::from_shape_vec((6, 2), values[12..].to_vec()).unwrap();
        let var_ok = |h: &Array2<f64>| h.var_axis(ndarray::Axis(0), 0.0).iter().all(|&v| v > 0.05);
        prop_assume!(var_ok(&hx) && var_ok(&hy));
        let a = hidden_correlation(&hx, &hy).unwrap();
        prop_assert_eq!(a, hidden_correlation(&hy, &hx).unwrap());
        let moved = hx.mapv(|v| v * scale + shift);
        prop_assert!((a - hidden_correlation(&moved, &hy).unwrap()).abs() < 1e-4);
        for r in per_dimension_correlation(&hx, &hx).unwrap() {
            prop_assert!((1.0 - 1e-6..=1.0).contains(&r));
        }
    }
}
