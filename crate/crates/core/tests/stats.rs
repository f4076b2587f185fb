use imbal_core::stats::special::{chi_square_sf, f_sf, normal_sf, tail_probability, Distribution};
use imbal_core::stats::{friedman, hochberg, holm, posthoc, ResultMatrix};
use proptest::prelude::*;

#[path = "common/quadrature.rs"]
mod quadrature;
use quadrature::{chi_square_oracle, f_oracle, normal_oracle};

const TOL: f64 = 1e-10;

#[test]
fn oracle_reproduces_closed_forms() {
    // chi-square(2) and F(2, 2) tails are elementary
    for x in [0.1, 1.0, 5.0, 30.0] {
        assert!((chi_square_oracle(x, 2.0) - (-x / 2.0).exp()).abs() < 1e-13);
        assert!((f_oracle(x, 2.0, 2.0) - 1.0 / (1.0 + x)).abs() < 1e-13);
    }
    assert!((normal_oracle(0.0) - 0.5).abs() < 1e-14);
}

#[test]
fn normal_tail_matches_quadrature() {
    let mut z = -8.0;
    while z <= 8.0 {
        let (got, want) = (normal_sf(z), normal_oracle(z));
        assert!((got - want).abs() < TOL, "z = {z}: {got} vs {want}");
        z += 0.125;
    }
}

#[test]
fn chi_square_tail_matches_quadrature() {
    for df in [1.0, 2.0, 3.0, 4.0, 5.0, 7.0, 10.0, 31.0, 100.0] {
        for x in [0.05, 0.5, 1.0, 2.5, 5.0, 11.07, 20.515, 40.0, 68.4, 100.0, 150.0, 200.0] {
            let (got, want) = (chi_square_sf(x, df).unwrap(), chi_square_oracle(x, df));
            assert!((got - want).abs() < TOL, "df = {df}, x = {x}: {got} vs {want}");
        }
    }
}

#[test]
fn f_tail_matches_quadrature() {
    for (d1, d2) in [
        (1.0, 1.0),
        (1.0, 10.0),
        (2.0, 5.0),
        (3.0, 31.0),
        (5.0, 20.0),
        (5.0, 155.0),
        (10.0, 3.0),
    ] {
        for x in [0.01, 0.2, 0.5, 1.0, 2.0, 2.27, 5.0, 10.0, 23.14, 50.0, 100.0] {
            let (got, want) = (f_sf(x, d1, d2).unwrap(), f_oracle(x, d1, d2));
            assert!((got - want).abs() < TOL, "F({d1}, {d2}) at {x}: {got} vs {want}");
        }
    }
}

#[test]
fn dispatch_and_errors() {
    assert_eq!(tail_probability(0.0, Distribution::Normal).unwrap(), 0.5);
    assert!(tail_probability(1.0, Distribution::ChiSquare(-1.0)).is_err());
    assert!(tail_probability(1.0, Distribution::F(0.0, 3.0)).is_err());
    assert!(tail_probability(23.14, Distribution::F(5.0, 155.0)).unwrap() < 1e-15);
}

fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..12, 2usize..7).prop_flat_map(|(n, k)| {
        // coarse grid so ties occur
        prop::collection::vec(prop::collection::vec((0u8..12).prop_map(|v| v as f64 / 10.0), k), n)
    })
}

fn names(k: usize) -> Vec<String> {
    (0..k).map(|j| format!("c{j}")).collect()
}

proptest! {
    #[test]
    fn mean_ranks_sum_to_constant(values in matrix_strategy(), higher in any::<bool>()) {
        let k = values[0].len();
        let m = ResultMatrix::new(values, names(k), higher).unwrap();
        let s = friedman(&m).unwrap();
        let total: f64 = s.mean_ranks.iter().sum();
        prop_assert!((total - (k * (k + 1)) as f64 / 2.0).abs() < 1e-9);
        prop_assert!(s.friedman_chi2 >= 0.0);
        prop_assert!((0.0..=1.0).contains(&s.friedman_p));
    }

    #[test]
    fn column_permutation_permutes_ranks(values in matrix_strategy(), rot in 0usize..6) {
        let k = values[0].len();
        let r = rot % k;
        let perm: Vec<usize> = (0..k).map(|j| (j + r) % k).collect();
        let permuted: Vec<Vec<f64>> = values.iter().map(|row| perm.iter().map(|&j| row[j]).collect()).collect();
        let a = friedman(&ResultMatrix::new(values.clone(), names(k), true).unwrap()).unwrap();
        let b = friedman(&ResultMatrix::new(permuted, names(k), true).unwrap()).unwrap();
        for (i, &j) in perm.iter().enumerate() {
            prop_assert_eq!(b.mean_ranks[i], a.mean_ranks[j]);
        }
        prop_assert!((a.friedman_chi2 - b.friedman_chi2).abs() < 1e-9);
    }

    #[test]
    fn control_survives_affine_transform(values in matrix_strategy(), scale in 0.1f64..10.0, shift in -5f64..5.0) {
        let k = values[0].len();
        let moved: Vec<Vec<f64>> = values.iter().map(|row| row.iter().map(|v| scale * v + shift).collect()).collect();
        let a = posthoc(&friedman(&ResultMatrix::new(values.clone(), names(k), true).unwrap()).unwrap()).unwrap();
        let b = posthoc(&friedman(&ResultMatrix::new(moved, names(k), true).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(a.control, b.control);
    }

    #[test]
    fn adjustments_are_ordered(p in prop::collection::vec(0f64..1.0, 1..10)) {
        let ho = holm(&p);
        let hb = hochberg(&p);
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
        for w in order.windows(2) {
            prop_assert!(ho[w[0]] <= ho[w[1]]);
            prop_assert!(hb[w[0]] <= hb[w[1]]);
        }
        for i in 0..p.len() {
            prop_assert!(hb[i] <= ho[i] + 1e-15);
            prop_assert!(ho[i] >= p[i] && hb[i] >= p[i]);
            prop_assert!(ho[i] <= 1.0 && hb[i] <= 1.0);
        }
    }
}
