mod common;

use cyclerisk::behavior::{kernel_matrix, loss, solve_binary, train_svm, weighted_loss, Kernel, KernelKind, SmoConfig};
use proptest::prelude::*;

fn problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (3usize..=7).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 8), n),
            prop::collection::vec(prop::bool::ANY, n),
        )
            .prop_map(|(x, mut s)| {
                s[0] = true;
                s[1] = false;
                (x, s.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_matches_brute_force((x, y) in problem(), c in 0.1..10.0f64, gaussian in prop::bool::ANY) {
        let kernel = if gaussian { Kernel::Gaussian { bandwidth: 1.0 } } else { Kernel::Linear };
        let k = kernel_matrix(&kernel, &x);
        let sol = solve_binary(&k, &y, c, &SmoConfig::default()).unwrap();
        let oracle = common::svm_dual_oracle(&k, &y, c);
        prop_assert!((sol.objective - oracle).abs() < 1e-4, "{} vs {oracle}", sol.objective);
        prop_assert!(sol.alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        prop_assert!(eq.abs() < 1e-9);
    }

    #[test]
    fn loss_is_duplication_invariant(y in prop::collection::vec(0usize..3, 1..40), p in prop::collection::vec(0usize..3, 40)) {
        let p = &p[..y.len()];
        let classes = [0, 1, 2];
        let priors = [0.2, 0.5, 0.3];
        let a = weighted_loss(p, &y, &classes, &priors).unwrap();
        let yy: Vec<usize> = y.iter().chain(&y).copied().collect();
        let pp: Vec<usize> = p.iter().chain(p).copied().collect();
        prop_assert!((a - weighted_loss(&pp, &yy, &classes, &priors).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
    }
}

#[test]
fn separable_clusters_have_zero_training_loss() {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..60 {
        let c = i % 3;
        let v = (i * 7 % 11) as f64 * 0.05;
        // Triangle corners: each class is linearly separable from the other two.
        let (cx, cy) = [(0.0, 0.0), (10.0, 0.0), (5.0, 8.0)][c];
        x.push(vec![cx + v, cy - v, v]);
        y.push(c);
    }
    let model = train_svm(&x, &y, 1.0, KernelKind::Linear, None, &SmoConfig::default()).unwrap();
    assert_eq!(loss(&model, &x, &y).unwrap(), 0.0);
}
