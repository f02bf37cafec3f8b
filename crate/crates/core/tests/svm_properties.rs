use proptest::prelude::*;

use gesturekeeper::features::Scaler;
use gesturekeeper::svm::{ovo_train, smo_train, KernelConfig, SvmParams};
use gesturekeeper::LabeledDataset;

fn labelled_rows() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<i8>)> {
    (4usize..24, 1usize..4).prop_flat_map(|(n, d)| {
        (
            proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, d), n),
            proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n),
        )
            .prop_map(|(rows, mut y)| {
                y[0] = 1;
                y[1] = -1;
                (rows, y)
            })
    })
}

/// `α_i = |coef_i|` with signs from the labels of the matching rows.
fn dual_from_model(rows: &[Vec<f64>], y: &[i8], support: &[Vec<f64>], coef: &[f64]) -> Vec<f64> {
    rows.iter()
        .zip(y)
        .map(|(r, &yi)| {
            support
                .iter()
                .zip(coef)
                .filter(|(s, &c)| *s == r && (c > 0.0) == (yi > 0))
                .map(|(_, c)| c.abs())
                .sum()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dual_constraints_hold((rows, y) in labelled_rows(), cost in 0.05f64..20.0, gamma in 0.05f64..2.0) {
        // Duplicate rows would share α between them; skip those inputs.
        prop_assume!(!rows.iter().enumerate().any(|(i, r)| rows[..i].contains(r)));
        let params = SvmParams { kernel: KernelConfig::radial(gamma), cost };
        let model = smo_train(&rows, &y, &params).unwrap();
        for &c in &model.coef {
            prop_assert!(c.abs() <= cost * (1.0 + 1e-12));
        }
        // Σ α_i y_i = Σ coef_i.
        prop_assert!(model.coef.iter().sum::<f64>().abs() <= 1e-6);
        let mut margin_err = 0.0f64;
        let alpha = dual_from_model(&rows, &y, &model.support, &model.coef);
        for ((r, &yi), &a) in rows.iter().zip(&y).zip(&alpha) {
            let m = f64::from(yi) * model.decision_value(r).unwrap();
            let v = if a <= 0.0 {
                (1.0 - m).max(0.0)
            } else if a >= cost * (1.0 - 1e-12) {
                (m - 1.0).max(0.0)
            } else {
                (m - 1.0).abs()
            };
            margin_err = margin_err.max(v);
        }
        prop_assert!(margin_err <= 1e-3, "KKT violation {margin_err}");
    }

    #[test]
    fn decision_values_ignore_row_order((rows, y) in labelled_rows(), shift in 1usize..23, probe in proptest::collection::vec(-3.0f64..3.0, 3)) {
        let params = SvmParams { kernel: KernelConfig::radial(0.7), cost: 2.0 };
        let k = shift % rows.len();
        let (mut r2, mut y2) = (rows.clone(), y.clone());
        r2.rotate_left(k);
        y2.rotate_left(k);
        r2.reverse();
        y2.reverse();
        let a = smo_train(&rows, &y, &params).unwrap();
        let b = smo_train(&r2, &y2, &params).unwrap();
        let x = &probe[..rows[0].len()];
        prop_assert_eq!(a.decision_value(x).unwrap().to_bits(), b.decision_value(x).unwrap().to_bits());
    }

    #[test]
    fn ovo_winner_matches_brute_force_tally(seed in 0u64..1000, probe in proptest::collection::vec(-4.0f64..4.0, 2)) {
        use rand::Rng;
        let mut rng = gesturekeeper::rng::task_rng(seed, &[]);
        let classes: Vec<String> = (0..12).map(|c| format!("c{c}")).collect();
        let mut ds = LabeledDataset::new(vec!["x".into(), "y".into()], classes);
        for c in 0..12 {
            let centre = [(c % 4) as f64 - 1.5, (c / 4) as f64 - 1.0];
            for _ in 0..4 {
                ds.push(vec![centre[0] + rng.gen_range(-0.8..0.8), centre[1] + rng.gen_range(-0.8..0.8)], c, "S").unwrap();
            }
        }
        let model = ovo_train(&ds, &SvmParams::exploratory(2)).unwrap();
        let scaled = model.scaler().transform_row(&probe).unwrap();
        let mut votes = [0usize; 12];
        let mut strength = [0.0f64; 12];
        for a in 0..12 {
            for b in a + 1..12 {
                let f = model.binary(a, b).unwrap().decision_value(&scaled).unwrap();
                let w = if f >= 0.0 { a } else { b };
                votes[w] += 1;
                strength[w] += f.abs();
            }
        }
        let top = *votes.iter().max().unwrap();
        let mut best = None;
        for c in 0..12 {
            if votes[c] == top && best.is_none_or(|b: usize| strength[c] > strength[b]) {
                best = Some(c);
            }
        }
        prop_assert_eq!(model.predict(&probe).unwrap().class, best.unwrap());
        prop_assert_eq!(model.num_models(), 66);
    }
}

#[test]
fn raising_cost_never_adds_margin_violations() {
    use rand::Rng;
    for seed in 0..10 {
        let mut rng = gesturekeeper::rng::task_rng(seed, &[]);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..30 {
            let label: i8 = if i % 2 == 0 { 1 } else { -1 };
            let gap = 0.3 + rng.gen_range(0.0..1.5);
            rows.push(vec![f64::from(label) * gap, rng.gen_range(-2.0..2.0)]);
            y.push(label);
        }
        let mut last = usize::MAX;
        for cost in [0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0] {
            let params = SvmParams {
                kernel: KernelConfig::linear(),
                cost,
            };
            let model = smo_train(&rows, &y, &params).unwrap();
            let violations = rows
                .iter()
                .zip(&y)
                .filter(|(r, &yi)| f64::from(yi) * model.decision_value(r).unwrap() < 1.0 - 1e-3)
                .count();
            assert!(
                violations <= last,
                "seed {seed}, C={cost}: {violations} > {last}"
            );
            last = violations;
        }
        assert_eq!(last, 0, "separable data should end with no violations");
    }
}

#[test]
fn f32_models_agree_with_f64() {
    let rows64 = vec![
        vec![-2.0, 0.5],
        vec![-1.0, -0.3],
        vec![1.0, 0.2],
        vec![2.5, -0.1],
    ];
    let y = [-1, -1, 1, 1];
    let rows32: Vec<Vec<f32>> = rows64
        .iter()
        .map(|r| r.iter().map(|&v| v as f32).collect())
        .collect();
    let m64 = smo_train(
        &rows64,
        &y,
        &gesturekeeper::SvmParams {
            kernel: KernelConfig::radial(0.5),
            cost: 1.0,
        },
    )
    .unwrap();
    let m32 = smo_train(
        &rows32,
        &y,
        &gesturekeeper::SvmParams32 {
            kernel: KernelConfig::radial(0.5),
            cost: 1.0,
        },
    )
    .unwrap();
    for (r64, r32) in rows64.iter().zip(&rows32) {
        let (a, b) = (
            m64.decision_value(r64).unwrap(),
            m32.decision_value(r32).unwrap(),
        );
        assert!((a - f64::from(b)).abs() < 1e-3, "{a} vs {b}");
    }
    let scaler = Scaler::fit(&rows64).unwrap();
    assert_eq!(scaler.dim(), 2);
}
