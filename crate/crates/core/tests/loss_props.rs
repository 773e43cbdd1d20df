mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use taxex::bio::Tag;
use taxex::oracle::{
    aml_targets, build_oracle, cl_targets, naive_targets, plm_kl_targets, plm_targets, sequence_loss, AmlTargets,
    ClVariant, TokenTarget, LOG_CLAMP,
};
use taxex::taxonomy::{Side, Taxonomy};

fn logits(seed: u64, n: usize, k: usize, scale: f64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, k), |_| rng.gen_range(-scale..scale))
}

fn taxonomies() -> Vec<Taxonomy> {
    let mut out = vec![Taxonomy::disjoint(&["Per", "Loc"], &["Org", "Misc"]).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    while out.len() < 8 {
        if let Ok(t) = random_relations(&mut rng, 5).build() {
            out.push(t);
        }
    }
    out
}

proptest! {
    #[test]
    fn oracle_rows_live_on_the_allowed_set(seed in any::<u64>(), which in 0usize..8, side_a in any::<bool>()) {
        let tax = &taxonomies()[which];
        let side = if side_a { Side::A } else { Side::B };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..8);
        let observed = random_observed(&mut rng, tax, side, n);
        let aux = logits(seed, n, tax.side(side.other()).num_tags(), 5.0);
        let oracle = build_oracle(tax, side, &observed, aux.view()).unwrap();
        for (row, &obs) in oracle.tokens.iter().zip(&observed) {
            let allowed = tax.allowed_tags(side, obs);
            prop_assert!((row.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (t, &p) in row.probs.iter().enumerate() {
                prop_assert!(p >= 0.0);
                if !allowed.contains(&t) {
                    prop_assert_eq!(p, 0.0);
                }
            }
            if tax.is_disjoint() && obs == Tag::O {
                // nothing of the observing side can hide behind an O
                for (t, &p) in row.probs.iter().enumerate() {
                    if p > 0.0 && t != 0 {
                        prop_assert_eq!(tax.project_tag(Tag::from_index(t), side), Tag::O);
                    }
                }
            }
        }
    }

    #[test]
    fn every_loss_is_non_negative(seed in any::<u64>(), which in 0usize..8) {
        let tax = &taxonomies()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..8);
        let obs_a = random_observed(&mut rng, tax, Side::A, n);
        let obs_b = random_observed(&mut rng, tax, Side::B, n);
        let z = logits(seed ^ 1, n, tax.num_final_tags(), 8.0);
        let aux_b = logits(seed ^ 2, n, tax.side_b().num_tags(), 5.0);
        let aux_a = logits(seed ^ 3, n, tax.side_a().num_tags(), 5.0);
        let oracle = build_oracle(tax, Side::A, &obs_a, aux_b.view()).unwrap();
        let mut all = vec![plm_targets(&oracle), plm_kl_targets(&oracle)];
        all.push(cl_targets(tax, &obs_b, aux_a.view(), ClVariant::ClPlusPlus).unwrap());
        for mode in [AmlTargets::Masked, AmlTargets::Allowed, AmlTargets::Determined] {
            all.push(aml_targets(tax, Side::A, &obs_a, mode));
        }
        if tax.is_disjoint() {
            all.push(naive_targets(tax, Side::A, &obs_a).unwrap());
        }
        for targets in all {
            let out = sequence_loss(z.view(), &targets).unwrap();
            prop_assert!(out.loss >= -1e-12, "negative loss {}", out.loss);
            prop_assert!(out.grad.iter().all(|g| g.is_finite()));
        }
    }

    #[test]
    fn softmax_loss_gradients_sum_to_zero(seed in any::<u64>(), k in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = logits(seed, 1, k, 6.0);
        let g = random_dist(&mut rng, k, true);
        for target in [TokenTarget::Hard(rng.gen_range(0..k)), TokenTarget::Partial(g.clone()), TokenTarget::Distill(g)] {
            let out = sequence_loss(z.view(), &[target]).unwrap();
            prop_assert!(out.grad.sum().abs() < 1e-12);
        }
    }

    #[test]
    fn soft_losses_match_their_definitions(seed in any::<u64>(), k in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z: Vec<f64> = (0..k).map(|_| rng.gen_range(-6.0..6.0)).collect();
        let f = softmax(&z);
        let g = random_dist(&mut rng, k, true);
        let zz = Array2::from_shape_vec((1, k), z).unwrap();
        let plm = sequence_loss(zz.view(), &[TokenTarget::Partial(g.clone())]).unwrap().loss;
        let kl = sequence_loss(zz.view(), &[TokenTarget::Distill(g.clone())]).unwrap().loss;
        prop_assert!((plm - plm_ref(&f, &g)).abs() < 1e-9);
        prop_assert!((kl - kl_ref(&f, &g)).abs() < 1e-9);
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for tax in taxonomies() {
        let model = random_model(&mut rng, tax.space().names().clone(), 10);
        let n = 6;
        let ids = model.vocab.ids(&words(n, &mut rng, 12));
        let obs_a = random_observed(&mut rng, &tax, Side::A, n);
        let aux = logits(rng.gen(), n, tax.side_b().num_tags(), 3.0);
        let oracle = build_oracle(&tax, Side::A, &obs_a, aux.view()).unwrap();
        for targets in [
            plm_targets(&oracle),
            plm_kl_targets(&oracle),
            aml_targets(&tax, Side::A, &obs_a, AmlTargets::Masked),
        ] {
            let (ok, total) = finite_difference_check(&model, &[(ids.as_slice(), targets.as_slice())], 1e-4);
            assert!(ok as f64 >= 0.99 * total as f64, "{ok}/{total}");
        }
    }
}

#[test]
fn degenerate_support_is_clamped() {
    // g only on a tag the model gives probability 0
    let z = Array2::from_shape_vec((1, 3), vec![0.0, 0.0, f64::NEG_INFINITY]).unwrap();
    let out = sequence_loss(z.view(), &[TokenTarget::Partial(vec![0.0, 0.0, 1.0])]).unwrap();
    assert_eq!(out.loss, LOG_CLAMP);
    assert_eq!(out.clamped, 1);
    assert!((LOG_CLAMP - (-(1e-12f64).ln())).abs() < 1e-12);
}

#[test]
fn special_values() {
    let k = 5;
    let uniform = Array2::<f64>::zeros((1, k));
    let hard = sequence_loss(uniform.view(), &[TokenTarget::Hard(2)]).unwrap().loss;
    assert!((hard - (k as f64).ln()).abs() < 1e-12);
    let g = vec![0.2; k];
    let kl = sequence_loss(uniform.view(), &[TokenTarget::Distill(g)]).unwrap().loss;
    assert!(kl.abs() < 1e-12);
    let saturated = Array2::from_shape_vec((1, 3), vec![-800.0, 800.0, -800.0]).unwrap();
    assert_eq!(sequence_loss(saturated.view(), &[TokenTarget::Hard(1)]).unwrap().loss, 0.0);
}
