mod common;

use common::*;
use oddindex::circle::CircleModel;
use oddindex::circle::MatrixLoop;
use oddindex::equispec::{GroupAction, RepElement};
use oddindex::linalg::{c, CMatrix};
use oddindex::specflow::{
    choose_level, homotopy_invariance_check, spectral_flow, spectral_flow_per_character, FlowConfig, OperatorFamily,
    DEFAULT_GRID,
};
use proptest::prelude::*;

fn random_path(seed: u64, order: usize, dim: usize) -> OperatorFamily {
    let mut rng = rng(seed);
    let (action, frame, chars) = random_action(&mut rng, order, dim);
    let a = random_equivariant(&mut rng, &frame, &chars) * c(3.0, 0.0);
    let b = random_equivariant(&mut rng, &frame, &chars) * c(3.0, 0.0);
    OperatorFamily::linear(a, b, action, DEFAULT_GRID).unwrap()
}

#[test]
fn level_choice_examples() {
    let action = GroupAction::trivial(3);
    let cfg = FlowConfig::default();
    let a = diag(&[0.0, 1.0, -2.0]);
    let fam = OperatorFamily::linear(a.clone(), diag(&[1.0, 2.0, -1.0]), action.clone(), 5).unwrap();
    assert_eq!(choose_level(&fam, &cfg).unwrap(), -0.5);
    let fam = OperatorFamily::linear(diag(&[2.0, -2.0, 3.0]), diag(&[2.0, 4.0, -3.0]), action.clone(), 5).unwrap();
    assert_eq!(choose_level(&fam, &cfg).unwrap(), 0.0);
    let zero = CMatrix::zeros(3, 3);
    let fam = OperatorFamily::linear(zero.clone(), zero, action, 5).unwrap();
    assert!(choose_level(&fam, &cfg).is_err());
}

#[test]
fn circle_examples() {
    let model = CircleModel::new(MatrixLoop::monomial(3), 32, 1).unwrap();
    let flow = spectral_flow(&model.d_path(DEFAULT_GRID).unwrap(), &FlowConfig::default()).unwrap();
    assert_eq!(flow.scalar_flow, 3);
    assert_eq!(flow.level, -0.5);

    let model = CircleModel::new(MatrixLoop::monomial(2), 24, 2).unwrap();
    let flow = spectral_flow(&model.d_path(DEFAULT_GRID).unwrap(), &FlowConfig::default()).unwrap();
    assert_eq!(flow.equivariant_flow, RepElement::new(vec![1, 1]).unwrap());
}

#[test]
fn constant_family_has_zero_flow() {
    let d = diag(&[1.0, -1.0, 0.5]);
    let fam = OperatorFamily::linear(d.clone(), d, GroupAction::trivial(3), 9).unwrap();
    let flow = spectral_flow(&fam, &FlowConfig::default()).unwrap();
    assert_eq!(flow.scalar_flow, 0);
    assert!(flow.equivariant_flow.is_zero());
}

#[test]
fn homotopy_check_rejects_different_endpoints() {
    let action = GroupAction::trivial(2);
    let a = OperatorFamily::linear(diag(&[1.0, -1.0]), diag(&[2.0, 1.0]), action.clone(), 9).unwrap();
    let b = OperatorFamily::linear(diag(&[1.0, -1.0]), diag(&[2.0, 3.0]), action, 9).unwrap();
    assert!(homotopy_invariance_check(&a, &b, &FlowConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalar_flow_is_dimension_of_equivariant_flow(seed in any::<u64>(), order in 1usize..4, dim in 4usize..9) {
        let fam = random_path(seed, order, dim);
        let flow = spectral_flow(&fam, &FlowConfig::default()).unwrap();
        prop_assert_eq!(flow.scalar_flow, flow.equivariant_flow.dimension());
        let crossings: i64 = flow.crossings.iter().map(|x| x.net).sum();
        prop_assert_eq!(crossings, flow.scalar_flow);
    }

    #[test]
    fn reversal_negates_flow(seed in any::<u64>(), order in 1usize..4) {
        let fam = random_path(seed, order, 6);
        let cfg = FlowConfig::default();
        let forward = spectral_flow(&fam, &cfg).unwrap();
        let back = spectral_flow_per_character(&fam.reversed(), forward.level, &cfg).unwrap();
        prop_assert_eq!(back.equivariant_flow, -&forward.equivariant_flow);
    }

    #[test]
    fn flow_is_additive_under_concatenation(seed in any::<u64>(), order in 1usize..4) {
        let fam = random_path(seed, order, 6);
        let cfg = FlowConfig::default();
        let whole = spectral_flow(&fam, &cfg).unwrap();
        let level = whole.level;
        let mid = fam.at(0.5).unwrap();
        let margin = oddindex::linalg::eigvalsh(&mid).iter().map(|l| (l - level).abs()).fold(f64::INFINITY, f64::min);
        prop_assume!(margin > cfg.level_margin);
        let first = spectral_flow_per_character(&fam.restricted(0.0, 0.5, DEFAULT_GRID).unwrap(), level, &cfg).unwrap();
        let second = spectral_flow_per_character(&fam.restricted(0.5, 1.0, DEFAULT_GRID).unwrap(), level, &cfg).unwrap();
        prop_assert_eq!(&first.equivariant_flow + &second.equivariant_flow, whole.equivariant_flow);
    }

    #[test]
    fn flow_equals_endpoint_count_difference(seed in any::<u64>(), order in 1usize..4) {
        let fam = random_path(seed, order, 7);
        let flow = spectral_flow(&fam, &FlowConfig::default()).unwrap();
        let count = |d: &CMatrix, j: usize| {
            oddindex::linalg::eigvalsh(&fam.action().compress(j, d)).iter().filter(|&&l| l < flow.level).count() as i64
        };
        for j in 0..order {
            prop_assert_eq!(flow.equivariant_flow.coeff(j), count(fam.start(), j) - count(fam.end(), j));
        }
    }
}
