//! Values computed by an independent implementation and frozen here.

use hidden_matching::analysis::{
    exact_win_probability, exact_win_probability_given, mc_win_probability, Condition, Player,
};
use hidden_matching::classical::{
    event_e_probability, majority_block_protocol, uniform_rounding_advantage, MajorityProtocol,
};
use hidden_matching::games::{GameInstance, GameVariant};
use hidden_matching::model::{enumerate_bijective_xor_matchings, FamilyKind};
use hidden_matching::rational::{ratio, to_f64};
use hidden_matching::Caps;

fn game(n: usize, variant: GameVariant) -> GameInstance {
    GameInstance::uniform(n, variant, FamilyKind::Full).unwrap()
}

#[test]
fn bijective_xor_counts() {
    for (n, count) in [(2, 1), (4, 0), (8, 8), (16, 384)] {
        assert_eq!(enumerate_bijective_xor_matchings(n, 16).unwrap().len(), count, "n = {n}");
    }
}

#[test]
fn simulated_prefix_protocol_at_eight() {
    let p = Player::simulated(MajorityProtocol::with_prefix(8, 2, 1).unwrap());
    let r = exact_win_probability(&game(8, GameVariant::HmNonlocal), &p, "simulated", &Caps::default()).unwrap();
    assert_eq!(r.winning_probability.exact().unwrap(), &ratio(15, 28));
}

#[test]
fn majority_at_four_and_its_event() {
    let caps = Caps::default();
    let proto = majority_block_protocol(4, 2).unwrap();
    let comm = game(4, GameVariant::HmComm);
    let all = exact_win_probability(&comm, &Player::comm(proto.clone()), "m", &caps).unwrap();
    assert_eq!(all.winning_probability.exact().unwrap(), &ratio(2, 3));
    let on = exact_win_probability_given(&comm, &Player::comm(proto.clone()), "m", &caps, &Condition::event_e(&proto)).unwrap();
    assert_eq!(on.winning_probability.exact().unwrap(), &ratio(1, 1));
    assert_eq!(on.conditioned_on.unwrap().exact().unwrap(), &ratio(1, 3));
}

/// Exact values lie within four standard errors of the seeded estimates.
fn assert_close(estimate: f64, se: f64, truth: f64, what: &str) {
    let z = (estimate - truth) / se;
    assert!(z.abs() < 4.0, "{what}: estimate {estimate}, exact {truth}, z = {z}");
}

#[test]
fn majority_at_sixty_four() {
    let comm = game(64, GameVariant::HmComm);
    for (c, p) in [(1, ratio(989059, 1914668)), (4, ratio(1558619, 2872002)), (8, ratio(47581, 68381))] {
        let r = mc_win_probability(&comm, &Player::comm(majority_block_protocol(64, c).unwrap()), "m", 200_000, 0).unwrap();
        assert_close(r.probability(), r.std_error.unwrap(), to_f64(&p), &format!("c = {c}"));
    }
}

#[test]
fn majority_c8_seed0_golden() {
    let comm = game(64, GameVariant::HmComm);
    let r = mc_win_probability(&comm, &Player::comm(majority_block_protocol(64, 8).unwrap()), "m", 1_000_000, 0).unwrap();
    assert_eq!(r.wins, Some(695_331));
    assert!(r.ci_low.unwrap() < to_f64(&ratio(47581, 68381)) && to_f64(&ratio(47581, 68381)) < r.ci_high.unwrap());
}

#[test]
fn event_probabilities() {
    for (n, c, p) in [
        (16, 2, ratio(10, 39)),
        (64, 1, ratio(112800, 478667)),
        (64, 4, ratio(490472, 1436001)),
        (64, 8, ratio(26781, 68381)),
    ] {
        let e = event_e_probability(n, c, 200_000, 1).unwrap();
        assert_close(e.estimate, e.std_error, to_f64(&p), &format!("Pr[E] n = {n}, c = {c}"));
    }
}

#[test]
fn rounding_closed_form() {
    assert!((uniform_rounding_advantage(16) - 0.0858).abs() < 1e-4);
}
