use std::sync::Arc;

use hidden_matching::analysis::{
    brute_force_classical_value, exact_win_probability, exact_win_probability_given,
    fourier_report, local_search_classical_value, mc_win_probability, Condition, Player,
};
use hidden_matching::classical::{
    comm_from_nonlocal, joint_outcomes, nonlocal_from_comm, DeterministicStrategyPair,
    MajorityProtocol, TableProtocol,
};
use hidden_matching::games::{GameInstance, GameVariant};
use hidden_matching::model::{Bitstring, FamilyKind, Index, Matching, MatchingFamily};
use hidden_matching::quantum::{hm_quantum_distribution, hmnl_quantum_distribution};
use hidden_matching::rational::{half, ratio, Rational};
use hidden_matching::Caps;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn game(n: usize, variant: GameVariant) -> GameInstance {
    GameInstance::uniform(n, variant, FamilyKind::Full).unwrap()
}

fn exact(instance: &GameInstance, player: &Player) -> Rational {
    exact_win_probability(instance, player, "p", &Caps::default())
        .unwrap()
        .winning_probability
        .exact()
        .unwrap()
        .clone()
}

fn size() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(8), Just(16), Just(32)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sampled_matchings_are_perfect(n in size(), seed: u64) {
        let fam = MatchingFamily::new(n, FamilyKind::Full).unwrap();
        let m = fam.sample(&mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(m.edges().len(), n / 2);
        for v in 0..n as u32 {
            let p = m.partner(Index(v));
            prop_assert_ne!(p, Index(v));
            prop_assert_eq!(m.partner(p), Index(v));
        }
        prop_assert_eq!(Matching::new(n, m.edges().to_vec()).unwrap(), m);
    }

    #[test]
    fn quantum_protocols_never_lose(n in size(), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Bitstring::random(n, &mut rng);
        let m = MatchingFamily::new(n, FamilyKind::Full).unwrap().sample(&mut rng).unwrap();
        let nl = hmnl_quantum_distribution(&x, &m).unwrap();
        let cm = hm_quantum_distribution(&x, &m).unwrap();
        let one = Rational::from_integer(1.into());
        prop_assert_eq!(nl.win_probability(&game(n, GameVariant::HmNonlocal), &x, &m).unwrap(), one.clone());
        prop_assert_eq!(cm.win_probability(&game(n, GameVariant::HmComm), &x, &m).unwrap(), one.clone());
        let total: Rational = nl.support().iter().map(|w| w.probability.clone()).sum();
        prop_assert_eq!(total, one);
    }

    #[test]
    fn bitstring_text_round_trips(n in 1usize..=64, bits: u64) {
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let b = Bitstring::new(bits & mask, n).unwrap();
        prop_assert_eq!(Bitstring::parse(&b.to_string()).unwrap(), b);
    }

    #[test]
    fn index_binary_round_trips(v in 0u32..1024) {
        let i = Index(v);
        prop_assert_eq!(Index::parse_binary(&i.to_binary(10)).unwrap(), i);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn composition_identity(seed: u64, c in 1usize..=3) {
        let caps = Caps::default();
        let p = TableProtocol::random(4, FamilyKind::Full, c, &caps, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let vp = exact(&game(4, GameVariant::HmComm), &Player::comm(p.clone()));
        let vs = exact(&game(4, GameVariant::HmNonlocal), &Player::simulated(p));
        let scale = ratio(1, 1 << c);
        prop_assert_eq!(vs, &scale * &vp + (Rational::from_integer(1.into()) - &scale) * half());
    }

    #[test]
    fn reduction_preserves_value(seed: u64, n in prop_oneof![Just(2usize), Just(4)]) {
        let caps = Caps::default();
        let pair = DeterministicStrategyPair::random(n, FamilyKind::Full, &caps, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let reduced = exact(&game(n, GameVariant::HmComm), &Player::comm(comm_from_nonlocal(&pair)));
        let direct = exact(&game(n, GameVariant::HmNonlocal), &Player::Pair(pair));
        prop_assert_eq!(reduced, direct);
    }

    #[test]
    fn simulated_strategy_is_no_signaling(seed: u64) {
        // Alice's marginal over outputs cannot depend on Bob's matching.
        let caps = Caps::default();
        let p = TableProtocol::random(4, FamilyKind::Full, 1, &caps, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let s = nonlocal_from_comm(p);
        let fam = MatchingFamily::new(4, FamilyKind::Full).unwrap();
        for x in Bitstring::all(4) {
            let marginals: Vec<_> = fam.members().unwrap().iter().map(|m| {
                let mut alice = std::collections::BTreeMap::<Index, Rational>::new();
                for (o, pr) in joint_outcomes(&s, &x, m).unwrap() {
                    if let hidden_matching::games::Outcome::Nonlocal { a, .. } = o {
                        *alice.entry(a).or_default() += pr;
                    }
                }
                alice
            }).collect();
            prop_assert!(marginals.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn fourier_checks_hold(seed: u64, c in 1usize..=3) {
        let caps = Caps::default();
        let p = TableProtocol::random(4, FamilyKind::Full, c, &caps, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let r = fourier_report(&game(4, GameVariant::HmComm), Arc::new(p), "random", &caps, 0, 0).unwrap();
        prop_assert!(r.checks.all());
        prop_assert!(r.entropy <= c as f64 + 1e-12);
    }

    #[test]
    fn best_guess_tables_pass_the_chain(seed: u64, c in 1usize..=3) {
        // Adversarial: Bob answers with the optimal guess for an arbitrary partition.
        let caps = Caps::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let messages = (0..16).map(|_| rand::Rng::random_range(&mut rng, 0..1u32 << c)).collect();
        let fam = MatchingFamily::new(4, FamilyKind::Full).unwrap();
        let p = TableProtocol::best_guess(fam, c, messages).unwrap();
        let r = fourier_report(&game(4, GameVariant::HmComm), Arc::new(p), "best", &caps, 0, 0).unwrap();
        prop_assert!(r.checks.all());
    }

    #[test]
    fn table_json_round_trips(seed: u64, c in 1usize..=3) {
        let caps = Caps::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = TableProtocol::random(4, FamilyKind::Full, c, &caps, &mut rng).unwrap();
        prop_assert_eq!(TableProtocol::from_json(&p.to_json()).unwrap(), p);
        let s = DeterministicStrategyPair::random(4, FamilyKind::Full, &caps, &mut rng).unwrap();
        prop_assert_eq!(DeterministicStrategyPair::from_json(&s.to_json()).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn exact_and_monte_carlo_agree(seed: u64, c in 1usize..=2) {
        let caps = Caps::default();
        let p = Player::comm(TableProtocol::random(4, FamilyKind::Full, c, &caps, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap());
        let g = game(4, GameVariant::HmComm);
        let truth = hidden_matching::rational::to_f64(&exact(&g, &p));
        let mc = mc_win_probability(&g, &p, "p", 50_000, seed).unwrap();
        prop_assert!(((mc.probability() - truth) / mc.std_error.unwrap().max(1e-9)).abs() < 5.0);
    }

    #[test]
    fn local_search_matches_brute_force(seed in 0u64..1000) {
        let caps = Caps::default();
        let g = game(4, GameVariant::HmNonlocal);
        let bf = brute_force_classical_value(&g, &caps).unwrap();
        let ls = local_search_classical_value(&g, 20, seed, None, &caps).unwrap();
        prop_assert_eq!(ls.exact_value(), bf.exact_value());
        prop_assert!(ls.stats.monotone);
    }
}

#[test]
fn off_event_is_exactly_half() {
    let caps = Caps::default();
    for (n, proto) in [
        (4, MajorityProtocol::with_prefix(4, 2, 2).unwrap()),
        (8, MajorityProtocol::with_prefix(8, 4, 2).unwrap()),
        (8, MajorityProtocol::with_prefix(8, 4, 4).unwrap()),
    ] {
        let g = game(n, GameVariant::HmComm);
        let r = exact_win_probability_given(&g, &Player::comm(proto.clone()), "m", &caps, &Condition::not_event_e(&proto)).unwrap();
        assert_eq!(r.winning_probability.exact().unwrap(), &half(), "n = {n}");
    }
}
