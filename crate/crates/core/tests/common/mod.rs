//! Random instance generators shared by the integration suites.
#![allow(dead_code)]

use parley::belief::Belief;
use parley::conversation::{ConversationProtocol, Round};
use parley::game::Game;
use parley::mediator::MediatorProtocol;
use parley::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Distribution over `len` outcomes with small integer weights.
pub fn distribution(rng: &mut ChaCha8Rng, len: usize, max_weight: i64, allow_zero: bool) -> Vec<Rational> {
    let low = if allow_zero { 0 } else { 1 };
    let mut w: Vec<i64> = (0..len).map(|_| rng.gen_range(low..=max_weight)).collect();
    if w.iter().all(|&v| v == 0) {
        w[rng.gen_range(0..len)] = 1;
    }
    let total: i64 = w.iter().sum();
    w.into_iter().map(|v| Rational::new(v, total)).collect()
}

pub fn belief(rng: &mut ChaCha8Rng, len: usize, allow_zero: bool) -> Belief {
    Belief::new(distribution(rng, len, 4, allow_zero)).expect("random distribution")
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}{k}")).collect()
}

/// A conversation where every non-silent move has a random kernel.
pub fn conversation(rng: &mut ChaCha8Rng, na: usize, nb: usize, rounds: usize) -> ConversationProtocol {
    let round_list: Vec<Round> = (0..rounds)
        .map(|_| Round {
            alice: names("a", rng.gen_range(1..=2)),
            bob: names("b", rng.gen_range(1..=2)),
        })
        .collect();
    let mut c = ConversationProtocol::new(na, nb, round_list.clone()).expect("valid rounds");
    let mut frontier: Vec<Vec<String>> = vec![Vec::new()];
    for depth in 0..2 * rounds {
        let round = &round_list[depth / 2];
        let (signals, senders) = if depth % 2 == 0 {
            (&round.alice, na)
        } else {
            (&round.bob, nb)
        };
        let mut next = Vec::new();
        for h in frontier {
            if signals.len() > 1 {
                let rows = (0..senders)
                    .map(|_| distribution(rng, signals.len(), 3, true))
                    .collect();
                c.set_kernel(h.clone(), rows).expect("valid kernel");
            }
            for s in signals {
                let mut h2 = h.clone();
                h2.push(s.clone());
                next.push(h2);
            }
        }
        frontier = next;
    }
    c
}

pub fn mediator(rng: &mut ChaCha8Rng, na: usize, nb: usize, signals: usize) -> MediatorProtocol {
    let kernel = (0..na)
        .map(|_| (0..nb).map(|_| distribution(rng, signals, 3, true)).collect())
        .collect();
    MediatorProtocol::new(names("s", signals), kernel).expect("valid mediator")
}

pub fn game(rng: &mut ChaCha8Rng, na: usize, nb: usize, actions: usize) -> Game {
    let mut table = || -> Vec<Vec<Vec<Rational>>> {
        (0..na)
            .map(|_| {
                (0..nb)
                    .map(|_| (0..actions).map(|_| Rational::from(rng.gen_range(-3i64..=3))).collect())
                    .collect()
            })
            .collect()
    };
    let (ua, ub) = (table(), table());
    let acts = names("r", actions);
    Game::new(
        names("A", na),
        names("B", nb),
        belief(rng, na, false),
        belief(rng, nb, false),
        acts.clone(),
        ua,
        ub,
        acts,
    )
    .expect("random game")
}
