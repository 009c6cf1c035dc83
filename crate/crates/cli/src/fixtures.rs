//! Example documents. The same files ship under `fixtures/` so they can be
//! used without the binary; a test keeps the two in step.

use parley::belief::Belief;
use parley::fixtures as core;
use parley::game::employer_candidate;
use parley::protocol::Protocol;

use crate::docs::{self, DistributionDocument, GameDocument, ProtocolDocument, WitnessDocument};

fn uniform_pair() -> (Belief, Belief) {
    (Belief::uniform(2), Belief::uniform(2))
}

fn distribution(j: &parley::belief::JointPosterior, (pa, pb): (Belief, Belief)) -> String {
    docs::to_canonical_json(&DistributionDocument::from_joint(j, &pa, &pb))
}

fn protocol(p: Protocol) -> String {
    docs::to_canonical_json(&ProtocolDocument::from_protocol(&p))
}

type Render = fn() -> String;

pub const FIXTURES: &[(&str, Render)] = &[
    ("employer-game", || {
        docs::to_canonical_json(&GameDocument::from_game(&employer_candidate()))
    }),
    ("employer-interim-conversation", || {
        protocol(core::employer_interim_conversation().into())
    }),
    ("signal-mediator", || protocol(core::signal_mediator().into())),
    ("two-way-conversation", || {
        protocol(core::two_way_conversation().0.into())
    }),
    ("si-distribution", || {
        distribution(&core::si_distribution(), uniform_pair())
    }),
    ("si-witness", || {
        docs::to_canonical_json(&WitnessDocument::new(core::si_witness()))
    }),
    ("imp-distribution", || {
        distribution(&core::imp_distribution(), uniform_pair())
    }),
    ("mediator-dec-distribution", || {
        distribution(&core::mediator_dec_distribution(), core::employer_priors())
    }),
];

pub fn render(name: &str) -> Option<String> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, f)| f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_way_priors_are_uniform() {
        let (_, pa, pb) = core::two_way_conversation();
        assert_eq!((pa, pb), uniform_pair());
    }

    #[test]
    fn every_fixture_parses_back() {
        for (name, f) in FIXTURES {
            let v: serde_json::Value = serde_json::from_str(&f()).unwrap();
            assert!(v["schema"].as_str().unwrap().starts_with("parley/"), "{name}");
        }
    }
}
