//! Either kind of protocol, reduced to its final public outcomes.

use crate::belief::{joint_from_outcomes, Belief, JointPosterior, Matrix};
use crate::conversation::{history_label, ConversationProtocol, DEFAULT_TRANSCRIPT_BUDGET};
use crate::error::Result;
use crate::game::Game;
use crate::mediator::MediatorProtocol;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Protocol {
    Mediator(MediatorProtocol),
    Conversation(ConversationProtocol),
}

/// A signal or complete transcript with its mass `P(θ_A, θ_B, outcome)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub label: String,
    pub matrix: Matrix,
}

impl Outcome {
    /// Alice's action at this outcome for each type with positive mass.
    pub fn actions(&self, game: &Game) -> Vec<Option<usize>> {
        (0..self.matrix.rows())
            .map(|x| {
                Belief::normalize(self.matrix.row(x))
                    .ok()
                    .map(|q_b| game.best_response(x, &q_b))
            })
            .collect()
    }
}

impl From<MediatorProtocol> for Protocol {
    fn from(m: MediatorProtocol) -> Self {
        Protocol::Mediator(m)
    }
}

impl From<ConversationProtocol> for Protocol {
    fn from(c: ConversationProtocol) -> Self {
        Protocol::Conversation(c)
    }
}

impl Protocol {
    pub fn types(&self) -> (usize, usize) {
        match self {
            Protocol::Mediator(m) => (m.types_a(), m.types_b()),
            Protocol::Conversation(c) => (c.types_a(), c.types_b()),
        }
    }

    pub fn outcomes(&self, prior_a: &Belief, prior_b: &Belief, budget: usize) -> Result<Vec<Outcome>> {
        Ok(match self {
            Protocol::Mediator(m) => m
                .outcome_matrices(prior_a, prior_b)?
                .into_iter()
                .map(|(label, matrix)| Outcome { label, matrix })
                .collect(),
            Protocol::Conversation(c) => c
                .simulate(prior_a, prior_b, budget)?
                .into_iter()
                .map(|t| Outcome {
                    label: history_label(&t.history),
                    matrix: t.matrix,
                })
                .collect(),
        })
    }

    pub fn induced_joint_posterior(&self, prior_a: &Belief, prior_b: &Belief, budget: usize) -> Result<JointPosterior> {
        let (na, nb) = self.types();
        let outcomes = self.outcomes(prior_a, prior_b, budget)?;
        joint_from_outcomes(na, nb, outcomes.iter().map(|o| &o.matrix))
    }

    /// Expected `(u_A, u_B)` when Alice best-responds to her final belief.
    pub fn expected_utilities(&self, game: &Game) -> Result<(crate::Rational, crate::Rational)> {
        let outcomes = self.outcomes(game.prior_a(), game.prior_b(), DEFAULT_TRANSCRIPT_BUDGET)?;
        Ok(expected_utilities(game, &outcomes))
    }
}

pub fn expected_utilities(game: &Game, outcomes: &[Outcome]) -> (crate::Rational, crate::Rational) {
    let mut ua = crate::Rational::zero();
    let mut ub = crate::Rational::zero();
    for o in outcomes {
        let acts = o.actions(game);
        for x in 0..game.num_a() {
            let Some(r) = acts[x] else { continue };
            for y in 0..game.num_b() {
                let p = o.matrix.get(x, y);
                if p.is_zero() {
                    continue;
                }
                ua += p * game.u_a(x, y, r);
                ub += p * game.u_b(x, y, r);
            }
        }
    }
    (ua, ub)
}
