//! Individual-rationality audits.
//!
//! Every check compares a participant's value from following the protocol
//! (`lhs`) against the no-communication benchmark (`rhs`). Alice always acts
//! by best-responding to her belief at the point she stops. Checks are
//! reported for Bob by default; the same machinery audits Alice.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::{Belief, Matrix, Side};
use crate::conversation::{history_label, Tree, DEFAULT_TRANSCRIPT_BUDGET};
use crate::error::Result;
use crate::game::Game;
use crate::numeric::Rational;
use crate::protocol::{Outcome, Protocol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Notion {
    ExAnte,
    Interim,
    ExPost,
    NonCommitted,
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::ExAnte => "exante",
            Notion::Interim => "interim",
            Notion::ExPost => "expost",
            Notion::NonCommitted => "noncommitted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    /// The checked participant's own type, if the check is conditional on it.
    pub own_type: Option<usize>,
    /// Outcome label or node history, if the check is conditional on one.
    pub at: Option<String>,
    pub lhs: Rational,
    pub rhs: Rational,
}

impl Check {
    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrReport {
    pub notion: Notion,
    pub agent: Side,
    /// `r^0`, Alice's no-communication action per type.
    pub baseline: Vec<usize>,
    pub checks: Vec<Check>,
}

impl IrReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(Check::holds)
    }

    pub fn violations(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds())
    }
}

fn utility(game: &Game, agent: Side, x: usize, y: usize, r: usize) -> Rational {
    match agent {
        Side::A => game.u_a(x, y, r).clone(),
        Side::B => game.u_b(x, y, r).clone(),
    }
}

fn own_types(game: &Game, agent: Side) -> usize {
    match agent {
        Side::A => game.num_a(),
        Side::B => game.num_b(),
    }
}

fn own_prior(game: &Game, agent: Side) -> &Belief {
    match agent {
        Side::A => game.prior_a(),
        Side::B => game.prior_b(),
    }
}

/// `(x, y)` pairs for the agent's own type `t`.
fn pairs(game: &Game, agent: Side, t: usize) -> Vec<(usize, usize)> {
    match agent {
        Side::A => (0..game.num_b()).map(|y| (t, y)).collect(),
        Side::B => (0..game.num_a()).map(|x| (x, t)).collect(),
    }
}

/// Mass of the agent's own type `t` in `m`.
fn own_mass(m: &Matrix, agent: Side, t: usize) -> Rational {
    match agent {
        Side::A => m.row(t).iter().sum(),
        Side::B => m.col(t).iter().sum(),
    }
}

/// `Σ m(x, y)·u(x, y, act(x))` over the pairs of own type `t`.
fn weighted(game: &Game, agent: Side, t: usize, m: &Matrix, act: impl Fn(usize) -> Option<usize>) -> Rational {
    pairs(game, agent, t)
        .into_iter()
        .filter(|&(x, y)| !m.get(x, y).is_zero())
        .map(|(x, y)| {
            let r = act(x).expect("positive mass implies an action");
            m.get(x, y) * utility(game, agent, x, y, r)
        })
        .sum()
}

fn baseline_value(game: &Game, agent: Side, t: usize, m: &Matrix) -> Rational {
    let r0 = game.no_comm_profile();
    weighted(game, agent, t, m, |x| Some(r0[x]))
}

fn exante(game: &Game, agent: Side, outcomes: &[Outcome]) -> Vec<Check> {
    let prior = game.prior_product();
    let mut lhs = Rational::zero();
    let mut rhs = Rational::zero();
    for t in 0..own_types(game, agent) {
        rhs += baseline_value(game, agent, t, &prior);
        for o in outcomes {
            let acts = o.actions(game);
            lhs += weighted(game, agent, t, &o.matrix, |x| acts[x]);
        }
    }
    vec![Check {
        own_type: None,
        at: None,
        lhs,
        rhs,
    }]
}

fn interim(game: &Game, agent: Side, outcomes: &[Outcome]) -> Vec<Check> {
    let prior = game.prior_product();
    let mut checks = Vec::new();
    for t in 0..own_types(game, agent) {
        let p = own_prior(game, agent).get(t).clone();
        if p.is_zero() {
            continue;
        }
        let mut lhs = Rational::zero();
        for o in outcomes {
            let acts = o.actions(game);
            lhs += weighted(game, agent, t, &o.matrix, |x| acts[x]);
        }
        checks.push(Check {
            own_type: Some(t),
            at: None,
            lhs: lhs / &p,
            rhs: baseline_value(game, agent, t, &prior) / &p,
        });
    }
    checks
}

fn expost(game: &Game, agent: Side, outcomes: &[Outcome]) -> Vec<Check> {
    let mut checks = Vec::new();
    for o in outcomes {
        let acts = o.actions(game);
        for t in 0..own_types(game, agent) {
            let mass = own_mass(&o.matrix, agent, t);
            if mass.is_zero() {
                continue;
            }
            checks.push(Check {
                own_type: Some(t),
                at: Some(o.label.clone()),
                lhs: weighted(game, agent, t, &o.matrix, |x| acts[x]) / &mass,
                rhs: baseline_value(game, agent, t, &o.matrix) / &mass,
            });
        }
    }
    checks
}

fn node_actions(game: &Game, m: &Matrix) -> Vec<Option<usize>> {
    (0..m.rows())
        .map(|x| Belief::normalize(m.row(x)).ok().map(|q| game.best_response(x, &q)))
        .collect()
}

/// Per node and own type: (mass, value of continuing, value of quitting here),
/// both values unnormalized by the mass.
pub(crate) struct NodeValues {
    pub mass: Vec<Vec<Rational>>,
    pub cont: Vec<Vec<Rational>>,
    pub quit: Vec<Vec<Rational>>,
}

pub(crate) fn node_values(game: &Game, agent: Side, tree: &Tree) -> NodeValues {
    let n = tree.nodes.len();
    let k = own_types(game, agent);
    let mut cont = vec![vec![Rational::zero(); k]; n];
    let mut mass = cont.clone();
    let mut quit = cont.clone();
    for id in (0..n).rev() {
        let node = &tree.nodes[id];
        let acts = node_actions(game, &node.matrix);
        for t in 0..k {
            mass[id][t] = own_mass(&node.matrix, agent, t);
            quit[id][t] = weighted(game, agent, t, &node.matrix, |x| acts[x]);
        }
        if node.mover.is_none() {
            cont[id] = quit[id].clone();
        } else {
            let mut sum = vec![Rational::zero(); k];
            for &c in &node.children {
                for t in 0..k {
                    sum[t] += &cont[c][t];
                }
            }
            cont[id] = sum;
        }
    }
    NodeValues { mass, cont, quit }
}

fn noncommitted(game: &Game, agent: Side, protocol: &Protocol, budget: usize) -> Result<Vec<Check>> {
    let c = match protocol {
        Protocol::Mediator(_) => {
            let outcomes = protocol.outcomes(game.prior_a(), game.prior_b(), budget)?;
            return Ok(interim(game, agent, &outcomes));
        }
        Protocol::Conversation(c) => c,
    };
    let tree = c.explore(game.prior_a(), game.prior_b(), budget)?;
    let values = node_values(game, agent, &tree);
    let mut checks = Vec::new();
    for (id, node) in tree.nodes.iter().enumerate() {
        for t in 0..own_types(game, agent) {
            let m = &values.mass[id][t];
            if m.is_zero() {
                continue;
            }
            checks.push(Check {
                own_type: Some(t),
                at: Some(history_label(&node.history)),
                lhs: &values.cont[id][t] / m,
                rhs: &values.quit[id][t] / m,
            });
        }
    }
    Ok(checks)
}

/// Runs one IR notion for `agent`.
pub fn audit(game: &Game, protocol: &Protocol, notion: Notion, agent: Side, budget: usize) -> Result<IrReport> {
    let checks = match notion {
        Notion::NonCommitted => noncommitted(game, agent, protocol, budget)?,
        _ => {
            let outcomes = protocol.outcomes(game.prior_a(), game.prior_b(), budget)?;
            match notion {
                Notion::ExAnte => exante(game, agent, &outcomes),
                Notion::Interim => interim(game, agent, &outcomes),
                _ => expost(game, agent, &outcomes),
            }
        }
    };
    Ok(IrReport {
        notion,
        agent,
        baseline: game.no_comm_profile(),
        checks,
    })
}

pub fn exante_ir(game: &Game, protocol: &Protocol) -> Result<IrReport> {
    audit(game, protocol, Notion::ExAnte, Side::B, DEFAULT_TRANSCRIPT_BUDGET)
}

pub fn interim_ir(game: &Game, protocol: &Protocol) -> Result<IrReport> {
    audit(game, protocol, Notion::Interim, Side::B, DEFAULT_TRANSCRIPT_BUDGET)
}

pub fn expost_ir(game: &Game, protocol: &Protocol) -> Result<IrReport> {
    audit(game, protocol, Notion::ExPost, Side::B, DEFAULT_TRANSCRIPT_BUDGET)
}

pub fn noncommitted_interim_ir(game: &Game, protocol: &Protocol) -> Result<IrReport> {
    audit(game, protocol, Notion::NonCommitted, Side::B, DEFAULT_TRANSCRIPT_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversation::{ConversationProtocol, Round};
    use crate::fixtures;
    use crate::game::{bilateral_trade, employer_candidate};
    use crate::mediator::MediatorProtocol;
    use crate::numeric::rat;

    fn signal() -> Protocol {
        fixtures::signal_mediator().into()
    }

    /// Alice reveals her type, then Bob sends "hire"/"not-hire" recommendations
    /// that realize the optimal interim scheme.
    fn reveal_then_recommend() -> Protocol {
        let rounds = vec![Round::new(&["Prog", "Comm"], &["hire", "not-hire"])];
        let mut c = ConversationProtocol::new(2, 2, rounds).unwrap();
        c.set_kernel(vec![], vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]])
            .unwrap();
        c.set_kernel(
            vec!["Prog".into()],
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
        )
        .unwrap();
        c.set_kernel(
            vec!["Comm".into()],
            vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 1), rat(0, 1)]],
        )
        .unwrap();
        c.into()
    }

    #[test]
    fn signal_mediator_exante() {
        let r = exante_ir(&employer_candidate(), &signal()).unwrap();
        assert!(r.pass());
        assert_eq!(
            (r.checks[0].lhs.clone(), r.checks[0].rhs.clone()),
            (rat(7, 5), rat(1, 1))
        );
    }

    #[test]
    fn signal_mediator_interim() {
        let r = interim_ir(&employer_candidate(), &signal()).unwrap();
        assert!(r.pass());
        let pairs: Vec<(Rational, Rational)> = r.checks.iter().map(|c| (c.lhs.clone(), c.rhs.clone())).collect();
        assert_eq!(pairs, vec![(rat(5, 3), rat(1, 1)), (rat(1, 1), rat(1, 1))]);
    }

    #[test]
    fn signal_mediator_expost() {
        let r = expost_ir(&employer_candidate(), &signal()).unwrap();
        assert!(r.pass());
        // (Comm, s2) has probability zero
        assert_eq!(r.checks.len(), 3);
        let find = |t: usize, s: &str| {
            r.checks
                .iter()
                .find(|c| c.own_type == Some(t) && c.at.as_deref() == Some(s))
                .unwrap()
        };
        assert_eq!(
            (find(1, "s1").lhs.clone(), find(1, "s1").rhs.clone()),
            (rat(1, 1), rat(1, 1))
        );
        assert_eq!(
            (find(0, "s1").lhs.clone(), find(0, "s1").rhs.clone()),
            (rat(2, 1), rat(0, 1))
        );
        assert_eq!(
            (find(0, "s2").lhs.clone(), find(0, "s2").rhs.clone()),
            (rat(3, 2), rat(3, 2))
        );
    }

    #[test]
    fn uninformative_passes_with_equality() {
        let g = employer_candidate();
        let p: Protocol = MediatorProtocol::uninformative(2, 2).into();
        for notion in [Notion::ExAnte, Notion::Interim, Notion::ExPost, Notion::NonCommitted] {
            let r = audit(&g, &p, notion, Side::B, 10).unwrap();
            assert!(r.pass());
            assert!(r.checks.iter().all(|c| c.lhs == c.rhs), "{notion}");
        }
        let silent: Protocol = ConversationProtocol::silent(2, 2).into();
        assert!(noncommitted_interim_ir(&g, &silent).unwrap().pass());
    }

    #[test]
    fn revealing_bob_type_is_interim_ir_with_equality() {
        // both employer types then hire exactly the candidates they hired before on average
        let g = employer_candidate();
        let p: Protocol = MediatorProtocol::full_revelation(2, 2).into();
        let r = interim_ir(&g, &p).unwrap();
        assert!(r.pass());
        assert!(r.checks.iter().all(|c| c.lhs == c.rhs));
    }

    #[test]
    fn revealing_only_to_prog_employers_fails_interim() {
        let g = employer_candidate();
        let one = |k: usize| (0..3).map(|i| rat((i == k) as i64, 1)).collect::<Vec<_>>();
        let med = MediatorProtocol::new(
            vec!["p".into(), "c".into(), "none".into()],
            vec![vec![one(0), one(1)], vec![one(2), one(2)]],
        )
        .unwrap();
        let r = interim_ir(&g, &med.into()).unwrap();
        let v: Vec<&Check> = r.violations().collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].own_type, Some(1));
        assert_eq!((v[0].lhs.clone(), v[0].rhs.clone()), (rat(0, 1), rat(1, 1)));
    }

    #[test]
    fn bob_revealing_in_trade_fails_exante() {
        // seller value 0, buyer value 1/2 or 1: at the prior the seller posts 1/2
        let g = bilateral_trade(
            &[rat(0, 1)],
            &[rat(1, 2), rat(1, 1)],
            Belief::uniform(1),
            Belief::uniform(2),
        )
        .unwrap();
        let rounds = vec![Round::new(&["skip"], &["v0", "v1"])];
        let mut c = ConversationProtocol::new(1, 2, rounds).unwrap();
        c.set_kernel(
            vec!["skip".into()],
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
        )
        .unwrap();
        let r = exante_ir(&g, &c.into()).unwrap();
        assert_eq!(
            (r.checks[0].lhs.clone(), r.checks[0].rhs.clone()),
            (rat(0, 1), rat(1, 4))
        );
        assert!(!r.pass());
    }

    #[test]
    fn one_round_realization_fails_expost_and_noncommitted() {
        let g = employer_candidate();
        let p = reveal_then_recommend();
        let r = expost_ir(&g, &p).unwrap();
        let v: Vec<&Check> = r.violations().collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].at.as_deref(), Some("Prog|not-hire"));
        assert_eq!(v[0].own_type, Some(1));
        assert_eq!((v[0].lhs.clone(), v[0].rhs.clone()), (rat(0, 1), rat(2, 1)));
        assert!(interim_ir(&g, &p).unwrap().pass());

        let r = noncommitted_interim_ir(&g, &p).unwrap();
        let v: Vec<&Check> = r.violations().collect();
        assert!(v
            .iter()
            .any(|c| c.at.as_deref() == Some("Prog") && c.own_type == Some(1)));
        let c = v
            .iter()
            .find(|c| c.at.as_deref() == Some("Prog") && c.own_type == Some(1))
            .unwrap();
        assert_eq!((c.lhs.clone(), c.rhs.clone()), (rat(0, 1), rat(2, 1)));
    }

    #[test]
    fn constant_bob_utility_with_bob_sender_passes() {
        let g = employer_candidate();
        let flat = crate::game::Game::new(
            g.types_a().to_vec(),
            g.types_b().to_vec(),
            g.prior_a().clone(),
            g.prior_b().clone(),
            g.actions().to_vec(),
            g.util_a().clone(),
            vec![vec![vec![rat(1, 1); 2]; 2]; 2],
            g.tie_break(),
        )
        .unwrap();
        let rounds = vec![Round::new(&["skip"], &["b0", "b1"])];
        let mut c = ConversationProtocol::new(2, 2, rounds).unwrap();
        c.set_kernel(
            vec!["skip".into()],
            vec![vec![rat(1, 3), rat(2, 3)], vec![rat(1, 1), rat(0, 1)]],
        )
        .unwrap();
        assert!(noncommitted_interim_ir(&flat, &c.into()).unwrap().pass());
    }

    #[test]
    fn alice_is_always_rational() {
        let g = employer_candidate();
        for p in [
            signal(),
            reveal_then_recommend(),
            MediatorProtocol::full_revelation(2, 2).into(),
        ] {
            for notion in [Notion::ExAnte, Notion::Interim, Notion::ExPost, Notion::NonCommitted] {
                assert!(audit(&g, &p, notion, Side::A, 100).unwrap().pass());
            }
        }
    }
}
