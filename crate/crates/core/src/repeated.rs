//! Playing a conversation over and over with discounting.
//!
//! A non-committed Bob may walk away at any node, forfeiting every later
//! copy. With enough patience the stream of committed values outweighs the
//! best single-copy payoff he could grab by quitting, so the repeated
//! protocol is non-committed IR while keeping the committed value per copy.

use serde::{Deserialize, Serialize};

use crate::belief::Side;
use crate::conversation::{history_label, ConversationProtocol, Node, Tree};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::ir::{node_values, Check, IrReport, Notion};
use crate::numeric::Rational;
use crate::protocol::Protocol;

/// What Bob receives in later copies after quitting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Punishment {
    /// Nothing: the relationship ends.
    #[default]
    ZeroFuture,
    /// No-communication play in every later copy.
    NoCommFuture,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepeatedSpec {
    pub game: Game,
    pub protocol: ConversationProtocol,
    pub delta: Rational,
    pub punishment: Punishment,
    /// Copies audited explicitly.
    pub horizon: usize,
}

fn check_delta(delta: &Rational) -> Result<()> {
    if delta.is_negative() || *delta >= Rational::one() {
        return Err(Error::OutOfUnitInterval { value: delta.clone() });
    }
    Ok(())
}

/// Bob's committed value `u*_B` from one copy.
pub fn committed_value(game: &Game, protocol: &ConversationProtocol, budget: usize) -> Result<Rational> {
    let outcomes = Protocol::Conversation(protocol.clone()).outcomes(game.prior_a(), game.prior_b(), budget)?;
    Ok(crate::protocol::expected_utilities(game, &outcomes).1)
}

/// Nodes where quitting is a real option: the root and every node where
/// someone still moves. A complete transcript is the next copy's root.
fn decision_nodes(tree: &Tree) -> impl Iterator<Item = (usize, &Node)> {
    tree.nodes
        .iter()
        .enumerate()
        .filter(|(id, n)| *id == 0 || n.mover.is_some())
}

/// `ū_B`: the most any Bob type gets by quitting at some reachable node,
/// with Alice best-responding to her belief there.
pub fn quit_ceiling(game: &Game, protocol: &ConversationProtocol, budget: usize) -> Result<Rational> {
    let tree = protocol.explore(game.prior_a(), game.prior_b(), budget)?;
    let values = node_values(game, Side::B, &tree);
    let mut best: Option<Rational> = None;
    for (id, _) in decision_nodes(&tree) {
        for (m, q) in values.mass[id].iter().zip(&values.quit[id]) {
            if m.is_positive() {
                let v = q / m;
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    }
    best.ok_or_else(|| Error::Invariant("protocol reaches no node with positive mass".into()))
}

/// Smallest discount factor at which continuing beats quitting everywhere,
/// `δ* = 1 − u*_B/ū_B`, clamped to `[0, 1)`.
pub fn delta_threshold(game: &Game, protocol: &ConversationProtocol, budget: usize) -> Result<Rational> {
    let committed = committed_value(game, protocol, budget)?;
    if !committed.is_positive() {
        return Err(Error::NonPositiveCommittedValue(committed));
    }
    let ceiling = quit_ceiling(game, protocol, budget)?;
    if !ceiling.is_positive() {
        return Ok(Rational::zero());
    }
    let d = Rational::one() - committed / ceiling;
    Ok(if d.is_negative() { Rational::zero() } else { d })
}

/// `Σ_{i<horizon} δ^i·u + δ^horizon·u/(1−δ)` for both players' committed values.
pub fn committed_super_value(spec: &RepeatedSpec, budget: usize) -> Result<(Rational, Rational)> {
    check_delta(&spec.delta)?;
    let outcomes =
        Protocol::Conversation(spec.protocol.clone()).outcomes(spec.game.prior_a(), spec.game.prior_b(), budget)?;
    let (ua, ub) = crate::protocol::expected_utilities(&spec.game, &outcomes);
    let mut factor = Rational::zero();
    let mut power = Rational::one();
    for _ in 0..spec.horizon {
        factor += &power;
        power *= &spec.delta;
    }
    factor += power / (Rational::one() - &spec.delta);
    Ok((ua * &factor, ub * factor))
}

/// Audits every non-terminal node of the first `horizon` copies.
///
/// Continuing is valued at the committed stream `u*_B/(1−δ)` from the start
/// of the copy. Quitting yields the node's quit value plus, under
/// [`Punishment::NoCommFuture`], the no-communication value in every later
/// copy. Values are discounted to the start of their own copy; the common
/// factor `δ^(i−1)` would not change any comparison. A leaf of one copy is
/// the root of the next, so leaves are not checked separately.
pub fn audit_repeated_ir(spec: &RepeatedSpec, budget: usize) -> Result<IrReport> {
    check_delta(&spec.delta)?;
    if spec.horizon == 0 {
        return Err(Error::InvalidProtocol("horizon must be at least 1".into()));
    }
    let game = &spec.game;
    let tree = spec.protocol.explore(game.prior_a(), game.prior_b(), budget)?;
    if tree.nodes.len().saturating_mul(spec.horizon) > budget {
        return Err(Error::BudgetExceeded {
            limit: budget,
            during: "auditing repeated copies",
        });
    }
    let values = node_values(game, Side::B, &tree);
    let committed = committed_value(game, &spec.protocol, budget)?;
    let one = Rational::one();
    let tail = &spec.delta / (&one - &spec.delta);
    let stream = &committed / (&one - &spec.delta);
    let r0 = game.no_comm_profile();
    let no_comm: Vec<Rational> = (0..game.num_b())
        .map(|y| game.prior_a().expect(|x| game.u_b(x, y, r0[x]).clone()))
        .collect();

    let mut checks = Vec::new();
    for copy in 1..=spec.horizon {
        for (id, node) in decision_nodes(&tree) {
            for y in 0..game.num_b() {
                let m = &values.mass[id][y];
                if m.is_zero() {
                    continue;
                }
                let mut quit = &values.quit[id][y] / m;
                if spec.punishment == Punishment::NoCommFuture {
                    quit += &tail * &no_comm[y];
                }
                checks.push(Check {
                    own_type: Some(y),
                    at: Some(format!("copy {copy}: {}", history_label(&node.history))),
                    lhs: stream.clone(),
                    rhs: quit,
                });
            }
        }
    }
    Ok(IrReport {
        notion: Notion::NonCommitted,
        agent: Side::B,
        baseline: r0,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversation::DEFAULT_TRANSCRIPT_BUDGET as BUDGET;
    use crate::fixtures::employer_interim_conversation;
    use crate::game::employer_candidate;
    use crate::numeric::rat;

    fn spec(delta: Rational, punishment: Punishment) -> RepeatedSpec {
        RepeatedSpec {
            game: employer_candidate(),
            protocol: employer_interim_conversation(),
            delta,
            punishment,
            horizon: 3,
        }
    }

    #[test]
    fn employer_threshold() {
        let g = employer_candidate();
        let c = employer_interim_conversation();
        assert_eq!(committed_value(&g, &c, BUDGET).unwrap(), rat(7, 5));
        assert_eq!(quit_ceiling(&g, &c, BUDGET).unwrap(), rat(2, 1));
        assert_eq!(delta_threshold(&g, &c, BUDGET).unwrap(), rat(3, 10));
    }

    #[test]
    fn employer_audit_around_threshold() {
        assert!(audit_repeated_ir(&spec(rat(2, 5), Punishment::ZeroFuture), BUDGET)
            .unwrap()
            .pass());
        let r = audit_repeated_ir(&spec(rat(1, 5), Punishment::ZeroFuture), BUDGET).unwrap();
        let v: Vec<_> = r.violations().collect();
        assert!(v
            .iter()
            .any(|c| c.own_type == Some(1) && c.at.as_deref() == Some("copy 1: Prog")));
        let c = v
            .iter()
            .find(|c| c.at.as_deref() == Some("copy 1: Prog") && c.own_type == Some(1))
            .unwrap();
        assert_eq!((c.lhs.clone(), c.rhs.clone()), (rat(7, 4), rat(2, 1)));
    }

    #[test]
    fn copies_are_stationary() {
        for d in [rat(1, 5), rat(3, 10), rat(2, 5), rat(0, 1)] {
            let r = audit_repeated_ir(&spec(d, Punishment::ZeroFuture), BUDGET).unwrap();
            let verdict = |copy: usize| -> Vec<bool> {
                let prefix = format!("copy {copy}:");
                r.checks
                    .iter()
                    .filter(|c| c.at.as_deref().unwrap().starts_with(&prefix))
                    .map(Check::holds)
                    .collect()
            };
            assert_eq!(verdict(1), verdict(2));
        }
    }

    #[test]
    fn no_comm_punishment_is_harsher_on_the_protocol() {
        // quitting now also keeps the no-communication stream
        let at = |p| audit_repeated_ir(&spec(rat(2, 5), p), BUDGET).unwrap().pass();
        assert!(at(Punishment::ZeroFuture));
        assert!(!at(Punishment::NoCommFuture));
    }

    #[test]
    fn super_value_closed_form() {
        let s = spec(rat(2, 5), Punishment::ZeroFuture);
        let (ua, ub) = committed_super_value(&s, BUDGET).unwrap();
        assert_eq!(ub, rat(7, 5) / rat(3, 5));
        assert_eq!(ua, rat(3, 1) / rat(3, 5));
    }

    #[test]
    fn delta_out_of_range() {
        let s = spec(rat(1, 1), Punishment::ZeroFuture);
        assert!(matches!(
            audit_repeated_ir(&s, BUDGET),
            Err(Error::OutOfUnitInterval { .. })
        ));
    }

    #[test]
    fn silent_protocol_has_zero_threshold() {
        let g = employer_candidate();
        let c = ConversationProtocol::silent(2, 2);
        // the committed value is the no-communication value; the ceiling is the best type's
        let ceiling = quit_ceiling(&g, &c, BUDGET).unwrap();
        let committed = committed_value(&g, &c, BUDGET).unwrap();
        assert!(ceiling >= committed);
        let d = delta_threshold(&g, &c, BUDGET).unwrap();
        assert_eq!(d, Rational::one() - committed / ceiling);
    }
}
