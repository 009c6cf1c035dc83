//! Worked instances used by tests, the acceptance suite and the CLI.
//!
//! Binary type spaces use index 0 for the "high" type (`H`, `Prog`) and 1
//! for the "low" type (`L`, `Comm`).

use crate::belief::{Atom, Belief, JointPosterior};
use crate::conversation::{ConversationProtocol, Round};
use crate::design::{optimize, scheme_to_one_round_conversation, DesignProblem, IrConstraint, Objective};
use crate::feasibility::{SplitKind, SplitWitness, WitnessNode};
use crate::game::employer_candidate;
use crate::mediator::MediatorProtocol;
use crate::numeric::{rat, Rational};

fn bin(h: Rational) -> Belief {
    let l = Rational::one() - &h;
    Belief::new(vec![h, l]).expect("coordinate in [0, 1]")
}

/// Belief on a binary type space putting `n/d` on the first type.
pub fn binary(n: i64, d: i64) -> Belief {
    bin(rat(n, d))
}

/// The employer's two-signal mediator: `s1` is sent with probability 0, 1,
/// 2/3, 1 at the type pairs (Prog, Prog), (Prog, Comm), (Comm, Prog), (Comm, Comm).
pub fn signal_mediator() -> MediatorProtocol {
    let row = |p: Rational| {
        let q = Rational::one() - &p;
        vec![p, q]
    };
    MediatorProtocol::new(
        vec!["s1".into(), "s2".into()],
        vec![
            vec![row(rat(0, 1)), row(rat(1, 1))],
            vec![row(rat(2, 3)), row(rat(1, 1))],
        ],
    )
    .expect("rows are distributions")
}

fn rows(pairs: &[(i64, i64)]) -> Vec<Vec<Rational>> {
    // one binary distribution per sender type
    pairs.iter().map(|&(n, d)| vec![rat(n, d), rat(d - n, d)]).collect()
}

fn hist(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Two-round conversation over types {H, L} with uniform priors.
///
/// Alice first moves Bob's belief in `H` to 1/4 or 3/4; Bob answers by moving
/// Alice's belief to {0, 3/4} or {3/10, 9/10}; at the branch (up, hi) Alice
/// then reveals her type. Every other move is silent.
pub fn two_way_conversation() -> (ConversationProtocol, Belief, Belief) {
    let rounds = vec![
        Round::new(&["down", "up"], &["lo", "hi"]),
        Round::new(&["skip", "lo", "hi"], &["skip"]),
    ];
    let mut c = ConversationProtocol::new(2, 2, rounds).expect("valid rounds");
    c.set_kernel(vec![], rows(&[(1, 4), (3, 4)])).expect("valid kernel");
    c.set_kernel(hist(&["down"]), rows(&[(0, 1), (2, 3)]))
        .expect("valid kernel");
    c.set_kernel(hist(&["up"]), rows(&[(2, 5), (14, 15)]))
        .expect("valid kernel");
    let skip = vec![vec![rat(1, 1), rat(0, 1), rat(0, 1)]; 2];
    for h in [["down", "lo"], ["down", "hi"], ["up", "lo"]] {
        c.set_kernel(hist(&h), skip.clone()).expect("valid kernel");
    }
    let reveal = vec![
        vec![rat(0, 1), rat(0, 1), rat(1, 1)],
        vec![rat(0, 1), rat(1, 1), rat(0, 1)],
    ];
    c.set_kernel(hist(&["up", "hi"]), reveal).expect("valid kernel");
    (c, Belief::uniform(2), Belief::uniform(2))
}

/// The four-point target `(q_B(H), q_A(H))` ∈ {(1/4, 0), (1/4, 1), (1, 3/4), (3/4, 1/4)}
/// with probabilities 13/48, 5/16, 1/6, 1/4 under uniform priors.
pub fn si_points() -> Vec<(Belief, Belief, Rational)> {
    vec![
        (binary(1, 4), binary(0, 1), rat(13, 48)),
        (binary(1, 4), binary(1, 1), rat(5, 16)),
        (binary(1, 1), binary(3, 4), rat(1, 6)),
        (binary(3, 4), binary(1, 4), rat(1, 4)),
    ]
}

/// The merge tree behind [`si_points`]: the root splits into `q_A(H)` of 1/4
/// and 3/4, each reached by Bob merging a base point with a point on the
/// `q_B(H) = 1/4` segment.
pub fn si_witness() -> SplitWitness {
    let support: Vec<(Belief, Belief)> = si_points().into_iter().map(|(b, a, _)| (b, a)).collect();
    let leaf = |k: usize| WitnessNode::leaf(support[k].0.clone(), support[k].1.clone(), k, support.len());
    let low = WitnessNode::merge(SplitKind::A, vec![(rat(3, 4), leaf(0)), (rat(1, 4), leaf(1))]);
    let high = WitnessNode::merge(SplitKind::A, vec![(rat(1, 4), leaf(0)), (rat(3, 4), leaf(1))]);
    let left = WitnessNode::merge(SplitKind::B, vec![(rat(1, 2), low), (rat(1, 2), leaf(3))]);
    let right = WitnessNode::merge(SplitKind::B, vec![(rat(2, 3), high), (rat(1, 3), leaf(2))]);
    let root = WitnessNode::merge(SplitKind::A, vec![(rat(1, 2), left), (rat(1, 2), right)]);
    SplitWitness { support, root }
}

pub fn si_distribution() -> JointPosterior {
    JointPosterior::from_product_support(&si_points()).expect("valid distribution")
}

/// Two product-consistent atoms at `(3/4, 3/4)` and `(1/4, 1/4)`, each with
/// probability 1/2, whose type marginal is not the uniform prior.
pub fn imp_distribution() -> JointPosterior {
    JointPosterior::from_product_support(&[
        (binary(3, 4), binary(3, 4), rat(1, 2)),
        (binary(1, 4), binary(1, 4), rat(1, 2)),
    ])
    .expect("valid distribution")
}

/// The joint posterior of the employer's two-signal mediator.
pub fn mediator_dec_distribution() -> JointPosterior {
    let atom = |a, b, q_b: Belief, q_a: Belief, prob| Atom { a, b, q_b, q_a, prob };
    let half = binary(1, 2);
    JointPosterior::new(
        2,
        2,
        vec![
            atom(0, 1, binary(0, 1), half.clone(), rat(1, 5)),
            atom(1, 0, half.clone(), binary(0, 1), rat(1, 5)),
            atom(1, 1, half.clone(), half.clone(), rat(1, 5)),
            atom(0, 0, binary(1, 1), binary(3, 4), rat(3, 10)),
            atom(1, 0, binary(1, 1), binary(3, 4), rat(1, 10)),
        ],
    )
    .expect("valid distribution")
}

/// Alice announces her type, then Bob recommends the welfare-optimal
/// interim-IR action.
pub fn employer_interim_conversation() -> ConversationProtocol {
    let game = employer_candidate();
    let design = optimize(&DesignProblem {
        game: game.clone(),
        ir: IrConstraint::Interim,
        objective: Objective::Welfare,
    })
    .expect("employer design is feasible");
    scheme_to_one_round_conversation(&design.scheme, &game).expect("scheme matches the game")
}

pub fn employer_priors() -> (Belief, Belief) {
    (Belief::uniform(2), binary(3, 5))
}
