//! Bayesian conversations: alternating, type-dependent public signals.
//!
//! Round `t` has Alice move first and Bob second. Kernels are stored per
//! history; a history with no stored kernel is only legal when the round's
//! signal set for the mover is a singleton (a silent move). Rows of Alice's
//! kernels are indexed by Alice's type and rows of Bob's by Bob's type, so a
//! kernel reading the other player's private type cannot be expressed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::belief::{check_distribution, joint_from_outcomes, Belief, JointPosterior, Matrix, Side};
use crate::error::{Error, Result};
use crate::numeric::Rational;

pub type History = Vec<String>;

pub const DEFAULT_TRANSCRIPT_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub alice: Vec<String>,
    pub bob: Vec<String>,
}

impl Round {
    pub fn new(alice: &[&str], bob: &[&str]) -> Round {
        Round {
            alice: alice.iter().map(|s| s.to_string()).collect(),
            bob: bob.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Kernel rows, one distribution over the move's signals per sender type.
pub type Kernel = Vec<Vec<Rational>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversationProtocol {
    types_a: usize,
    types_b: usize,
    rounds: Vec<Round>,
    alice: BTreeMap<History, Kernel>,
    bob: BTreeMap<History, Kernel>,
}

/// Human-readable transcript label; `-` for the empty history.
pub fn history_label(history: &[String]) -> String {
    if history.is_empty() {
        "-".to_string()
    } else {
        history.join("|")
    }
}

impl ConversationProtocol {
    /// A protocol with the given rounds and no kernels yet.
    pub fn new(types_a: usize, types_b: usize, rounds: Vec<Round>) -> Result<Self> {
        if types_a == 0 || types_b == 0 {
            return Err(Error::InvalidProtocol("empty type space".into()));
        }
        for (t, r) in rounds.iter().enumerate() {
            for set in [&r.alice, &r.bob] {
                if set.is_empty() {
                    return Err(Error::InvalidProtocol(format!(
                        "round {} has an empty signal set",
                        t + 1
                    )));
                }
                let mut sorted = set.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != set.len() {
                    return Err(Error::InvalidProtocol(format!("round {} repeats a signal", t + 1)));
                }
            }
        }
        Ok(ConversationProtocol {
            types_a,
            types_b,
            rounds,
            alice: BTreeMap::new(),
            bob: BTreeMap::new(),
        })
    }

    /// The zero-round protocol.
    pub fn silent(types_a: usize, types_b: usize) -> Self {
        ConversationProtocol::new(types_a, types_b, Vec::new()).expect("non-empty type spaces")
    }

    pub fn types_a(&self) -> usize {
        self.types_a
    }

    pub fn types_b(&self) -> usize {
        self.types_b
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn alice_kernels(&self) -> &BTreeMap<History, Kernel> {
        &self.alice
    }

    pub fn bob_kernels(&self) -> &BTreeMap<History, Kernel> {
        &self.bob
    }

    /// Who moves after `history`, or `None` once all rounds are played.
    pub fn mover(&self, history: &[String]) -> Option<Side> {
        if history.len() >= 2 * self.rounds.len() {
            None
        } else if history.len().is_multiple_of(2) {
            Some(Side::A)
        } else {
            Some(Side::B)
        }
    }

    /// Signal set available after `history`.
    pub fn signals_after(&self, history: &[String]) -> Option<&[String]> {
        let round = self.rounds.get(history.len() / 2)?;
        Some(match self.mover(history)? {
            Side::A => &round.alice,
            Side::B => &round.bob,
        })
    }

    fn check_history(&self, history: &[String]) -> Result<()> {
        if history.len() > 2 * self.rounds.len() {
            return Err(Error::InvalidProtocol(format!(
                "history `{}` is longer than the protocol",
                history_label(history)
            )));
        }
        for (i, s) in history.iter().enumerate() {
            let round = &self.rounds[i / 2];
            let set = if i % 2 == 0 { &round.alice } else { &round.bob };
            if !set.contains(s) {
                return Err(Error::UnknownLabel {
                    kind: "signal",
                    label: s.clone(),
                });
            }
        }
        Ok(())
    }

    /// Stores the mover's kernel at `history`.
    pub fn set_kernel(&mut self, history: History, rows: Kernel) -> Result<()> {
        self.check_history(&history)?;
        let side = self
            .mover(&history)
            .ok_or_else(|| Error::InvalidProtocol(format!("no move after `{}`", history_label(&history))))?;
        let signals = self.signals_after(&history).expect("mover exists").len();
        let types = match side {
            Side::A => self.types_a,
            Side::B => self.types_b,
        };
        if rows.len() != types {
            return Err(Error::InvalidProtocol(format!(
                "kernel at `{}` has {} rows, sender has {types} types",
                history_label(&history),
                rows.len()
            )));
        }
        for (t, row) in rows.iter().enumerate() {
            check_distribution(row, signals, || {
                format!("kernel at `{}`, type {t}", history_label(&history))
            })?;
        }
        match side {
            Side::A => self.alice.insert(history, rows),
            Side::B => self.bob.insert(history, rows),
        };
        Ok(())
    }

    /// The mover's kernel after `history`; silent moves yield a single column of ones.
    pub fn kernel_at(&self, history: &[String]) -> Result<Kernel> {
        let side = self
            .mover(history)
            .ok_or_else(|| Error::InvalidProtocol(format!("no move after `{}`", history_label(history))))?;
        let stored = match side {
            Side::A => self.alice.get(history),
            Side::B => self.bob.get(history),
        };
        if let Some(k) = stored {
            return Ok(k.clone());
        }
        let signals = self.signals_after(history).expect("mover exists");
        if signals.len() == 1 {
            let types = match side {
                Side::A => self.types_a,
                Side::B => self.types_b,
            };
            return Ok(vec![vec![Rational::one()]; types]);
        }
        Err(Error::InvalidProtocol(format!(
            "no kernel at reachable history `{}`",
            history_label(history)
        )))
    }

    fn check_priors(&self, prior_a: &Belief, prior_b: &Belief) -> Result<()> {
        if prior_a.len() != self.types_a || prior_b.len() != self.types_b {
            return Err(Error::InvalidProtocol("priors do not match the type spaces".into()));
        }
        Ok(())
    }

    /// `P(θ_A, θ_B, history)`; zero once the history becomes unreachable.
    pub fn reach_matrix(&self, history: &[String], prior_a: &Belief, prior_b: &Belief) -> Result<Matrix> {
        self.check_priors(prior_a, prior_b)?;
        self.check_history(history)?;
        let mut m = Matrix::product(prior_a, prior_b);
        for i in 0..history.len() {
            if m.is_zero() {
                break;
            }
            let prefix = &history[..i];
            let k = self.kernel_at(prefix)?;
            let s = self
                .signals_after(prefix)
                .expect("history checked")
                .iter()
                .position(|l| *l == history[i])
                .expect("history checked");
            let column: Vec<Rational> = k.iter().map(|row| row[s].clone()).collect();
            m = match self.mover(prefix).expect("history checked") {
                Side::A => m.scale_rows(&column),
                Side::B => m.scale_cols(&column),
            };
        }
        Ok(m)
    }

    /// Bob's belief about Alice and Alice's belief about Bob after `history`.
    pub fn posteriors_at(&self, history: &[String], prior_a: &Belief, prior_b: &Belief) -> Result<(Belief, Belief)> {
        let m = self.reach_matrix(history, prior_a, prior_b)?;
        if m.is_zero() {
            return Err(Error::ZeroMass(format!(
                "history `{}` has probability zero",
                history_label(history)
            )));
        }
        Ok((Belief::normalize(m.row_sums())?, Belief::normalize(m.col_sums())?))
    }

    /// Every positive-probability node, depth first in signal order.
    pub fn explore(&self, prior_a: &Belief, prior_b: &Belief, budget: usize) -> Result<Tree> {
        self.check_priors(prior_a, prior_b)?;
        let mut tree = Tree { nodes: Vec::new() };
        let mut leaves = 0usize;
        self.grow(
            &mut tree,
            None,
            Vec::new(),
            Matrix::product(prior_a, prior_b),
            Rational::one(),
            budget,
            &mut leaves,
        )?;
        Ok(tree)
    }

    #[allow(clippy::too_many_arguments)]
    fn grow(
        &self,
        tree: &mut Tree,
        parent: Option<usize>,
        history: History,
        matrix: Matrix,
        edge_prob: Rational,
        budget: usize,
        leaves: &mut usize,
    ) -> Result<()> {
        let id = tree.nodes.len();
        let mover = self.mover(&history);
        tree.nodes.push(Node {
            history: history.clone(),
            matrix: matrix.clone(),
            parent,
            children: Vec::new(),
            mover,
            edge_prob,
        });
        if let Some(p) = parent {
            tree.nodes[p].children.push(id);
        }
        let Some(side) = mover else {
            *leaves += 1;
            if *leaves > budget {
                return Err(Error::BudgetExceeded {
                    limit: budget,
                    during: "enumerating transcripts",
                });
            }
            return Ok(());
        };
        let kernel = self.kernel_at(&history)?;
        let total = matrix.total();
        let signals = self.signals_after(&history).expect("mover exists").to_vec();
        for (s, label) in signals.iter().enumerate() {
            let column: Vec<Rational> = kernel.iter().map(|row| row[s].clone()).collect();
            let child = match side {
                Side::A => matrix.scale_rows(&column),
                Side::B => matrix.scale_cols(&column),
            };
            if child.is_zero() {
                continue;
            }
            let p = child.total() / &total;
            let mut h = history.clone();
            h.push(label.clone());
            self.grow(tree, Some(id), h, child, p, budget, leaves)?;
        }
        Ok(())
    }

    pub fn simulate(&self, prior_a: &Belief, prior_b: &Belief, budget: usize) -> Result<Vec<Transcript>> {
        let tree = self.explore(prior_a, prior_b, budget)?;
        Ok(tree
            .leaves()
            .map(|n| Transcript {
                history: n.history.clone(),
                prob: n.matrix.total(),
                matrix: n.matrix.clone(),
            })
            .collect())
    }

    pub fn induced_joint_posterior(&self, prior_a: &Belief, prior_b: &Belief, budget: usize) -> Result<JointPosterior> {
        let transcripts = self.simulate(prior_a, prior_b, budget)?;
        joint_from_outcomes(self.types_a, self.types_b, transcripts.iter().map(|t| &t.matrix))
    }

    /// Checks the belief process for the dimartingale property node by node.
    pub fn dimartingale_audit(&self, prior_a: &Belief, prior_b: &Belief, budget: usize) -> Result<DimartingaleTrace> {
        let tree = self.explore(prior_a, prior_b, budget)?;
        Ok(DimartingaleTrace::from_tree(&tree))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub history: History,
    pub prob: Rational,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub history: History,
    /// `P(θ_A, θ_B, history)`.
    pub matrix: Matrix,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Who moves next; `None` at complete transcripts.
    pub mover: Option<Side>,
    /// Probability of this node given its parent.
    pub edge_prob: Rational,
}

impl Node {
    pub fn prob(&self) -> Rational {
        self.matrix.total()
    }

    /// Bob's belief about Alice.
    pub fn q_a(&self) -> Belief {
        Belief::normalize(self.matrix.row_sums()).expect("nodes have positive mass")
    }

    /// Alice's belief about Bob.
    pub fn q_b(&self) -> Belief {
        Belief::normalize(self.matrix.col_sums()).expect("nodes have positive mass")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.mover.is_none())
    }

    /// Leaf ids below `id` (including `id` itself when it is a leaf).
    pub fn leaves_under(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if self.nodes[n].mover.is_none() {
                out.push(n);
            }
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out.sort_unstable();
        out
    }
}

pub type Gamma = BTreeMap<(Belief, Belief), Rational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    pub history: History,
    pub parent: Option<usize>,
    pub mover: Option<Side>,
    pub prob: Rational,
    pub edge_prob: Rational,
    pub q_a: Belief,
    pub q_b: Belief,
    /// Conditional distribution of the final `(q_B, q_A)` pair.
    pub gamma: Gamma,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimartingaleTrace {
    pub nodes: Vec<TraceNode>,
    pub violations: Vec<String>,
}

fn mix_beliefs(parts: &[(Rational, &Belief)]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); parts[0].1.len()];
    for (w, b) in parts {
        for (o, v) in out.iter_mut().zip(b.weights()) {
            *o += w * v;
        }
    }
    out
}

impl DimartingaleTrace {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    fn from_tree(tree: &Tree) -> DimartingaleTrace {
        let mut nodes: Vec<TraceNode> = tree
            .nodes
            .iter()
            .map(|n| TraceNode {
                history: n.history.clone(),
                parent: n.parent,
                mover: n.mover,
                prob: n.prob(),
                edge_prob: n.edge_prob.clone(),
                q_a: n.q_a(),
                q_b: n.q_b(),
                gamma: Gamma::new(),
            })
            .collect();
        for id in 0..nodes.len() {
            let mut gamma = Gamma::new();
            for leaf in tree.leaves_under(id) {
                let w = &nodes[leaf].prob / &nodes[id].prob;
                *gamma
                    .entry((nodes[leaf].q_b.clone(), nodes[leaf].q_a.clone()))
                    .or_insert_with(Rational::zero) += w;
            }
            nodes[id].gamma = gamma;
        }

        let mut violations = Vec::new();
        for (id, node) in tree.nodes.iter().enumerate() {
            let here = &nodes[id];
            let label = history_label(&node.history);
            let (qa, qb) = (&here.q_a, &here.q_b);
            if node.matrix.normalized().expect("positive mass") != Matrix::product(qa, qb) {
                violations.push(format!("`{label}`: observer posterior is not a product"));
            }
            if node.mover.is_none() {
                let point: Gamma = [((qb.clone(), qa.clone()), Rational::one())].into();
                if here.gamma != point {
                    violations.push(format!("`{label}`: final gamma is not a point mass"));
                }
                continue;
            }
            let kids: Vec<&TraceNode> = node.children.iter().map(|&c| &nodes[c]).collect();
            let mut sum = Matrix::zeros(node.matrix.rows(), node.matrix.cols());
            for &c in &node.children {
                sum.add_scaled(&tree.nodes[c].matrix, &Rational::one());
            }
            if sum != node.matrix {
                violations.push(format!("`{label}`: children do not conserve probability"));
            }
            let unchanged = |k: &TraceNode| match node.mover {
                Some(Side::A) => k.q_b == *qb,
                Some(Side::B) => k.q_a == *qa,
                None => true,
            };
            if !kids.iter().all(|k| unchanged(k)) {
                violations.push(format!("`{label}`: the silent player's belief moved"));
            }
            let parts_a: Vec<(Rational, &Belief)> = kids.iter().map(|k| (k.edge_prob.clone(), &k.q_a)).collect();
            let parts_b: Vec<(Rational, &Belief)> = kids.iter().map(|k| (k.edge_prob.clone(), &k.q_b)).collect();
            if mix_beliefs(&parts_a) != qa.weights() || mix_beliefs(&parts_b) != qb.weights() {
                violations.push(format!("`{label}`: beliefs are not a martingale"));
            }
            let mut mixed = Gamma::new();
            for k in &kids {
                for (key, p) in &k.gamma {
                    *mixed.entry(key.clone()).or_insert_with(Rational::zero) += &k.edge_prob * p;
                }
            }
            if mixed != here.gamma {
                violations.push(format!("`{label}`: gamma is not a martingale"));
            }
        }
        DimartingaleTrace { nodes, violations }
    }
}
