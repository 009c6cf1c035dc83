//! Which joint posterior distributions can a mediator, or a conversation, induce?
//!
//! A conversation can induce `J` iff every belief pair sees product-form
//! types and the `(q_B, q_A)` marginal can be built from point masses by
//! alternating mean-preserving merges that fix `q_B` (Alice moved) or `q_A`
//! (Bob moved). A [`SplitWitness`] records one such merge tree.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::belief::{grid_beliefs, joint_from_observer, Belief, JointPosterior, Matrix, ObserverPosterior};
use crate::conversation::{ConversationProtocol, Round};
use crate::error::{Error, Result};
use crate::numeric::{LinearProgram, LpStatus, Rational, Relation};

/// Largest number of belief-assignment templates the mediator check will enumerate.
pub const MEDIATOR_TEMPLATE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitKind {
    /// Alice speaks: children share `q_B`.
    #[serde(rename = "A-split")]
    A,
    /// Bob speaks: children share `q_A`.
    #[serde(rename = "B-split")]
    B,
}

impl SplitKind {
    fn at_slot(slot: usize) -> SplitKind {
        if slot.is_multiple_of(2) {
            SplitKind::A
        } else {
            SplitKind::B
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPoint {
    pub q_b: Belief,
    pub q_a: Belief,
    /// Distribution over the witness support.
    pub z: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessNode {
    pub point: SplitPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<WitnessChild>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessChild {
    pub weight: Rational,
    pub node: WitnessNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitWitness {
    /// The belief pairs `(q_B, q_A)` indexing every `z`.
    pub support: Vec<(Belief, Belief)>,
    pub root: WitnessNode,
}

impl WitnessNode {
    pub fn leaf(q_b: Belief, q_a: Belief, k: usize, n: usize) -> WitnessNode {
        let mut z = vec![Rational::zero(); n];
        z[k] = Rational::one();
        WitnessNode {
            point: SplitPoint { q_b, q_a, z },
            split: None,
            children: Vec::new(),
        }
    }

    /// Internal node whose point is the weighted mean of its children.
    pub fn merge(split: SplitKind, children: Vec<(Rational, WitnessNode)>) -> WitnessNode {
        let first = &children[0].1.point;
        let n = first.z.len();
        let mean_belief = |get: fn(&SplitPoint) -> &Belief| {
            let len = get(first).len();
            let w = (0..len)
                .map(|t| children.iter().map(|(w, c)| w * get(&c.point).get(t)).sum())
                .collect();
            Belief::new(w).expect("convex combination of beliefs")
        };
        let point = SplitPoint {
            q_b: mean_belief(|p| &p.q_b),
            q_a: mean_belief(|p| &p.q_a),
            z: (0..n)
                .map(|k| children.iter().map(|(w, c)| w * &c.point.z[k]).sum())
                .collect(),
        };
        WitnessNode {
            point,
            split: Some(split),
            children: children
                .into_iter()
                .map(|(weight, node)| WitnessChild { weight, node })
                .collect(),
        }
    }
}

impl SplitWitness {
    /// Alternating speaking slots the witness needs, counting from an Alice slot.
    pub fn slots(&self) -> usize {
        fn walk(node: &WitnessNode, last: Option<SplitKind>) -> usize {
            let Some(kind) = node.split else { return 0 };
            let cost = match (last, kind) {
                (Some(l), k) if l == k => 0,
                (None, SplitKind::B) => 2,
                _ => 1,
            };
            cost + node
                .children
                .iter()
                .map(|c| walk(&c.node, Some(kind)))
                .max()
                .unwrap_or(0)
        }
        walk(&self.root, None)
    }

    pub fn rounds(&self) -> usize {
        self.slots().div_ceil(2)
    }
}

/// Which necessary condition an infeasible target violates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum Violation {
    /// Types are not distributed as `q_A ⊗ q_B` at this belief pair.
    ProductCondition { q_b: Belief, q_a: Belief },
    /// The type marginal is not the prior product.
    MeanMismatch { mean: Matrix, prior: Matrix },
    /// No family of observer posteriors generates the atoms.
    NoObserverFamily,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Witness(SplitWitness),
    /// `(P(s), q_AB^(s))` for each signal of a generating mediator.
    ObserverFamily {
        family: Vec<(Rational, ObserverPosterior)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FeasibilityVerdict {
    Feasible { certificate: Certificate },
    Infeasible { violation: Violation },
    Unknown { reason: String },
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&SplitWitness> {
        match self {
            FeasibilityVerdict::Feasible {
                certificate: Certificate::Witness(w),
            } => Some(w),
            _ => None,
        }
    }
}

fn first_product_violation(j: &JointPosterior) -> Option<(Belief, Belief)> {
    j.groups().into_iter().find_map(|((q_b, q_a), m)| {
        let expected = Matrix::product(&q_a, &q_b).scale(&m.total());
        (expected != m).then_some((q_b, q_a))
    })
}

/// Every belief pair sees types distributed as `q_A(θ_A)·q_B(θ_B)`.
pub fn check_product_condition(j: &JointPosterior) -> bool {
    first_product_violation(j).is_none()
}

/// Decides mediator feasibility exactly.
///
/// Without loss a mediator's signals can be identified with the beliefs they
/// leave each type in, so the check enumerates every assignment of a
/// candidate belief to each type and asks an LP for masses reproducing `J`.
/// A feasible answer carries the generating observer family.
pub fn check_mediator_feasibility(
    j: &JointPosterior,
    prior_a: &Belief,
    prior_b: &Belief,
) -> Result<FeasibilityVerdict> {
    let (na, nb) = (j.types_a(), j.types_b());
    if prior_a.len() != na || prior_b.len() != nb {
        return Err(Error::InvalidDistribution("priors do not match the type spaces".into()));
    }
    let prior = Matrix::product(prior_a, prior_b);
    let mean = j.type_marginal();
    if mean != prior {
        return Ok(FeasibilityVerdict::Infeasible {
            violation: Violation::MeanMismatch { mean, prior },
        });
    }
    let mut beliefs_of_a: Vec<BTreeSet<Belief>> = vec![BTreeSet::new(); na];
    let mut beliefs_of_b: Vec<BTreeSet<Belief>> = vec![BTreeSet::new(); nb];
    for atom in j.atoms() {
        beliefs_of_a[atom.a].insert(atom.q_b.clone());
        beliefs_of_b[atom.b].insert(atom.q_a.clone());
    }
    let choices: Vec<Vec<Belief>> = beliefs_of_a
        .iter()
        .chain(&beliefs_of_b)
        .map(|s| s.iter().cloned().collect())
        .collect();
    // a type that never occurs is pinned to an arbitrary belief with zero mass
    let choices: Vec<Vec<Belief>> = choices
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            if c.is_empty() {
                vec![Belief::uniform(if i < na { nb } else { na })]
            } else {
                c
            }
        })
        .collect();
    let count = choices.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    match count {
        Some(n) if n <= MEDIATOR_TEMPLATE_LIMIT => {}
        _ => {
            return Ok(FeasibilityVerdict::Unknown {
                reason: format!("more than {MEDIATOR_TEMPLATE_LIMIT} belief templates"),
            })
        }
    }
    let mut templates: Vec<Vec<usize>> = vec![Vec::new()];
    for c in &choices {
        templates = templates
            .into_iter()
            .flat_map(|t| {
                (0..c.len()).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    let atom_mass: BTreeMap<(usize, usize, &Belief, &Belief), &Rational> = j
        .atoms()
        .iter()
        .map(|a| ((a.a, a.b, &a.q_b, &a.q_a), &a.prob))
        .collect();

    // variables: per template, row masses R_x then column masses C_y
    let stride = na + nb;
    let nvars = templates.len() * stride;
    let mut lp = LinearProgram::maximize(vec![Rational::zero(); nvars]);
    let mut matches: BTreeMap<(usize, usize, &Belief, &Belief), Vec<(usize, Rational)>> = BTreeMap::new();
    for (s, t) in templates.iter().enumerate() {
        for x in 0..na {
            let q_b = &choices[x][t[x]];
            for y in 0..nb {
                let q_a = &choices[na + y][t[na + y]];
                let (r, c) = (s * stride + x, s * stride + na + y);
                // R_x q_B(y) = C_y q_A(x)
                let mut row = Vec::new();
                if !q_b.get(y).is_zero() {
                    row.push((r, q_b.get(y).clone()));
                }
                if !q_a.get(x).is_zero() {
                    row.push((c, -q_a.get(x).clone()));
                }
                if !row.is_empty() {
                    lp.add_sparse(&row, Relation::Eq, Rational::zero());
                }
                if !q_b.get(y).is_zero() {
                    matches
                        .entry((x, y, q_b, q_a))
                        .or_default()
                        .push((r, q_b.get(y).clone()));
                }
            }
        }
    }
    for (key, row) in &matches {
        let rhs = atom_mass.get(key).map_or_else(Rational::zero, |p| (*p).clone());
        lp.add_sparse(row, Relation::Eq, rhs);
    }
    // an atom no template can produce
    if atom_mass.keys().any(|key| !matches.contains_key(key)) {
        return Ok(FeasibilityVerdict::Infeasible {
            violation: Violation::NoObserverFamily,
        });
    }
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Ok(FeasibilityVerdict::Infeasible {
            violation: Violation::NoObserverFamily,
        });
    }
    let mut family = Vec::new();
    for (s, t) in templates.iter().enumerate() {
        let mut m = Matrix::zeros(na, nb);
        for x in 0..na {
            let q_b = &choices[x][t[x]];
            for y in 0..nb {
                m.set(x, y, &sol.point[s * stride + x] * q_b.get(y));
            }
        }
        let total = m.total();
        if total.is_positive() {
            family.push((total.clone(), m.scale(&total.recip())));
        }
    }
    if joint_from_observer(&family, prior_a, prior_b)? != *j {
        return Err(Error::Invariant("observer family does not reproduce the target".into()));
    }
    Ok(FeasibilityVerdict::Feasible {
        certificate: Certificate::ObserverFamily { family },
    })
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedWitness(msg.into())
}

fn check_structure(w: &SplitWitness, na: usize, nb: usize) -> Result<()> {
    let n = w.support.len();
    if w.support.iter().any(|(b, a)| b.len() != nb || a.len() != na) {
        return Err(malformed("support belief has the wrong dimension"));
    }
    fn walk(node: &WitnessNode, n: usize, na: usize, nb: usize) -> Result<()> {
        let p = &node.point;
        if p.q_b.len() != nb || p.q_a.len() != na {
            return Err(malformed("point belief has the wrong dimension"));
        }
        if p.z.len() != n {
            return Err(malformed(format!("z has {} entries, support has {n}", p.z.len())));
        }
        match (node.split, node.children.is_empty()) {
            (Some(_), true) => Err(malformed("split node without children")),
            (None, false) => Err(malformed("children under an unlabeled node")),
            _ => node.children.iter().try_for_each(|c| walk(&c.node, n, na, nb)),
        }
    }
    walk(&w.root, n, na, nb)
}

fn identities_hold(node: &WitnessNode, support: &[(Belief, Belief)]) -> bool {
    let p = &node.point;
    let Some(kind) = node.split else {
        // a base point e_{q_B, q_A}
        let ones: Vec<usize> = (0..p.z.len()).filter(|&k| !p.z[k].is_zero()).collect();
        return ones.len() == 1 && p.z[ones[0]].is_one() && support[ones[0]] == (p.q_b.clone(), p.q_a.clone());
    };
    let weights_ok = node.children.iter().all(|c| c.weight.is_positive())
        && node
            .children
            .iter()
            .map(|c| c.weight.clone())
            .sum::<Rational>()
            .is_one();
    if !weights_ok {
        return false;
    }
    let fixed_ok = node.children.iter().all(|c| match kind {
        SplitKind::A => c.node.point.q_b == p.q_b,
        SplitKind::B => c.node.point.q_a == p.q_a,
    });
    let mean = |get: &dyn Fn(&SplitPoint) -> Vec<Rational>| {
        let len = get(p).len();
        (0..len)
            .map(|t| {
                node.children
                    .iter()
                    .map(|c| &c.weight * &get(&c.node.point)[t])
                    .sum::<Rational>()
            })
            .collect::<Vec<_>>()
    };
    fixed_ok
        && mean(&|q| q.q_b.weights().to_vec()) == p.q_b.weights()
        && mean(&|q| q.q_a.weights().to_vec()) == p.q_a.weights()
        && mean(&|q| q.z.clone()) == p.z
        && node.children.iter().all(|c| identities_hold(&c.node, support))
}

/// Checks that `w` proves `J` reachable in `rounds` rounds from the priors.
///
/// Returns `Ok(false)` for a well-formed witness that fails, and an error
/// for a malformed one.
pub fn verify_witness(
    j: &JointPosterior,
    w: &SplitWitness,
    rounds: usize,
    prior_a: &Belief,
    prior_b: &Belief,
) -> Result<bool> {
    check_structure(w, j.types_a(), j.types_b())?;
    let target = j.support();
    let distinct: BTreeSet<&(Belief, Belief)> = w.support.iter().collect();
    if distinct.len() != w.support.len() || w.support.len() != target.len() {
        return Ok(false);
    }
    let mut root_z = Vec::with_capacity(w.support.len());
    for pair in &w.support {
        match target.get(pair) {
            Some(p) => root_z.push(p.clone()),
            None => return Ok(false),
        }
    }
    let root = &w.root.point;
    Ok(root.q_a == *prior_a
        && root.q_b == *prior_b
        && root.z == root_z
        && w.slots() <= 2 * rounds
        && identities_hold(&w.root, &w.support))
}

struct Flat {
    q_b: Belief,
    q_a: Belief,
    split: Option<SplitKind>,
    children: Vec<(Rational, Flat)>,
}

/// Merges consecutive splits by the same speaker and drops one-child splits.
fn flatten(node: &WitnessNode) -> Flat {
    let mut children = Vec::new();
    for c in &node.children {
        let f = flatten(&c.node);
        if f.split.is_some() && f.split == node.split {
            children.extend(f.children.into_iter().map(|(w, g)| (&c.weight * w, g)));
        } else {
            children.push((c.weight.clone(), f));
        }
    }
    if children.len() == 1 {
        return children.pop().expect("one child").1;
    }
    Flat {
        q_b: node.point.q_b.clone(),
        q_a: node.point.q_a.clone(),
        split: node.split,
        children,
    }
}

fn flat_slots(f: &Flat, slot: usize) -> usize {
    match f.split {
        None => slot,
        Some(kind) => {
            let here = if SplitKind::at_slot(slot) == kind {
                slot
            } else {
                slot + 1
            };
            f.children
                .iter()
                .map(|(_, c)| flat_slots(c, here + 1))
                .max()
                .unwrap_or(here + 1)
        }
    }
}

enum Step<'a> {
    Split(&'a Flat),
    Silent,
}

fn schedule<'a>(
    f: &'a Flat,
    slot: usize,
    end: usize,
    history: Vec<String>,
    out: &mut Vec<(usize, Vec<String>, Step<'a>)>,
) {
    if slot == end {
        return;
    }
    let sig = |k: usize| {
        if slot.is_multiple_of(2) {
            format!("a{k}")
        } else {
            format!("b{k}")
        }
    };
    if f.split == Some(SplitKind::at_slot(slot)) {
        out.push((slot, history.clone(), Step::Split(f)));
        for (k, (_, c)) in f.children.iter().enumerate() {
            let mut h = history.clone();
            h.push(sig(k));
            schedule(c, slot + 1, end, h, out);
        }
    } else {
        out.push((slot, history.clone(), Step::Silent));
        let mut h = history;
        h.push(sig(0));
        schedule(f, slot + 1, end, h, out);
    }
}

/// The conversation that replays the witness from the root down: each split
/// becomes a signal of its speaker moving the listener's belief to the
/// children with the witness weights.
pub fn witness_to_conversation(w: &SplitWitness, prior_a: &Belief, prior_b: &Belief) -> Result<ConversationProtocol> {
    check_structure(w, prior_a.len(), prior_b.len())?;
    if w.root.point.q_a != *prior_a || w.root.point.q_b != *prior_b {
        return Err(Error::InvalidProtocol("witness root is not at the priors".into()));
    }
    let (na, nb) = (prior_a.len(), prior_b.len());
    let flat = flatten(&w.root);
    let slots = flat_slots(&flat, 0);
    let rounds = slots.div_ceil(2);
    if rounds == 0 {
        return Ok(ConversationProtocol::silent(na, nb));
    }
    let mut steps = Vec::new();
    schedule(&flat, 0, 2 * rounds, Vec::new(), &mut steps);
    let mut width = vec![1usize; 2 * rounds];
    for (slot, _, step) in &steps {
        if let Step::Split(f) = step {
            width[*slot] = width[*slot].max(f.children.len());
        }
    }
    let names = |prefix: char, m: usize| -> Vec<String> { (0..m).map(|k| format!("{prefix}{k}")).collect() };
    let round_list = (0..rounds)
        .map(|r| Round {
            alice: names('a', width[2 * r]),
            bob: names('b', width[2 * r + 1]),
        })
        .collect();
    let mut c = ConversationProtocol::new(na, nb, round_list)?;
    for (slot, history, step) in steps {
        let m = width[slot];
        let senders = if slot % 2 == 0 { na } else { nb };
        let unit = |k: usize| {
            let mut row = vec![Rational::zero(); m];
            row[k] = Rational::one();
            row
        };
        let rows: Vec<Vec<Rational>> = match step {
            Step::Silent if m == 1 => continue,
            Step::Silent => (0..senders).map(|_| unit(0)).collect(),
            Step::Split(f) => {
                let here = if slot % 2 == 0 { &f.q_a } else { &f.q_b };
                (0..senders)
                    .map(|t| {
                        if here.get(t).is_zero() {
                            return unit(0);
                        }
                        let mut row = vec![Rational::zero(); m];
                        for (k, (wt, child)) in f.children.iter().enumerate() {
                            let q = if slot % 2 == 0 { &child.q_a } else { &child.q_b };
                            row[k] = wt * q.get(t) / here.get(t);
                        }
                        row
                    })
                    .collect()
            }
        };
        c.set_kernel(history, rows)?;
    }
    Ok(c)
}

/// Searches for a witness of depth at most `2·rounds` on a belief grid.
///
/// Grid states are belief pairs whose coordinates come from the target, the
/// priors and `grid`. Flows between consecutive layers form a Markov chain
/// whose mean-preserving steps end exactly at the target marginal; a
/// feasible flow unrolls into a witness. An infeasible grid yields `Unknown`
/// since a finer grid might still succeed.
pub fn search_witness(
    j: &JointPosterior,
    rounds: usize,
    prior_a: &Belief,
    prior_b: &Belief,
    budget: usize,
    grid: &[Rational],
) -> Result<FeasibilityVerdict> {
    if let Some((q_b, q_a)) = first_product_violation(j) {
        return Ok(FeasibilityVerdict::Infeasible {
            violation: Violation::ProductCondition { q_b, q_a },
        });
    }
    let mediator = check_mediator_feasibility(j, prior_a, prior_b)?;
    if !mediator.is_feasible() {
        return Ok(mediator);
    }
    let target = j.support();
    let support: Vec<(Belief, Belief)> = target.keys().cloned().collect();
    // each side's beliefs only move along that side's own coordinates
    let mut coords_a: Vec<Rational> = grid.to_vec();
    let mut coords_b: Vec<Rational> = grid.to_vec();
    for (b, a) in &support {
        coords_b.extend(b.weights().iter().cloned());
        coords_a.extend(a.weights().iter().cloned());
    }
    coords_a.extend(prior_a.weights().iter().cloned());
    coords_b.extend(prior_b.weights().iter().cloned());
    let extra_a: Vec<Belief> = support
        .iter()
        .map(|(_, a)| a.clone())
        .chain([prior_a.clone()])
        .collect();
    let extra_b: Vec<Belief> = support
        .iter()
        .map(|(b, _)| b.clone())
        .chain([prior_b.clone()])
        .collect();
    let ga = grid_beliefs(prior_a.len(), &coords_a, &extra_a);
    let gb = grid_beliefs(prior_b.len(), &coords_b, &extra_b);
    let index = |g: &[Belief], q: &Belief| g.iter().position(|b| b == q).expect("belief on the grid");
    let root = (index(&gb, prior_b), index(&ga, prior_a));
    let terminal: BTreeMap<(usize, usize), usize> = support
        .iter()
        .enumerate()
        .map(|(k, (b, a))| ((index(&gb, b), index(&ga, a)), k))
        .collect();
    let layers = 2 * rounds;

    let within = |c: &Belief, p: &Belief| {
        c.weights()
            .iter()
            .zip(p.weights())
            .all(|(x, y)| x.is_zero() || y.is_positive())
    };
    let moves = |l: usize, (ib, ia): (usize, usize)| -> Vec<(usize, usize)> {
        if l.is_multiple_of(2) {
            (0..ga.len())
                .filter(|&k| within(&ga[k], &ga[ia]))
                .map(|k| (ib, k))
                .collect()
        } else {
            (0..gb.len())
                .filter(|&k| within(&gb[k], &gb[ib]))
                .map(|k| (k, ia))
                .collect()
        }
    };

    let mut forward: Vec<BTreeSet<(usize, usize)>> = vec![[root].into()];
    for l in 0..layers {
        let next: BTreeSet<_> = forward[l].iter().flat_map(|&s| moves(l, s)).collect();
        if next.len() > budget {
            return Ok(FeasibilityVerdict::Unknown {
                reason: format!("layer {} exceeds the budget of {budget}", l + 1),
            });
        }
        forward.push(next);
    }
    let mut alive = vec![BTreeSet::new(); layers + 1];
    alive[layers] = forward[layers]
        .iter()
        .filter(|s| terminal.contains_key(s))
        .copied()
        .collect();
    for l in (0..layers).rev() {
        alive[l] = forward[l]
            .iter()
            .filter(|&&s| moves(l, s).iter().any(|t| alive[l + 1].contains(t)))
            .copied()
            .collect();
    }
    if target.len() != alive[layers].len() || !alive[0].contains(&root) {
        return Ok(FeasibilityVerdict::Unknown {
            reason: "target not reachable on the grid".into(),
        });
    }
    let mut edges: Vec<(usize, (usize, usize), (usize, usize))> = Vec::new();
    for l in 0..layers {
        for &s in &alive[l] {
            for t in moves(l, s) {
                if alive[l + 1].contains(&t) {
                    edges.push((l, s, t));
                }
            }
        }
    }
    if edges.len() > budget {
        return Ok(FeasibilityVerdict::Unknown {
            reason: format!("{} flow variables exceed the budget of {budget}", edges.len()),
        });
    }

    let mut lp = LinearProgram::maximize(vec![Rational::zero(); edges.len()]);
    let mut out_edges: BTreeMap<(usize, (usize, usize)), Vec<usize>> = BTreeMap::new();
    let mut in_edges: BTreeMap<(usize, (usize, usize)), Vec<usize>> = BTreeMap::new();
    for (e, &(l, s, t)) in edges.iter().enumerate() {
        out_edges.entry((l, s)).or_default().push(e);
        in_edges.entry((l + 1, t)).or_default().push(e);
    }
    let one = Rational::one;
    if layers > 0 {
        let row: Vec<_> = out_edges
            .get(&(0, root))
            .into_iter()
            .flatten()
            .map(|&e| (e, one()))
            .collect();
        lp.add_sparse(&row, Relation::Eq, one());
    } else if !terminal.contains_key(&root) || target.len() != 1 {
        return Ok(FeasibilityVerdict::Unknown {
            reason: "zero rounds only induce the prior".into(),
        });
    }
    for l in 1..layers {
        for &s in &alive[l] {
            let mut row: Vec<_> = in_edges
                .get(&(l, s))
                .into_iter()
                .flatten()
                .map(|&e| (e, one()))
                .collect();
            row.extend(out_edges.get(&(l, s)).into_iter().flatten().map(|&e| (e, -one())));
            lp.add_sparse(&row, Relation::Eq, Rational::zero());
        }
    }
    if layers > 0 {
        for (&s, &k) in &terminal {
            let row: Vec<_> = in_edges
                .get(&(layers, s))
                .into_iter()
                .flatten()
                .map(|&e| (e, one()))
                .collect();
            lp.add_sparse(&row, Relation::Eq, target[&support[k]].clone());
        }
    }
    for ((l, (ib, ia)), outs) in &out_edges {
        let (here, len) = if l % 2 == 0 {
            (&ga[*ia], ga[*ia].len())
        } else {
            (&gb[*ib], gb[*ib].len())
        };
        for t in 0..len.saturating_sub(1) {
            let row: Vec<_> = outs
                .iter()
                .map(|&e| {
                    let (_, _, (cb, ca)) = edges[e];
                    let child = if l % 2 == 0 { &ga[ca] } else { &gb[cb] };
                    (e, child.get(t) - here.get(t))
                })
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if !row.is_empty() {
                lp.add_sparse(&row, Relation::Eq, Rational::zero());
            }
        }
    }
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Ok(FeasibilityVerdict::Unknown {
            reason: format!("no witness within {rounds} rounds on the candidate grid"),
        });
    }

    // unroll the chain from the root, collapsing silent pass-throughs
    let n = support.len();
    let mut nodes = 0usize;
    fn unroll(l: usize, s: (usize, usize), ctx: &Unroll, nodes: &mut usize) -> Option<WitnessNode> {
        *nodes += 1;
        if *nodes > ctx.budget {
            return None;
        }
        if l == ctx.layers {
            let k = ctx.terminal[&s];
            return Some(WitnessNode::leaf(ctx.gb[s.0].clone(), ctx.ga[s.1].clone(), k, ctx.n));
        }
        let live: Vec<(Rational, (usize, usize))> = ctx.out_edges[&(l, s)]
            .iter()
            .filter(|&&e| ctx.flow[e].is_positive())
            .map(|&e| (ctx.flow[e].clone(), ctx.edges[e].2))
            .collect();
        if live.len() == 1 {
            return unroll(l + 1, live[0].1, ctx, nodes);
        }
        let total: Rational = live.iter().map(|(f, _)| f.clone()).sum();
        let mut children = Vec::with_capacity(live.len());
        for (f, t) in live {
            children.push((f / &total, unroll(l + 1, t, ctx, nodes)?));
        }
        Some(WitnessNode::merge(SplitKind::at_slot(l), children))
    }
    struct Unroll<'a> {
        layers: usize,
        budget: usize,
        n: usize,
        ga: &'a [Belief],
        gb: &'a [Belief],
        terminal: &'a BTreeMap<(usize, usize), usize>,
        out_edges: &'a BTreeMap<(usize, (usize, usize)), Vec<usize>>,
        edges: &'a [(usize, (usize, usize), (usize, usize))],
        flow: &'a [Rational],
    }
    let ctx = Unroll {
        layers,
        budget,
        n,
        ga: &ga,
        gb: &gb,
        terminal: &terminal,
        out_edges: &out_edges,
        edges: &edges,
        flow: &sol.point,
    };
    let Some(root_node) = unroll(0, root, &ctx, &mut nodes) else {
        return Ok(FeasibilityVerdict::Unknown {
            reason: format!("witness tree exceeds the budget of {budget} nodes"),
        });
    };
    let witness = SplitWitness {
        support,
        root: root_node,
    };
    if !verify_witness(j, &witness, rounds, prior_a, prior_b)? {
        return Err(Error::Invariant(
            "search produced a witness that does not verify".into(),
        ));
    }
    Ok(FeasibilityVerdict::Feasible {
        certificate: Certificate::Witness(witness),
    })
}
