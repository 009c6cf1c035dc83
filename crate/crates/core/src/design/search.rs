//! Bounded search for good conversations under ex-post or non-committed IR.
//!
//! For a fixed number of rounds the search space is the tree of belief
//! states `(q_B, q_A)` on a finite grid: every node may split the mover's
//! belief into any grid belief with support inside the current one. The
//! probability of each complete path is an LP variable. Martingale rows make
//! each split mean-preserving, and the IR filter adds rows (non-committed)
//! or removes leaves (ex-post). Any feasible point is realized exactly by a
//! conversation, so the optimum is a lower bound on the best IR conversation.

use std::collections::{BTreeMap, BTreeSet};

use crate::belief::{grid_beliefs, Belief, Side};
use crate::conversation::{ConversationProtocol, Round};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::ir::{self, Notion};
use crate::numeric::{LinearProgram, LpStatus, Rational, Relation};
use crate::protocol::{Outcome, Protocol};

use super::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchFilter {
    ExPost,
    NonCommitted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_rounds: usize,
    /// Most children any node may use.
    pub branching: usize,
    /// Most tree nodes per round count.
    pub budget: usize,
    /// Extra belief coordinates beyond 0, 1 and the priors.
    pub grid: Vec<Rational>,
    pub filter: SearchFilter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub value: Rational,
    pub rounds: usize,
    pub protocol: ConversationProtocol,
    pub u_a: Rational,
    pub u_b: Rational,
    /// The budget stopped the search before `max_rounds`.
    pub budget_exhausted: bool,
}

struct Grid {
    beliefs_a: Vec<Belief>,
    beliefs_b: Vec<Belief>,
}

struct SearchNode {
    /// Index into `beliefs_b`, `beliefs_a`.
    state: (usize, usize),
    depth: usize,
    children: Vec<usize>,
    label: Option<String>,
    parent: Option<usize>,
}

struct SearchTree {
    nodes: Vec<SearchNode>,
    leaves: Vec<usize>,
}

fn support_within(child: &Belief, parent: &Belief) -> bool {
    child
        .weights()
        .iter()
        .zip(parent.weights())
        .all(|(c, p)| c.is_zero() || p.is_positive())
}

fn mover(depth: usize) -> Side {
    if depth.is_multiple_of(2) {
        Side::A
    } else {
        Side::B
    }
}

/// Full tree to `2·rounds` moves. `allowed` keys are path prefixes (as child
/// index sequences) whose children are restricted.
fn build_tree(
    grid: &Grid,
    root: (usize, usize),
    rounds: usize,
    allowed: &BTreeMap<Vec<usize>, BTreeSet<usize>>,
    leaf_ok: &dyn Fn((usize, usize)) -> bool,
    budget: usize,
) -> Result<SearchTree> {
    let mut nodes = vec![SearchNode {
        state: root,
        depth: 0,
        children: Vec::new(),
        label: None,
        parent: None,
    }];
    let mut paths: Vec<Vec<usize>> = vec![Vec::new()];
    let mut leaves = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let (ib, ia) = nodes[i].state;
        let depth = nodes[i].depth;
        if depth == 2 * rounds {
            if leaf_ok((ib, ia)) {
                leaves.push(i);
            }
            i += 1;
            continue;
        }
        let options: Vec<usize> = match mover(depth) {
            Side::A => (0..grid.beliefs_a.len())
                .filter(|&k| support_within(&grid.beliefs_a[k], &grid.beliefs_a[ia]))
                .collect(),
            Side::B => (0..grid.beliefs_b.len())
                .filter(|&k| support_within(&grid.beliefs_b[k], &grid.beliefs_b[ib]))
                .collect(),
        };
        let path = paths[i].clone();
        for k in options {
            if let Some(set) = allowed.get(&path) {
                if !set.contains(&k) {
                    continue;
                }
            }
            let (state, label) = match mover(depth) {
                Side::A => ((ib, k), format!("a{k}")),
                Side::B => ((k, ia), format!("b{k}")),
            };
            let id = nodes.len();
            if id >= budget {
                return Err(Error::BudgetExceeded {
                    limit: budget,
                    during: "building the search tree",
                });
            }
            nodes.push(SearchNode {
                state,
                depth: depth + 1,
                children: Vec::new(),
                label: Some(label),
                parent: Some(i),
            });
            let mut p = path.clone();
            p.push(k);
            paths.push(p);
            nodes[i].children.push(id);
        }
        i += 1;
    }
    Ok(SearchTree { nodes, leaves })
}

impl SearchTree {
    /// For each node, the leaf-variable indices below it.
    fn leaf_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.nodes.len()];
        for (v, &leaf) in self.leaves.iter().enumerate() {
            let mut cur = Some(leaf);
            while let Some(n) = cur {
                sets[n].push(v);
                cur = self.nodes[n].parent;
            }
        }
        sets
    }

    fn path(&self, mut id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some(p) = self.nodes[id].parent {
            let label = self.nodes[id].label.as_ref().expect("non-root has a label");
            out.push(label[1..].parse().expect("numeric label"));
            id = p;
        }
        out.reverse();
        out
    }

    fn history(&self, mut id: usize) -> Vec<String> {
        let mut out = Vec::new();
        while let Some(p) = self.nodes[id].parent {
            out.push(self.nodes[id].label.clone().expect("non-root has a label"));
            id = p;
        }
        out.reverse();
        out
    }
}

struct Evaluator<'a> {
    game: &'a Game,
    objective: &'a Objective,
    grid: &'a Grid,
    r0: Vec<usize>,
}

impl Evaluator<'_> {
    fn actions(&self, ib: usize) -> Vec<usize> {
        (0..self.game.num_a())
            .map(|x| self.game.best_response(x, &self.grid.beliefs_b[ib]))
            .collect()
    }

    /// `E[u | state]` with Alice acting on `q_B`.
    fn objective_value(&self, (ib, ia): (usize, usize)) -> Rational {
        let acts = self.actions(ib);
        let (qb, qa) = (&self.grid.beliefs_b[ib], &self.grid.beliefs_a[ia]);
        qa.expect(|x| qb.expect(|y| self.objective.coeff(self.game, x, y, acts[x])))
    }

    /// Bob of type `y` at a state where Alice acts on `q_B` of `act_state`.
    fn bob_value(&self, ia: usize, act_state: usize, y: usize) -> Rational {
        let acts = self.actions(act_state);
        self.grid.beliefs_a[ia].expect(|x| self.game.u_b(x, y, acts[x]).clone())
    }

    fn expost_ok(&self, (ib, ia): (usize, usize)) -> bool {
        let qa = &self.grid.beliefs_a[ia];
        self.grid.beliefs_b[ib].support().all(|y| {
            let baseline = qa.expect(|x| self.game.u_b(x, y, self.r0[x]).clone());
            self.bob_value(ia, ib, y) >= baseline
        })
    }
}

fn solve_tree(tree: &SearchTree, eval: &Evaluator, filter: SearchFilter) -> (LpStatus, Rational, Vec<Rational>) {
    let grid = eval.grid;
    let n = tree.leaves.len();
    if n == 0 {
        return (LpStatus::Infeasible, Rational::zero(), Vec::new());
    }
    let objective: Vec<Rational> = tree
        .leaves
        .iter()
        .map(|&l| eval.objective_value(tree.nodes[l].state))
        .collect();
    let mut lp = LinearProgram::maximize(objective);
    let sets = tree.leaf_sets();
    lp.add_sparse(
        &(0..n).map(|v| (v, Rational::one())).collect::<Vec<_>>(),
        Relation::Eq,
        Rational::one(),
    );
    // child of `node` on the path to each leaf variable
    let mut via: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); tree.nodes.len()];
    for (id, node) in tree.nodes.iter().enumerate() {
        for &c in &node.children {
            for &v in &sets[c] {
                via[id].insert(v, c);
            }
        }
    }
    for (id, node) in tree.nodes.iter().enumerate() {
        if node.children.is_empty() || sets[id].is_empty() {
            continue;
        }
        let (ib, ia) = node.state;
        let side = mover(node.depth);
        let here = match side {
            Side::A => &grid.beliefs_a[ia],
            Side::B => &grid.beliefs_b[ib],
        };
        for t in 0..here.len().saturating_sub(1) {
            let terms: Vec<(usize, Rational)> = sets[id]
                .iter()
                .map(|&v| {
                    let (cb, ca) = tree.nodes[via[id][&v]].state;
                    let child = match side {
                        Side::A => &grid.beliefs_a[ca],
                        Side::B => &grid.beliefs_b[cb],
                    };
                    (v, child.get(t) - here.get(t))
                })
                .filter(|(_, c)| !c.is_zero())
                .collect();
            if !terms.is_empty() {
                lp.add_sparse(&terms, Relation::Eq, Rational::zero());
            }
        }
        if filter == SearchFilter::NonCommitted {
            for y in grid.beliefs_b[ib].support() {
                let quit = grid.beliefs_b[ib].get(y) * eval.bob_value(ia, ib, y);
                let terms: Vec<(usize, Rational)> = sets[id]
                    .iter()
                    .map(|&v| {
                        let (fb, fa) = tree.nodes[tree.leaves[v]].state;
                        (v, grid.beliefs_b[fb].get(y) * eval.bob_value(fa, fb, y) - &quit)
                    })
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                if !terms.is_empty() {
                    lp.add_sparse(&terms, Relation::Ge, Rational::zero());
                }
            }
        }
    }
    let sol = lp.solve();
    (sol.status, sol.value, sol.point)
}

/// Node masses implied by leaf masses.
fn node_masses(tree: &SearchTree, leaf_mass: &[Rational]) -> Vec<Rational> {
    let mut mass = vec![Rational::zero(); tree.nodes.len()];
    for (v, &leaf) in tree.leaves.iter().enumerate() {
        let mut cur = Some(leaf);
        while let Some(n) = cur {
            mass[n] += &leaf_mass[v];
            cur = tree.nodes[n].parent;
        }
    }
    mass
}

fn to_protocol(tree: &SearchTree, mass: &[Rational], grid: &Grid, rounds: usize) -> Result<ConversationProtocol> {
    let (na, nb) = (grid.beliefs_a[0].len(), grid.beliefs_b[0].len());
    let alice: Vec<String> = (0..grid.beliefs_a.len()).map(|k| format!("a{k}")).collect();
    let bob: Vec<String> = (0..grid.beliefs_b.len()).map(|k| format!("b{k}")).collect();
    let mut c = ConversationProtocol::new(na, nb, vec![Round { alice, bob }; rounds])?;
    for (id, node) in tree.nodes.iter().enumerate() {
        if node.children.is_empty() || !mass[id].is_positive() {
            continue;
        }
        let side = mover(node.depth);
        let (ib, ia) = node.state;
        let (here, options) = match side {
            Side::A => (&grid.beliefs_a[ia], grid.beliefs_a.len()),
            Side::B => (&grid.beliefs_b[ib], grid.beliefs_b.len()),
        };
        let live: Vec<(usize, Rational, &Belief)> = node
            .children
            .iter()
            .filter(|&&ch| mass[ch].is_positive())
            .map(|&ch| {
                let (cb, ca) = tree.nodes[ch].state;
                match side {
                    Side::A => (ca, &mass[ch] / &mass[id], &grid.beliefs_a[ca]),
                    Side::B => (cb, &mass[ch] / &mass[id], &grid.beliefs_b[cb]),
                }
            })
            .collect();
        let rows = (0..here.len())
            .map(|t| {
                let mut row = vec![Rational::zero(); options];
                if here.get(t).is_zero() {
                    row[live[0].0] = Rational::one();
                } else {
                    for (k, w, child) in &live {
                        row[*k] = w * child.get(t) / here.get(t);
                    }
                }
                row
            })
            .collect();
        c.set_kernel(tree.history(id), rows)?;
    }
    Ok(c)
}

fn outcome_value(game: &Game, objective: &Objective, outcomes: &[Outcome]) -> Rational {
    let mut v = Rational::zero();
    for o in outcomes {
        let acts = o.actions(game);
        for x in 0..game.num_a() {
            let Some(r) = acts[x] else { continue };
            for y in 0..game.num_b() {
                let p = o.matrix.get(x, y);
                if !p.is_zero() {
                    v += p * objective.coeff(game, x, y, r);
                }
            }
        }
    }
    v
}

struct Candidate {
    value: Rational,
    protocol: ConversationProtocol,
}

fn search_rounds(
    game: &Game,
    eval: &Evaluator,
    grid: &Grid,
    root: (usize, usize),
    rounds: usize,
    opts: &SearchOptions,
) -> Result<Candidate> {
    let leaf_ok = |s: (usize, usize)| opts.filter != SearchFilter::ExPost || eval.expost_ok(s);
    let mut allowed: BTreeMap<Vec<usize>, BTreeSet<usize>> = BTreeMap::new();
    loop {
        let tree = build_tree(grid, root, rounds, &allowed, &leaf_ok, opts.budget)?;
        let (status, value, point) = solve_tree(&tree, eval, opts.filter);
        if status != LpStatus::Optimal {
            return Err(Error::Invariant(format!(
                "search LP is {status:?} with {rounds} rounds"
            )));
        }
        let mass = node_masses(&tree, &point);
        let mut restricted = false;
        for (id, node) in tree.nodes.iter().enumerate() {
            let mut live: Vec<usize> = node
                .children
                .iter()
                .copied()
                .filter(|&c| mass[c].is_positive())
                .collect();
            if live.len() <= opts.branching {
                continue;
            }
            live.sort_by(|&x, &y| mass[y].cmp(&mass[x]).then(x.cmp(&y)));
            let keep: BTreeSet<usize> = live[..opts.branching]
                .iter()
                .map(|&c| *tree.path(c).last().expect("child path"))
                .collect();
            let path = tree.path(id);
            // a kept set that cannot preserve the mean collapses to no split
            let stay = match mover(node.depth) {
                Side::A => node.state.1,
                Side::B => node.state.0,
            };
            let set = if allowed.get(&path) == Some(&keep) {
                [stay].into()
            } else {
                keep
            };
            allowed.insert(path, set);
            restricted = true;
            break;
        }
        if restricted {
            continue;
        }
        let protocol = to_protocol(&tree, &mass, grid, rounds)?;
        let outcomes =
            Protocol::Conversation(protocol.clone()).outcomes(game.prior_a(), game.prior_b(), opts.budget.max(1))?;
        let realized = outcome_value(game, eval.objective, &outcomes);
        if realized != value {
            return Err(Error::Invariant(format!(
                "search protocol realizes {realized}, LP promised {value}"
            )));
        }
        return Ok(Candidate { value, protocol });
    }
}

/// Best conversation with at most `max_rounds` rounds found on the grid.
///
/// The result is a lower bound on the optimum over all conversations that
/// satisfy the filter. It is cross-checked by simulation and by the IR audit.
pub fn search_expost_conversation(game: &Game, objective: &Objective, opts: &SearchOptions) -> Result<SearchResult> {
    objective.check(game)?;
    if opts.branching == 0 {
        return Err(Error::InvalidProtocol("branching must be at least 1".into()));
    }
    let grid = Grid {
        beliefs_a: grid_beliefs(game.num_a(), &opts.grid, std::slice::from_ref(game.prior_a())),
        beliefs_b: grid_beliefs(game.num_b(), &opts.grid, std::slice::from_ref(game.prior_b())),
    };
    let root = (
        grid.beliefs_b
            .iter()
            .position(|b| b == game.prior_b())
            .expect("prior is a candidate"),
        grid.beliefs_a
            .iter()
            .position(|b| b == game.prior_a())
            .expect("prior is a candidate"),
    );
    let eval = Evaluator {
        game,
        objective,
        grid: &grid,
        r0: game.no_comm_profile(),
    };
    let mut best: Option<(usize, Candidate)> = None;
    let mut exhausted = false;
    for rounds in 0..=opts.max_rounds {
        let cand = match search_rounds(game, &eval, &grid, root, rounds, opts) {
            Ok(c) => c,
            Err(Error::BudgetExceeded { .. }) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(_, b)| cand.value > b.value) {
            best = Some((rounds, cand));
        }
    }
    let Some((rounds, best)) = best else {
        return Err(Error::BudgetExceeded {
            limit: opts.budget,
            during: "searching zero-round protocols",
        });
    };
    let protocol = Protocol::Conversation(best.protocol.clone());
    let notion = match opts.filter {
        SearchFilter::ExPost => Notion::ExPost,
        SearchFilter::NonCommitted => Notion::NonCommitted,
    };
    let report = ir::audit(game, &protocol, notion, Side::B, opts.budget.max(1))?;
    if !report.pass() {
        return Err(Error::Invariant(format!(
            "search returned a protocol failing {notion} IR"
        )));
    }
    let (u_a, u_b) = protocol.expected_utilities(game)?;
    Ok(SearchResult {
        value: best.value,
        rounds,
        protocol: best.protocol,
        u_a,
        u_b,
        budget_exhausted: exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::employer_candidate;
    use crate::numeric::rat;

    fn opts(filter: SearchFilter, max_rounds: usize) -> SearchOptions {
        SearchOptions {
            max_rounds,
            branching: 3,
            budget: 100_000,
            grid: vec![rat(0, 1), rat(1, 2), rat(3, 5), rat(1, 1)],
            filter,
        }
    }

    #[test]
    fn zero_rounds_is_no_communication() {
        let g = employer_candidate();
        let r = search_expost_conversation(&g, &Objective::Welfare, &opts(SearchFilter::ExPost, 0)).unwrap();
        assert_eq!(r.value, rat(2, 1));
        assert_eq!(r.rounds, 0);
    }

    #[test]
    fn single_action_game_value_is_prior() {
        let g = Game::new(
            vec!["x".into(), "y".into()],
            vec!["u".into(), "v".into()],
            Belief::uniform(2),
            Belief::uniform(2),
            vec!["only".into()],
            vec![
                vec![vec![rat(1, 1)], vec![rat(2, 1)]],
                vec![vec![rat(3, 1)], vec![rat(4, 1)]],
            ],
            vec![vec![vec![rat(0, 1)]; 2]; 2],
            vec!["only".into()],
        )
        .unwrap();
        let r = search_expost_conversation(&g, &Objective::Welfare, &opts(SearchFilter::NonCommitted, 1)).unwrap();
        assert_eq!(r.value, rat(5, 2));
    }

    #[test]
    fn employer_gap_under_both_filters() {
        let g = employer_candidate();
        for filter in [SearchFilter::ExPost, SearchFilter::NonCommitted] {
            let r = search_expost_conversation(&g, &Objective::Welfare, &opts(filter, 2)).unwrap();
            assert!(r.value < rat(22, 5), "{filter:?}: {}", r.value);
            assert!(r.value >= rat(2, 1));
            assert!(!r.budget_exhausted);
        }
    }

    #[test]
    fn tiny_budget_is_flagged() {
        let g = employer_candidate();
        let mut o = opts(SearchFilter::ExPost, 2);
        o.budget = 6;
        let r = search_expost_conversation(&g, &Objective::Welfare, &o).unwrap();
        assert!(r.budget_exhausted);
    }
}
