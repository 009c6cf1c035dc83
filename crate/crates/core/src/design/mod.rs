//! Optimal protocol design as a linear program over obedient recommendations.
//!
//! The variable `x(θ_A, r, θ_B)` is the probability that the types are
//! `(θ_A, θ_B)` and Alice is told to play `r`. Obedience is weak, so ties in
//! Alice's incentives are resolved in the designer's favor.

mod search;

pub use search::{search_expost_conversation, SearchFilter, SearchOptions, SearchResult};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::belief::Belief;
use crate::conversation::{ConversationProtocol, Round};
use crate::error::{Error, Result};
use crate::game::{Game, Table};
use crate::mediator::MediatorProtocol;
use crate::numeric::{LinearProgram, LpStatus, Rational, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IrConstraint {
    None,
    ExAnte,
    Interim,
}

impl fmt::Display for IrConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IrConstraint::None => "none",
            IrConstraint::ExAnte => "exante",
            IrConstraint::Interim => "interim",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    Welfare,
    Alice,
    Bob,
    /// `λ·u_A + (1 − λ)·u_B`.
    Weighted(Rational),
    /// Arbitrary `u(θ_A, θ_B, r)`.
    Table(Table),
}

impl Objective {
    pub fn coeff(&self, game: &Game, a: usize, b: usize, r: usize) -> Rational {
        match self {
            Objective::Welfare => game.u_a(a, b, r) + game.u_b(a, b, r),
            Objective::Alice => game.u_a(a, b, r).clone(),
            Objective::Bob => game.u_b(a, b, r).clone(),
            Objective::Weighted(l) => l * game.u_a(a, b, r) + (Rational::one() - l) * game.u_b(a, b, r),
            Objective::Table(t) => t[a][b][r].clone(),
        }
    }

    fn check(&self, game: &Game) -> Result<()> {
        match self {
            Objective::Table(t) => {
                let ok = t.len() == game.num_a()
                    && t.iter()
                        .all(|row| row.len() == game.num_b() && row.iter().all(|c| c.len() == game.num_actions()));
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidGame("objective table does not match the game".into()))
                }
            }
            Objective::Weighted(l) if l.is_negative() || *l > Rational::one() => {
                Err(Error::OutOfUnitInterval { value: l.clone() })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignProblem {
    pub game: Game,
    pub ir: IrConstraint,
    pub objective: Objective,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecommendationScheme {
    types_a: usize,
    actions: usize,
    types_b: usize,
    x: Vec<Rational>,
}

impl RecommendationScheme {
    pub fn new(types_a: usize, actions: usize, types_b: usize, x: Vec<Rational>) -> Result<Self> {
        if x.len() != types_a * actions * types_b {
            return Err(Error::InvalidDistribution("scheme has the wrong size".into()));
        }
        if x.iter().any(Rational::is_negative) {
            return Err(Error::InvalidDistribution("negative scheme entry".into()));
        }
        Ok(RecommendationScheme {
            types_a,
            actions,
            types_b,
            x,
        })
    }

    /// Always recommends Alice's no-communication action.
    pub fn uninformative(game: &Game) -> Self {
        let r0 = game.no_comm_profile();
        let mut s = RecommendationScheme::zeros(game);
        for a in 0..game.num_a() {
            for b in 0..game.num_b() {
                let i = s.index(a, r0[a], b);
                s.x[i] = game.prior_a().get(a) * game.prior_b().get(b);
            }
        }
        s
    }

    fn zeros(game: &Game) -> Self {
        RecommendationScheme {
            types_a: game.num_a(),
            actions: game.num_actions(),
            types_b: game.num_b(),
            x: vec![Rational::zero(); game.num_a() * game.num_actions() * game.num_b()],
        }
    }

    fn index(&self, a: usize, r: usize, b: usize) -> usize {
        (a * self.actions + r) * self.types_b + b
    }

    pub fn get(&self, a: usize, r: usize, b: usize) -> &Rational {
        &self.x[self.index(a, r, b)]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.types_a, self.actions, self.types_b)
    }

    fn matches(&self, game: &Game) -> Result<()> {
        if self.dims() != (game.num_a(), game.num_actions(), game.num_b()) {
            return Err(Error::InvalidGame("scheme does not match the game".into()));
        }
        Ok(())
    }

    /// `Σ_r x = P(θ_A)P(θ_B)` for every type pair.
    pub fn is_consistent(&self, game: &Game) -> bool {
        (0..self.types_a).all(|a| {
            (0..self.types_b).all(|b| {
                let s: Rational = (0..self.actions).map(|r| self.get(a, r, b)).sum();
                s == game.prior_a().get(a) * game.prior_b().get(b)
            })
        })
    }

    /// Weak obedience for every `(θ_A, r, r')`.
    pub fn is_obedient(&self, game: &Game) -> bool {
        (0..self.types_a).all(|a| {
            (0..self.actions).all(|r| {
                (0..self.actions).all(|r2| {
                    let gain: Rational = (0..self.types_b)
                        .map(|b| self.get(a, r, b) * (game.u_a(a, b, r) - game.u_a(a, b, r2)))
                        .sum();
                    !gain.is_negative()
                })
            })
        })
    }

    /// Expected `u_A`, `u_B` when Alice follows the recommendation.
    pub fn expected_utilities(&self, game: &Game) -> (Rational, Rational) {
        let mut ua = Rational::zero();
        let mut ub = Rational::zero();
        for a in 0..self.types_a {
            for r in 0..self.actions {
                for b in 0..self.types_b {
                    let p = self.get(a, r, b);
                    if p.is_zero() {
                        continue;
                    }
                    ua += p * game.u_a(a, b, r);
                    ub += p * game.u_b(a, b, r);
                }
            }
        }
        (ua, ub)
    }

    pub fn value(&self, game: &Game, objective: &Objective) -> Rational {
        let mut v = Rational::zero();
        for a in 0..self.types_a {
            for r in 0..self.actions {
                for b in 0..self.types_b {
                    let p = self.get(a, r, b);
                    if !p.is_zero() {
                        v += p * objective.coeff(game, a, b, r);
                    }
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub value: Rational,
    pub scheme: RecommendationScheme,
    pub u_a: Rational,
    pub u_b: Rational,
}

pub fn optimize(problem: &DesignProblem) -> Result<Design> {
    let game = &problem.game;
    problem.objective.check(game)?;
    let (na, nr, nb) = (game.num_a(), game.num_actions(), game.num_b());
    let template = RecommendationScheme::zeros(game);
    let var = |a, r, b| template.index(a, r, b);
    let mut lp = LinearProgram::maximize(
        (0..na * nr * nb)
            .map(|i| {
                let (a, r, b) = (i / (nr * nb), (i / nb) % nr, i % nb);
                problem.objective.coeff(game, a, b, r)
            })
            .collect(),
    );
    for a in 0..na {
        for b in 0..nb {
            let terms: Vec<(usize, Rational)> = (0..nr).map(|r| (var(a, r, b), Rational::one())).collect();
            lp.add_sparse(&terms, Relation::Eq, game.prior_a().get(a) * game.prior_b().get(b));
        }
    }
    for a in 0..na {
        for r in 0..nr {
            for r2 in (0..nr).filter(|&r2| r2 != r) {
                let terms: Vec<(usize, Rational)> = (0..nb)
                    .map(|b| (var(a, r, b), game.u_a(a, b, r) - game.u_a(a, b, r2)))
                    .collect();
                lp.add_sparse(&terms, Relation::Ge, Rational::zero());
            }
        }
    }
    let r0 = game.no_comm_profile();
    let benchmark = |b: usize| -> Rational {
        (0..na)
            .map(|a| game.prior_a().get(a) * game.prior_b().get(b) * game.u_b(a, b, r0[a]))
            .sum()
    };
    match problem.ir {
        IrConstraint::None => {}
        IrConstraint::ExAnte => {
            let mut terms = Vec::new();
            for a in 0..na {
                for r in 0..nr {
                    for b in 0..nb {
                        terms.push((var(a, r, b), game.u_b(a, b, r).clone()));
                    }
                }
            }
            let rhs = (0..nb).map(benchmark).sum();
            lp.add_sparse(&terms, Relation::Ge, rhs);
        }
        IrConstraint::Interim => {
            for b in 0..nb {
                let mut terms = Vec::new();
                for a in 0..na {
                    for r in 0..nr {
                        terms.push((var(a, r, b), game.u_b(a, b, r).clone()));
                    }
                }
                lp.add_sparse(&terms, Relation::Ge, benchmark(b));
            }
        }
    }
    let sol = lp.solve();
    if sol.status != LpStatus::Optimal {
        return Err(Error::Invariant(format!(
            "design LP reported {:?} although the uninformative scheme is feasible",
            sol.status
        )));
    }
    let scheme = RecommendationScheme::new(na, nr, nb, sol.point)?;
    let (u_a, u_b) = scheme.expected_utilities(game);
    Ok(Design {
        value: sol.value,
        scheme,
        u_a,
        u_b,
    })
}

/// Signals are the recommended actions that occur with positive probability.
pub fn scheme_to_mediator(scheme: &RecommendationScheme, game: &Game) -> Result<MediatorProtocol> {
    scheme.matches(game)?;
    let (na, nr, nb) = scheme.dims();
    let used: Vec<usize> = (0..nr)
        .filter(|&r| (0..na).any(|a| (0..nb).any(|b| scheme.get(a, r, b).is_positive())))
        .collect();
    if used.is_empty() {
        return Err(Error::InvalidDistribution("scheme has no mass".into()));
    }
    let uniform = Rational::new(1, used.len() as i64);
    let mut kernel = vec![vec![Vec::new(); nb]; na];
    for a in 0..na {
        for b in 0..nb {
            let p = game.prior_a().get(a) * game.prior_b().get(b);
            kernel[a][b] = if p.is_zero() {
                if used.iter().any(|&r| scheme.get(a, r, b).is_positive()) {
                    return Err(Error::Invariant(format!(
                        "zero-prior pair ({a}, {b}) carries recommendation mass"
                    )));
                }
                vec![uniform.clone(); used.len()]
            } else {
                used.iter().map(|&r| scheme.get(a, r, b) / &p).collect()
            };
        }
    }
    MediatorProtocol::new(used.iter().map(|&r| game.actions()[r].clone()).collect(), kernel)
}

/// Alice announces her type; Bob then sends the recommendation, which tells
/// Alice exactly the posterior the scheme assigns to it.
pub fn scheme_to_one_round_conversation(scheme: &RecommendationScheme, game: &Game) -> Result<ConversationProtocol> {
    scheme.matches(game)?;
    let (na, nr, nb) = scheme.dims();
    let round = Round {
        alice: game.types_a().to_vec(),
        bob: game.actions().to_vec(),
    };
    let mut c = ConversationProtocol::new(na, nb, vec![round])?;
    c.set_kernel(
        vec![],
        (0..na).map(|a| Belief::point(na, a).weights().to_vec()).collect(),
    )?;
    let uniform = Rational::new(1, nr as i64);
    for a in 0..na {
        let pa = game.prior_a().get(a);
        if pa.is_zero() {
            continue;
        }
        let mut rows = Vec::with_capacity(nb);
        for b in 0..nb {
            let pb = game.prior_b().get(b);
            if pb.is_zero() {
                if (0..nr).any(|r| scheme.get(a, r, b).is_positive()) {
                    return Err(Error::Invariant(format!(
                        "zero-prior Bob type {b} carries recommendation mass"
                    )));
                }
                rows.push(vec![uniform.clone(); nr]);
            } else {
                // P(q_B | θ_A)·q_B(θ_B)/P(θ_B) with q_B read off x(θ_A, r, ·)
                let p = pa * pb;
                rows.push((0..nr).map(|r| scheme.get(a, r, b) / &p).collect());
            }
        }
        c.set_kernel(vec![game.types_a()[a].clone()], rows)?;
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierPoint {
    pub lambda: Rational,
    pub u_a: Rational,
    pub u_b: Rational,
}

/// Weighted-sum optimum for each `λ`, objective `λ·u_A + (1 − λ)·u_B`.
pub fn pareto_frontier(game: &Game, ir: IrConstraint, weights: &[Rational]) -> Result<Vec<FrontierPoint>> {
    if weights.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidDistribution("weights must be sorted".into()));
    }
    weights
        .iter()
        .map(|l| {
            let d = optimize(&DesignProblem {
                game: game.clone(),
                ir,
                objective: Objective::Weighted(l.clone()),
            })?;
            Ok(FrontierPoint {
                lambda: l.clone(),
                u_a: d.u_a,
                u_b: d.u_b,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::employer_candidate;
    use crate::ir;
    use crate::numeric::rat;
    use crate::protocol::Protocol;

    fn employer_design(ir: IrConstraint, objective: Objective) -> Design {
        optimize(&DesignProblem {
            game: employer_candidate(),
            ir,
            objective,
        })
        .unwrap()
    }

    #[test]
    fn employer_welfare_optimum() {
        let d = employer_design(IrConstraint::Interim, Objective::Welfare);
        assert_eq!(d.value, rat(22, 5));
        assert_eq!((d.u_a.clone(), d.u_b.clone()), (rat(3, 1), rat(7, 5)));
        let (p, c, hire, not) = (0, 1, 0, 1);
        let s = &d.scheme;
        assert_eq!(*s.get(p, hire, p), rat(3, 10));
        assert_eq!(*s.get(p, not, c), rat(1, 5));
        assert_eq!(*s.get(c, hire, p), rat(1, 5));
        assert_eq!(*s.get(c, hire, c), rat(1, 5));
        assert_eq!(*s.get(c, not, p), rat(1, 10));
        assert_eq!(
            employer_design(IrConstraint::None, Objective::Welfare).value,
            rat(22, 5)
        );
    }

    #[test]
    fn ir_nesting_on_employer() {
        let none = employer_design(IrConstraint::None, Objective::Bob).value;
        let exante = employer_design(IrConstraint::ExAnte, Objective::Alice).value;
        let interim = employer_design(IrConstraint::Interim, Objective::Alice).value;
        let free = employer_design(IrConstraint::None, Objective::Alice).value;
        assert!(free >= exante && exante >= interim);
        assert!(none >= rat(7, 5));
    }

    #[test]
    fn single_action_game_is_uninformative() {
        let g = Game::new(
            vec!["x".into(), "y".into()],
            vec!["u".into()],
            Belief::uniform(2),
            Belief::uniform(1),
            vec!["only".into()],
            vec![vec![vec![rat(1, 1)]], vec![vec![rat(3, 1)]]],
            vec![vec![vec![rat(5, 1)]], vec![vec![rat(7, 1)]]],
            vec!["only".into()],
        )
        .unwrap();
        let d = optimize(&DesignProblem {
            game: g.clone(),
            ir: IrConstraint::Interim,
            objective: Objective::Welfare,
        })
        .unwrap();
        assert_eq!(d.value, rat(8, 1));
        assert_eq!(d.scheme, RecommendationScheme::uninformative(&g));
        let med = scheme_to_mediator(&d.scheme, &g).unwrap();
        assert_eq!(med.signals().len(), 1);
    }

    #[test]
    fn realizations_match_scheme() {
        let g = employer_candidate();
        let d = employer_design(IrConstraint::Interim, Objective::Welfare);
        let med: Protocol = scheme_to_mediator(&d.scheme, &g).unwrap().into();
        let conv: Protocol = scheme_to_one_round_conversation(&d.scheme, &g).unwrap().into();
        assert_eq!(med.expected_utilities(&g).unwrap(), (d.u_a.clone(), d.u_b.clone()));
        assert_eq!(conv.expected_utilities(&g).unwrap(), (d.u_a.clone(), d.u_b.clone()));
        assert_eq!(
            ir::interim_ir(&g, &med).unwrap().pass(),
            ir::interim_ir(&g, &conv).unwrap().pass()
        );
        assert!(ir::interim_ir(&g, &med).unwrap().pass());
    }

    #[test]
    fn action_mediator_is_not_expost_ir() {
        let g = employer_candidate();
        let d = employer_design(IrConstraint::Interim, Objective::Welfare);
        let med: Protocol = scheme_to_mediator(&d.scheme, &g).unwrap().into();
        let r = ir::expost_ir(&g, &med).unwrap();
        let v: Vec<_> = r.violations().collect();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].own_type, v[0].at.as_deref()), (Some(1), Some("not-hire")));
        assert_eq!((v[0].lhs.clone(), v[0].rhs.clone()), (rat(0, 1), rat(2, 1)));
    }

    #[test]
    fn one_round_bob_kernel() {
        let g = employer_candidate();
        let d = employer_design(IrConstraint::Interim, Objective::Welfare);
        let c = scheme_to_one_round_conversation(&d.scheme, &g).unwrap();
        let k = c.kernel_at(&["Comm".to_string()]).unwrap();
        assert_eq!(k[0], vec![rat(2, 3), rat(1, 3)]);
        assert_eq!(k[1], vec![rat(1, 1), rat(0, 1)]);
    }

    #[test]
    fn uninformative_and_revealing_schemes() {
        let g = employer_candidate();
        let u = RecommendationScheme::uninformative(&g);
        assert!(u.is_consistent(&g) && u.is_obedient(&g));
        let c = scheme_to_one_round_conversation(&u, &g).unwrap();
        for a in g.types_a() {
            let k = c.kernel_at(std::slice::from_ref(a)).unwrap();
            assert!(
                k.windows(2).all(|w| w[0] == w[1]),
                "Bob's signal must not depend on his type"
            );
        }
        // recommend the row-argmax of u_A under full information
        let mut x = vec![Rational::zero(); 8];
        for a in 0..2 {
            for b in 0..2 {
                let r = g.best_response(a, &Belief::point(2, b));
                x[(a * 2 + r) * 2 + b] = g.prior_a().get(a) * g.prior_b().get(b);
            }
        }
        let full = RecommendationScheme::new(2, 2, 2, x).unwrap();
        assert!(full.is_obedient(&g));
        let med = scheme_to_mediator(&full, &g).unwrap();
        assert!(med
            .kernel()
            .iter()
            .flatten()
            .all(|row| row.iter().filter(|p| !p.is_zero()).count() == 1));
    }

    #[test]
    fn pareto_monotone_and_alice_end() {
        let g = employer_candidate();
        let weights: Vec<Rational> = (0..=4).map(|k| rat(k, 4)).collect();
        let f = pareto_frontier(&g, IrConstraint::Interim, &weights).unwrap();
        assert!(f.windows(2).all(|w| w[0].u_a <= w[1].u_a && w[0].u_b >= w[1].u_b));
        // Alice's best interim-IR outcome: employers learn θ_B exactly
        assert_eq!(f.last().unwrap().u_a, rat(16, 5));
        assert!(pareto_frontier(&g, IrConstraint::Interim, &[rat(1, 2), rat(1, 4)]).is_err());
    }
}
