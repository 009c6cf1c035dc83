//! The base game: independent private types, Alice's action, two payoff tables.

use std::collections::BTreeSet;

use crate::belief::{Belief, Matrix};
use crate::error::{Error, Result};
use crate::numeric::{rat, Rational};

/// Payoffs indexed `[θ_A][θ_B][r]`.
pub type Table = Vec<Vec<Vec<Rational>>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    types_a: Vec<String>,
    types_b: Vec<String>,
    prior_a: Belief,
    prior_b: Belief,
    actions: Vec<String>,
    util_a: Table,
    util_b: Table,
    /// Rank of each action in the tie-break order; lower wins.
    rank: Vec<usize>,
}

fn check_labels(kind: &str, labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidGame(format!("no {kind}")));
    }
    let unique: BTreeSet<&String> = labels.iter().collect();
    if unique.len() != labels.len() {
        return Err(Error::InvalidGame(format!("duplicate {kind} label")));
    }
    Ok(())
}

fn check_table(name: &str, t: &Table, a: usize, b: usize, r: usize) -> Result<()> {
    let ok = t.len() == a && t.iter().all(|row| row.len() == b && row.iter().all(|c| c.len() == r));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGame(format!("{name} is not a {a}x{b}x{r} table")))
    }
}

impl Game {
    /// `tie_break` lists every action once, most preferred first.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        types_a: Vec<String>,
        types_b: Vec<String>,
        prior_a: Belief,
        prior_b: Belief,
        actions: Vec<String>,
        util_a: Table,
        util_b: Table,
        tie_break: Vec<String>,
    ) -> Result<Game> {
        check_labels("Alice types", &types_a)?;
        check_labels("Bob types", &types_b)?;
        check_labels("actions", &actions)?;
        if prior_a.len() != types_a.len() || prior_b.len() != types_b.len() {
            return Err(Error::InvalidGame("prior length does not match types".into()));
        }
        check_table("u_A", &util_a, types_a.len(), types_b.len(), actions.len())?;
        check_table("u_B", &util_b, types_a.len(), types_b.len(), actions.len())?;
        let mut rank = vec![usize::MAX; actions.len()];
        for (pos, label) in tie_break.iter().enumerate() {
            let i = actions
                .iter()
                .position(|a| a == label)
                .ok_or_else(|| Error::UnknownLabel {
                    kind: "action",
                    label: label.clone(),
                })?;
            if rank[i] != usize::MAX {
                return Err(Error::InvalidGame(format!("`{label}` repeated in tie-break")));
            }
            rank[i] = pos;
        }
        if rank.contains(&usize::MAX) {
            return Err(Error::InvalidGame("tie-break must order every action".into()));
        }
        Ok(Game {
            types_a,
            types_b,
            prior_a,
            prior_b,
            actions,
            util_a,
            util_b,
            rank,
        })
    }

    pub fn types_a(&self) -> &[String] {
        &self.types_a
    }

    pub fn types_b(&self) -> &[String] {
        &self.types_b
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn prior_a(&self) -> &Belief {
        &self.prior_a
    }

    pub fn prior_b(&self) -> &Belief {
        &self.prior_b
    }

    pub fn prior_product(&self) -> Matrix {
        Matrix::product(&self.prior_a, &self.prior_b)
    }

    pub fn num_a(&self) -> usize {
        self.types_a.len()
    }

    pub fn num_b(&self) -> usize {
        self.types_b.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn u_a(&self, a: usize, b: usize, r: usize) -> &Rational {
        &self.util_a[a][b][r]
    }

    pub fn u_b(&self, a: usize, b: usize, r: usize) -> &Rational {
        &self.util_b[a][b][r]
    }

    pub fn util_a(&self) -> &Table {
        &self.util_a
    }

    pub fn util_b(&self) -> &Table {
        &self.util_b
    }

    /// Actions, most preferred first.
    pub fn tie_break(&self) -> Vec<String> {
        let mut order: Vec<usize> = (0..self.actions.len()).collect();
        order.sort_by_key(|&r| self.rank[r]);
        order.into_iter().map(|r| self.actions[r].clone()).collect()
    }

    pub fn type_a_index(&self, label: &str) -> Result<usize> {
        index_of(&self.types_a, label, "Alice type")
    }

    pub fn type_b_index(&self, label: &str) -> Result<usize> {
        index_of(&self.types_b, label, "Bob type")
    }

    pub fn action_index(&self, label: &str) -> Result<usize> {
        index_of(&self.actions, label, "action")
    }

    pub fn expected_u_a(&self, a: usize, belief_b: &Belief, r: usize) -> Rational {
        belief_b.expect(|b| self.util_a[a][b][r].clone())
    }

    /// Alice's best action for type `a` under belief `belief_b`.
    pub fn best_response(&self, a: usize, belief_b: &Belief) -> usize {
        let mut best = 0;
        let mut best_value = self.expected_u_a(a, belief_b, 0);
        for r in 1..self.actions.len() {
            let v = self.expected_u_a(a, belief_b, r);
            if v > best_value || (v == best_value && self.rank[r] < self.rank[best]) {
                best = r;
                best_value = v;
            }
        }
        best
    }

    pub fn best_response_by_label(&self, type_a: &str, belief_b: &Belief) -> Result<&str> {
        let a = self.type_a_index(type_a)?;
        if belief_b.len() != self.num_b() {
            return Err(Error::InvalidDistribution("belief has the wrong dimension".into()));
        }
        Ok(&self.actions[self.best_response(a, belief_b)])
    }

    /// `r^0`: each Alice type's best action at the prior.
    pub fn no_comm_profile(&self) -> Vec<usize> {
        (0..self.num_a())
            .map(|a| self.best_response(a, &self.prior_b))
            .collect()
    }

    /// Expected `(u_A, u_B)` when nobody communicates.
    pub fn no_comm_utilities(&self) -> (Rational, Rational) {
        let r0 = self.no_comm_profile();
        let mut ua = Rational::zero();
        let mut ub = Rational::zero();
        for a in 0..self.num_a() {
            for b in 0..self.num_b() {
                let p = self.prior_a.get(a) * self.prior_b.get(b);
                ua += &p * &self.util_a[a][b][r0[a]];
                ub += &p * &self.util_b[a][b][r0[a]];
            }
        }
        (ua, ub)
    }
}

fn index_of(labels: &[String], label: &str, kind: &'static str) -> Result<usize> {
    labels
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::UnknownLabel {
            kind,
            label: label.to_string(),
        })
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn employer_candidate() -> Game {
    // types: 0 = Prog, 1 = Comm; actions: 0 = hire, 1 = not-hire
    let ua = |a: usize, b: usize| match (a, b) {
        (0, 0) => 10,
        (0, _) => -10,
        (_, 0) => -1,
        _ => 1,
    };
    let util_a = (0..2)
        .map(|a| {
            (0..2)
                .map(|b| vec![Rational::from(ua(a, b)), Rational::zero()])
                .collect()
        })
        .collect();
    let util_b = vec![vec![vec![rat(2, 1), rat(0, 1)]; 2]; 2];
    Game::new(
        strings(&["Prog", "Comm"]),
        strings(&["Prog", "Comm"]),
        Belief::uniform(2),
        Belief::new(vec![rat(3, 5), rat(2, 5)]).expect("valid prior"),
        strings(&["hire", "not-hire"]),
        util_a,
        util_b,
        strings(&["hire", "not-hire"]),
    )
    .expect("employer game is well formed")
}

/// Two-player Stackelberg game: Alice commits to `r_A`, Bob best-replies.
#[derive(Debug, Clone)]
pub struct Stackelberg {
    pub types_a: Vec<String>,
    pub types_b: Vec<String>,
    pub prior_a: Belief,
    pub prior_b: Belief,
    pub actions_a: Vec<String>,
    pub actions_b: Vec<String>,
    /// `G_A` indexed `[r_A][r_B][θ_A]`.
    pub g_a: Vec<Vec<Vec<Rational>>>,
    /// `G_B` indexed `[r_A][r_B][θ_B]`.
    pub g_b: Vec<Vec<Vec<Rational>>>,
    /// Bob's reply order on ties, most preferred first.
    pub reply_order: Vec<String>,
    pub tie_break: Vec<String>,
}

impl Stackelberg {
    /// Bob's best reply to `r_a` when his type is `b`.
    pub fn reply(&self, r_a: usize, b: usize) -> Result<usize> {
        let rank = |rb: usize| self.reply_order.iter().position(|l| *l == self.actions_b[rb]);
        let mut best: Option<usize> = None;
        for rb in 0..self.actions_b.len() {
            let Some(rk) = rank(rb) else {
                return Err(Error::UnknownLabel {
                    kind: "Bob action in reply order",
                    label: self.actions_b[rb].clone(),
                });
            };
            best = match best {
                None => Some(rb),
                Some(cur) => {
                    let (v, w) = (&self.g_b[r_a][rb][b], &self.g_b[r_a][cur][b]);
                    if v > w || (v == w && Some(rk) < rank(cur)) {
                        Some(rb)
                    } else {
                        Some(cur)
                    }
                }
            };
        }
        best.ok_or_else(|| Error::InvalidGame("Bob has no actions".into()))
    }

    pub fn into_game(self) -> Result<Game> {
        let (na, nb, nr) = (self.types_a.len(), self.types_b.len(), self.actions_a.len());
        let shape_ok = self.g_a.len() == nr
            && self.g_b.len() == nr
            && self
                .g_a
                .iter()
                .chain(&self.g_b)
                .all(|t| t.len() == self.actions_b.len())
            && self.g_a.iter().all(|t| t.iter().all(|v| v.len() == na))
            && self.g_b.iter().all(|t| t.iter().all(|v| v.len() == nb));
        if !shape_ok {
            return Err(Error::InvalidGame(
                "Stackelberg payoff tables have the wrong shape".into(),
            ));
        }
        let mut util_a = vec![vec![vec![Rational::zero(); nr]; nb]; na];
        let mut util_b = util_a.clone();
        for r in 0..nr {
            for b in 0..nb {
                let rb = self.reply(r, b)?;
                for a in 0..na {
                    util_a[a][b][r] = self.g_a[r][rb][a].clone();
                    util_b[a][b][r] = self.g_b[r][rb][b].clone();
                }
            }
        }
        Game::new(
            self.types_a,
            self.types_b,
            self.prior_a,
            self.prior_b,
            self.actions_a,
            util_a,
            util_b,
            self.tie_break,
        )
    }
}

pub fn from_stackelberg(spec: Stackelberg) -> Result<Game> {
    spec.into_game()
}

fn price_set(grid_a: &[Rational], grid_b: &[Rational]) -> Result<Vec<Rational>> {
    if grid_a.is_empty() || grid_b.is_empty() {
        return Err(Error::InvalidGame("empty value grid".into()));
    }
    for v in grid_a.iter().chain(grid_b) {
        if v.is_negative() || *v > Rational::one() {
            return Err(Error::OutOfUnitInterval { value: v.clone() });
        }
    }
    let prices: BTreeSet<Rational> = grid_a.iter().chain(grid_b).cloned().collect();
    Ok(prices.into_iter().collect())
}

fn value_labels(grid: &[Rational]) -> Result<Vec<String>> {
    let labels: Vec<String> = grid.iter().map(|v| v.to_string()).collect();
    check_labels("grid values", &labels)?;
    Ok(labels)
}

/// Seller Alice with value `θ_A` posts a price; buyer Bob with value `θ_B`
/// accepts iff the price is at most his value. Prices are the union of both
/// grids; ties go to the lower price.
pub fn bilateral_trade(grid_a: &[Rational], grid_b: &[Rational], prior_a: Belief, prior_b: Belief) -> Result<Game> {
    let prices = price_set(grid_a, grid_b)?;
    let nr = prices.len();
    let mut util_a = vec![vec![vec![Rational::zero(); nr]; grid_b.len()]; grid_a.len()];
    let mut util_b = util_a.clone();
    for (a, va) in grid_a.iter().enumerate() {
        for (b, vb) in grid_b.iter().enumerate() {
            for (r, p) in prices.iter().enumerate() {
                if p <= vb {
                    util_a[a][b][r] = p - va;
                    util_b[a][b][r] = vb - p;
                }
            }
        }
    }
    let actions: Vec<String> = prices.iter().map(|p| p.to_string()).collect();
    Game::new(
        value_labels(grid_a)?,
        value_labels(grid_b)?,
        prior_a,
        prior_b,
        actions.clone(),
        util_a,
        util_b,
        actions,
    )
}

/// Bilateral trade written as a Stackelberg game with Bob choosing accept/reject.
pub fn bilateral_trade_stackelberg(
    grid_a: &[Rational],
    grid_b: &[Rational],
    prior_a: Belief,
    prior_b: Belief,
) -> Result<Stackelberg> {
    let prices = price_set(grid_a, grid_b)?;
    let g_a = prices
        .iter()
        .map(|p| {
            vec![
                grid_a.iter().map(|va| p - va).collect(),
                vec![Rational::zero(); grid_a.len()],
            ]
        })
        .collect();
    let g_b = prices
        .iter()
        .map(|p| {
            vec![
                grid_b.iter().map(|vb| vb - p).collect(),
                vec![Rational::zero(); grid_b.len()],
            ]
        })
        .collect();
    let actions: Vec<String> = prices.iter().map(|p| p.to_string()).collect();
    Ok(Stackelberg {
        types_a: value_labels(grid_a)?,
        types_b: value_labels(grid_b)?,
        prior_a,
        prior_b,
        actions_a: actions.clone(),
        actions_b: strings(&["accept", "reject"]),
        g_a,
        g_b,
        reply_order: strings(&["accept", "reject"]),
        tie_break: actions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(w: &[(i64, i64)]) -> Belief {
        Belief::new(w.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    #[test]
    fn employer_table() {
        let g = employer_candidate();
        let (p, c, hire, not) = (0, 1, 0, 1);
        assert_eq!(*g.u_a(p, p, hire), rat(10, 1));
        assert_eq!(*g.u_a(p, c, hire), rat(-10, 1));
        assert_eq!(*g.u_a(c, p, hire), rat(-1, 1));
        assert_eq!(*g.u_a(c, c, hire), rat(1, 1));
        for a in 0..2 {
            for bb in 0..2 {
                assert_eq!(*g.u_a(a, bb, not), rat(0, 1));
                assert_eq!(*g.u_b(a, bb, not), rat(0, 1));
                assert_eq!(*g.u_b(a, bb, hire), rat(2, 1));
            }
        }
        assert_eq!(*g.prior_b().get(p), rat(3, 5));
        assert_eq!(g.no_comm_profile(), vec![hire, not]);
    }

    #[test]
    fn employer_best_responses() {
        let g = employer_candidate();
        assert_eq!(g.best_response_by_label("Comm", &Belief::uniform(2)).unwrap(), "hire");
        assert_eq!(g.best_response_by_label("Prog", &Belief::point(2, 0)).unwrap(), "hire");
        assert_eq!(g.expected_u_a(0, g.prior_b(), 0), rat(2, 1));
        assert_eq!(g.best_response_by_label("Prog", g.prior_b()).unwrap(), "hire");
        assert!(g.best_response_by_label("Manager", g.prior_b()).is_err());
        assert_eq!(g.no_comm_utilities(), (rat(1, 1), rat(1, 1)));
    }

    #[test]
    fn single_action_game() {
        let g = Game::new(
            strings(&["x", "y"]),
            strings(&["u"]),
            Belief::uniform(2),
            Belief::uniform(1),
            strings(&["only"]),
            vec![vec![vec![rat(1, 1)]]; 2],
            vec![vec![vec![rat(3, 1)]]; 2],
            strings(&["only"]),
        )
        .unwrap();
        assert_eq!(g.no_comm_profile(), vec![0, 0]);
    }

    #[test]
    fn game_validation() {
        let bad_tie = Game::new(
            strings(&["x"]),
            strings(&["u"]),
            Belief::uniform(1),
            Belief::uniform(1),
            strings(&["l", "r"]),
            vec![vec![vec![rat(0, 1); 2]]],
            vec![vec![vec![rat(0, 1); 2]]],
            strings(&["l"]),
        );
        assert!(bad_tie.is_err());
        let bad_shape = Game::new(
            strings(&["x"]),
            strings(&["u"]),
            Belief::uniform(1),
            Belief::uniform(1),
            strings(&["l"]),
            vec![vec![vec![rat(0, 1); 2]]],
            vec![vec![vec![rat(0, 1)]]],
            strings(&["l"]),
        );
        assert!(bad_shape.is_err());
    }

    fn grid3() -> Vec<Rational> {
        vec![rat(0, 1), rat(1, 2), rat(1, 1)]
    }

    #[test]
    fn bilateral_formulas() {
        let g = bilateral_trade(&grid3(), &grid3(), Belief::uniform(3), Belief::uniform(3)).unwrap();
        let half = g.action_index("1/2").unwrap();
        let (a0, a_half) = (g.type_a_index("0/1").unwrap(), g.type_a_index("1/2").unwrap());
        let (b_half, b1) = (g.type_b_index("1/2").unwrap(), g.type_b_index("1/1").unwrap());
        assert_eq!(*g.u_a(a_half, b_half, half), rat(0, 1));
        assert_eq!(*g.u_b(a_half, b_half, half), rat(0, 1));
        assert_eq!(*g.u_a(a0, b1, half), rat(1, 2));
        assert_eq!(*g.u_b(a0, b1, half), rat(1, 2));
        let b0 = g.type_b_index("0/1").unwrap();
        assert_eq!(*g.u_a(a0, b0, half), rat(0, 1));
        assert_eq!(*g.u_b(a0, b0, half), rat(0, 1));
        assert!(bilateral_trade(&[rat(3, 2)], &grid3(), Belief::uniform(1), Belief::uniform(3)).is_err());
    }

    #[test]
    fn bilateral_no_comm_price() {
        // seller value 0: prices 0, 1/2, 1 earn 0, 1/2 * 2/3, 1 * 1/3
        let g = bilateral_trade(&grid3(), &grid3(), Belief::uniform(3), Belief::uniform(3)).unwrap();
        let revenue: Vec<Rational> = (0..3).map(|r| g.expected_u_a(0, g.prior_b(), r)).collect();
        assert_eq!(revenue, vec![rat(0, 1), rat(1, 3), rat(1, 3)]);
        let r0 = g.no_comm_profile();
        assert_eq!(g.actions()[r0[0]], "1/2");
    }

    #[test]
    fn stackelberg_matches_builtin_trade() {
        let grid_b = vec![rat(1, 4), rat(3, 4), rat(1, 1)];
        let spec = bilateral_trade_stackelberg(&grid3(), &grid_b, Belief::uniform(3), Belief::uniform(3)).unwrap();
        let via = from_stackelberg(spec).unwrap();
        let direct = bilateral_trade(&grid3(), &grid_b, Belief::uniform(3), Belief::uniform(3)).unwrap();
        assert_eq!(via, direct);
    }

    #[test]
    fn stackelberg_constant_reply() {
        // Bob's payoff ignores Alice's action: reply is fixed per type
        let spec = Stackelberg {
            types_a: strings(&["a"]),
            types_b: strings(&["p", "q"]),
            prior_a: Belief::uniform(1),
            prior_b: Belief::uniform(2),
            actions_a: strings(&["x", "y"]),
            actions_b: strings(&["m", "n"]),
            g_a: vec![
                vec![vec![rat(1, 1)], vec![rat(2, 1)]],
                vec![vec![rat(3, 1)], vec![rat(4, 1)]],
            ],
            g_b: vec![
                vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
                vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
            ],
            reply_order: strings(&["m", "n"]),
            tie_break: strings(&["x", "y"]),
        };
        let g = spec.into_game().unwrap();
        // type p replies m, type q replies n
        assert_eq!(*g.u_a(0, 0, 0), rat(1, 1));
        assert_eq!(*g.u_a(0, 1, 0), rat(2, 1));
        assert_eq!(*g.u_a(0, 0, 1), rat(3, 1));
        assert_eq!(*g.u_a(0, 1, 1), rat(4, 1));
    }

    #[test]
    fn stackelberg_hand_table() {
        // G_B[r_A][r_B][θ_B]; replies worked out by hand:
        // r_A = x: type p prefers m (2 > 1), type q ties (1 = 1) -> m by order
        // r_A = y: type p prefers n (3 > 0), type q prefers m (2 > 0)
        let spec = Stackelberg {
            types_a: strings(&["s", "t"]),
            types_b: strings(&["p", "q"]),
            prior_a: Belief::uniform(2),
            prior_b: Belief::uniform(2),
            actions_a: strings(&["x", "y"]),
            actions_b: strings(&["m", "n"]),
            g_a: vec![
                vec![vec![rat(1, 1), rat(5, 1)], vec![rat(-1, 1), rat(7, 1)]],
                vec![vec![rat(2, 1), rat(6, 1)], vec![rat(-2, 1), rat(8, 1)]],
            ],
            g_b: vec![
                vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]],
                vec![vec![rat(0, 1), rat(2, 1)], vec![rat(3, 1), rat(0, 1)]],
            ],
            reply_order: strings(&["m", "n"]),
            tie_break: strings(&["x", "y"]),
        };
        let g = spec.into_game().unwrap();
        let expect_a = [[[1, -2], [1, 2]], [[5, 8], [5, 6]]];
        let expect_b = [[[2, 3], [1, 2]], [[2, 3], [1, 2]]];
        for a in 0..2 {
            for bb in 0..2 {
                for r in 0..2 {
                    assert_eq!(*g.u_a(a, bb, r), rat(expect_a[a][bb][r], 1), "u_A({a},{bb},{r})");
                    assert_eq!(*g.u_b(a, bb, r), rat(expect_b[a][bb][r], 1), "u_B({a},{bb},{r})");
                }
            }
        }
    }

    fn small_game(vals: &[i64], scale: i64, shift: &[i64]) -> Game {
        let na = 2;
        let nb = 2;
        let nr = 3;
        let mut util_a = vec![vec![vec![Rational::zero(); nr]; nb]; na];
        for a in 0..na {
            for bb in 0..nb {
                for r in 0..nr {
                    util_a[a][bb][r] = rat(vals[(a * nb + bb) * nr + r] * scale + shift[a], 1);
                }
            }
        }
        Game::new(
            strings(&["a0", "a1"]),
            strings(&["b0", "b1"]),
            Belief::uniform(2),
            Belief::uniform(2),
            strings(&["r0", "r1", "r2"]),
            util_a,
            vec![vec![vec![Rational::zero(); nr]; nb]; na],
            strings(&["r2", "r0", "r1"]),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn argmax_invariance(
            vals in proptest::collection::vec(-3i64..4, 12),
            scale in 1i64..5,
            shift in proptest::collection::vec(-5i64..6, 2),
            w in 0i64..=6,
        ) {
            let base = small_game(&vals, 1, &[0, 0]);
            let moved = small_game(&vals, scale, &shift);
            let belief = b(&[(w, 6), (6 - w, 6)]);
            for a in 0..2 {
                prop_assert_eq!(base.best_response(a, &belief), moved.best_response(a, &belief));
            }
        }

        #[test]
        fn point_belief_is_row_argmax(vals in proptest::collection::vec(-3i64..4, 12)) {
            let g = small_game(&vals, 1, &[0, 0]);
            for a in 0..2 {
                for bb in 0..2 {
                    let chosen = g.best_response(a, &Belief::point(2, bb));
                    let best = (0..3).map(|r| g.u_a(a, bb, r).clone()).max().unwrap();
                    prop_assert_eq!(g.u_a(a, bb, chosen), &best);
                }
            }
        }
    }
}
