//! Beliefs, observer posteriors and joint posterior distributions.
//!
//! Types are identified by their index in the owning game's type list, so a
//! [`Belief`] is just a weight vector in that canonical order. Two equal
//! beliefs are structurally equal and can key ordered maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<Rational>);

impl Belief {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty belief".into()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::InvalidDistribution(format!("negative weight {w}")));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Belief(weights))
    }

    /// Normalizes non-negative `mass`; fails when the mass is all zero.
    pub fn normalize(mass: Vec<Rational>) -> Result<Self> {
        let total: Rational = mass.iter().sum();
        if !total.is_positive() {
            return Err(Error::ZeroMass("normalizing an all-zero vector".into()));
        }
        Belief::new(mass.into_iter().map(|m| m / &total).collect())
    }

    pub fn point(len: usize, index: usize) -> Self {
        let mut w = vec![Rational::zero(); len];
        w[index] = Rational::one();
        Belief(w)
    }

    pub fn uniform(len: usize) -> Self {
        let w = Rational::new(1, len as i64);
        Belief(vec![w; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.0
    }

    pub fn get(&self, index: usize) -> &Rational {
        &self.0[index]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_positive())
            .map(|(i, _)| i)
    }

    pub fn expect(&self, f: impl Fn(usize) -> Rational) -> Rational {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .map(|(i, w)| w * f(i))
            .sum()
    }
}

/// Beliefs over `len` types whose weights all lie in `coords` (0 and 1 are
/// always allowed), plus every belief in `extra`. Sorted and deduplicated.
/// On a binary space each coordinate `c` names the belief `(c, 1 - c)`.
pub fn grid_beliefs(len: usize, coords: &[Rational], extra: &[Belief]) -> Vec<Belief> {
    let mut values: Vec<Rational> = coords
        .iter()
        .filter(|c| !c.is_negative() && **c <= Rational::one())
        .cloned()
        .chain([Rational::zero(), Rational::one()])
        .collect();
    values.sort();
    values.dedup();
    let mut out: Vec<Belief> = extra.iter().filter(|b| b.len() == len).cloned().collect();
    if len == 2 {
        out.extend(values.iter().map(|v| Belief(vec![v.clone(), Rational::one() - v])));
        out.sort();
        out.dedup();
        return out;
    }
    let mut current = Vec::with_capacity(len);
    fn fill(values: &[Rational], len: usize, current: &mut Vec<Rational>, out: &mut Vec<Belief>) {
        let used: Rational = current.iter().sum();
        if current.len() + 1 == len {
            let last = Rational::one() - used;
            if values.contains(&last) {
                current.push(last);
                out.push(Belief(current.clone()));
                current.pop();
            }
            return;
        }
        for v in values {
            if &used + v > Rational::one() {
                break;
            }
            current.push(v.clone());
            fill(values, len, current, out);
            current.pop();
        }
    }
    if len > 0 {
        fill(&values, len, &mut current, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

/// A dense `rows × cols` grid, rows indexed by Alice's type and columns by Bob's.
///
/// Used both for observer posteriors (entries sum to one) and for reach
/// matrices, which carry unnormalized probability mass.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<Rational>>", try_from = "Vec<Vec<Rational>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

pub type ObserverPosterior = Matrix;

impl From<Matrix> for Vec<Vec<Rational>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<Rational>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<Rational>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidDistribution("ragged or empty matrix".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Outer product `a ⊗ b`.
    pub fn product(a: &Belief, b: &Belief) -> Self {
        let mut m = Matrix::zeros(a.len(), b.len());
        for x in 0..a.len() {
            for y in 0..b.len() {
                m.data[x * b.len() + y] = a.get(x) * b.get(y);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> &Rational {
        &self.data[x * self.cols + y]
    }

    pub fn set(&mut self, x: usize, y: usize, value: Rational) {
        self.data[x * self.cols + y] = value;
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.cols).map(<[_]>::to_vec).collect()
    }

    pub fn total(&self) -> Rational {
        self.data.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        self.data.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<Rational> {
        (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.get(x, y)).sum())
            .collect()
    }

    pub fn row(&self, x: usize) -> Vec<Rational> {
        self.data[x * self.cols..(x + 1) * self.cols].to_vec()
    }

    pub fn col(&self, y: usize) -> Vec<Rational> {
        (0..self.rows).map(|x| self.get(x, y).clone()).collect()
    }

    pub fn scale(&self, factor: &Rational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Matrix, factor: &Rational) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
    }

    /// `diag(d) · self`.
    pub fn scale_rows(&self, d: &[Rational]) -> Matrix {
        let mut m = self.clone();
        for x in 0..self.rows {
            for y in 0..self.cols {
                m.data[x * self.cols + y] *= &d[x];
            }
        }
        m
    }

    /// `self · diag(d)`.
    pub fn scale_cols(&self, d: &[Rational]) -> Matrix {
        let mut m = self.clone();
        for x in 0..self.rows {
            for y in 0..self.cols {
                m.data[x * self.cols + y] *= &d[y];
            }
        }
        m
    }

    pub fn normalized(&self) -> Result<Matrix> {
        let total = self.total();
        if !total.is_positive() {
            return Err(Error::ZeroMass("normalizing a zero matrix".into()));
        }
        Ok(self.scale(&total.recip()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub signal: String,
    pub prob: Rational,
    pub posterior: ObserverPosterior,
}

pub(crate) fn check_distribution(row: &[Rational], len: usize, context: impl Fn() -> String) -> Result<()> {
    if row.len() != len {
        return Err(Error::InvalidDistribution(format!(
            "{}: expected {len} entries, got {}",
            context(),
            row.len()
        )));
    }
    if row.iter().any(Rational::is_negative) {
        return Err(Error::InvalidDistribution(format!(
            "{}: negative probability",
            context()
        )));
    }
    let total: Rational = row.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidDistribution(format!(
            "{}: row sums to {total}",
            context()
        )));
    }
    Ok(())
}

/// Splits `q` by a public signal drawn from `kernel[x][y]`, a distribution over `signals`.
pub fn split_posterior(q: &ObserverPosterior, signals: &[String], kernel: &[Vec<Vec<Rational>>]) -> Result<Vec<Split>> {
    if kernel.len() != q.rows() || kernel.iter().any(|r| r.len() != q.cols()) {
        return Err(Error::InvalidDistribution(
            "kernel shape does not match the posterior".into(),
        ));
    }
    for (x, row) in kernel.iter().enumerate() {
        for (y, dist) in row.iter().enumerate() {
            check_distribution(dist, signals.len(), || format!("kernel row ({x}, {y})"))?;
        }
    }
    let mut out = Vec::new();
    for (s, signal) in signals.iter().enumerate() {
        let mut m = Matrix::zeros(q.rows(), q.cols());
        for x in 0..q.rows() {
            for y in 0..q.cols() {
                m.set(x, y, q.get(x, y) * &kernel[x][y][s]);
            }
        }
        let prob = m.total();
        if prob.is_zero() {
            continue;
        }
        out.push(Split {
            signal: signal.clone(),
            posterior: m.scale(&prob.recip()),
            prob,
        });
    }
    Ok(out)
}

pub fn mean_posterior(splits: &[(Rational, ObserverPosterior)]) -> Result<ObserverPosterior> {
    let first = splits
        .first()
        .ok_or_else(|| Error::InvalidDistribution("empty posterior family".into()))?;
    let total: Rational = splits.iter().map(|(p, _)| p).sum();
    if !total.is_one() {
        return Err(Error::InvalidDistribution(format!(
            "family probabilities sum to {total}"
        )));
    }
    let mut mean = Matrix::zeros(first.1.rows(), first.1.cols());
    for (p, q) in splits {
        if (q.rows(), q.cols()) != (mean.rows(), mean.cols()) {
            return Err(Error::InvalidDistribution("posterior shapes differ".into()));
        }
        mean.add_scaled(q, p);
    }
    Ok(mean)
}

/// Belief about the other side after learning `side`'s type is `index`.
///
/// Conditioning on Bob's type yields Bob's belief about Alice and vice versa.
pub fn condition_on_type(q: &ObserverPosterior, side: Side, index: usize) -> Result<Belief> {
    let mass = match side {
        Side::A => q.row(index),
        Side::B => q.col(index),
    };
    Belief::normalize(mass).map_err(|_| Error::ZeroMass(format!("type {index} of side {side:?} has no mass")))
}

/// Returns the marginals when `q` is exactly their product.
pub fn product_factorize(q: &ObserverPosterior) -> Option<(Belief, Belief)> {
    let a = Belief::normalize(q.row_sums()).ok()?;
    let b = Belief::normalize(q.col_sums()).ok()?;
    let total = q.total();
    let expected = Matrix::product(&a, &b).scale(&total);
    (expected == *q).then_some((a, b))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub a: usize,
    pub b: usize,
    /// Alice's belief about Bob's type.
    pub q_b: Belief,
    /// Bob's belief about Alice's type.
    pub q_a: Belief,
    pub prob: Rational,
}

/// Finite-support distribution over `(θ_A, θ_B, q_B, q_A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPosterior {
    types_a: usize,
    types_b: usize,
    atoms: Vec<Atom>,
}

impl JointPosterior {
    /// Merges equal atoms, drops zero-probability ones and sorts canonically.
    pub fn new(types_a: usize, types_b: usize, atoms: Vec<Atom>) -> Result<Self> {
        let mut merged: BTreeMap<(Belief, Belief, usize, usize), Rational> = BTreeMap::new();
        for atom in atoms {
            if atom.a >= types_a || atom.b >= types_b {
                return Err(Error::InvalidDistribution("atom type out of range".into()));
            }
            if atom.q_a.len() != types_a || atom.q_b.len() != types_b {
                return Err(Error::InvalidDistribution("atom belief has the wrong dimension".into()));
            }
            if atom.prob.is_negative() {
                return Err(Error::InvalidDistribution("negative atom probability".into()));
            }
            *merged
                .entry((atom.q_b, atom.q_a, atom.a, atom.b))
                .or_insert_with(Rational::zero) += atom.prob;
        }
        let atoms: Vec<Atom> = merged
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|((q_b, q_a, a, b), prob)| Atom { a, b, q_b, q_a, prob })
            .collect();
        let total: Rational = atoms.iter().map(|a| &a.prob).sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!("atom probabilities sum to {total}")));
        }
        Ok(JointPosterior {
            types_a,
            types_b,
            atoms,
        })
    }

    /// Distribution whose types are independent given each belief pair:
    /// `P(x, y, q_B, q_A) = P(q_B, q_A)·q_A(x)·q_B(y)`.
    pub fn from_product_support(points: &[(Belief, Belief, Rational)]) -> Result<Self> {
        let (first_b, first_a, _) = points
            .first()
            .ok_or_else(|| Error::InvalidDistribution("empty support".into()))?;
        let (na, nb) = (first_a.len(), first_b.len());
        let mut atoms = Vec::new();
        for (q_b, q_a, p) in points {
            for x in q_a.support() {
                for y in q_b.support() {
                    atoms.push(Atom {
                        a: x,
                        b: y,
                        q_b: q_b.clone(),
                        q_a: q_a.clone(),
                        prob: p * q_a.get(x) * q_b.get(y),
                    });
                }
            }
        }
        JointPosterior::new(na, nb, atoms)
    }

    pub fn types_a(&self) -> usize {
        self.types_a
    }

    pub fn types_b(&self) -> usize {
        self.types_b
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// The `(q_B, q_A)` marginal, in canonical order.
    pub fn support(&self) -> BTreeMap<(Belief, Belief), Rational> {
        let mut out = BTreeMap::new();
        for atom in &self.atoms {
            *out.entry((atom.q_b.clone(), atom.q_a.clone()))
                .or_insert_with(Rational::zero) += &atom.prob;
        }
        out
    }

    /// Unnormalized `P(θ_A, θ_B, q_B, q_A)` grouped by belief pair.
    pub fn groups(&self) -> BTreeMap<(Belief, Belief), Matrix> {
        let mut out: BTreeMap<(Belief, Belief), Matrix> = BTreeMap::new();
        for atom in &self.atoms {
            let m = out
                .entry((atom.q_b.clone(), atom.q_a.clone()))
                .or_insert_with(|| Matrix::zeros(self.types_a, self.types_b));
            let v = m.get(atom.a, atom.b) + &atom.prob;
            m.set(atom.a, atom.b, v);
        }
        out
    }

    pub fn type_marginal(&self) -> Matrix {
        let mut m = Matrix::zeros(self.types_a, self.types_b);
        for atom in &self.atoms {
            let v = m.get(atom.a, atom.b) + &atom.prob;
            m.set(atom.a, atom.b, v);
        }
        m
    }
}

/// Atoms induced by a family of outcomes, each given as its mass matrix
/// `P(θ_A, θ_B, outcome)`: Alice's belief is her row normalized, Bob's his column.
pub fn joint_from_outcomes<'a>(
    types_a: usize,
    types_b: usize,
    outcomes: impl IntoIterator<Item = &'a Matrix>,
) -> Result<JointPosterior> {
    let mut atoms = Vec::new();
    for m in outcomes {
        let rows: Vec<Option<Belief>> = (0..types_a).map(|x| Belief::normalize(m.row(x)).ok()).collect();
        let cols: Vec<Option<Belief>> = (0..types_b).map(|y| Belief::normalize(m.col(y)).ok()).collect();
        for x in 0..types_a {
            for y in 0..types_b {
                let p = m.get(x, y);
                if p.is_zero() {
                    continue;
                }
                atoms.push(Atom {
                    a: x,
                    b: y,
                    q_b: rows[x].clone().expect("positive entry implies positive row"),
                    q_a: cols[y].clone().expect("positive entry implies positive column"),
                    prob: p.clone(),
                });
            }
        }
    }
    JointPosterior::new(types_a, types_b, atoms)
}

pub fn joint_from_observer(
    dist: &[(Rational, ObserverPosterior)],
    prior_a: &Belief,
    prior_b: &Belief,
) -> Result<JointPosterior> {
    let mean = mean_posterior(dist)?;
    if mean != Matrix::product(prior_a, prior_b) {
        return Err(Error::MeanMismatch);
    }
    let scaled: Vec<Matrix> = dist.iter().map(|(p, q)| q.scale(p)).collect();
    joint_from_outcomes(prior_a.len(), prior_b.len(), &scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn m(rows: &[&[(i64, i64)]]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn b(w: &[(i64, i64)]) -> Belief {
        Belief::new(w.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn grid_enumeration() {
        let g = grid_beliefs(2, &[rat(1, 2), rat(3, 5)], &[b(&[(1, 3), (2, 3)])]);
        let firsts: Vec<Rational> = g.iter().map(|q| q.get(0).clone()).collect();
        assert_eq!(firsts, vec![rat(0, 1), rat(1, 3), rat(1, 2), rat(3, 5), rat(1, 1)]);
        let g3 = grid_beliefs(3, &[rat(1, 2)], &[]);
        // compositions of 1 into three parts from {0, 1/2, 1}
        assert_eq!(g3.len(), 6);
        assert_eq!(grid_beliefs(1, &[], &[]), vec![Belief::point(1, 0)]);
    }

    #[test]
    fn belief_validation() {
        assert!(Belief::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(Belief::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
        assert!(Belief::normalize(vec![rat(0, 1), rat(0, 1)]).is_err());
        assert_eq!(
            Belief::normalize(vec![rat(1, 5), rat(3, 5)]).unwrap(),
            b(&[(1, 4), (3, 4)])
        );
    }

    #[test]
    fn mediator_table_split() {
        let prior = m(&[&[(3, 10), (1, 5)], &[(3, 10), (1, 5)]]);
        let one = |v| vec![rat(v, 1), rat(1 - v, 1)];
        let kernel = vec![vec![one(0), one(1)], vec![vec![rat(2, 3), rat(1, 3)], one(1)]];
        let splits = split_posterior(&prior, &labels(2), &kernel).unwrap();
        assert_eq!(splits.len(), 2);
        assert_eq!(splits[0].prob, rat(3, 5));
        assert_eq!(splits[0].posterior, m(&[&[(0, 1), (1, 3)], &[(1, 3), (1, 3)]]));
        assert_eq!(splits[1].prob, rat(2, 5));
        assert_eq!(splits[1].posterior, m(&[&[(3, 4), (0, 1)], &[(1, 4), (0, 1)]]));

        let family: Vec<_> = splits.iter().map(|s| (s.prob.clone(), s.posterior.clone())).collect();
        assert_eq!(mean_posterior(&family).unwrap(), prior);
    }

    #[test]
    fn identity_and_revealing_splits() {
        let q = Matrix::product(&Belief::uniform(2), &Belief::uniform(2));
        let constant = vec![vec![vec![rat(1, 1)]; 2]; 2];
        let s = split_posterior(&q, &labels(1), &constant).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].prob.clone(), s[0].posterior.clone()), (rat(1, 1), q.clone()));

        let reveal_a = vec![vec![vec![rat(1, 1), rat(0, 1)]; 2], vec![vec![rat(0, 1), rat(1, 1)]; 2]];
        let s = split_posterior(&q, &labels(2), &reveal_a).unwrap();
        assert_eq!(s[0].prob, rat(1, 2));
        assert_eq!(s[0].posterior, m(&[&[(1, 2), (1, 2)], &[(0, 1), (0, 1)]]));
        assert_eq!(s[1].posterior, m(&[&[(0, 1), (0, 1)], &[(1, 2), (1, 2)]]));
    }

    #[test]
    fn bad_kernel_rejected() {
        let q = Matrix::product(&Belief::uniform(2), &Belief::uniform(2));
        let kernel = vec![vec![vec![rat(1, 2), rat(1, 3)]; 2]; 2];
        assert!(split_posterior(&q, &labels(2), &kernel).is_err());
    }

    #[test]
    fn imp_pair_mean() {
        let hi = m(&[&[(9, 16), (3, 16)], &[(3, 16), (1, 16)]]);
        let lo = m(&[&[(1, 16), (3, 16)], &[(3, 16), (9, 16)]]);
        let mean = mean_posterior(&[(rat(1, 2), hi), (rat(1, 2), lo)]).unwrap();
        assert_eq!(mean, m(&[&[(5, 16), (3, 16)], &[(3, 16), (5, 16)]]));
    }

    #[test]
    fn conditioning() {
        let s2 = m(&[&[(3, 4), (0, 1)], &[(1, 4), (0, 1)]]);
        assert_eq!(condition_on_type(&s2, Side::B, 0).unwrap(), b(&[(3, 4), (1, 4)]));
        assert!(condition_on_type(&s2, Side::B, 1).is_err());
        let s1 = m(&[&[(0, 1), (1, 3)], &[(1, 3), (1, 3)]]);
        assert_eq!(condition_on_type(&s1, Side::B, 0).unwrap(), b(&[(0, 1), (1, 1)]));
        let qa = b(&[(1, 5), (4, 5)]);
        let prod = Matrix::product(&qa, &b(&[(1, 3), (2, 3)]));
        assert_eq!(condition_on_type(&prod, Side::B, 1).unwrap(), qa);
    }

    #[test]
    fn factorization() {
        let s2 = m(&[&[(3, 4), (0, 1)], &[(1, 4), (0, 1)]]);
        assert_eq!(
            product_factorize(&s2),
            Some((b(&[(3, 4), (1, 4)]), b(&[(1, 1), (0, 1)])))
        );
        let s1 = m(&[&[(0, 1), (1, 3)], &[(1, 3), (1, 3)]]);
        assert_eq!(product_factorize(&s1), None);
        let u = Matrix::product(&Belief::uniform(2), &Belief::uniform(2));
        assert_eq!(product_factorize(&u), Some((Belief::uniform(2), Belief::uniform(2))));
    }

    #[test]
    fn joint_from_mediator_table() {
        let family = vec![
            (rat(3, 5), m(&[&[(0, 1), (1, 3)], &[(1, 3), (1, 3)]])),
            (rat(2, 5), m(&[&[(3, 4), (0, 1)], &[(1, 4), (0, 1)]])),
        ];
        let pa = Belief::uniform(2);
        let pb = b(&[(3, 5), (2, 5)]);
        let j = joint_from_observer(&family, &pa, &pb).unwrap();
        let half = b(&[(1, 2), (1, 2)]);
        let expected = [
            (0, 1, b(&[(0, 1), (1, 1)]), half.clone(), rat(1, 5)),
            (1, 0, half.clone(), b(&[(0, 1), (1, 1)]), rat(1, 5)),
            (1, 1, half.clone(), half.clone(), rat(1, 5)),
            (0, 0, b(&[(1, 1), (0, 1)]), b(&[(3, 4), (1, 4)]), rat(3, 10)),
            (1, 0, b(&[(1, 1), (0, 1)]), b(&[(3, 4), (1, 4)]), rat(1, 10)),
        ];
        assert_eq!(j.atoms().len(), 5);
        for (a, bb, q_b, q_a, p) in expected {
            assert!(
                j.atoms().contains(&Atom {
                    a,
                    b: bb,
                    q_b,
                    q_a,
                    prob: p
                }),
                "missing atom ({a}, {bb})"
            );
        }
        assert_eq!(j.type_marginal(), Matrix::product(&pa, &pb));

        let bad = vec![(rat(1, 1), m(&[&[(1, 1), (0, 1)], &[(0, 1), (0, 1)]]))];
        assert_eq!(joint_from_observer(&bad, &pa, &pb), Err(Error::MeanMismatch));
    }

    #[test]
    fn joint_from_prior_and_point() {
        let pa = Belief::uniform(2);
        let pb = b(&[(3, 5), (2, 5)]);
        let j = joint_from_observer(&[(rat(1, 1), Matrix::product(&pa, &pb))], &pa, &pb).unwrap();
        assert!(j.atoms().iter().all(|a| a.q_a == pa && a.q_b == pb));
        assert_eq!(j.atoms().len(), 4);

        let point = m(&[&[(1, 1), (0, 1)], &[(0, 1), (0, 1)]]);
        let j = joint_from_outcomes(2, 2, [&point.scale(&rat(1, 1))]).unwrap();
        assert_eq!(j.atoms().len(), 1);
        assert_eq!(j.atoms()[0].q_a, Belief::point(2, 0));
        assert_eq!(j.atoms()[0].q_b, Belief::point(2, 0));
    }
}
