//! Mediator protocols: one public signal drawn from `π(s | θ_A, θ_B)`.

use crate::belief::{
    check_distribution, joint_from_outcomes, mean_posterior, split_posterior, Belief, JointPosterior, Matrix,
    ObserverPosterior, Split,
};
use crate::conversation::{history_label, ConversationProtocol};
use crate::error::{Error, Result};
use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediatorProtocol {
    signals: Vec<String>,
    /// `kernel[θ_A][θ_B]` is a distribution over `signals`.
    kernel: Vec<Vec<Vec<Rational>>>,
}

impl MediatorProtocol {
    pub fn new(signals: Vec<String>, kernel: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        if signals.is_empty() {
            return Err(Error::InvalidProtocol("mediator has no signals".into()));
        }
        let cols = kernel.first().map(Vec::len).unwrap_or(0);
        if kernel.is_empty() || cols == 0 || kernel.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidProtocol("mediator kernel has a ragged type grid".into()));
        }
        for (x, row) in kernel.iter().enumerate() {
            for (y, dist) in row.iter().enumerate() {
                check_distribution(dist, signals.len(), || format!("mediator row ({x}, {y})"))?;
            }
        }
        Ok(MediatorProtocol { signals, kernel })
    }

    pub fn uninformative(types_a: usize, types_b: usize) -> Self {
        MediatorProtocol {
            signals: vec!["s".to_string()],
            kernel: vec![vec![vec![Rational::one()]; types_b]; types_a],
        }
    }

    /// Announces both types; signal `x,y` for the pair `(x, y)`.
    pub fn full_revelation(types_a: usize, types_b: usize) -> Self {
        let n = types_a * types_b;
        let signals = (0..types_a)
            .flat_map(|x| (0..types_b).map(move |y| format!("{x},{y}")))
            .collect();
        let kernel = (0..types_a)
            .map(|x| {
                (0..types_b)
                    .map(|y| {
                        let mut row = vec![Rational::zero(); n];
                        row[x * types_b + y] = Rational::one();
                        row
                    })
                    .collect()
            })
            .collect();
        MediatorProtocol { signals, kernel }
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn kernel(&self) -> &[Vec<Vec<Rational>>] {
        &self.kernel
    }

    pub fn types_a(&self) -> usize {
        self.kernel.len()
    }

    pub fn types_b(&self) -> usize {
        self.kernel[0].len()
    }

    pub fn prob(&self, x: usize, y: usize, s: usize) -> &Rational {
        &self.kernel[x][y][s]
    }

    fn check_priors(&self, prior_a: &Belief, prior_b: &Belief) -> Result<()> {
        if prior_a.len() != self.types_a() || prior_b.len() != self.types_b() {
            return Err(Error::InvalidProtocol("priors do not match the type spaces".into()));
        }
        Ok(())
    }

    pub fn induced_observer_distribution(&self, prior_a: &Belief, prior_b: &Belief) -> Result<Vec<Split>> {
        self.check_priors(prior_a, prior_b)?;
        split_posterior(&Matrix::product(prior_a, prior_b), &self.signals, &self.kernel)
    }

    /// `P(θ_A, θ_B, s)` for each signal with positive probability.
    pub fn outcome_matrices(&self, prior_a: &Belief, prior_b: &Belief) -> Result<Vec<(String, Matrix)>> {
        Ok(self
            .induced_observer_distribution(prior_a, prior_b)?
            .into_iter()
            .map(|s| (s.signal, s.posterior.scale(&s.prob)))
            .collect())
    }

    pub fn induced_joint_posterior(&self, prior_a: &Belief, prior_b: &Belief) -> Result<JointPosterior> {
        let outcomes = self.outcome_matrices(prior_a, prior_b)?;
        joint_from_outcomes(self.types_a(), self.types_b(), outcomes.iter().map(|(_, m)| m))
    }
}

/// Mediator whose signal `s{k}` induces the `k`-th target posterior with its target probability.
pub fn construct_from_posterior_family(
    targets: &[(Rational, ObserverPosterior)],
    prior_a: &Belief,
    prior_b: &Belief,
) -> Result<MediatorProtocol> {
    if mean_posterior(targets)? != Matrix::product(prior_a, prior_b) {
        return Err(Error::MeanMismatch);
    }
    let signals: Vec<String> = (1..=targets.len()).map(|k| format!("s{k}")).collect();
    let n = targets.len();
    let uniform = Rational::new(1, n as i64);
    let kernel = (0..prior_a.len())
        .map(|x| {
            (0..prior_b.len())
                .map(|y| {
                    let p = prior_a.get(x) * prior_b.get(y);
                    if p.is_zero() {
                        vec![uniform.clone(); n]
                    } else {
                        targets.iter().map(|(w, q)| q.get(x, y) * w / &p).collect()
                    }
                })
                .collect()
        })
        .collect();
    MediatorProtocol::new(signals, kernel)
}

/// The mediator that announces the conversation's complete transcript.
pub fn conversation_to_mediator(
    c: &ConversationProtocol,
    prior_a: &Belief,
    prior_b: &Belief,
    budget: usize,
) -> Result<MediatorProtocol> {
    let transcripts = c.simulate(prior_a, prior_b, budget)?;
    let signals: Vec<String> = transcripts.iter().map(|t| history_label(&t.history)).collect();
    let n = signals.len();
    let uniform = Rational::new(1, n as i64);
    let kernel = (0..c.types_a())
        .map(|x| {
            (0..c.types_b())
                .map(|y| {
                    let p = prior_a.get(x) * prior_b.get(y);
                    if p.is_zero() {
                        vec![uniform.clone(); n]
                    } else {
                        transcripts.iter().map(|t| t.matrix.get(x, y) / &p).collect()
                    }
                })
                .collect()
        })
        .collect();
    MediatorProtocol::new(signals, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversation::Round;
    use crate::fixtures;
    use crate::numeric::rat;

    fn m(rows: &[&[(i64, i64)]]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn signal_table_posteriors() {
        let (med, g) = (fixtures::signal_mediator(), crate::game::employer_candidate());
        let d = med.induced_observer_distribution(g.prior_a(), g.prior_b()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].signal.as_str(), &d[0].prob), ("s1", &rat(3, 5)));
        assert_eq!(d[0].posterior, m(&[&[(0, 1), (1, 3)], &[(1, 3), (1, 3)]]));
        assert_eq!((d[1].signal.as_str(), &d[1].prob), ("s2", &rat(2, 5)));
        assert_eq!(d[1].posterior, m(&[&[(3, 4), (0, 1)], &[(1, 4), (0, 1)]]));
    }

    #[test]
    fn uninformative_and_revealing() {
        let pa = Belief::uniform(2);
        let pb = Belief::new(vec![rat(3, 5), rat(2, 5)]).unwrap();
        let d = MediatorProtocol::uninformative(2, 2)
            .induced_observer_distribution(&pa, &pb)
            .unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].posterior, Matrix::product(&pa, &pb));

        let d = MediatorProtocol::full_revelation(2, 2)
            .induced_observer_distribution(&pa, &pb)
            .unwrap();
        let probs: Vec<Rational> = d.iter().map(|s| s.prob.clone()).collect();
        assert_eq!(probs, vec![rat(3, 10), rat(1, 5), rat(3, 10), rat(1, 5)]);
        for (k, s) in d.iter().enumerate() {
            let mut point = Matrix::zeros(2, 2);
            point.set(k / 2, k % 2, rat(1, 1));
            assert_eq!(s.posterior, point);
        }
    }

    #[test]
    fn construct_mediator_table_kernel() {
        let pa = Belief::uniform(2);
        let pb = Belief::new(vec![rat(3, 5), rat(2, 5)]).unwrap();
        let targets = vec![
            (rat(3, 5), m(&[&[(0, 1), (1, 3)], &[(1, 3), (1, 3)]])),
            (rat(2, 5), m(&[&[(3, 4), (0, 1)], &[(1, 4), (0, 1)]])),
        ];
        let med = construct_from_posterior_family(&targets, &pa, &pb).unwrap();
        assert_eq!(*med.prob(0, 0, 0), rat(0, 1));
        assert_eq!(*med.prob(0, 1, 0), rat(1, 1));
        assert_eq!(*med.prob(1, 0, 0), rat(2, 3));
        assert_eq!(*med.prob(1, 1, 0), rat(1, 1));
        assert_eq!(med.kernel(), fixtures::signal_mediator().kernel());
    }

    #[test]
    fn construct_trivial_families() {
        let pa = Belief::uniform(2);
        let pb = Belief::uniform(2);
        let prior = Matrix::product(&pa, &pb);
        let med = construct_from_posterior_family(&[(rat(1, 1), prior)], &pa, &pb).unwrap();
        assert_eq!(med.signals().len(), 1);

        let targets = vec![
            (rat(1, 2), m(&[&[(1, 2), (1, 2)], &[(0, 1), (0, 1)]])),
            (rat(1, 2), m(&[&[(0, 1), (0, 1)], &[(1, 2), (1, 2)]])),
        ];
        let med = construct_from_posterior_family(&targets, &pa, &pb).unwrap();
        for y in 0..2 {
            assert_eq!(med.kernel()[0][y], vec![rat(1, 1), rat(0, 1)]);
            assert_eq!(med.kernel()[1][y], vec![rat(0, 1), rat(1, 1)]);
        }
        let skewed = vec![(rat(1, 1), m(&[&[(1, 1), (0, 1)], &[(0, 1), (0, 1)]]))];
        assert_eq!(
            construct_from_posterior_family(&skewed, &pa, &pb),
            Err(Error::MeanMismatch)
        );
    }

    #[test]
    fn zero_prior_rows_are_uniform() {
        let pa = Belief::new(vec![rat(1, 1), rat(0, 1)]).unwrap();
        let pb = Belief::uniform(2);
        let targets = vec![
            (rat(1, 2), m(&[&[(1, 1), (0, 1)], &[(0, 1), (0, 1)]])),
            (rat(1, 2), m(&[&[(0, 1), (1, 1)], &[(0, 1), (0, 1)]])),
        ];
        let med = construct_from_posterior_family(&targets, &pa, &pb).unwrap();
        assert_eq!(med.kernel()[1][0], vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn conversation_round_trips() {
        let (c, pa, pb) = fixtures::two_way_conversation();
        let med = conversation_to_mediator(&c, &pa, &pb, 100).unwrap();
        assert_eq!(med.signals().len(), 5);
        assert_eq!(
            med.induced_joint_posterior(&pa, &pb).unwrap(),
            c.induced_joint_posterior(&pa, &pb, 100).unwrap()
        );

        let silent = ConversationProtocol::silent(2, 2);
        assert_eq!(
            conversation_to_mediator(&silent, &pa, &pb, 10).unwrap().signals().len(),
            1
        );

        let mut reveal = ConversationProtocol::new(2, 2, vec![Round::new(&["a0", "a1"], &["skip"])]).unwrap();
        reveal
            .set_kernel(vec![], vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]])
            .unwrap();
        let med = conversation_to_mediator(&reveal, &pa, &pb, 10).unwrap();
        assert_eq!(med.signals(), &["a0|skip".to_string(), "a1|skip".to_string()]);
        for y in 0..2 {
            assert_eq!(med.kernel()[0][y], vec![rat(1, 1), rat(0, 1)]);
            assert_eq!(med.kernel()[1][y], vec![rat(0, 1), rat(1, 1)]);
        }
    }
}
