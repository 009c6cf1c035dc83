//! Exact rationals and the simplex solver built on them.

mod lp;
mod rational;

pub use lp::{Constraint, LinearProgram, LpSolution, LpStatus, Relation, Sense};
pub use rational::{rat, ParseRationalError, Rational};
