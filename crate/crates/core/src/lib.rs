#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod belief;
pub mod conversation;
pub mod design;
pub mod error;
pub mod feasibility;
pub mod fixtures;
pub mod game;
pub mod mediator;
pub mod numeric;

pub use error::{Error, Result};
pub use numeric::{rat, Rational};
pub mod ir;
pub mod protocol;
pub mod repeated;
