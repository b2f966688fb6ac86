//! Exact polynomial and rational-function arithmetic with local expansions.

pub mod laurent;
pub mod parse;
pub mod poly;
pub mod ratfunc;

pub use laurent::{laurent_at, order_at, residue, residue_sum, LaurentJet, Point};
pub use parse::{parse_poly, parse_ratfunc};
pub use poly::Polynomial;
pub use ratfunc::RationalFunction;
