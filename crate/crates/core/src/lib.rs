//! Interactive fuzzy goal programming for multiobjective signomial programs
//! whose coefficients are interval type-2 trapezoidal fuzzy numbers.
//!
//! The pipeline: defuzzify the fuzzy program ([`sigmodel`]), compute the
//! payoff table ([`nlpcore`]), build fuzzy goals and linearize them
//! ([`goalmem`]), solve the goal LP ([`lpsolve`]), and iterate with the
//! decision maker ([`dialogue`]). [`baseline`] holds the comparison methods.

pub mod baseline;
pub mod dialogue;
pub mod fixtures;
pub mod goalmem;
pub mod it2num;
pub mod lpsolve;
pub mod nlpcore;
pub mod par;
pub mod sigmodel;

pub use it2num::{It2Number, Trapezoid};
pub use par::Execution;
pub use sigmodel::{CrispProgram, FuzzyProgram, Sense};
