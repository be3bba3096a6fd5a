//! Proto-Elamite numeral readings and disambiguation.
//!
//! Transliterations are parsed into tablets ([`atf`]), every numeral is
//! read under the S, D, B and C systems ([`numsys`]), and ambiguous
//! readings are resolved by summary lines ([`sumcheck`]) or a bootstrapped
//! decision list ([`selftrain`]). [`evalkit`] scores predictions against a
//! gold set and [`insights`] produces corpus reports.

pub mod analysis;
pub mod atf;
pub mod evalkit;
pub mod insights;
pub mod numsys;
pub mod rational;
pub mod selftrain;
pub mod sumcheck;
pub mod synth;

pub use atf::{Corpus, DigitRun, Entry, NumeralNotation, Tablet};
pub use numsys::{ReadingSet, SystemId, SystemSet, SystemTable, TableSet};
pub use rational::Rational;
