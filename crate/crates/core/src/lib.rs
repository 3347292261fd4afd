//! Zoned tensorial sequent calculus: signatures, derivations, cut
//! elimination, proof search, string diagrams and a finite-set model of
//! parameterised blocks.

pub mod arch;
pub mod calculus;
pub mod cut_elim;
pub mod diagram;
pub mod enumerate;
pub mod files;
pub mod search;
pub mod signature;
pub mod syntax;
