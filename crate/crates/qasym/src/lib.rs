pub mod dfa;
pub mod error;
pub mod instance;
pub mod markov;
pub mod op;
pub mod pukanszky;
pub mod random;
pub mod report;
pub mod schur;
pub mod spectral;
pub mod svg;
