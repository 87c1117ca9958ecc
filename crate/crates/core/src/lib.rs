pub mod lattice;
pub mod syntax;
pub mod valuation;
pub mod engine;
pub mod isomorphism;
pub mod textio;
pub mod cli;
