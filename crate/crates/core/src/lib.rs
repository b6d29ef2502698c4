pub mod hf;
pub mod syntax;
pub mod eval;
pub mod gen;
pub mod nmid;
pub mod descr;
pub mod axiom;
pub mod closure;
pub mod selftest;
pub mod cli;
