pub mod bisim;
pub mod engine;
pub mod fixtures;
pub mod gen;
pub mod poset;
pub mod specfmt;
pub mod terms;
pub mod translate;
pub mod validity;
