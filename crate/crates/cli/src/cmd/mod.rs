pub mod dataset;
pub mod eval;
pub mod explore;
pub mod gen;
pub mod nav;
pub mod render;
pub mod report;
