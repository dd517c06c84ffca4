pub mod analyze;
pub mod run;
pub mod sweep;
pub mod tree;
