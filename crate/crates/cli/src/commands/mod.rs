pub mod eval;
pub mod locate;
pub mod rules;
pub mod sweep;
