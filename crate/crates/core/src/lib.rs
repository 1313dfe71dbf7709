pub mod env;
pub mod htn;
pub mod lm;
pub mod dialog;
pub mod transcript;
