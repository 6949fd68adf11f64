pub mod blowup;
pub mod grid;
pub mod initial;
pub mod run;
pub mod scheme;
pub mod trace;
