pub mod diagnose;
pub mod identify;
pub mod reproduce;
pub mod simulate;
