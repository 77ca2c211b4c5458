#![allow(clippy::type_complexity)]

pub mod finrel;
pub mod term;
pub mod subcat;
pub mod reduce;
pub mod degrees;
pub mod param;
pub mod workspace;
