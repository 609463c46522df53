pub mod exactalg;
pub mod blocks;
pub mod config;
pub mod coordact;
pub mod curves;
pub mod logmonoid;
pub mod series;
pub mod vacore;
