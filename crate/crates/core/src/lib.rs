//! Toolkit for designing industrial CO2 capture, transport and storage hubs.

pub mod capture;
pub mod costsurface;
pub mod curve;
pub mod error;
pub mod export;
pub mod finance;
pub mod fixtures;
pub mod flow;
pub mod grid;
pub mod netdesign;
pub mod phasing;
pub mod pipeline;
pub mod reservoir;
pub mod routing;
pub mod scenario;
pub mod screening;

pub use error::{Error, Result};
