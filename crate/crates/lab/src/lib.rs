//! Grid-based experiments on restriction, Knapp sharpness and oscillatory
//! integral operators, plus the command line harness.

pub mod accept;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod io;
pub mod knapp;
pub mod nufft;
pub mod oscillatory;
pub mod report;
pub mod restriction;
pub mod spectral;
