pub mod calibration;
pub mod compositor;
pub mod error;
pub mod linalg;
pub mod linking;
pub mod model;
pub mod pnm;
pub mod transition;
pub mod profile;
pub mod runtime;
pub mod cli;
pub mod server;
