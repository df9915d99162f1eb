//! Grasp synthesis for parallel-jaw grippers by spectral correlation of
//! binary extended Gaussian images. [`pipeline::generate`] runs the whole
//! chain; the other modules expose each stage.

pub mod begi;
pub mod cli;
pub mod cloud;
pub mod contacts;
pub mod error;
pub mod gripper;
pub mod io;
pub mod locomo;
pub mod normals;
pub mod output;
pub mod pipeline;
pub mod shapes;
pub mod sht;
pub mod so3;
pub mod spatial;
pub mod sphere;
pub mod wigner;

pub use error::{Error, Result};
