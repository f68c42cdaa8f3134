//! Physics-informed PDE solvers built around a low-rank factorized Green's
//! function, with exact second-order spatial derivatives and exact parameter
//! gradients computed from scratch.
//!
//! The crate provides five solution parameterizations (PINN, MOD-Net and its
//! nonlinear variant, DecGreenNet and its nonlinear variant), two benchmark
//! problems (Poisson on the unit square and a linear reaction-diffusion
//! equation), full-batch Adam training on the residual + boundary objective,
//! and a CLI for training, evaluation, field export and benchmarking.

pub mod autodiff;
pub mod cli;
pub mod models;
pub mod nn;
pub mod pde;
pub mod rng;
pub mod sampling;
pub mod training;

pub use autodiff::{Jet2, MlpGrad, Point2, Tape};
pub use nn::{LayerSpec, Mlp};
