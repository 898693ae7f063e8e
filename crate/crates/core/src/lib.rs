//! Desk-scale pipeline for binary-metasurface design: pattern generators, a
//! periodic unit-cell FDTD reflectance solver, CNN surrogates with a
//! from-scratch autodiff engine, an inverse-design GAN, a random-forest
//! baseline, and the statistical benchmarking that ties them together.

pub mod pattern;
pub mod solver;
