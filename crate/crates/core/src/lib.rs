//! Objective, probabilistic classification of noisy 2D-periodic grayscale
//! images into plane symmetry (wallpaper) groups.
//!
//! The pipeline condenses an image into a few hundred structure-bearing
//! Fourier coefficients, enforces each candidate plane-group setting on them,
//! and ranks the resulting geometric models with a geometric Akaike
//! information criterion (G-AIC). Reports carry individual model
//! probabilities (geometric Akaike weights), evidence ratios, and ad-hoc
//! confidence levels instead of a single hard label.
//!
//! Stages, in pipeline order:
//!
//! 1. [`imageio`] – load, tile, and window grayscale rasters.
//! 2. [`spectrum`] – centered 2D DFT, peak detection, reciprocal-lattice fit,
//!    indexed extraction of structure-bearing coefficients.
//! 3. [`symmetry`] – per-group orbit computation, amplitude/phase
//!    symmetrization, phase-origin refinement, Fourier synthesis.
//! 4. [`residuals`] – CRISP-style figures of merit and the sums of squared
//!    residuals consumed by model selection.
//! 5. [`selection`] – hierarchy climb, noise estimation, G-AIC, Akaike
//!    weights, evidence ratios, confidence levels.
//!
//! [`groups`] holds the static plane-group data (generators, multiplicities,
//! type-I subgroup hierarchy), [`noisegen`] renders synthetic wallpaper
//! patterns and the two supported noise models, [`hka`] reads and writes
//! CRISP-style coefficient files, and [`pipeline`] ties everything together
//! behind the CLI-facing entry points.

pub mod error;
pub mod groups;
pub mod hka;
pub mod imageio;
pub mod noisegen;
pub mod pipeline;
pub mod report;
pub mod residuals;
pub mod selection;
pub mod spectrum;
pub mod symmetry;

pub use error::{Error, Result};
pub use groups::{HierarchyGraph, LaueClass, PlaneGroup};
pub use imageio::GrayImage;
pub use report::ClassificationReport;
pub use spectrum::{IndexedFc, ReciprocalLattice, Spectrum};
