//! Watershed-based segmentation of speckled grayscale images, built for
//! alveolar-scale optical coherence tomography but usable on any image
//! where dark compartments are separated by bright walls.
//!
//! The crate provides the building blocks — grayscale morphology with
//! geodesic reconstruction, an immersion watershed with and without marker
//! control, a two-phase active contour, and a small spectral-domain OCT
//! simulator — plus a [`pipeline`] module that chains them into the full
//! marker-controlled segmentation and its unmarked baseline.
//!
//! ```
//! use octseg_core::octsim::synth_phantom;
//! use octseg_core::pipeline::{run_baseline, run_modified, PipelineConfig};
//!
//! let ph = synth_phantom(128, 128, 4, 220.0, 40.0, 0.25, 42).unwrap();
//! let cfg = PipelineConfig::default();
//! let plain = run_baseline(&ph.image, &cfg).unwrap();
//! let marked = run_modified(&ph.image, &cfg).unwrap();
//! assert!(marked.n_regions <= plain.n_regions);
//! ```

pub mod contour;
pub mod error;
pub mod grid;
pub mod io;
pub mod morph;
pub mod octsim;
pub mod pipeline;
pub mod watershed;

pub use error::{Error, Result};
pub use grid::{BinaryMask, Connectivity, GrayImage, LabelMap};
pub use pipeline::{PipelineConfig, SegmentationReport};
pub use watershed::WatershedResult;
