//! Multi-exposure fusion of static LDR stacks into a single detail-rich
//! LDR image, plus a structural fidelity metric for scoring results.
//!
//! The pipeline computes three per-exposure weight branches on luminance:
//!
//! * [`pca::pca_weight_maps`]: per-pixel principal component scores of the
//!   stack, ranking exposures by how much of the stack's variance they
//!   explain at each pixel.
//! * [`exposedness::exposedness_maps`]: adaptive well-exposedness, a
//!   Gaussian preference for luminance near a target the stack's own
//!   statistics pick.
//! * [`saliency::saliency_maps`]: DCT-signature saliency highlighting
//!   sparse foreground structure in each exposure.
//!
//! [`fusion::fuse_stack`] multiplies the branches per pixel, refines the
//! product with an edge-aware guided filter, normalizes to a partition of
//! unity, and blends the exposures in a Laplacian pyramid so that weight
//! seams never show. [`metric::mef_ssim`] scores any fused result against
//! its source stack.
//!
//! All arithmetic is f64 and deterministic: results are bit-identical run
//! to run, with the `parallel` feature on or off, and at any thread count.
//!
//! ```no_run
//! use pasmef::{fuse_stack, load_stack, write_png, FusionConfig};
//!
//! let stack = load_stack(std::path::Path::new("exposures/"))?;
//! let fused = fuse_stack(&stack, &FusionConfig::default())?;
//! write_png(std::path::Path::new("fused.png"), &fused)?;
//! # Ok::<(), pasmef::FusionError>(())
//! ```

pub mod config;
pub mod dct;
pub mod error;
pub mod exposedness;
pub mod filter;
pub mod fusion;
pub mod guided;
pub mod io;
pub mod metric;
mod parallel;
pub mod pca;
pub mod pyramid;
pub mod raster;
pub mod saliency;
pub mod stack;
pub mod synth;

pub use config::{FusionConfig, LevelCount};
pub use error::{FusionError, Result};
pub use fusion::{combine_weights, fuse, fuse_stack, fuse_stack_with_weights, FusionArtifacts};
pub use io::{read_image, write_png, write_png_gray};
pub use metric::{mef_ssim, MefSsimConfig};
pub use raster::{to_luminance, Image, Plane};
pub use stack::{load_stack, normalize_sum_to_one, ExposureStack, WeightStack};
