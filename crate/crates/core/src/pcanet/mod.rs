//! Two-stage PCANet over stacked bi-temporal patches, with class-balanced
//! sampling of the confident pseudo-labels.

mod eigen;
mod filters;
mod forward;
mod model;
mod patches;
mod sampling;

pub use eigen::symmetric_eigen;
pub use filters::{learn_filter_bank, learn_pca_filters, patch_scatter, FilterBank};
pub use forward::{binarize_encode, histogram_feature, stage_forward, PcanetFeature, MAX_L2};
pub use model::{features_for, train_pcanet, PcanetModel, SARP_MAGIC};
pub use patches::{extract_patches, Patch, PatchSet};
pub use sampling::{balance_sample, SampleSelection};
