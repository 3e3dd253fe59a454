//! Raw-video ingestion, patch extraction, MOS discretization, manifests and
//! synthetic data.

mod discretize;
mod manifest;
mod patch;
mod synth;
mod volume;
mod yuv;

pub use discretize::{discretize_mos, DiscretizationSpec, MOS_MAX, MOS_MIN, STUDY_SIZES};
pub use manifest::{
    load_manifest, load_manifest_with, manifest_to_string, parse_manifest, write_manifest,
    DatasetItem, DEFAULT_QP_SET,
};
pub use patch::{cube_at, extract_patches, Patch, PatchSpec, DEFAULT_PATCH_EDGE};
pub use synth::{
    base_pattern, box_blur, default_levels, quantize, synthesize_dataset, DistortionLevel, SynthConfig,
    SynthItem,
};
pub use volume::VideoVolume;
pub use yuv::{decode_luma, read_yuv_luma, write_y_only, RawFormat};
