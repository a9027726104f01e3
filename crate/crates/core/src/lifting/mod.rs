//! Canonical image space and 2D→3D box lifting.

mod canonical;
mod lift;

pub use canonical::{apply_transform, canonicalize, invert_transform, CanonicalConfig, CanonicalTransform};
pub use lift::{
    decode_depth, decode_dims, encode_depth, encode_dims, encode_lift, lift, lift_jacobian, lift_outputs, LiftJacobian,
    LiftParams, LiftScales,
};
