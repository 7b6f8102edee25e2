//! Formal groups, kernel laws of jet projections, and δ-characters.

pub mod character;
pub mod curve;
pub mod formal;

pub use character::{
    dpsi_identity, elliptic_delta_character, gm_delta_character, psi_closed_form, psi_star, Coordinates,
    DeltaCharacter, DpsiIdentity,
};
pub use curve::{count_points_ap, x011_short, CurveFile, EllipticCurveData, PadicCurve, ProjPoint};
pub use formal::{kernel_law, FormalGroupData, GroupKind};
