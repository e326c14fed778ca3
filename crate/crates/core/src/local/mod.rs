//! The local box `U_n`, its events, and the empty-tile argument.

pub mod certificate;
pub mod claims;
pub mod concentration;
pub mod constants;
pub mod covers;
pub mod events;
pub mod tiling;

pub use certificate::{empty_tile_certificate, CertificateReport, TileCase};
pub use claims::{check_claim_inequalities, ClaimReport};
pub use concentration::{concentration_chains, ConcentrationReport};
pub use constants::{
    compute_constants, default_scaled_constants, scaled_constants, ConstantsBundle, ConstantsMode,
    GuardCheck, DEFAULT_SCALED_LAMBDA2, DEFAULT_SCALED_M, DEFAULT_SCALED_N_TILES,
};
pub use covers::{build_covers, check_covers, minimal_feasible_n, CoverCheck, Covers};
pub use events::{
    bad_set_detail, detect_bad_set_c, evaluate_local_events, half_box_components,
    sample_local_pointset, LocalEventOutcome,
};
pub use tiling::{TileIndex, Tiling};
