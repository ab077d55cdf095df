//! Closed-form distance of closest approach, contact point and overlap test
//! for two hard ellipses in the plane, with a brute-force oracle, excluded-area
//! quadrature and a hard-ellipse Monte Carlo simulator built on top.
//!
//! ```
//! use ellipse_contact::{closest_approach, PairConfiguration};
//!
//! // two 2×1 ellipses, parallel, centers along the major axis: tip to tip
//! let cfg = PairConfiguration::from_degrees((2.0, 1.0), (2.0, 1.0), 0.0, 0.0, 0.0).unwrap();
//! let sol = closest_approach(&cfg).unwrap();
//! assert!((sol.d - 4.0).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod contact;
pub mod error;
pub mod mcsim;
pub mod oracle;
pub mod quartic;
pub mod transform;
pub mod types;

pub use analysis::{
    contact_locus, excluded_area, excluded_area_sweep, excluded_boundary, LocusCurve, LocusSample, QuadratureScheme,
    QuadratureSpec,
};
pub use contact::{
    closest_approach, contact_point, overlap, transformed_distance, ContactBranch, ContactSolution, OverlapVerdict,
    TangencyResiduals,
};
pub use error::{Error, Result};
pub use mcsim::{MCConfig, MCState, Simulation};
pub use oracle::{oracle_distance, OracleSettings, Stratum};
pub use quartic::{quartic_coefficients, solve_contact_quartic, QuarticCoeffs};
pub use transform::{scaling_transform, transformed_pair, ScalingTransform, TransformedPair};
pub use types::{ellipse_matrix, make_pair_configuration, EllipseShape, PairConfiguration, SymMat2, UnitVec2, Vec2};
