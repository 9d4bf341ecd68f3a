//! Volume of unit vector fields on the twice-punctured round 2-sphere.
//!
//! The crate evaluates the volume functional of a unit field (the area of its
//! image in the unit tangent bundle under the Sasaki metric), the first-order
//! quantities entering the minimality equations, pole indices, the classical
//! lower bounds, and searches for minimal-volume fields at fixed winding.

pub mod error;
pub mod fields;
pub mod first_order;
pub mod geometry;
pub mod minimizer;
pub mod ode;
pub mod quadrature;
pub mod topology;
pub mod volume;

pub use error::{Result, VolError};
pub use fields::{AngleField, Family, FieldDomain, GridField, LatitudeSpec, TTypeSpec, ZetaSpec};
pub use first_order::{AComponents, ResidualReport};
pub use geometry::{SphereChart, SpherePoint, TangentVector};
pub use topology::IndexReport;
pub use volume::{DomainRegion, QuadratureSpec, VolumeResult};
