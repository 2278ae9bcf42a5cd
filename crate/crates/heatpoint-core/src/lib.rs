pub mod control;
pub mod diophantine;
pub mod error;
pub mod linalg;
pub mod minimal_time;
pub mod mp;
pub mod observability;
pub mod sequences;
pub mod spectral;

pub use control::{BiorthogonalFamily, ControlReport};
pub use diophantine::{AnchorPoint, ContinuedFraction, LiouvilleCheck, ThetaSequence};
pub use error::{Error, Result};
pub use minimal_time::MinimalTimeEstimate;
pub use observability::{Gramian, Normalization, ObsConfig, ObservabilityResult, RateFit};
pub use sequences::EpsSequence;
pub use spectral::{FourierState, ScalarControl, Signal, SpatialProfile};
