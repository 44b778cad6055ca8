//! Zero-delay hybrid digital-analog transmission of a bivariate Gaussian
//! source over a two-user Gaussian interference channel.

pub mod analytic;
pub mod codec;
pub mod error;
pub mod model;
pub mod numerics;
pub mod optimizer;
pub mod sim;

pub use analytic::{scheme_b_report, DistortionModel, DistortionReport};
pub use codec::{DigitalPair, EncoderParams};
pub use error::{Error, Result};
pub use model::{ChannelModel, QuantizerSpec, SourceModel, User};
pub use optimizer::{optimize_scheme_b, uncoded_distortion, OptimizationResult, SearchSpace};
pub use sim::{ExperimentConfig, HdaSetup, McResult, Scheme};
