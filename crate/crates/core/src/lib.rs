//! Random Boolean network models and their noise sensitivity.
//!
//! Fully connected sign networks with Gaussian weights live in [`ffnn`], the
//! disagreement chain they induce in [`chain`], convolutional iterated
//! majority in [`conv`] and its query algorithm in [`revealment`]. The
//! Monte Carlo estimators in [`estimators`] work on any [`estimators::FunctionFamily`].

pub mod bits;
pub mod chain;
pub mod conv;
pub mod error;
pub mod estimators;
pub mod ffnn;
pub mod functions;
pub mod revealment;
pub mod seed;
pub mod stats;

pub use bits::{apply_noise, disagreements, sample_uniform, BitVector, NoiseSpec};
pub use chain::{g, g_w, DisagreementKernel, HittingResult, WedgeParams};
pub use conv::{build_graph, evaluate_direct, ConvGraph, ConvGraphSpec, Filter, FilterKind, Topology};
pub use error::{Error, Result};
pub use estimators::{FunctionFamily, NetworkFamily, PointMass, QuenchedProfile, UniformMixture};
pub use ffnn::{forward, forward_pair, sample_network, HeadFunction, NetworkParams, WeightModel};
pub use functions::{sign, BooleanMap, Parity, ReferenceFunction};
pub use revealment::{AlgorithmRun, QueryAlgorithm, QueryLog};
pub use seed::SeedStream;
pub use stats::EstimateRecord;
