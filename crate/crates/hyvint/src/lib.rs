//! Intensity-driven hypergraph generative modeling.
//!
//! The pipeline has three stages: mean-field Gamma variational inference over
//! a Poisson-link incidence model, diffusion-based sampling of hyperedge
//! latent parameters, and Bernoulli incidence decoding. The crate also ships
//! synthetic data generators, three diffusion baselines, and the full
//! evaluation metric suite used to compare reference and generated
//! hypergraphs.

pub mod baselines;
pub mod diffusion;
pub mod hypercore;
pub mod metrics;
pub mod numkit;
pub mod pipeline;
pub mod synthdata;
pub mod vi;

pub use hypercore::IncidenceStructure;
pub use metrics::MetricsReport;
