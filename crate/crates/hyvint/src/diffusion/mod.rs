//! Stage 2: denoising diffusion over per-edge latent vectors.

mod checkpoint;
mod net;
mod sample;
mod schedule;
mod train;

pub use checkpoint::{load_model, save_model, CheckpointError};
pub use net::{time_embedding, AdamW, Mlp, TIME_EMBED_DIM};
pub use sample::reverse_sample;
pub use schedule::{forward_marginal_sample, linear_schedule, NoiseSchedule, ScheduleError};
pub use train::{
    standardize_stats, train_denoiser, DenoisingModel, DiffusionConfig, TrainError, TrainTrace,
};
