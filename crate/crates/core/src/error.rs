use thiserror::Error;

use crate::clustering::ClusteringError;
use crate::embedding::EmbeddingError;
use crate::filtration::FiltrationError;
use crate::io::IngestError;
use crate::landscape::LandscapeError;
use crate::persistence::PersistenceError;
use crate::pipeline::PipelineError;
use crate::simulate::SimulateError;
use crate::timeseries::SeriesError;

/// Any error raised by the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Persistence(#[from] PersistenceError),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}
