//! Labeled waveform records and everything that produces or partitions them.

mod batch;
mod csv_io;
mod record;
mod split;
mod synthetic;

pub use batch::BatchSampler;
pub use csv_io::{
    load_csv, write_csv, DistanceColumns, LoadedDataset, RowRejection, SchemaMap,
};
pub use record::{canonicalize, Normalization, WaveformRecord, DEGENERATE_CIR_TAG};
pub use split::{split, DatasetSplit, DEFAULT_TRAIN_FRACTION};
pub use synthetic::{generate_synthetic, SyntheticConfig};
