//! Tabular data model, CSV ingestion and the bundled benchmark datasets.

mod csv_io;
mod datasets;
mod frame;

pub use csv_io::{read_csv, read_csv_from_reader, write_csv, write_csv_to_writer, CsvOptions};
pub use datasets::{catalog, load_dataset, CatalogEntry, DatasetRecord, DATASET_NAMES};
pub use frame::{Column, ColumnKind, Frame};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),
    #[error("duplicate row id {0}")]
    DuplicateRowId(usize),
    #[error("column length mismatch: column {name:?} has {found} rows, expected {expected}")]
    LengthMismatch { name: String, expected: usize, found: usize },
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
    #[error("column {0:?} is not numeric")]
    NotNumeric(String),
    #[error("unknown row id {0}")]
    UnknownRow(usize),
    #[error("unknown dataset {0:?}")]
    UnknownDataset(String),
    #[error("dataset asset {name:?} failed checksum verification")]
    Checksum { name: String },
    #[error("dataset asset {name:?} is corrupt: {reason}")]
    CorruptAsset { name: String, reason: String },
}

pub type Result<T> = std::result::Result<T, DataError>;
