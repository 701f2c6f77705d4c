use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::csv_io::{read_csv_from_reader, CsvOptions};
use crate::frame::Frame;
use crate::{DataError, Result};

pub const DATASET_NAMES: [&str; 5] = ["telephone", "stars", "animals", "topgear", "glass"];

const MANIFEST: &str = include_str!("../assets/manifest.json");

struct Asset {
    name: &'static str,
    csv: &'static [u8],
    descr: &'static str,
}

const ASSETS: [Asset; 5] = [
    Asset {
        name: "telephone",
        csv: include_bytes!("../assets/telephone.csv"),
        descr: include_str!("../assets/descr/telephone.rst"),
    },
    Asset {
        name: "stars",
        csv: include_bytes!("../assets/stars.csv"),
        descr: include_str!("../assets/descr/stars.rst"),
    },
    Asset {
        name: "animals",
        csv: include_bytes!("../assets/animals.csv"),
        descr: include_str!("../assets/descr/animals.rst"),
    },
    Asset {
        name: "topgear",
        csv: include_bytes!("../assets/topgear.csv"),
        descr: include_str!("../assets/descr/topgear.rst"),
    },
    Asset {
        name: "glass",
        csv: include_bytes!("../assets/glass.csv"),
        descr: include_str!("../assets/descr/glass.rst"),
    },
];

#[derive(Debug, Clone, Deserialize, serde::Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub file: String,
    pub description: String,
    pub n: usize,
    pub p: usize,
    pub r_name: String,
    pub r_package: String,
    pub sha256: String,
    pub provenance: String,
}

#[derive(Deserialize)]
struct Manifest {
    datasets: Vec<CatalogEntry>,
}

#[derive(Debug, Clone)]
pub struct DatasetRecord {
    pub data: Frame,
    pub feature_names: Vec<String>,
    pub description: String,
    pub source_path: String,
}

pub fn catalog() -> Vec<CatalogEntry> {
    let m: Manifest = serde_json::from_str(MANIFEST).expect("bundled manifest is valid JSON");
    m.datasets
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_dataset(name: &str) -> Result<DatasetRecord> {
    let asset = ASSETS
        .iter()
        .find(|a| a.name == name)
        .ok_or_else(|| DataError::UnknownDataset(name.to_string()))?;
    let entry = catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| DataError::UnknownDataset(name.to_string()))?;
    if sha256_hex(asset.csv) != entry.sha256 {
        return Err(DataError::Checksum { name: name.to_string() });
    }
    let data = read_csv_from_reader(asset.csv, &CsvOptions::default())?;
    if data.n_rows() != entry.n || data.n_cols() != entry.p {
        return Err(DataError::CorruptAsset {
            name: name.to_string(),
            reason: format!("expected {}x{}, found {}x{}", entry.n, entry.p, data.n_rows(), data.n_cols()),
        });
    }
    Ok(DatasetRecord {
        feature_names: data.names().to_vec(),
        data,
        description: asset.descr.to_string(),
        source_path: format!("{}/assets/{}", env!("CARGO_MANIFEST_DIR"), entry.file),
    })
}
