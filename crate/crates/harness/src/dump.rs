//! Density dumps: little-endian `f64` payload plus a JSON header.
//!
//! Values are in row-major multi-index order, the flat order of the grid.
//! `stem.bin` holds the payload and `stem.json` the header; 1D grids also get
//! `stem.csv` with one value per line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fermihart_core::GridSpec;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityHeader {
    pub dims: usize,
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
    pub dtype: String,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut name = stem.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

pub fn dump_density(rho: &[f64], grid: &GridSpec, stem: &Path) -> Result<(), HarnessError> {
    grid.check_len(rho.len())?;
    let header = DensityHeader {
        dims: grid.dims(),
        sizes: grid.sizes().to_vec(),
        lengths: grid.lengths().to_vec(),
        dtype: "f64le".into(),
    };
    std::fs::write(with_ext(stem, "json"), serde_json::to_vec_pretty(&header)?)?;

    let mut bin = BufWriter::new(File::create(with_ext(stem, "bin"))?);
    for x in rho {
        bin.write_all(&x.to_le_bytes())?;
    }
    bin.flush()?;

    if grid.dims() == 1 {
        let mut csv = BufWriter::new(File::create(with_ext(stem, "csv"))?);
        for x in rho {
            writeln!(csv, "{x:e}")?;
        }
        csv.flush()?;
    }
    Ok(())
}

pub fn read_density(stem: &Path) -> Result<(DensityHeader, Vec<f64>), HarnessError> {
    let header: DensityHeader = serde_json::from_slice(&std::fs::read(with_ext(stem, "json"))?)?;
    let bytes = std::fs::read(with_ext(stem, "bin"))?;
    let expected: usize = header.sizes.iter().product();
    if bytes.len() != 8 * expected {
        return Err(HarnessError::Config(format!(
            "density payload holds {} bytes, header promises {expected} values",
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, values))
}
