//! CSV datasets: a `y` column, covariate columns and exposure columns named
//! `z_<pollutant>_<period>` with 1-based periods.

use crate::error::{CliError, Result};
use crate::output::fmt_f64;
use cwvsmix::linalg::Matrix;
use cwvsmix::tensor::ExposureTensor;
use cwvsmix::ExposureDataset;
use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

pub const OUTCOME_COLUMN: &str = "y";
pub const INTERCEPT_COLUMN: &str = "intercept";

enum Column {
    Outcome,
    Covariate(usize),
    Exposure { period: usize, pollutant: usize },
}

struct Layout {
    columns: Vec<Column>,
    covariates: Vec<String>,
    pollutants: Vec<String>,
    m: usize,
}

fn parse_exposure_name(name: &str) -> Result<Option<(&str, usize)>> {
    let Some(rest) = name.strip_prefix("z_") else {
        return Ok(None);
    };
    let (pollutant, period) = rest
        .rsplit_once('_')
        .filter(|(p, _)| !p.is_empty())
        .ok_or_else(|| CliError::Input(format!("malformed exposure column '{name}'; expected z_<pollutant>_<period>")))?;
    let period: usize = period
        .parse()
        .map_err(|_| CliError::Input(format!("malformed period in exposure column '{name}'")))?;
    if period == 0 {
        return Err(CliError::Input(format!(
            "period index out of range in column '{name}': periods are 1-based"
        )));
    }
    Ok(Some((pollutant, period)))
}

fn layout(header: &csv::StringRecord, require_outcome: bool) -> Result<Layout> {
    let mut seen = HashMap::new();
    let mut columns = Vec::with_capacity(header.len());
    let mut covariates = Vec::new();
    let mut pollutants: Vec<String> = Vec::new();
    let mut m = 0;
    let mut has_outcome = false;
    for (c, name) in header.iter().enumerate() {
        if seen.insert(name.to_string(), c).is_some() {
            return Err(CliError::Input(format!("duplicate column '{name}'")));
        }
        if name == OUTCOME_COLUMN {
            has_outcome = true;
            columns.push(Column::Outcome);
        } else if let Some((pollutant, period)) = parse_exposure_name(name)? {
            let j = match pollutants.iter().position(|p| p == pollutant) {
                Some(j) => j,
                None => {
                    pollutants.push(pollutant.to_string());
                    pollutants.len() - 1
                }
            };
            m = m.max(period);
            columns.push(Column::Exposure {
                period: period - 1,
                pollutant: j,
            });
        } else if name.is_empty() {
            return Err(CliError::Input(format!("empty column name at position {}", c + 1)));
        } else {
            columns.push(Column::Covariate(covariates.len()));
            covariates.push(name.to_string());
        }
    }
    if require_outcome && !has_outcome {
        return Err(CliError::Input(format!("missing column '{OUTCOME_COLUMN}'")));
    }
    if pollutants.is_empty() {
        return Err(CliError::Input("no exposure columns named z_<pollutant>_<period>".into()));
    }
    for p in &pollutants {
        for t in 1..=m {
            if !seen.contains_key(&format!("z_{p}_{t}")) {
                return Err(CliError::Input(format!("missing exposure column 'z_{p}_{t}'")));
            }
        }
    }
    Ok(Layout {
        columns,
        covariates,
        pollutants,
        m,
    })
}

fn parse_cell(value: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| CliError::Input(format!("non-numeric value '{value}' at row {row}, column '{column}'")))?;
    if !v.is_finite() {
        return Err(CliError::Input(format!("non-finite value '{value}' at row {row}, column '{column}'")));
    }
    Ok(v)
}

struct Parsed {
    y: Vec<u8>,
    x: Vec<f64>,
    z: Vec<f64>,
    layout: Layout,
    n: usize,
}

fn parse<R: Read>(reader: R, source: &Path, require_outcome: bool) -> Result<Parsed> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| CliError::csv(source, e))?.clone();
    if header.is_empty() {
        return Err(CliError::Input("missing header row".into()));
    }
    let layout = layout(&header, require_outcome)?;
    let (p, q, m) = (layout.covariates.len(), layout.pollutants.len(), layout.m);
    let (mut y, mut x, mut z) = (Vec::new(), Vec::new(), Vec::new());
    let mut record = csv::StringRecord::new();
    let mut n = 0;
    while rdr.read_record(&mut record).map_err(|e| CliError::csv(source, e))? {
        let row = n + 1;
        if record.len() != header.len() {
            return Err(CliError::Input(format!(
                "ragged row {row}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        let base_x = x.len();
        let base_z = z.len();
        x.resize(base_x + p, 0.0);
        z.resize(base_z + m * q, 0.0);
        for (c, (value, col)) in record.iter().zip(&layout.columns).enumerate() {
            match *col {
                Column::Outcome => match value {
                    "0" => y.push(0),
                    "1" => y.push(1),
                    _ => {
                        let v = parse_cell(value, row, OUTCOME_COLUMN).ok();
                        match v {
                            Some(v) if v == 0.0 => y.push(0),
                            Some(v) if v == 1.0 => y.push(1),
                            _ => return Err(CliError::Input(format!("non-binary outcome at row {row}: '{value}'"))),
                        }
                    }
                },
                Column::Covariate(k) => x[base_x + k] = parse_cell(value, row, &header[c])?,
                Column::Exposure { period, pollutant } => {
                    z[base_z + period * q + pollutant] = parse_cell(value, row, &header[c])?
                }
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(CliError::Input("no data rows".into()));
    }
    Ok(Parsed { y, x, z, layout, n })
}

fn build(parsed: Parsed, add_intercept: bool) -> Result<ExposureDataset> {
    let Parsed { y, x, z, layout, n } = parsed;
    let (p, q, m) = (layout.covariates.len(), layout.pollutants.len(), layout.m);
    let intercept = add_intercept && !layout.covariates.iter().any(|c| c == INTERCEPT_COLUMN);
    let offset = intercept as usize;
    let mut names = Vec::with_capacity(p + offset);
    if intercept {
        names.push(INTERCEPT_COLUMN.to_string());
    }
    names.extend(layout.covariates);
    let design = Matrix::from_fn(n, p + offset, |i, k| if k < offset { 1.0 } else { x[i * p + k - offset] });
    let tensor = ExposureTensor::from_fn(n, m, q, |i, t, j| z[(i * m + t) * q + j]);
    Ok(ExposureDataset::new(y, design, tensor, layout.pollutants, names)?)
}

/// Reads a dataset. An intercept column is prepended unless one named
/// `intercept` is present.
pub fn ingest_csv(path: &Path) -> Result<ExposureDataset> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_dataset(file, path)
}

pub fn read_dataset<R: Read>(reader: R, source: &Path) -> Result<ExposureDataset> {
    build(parse(reader, source, true)?, true)
}

/// Reads exposure profiles only; other columns are ignored.
pub fn ingest_profiles(path: &Path) -> Result<ExposureTensor<f64>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let parsed = parse(file, path, false)?;
    let (n, m, q) = (parsed.n, parsed.layout.m, parsed.layout.pollutants.len());
    let z = parsed.z;
    Ok(ExposureTensor::from_fn(n, m, q, |i, t, j| z[(i * m + t) * q + j]))
}

/// Writes a dataset in the format read by [`ingest_csv`].
pub fn write_dataset_csv(data: &ExposureDataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let (n, m) = (data.n(), data.m());
    let mut header = vec![OUTCOME_COLUMN.to_string()];
    header.extend(data.covariate_names().iter().cloned());
    for t in 1..=m {
        for name in data.pollutant_names() {
            header.push(format!("z_{name}_{t}"));
        }
    }
    w.write_record(&header).map_err(|e| CliError::csv(path, e))?;
    let (x, z) = (data.covariates(), data.exposures());
    for i in 0..n {
        let mut row = Vec::with_capacity(header.len());
        row.push(data.outcomes()[i].to_string());
        row.extend(x.row(i).iter().map(|&v| fmt_f64(v)));
        for t in 0..m {
            row.extend(z.profile(i, t).iter().map(|&v| fmt_f64(v)));
        }
        w.write_record(&row).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
