//! CSV ingestion and the seeded synthetic market used when the real index
//! returns are not on disk.

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matkit::Matrix;
use crate::regress::Dataset;

/// Column selection for `load_csv`. By default a column whose name starts
/// with "date" is skipped, the first remaining column is the response and
/// every other column is a feature.
#[derive(Clone, Debug, Default)]
pub struct CsvOptions {
    pub response: Option<String>,
    pub features: Option<Vec<String>>,
    pub standardize: bool,
    pub intercept: bool,
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, opts)
}

pub fn read_csv(reader: impl Read, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(1, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let find = |name: &str| -> Result<usize> {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("no column named {name:?}"),
        })
    };
    let usable: Vec<usize> = (0..header.len())
        .filter(|&k| !header[k].to_ascii_lowercase().starts_with("date"))
        .collect();
    let response = match &opts.response {
        Some(name) => find(name)?,
        None => *usable.first().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "no numeric columns".into(),
        })?,
    };
    let features: Vec<usize> = match &opts.features {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => usable.iter().copied().filter(|&k| k != response).collect(),
    };
    if features.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "no feature columns".into(),
        });
    }

    let mut xs = Vec::new();
    let mut y = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| csv_error(line, e))?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let cell = |col: usize| -> Result<f64> {
            record[col].parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("column {:?}: {:?} is not a number", header[col], &record[col]),
            })
        };
        y.push(cell(response)?);
        for &f in &features {
            xs.push(cell(f)?);
        }
    }
    let names: Vec<String> = features.iter().map(|&k| header[k].clone()).collect();
    let x = Matrix::from_row_major(y.len(), features.len(), xs)?;
    prepare(Dataset::new(x, y)?.with_names(names)?, opts)
}

fn csv_error(line: usize, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(line);
    Error::Parse { line, msg: e.to_string() }
}

/// Applies the standardize and intercept flags.
pub fn prepare(mut data: Dataset, opts: &CsvOptions) -> Result<Dataset> {
    if opts.standardize {
        data = standardize(&data)?;
    }
    if opts.intercept {
        data = with_intercept(&data)?;
    }
    Ok(data)
}

/// Centres every column and scales it to unit sample standard deviation; the
/// response is centred only.
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    let (n, m) = (data.n(), data.m());
    let mut x = data.x.clone();
    for j in 0..m {
        let col = x.col(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        if sd == 0.0 {
            return Err(Error::InvalidArgument(format!("feature {j} is constant")));
        }
        x.set_col(j, &col.iter().map(|v| (v - mean) / sd).collect::<Vec<_>>());
    }
    let ym = data.y.iter().sum::<f64>() / n as f64;
    let y = data.y.iter().map(|v| v - ym).collect();
    let out = Dataset::new(x, y)?;
    match &data.feature_names {
        Some(names) => out.with_names(names.clone()),
        None => Ok(out),
    }
}

/// Appends a column of ones named "intercept".
pub fn with_intercept(data: &Dataset) -> Result<Dataset> {
    let m = data.m();
    let x = Matrix::from_fn(data.n(), m + 1, |i, j| if j < m { data.x[(i, j)] } else { 1.0 });
    let out = Dataset::new(x, data.y.clone())?;
    match &data.feature_names {
        Some(names) => {
            let mut names = names.clone();
            names.push("intercept".into());
            out.with_names(names)
        }
        None => Ok(out),
    }
}

pub const MARKET_ROWS: usize = 536;
pub const MARKET_FEATURES: [&str; 7] = ["SP", "DAX", "FTSE", "NIKKEI", "BOVESPA", "EU", "EM"];

/// Stand-in for the daily index-return table: 536 days, seven correlated
/// index returns driven by one global factor, and a response that loads on
/// the factor and on three of the indexes. Returns are on the 1e−2 scale.
pub fn synthetic_market(seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let loadings = [0.9, 1.1, 1.0, 0.6, 1.3, 1.05, 0.95];
    let idio = [0.006, 0.008, 0.007, 0.011, 0.012, 0.005, 0.007];
    let mut normal = || rng.sample::<f64, _>(StandardNormal);
    let mut xs = Vec::with_capacity(MARKET_ROWS * 7);
    let mut y = Vec::with_capacity(MARKET_ROWS);
    for _ in 0..MARKET_ROWS {
        let factor = 0.009 * normal();
        let row: Vec<f64> = (0..7).map(|k| loadings[k] * factor + idio[k] * normal()).collect();
        y.push(0.8 * factor + 0.25 * row[1] + 0.3 * row[4] + 0.2 * row[6] + 0.012 * normal());
        xs.extend(row);
    }
    let x = Matrix::from_row_major(MARKET_ROWS, 7, xs).expect("shape");
    Dataset::new(x, y)
        .and_then(|d| d.with_names(MARKET_FEATURES.iter().map(|s| s.to_string()).collect()))
        .expect("synthetic market is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_csv_reads_back_exactly() {
        let text = "date,resp,a,b\n2009-01-05,1.5,2,3\n2009-01-06,-0.25,4,5e-3\n2009-01-07,0,6,7\n";
        let d = read_csv(text.as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!((d.n(), d.m()), (3, 2));
        assert_eq!(d.y, vec![1.5, -0.25, 0.0]);
        assert_eq!(d.x.as_slice(), &[2.0, 3.0, 4.0, 5e-3, 6.0, 7.0]);
        assert_eq!(d.feature_names.unwrap(), vec!["a", "b"]);
    }

    #[test]
    fn column_selection() {
        let text = "ISE,ISE_USD,a,b\n1,10,2,3\n2,20,4,5\n3,30,6,8\n";
        let opts = CsvOptions {
            response: Some("ISE_USD".into()),
            features: Some(vec!["b".into(), "a".into()]),
            ..Default::default()
        };
        let d = read_csv(text.as_bytes(), &opts).unwrap();
        assert_eq!(d.y, vec![10.0, 20.0, 30.0]);
        assert_eq!(d.x.row(0), &[3.0, 2.0]);
        let bad = CsvOptions {
            response: Some("nope".into()),
            ..Default::default()
        };
        assert!(read_csv(text.as_bytes(), &bad).is_err());
    }

    #[test]
    fn malformed_row_names_its_line() {
        let mut text = String::from("y,a,b\n");
        for k in 0..20 {
            if k == 15 {
                text.push_str("1.0,abc,2\n");
            } else {
                text.push_str(&format!("{k},{},{}\n", k * 2, k * k));
            }
        }
        // header is line 1, so the 16th record sits on line 17
        match read_csv(text.as_bytes(), &CsvOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 17),
            other => panic!("{other:?}"),
        }
        let ragged = "y,a,b\n1,2,3\n1,2\n3,4,5\n6,7,9\n";
        match read_csv(ragged.as_bytes(), &CsvOptions::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn standardize_and_intercept() {
        let d = synthetic_market(1);
        let s = standardize(&d).unwrap();
        for j in 0..7 {
            let col = s.x.col(j);
            assert!(col.iter().sum::<f64>().abs() < 1e-10);
        }
        let w = with_intercept(&d).unwrap();
        assert_eq!(w.m(), 8);
        assert_eq!(w.x[(10, 7)], 1.0);
    }

    #[test]
    fn synthetic_market_shape_and_determinism() {
        let a = synthetic_market(7);
        assert_eq!((a.n(), a.m()), (536, 7));
        assert_eq!(a.x.as_slice(), synthetic_market(7).x.as_slice());
        assert_ne!(a.y, synthetic_market(8).y);
    }
}
