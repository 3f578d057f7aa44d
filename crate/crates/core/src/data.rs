//! Paired measurements, their summary statistics, and the plug-in model.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::NormalLocationModel;

const TABLE1: &str = include_str!("../data/table1.csv");
const TABLE2: &str = include_str!("../data/table2.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub group: String,
    pub x1: f64,
    pub x2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDataset {
    pub columns: [String; 3],
    pub rows: Vec<PairedRow>,
}

impl PairedDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn means(&self) -> Option<(f64, f64)> {
        if self.rows.is_empty() {
            return None;
        }
        let n = self.rows.len() as f64;
        let (s1, s2) = self
            .rows
            .iter()
            .fold((0.0, 0.0), |(a, b), r| (a + r.x1, b + r.x2));
        Some((s1 / n, s2 / n))
    }
}

/// Pituitary-fissure sizes, 27 children (girls and boys), two occasions.
pub fn table1() -> PairedDataset {
    parse_csv(TABLE1.as_bytes()).expect("bundled fixture parses")
}

/// The 13-child subsample of [`table1`].
pub fn table2() -> PairedDataset {
    parse_csv(TABLE2.as_bytes()).expect("bundled fixture parses")
}

/// Reads a `group,x1,x2` CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<PairedDataset> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_csv(file)
}

/// Parses `group,x1,x2` CSV. Rows are numbered from 1 after the header.
pub fn parse_csv<R: Read>(reader: R) -> Result<PairedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(Error::Data(
            "missing header row (expected group,x1,x2)".into(),
        ));
    }
    for want in ["group", "x1", "x2"] {
        if !headers.iter().any(|h| h == want) {
            return Err(Error::Data(format!(
                "header lacks column `{want}` (found {})",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let cell = |name: &str| -> Result<&str> {
            let j = headers
                .iter()
                .position(|h| h == name)
                .expect("checked above");
            rec.get(j)
                .ok_or_else(|| Error::Data(format!("row {row}: missing column `{name}`")))
        };
        let number = |name: &str| -> Result<f64> {
            let raw = cell(name)?;
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Data(format!(
                    "row {row}, column `{name}`: `{raw}` is not a finite number"
                ))),
            }
        };
        rows.push(PairedRow {
            group: cell("group")?.to_string(),
            x1: number("x1")?,
            x2: number("x2")?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    Ok(PairedDataset {
        columns: ["group".into(), "x1".into(), "x2".into()],
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean1: f64,
    pub mean2: f64,
    /// Sample variances, divisor `n - 1`.
    pub var1: f64,
    pub var2: f64,
    /// Average of the two sample variances.
    pub pooled_variance: f64,
    /// `None` when either column is constant.
    pub correlation: Option<f64>,
    pub degenerate: bool,
}

pub fn summarize(ds: &PairedDataset) -> Result<Summary> {
    let n = ds.rows.len();
    if n < 2 {
        return Err(Error::Data(format!(
            "summary statistics need at least 2 rows, got {n}"
        )));
    }
    let (mean1, mean2) = ds.means().expect("nonempty");
    let (mut s11, mut s22, mut s12) = (0.0, 0.0, 0.0);
    for r in &ds.rows {
        let (a, b) = (r.x1 - mean1, r.x2 - mean2);
        s11 += a * a;
        s22 += b * b;
        s12 += a * b;
    }
    let df = (n - 1) as f64;
    let degenerate = s11 == 0.0 || s22 == 0.0;
    let correlation = if degenerate {
        None
    } else {
        Some((s12 / (s11 * s22).sqrt()).clamp(-1.0, 1.0))
    };
    Ok(Summary {
        n,
        mean1,
        mean2,
        var1: s11 / df,
        var2: s22 / df,
        pooled_variance: 0.5 * (s11 + s22) / df,
        correlation,
        degenerate,
    })
}

/// Normal model with `σ = √sigma2` and correlation `rho`.
pub fn plugin_model(sigma2: f64, rho: f64) -> Result<NormalLocationModel> {
    NormalLocationModel::from_variance(sigma2, rho)
}
