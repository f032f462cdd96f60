//! CSV logs. Floats are written in shortest round-trip form so reading a
//! log back reproduces every value bit for bit.

use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use crate::bandits::Policy;
use crate::error::{Error, Result};
use crate::sim::metrics::{EcdfPoint, ErrorByCpi};

pub const RECORDS_HEADER: [&str; 14] = [
    "run",
    "cpi",
    "policy",
    "channels",
    "sinrs_db",
    "est_x",
    "est_y",
    "true_x",
    "true_y",
    "error_m",
    "regret",
    "cum_regret",
    "feedback_bits",
    "converged",
];

/// One row of the per-CPI log.
#[derive(Debug, Clone, PartialEq)]
pub struct CpiRecord {
    pub run: usize,
    pub cpi: usize,
    pub policy: Policy,
    /// Channel assigned to each node, by node index.
    pub channels: Vec<usize>,
    pub sinrs_db: Vec<f64>,
    pub est: [f64; 2],
    pub truth: [f64; 2],
    pub error_m: f64,
    pub regret: f64,
    pub cum_regret: f64,
    pub feedback_bits: u64,
    pub converged: bool,
}

fn join<T: std::fmt::Debug>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

impl CpiRecord {
    fn fields(&self) -> [String; 14] {
        [
            self.run.to_string(),
            self.cpi.to_string(),
            self.policy.name().to_string(),
            join(&self.channels),
            join(&self.sinrs_db),
            f(self.est[0]),
            f(self.est[1]),
            f(self.truth[0]),
            f(self.truth[1]),
            f(self.error_m),
            f(self.regret),
            f(self.cum_regret),
            self.feedback_bits.to_string(),
            self.converged.to_string(),
        ]
    }

    fn parse(row: &csv::StringRecord) -> std::result::Result<Self, String> {
        if row.len() != RECORDS_HEADER.len() {
            return Err(format!(
                "expected {} fields, got {}",
                RECORDS_HEADER.len(),
                row.len()
            ));
        }
        fn num<T: FromStr>(s: &str, name: &str) -> std::result::Result<T, String> {
            s.parse().map_err(|_| format!("bad {name}: {s:?}"))
        }
        fn list<T: FromStr>(s: &str, name: &str) -> std::result::Result<Vec<T>, String> {
            if s.is_empty() {
                return Ok(Vec::new());
            }
            s.split(';').map(|x| num(x, name)).collect()
        }
        Ok(Self {
            run: num(&row[0], "run")?,
            cpi: num(&row[1], "cpi")?,
            policy: row[2].parse().map_err(|e| format!("{e}"))?,
            channels: list(&row[3], "channels")?,
            sinrs_db: list(&row[4], "sinrs_db")?,
            est: [num(&row[5], "est_x")?, num(&row[6], "est_y")?],
            truth: [num(&row[7], "true_x")?, num(&row[8], "true_y")?],
            error_m: num(&row[9], "error_m")?,
            regret: num(&row[10], "regret")?,
            cum_regret: num(&row[11], "cum_regret")?,
            feedback_bits: num(&row[12], "feedback_bits")?,
            converged: num(&row[13], "converged")?,
        })
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    csv::Writer::from_path(path).map_err(csv_err(path))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = create(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_records(path: impl AsRef<Path>, records: &[CpiRecord]) -> Result<()> {
    write_rows(
        path.as_ref(),
        &RECORDS_HEADER,
        records.iter().map(CpiRecord::fields),
    )
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<CpiRecord>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?;
    if header.iter().ne(RECORDS_HEADER.iter().copied()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            msg: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    r.records()
        .enumerate()
        .map(|(i, row)| {
            let row = row.map_err(csv_err(path))?;
            CpiRecord::parse(&row).map_err(|msg| Error::Parse {
                path: path.to_path_buf(),
                msg: format!("row {}: {msg}", i + 2),
            })
        })
        .collect()
}

/// `window` is `all` or `tail`.
pub fn write_ecdf(path: impl AsRef<Path>, curves: &[(Policy, &str, Vec<EcdfPoint>)]) -> Result<()> {
    let rows = curves.iter().flat_map(|(policy, window, pts)| {
        pts.iter().map(move |p| {
            [
                policy.name().to_string(),
                window.to_string(),
                f(p.value),
                f(p.probability),
            ]
        })
    });
    write_rows(
        path.as_ref(),
        &["policy", "window", "value_m", "probability"],
        rows,
    )
}

pub fn write_error_by_cpi(
    path: impl AsRef<Path>,
    curves: &[(Policy, Vec<ErrorByCpi>)],
) -> Result<()> {
    let rows = curves.iter().flat_map(|(policy, pts)| {
        pts.iter().map(move |p| {
            [
                policy.name().to_string(),
                p.cpi.to_string(),
                f(p.mean_m),
                f(p.median_m),
            ]
        })
    });
    write_rows(
        path.as_ref(),
        &["policy", "cpi", "mean_error_m", "median_error_m"],
        rows,
    )
}

/// Mean cumulative regret across runs, per CPI.
pub fn write_regret(path: impl AsRef<Path>, curves: &[(Policy, Vec<f64>)]) -> Result<()> {
    let rows = curves.iter().flat_map(|(policy, c)| {
        c.iter()
            .enumerate()
            .map(move |(t, v)| [policy.name().to_string(), t.to_string(), f(*v)])
    });
    write_rows(path.as_ref(), &["policy", "cpi", "mean_cum_regret"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<CpiRecord> {
        vec![
            CpiRecord {
                run: 0,
                cpi: 0,
                policy: Policy::Etp,
                channels: vec![3, 0, 7],
                sinrs_db: vec![98.16028147019331, 0.1 + 0.2, -1e-300],
                est: [1.0 / 3.0, 700.0],
                truth: [0.0, f64::MIN_POSITIVE],
                error_m: 2.5e-7,
                regret: 0.0,
                cum_regret: 12.000000000000002,
                feedback_bits: 192,
                converged: false,
            },
            CpiRecord {
                run: 4,
                cpi: 699,
                policy: Policy::Random,
                channels: vec![1],
                sinrs_db: vec![5.0],
                est: [-3.0, 4.0],
                truth: [-3.0, 4.0],
                error_m: 0.0,
                regret: 1.5,
                cum_regret: 1e20,
                feedback_bits: 0,
                converged: true,
            },
        ]
    }

    #[test]
    fn records_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/records.csv");
        let recs = sample();
        write_records(&path, &recs).unwrap();
        assert_eq!(read_records(&path).unwrap(), recs);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("run,cpi,policy,channels,sinrs_db,"));
        assert!(text.contains("3;0;7"));
    }

    #[test]
    fn wrong_header_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_records(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn bad_field_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let mut text = RECORDS_HEADER.join(",");
        text.push_str("\n0,0,etp,1;x,1.0,0,0,0,0,0,0,0,0,false\n");
        std::fs::write(&path, text).unwrap();
        let err = read_records(&path).unwrap_err().to_string();
        assert!(err.contains("row 2") && err.contains("channels"), "{err}");
    }
}
