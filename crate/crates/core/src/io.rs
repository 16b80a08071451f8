//! Plain CSV storage for matrices (one row per line) and vectors (one value
//! per line).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::bench::output::csv_err;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

pub fn write_matrix_csv<W: Write>(m: &Matrix, w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.rows() {
        wtr.write_record(m.row(i).iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(r: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: `{s}`: {e}", i + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix file".into()));
    }
    let cols = rows[0].len();
    if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::Parse(format!("row {} has a different column count", i + 1)));
    }
    Matrix::new(rows.len(), cols, rows.concat())
}

pub fn write_vector_csv<W: Write>(v: &[f64], mut w: W) -> Result<()> {
    for x in v {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

pub fn read_vector_csv<R: Read>(mut r: R) -> Result<Vector> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    let data = s
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.parse::<f64>().map_err(|e| Error::Parse(format!("`{l}`: {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if data.is_empty() {
        return Err(Error::Parse("empty vector file".into()));
    }
    Vector::new(data)
}

pub fn load_matrix(path: &Path) -> Result<Matrix> {
    read_matrix_csv(fs::File::open(path)?)
}

pub fn load_vector(path: &Path) -> Result<Vector> {
    read_vector_csv(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = Matrix::from_rows(&[[0.1, -2.5e-17, 3.0], [1.0 / 3.0, 0.0, -7.25]]).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        assert_eq!(read_matrix_csv(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn vector_round_trip_is_exact() {
        let v = vec![0.1, -1.0 / 7.0, 1e300];
        let mut buf = Vec::new();
        write_vector_csv(&v, &mut buf).unwrap();
        assert_eq!(read_vector_csv(buf.as_slice()).unwrap().as_slice(), v.as_slice());
    }

    #[test]
    fn ragged_and_bad_input() {
        assert!(read_matrix_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(read_matrix_csv("1,x\n".as_bytes()).is_err());
        assert!(read_matrix_csv("".as_bytes()).is_err());
        assert!(read_vector_csv("\n\n".as_bytes()).is_err());
    }
}
