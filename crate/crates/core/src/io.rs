//! Plain-text serialization for fields and time series.
//!
//! Numbers are printed with the shortest representation that round-trips, so
//! identical inputs give identical bytes.

use std::io::{Read, Write};

use crate::meanfield::MeanFieldState;
use crate::model::{MomentumGrid, WignerField};
use crate::qmat::{matrix_purity, ComplexMat2, C64};
use crate::unravel::Sample;

pub const FIELD_COLUMNS: [&str; 9] = ["p", "re00", "im00", "re01", "im01", "re10", "im10", "re11", "im11"];
pub const MEANFIELD_COLUMNS: [&str; 7] = ["t", "p", "re00", "re01", "im01", "re11", "purity"];
pub const TRAJECTORY_COLUMNS: [&str; 7] = ["t", "p", "bloch_x", "bloch_y", "bloch_z", "purity", "min_eig"];

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("malformed field file: {0}")]
    Malformed(String),
}

fn data_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn write_comments<W: Write>(w: &mut W, comments: &[(String, String)]) -> std::io::Result<()> {
    for (k, v) in comments {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// Writes a field snapshot. `echo` holds extra `key = value` comment lines
/// placed after the q and t lines.
pub fn write_field<W: Write>(mut w: W, field: &WignerField, t: f64, echo: &[(String, String)]) -> Result<(), IoError> {
    let mut head = vec![
        ("q".to_string(), field.q().to_string()),
        ("t".to_string(), t.to_string()),
    ];
    head.extend_from_slice(echo);
    write_comments(&mut w, &head)?;
    let mut out = data_writer(w);
    out.write_record(FIELD_COLUMNS)?;
    for (p, v) in field.grid().points().zip(field.values()) {
        let m = &v.m;
        out.write_record(
            [
                p, m[0][0].re, m[0][0].im, m[0][1].re, m[0][1].im, m[1][0].re, m[1][0].im, m[1][1].re, m[1][1].im,
            ]
            .map(|x| x.to_string()),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// A field read back from CSV together with its q and t comment values.
pub struct FieldFile {
    pub field: WignerField,
    pub q: f64,
    pub t: f64,
}

/// Reads a file produced by [`write_field`]. The grid is rebuilt from the
/// first and last p values.
pub fn read_field<R: Read>(mut r: R) -> Result<FieldFile, IoError> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let comment_value = |key: &str| -> Result<f64, IoError> {
        text.lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once(" = "))
            .find(|(k, _)| *k == key)
            .and_then(|(_, v)| v.trim().parse().ok())
            .ok_or_else(|| IoError::Malformed(format!("missing `{key}` comment")))
    };
    let (q, t) = (comment_value("q")?, comment_value("t")?);
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut ps = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let x: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| IoError::Malformed(e.to_string())))
            .collect::<Result<_, _>>()?;
        if x.len() != FIELD_COLUMNS.len() {
            return Err(IoError::Malformed(format!("row with {} columns", x.len())));
        }
        ps.push(x[0]);
        values.push(ComplexMat2::new(
            C64::new(x[1], x[2]),
            C64::new(x[3], x[4]),
            C64::new(x[5], x[6]),
            C64::new(x[7], x[8]),
        ));
    }
    let n = ps.len();
    if n < 2 {
        return Err(IoError::Malformed("too few rows".into()));
    }
    let dp = (ps[n - 1] - ps[0]) / (n - 1) as f64;
    let grid = MomentumGrid::new(ps[0], ps[0] + dp * n as f64, n).map_err(|e| IoError::Malformed(e.to_string()))?;
    let field = WignerField::from_values_unchecked(grid, values, q).map_err(|e| IoError::Malformed(e.to_string()))?;
    Ok(FieldFile { field, q, t })
}

pub fn write_meanfield<W: Write>(w: W, run: &[MeanFieldState]) -> Result<(), IoError> {
    let mut out = data_writer(w);
    out.write_record(MEANFIELD_COLUMNS)?;
    for s in run {
        let m = s.rho.matrix().m;
        out.write_record(
            [
                s.t,
                s.p,
                m[0][0].re,
                m[0][1].re,
                m[0][1].im,
                m[1][1].re,
                matrix_purity(s.rho.matrix()),
            ]
            .map(|x| x.to_string()),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trajectory<W: Write>(w: W, times: &[f64], samples: &[Sample]) -> Result<(), IoError> {
    let mut out = data_writer(w);
    out.write_record(TRAJECTORY_COLUMNS)?;
    for (t, s) in times.iter().zip(samples) {
        let [x, y, z] = s.bloch();
        out.write_record([*t, s.p, x, y, z, s.purity(), s.min_eigenvalue()].map(|x| x.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Generic header-plus-rows writer for small tables.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<(), IoError> {
    let mut out = data_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|x| x.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{product_field, InitialCondition};
    use crate::qmat::QubitDensity;

    #[test]
    fn field_round_trip() {
        let g = MomentumGrid::new(-10.0, 10.0, 128).unwrap();
        let rho = QubitDensity::bloch_angles(0.8, 0.3).unwrap();
        let init = InitialCondition::gaussian(rho, 0.5, 1.0).unwrap();
        let f = product_field(&init, &g, 0.25).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &f, 1.5, &[("lambda".into(), "1".into())]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# q = 0.25\n# t = 1.5\n# lambda = 1\np,re00,"));
        let back = read_field(buf.as_slice()).unwrap();
        assert_eq!(back.q, 0.25);
        assert_eq!(back.t, 1.5);
        assert_eq!(back.field.values(), f.values());
        assert_eq!(back.field.grid().len(), 128);
        assert!((back.field.grid().p_min() + 10.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_field_rejected() {
        assert!(read_field("p,re00\n1,2\n".as_bytes()).is_err());
        assert!(read_field("# q = 0\n# t = 0\np\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn meanfield_columns() {
        let s = MeanFieldState {
            t: 0.0,
            p: 1.0,
            rho: QubitDensity::plus(),
        };
        let mut buf = Vec::new();
        write_meanfield(&mut buf, &[s]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "t,p,re00,re01,im01,re11,purity\n0,1,0.5,0.5,0,0.5,1\n");
    }
}
