use std::io::{Read, Write};
use std::path::Path;

use crate::frame::{Column, Frame};
use crate::{DataError, Result};

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    pub na_markers: Vec<String>,
    pub header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            na_markers: vec![String::new(), "NA".into(), "NaN".into()],
            header: true,
        }
    }
}

pub fn read_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Frame> {
    let file = std::fs::File::open(path)?;
    read_csv_from_reader(file, options)
}

/// Parses delimited text. A column is numeric when every non-missing token
/// parses as a float; otherwise it is kept as text.
pub fn read_csv_from_reader<R: Read>(reader: R, options: &CsvOptions) -> Result<Frame> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| DataError::Csv(e.to_string()))?;
        records.push(rec.iter().map(|s| s.to_string()).collect());
    }
    let (names, body) = if options.header {
        if records.is_empty() {
            return Err(DataError::Csv("missing header row".into()));
        }
        let header = records.remove(0);
        (header, records)
    } else {
        let p = records.first().map(Vec::len).unwrap_or(0);
        ((0..p).map(|j| format!("c{j}")).collect(), records)
    };
    let p = names.len();
    for (i, r) in body.iter().enumerate() {
        if r.len() != p {
            return Err(DataError::Ragged { row: i, expected: p, found: r.len() });
        }
    }
    let is_na = |s: &str| options.na_markers.iter().any(|m| m == s.trim());
    let mut columns = Vec::with_capacity(p);
    for j in 0..p {
        let parsed: Option<Vec<Option<f64>>> = body
            .iter()
            .map(|r| {
                let tok = r[j].as_str();
                if is_na(tok) {
                    Some(None)
                } else {
                    tok.trim().parse::<f64>().ok().map(Some)
                }
            })
            .collect();
        columns.push(match parsed {
            Some(v) => Column::Numeric(v),
            None => Column::Text(
                body.iter()
                    .map(|r| if is_na(&r[j]) { None } else { Some(r[j].clone()) })
                    .collect(),
            ),
        });
    }
    if columns.is_empty() {
        return Frame::with_row_ids(names, columns, (0..body.len()).collect());
    }
    Frame::new(names, columns)
}

pub fn write_csv(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to_writer(frame, file)
}

/// Writes with a header, `NA` for missing cells and shortest round-trip floats.
pub fn write_csv_to_writer<W: Write>(frame: &Frame, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| DataError::Csv(e.to_string());
    wtr.write_record(frame.names()).map_err(err)?;
    for i in 0..frame.n_rows() {
        let row: Vec<String> = frame
            .columns()
            .iter()
            .map(|c| match c {
                Column::Numeric(v) => v[i].map(format_float).unwrap_or_else(|| "NA".into()),
                Column::Text(v) => v[i].clone().unwrap_or_else(|| "NA".into()),
            })
            .collect();
        wtr.write_record(&row).map_err(err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub(crate) fn format_float(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn na_token_masks_cell() {
        let f = read_csv_from_reader("a,b\n1,NA\n2,3\n".as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(f.numeric("b").unwrap(), &[None, Some(3.0)]);
    }

    #[test]
    fn headerless_gets_synthetic_names() {
        let opts = CsvOptions { header: false, ..CsvOptions::default() };
        let f = read_csv_from_reader("1,2,3\n4,5,6\n".as_bytes(), &opts).unwrap();
        assert_eq!(f.names(), &["c0", "c1", "c2"]);
        assert_eq!(f.n_rows(), 2);
    }

    #[test]
    fn ragged_rows_error() {
        let r = read_csv_from_reader("a,b\n1,2\n3\n".as_bytes(), &CsvOptions::default());
        assert!(matches!(r, Err(DataError::Ragged { row: 1, .. })));
    }

    #[test]
    fn duplicate_header_error() {
        let r = read_csv_from_reader("a,a\n1,2\n".as_bytes(), &CsvOptions::default());
        assert!(matches!(r, Err(DataError::DuplicateColumn(_))));
    }

    #[test]
    fn text_columns_detected() {
        let f = read_csv_from_reader("a,b\n1,x\n2,\"y, z\"\n".as_bytes(), &CsvOptions::default()).unwrap();
        assert_eq!(f.text("b").unwrap()[1].as_deref(), Some("y, z"));
    }

    #[test]
    fn custom_delimiter_and_marker() {
        let opts = CsvOptions { delimiter: b';', na_markers: vec!["?".into()], header: true };
        let f = read_csv_from_reader("a;b\n1;?\n".as_bytes(), &opts).unwrap();
        assert_eq!(f.numeric("b").unwrap(), &[None]);
    }

    #[test]
    fn two_by_two_round_trip() {
        let src = "x,y\n1.5,2\n-3,0.1\n";
        let f = read_csv_from_reader(src.as_bytes(), &CsvOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv_to_writer(&f, &mut buf).unwrap();
        let g = read_csv_from_reader(buf.as_slice(), &CsvOptions::default()).unwrap();
        assert_eq!(f, g);
    }
}
