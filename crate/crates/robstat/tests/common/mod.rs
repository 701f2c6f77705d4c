#![allow(dead_code)]

use nalgebra::DMatrix;
use robstat::preprocessing::{apply_power_transform, clean_dataset, fit_power_transform, CleanThresholds, Direction, PowerMethod};
use robstat_data::{load_dataset, Column, Frame};

pub mod oracles;

pub const SKEWED: [&str; 4] = ["Displacement", "BHP", "Torque", "TopSpeed"];

pub fn topgear_raw() -> Frame {
    load_dataset("topgear").unwrap().data
}

pub fn topgear_clean() -> Frame {
    clean_dataset(&topgear_raw(), &CleanThresholds::default()).unwrap().0
}

/// Power-transforms a column in place, fitting on its present values only.
pub fn transform_column(frame: &mut Frame, name: &str, target: &str) {
    let col = frame.numeric(name).unwrap().to_vec();
    let present: Vec<f64> = col.iter().flatten().copied().collect();
    let t = fit_power_transform(&present, PowerMethod::Auto).unwrap();
    let z = apply_power_transform(&t, &present, Direction::Forward).unwrap();
    let mut it = z.into_iter();
    let out: Vec<Option<f64>> = col.iter().map(|v| v.map(|_| it.next().unwrap())).collect();
    if frame.column_index(target).is_ok() {
        frame.replace_column(target, Column::Numeric(out)).unwrap();
    } else {
        frame.push_column(target, Column::Numeric(out)).unwrap();
    }
}

/// Cleaned TopGear with Price_transformed added and the skewed columns transformed.
pub fn topgear_transformed() -> Frame {
    let mut f = topgear_clean();
    transform_column(&mut f, "Price", "Price_transformed");
    for c in SKEWED {
        transform_column(&mut f, c, c);
    }
    f
}

pub fn to_matrix(f: &Frame) -> DMatrix<f64> {
    let rows = f.numeric_rows();
    DMatrix::from_fn(rows.len(), f.n_cols(), |i, j| rows[i][j])
}

/// Complete cases of the transformed data without Price and Verdict (244 x 11).
pub fn topgear_mcd_matrix() -> (DMatrix<f64>, Vec<usize>, Vec<String>) {
    let f = topgear_transformed().drop_missing_rows().drop_columns(&["Price", "Verdict"]).unwrap();
    (to_matrix(&f), f.row_ids().to_vec(), f.names().to_vec())
}

/// Cleaned TopGear without Verdict, with logged skewed columns and
/// Price replaced by log(Price / 1000); missing cells kept as NaN.
pub fn topgear_log_frame() -> Frame {
    let mut f = topgear_clean().drop_columns(&["Verdict"]).unwrap();
    for c in SKEWED {
        let col: Vec<Option<f64>> = f.numeric(c).unwrap().iter().map(|v| v.map(f64::ln)).collect();
        f.replace_column(c, Column::Numeric(col)).unwrap();
    }
    let price: Vec<Option<f64>> = f.numeric("Price").unwrap().iter().map(|v| v.map(|p| (p / 1000.0).ln())).collect();
    f.replace_column("Price", Column::Numeric(price)).unwrap();
    f
}

pub fn to_nan_matrix(f: &Frame) -> DMatrix<f64> {
    let names = f.numeric_names();
    let mut x = DMatrix::from_element(f.n_rows(), names.len(), f64::NAN);
    for (j, name) in names.iter().enumerate() {
        for (i, v) in f.numeric(name).unwrap().iter().enumerate() {
            if let Some(v) = v {
                x[(i, j)] = *v;
            }
        }
    }
    x
}
