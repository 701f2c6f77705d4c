use robstat::preprocessing::{
    apply_power_transform, clean_dataset, fit_power_transform, robust_scale, unscale, CleanThresholds, Direction,
    PowerMethod, ScaleEstimator,
};
use robstat_data::{load_dataset, Frame};

fn topgear() -> Frame {
    load_dataset("topgear").unwrap().data
}

#[test]
fn topgear_cleaning_report() {
    let (clean, report) = clean_dataset(&topgear(), &CleanThresholds::default()).unwrap();
    assert_eq!(report.dropped_rows.rows_missings, vec![69, 95]);
    assert_eq!(report.dropped_columns.cols_bad_scale, vec!["Cylinders"]);
    assert_eq!(clean.n_rows(), 295);
    assert!(report.dropped_columns.cols_missings.is_empty());
}

#[test]
fn cleaning_is_idempotent() {
    let (once, _) = clean_dataset(&topgear(), &CleanThresholds::default()).unwrap();
    let (twice, report) = clean_dataset(&once, &CleanThresholds::default()).unwrap();
    assert_eq!(once, twice);
    assert!(report.is_empty());
}

#[test]
fn topgear_price_boxcox() {
    let (clean, _) = clean_dataset(&topgear(), &CleanThresholds::default()).unwrap();
    let price: Vec<f64> = clean.numeric("Price").unwrap().iter().flatten().copied().collect();
    let t = fit_power_transform(&price, PowerMethod::Auto).unwrap();
    assert_eq!(t.method, PowerMethod::Boxcox);
    assert!((t.lambda_rew - (-0.4235)).abs() < 0.02);
    let z = apply_power_transform(&t, &price, Direction::Forward).unwrap();
    let back = apply_power_transform(&t, &z, Direction::Inverse).unwrap();
    for (a, b) in price.iter().zip(&back) {
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
    }
}

#[test]
fn scaling_round_trip() {
    let (clean, _) = clean_dataset(&topgear(), &CleanThresholds::default()).unwrap();
    let (scaled, params) = robust_scale(&clean, ScaleEstimator::default(), true, true).unwrap();
    let back = unscale(&scaled, &params).unwrap();
    for name in clean.names() {
        for (a, b) in clean.numeric(name).unwrap().iter().zip(back.numeric(name).unwrap()) {
            match (a, b) {
                (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0)),
                (None, None) => {}
                _ => panic!("missing mask changed"),
            }
        }
    }
}
