mod common;

use robstat::pca::{fit_robpca, fit_spherical_pca, pca_outlier_map_data, Components, PcaClass, RobpcaOptions};
use robstat::preprocessing::{robust_scale, ScaleEstimator};

fn topgear_scaled() -> (nalgebra::DMatrix<f64>, Vec<usize>) {
    let f = common::topgear_transformed().drop_missing_rows().drop_columns(&["Price", "Verdict"]).unwrap();
    let (scaled, _) = robust_scale(&f, ScaleEstimator::Umcd { alpha: 0.5 }, false, true).unwrap();
    (common::to_matrix(&scaled), f.row_ids().to_vec())
}

#[test]
fn topgear_robpca_two_components() {
    let (x, ids) = topgear_scaled();
    for seed in 0..3 {
        let fit = fit_robpca(&x, &RobpcaOptions { seed, ..Default::default() }).unwrap();
        assert_eq!(fit.n_components(), 2);
        let r = &fit.explained_variance_ratio;
        assert!((r[0] - 0.7566).abs() < 0.03 && (r[1] - 0.8725).abs() < 0.03, "{r:?}");
        let map = pca_outlier_map_data(&fit, &x).unwrap();
        let bad: Vec<usize> = (0..ids.len()).filter(|&i| map.classes[i] == PcaClass::BadLeverage).map(|i| ids[i]).collect();
        assert!(bad.contains(&41) && bad.contains(&49), "{bad:?}");
    }
}

#[test]
fn topgear_spherical_pca_orthonormal() {
    let (x, _) = topgear_scaled();
    let fit = fit_spherical_pca(&x, Components::Fixed(3)).unwrap();
    let g = fit.loadings.transpose() * &fit.loadings;
    assert!((g - nalgebra::DMatrix::identity(3, 3)).amax() < 1e-10);
    assert!(fit.eigenvalues[0] >= fit.eigenvalues[1] && fit.eigenvalues[1] >= fit.eigenvalues[2]);
    let r = &fit.explained_variance_ratio;
    assert!(r.windows(2).all(|w| w[0] <= w[1]) && r[2] <= 1.0);
}
