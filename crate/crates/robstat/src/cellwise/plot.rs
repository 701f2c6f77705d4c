use serde::{Deserialize, Serialize};

use crate::cellwise::CellMcdFit;
use crate::error::{Result, RobError};
use crate::kernel::distr::chi2_quantile_f;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellMcdPlotType {
    Indexplot,
    ResidualsVsVariable,
    ResidualsVsPredictions,
    VariableVsPredictions,
    Bivariate,
}

impl CellMcdPlotType {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellMcdPlotType::Indexplot => "indexplot",
            CellMcdPlotType::ResidualsVsVariable => "residuals_vs_variable",
            CellMcdPlotType::ResidualsVsPredictions => "residuals_vs_predictions",
            CellMcdPlotType::VariableVsPredictions => "variable_vs_predictions",
            CellMcdPlotType::Bivariate => "bivariate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            CellMcdPlotType::Indexplot,
            CellMcdPlotType::ResidualsVsVariable,
            CellMcdPlotType::ResidualsVsPredictions,
            CellMcdPlotType::VariableVsPredictions,
            CellMcdPlotType::Bivariate,
        ]
        .into_iter()
        .find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    /// Mahalanobis radius of the contour.
    pub radius: f64,
    pub points: Vec<[f64; 2]>,
}

/// Points of one diagnostic plot. Rows with an undefined coordinate are left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMcdPlot {
    pub plottype: CellMcdPlotType,
    pub variable: usize,
    pub second_variable: Option<usize>,
    pub x_label: String,
    pub y_label: String,
    /// Row positions of the plotted points.
    pub rows: Vec<usize>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub h_lines: Vec<f64>,
    pub v_lines: Vec<f64>,
    /// Draw the identity line.
    pub diagonal: bool,
    pub ellipse: Option<Ellipse>,
    /// Row positions of the points beyond the annotation quantile.
    pub annotations: Vec<usize>,
}

const ELLIPSE_POINTS: usize = 200;

pub fn cellmcd_plot_data(
    fit: &CellMcdFit,
    plottype: CellMcdPlotType,
    variable: usize,
    second_variable: Option<usize>,
    annotation_quantile: f64,
) -> Result<CellMcdPlot> {
    let (n, p) = fit.data.shape();
    if variable >= p || second_variable.is_some_and(|k| k >= p) {
        return Err(RobError::InvalidArgument(format!("variable index out of range for {p} columns")));
    }
    if !(annotation_quantile > 0.0 && annotation_quantile < 1.0) {
        return Err(RobError::InvalidArgument(format!("annotation_quantile must lie in (0, 1), got {annotation_quantile}")));
    }
    let j = variable;
    let resid = |i: usize| fit.std_residuals[(i, j)];
    let value = |i: usize| fit.data[(i, j)];
    let pred = |i: usize| fit.predictions[(i, j)];
    let index = |i: usize| (i + 1) as f64;
    let r_ann = chi2_quantile_f(annotation_quantile, 1.0).sqrt();
    let lines = vec![-fit.cutoff, fit.cutoff];
    let mut plot = CellMcdPlot {
        plottype,
        variable,
        second_variable,
        x_label: String::new(),
        y_label: String::new(),
        rows: vec![],
        x: vec![],
        y: vec![],
        h_lines: vec![],
        v_lines: vec![],
        diagonal: false,
        ellipse: None,
        annotations: vec![],
    };
    let (fx, fy): (&dyn Fn(usize) -> f64, &dyn Fn(usize) -> f64) = match plottype {
        CellMcdPlotType::Indexplot => {
            plot.x_label = "index".into();
            plot.y_label = "standardized residual".into();
            plot.h_lines = lines;
            (&index, &resid)
        }
        CellMcdPlotType::ResidualsVsVariable => {
            plot.x_label = "value".into();
            plot.y_label = "standardized residual".into();
            plot.h_lines = lines;
            (&value, &resid)
        }
        CellMcdPlotType::ResidualsVsPredictions => {
            plot.x_label = "prediction".into();
            plot.y_label = "standardized residual".into();
            plot.h_lines = lines;
            (&pred, &resid)
        }
        CellMcdPlotType::VariableVsPredictions => {
            plot.x_label = "prediction".into();
            plot.y_label = "value".into();
            plot.diagonal = true;
            (&pred, &value)
        }
        CellMcdPlotType::Bivariate => {
            let k = second_variable
                .ok_or_else(|| RobError::InvalidArgument("bivariate plot needs a second variable".into()))?;
            return Ok(bivariate(fit, plot, j, k, annotation_quantile));
        }
    };
    for i in 0..n {
        let (a, b) = (fx(i), fy(i));
        if a.is_finite() && b.is_finite() {
            plot.rows.push(i);
            plot.x.push(a);
            plot.y.push(b);
            if resid(i).abs() > r_ann {
                plot.annotations.push(i);
            }
        }
    }
    Ok(plot)
}

fn bivariate(fit: &CellMcdFit, mut plot: CellMcdPlot, j: usize, k: usize, quantile: f64) -> CellMcdPlot {
    plot.x_label = format!("variable {j}");
    plot.y_label = format!("variable {k}");
    let c = [fit.location[j], fit.location[k]];
    let (a, b, d) = (fit.scatter[(j, j)], fit.scatter[(j, k)], fit.scatter[(k, k)]);
    // lower Cholesky factor of the 2 x 2 block
    let l11 = a.sqrt();
    let l21 = b / l11;
    let l22 = (d - l21 * l21).max(0.0).sqrt();
    let det = a * d - b * b;
    let radius = chi2_quantile_f(fit.options.cutoff_prob, 2.0).sqrt();
    let points = (0..=ELLIPSE_POINTS)
        .map(|t| {
            let th = 2.0 * std::f64::consts::PI * t as f64 / ELLIPSE_POINTS as f64;
            let (u, v) = (radius * th.cos(), radius * th.sin());
            [c[0] + l11 * u, c[1] + l21 * u + l22 * v]
        })
        .collect();
    plot.ellipse = Some(Ellipse { center: c, radius, points });
    let limit = chi2_quantile_f(quantile, 2.0);
    for i in 0..fit.data.nrows() {
        let (x, y) = (fit.data[(i, j)], fit.data[(i, k)]);
        if x.is_finite() && y.is_finite() {
            plot.rows.push(i);
            plot.x.push(x);
            plot.y.push(y);
            let (dx, dy) = (x - c[0], y - c[1]);
            let md2 = (d * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
            if md2 > limit {
                plot.annotations.push(i);
            }
        }
    }
    plot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellwise::{fit_cellmcd, CellMcdOptions};
    use nalgebra::DMatrix;

    fn fit() -> CellMcdFit {
        let x = DMatrix::from_fn(60, 2, |i, j| ((i * (3 + j)) as f64 * 0.77).sin() + 0.1 * j as f64);
        fit_cellmcd(&x, &CellMcdOptions::default()).unwrap()
    }

    #[test]
    fn unit_circle_radius() {
        let mut f = fit();
        f.location = nalgebra::DVector::zeros(2);
        f.scatter = DMatrix::identity(2, 2);
        let plot = cellmcd_plot_data(&f, CellMcdPlotType::Bivariate, 0, Some(1), 0.99).unwrap();
        let e = plot.ellipse.unwrap();
        assert!((e.radius - 3.0348542587702925).abs() < 1e-9);
        for pt in &e.points {
            assert!(((pt[0] * pt[0] + pt[1] * pt[1]).sqrt() - e.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn index_axis_and_errors() {
        let f = fit();
        let plot = cellmcd_plot_data(&f, CellMcdPlotType::Indexplot, 1, None, 0.99).unwrap();
        assert_eq!(plot.x.first(), Some(&1.0));
        assert_eq!(plot.x.last(), Some(&60.0));
        assert_eq!(plot.h_lines.len(), 2);
        assert!(cellmcd_plot_data(&f, CellMcdPlotType::Bivariate, 0, None, 0.99).is_err());
        assert!(cellmcd_plot_data(&f, CellMcdPlotType::Indexplot, 2, None, 0.99).is_err());
        assert_eq!(CellMcdPlotType::parse("variable_vs_predictions"), Some(CellMcdPlotType::VariableVsPredictions));
    }
}
