use nalgebra::{DMatrix, DVector};
use robstat::cellwise::{
    cellmap_data, cellmcd_plot_data, ddc_impute, fit_cellmcd, fit_ddc, CellFlags, CellMcdOptions, CellMcdPlotType,
    DdcParams,
};
use robstat::covariance::{
    distance_distance_data, fit_classical, fit_det_mcd, fit_fast_mcd, fit_kendall_tau_cov, fit_ogk, fit_wrapping_cov,
    LocationScatter, McdOptions,
};
use robstat::kernel::median;
use robstat::pca::{fit_robpca, fit_spherical_pca, pca_outlier_map_data, Components, PcaClass, RobpcaOptions};
use robstat::preprocessing::{
    apply_power_transform, clean_dataset, fit_power_transform, robust_scale, CleanThresholds, Direction, PowerMethod,
    ScaleEstimator,
};
use robstat::regression::{
    fit_fast_lts, fit_mm_regression, fit_ols, fit_s_regression, outlier_map_data, LtsOptions, PointClass,
    RegressionFit, SOptions,
};
use robstat::univariate::adjusted_boxplot_fences;
use robstat_data::{catalog, load_dataset, read_csv, Column, ColumnKind, CsvOptions, Frame};
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{num, Outputs};
use crate::render::render_svg;
use crate::{CliError, Outcome};

pub fn dispatch(cli: &Cli, out: &mut Outputs) -> Result<Outcome, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Clean(a) => clean(a, c, out),
        Command::Transform(a) => transform(a, c, out),
        Command::Scale(a) => scale(a, c, out),
        Command::Cov(a) => cov(a, c, out),
        Command::Reg(a) => reg(a, c, out),
        Command::Pca(a) => pca(a, c, out),
        Command::Ddc(a) => ddc(a, c, out),
        Command::Cellmcd(a) => cellmcd(a, c, out),
        Command::Boxplot(a) => boxplot(a, c, out),
        Command::Datasets(a) => datasets(a, out),
        Command::Render(a) => {
            let svg = render_svg(&a.data, a.kind)?;
            let stem = a.data.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
            out.write_text(&format!("{stem}.svg"), &svg)?;
            Ok(Outcome { summary: json!({ "kind": a.kind }), seed_used: false })
        }
    }
}

fn plain(summary: Value) -> Outcome {
    Outcome { summary, seed_used: false }
}

fn read_input(path: &std::path::Path, c: &Common) -> Result<Frame, CliError> {
    let mut opts = CsvOptions::default();
    if !c.na_markers.is_empty() {
        opts.na_markers = c.na_markers.clone();
    }
    read_csv(path, &opts).map_err(|e| CliError::Compute(format!("cannot read {}: {e}", path.display())))
}

/// Requested numeric columns, or every numeric column when none is given.
fn pick_columns(frame: &Frame, requested: &[String]) -> Result<Vec<String>, CliError> {
    if requested.is_empty() {
        return Ok(frame.numeric_names());
    }
    for name in requested {
        let j = frame.column_index(name).map_err(|_| CliError::Usage(format!("unknown column {name:?}")))?;
        if frame.kind(j) != ColumnKind::Numeric {
            return Err(CliError::Usage(format!("column {name:?} is not numeric")));
        }
    }
    Ok(requested.to_vec())
}

/// Complete rows of the given columns as a matrix, with their row ids.
fn complete_matrix(frame: &Frame, names: &[String], out: &mut Outputs) -> Result<(DMatrix<f64>, Vec<usize>), CliError> {
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let sub = frame.select(&refs)?;
    let kept = sub.drop_missing_rows();
    let dropped = sub.n_rows() - kept.n_rows();
    if dropped > 0 {
        out.warn(format!("dropped {dropped} rows with missing values"));
    }
    let rows = kept.numeric_rows();
    let x = DMatrix::from_fn(rows.len(), names.len(), |i, j| rows[i][j]);
    Ok((x, kept.row_ids().to_vec()))
}

fn nan_matrix(frame: &Frame, names: &[String]) -> Result<DMatrix<f64>, CliError> {
    let mut x = DMatrix::from_element(frame.n_rows(), names.len(), f64::NAN);
    for (j, name) in names.iter().enumerate() {
        for (i, v) in frame.numeric(name)?.iter().enumerate() {
            if let Some(v) = v {
                x[(i, j)] = *v;
            }
        }
    }
    Ok(x)
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn svg_if(c: &Common, out: &mut Outputs, csv_name: &str, kind: PlotKind) -> Result<(), CliError> {
    if c.svg {
        let svg = render_svg(&out.path(csv_name), kind)?;
        let stem = csv_name.trim_end_matches(".csv");
        out.write_text(&format!("{stem}.svg"), &svg)?;
    }
    Ok(())
}

fn clean(a: &CleanArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let frame = read_input(&a.input, c)?;
    let th = CleanThresholds { frac_na_row: a.frac_na_row, frac_na_col: a.frac_na_col, min_unique: a.min_unique, ..Default::default() };
    let (cleaned, report) = clean_dataset(&frame, &th)?;
    out.write_frame("cleaned.csv", &cleaned)?;
    Ok(plain(json!({
        "n_rows_in": frame.n_rows(),
        "n_cols_in": frame.n_cols(),
        "n_rows": cleaned.n_rows(),
        "n_cols": cleaned.n_cols(),
        "dropped_columns": report.dropped_columns,
        "dropped_rows": report.dropped_rows,
    })))
}

fn transform(a: &TransformArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let mut frame = read_input(&a.input, c)?;
    let names = pick_columns(&frame, &a.columns)?;
    let method = match a.method {
        TransformMethod::Auto => PowerMethod::Auto,
        TransformMethod::Boxcox => PowerMethod::Boxcox,
        TransformMethod::Yeojohnson => PowerMethod::Yeojohnson,
    };
    let mut fits = Vec::new();
    for name in &names {
        let col = frame.numeric(name)?.to_vec();
        let present: Vec<f64> = col.iter().flatten().copied().collect();
        let t = fit_power_transform(&present, method)?;
        let z = apply_power_transform(&t, &present, Direction::Forward)?;
        let mut it = z.into_iter();
        let new: Vec<Option<f64>> = col.iter().map(|v| v.and_then(|_| it.next())).collect();
        frame.replace_column(name, Column::Numeric(new))?;
        let mut v = serde_json::to_value(t).map_err(|e| CliError::Compute(e.to_string()))?;
        v["column"] = json!(name);
        fits.push(v);
    }
    out.write_frame("transformed.csv", &frame)?;
    Ok(plain(json!({ "transforms": fits })))
}

fn scale(a: &ScaleArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let frame = read_input(&a.input, c)?;
    let est = match a.method {
        ScaleMethod::Umcd => ScaleEstimator::Umcd { alpha: a.alpha },
        ScaleMethod::Onestepm => ScaleEstimator::OnestepM,
        ScaleMethod::Qn => ScaleEstimator::Qn,
        ScaleMethod::Tau => ScaleEstimator::Tau,
        ScaleMethod::Mad => ScaleEstimator::Mad,
    };
    let (scaled, params) = robust_scale(&frame, est, !a.no_center, !a.no_scale)?;
    out.write_frame("scaled.csv", &scaled)?;
    Ok(plain(json!({ "columns": params })))
}

fn fit_cov(a: &CovArgs, c: &Common, x: &DMatrix<f64>) -> Result<LocationScatter<f64>, CliError> {
    Ok(match a.method {
        CovChoice::Fastmcd => fit_fast_mcd(
            x,
            &McdOptions { alpha: a.alpha, seed: c.seed, reweighting: !a.no_reweighting, ..Default::default() },
        )?,
        CovChoice::Detmcd => fit_det_mcd(x, a.alpha, !a.no_reweighting)?,
        CovChoice::Ogk => fit_ogk(x)?,
        CovChoice::Wrapping => fit_wrapping_cov(x, 1.5, 4.0)?,
        CovChoice::Kendall => fit_kendall_tau_cov(x)?,
        CovChoice::Classical => fit_classical(x)?,
    })
}

fn cov(a: &CovArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let frame = read_input(&a.input, c)?;
    let names = pick_columns(&frame, &a.columns)?;
    let (x, ids) = complete_matrix(&frame, &names, out)?;
    let fit = fit_cov(a, c, &x)?;
    let dd = distance_distance_data(&fit, &x)?;
    let rows: Vec<Vec<String>> = (0..ids.len())
        .map(|i| {
            vec![
                ids[i].to_string(),
                num(dd.classical_distances[i]),
                num(dd.robust_distances[i]),
                dd.flags[i].to_string(),
            ]
        })
        .collect();
    out.write_table("ddplot.csv", &["row_id", "md", "rd", "flagged"], &rows)?;
    out.write_json("ddplot.json", &json!({ "kind": "ddplot", "cutoff": dd.cutoff }))?;
    svg_if(c, out, "ddplot.csv", PlotKind::Ddplot)?;
    let flagged: Vec<usize> = ids.iter().zip(&dd.flags).filter(|(_, &f)| f).map(|(&i, _)| i).collect();
    Ok(Outcome {
        summary: json!({
            "method": fit.method,
            "columns": names,
            "n": x.nrows(),
            "location": fit.location.as_slice(),
            "scatter": matrix_rows(&fit.scatter),
            "h": fit.h,
            "alpha": fit.alpha,
            "objective": fit.objective,
            "eigen_floored": fit.eigen_floored,
            "cutoff": dd.cutoff,
            "n_flagged": flagged.len(),
            "flagged_row_ids": flagged,
        }),
        seed_used: matches!(a.method, CovChoice::Fastmcd),
    })
}

fn fit_reg(a: &RegArgs, c: &Common, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<RegressionFit<f64>, CliError> {
    let intercept = !a.no_intercept;
    let s_opts = SOptions { intercept, seed: c.seed, ..Default::default() };
    Ok(match a.method {
        RegChoice::Lts => fit_fast_lts(x, y, &LtsOptions { alpha: a.alpha, intercept, seed: c.seed, ..Default::default() })?,
        RegChoice::S => fit_s_regression(x, y, &s_opts)?,
        RegChoice::Mm => fit_mm_regression(x, y, a.efficiency, &s_opts)?,
        RegChoice::Ols => fit_ols(x, y, intercept)?,
    })
}

fn reg(a: &RegArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let frame = read_input(&a.input, c)?;
    pick_columns(&frame, std::slice::from_ref(&a.response))?;
    let predictors: Vec<String> = if a.columns.is_empty() {
        frame.numeric_names().into_iter().filter(|n| n != &a.response).collect()
    } else {
        pick_columns(&frame, &a.columns)?
    };
    if predictors.is_empty() || predictors.contains(&a.response) {
        return Err(CliError::Usage("predictors must be non-empty and exclude the response".into()));
    }
    let mut all = vec![a.response.clone()];
    all.extend(predictors.iter().cloned());
    let (m, ids) = complete_matrix(&frame, &all, out)?;
    let y = DVector::from_iterator(m.nrows(), m.column(0).iter().copied());
    let x = m.columns(1, predictors.len()).into_owned();
    let fit = fit_reg(a, c, &x, &y)?;
    let mut summary = json!({
        "method": fit.method,
        "response": a.response,
        "predictors": predictors,
        "intercept": fit.intercept,
        "coefficients": fit.coefficients.as_slice(),
        "residual_scale": fit.residual_scale,
        "converged": fit.converged,
        "exact_fit": fit.exact_fit,
        "n": x.nrows(),
    });
    match outlier_map_data(&fit, &x, &y) {
        Ok(map) => {
            let rows: Vec<Vec<String>> = (0..ids.len())
                .map(|i| {
                    vec![
                        ids[i].to_string(),
                        num(map.std_residuals[i]),
                        num(map.x_distances[i]),
                        map.classes[i].as_str().to_string(),
                    ]
                })
                .collect();
            out.write_table("outlier_map.csv", &["row_id", "std_residual", "x_distance", "class"], &rows)?;
            out.write_json(
                "outlier_map.json",
                &json!({ "kind": "outlier_map", "v_threshold": map.v_threshold, "h_threshold": map.h_threshold }),
            )?;
            svg_if(c, out, "outlier_map.csv", PlotKind::OutlierMap)?;
            let ids_of = |k: PointClass| -> Vec<usize> {
                ids.iter().zip(&map.classes).filter(|(_, &cl)| cl == k).map(|(&i, _)| i).collect()
            };
            summary["vertical_outlier_row_ids"] = json!(ids_of(PointClass::Vertical));
            summary["good_leverage_row_ids"] = json!(ids_of(PointClass::GoodLeverage));
            summary["bad_leverage_row_ids"] = json!(ids_of(PointClass::BadLeverage));
        }
        Err(e) => out.warn(format!("no outlier map: {e}")),
    }
    Ok(Outcome { summary, seed_used: !matches!(a.method, RegChoice::Ols) })
}

fn pca(a: &PcaArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let frame = read_input(&a.input, c)?;
    let names = pick_columns(&frame, &a.columns)?;
    let (x, ids) = complete_matrix(&frame, &names, out)?;
    let components = match a.components {
        Some(k) => Components::Fixed(k),
        None => Components::MinExplained(a.explained),
    };
    let fit = match a.method {
        PcaChoice::Robpca => fit_robpca(&x, &RobpcaOptions { components, alpha: a.alpha, seed: c.seed })?,
        PcaChoice::Spherical => fit_spherical_pca(&x, components)?,
    };
    let map = pca_outlier_map_data(&fit, &x)?;
    let rows: Vec<Vec<String>> = (0..ids.len())
        .map(|i| {
            vec![
                ids[i].to_string(),
                num(map.score_distances[i]),
                num(map.orthogonal_distances[i]),
                map.classes[i].as_str().to_string(),
            ]
        })
        .collect();
    out.write_table("pca_map.csv", &["row_id", "sd", "od", "class"], &rows)?;
    out.write_json("pca_map.json", &json!({ "kind": "pca_map", "sd_cutoff": map.sd_cutoff, "od_cutoff": map.od_cutoff }))?;
    svg_if(c, out, "pca_map.csv", PlotKind::PcaMap)?;
    let ids_of = |k: PcaClass| -> Vec<usize> {
        ids.iter().zip(&map.classes).filter(|(_, &cl)| cl == k).map(|(&i, _)| i).collect()
    };
    Ok(Outcome {
        summary: json!({
            "method": fit.method,
            "columns": names,
            "n": x.nrows(),
            "n_components": fit.n_components(),
            "explained_variance_ratio": fit.explained_variance_ratio,
            "eigenvalues": fit.eigenvalues.as_slice(),
            "center": fit.center.as_slice(),
            "loadings": matrix_rows(&fit.loadings),
            "sd_cutoff": fit.sd_cutoff,
            "od_cutoff": fit.od_cutoff,
            "orthogonal_row_ids": ids_of(PcaClass::Orthogonal),
            "good_leverage_row_ids": ids_of(PcaClass::GoodLeverage),
            "bad_leverage_row_ids": ids_of(PcaClass::BadLeverage),
        }),
        seed_used: matches!(a.method, PcaChoice::Robpca),
    })
}

fn write_cells(out: &mut Outputs, c: &Common, flags: &CellFlags, rows: &[usize]) -> Result<(), CliError> {
    let records: Vec<Vec<String>> = flags
        .records()
        .into_iter()
        .map(|r| {
            let o = |v: Option<f64>| v.map_or("NA".to_string(), num);
            vec![
                r.row_id.to_string(),
                r.column,
                o(r.value),
                o(r.prediction),
                o(r.std_residual),
                r.flag.to_string(),
                r.color_bin,
            ]
        })
        .collect();
    out.write_table(
        "cellmap.csv",
        &["row_id", "column", "value", "prediction", "std_residual", "flag", "color_bin"],
        &records,
    )?;
    let grid = cellmap_data(flags, (!rows.is_empty()).then_some(rows), None)?;
    out.write_json(
        "cellmap.json",
        &json!({ "kind": "cellmap", "rows": grid.rows, "columns": grid.columns, "cutoff": flags.cutoff }),
    )?;
    svg_if(c, out, "cellmap.csv", PlotKind::Cellmap)
}

fn flagged_cells(flags: &CellFlags) -> Vec<Value> {
    let mut v = Vec::new();
    for (i, id) in flags.row_ids.iter().enumerate() {
        for (j, name) in flags.columns.iter().enumerate() {
            if flags.flags[i][j] {
                v.push(json!({ "row_id": id, "column": name, "std_residual": flags.std_residuals[i][j] }));
            }
        }
    }
    v
}

fn ddc(a: &DdcArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let mut frame = read_input(&a.input, c)?;
    if !a.columns.is_empty() {
        let names = pick_columns(&frame, &a.columns)?;
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        frame = frame.select(&refs)?;
    }
    let params = DdcParams { cell_cutoff_prob: a.cutoff_prob, corr_lim: a.corr_lim, max_predictors: a.max_predictors };
    let model = fit_ddc(&frame, &params)?;
    write_cells(out, c, &model.flags, &a.rows)?;
    out.write_frame("imputed.csv", &ddc_impute(&model, &frame)?)?;
    let flagged_rows: Vec<usize> =
        model.flags.row_ids.iter().zip(&model.flags.row_flags).filter(|(_, &f)| f).map(|(&i, _)| i).collect();
    Ok(plain(json!({
        "columns": model.columns,
        "location": model.location,
        "scale": model.scale,
        "cutoff": model.cutoff,
        "n_flagged_cells": model.flags.n_flagged(),
        "flagged_cells": flagged_cells(&model.flags),
        "flagged_row_ids": flagged_rows,
    })))
}

fn plot_type(p: PlotChoice) -> CellMcdPlotType {
    match p {
        PlotChoice::Indexplot => CellMcdPlotType::Indexplot,
        PlotChoice::ResidualsVsVariable => CellMcdPlotType::ResidualsVsVariable,
        PlotChoice::ResidualsVsPredictions => CellMcdPlotType::ResidualsVsPredictions,
        PlotChoice::VariableVsPredictions => CellMcdPlotType::VariableVsPredictions,
        PlotChoice::Bivariate => CellMcdPlotType::Bivariate,
    }
}

fn cellmcd(a: &CellmcdArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let frame = read_input(&a.input, c)?;
    let names = pick_columns(&frame, &a.columns)?;
    let index = |name: &str| {
        names.iter().position(|n| n == name).ok_or_else(|| CliError::Usage(format!("unknown analysis column {name:?}")))
    };
    let plot = match (a.plot, &a.variable) {
        (None, None) => None,
        (_, None) => return Err(CliError::Usage("--plot needs --variable".into())),
        (p, Some(v)) => {
            let p = p.unwrap_or(PlotChoice::Indexplot);
            let second = match (&a.second_variable, p) {
                (Some(s), _) => Some(index(s)?),
                (None, PlotChoice::Bivariate) => {
                    return Err(CliError::Usage("the bivariate plot needs --second-variable".into()))
                }
                (None, _) => None,
            };
            Some((plot_type(p), index(v)?, second))
        }
    };
    let x = nan_matrix(&frame, &names)?;
    let opts = CellMcdOptions { alpha: a.alpha, cutoff_prob: a.cutoff_prob, max_iter: a.max_iter, tol: a.tol };
    let fit = fit_cellmcd(&x, &opts)?;
    let ids = frame.row_ids().to_vec();
    let flags = fit.cell_flags(ids.clone(), names.clone())?;
    write_cells(out, c, &flags, &[])?;
    let mut imputed = frame.clone();
    for (j, name) in names.iter().enumerate() {
        let col = (0..x.nrows()).map(|i| Some(fit.imputed[(i, j)])).collect();
        imputed.replace_column(name, Column::Numeric(col))?;
    }
    out.write_frame("imputed.csv", &imputed)?;
    if let Some((pt, j, k)) = plot {
        let data = cellmcd_plot_data(&fit, pt, j, k, a.annotation_quantile)?;
        let rows: Vec<Vec<String>> = (0..data.rows.len())
            .map(|t| {
                let i = data.rows[t];
                vec![ids[i].to_string(), num(data.x[t]), num(data.y[t]), data.annotations.contains(&i).to_string()]
            })
            .collect();
        let label = |k: usize| names[k].clone();
        let (xl, yl) = match pt {
            CellMcdPlotType::Indexplot => ("index".to_string(), format!("{} residual", label(j))),
            CellMcdPlotType::ResidualsVsVariable => (label(j), format!("{} residual", label(j))),
            CellMcdPlotType::ResidualsVsPredictions => (format!("{} prediction", label(j)), format!("{} residual", label(j))),
            CellMcdPlotType::VariableVsPredictions => (format!("{} prediction", label(j)), label(j)),
            CellMcdPlotType::Bivariate => (label(j), label(k.unwrap_or(j))),
        };
        let stem = format!("cellmcd_{}", pt.as_str());
        out.write_table(&format!("{stem}.csv"), &["row_id", "x", "y", "annotated"], &rows)?;
        out.write_json(
            &format!("{stem}.json"),
            &json!({
                "kind": "cellmcd",
                "plottype": pt.as_str(),
                "x_label": xl,
                "y_label": yl,
                "h_lines": data.h_lines,
                "v_lines": data.v_lines,
                "diagonal": data.diagonal,
                "ellipse": data.ellipse.as_ref().map(|e| e.points.clone()),
                "ellipse_radius": data.ellipse.as_ref().map(|e| e.radius),
                "annotated_row_ids": data.annotations.iter().map(|&i| ids[i]).collect::<Vec<_>>(),
            }),
        )?;
        svg_if(c, out, &format!("{stem}.csv"), PlotKind::Cellmcd)?;
    }
    if !fit.converged {
        out.warn(format!("cellwise MCD stopped after {} iterations without converging", opts.max_iter));
    }
    Ok(plain(json!({
        "columns": names,
        "location": fit.location.as_slice(),
        "scatter": matrix_rows(&fit.scatter),
        "h": fit.h,
        "converged": fit.converged,
        "iterations": fit.objective_trace.len(),
        "objective": fit.objective_trace.last(),
        "n_flagged_cells": fit.n_flagged(),
        "flagged_cells": flagged_cells(&flags),
    })))
}

fn boxplot(a: &BoxplotArgs, c: &Common, out: &mut Outputs) -> Result<Outcome, CliError> {
    let frame = read_input(&a.input, c)?;
    let names = pick_columns(&frame, &a.columns)?;
    let mut rows = Vec::new();
    let mut outliers = Vec::new();
    let mut summary = Vec::new();
    for name in &names {
        let (ids, vals): (Vec<usize>, Vec<f64>) = frame
            .row_ids()
            .iter()
            .zip(frame.numeric(name)?)
            .filter_map(|(&id, v)| v.filter(|x| x.is_finite()).map(|x| (id, x)))
            .unzip();
        let f = adjusted_boxplot_fences(&vals)?;
        let med = median(&vals)?;
        let inside = vals.iter().zip(&f.outlier_flags).filter(|(_, &o)| !o).map(|(&v, _)| v);
        let (wl, wh) = inside.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let mut out_ids = Vec::new();
        for ((&id, &v), &o) in ids.iter().zip(&vals).zip(&f.outlier_flags) {
            if o {
                outliers.push(json!({ "column": name, "row_id": id, "value": v }));
                out_ids.push(id);
            }
        }
        rows.push(vec![
            name.clone(),
            vals.len().to_string(),
            num(f.q1),
            num(med),
            num(f.q3),
            num(f.mc),
            num(f.lower),
            num(f.upper),
            num(wl),
            num(wh),
            out_ids.len().to_string(),
        ]);
        summary.push(json!({
            "column": name, "q1": f.q1, "median": med, "q3": f.q3, "medcouple": f.mc,
            "lower_fence": f.lower, "upper_fence": f.upper, "outlier_row_ids": out_ids,
        }));
    }
    out.write_table(
        "boxplot.csv",
        &["column", "n", "q1", "median", "q3", "medcouple", "lower_fence", "upper_fence", "whisker_low", "whisker_high", "n_outliers"],
        &rows,
    )?;
    out.write_json("boxplot.json", &json!({ "kind": "boxplot", "outliers": outliers }))?;
    svg_if(c, out, "boxplot.csv", PlotKind::Boxplot)?;
    Ok(plain(json!({ "columns": summary })))
}

fn datasets(a: &DatasetsArgs, out: &mut Outputs) -> Result<Outcome, CliError> {
    match &a.load {
        None => Ok(plain(json!({ "catalog": catalog() }))),
        Some(name) => {
            let rec = load_dataset(name).map_err(|e| match e {
                robstat_data::DataError::UnknownDataset(_) => CliError::Usage(e.to_string()),
                e => CliError::Compute(e.to_string()),
            })?;
            out.write_frame(&format!("{name}.csv"), &rec.data)?;
            Ok(plain(json!({
                "name": name,
                "n_rows": rec.data.n_rows(),
                "n_cols": rec.data.n_cols(),
                "feature_names": rec.feature_names,
                "description": rec.description,
                "source_path": rec.source_path,
            })))
        }
    }
}
