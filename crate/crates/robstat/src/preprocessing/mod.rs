//! Cleaning, robust power transformation and robust scaling of data frames.

mod clean;
mod power;
mod scale;

pub use clean::{clean_dataset, CleanReport, CleanThresholds, DroppedColumns, DroppedRows};
pub use power::{
    apply_power_transform, boxcox, boxcox_inverse, fit_power_transform, yeo_johnson, yeo_johnson_inverse, Direction,
    PowerMethod, PowerTransform,
};
pub use scale::{robust_scale, unscale, ColumnScaling, ScaleEstimator};
