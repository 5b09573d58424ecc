//! Special functions: the Bessel ratio `f`, Bessel `J_ν` for the radial
//! characteristic function, and the standard normal CDF.

mod bessel_j;
mod normal;
mod ratio;

pub use bessel_j::bessel_j;
pub use normal::{normal_cdf, normal_cdf_integral, normal_pdf, normal_quantile};
pub use ratio::{
    bessel_ratio, bessel_ratio_deriv, g_second_deriv, log_grid, ratio_over_x_deriv,
    verify_lemma_bounds, BoundCheck, BoundReport, RatioEval, LEMMA_SLACK_TOLERANCE,
    MAX_RATIO_ARGUMENT, SERIES_CUTOFF,
};
pub(crate) use ratio::deriv_from_ratio;
