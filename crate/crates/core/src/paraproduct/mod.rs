//! Anisotropic dyadic rectangles, convex trees and the four-function forms
//! used to control the twisted paraproduct.

mod cz;
mod dyadic;
mod forms;
mod kernels;
mod model;
mod select;

pub use cz::{fiber_cz, CzInterval, FiberCz};
pub use dyadic::{
    random_convex_tree, tree_leaves, DyadicGeometry, DyadicRectangle, Tree, MIN_SCALE,
};
pub use forms::{
    quad_form, quad_form_with, rect_terms, telescoping_residual, FormKind, FormParams,
    FormQuadrature, RectTerms, TelescopingReport,
};
pub use kernels::{
    fourier_per, gauss_h_per, gauss_per, local_max, theta_cell_weights, theta_kernel_check,
    theta_per,
};
pub use model::model_operator;
pub use select::{tree_select, SelectedTree};
