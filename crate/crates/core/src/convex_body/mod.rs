//! Symmetric convex polytopes and the seminorms evaluated on them.

mod body;
mod directions;
mod gauge;
mod hausdorff;
pub(crate) mod planar;
mod seminorm;

pub use body::{ConvexBody, DEFAULT_GENERATOR_LIMIT};
pub use directions::{
    circle_directions, icosphere, icosphere_size, DirectionGrid, DEFAULT_GRID_2D, DEFAULT_GRID_3D,
};
pub use hausdorff::{hausdorff, point_distance};
pub use seminorm::{dual_by_grid, GridDual, GeomMeanDoubleDual, Seminorm};
