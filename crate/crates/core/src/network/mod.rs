//! Rolling windows, correlation and distance matrices, minimum spanning trees.

mod correlation;
mod dot;
mod moments;
mod mst;
mod schedule;

pub use correlation::{correlation_to_distance, distance_matrix, pearson_matrix, CorrMatrix, DistMatrix};
pub use dot::{parse_dot_edges, to_dot};
pub use moments::{moment_track, track_correlation, CrossCorrelation, MomentRow, MomentTrack, MOMENT_NAMES};
pub use mst::{build_mst, Edge, MstGraph};
pub use schedule::{make_schedule, WindowSchedule};
