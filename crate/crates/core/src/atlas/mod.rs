//! Root counting, localisation, stability verdicts and neutral-curve tracing.

pub mod contour;
pub mod roots;
pub mod verdict;
pub mod winding;

pub use contour::Contour;
pub use winding::{winding, Cached, Evaluator, FnEvaluator, RefineControl, Sample, WindingReport};
pub use roots::{locate_roots, newton_polish, unstable_roots, LocateControl, Root, RootReport};
pub use verdict::{boundary_point, loglog_fit, trace_boundary, verdict, verdict_for, BoundaryOutcome, BoundaryPoint, TraceControl, Verdict, VerdictControl};
