//! Accelerated parallel proximal coordinate descent (APPROX) with restarts.
//!
//! The crate solves composite problems `min_x f(x) + psi(x)` with `f`
//! smooth in the coordinate sense and `psi` separable. Restarting APPROX with
//! a well-chosen period yields linear convergence under a local quadratic
//! error bound; the [`restart`] module provides the schedules and the
//! [`rates`] module the theoretical contraction factors.
//!
//! ```
//! use restarted_approx::engine::{Sampler, SamplingConfig, StopRule};
//! use restarted_approx::problems::{CompositeProblem, QuadraticProblem, ZeroColumnPolicy};
//! use restarted_approx::restart::{restart_loop, RestartPolicy, RestartSchedule};
//! use restarted_approx::trace::{NullSink, Tracer};
//!
//! let p = QuadraticProblem::random_unit_diagonal(20, 1e-2, 7).unwrap();
//! let eso = p.eso_vector(1, ZeroColumnPolicy::Reject).unwrap();
//! let mut sampler = Sampler::new(SamplingConfig::serial(20, 1).unwrap());
//! let mut sink = NullSink;
//! let mut tracer = Tracer::new(&mut sink, 20);
//! let stop = StopRule { gap_tol: Some(1e-10), ..Default::default() };
//! let schedule = RestartSchedule::variable(40).unwrap();
//! let out = restart_loop(&p, &eso, &vec![0.0; 20], &schedule, RestartPolicy::DECREASE, &stop,
//!                        &mut sampler, &mut tracer).unwrap();
//! assert!(out.objective < 1e-10);
//! ```

pub mod data;
pub mod engine;
pub mod error;
pub mod problems;
pub mod rates;
pub mod restart;
pub mod sparse;
pub mod theta;
pub mod trace;

pub use error::{Error, Result};
