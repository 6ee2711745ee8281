//! Column generation for `R||ΣwjCj`: minimize total weighted completion time on
//! unrelated parallel machines.
//!
//! The restricted master problem is a set-partitioning LP over per-machine
//! schedules (columns). Pricing is done either exactly, with a pseudo-polynomial
//! dynamic program over (job, completion time) states, or approximately, with a
//! transformer-pointer network that proposes a job subset. The hybrid driver only
//! trusts the network for speed: termination always goes through an exact DP pass,
//! so the final LP bound carries the same certificate as pure DP pricing.
//!
//! Module map:
//!
//! * [`instance`] - problem data, generators and the `.inst.json` format
//! * [`schedule`] - SWPT ordering, columns and reduced costs
//! * [`rmp`] - column pool, dense simplex, integer finalization
//! * [`pricing`] - DP pricing, k-best extraction and a brute-force oracle
//! * [`nn`] - inference engine and the NNCG1 weight format
//! * [`cg`] - the column generation loop, initial columns, datasets, logs
//! * [`report`] - paired-run comparison tables

pub mod cg;
pub mod instance;
pub mod nn;
pub mod pricing;
pub mod report;
pub mod rmp;
pub mod rng;
pub mod schedule;

pub use instance::{DistLabel, Instance, Job};
pub use schedule::{Column, DualSolution};
