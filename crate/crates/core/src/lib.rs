//! Core library for flexgrid: clustering of EV charging behaviour and a
//! convex-relaxed AC optimal power flow that schedules EV demand turn-up
//! against wind curtailment on radial distribution feeders.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`ev_data`] parses (or synthesises) charging sessions and turns them
//!    into per-user average daily profiles on a 1,440-minute grid.
//! 2. [`clustering`] groups users by behaviour with k-means, either on the
//!    full minute profile or on a 2-D polar feature, and derives the
//!    per-cluster statistics the optimisation consumes.
//! 3. [`grid_model`], [`opf_core`] and [`scenario`] load a radial network,
//!    build per-timestep second-order-cone OPF instances with per-cluster
//!    flexibility bounds and social-impact costs, and account curtailment
//!    over week-long baseline/flexibility runs.

pub mod clustering;
pub mod ev_data;
pub mod grid_model;
pub mod opf_core;
pub mod rng;
pub mod scenario;

pub const MINUTES_PER_DAY: usize = 1440;
