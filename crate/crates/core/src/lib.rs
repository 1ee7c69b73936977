//! Ground states of the Fisher–KPP equation `u_t = Δu + u(1 - u)` on compact
//! metric graphs with Dirichlet pendants and Kirchhoff interior vertices.
//!
//! Flower graphs (one pendant stem plus `N` loops at a single vertex) are
//! solved exactly through period functions of the stationary phase plane;
//! arbitrary graphs go through a lumped-mass discretisation for spectra and
//! time evolution.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod evolve;
pub mod graph;
pub mod groundstate;
pub mod linalg;
pub mod mesh;
pub mod ode;
pub mod period;
pub mod phaseplane;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod spectral;
pub mod suites;

pub use error::{Error, Result};
pub use evolve::{EvolutionTrace, EvolveOptions, Terminal};
pub use graph::{FlowerSpec, MetricGraph, ValidationReport, VertexCondition};
pub use groundstate::{GroundStateSolution, JacobianReport, SolveOptions};
pub use mesh::{EdgeProfile, Field, GraphMesh};
pub use period::{PeriodGradient, PeriodValue};
pub use phaseplane::PhasePoint;
pub use scalar::Scalar;
pub use spectral::{Membership, Region, SpectralMethod, SpectralResult};

pub type MetricGraphF64 = MetricGraph<f64>;
pub type FlowerSpecF64 = FlowerSpec<f64>;
pub type PhasePointF64 = PhasePoint<f64>;
pub type FieldF64 = Field<f64>;
pub type GraphMeshF64 = GraphMesh<f64>;
pub type GroundStateF64 = GroundStateSolution<f64>;
pub type SpectralResultF64 = SpectralResult<f64>;
pub type EvolutionTraceF64 = EvolutionTrace<f64>;
