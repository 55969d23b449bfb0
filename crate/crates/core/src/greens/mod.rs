//! Green's functions: bare box, point-perturbed, and with the sorting
//! interaction, plus the resonance scan and resolvent symmetry checks.

pub mod adjoint;
pub mod container;
pub mod general;
pub mod poles;
pub mod sine_integral;

pub use adjoint::{adjoint_symmetry_check, AdjointReport};
pub use container::{
    g0_box, g0_origin_closed, g_p_box, ContainerGreen, ContainerIntegrals, ContainerSpec, DemonBox, IntegralMode,
};
pub use general::{antisymmetric_part, g_delta, g_p_general, ExchangeParts, GreenFunction, RankTwoGreen};
pub use poles::{demon_pole_scan, PoleReport, PoleRoot, ScanOptions};
pub use sine_integral::{si, si_pair_approx};
