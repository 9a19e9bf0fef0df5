//! Exact exterior algebra over the 3-Sasakian coframe model.
//!
//! The model algebra is spanned by the 40 monomials `η_S ∧ β`, where `S ⊆ {1,2,3}`
//! and `β ∈ {1, ω₁, ω₂, ω₃, vol_N}`, with `ωᵢ∧ωⱼ = 2δᵢⱼ vol_N`. The
//! differential is fixed by the structure equations of the fibration, and the
//! Hodge star by the ansatz metric.

mod ansatz;
mod form;
mod hodge;
mod monomial;

pub use ansatz::{
    build_phi, build_psi, cyclic_coefficient, cyclic_three_omega, d_phi_display, eta123,
    eta_omega, laplacian_phi_display, laplacian_phi_display_form, laplacian_psi_display,
    laplacian_psi_display_form, psi_display, tau0_display, torsion, vol_n, TorsionReport,
};
pub use form::{d_monomial, Form};
pub use hodge::{codifferential, hodge_star, inner, laplacian, AnsatzParams};
pub use monomial::{BasePart, BasisMonomial, EtaSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExteriorError {
    #[error("scale {name} must be positive, got {value}")]
    NonPositiveScale { name: &'static str, value: f64 },
}
