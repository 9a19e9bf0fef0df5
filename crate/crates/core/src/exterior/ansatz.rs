//! The G2 3-form and 4-form of the coframe ansatz, their torsion, and the
//! closed-form coefficient displays the engine is checked against.

use super::form::Form;
use super::hodge::{hodge_star, AnsatzParams};
use super::monomial::{BasePart, BasisMonomial};
use crate::scalar::Scalar;

fn mono(idx: &[usize], base: BasePart) -> BasisMonomial {
    BasisMonomial::eta(idx, base)
}

/// `η₁₂₃`.
pub fn eta123() -> BasisMonomial {
    mono(&[1, 2, 3], BasePart::Unit)
}

/// `ηᵢ∧ωᵢ`.
pub fn eta_omega(i: usize) -> BasisMonomial {
    mono(&[i], BasePart::omega(i))
}

/// `vol_N`.
pub fn vol_n() -> BasisMonomial {
    mono(&[], BasePart::VolN)
}

/// The 4-form monomials `η₂₃ω₁`, `η₃₁ω₂`, `η₁₂ω₃` as signed canonical
/// monomials: `η₃∧η₁∧ω₂ = −η₁∧η₃∧ω₂`.
pub fn cyclic_three_omega(i: usize) -> (BasisMonomial, i64) {
    match i {
        1 => (mono(&[2, 3], BasePart::Omega1), 1),
        2 => (mono(&[1, 3], BasePart::Omega2), -1),
        3 => (mono(&[1, 2], BasePart::Omega3), 1),
        _ => panic!("index {i} out of range"),
    }
}

/// Coefficient of `ηⱼ∧ηₖ∧ωᵢ` (cyclic order) in `x`.
pub fn cyclic_coefficient<S: Scalar>(x: &Form<S>, i: usize) -> S {
    let (m, sign) = cyclic_three_omega(i);
    x.coefficient(&m) * S::from_int(sign)
}

fn push_cyclic<S: Scalar>(f: &mut Form<S>, i: usize, coeff: S) {
    let (m, sign) = cyclic_three_omega(i);
    f.add_term(m, coeff * S::from_int(sign));
}

/// `φ = ε a₁a₂a₃ η₁₂₃ − c²(a₁η₁∧ω₁ + a₂η₂∧ω₂ + ε a₃η₃∧ω₃)`.
pub fn build_phi<S: Scalar>(p: &AnsatzParams<S>) -> Form<S> {
    let eps = p.eps();
    let c2 = p.c().clone() * p.c().clone();
    let (a1, a2, a3) = (p.a(1).clone(), p.a(2).clone(), p.a(3).clone());
    let mut f = Form::zero();
    f.add_term(eta123(), eps.clone() * a1.clone() * a2.clone() * a3.clone());
    f.add_term(eta_omega(1), -(c2.clone() * a1));
    f.add_term(eta_omega(2), -(c2.clone() * a2));
    f.add_term(eta_omega(3), -(c2 * eps * a3));
    f
}

/// `ψ = *φ`.
pub fn build_psi<S: Scalar>(p: &AnsatzParams<S>) -> Form<S> {
    hodge_star(&build_phi(p), p)
}

/// The dual 4-form as displayed:
/// `c⁴vol_N − c²(ε a₂a₃ η₂₃ω₁ + ε a₃a₁ η₃₁ω₂ + a₁a₂ η₁₂ω₃)`.
pub fn psi_display<S: Scalar>(p: &AnsatzParams<S>) -> Form<S> {
    let eps = p.eps();
    let c2 = p.c().clone() * p.c().clone();
    let (a1, a2, a3) = (p.a(1).clone(), p.a(2).clone(), p.a(3).clone());
    let mut f = Form::zero();
    f.add_term(vol_n(), c2.clone() * c2.clone());
    push_cyclic(&mut f, 1, -(c2.clone() * eps.clone() * a2.clone() * a3.clone()));
    push_cyclic(&mut f, 2, -(c2.clone() * eps * a3 * a1.clone()));
    push_cyclic(&mut f, 3, -(c2 * a1 * a2));
    f
}

/// Four-term display of `dφ` for the general ansatz.
pub fn d_phi_display<S: Scalar>(p: &AnsatzParams<S>) -> Form<S> {
    let eps = p.eps();
    let c2 = p.c().clone() * p.c().clone();
    let (a1, a2, a3) = (p.a(1).clone(), p.a(2).clone(), p.a(3).clone());
    let two = S::from_int(2);
    let four = S::from_int(4);
    let triple = eps.clone() * a1.clone() * a2.clone() * a3.clone();
    let ea3 = eps * a3.clone();
    let mut f = Form::zero();
    f.add_term(
        vol_n(),
        four * c2.clone() * (a1.clone() + a2.clone() + ea3.clone()),
    );
    let c_a1 = c2.clone() * a1;
    let c_a2 = c2.clone() * a2;
    let c_a3 = c2 * ea3;
    push_cyclic(
        &mut f,
        1,
        -(two.clone() * (triple.clone() - c_a1.clone() + c_a2.clone() + c_a3.clone())),
    );
    push_cyclic(
        &mut f,
        2,
        -(two.clone() * (triple.clone() + c_a1.clone() - c_a2.clone() + c_a3.clone())),
    );
    push_cyclic(&mut f, 3, -(two * (triple + c_a1 + c_a2 - c_a3)));
    f
}

/// Closed-form `τ₀ = (4/(7a²c²))(4a(a²+c²) + εb(2a²−c²))` for the
/// restricted ansatz `a₁ = a₂ = a`, `a₃ = b`.
pub fn tau0_display<S: Scalar>(a: &S, b: &S, c: &S, eps: &S) -> S {
    let a2 = a.clone() * a.clone();
    let c2 = c.clone() * c.clone();
    let n = S::from_int(4) * a.clone() * (a2.clone() + c2.clone())
        + eps.clone() * b.clone() * (S::from_int(2) * a2.clone() - c2.clone());
    S::from_int(4) * n / (S::from_int(7) * a2 * c2)
}

/// Three-term display of `Δψ` for the restricted ansatz, as
/// `(vol_N coefficient, coefficient of η₂₃ω₁ and of η₃₁ω₂, coefficient of η₁₂ω₃)`.
pub fn laplacian_psi_display<S: Scalar>(a: &S, b: &S, c: &S, eps: &S) -> [S; 3] {
    let (a, b, c, e) = (a.clone(), b.clone(), c.clone(), eps.clone());
    let n = |k: i64| S::from_int(k);
    let a2 = a.clone() * a.clone();
    let a3 = a2.clone() * a.clone();
    let b2 = b.clone() * b.clone();
    let c2 = c.clone() * c.clone();
    let vol = n(8)
        * (n(2) * a2.clone() + b2.clone() + n(2) * c2.clone()
            + n(2) * e.clone() * b.clone() * c2.clone() / a.clone()
            - b2.clone() * c2.clone() / a2.clone());
    let mixed = -(n(4)
        * (b2.clone()
            + n(4) * e.clone() * a3.clone() * b.clone() / c2.clone()
            + n(2) * a2.clone() * b2.clone() / c2.clone()
            + n(2) * e.clone() * b.clone() * c2.clone() / a.clone()
            - b2.clone() * c2.clone() / a2.clone()));
    let third = -(n(4)
        * (n(2) * a2.clone() - b2.clone() + n(2) * c2.clone()
            + n(4) * e.clone() * a3 * b.clone() / c2.clone()
            + n(2) * a2.clone() * b2.clone() / c2.clone()
            - n(2) * e * b * c2.clone() / a
            + b2 * c2 / a2));
    [vol, mixed, third]
}

/// Three-term display of `Δφ` for the restricted ansatz, as
/// `(η₁₂₃ coefficient, coefficient of η₁ω₁ and of η₂ω₂, coefficient of η₃ω₃)`.
pub fn laplacian_phi_display<S: Scalar>(a: &S, b: &S, c: &S, eps: &S) -> [S; 3] {
    let (a, b, c, e) = (a.clone(), b.clone(), c.clone(), eps.clone());
    let n = |k: i64| S::from_int(k);
    let a2 = a.clone() * a.clone();
    let a3 = a2.clone() * a.clone();
    let a4 = a2.clone() * a2.clone();
    let b2 = b.clone() * b.clone();
    let c2 = c.clone() * c.clone();
    let top = n(8) * e.clone() * a2.clone() * b.clone() / c2.clone()
        * (n(2) * a2.clone() / c2.clone() + b2.clone() / c2.clone() + n(2)
            + n(2) * e.clone() * b.clone() / a.clone()
            - b2.clone() / a2.clone());
    let first = -(n(4)
        * (e.clone() * b.clone()
            + n(4) * a3.clone() / c2.clone()
            + n(2) * e.clone() * a2.clone() * b.clone() / c2.clone()
            + n(2) * c2.clone() / a.clone()
            - e.clone() * b.clone() * c2.clone() / a2.clone()));
    let third = -(n(4)
        * e.clone()
        * b.clone()
        * (n(2) - b2.clone() / a2.clone() + n(2) * c2.clone() / a2.clone()
            + n(4) * e.clone() * a.clone() * b.clone() / c2.clone()
            + n(2) * b2.clone() / c2.clone()
            - n(2) * e * b.clone() * c2.clone() / a3
            + b2 * c2 / a4));
    [top, first, third]
}

/// Assemble the `Δψ` display into a form.
pub fn laplacian_psi_display_form<S: Scalar>(a: &S, b: &S, c: &S, eps: &S) -> Form<S> {
    let [vol, mixed, third] = laplacian_psi_display(a, b, c, eps);
    let mut f = Form::zero();
    f.add_term(vol_n(), vol);
    push_cyclic(&mut f, 1, mixed.clone());
    push_cyclic(&mut f, 2, mixed);
    push_cyclic(&mut f, 3, third);
    f
}

/// Assemble the `Δφ` display into a form.
pub fn laplacian_phi_display_form<S: Scalar>(a: &S, b: &S, c: &S, eps: &S) -> Form<S> {
    let [top, first, third] = laplacian_phi_display(a, b, c, eps);
    let mut f = Form::zero();
    f.add_term(eta123(), top);
    f.add_term(eta_omega(1), first.clone());
    f.add_term(eta_omega(2), first);
    f.add_term(eta_omega(3), third);
    f
}

/// Torsion of the ansatz G2-structure.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionReport<S> {
    pub d_phi: Form<S>,
    pub d_psi: Form<S>,
    pub tau0: S,
    /// `*τ₃ = dφ − τ₀ψ`.
    pub tau3_star: Form<S>,
}

/// `dφ = τ₀ψ + *τ₃`, with `τ₀` recovered by projection:
/// `dφ∧φ = ⟨dφ,ψ⟩vol = 7τ₀·vol`.
pub fn torsion<S: Scalar>(p: &AnsatzParams<S>) -> TorsionReport<S> {
    let phi = build_phi(p);
    let psi = build_psi(p);
    let d_phi = phi.d();
    let d_psi = psi.d();
    let top = d_phi.wedge(&phi).coefficient(&BasisMonomial::TOP);
    let tau0 = top / (S::from_int(7) * p.volume_coefficient());
    let tau3_star = &d_phi - &psi.scale(&tau0);
    TorsionReport {
        d_phi,
        d_psi,
        tau0,
        tau3_star,
    }
}
