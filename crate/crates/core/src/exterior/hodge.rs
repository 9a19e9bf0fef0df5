use super::form::Form;
use super::monomial::{BasePart, BasisMonomial};
use super::ExteriorError;
use crate::scalar::Scalar;
use crate::sign::Sign;

/// Scales `(a₁, a₂, a₃, c)` and branch sign ε of the G2 ansatz.
///
/// The induced metric is `a₁²η₁² + a₂²η₂² + a₃²η₃² + c²g_N` with orientation
/// `vol = ε a₁a₂a₃c⁴ η₁∧η₂∧η₃∧vol_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams<S> {
    a: [S; 3],
    c: S,
    epsilon: Sign,
}

impl<S: Scalar> AnsatzParams<S> {
    pub fn new(a1: S, a2: S, a3: S, c: S, epsilon: Sign) -> Result<Self, ExteriorError> {
        for (name, v) in [("a1", &a1), ("a2", &a2), ("a3", &a3), ("c", &c)] {
            // NaN fails this comparison too.
            if !(v.to_f64_lossy() > 0.0) {
                return Err(ExteriorError::NonPositiveScale {
                    name,
                    value: v.to_f64_lossy(),
                });
            }
        }
        Ok(AnsatzParams {
            a: [a1, a2, a3],
            c,
            epsilon,
        })
    }

    /// The flow ansatz `a₁ = a₂ = a`, `a₃ = b`.
    pub fn restricted(a: S, b: S, c: S, epsilon: Sign) -> Result<Self, ExteriorError> {
        Self::new(a.clone(), a, b, c, epsilon)
    }

    pub fn a(&self, i: usize) -> &S {
        &self.a[i - 1]
    }

    pub fn c(&self) -> &S {
        &self.c
    }

    pub fn epsilon(&self) -> Sign {
        self.epsilon
    }

    pub fn eps(&self) -> S {
        S::from_int(self.epsilon.value())
    }

    pub fn is_restricted(&self) -> bool {
        self.a[0] == self.a[1]
    }

    /// `(a, b, c)` when `a₁ = a₂`.
    pub fn restricted_scales(&self) -> Option<(S, S, S)> {
        self.is_restricted()
            .then(|| (self.a[0].clone(), self.a[2].clone(), self.c.clone()))
    }

    /// `ε a₁a₂a₃c⁴`, the coefficient of `η₁∧η₂∧η₃∧vol_N` in `vol`.
    pub fn volume_coefficient(&self) -> S {
        let c2 = self.c.clone() * self.c.clone();
        self.eps() * self.a[0].clone() * self.a[1].clone() * self.a[2].clone() * c2.clone() * c2
    }

    pub fn volume_form(&self) -> Form<S> {
        Form::monomial(BasisMonomial::TOP, self.volume_coefficient())
    }

    /// `⟨m, m⟩` for the orthogonal monomial basis: `|ηᵢ|² = 1/aᵢ²`,
    /// `|ωᵢ|² = 2/c⁴`, `|vol_N|² = 1/c⁸`.
    pub fn norm_squared(&self, m: BasisMonomial) -> S {
        let mut r = S::one();
        for i in m.eta.indices() {
            let ai = self.a(i).clone();
            r = r / (ai.clone() * ai);
        }
        let c2 = self.c.clone() * self.c.clone();
        let c4 = c2.clone() * c2;
        match m.base {
            BasePart::Unit => r,
            BasePart::VolN => r / (c4.clone() * c4),
            _ => r * S::from_int(2) / c4,
        }
    }
}

/// Metric inner product of two forms.
pub fn inner<S: Scalar>(x: &Form<S>, y: &Form<S>, p: &AnsatzParams<S>) -> S {
    x.terms().fold(S::zero(), |acc, (m, cx)| {
        let cy = y.coefficient(m);
        if cy.is_zero() {
            acc
        } else {
            acc + cx.clone() * cy * p.norm_squared(*m)
        }
    })
}

/// Hodge star built monomial by monomial: `*m = (⟨m,m⟩·vol_coeff/λ)·m'`
/// where `m ∧ m' = λ·η₁₂₃∧vol_N`.
pub fn hodge_star<S: Scalar>(x: &Form<S>, p: &AnsatzParams<S>) -> Form<S> {
    let vol = p.volume_coefficient();
    let mut out = Form::zero();
    for (m, coeff) in x.terms() {
        let comp = m.complement();
        let (_, lambda) = m.mul(comp).expect("complement always pairs to the top monomial");
        let factor = p.norm_squared(*m) * vol.clone() / S::from_int(lambda);
        out.add_term(comp, coeff.clone() * factor);
    }
    out
}

/// `d*` acting as `(−1)^k *d*` on the degree-`k` part (dimension 7).
pub fn codifferential<S: Scalar>(x: &Form<S>, p: &AnsatzParams<S>) -> Form<S> {
    let mut out = Form::zero();
    for k in x.degrees() {
        let part = hodge_star(&hodge_star(&x.homogeneous(k), p).d(), p);
        out = if k % 2 == 0 { out + part } else { out - part };
    }
    out
}

/// Hodge Laplacian `Δ = dd* + d*d`.
pub fn laplacian<S: Scalar>(x: &Form<S>, p: &AnsatzParams<S>) -> Form<S> {
    codifferential(x, p).d() + codifferential(&x.d(), p)
}
