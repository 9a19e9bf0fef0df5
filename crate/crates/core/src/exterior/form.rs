use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use super::monomial::{BasePart, BasisMonomial, EtaSet};
use crate::scalar::Scalar;

/// Element of the coframe exterior algebra, stored sparsely: zero
/// coefficients are never kept.
#[derive(Clone, PartialEq)]
pub struct Form<S> {
    terms: BTreeMap<BasisMonomial, S>,
}

impl<S: Scalar> Default for Form<S> {
    fn default() -> Self {
        Form::zero()
    }
}

impl<S: Scalar> Form<S> {
    pub fn zero() -> Self {
        Form {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(m: BasisMonomial, coeff: S) -> Self {
        let mut f = Form::zero();
        f.add_term(m, coeff);
        f
    }

    pub fn basis(m: BasisMonomial) -> Self {
        Form::monomial(m, S::one())
    }

    pub fn unit() -> Self {
        Form::basis(BasisMonomial::UNIT)
    }

    pub fn eta(i: usize) -> Self {
        Form::basis(BasisMonomial::eta(&[i], BasePart::Unit))
    }

    pub fn omega(i: usize) -> Self {
        Form::basis(BasisMonomial::new(EtaSet::EMPTY, BasePart::omega(i)))
    }

    pub fn vol_n() -> Self {
        Form::basis(BasisMonomial::new(EtaSet::EMPTY, BasePart::VolN))
    }

    pub fn from_terms<I: IntoIterator<Item = (BasisMonomial, S)>>(terms: I) -> Self {
        let mut f = Form::zero();
        for (m, c) in terms {
            f.add_term(m, c);
        }
        f
    }

    /// Adds `coeff·m`, dropping the entry if it cancels.
    pub fn add_term(&mut self, m: BasisMonomial, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old + coeff;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, coeff);
            }
        }
    }

    pub fn coefficient(&self, m: &BasisMonomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisMonomial, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The degree-`k` part.
    pub fn homogeneous(&self, k: usize) -> Self {
        Form {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Degrees present, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut ds: Vec<usize> = self.terms.keys().map(|m| m.degree()).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    pub fn scale(&self, s: &S) -> Self {
        Form::from_terms(self.terms.iter().map(|(m, c)| (*m, c.clone() * s.clone())))
    }

    /// Coefficient-wise map into another scalar type.
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Form<T> {
        Form::from_terms(self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    pub fn to_f64(&self) -> Form<f64> {
        self.map(|c| c.to_f64_lossy())
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64_lossy().abs())
            .fold(0.0, f64::max)
    }

    pub fn wedge(&self, other: &Form<S>) -> Form<S> {
        let mut out = Form::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((m, sign)) = m1.mul(*m2) {
                    out.add_term(m, c1.clone() * c2.clone() * S::from_int(sign));
                }
            }
        }
        out
    }

    /// Exterior derivative from the structure equations
    /// `dηᵢ = −2ηⱼ∧ηₖ − 2ωᵢ`, `dωᵢ = −2ηⱼ∧ωₖ + 2ηₖ∧ωⱼ`, `d vol_N = 0`.
    pub fn d(&self) -> Form<S> {
        let mut out = Form::zero();
        for (m, c) in &self.terms {
            for (dm, k) in d_monomial(*m).terms() {
                out.add_term(*dm, c.clone() * S::from_int(*k));
            }
        }
        out
    }
}

impl<S: Scalar> Add for &Form<S> {
    type Output = Form<S>;
    fn add(self, rhs: &Form<S>) -> Form<S> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<S: Scalar> Add for Form<S> {
    type Output = Form<S>;
    fn add(self, rhs: Form<S>) -> Form<S> {
        &self + &rhs
    }
}

impl<S: Scalar> Neg for &Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        Form::from_terms(self.terms.iter().map(|(m, c)| (*m, -c.clone())))
    }
}

impl<S: Scalar> Neg for Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        -&self
    }
}

impl<S: Scalar> Sub for &Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: &Form<S>) -> Form<S> {
        self + &(-rhs)
    }
}

impl<S: Scalar> Sub for Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: Form<S>) -> Form<S> {
        &self - &rhs
    }
}

impl<S: Scalar> Mul<S> for Form<S> {
    type Output = Form<S>;
    fn mul(self, rhs: S) -> Form<S> {
        self.scale(&rhs)
    }
}

impl<S: Scalar + fmt::Display> fmt::Display for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("({c})*{m}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<S: fmt::Debug> fmt::Debug for Form<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.terms.iter().map(|(m, c)| (m.to_string(), c)))
            .finish()
    }
}

fn cyclic(i: usize) -> (usize, usize) {
    match i {
        1 => (2, 3),
        2 => (3, 1),
        3 => (1, 2),
        _ => unreachable!(),
    }
}

fn d_eta(i: usize) -> Form<i64> {
    let (j, k) = cyclic(i);
    Form::<i64>::eta(j).wedge(&Form::eta(k)).scale(&-2) - Form::omega(i).scale(&2)
}

fn d_omega(i: usize) -> Form<i64> {
    let (j, k) = cyclic(i);
    Form::<i64>::eta(j).wedge(&Form::omega(k)).scale(&-2)
        + Form::<i64>::eta(k).wedge(&Form::omega(j)).scale(&2)
}

fn compute_d(m: BasisMonomial) -> Form<i64> {
    let idx: Vec<usize> = m.eta.indices().collect();
    let base = Form::<i64>::basis(BasisMonomial::new(EtaSet::EMPTY, m.base));
    let mut out = Form::zero();
    for (p, &i) in idx.iter().enumerate() {
        let left = Form::<i64>::basis(BasisMonomial::eta(&idx[..p], BasePart::Unit));
        let right = Form::<i64>::basis(BasisMonomial::eta(&idx[p + 1..], BasePart::Unit));
        let term = left.wedge(&d_eta(i)).wedge(&right).wedge(&base);
        let sign = if p % 2 == 0 { 1 } else { -1 };
        out = out + term.scale(&sign);
    }
    if let Some(i) = m.base.omega_index() {
        let eta = Form::<i64>::basis(BasisMonomial::new(m.eta, BasePart::Unit));
        let sign = if idx.len().is_multiple_of(2) { 1 } else { -1 };
        out = out + eta.wedge(&d_omega(i)).scale(&sign);
    }
    out
}

fn monomial_index(m: BasisMonomial) -> usize {
    let base = BasePart::ALL.iter().position(|b| *b == m.base).unwrap();
    m.eta.bits() as usize * 5 + base
}

/// `d` of a single basis monomial, integer coefficients.
pub fn d_monomial(m: BasisMonomial) -> &'static Form<i64> {
    static TABLE: OnceLock<Vec<Form<i64>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut all: Vec<BasisMonomial> = BasisMonomial::all().collect();
        all.sort_by_key(|m| monomial_index(*m));
        all.into_iter().map(compute_d).collect()
    });
    &table[monomial_index(m)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(idx: &[usize], base: BasePart) -> BasisMonomial {
        BasisMonomial::eta(idx, base)
    }

    #[test]
    fn omega_normalization() {
        let w1 = Form::<i64>::omega(1);
        let w2 = Form::<i64>::omega(2);
        assert_eq!(w1.wedge(&w1), Form::vol_n().scale(&2));
        assert!(w1.wedge(&w2).is_zero());
        let e1 = Form::<i64>::eta(1);
        assert!(e1.wedge(&e1).is_zero());
        assert!(w1.wedge(&Form::vol_n()).is_zero());
        assert!(Form::<i64>::vol_n().wedge(&Form::vol_n()).is_zero());
    }

    #[test]
    fn structure_equations() {
        let d1 = Form::<i64>::eta(1).d();
        let expected = Form::from_terms([(m(&[2, 3], BasePart::Unit), -2), (m(&[], BasePart::Omega1), -2)]);
        assert_eq!(d1, expected);
        let dw1 = Form::<i64>::omega(1).d();
        let expected = Form::from_terms([(m(&[2], BasePart::Omega3), -2), (m(&[3], BasePart::Omega2), 2)]);
        assert_eq!(dw1, expected);
        // dη₂ = −2η₃∧η₁ − 2ω₂ = 2η₁∧η₃ − 2ω₂
        let d2 = Form::<i64>::eta(2).d();
        let expected = Form::from_terms([(m(&[1, 3], BasePart::Unit), 2), (m(&[], BasePart::Omega2), -2)]);
        assert_eq!(d2, expected);
        assert!(Form::<i64>::vol_n().d().is_zero());
        assert!(Form::<i64>::unit().d().is_zero());
    }

    #[test]
    fn d_squared_vanishes_on_every_monomial() {
        for mono in BasisMonomial::all() {
            let dd = Form::<i64>::basis(mono).d().d();
            assert!(dd.is_zero(), "d∘d ≠ 0 on {mono}: {dd:?}");
        }
    }

    #[test]
    fn graded_commutativity_and_leibniz_all_pairs() {
        for x in BasisMonomial::all() {
            for y in BasisMonomial::all() {
                let fx = Form::<i64>::basis(x);
                let fy = Form::<i64>::basis(y);
                let sign = if (x.degree() * y.degree()) % 2 == 0 { 1 } else { -1 };
                assert_eq!(fx.wedge(&fy), fy.wedge(&fx).scale(&sign), "{x} {y}");
                let lhs = fx.wedge(&fy).d();
                let ksign = if x.degree() % 2 == 0 { 1 } else { -1 };
                let rhs = fx.d().wedge(&fy) + fx.wedge(&fy.d()).scale(&ksign);
                assert_eq!(lhs, rhs, "Leibniz fails on {x}, {y}");
            }
        }
    }

    #[test]
    fn associativity_on_generators() {
        let gens: Vec<Form<i64>> = (1..=3)
            .map(Form::eta)
            .chain((1..=3).map(Form::omega))
            .collect();
        for a in &gens {
            for b in &gens {
                for c in &gens {
                    assert_eq!(a.wedge(b).wedge(c), a.wedge(&b.wedge(c)));
                }
            }
        }
    }

    #[test]
    fn zero_coefficients_not_stored() {
        let mut f = Form::<i64>::eta(1);
        f.add_term(m(&[1], BasePart::Unit), -1);
        assert!(f.is_zero());
        assert_eq!(f.len(), 0);
        let g = Form::<i64>::eta(2) - Form::eta(2);
        assert_eq!(g.len(), 0);
    }

    #[test]
    fn homogeneous_parts() {
        let f = Form::<i64>::eta(1) + Form::omega(2) + Form::vol_n();
        assert_eq!(f.homogeneous(2), Form::omega(2));
        assert_eq!(f.degrees(), vec![1, 2, 4]);
    }
}
