use std::fmt;

use serde::Serialize;

/// Factor pulled back from the base orbifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BasePart {
    Unit,
    Omega1,
    Omega2,
    Omega3,
    VolN,
}

impl BasePart {
    pub const ALL: [BasePart; 5] = [
        BasePart::Unit,
        BasePart::Omega1,
        BasePart::Omega2,
        BasePart::Omega3,
        BasePart::VolN,
    ];

    pub fn degree(self) -> usize {
        match self {
            BasePart::Unit => 0,
            BasePart::Omega1 | BasePart::Omega2 | BasePart::Omega3 => 2,
            BasePart::VolN => 4,
        }
    }

    /// `omega(i)` for `i` in 1..=3.
    pub fn omega(i: usize) -> BasePart {
        match i {
            1 => BasePart::Omega1,
            2 => BasePart::Omega2,
            3 => BasePart::Omega3,
            _ => panic!("omega index {i} out of range"),
        }
    }

    pub fn omega_index(self) -> Option<usize> {
        match self {
            BasePart::Omega1 => Some(1),
            BasePart::Omega2 => Some(2),
            BasePart::Omega3 => Some(3),
            _ => None,
        }
    }

    /// Product of two base factors: `ωᵢ∧ωⱼ = 2δᵢⱼ vol_N`, anything past degree 4 vanishes.
    pub fn mul(self, other: BasePart) -> Option<(BasePart, i64)> {
        use BasePart::*;
        match (self, other) {
            (Unit, x) | (x, Unit) => Some((x, 1)),
            (x, y) if x == y && x.omega_index().is_some() => Some((VolN, 2)),
            _ => None,
        }
    }

    /// The base factor completing `self` to `vol_N`.
    pub fn complement(self) -> BasePart {
        match self {
            BasePart::Unit => BasePart::VolN,
            BasePart::VolN => BasePart::Unit,
            omega => omega,
        }
    }
}

/// Set of fibre indices `{1,2,3}` stored as a bitmask (bit `i-1` for `ηᵢ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EtaSet(u8);

impl EtaSet {
    pub const EMPTY: EtaSet = EtaSet(0);
    pub const FULL: EtaSet = EtaSet(0b111);

    pub fn from_indices(indices: &[usize]) -> Option<EtaSet> {
        let mut bits = 0u8;
        for &i in indices {
            if !(1..=3).contains(&i) {
                return None;
            }
            let bit = 1 << (i - 1);
            if bits & bit != 0 {
                return None;
            }
            bits |= bit;
        }
        Some(EtaSet(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=3).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    /// Indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        (1..=3).filter(move |&i| self.contains(i))
    }

    pub fn complement(self) -> EtaSet {
        EtaSet(!self.0 & 0b111)
    }

    /// Wedge of the ordered products `η_S ∧ η_T`: the merged set and the sign
    /// of the sorting permutation, or `None` when an index repeats.
    pub fn merge(self, other: EtaSet) -> Option<(EtaSet, i64)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut inversions = 0;
        for i in self.indices() {
            for j in other.indices() {
                if i > j {
                    inversions += 1;
                }
            }
        }
        let sign = if inversions % 2 == 0 { 1 } else { -1 };
        Some((EtaSet(self.0 | other.0), sign))
    }
}

/// One of the 40 basis elements `η_S ∧ β` with `β ∈ {1, ω₁, ω₂, ω₃, vol_N}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BasisMonomial {
    pub eta: EtaSet,
    pub base: BasePart,
}

impl BasisMonomial {
    pub const UNIT: BasisMonomial = BasisMonomial {
        eta: EtaSet::EMPTY,
        base: BasePart::Unit,
    };

    /// `η₁∧η₂∧η₃∧vol_N`.
    pub const TOP: BasisMonomial = BasisMonomial {
        eta: EtaSet::FULL,
        base: BasePart::VolN,
    };

    pub fn new(eta: EtaSet, base: BasePart) -> Self {
        BasisMonomial { eta, base }
    }

    pub fn eta(indices: &[usize], base: BasePart) -> Self {
        let eta = EtaSet::from_indices(indices).expect("distinct indices in 1..=3");
        BasisMonomial { eta, base }
    }

    pub fn degree(self) -> usize {
        self.eta.len() + self.base.degree()
    }

    /// All 40 monomials in canonical order.
    pub fn all() -> impl Iterator<Item = BasisMonomial> {
        (0u8..8).flat_map(|bits| {
            BasePart::ALL
                .into_iter()
                .map(move |base| BasisMonomial::new(EtaSet(bits), base))
        })
    }

    /// Product of two monomials: `(η_S β)(η_T β') = η_S η_T β β'` since base
    /// factors are even.
    pub fn mul(self, other: BasisMonomial) -> Option<(BasisMonomial, i64)> {
        let (eta, s1) = self.eta.merge(other.eta)?;
        let (base, s2) = self.base.mul(other.base)?;
        Some((BasisMonomial::new(eta, base), s1 * s2))
    }

    /// The unique monomial `m'` with `m ∧ m'` a nonzero multiple of [`Self::TOP`].
    pub fn complement(self) -> BasisMonomial {
        BasisMonomial::new(self.eta.complement(), self.base.complement())
    }
}

impl fmt::Display for BasisMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.eta.indices().map(|i| format!("eta{i}")).collect();
        match self.base {
            BasePart::Unit => {}
            BasePart::VolN => parts.push("volN".into()),
            omega => parts.push(format!("omega{}", omega.omega_index().unwrap())),
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("^"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forty_monomials_with_degrees_in_range() {
        let all: Vec<_> = BasisMonomial::all().collect();
        assert_eq!(all.len(), 40);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 40);
        assert!(all.iter().all(|m| m.degree() <= 7));
        assert_eq!(BasisMonomial::TOP.degree(), 7);
    }

    #[test]
    fn merge_signs() {
        let e1 = EtaSet::from_indices(&[1]).unwrap();
        let e2 = EtaSet::from_indices(&[2]).unwrap();
        let e13 = EtaSet::from_indices(&[1, 3]).unwrap();
        assert_eq!(e1.merge(e2), Some((EtaSet::from_indices(&[1, 2]).unwrap(), 1)));
        assert_eq!(e2.merge(e1).unwrap().1, -1);
        assert_eq!(e2.merge(e13).unwrap().1, -1);
        assert_eq!(e1.merge(e13), None);
    }

    #[test]
    fn complement_pairs_to_top() {
        for m in BasisMonomial::all() {
            let (prod, lambda) = m.mul(m.complement()).unwrap();
            assert_eq!(prod, BasisMonomial::TOP);
            assert!(lambda == 1 || lambda == -1 || lambda == 2 || lambda == -2);
        }
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(EtaSet::from_indices(&[1, 1]).is_none());
        assert!(EtaSet::from_indices(&[4]).is_none());
    }
}
