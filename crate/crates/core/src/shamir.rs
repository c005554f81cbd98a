//! Polynomial secret sharing with additive share aggregation.
//!
//! A node hides its secret in the constant coefficient of a random
//! polynomial of degree `k` and hands out evaluations at nonzero public
//! points. Evaluations of different polynomials at the same point add up to
//! an evaluation of the sum polynomial, so any `k + 1` point-wise sums
//! covering the same set of contributors interpolate to the sum of their
//! secrets at zero.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::field::{FieldElement, FieldError, FieldModulus};
use crate::node::{NodeId, ParticipantMask};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShamirError {
    /// Degree must satisfy `1 <= k < q - 1`.
    DegreeOutOfRange {
        degree: usize,
        modulus: u64,
    },
    ZeroPoint,
    DuplicatePoint(u64),
    PointMismatch {
        expected: u64,
        found: u64,
    },
    /// A contributor appears in more than one summed share.
    OverlappingContributors(NodeId),
    NoShares,
    InsufficientShares {
        needed: usize,
        available: usize,
    },
    Field(FieldError),
}

impl fmt::Display for ShamirError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShamirError::DegreeOutOfRange { degree, modulus } => {
                write!(
                    f,
                    "degree {degree} outside 1..{} for modulus {modulus}",
                    modulus - 1
                )
            }
            ShamirError::ZeroPoint => f.write_str("public point 0 would reveal the secret"),
            ShamirError::DuplicatePoint(x) => write!(f, "public point {x} used twice"),
            ShamirError::PointMismatch { expected, found } => {
                write!(
                    f,
                    "share at point {found} cannot be summed with point {expected}"
                )
            }
            ShamirError::OverlappingContributors(node) => {
                write!(f, "node {node} contributes to more than one summed share")
            }
            ShamirError::NoShares => f.write_str("no shares supplied"),
            ShamirError::InsufficientShares { needed, available } => write!(
                f,
                "need {needed} consistent shares for reconstruction, only {available} available"
            ),
            ShamirError::Field(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ShamirError {}

impl From<FieldError> for ShamirError {
    fn from(e: FieldError) -> Self {
        ShamirError::Field(e)
    }
}

/// Coefficients `[c_0, .., c_k]`; `c_0` is the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretPolynomial {
    coefficients: Vec<FieldElement>,
}

impl SecretPolynomial {
    /// Samples `c_1..c_k` uniformly, in order, from `rng`.
    pub fn random<R: RngCore + ?Sized>(
        secret: FieldElement,
        degree: usize,
        rng: &mut R,
    ) -> Result<Self, ShamirError> {
        let modulus = secret.modulus();
        check_degree(degree, modulus)?;
        let mut coefficients = Vec::with_capacity(degree + 1);
        coefficients.push(secret);
        coefficients.extend((0..degree).map(|_| modulus.random_element(rng)));
        Ok(SecretPolynomial { coefficients })
    }

    pub fn from_coefficients(coefficients: Vec<FieldElement>) -> Result<Self, ShamirError> {
        let Some(first) = coefficients.first() else {
            return Err(ShamirError::NoShares);
        };
        let modulus = first.modulus();
        check_degree(coefficients.len() - 1, modulus)?;
        for c in &coefficients {
            if c.modulus() != modulus {
                return Err(FieldError::ModulusMismatch {
                    left: modulus.get(),
                    right: c.modulus().get(),
                }
                .into());
            }
        }
        Ok(SecretPolynomial { coefficients })
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn modulus(&self) -> FieldModulus {
        self.coefficients[0].modulus()
    }

    pub fn constant_term(&self) -> FieldElement {
        self.coefficients[0]
    }

    pub fn coefficients(&self) -> &[FieldElement] {
        &self.coefficients
    }

    /// Horner evaluation.
    pub fn evaluate(&self, x: FieldElement) -> Result<FieldElement, ShamirError> {
        let mut acc = self.modulus().zero();
        for &c in self.coefficients.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c)?;
        }
        Ok(acc)
    }

    /// One share per point. Points must be distinct and nonzero.
    pub fn shares(&self, points: &[PublicPoint]) -> Result<Vec<Share>, ShamirError> {
        ensure_distinct(points.iter().map(|p| p.x))?;
        points
            .iter()
            .map(|&point| {
                Ok(Share {
                    point,
                    value: self.evaluate(point.x)?,
                })
            })
            .collect()
    }
}

fn check_degree(degree: usize, modulus: FieldModulus) -> Result<(), ShamirError> {
    if degree == 0 || degree as u64 >= modulus.get() - 1 {
        return Err(ShamirError::DegreeOutOfRange {
            degree,
            modulus: modulus.get(),
        });
    }
    Ok(())
}

fn ensure_distinct(xs: impl Iterator<Item = FieldElement>) -> Result<(), ShamirError> {
    let mut seen = BTreeMap::new();
    for x in xs {
        if x.is_zero() {
            return Err(ShamirError::ZeroPoint);
        }
        if seen.insert(x.value(), ()).is_some() {
            return Err(ShamirError::DuplicatePoint(x.value()));
        }
    }
    Ok(())
}

/// The evaluation point assigned to a node: its id reduced modulo `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PublicPoint {
    pub x: FieldElement,
    pub owner: NodeId,
}

impl PublicPoint {
    pub fn for_node(owner: NodeId, modulus: FieldModulus) -> Result<Self, ShamirError> {
        let x = modulus.element(owner.0 as u64);
        if x.is_zero() {
            return Err(ShamirError::ZeroPoint);
        }
        Ok(PublicPoint { x, owner })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Share {
    pub point: PublicPoint,
    pub value: FieldElement,
}

/// Point-wise sum of shares from the nodes in `mask`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SumShare {
    pub point: PublicPoint,
    pub value: FieldElement,
    pub mask: ParticipantMask,
}

impl SumShare {
    pub fn from_share(sender: NodeId, share: Share) -> Self {
        SumShare {
            point: share.point,
            value: share.value,
            mask: ParticipantMask::single(sender),
        }
    }

    /// Folds in one more contributor's share at the same point.
    pub fn absorb(&mut self, sender: NodeId, share: Share) -> Result<(), ShamirError> {
        if share.point.x != self.point.x {
            return Err(ShamirError::PointMismatch {
                expected: self.point.x.value(),
                found: share.point.x.value(),
            });
        }
        if self.mask.contains(sender) {
            return Err(ShamirError::OverlappingContributors(sender));
        }
        self.value = self.value.checked_add(share.value)?;
        self.mask.insert(sender);
        Ok(())
    }
}

/// Sums shares that all sit at the same point, one per distinct sender.
pub fn sum_shares(contributions: &[(NodeId, Share)]) -> Result<SumShare, ShamirError> {
    let ((first_sender, first), rest) = contributions.split_first().ok_or(ShamirError::NoShares)?;
    let mut sum = SumShare::from_share(*first_sender, *first);
    for &(sender, share) in rest {
        sum.absorb(sender, share)?;
    }
    Ok(sum)
}

/// Anything that is a point on a polynomial.
pub trait Evaluation {
    fn x(&self) -> FieldElement;
    fn y(&self) -> FieldElement;
}

impl Evaluation for Share {
    fn x(&self) -> FieldElement {
        self.point.x
    }
    fn y(&self) -> FieldElement {
        self.value
    }
}

impl Evaluation for SumShare {
    fn x(&self) -> FieldElement {
        self.point.x
    }
    fn y(&self) -> FieldElement {
        self.value
    }
}

impl Evaluation for (FieldElement, FieldElement) {
    fn x(&self) -> FieldElement {
        self.0
    }
    fn y(&self) -> FieldElement {
        self.1
    }
}

impl<E: Evaluation> Evaluation for &E {
    fn x(&self) -> FieldElement {
        (*self).x()
    }
    fn y(&self) -> FieldElement {
        (*self).y()
    }
}

/// Value at zero of the degree-`degree` polynomial through the `degree + 1`
/// evaluations with the smallest points.
pub fn lagrange_interpolate_at_zero<E: Evaluation>(
    evaluations: &[E],
    degree: usize,
) -> Result<FieldElement, ShamirError> {
    let needed = degree + 1;
    if evaluations.len() < needed {
        return Err(ShamirError::InsufficientShares {
            needed,
            available: evaluations.len(),
        });
    }
    ensure_distinct(evaluations.iter().map(|e| e.x()))?;
    let mut chosen: Vec<(FieldElement, FieldElement)> =
        evaluations.iter().map(|e| (e.x(), e.y())).collect();
    chosen.sort_by_key(|(x, _)| x.value());
    chosen.truncate(needed);

    let modulus = chosen[0].0.modulus();
    let mut acc = modulus.zero();
    for (j, &(xj, yj)) in chosen.iter().enumerate() {
        let mut num = modulus.one();
        let mut den = modulus.one();
        for (m, &(xm, _)) in chosen.iter().enumerate() {
            if m != j {
                num = num.checked_mul(xm)?;
                den = den.checked_mul(xm.checked_sub(xj)?)?;
            }
        }
        acc = acc.checked_add(yj.checked_mul(num)?.checked_mul(den.inv()?)?)?;
    }
    Ok(acc)
}

/// Recovers the sum of secrets from point-wise sums.
///
/// Only sums with identical participant masks lie on a common polynomial.
/// Among mask groups holding at least `degree + 1` distinct points, the
/// group with the most participants wins; equal sizes fall back to the
/// group whose lowest points are smallest.
pub fn reconstruct_aggregate(
    sums: &[SumShare],
    degree: usize,
) -> Result<(FieldElement, ParticipantMask), ShamirError> {
    let needed = degree + 1;
    let mut groups: BTreeMap<&ParticipantMask, BTreeMap<u64, &SumShare>> = BTreeMap::new();
    for sum in sums.iter().filter(|s| !s.mask.is_empty()) {
        if sum.point.x.is_zero() {
            return Err(ShamirError::ZeroPoint);
        }
        let group = groups.entry(&sum.mask).or_default();
        if let Some(prev) = group.insert(sum.point.x.value(), sum) {
            if prev.value != sum.value {
                return Err(ShamirError::DuplicatePoint(sum.point.x.value()));
            }
        }
    }

    let lowest =
        |g: &BTreeMap<u64, &SumShare>| -> Vec<u64> { g.keys().take(needed).copied().collect() };
    let best = groups
        .iter()
        .filter(|(_, g)| g.len() >= needed)
        .min_by(|(ma, ga), (mb, gb)| {
            mb.len()
                .cmp(&ma.len())
                .then_with(|| lowest(ga).cmp(&lowest(gb)))
        });

    match best {
        Some((mask, group)) => {
            let chosen: Vec<&SumShare> = group.values().take(needed).copied().collect();
            let value = lagrange_interpolate_at_zero(&chosen, degree)?;
            Ok((value, (*mask).clone()))
        }
        None => Err(ShamirError::InsufficientShares {
            needed,
            available: groups.values().map(BTreeMap::len).max().unwrap_or(0),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn q(m: u64) -> FieldModulus {
        FieldModulus::new(m).unwrap()
    }

    fn poly(m: u64, cs: &[u64]) -> SecretPolynomial {
        SecretPolynomial::from_coefficients(cs.iter().map(|&c| q(m).element(c)).collect()).unwrap()
    }

    fn point(m: u64, id: u32) -> PublicPoint {
        PublicPoint::for_node(NodeId(id), q(m)).unwrap()
    }

    /// Replays a fixed list of words.
    struct Script(Vec<u64>);

    impl RngCore for Script {
        fn next_u32(&mut self) -> u32 {
            self.next_u64() as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0.remove(0)
        }
        fn fill_bytes(&mut self, _: &mut [u8]) {
            unimplemented!()
        }
        fn try_fill_bytes(&mut self, _: &mut [u8]) -> Result<(), rand_core::Error> {
            unimplemented!()
        }
    }

    #[test]
    fn make_polynomial_examples() {
        let p = SecretPolynomial::random(q(17).element(5), 1, &mut Script(vec![3])).unwrap();
        assert_eq!(p, poly(17, &[5, 3]));
        let p = SecretPolynomial::random(q(17).zero(), 1, &mut Script(vec![0])).unwrap();
        assert!(p.coefficients().iter().all(|c| c.is_zero()));
        let p = SecretPolynomial::random(q(7).element(6), 2, &mut Script(vec![1, 2])).unwrap();
        assert_eq!(p, poly(7, &[6, 1, 2]));
        assert_eq!(p.degree(), 2);
        assert_eq!(p.constant_term().value(), 6);
    }

    #[test]
    fn degree_bounds() {
        let s = q(7).element(1);
        let mut rng = Script(vec![0; 8]);
        assert!(matches!(
            SecretPolynomial::random(s, 0, &mut rng),
            Err(ShamirError::DegreeOutOfRange { degree: 0, .. })
        ));
        assert!(matches!(
            SecretPolynomial::random(s, 6, &mut rng),
            Err(ShamirError::DegreeOutOfRange { degree: 6, .. })
        ));
        assert!(SecretPolynomial::random(s, 5, &mut rng).is_ok());
    }

    #[test]
    fn evaluate_examples() {
        let p = poly(17, &[5, 3]);
        assert_eq!(p.evaluate(q(17).element(4)).unwrap().value(), 0);
        assert_eq!(p.evaluate(q(17).zero()).unwrap().value(), 5);
        assert_eq!(
            poly(7, &[6, 1, 2])
                .evaluate(q(7).element(2))
                .unwrap()
                .value(),
            2
        );
        assert!(matches!(
            p.evaluate(q(7).element(1)),
            Err(ShamirError::Field(FieldError::ModulusMismatch { .. }))
        ));
    }

    #[test]
    fn make_shares_examples() {
        let shares = poly(17, &[5, 3])
            .shares(&[point(17, 1), point(17, 2)])
            .unwrap();
        let values: Vec<_> = shares
            .iter()
            .map(|s| (s.point.x.value(), s.value.value()))
            .collect();
        assert_eq!(values, [(1, 8), (2, 11)]);

        let zero = poly(17, &[0, 0])
            .shares(&[point(17, 3), point(17, 9)])
            .unwrap();
        assert!(zero.iter().all(|s| s.value.is_zero()));

        let pts: Vec<_> = (1..=3).map(|i| point(7, i)).collect();
        let shares = poly(7, &[6, 1, 2]).shares(&pts).unwrap();
        let values: Vec<_> = shares
            .iter()
            .map(|s| (s.point.x.value(), s.value.value()))
            .collect();
        assert_eq!(values, [(1, 2), (2, 2), (3, 6)]);
    }

    #[test]
    fn make_shares_rejects_bad_points() {
        let p = poly(17, &[5, 3]);
        assert_eq!(
            p.shares(&[point(17, 1), point(17, 1)]),
            Err(ShamirError::DuplicatePoint(1))
        );
        // Node 17 maps to x = 0 modulo 17.
        assert_eq!(
            PublicPoint::for_node(NodeId(17), q(17)),
            Err(ShamirError::ZeroPoint)
        );
        let zero = PublicPoint {
            x: q(17).zero(),
            owner: NodeId(17),
        };
        assert_eq!(p.shares(&[zero]), Err(ShamirError::ZeroPoint));
    }

    fn share(m: u64, id: u32, v: u64) -> Share {
        Share {
            point: point(m, id),
            value: q(m).element(v),
        }
    }

    #[test]
    fn sum_shares_examples() {
        let (a, b) = (NodeId(1), NodeId(2));
        let s = sum_shares(&[(a, share(17, 1, 8)), (b, share(17, 1, 3))]).unwrap();
        assert_eq!(s.value.value(), 11);
        assert_eq!(s.mask, [a, b].into_iter().collect());

        let single = sum_shares(&[(a, share(17, 1, 8))]).unwrap();
        assert_eq!(single.value.value(), 8);
        assert_eq!(single.mask, ParticipantMask::single(a));

        let s = sum_shares(&[(a, share(17, 2, 9)), (b, share(17, 2, 8))]).unwrap();
        assert_eq!(s.value.value(), 0);
        assert_eq!(s.mask.len(), 2);
    }

    #[test]
    fn sum_shares_errors() {
        let (a, b) = (NodeId(1), NodeId(2));
        assert_eq!(sum_shares(&[]), Err(ShamirError::NoShares));
        assert_eq!(
            sum_shares(&[(a, share(17, 1, 8)), (b, share(17, 2, 3))]),
            Err(ShamirError::PointMismatch {
                expected: 1,
                found: 2
            })
        );
        assert_eq!(
            sum_shares(&[(a, share(17, 1, 8)), (a, share(17, 1, 3))]),
            Err(ShamirError::OverlappingContributors(a))
        );
    }

    #[test]
    fn interpolation_examples() {
        let pairs = |m: u64, vs: &[(u64, u64)]| -> Vec<(FieldElement, FieldElement)> {
            vs.iter()
                .map(|&(x, y)| (q(m).element(x), q(m).element(y)))
                .collect()
        };
        assert_eq!(
            lagrange_interpolate_at_zero(&pairs(17, &[(1, 8), (2, 11)]), 1)
                .unwrap()
                .value(),
            5
        );
        assert_eq!(
            lagrange_interpolate_at_zero(&pairs(7, &[(1, 2), (2, 2), (3, 6)]), 2)
                .unwrap()
                .value(),
            6
        );
        assert_eq!(
            lagrange_interpolate_at_zero(&pairs(17, &[(4, 0), (9, 0)]), 1)
                .unwrap()
                .value(),
            0
        );
    }

    #[test]
    fn interpolation_errors() {
        let e = |x, y| (q(17).element(x), q(17).element(y));
        assert_eq!(
            lagrange_interpolate_at_zero(&[e(1, 8)], 1),
            Err(ShamirError::InsufficientShares {
                needed: 2,
                available: 1
            })
        );
        assert_eq!(
            lagrange_interpolate_at_zero(&[e(1, 8), e(1, 8)], 1),
            Err(ShamirError::DuplicatePoint(1))
        );
        assert_eq!(
            lagrange_interpolate_at_zero(&[e(0, 8), e(1, 8)], 1),
            Err(ShamirError::ZeroPoint)
        );
    }

    #[test]
    fn interpolation_uses_lowest_points() {
        // Points 1 and 2 lie on 5+3x; point 3 is off the line.
        let e = |x, y| (q(17).element(x), q(17).element(y));
        assert_eq!(
            lagrange_interpolate_at_zero(&[e(3, 0), e(2, 11), e(1, 8)], 1)
                .unwrap()
                .value(),
            5
        );
    }

    fn mask(ids: &[u32]) -> ParticipantMask {
        ids.iter().map(|&i| NodeId(i)).collect()
    }

    #[test]
    fn reconstruct_end_to_end_three_nodes() {
        let m = 17;
        let polys = [poly(m, &[4, 1]), poly(m, &[7, 5]), poly(m, &[2, 16])];
        let sums: Vec<SumShare> = (1..=3)
            .map(|j| {
                let contributions: Vec<_> = polys
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let pt = point(m, j);
                        let value = p.evaluate(pt.x).unwrap();
                        (NodeId(i as u32 + 1), Share { point: pt, value })
                    })
                    .collect();
                sum_shares(&contributions).unwrap()
            })
            .collect();
        let (agg, used) = reconstruct_aggregate(&sums, 1).unwrap();
        assert_eq!(agg.value(), (4 + 7 + 2) % m);
        assert_eq!(used, mask(&[1, 2, 3]));
    }

    #[test]
    fn reconstruct_prefers_largest_mask() {
        // {1,2,3} sums lie on 9+2x, the lone {1,2} sum on something else.
        let s = |x: u32, v: u64, ids: &[u32]| SumShare {
            point: point(17, x),
            value: q(17).element(v),
            mask: mask(ids),
        };
        let sums = [s(1, 11, &[1, 2, 3]), s(2, 13, &[1, 2, 3]), s(3, 4, &[1, 2])];
        let (agg, used) = reconstruct_aggregate(&sums, 1).unwrap();
        assert_eq!(agg.value(), 9);
        assert_eq!(used, mask(&[1, 2, 3]));

        // Smaller groups are used when the big one is short.
        let sums = [s(1, 11, &[1, 2, 3]), s(3, 4, &[1, 2]), s(4, 6, &[1, 2])];
        let (agg, used) = reconstruct_aggregate(&sums, 1).unwrap();
        assert_eq!(used, mask(&[1, 2]));
        assert_eq!(agg, lagrange_interpolate_at_zero(&sums[1..], 1).unwrap());
    }

    #[test]
    fn reconstruct_tie_breaks_on_lowest_points() {
        let s = |x: u32, v: u64, ids: &[u32]| SumShare {
            point: point(17, x),
            value: q(17).element(v),
            mask: mask(ids),
        };
        let sums = [
            s(3, 1, &[1, 2]),
            s(4, 2, &[1, 2]),
            s(1, 5, &[2, 3]),
            s(5, 5, &[2, 3]),
        ];
        let (agg, used) = reconstruct_aggregate(&sums, 1).unwrap();
        assert_eq!(used, mask(&[2, 3]));
        assert_eq!(agg.value(), 5);
    }

    #[test]
    fn reconstruct_reports_shortfall() {
        let s = |x: u32, ids: &[u32]| SumShare {
            point: point(17, x),
            value: q(17).element(1),
            mask: mask(ids),
        };
        let sums = [s(1, &[1, 2]), s(2, &[1, 3]), s(3, &[1, 2])];
        assert_eq!(
            reconstruct_aggregate(&sums, 2),
            Err(ShamirError::InsufficientShares {
                needed: 3,
                available: 2
            })
        );
        assert_eq!(
            reconstruct_aggregate(&[], 1),
            Err(ShamirError::InsufficientShares {
                needed: 2,
                available: 0
            })
        );
    }
}
