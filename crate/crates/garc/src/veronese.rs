//! Veronesean constructions of generalised dual arcs.
//!
//! Source space PG(n, q) with coordinates x_0..x_n; target space
//! PG(C(n+d+1, d+1) - 1, q) whose coordinates are indexed by the monomials
//! of degree d+1 in n+1 variables, i.e. by non-decreasing index tuples
//! (i_0 <= .. <= i_d). The coordinate order is lexicographic on those
//! sorted tuples; it is a serialization choice only, every geometric
//! statement is order-independent.
//!
//! The multilinear map theta sends d+1 source vectors to the target vector
//! whose coordinate at a monomial M is the sum over all distinct orderings
//! (i_0, .., i_d) of M of the products x^(0)_{i_0} * .. * x^(d)_{i_d}. The
//! diagonal map zeta takes a single point to plain monomial evaluation,
//! without multiplicities.
//!
//! The dual-arc element of a point x is D(x) = <theta(x, e_{j_1}, ..,
//! e_{j_d})>, spanned over all choices of basis vectors; the arc element
//! A(x) is its perpendicular complement under the standard dot product on
//! the target coordinates. For odd q the same A(x) is the span of the
//! zeta-images of the hyperplane dual to x, which the tests use as an
//! independent oracle.

use std::collections::HashMap;
use std::sync::Arc;

use itertools::Itertools;

use crate::arcs::{DualArcFamily, FamilyKind};
use crate::gf::Field;
use crate::linalg::{enumerate_points, Subspace};
use crate::{exec, Error};

/// A degree-(d+1) monomial in the variables x_0..x_n, stored as the sorted
/// tuple of its variable indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialIndex(Vec<usize>);

impl MonomialIndex {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Exponent of variable `var` in this monomial.
    pub fn exponent_of(&self, var: usize) -> usize {
        self.0.iter().filter(|&&i| i == var).count()
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Fixes the source dimension n, the order d and the field, and carries the
/// monomial index table shared by all maps.
#[derive(Debug, Clone)]
pub struct VeroneseContext {
    field: Arc<Field>,
    n: usize,
    d: usize,
    monomials: Vec<MonomialIndex>,
    index_of: HashMap<Vec<usize>, usize>,
}

impl VeroneseContext {
    pub fn new(field: &Arc<Field>, n: usize, d: usize) -> Result<VeroneseContext, Error> {
        if n < 1 || d < 1 {
            return Err(Error::InvalidParameter(
                "the construction needs n >= 1 and d >= 1".into(),
            ));
        }
        let monomials: Vec<MonomialIndex> = (0..=n)
            .combinations_with_replacement(d + 1)
            .map(MonomialIndex)
            .collect();
        debug_assert_eq!(
            monomials.len() as u64,
            binomial((n + d + 1) as u64, (d + 1) as u64)
        );
        let index_of = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.0.clone(), i))
            .collect();
        Ok(VeroneseContext {
            field: Arc::clone(field),
            n,
            d,
            monomials,
            index_of,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of target coordinates, C(n+d+1, d+1).
    pub fn dim_w(&self) -> usize {
        self.monomials.len()
    }

    /// Projective dimension of the target space.
    pub fn ambient_dim(&self) -> usize {
        self.monomials.len() - 1
    }

    /// The monomials indexing the target coordinates, in coordinate order.
    pub fn monomials(&self) -> &[MonomialIndex] {
        &self.monomials
    }

    /// Coordinate position of the monomial with the given sorted index
    /// tuple.
    pub fn monomial_position(&self, indices: &[usize]) -> Option<usize> {
        self.index_of.get(indices).copied()
    }

    fn check_source_vector(&self, v: &[u32]) -> Result<(), Error> {
        if v.len() != self.n + 1 {
            return Err(Error::BadVectorLength {
                expected: self.n + 1,
                got: v.len(),
            });
        }
        let q = self.field.order();
        if let Some(&c) = v.iter().find(|&&c| c as u64 >= q) {
            return Err(Error::ValueOutOfRange { value: c as u64, q });
        }
        Ok(())
    }

    /// The symmetric multilinear map: takes d+1 source vectors, returns the
    /// target vector whose coordinate at each monomial sums the products
    /// over all distinct orderings of that monomial.
    pub fn theta(&self, vectors: &[&[u32]]) -> Result<Vec<u32>, Error> {
        if vectors.len() != self.d + 1 {
            return Err(Error::InvalidParameter(format!(
                "theta takes {} vectors, got {}",
                self.d + 1,
                vectors.len()
            )));
        }
        for v in vectors {
            self.check_source_vector(v)?;
        }
        let f = &*self.field;
        let mut out = vec![0u32; self.monomials.len()];
        // odometer over all (n+1)^(d+1) index tuples
        let mut tuple = vec![0usize; self.d + 1];
        loop {
            let mut prod = 1u32;
            for (k, &i) in tuple.iter().enumerate() {
                prod = f.mul(prod, vectors[k][i]);
                if prod == 0 {
                    break;
                }
            }
            if prod != 0 {
                let mut sorted = tuple.clone();
                sorted.sort_unstable();
                let pos = self.index_of[&sorted];
                out[pos] = f.add(out[pos], prod);
            }
            // advance
            let mut k = self.d + 1;
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                tuple[k] += 1;
                if tuple[k] <= self.n {
                    break;
                }
                tuple[k] = 0;
            }
        }
    }

    /// The generalised Veronesean map: plain monomial evaluation at a
    /// single point, one coordinate per sorted tuple, no multiplicities.
    /// This is the map whose images over a perpendicular hyperplane cut
    /// out the arc elements.
    pub fn zeta(&self, point: &[u32]) -> Result<Vec<u32>, Error> {
        self.check_source_vector(point)?;
        if point.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        let f = &*self.field;
        Ok(self
            .monomials
            .iter()
            .map(|m| {
                let mut prod = 1u32;
                for &i in m.indices() {
                    prod = f.mul(prod, point[i]);
                }
                prod
            })
            .collect())
    }

    /// The diagonal image theta(x, .., x). It differs from [`Self::zeta`]
    /// by a factor on each coordinate counting the orderings of the tuple,
    /// so for d = 1 the mixed coordinates carry a factor 2 and vanish in
    /// characteristic 2. For d = 1 this is the unique point of the
    /// dual-arc element of x not covered by a second element.
    pub fn diagonal(&self, point: &[u32]) -> Result<Vec<u32>, Error> {
        self.check_source_vector(point)?;
        if point.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        let copies: Vec<&[u32]> = std::iter::repeat(point).take(self.d + 1).collect();
        self.theta(&copies)
    }

    /// Dual-arc element of a source point: the span of theta(x, e_{j_1},
    /// .., e_{j_d}) over all basis tuples. Its projective dimension is
    /// C(n+d, d) - 1.
    pub fn dual_element(&self, point: &[u32]) -> Result<Subspace, Error> {
        self.check_source_vector(point)?;
        if point.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        let unit = |j: usize| {
            let mut v = vec![0u32; self.n + 1];
            v[j] = 1;
            v
        };
        let mut gens: Vec<Vec<u32>> = Vec::new();
        let mut tuple = vec![0usize; self.d];
        loop {
            let basis_vecs: Vec<Vec<u32>> = tuple.iter().map(|&j| unit(j)).collect();
            let mut args: Vec<&[u32]> = Vec::with_capacity(self.d + 1);
            args.push(point);
            for v in &basis_vecs {
                args.push(v);
            }
            gens.push(self.theta(&args)?);
            let mut k = self.d;
            loop {
                if k == 0 {
                    let sub = Subspace::from_rows(&self.field, self.ambient_dim(), &gens)?;
                    let expected = binomial((self.n + self.d) as u64, self.d as u64) as isize - 1;
                    if sub.dim() != expected {
                        return Err(Error::Internal(format!(
                            "dual element of {point:?} has dimension {}, expected {expected}",
                            sub.dim()
                        )));
                    }
                    return Ok(sub);
                }
                k -= 1;
                tuple[k] += 1;
                if tuple[k] <= self.n {
                    break;
                }
                tuple[k] = 0;
            }
        }
    }

    /// Arc element of a source point: the perpendicular complement of the
    /// dual-arc element under the standard dot product.
    pub fn arc_element(&self, point: &[u32]) -> Result<Subspace, Error> {
        let dual = self.dual_element(point)?;
        let arc = dual.perp();
        let expected = self.arc_params()[1];
        if arc.dim() != expected {
            return Err(Error::Internal(format!(
                "arc element of {point:?} has dimension {}, expected {expected}",
                arc.dim()
            )));
        }
        Ok(arc)
    }

    /// Intersection-dimension parameters (d_0, .., d_{d+1}) of the dual
    /// arc: d_i = C(n+d+1-i, d+1-i) - 1.
    pub fn dual_arc_params(&self) -> Vec<isize> {
        (0..=self.d + 1)
            .map(|i| {
                binomial(
                    (self.n + self.d + 1 - i) as u64,
                    (self.d + 1 - i) as u64,
                ) as isize
                    - 1
            })
            .collect()
    }

    /// Span-dimension parameters (N, n_1, .., n_{d+1}) of the arc:
    /// n_i = C(n+d+1, d+1) - C(n+d+1-i, d+1-i) - 1 for i >= 1.
    pub fn arc_params(&self) -> Vec<isize> {
        let total = self.dim_w() as isize;
        let mut params = vec![total - 1];
        params.extend((1..=self.d + 1).map(|i| {
            total
                - binomial(
                    (self.n + self.d + 1 - i) as u64,
                    (self.d + 1 - i) as u64,
                ) as isize
                - 1
        }));
        params
    }

    /// The full dual arc: one element per point of PG(n, q), in the
    /// lexicographic point order of [`enumerate_points`].
    pub fn build_dual_arc(&self) -> Result<DualArcFamily, Error> {
        let points = enumerate_points(&self.field, self.n);
        let elements: Vec<Subspace> = exec::map(&points, |p| self.dual_element(p))
            .into_iter()
            .collect::<Result<_, _>>()?;
        DualArcFamily::new(FamilyKind::Dual, self.d, self.dual_arc_params(), elements)
    }

    /// The full generalised arc: perps of the dual-arc elements, same point
    /// order.
    pub fn build_arc(&self) -> Result<DualArcFamily, Error> {
        let points = enumerate_points(&self.field, self.n);
        let elements: Vec<Subspace> = exec::map(&points, |p| self.arc_element(p))
            .into_iter()
            .collect::<Result<_, _>>()?;
        DualArcFamily::new(FamilyKind::Arc, self.d, self.arc_params(), elements)
    }

    /// Checks the validity condition of the perp-based arc construction:
    /// q odd and (q^n - 1)/(q - 1) >= C(n+d, d+1). The crate computes arc
    /// elements unconditionally; this flag lets callers warn.
    pub fn arc_construction_condition_holds(&self) -> bool {
        let q = self.field.order();
        if q % 2 == 0 {
            return false;
        }
        let points_of_hyperplane = (0..self.n).fold(0u64, |acc, i| acc + q.pow(i as u32));
        points_of_hyperplane >= binomial((self.n + self.d) as u64, (self.d + 1) as u64)
    }

    /// For order d = 1: the span of the diagonal images theta(P, P) over
    /// all source points P. Each diagonal image is the unique point of the
    /// dual-arc element D(P) not covered by any second element; in
    /// characteristic 2 its mixed coordinates collapse. For q even the
    /// span is an n-dimensional subspace (the nucleus); for q odd it is
    /// the whole target space and the family is not extendable.
    pub fn nucleus(&self) -> Result<NucleusOutcome, Error> {
        if self.d != 1 {
            return Err(Error::InvalidParameter(
                "the nucleus is defined for order d = 1 only".into(),
            ));
        }
        let points = enumerate_points(&self.field, self.n);
        let images: Vec<Vec<u32>> = points
            .iter()
            .map(|p| self.diagonal(p))
            .collect::<Result<_, _>>()?;
        let span = Subspace::from_rows(&self.field, self.ambient_dim(), &images)?;
        let q_even = self.field.order() % 2 == 0;
        if span.dim() == self.n as isize {
            if !q_even {
                return Err(Error::Internal(
                    "nucleus dimension n reached for odd q".into(),
                ));
            }
            Ok(NucleusOutcome::Nucleus(span))
        } else if span.is_full() {
            if q_even {
                return Err(Error::Internal(
                    "uncovered points span the whole space for even q".into(),
                ));
            }
            Ok(NucleusOutcome::NotExtendable {
                span_dim: span.dim(),
            })
        } else {
            Err(Error::Internal(format!(
                "uncovered points span dimension {}, expected {} or the whole space",
                span.dim(),
                self.n
            )))
        }
    }
}

/// Result of the nucleus computation for an order-1 dual arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NucleusOutcome {
    /// q even: appending this subspace to the family is the candidate
    /// extension step.
    Nucleus(Subspace),
    /// q odd: the uncovered points span the whole space, the family is
    /// maximal.
    NotExtendable { span_dim: isize },
}
