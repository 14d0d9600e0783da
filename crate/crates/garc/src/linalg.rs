//! Exact projective linear algebra over GF(q).
//!
//! A [`Subspace`] of PG(N, q) is stored as the reduced row-echelon basis of
//! the corresponding vector subspace of GF(q)^(N+1). Reduced row-echelon
//! form is a canonical representative, so subspace equality is plain data
//! comparison. The empty subspace has rank 0 and projective dimension -1;
//! the whole space has rank N+1.
//!
//! Projective points are nonzero coordinate vectors normalized so that the
//! first nonzero coordinate is 1.

use std::sync::Arc;

use num::{BigUint, One, Zero};
use rand::Rng;

use crate::gf::Field;
use crate::Error;

/// The bilinear form fixed throughout the crate: the standard coordinate
/// dot product. It is symmetric and non-degenerate, and serves both as the
/// form pairing a source space with itself and as the form on the target
/// space of the Veronesean maps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BilinearForm;

impl BilinearForm {
    pub fn eval(&self, field: &Field, a: &[u32], b: &[u32]) -> Result<u32, Error> {
        if a.len() != b.len() {
            return Err(Error::BadVectorLength {
                expected: a.len(),
                got: b.len(),
            });
        }
        let mut acc = 0u32;
        for (&x, &y) in a.iter().zip(b) {
            acc = field.add(acc, field.mul(x, y));
        }
        Ok(acc)
    }
}

/// Standard dot product of two coordinate vectors.
pub fn dot(field: &Field, a: &[u32], b: &[u32]) -> Result<u32, Error> {
    BilinearForm.eval(field, a, b)
}

/// Advances a coefficient odometer (last entry fastest); false on wrap.
pub(crate) fn advance(coefs: &mut [u32], q: u32) -> bool {
    for c in coefs.iter_mut().rev() {
        *c += 1;
        if *c < q {
            return true;
        }
        *c = 0;
    }
    false
}

/// Builds the field of order `q`, factoring `q` as a prime power.
pub(crate) fn field_from_order(q: u64) -> Result<Arc<Field>, Error> {
    if q < 2 {
        return Err(Error::Parse(format!("{q} is not a prime power")));
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if q % p != 0 {
        p = q; // q itself is prime
    }
    let mut e = 0;
    let mut rest = q;
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    if rest != 1 {
        return Err(Error::Parse(format!("{q} is not a prime power")));
    }
    Field::new(p, e)
}

/// Row-reduces `rows` (each of width `cols`) in place over `field` and
/// truncates to the nonzero rows. Returns the rank. The result is the
/// canonical reduced row-echelon form: pivots are 1, pivot columns are
/// otherwise zero, pivot columns strictly increase.
fn rref(field: &Field, rows: &mut Vec<Vec<u32>>, cols: usize) -> usize {
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(src) = (pivot_row..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let lead_inv = field
            .inv(rows[pivot_row][col])
            .expect("pivot entries are nonzero");
        for c in col..cols {
            rows[pivot_row][c] = field.mul(rows[pivot_row][c], lead_inv);
        }
        for r in 0..rows.len() {
            if r != pivot_row && rows[r][col] != 0 {
                let factor = rows[r][col];
                for c in col..cols {
                    let delta = field.mul(factor, rows[pivot_row][c]);
                    rows[r][c] = field.sub(rows[r][c], delta);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.truncate(pivot_row);
    pivot_row
}

/// A subspace of PG(N, q) in canonical reduced row-echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    field: Arc<Field>,
    /// Number of coordinates, N+1.
    cols: usize,
    /// Canonical basis rows; empty for the empty subspace.
    rows: Vec<Vec<u32>>,
}

impl Subspace {
    /// The empty subspace (projective dimension -1) of PG(ambient_dim, q).
    pub fn empty(field: &Arc<Field>, ambient_dim: usize) -> Subspace {
        Subspace {
            field: Arc::clone(field),
            cols: ambient_dim + 1,
            rows: Vec::new(),
        }
    }

    /// The whole space PG(ambient_dim, q).
    pub fn full(field: &Arc<Field>, ambient_dim: usize) -> Subspace {
        let cols = ambient_dim + 1;
        let rows = (0..cols)
            .map(|i| {
                let mut row = vec![0u32; cols];
                row[i] = 1;
                row
            })
            .collect();
        Subspace {
            field: Arc::clone(field),
            cols,
            rows,
        }
    }

    /// Subspace spanned by the given coordinate vectors (zero rows allowed,
    /// they contribute nothing).
    pub fn from_rows(
        field: &Arc<Field>,
        ambient_dim: usize,
        rows: &[Vec<u32>],
    ) -> Result<Subspace, Error> {
        let cols = ambient_dim + 1;
        let q = field.order();
        for row in rows {
            if row.len() != cols {
                return Err(Error::BadVectorLength {
                    expected: cols,
                    got: row.len(),
                });
            }
            if let Some(&v) = row.iter().find(|&&v| v as u64 >= q) {
                return Err(Error::ValueOutOfRange {
                    value: v as u64,
                    q,
                });
            }
        }
        let mut rows = rows.to_vec();
        rref(field, &mut rows, cols);
        Ok(Subspace {
            field: Arc::clone(field),
            cols,
            rows,
        })
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// Projective dimension N of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.cols - 1
    }

    /// Number of coordinates, N+1.
    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// Vector-space dimension of the row space.
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Projective dimension, -1 for the empty subspace.
    pub fn dim(&self) -> isize {
        self.rows.len() as isize - 1
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.cols
    }

    /// Canonical basis rows.
    pub fn basis(&self) -> &[Vec<u32>] {
        &self.rows
    }

    fn compat(&self, other: &Subspace) -> Result<(), Error> {
        if *self.field != *other.field {
            return Err(Error::FieldMismatch);
        }
        if self.cols != other.cols {
            return Err(Error::AmbientMismatch);
        }
        Ok(())
    }

    /// Whether `v` lies in the row space. The zero vector is contained in
    /// every subspace.
    pub fn contains_vector(&self, v: &[u32]) -> Result<bool, Error> {
        if v.len() != self.cols {
            return Err(Error::BadVectorLength {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok(self.reduce(v).iter().all(|&c| c == 0))
    }

    /// Remainder of `v` after elimination against the basis rows.
    fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let f = &*self.field;
        let mut v = v.to_vec();
        for row in &self.rows {
            let pivot = row.iter().position(|&c| c != 0).expect("rows are nonzero");
            if v[pivot] != 0 {
                let factor = v[pivot];
                for c in pivot..self.cols {
                    let delta = f.mul(factor, row[c]);
                    v[c] = f.sub(v[c], delta);
                }
            }
        }
        v
    }

    pub fn contains(&self, other: &Subspace) -> Result<bool, Error> {
        self.compat(other)?;
        for row in &other.rows {
            if !self.contains_vector(row)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Smallest subspace containing both operands.
    pub fn span_with(&self, other: &Subspace) -> Result<Subspace, Error> {
        self.compat(other)?;
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        rref(&self.field, &mut rows, self.cols);
        Ok(Subspace {
            field: Arc::clone(&self.field),
            cols: self.cols,
            rows,
        })
    }

    /// Span of this subspace and one extra vector.
    pub fn span_with_vector(&self, v: &[u32]) -> Result<Subspace, Error> {
        if v.len() != self.cols {
            return Err(Error::BadVectorLength {
                expected: self.cols,
                got: v.len(),
            });
        }
        let mut rows = self.rows.clone();
        rows.push(v.to_vec());
        rref(&self.field, &mut rows, self.cols);
        Ok(Subspace {
            field: Arc::clone(&self.field),
            cols: self.cols,
            rows,
        })
    }

    /// Intersection, by the Zassenhaus block construction: row-reduce
    /// [A | A; B | 0]; rows whose left half vanished carry a basis of the
    /// intersection in their right half.
    pub fn meet(&self, other: &Subspace) -> Result<Subspace, Error> {
        self.compat(other)?;
        let m = self.cols;
        let mut block: Vec<Vec<u32>> = Vec::with_capacity(self.rows.len() + other.rows.len());
        for row in &self.rows {
            let mut wide = vec![0u32; 2 * m];
            wide[..m].copy_from_slice(row);
            wide[m..].copy_from_slice(row);
            block.push(wide);
        }
        for row in &other.rows {
            let mut wide = vec![0u32; 2 * m];
            wide[..m].copy_from_slice(row);
            block.push(wide);
        }
        rref(&self.field, &mut block, 2 * m);
        let mut rows: Vec<Vec<u32>> = block
            .into_iter()
            .filter(|w| w[..m].iter().all(|&c| c == 0))
            .map(|w| w[m..].to_vec())
            .collect();
        rref(&self.field, &mut rows, m);
        Ok(Subspace {
            field: Arc::clone(&self.field),
            cols: m,
            rows,
        })
    }

    /// Perpendicular complement under the standard dot product; an
    /// involution exchanging dimensions a and N-1-a.
    pub fn perp(&self) -> Subspace {
        let f = &*self.field;
        let m = self.cols;
        let r = self.rows.len();
        // pivot columns and free columns of the RREF basis
        let pivots: Vec<usize> = self
            .rows
            .iter()
            .map(|row| row.iter().position(|&c| c != 0).expect("rows are nonzero"))
            .collect();
        let mut is_pivot = vec![false; m];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(m - r);
        for free in (0..m).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0u32; m];
            v[free] = 1;
            for (row, &p) in self.rows.iter().zip(&pivots) {
                v[p] = f.neg(row[free]);
            }
            rows.push(v);
        }
        rref(f, &mut rows, m);
        Subspace {
            field: Arc::clone(&self.field),
            cols: m,
            rows,
        }
    }

    /// Number of projective points, (q^rank - 1)/(q - 1).
    pub fn point_count(&self) -> BigUint {
        let q = BigUint::from(self.field.order());
        (q.pow(self.rank() as u32) - BigUint::one()) / (BigUint::from(self.field.order()) - BigUint::one())
    }

    /// All projective points, as canonical representatives (first nonzero
    /// coordinate 1), in a deterministic order. For the full space the
    /// order is ascending coordinate-tuple lexicographic.
    pub fn points(&self) -> Vec<Vec<u32>> {
        let f = &*self.field;
        let q = f.order() as u32;
        let r = self.rows.len();
        let mut out = Vec::new();
        // coefficient vectors with first nonzero entry 1; the lead runs from
        // the last basis row upward so full-space enumeration is ascending
        for lead in (0..r).rev() {
            let mut coefs = vec![0u32; r - lead - 1];
            loop {
                let mut v = self.rows[lead].clone();
                for (j, &c) in coefs.iter().enumerate() {
                    if c != 0 {
                        let row = &self.rows[lead + 1 + j];
                        for k in 0..self.cols {
                            v[k] = f.add(v[k], f.mul(c, row[k]));
                        }
                    }
                }
                out.push(v);
                if !advance(&mut coefs, q) {
                    break;
                }
            }
        }
        out
    }

    /// Number of subspaces of projective dimension `target_dim` that
    /// contain this one, via the Gaussian binomial coefficient of the
    /// quotient geometry.
    pub fn count_superspaces(&self, target_dim: isize) -> Result<BigUint, Error> {
        let n = self.ambient_dim() as isize;
        if target_dim < self.dim() || target_dim > n {
            return Err(Error::DimensionOutOfRange {
                dim: target_dim,
                min: self.dim(),
                max: n,
            });
        }
        let m = (self.cols - self.rank()) as u64;
        let k = (target_dim + 1) as u64 - self.rank() as u64;
        Ok(gaussian_binomial(m, k, self.field.order()))
    }

    /// Serializes as a header line `q=<p>^<e> N=<N> r=<r>` followed by one
    /// line per basis row.
    pub fn to_text(&self) -> String {
        let f = &*self.field;
        let mut out = format!(
            "q={}^{} N={} r={}\n",
            f.p(),
            f.degree(),
            self.ambient_dim(),
            self.rank()
        );
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&v| f.encode(v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the output of [`Subspace::to_text`]. The basis is
    /// re-canonicalized on load, so any spanning rows are accepted.
    pub fn from_text(text: &str) -> Result<Subspace, Error> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty subspace block".into()))?;
        let (field, ambient_dim, r) = parse_subspace_header(header)?;
        let mut rows = Vec::with_capacity(r);
        for _ in 0..r {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("missing basis row".into()))?;
            rows.push(parse_row(&field, ambient_dim + 1, line)?);
        }
        Subspace::from_rows(&field, ambient_dim, &rows)
    }
}

pub(crate) fn parse_subspace_header(header: &str) -> Result<(Arc<Field>, usize, usize), Error> {
    let mut q_part = None;
    let mut n_part = None;
    let mut r_part = None;
    for token in header.split_whitespace() {
        if let Some(v) = token.strip_prefix("q=") {
            q_part = Some(v);
        } else if let Some(v) = token.strip_prefix("N=") {
            n_part = Some(v);
        } else if let Some(v) = token.strip_prefix("r=") {
            r_part = Some(v);
        } else {
            return Err(Error::Parse(format!("unexpected header token {token:?}")));
        }
    }
    let (q_str, n_str, r_str) = match (q_part, n_part, r_part) {
        (Some(q), Some(n), Some(r)) => (q, n, r),
        _ => {
            return Err(Error::Parse(format!(
                "subspace header needs q=, N= and r=: {header:?}"
            )))
        }
    };
    let field = match q_str.split_once('^') {
        Some((p, e)) => Field::new(
            p.parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad characteristic {p:?}")))?,
            e.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad degree {e:?}")))?,
        )?,
        None => field_from_order(
            q_str
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad field order {q_str:?}")))?,
        )?,
    };
    let ambient_dim: usize = n_str
        .parse()
        .map_err(|_| Error::Parse(format!("bad ambient dimension {n_str:?}")))?;
    let r: usize = r_str
        .parse()
        .map_err(|_| Error::Parse(format!("bad rank {r_str:?}")))?;
    if r > ambient_dim + 1 {
        return Err(Error::Parse(format!(
            "rank {r} exceeds ambient vector dimension {}",
            ambient_dim + 1
        )));
    }
    Ok((field, ambient_dim, r))
}

pub(crate) fn parse_row(field: &Arc<Field>, cols: usize, line: &str) -> Result<Vec<u32>, Error> {
    let row: Vec<u32> = line
        .split_whitespace()
        .map(|tok| field.decode(tok))
        .collect::<Result<_, _>>()?;
    if row.len() != cols {
        return Err(Error::BadVectorLength {
            expected: cols,
            got: row.len(),
        });
    }
    Ok(row)
}

/// Span of any number of subspaces of the same ambient space; the empty
/// collection spans the empty subspace.
pub fn span<'a, I>(field: &Arc<Field>, ambient_dim: usize, parts: I) -> Result<Subspace, Error>
where
    I: IntoIterator<Item = &'a Subspace>,
{
    let mut acc = Subspace::empty(field, ambient_dim);
    for part in parts {
        acc = acc.span_with(part)?;
    }
    Ok(acc)
}

/// Meet of any number of subspaces; the empty collection meets in the whole
/// space.
pub fn meet<'a, I>(field: &Arc<Field>, ambient_dim: usize, parts: I) -> Result<Subspace, Error>
where
    I: IntoIterator<Item = &'a Subspace>,
{
    let mut acc = Subspace::full(field, ambient_dim);
    for part in parts {
        acc = acc.meet(part)?;
    }
    Ok(acc)
}

/// All points of PG(ambient_dim, q) in ascending lexicographic order of
/// their canonical representatives.
pub fn enumerate_points(field: &Arc<Field>, ambient_dim: usize) -> Vec<Vec<u32>> {
    Subspace::full(field, ambient_dim).points()
}

/// Gaussian binomial coefficient [m choose k]_q: the number of k-dimensional
/// vector subspaces of GF(q)^m.
pub fn gaussian_binomial(m: u64, k: u64, q: u64) -> BigUint {
    if k > m {
        return BigUint::zero();
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for j in 0..k {
        num *= q.pow((m - j) as u32) - BigUint::one();
        den *= q.pow((j + 1) as u32) - BigUint::one();
    }
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Uniformly random subspace of dimension `target_dim` containing `sub`,
/// inside the subgeometry `within`.
///
/// Vectors are drawn uniformly from `within` and kept whenever they enlarge
/// the span; conditioned on acceptance each draw extends an ordered basis
/// uniformly, and every admissible superspace has the same number of such
/// ordered extensions, so the result is uniform. Statistical validation
/// lives in the test suite.
pub fn random_superspace_within<R: Rng + ?Sized>(
    sub: &Subspace,
    target_dim: isize,
    within: &Subspace,
    rng: &mut R,
) -> Result<Subspace, Error> {
    sub.compat(within)?;
    if !within.contains(sub)? {
        return Err(Error::InvalidParameter(
            "base subspace is not inside the sampling subgeometry".into(),
        ));
    }
    if target_dim < sub.dim() || target_dim > within.dim() {
        return Err(Error::DimensionOutOfRange {
            dim: target_dim,
            min: sub.dim(),
            max: within.dim(),
        });
    }
    let f = sub.field();
    let q = f.order() as u32;
    let target_rank = (target_dim + 1) as usize;
    let mut acc = sub.clone();
    while acc.rank() < target_rank {
        let mut v = vec![0u32; within.ncols()];
        for row in within.basis() {
            let c = rng.gen_range(0..q);
            if c != 0 {
                for k in 0..v.len() {
                    v[k] = f.add(v[k], f.mul(c, row[k]));
                }
            }
        }
        if !acc.contains_vector(&v)? {
            acc = acc.span_with_vector(&v)?;
        }
    }
    Ok(acc)
}

/// Uniformly random superspace of `sub` of dimension `target_dim` in the
/// full ambient space.
pub fn random_superspace<R: Rng + ?Sized>(
    sub: &Subspace,
    target_dim: isize,
    rng: &mut R,
) -> Result<Subspace, Error> {
    let within = Subspace::full(sub.field(), sub.ambient_dim());
    random_superspace_within(sub, target_dim, &within, rng)
}
