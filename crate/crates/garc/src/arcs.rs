//! Families of subspaces forming generalised (dual) arcs: verification of
//! the defining axioms, dualization, structure diagnostics for the order-1
//! case, and completion of deficient families.
//!
//! A dual-arc family of order d with parameters (n0, .., n_{d+1}) consists
//! of n1-dimensional subspaces of PG(n0, q) such that every j of them meet
//! in dimension n_j (j <= d+1) and every d+2 of them meet emptily. An arc
//! family is the dual notion: every j elements span dimension n_j and
//! every d+2 of them span the whole space. Both are carried by the same
//! type, tagged with a kind.
//!
//! The family file format is line-oriented: a header
//! `q n d count kind p0 .. p_{d+1}` followed by `count` subspace blocks in
//! the linalg text format. The writer emits elements in ascending order of
//! their canonical basis matrices, so two families that are equal as sets
//! serialize to identical bytes; kind and parameters may be omitted on
//! input, in which case the construction defaults for (n, d) apply.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gf::Field;
use crate::linalg::{enumerate_points, field_from_order, Subspace};
use crate::veronese::{binomial, NucleusOutcome};
use crate::{exec, Error};

/// Seed used by sampled verification when the caller does not supply one;
/// the report records whatever seed was used.
pub const DEFAULT_SAMPLE_SEED: u64 = 42;

/// Whether a family states the dual-arc axioms (meets) or the arc axioms
/// (spans).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Dual,
    Arc,
}

impl FamilyKind {
    fn as_str(self) -> &'static str {
        match self {
            FamilyKind::Dual => "dual",
            FamilyKind::Arc => "arc",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "dual" => Ok(FamilyKind::Dual),
            "arc" => Ok(FamilyKind::Arc),
            other => Err(Error::Parse(format!("unknown family kind {other:?}"))),
        }
    }
}

/// An ordered family of equal-dimensional subspaces with declared
/// parameters. Construction validates the static invariants (shared field
/// and ambient space, element dimension n1, parameter monotonicity); the
/// combinatorial axioms are checked separately by [`verify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualArcFamily {
    kind: FamilyKind,
    order: usize,
    params: Vec<isize>,
    elements: Vec<Subspace>,
    field: Arc<Field>,
}

impl DualArcFamily {
    /// Builds a family from a non-empty element list, inferring the field
    /// from the first element.
    pub fn new(
        kind: FamilyKind,
        order: usize,
        params: Vec<isize>,
        elements: Vec<Subspace>,
    ) -> Result<DualArcFamily, Error> {
        let field = elements
            .first()
            .map(|e| e.field().clone())
            .ok_or_else(|| {
                Error::InvalidFamily("an empty family needs an explicit field".into())
            })?;
        DualArcFamily::with_field(&field, kind, order, params, elements)
    }

    /// Builds a family, allowing an empty element list.
    pub fn with_field(
        field: &Arc<Field>,
        kind: FamilyKind,
        order: usize,
        params: Vec<isize>,
        elements: Vec<Subspace>,
    ) -> Result<DualArcFamily, Error> {
        if order < 1 {
            return Err(Error::InvalidFamily("the order must be at least 1".into()));
        }
        if params.len() != order + 2 {
            return Err(Error::InvalidFamily(format!(
                "order {} needs {} parameters, got {}",
                order,
                order + 2,
                params.len()
            )));
        }
        let n0 = params[0];
        if n0 < 1 {
            return Err(Error::InvalidFamily(format!(
                "ambient dimension {n0} is not positive"
            )));
        }
        let monotone = match kind {
            // meet dimensions strictly decrease and stay non-negative
            FamilyKind::Dual => {
                params.windows(2).all(|w| w[0] > w[1]) && params[order + 1] >= 0
            }
            // span dimensions strictly increase and stay below the ambient
            FamilyKind::Arc => {
                params[1] >= 0
                    && params[1..].windows(2).all(|w| w[0] < w[1])
                    && params[order + 1] < n0
            }
        };
        if !monotone {
            return Err(Error::InvalidFamily(format!(
                "parameters {params:?} are not admissible for a {kind} family"
            )));
        }
        for (i, el) in elements.iter().enumerate() {
            if **el.field() != **field {
                return Err(Error::FieldMismatch);
            }
            if el.ambient_dim() as isize != n0 {
                return Err(Error::InvalidFamily(format!(
                    "element {i} lives in PG({}, q), family declares PG({n0}, q)",
                    el.ambient_dim()
                )));
            }
            if el.dim() != params[1] {
                return Err(Error::InvalidFamily(format!(
                    "element {i} has dimension {}, parameters require {}",
                    el.dim(),
                    params[1]
                )));
            }
        }
        Ok(DualArcFamily {
            kind,
            order,
            params,
            elements,
            field: field.clone(),
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn params(&self) -> &[isize] {
        &self.params
    }

    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Subspace {
        &self.elements[i]
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.params[0] as usize
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The source dimension label written to file headers: for the
    /// construction families, params[d] recovers n on the dual side and
    /// n0 - 1 - params[d] on the arc side.
    pub fn source_dim(&self) -> isize {
        match self.kind {
            FamilyKind::Dual => self.params[self.order],
            FamilyKind::Arc => self.params[0] - 1 - self.params[self.order],
        }
    }

    /// A copy of the family with the listed element indices removed.
    pub fn without(&self, indices: &[usize]) -> Result<DualArcFamily, Error> {
        let drop: HashSet<usize> = indices.iter().copied().collect();
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.elements.len()) {
            return Err(Error::InvalidParameter(format!(
                "element index {bad} out of range for a family of {}",
                self.elements.len()
            )));
        }
        let kept: Vec<Subspace> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, e)| e.clone())
            .collect();
        DualArcFamily::with_field(&self.field, self.kind, self.order, self.params.clone(), kept)
    }

    /// Serializes the family. Elements are written in ascending order of
    /// their canonical basis matrices, independent of in-memory order, so
    /// set-equal families produce identical bytes.
    pub fn to_text(&self) -> String {
        let mut text = format!(
            "{} {} {} {} {} {}\n",
            self.field.order(),
            self.source_dim(),
            self.order,
            self.elements.len(),
            self.kind,
            self.params.iter().join(" "),
        );
        let mut order: Vec<usize> = (0..self.elements.len()).collect();
        order.sort_by(|&a, &b| self.elements[a].basis().cmp(self.elements[b].basis()));
        for i in order {
            text.push_str(&self.elements[i].to_text());
        }
        text
    }

    /// Parses the family file format. The trailing kind and parameter
    /// tokens of the header are optional; omitted, the family is taken to
    /// be a dual family with the construction parameters for (n, d).
    pub fn from_text(text: &str) -> Result<DualArcFamily, Error> {
        let mut lines = text.lines().map(str::trim_end).filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty family text".into()))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() < 4 {
            return Err(Error::Parse(format!(
                "family header needs at least q, n, d and count: {header:?}"
            )));
        }
        let q: u64 = tokens[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad field order {:?}", tokens[0])))?;
        let n: isize = tokens[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad source dimension {:?}", tokens[1])))?;
        let d: usize = tokens[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad order {:?}", tokens[2])))?;
        let count: usize = tokens[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad element count {:?}", tokens[3])))?;
        if n < 0 {
            return Err(Error::Parse(format!("negative source dimension {n}")));
        }
        let field = field_from_order(q)?;
        let kind = match tokens.get(4) {
            Some(tok) => tok.parse::<FamilyKind>()?,
            None => FamilyKind::Dual,
        };
        let params: Vec<isize> = if tokens.len() > 5 {
            tokens[5..]
                .iter()
                .map(|t| {
                    t.parse::<isize>()
                        .map_err(|_| Error::Parse(format!("bad parameter {t:?}")))
                })
                .collect::<Result<_, _>>()?
        } else {
            construction_params(kind, n as usize, d)
        };
        let mut elements = Vec::with_capacity(count);
        let mut pending: Vec<&str> = Vec::new();
        let mut needed = 0usize;
        for line in lines {
            if pending.is_empty() {
                // subspace block header "q=.. N=.. r=.."
                let r_tok = line
                    .split_whitespace()
                    .nth(2)
                    .and_then(|t| t.strip_prefix("r="))
                    .ok_or_else(|| Error::Parse(format!("expected a subspace header: {line:?}")))?;
                needed = r_tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad rank in {line:?}")))?;
            }
            pending.push(line);
            if pending.len() == needed + 1 {
                let block = pending.join("\n");
                let sub = Subspace::from_text(&block)?;
                if **sub.field() != *field {
                    return Err(Error::FieldMismatch);
                }
                elements.push(sub);
                pending.clear();
            }
        }
        if !pending.is_empty() {
            return Err(Error::Parse("truncated subspace block".into()));
        }
        if elements.len() != count {
            return Err(Error::Parse(format!(
                "header declares {count} elements, found {}",
                elements.len()
            )));
        }
        DualArcFamily::with_field(&field, kind, d, params, elements)
    }
}

/// Declared parameters of the construction families: meet dimensions
/// C(n+d+1-i, d+1-i) - 1 on the dual side, their complements on the arc
/// side.
fn construction_params(kind: FamilyKind, n: usize, d: usize) -> Vec<isize> {
    let dual: Vec<isize> = (0..=d + 1)
        .map(|i| binomial((n + d + 1 - i) as u64, (d + 1 - i) as u64) as isize - 1)
        .collect();
    match kind {
        FamilyKind::Dual => dual,
        FamilyKind::Arc => {
            let n0 = dual[0];
            std::iter::once(n0)
                .chain(dual[1..].iter().map(|p| n0 - 1 - p))
                .collect()
        }
    }
}

fn meet_of(family: &DualArcFamily, subset: &[usize]) -> Subspace {
    let mut acc = family.elements[subset[0]].clone();
    for &i in &subset[1..] {
        // cannot fail: ambient and field were validated at construction
        acc = acc.meet(&family.elements[i]).expect("validated family");
    }
    acc
}

fn span_of(family: &DualArcFamily, subset: &[usize]) -> Subspace {
    let mut acc = family.elements[subset[0]].clone();
    for &i in &subset[1..] {
        acc = acc.span_with(&family.elements[i]).expect("validated family");
    }
    acc
}

fn combine(family: &DualArcFamily, subset: &[usize]) -> Subspace {
    match family.kind {
        FamilyKind::Dual => meet_of(family, subset),
        FamilyKind::Arc => span_of(family, subset),
    }
}

/// How [`verify`] chooses the j-subsets it checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { per_level: usize, seed: u64 },
}

/// A subset whose measured dimension contradicts the declared parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub indices: Vec<usize>,
    pub expected: isize,
    pub actual: isize,
}

/// Outcome of an axiom check. `failures` is empty iff `axioms_hold`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub axioms_hold: bool,
    pub regular: bool,
    pub span_dim: isize,
    pub failures: Vec<Failure>,
    pub mode: String,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.axioms_hold && self.regular
    }

    /// Machine-readable key=value rendering.
    pub fn to_kv(&self) -> String {
        format!(
            "axioms_hold={}\nregular={}\nspan_dim={}\nfailures={}\nmode={}\n",
            self.axioms_hold,
            self.regular,
            self.span_dim,
            self.failures.len(),
            self.mode,
        )
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "axioms {}, {}, span dimension {} ({})",
            if self.axioms_hold { "hold" } else { "violated" },
            if self.regular { "regular" } else { "not regular" },
            self.span_dim,
            self.mode,
        )?;
        for fail in self.failures.iter().take(10) {
            writeln!(
                f,
                "  elements {:?}: expected dimension {}, found {}",
                fail.indices, fail.expected, fail.actual
            )?;
        }
        if self.failures.len() > 10 {
            writeln!(f, "  ... and {} more", self.failures.len() - 10)?;
        }
        Ok(())
    }
}

fn subsets_for_level(
    len: usize,
    j: usize,
    mode: VerifyMode,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    if j > len {
        return Vec::new();
    }
    let exhaustive_count = binomial(len as u64, j as u64);
    match mode {
        VerifyMode::Sampled { per_level, .. } if exhaustive_count > per_level as u64 => (0
            ..per_level)
            .map(|_| {
                let mut pick = rand::seq::index::sample(rng, len, j).into_vec();
                pick.sort_unstable();
                pick
            })
            .collect(),
        _ => (0..len).combinations(j).collect(),
    }
}

/// Checks the declared meet (dual) or span (arc) dimensions on every
/// j-subset for j <= d+2, exhaustively or on sampled subsets, plus the
/// regularity condition for j <= d. Failures are data, not errors.
pub fn verify(family: &DualArcFamily, mode: VerifyMode) -> VerificationReport {
    let len = family.len();
    let d = family.order;
    let n0 = family.params[0];
    let mut rng = ChaCha8Rng::seed_from_u64(match mode {
        VerifyMode::Sampled { seed, .. } => seed,
        VerifyMode::Exhaustive => 0,
    });
    let mut tasks: Vec<Vec<usize>> = Vec::new();
    for j in 1..=d + 2 {
        tasks.extend(subsets_for_level(len, j, mode, &mut rng));
    }
    let mut failures: Vec<Failure> = exec::map(&tasks, |subset| {
        let expected = if subset.len() <= d + 1 {
            family.params[subset.len()]
        } else {
            match family.kind {
                FamilyKind::Dual => -1,
                FamilyKind::Arc => n0,
            }
        };
        let actual = combine(family, subset).dim();
        (actual != expected).then(|| Failure {
            indices: subset.clone(),
            expected,
            actual,
        })
    })
    .into_iter()
    .flatten()
    .collect();
    failures.sort_by(|a, b| a.indices.cmp(&b.indices));

    let span_dim = family
        .elements
        .iter()
        .try_fold(Subspace::empty(&family.field, family.ambient_dim()), |acc, e| {
            acc.span_with(e)
        })
        .expect("validated family")
        .dim();

    // regularity: each j-wise combination (j <= d) is recovered from its
    // interactions with the remaining elements
    let mut reg_tasks: Vec<Vec<usize>> = Vec::new();
    for j in 1..=d {
        reg_tasks.extend(subsets_for_level(len, j, mode, &mut rng));
    }
    let regular_parts = exec::map(&reg_tasks, |subset| {
        let pi = combine(family, subset);
        let rest: Vec<usize> = (0..len).filter(|i| !subset.contains(i)).collect();
        if rest.is_empty() {
            return true;
        }
        match family.kind {
            FamilyKind::Dual => {
                let mut acc = Subspace::empty(&family.field, family.ambient_dim());
                for &m in &rest {
                    let part = pi.meet(&family.elements[m]).expect("validated family");
                    acc = acc.span_with(&part).expect("validated family");
                }
                acc == pi
            }
            FamilyKind::Arc => {
                let mut acc = Subspace::full(&family.field, family.ambient_dim());
                for &m in &rest {
                    let part = pi.span_with(&family.elements[m]).expect("validated family");
                    acc = acc.meet(&part).expect("validated family");
                }
                acc == pi
            }
        }
    });
    let spanning_ok = match family.kind {
        FamilyKind::Dual => span_dim == n0,
        FamilyKind::Arc => true,
    };
    let regular = spanning_ok && regular_parts.into_iter().all(|ok| ok);

    VerificationReport {
        axioms_hold: failures.is_empty(),
        regular,
        span_dim,
        failures,
        mode: match mode {
            VerifyMode::Exhaustive => "exhaustive".into(),
            VerifyMode::Sampled { per_level, seed } => {
                format!("sampled per_level={per_level} seed={seed}")
            }
        },
    }
}

/// Elementwise perpendicular complement: parameters are complemented to
/// (n0, n0-1-n1, ..), the kind flips, and applying the operation twice
/// returns the original family.
pub fn dualize(family: &DualArcFamily) -> DualArcFamily {
    let n0 = family.params[0];
    let params: Vec<isize> = std::iter::once(n0)
        .chain(family.params[1..].iter().map(|p| n0 - 1 - p))
        .collect();
    let elements = exec::map(&family.elements, |e| e.perp());
    let kind = match family.kind {
        FamilyKind::Dual => FamilyKind::Arc,
        FamilyKind::Arc => FamilyKind::Dual,
    };
    DualArcFamily::with_field(&family.field, kind, family.order, params, elements)
        .expect("complemented parameters of a valid family stay valid")
}

/// Projective point count of a k-dimensional subspace over GF(q).
fn point_count_u128(q: u128, k: isize) -> u128 {
    if k < 0 {
        return 0;
    }
    let mut acc = 0u128;
    for i in 0..=k as u32 {
        acc += q.pow(i);
    }
    acc
}

/// Results of checking the five hypotheses under which a deficient
/// order-1 family extends to a regular one, at declared deficiency delta.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct THypothesesReport {
    /// (1) every two elements meet in a point
    pub pairwise_points: bool,
    /// (2) every three elements are skew
    pub triples_skew: bool,
    /// (3) the elements span the ambient space
    pub spans_ambient: bool,
    /// (4) subcollection spans only realize dimensions i(2n-i+3)/2 - 1
    pub span_dims_admissible: bool,
    /// (5) some pair-span holds more than two elements; only constrains
    /// even q, `None` for odd q
    pub pair_span_rich: Option<bool>,
    pub delta: usize,
    /// delta <= (q-7)/2 for odd q, (q-8)/2 for even q; a zero deficiency
    /// is trivially within bounds
    pub delta_bound_ok: bool,
    pub notes: Vec<String>,
}

impl THypothesesReport {
    pub fn all_hold(&self) -> bool {
        self.pairwise_points
            && self.triples_skew
            && self.spans_ambient
            && self.span_dims_admissible
            && self.pair_span_rich.unwrap_or(true)
            && self.delta_bound_ok
    }

    pub fn to_kv(&self) -> String {
        format!(
            "pairwise_points={}\ntriples_skew={}\nspans_ambient={}\nspan_dims_admissible={}\npair_span_rich={}\ndelta={}\ndelta_bound_ok={}\n",
            self.pairwise_points,
            self.triples_skew,
            self.spans_ambient,
            self.span_dims_admissible,
            self.pair_span_rich
                .map_or_else(|| "none".to_string(), |b| b.to_string()),
            self.delta,
            self.delta_bound_ok,
        )
    }
}

impl fmt::Display for THypothesesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_kv())?;
        for note in self.notes.iter().take(10) {
            writeln!(f, "  {note}")?;
        }
        Ok(())
    }
}

fn basis_key(s: &Subspace) -> Vec<Vec<u32>> {
    s.basis().to_vec()
}

/// Distinct spans of element pairs, keyed by canonical basis, mapped to
/// (span, indices of all family elements contained in it).
fn pair_span_table(family: &DualArcFamily) -> HashMap<Vec<Vec<u32>>, (Subspace, Vec<usize>)> {
    let pairs: Vec<Vec<usize>> = (0..family.len()).combinations(2).collect();
    let spans = exec::map(&pairs, |p| span_of(family, p));
    let mut table: HashMap<Vec<Vec<u32>>, (Subspace, Vec<usize>)> = HashMap::new();
    for span in spans {
        table.entry(basis_key(&span)).or_insert_with(|| {
            let members: Vec<usize> = (0..family.len())
                .filter(|&i| span.contains(&family.elements[i]).expect("validated family"))
                .collect();
            (span.clone(), members)
        });
    }
    table
}

/// Checks the five hypotheses that make a deficient family extendable.
/// The family must be a dual family of order 1 whose size matches the
/// full size (q^{n+1}-1)/(q-1) minus delta.
pub fn verify_t_d1_hypotheses(
    family: &DualArcFamily,
    delta: usize,
) -> Result<THypothesesReport, Error> {
    if family.order != 1 || family.kind != FamilyKind::Dual {
        return Err(Error::InvalidParameter(
            "the extension hypotheses apply to dual families of order 1".into(),
        ));
    }
    let q = family.field.order() as u128;
    let n = family.params[1];
    let full = point_count_u128(q, n);
    if family.len() as u128 + delta as u128 != full {
        return Err(Error::InvalidParameter(format!(
            "family has {} elements, expected {} minus delta {}",
            family.len(),
            full,
            delta
        )));
    }
    let len = family.len();
    let mut notes = Vec::new();

    let pairs: Vec<Vec<usize>> = (0..len).combinations(2).collect();
    let pair_dims = exec::map(&pairs, |p| meet_of(family, p).dim());
    let mut pairwise_points = true;
    for (p, dim) in pairs.iter().zip(&pair_dims) {
        if *dim != 0 {
            pairwise_points = false;
            if notes.len() < 10 {
                notes.push(format!("elements {:?} meet in dimension {dim}", p));
            }
        }
    }

    let triples: Vec<Vec<usize>> = (0..len).combinations(3).collect();
    let triple_dims = exec::map(&triples, |t| meet_of(family, t).dim());
    let mut triples_skew = true;
    for (t, dim) in triples.iter().zip(&triple_dims) {
        if *dim != -1 {
            triples_skew = false;
            if notes.len() < 10 {
                notes.push(format!("elements {:?} share dimension {dim}", t));
            }
        }
    }

    let total_span = family
        .elements
        .iter()
        .try_fold(Subspace::empty(&family.field, family.ambient_dim()), |acc, e| {
            acc.span_with(e)
        })
        .expect("validated family");
    let spans_ambient = total_span.is_full();
    if !spans_ambient {
        notes.push(format!(
            "elements span dimension {} of {}",
            total_span.dim(),
            family.params[0]
        ));
    }

    // property (4) over incrementally grown subcollections: any violating
    // subset yields a violating growth sequence, so breadth-first closure
    // over distinct spans suffices
    let allowed: HashSet<isize> = (0..=n).map(|i| i * (2 * n - i + 3) / 2 - 1).collect();
    let full_dim = family.params[0];
    let mut span_dims_admissible = true;
    let mut seen: HashSet<Vec<Vec<u32>>> = HashSet::new();
    let mut queue: VecDeque<Subspace> = VecDeque::new();
    for el in &family.elements {
        if seen.insert(basis_key(el)) {
            queue.push_back(el.clone());
        }
    }
    while let Some(s) = queue.pop_front() {
        if s.dim() == full_dim {
            continue;
        }
        for el in &family.elements {
            if s.contains(el).expect("validated family") {
                continue;
            }
            let bigger = s.span_with(el).expect("validated family");
            if seen.insert(basis_key(&bigger)) {
                if bigger.dim() != full_dim && !allowed.contains(&bigger.dim()) {
                    span_dims_admissible = false;
                    if notes.len() < 10 {
                        notes.push(format!(
                            "a subcollection spans inadmissible dimension {}",
                            bigger.dim()
                        ));
                    }
                }
                queue.push_back(bigger);
            }
        }
        if seen.len() > 200_000 {
            return Err(Error::Internal(
                "span closure exceeded its size bound; the family is far from the studied type"
                    .into(),
            ));
        }
    }

    let q_even = q % 2 == 0;
    let pair_span_rich = if q_even {
        let rich = pair_span_table(family)
            .values()
            .any(|(_, members)| members.len() > 2);
        if !rich {
            notes.push("no pair-span contains a third element".into());
        }
        Some(rich)
    } else {
        None
    };

    let bound = if q_even {
        (q as i128 - 8) / 2
    } else {
        (q as i128 - 7) / 2
    };
    let delta_bound_ok = delta == 0 || (delta as i128) <= bound;
    if !delta_bound_ok {
        notes.push(format!("deficiency {delta} exceeds the bound {bound}"));
    }

    Ok(THypothesesReport {
        pairwise_points,
        triples_skew,
        spans_ambient,
        span_dims_admissible,
        pair_span_rich,
        delta,
        delta_bound_ok,
        notes,
    })
}

/// Coverage counts over all points of all elements. A point on three or
/// more elements contradicts the order-1 axioms and is an error.
fn coverage_map(elements: &[Subspace]) -> Result<BTreeMap<Vec<u32>, usize>, Error> {
    let mut coverage: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    for el in elements {
        for p in el.points() {
            *coverage.entry(p).or_insert(0) += 1;
        }
    }
    if let Some((p, &c)) = coverage.iter().find(|(_, &c)| c > 2) {
        return Err(Error::CoverageViolation {
            point: p.clone(),
            count: c,
        });
    }
    Ok(coverage)
}

/// Points lying on at most one element, with their coverage counts.
/// With `include_uncovered`, ambient points on no element are listed too
/// (count 0); otherwise only points of the union appear (count 1).
pub fn contact_points(
    family: &DualArcFamily,
    include_uncovered: bool,
) -> Result<Vec<(Vec<u32>, usize)>, Error> {
    if family.order != 1 {
        return Err(Error::InvalidParameter(
            "contact points are defined for order-1 families".into(),
        ));
    }
    let coverage = coverage_map(&family.elements)?;
    let mut contacts: Vec<(Vec<u32>, usize)> = coverage
        .iter()
        .filter(|(_, &c)| c <= 1)
        .map(|(p, &c)| (p.clone(), c))
        .collect();
    if include_uncovered {
        for p in enumerate_points(&family.field, family.ambient_dim()) {
            if !coverage.contains_key(&p) {
                contacts.push((p, 0));
            }
        }
        contacts.sort();
    }
    Ok(contacts)
}

/// The span of all points covered by exactly one element. For the full
/// order-1 construction family this is the nucleus (dimension n, q even)
/// or the whole space (q odd, not extendable).
pub fn nucleus_of_family(family: &DualArcFamily) -> Result<NucleusOutcome, Error> {
    if family.order != 1 || family.kind != FamilyKind::Dual {
        return Err(Error::InvalidParameter(
            "the nucleus is defined for dual families of order 1".into(),
        ));
    }
    let coverage = coverage_map(&family.elements)?;
    let mut span = Subspace::empty(&family.field, family.ambient_dim());
    for (p, &c) in &coverage {
        if c == 1 {
            span = span.span_with_vector(p)?;
        }
    }
    let n = family.params[1];
    let q_even = family.field.order() % 2 == 0;
    if span.dim() == n {
        if !q_even {
            return Err(Error::Internal(
                "nucleus dimension n reached for odd q".into(),
            ));
        }
        Ok(NucleusOutcome::Nucleus(span))
    } else if span.is_full() {
        if q_even {
            return Err(Error::Internal(
                "singly covered points span the whole space for even q".into(),
            ));
        }
        Ok(NucleusOutcome::NotExtendable {
            span_dim: span.dim(),
        })
    } else {
        Err(Error::Internal(format!(
            "singly covered points span dimension {}, expected {n} or the whole space",
            span.dim()
        )))
    }
}

/// Classification of a distinct pair-span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoNSpaceClass {
    pub span: Subspace,
    /// Indices of all family elements contained in the span.
    pub members: Vec<usize>,
    pub kind: SpanClassKind,
    /// For big classes: the plane meeting every member in a line.
    pub special_plane: Option<Subspace>,
}

impl TwoNSpaceClass {
    pub fn member_count(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanClassKind {
    Small,
    Pair,
    Big,
}

/// Groups the spans of element pairs into classes by member count: 1, 2 or
/// at least q - delta. For each big class the special plane spanned by
/// three pairwise intersection points is computed and its line/avoidance
/// properties are checked. Any other member count contradicts the
/// structure theory and is an error.
pub fn classify_pair_spans(
    family: &DualArcFamily,
    delta: usize,
) -> Result<Vec<TwoNSpaceClass>, Error> {
    if family.order != 1 {
        return Err(Error::InvalidParameter(
            "pair-span classification applies to order-1 families".into(),
        ));
    }
    let q = family.field.order();
    let big_threshold = (q as i128 - delta as i128).max(3) as usize;
    let mut classes = Vec::new();
    let mut table: Vec<(Vec<Vec<u32>>, (Subspace, Vec<usize>))> =
        pair_span_table(family).into_iter().collect();
    table.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, (span, members)) in table {
        let kind = match members.len() {
            1 => SpanClassKind::Small,
            2 => SpanClassKind::Pair,
            c if c >= big_threshold => SpanClassKind::Big,
            c => return Err(Error::UnclassifiablePairSpan { count: c }),
        };
        let special_plane = if kind == SpanClassKind::Big {
            let (a, b, c) = (members[0], members[1], members[2]);
            let q12 = meet_of(family, &[a, b]);
            let q13 = meet_of(family, &[a, c]);
            let q23 = meet_of(family, &[b, c]);
            let plane = q12
                .span_with(&q13)
                .and_then(|s| s.span_with(&q23))
                .expect("validated family");
            if plane.dim() != 2 {
                return Err(Error::InvalidFamily(format!(
                    "three members of a big span have collinear intersection points (dimension {})",
                    plane.dim()
                )));
            }
            for &m in &members {
                let line = family.elements[m].meet(&plane).expect("validated family");
                if line.dim() != 1 {
                    return Err(Error::InvalidFamily(format!(
                        "member {m} meets the special plane in dimension {}",
                        line.dim()
                    )));
                }
            }
            for i in 0..family.len() {
                if members.contains(&i) {
                    continue;
                }
                let cut = family.elements[i].meet(&plane).expect("validated family");
                if cut.dim() != -1 {
                    return Err(Error::InvalidFamily(format!(
                        "outside element {i} touches the special plane in dimension {}",
                        cut.dim()
                    )));
                }
            }
            Some(plane)
        } else {
            None
        };
        classes.push(TwoNSpaceClass {
            span,
            members,
            kind,
            special_plane,
        });
    }
    Ok(classes)
}

/// Depth-first search state for one missing element: grows candidate
/// subspaces from contact points in ascending point order.
struct ElementSearch<'a> {
    field: Arc<Field>,
    ambient: usize,
    target: isize,
    remaining: usize,
    elements: &'a [Subspace],
    coverage: &'a BTreeMap<Vec<u32>, usize>,
    candidates: &'a [Vec<u32>],
    seen: HashSet<Vec<Vec<u32>>>,
    found: Vec<Subspace>,
}

impl ElementSearch<'_> {
    fn run(mut self) -> Vec<Subspace> {
        let empty = Subspace::empty(&self.field, self.ambient);
        self.grow(&empty, 0);
        self.found
            .sort_by(|a, b| a.basis().cmp(b.basis()));
        self.found
    }

    fn grow(&mut self, span: &Subspace, from: usize) {
        for idx in from..self.candidates.len() {
            let p = &self.candidates[idx];
            if span.contains_vector(p).expect("candidates live in the ambient space") {
                continue;
            }
            let next = span
                .span_with_vector(p)
                .expect("candidates live in the ambient space");
            if !self.seen.insert(basis_key(&next)) {
                continue;
            }
            // a missing element has at most `remaining` points that are
            // not contact points of the current family (its own unique
            // point plus one meet per other still-missing element), and
            // the same bound holds for every subspace of it
            let mut uncontacted = 0usize;
            let mut overcovered = false;
            for pt in next.points() {
                match self.coverage.get(&pt).copied().unwrap_or(0) {
                    0 => uncontacted += 1,
                    1 => {}
                    _ => {
                        overcovered = true;
                        break;
                    }
                }
            }
            if overcovered || uncontacted > self.remaining {
                continue;
            }
            if next.dim() == self.target {
                let meets_all = self.elements.iter().all(|e| {
                    next.meet(e).expect("validated family").dim() == 0
                });
                if meets_all {
                    self.found.push(next);
                }
            } else {
                self.grow(&next, idx + 1);
            }
        }
    }
}

fn acceptable_elements(
    family: &DualArcFamily,
    elements: &[Subspace],
    remaining: usize,
) -> Result<Vec<Subspace>, Error> {
    let coverage = coverage_map(elements)?;
    let candidates: Vec<Vec<u32>> = coverage
        .iter()
        .filter(|(_, &c)| c == 1)
        .map(|(p, _)| p.clone())
        .collect();
    Ok(ElementSearch {
        field: family.field.clone(),
        ambient: family.ambient_dim(),
        target: family.params[1],
        remaining,
        elements,
        coverage: &coverage,
        candidates: &candidates,
        seen: HashSet::new(),
        found: Vec::new(),
    }
    .run())
}

fn complete_family(
    family: &DualArcFamily,
    elements: &mut Vec<Subspace>,
    remaining: usize,
    best: &mut usize,
) -> Result<bool, Error> {
    if remaining == 0 {
        return Ok(true);
    }
    let step = acceptable_elements(family, elements, remaining)?;
    for x in step {
        elements.push(x);
        *best = (*best).max(elements.len() - family.len());
        if complete_family(family, elements, remaining - 1, best)? {
            return Ok(true);
        }
        elements.pop();
    }
    Ok(false)
}

/// Completes a deficient order-1 dual family to the full size
/// (q^{n+1}-1)/(q-1) by searching for new elements among the contact
/// points. Every added element consists of former contact points and
/// meets each existing element in exactly one point; the completed family
/// is verified exhaustively before being returned.
pub fn extend_deficient(family: &DualArcFamily, delta: usize) -> Result<DualArcFamily, Error> {
    let report = verify_t_d1_hypotheses(family, delta)?;
    if !report.all_hold() {
        let mut reasons: Vec<&str> = Vec::new();
        if !report.pairwise_points {
            reasons.push("pairwise intersections");
        }
        if !report.triples_skew {
            reasons.push("triple skewness");
        }
        if !report.spans_ambient {
            reasons.push("ambient span");
        }
        if !report.span_dims_admissible {
            reasons.push("span dimensions");
        }
        if report.pair_span_rich == Some(false) {
            reasons.push("pair-span richness");
        }
        if !report.delta_bound_ok {
            reasons.push("deficiency bound");
        }
        return Err(Error::HypothesesNotMet(reasons.join(", ")));
    }
    if delta == 0 {
        return Ok(family.clone());
    }
    let mut elements = family.elements.clone();
    let mut best = 0usize;
    if !complete_family(family, &mut elements, delta, &mut best)? {
        return Err(Error::ExtensionFailed {
            recovered: best,
            missing: delta - best,
        });
    }
    let extended = DualArcFamily::with_field(
        &family.field,
        FamilyKind::Dual,
        family.order,
        family.params.clone(),
        elements,
    )?;
    let check = verify(&extended, VerifyMode::Exhaustive);
    if !check.passed() {
        return Err(Error::Internal(
            "completed family fails exhaustive verification".into(),
        ));
    }
    Ok(extended)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::veronese::VeroneseContext;

    fn construction(q: (u64, u32), n: usize, d: usize) -> DualArcFamily {
        let field = Field::new(q.0, q.1).unwrap();
        VeroneseContext::new(&field, n, d)
            .unwrap()
            .build_dual_arc()
            .unwrap()
    }

    fn sorted_keys(family: &DualArcFamily) -> Vec<Vec<Vec<u32>>> {
        let mut keys: Vec<_> = family.elements().iter().map(basis_key).collect();
        keys.sort();
        keys
    }

    #[test]
    fn family_construction_validates_invariants() {
        let fam = construction((3, 1), 2, 1);
        let field = fam.field().clone();
        let els = fam.elements().to_vec();

        // wrong parameter count
        assert!(DualArcFamily::new(FamilyKind::Dual, 1, vec![5, 2], els.clone()).is_err());
        // dual parameters must strictly decrease
        assert!(DualArcFamily::new(FamilyKind::Dual, 1, vec![5, 2, 2], els.clone()).is_err());
        // element dimension must match params[1]
        assert!(DualArcFamily::new(FamilyKind::Dual, 1, vec![5, 3, 0], els.clone()).is_err());
        // arc parameters must strictly increase below the ambient
        assert!(DualArcFamily::new(FamilyKind::Arc, 1, vec![5, 2, 2], els.clone()).is_err());
        assert!(DualArcFamily::new(FamilyKind::Arc, 1, vec![5, 2, 5], els.clone()).is_err());
        // order 0 unsupported
        assert!(DualArcFamily::new(FamilyKind::Dual, 0, vec![5, 2], els.clone()).is_err());
        // empty families need with_field
        assert!(DualArcFamily::new(FamilyKind::Dual, 1, vec![5, 2, 0], vec![]).is_err());
        let empty =
            DualArcFamily::with_field(&field, FamilyKind::Dual, 1, vec![5, 2, 0], vec![]).unwrap();
        assert!(empty.is_empty());

        // ambient mismatch
        let small = Subspace::from_rows(&field, 3, &[vec![1, 0, 0, 0]]).unwrap();
        assert!(DualArcFamily::new(FamilyKind::Dual, 1, vec![5, 2, 0], vec![small]).is_err());
    }

    #[test]
    fn source_dim_recovers_n_on_both_sides() {
        let fam = construction((2, 1), 2, 2);
        assert_eq!(fam.source_dim(), 2);
        assert_eq!(dualize(&fam).source_dim(), 2);
        let fam31 = construction((2, 1), 3, 1);
        assert_eq!(fam31.source_dim(), 3);
        assert_eq!(dualize(&fam31).source_dim(), 3);
    }

    #[test]
    fn file_round_trip_is_canonical() {
        let fam = construction((3, 1), 2, 1);
        let text = fam.to_text();
        assert!(text.starts_with("3 2 1 13 dual 5 2 0\n"));
        let back = DualArcFamily::from_text(&text).unwrap();
        assert_eq!(back.kind(), FamilyKind::Dual);
        assert_eq!(back.order(), 1);
        assert_eq!(back.params(), fam.params());
        assert_eq!(sorted_keys(&back), sorted_keys(&fam));
        // serialization is order-independent: a reversed in-memory family
        // writes the same bytes
        let reversed = DualArcFamily::new(
            FamilyKind::Dual,
            1,
            fam.params().to_vec(),
            fam.elements().iter().rev().cloned().collect(),
        )
        .unwrap();
        assert_eq!(reversed.to_text(), text);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn from_text_accepts_header_defaults_and_prime_powers() {
        let field = Field::new(2, 2).unwrap();
        let fam = VeroneseContext::new(&field, 2, 1)
            .unwrap()
            .build_dual_arc()
            .unwrap();
        let text = fam.to_text();
        assert!(text.starts_with("4 2 1 21 dual 5 2 0\n"));
        // strip kind and params from the header: construction defaults
        let stripped = text.replacen("4 2 1 21 dual 5 2 0", "4 2 1 21", 1);
        let back = DualArcFamily::from_text(&stripped).unwrap();
        assert_eq!(back.params(), &[5, 2, 0]);
        assert_eq!(back.field().degree(), 2);
        // kind without params: arc defaults complement the dual ones
        let arc = dualize(&fam);
        let kind_only = arc
            .to_text()
            .replacen("4 2 1 21 arc 5 2 4", "4 2 1 21 arc", 1);
        assert_ne!(kind_only, arc.to_text());
        let back = DualArcFamily::from_text(&kind_only).unwrap();
        assert_eq!(back.params(), &[5, 2, 4]);
        assert_eq!(back.kind(), FamilyKind::Arc);
    }

    #[test]
    fn from_text_rejects_malformed_input() {
        assert!(DualArcFamily::from_text("").is_err());
        assert!(DualArcFamily::from_text("3 2 1\n").is_err());
        assert!(DualArcFamily::from_text("3 2 1 zebra\n").is_err());
        let fam = construction((3, 1), 2, 1);
        let text = fam.to_text();
        // wrong count
        let bad = text.replacen("3 2 1 13", "3 2 1 12", 1);
        assert!(DualArcFamily::from_text(&bad).is_err());
        // truncated final block
        let truncated = &text[..text.len() - 8];
        assert!(DualArcFamily::from_text(truncated).is_err());
        // unknown kind token
        let bad = text.replacen("dual", "primal", 1);
        assert!(DualArcFamily::from_text(&bad).is_err());
    }

    #[test]
    fn verify_passes_construction_families_exhaustively() {
        for (q, n, d, count) in [((3u64, 1u32), 2usize, 1usize, 13usize), ((2, 1), 2, 2, 7)] {
            let fam = construction(q, n, d);
            assert_eq!(fam.len(), count);
            let report = verify(&fam, VerifyMode::Exhaustive);
            assert!(report.axioms_hold, "{report}");
            assert!(report.regular, "{report}");
            assert_eq!(report.span_dim, fam.params()[0]);
            assert!(report.to_kv().contains("axioms_hold=true"));
        }
    }

    #[test]
    fn verify_flags_a_mutated_element() {
        let fam = construction((3, 1), 2, 1);
        let field = fam.field().clone();
        // a plane chosen to break the meet pattern
        let rogue = Subspace::from_rows(
            &field,
            5,
            &[
                vec![1, 0, 0, 0, 0, 1],
                vec![0, 1, 0, 0, 1, 0],
                vec![0, 0, 1, 1, 0, 0],
            ],
        )
        .unwrap();
        let mut els = fam.elements().to_vec();
        els[4] = rogue;
        let mutated =
            DualArcFamily::new(FamilyKind::Dual, 1, fam.params().to_vec(), els).unwrap();
        let report = verify(&mutated, VerifyMode::Exhaustive);
        assert!(!report.axioms_hold);
        assert!(!report.failures.is_empty());
        let f = &report.failures[0];
        assert_eq!(combine(&mutated, &f.indices).dim(), f.actual);
    }

    #[test]
    fn verify_is_vacuous_for_tiny_families() {
        let fam = construction((3, 1), 2, 1);
        let single =
            DualArcFamily::new(FamilyKind::Dual, 1, fam.params().to_vec(), vec![
                fam.element(0).clone(),
            ])
            .unwrap();
        let report = verify(&single, VerifyMode::Exhaustive);
        // no pairs or triples exist; the lone element has the right
        // dimension, but one plane cannot span PG(5,3)
        assert!(report.axioms_hold);
        assert!(!report.regular);
        assert_eq!(report.span_dim, 2);
    }

    #[test]
    fn sampled_verification_is_deterministic() {
        for (p, e) in [(2u64, 2u32), (5, 1)] {
            let field = Field::new(p, e).unwrap();
            let fam = VeroneseContext::new(&field, 2, 1)
                .unwrap()
                .build_dual_arc()
                .unwrap();
            let mode = VerifyMode::Sampled {
                per_level: 500,
                seed: DEFAULT_SAMPLE_SEED,
            };
            let a = verify(&fam, mode);
            let b = verify(&fam, mode);
            assert!(a.axioms_hold && a.regular, "{a}");
            assert_eq!(a, b);
            assert!(a.mode.contains("seed=42"));
        }
    }

    #[test]
    fn dualize_complements_parameters_and_is_an_involution() {
        for q in [(2u64, 1u32), (3, 1)] {
            let fam = construction(q, 2, 2);
            assert_eq!(fam.params(), &[9, 5, 2, 0]);
            let arc = dualize(&fam);
            assert_eq!(arc.kind(), FamilyKind::Arc);
            assert_eq!(arc.params(), &[9, 3, 6, 8]);
            let report = verify(&arc, VerifyMode::Exhaustive);
            assert!(report.axioms_hold && report.regular, "{report}");
            let back = dualize(&arc);
            assert_eq!(back, fam);
        }
    }

    #[test]
    fn t_d1_hypotheses_hold_for_deficient_construction_families() {
        let fam = construction((3, 2), 2, 1);
        assert_eq!(fam.len(), 91);
        let deficient = fam.without(&[17]).unwrap();
        let report = verify_t_d1_hypotheses(&deficient, 1).unwrap();
        assert!(report.all_hold(), "{report}");
        assert_eq!(report.pair_span_rich, None);
        assert!(report.delta_bound_ok);

        // q = 8 is even: property (5) engages and holds on the full family
        let fam8 = construction((2, 3), 2, 1);
        let report8 = verify_t_d1_hypotheses(&fam8, 0).unwrap();
        assert!(report8.all_hold(), "{report8}");
        assert_eq!(report8.pair_span_rich, Some(true));

        // delta = 0 passes the bound check even when (q-7)/2 < 0
        let fam3 = construction((3, 1), 2, 1);
        let report3 = verify_t_d1_hypotheses(&fam3, 0).unwrap();
        assert!(report3.all_hold(), "{report3}");
    }

    #[test]
    fn t_d1_hypotheses_argument_checks() {
        let fam = construction((3, 1), 2, 1);
        // wrong deficiency accounting
        assert!(verify_t_d1_hypotheses(&fam, 1).is_err());
        // wrong order
        let fam2 = construction((2, 1), 2, 2);
        assert!(verify_t_d1_hypotheses(&fam2, 0).is_err());
        // arc side rejected
        assert!(verify_t_d1_hypotheses(&dualize(&fam), 0).is_err());
    }

    /// Embedding the q=3 family into a hyperplane of PG(6,3) breaks the
    /// spanning property (3) while keeping sizes and meets intact.
    #[test]
    fn t_d1_hypotheses_detect_a_non_spanning_family() {
        let fam = construction((3, 1), 2, 1);
        let field = fam.field().clone();
        let embedded: Vec<Subspace> = fam
            .elements()
            .iter()
            .map(|el| {
                let rows: Vec<Vec<u32>> = el
                    .basis()
                    .iter()
                    .map(|r| {
                        let mut v = r.clone();
                        v.push(0);
                        v
                    })
                    .collect();
                Subspace::from_rows(&field, 6, &rows).unwrap()
            })
            .collect();
        let flat = DualArcFamily::new(FamilyKind::Dual, 1, vec![6, 2, 0], embedded).unwrap();
        let report = verify_t_d1_hypotheses(&flat, 0).unwrap();
        assert!(report.pairwise_points);
        assert!(report.triples_skew);
        assert!(!report.spans_ambient);
        assert!(!report.all_hold());
        assert!(extend_deficient(&flat, 0).is_err());
    }

    #[test]
    fn contact_points_of_the_full_family_are_the_diagonal_images() {
        let field = Field::new(3, 1).unwrap();
        let ctx = VeroneseContext::new(&field, 2, 1).unwrap();
        let fam = ctx.build_dual_arc().unwrap();
        let contacts = contact_points(&fam, false).unwrap();
        assert_eq!(contacts.len(), 13);
        assert!(contacts.iter().all(|(_, c)| *c == 1));
        // each contact point is the normalized diagonal image of a source
        // point and lies on the matching element
        for (i, p) in enumerate_points(&field, 2).iter().enumerate() {
            let mut z = ctx.diagonal(p).unwrap();
            let lead = z.iter().find(|&&v| v != 0).copied().unwrap();
            let inv = field.inv(lead).unwrap();
            for v in z.iter_mut() {
                *v = field.mul(*v, inv);
            }
            assert!(contacts.iter().any(|(c, _)| *c == z));
            assert!(fam.element(i).contains_vector(&z).unwrap());
        }
    }

    #[test]
    fn contact_points_grow_after_a_removal() {
        let fam = construction((3, 1), 2, 1);
        let deficient = fam.without(&[0]).unwrap();
        let within = contact_points(&deficient, false).unwrap();
        // 12 surviving diagonal points plus 12 points freed by the removal
        assert_eq!(within.len(), 24);
        let with_ambient = contact_points(&deficient, true).unwrap();
        // the removed element's own diagonal point is now uncovered, so
        // the full contact set has 25 points on the removed element's
        // orbit plus every ambient point on no element at all
        let uncovered = with_ambient.iter().filter(|(_, c)| *c == 0).count();
        let single = with_ambient.iter().filter(|(_, c)| *c == 1).count();
        assert_eq!(single, 24);
        let removed_contacts: Vec<&Vec<u32>> = with_ambient
            .iter()
            .filter(|(p, _)| fam.element(0).contains_vector(p).unwrap())
            .map(|(p, _)| p)
            .collect();
        assert_eq!(removed_contacts.len(), 13);
        // PG(5,3) has 364 points, 78 pairwise meets and 13 diagonal points
        // cover 91 of them when the family is full
        assert_eq!(uncovered, 364 - 91 + 1);

        let empty = DualArcFamily::with_field(
            fam.field(),
            FamilyKind::Dual,
            1,
            vec![5, 2, 0],
            vec![],
        )
        .unwrap();
        assert!(contact_points(&empty, false).unwrap().is_empty());
    }

    #[test]
    fn contact_points_report_a_coverage_violation() {
        let field = Field::new(3, 1).unwrap();
        // three planes through a common point pass the static family
        // checks but put that point on three elements
        let make = |rows: &[Vec<u32>]| Subspace::from_rows(&field, 5, rows).unwrap();
        let els = vec![
            make(&[
                vec![1, 0, 0, 0, 0, 0],
                vec![0, 1, 0, 0, 0, 0],
                vec![0, 0, 1, 0, 0, 0],
            ]),
            make(&[
                vec![1, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 1, 0],
            ]),
            make(&[
                vec![1, 0, 0, 0, 0, 0],
                vec![0, 1, 0, 1, 0, 0],
                vec![0, 0, 1, 0, 1, 1],
            ]),
        ];
        let fam = DualArcFamily::new(FamilyKind::Dual, 1, vec![5, 2, 0], els).unwrap();
        match contact_points(&fam, false) {
            Err(Error::CoverageViolation { point, count }) => {
                assert_eq!(point, vec![1, 0, 0, 0, 0, 0]);
                assert_eq!(count, 3);
            }
            other => panic!("expected a coverage violation, got {other:?}"),
        }
    }

    #[test]
    fn nucleus_of_family_agrees_with_the_construction_route() {
        for (p, e) in [(2u64, 1u32), (2, 2)] {
            let field = Field::new(p, e).unwrap();
            let ctx = VeroneseContext::new(&field, 2, 1).unwrap();
            let fam = ctx.build_dual_arc().unwrap();
            let from_family = nucleus_of_family(&fam).unwrap();
            let from_ctx = ctx.nucleus().unwrap();
            assert_eq!(from_family, from_ctx);
        }
        let fam3 = construction((3, 1), 2, 1);
        match nucleus_of_family(&fam3).unwrap() {
            NucleusOutcome::NotExtendable { span_dim } => assert_eq!(span_dim, 5),
            other => panic!("expected non-extendable, got {other:?}"),
        }
    }

    #[test]
    fn pair_spans_of_the_full_family_are_big_with_special_planes() {
        let fam = construction((3, 1), 2, 1);
        let classes = classify_pair_spans(&fam, 0).unwrap();
        // 78 pairs collapse onto 13 distinct spans, each with q+1 members
        assert_eq!(classes.len(), 13);
        for class in &classes {
            assert_eq!(class.kind, SpanClassKind::Big);
            assert_eq!(class.member_count(), 4);
            assert_eq!(class.span.dim(), 4);
            let plane = class.special_plane.as_ref().unwrap();
            assert_eq!(plane.dim(), 2);
            assert!(class.span.contains(plane).unwrap());
        }
        // every element lies in exactly (q^2-1)/(q-1) = 4 big spans
        for i in 0..fam.len() {
            let through = classes.iter().filter(|c| c.members.contains(&i)).count();
            assert_eq!(through, 4);
        }
    }

    #[test]
    fn a_two_element_family_has_one_pair_class() {
        let fam = construction((3, 1), 2, 1);
        let two = DualArcFamily::new(
            FamilyKind::Dual,
            1,
            fam.params().to_vec(),
            vec![fam.element(0).clone(), fam.element(1).clone()],
        )
        .unwrap();
        let classes = classify_pair_spans(&two, 0).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].kind, SpanClassKind::Pair);
        assert_eq!(classes[0].members, vec![0, 1]);
        assert!(classes[0].special_plane.is_none());
    }

    #[test]
    fn extension_recovers_a_removed_element() {
        let fam = construction((3, 2), 2, 1);
        let deficient = fam.without(&[17]).unwrap();
        let extended = extend_deficient(&deficient, 1).unwrap();
        assert_eq!(extended.len(), 91);
        assert_eq!(sorted_keys(&extended), sorted_keys(&fam));
        // the recovered element is appended last and equals the removed one
        assert_eq!(extended.element(90), fam.element(17));
    }

    #[test]
    fn extension_handles_the_trivial_and_failing_cases() {
        let fam = construction((3, 1), 2, 1);
        let same = extend_deficient(&fam, 0).unwrap();
        assert_eq!(same, fam);
        // deficiency out of bounds for q=3: bound (3-7)/2 < 1
        let deficient = fam.without(&[3]).unwrap();
        match extend_deficient(&deficient, 1) {
            Err(Error::HypothesesNotMet(reasons)) => {
                assert!(reasons.contains("deficiency bound"), "{reasons}");
            }
            other => panic!("expected rejected hypotheses, got {other:?}"),
        }
    }
}
