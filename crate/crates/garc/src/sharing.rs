//! Threshold secret sharing on arc families.
//!
//! Both schemes start from a verified arc family of PG(n, q), embed it into
//! a uniformly random hyperplane of PG(n+1, q) through a uniformly random
//! change of basis, and hand the embedded elements to the participants as
//! shares. Any k = order + 2 shares span the hyperplane; fewer trace out
//! strictly smaller subspaces, and the family's span dimensions translate
//! into exact guessing probabilities for an attacker holding i < k shares.
//!
//! * [`SchemeVariant::HyperplaneSecret`]: the hyperplane itself is the
//!   secret. i shares leave (q^(n+1-d_i)-1)/(q-1) consistent hyperplanes,
//!   with d_0 = -1 for the blind attacker.
//! * [`SchemeVariant::SubspaceSecret`]: one element is held back as the
//!   secret and a superspace of it poking out of the hyperplane is
//!   published; k shares recover the secret as the meet of their span with
//!   the published space. i shares leave (q^(d_{i+1}-d_i+1)-1)/(q-1)
//!   candidates inside the published space.
//!
//! [`attack_probability`] gives the exact rationals, [`simulate_attack`]
//! checks them by seeded Monte Carlo over fixed RNG substreams, and
//! [`twisted_cubic_secret`] walks the worked example whose secret is a
//! plane avoiding a twisted cubic inside one element.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use num::rational::BigRational;
use num::{BigInt, One, ToPrimitive};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arcs::{verify, DualArcFamily, FamilyKind, VerifyMode};
use crate::gf::Field;
use crate::linalg::{
    enumerate_points, field_from_order, random_superspace, random_superspace_within, Subspace,
};
use crate::veronese::VeroneseContext;
use crate::{exec, Error};

/// Monte-Carlo trials are split over this many RNG substreams; chunk c uses
/// stream c+1 of the master seed, so the matched-trial count is independent
/// of the worker count and of the `parallel` feature.
const SIMULATION_CHUNKS: u64 = 64;

/// Which of the two schemes a parameter set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeVariant {
    /// The secret is a hyperplane of PG(n+1, q); every embedded element is
    /// a share.
    HyperplaneSecret,
    /// The secret is one embedded element; the others are the shares and a
    /// superspace of the secret is published.
    SubspaceSecret,
}

impl SchemeVariant {
    /// Numeric tag used in share and public file headers.
    pub fn number(self) -> u8 {
        match self {
            SchemeVariant::HyperplaneSecret => 1,
            SchemeVariant::SubspaceSecret => 2,
        }
    }

    pub fn from_number(tag: u8) -> Result<SchemeVariant, Error> {
        match tag {
            1 => Ok(SchemeVariant::HyperplaneSecret),
            2 => Ok(SchemeVariant::SubspaceSecret),
            other => Err(Error::Parse(format!("unknown scheme tag {other}"))),
        }
    }
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeVariant::HyperplaneSecret => write!(f, "hyperplane-secret"),
            SchemeVariant::SubspaceSecret => write!(f, "subspace-secret"),
        }
    }
}

/// Threshold data read off an arc family.
///
/// A family of order k-2 in PG(n, q) fixes the span dimensions
/// d_1 < .. < d_{k-1} of its element subsets; with the conventions d_0 = -1
/// and d_k = n they drive every probability below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeParams {
    variant: SchemeVariant,
    field: Arc<Field>,
    arc_params: Vec<isize>,
    k: usize,
    participant_count: usize,
}

impl SchemeParams {
    /// Reads the threshold data off an arc family. The subspace-secret
    /// scheme keeps one element back as the secret, so it serves one
    /// participant fewer than the family has elements.
    pub fn from_arc(variant: SchemeVariant, arc: &DualArcFamily) -> Result<SchemeParams, Error> {
        if arc.kind() != FamilyKind::Arc {
            return Err(Error::InvalidParameter(
                "secret sharing builds on arc families; dualize first".into(),
            ));
        }
        let k = arc.order() + 2;
        let held_back = match variant {
            SchemeVariant::HyperplaneSecret => 0,
            SchemeVariant::SubspaceSecret => 1,
        };
        let participant_count = arc.len() - held_back;
        if participant_count < k {
            return Err(Error::InvalidParameter(format!(
                "{participant_count} participants cannot meet a threshold of {k}"
            )));
        }
        Ok(SchemeParams {
            variant,
            field: Arc::clone(arc.field()),
            arc_params: arc.params().to_vec(),
            k,
            participant_count,
        })
    }

    pub fn variant(&self) -> SchemeVariant {
        self.variant
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.order()
    }

    /// Source dimension n; shares live in PG(n+1, q).
    pub fn n(&self) -> isize {
        self.arc_params[0]
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn arc_params(&self) -> &[isize] {
        &self.arc_params
    }

    pub fn participant_count(&self) -> usize {
        self.participant_count
    }

    /// Span dimensions with the boundary conventions: d_0 = -1, then
    /// d_1..d_{k-1} from the family, then d_k = n.
    pub fn dims(&self) -> Vec<isize> {
        let mut d = Vec::with_capacity(self.k + 1);
        d.push(-1);
        d.extend_from_slice(&self.arc_params[1..]);
        d.push(self.n());
        d
    }

    /// Projective dimension of the dealt secret.
    pub fn secret_dim(&self) -> isize {
        match self.variant {
            SchemeVariant::HyperplaneSecret => self.n(),
            SchemeVariant::SubspaceSecret => self.arc_params[1],
        }
    }
}

/// Exact probability that an attacker holding i shares guesses the secret.
///
/// i shares span a d_i-dimensional space, and the secrets consistent with
/// that span are counted by a Gaussian coefficient that collapses to a
/// geometric sum: the probability is (q-1)/(q^(n+1-d_i)-1) for the
/// hyperplane scheme and (q-1)/(q^(d_{i+1}-d_i+1)-1) for the subspace
/// scheme. The hyperplane scheme needs i < k; the subspace scheme also
/// accepts i = k, where the convention d_k = n forces probability 1.
pub fn attack_probability(params: &SchemeParams, i: usize) -> Result<BigRational, Error> {
    let dims = params.dims();
    let k = params.k();
    let exponent = match params.variant() {
        SchemeVariant::HyperplaneSecret => {
            if i >= k {
                return Err(Error::InvalidParameter(format!(
                    "i = {i} is out of range, the hyperplane scheme needs i < k = {k}"
                )));
            }
            params.n() + 1 - dims[i]
        }
        SchemeVariant::SubspaceSecret => {
            if i > k {
                return Err(Error::InvalidParameter(format!(
                    "i = {i} is out of range, the subspace scheme needs i <= k = {k}"
                )));
            }
            if i == k {
                1
            } else {
                dims[i + 1] - dims[i] + 1
            }
        }
    };
    let q = BigInt::from(params.q());
    Ok(BigRational::new(
        BigInt::from(params.q() - 1),
        q.pow(exponent as u32) - BigInt::one(),
    ))
}

/// Everything one deal produced: the per-participant shares, the published
/// space for the subspace scheme, and the dealer's secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareBundle {
    params: SchemeParams,
    public: Option<Subspace>,
    shares: Vec<(u32, Subspace)>,
    secret: Subspace,
    seed: u64,
}

impl ShareBundle {
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    /// The published superspace of the secret (subspace scheme only).
    pub fn public(&self) -> Option<&Subspace> {
        self.public.as_ref()
    }

    /// Participant id, share pairs; ids start at 1.
    pub fn shares(&self) -> &[(u32, Subspace)] {
        &self.shares
    }

    pub fn share(&self, id: u32) -> Option<&Subspace> {
        self.shares.iter().find(|(i, _)| *i == id).map(|(_, s)| s)
    }

    pub fn secret(&self) -> &Subspace {
        &self.secret
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The reconstruction view: scheme constants plus the published space,
    /// never the secret.
    pub fn public_info(&self) -> PublicInfo {
        PublicInfo {
            variant: self.params.variant,
            field: Arc::clone(&self.params.field),
            n: self.params.n(),
            k: self.params.k,
            participant_count: self.params.participant_count,
            guess_space: self.public.clone(),
        }
    }

    /// The per-participant file view of one share.
    pub fn share_file(&self, id: u32) -> Option<ShareFile> {
        self.share(id).map(|share| ShareFile {
            variant: self.params.variant,
            n: self.params.n(),
            k: self.params.k,
            participant: id,
            share: share.clone(),
        })
    }
}

/// One participant's share as written to disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareFile {
    pub variant: SchemeVariant,
    pub n: isize,
    pub k: usize,
    pub participant: u32,
    pub share: Subspace,
}

impl ShareFile {
    /// Header `scheme=<1|2> q n k participant=<id>`, then the subspace
    /// block.
    pub fn to_text(&self) -> String {
        format!(
            "scheme={} {} {} {} participant={}\n{}",
            self.variant.number(),
            self.share.field().order(),
            self.n,
            self.k,
            self.participant,
            self.share.to_text(),
        )
    }

    pub fn from_text(text: &str) -> Result<ShareFile, Error> {
        let (header, rest) = split_header(text)?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(Error::Parse(format!(
                "share header needs 5 tokens, got {}",
                tokens.len()
            )));
        }
        let variant = SchemeVariant::from_number(parse_num(tagged(tokens[0], "scheme")?, "scheme")?)?;
        let q: u64 = parse_num(tokens[1], "field order")?;
        let n: isize = parse_num(tokens[2], "n")?;
        let k: usize = parse_num(tokens[3], "k")?;
        let participant: u32 = parse_num(tagged(tokens[4], "participant")?, "participant")?;
        check_scheme_header(q, n, k)?;
        let share = Subspace::from_text(rest)?;
        check_scheme_block(&share, q, n, "share")?;
        Ok(ShareFile {
            variant,
            n,
            k,
            participant,
            share,
        })
    }
}

/// The public side of a deal: scheme constants and, for the subspace
/// scheme, the published superspace. Together with k shares this is all
/// reconstruction needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicInfo {
    pub variant: SchemeVariant,
    pub field: Arc<Field>,
    pub n: isize,
    pub k: usize,
    pub participant_count: usize,
    pub guess_space: Option<Subspace>,
}

impl PublicInfo {
    /// Header `scheme=<1|2> q n k participants=<count>`, then the published
    /// subspace block for the subspace scheme.
    pub fn to_text(&self) -> String {
        let header = format!(
            "scheme={} {} {} {} participants={}",
            self.variant.number(),
            self.field.order(),
            self.n,
            self.k,
            self.participant_count,
        );
        match &self.guess_space {
            Some(s) => format!("{header}\n{}", s.to_text()),
            None => format!("{header}\n"),
        }
    }

    pub fn from_text(text: &str) -> Result<PublicInfo, Error> {
        let (header, rest) = split_header(text)?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(Error::Parse(format!(
                "public header needs 5 tokens, got {}",
                tokens.len()
            )));
        }
        let variant = SchemeVariant::from_number(parse_num(tagged(tokens[0], "scheme")?, "scheme")?)?;
        let q: u64 = parse_num(tokens[1], "field order")?;
        let n: isize = parse_num(tokens[2], "n")?;
        let k: usize = parse_num(tokens[3], "k")?;
        let participant_count: usize =
            parse_num(tagged(tokens[4], "participants")?, "participants")?;
        check_scheme_header(q, n, k)?;
        let field = field_from_order(q)?;
        let guess_space = match variant {
            SchemeVariant::HyperplaneSecret => {
                if !rest.trim().is_empty() {
                    return Err(Error::Parse(
                        "the hyperplane scheme publishes no subspace".into(),
                    ));
                }
                None
            }
            SchemeVariant::SubspaceSecret => {
                let s = Subspace::from_text(rest).map_err(|_| {
                    Error::Parse("the subspace scheme needs a published subspace block".into())
                })?;
                check_scheme_block(&s, q, n, "published space")?;
                Some(s)
            }
        };
        Ok(PublicInfo {
            variant,
            field,
            n,
            k,
            participant_count,
            guess_space,
        })
    }
}

fn split_header(text: &str) -> Result<(&str, &str), Error> {
    let mut parts = text.splitn(2, '\n');
    let header = parts
        .next()
        .filter(|h| !h.trim().is_empty())
        .ok_or_else(|| Error::Parse("empty file".into()))?;
    Ok((header, parts.next().unwrap_or("")))
}

fn tagged<'a>(token: &'a str, key: &str) -> Result<&'a str, Error> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected {key}=<value>, got {token}")))
}

fn parse_num<T: std::str::FromStr>(token: &str, what: &str) -> Result<T, Error> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} value {token}")))
}

fn check_scheme_header(q: u64, n: isize, k: usize) -> Result<(), Error> {
    if q < 2 {
        return Err(Error::Parse(format!("field order {q} is not a prime power")));
    }
    if n < 1 {
        return Err(Error::Parse(format!("source dimension {n} is too small")));
    }
    if k < 2 {
        return Err(Error::Parse(format!("threshold {k} is too small")));
    }
    Ok(())
}

fn check_scheme_block(s: &Subspace, q: u64, n: isize, what: &str) -> Result<(), Error> {
    if s.field().order() != q {
        return Err(Error::Parse(format!(
            "the {what} block lives over GF({}), the header says GF({q})",
            s.field().order()
        )));
    }
    if s.ambient_dim() as isize != n + 1 {
        return Err(Error::Parse(format!(
            "the {what} lives in PG({}, q), the header needs PG({}, q)",
            s.ambient_dim(),
            n + 1
        )));
    }
    Ok(())
}

/// coeffs[i] weights rows[i]; the sum is a vector of length `len`.
fn combine_rows(f: &Field, coeffs: &[u32], rows: &[Vec<u32>], len: usize) -> Vec<u32> {
    let mut acc = vec![0u32; len];
    for (c, row) in coeffs.iter().zip(rows) {
        if *c != 0 {
            for (a, b) in acc.iter_mut().zip(row) {
                *a = f.add(*a, f.mul(*c, *b));
            }
        }
    }
    acc
}

fn number_shares(shares: Vec<Subspace>) -> Vec<(u32, Subspace)> {
    shares.into_iter().zip(1u32..).map(|(s, i)| (i, s)).collect()
}

/// Deals a share bundle from a verified arc family.
///
/// The family is embedded into a uniformly random hyperplane of PG(n+1, q)
/// through a uniformly random change of basis, so the shares carry no
/// trace of the construction's coordinate conventions. Equal seeds give
/// equal bundles.
pub fn deal(params: &SchemeParams, arc: &DualArcFamily, seed: u64) -> Result<ShareBundle, Error> {
    let derived = SchemeParams::from_arc(params.variant, arc)?;
    if *params != derived {
        return Err(Error::InvalidParameter(
            "the scheme parameters do not match the arc family".into(),
        ));
    }
    let report = verify(arc, VerifyMode::Exhaustive);
    if !report.passed() {
        return Err(Error::InvalidFamily(format!(
            "the source family fails verification (axioms {}, regularity {})",
            report.axioms_hold, report.regular
        )));
    }

    let f = arc.field();
    let q = f.order();
    let n = params.n() as usize;
    let ambient = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Uniform hyperplane: the perp of a uniform nonzero dual vector (every
    // dual point has exactly q-1 nonzero representatives).
    let hyperplane = loop {
        let v: Vec<u32> = (0..ambient + 1)
            .map(|_| rng.gen_range(0..q) as u32)
            .collect();
        if v.iter().any(|&c| c != 0) {
            break Subspace::from_rows(f, ambient, &[v])?.perp();
        }
    };

    // Uniform invertible change of basis inside the hyperplane.
    let basis_change: Vec<Vec<u32>> = loop {
        let rows: Vec<Vec<u32>> = (0..=n)
            .map(|_| (0..=n).map(|_| rng.gen_range(0..q) as u32).collect())
            .collect();
        if Subspace::from_rows(f, n, &rows)?.rank() == n + 1 {
            break rows;
        }
    };
    let embedding: Vec<Vec<u32>> = basis_change
        .iter()
        .map(|coeffs| combine_rows(f, coeffs, hyperplane.basis(), ambient + 1))
        .collect();
    let embed = |s: &Subspace| -> Result<Subspace, Error> {
        let rows: Vec<Vec<u32>> = s
            .basis()
            .iter()
            .map(|r| combine_rows(f, r, &embedding, ambient + 1))
            .collect();
        let image = Subspace::from_rows(f, ambient, &rows)?;
        debug_assert_eq!(image.dim(), s.dim());
        Ok(image)
    };
    let embedded: Vec<Subspace> = arc.elements().iter().map(embed).collect::<Result<_, _>>()?;

    match params.variant {
        SchemeVariant::HyperplaneSecret => Ok(ShareBundle {
            params: params.clone(),
            public: None,
            shares: number_shares(embedded),
            secret: hyperplane,
            seed,
        }),
        SchemeVariant::SubspaceSecret => {
            let mut embedded = embedded;
            let secret = embedded.remove(rng.gen_range(0..embedded.len()));
            let d1 = params.arc_params[1];
            // Of the superspaces of the secret, roughly one in q lies
            // inside the hyperplane, so rejection is cheap.
            let guess_space = loop {
                let candidate = random_superspace(&secret, d1 + 1, &mut rng)?;
                if !hyperplane.contains(&candidate)? {
                    break candidate;
                }
            };
            Ok(ShareBundle {
                params: params.clone(),
                public: Some(guess_space),
                shares: number_shares(embedded),
                secret,
                seed,
            })
        }
    }
}

/// Recovers the secret from at least k distinct shares.
///
/// The spans are checked, not trusted: fewer than k distinct shares, or
/// shares that fail to span the hidden hyperplane, are reported with the
/// dimensions that witness the failure.
pub fn reconstruct(info: &PublicInfo, shares: &[Subspace]) -> Result<Subspace, Error> {
    let n = info.n;
    let mut distinct: Vec<&Subspace> = Vec::new();
    for s in shares {
        if !distinct.iter().any(|t| *t == s) {
            distinct.push(s);
        }
    }
    let mut span = Subspace::empty(&info.field, (n + 1) as usize);
    for s in &distinct {
        span = span.span_with(s)?;
    }
    if distinct.len() < info.k {
        return Err(Error::NotEnoughShares {
            needed: info.k,
            got: distinct.len(),
            span_dim: span.dim(),
            span_needed: n,
        });
    }
    if span.dim() != n {
        return Err(Error::ReconstructionFailed(format!(
            "{} distinct shares span dimension {}, expected {}",
            distinct.len(),
            span.dim(),
            n
        )));
    }
    match info.variant {
        SchemeVariant::HyperplaneSecret => Ok(span),
        SchemeVariant::SubspaceSecret => {
            let guess_space = info.guess_space.as_ref().ok_or_else(|| {
                Error::ReconstructionFailed(
                    "the subspace scheme needs the published superspace".into(),
                )
            })?;
            let secret = span.meet(guess_space)?;
            if secret.dim() != guess_space.dim() - 1 {
                return Err(Error::ReconstructionFailed(format!(
                    "the published space meets the recovered hyperplane in dimension {}, expected {}",
                    secret.dim(),
                    guess_space.dim() - 1
                )));
            }
            Ok(secret)
        }
    }
}

/// Outcome of a Monte-Carlo attack run, next to the exact probability.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackEstimate {
    pub i: usize,
    pub p_exact: BigRational,
    pub p_empirical: f64,
    pub matches: u64,
    pub trials: u64,
    /// Four standard deviations of the trial mean at p_exact.
    pub tolerance: f64,
    pub within_tolerance: bool,
}

impl fmt::Display for AttackEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "i={} exact={} empirical={:.6} matches={} trials={} tolerance={:.6} ok={}",
            self.i,
            self.p_exact,
            self.p_empirical,
            self.matches,
            self.trials,
            self.tolerance,
            self.within_tolerance,
        )
    }
}

/// Shared Monte-Carlo loop: per trial, pick i distinct shares, span them,
/// trace the span into `within` when given, draw a uniform guess of the
/// secret's dimension through the trace (inside `within` when given), and
/// count exact matches.
fn simulate_core(
    shares: &[&Subspace],
    within: Option<&Subspace>,
    secret: &Subspace,
    p_exact: BigRational,
    i: usize,
    trials: u64,
    seed: u64,
) -> Result<AttackEstimate, Error> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if i > shares.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot sample {i} distinct shares from {}",
            shares.len()
        )));
    }
    let field = secret.field();
    let ambient = secret.ambient_dim();
    let chunks: Vec<(u64, u64)> = (0..SIMULATION_CHUNKS)
        .map(|c| {
            let count = trials / SIMULATION_CHUNKS + u64::from(c < trials % SIMULATION_CHUNKS);
            (c + 1, count)
        })
        .filter(|(_, count)| *count > 0)
        .collect();
    let counts = exec::map(&chunks, |&(stream, count)| -> Result<u64, Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut hits = 0u64;
        for _ in 0..count {
            let picked = index::sample(&mut rng, shares.len(), i);
            let mut span = Subspace::empty(field, ambient);
            for idx in picked {
                span = span.span_with(shares[idx])?;
            }
            let trace = match within {
                Some(w) => span.meet(w)?,
                None => span,
            };
            let guess = match within {
                Some(w) => random_superspace_within(&trace, secret.dim(), w, &mut rng)?,
                None => random_superspace(&trace, secret.dim(), &mut rng)?,
            };
            if guess == *secret {
                hits += 1;
            }
        }
        Ok(hits)
    });
    let mut matches = 0u64;
    for c in counts {
        matches += c?;
    }
    let p = p_exact
        .to_f64()
        .ok_or_else(|| Error::Internal("exact probability does not fit a float".into()))?;
    let p_empirical = matches as f64 / trials as f64;
    let tolerance = 4.0 * (p * (1.0 - p) / trials as f64).sqrt();
    Ok(AttackEstimate {
        i,
        p_exact,
        p_empirical,
        matches,
        trials,
        tolerance,
        within_tolerance: (p_empirical - p).abs() <= tolerance,
    })
}

/// Monte-Carlo check of [`attack_probability`] on a dealt bundle.
pub fn simulate_attack(
    bundle: &ShareBundle,
    i: usize,
    trials: u64,
    seed: u64,
) -> Result<AttackEstimate, Error> {
    let k = bundle.params.k();
    if i >= k {
        return Err(Error::InvalidParameter(format!(
            "simulation needs i < k = {k}, got i = {i}"
        )));
    }
    let p_exact = attack_probability(&bundle.params, i)?;
    let shares: Vec<&Subspace> = bundle.shares.iter().map(|(_, s)| s).collect();
    simulate_core(
        &shares,
        bundle.public.as_ref(),
        &bundle.secret,
        p_exact,
        i,
        trials,
        seed,
    )
}

/// The worked subspace-secret instance inside one element of the order-2
/// arc from the plane PG(2, q): the other elements cut a twisted cubic out
/// of the fixed element, and the secret is a plane avoiding that cubic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicDemo {
    /// The hyperplane of PG(10, q) the arc is embedded in.
    pub hyperplane: Subspace,
    /// The fixed 3-dimensional arc element, image of [1, 0, 0].
    pub element: Subspace,
    /// The q+1 cubic points in ambient coordinates, one per source line
    /// through [1, 0, 0].
    pub cubic_points: Vec<Vec<u32>>,
    /// The secret: a plane of the fixed element meeting the cubic nowhere.
    pub secret_plane: Subspace,
    /// The published 3-space through the secret plane, poking out of the
    /// hyperplane.
    pub public_space: Subspace,
    /// The other q^2 + q elements, embedded; these are the shares.
    pub shares: Vec<Subspace>,
    /// Exact guess probabilities for 0..=3 known shares.
    pub leak: Vec<BigRational>,
}

impl CubicDemo {
    /// Monte-Carlo check of the leak profile for i known shares.
    pub fn simulate(&self, i: usize, trials: u64, seed: u64) -> Result<AttackEstimate, Error> {
        if i >= self.leak.len() {
            return Err(Error::InvalidParameter(format!(
                "the demo threshold is {}, got i = {i}",
                self.leak.len()
            )));
        }
        let shares: Vec<&Subspace> = self.shares.iter().collect();
        simulate_core(
            &shares,
            Some(&self.public_space),
            &self.secret_plane,
            self.leak[i].clone(),
            i,
            trials,
            seed,
        )
    }
}

/// Scale so the first nonzero coordinate is 1, matching the canonical
/// point representatives of [`enumerate_points`].
fn normalize_point(f: &Field, v: &[u32]) -> Vec<u32> {
    let lead = v.iter().find(|&&c| c != 0).expect("projective points are nonzero");
    let inv = f.inv(*lead).expect("nonzero field element");
    v.iter().map(|&c| f.mul(inv, c)).collect()
}

/// p_0 = p_1 = 1/(q^3+q^2+q+1), p_2 = 1/(q^2+q+1), p_3 = 1/(q+1).
fn cubic_leak_profile(q: u64) -> Vec<BigRational> {
    let q = BigInt::from(q);
    let line: BigInt = &q + 1;
    let plane: BigInt = &q * &q + &q + 1;
    let solid: BigInt = &q * &q * &q + &plane;
    [&solid, &solid, &plane, &line]
        .into_iter()
        .map(|d| BigRational::new(BigInt::one(), d.clone()))
        .collect()
}

/// Builds the worked example: a secret plane inside one element of the
/// (n, d) = (2, 2) arc.
///
/// The elements other than pi = A([1, 0, 0]) come in q+1 groups, one per
/// source line through [1, 0, 0]; each group meets pi in a single common
/// point, and the q+1 points form a twisted cubic of pi (pairwise
/// distinct, no four in a plane). A plane of pi avoiding the cubic
/// therefore meets every share trivially, which is what keeps the leak
/// profile flat until a second share is known. The search for that plane
/// scans dual points in enumeration order, so the result is deterministic.
pub fn twisted_cubic_secret(ctx: &VeroneseContext) -> Result<CubicDemo, Error> {
    if ctx.n() != 2 || ctx.d() != 2 {
        return Err(Error::InvalidParameter(
            "the twisted-cubic example needs the (n, d) = (2, 2) arc".into(),
        ));
    }
    let f = ctx.field();
    let q = f.order();
    let arc = ctx.build_arc()?;
    let points = enumerate_points(f, 2);
    let base_index = points
        .iter()
        .position(|p| p == &[1, 0, 0])
        .expect("the enumeration contains [1,0,0]");
    let index_of: HashMap<&[u32], usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i))
        .collect();
    let pi = arc.element(base_index).clone();

    // One intersection point per source line through [1,0,0]: the line with
    // direction [m1, m2] carries the q further points [l, m1, m2], and all
    // of their elements meet pi in the same point.
    let mut directions: Vec<[u32; 2]> = (0..q as u32).map(|a| [a, 1]).collect();
    directions.push([1, 0]);
    let mut cubic: Vec<Vec<u32>> = Vec::with_capacity(q as usize + 1);
    for dir in directions {
        let mut common: Option<Subspace> = None;
        for lambda in 0..q as u32 {
            let other = normalize_point(f, &[lambda, dir[0], dir[1]]);
            let meet = pi.meet(arc.element(index_of[other.as_slice()]))?;
            if meet.dim() != 0 {
                return Err(Error::Internal(
                    "two arc elements meet in more than a point".into(),
                ));
            }
            match &common {
                None => common = Some(meet),
                Some(c) if *c != meet => {
                    return Err(Error::Internal(
                        "a source line's elements do not share their contact point".into(),
                    ));
                }
                Some(_) => {}
            }
        }
        let p = common.expect("q >= 2 gives at least two points per line");
        cubic.push(p.basis()[0].clone());
    }

    // Twisted-cubic checks: pairwise distinct, no four in a plane.
    let distinct: BTreeSet<&Vec<u32>> = cubic.iter().collect();
    if distinct.len() != cubic.len() {
        return Err(Error::Internal("the cubic points are not distinct".into()));
    }
    for four in cubic.iter().combinations(4) {
        let rows: Vec<Vec<u32>> = four.into_iter().cloned().collect();
        if Subspace::from_rows(f, arc.ambient_dim(), &rows)?.rank() != 4 {
            return Err(Error::Internal("four cubic points are coplanar".into()));
        }
    }

    // Local coordinates of pi: its canonical basis is reduced echelon, so a
    // contained vector's coefficient at basis row j is its entry at that
    // row's pivot column.
    let pivots: Vec<usize> = pi
        .basis()
        .iter()
        .map(|row| row.iter().position(|&c| c != 0).expect("echelon rows are nonzero"))
        .collect();
    let cubic_local: Vec<Vec<u32>> = cubic
        .iter()
        .map(|p| pivots.iter().map(|&j| p[j]).collect())
        .collect();

    // A plane of pi avoiding the cubic is the kernel of any dual point not
    // orthogonal to any cubic point.
    let dual = enumerate_points(f, 3)
        .into_iter()
        .find(|c| {
            cubic_local.iter().all(|t| {
                let mut dot = 0u32;
                for (a, b) in c.iter().zip(t) {
                    dot = f.add(dot, f.mul(*a, *b));
                }
                dot != 0
            })
        })
        .ok_or_else(|| Error::Internal("no plane of the element avoids the cubic".into()))?;
    let lead = dual.iter().position(|&c| c != 0).expect("dual points are nonzero");
    let mut kernel: Vec<Vec<u32>> = Vec::with_capacity(3);
    for j in 0..4 {
        if j != lead {
            let mut row = vec![0u32; 4];
            row[j] = dual[lead];
            row[lead] = f.neg(dual[j]);
            kernel.push(row);
        }
    }
    let plane_rows: Vec<Vec<u32>> = kernel
        .iter()
        .map(|r| combine_rows(f, r, pi.basis(), pi.ncols()))
        .collect();
    let secret_in_arc = Subspace::from_rows(f, arc.ambient_dim(), &plane_rows)?;
    debug_assert_eq!(secret_in_arc.dim(), 2);
    for p in &cubic {
        if secret_in_arc.contains_vector(p)? {
            return Err(Error::Internal("the chosen plane meets the cubic".into()));
        }
    }

    // Embed PG(9, q) as the hyperplane x_10 = 0 of PG(10, q) and extend the
    // secret plane out of it to form the published space.
    let ambient = arc.ambient_dim() + 1;
    let pad = |s: &Subspace| -> Result<Subspace, Error> {
        let rows: Vec<Vec<u32>> = s
            .basis()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.push(0);
                r
            })
            .collect();
        Subspace::from_rows(f, ambient, &rows)
    };
    let mut last_axis = vec![0u32; ambient + 1];
    last_axis[ambient] = 1;
    let hyperplane = Subspace::from_rows(f, ambient, &[last_axis.clone()])?.perp();
    let element = pad(&pi)?;
    let secret_plane = pad(&secret_in_arc)?;
    let public_space = secret_plane.span_with_vector(&last_axis)?;
    debug_assert_eq!(public_space.dim(), 3);
    let cubic_points: Vec<Vec<u32>> = cubic
        .into_iter()
        .map(|mut p| {
            p.push(0);
            p
        })
        .collect();
    let shares: Vec<Subspace> = arc
        .elements()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != base_index)
        .map(|(_, s)| pad(s))
        .collect::<Result<_, _>>()?;

    Ok(CubicDemo {
        hyperplane,
        element,
        cubic_points,
        secret_plane,
        public_space,
        shares,
        leak: cubic_leak_profile(q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arcs::dualize;

    fn field(p: u64, e: u32) -> Arc<Field> {
        Field::new(p, e).unwrap()
    }

    fn arc_family(p: u64, e: u32) -> DualArcFamily {
        let f = field(p, e);
        let ctx = VeroneseContext::new(&f, 2, 2).unwrap();
        ctx.build_arc().unwrap()
    }

    fn ratio(num: u64, den: u64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn exact_probabilities_match_the_threshold_dimensions() {
        let arc = arc_family(2, 1);
        let v1 = SchemeParams::from_arc(SchemeVariant::HyperplaneSecret, &arc).unwrap();
        assert_eq!(v1.k(), 4);
        assert_eq!(v1.n(), 9);
        assert_eq!(v1.dims(), vec![-1, 3, 6, 8, 9]);
        assert_eq!(v1.participant_count(), 7);
        assert_eq!(v1.secret_dim(), 9);
        let expected = [(1u64, 2047u64), (1, 127), (1, 15), (1, 3)];
        for (i, (num, den)) in expected.iter().enumerate() {
            assert_eq!(attack_probability(&v1, i).unwrap(), ratio(*num, *den));
        }
        assert!(attack_probability(&v1, 4).is_err());

        let v2 = SchemeParams::from_arc(SchemeVariant::SubspaceSecret, &arc).unwrap();
        assert_eq!(v2.participant_count(), 6);
        assert_eq!(v2.secret_dim(), 3);
        for i in 0..=4usize {
            let den = 2u64.pow(5 - i as u32) - 1;
            assert_eq!(attack_probability(&v2, i).unwrap(), ratio(1, den));
        }
        assert_eq!(attack_probability(&v2, 4).unwrap(), BigRational::one());
        assert!(attack_probability(&v2, 5).is_err());

        let dual = dualize(&arc);
        assert!(SchemeParams::from_arc(SchemeVariant::HyperplaneSecret, &dual).is_err());
    }

    #[test]
    fn deal_is_deterministic_and_embeds_the_family() {
        let arc = arc_family(2, 1);
        let params = SchemeParams::from_arc(SchemeVariant::HyperplaneSecret, &arc).unwrap();
        let bundle = deal(&params, &arc, 11).unwrap();
        assert_eq!(bundle, deal(&params, &arc, 11).unwrap());
        assert_ne!(bundle, deal(&params, &arc, 12).unwrap());
        assert_eq!(bundle.shares().len(), 7);
        assert_eq!(bundle.secret().dim(), 9);
        assert_eq!(bundle.secret().ambient_dim(), 10);
        assert!(bundle.public().is_none());
        let ids: Vec<u32> = bundle.shares().iter().map(|(i, _)| *i).collect();
        assert_eq!(ids, vec![1, 2, 3, 4, 5, 6, 7]);
        let mut span = Subspace::empty(arc.field(), 10);
        for (_, s) in bundle.shares() {
            assert_eq!(s.dim(), 3);
            assert!(bundle.secret().contains(s).unwrap());
            span = span.span_with(s).unwrap();
        }
        assert_eq!(&span, bundle.secret());

        let params2 = SchemeParams::from_arc(SchemeVariant::SubspaceSecret, &arc).unwrap();
        let b2 = deal(&params2, &arc, 11).unwrap();
        assert_eq!(b2.shares().len(), 6);
        let public = b2.public().unwrap();
        assert_eq!(public.dim(), 4);
        assert_eq!(b2.secret().dim(), 3);
        assert!(public.contains(b2.secret()).unwrap());
        // The shares span the hidden hyperplane; the published space pokes
        // out of it and meets it exactly in the secret.
        let mut hyper = Subspace::empty(arc.field(), 10);
        for (_, s) in b2.shares() {
            hyper = hyper.span_with(s).unwrap();
        }
        assert_eq!(hyper.dim(), 9);
        assert!(!hyper.contains(public).unwrap());
        assert_eq!(&hyper.meet(public).unwrap(), b2.secret());

        let other = arc_family(3, 1);
        assert!(deal(&params, &other, 1).is_err());
    }

    #[test]
    fn reconstruction_needs_k_distinct_spanning_shares() {
        let arc = arc_family(2, 1);
        let params = SchemeParams::from_arc(SchemeVariant::HyperplaneSecret, &arc).unwrap();
        let bundle = deal(&params, &arc, 3).unwrap();
        let info = bundle.public_info();
        let shares: Vec<Subspace> = bundle.shares().iter().map(|(_, s)| s.clone()).collect();
        for quad in shares.iter().combinations(4) {
            let picked: Vec<Subspace> = quad.into_iter().cloned().collect();
            assert_eq!(&reconstruct(&info, &picked).unwrap(), bundle.secret());
        }
        for triple in shares.iter().combinations(3) {
            let picked: Vec<Subspace> = triple.into_iter().cloned().collect();
            match reconstruct(&info, &picked) {
                Err(Error::NotEnoughShares {
                    needed,
                    got,
                    span_dim,
                    span_needed,
                }) => assert_eq!((needed, got, span_dim, span_needed), (4, 3, 8, 9)),
                other => panic!("expected a share-count failure, got {other:?}"),
            }
        }
        // More than k shares are fine; duplicates are not counted.
        assert_eq!(&reconstruct(&info, &shares).unwrap(), bundle.secret());
        let dup = vec![
            shares[0].clone(),
            shares[0].clone(),
            shares[1].clone(),
            shares[2].clone(),
        ];
        assert!(matches!(
            reconstruct(&info, &dup),
            Err(Error::NotEnoughShares { got: 3, .. })
        ));
        // A subspace from outside the bundle overshoots the span.
        let forged = vec![
            shares[0].clone(),
            shares[1].clone(),
            shares[2].clone(),
            Subspace::full(arc.field(), 10),
        ];
        match reconstruct(&info, &forged) {
            Err(Error::ReconstructionFailed(msg)) => {
                assert!(msg.contains("span dimension 10"), "{msg}");
            }
            other => panic!("expected a span failure, got {other:?}"),
        }

        let params2 = SchemeParams::from_arc(SchemeVariant::SubspaceSecret, &arc).unwrap();
        let b2 = deal(&params2, &arc, 3).unwrap();
        let info2 = b2.public_info();
        let shares2: Vec<Subspace> = b2.shares().iter().map(|(_, s)| s.clone()).collect();
        for quad in shares2.iter().combinations(4) {
            let picked: Vec<Subspace> = quad.into_iter().cloned().collect();
            assert_eq!(&reconstruct(&info2, &picked).unwrap(), b2.secret());
        }
        let mut blind = info2.clone();
        blind.guess_space = None;
        assert!(matches!(
            reconstruct(&blind, &shares2[..4]),
            Err(Error::ReconstructionFailed(_))
        ));
    }

    #[test]
    fn share_spans_trace_the_public_space_in_the_proof_dimensions() {
        let arc = arc_family(2, 1);
        let params = SchemeParams::from_arc(SchemeVariant::SubspaceSecret, &arc).unwrap();
        let bundle = deal(&params, &arc, 8).unwrap();
        let public = bundle.public().unwrap();
        let dims = params.dims();
        let shares: Vec<&Subspace> = bundle.shares().iter().map(|(_, s)| s).collect();
        for i in 1..=3usize {
            let expected = dims[i] + dims[1] - dims[i + 1];
            for subset in shares.iter().combinations(i) {
                let mut span = Subspace::empty(arc.field(), 10);
                for s in subset {
                    span = span.span_with(s).unwrap();
                }
                assert_eq!(span.meet(public).unwrap().dim(), expected);
            }
        }
    }

    #[test]
    fn candidate_secret_counts_invert_the_exact_probabilities() {
        let arc = arc_family(3, 1);
        let params = SchemeParams::from_arc(SchemeVariant::HyperplaneSecret, &arc).unwrap();
        let bundle = deal(&params, &arc, 17).unwrap();
        let shares: Vec<&Subspace> = bundle.shares().iter().map(|(_, s)| s).collect();
        for i in 0..4usize {
            let mut span = Subspace::empty(arc.field(), 10);
            for s in &shares[..i] {
                span = span.span_with(s).unwrap();
            }
            let count = span.count_superspaces(9).unwrap();
            let p = attack_probability(&params, i).unwrap();
            assert_eq!(
                p * BigRational::from_integer(BigInt::from(count)),
                BigRational::one()
            );
        }
    }

    #[test]
    fn simulated_attacks_match_the_exact_probabilities() {
        let arc = arc_family(2, 1);
        let params = SchemeParams::from_arc(SchemeVariant::HyperplaneSecret, &arc).unwrap();
        let bundle = deal(&params, &arc, 21).unwrap();
        for i in [0usize, 2, 3] {
            let est = simulate_attack(&bundle, i, 4000, 7).unwrap();
            assert_eq!(est.trials, 4000);
            assert!(est.within_tolerance, "{est}");
        }
        let est = simulate_attack(&bundle, 3, 4000, 7).unwrap();
        assert_eq!(est, simulate_attack(&bundle, 3, 4000, 7).unwrap());

        let params2 = SchemeParams::from_arc(SchemeVariant::SubspaceSecret, &arc).unwrap();
        let b2 = deal(&params2, &arc, 21).unwrap();
        let est2 = simulate_attack(&b2, 3, 4000, 7).unwrap();
        assert!(est2.within_tolerance, "{est2}");

        assert!(simulate_attack(&bundle, 4, 10, 1).is_err());
        assert!(simulate_attack(&bundle, 0, 0, 1).is_err());
    }

    #[test]
    fn the_twisted_cubic_demo_matches_the_worked_leak_profile() {
        let f = field(2, 1);
        let ctx = VeroneseContext::new(&f, 2, 2).unwrap();
        let demo = twisted_cubic_secret(&ctx).unwrap();
        assert_eq!(demo.cubic_points.len(), 3);
        assert_eq!(demo.shares.len(), 6);
        assert_eq!(demo.element.dim(), 3);
        assert_eq!(demo.secret_plane.dim(), 2);
        assert_eq!(demo.public_space.dim(), 3);
        assert!(demo.element.contains(&demo.secret_plane).unwrap());
        assert!(demo.public_space.contains(&demo.secret_plane).unwrap());
        assert!(!demo.hyperplane.contains(&demo.public_space).unwrap());
        assert_eq!(
            demo.hyperplane.meet(&demo.public_space).unwrap(),
            demo.secret_plane
        );
        for p in &demo.cubic_points {
            assert!(demo.element.contains_vector(p).unwrap());
            assert!(!demo.secret_plane.contains_vector(p).unwrap());
        }
        assert_eq!(
            demo.leak,
            vec![ratio(1, 15), ratio(1, 15), ratio(1, 7), ratio(1, 3)]
        );
        // Every share meets the fixed element in a cubic point, so a single
        // share traces nothing inside the published space.
        for s in &demo.shares {
            assert!(demo.hyperplane.contains(s).unwrap());
            let contact = s.meet(&demo.element).unwrap();
            assert_eq!(contact.dim(), 0);
            assert!(demo.cubic_points.iter().any(|p| p == &contact.basis()[0]));
            assert_eq!(s.meet(&demo.public_space).unwrap().dim(), -1);
        }

        let f3 = field(3, 1);
        let ctx3 = VeroneseContext::new(&f3, 2, 2).unwrap();
        let demo3 = twisted_cubic_secret(&ctx3).unwrap();
        assert_eq!(demo3.cubic_points.len(), 4);
        assert_eq!(demo3.shares.len(), 12);
        assert_eq!(
            demo3.leak,
            vec![ratio(1, 40), ratio(1, 40), ratio(1, 13), ratio(1, 4)]
        );

        let est = demo.simulate(1, 3000, 5).unwrap();
        assert!(est.within_tolerance, "{est}");
        let est2 = demo.simulate(2, 3000, 5).unwrap();
        assert!(est2.within_tolerance, "{est2}");
        assert!(demo.simulate(4, 10, 1).is_err());

        let wrong = VeroneseContext::new(&f, 2, 1).unwrap();
        assert!(twisted_cubic_secret(&wrong).is_err());
    }

    #[test]
    fn share_and_public_files_round_trip() {
        let arc = arc_family(2, 1);
        let params = SchemeParams::from_arc(SchemeVariant::SubspaceSecret, &arc).unwrap();
        let bundle = deal(&params, &arc, 2).unwrap();
        let file = bundle.share_file(3).unwrap();
        let text = file.to_text();
        assert!(text.starts_with("scheme=2 2 9 4 participant=3\n"), "{text}");
        assert_eq!(ShareFile::from_text(&text).unwrap(), file);
        assert!(bundle.share_file(9).is_none());

        let info = bundle.public_info();
        let text = info.to_text();
        assert!(text.starts_with("scheme=2 2 9 4 participants=6\n"), "{text}");
        assert_eq!(PublicInfo::from_text(&text).unwrap(), info);

        let v1 = SchemeParams::from_arc(SchemeVariant::HyperplaneSecret, &arc).unwrap();
        let b1 = deal(&v1, &arc, 2).unwrap();
        let info1 = b1.public_info();
        assert_eq!(PublicInfo::from_text(&info1.to_text()).unwrap(), info1);

        assert!(ShareFile::from_text("scheme=3 2 9 4 participant=1\n").is_err());
        assert!(ShareFile::from_text("scheme=2 2 9 participant=1\n").is_err());
        assert!(ShareFile::from_text("scheme=2 2 9 4 participant=1\n").is_err());
        assert!(PublicInfo::from_text("scheme=2 2 9 4 participants=6\n").is_err());
        let stray = format!("scheme=1 2 9 4 participants=7\n{}", b1.secret().to_text());
        assert!(PublicInfo::from_text(&stray).is_err());
    }
}
