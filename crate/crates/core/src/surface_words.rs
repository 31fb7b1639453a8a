//! Surface-group and groupoid presentations, free words, bar 2-chains and
//! Fox derivatives.
//!
//! Words compose like functions: in `l_1 l_2 ... l_m` the source of `l_i` is
//! the target of `l_{i+1}`. The groupoid generator `gamma_k` runs from the
//! object `p_k` to `p_0`, `a_k` is a loop at `p_k`, and `x_j`, `y_j` are loops
//! at `p_0`. With this convention the groupoid relator
//! `prod [x_j, y_j] * prod gamma_k a_k gamma_k^-1` is a loop at `p_0`.
//!
//! # JSON encoding
//!
//! A letter is a nonzero signed integer, negative for an inverse. For the
//! surface group the indices are `x_j -> 2j-1`, `y_j -> 2j` (j = 1..=genus)
//! and `z_k -> 2*genus + k`. For the groupoid, `a_k -> 2*genus + k` and
//! `gamma_k -> 2*genus + boundaries + k`. A word is an array of letters and a
//! 2-chain is an array of `{"coeff": i64, "u": word, "v": word}` records.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie_core::{GroupElement, LieGroup};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceData {
    pub genus: usize,
    pub boundaries: usize,
}

impl SurfaceData {
    pub fn new(genus: usize, boundaries: usize) -> Result<Self> {
        if genus == 0 && boundaries < 3 {
            return Err(Error::InvalidSurface { genus, boundaries });
        }
        Ok(Self { genus, boundaries })
    }

    /// Generators of the free group, in coordinate order.
    pub fn group_generators(&self) -> Vec<Generator> {
        let mut out = Vec::with_capacity(2 * self.genus + self.boundaries);
        for j in 1..=self.genus {
            out.push(Generator::X(j));
            out.push(Generator::Y(j));
        }
        out.extend((1..=self.boundaries).map(Generator::Z));
        out
    }

    /// Generators of the free groupoid, in coordinate order.
    pub fn groupoid_generators(&self) -> Vec<Generator> {
        let mut out = Vec::with_capacity(2 * self.genus + 2 * self.boundaries);
        for j in 1..=self.genus {
            out.push(Generator::X(j));
            out.push(Generator::Y(j));
        }
        out.extend((1..=self.boundaries).map(Generator::A));
        out.extend((1..=self.boundaries).map(Generator::Gamma));
        out
    }

    pub fn generator_index(&self, g: Generator) -> i64 {
        let l = self.genus as i64;
        let n = self.boundaries as i64;
        match g {
            Generator::X(j) => 2 * j as i64 - 1,
            Generator::Y(j) => 2 * j as i64,
            Generator::Z(k) | Generator::A(k) => 2 * l + k as i64,
            Generator::Gamma(k) => 2 * l + n + k as i64,
        }
    }

    /// Inverse of [`Self::generator_index`]; `groupoid` selects `a_k` over `z_k`.
    pub fn generator_from_index(&self, idx: i64, groupoid: bool) -> Option<Generator> {
        let l = self.genus as i64;
        let n = self.boundaries as i64;
        let i = idx.abs();
        if i == 0 {
            None
        } else if i <= 2 * l {
            let j = ((i + 1) / 2) as usize;
            Some(if i % 2 == 1 { Generator::X(j) } else { Generator::Y(j) })
        } else if i <= 2 * l + n {
            let k = (i - 2 * l) as usize;
            Some(if groupoid { Generator::A(k) } else { Generator::Z(k) })
        } else if groupoid && i <= 2 * l + 2 * n {
            Some(Generator::Gamma((i - 2 * l - n) as usize))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    X(usize),
    Y(usize),
    Z(usize),
    A(usize),
    Gamma(usize),
}

impl Generator {
    /// Source object (0 is the base point `p_0`).
    pub fn source(&self) -> usize {
        match *self {
            Generator::A(k) | Generator::Gamma(k) => k,
            _ => 0,
        }
    }

    pub fn target(&self) -> usize {
        match *self {
            Generator::A(k) => k,
            _ => 0,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::X(j) => write!(f, "x{j}"),
            Generator::Y(j) => write!(f, "y{j}"),
            Generator::Z(k) => write!(f, "z{k}"),
            Generator::A(k) => write!(f, "a{k}"),
            Generator::Gamma(k) => write!(f, "g{k}"),
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidWord(s.to_string());
        let (head, idx) = s.split_at(s.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
        let i: usize = idx.parse().map_err(|_| bad())?;
        if i == 0 {
            return Err(bad());
        }
        Ok(match head {
            "x" => Generator::X(i),
            "y" => Generator::Y(i),
            "z" => Generator::Z(i),
            "a" => Generator::A(i),
            "g" => Generator::Gamma(i),
            _ => return Err(bad()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: Generator,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: Generator) -> Self {
        Self { gen, inv: false }
    }

    pub fn inverse(self) -> Self {
        Self {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    pub fn source(&self) -> usize {
        if self.inv {
            self.gen.target()
        } else {
            self.gen.source()
        }
    }

    pub fn target(&self) -> usize {
        if self.inv {
            self.gen.source()
        } else {
            self.gen.target()
        }
    }
}

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn gen(g: Generator) -> Self {
        Self {
            letters: vec![Letter::new(g)],
        }
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Self { letters: out }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.mul(b).mul(&a.inverse()).mul(&b.inverse())
    }

    /// `(target, source)` objects when the word is composable in the
    /// groupoid; `None` for the empty word; `Err` otherwise.
    pub fn endpoints(&self) -> Result<Option<(usize, usize)>> {
        for w in self.letters.windows(2) {
            if w[0].source() != w[1].target() {
                return Err(Error::NotComposable);
            }
        }
        Ok(match (self.letters.first(), self.letters.last()) {
            (Some(f), Some(l)) => Some((f.target(), l.source())),
            _ => None,
        })
    }

    /// Substitutes a word for each generator.
    pub fn substitute(&self, f: &impl Fn(Generator) -> Word) -> Word {
        Word::from_letters(self.letters.iter().flat_map(|l| {
            let w = f(l.gen);
            let w = if l.inv { w.inverse() } else { w };
            w.letters
        }))
    }

    pub fn to_indices(&self, s: &SurfaceData) -> Vec<i64> {
        self.letters
            .iter()
            .map(|l| {
                let i = s.generator_index(l.gen);
                if l.inv {
                    -i
                } else {
                    i
                }
            })
            .collect()
    }

    pub fn from_indices(idx: &[i64], s: &SurfaceData, groupoid: bool) -> Result<Word> {
        let letters = idx
            .iter()
            .map(|&i| {
                s.generator_from_index(i, groupoid)
                    .map(|gen| Letter { gen, inv: i < 0 })
                    .ok_or_else(|| Error::MissingGenerator(i.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::from_letters(letters))
    }
}

/// Parses the [`fmt::Display`] format: space-separated letters such as
/// `x1 y1^-1 z2`, with `e` for the empty word.
impl std::str::FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            if tok == "e" {
                continue;
            }
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let gen: Generator = name.parse()?;
            letters.push(Letter { gen, inv });
        }
        Ok(Word::from_letters(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|l| if l.inv { format!("{}^-1", l.gen) } else { l.gen.to_string() })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The relator `prod [x_j, y_j] * z_1 ... z_n` of the surface group.
pub fn relator(s: &SurfaceData) -> Word {
    let mut w = Word::empty();
    for j in 1..=s.genus {
        w = w.mul(&Word::commutator(&Word::gen(Generator::X(j)), &Word::gen(Generator::Y(j))));
    }
    for k in 1..=s.boundaries {
        w = w.mul(&Word::gen(Generator::Z(k)));
    }
    w
}

/// The word `gamma_k a_k gamma_k^-1`.
pub fn conjugated_boundary(k: usize) -> Word {
    let g = Word::gen(Generator::Gamma(k));
    g.mul(&Word::gen(Generator::A(k))).mul(&g.inverse())
}

/// The groupoid relator `prod [x_j, y_j] * prod gamma_k a_k gamma_k^-1`.
pub fn relator_tilde(s: &SurfaceData) -> Word {
    relator(s).substitute(&groupoid_inclusion)
}

/// The inclusion of the free group into the free groupoid,
/// `z_k -> gamma_k a_k gamma_k^-1`.
pub fn groupoid_inclusion(g: Generator) -> Word {
    match g {
        Generator::Z(k) => conjugated_boundary(k),
        other => Word::gen(other),
    }
}

/// Integer 1-chain in the normalized bar complex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BarChain1 {
    pub terms: BTreeMap<Word, i64>,
}

impl BarChain1 {
    pub fn add(&mut self, w: Word, c: i64) {
        if w.is_empty() || c == 0 {
            return;
        }
        let e = self.terms.entry(w.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&w);
        }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Word, i64)>) -> Self {
        let mut c = Self::default();
        for (w, k) in terms {
            c.add(w, k);
        }
        c
    }
}

/// Integer 2-chain `sum m [u|v]` in the normalized bar complex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BarChain2 {
    pub cells: BTreeMap<(Word, Word), i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    pub coeff: i64,
    pub u: Vec<i64>,
    pub v: Vec<i64>,
}

impl BarChain2 {
    pub fn add(&mut self, u: Word, v: Word, c: i64) {
        if u.is_empty() || v.is_empty() || c == 0 {
            return;
        }
        let key = (u, v);
        let e = self.cells.entry(key.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.cells.remove(&key);
        }
    }

    pub fn add_chain(&mut self, other: &BarChain2, c: i64) {
        for ((u, v), m) in &other.cells {
            self.add(u.clone(), v.clone(), c * m);
        }
    }

    /// `d[u|v] = [v] - [uv] + [u]`.
    pub fn boundary(&self) -> BarChain1 {
        let mut out = BarChain1::default();
        for ((u, v), &m) in &self.cells {
            out.add(v.clone(), m);
            out.add(u.mul(v), -m);
            out.add(u.clone(), m);
        }
        out
    }

    pub fn map_words(&self, f: &impl Fn(&Word) -> Word) -> BarChain2 {
        let mut out = BarChain2::default();
        for ((u, v), &m) in &self.cells {
            out.add(f(u), f(v), m);
        }
        out
    }

    /// Every cell `[u|v]` must have `uv` composable.
    pub fn check_composable(&self) -> Result<()> {
        for (u, v) in self.cells.keys() {
            u.mul(v).endpoints()?;
            u.endpoints()?;
            v.endpoints()?;
            if let (Some((_, su)), Some((tv, _))) = (u.endpoints()?, v.endpoints()?) {
                if su != tv {
                    return Err(Error::NotComposable);
                }
            }
        }
        Ok(())
    }

    pub fn to_records(&self, s: &SurfaceData) -> Vec<CellRecord> {
        self.cells
            .iter()
            .map(|((u, v), &m)| CellRecord {
                coeff: m,
                u: u.to_indices(s),
                v: v.to_indices(s),
            })
            .collect()
    }

    pub fn from_records(records: &[CellRecord], s: &SurfaceData, groupoid: bool) -> Result<Self> {
        let mut out = Self::default();
        for r in records {
            out.add(
                Word::from_indices(&r.u, s, groupoid)?,
                Word::from_indices(&r.v, s, groupoid)?,
                r.coeff,
            );
        }
        Ok(out)
    }
}

/// Which way the relator word is telescoped when building `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Filling {
    #[default]
    LeftToRight,
    RightToLeft,
}

/// The 2-chain `c` with `dc = [r] - [z_1] - ... - [z_n]`.
pub fn build_chain_c(s: &SurfaceData) -> BarChain2 {
    build_chain_c_with(s, Filling::LeftToRight)
}

pub fn build_chain_c_with(s: &SurfaceData, filling: Filling) -> BarChain2 {
    let r = relator(s);
    let l = r.letters();
    let m = l.len();
    let mut c = BarChain2::default();
    match filling {
        Filling::LeftToRight => {
            for i in 1..m {
                let prefix = Word::from_letters(l[..i].iter().copied());
                c.add(prefix, Word::from_letters([l[i]]), -1);
            }
        }
        Filling::RightToLeft => {
            for i in 0..m.saturating_sub(1) {
                let suffix = Word::from_letters(l[i + 1..].iter().copied());
                c.add(Word::from_letters([l[i]]), suffix, -1);
            }
        }
    }
    for j in 1..=s.genus {
        for g in [Generator::X(j), Generator::Y(j)] {
            let w = Word::gen(g);
            c.add(w.clone(), w.inverse(), 1);
        }
    }
    c
}

/// The groupoid 2-chain with `d c~ = [r~] - [a_1] - ... - [a_n]`.
pub fn build_chain_c_tilde(c: &BarChain2, s: &SurfaceData) -> BarChain2 {
    let mut out = c.map_words(&|w| w.substitute(&groupoid_inclusion));
    for k in 1..=s.boundaries {
        let g = Word::gen(Generator::Gamma(k));
        let ga = g.mul(&Word::gen(Generator::A(k)));
        out.add(g.inverse(), ga.clone(), 1);
        out.add(ga, g.inverse(), -1);
    }
    out
}

/// The 1-chain `[r] - [z_1] - ... - [z_n]`.
pub fn expected_boundary_c(s: &SurfaceData) -> BarChain1 {
    let mut b = BarChain1::from_terms([(relator(s), 1)]);
    for k in 1..=s.boundaries {
        b.add(Word::gen(Generator::Z(k)), -1);
    }
    b
}

/// The 1-chain `[r~] - [a_1] - ... - [a_n]`.
pub fn expected_boundary_c_tilde(s: &SurfaceData) -> BarChain1 {
    let mut b = BarChain1::from_terms([(relator_tilde(s), 1)]);
    for k in 1..=s.boundaries {
        b.add(Word::gen(Generator::A(k)), -1);
    }
    b
}

/// Images of generators in the group.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T: Scalar> {
    pub values: BTreeMap<Generator, GroupElement<T>>,
}

impl<T: Scalar> Assignment<T> {
    pub fn new(values: impl IntoIterator<Item = (Generator, GroupElement<T>)>) -> Self {
        Self {
            values: values.into_iter().collect(),
        }
    }

    pub fn get(&self, g: Generator) -> Result<&GroupElement<T>> {
        self.values
            .get(&g)
            .ok_or_else(|| Error::MissingGenerator(g.to_string()))
    }

    pub fn set(&mut self, g: Generator, v: GroupElement<T>) {
        self.values.insert(g, v);
    }

    pub fn evaluate(&self, w: &Word) -> Result<GroupElement<T>> {
        let mut acc: Option<GroupElement<T>> = None;
        for l in w.letters() {
            let v = self.get(l.gen)?;
            let v = if l.inv { v.inverse() } else { v.clone() };
            acc = Some(match acc {
                None => v,
                Some(a) => a * v,
            });
        }
        match acc {
            Some(a) => Ok(a),
            None => {
                let n = self
                    .values
                    .values()
                    .next()
                    .map(|g| g.m.nrows())
                    .ok_or_else(|| Error::MissingGenerator("<empty assignment>".into()))?;
                Ok(GroupElement::identity(n))
            }
        }
    }

    /// Conjugates every value by `h`.
    pub fn conjugate(&self, h: &GroupElement<T>) -> Self {
        let hi = h.inverse();
        Self {
            values: self
                .values
                .iter()
                .map(|(g, v)| (*g, &(h * v) * &hi))
                .collect(),
        }
    }
}

/// Groupoid assignment to surface-group assignment:
/// `z_k -> gamma_k a_k gamma_k^-1`.
pub fn restrict<T: Scalar>(phi_t: &Assignment<T>, s: &SurfaceData) -> Result<Assignment<T>> {
    let mut out = BTreeMap::new();
    for g in s.group_generators() {
        let w = groupoid_inclusion(g);
        out.insert(g, phi_t.evaluate(&w)?);
    }
    Ok(Assignment { values: out })
}

/// Surface-group assignment to groupoid assignment: `a_k -> z_k`,
/// `gamma_k -> Id`.
pub fn corestrict<T: Scalar>(phi: &Assignment<T>, s: &SurfaceData) -> Result<Assignment<T>> {
    let mut out = BTreeMap::new();
    for g in s.groupoid_generators() {
        let v = match g {
            Generator::A(k) => phi.get(Generator::Z(k))?.clone(),
            Generator::Gamma(_) => {
                let n = phi.values.values().next().map(|v| v.m.nrows()).unwrap_or(2);
                GroupElement::identity(n)
            }
            other => phi.get(other)?.clone(),
        };
        out.insert(g, v);
    }
    Ok(Assignment { values: out })
}

/// The action `(theta . alpha)(w) = theta(t(w)) alpha(w) theta(s(w))^-1` of
/// `G^{n+1}` on groupoid assignments; `theta[k]` acts at the object `p_k`.
pub fn groupoid_action<T: Scalar>(
    theta: &[GroupElement<T>],
    phi_t: &Assignment<T>,
) -> Assignment<T> {
    Assignment {
        values: phi_t
            .values
            .iter()
            .map(|(g, v)| {
                let t = &theta[g.target()];
                let s = theta[g.source()].inverse();
                (*g, &(t * v) * &s)
            })
            .collect(),
    }
}

/// Fox derivatives of `w` with respect to every generator in `gens`, through
/// `Ad o phi`, laid out as a `dim_g x (gens.len() * dim_g)` block row.
///
/// The block for `g` is built with the rules `d(uv) = du + Ad(u) dv` and
/// `d(g^-1)/dg = -Ad(g)^-1`.
pub fn fox_row<T: Scalar>(
    group: &LieGroup<T>,
    w: &Word,
    gens: &[Generator],
    phi: &Assignment<T>,
) -> Result<DMatrix<T>> {
    let d = group.dim();
    let mut out = DMatrix::<T>::zeros(d, d * gens.len());
    let mut prefix = group.identity();
    for l in w.letters() {
        let v = phi.get(l.gen)?;
        let col = gens
            .iter()
            .position(|g| *g == l.gen)
            .ok_or_else(|| Error::MissingGenerator(l.gen.to_string()))?;
        if l.inv {
            prefix = &prefix * &v.inverse();
            let ad = group.adjoint_matrix(&prefix);
            let mut blk = out.view_mut((0, col * d), (d, d));
            blk -= ad;
        } else {
            let ad = group.adjoint_matrix(&prefix);
            let mut blk = out.view_mut((0, col * d), (d, d));
            blk += ad;
            prefix = &prefix * v;
        }
    }
    Ok(out)
}

/// The Fox derivative of `w` with respect to a single generator.
pub fn fox_matrix<T: Scalar>(
    group: &LieGroup<T>,
    w: &Word,
    g: Generator,
    phi: &Assignment<T>,
) -> Result<DMatrix<T>> {
    phi.get(g)?;
    fox_row(group, w, &[g], phi).or_else(|e| match e {
        // Letters other than `g` are still needed for the prefixes.
        Error::MissingGenerator(_) => {
            let mut gens: Vec<Generator> = w.letters().iter().map(|l| l.gen).collect();
            gens.push(g);
            gens.sort();
            gens.dedup();
            let row = fox_row(group, w, &gens, phi)?;
            let i = gens.iter().position(|x| *x == g).unwrap();
            let d = group.dim();
            Ok(row.columns(i * d, d).into_owned())
        }
        other => Err(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie_core::{max_abs_c, LieGroupSpec};
    use crate::linalg::max_abs;
    use nalgebra::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_assignment(
        g: &LieGroup<f64>,
        gens: &[Generator],
        rng: &mut ChaCha8Rng,
    ) -> Assignment<f64> {
        Assignment::new(gens.iter().map(|&x| (x, g.random_element(rng))))
    }

    #[test]
    fn relator_words() {
        let s = SurfaceData::new(0, 3).unwrap();
        assert_eq!(relator(&s).to_string(), "z1 z2 z3");
        let s = SurfaceData::new(1, 1).unwrap();
        assert_eq!(relator(&s).to_string(), "x1 y1 x1^-1 y1^-1 z1");
        assert_eq!(relator_tilde(&s).to_string(), "x1 y1 x1^-1 y1^-1 g1 a1 g1^-1");
        assert_eq!(relator_tilde(&s).endpoints().unwrap(), Some((0, 0)));
        assert!(SurfaceData::new(0, 2).is_err());
    }

    #[test]
    fn chain_c_genus_zero_three_holes() {
        let s = SurfaceData::new(0, 3).unwrap();
        let c = build_chain_c(&s);
        let z = |k| Word::gen(Generator::Z(k));
        let mut want = BarChain2::default();
        want.add(z(1), z(2), -1);
        want.add(z(1).mul(&z(2)), z(3), -1);
        assert_eq!(c, want);
        assert_eq!(c.boundary(), expected_boundary_c(&s));
    }

    #[test]
    fn chain_boundaries_exhaustive() {
        for genus in 0..=3 {
            for n in 0..=4 {
                let Ok(s) = SurfaceData::new(genus, n) else { continue };
                for filling in [Filling::LeftToRight, Filling::RightToLeft] {
                    let c = build_chain_c_with(&s, filling);
                    assert_eq!(c.boundary(), expected_boundary_c(&s));
                    let ct = build_chain_c_tilde(&c, &s);
                    assert_eq!(ct.boundary(), expected_boundary_c_tilde(&s));
                    ct.check_composable().unwrap();
                }
            }
        }
    }

    #[test]
    fn c_tilde_collapses_to_c_with_trivial_paths() {
        let s = SurfaceData::new(1, 2).unwrap();
        let c = build_chain_c(&s);
        let ct = build_chain_c_tilde(&c, &s);
        let collapse = |w: &Word| {
            w.substitute(&|g| match g {
                Generator::Gamma(_) => Word::empty(),
                Generator::A(k) => Word::gen(Generator::Z(k)),
                other => Word::gen(other),
            })
        };
        assert_eq!(ct.map_words(&collapse), c);
    }

    #[test]
    fn json_indices_roundtrip() {
        let s = SurfaceData::new(2, 2).unwrap();
        let ct = build_chain_c_tilde(&build_chain_c(&s), &s);
        let rec = ct.to_records(&s);
        assert_eq!(BarChain2::from_records(&rec, &s, true).unwrap(), ct);
        assert_eq!(relator(&s).to_indices(&s), vec![1, 2, -1, -2, 3, 4, -3, -4, 5, 6]);
    }

    #[test]
    fn word_text_roundtrip() {
        let s = SurfaceData::new(2, 2).unwrap();
        let w = relator_tilde(&s);
        assert_eq!(w.to_string().parse::<Word>().unwrap(), w);
        assert_eq!("x1 x1^-1".parse::<Word>().unwrap(), Word::empty());
        assert!("q1".parse::<Word>().is_err());
        assert!("x0".parse::<Word>().is_err());
    }

    #[test]
    fn evaluate_matches_direct_product() {
        let g = LieGroup::<f64>::new(LieGroupSpec::su(3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = SurfaceData::new(2, 2).unwrap();
        let phi = random_assignment(&g, &s.group_generators(), &mut rng);
        let m = |gen| phi.get(gen).unwrap().m.clone();
        let mut direct = nalgebra::DMatrix::<Complex<f64>>::identity(3, 3);
        for j in 1..=2 {
            let (a, b) = (m(Generator::X(j)), m(Generator::Y(j)));
            direct = direct * &a * &b * a.adjoint() * b.adjoint();
        }
        direct = direct * m(Generator::Z(1)) * m(Generator::Z(2));
        let r = phi.evaluate(&relator(&s)).unwrap();
        assert!(max_abs_c(&(r.m - direct)) < 1e-12);
        let x = Word::gen(Generator::X(1));
        assert!(phi.evaluate(&x.mul(&x.inverse())).unwrap().distance(&g.identity()) < 1e-15);
        assert!(matches!(
            phi.evaluate(&Word::gen(Generator::A(1))),
            Err(Error::MissingGenerator(_))
        ));
    }

    #[test]
    fn restriction_and_action() {
        let g = LieGroup::<f64>::new(LieGroupSpec::su(2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = SurfaceData::new(1, 2).unwrap();
        let phi = random_assignment(&g, &s.group_generators(), &mut rng);
        let back = restrict(&corestrict(&phi, &s).unwrap(), &s).unwrap();
        assert_eq!(back, phi);

        let phi_t = random_assignment(&g, &s.groupoid_generators(), &mut rng);
        let theta: Vec<_> = (0..=2).map(|_| g.random_element(&mut rng)).collect();
        let lhs = restrict(&groupoid_action(&theta, &phi_t), &s).unwrap();
        let rhs = restrict(&phi_t, &s).unwrap().conjugate(&theta[0]);
        for gen in s.group_generators() {
            assert!(lhs.get(gen).unwrap().distance(rhs.get(gen).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn fox_rules_and_finite_differences() {
        let g = LieGroup::<f64>::new(LieGroupSpec::su(2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let s = SurfaceData::new(1, 2).unwrap();
        let gens = s.group_generators();
        let phi = random_assignment(&g, &gens, &mut rng);
        let x = Word::gen(Generator::X(1));
        let id = fox_matrix(&g, &x, Generator::X(1), &phi).unwrap();
        assert!(max_abs(&(id - DMatrix::identity(3, 3))) < 1e-15);
        let inv = fox_matrix(&g, &x.inverse(), Generator::X(1), &phi).unwrap();
        let ad_inv = g.adjoint_matrix(&phi.get(Generator::X(1)).unwrap().inverse());
        assert!(max_abs(&(inv + ad_inv)) < 1e-14);

        // d/dt r(phi with g -> exp(tY) phi(g)) r^-1 at t = 0 equals Fox(r) Y.
        let r = relator(&s);
        let row = fox_row(&g, &r, &gens, &phi).unwrap();
        let r0 = phi.evaluate(&r).unwrap();
        let h = 1e-5;
        for (i, &gen) in gens.iter().enumerate() {
            let y = g.random_algebra(&mut rng, 1.0);
            let bump = |t: f64| {
                let mut p = phi.clone();
                let v = &g.exp(&y.scaled(t)) * p.get(gen).unwrap();
                p.set(gen, v);
                p.evaluate(&r).unwrap()
            };
            let fd = (bump(h).m - bump(-h).m) / Complex::new(2.0 * h, 0.0);
            let fd = g.project(&(fd * r0.m.adjoint()));
            let want = row.columns(i * 3, 3) * g.coords(&y);
            assert!((g.coords(&fd) - want).amax() < 1e-6);
        }
    }
}
