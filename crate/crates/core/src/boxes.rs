//! Box algebra over the assignment hypercube.
//!
//! A box is a vector of trits. `T`/`F` pin a coordinate, `λ` spans both
//! values. A CNF clause negates to exactly one box: the set of assignments
//! the clause forbids.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Errors raised by box operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoxError {
    #[error("box length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("resolution undefined: boxes oppose at {pivots} positions (need exactly one)")]
    ResolutionUndefined { pivots: usize },
    #[error("sub-box of length {0} exceeds the cluster width of 4")]
    SubBoxTooLong(usize),
    #[error("invalid trit character {0:?}")]
    InvalidTrit(char),
}

/// One coordinate of a box.
///
/// The discriminants are the digits used by [`phi`], so a sub-box's slot
/// number can be computed straight from the representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Trit {
    Lambda = 1,
    False = 2,
    True = 3,
}

impl Trit {
    pub const ALL: [Trit; 3] = [Trit::Lambda, Trit::False, Trit::True];

    #[inline]
    pub fn digit(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn is_lambda(self) -> bool {
        self == Trit::Lambda
    }

    pub fn from_bool(value: bool) -> Trit {
        if value {
            Trit::True
        } else {
            Trit::False
        }
    }

    /// Componentwise merge used by resolution away from the pivot.
    /// `None` when the pair opposes (`T` against `F`).
    #[inline]
    pub fn merge(self, other: Trit) -> Option<Trit> {
        match (self, other) {
            (Trit::Lambda, x) | (x, Trit::Lambda) => Some(x),
            (x, y) if x == y => Some(x),
            _ => None,
        }
    }

    /// Single-trit containment: `self` covers `other`.
    #[inline]
    pub fn covers(self, other: Trit) -> bool {
        self == Trit::Lambda || self == other
    }

    fn symbol(self) -> char {
        match self {
            Trit::Lambda => '-',
            Trit::False => 'F',
            Trit::True => 'T',
        }
    }
}

/// A box over `n` variables, positions numbered from 1 in the ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxRep {
    trits: Vec<Trit>,
}

/// Position of the last non-λ trit (1-based); 0 for the all-λ box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoxIndex(pub usize);

impl BoxIndex {
    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for BoxIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl BoxRep {
    pub fn new(trits: Vec<Trit>) -> Self {
        BoxRep { trits }
    }

    /// The box covering the whole space.
    pub fn all_lambda(n: usize) -> Self {
        BoxRep { trits: vec![Trit::Lambda; n] }
    }

    /// The first probe point, `⟨F, F, …, F⟩`.
    pub fn all_false(n: usize) -> Self {
        BoxRep { trits: vec![Trit::False; n] }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        BoxRep { trits: values.iter().copied().map(Trit::from_bool).collect() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.trits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.trits.is_empty()
    }

    #[inline]
    pub fn trits(&self) -> &[Trit] {
        &self.trits
    }

    /// Trit at 1-based position `pos`.
    #[inline]
    pub fn get(&self, pos: usize) -> Trit {
        self.trits[pos - 1]
    }

    /// Sets the trit at 1-based position `pos`.
    #[inline]
    pub fn set(&mut self, pos: usize, t: Trit) {
        self.trits[pos - 1] = t;
    }

    pub fn is_all_lambda(&self) -> bool {
        self.trits.iter().all(|t| t.is_lambda())
    }

    /// A full point pins every coordinate.
    pub fn is_point(&self) -> bool {
        self.trits.iter().all(|t| !t.is_lambda())
    }

    pub fn lambda_count(&self) -> usize {
        self.trits.iter().filter(|t| t.is_lambda()).count()
    }

    pub fn index(&self) -> BoxIndex {
        index(self)
    }

    /// `Some(bool)` per coordinate for full points.
    pub fn to_bools(&self) -> Option<Vec<bool>> {
        self.trits
            .iter()
            .map(|t| match t {
                Trit::True => Some(true),
                Trit::False => Some(false),
                Trit::Lambda => None,
            })
            .collect()
    }

    /// Containment without the length check; callers guarantee equal length.
    #[inline]
    pub(crate) fn contains_unchecked(&self, other: &BoxRep) -> bool {
        self.trits.iter().zip(&other.trits).all(|(b, c)| b.covers(*c))
    }
}

impl fmt::Display for BoxRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.trits {
            write!(f, "{}", t.symbol())?;
        }
        Ok(())
    }
}

/// Parses the compact form: `F`, `T`, and `-` (or `λ`) for lambda.
impl FromStr for BoxRep {
    type Err = BoxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                'F' | 'f' => Ok(Trit::False),
                'T' | 't' => Ok(Trit::True),
                '-' | 'λ' | 'L' | 'l' => Ok(Trit::Lambda),
                other => Err(BoxError::InvalidTrit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BoxRep::new)
    }
}

fn check_len(b: &BoxRep, c: &BoxRep) -> Result<(), BoxError> {
    if b.len() != c.len() {
        return Err(BoxError::LengthMismatch { left: b.len(), right: c.len() });
    }
    Ok(())
}

/// `b` contains `c` when every coordinate of `b` equals `c`'s or is λ.
pub fn contains(b: &BoxRep, c: &BoxRep) -> Result<bool, BoxError> {
    check_len(b, c)?;
    Ok(b.contains_unchecked(c))
}

/// Resolves two boxes that oppose at exactly one pivot.
///
/// The result is λ at the pivot and the merge of both boxes elsewhere.
pub fn resolve(b: &BoxRep, c: &BoxRep) -> Result<BoxRep, BoxError> {
    check_len(b, c)?;
    let mut pivots = 0;
    let trits = b
        .trits
        .iter()
        .zip(&c.trits)
        .map(|(x, y)| {
            x.merge(*y).unwrap_or_else(|| {
                pivots += 1;
                Trit::Lambda
            })
        })
        .collect();
    if pivots != 1 {
        return Err(BoxError::ResolutionUndefined { pivots });
    }
    Ok(BoxRep { trits })
}

/// Resolution restricted to a pivot that is the last non-λ position of both
/// boxes.
pub fn tetris_resolvable(b: &BoxRep, c: &BoxRep) -> bool {
    if b.len() != c.len() {
        return false;
    }
    let k = index(b).0;
    if k == 0 || index(c).0 != k {
        return false;
    }
    let (x, y) = (b.get(k), c.get(k));
    if x.merge(y).is_some() {
        return false;
    }
    b.trits[..k - 1].iter().zip(&c.trits[..k - 1]).all(|(x, y)| x.merge(*y).is_some())
}

/// Bijective ternary numeration of a sub-box of length at most 4.
///
/// Digits are λ=1, F=2, T=3, most significant first, so lengths 0..=4 occupy
/// the slot ranges `0`, `1..=3`, `4..=12`, `13..=39`, `40..=120`.
pub fn phi(sub: &[Trit]) -> Result<u8, BoxError> {
    if sub.len() > 4 {
        return Err(BoxError::SubBoxTooLong(sub.len()));
    }
    Ok(phi_unchecked(sub))
}

#[inline]
pub(crate) fn phi_unchecked(sub: &[Trit]) -> u8 {
    sub.iter().fold(0u8, |acc, t| acc * 3 + t.digit())
}

/// Inverse of [`phi`].
pub fn phi_inverse(value: u8) -> Option<Vec<Trit>> {
    if value > 120 {
        return None;
    }
    let mut digits = Vec::with_capacity(4);
    let mut v = value;
    while v > 0 {
        // bijective base 3: digits run 1..=3
        let d = (v - 1) % 3 + 1;
        digits.push(Trit::ALL[(d - 1) as usize]);
        v = (v - d) / 3;
    }
    digits.reverse();
    Some(digits)
}

pub fn index(b: &BoxRep) -> BoxIndex {
    BoxIndex(b.trits.iter().rposition(|t| !t.is_lambda()).map_or(0, |i| i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(s: &str) -> BoxRep {
        s.parse().unwrap()
    }

    #[test]
    fn containment_examples() {
        assert!(contains(&bx("F--"), &bx("FFF")).unwrap());
        for p in ["FFF", "TFT", "T-F", "---"] {
            assert!(contains(&bx("---"), &bx(p)).unwrap());
        }
        assert!(!contains(&bx("-FF"), &bx("TFT")).unwrap());
        assert_eq!(contains(&bx("F-"), &bx("FFF")), Err(BoxError::LengthMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn resolution_examples() {
        assert_eq!(resolve(&bx("FF-"), &bx("FT-")).unwrap(), bx("F--"));
        assert_eq!(resolve(&bx("FT-"), &bx("-FF")).unwrap(), bx("F-F"));
        assert_eq!(resolve(&bx("TFT"), &bx("-FF")).unwrap(), bx("TF-"));
    }

    #[test]
    fn resolution_needs_exactly_one_pivot() {
        assert_eq!(resolve(&bx("FF-"), &bx("FF-")), Err(BoxError::ResolutionUndefined { pivots: 0 }));
        assert_eq!(resolve(&bx("FF-"), &bx("TT-")), Err(BoxError::ResolutionUndefined { pivots: 2 }));
    }

    #[test]
    fn tetris_resolvable_examples() {
        assert!(tetris_resolvable(&bx("FF-"), &bx("FT-")));
        assert!(!tetris_resolvable(&bx("FT-"), &bx("-FF")));
        assert!(tetris_resolvable(&bx("TTT"), &bx("TTF")));
        assert!(!tetris_resolvable(&bx("---"), &bx("---")));
        // opposing earlier as well as at the index
        assert!(!tetris_resolvable(&bx("TTT"), &bx("FTF")));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&[]).unwrap(), 0);
        assert_eq!(phi(&[Trit::False]).unwrap(), 2);
        assert_eq!(phi(&[Trit::False, Trit::True]).unwrap(), 9);
        assert_eq!(phi(&[Trit::Lambda; 4]).unwrap(), 40);
        assert_eq!(phi(&[Trit::True; 4]).unwrap(), 120);
        assert_eq!(phi(&[Trit::True; 5]), Err(BoxError::SubBoxTooLong(5)));
    }

    #[test]
    fn phi_is_a_bijection_onto_0_120() {
        // brute-force scan of every sub-box of length 0..=4
        let mut seen = [false; 121];
        let mut subs: Vec<Vec<Trit>> = vec![vec![]];
        let mut frontier = subs.clone();
        for _ in 0..4 {
            frontier = frontier
                .iter()
                .flat_map(|s| {
                    Trit::ALL.iter().map(move |t| {
                        let mut e = s.clone();
                        e.push(*t);
                        e
                    })
                })
                .collect();
            subs.extend(frontier.iter().cloned());
        }
        assert_eq!(subs.len(), 121);
        for s in &subs {
            let v = phi(s).unwrap() as usize;
            assert!(!seen[v], "collision at {v}");
            seen[v] = true;
            assert_eq!(phi_inverse(v as u8).unwrap(), *s);
            let range = match s.len() {
                0 => 0..=0,
                1 => 1..=3,
                2 => 4..=12,
                3 => 13..=39,
                _ => 40..=120,
            };
            assert!(range.contains(&v));
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn index_examples() {
        assert_eq!(index(&bx("FT-F-")), BoxIndex(4));
        assert_eq!(index(&bx("---")), BoxIndex(0));
        assert_eq!(index(&bx("F--")), BoxIndex(1));
    }

    #[test]
    fn display_round_trip() {
        let b = bx("FT-F-");
        assert_eq!(b.to_string(), "FT-F-");
        assert_eq!(b.to_string().parse::<BoxRep>().unwrap(), b);
        assert_eq!("⟨F,λ,λ⟩".trim_matches(|c| c == '⟨' || c == '⟩').parse::<BoxRep>().unwrap(), bx("F--"));
    }
}
