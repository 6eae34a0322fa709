//! Free solvable groups `S(d, m) = F_d / F_d^(m)` through the Magnus embedding.
//!
//! The embedding `F_d -> Z^d ≀ (F_d / N)` sends `x_i` to the element with a
//! single lamp `e_i` at the identity and base position `π(x_i)`. Its kernel
//! is `[N, N]`, so taking `N = F_d^(m-1)` and recursing on the base gives an
//! injective image of `S(d, m)` inside the `m`-fold iterated wreath product
//! of `Z^d`. Equality in `S(d, m)` is equality of images.
//!
//! Images are computed by a left-to-right prefix scan over the letters; the
//! accumulated lamp map is the image of the Fox derivatives of the word in
//! `Z(F_d / N)^d`. Lamp coefficients are arbitrary precision.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
pub use crate::group::FreeWord;

/// Image of a word at some level of the iterated Magnus embedding.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SdmImage {
    /// Level 1: the abelianization, an exponent-sum vector.
    Abelian(Vec<BigInt>),
    /// Level `m >= 2`: lamps in `Z^d` over level `m - 1` positions.
    Wreath(Box<SdmWreath>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SdmWreath {
    pub(crate) lamps: BTreeMap<SdmImage, Vec<BigInt>>,
    pub(crate) position: SdmImage,
}

impl SdmWreath {
    pub fn lamps(&self) -> &BTreeMap<SdmImage, Vec<BigInt>> {
        &self.lamps
    }

    pub fn position(&self) -> &SdmImage {
        &self.position
    }
}

impl SdmImage {
    pub fn identity(rank: usize, level: usize) -> SdmImage {
        assert!(level >= 1, "levels start at 1");
        if level == 1 {
            SdmImage::Abelian(vec![BigInt::zero(); rank])
        } else {
            SdmImage::Wreath(Box::new(SdmWreath {
                lamps: BTreeMap::new(),
                position: SdmImage::identity(rank, level - 1),
            }))
        }
    }

    pub fn level(&self) -> usize {
        match self {
            SdmImage::Abelian(_) => 1,
            SdmImage::Wreath(w) => 1 + w.position.level(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            SdmImage::Abelian(v) => v.len(),
            SdmImage::Wreath(w) => w.position.rank(),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            SdmImage::Abelian(v) => v.iter().all(Zero::is_zero),
            SdmImage::Wreath(w) => w.lamps.is_empty() && w.position.is_identity(),
        }
    }

    /// Number of lamp entries at the top level (0 for level 1).
    pub fn lamp_count(&self) -> usize {
        match self {
            SdmImage::Abelian(_) => 0,
            SdmImage::Wreath(w) => w.lamps.len(),
        }
    }

    pub fn as_wreath(&self) -> Option<&SdmWreath> {
        match self {
            SdmImage::Wreath(w) => Some(w),
            SdmImage::Abelian(_) => None,
        }
    }

    /// Base projection applied until level `j` is reached.
    pub fn project_to_level(&self, j: usize) -> Result<SdmImage> {
        let level = self.level();
        if j == 0 || j > level {
            return Err(Error::LevelOutOfRange { level: j, max: level });
        }
        let mut cur = self;
        while cur.level() > j {
            cur = match cur {
                SdmImage::Wreath(w) => &w.position,
                SdmImage::Abelian(_) => unreachable!(),
            };
        }
        Ok(cur.clone())
    }

    /// Right-multiplies in place by the image of one letter (`±i`).
    fn apply_letter(&mut self, letter: i32) {
        let i = letter.unsigned_abs() as usize - 1;
        match self {
            SdmImage::Abelian(v) => {
                v[i] += letter.signum();
            }
            SdmImage::Wreath(w) => {
                if letter > 0 {
                    add_basis(&mut w.lamps, w.position.clone(), i, 1);
                    w.position.apply_letter(letter);
                } else {
                    w.position.apply_letter(letter);
                    add_basis(&mut w.lamps, w.position.clone(), i, -1);
                }
            }
        }
    }
}

fn add_basis(lamps: &mut BTreeMap<SdmImage, Vec<BigInt>>, at: SdmImage, i: usize, sign: i32) {
    let d = at.rank();
    let mut unit = vec![BigInt::zero(); d];
    unit[i] = BigInt::from(sign);
    add_vector(lamps, at, &unit);
}

fn add_vector(lamps: &mut BTreeMap<SdmImage, Vec<BigInt>>, at: SdmImage, v: &[BigInt]) {
    match lamps.get_mut(&at) {
        Some(existing) => {
            for (a, b) in existing.iter_mut().zip(v) {
                *a += b;
            }
            if existing.iter().all(Zero::is_zero) {
                lamps.remove(&at);
            }
        }
        None => {
            lamps.insert(at, v.to_vec());
        }
    }
}

/// Exponent-sum vector of `w` in `Z^d`.
pub fn abelianize(w: &FreeWord, rank: usize) -> Result<Vec<BigInt>> {
    w.check_rank(rank)?;
    let mut v = vec![BigInt::zero(); rank];
    for &l in w.letters() {
        v[l.unsigned_abs() as usize - 1] += l.signum();
    }
    Ok(v)
}

/// Image of `w` in the level-`m` tower; `m = 1` is the abelianization.
pub fn magnus_embed(w: &FreeWord, rank: usize, level: usize) -> Result<SdmImage> {
    magnus_embed_capped(w, rank, level, usize::MAX)
}

/// As [`magnus_embed`], failing once any top-level lamp map exceeds `cap`
/// entries.
pub fn magnus_embed_capped(w: &FreeWord, rank: usize, level: usize, cap: usize) -> Result<SdmImage> {
    if level == 0 {
        return Err(Error::LevelOutOfRange { level, max: usize::MAX });
    }
    if rank == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    w.check_rank(rank)?;
    let mut image = SdmImage::identity(rank, level);
    for &l in w.letters() {
        image.apply_letter(l);
        if image.lamp_count() > cap {
            return Err(Error::SupportCap { cap, completed: 0 });
        }
    }
    Ok(image)
}

/// Whether `w` is trivial in `S(d, m)`.
pub fn is_identity_in_sdm(w: &FreeWord, rank: usize, level: usize) -> Result<bool> {
    Ok(magnus_embed(w, rank, level)?.is_identity())
}

fn check_compatible(g: &SdmImage, h: &SdmImage) -> Result<()> {
    if g.level() != h.level() || g.rank() != h.rank() {
        return Err(Error::SpecMismatch {
            spec: format!("S({},{}) vs S({},{})", g.rank(), g.level(), h.rank(), h.level()),
        });
    }
    Ok(())
}

/// Wreath-law product at every level.
pub fn sdm_multiply(g: &SdmImage, h: &SdmImage) -> Result<SdmImage> {
    check_compatible(g, h)?;
    Ok(mul_unchecked(g, h))
}

fn mul_unchecked(g: &SdmImage, h: &SdmImage) -> SdmImage {
    match (g, h) {
        (SdmImage::Abelian(a), SdmImage::Abelian(b)) => SdmImage::Abelian(a.iter().zip(b).map(|(x, y)| x + y).collect()),
        (SdmImage::Wreath(a), SdmImage::Wreath(b)) => {
            let mut lamps = a.lamps.clone();
            for (pos, v) in &b.lamps {
                add_vector(&mut lamps, mul_unchecked(&a.position, pos), v);
            }
            SdmImage::Wreath(Box::new(SdmWreath { lamps, position: mul_unchecked(&a.position, &b.position) }))
        }
        _ => unreachable!("levels checked"),
    }
}

pub fn sdm_inverse(g: &SdmImage) -> SdmImage {
    match g {
        SdmImage::Abelian(a) => SdmImage::Abelian(a.iter().map(|x| -x).collect()),
        SdmImage::Wreath(w) => {
            let xinv = sdm_inverse(&w.position);
            let lamps = w
                .lamps
                .iter()
                .map(|(pos, v)| (mul_unchecked(&xinv, pos), v.iter().map(|x| -x).collect()))
                .collect();
            SdmImage::Wreath(Box::new(SdmWreath { lamps, position: xinv }))
        }
    }
}

/// A random freely reduced word of `F_d^(r)` (`r = 0` gives an arbitrary
/// word), built as nested commutators of random words. `budget` bounds the
/// length of the level-0 words times `4^r`.
pub fn random_derived_series_word<R: Rng + ?Sized>(rank: usize, level: usize, budget: usize, rng: &mut R) -> Result<FreeWord> {
    if rank == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    let scale = 4usize.checked_pow(level as u32).ok_or_else(|| Error::InvalidParameter("level too large".into()))?;
    let base_len = budget / scale;
    if base_len == 0 {
        return Err(Error::InvalidParameter(format!(
            "budget {budget} too small for derived level {level} (needs at least {scale})"
        )));
    }
    // a few retries so that accidental cancellation to the empty word is rare
    let mut last = FreeWord::identity();
    for _ in 0..16 {
        last = nested_commutator(rank, level, base_len, rng);
        if !last.is_empty() {
            break;
        }
    }
    Ok(last)
}

fn nested_commutator<R: Rng + ?Sized>(rank: usize, level: usize, base_len: usize, rng: &mut R) -> FreeWord {
    if level == 0 {
        let len = rng.gen_range(1..=base_len);
        return random_reduced_word(rank, len, rng);
    }
    let u = nested_commutator(rank, level - 1, base_len, rng);
    let v = nested_commutator(rank, level - 1, base_len, rng);
    FreeWord::commutator(&u, &v)
}

/// Uniformly random reduced word of exactly `len` letters.
pub fn random_reduced_word<R: Rng + ?Sized>(rank: usize, len: usize, rng: &mut R) -> FreeWord {
    let mut letters: Vec<i32> = Vec::with_capacity(len);
    while letters.len() < len {
        let i = rng.gen_range(1..=rank as i32);
        let l = if rng.gen_bool(0.5) { i } else { -i };
        if letters.last() != Some(&-l) {
            letters.push(l);
        }
    }
    FreeWord::from_letters(letters).expect("letters are nonzero")
}

/// Random word of length at most `max_len` (possibly with cancellation).
pub fn random_word<R: Rng + ?Sized>(rank: usize, max_len: usize, rng: &mut R) -> FreeWord {
    let len = rng.gen_range(0..=max_len);
    let letters = (0..len).map(|_| {
        let i = rng.gen_range(1..=rank as i32);
        if rng.gen_bool(0.5) {
            i
        } else {
            -i
        }
    });
    FreeWord::from_letters(letters).expect("letters are nonzero")
}

impl fmt::Display for SdmImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SdmImage::Abelian(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            SdmImage::Wreath(w) => {
                write!(f, "({{")?;
                for (i, (pos, v)) in w.lamps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{pos}->{}", SdmImage::Abelian(v.clone()))?;
                }
                write!(f, "}}, {})", w.position)
            }
        }
    }
}
