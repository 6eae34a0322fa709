use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::element::GroupElement;
use crate::magnus::SdmImage;

/// Injective, platform-independent byte serialization of a normal form.
///
/// Layout: one variant tag byte, then the payload. Integers are
/// little-endian (`i64` as 8 bytes, counts as `u32`), big integers are a
/// `u32` byte count followed by two's-complement little-endian bytes (zero
/// has no bytes). Every encoding is self-delimiting, so nested encodings are
/// concatenated without extra framing. Wreath lamp entries are emitted in
/// increasing order of their position key.
///
/// With this layout the identity of every group has the lexicographically
/// smallest key among the elements of that group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

const TAG_VECTOR: u8 = 0x01;
const TAG_RESIDUE: u8 = 0x02;
const TAG_WORD: u8 = 0x03;
const TAG_DIHEDRAL: u8 = 0x04;
const TAG_BS: u8 = 0x05;
const TAG_PAIR: u8 = 0x06;
const TAG_WREATH: u8 = 0x07;
const TAG_SDM_ABELIAN: u8 = 0x08;
const TAG_SDM_WREATH: u8 = 0x09;

impl CanonicalKey {
    pub fn of(g: &GroupElement) -> Self {
        let mut out = Vec::with_capacity(16);
        encode(g, &mut out);
        CanonicalKey(out)
    }

    pub fn of_sdm(s: &SdmImage) -> Self {
        let mut out = Vec::with_capacity(16);
        encode_sdm(s, &mut out);
        CanonicalKey(out)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

fn put_count(out: &mut Vec<u8>, n: usize) {
    out.extend_from_slice(&(u32::try_from(n).expect("count fits in u32")).to_le_bytes());
}

fn put_bigint(out: &mut Vec<u8>, x: &BigInt) {
    if x.is_zero() {
        put_count(out, 0);
    } else {
        let bytes = x.to_signed_bytes_le();
        put_count(out, bytes.len());
        out.extend_from_slice(&bytes);
    }
}

fn encode(g: &GroupElement, out: &mut Vec<u8>) {
    match g {
        GroupElement::Vector(v) => {
            out.push(TAG_VECTOR);
            put_count(out, v.len());
            for x in v {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        GroupElement::Residue(r) => {
            out.push(TAG_RESIDUE);
            out.extend_from_slice(&r.to_le_bytes());
        }
        GroupElement::Word(w) => {
            out.push(TAG_WORD);
            put_count(out, w.len());
            for l in w.letters() {
                out.extend_from_slice(&l.to_le_bytes());
            }
        }
        GroupElement::Dihedral { shift, flip } => {
            out.push(TAG_DIHEDRAL);
            out.extend_from_slice(&shift.to_le_bytes());
            out.push(*flip as u8);
        }
        GroupElement::Bs { a_exp, b_exp } => {
            out.push(TAG_BS);
            out.extend_from_slice(&a_exp.to_le_bytes());
            out.extend_from_slice(&b_exp.to_le_bytes());
        }
        GroupElement::Pair(a, b) => {
            out.push(TAG_PAIR);
            encode(a, out);
            encode(b, out);
        }
        GroupElement::Wreath(w) => {
            out.push(TAG_WREATH);
            put_count(out, w.lamps().len());
            let mut entries: Vec<(Vec<u8>, &GroupElement)> = w
                .lamps()
                .iter()
                .map(|(pos, value)| {
                    let mut k = Vec::new();
                    encode(pos, &mut k);
                    (k, value)
                })
                .collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            for (k, value) in entries {
                out.extend_from_slice(&k);
                encode(value, out);
            }
            encode(w.position(), out);
        }
        GroupElement::Solvable(s) => encode_sdm(s, out),
    }
}

fn encode_sdm(s: &SdmImage, out: &mut Vec<u8>) {
    match s {
        SdmImage::Abelian(v) => {
            out.push(TAG_SDM_ABELIAN);
            put_count(out, v.len());
            for x in v {
                put_bigint(out, x);
            }
        }
        SdmImage::Wreath(w) => {
            out.push(TAG_SDM_WREATH);
            put_count(out, w.lamps.len());
            let mut entries: Vec<(Vec<u8>, &Vec<BigInt>)> = w
                .lamps
                .iter()
                .map(|(pos, value)| {
                    let mut k = Vec::new();
                    encode_sdm(pos, &mut k);
                    (k, value)
                })
                .collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            for (k, value) in entries {
                out.extend_from_slice(&k);
                put_count(out, value.len());
                for x in value {
                    put_bigint(out, x);
                }
            }
            encode_sdm(&w.position, out);
        }
    }
}
