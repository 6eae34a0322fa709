use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use walklab::magnus::SdmImage;

/// Matrix-form image `[[g, Σ_i (∂w/∂x_i) t_i], [0, 1]]` over the group ring
/// of the previous level, built by multiplying generator matrices. Level 1
/// is the abelianization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Oracle {
    Ab(Vec<i64>),
    Mat(Box<Oracle>, BTreeMap<Oracle, Vec<i64>>),
}

impl Oracle {
    pub fn identity(d: usize, level: usize) -> Oracle {
        if level == 1 {
            Oracle::Ab(vec![0; d])
        } else {
            Oracle::Mat(Box::new(Oracle::identity(d, level - 1)), BTreeMap::new())
        }
    }

    /// Generator `x_i^{±1}` (letter `±(i+1)`).
    pub fn letter(d: usize, level: usize, l: i32) -> Oracle {
        let i = (l.unsigned_abs() - 1) as usize;
        let sign = l.signum() as i64;
        if level == 1 {
            let mut v = vec![0; d];
            v[i] = sign;
            return Oracle::Ab(v);
        }
        let g = Oracle::letter(d, level - 1, l);
        let mut e = vec![0; d];
        e[i] = sign;
        // x ↦ [[x̄, t_i]]; its inverse is [[x̄⁻¹, -x̄⁻¹ t_i]].
        let at = if sign > 0 { Oracle::identity(d, level - 1) } else { g.clone() };
        Oracle::Mat(Box::new(g), BTreeMap::from([(at, e)]))
    }

    pub fn mul(&self, other: &Oracle) -> Oracle {
        match (self, other) {
            (Oracle::Ab(a), Oracle::Ab(b)) => Oracle::Ab(a.iter().zip(b).map(|(x, y)| x + y).collect()),
            (Oracle::Mat(g1, v1), Oracle::Mat(g2, v2)) => {
                let mut v = v1.clone();
                for (k, c) in v2 {
                    let shifted = g1.mul(k);
                    let slot = v.entry(shifted).or_insert_with(|| vec![0; c.len()]);
                    for (s, x) in slot.iter_mut().zip(c) {
                        *s += x;
                    }
                }
                v.retain(|_, c| c.iter().any(|&x| x != 0));
                Oracle::Mat(Box::new(g1.mul(g2)), v)
            }
            _ => panic!("level mismatch"),
        }
    }

    pub fn of_word(w: &[i32], d: usize, level: usize) -> Oracle {
        w.iter().fold(Oracle::identity(d, level), |acc, &l| acc.mul(&Oracle::letter(d, level, l)))
    }

    pub fn of_image(s: &SdmImage) -> Oracle {
        let ints = |v: &[BigInt]| v.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>();
        match s {
            SdmImage::Abelian(v) => Oracle::Ab(ints(v)),
            SdmImage::Wreath(w) => Oracle::Mat(
                Box::new(Oracle::of_image(w.position())),
                w.lamps().iter().map(|(k, v)| (Oracle::of_image(k), ints(v))).collect(),
            ),
        }
    }
}
