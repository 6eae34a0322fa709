use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{Entropy, FiniteMeasure, Weight};

/// `H(μ^{*n})` for `n = 0..=n_max`.
///
/// An entropy ladder brackets the asymptotic entropy: `d_n = H_{n+1} - H_n`
/// is a nonincreasing upper bound converging to `h(μ)`, and `H_n / n` is the
/// running average, which sits above `d_n`. Reports always carry both.
#[derive(Clone, Debug)]
pub struct EntropyLadder<H: Entropy> {
    label: String,
    h: Vec<H>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    pub n: usize,
    pub h: f64,
    pub ratio: Option<f64>,
    pub diff: Option<f64>,
}

/// Outcome of the three ladder invariants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub subadditive: bool,
    pub diffs_nonincreasing: bool,
    pub diff_below_ratio: bool,
    /// First violation found, if any, as text.
    pub violation: Option<String>,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.subadditive && self.diffs_nonincreasing && self.diff_below_ratio
    }
}

impl<H: Entropy> EntropyLadder<H> {
    pub fn from_values(label: impl Into<String>, h: Vec<H>) -> Self {
        assert!(!h.is_empty(), "a ladder holds at least H_0");
        EntropyLadder { label: label.into(), h }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_max(&self) -> usize {
        self.h.len() - 1
    }

    pub fn entropies(&self) -> &[H] {
        &self.h
    }

    pub fn h(&self, n: usize) -> &H {
        &self.h[n]
    }

    pub fn h_f64(&self, n: usize) -> f64 {
        self.h[n].to_f64()
    }

    /// `H_n / n` for `n >= 1`.
    pub fn ratio(&self, n: usize) -> Option<f64> {
        (n >= 1).then(|| self.h_f64(n) / n as f64)
    }

    /// `d_n = H_{n+1} - H_n` for `n < n_max`.
    pub fn diff(&self, n: usize) -> Option<H> {
        (n < self.n_max()).then(|| self.h[n + 1].sub(&self.h[n]))
    }

    pub fn diff_f64(&self, n: usize) -> Option<f64> {
        self.diff(n).map(|d| d.to_f64())
    }

    /// `(d_n, H_n / n)`: upper bound and running ratio.
    pub fn bracket(&self, n: usize) -> Option<(f64, f64)> {
        Some((self.diff_f64(n)?, self.ratio(n)?))
    }

    pub fn rows(&self) -> Vec<LadderRow> {
        (0..=self.n_max())
            .map(|n| LadderRow { n, h: self.h_f64(n), ratio: self.ratio(n), diff: self.diff_f64(n) })
            .collect()
    }

    /// CSV with header `n,H,ratio,diff`; missing values are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,H,ratio,diff\n");
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.15}")).unwrap_or_default();
        for r in self.rows() {
            let _ = writeln!(out, "{},{:.15},{},{}", r.n, r.h, opt(r.ratio), opt(r.diff));
        }
        out
    }

    /// Sum of two ladders of equal length (entropy of a product measure).
    pub fn add(&self, other: &Self, label: impl Into<String>) -> Result<Self> {
        if self.h.len() != other.h.len() {
            return Err(Error::InvalidParameter("ladders of different lengths".into()));
        }
        Ok(EntropyLadder { label: label.into(), h: self.h.iter().zip(&other.h).map(|(a, b)| a.add(b)).collect() })
    }

    /// Checks subadditivity, monotone differences and `d_n <= H_n / n` at
    /// every computed index. Exact for rational ladders.
    pub fn check_invariants(&self) -> Result<InvariantReport> {
        let mut report =
            InvariantReport { subadditive: true, diffs_nonincreasing: true, diff_below_ratio: true, violation: None };
        let nm = self.n_max();
        let h = &self.h;
        'sub: for n in 1..=nm {
            for m in n..=(nm - n) {
                if h[n + m].compare(&h[n].add(&h[m]))? == Ordering::Greater {
                    report.subadditive = false;
                    report.violation = Some(format!("H_{} > H_{n} + H_{m}", n + m));
                    break 'sub;
                }
            }
        }
        for n in 0..nm.saturating_sub(1) {
            // d_{n+1} <= d_n  <=>  H_{n+2} + H_n <= 2 H_{n+1}
            if h[n + 2].add(&h[n]).compare(&h[n + 1].times(2))? == Ordering::Greater {
                report.diffs_nonincreasing = false;
                report.violation.get_or_insert_with(|| format!("d_{} > d_{n}", n + 1));
                break;
            }
        }
        for n in 1..nm {
            // d_n <= H_n / n  <=>  n H_{n+1} <= (n + 1) H_n
            if h[n + 1].times(n as u64).compare(&h[n].times(n as u64 + 1))? == Ordering::Greater {
                report.diff_below_ratio = false;
                report.violation.get_or_insert_with(|| format!("d_{n} > H_{n}/{n}"));
                break;
            }
        }
        Ok(report)
    }
}

/// Exact ladder `H(μ^{*n})`, `n = 0..=n_max`, by repeated convolution.
/// A cap failure reports the largest completed exponent.
pub fn entropy_ladder<W: Weight>(mu: &FiniteMeasure<W>, n_max: usize, cap: usize) -> Result<EntropyLadder<W::H>> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be >= 1".into()));
    }
    let mut cur = FiniteMeasure::identity_mass(mu.spec().clone());
    let mut h = vec![cur.entropy()];
    for n in 1..=n_max {
        cur = cur.convolve(mu, cap).map_err(|e| match e {
            Error::SupportCap { cap, .. } => Error::SupportCap { cap, completed: n - 1 },
            other => other,
        })?;
        h.push(cur.entropy());
    }
    Ok(EntropyLadder::from_values(format!("measure on {}", mu.spec()), h))
}

/// Ladder of the simple random walk on the free group of rank `d` (uniform on
/// the `2d` generators and inverses), computed through the radial chain.
///
/// The law of `w_n` is uniform on each sphere, so
/// `H(w_n) = H(|w_n|) + E[ln |S_{|w_n|}|]` with `|S_k| = 2d (2d-1)^{k-1}`.
pub fn free_group_srw_ladder<W: Weight>(d: usize, n_max: usize) -> Result<EntropyLadder<W::H>> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("free group rank must be >= 2, got {d}")));
    }
    let two_d = 2 * d as i64;
    let up = W::from_ratio(two_d - 1, two_d);
    let down = W::from_ratio(1, two_d);
    let mut dist: Vec<W> = vec![W::one()];
    let mut h = vec![<W::H as Entropy>::zero()];
    for _ in 1..=n_max {
        let mut next = vec![W::zero(); dist.len() + 1];
        for (k, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            if k == 0 {
                next[1].add_assign(p);
            } else {
                next[k + 1].add_assign(&p.mul(&up));
                next[k - 1].add_assign(&p.mul(&down));
            }
        }
        dist = next;
        let mut radial = <W::H as Entropy>::zero();
        let mut mass_beyond_origin = W::zero();
        let mut weighted_len = W::zero();
        for (k, p) in dist.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            radial = radial.add(&p.entropy_term());
            if k >= 1 {
                mass_beyond_origin.add_assign(p);
                weighted_len.add_assign(&p.scale_int(k as i64 - 1));
            }
        }
        // E[ln|S_k|] = P(k >= 1) ln(2d) + E[(k-1)_+] ln(2d-1)
        let sphere = mass_beyond_origin.times_ln(two_d as u64).add(&weighted_len.times_ln(two_d as u64 - 1));
        h.push(radial.add(&sphere));
    }
    Ok(EntropyLadder::from_values(format!("srw on F{d}"), h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupElement, GroupSpec};
    use crate::measures::{families, LogLinear, Rational, DEFAULT_SUPPORT_CAP};

    fn pm1() -> FiniteMeasure<Rational> {
        FiniteMeasure::uniform(GroupSpec::Lattice(1), vec![GroupElement::scalar(1), GroupElement::scalar(-1)]).unwrap()
    }

    #[test]
    fn dirac_ladder_is_zero() {
        let m = FiniteMeasure::<Rational>::dirac(GroupSpec::Dihedral, GroupElement::dihedral_a()).unwrap();
        let l = entropy_ladder(&m, 6, DEFAULT_SUPPORT_CAP).unwrap();
        assert!(l.entropies().iter().all(LogLinear::is_zero));
        assert!(l.check_invariants().unwrap().all_hold());
    }

    #[test]
    fn pm1_second_entropy() {
        let l = entropy_ladder(&pm1(), 4, DEFAULT_SUPPORT_CAP).unwrap();
        let expected = LogLinear::ln_of(2, Rational::from_ratio(3, 2));
        assert!(l.h(2).sub(&expected).is_zero());
        assert!((l.h_f64(2) - 1.039720770839918).abs() < 1e-12);
        assert!(l.check_invariants().unwrap().all_hold());
    }

    #[test]
    fn free_ladder_first_steps() {
        let l = free_group_srw_ladder::<Rational>(2, 3).unwrap();
        assert!(l.h(1).sub(&LogLinear::ln_of(4, Rational::from_ratio(1, 1))).is_zero());
        // n = 2: identity w.p. 1/4, uniform on the 12 words of length 2 otherwise
        let h2 = LogLinear::entropy_term(&Rational::from_ratio(1, 4))
            .add(&LogLinear::entropy_term(&Rational::from_ratio(1, 16)).scale(&Rational::from_ratio(12, 1)));
        assert!(l.h(2).sub(&h2).is_zero());
    }

    #[test]
    fn free_ladder_matches_convolution() {
        let eta = families::free_generators_uniform::<Rational>(2).unwrap();
        let direct = entropy_ladder(&eta, 5, DEFAULT_SUPPORT_CAP).unwrap();
        let radial = free_group_srw_ladder::<Rational>(2, 5).unwrap();
        for n in 0..=5 {
            assert!(direct.h(n).sub(radial.h(n)).is_zero(), "n = {n}");
        }
    }

    #[test]
    fn detects_violations() {
        let bad = EntropyLadder::from_values("bad", vec![0.0, 1.0, 3.0]);
        let r = bad.check_invariants().unwrap();
        assert!(!r.subadditive && !r.diffs_nonincreasing && !r.diff_below_ratio);
    }

    #[test]
    fn cap_reports_completed() {
        let err = entropy_ladder(&pm1(), 10, 5).unwrap_err();
        assert_eq!(err, Error::SupportCap { cap: 5, completed: 4 });
    }

    #[test]
    fn csv_shape() {
        let l = entropy_ladder(&pm1().to_float(), 2, 100).unwrap();
        let csv = l.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "n,H,ratio,diff");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with(','));
    }
}
