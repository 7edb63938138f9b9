use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

/// Exact rational number used for set endpoints.
pub type Q = BigRational;

/// Exact conversion of a finite float to a rational.
pub fn q_from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| domain(format!("{x} is not finite")))
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `floor(q)` as an `i64`.
pub fn floor_i64(q: &Q) -> i64 {
    q.floor().to_integer().to_i64().expect("cell index fits in i64")
}

/// A finite union of closed intervals `[a, b]` with `0 ≤ a ≤ b`; `a = b`
/// encodes an isolated point.
///
/// Pieces are kept sorted and pairwise disjoint; touching or overlapping
/// inputs are merged.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CompactSet1D {
    pieces: Vec<(Q, Q)>,
}

impl CompactSet1D {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(mut pieces: Vec<(Q, Q)>) -> Result<Self> {
        for (a, b) in &pieces {
            if a.is_negative() {
                return Err(domain(format!("left endpoint {a} is negative")));
            }
            if a > b {
                return Err(domain(format!("interval [{a}, {b}] is reversed")));
            }
        }
        if pieces.windows(2).any(|w| w[1].0 < w[0].0) {
            pieces.sort_by(|x, y| x.0.cmp(&y.0));
        }
        let mut merged: Vec<(Q, Q)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match merged.last_mut() {
                Some(last) if a <= last.1 => {
                    if b > last.1 {
                        last.1 = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        Ok(CompactSet1D { pieces: merged })
    }

    /// Build from float endpoints, converted exactly.
    pub fn from_f64(pieces: &[(f64, f64)]) -> Result<Self> {
        let qs = pieces
            .iter()
            .map(|&(a, b)| Ok((q_from_f64(a)?, q_from_f64(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(qs)
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::from_f64(&[(a, b)])
    }

    pub fn point(a: f64) -> Result<Self> {
        Self::from_f64(&[(a, a)])
    }

    /// A finite point cloud.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        let qs = points
            .iter()
            .map(|&p| q_from_f64(p).map(|q| (q.clone(), q)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(qs)
    }

    pub fn pieces(&self) -> &[(Q, Q)] {
        &self.pieces
    }

    pub fn pieces_f64(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().map(|(a, b)| (q_to_f64(a), q_to_f64(b))).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// True when every piece is a single point.
    pub fn is_finite(&self) -> bool {
        self.pieces.iter().all(|(a, b)| a == b)
    }

    pub fn length(&self) -> Q {
        self.pieces.iter().fold(Q::zero(), |acc, (a, b)| acc + (b - a))
    }

    pub fn min(&self) -> Option<&Q> {
        self.pieces.first().map(|p| &p.0)
    }

    pub fn max(&self) -> Option<&Q> {
        self.pieces.last().map(|p| &p.1)
    }

    pub fn contains(&self, x: &Q) -> bool {
        self.pieces.iter().any(|(a, b)| a <= x && x <= b)
    }

    pub fn union(&self, other: &CompactSet1D) -> CompactSet1D {
        let mut all = self.pieces.clone();
        all.extend(other.pieces.iter().cloned());
        Self::new(all).expect("union of valid sets is valid")
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &CompactSet1D) -> bool {
        self.pieces
            .iter()
            .all(|(a, b)| other.pieces.iter().any(|(c, e)| c <= a && b <= e))
    }
}

fn fmt_q(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Canonical text form: `a,b` pairs separated by `;`, e.g. `1,3/2;2,2`.
impl fmt::Display for CompactSet1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.pieces.iter().map(|(a, b)| format!("{},{}", fmt_q(a), fmt_q(b))).collect();
        f.write_str(&parts.join(";"))
    }
}

/// Parse `p`, `p/q` or a finite decimal such as `1.25` exactly.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = int_part.abs() * &scale + f;
        let numer = if neg { -mag } else { mag };
        return Ok(Q::new(numer, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(n))
}

impl FromStr for CompactSet1D {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let mut pieces = Vec::new();
        for part in s.split(';') {
            let part = part.trim();
            let (a, b) = match part.split_once(',') {
                Some((a, b)) => (parse_q(a)?, parse_q(b)?),
                None => {
                    let a = parse_q(part)?;
                    (a.clone(), a)
                }
            };
            pieces.push((a, b));
        }
        Self::new(pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_merges_and_sorts() {
        let f: CompactSet1D = "2,3;1,2;5,5;4,4".parse().unwrap();
        assert_eq!(f.to_string(), "1,3;4,4;5,5");
    }

    #[test]
    fn text_round_trip_is_exact() {
        let f: CompactSet1D = "1,3/2;2,2".parse().unwrap();
        assert_eq!(f.to_string(), "1,3/2;2,2");
        let g: CompactSet1D = f.to_string().parse().unwrap();
        assert_eq!(f, g);
        let h: CompactSet1D = "1.1,1.25".parse().unwrap();
        assert_eq!(h.to_string(), "11/10,5/4");
    }

    #[test]
    fn invalid_input_is_rejected() {
        assert!("2,1".parse::<CompactSet1D>().is_err());
        assert!("-1,1".parse::<CompactSet1D>().is_err());
        assert!("1,x".parse::<CompactSet1D>().is_err());
        assert!("1/0,1".parse::<CompactSet1D>().is_err());
    }

    #[test]
    fn subset_relation() {
        let f: CompactSet1D = "1,2".parse().unwrap();
        let g: CompactSet1D = "1,5/4;3/2,3/2".parse().unwrap();
        assert!(g.is_subset(&f));
        assert!(!f.is_subset(&g));
    }
}

impl serde::Serialize for CompactSet1D {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for CompactSet1D {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
