use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::set::{floor_i64, q_from_f64, CompactSet1D, Q};
use crate::error::{domain, Result};

/// Number of half-open cells `[i/n, (i+1)/n)` that meet `F`.
pub fn minkowski_content(f: &CompactSet1D, n: u64) -> Result<u64> {
    if n == 0 {
        return Err(domain("minkowski_content needs n ≥ 1"));
    }
    let nq = Q::from_integer(BigInt::from(n));
    let mut total: u64 = 0;
    let mut last: Option<i64> = None;
    for (a, b) in f.pieces() {
        let lo = floor_i64(&(a * &nq));
        let hi = floor_i64(&(b * &nq));
        let lo = match last {
            Some(l) if lo <= l => l + 1,
            _ => lo,
        };
        if hi >= lo {
            total += (hi - lo + 1) as u64;
        }
        last = Some(last.map_or(hi, |l| l.max(hi)));
    }
    Ok(total)
}

fn check_eps(eps: &Q) -> Result<()> {
    if !eps.is_positive() {
        return Err(domain("ε must be positive"));
    }
    Ok(())
}

/// Greedy left-to-right ε-separated selection, calling `emit` for every
/// chosen block `start, start+ε, …` (count points) and returning the total.
///
/// In one dimension the greedy choice is maximal: any ε-separated subset can
/// be shifted point by point onto the greedy one without losing points.
fn greedy<Fn_: FnMut(&Q, u64)>(f: &CompactSet1D, eps: &Q, mut emit: Fn_) -> u64 {
    let mut prev: Option<Q> = None;
    let mut total = 0u64;
    for (a, b) in f.pieces() {
        let start = match &prev {
            Some(p) => {
                let next = p + eps;
                if &next > a {
                    next
                } else {
                    a.clone()
                }
            }
            None => a.clone(),
        };
        if &start > b {
            continue;
        }
        let steps = ((b - &start) / eps).floor().to_integer().to_u64().expect("count fits in u64");
        let count = steps + 1;
        emit(&start, count);
        total += count;
        prev = Some(&start + eps * Q::from_integer(BigInt::from(steps)));
    }
    total
}

/// `K_F(ε)`: the largest size of an ε-separated subset of `F`.
pub fn kolmogorov_count(f: &CompactSet1D, eps: &Q) -> Result<u64> {
    check_eps(eps)?;
    Ok(greedy(f, eps, |_, _| {}))
}

/// `K_F(ε)` for a float ε, converted exactly.
pub fn kolmogorov_count_f64(f: &CompactSet1D, eps: f64) -> Result<u64> {
    kolmogorov_count(f, &q_from_f64(eps)?)
}

/// `K_F(ε)` together with a witnessing ε-separated sequence.
pub fn kolmogorov_entropy(f: &CompactSet1D, eps: &Q) -> Result<(u64, Vec<Q>)> {
    check_eps(eps)?;
    let mut pts = Vec::new();
    let k = greedy(f, eps, |start, count| {
        let mut x = start.clone();
        for _ in 0..count {
            pts.push(x.clone());
            x += eps;
        }
    });
    Ok((k, pts))
}

/// `K_F(1/n) ≤ M_n(F) ≤ 3 K_F(1/n)`, checked in exact integers.
pub fn check_entropy_content(f: &CompactSet1D, n: u64) -> Result<bool> {
    let eps = Q::new(BigInt::from(1), BigInt::from(n.max(1)));
    let k = kolmogorov_count(f, &eps)?;
    let m = minkowski_content(f, n)?;
    Ok(k <= m && m <= 3 * k)
}

/// `K_F(ε) ≤ 6 K_F(2ε)`, checked in exact integers.
pub fn check_entropy_doubling(f: &CompactSet1D, eps: &Q) -> Result<bool> {
    let k1 = kolmogorov_count(f, eps)?;
    let k2 = kolmogorov_count(f, &(eps * Q::from_integer(BigInt::from(2))))?;
    Ok(k1 <= 6 * k2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str) -> CompactSet1D {
        s.parse().unwrap()
    }

    fn q(s: &str) -> Q {
        super::super::set::parse_q(s).unwrap()
    }

    #[test]
    fn content_examples() {
        assert_eq!(minkowski_content(&set("1/4,1/4"), 7).unwrap(), 1);
        assert_eq!(minkowski_content(&set("1,2"), 4).unwrap(), 5);
        // Cells [1, 1.5), [1.5, 2) and [2, 2.5): the right endpoint 2 opens
        // a cell of its own under the half-open convention.
        assert_eq!(minkowski_content(&set("1,1.1;1.9,2"), 2).unwrap(), 3);
        assert!(minkowski_content(&set("1,2"), 0).is_err());
        assert_eq!(minkowski_content(&CompactSet1D::empty(), 3).unwrap(), 0);
    }

    #[test]
    fn entropy_examples() {
        let (k, pts) = kolmogorov_entropy(&set("1,2"), &q("1/2")).unwrap();
        assert_eq!(k, 3);
        assert_eq!(pts, vec![q("1"), q("3/2"), q("2")]);
        assert_eq!(kolmogorov_count(&set("5/3,5/3"), &q("1/100")).unwrap(), 1);
        assert_eq!(kolmogorov_entropy(&CompactSet1D::empty(), &q("1")).unwrap(), (0, vec![]));
        assert!(kolmogorov_count(&set("1,2"), &q("0")).is_err());
    }

    #[test]
    fn greedy_carries_separation_across_pieces() {
        // After 1 the next admissible point is 3/2, inside the second piece.
        let f = set("1,5/4;13/10,2");
        let (k, pts) = kolmogorov_entropy(&f, &q("1/2")).unwrap();
        assert_eq!(k, 3);
        assert_eq!(pts, vec![q("1"), q("3/2"), q("2")]);
    }

    #[test]
    fn inequality_examples() {
        assert!(check_entropy_content(&set("1,2"), 4).unwrap());
        assert!(check_entropy_content(&set("3/2,3/2"), 1000).unwrap());
        assert!(check_entropy_doubling(&set("1,2"), &q("1/10")).unwrap());
        assert!(check_entropy_doubling(&set("1,1;13/10,13/10"), &q("1/5")).unwrap());
        assert!(check_entropy_doubling(&set("1,1"), &q("1/5")).unwrap());
    }
}
