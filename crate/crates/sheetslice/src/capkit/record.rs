//! Plain-text records for kernels and measures.
//!
//! ```text
//! kernel riesz(beta=0.5)
//! measure dim=1 atoms=2
//! 2.5000000000000000e-1 5.0000000000000000e-1
//! 7.5000000000000000e-1 5.0000000000000000e-1
//! ```
//!
//! Each atom line holds the coordinates followed by the weight, all with 17
//! significant digits so that values round-trip exactly.

use super::kernel::Kernel;
use super::measure::DiscreteMeasure;
use crate::error::{Error, Result};

pub fn to_record(k: &Kernel, mu: &DiscreteMeasure) -> String {
    let mut out = format!("kernel {k}\nmeasure dim={} atoms={}\n", mu.dim, mu.len());
    for i in 0..mu.len() {
        let mut cols: Vec<String> = mu.atom(i).iter().map(|x| format!("{x:.16e}")).collect();
        cols.push(format!("{:.16e}", mu.weights[i]));
        out.push_str(&cols.join(" "));
        out.push('\n');
    }
    out
}

/// Read back the measure of a record; the kernel line is returned verbatim.
pub fn from_record(text: &str) -> Result<(String, DiscreteMeasure)> {
    let bad = |m: &str| Error::Parse(format!("measure record: {m}"));
    let mut lines = text.lines();
    let kernel = lines
        .next()
        .and_then(|l| l.strip_prefix("kernel "))
        .ok_or_else(|| bad("missing kernel line"))?
        .to_string();
    let header = lines.next().ok_or_else(|| bad("missing measure line"))?;
    let mut dim = None;
    let mut count = None;
    for tok in header.split_whitespace().skip(1) {
        match tok.split_once('=') {
            Some(("dim", v)) => dim = v.parse::<usize>().ok(),
            Some(("atoms", v)) => count = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let (dim, count) = (dim.ok_or_else(|| bad("dim"))?, count.ok_or_else(|| bad("atoms"))?);
    let mut atoms = Vec::with_capacity(dim * count);
    let mut weights = Vec::with_capacity(count);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| bad("number")))
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != dim + 1 {
            return Err(bad("wrong column count"));
        }
        atoms.extend_from_slice(&vals[..dim]);
        weights.push(vals[dim]);
    }
    if weights.len() != count {
        return Err(bad("atom count mismatch"));
    }
    Ok((kernel, DiscreteMeasure::new(dim, atoms, weights)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trips() {
        let mu = DiscreteMeasure::new(1, vec![0.1, 1.0 / 3.0], vec![0.3, 0.7]).unwrap();
        let k = Kernel::riesz(0.5);
        let (name, back) = from_record(&to_record(&k, &mu)).unwrap();
        assert_eq!(name, "riesz(beta=0.5)");
        assert_eq!(back, mu);
    }
}
