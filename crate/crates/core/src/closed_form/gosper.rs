//! The coin-race identity: flip until one side has come up `N` times.

use serde::{Deserialize, Serialize};

use crate::arith::{choose, Probability, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GosperParams {
    pub p: Probability,
    pub n: u32,
}

impl GosperParams {
    pub fn new(p: Probability, n: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::OutOfRange("race length N must be at least 1".into()));
        }
        Ok(GosperParams { p, n })
    }
}

/// `(heads wins with k tails, tails wins with k heads)` for `k = 0..N`:
/// `C(N+k-1, k) p^N (1-p)^k` and `C(N+k-1, k) (1-p)^N p^k`.
pub fn gosper_terms(params: &GosperParams) -> Result<Vec<(Rational, Rational)>> {
    let n = params.n;
    if n < 1 {
        return Err(Error::OutOfRange("race length N must be at least 1".into()));
    }
    let p = params.p.value();
    let q = p.complement();
    let (pn, qn) = (p.pow(n), q.pow(n));
    Ok((0..n)
        .map(|k| {
            let coeff = Rational::from(choose((n + k - 1) as u64, k as u64));
            (&coeff * &pn * q.pow(k), coeff * &qn * p.pow(k))
        })
        .collect())
}

pub fn gosper_total(params: &GosperParams) -> Result<Rational> {
    Ok(gosper_terms(params)?.into_iter().map(|(a, b)| a + b).sum())
}
