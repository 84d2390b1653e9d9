//! Fock bases over bitstrings: bit k set means a particle on site k+1.

use crate::error::{Error, Result};

/// Largest supported chain.
pub const MAX_SITES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_sites: usize,
    sector: Option<usize>,
    dim: usize,
    /// Sector bitstrings in increasing numeric order; empty for the full basis.
    states: Vec<u32>,
    /// `binom[p][t] = C(p, t)`.
    binom: Vec<Vec<usize>>,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

impl FockBasis {
    /// Full `2^N` basis, or the fixed-popcount sector when `sector` is given.
    pub fn new(n_sites: usize, sector: Option<usize>) -> Result<Self> {
        if n_sites > MAX_SITES {
            return Err(Error::Resource(format!(
                "{n_sites} sites exceeds the ceiling of {MAX_SITES}"
            )));
        }
        if let Some(n) = sector {
            if n > n_sites {
                return Err(Error::Contract(format!(
                    "sector {n} exceeds {n_sites} sites"
                )));
            }
        }
        let binom: Vec<Vec<usize>> = (0..=n_sites)
            .map(|p| (0..=n_sites + 1).map(|t| binomial(p, t)).collect())
            .collect();
        let (dim, states) = match sector {
            None => (1usize << n_sites, Vec::new()),
            Some(n) => {
                let dim = binomial(n_sites, n);
                let mut states = Vec::with_capacity(dim);
                if n == 0 {
                    states.push(0);
                } else {
                    // Gosper's hack enumerates fixed-popcount words in numeric order.
                    let mut s: u64 = (1u64 << n) - 1;
                    let limit = 1u64 << n_sites;
                    while s < limit {
                        states.push(s as u32);
                        let c = s & s.wrapping_neg();
                        let r = s + c;
                        s = (((r ^ s) >> 2) / c) | r;
                    }
                }
                (dim, states)
            }
        };
        Ok(Self {
            n_sites,
            sector,
            dim,
            states,
            binom,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn sector(&self) -> Option<usize> {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_full(&self) -> bool {
        self.sector.is_none()
    }

    /// Mask with all `n_sites` bits set.
    pub fn site_mask(&self) -> u32 {
        if self.n_sites == 32 {
            u32::MAX
        } else {
            (1u32 << self.n_sites) - 1
        }
    }

    pub fn unrank(&self, k: usize) -> u32 {
        match self.sector {
            None => k as u32,
            Some(_) => self.states[k],
        }
    }

    /// Dense index of a bitstring. Callers guarantee the popcount matches.
    #[inline]
    pub fn rank(&self, s: u32) -> usize {
        match self.sector {
            None => s as usize,
            Some(_) => {
                let mut r = 0;
                let mut bits = s;
                let mut t = 1;
                while bits != 0 {
                    let p = bits.trailing_zeros() as usize;
                    r += self.binom[p][t];
                    t += 1;
                    bits &= bits - 1;
                }
                r
            }
        }
    }

    /// Whether `s` belongs to this basis.
    pub fn contains(&self, s: u32) -> bool {
        s & !self.site_mask() == 0 && self.sector.is_none_or(|n| s.count_ones() as usize == n)
    }
}
