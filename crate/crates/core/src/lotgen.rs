//! Enumeration of the candidate lot-type universe from structural bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LotType;

pub const DEFAULT_CAP: usize = 1_000_000;

/// Box and total-piece bounds describing admissible lot-types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LotGenSpec {
    pub size_count: usize,
    pub comp_min: u32,
    pub comp_max: u32,
    pub total_min: u64,
    pub total_max: u64,
}

impl LotGenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.size_count == 0 {
            return Err(Error::validation("size_count must be positive"));
        }
        if self.comp_min > self.comp_max {
            return Err(Error::validation(format!(
                "comp_min {} > comp_max {}",
                self.comp_min, self.comp_max
            )));
        }
        if self.total_min == 0 || self.total_min > self.total_max {
            return Err(Error::validation(format!(
                "need 1 <= total_min <= total_max, got [{}, {}]",
                self.total_min, self.total_max
            )));
        }
        Ok(())
    }

    /// Number of lot-types these bounds admit, without materializing them.
    pub fn count(&self) -> Result<u128> {
        self.validate()?;
        let hi = self.total_max.min(self.size_count as u64 * self.comp_max as u64) as usize;
        // ways[t] = number of prefixes with component sum t
        let mut ways = vec![0u128; hi + 1];
        ways[0] = 1;
        for _ in 0..self.size_count {
            let mut next = vec![0u128; hi + 1];
            for (t, &w) in ways.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                for c in self.comp_min..=self.comp_max {
                    let s = t + c as usize;
                    if s > hi {
                        break;
                    }
                    next[s] += w;
                }
            }
            ways = next;
        }
        let lo = self.total_min as usize;
        Ok(ways.iter().skip(lo).sum())
    }
}

/// All lot-types within the bounds, lexicographically sorted.
pub fn enumerate_lot_types(spec: &LotGenSpec) -> Result<Vec<LotType>> {
    enumerate_lot_types_capped(spec, DEFAULT_CAP)
}

pub fn enumerate_lot_types_capped(spec: &LotGenSpec, cap: usize) -> Result<Vec<LotType>> {
    let count = spec.count()?;
    if count > cap as u128 {
        return Err(Error::Capacity {
            what: "lot-type universe",
            count,
            limit: cap as u128,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = Vec::with_capacity(spec.size_count);
    extend(spec, &mut current, 0, &mut out);
    Ok(out)
}

fn extend(spec: &LotGenSpec, current: &mut Vec<u32>, sum: u64, out: &mut Vec<LotType>) {
    let remaining = (spec.size_count - current.len()) as u64;
    if remaining == 0 {
        if sum >= spec.total_min && sum <= spec.total_max {
            // total_min >= 1 rules out the zero vector
            out.push(LotType::new(current.clone()).expect("non-zero by construction"));
        }
        return;
    }
    for c in spec.comp_min..=spec.comp_max {
        let s = sum + c as u64;
        let rest = remaining - 1;
        if s + rest * spec.comp_min as u64 > spec.total_max {
            break;
        }
        if s + rest * (spec.comp_max as u64) < spec.total_min {
            continue;
        }
        current.push(c);
        extend(spec, current, s, out);
        current.pop();
    }
}
