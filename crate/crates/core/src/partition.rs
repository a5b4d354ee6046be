// SPDX-License-Identifier: Apache-2.0 OR MIT

//! Block distribution of a data array over `K` workers.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};

/// Contiguous part of the data array owned by one worker.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Slice {
    pub offset: usize,
    pub len: usize,
}

impl Slice {
    pub fn range(&self) -> Range<usize> {
        self.offset..self.offset + self.len
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DataPartition {
    pub n_items: usize,
    /// One slice per worker, in rank order.
    pub slices: Vec<Slice>,
}

impl DataPartition {
    pub fn workers(&self) -> usize {
        self.slices.len()
    }
}

/// Splits `n_items` over `workers`: the first `n_items % workers` slices get
/// one extra item.
pub fn partition(n_items: usize, workers: usize) -> Result<DataPartition> {
    if workers == 0 {
        return Err(Error::InvalidWorkers(0.0));
    }
    let base = n_items / workers;
    let extra = n_items % workers;
    let mut offset = 0;
    let slices = (0..workers)
        .map(|rank| {
            let len = base + usize::from(rank < extra);
            let s = Slice { offset, len };
            offset += len;
            s
        })
        .collect();
    Ok(DataPartition { n_items, slices })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(p: &DataPartition) -> Vec<(usize, usize)> {
        p.slices.iter().map(|s| (s.offset, s.len)).collect()
    }

    #[test]
    fn block_distribution() {
        assert_eq!(pairs(&partition(10, 1).unwrap()), [(0, 10)]);
        assert_eq!(pairs(&partition(10, 3).unwrap()), [(0, 4), (4, 3), (7, 3)]);
        assert_eq!(pairs(&partition(0, 4).unwrap()), [(0, 0); 4]);
        assert_eq!(pairs(&partition(2, 4).unwrap()), [(0, 1), (1, 1), (2, 0), (2, 0)]);
        assert_eq!(partition(5, 0), Err(Error::InvalidWorkers(0.0)));
    }
}
