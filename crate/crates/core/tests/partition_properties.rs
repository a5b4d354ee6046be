// SPDX-License-Identifier: Apache-2.0 OR MIT

use bsf_core::partition;
use proptest::prelude::*;

proptest! {
    #[test]
    fn slices_cover_every_item_once(n in 0usize..5000, k in 1usize..300) {
        let p = partition(n, k).unwrap();
        prop_assert_eq!(p.workers(), k);
        let mut next = 0;
        for s in &p.slices {
            prop_assert_eq!(s.offset, next);
            next += s.len;
        }
        prop_assert_eq!(next, n);
        let lens: Vec<usize> = p.slices.iter().map(|s| s.len).collect();
        let (lo, hi) = (lens.iter().min().unwrap(), lens.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert!(lens.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn zero_workers_rejected() {
    assert!(partition(10, 0).is_err());
}
