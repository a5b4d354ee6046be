// SPDX-License-Identifier: Apache-2.0 OR MIT

//! The contract between a BSF skeleton and its payload.

use alloc::vec::Vec;
use core::ops::Range;

/// Size of a message on the wire, used to model send and receive costs.
pub trait WireSize {
    fn wire_size(&self) -> usize;
}

impl WireSize for () {
    fn wire_size(&self) -> usize {
        0
    }
}

macro_rules! fixed_width {
    ($($t:ty),*) => {$(
        impl WireSize for $t {
            fn wire_size(&self) -> usize {
                core::mem::size_of::<$t>()
            }
        }
    )*};
}

fixed_width!(u8, u16, u32, u64, usize, i32, i64, f32, f64);

impl<T: Copy> WireSize for [T] {
    fn wire_size(&self) -> usize {
        core::mem::size_of_val(self)
    }
}

impl<T: Copy> WireSize for Vec<T> {
    fn wire_size(&self) -> usize {
        self.as_slice().wire_size()
    }
}

/// An iterative master-worker program.
///
/// Each iteration the master calls [`make_order`](Self::make_order) once and
/// hands the same order to every worker. Worker `rank` runs
/// [`worker_step`](Self::worker_step) on its own slice of the
/// [`n_items`](Self::n_items)-long data array and must not touch shared
/// mutable state. The master then folds the partial results, always in rank
/// order, with [`reduce`](Self::reduce) and checks
/// [`exit_condition`](Self::exit_condition). The exit condition is also
/// checked once right after [`init`](Self::init), so a program that starts
/// converged runs zero iterations.
pub trait BsfProgram {
    type State;
    type Order: WireSize;
    type Partial: WireSize;
    type Output;
    type Error;

    fn init(&self) -> Result<Self::State, Self::Error>;

    /// Length of the data array distributed over the workers.
    fn n_items(&self) -> usize;

    fn make_order(&self, state: &Self::State) -> Self::Order;

    fn worker_step(
        &self,
        order: &Self::Order,
        slice: Range<usize>,
        rank: usize,
    ) -> Result<Self::Partial, Self::Error>;

    /// `partials[i]` is the result of worker `i`.
    fn reduce(
        &self,
        partials: Vec<Self::Partial>,
        state: Self::State,
    ) -> Result<Self::State, Self::Error>;

    fn exit_condition(&self, state: &Self::State) -> bool;

    fn finalize(&self, state: Self::State) -> Self::Output;
}
