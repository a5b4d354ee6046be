// SPDX-License-Identifier: Apache-2.0 OR MIT

use crate::error::{Error, Result};

/// Cost parameters of a BSF program.
///
/// The worker count is not part of this type: execution contexts pick an
/// integer `K`, and the analysis functions in [`crate::cost`] take `K` as a
/// real number so the continuous optimum can be studied.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BsfParams {
    /// Upper bound on the latency of one message (`L`).
    pub latency: f64,
    /// Master time to send one order to one worker, latency excluded (`t_s`).
    pub send: f64,
    /// Time a single worker needs to process one order over all data (`t_w`).
    pub work: f64,
    /// Master time to receive the results of all workers, latency excluded (`t_r`).
    pub receive: f64,
    /// Master time to evaluate the results of all workers (`t_p`).
    pub process: f64,
}

impl BsfParams {
    pub const fn new(latency: f64, send: f64, work: f64, receive: f64, process: f64) -> Self {
        Self {
            latency,
            send,
            work,
            receive,
            process,
        }
    }

    /// Checks that every time is finite and nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Like [`BsfParams::validate`] but returns `self` for chaining.
    pub fn validated(self) -> Result<Self> {
        self.validate().map(|()| self)
    }

    /// `2L + t_s`: the per-worker communication coefficient.
    #[inline]
    pub fn comm(&self) -> f64 {
        2.0 * self.latency + self.send
    }

    /// `t_r + t_p`: master work that does not depend on `K`.
    #[inline]
    pub fn master(&self) -> f64 {
        self.receive + self.process
    }

    /// Multiplies every time parameter by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            latency: self.latency * factor,
            send: self.send * factor,
            work: self.work * factor,
            receive: self.receive * factor,
            process: self.process * factor,
        }
    }

    pub(crate) fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("L", self.latency),
            ("t_s", self.send),
            ("t_w", self.work),
            ("t_r", self.receive),
            ("t_p", self.process),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_and_non_finite() {
        let ok = BsfParams::new(0.5, 1.0, 100.0, 4.0, 5.0);
        assert!(ok.validate().is_ok());
        let neg = BsfParams { send: -1.0, ..ok };
        assert_eq!(
            neg.validate(),
            Err(Error::InvalidParameter {
                name: "t_s",
                value: -1.0
            })
        );
        assert!(BsfParams { work: f64::NAN, ..ok }.validate().is_err());
        assert!(BsfParams {
            process: f64::INFINITY,
            ..ok
        }
        .validate()
        .is_err());
        assert!(BsfParams::default().validate().is_ok());
    }
}
