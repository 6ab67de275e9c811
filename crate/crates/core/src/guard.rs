//! Adapts fallible integrands to the `Fn(f64) -> f64` shape the integrators take.

use std::cell::RefCell;

use crate::error::{Error, Result};

/// Remembers the first error raised by an integrand.
#[derive(Default)]
pub(crate) struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    pub fn wrap<'a, F>(&'a self, f: F) -> impl Fn(f64) -> f64 + 'a
    where
        F: Fn(f64) -> Result<f64> + 'a,
    {
        move |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    /// The integrand's own error wins over whatever the integrator reported.
    pub fn finish<T>(self, outcome: Result<T>) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => outcome,
        }
    }
}
