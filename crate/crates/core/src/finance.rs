//! Discounting helpers. Cash flows are end-of-year.

/// Present value of 1 per year for `years` years: `(1 - (1+r)^-n) / r`, or `n` at r = 0.
pub fn annuity_factor(rate: f64, years: u32) -> f64 {
    if rate == 0.0 {
        return f64::from(years);
    }
    (1.0 - (1.0 + rate).powi(-(years as i32))) / rate
}

/// Discount factor for a cash flow `offset` years after the reference point.
pub fn discount(rate: f64, offset: i32) -> f64 {
    (1.0 + rate).powi(-offset)
}
