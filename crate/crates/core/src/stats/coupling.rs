use serde::Serialize;

use crate::num::Real;

pub const DEFAULT_CELL_SIZE: usize = 7;

/// Surface coupling estimate from a Fano factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaS<T> {
    /// `F / cell_size`.
    pub leading: T,
    /// `5 / 42`.
    pub ideal: T,
    /// `5 / 42 - 1 / 936`.
    pub corrected: T,
    /// `100 * |leading - ideal| / ideal`.
    pub deviation_pct: T,
}

pub fn ideal_alpha_s<T: Real>() -> T {
    T::from_f64_lossy(5.0) / T::from_f64_lossy(42.0)
}

pub fn corrected_alpha_s<T: Real>() -> T {
    ideal_alpha_s::<T>() - T::one() / T::from_f64_lossy(936.0)
}

pub fn alpha_s_map<T: Real>(fano: T, cell_size: usize) -> AlphaS<T> {
    let leading = fano / T::from_usize_lossy(cell_size);
    let ideal = ideal_alpha_s::<T>();
    AlphaS {
        leading,
        ideal,
        corrected: corrected_alpha_s(),
        deviation_pct: T::from_f64_lossy(100.0) * (leading - ideal).abs() / ideal,
    }
}

/// Predicted Fano factor `1 - 2 rho` from the mean adjacent correlation.
pub fn fano_crosscheck<T: Real>(adjacent_corr: T) -> T {
    T::one() - T::two() * adjacent_corr
}
