//! Syndrome statistics: dispersion, hypothesis tests, scaling fits,
//! correlations, fluctuation analysis and relaxation fits.

mod counting;
mod coupling;
mod dfa;
mod fit;
mod hypothesis;
mod kww;

pub use counting::{
    adjacent_correlation, burst_count, burst_ratios, fano, fano_counts, fano_decompose, lag_autocorr,
    AdjacentCorrelation, FanoDecomposition,
};
pub use coupling::{alpha_s_map, corrected_alpha_s, fano_crosscheck, ideal_alpha_s, AlphaS, DEFAULT_CELL_SIZE};
pub use dfa::{dfa, dfa_hurst, DfaResult, DFA_MIN_LEN};
pub use fit::{fit_polynomial, FitResult};
pub use hypothesis::{anova_oneway, one_sample_t, t_vs_poisson, Anova, TTest};
pub use kww::{kww_fit, kww_segment_fraction, KwwFit, SegmentFraction, KWW_MAX_ITERATIONS};

/// Default simultaneous-activation threshold for a burst.
pub const DEFAULT_BURST_THRESHOLD: u32 = 2;
