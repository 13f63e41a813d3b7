//! Central finite-difference verification of the analytic gradients.

use std::ops::Range;

use rand::seq::index;

use super::lstm::RegularizationSpec;
use super::params::NetworkParams;
use crate::error::{Error, Result};
use crate::eventlog::PrefixSample;
use crate::rng;

/// Default number of parameters probed.
pub const DEFAULT_PROBES: usize = 200;

/// Relative error with a small absolute floor so that gradients that are zero
/// up to rounding do not blow up the ratio.
fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Maximum relative error over `n_probes` parameters drawn (seeded) from the
/// whole parameter vector, or all of them if the vector is smaller. Dropout
/// is always disabled.
pub fn gradient_check(
    params: &NetworkParams,
    batch: &[PrefixSample],
    reg: &RegularizationSpec,
    epsilon: f64,
    n_probes: usize,
    seed: u64,
) -> Result<f64> {
    gradient_check_range(params, batch, reg, epsilon, 0..params.len(), n_probes, seed)
}

/// As [`gradient_check`], probing only indices inside `range`.
pub fn gradient_check_range(
    params: &NetworkParams,
    batch: &[PrefixSample],
    reg: &RegularizationSpec,
    epsilon: f64,
    range: Range<usize>,
    n_probes: usize,
    seed: u64,
) -> Result<f64> {
    if range.is_empty() || range.end > params.len() || epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "gradient check over {range:?} with epsilon {epsilon}"
        )));
    }
    let reg = RegularizationSpec {
        dropout: 0.0,
        ..*reg
    };
    let (_, grads) = params.loss_and_gradients(batch, &reg, 0)?;
    let n = range.len();
    let probes: Vec<usize> = if n <= n_probes {
        range.collect()
    } else {
        let mut p: Vec<usize> = index::sample(&mut rng::seeded(seed), n, n_probes)
            .into_iter()
            .map(|i| range.start + i)
            .collect();
        p.sort_unstable();
        p
    };
    let mut probe = params.clone();
    let mut worst = 0.0f64;
    for i in probes {
        let w = params.values()[i];
        probe.values_mut()[i] = w + epsilon;
        let up = probe.loss(batch, &reg, 0)?;
        probe.values_mut()[i] = w - epsilon;
        let down = probe.loss(batch, &reg, 0)?;
        probe.values_mut()[i] = w;
        let numeric = (up - down) / (2.0 * epsilon);
        worst = worst.max(relative_error(grads[i], numeric));
    }
    Ok(worst)
}
