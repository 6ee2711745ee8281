use super::{PricingError, PricingResult, EPSILON};
use crate::instance::Instance;
use crate::schedule::{sequenced_column, swpt_order, DualSolution};

pub const BRUTE_FORCE_MAX_JOBS: usize = 22;

/// Enumerates every job subset on machine `k`, each sequenced by SWPT, and
/// returns the minimum reduced cost. Test oracle for the DP.
pub fn brute_force_pricing(
    k: usize,
    inst: &Instance,
    duals: &DualSolution,
) -> Result<PricingResult, PricingError> {
    let n = inst.num_jobs();
    if n > BRUTE_FORCE_MAX_JOBS {
        return Err(PricingError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_JOBS,
        });
    }
    let order = swpt_order(inst, k);
    let sigma = duals.sigma[k];
    let mut best = (-sigma, 0u32, (0usize, 0u64));
    for mask in 1u32..(1u32 << n) {
        let mut t = 0u64;
        let mut value = 0.0;
        let mut last = 0;
        for (pos, &j) in order.iter().enumerate() {
            if mask & (1 << pos) != 0 {
                t += u64::from(inst.proc_time(j, k));
                value += (t * u64::from(inst.weight(j))) as f64 - duals.pi_of(j);
                last = pos + 1;
            }
        }
        let rc = value - sigma;
        if rc < best.0 {
            best = (rc, mask, (last, t));
        }
    }
    let (min_reduced_cost, mask, certificate) = best;
    let column = (min_reduced_cost < -EPSILON).then(|| {
        let jobs = order
            .iter()
            .enumerate()
            .filter(|(pos, _)| mask & (1 << pos) != 0)
            .map(|(_, &j)| j)
            .collect();
        sequenced_column(k, jobs, inst)
    });
    Ok(PricingResult {
        min_reduced_cost,
        column,
        certificate,
    })
}
