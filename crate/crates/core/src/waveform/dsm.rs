use super::{rrc_receive, PolSymbols, SubcarrierPlan};
use crate::error::{Error, Result};
use crate::field::SampledField;

/// Shifts each subcarrier to its comb offset and sums. Offsets are rounded to
/// whole bins of the common window.
pub fn dsm_mux(subcarriers: &[SampledField], plan: &SubcarrierPlan) -> Result<SampledField> {
    plan.validate()?;
    if subcarriers.len() != plan.subcarriers {
        return Err(Error::config(
            "subcarriers",
            format!("plan has {} subcarriers, got {} fields", plan.subcarriers, subcarriers.len()),
        ));
    }
    let first = &subcarriers[0];
    let mut out = SampledField::zeros(first.len(), first.sample_rate_ghz, first.center_thz);
    let half_band = plan.occupied_bandwidth_ghz() / 2.0;
    if half_band > first.sample_rate_ghz / 2.0 {
        return Err(Error::config(
            "sample_rate_ghz",
            format!("{} GHz does not cover the {} GHz comb", first.sample_rate_ghz, 2.0 * half_band),
        ));
    }
    for (field, offset) in subcarriers.iter().zip(plan.offsets_ghz()) {
        let mut shifted = field.clone();
        shifted.shift_bins(first.bins_for(offset));
        out.add(&shifted)?;
    }
    Ok(out)
}

/// Matched filtering of every subcarrier of a baseband channel field.
pub fn dsm_demux(
    channel: &SampledField,
    plan: &SubcarrierPlan,
    symbols_per_subcarrier: usize,
) -> Result<Vec<PolSymbols>> {
    plan.validate()?;
    plan.offsets_ghz()
        .into_iter()
        .map(|offset| {
            rrc_receive(
                channel,
                channel.bins_for(offset),
                symbols_per_subcarrier,
                plan.symbol_rate_gbd,
                plan.rolloff,
            )
        })
        .collect()
}
