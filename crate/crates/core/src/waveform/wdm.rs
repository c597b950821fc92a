use super::ChannelPlan;
use crate::error::{Error, Result};
use crate::field::SampledField;

/// Resamples each baseband channel onto a `sample_rate_ghz` grid of equal
/// duration, scales it to an equal share of `total_power_dbm` and shifts it to
/// its grid offset from the band center.
pub fn wdm_mux(
    channels: &[SampledField],
    plan: &ChannelPlan,
    total_power_dbm: f64,
    sample_rate_ghz: f64,
) -> Result<SampledField> {
    plan.validate()?;
    if channels.len() != plan.count {
        return Err(Error::config(
            "channels",
            format!("plan has {} channels, got {} fields", plan.count, channels.len()),
        ));
    }
    let reach = plan.offset_ghz(plan.count)? + plan.spacing_ghz / 2.0;
    if reach > sample_rate_ghz / 2.0 * (1.0 + 1e-12) {
        return Err(Error::config(
            "sample_rate_ghz",
            format!("{sample_rate_ghz} GHz does not cover the {} GHz band", 2.0 * reach),
        ));
    }
    let duration = channels[0].duration_ns();
    let len_f = duration * sample_rate_ghz;
    let len = len_f.round() as usize;
    if (len_f - len as f64).abs() > 1e-6 {
        return Err(Error::config(
            "sample_rate_ghz",
            format!("{duration} ns window holds {len_f} samples, not a whole number"),
        ));
    }
    let per_channel_mw = 10f64.powf(plan.per_channel_power_dbm(total_power_dbm) / 10.0);
    let mut out = SampledField::zeros(len, sample_rate_ghz, plan.center_thz());
    for (i, ch) in channels.iter().enumerate() {
        if (ch.duration_ns() - duration).abs() > 1e-9 * duration {
            return Err(Error::config(
                "channels",
                format!("channel {} window differs in duration", i + 1),
            ));
        }
        let mut f = ch.resample(len)?;
        f.set_power_mw(per_channel_mw)?;
        f.shift_bins(out.bins_for(plan.offset_ghz(i + 1)?));
        out.add(&f)?;
    }
    Ok(out)
}
