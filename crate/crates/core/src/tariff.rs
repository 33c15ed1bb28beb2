//! Retail tariff construction from wholesale price series.
//!
//! Three schemes (Fixed, ToU, RTP) with three adder variants (time-invariant,
//! half-dynamic, fully dynamic). Retail price = procurement + adder,
//! componentwise per hour.

use crate::error::{Error, Result};
use crate::series::HourlySeries;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TariffKind {
    Fixed,
    Tou,
    Rtp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdderVariant {
    /// TA_h = A
    Invariant,
    /// TA_h = A/2 + (P_h / Pbar) A/2
    HalfDynamic,
    /// TA_h = (P_h / Pbar) A
    FullDynamic,
}

pub const DEFAULT_PEAK_HOURS: std::ops::RangeInclusive<u8> = 8..=19;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TariffScheme {
    pub kind: TariffKind,
    pub variant: AdderVariant,
    pub adder_eur_per_mwh: f64,
    /// Hours of day in the ToU peak window (inclusive reading of
    /// "8 a.m. to 7 p.m.": hours 8..=19).
    pub peak_hours: Vec<u8>,
    /// Explicit off-peak window; `None` means the complement of the peak.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub offpeak_hours: Option<Vec<u8>>,
}

impl TariffScheme {
    pub fn new(kind: TariffKind, variant: AdderVariant, adder_eur_per_mwh: f64) -> Result<Self> {
        let scheme = TariffScheme {
            kind,
            variant,
            adder_eur_per_mwh,
            peak_hours: DEFAULT_PEAK_HOURS.collect(),
            offpeak_hours: None,
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn fixed(adder_eur_per_mwh: f64) -> Self {
        TariffScheme::new(TariffKind::Fixed, AdderVariant::Invariant, adder_eur_per_mwh).unwrap()
    }

    /// Short label, e.g. `fixed`, `tou_50`, `rtp_100`.
    pub fn label(&self) -> String {
        let base = match self.kind {
            TariffKind::Fixed => return "fixed".into(),
            TariffKind::Tou => "tou",
            TariffKind::Rtp => "rtp",
        };
        match self.variant {
            AdderVariant::Invariant => base.to_string(),
            AdderVariant::HalfDynamic => format!("{base}_50"),
            AdderVariant::FullDynamic => format!("{base}_100"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.adder_eur_per_mwh < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tariff adder must be nonnegative, got {}",
                self.adder_eur_per_mwh
            )));
        }
        if self.kind == TariffKind::Fixed && self.variant != AdderVariant::Invariant {
            return Err(Error::InvalidParameter(
                "fixed tariffs only support the time-invariant adder".into(),
            ));
        }
        if self.peak_hours.iter().any(|&h| h >= 24) {
            return Err(Error::InvalidParameter("peak hours must be in 0..24".into()));
        }
        if let Some(off) = &self.offpeak_hours {
            if off.iter().any(|&h| h >= 24) {
                return Err(Error::InvalidParameter("off-peak hours must be in 0..24".into()));
            }
            if off.iter().any(|h| self.peak_hours.contains(h)) {
                return Err(Error::InvalidParameter(
                    "peak and off-peak windows overlap".into(),
                ));
            }
        }
        Ok(())
    }

    /// Window of an hour of day: true = peak, false = off-peak.
    fn window_of(&self, hour_of_day: u8) -> Result<bool> {
        if self.peak_hours.contains(&hour_of_day) {
            return Ok(true);
        }
        match &self.offpeak_hours {
            None => Ok(false),
            Some(off) if off.contains(&hour_of_day) => Ok(false),
            Some(_) => Err(Error::InvalidParameter(format!(
                "hour {hour_of_day} belongs to neither ToU window"
            ))),
        }
    }
}

/// Hourly retail prices split into procurement and adder components.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RetailPriceSeries {
    pub procurement: HourlySeries,
    pub adder: HourlySeries,
    pub retail: HourlySeries,
}

impl RetailPriceSeries {
    pub fn len(&self) -> usize {
        self.retail.len()
    }

    pub fn is_empty(&self) -> bool {
        self.retail.is_empty()
    }
}

/// Construct the hourly retail price series for a scheme.
///
/// Negative wholesale prices pass through unclipped.
pub fn build_tariff(scheme: &TariffScheme, wholesale: &HourlySeries) -> Result<RetailPriceSeries> {
    scheme.validate()?;
    let horizon = wholesale.len();
    if horizon == 0 {
        return Err(Error::InvalidParameter("empty wholesale series".into()));
    }
    let mean = wholesale.mean();
    let a = scheme.adder_eur_per_mwh;

    let dynamic = scheme.variant != AdderVariant::Invariant;
    if dynamic && mean == 0.0 {
        return Err(Error::DegenerateMean);
    }
    let adder: Vec<f64> = match scheme.variant {
        AdderVariant::Invariant => vec![a; horizon],
        AdderVariant::HalfDynamic => wholesale
            .iter()
            .map(|&p| a / 2.0 + p / mean * (a / 2.0))
            .collect(),
        AdderVariant::FullDynamic => wholesale.iter().map(|&p| p / mean * a).collect(),
    };

    let procurement: Vec<f64> = match scheme.kind {
        TariffKind::Fixed => vec![mean; horizon],
        TariffKind::Rtp => wholesale.values().to_vec(),
        TariffKind::Tou => {
            // Window means across the whole horizon.
            let mut sums = [0.0f64; 2];
            let mut counts = [0usize; 2];
            let mut windows = Vec::with_capacity(horizon);
            for (h, &p) in wholesale.iter().enumerate() {
                let peak = scheme.window_of((h % 24) as u8)?;
                let w = usize::from(peak);
                sums[w] += p;
                counts[w] += 1;
                windows.push(w);
            }
            let means = [
                if counts[0] > 0 { sums[0] / counts[0] as f64 } else { 0.0 },
                if counts[1] > 0 { sums[1] / counts[1] as f64 } else { 0.0 },
            ];
            windows.into_iter().map(|w| means[w]).collect()
        }
    };

    let retail: Vec<f64> = procurement.iter().zip(&adder).map(|(p, t)| p + t).collect();
    Ok(RetailPriceSeries {
        procurement: procurement.into(),
        adder: adder.into(),
        retail: retail.into(),
    })
}

/// Check the analytic mean identities of a built tariff (1e-12 relative).
pub fn mean_preservation_check(
    r: &RetailPriceSeries,
    scheme: &TariffScheme,
    wholesale: &HourlySeries,
) -> bool {
    let tol = |scale: f64| 1e-12 * (1.0 + scale.abs());
    let a = scheme.adder_eur_per_mwh;
    let pbar = wholesale.mean();
    match scheme.variant {
        // mean(TA) = A holds for both dynamic variants since mean(P/Pbar) = 1.
        AdderVariant::HalfDynamic | AdderVariant::FullDynamic => {
            (r.adder.mean() - a).abs() <= tol(a)
        }
        AdderVariant::Invariant => match scheme.kind {
            TariffKind::Fixed => {
                let m = r.retail.mean();
                let constant = r
                    .retail
                    .iter()
                    .all(|&v| (v - m).abs() <= tol(m));
                constant && (m - (pbar + a)).abs() <= tol(pbar + a)
            }
            // mean(r) = Pbar + A by linearity of the mean.
            TariffKind::Rtp | TariffKind::Tou => {
                (r.retail.mean() - (pbar + a)).abs() <= tol(pbar + a)
            }
        },
    }
}
