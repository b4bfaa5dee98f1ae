//! Unit conversions. Energies are eV at the API boundary, times are ħ/eV.

use serde::{Deserialize, Serialize};

pub const HARTREE_EV: f64 = 27.211_386_245_988;
/// Planck constant in eV·s.
pub const PLANCK_EV_S: f64 = 4.135_667_696e-15;
/// Reduced Planck constant in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// How a quoted frequency turns into an energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreqConvention {
    /// E = h·f, the quoted number is an ordinary frequency.
    #[default]
    H,
    /// E = ħ·f, the quoted number is an angular frequency.
    Hbar,
}

impl FreqConvention {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "h" => Some(Self::H),
            "hbar" => Some(Self::Hbar),
            _ => None,
        }
    }
}

/// Converts a frequency in THz to an energy in eV.
pub fn thz_to_ev(f_thz: f64, convention: FreqConvention) -> f64 {
    let per_hz = match convention {
        FreqConvention::H => PLANCK_EV_S,
        FreqConvention::Hbar => HBAR_EV_S,
    };
    f_thz * 1e12 * per_hz
}
