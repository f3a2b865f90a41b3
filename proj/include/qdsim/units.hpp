#pragma once

namespace qdsim {

// meV per kelvin
inline constexpr double kBoltzmann_meV = 8.617333262e-2;
// meV * nm
inline constexpr double hc_meV_nm = 1.23984198433e6;

inline constexpr double ps_per_ns = 1e3;

// Energy (meV) <-> wavelength (nm)
inline double wavelength_nm_from_energy(double e_meV) { return hc_meV_nm / e_meV; }
inline double energy_meV_from_wavelength(double lambda_nm) { return hc_meV_nm / lambda_nm; }

// Width conversion at a given center wavelength: dE (ueV) -> dLambda (nm)
inline double fwhm_nm_from_uev(double fwhm_uev, double center_nm) {
    return center_nm * center_nm * (fwhm_uev * 1e-3) / hc_meV_nm;
}

}  // namespace qdsim
