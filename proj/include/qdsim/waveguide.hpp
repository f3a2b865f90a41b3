#pragma once

#include <stdexcept>

namespace qdsim {

struct NanowireGeometry {
    double diameter_nm = 310.0;
    double n_core = 3.2;  // InP
    double n_clad = 1.0;  // vacuum

    void validate() const;
};

struct ModeSolution {
    double n_eff = 0.0;
    double v_number = 0.0;
    double confinement = 0.0;  // fraction of modal power in the core
    double residual = 0.0;     // normalized characteristic-equation residual at the root
};

struct ModeSolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact HE11 effective index of a step-index circular waveguide.
// Solves the hybrid-mode characteristic equation (Bessel J core, modified
// Bessel K cladding) by bracketed root-finding; returns the largest-n_eff
// root. Confinement comes from the modal Poynting-flux integrals.
ModeSolution he11_neff(const NanowireGeometry& geom, double wavelength_nm);

// Normalized characteristic function whose sign changes locate the guided
// roots; exposed so an independent dense scan can cross-check the solver.
// `s` parameterizes n_eff via n_eff^2 = n_clad^2 + s * (n_core^2 - n_clad^2),
// s in (0, 1).
double he11_char(const NanowireGeometry& geom, double wavelength_nm, double s);

// Residual of the tangential-field continuity row that is not used when
// constructing the mode amplitudes; vanishes at a true root. Diagnostic.
double he11_consistency(const NanowireGeometry& geom, double wavelength_nm);

// Relative spontaneous emission rate vs bulk, approximated as
// confinement x (group index / n_core) x (core area / effective mode area),
// normalized so its maximum over 1100-1500 nm at D = 310 nm is unity.
double se_rate_relative(const NanowireGeometry& geom, double wavelength_nm);

}  // namespace qdsim
