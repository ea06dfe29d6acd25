#pragma once

#include "entlab/grid_density.hpp"

#include <string>

namespace entlab {

/// Scalar functionals of one density. Fields outside the capability of the
/// density, or requiring isotropy when the density is not isotropic, are NaN
/// and flagged false in `finite`.
struct FunctionalReport {
    template <class T>
    struct Fields {
        T ent_L{};
        T fisher_L{};
        T rel_entropy{};
        T rel_fisher{};
        T k_L{};
        T k_gauss{};
        T m_gauss{};
    };

    double ent_L = 0.0;
    double fisher_L = 0.0;
    double rel_entropy = 0.0; // D(X||G)
    double rel_fisher = 0.0;  // I(X||G)
    double k_L = 0.0;
    double k_gauss = 0.0;     // K
    double m_gauss = 0.0;     // M = K + 2I
    Fields<double> err;   // Richardson estimate (plus mask leakage for K_L)
    Fields<double> trunc; // mass outside the grid times the integrand scale there
    Fields<bool> finite;
    bool isotropic = false;

    // Identity residuals and their combined error budgets, err + trunc of
    // every term (isotropic only):
    //   D - (ent_gaussian - ent_L),  I_rel - (I_L - 1),  K - (K_L - 2 I_L + 1)
    double entropy_identity = 0.0;
    double fisher_identity = 0.0;
    double k_identity = 0.0;
    double entropy_identity_err = 0.0;
    double fisher_identity_err = 0.0;
    double k_identity_err = 0.0;
    /// False when the K identity misses by more than 10x its error budget,
    /// which signals an under-resolved grid.
    bool k_identity_resolved = true;
};

/// 1/2 log(2 pi e), the entropy of the standard Gaussian.
double gaussian_entropy();

/// -int f log f with 0 log 0 = 0.
Estimate entropy_lebesgue(const GridDensity& d);

/// Fisher information 4 int ((sqrt f)')^2.
Estimate fisher_lebesgue(const GridDensity& d);

/// Fisher information in the ratio form int f'^2 / f (cross-check of the
/// square-root form).
Estimate fisher_ratio_form(const GridDensity& d);

/// D(X||G) against the standard Gaussian; the input must be isotropic.
Estimate rel_entropy_gauss(const GridDensity& d);

/// I(X||G) = int (psi' - x)^2 f; isotropic and Fisher-capable input.
Estimate rel_fisher_gauss(const GridDensity& d);

/// K_L = int psi''^2 f. The error includes the mass on masked nodes times the
/// largest trusted psi''^2.
Estimate k_lebesgue(const GridDensity& d);

/// K = int (psi'' - 1)^2 f; isotropic and K-capable input.
Estimate k_gauss(const GridDensity& d);

/// Every functional the density supports.
FunctionalReport compute_functionals(const GridDensity& d);

/// Both orientations of Pinsker's inequality for an isotropic density:
/// (int |f - gamma|)^2 against 2 D (standard) and D / 2.
struct PinskerReport {
    double l1 = 0.0;
    double lhs = 0.0;        // l1^2
    double rhs_standard = 0.0;
    double rhs_half = 0.0;
    double err = 0.0;
    bool standard_holds = false;
    bool half_holds = false;
};

PinskerReport pinsker_check(const GridDensity& d);

/// Throws CapabilityError unless the density supports the functional
/// ("fisher" or "k"); the message names the rule that excludes it.
void require_capability(const GridDensity& d, const std::string& functional);

} // namespace entlab
