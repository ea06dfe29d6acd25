#pragma once

#include "entlab/dynamics.hpp"
#include "entlab/grid_density.hpp"

#include <string>
#include <vector>

namespace entlab {

struct PoincareEstimate {
    double c = 0.0;                // Poincare constant, 1 / gap
    double gap = 0.0;
    double residual = 0.0;         // ||T y - mu y||_inf / ||T||_inf
    double refinement_ratio = 1.0; // c on the refined grid / c
    std::vector<std::string> warnings;
};

/// Spectral gap of the weighted Neumann problem -(f u')' = mu f u, with
/// piecewise-linear elements and a lumped mass matrix; the constant mode is
/// the first eigenpair and the gap is the second.
PoincareEstimate poincare_constant(const GridDensity& d, bool with_refinement = true);

/// Discrete Dirichlet form over variance for a test function sampled at the
/// grid nodes; never below the discrete gap.
double rayleigh_quotient(const GridDensity& d, std::span<const double> g);

struct MixtureBound {
    double c_x = 0.0;
    double c_y = 0.0;
    double c_mix = 0.0; // Poincare constant of sqrt(lambda) X + sqrt(1 - lambda) Y
    double margin = 0.0; // lambda c_x + (1 - lambda) c_y - c_mix
};

MixtureBound mixture_bound_check(const GridDensity& dx, const GridDensity& dy, double lambda,
                                 const ConvolutionOptions& options = {});

struct DecayPoint {
    double t = 0.0;
    double c_t = 0.0;
    double monotone_margin = 0.0; // c_0 - c_t
    double sharp_margin = 0.0;    // exp(-2t) c_0 + 1 - exp(-2t) - c_t
};

struct DecayReport {
    double c0 = 0.0;
    std::vector<DecayPoint> points;
    double worst_margin = 0.0;
};

/// Poincare constant along the OU flow against c_t <= c_0 and the sharper
/// c_t <= exp(-2t) c_0 + (1 - exp(-2t)).
DecayReport ou_decay_check(const GridDensity& d, std::span<const double> t_grid,
                           const ConvolutionOptions& options = {});

/// Slack allowed by the mixture and decay checks.
inline constexpr double poincare_slack = 2e-3;

} // namespace entlab
