#pragma once

#include "entlab/grid_density.hpp"
#include "entlab/kernels.hpp"

namespace entlab {

struct ConvolutionOptions {
    /// Minimum node count of the output grid; 0 means the larger input count.
    std::size_t resolution = 0;
    /// Output grid covers the [coverage, 1 - coverage] quantiles.
    double coverage = tol::coverage;
    kernels::Policy policy = kernels::Policy::parallel;
};

/// How a rescaled convolution is discretized.
///
/// One factor ("integrated") is sampled on its own grid and weighted by the
/// end-corrected quadrature rule; the other ("evaluated") is sampled on the
/// lattice of differences z_k - u_i, which turns the sum into a Toeplitz
/// product. The output spacing is `stride` times the integrated spacing, so
/// a factor squeezed by a small scale keeps enough nodes. When both factors
/// are rough the evaluated factor enters through exact cell integrals of
/// its CDF.
struct ConvolutionPlan {
    double lambda = 0.0;
    Grid target_grid{0.0, 1.0, Grid::min_count};
    Grid integrated_grid{0.0, 1.0, Grid::min_count};
    std::size_t stride = 1;
    bool swapped = false;   // integrated factor is the second input
    bool cell_mode = false; // both factors rough
    double truncated_mass = 0.0;
};

ConvolutionPlan plan_convolution(const GridDensity& d0, const GridDensity& d1, double lambda,
                                 const ConvolutionOptions& options = {});

/// Density of sqrt(1 - lambda) X0 + sqrt(lambda) X1 for independent
/// X0 ~ d0, X1 ~ d1.
GridDensity rescaled_convolve(const GridDensity& d0, const GridDensity& d1, double lambda,
                              const ConvolutionOptions& options = {});

/// Law of exp(-t) X + sqrt(1 - exp(-2t)) G at time t >= 0.
GridDensity ou_evolve(const GridDensity& d, double t, const ConvolutionOptions& options = {});

/// L1 distance between (X_lambda)_t and (X_t)_lambda.
double commutation_check(const GridDensity& d0, const GridDensity& d1, double lambda, double t,
                         const ConvolutionOptions& options = {});

/// Smallest length scale resolved by a density: 1 / sqrt(max psi'') over
/// nodes carrying non-negligible mass; infinity when psi'' <= 0 throughout.
double feature_scale(const GridDensity& d);

} // namespace entlab
