#include "entlab/kernels.hpp"

#include "entlab/error.hpp"

#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace entlab::kernels {

namespace {

void check_sizes(std::span<const double> w, std::span<const double> lattice,
                 std::span<double> out, std::size_t stride) {
    if (stride == 0 || w.empty() || out.empty() ||
        lattice.size() != w.size() + stride * (out.size() - 1))
        throw DomainError("toeplitz_apply: lattice size must be weights + stride * (out - 1)");
}

// out[k] = sum_j reversed[j] * lattice[k * stride + j] with reversed[j] = w[n - 1 - j]
std::vector<double> reversed(std::span<const double> w) { return {w.rbegin(), w.rend()}; }

inline double row_sum(const std::vector<double>& wr, const double* lat) {
    const std::size_t n = wr.size();
    const double* wp = wr.data();
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += wp[j] * lat[j];
    return acc;
}

} // namespace

void toeplitz_apply_serial(std::span<const double> w, std::span<const double> lattice,
                           std::span<double> out, std::size_t stride) {
    check_sizes(w, lattice, out, stride);
    const auto wr = reversed(w);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = row_sum(wr, lattice.data() + k * stride);
}

void toeplitz_apply_parallel(std::span<const double> w, std::span<const double> lattice,
                             std::span<double> out, std::size_t stride) {
    check_sizes(w, lattice, out, stride);
    const auto wr = reversed(w);
    const long m = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
    for (long kl = 0; kl < m; ++kl) {
        const auto k = static_cast<std::size_t>(kl);
        out[k] = row_sum(wr, lattice.data() + k * stride);
    }
}

void toeplitz_apply(Policy policy, std::span<const double> w, std::span<const double> lattice,
                    std::span<double> out, std::size_t stride) {
    if (policy == Policy::serial)
        toeplitz_apply_serial(w, lattice, out, stride);
    else
        toeplitz_apply_parallel(w, lattice, out, stride);
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace entlab::kernels
