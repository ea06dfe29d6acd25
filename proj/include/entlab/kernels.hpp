#pragma once

// Data-parallel inner loops. Every kernel has a serial reference version and
// an OpenMP version; the two produce bit-identical results because each
// output (or each row partial sum) is accumulated by one thread in a fixed
// order and partial sums are reduced serially.

#include <cstddef>
#include <span>
#include <vector>

namespace entlab::kernels {

enum class Policy { serial, parallel };

/// out[k] = sum_i weights[i] * lattice[k * stride - i + weights.size() - 1]
/// (a strided Toeplitz matrix-vector product; lattice.size() must equal
/// weights.size() + stride * (out.size() - 1)).
void toeplitz_apply_serial(std::span<const double> weights, std::span<const double> lattice,
                           std::span<double> out, std::size_t stride = 1);
void toeplitz_apply_parallel(std::span<const double> weights, std::span<const double> lattice,
                             std::span<double> out, std::size_t stride = 1);
void toeplitz_apply(Policy policy, std::span<const double> weights,
                    std::span<const double> lattice, std::span<double> out,
                    std::size_t stride = 1);

/// Expectation of g(i, j) over independent discrete laws p and q:
/// sum_i sum_j p[i] q[j] g(i, j).
template <class G>
double pair_expectation_serial(std::span<const double> p, std::span<const double> q, G&& g) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) row += q[j] * g(i, j);
        total += p[i] * row;
    }
    return total;
}

template <class G>
double pair_expectation_parallel(std::span<const double> p, std::span<const double> q, G&& g) {
    const long n = static_cast<long>(p.size());
    std::vector<double> rows(p.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (long il = 0; il < n; ++il) {
        const auto i = static_cast<std::size_t>(il);
        double row = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) row += q[j] * g(i, j);
        rows[i] = p[i] * row;
    }
    double total = 0.0;
    for (double r : rows) total += r;
    return total;
}

template <class G>
double pair_expectation(Policy policy, std::span<const double> p, std::span<const double> q,
                        G&& g) {
    if (policy == Policy::serial) return pair_expectation_serial(p, q, g);
    return pair_expectation_parallel(p, q, g);
}

/// Number of OpenMP threads available (1 without OpenMP).
int max_threads();

} // namespace entlab::kernels
