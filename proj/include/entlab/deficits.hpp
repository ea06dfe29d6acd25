#pragma once

#include "entlab/dynamics.hpp"
#include "entlab/functionals.hpp"
#include "entlab/poincare.hpp"

#include <string>
#include <vector>

namespace entlab {

struct DeficitOptions {
    ConvolutionOptions convolution;
    /// OU time used to smooth Fisher-incapable inputs before the information
    /// deficit.
    double smoothing_time = 1e-3;
    /// Coverage for the flows inside debruijn_check. Second differences of
    /// Ent resolve ~1e-8, below the I_L bias from cutting 1e-10 tails.
    double derivative_coverage = 1e-14;
};

enum class DeficitKind { entropy, information };

std::string_view to_string(DeficitKind kind);

/// A Shannon-Stam or Blachman-Stam deficit with the quantitative lower
/// bound lambda (1 - lambda) / (4 max(c0, c1)) * (D0 + D1) (entropy) or
/// * (I0 + I1) (information).
struct DeficitReport {
    DeficitKind kind = DeficitKind::entropy;
    double lambda = 0.0;
    double deficit = 0.0;
    double bound = 0.0;  // NaN unless both inputs are isotropic
    double margin = 0.0; // deficit - bound
    double c0 = 0.0;
    double c1 = 0.0;
    double err = 0.0;    // combined quadrature and truncation error
    /// Bounds are asserted only for log-concave isotropic pairs.
    bool bound_asserted = false;
    double smoothing_time = 0.0; // OU pre-smoothing applied to the inputs, 0 if none
    bool deficit_ok = false;     // deficit >= -err
    bool bound_ok = true;        // margin >= -10 err when asserted
    bool pass() const { return deficit_ok && bound_ok; }
};

DeficitReport entropy_deficit(const GridDensity& d0, const GridDensity& d1, double lambda,
                              const DeficitOptions& options = {});

DeficitReport info_deficit(const GridDensity& d0, const GridDensity& d1, double lambda,
                           const DeficitOptions& options = {});

/// True when the density is flagged log-concave, passes the numerical psi''
/// test, and is isotropic.
bool log_concave_isotropic(const GridDensity& d);

enum class LemmaId {
    conditional_hessian,
    klebesgue,
    lemma_l,
    lemma_l2,
    debruijn,
    last_lemma,
    flow_integral,
    bbn,
};

std::string_view to_string(LemmaId id);

/// One comparison inside a lemma check. Inequalities read lhs >= rhs with
/// margin lhs - rhs; equalities use margin -|lhs - rhs|. A check passes when
/// margin >= -tolerance.
struct LemmaCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    bool asserted = true;
    bool pass = true;
};

struct LemmaReport {
    LemmaId id = LemmaId::klebesgue;
    std::string subject;
    std::vector<LemmaCheck> checks;
    double worst_margin = 0.0; // smallest margin over asserted checks
    bool pass = true;

    /// Adds an inequality lhs >= rhs with tolerance 10 * err, plus a 1e-12
    /// relative round-off floor.
    void inequality(std::string name, double lhs, double rhs, double err, bool asserted = true);
    /// Adds an equality |lhs - rhs| <= tolerance.
    void equality(std::string name, double lhs, double rhs, double tolerance, bool asserted = true);
};

/// psi_lambda''(z) <= E[(1 - lambda) psi_0''(X0) + lambda psi_1''(X1) | X_lambda = z]
/// at each z; points outside the [1e-6, 1 - 1e-6] quantiles of X_lambda are
/// reported but not asserted.
LemmaReport lemma_conditional_hessian(const GridDensity& d0, const GridDensity& d1, double lambda,
                                      std::span<const double> z_nodes,
                                      const DeficitOptions& options = {});

/// (1 - l) K_L(X0) + l K_L(X1) - K_L(X_l) >= l (1 - l) E[(psi_1''(X1) - psi_0''(X0))^2].
LemmaReport lemma_klebesgue(const GridDensity& d0, const GridDensity& d1, double lambda,
                            const DeficitOptions& options = {});

/// Gaussian-reference Hessian inequalities for M = K + 2I: the exact form
/// with E[(phi_1'' - phi_0'')^2] and the Poincare form with
/// (I0 + K0 + I1 + K1) / (2 max(c0, c1)), plus the intermediate identity
/// E[(phi_0'(X0) - phi_1''(X1) X0)^2] = I0 + K1.
LemmaReport lemma_l_and_l2(const GridDensity& d0, const GridDensity& d1, double lambda,
                           const DeficitOptions& options = {});

struct DebruijnPoint {
    double t = 0.0;
    double info = 0.0;         // I(X_t)
    double k = 0.0;            // K(X_t)
    double m = 0.0;            // M(X_t)
    double dent[2] = {0, 0};   // central differences of Ent(X_t) with steps h, h/2
    double dinfo[2] = {0, 0};  // central differences of I(X_t)
    double dexp[2] = {0, 0};   // exp(2t) d/dt (exp(-2t) I(X_t))
    double ent_ratio = 0.0;    // mismatch(h) / mismatch(h/2) for the entropy derivative
    double info_ratio = 0.0;
    double decay_rhs = 0.0;    // exp(-2t) I(X_0), NaN when I(X_0) is infinite
};

struct DebruijnReport {
    LemmaReport lemma;
    std::vector<DebruijnPoint> points;
};

/// d/dt Ent(X_t) = I(X_t), d/dt I(X_t) = -2 I - 2 K, exp(2t) d/dt(exp(-2t) I) = -2 M
/// and I(X_t) <= exp(-2t) I(X_0) along the OU flow of an isotropic density,
/// with derivatives by central differences of step h and h/2. Second-order
/// convergence is asserted where the step-h mismatch rises above the
/// quadrature noise.
DebruijnReport debruijn_check(const GridDensity& d, std::span<const double> t_grid, double h = 0.01,
                              const DeficitOptions& options = {});

/// Pointwise inequality along the flow,
///   -d/dt[exp(-2t) delta_I(t)] >= -l (1 - l) / (2 max(c0, c1)) exp(-2t) d/dt(I0 + I1),
/// with central-difference derivatives at each t.
LemmaReport last_lemma_check(const GridDensity& d0, const GridDensity& d1, double lambda,
                             std::span<const double> t_grid, double h = 0.01,
                             const DeficitOptions& options = {});

struct FlowIntegral {
    double info_deficit = 0.0;        // delta_I at t = 0
    double info_from_lemma = 0.0;     // int 2 exp(-2t) [(1-l) M0 + l M1 - M_l] dt + tail
    double entropy_deficit = 0.0;     // delta_E at t = 0
    double entropy_from_flow = 0.0;   // int delta_I(t) dt + tail
    double entropy_bound = 0.0;       // l (1 - l) / (4 c) (D0 + D1)
    double entropy_bound_from_flow = 0.0; // int l (1 - l) / (4 c) (I0 + I1)(t) dt + tail
    double info_tail_bound = 0.0;     // exp(-2T) delta_I(0), the analytic tail bound
    double t_max = 10.0;
    LemmaReport lemma;
};

/// Integrates the flow identities over [0, t_max] (Gauss-Legendre on graded
/// panels, exact tails at t_max) and compares with the direct deficits;
/// gaps must stay within 1% relative (plus 10x the quadrature budget, which
/// matters only when the deficit vanishes).
FlowIntegral flow_integral_check(const GridDensity& d0, const GridDensity& d1, double lambda,
                                 const DeficitOptions& options = {});

/// Ent((X1 + X2)/sqrt 2) - Ent(X1) >= (Ent(G) - Ent(X1)) / (2 (1 + c)) for iid
/// copies of a log-concave isotropic X.
LemmaReport bbn_1d_check(const GridDensity& d, const DeficitOptions& options = {});

} // namespace entlab
