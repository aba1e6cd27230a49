#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hadaq/quantile.hpp"

namespace hadaq {

/// Configuration of the descent loop. Zero-valued tol/lr0 are resolved at
/// solve time: lr0 = 0.1 * (data diameter estimate), tol = 1e-6 * lr0.
struct DescentConfig {
  double tol = 0.0;       // learning-rate floor
  int maxcount = 200;     // rejection budget
  double lr0 = 0.0;       // initial learning rate
  std::optional<ManifoldPoint> init;  // default: first data point
  std::uint64_t seed = 0;  // echoed into outputs; the loop itself is
                           // deterministic
};

enum class Termination { LrFloor, MaxCount };

struct QuantileResult {
  ManifoldPoint point;
  double objective = 0.0;
  double first_order_residual = 0.0;
  bool residual_at_kink = false;  // a datum coincides with the solution
  long iters = 0;
  Termination termination = Termination::LrFloor;
  double lr_final = 0.0;
};

/// Descent for the sample (beta, xi)-quantile:
///   shift = mean step over the data; propose exp_p(-lr * shift/||shift||);
///   accept iff the mean loss does not increase, then lr *= 1.1 and the
///   shift is recomputed; otherwise lr /= 2 and the rejection counter
///   increments. Stops when lr <= tol or the counter reaches maxcount.
/// The recorded objective sequence is non-increasing by construction.
QuantileResult descent(const Manifold& M,
                       const std::vector<ManifoldPoint>& data,
                       const QuantileIndex& q, const DescentConfig& cfg,
                       GradientMode mode, LossKind kind,
                       std::vector<double>* objective_trace = nullptr);

/// Batch solve over a beta grid (ascending) and a list of directions.
/// Result[i][j] is the quantile for (betas[j], xis[i]). Each direction
/// sweeps betas in order, warm-starting at the previous solution; the
/// first solve starts from the sample median (or cfg.init when provided
/// for the median solve itself). Directions are independent jobs.
std::vector<std::vector<QuantileResult>> quantile_field(
    const Manifold& M, const std::vector<ManifoldPoint>& data,
    const std::vector<double>& betas, const std::vector<BoundaryDirection>& xis,
    const DescentConfig& cfg, GradientMode mode, LossKind kind,
    int threads = 1);

/// Norm of the mean exact data-based gradient over the sample; data points
/// coinciding with p contribute the convention step -beta * xi_p. Small
/// values certify first-order stationarity. `at_kink`, when given, reports
/// whether any datum coincided with p.
double first_order_residual(const Manifold& M,
                            const std::vector<ManifoldPoint>& data,
                            const ManifoldPoint& p, const QuantileIndex& q,
                            bool* at_kink = nullptr);

/// 0.1 * (data diameter estimate); used to resolve DescentConfig::lr0.
double default_learning_rate(const Manifold& M,
                             const std::vector<ManifoldPoint>& data);

}  // namespace hadaq
