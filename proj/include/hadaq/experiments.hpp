#pragma once

#include <optional>
#include <string>

#include "hadaq/hyperboloid.hpp"
#include "hadaq/spd.hpp"
#include "hadaq/stats.hpp"

namespace hadaq {

/// Simulated hyperbolic dataset: 2D Gaussian draws rejected to the open
/// unit disk, read as Poincare-ball coordinates and lifted to the
/// hyperboloid. compress_y divides the second disk coordinate, producing
/// a flattened copy of the same underlying draws.
struct SimulationSpec {
  int n_points = 100;
  double sigma = 0.5477225575051661;  // sqrt(0.3)
  std::uint64_t seed = 0;
  std::optional<double> compress_y;
};

std::vector<ManifoldPoint> simulate_poincare_dataset(const Hyperboloid& M,
                                                     const SimulationSpec& spec);

/// Mean distance between reference and approximate quantile solves, per
/// (loss kind, step formula) row and per beta column, averaged over a
/// circle of L directions. The reference is the exact gradient for the
/// data-based loss and the finite-difference gradient for the
/// parameter-based loss.
struct ErrorTable {
  struct Cell {
    double value = 0.0;
    bool ok = false;
    std::string error;
  };
  struct Row {
    LossKind kind;
    GradientMode mode;
    std::string label;      // e.g. "data-based/transport"
    std::string reference;  // "exact" or "fd-reference"
    std::vector<Cell> cells;
  };
  std::vector<double> betas;
  int L = 0;
  std::vector<Row> rows;
};

ErrorTable approximation_error_table(const Manifold& M,
                                     const std::vector<ManifoldPoint>& data,
                                     const std::vector<double>& betas, int L,
                                     const DescentConfig& cfg, int threads = 1);

/// Closed isoquantile polylines in Poincare coordinates, one per beta,
/// traced over a circle of L directions (first vertex repeated at the end).
struct IsoquantileContours {
  std::vector<double> betas;
  int L = 0;
  std::vector<std::vector<Eigen::Vector2d>> polylines;  // [beta][vertex]
};

IsoquantileContours isoquantile_contours(const Hyperboloid& M,
                                         const std::vector<ManifoldPoint>& data,
                                         const std::vector<double>& betas,
                                         int L, const DescentConfig& cfg,
                                         int threads = 1);

/// Synthetic SPD(3) study: an isotropic log-Gaussian sample around the
/// identity and an anisotropic one with an inflated first log-direction,
/// measured over the orthonormal four-direction fan (plus negations)
/// transported from the identity to each sample median.
struct SpdStudyResult {
  MeasureReport isotropic;
  MeasureReport anisotropic;
};

SpdStudyResult synthetic_spd_study(int n, std::uint64_t seed,
                                   const DescentConfig& cfg, double beta = 0.5,
                                   double beta_prime = 0.8, int threads = 1);

/// The two SPD samples used by synthetic_spd_study, exposed for reuse.
std::vector<ManifoldPoint> simulate_spd_sample(const Spd& M, int n,
                                               std::uint64_t seed,
                                               bool anisotropic);

}  // namespace hadaq
