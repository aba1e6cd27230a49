#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hadaq/geometry.hpp"

namespace hadaq {

struct Dataset {
  std::shared_ptr<Manifold> manifold;
  std::vector<ManifoldPoint> points;
};

/// Builds a manifold from {"manifold": ..., "params": {...}}.
std::shared_ptr<Manifold> manifold_from_json(const nlohmann::json& j);
nlohmann::json manifold_to_json(const Manifold& M);

/// Loads a dataset file. JSON is the canonical format; files ending in
/// .csv are read as Euclidean data with an x1,...,xn header. Hyperboloid
/// files may carry "model": "poincare" with n-dimensional disk points,
/// which are lifted to the sheet. Every point is validated; errors name
/// the offending index and the violated invariant.
Dataset load_dataset(const std::string& path);

/// Writes a dataset as canonical JSON (ambient coordinates).
void save_dataset(const std::string& path, const Manifold& M,
                  const std::vector<ManifoldPoint>& points);

/// Provenance block attached to every CLI output; re-running the recorded
/// argv reproduces the result bit for bit (wall_time_s aside).
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string version;
  std::uint64_t seed = 0;
  nlohmann::json config;
  double wall_time_s = 0.0;
};

nlohmann::json manifest_to_json(const RunManifest& m);

/// Rejects non-finite numbers anywhere in the document.
void require_finite_json(const nlohmann::json& j, const std::string& where);

/// Serializes {"manifest":..., "result":...} to path (2-space indent).
void write_output_file(const std::string& path, const RunManifest& manifest,
                       const nlohmann::json& result);

nlohmann::json point_to_json(const Manifold& M, const ManifoldPoint& p);
ManifoldPoint point_from_json(const Manifold& M, const nlohmann::json& j,
                              const std::string& where);

}  // namespace hadaq
