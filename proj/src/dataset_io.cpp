#include "hadaq/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hadaq/euclidean.hpp"
#include "hadaq/hyperboloid.hpp"
#include "hadaq/spd.hpp"
#include "hadaq/version.hpp"

namespace hadaq {

using nlohmann::json;

namespace {

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ValidationError(where + ": missing numeric field \"" + key + "\"");
  }
  return j[key].get<double>();
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array())
    throw ValidationError(where + ": expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw ValidationError(where + ": expected an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

// SPD points may be nested m rows of m entries, or a flat array of m*m.
Eigen::VectorXd matrix_coords_from_json(const json& j, int m,
                                        const std::string& where) {
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    if (static_cast<int>(j.size()) != m)
      throw ValidationError(where + ": expected " + std::to_string(m) +
                            " matrix rows");
    Eigen::VectorXd v(m * m);
    for (int r = 0; r < m; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      if (!row.is_array() || static_cast<int>(row.size()) != m)
        throw ValidationError(where + ": expected " + std::to_string(m) +
                              " entries per row");
      for (int c = 0; c < m; ++c) {
        if (!row[static_cast<std::size_t>(c)].is_number())
          throw ValidationError(where + ": matrix entries must be numbers");
        v[r * m + c] = row[static_cast<std::size_t>(c)].get<double>();
      }
    }
    return v;
  }
  Eigen::VectorXd v = vector_from_json(j, where);
  if (v.size() != m * m)
    throw ValidationError(where + ": expected " + std::to_string(m * m) +
                          " matrix entries");
  return v;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string header;
  if (!std::getline(in, header))
    throw ValidationError(path + ": empty CSV file");
  int n = 0;
  {
    std::stringstream ss(header);
    std::string col;
    while (std::getline(ss, col, ',')) ++n;
  }
  if (n < 1) throw ValidationError(path + ": CSV header has no columns");
  auto manifold = std::make_shared<Euclidean>(n);
  Dataset ds{manifold, {}};
  std::string line;
  int idx = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Eigen::VectorXd v(n);
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= n)
        throw ValidationError(path + ": row " + std::to_string(idx) +
                              " has too many columns");
      try {
        v[c] = std::stod(cell);
      } catch (const std::exception&) {
        throw ValidationError(path + ": row " + std::to_string(idx) +
                              " holds a non-numeric cell");
      }
      ++c;
    }
    if (c != n)
      throw ValidationError(path + ": row " + std::to_string(idx) +
                            " has too few columns");
    ds.points.push_back(manifold->point(v));
    ++idx;
  }
  if (ds.points.empty()) throw ValidationError(path + ": dataset has no points");
  return ds;
}

}  // namespace

std::shared_ptr<Manifold> manifold_from_json(const json& j) {
  if (!j.contains("manifold") || !j["manifold"].is_string())
    throw ValidationError("dataset: missing \"manifold\" field");
  const std::string name = j["manifold"].get<std::string>();
  const json params = j.value("params", json::object());
  if (name == "euclidean") {
    const int n = static_cast<int>(require_number(params, "dimension", "params"));
    if (n < 1) throw ValidationError("params: dimension must be >= 1");
    return std::make_shared<Euclidean>(n);
  }
  if (name == "hyperboloid") {
    const int n = static_cast<int>(require_number(params, "dimension", "params"));
    const double kappa = require_number(params, "curvature", "params");
    if (n < 1) throw ValidationError("params: dimension must be >= 1");
    if (!(kappa < 0))
      throw ValidationError("params: hyperboloid curvature must be negative");
    return std::make_shared<Hyperboloid>(n, kappa);
  }
  if (name == "spd") {
    const int m = static_cast<int>(require_number(params, "size", "params"));
    if (m < 1) throw ValidationError("params: size must be >= 1");
    return std::make_shared<Spd>(m);
  }
  throw ValidationError("dataset: unknown manifold \"" + name + "\"");
}

json manifold_to_json(const Manifold& M) {
  json j;
  j["manifold"] = M.name();
  json params = json::object();
  for (const auto& [key, value] : M.params()) {
    if (key == "dimension" || key == "size")
      params[key] = static_cast<int>(value);
    else
      params[key] = value;
  }
  j["params"] = params;
  return j;
}

Dataset load_dataset(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    return load_csv(path);

  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": JSON parse error: " + e.what());
  }

  Dataset ds{manifold_from_json(j), {}};
  const Manifold& M = *ds.manifold;
  const bool poincare =
      j.value("model", std::string("ambient")) == std::string("poincare");
  if (poincare && M.name() != "hyperboloid")
    throw ValidationError(path + ": model \"poincare\" needs a hyperboloid");
  if (!j.contains("points") || !j["points"].is_array())
    throw ValidationError(path + ": missing \"points\" array");

  const auto* hyp = dynamic_cast<const Hyperboloid*>(&M);
  const auto* spd = dynamic_cast<const Spd*>(&M);
  int idx = 0;
  for (const auto& pj : j["points"]) {
    const std::string where = path + ": points[" + std::to_string(idx) + "]";
    try {
      if (spd != nullptr) {
        ds.points.push_back(
            M.point(matrix_coords_from_json(pj, spd->matrix_size(), where)));
      } else if (poincare) {
        ds.points.push_back(hyp->from_poincare(vector_from_json(pj, where)));
      } else {
        ds.points.push_back(M.point(vector_from_json(pj, where)));
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    ++idx;
  }
  if (ds.points.empty()) throw ValidationError(path + ": dataset has no points");
  return ds;
}

json point_to_json(const Manifold& M, const ManifoldPoint& p) {
  M.require_point(p);
  if (const auto* spd = dynamic_cast<const Spd*>(&M)) {
    const int m = spd->matrix_size();
    json rows = json::array();
    for (int r = 0; r < m; ++r) {
      json row = json::array();
      for (int c = 0; c < m; ++c) row.push_back(p.coords[r * m + c]);
      rows.push_back(std::move(row));
    }
    return rows;
  }
  json arr = json::array();
  for (int i = 0; i < p.coords.size(); ++i) arr.push_back(p.coords[i]);
  return arr;
}

ManifoldPoint point_from_json(const Manifold& M, const json& j,
                              const std::string& where) {
  if (const auto* spd = dynamic_cast<const Spd*>(&M))
    return M.point(matrix_coords_from_json(j, spd->matrix_size(), where));
  return M.point(vector_from_json(j, where));
}

void save_dataset(const std::string& path, const Manifold& M,
                  const std::vector<ManifoldPoint>& points) {
  json j = manifold_to_json(M);
  json arr = json::array();
  for (const auto& p : points) arr.push_back(point_to_json(M, p));
  j["points"] = std::move(arr);
  require_finite_json(j, path);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
}

json manifest_to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["version"] = m.version.empty() ? std::string(kVersion) : m.version;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["wall_time_s"] = m.wall_time_s;
  return j;
}

void require_finite_json(const json& j, const std::string& where) {
  if (j.is_number_float() && !std::isfinite(j.get<double>()))
    throw NumericalError(where + ": non-finite number in output");
  if (j.is_array() || j.is_object())
    for (const auto& item : j) require_finite_json(item, where);
}

void write_output_file(const std::string& path, const RunManifest& manifest,
                       const json& result) {
  json j;
  j["manifest"] = manifest_to_json(manifest);
  j["result"] = result;
  require_finite_json(j["result"], path);
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace hadaq
