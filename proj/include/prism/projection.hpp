#pragma once

#include <prism/detail/container.hpp>
#include <prism/embedding_set.hpp>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <string>

namespace prism {

/// Dense d x d linear map applied to both modalities before inner products.
class ProjectionMatrix {
 public:
  ProjectionMatrix() = default;

  explicit ProjectionMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.rows() != values_.cols()) {
      throw DataError("projection matrix must be square and non-empty");
    }
    if (!values_.allFinite()) throw NumericalError("projection matrix has non-finite entries");
  }

  static ProjectionMatrix identity(Eigen::Index dim) { return ProjectionMatrix(Eigen::MatrixXd::Identity(dim, dim)); }

  Eigen::Index dim() const { return values_.rows(); }
  const Eigen::MatrixXd& values() const { return values_; }

  friend bool operator==(const ProjectionMatrix& a, const ProjectionMatrix& b) {
    return a.values_.rows() == b.values_.rows() && a.values_ == b.values_;
  }

 private:
  Eigen::MatrixXd values_;
};

/// Replaces each vector v by P v, optionally rescaled to unit norm.
inline EmbeddingSet apply_projection(const ProjectionMatrix& P, const EmbeddingSet& set, bool renormalize) {
  if (P.dim() != set.dim()) {
    throw DataError("projection dim " + std::to_string(P.dim()) + " does not match set dim " +
                    std::to_string(set.dim()));
  }
  RowMatrix out = set.vectors() * P.values().transpose();
  if (renormalize) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const double n = out.row(i).norm();
      if (!(n > 1e-10)) {
        throw NumericalError("projection collapses record '" + set.record(static_cast<std::size_t>(i)).id +
                             "' to zero norm");
      }
      out.row(i) /= n;
    }
  }
  return set.with_vectors(std::move(out));
}

// PRISMP v1: projection.json {format:"PRISMP", version:1, dim, dtype:"f32le"}
// plus matrix.bin of dim*dim f32, row-major.
inline constexpr const char* kProjectionManifest = "projection.json";
inline constexpr const char* kProjectionPayload = "matrix.bin";

inline void save_projection(const ProjectionMatrix& P, const std::filesystem::path& path) {
  nlohmann::ordered_json m;
  m["format"] = "PRISMP";
  m["version"] = 1;
  m["dim"] = P.dim();
  m["dtype"] = "f32le";
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = P.values();
  auto payload = detail::encode_f32le(std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
  detail::write_container(path, {{kProjectionManifest, detail::to_bytes(m.dump(2) + "\n")},
                                 {kProjectionPayload, std::move(payload)}});
}

inline ProjectionMatrix load_projection(const std::filesystem::path& path) {
  auto members = detail::read_container(path, {kProjectionManifest, kProjectionPayload});
  long long dim = 0;
  try {
    const auto m = nlohmann::json::parse(detail::to_string(members.at(kProjectionManifest)));
    if (m.at("format").get<std::string>() != "PRISMP") throw DataError("format is not PRISMP");
    if (m.at("version").get<int>() != 1) throw DataError("unsupported version");
    if (m.at("dtype").get<std::string>() != "f32le") throw DataError("dtype must be f32le");
    dim = m.at("dim").get<long long>();
    if (dim <= 0) throw DataError("dim must be positive");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed projection manifest: " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": malformed projection manifest: " + e.what());
  }
  const auto& payload = members.at(kProjectionPayload);
  if (payload.size() != static_cast<std::size_t>(dim * dim * 4)) {
    throw DataError(path.string() + ": payload length mismatch for " + std::to_string(dim) + "x" +
                    std::to_string(dim) + " matrix");
  }
  const auto values = detail::decode_f32le(payload);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(dim, dim);
  std::copy(values.begin(), values.end(), rm.data());
  if (!rm.allFinite()) throw DataError(path.string() + ": projection matrix has non-finite entries");
  return ProjectionMatrix(Eigen::MatrixXd(rm));
}

}  // namespace prism
