#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <prism/prism.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace prism::test {

inline Eigen::RowVectorXd random_unit(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::RowVectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = n(rng);
  return v / v.norm();
}

inline std::vector<std::string> vocab(const char* stem, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

/// Random unit descriptions, `per_group[a*K+y]` of them in group (a, y).
/// Description t of every group carries template "t<t>".
inline EmbeddingSet random_descriptions(Eigen::Index dim, int K, int A, const std::vector<int>& per_group,
                                        std::mt19937_64& rng) {
  std::vector<EmbeddingRecord> recs;
  std::vector<Eigen::RowVectorXd> rows;
  for (int a = 0; a < A; ++a)
    for (int y = 0; y < K; ++y)
      for (int t = 0; t < per_group[static_cast<std::size_t>(a * K + y)]; ++t) {
        EmbeddingRecord r;
        r.id = "d_a" + std::to_string(a) + "_y" + std::to_string(y) + "_t" + std::to_string(t);
        r.class_label = y;
        r.attribute_label = a;
        r.template_id = "t" + std::to_string(t);
        recs.push_back(r);
        rows.push_back(random_unit(dim, rng));
      }
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
  return EmbeddingSet(SetKind::scene_description, dim, std::move(recs), std::move(m), vocab("class", K),
                      vocab("attr", A));
}

/// Random group sizes in [1, max_per_group]; template t0 is always shared.
inline std::vector<int> random_group_sizes(int K, int A, int max_per_group, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(1, max_per_group);
  std::vector<int> out(static_cast<std::size_t>(K * A));
  for (auto& s : out) s = d(rng);
  return out;
}

/// Direct nested-loop transcription of the LD loss. Deliberately shares no
/// code with the library's pair planner.
inline LossBreakdown naive_ld_loss(const EmbeddingSet& s, const LossConfig& cfg, int K, int A) {
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(K * A));
  for (std::size_t i = 0; i < s.size(); ++i)
    members[static_cast<std::size_t>(*s.record(i).attribute_label * K + *s.record(i).class_label)].push_back(i);

  auto rep = [&](int a, int y) {
    Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(s.dim());
    for (auto i : members[static_cast<std::size_t>(a * K + y)]) m += s.vector(i);
    return Eigen::RowVectorXd(m / m.norm());
  };

  // Mean similarity between groups (a1,y1) and (a2,y2) under the pairing.
  auto group_sim = [&](int a1, int y1, int a2, int y2, auto&& f) {
    if (cfg.pairing == Pairing::group_mean) return f(rep(a1, y1).dot(rep(a2, y2)));
    double total = 0.0;
    int count = 0;
    for (auto i : members[static_cast<std::size_t>(a1 * K + y1)])
      for (auto j : members[static_cast<std::size_t>(a2 * K + y2)]) {
        if (cfg.pairing == Pairing::template_matched && *s.record(i).template_id != *s.record(j).template_id) continue;
        total += f(s.vector(i).dot(s.vector(j)));
        ++count;
      }
    return total / count;
  };

  LossBreakdown out;
  double term_a = 0.0;
  for (int y = 0; y < K; ++y)
    for (int a = 0; a < A; ++a)
      for (int a2 = a + 1; a2 < A; ++a2) term_a += group_sim(a, y, a2, y, [](double c) { return 1.0 - c; });
  double term_b = 0.0;
  for (int a = 0; a < A; ++a)
    for (int y = 0; y < K; ++y)
      for (int y2 = y + 1; y2 < K; ++y2)
        term_b += group_sim(a, y, a, y2, [&](double c) { return std::max(0.0, c - cfg.margin); });
  out.intra_class_term = term_a / (K * A * (A - 1) / 2.0);
  out.inter_class_term = term_b / (A * K * (K - 1) / 2.0);
  out.total = out.intra_class_term + out.inter_class_term;
  return out;
}

/// Central finite differences of P -> loss(renormalize(P raw)).
inline Eigen::MatrixXd fd_gradient(const EmbeddingSet& raw, const Eigen::MatrixXd& P, const LossConfig& cfg, int K,
                                   int A, double h = 1e-5) {
  auto loss_at = [&](const Eigen::MatrixXd& Q) {
    return ld_loss(apply_projection(ProjectionMatrix(Q), raw, true), cfg, K, A).total;
  };
  Eigen::MatrixXd g(P.rows(), P.cols());
  for (Eigen::Index r = 0; r < P.rows(); ++r)
    for (Eigen::Index c = 0; c < P.cols(); ++c) {
      Eigen::MatrixXd plus = P, minus = P;
      plus(r, c) += h;
      minus(r, c) -= h;
      g(r, c) = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    }
  return g;
}

/// Worst entry-wise violation of |a - b| <= max(abs_floor, rel * max(|a|,|b|)),
/// reported as the ratio error / allowed (<= 1 passes).
inline double gradient_mismatch(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel = 1e-4,
                                double abs_floor = 1e-7) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double err = std::abs(a(r, c) - b(r, c));
      const double allowed = std::max(abs_floor, rel * std::max(std::abs(a(r, c)), std::abs(b(r, c))));
      worst = std::max(worst, err / allowed);
    }
  return worst;
}

/// Smallest hinge distance |<u,v> - m| over inter-class pairs after projection,
/// used to skip instances where finite differences straddle the kink.
inline double hinge_clearance(const EmbeddingSet& raw, const Eigen::MatrixXd& P, const LossConfig& cfg) {
  const auto z = apply_projection(ProjectionMatrix(P), raw, true);
  double best = 1e9;
  if (cfg.pairing == Pairing::group_mean) {
    std::map<GroupLabel, Eigen::RowVectorXd> sums;
    for (std::size_t i = 0; i < z.size(); ++i) {
      GroupLabel g{*z.record(i).attribute_label, *z.record(i).class_label};
      auto it = sums.find(g);
      if (it == sums.end()) sums.emplace(g, z.vector(i));
      else it->second += z.vector(i);
    }
    for (const auto& [g1, s1] : sums)
      for (const auto& [g2, s2] : sums)
        if (g1.attribute == g2.attribute && g1.cls < g2.cls)
          best = std::min(best, std::abs(s1.normalized().dot(s2.normalized()) - cfg.margin));
    return best;
  }
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < z.size(); ++j)
      if (z.record(i).attribute_label == z.record(j).attribute_label &&
          z.record(i).class_label != z.record(j).class_label)
        best = std::min(best, std::abs(z.vector(i).dot(z.vector(j)) - cfg.margin));
  return best;
}

/// Projector onto the orthogonal complement of col-span(cols), from the SVD.
inline Eigen::MatrixXd svd_complement(const Eigen::MatrixXd& cols, double tol = 1e-8) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol * s(0)) ++rank;
  const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
  return Eigen::MatrixXd::Identity(cols.rows(), cols.rows()) - u * u.transpose();
}

/// Brute-force group metrics: counts correct/total per group by scanning.
struct BruteMetrics {
  double worst_group = 1.0;
  double accuracy = 0.0;
};

inline BruteMetrics brute_metrics(const PredictionSet& preds) {
  std::map<std::pair<int, int>, std::pair<int, int>> tally;
  int correct = 0;
  for (const auto& p : preds.predictions) {
    auto& t = tally[{*p.attribute, *p.true_class}];
    ++t.second;
    if (p.predicted_class == *p.true_class) {
      ++t.first;
      ++correct;
    }
  }
  BruteMetrics b;
  for (const auto& [g, t] : tally) b.worst_group = std::min(b.worst_group, double(t.first) / t.second);
  b.accuracy = double(correct) / static_cast<double>(preds.predictions.size());
  return b;
}

inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Hash of a file, or of every regular file under a directory in path order.
inline std::uint64_t hash_path(const std::filesystem::path& p) {
  if (!std::filesystem::is_directory(p)) return fnv1a(slurp(p));
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(p))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& f : files) h = fnv1a(std::filesystem::relative(f, p).string() + slurp(f), h);
  return h;
}

/// Fresh empty directory under the system temp dir, private to this process.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("prism_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace prism::test
