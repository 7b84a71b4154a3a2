#pragma once

// Latent-space debiasing loss over scene-description embeddings.
//
//   L = 1/(K*C(|A|,2)) * sum_{y, a<a'} (1 - <u_{a,y}, u_{a',y}>)
//     + 1/(|A|*C(K,2)) * sum_{a, y<y'} max(0, <u_{a,y}, u_{a,y'}> - m)
//
// A group (a,y) usually holds several descriptions, so each group pair is
// scored as the mean over its elementary pairs, chosen by Pairing:
//   template_matched  descriptions sharing a template_id
//   all_pairs         every cross pair
//   group_mean        one pair of renormalized group means

#include <prism/embedding_set.hpp>
#include <prism/error.hpp>
#include <prism/projection.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace prism {

enum class Pairing { template_matched, group_mean, all_pairs };

inline std::string_view to_string(Pairing p) {
  switch (p) {
    case Pairing::template_matched: return "template_matched";
    case Pairing::group_mean: return "group_mean";
    case Pairing::all_pairs: return "all_pairs";
  }
  return "unknown";
}

inline Pairing parse_pairing(std::string_view name) {
  if (name == "template_matched") return Pairing::template_matched;
  if (name == "group_mean") return Pairing::group_mean;
  if (name == "all_pairs") return Pairing::all_pairs;
  throw ConfigError("unknown pairing '" + std::string(name) + "'");
}

struct LossConfig {
  double margin = 0.6;
  Pairing pairing = Pairing::template_matched;
};

struct LossBreakdown {
  double intra_class_term = 0.0;
  double inter_class_term = 0.0;
  double total = 0.0;
  std::size_t intra_pairs = 0;
  std::size_t inter_pairs = 0;

  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct LossAndGradient {
  LossBreakdown loss;
  Eigen::MatrixXd gradient;
};

namespace detail {

struct WeightedPair {
  std::size_t i;
  std::size_t j;
  double weight;
  bool inter;  // false: intra-class term (a), true: inter-class term (b)
};

/// Which representatives to compare and with what weight. For group_mean the
/// representative indices are group indices (attribute * K + class), otherwise
/// record indices.
struct PairPlan {
  std::vector<WeightedPair> pairs;
  std::vector<std::vector<std::size_t>> groups;  // record indices per group index
  bool group_means = false;
};

inline double choose2(int n) { return 0.5 * n * (n - 1); }

inline void check_loss_inputs(const EmbeddingSet& set, const LossConfig& config, int K, int A) {
  if (K < 2) throw ConfigError("LD loss needs at least 2 classes");
  if (A < 2) throw ConfigError("LD loss needs at least 2 attributes");
  if (!(config.margin >= 0.0 && config.margin <= 1.0)) throw ConfigError("margin must lie in [0, 1]");
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double n = set.vector(i).norm();
    if (std::abs(n - 1.0) > 1e-4) {
      throw DataError("LD loss input '" + set.record(i).id + "' is not unit norm (norm " + std::to_string(n) + ")");
    }
  }
}

inline PairPlan make_pair_plan(const EmbeddingSet& set, const LossConfig& config, int K, int A) {
  PairPlan plan;
  plan.groups.resize(static_cast<std::size_t>(K * A));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& rec = set.record(i);
    if (!rec.class_label || !rec.attribute_label) {
      throw DataError("record '" + rec.id + "' lacks a class or attribute label");
    }
    const int y = *rec.class_label;
    const int a = *rec.attribute_label;
    if (y < 0 || y >= K || a < 0 || a >= A) throw DataError("record '" + rec.id + "' label outside K x |A|");
    if (config.pairing == Pairing::template_matched && !rec.template_id) {
      throw DataError("record '" + rec.id + "' has no template_id (required for template_matched pairing)");
    }
    plan.groups[static_cast<std::size_t>(a * K + y)].push_back(i);
  }
  for (int a = 0; a < A; ++a) {
    for (int y = 0; y < K; ++y) {
      if (plan.groups[static_cast<std::size_t>(a * K + y)].empty()) {
        throw DataError("group (attribute " + std::to_string(a) + ", class " + std::to_string(y) + ") is empty");
      }
    }
  }
  plan.group_means = config.pairing == Pairing::group_mean;

  const double intra_norm = 1.0 / (K * choose2(A));
  const double inter_norm = 1.0 / (A * choose2(K));

  auto add_group_pair = [&](std::size_t g1, std::size_t g2, double norm, bool inter) {
    const auto& m1 = plan.groups[g1];
    const auto& m2 = plan.groups[g2];
    switch (config.pairing) {
      case Pairing::group_mean:
        plan.pairs.push_back({g1, g2, norm, inter});
        break;
      case Pairing::all_pairs: {
        const double w = norm / static_cast<double>(m1.size() * m2.size());
        for (auto i : m1)
          for (auto j : m2) plan.pairs.push_back({i, j, w, inter});
        break;
      }
      case Pairing::template_matched: {
        std::vector<std::pair<std::size_t, std::size_t>> matched;
        for (auto i : m1)
          for (auto j : m2)
            if (*set.record(i).template_id == *set.record(j).template_id) matched.emplace_back(i, j);
        if (matched.empty()) {
          throw DataError("no template-matched description pairs between groups " + std::to_string(g1) + " and " +
                          std::to_string(g2));
        }
        const double w = norm / static_cast<double>(matched.size());
        for (auto [i, j] : matched) plan.pairs.push_back({i, j, w, inter});
        break;
      }
    }
  };

  for (int y = 0; y < K; ++y)
    for (int a = 0; a < A; ++a)
      for (int a2 = a + 1; a2 < A; ++a2)
        add_group_pair(static_cast<std::size_t>(a * K + y), static_cast<std::size_t>(a2 * K + y), intra_norm, false);
  for (int a = 0; a < A; ++a)
    for (int y = 0; y < K; ++y)
      for (int y2 = y + 1; y2 < K; ++y2)
        add_group_pair(static_cast<std::size_t>(a * K + y), static_cast<std::size_t>(a * K + y2), inter_norm, true);
  return plan;
}

/// Renormalized group means of the unit rows in `z`.
inline RowMatrix group_means(const RowMatrix& z, const PairPlan& plan, RowMatrix* unnormalized = nullptr) {
  RowMatrix sums(static_cast<Eigen::Index>(plan.groups.size()), z.cols());
  for (std::size_t g = 0; g < plan.groups.size(); ++g) {
    Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(z.cols());
    for (auto i : plan.groups[g]) s += z.row(static_cast<Eigen::Index>(i));
    sums.row(static_cast<Eigen::Index>(g)) = s / static_cast<double>(plan.groups[g].size());
  }
  RowMatrix reps = sums;
  for (Eigen::Index g = 0; g < reps.rows(); ++g) {
    const double n = reps.row(g).norm();
    if (!(n > 1e-12)) throw NumericalError("group mean embedding vanishes for group " + std::to_string(g));
    reps.row(g) /= n;
  }
  if (unnormalized) *unnormalized = std::move(sums);
  return reps;
}

/// Evaluates the plan on unit representatives; when `d_reps` is given it
/// receives dL/d(reps). Pairs are summed in plan order.
inline LossBreakdown evaluate_plan(const RowMatrix& reps, const PairPlan& plan, double margin,
                                   RowMatrix* d_reps = nullptr) {
  LossBreakdown out;
  if (d_reps) *d_reps = RowMatrix::Zero(reps.rows(), reps.cols());
  for (const auto& p : plan.pairs) {
    const auto ri = reps.row(static_cast<Eigen::Index>(p.i));
    const auto rj = reps.row(static_cast<Eigen::Index>(p.j));
    const double sim = ri.dot(rj);
    double coeff = 0.0;  // dL/d(sim)
    if (p.inter) {
      ++out.inter_pairs;
      if (sim > margin) {
        out.inter_class_term += p.weight * (sim - margin);
        coeff = p.weight;
      }
    } else {
      ++out.intra_pairs;
      out.intra_class_term += p.weight * (1.0 - sim);
      coeff = -p.weight;
    }
    if (d_reps && coeff != 0.0) {
      d_reps->row(static_cast<Eigen::Index>(p.i)) += coeff * rj;
      d_reps->row(static_cast<Eigen::Index>(p.j)) += coeff * ri;
    }
  }
  out.total = out.intra_class_term + out.inter_class_term;
  return out;
}

}  // namespace detail

/// LD loss of an already projected and renormalized description set.
inline LossBreakdown ld_loss(const EmbeddingSet& projected, const LossConfig& config, int K, int A) {
  detail::check_loss_inputs(projected, config, K, A);
  const auto plan = detail::make_pair_plan(projected, config, K, A);
  if (plan.group_means) return detail::evaluate_plan(detail::group_means(projected.vectors(), plan), plan, config.margin);
  return detail::evaluate_plan(projected.vectors(), plan, config.margin);
}

/// LD loss of raw -> P raw -> renormalize, with dL/dP through the whole chain
/// (the hinge kink takes subgradient 0).
inline LossAndGradient ld_loss_grad(const EmbeddingSet& raw, const ProjectionMatrix& P, const LossConfig& config,
                                    int K, int A) {
  detail::check_loss_inputs(raw, config, K, A);
  if (P.dim() != raw.dim()) throw DataError("projection dim does not match description dim");
  const auto plan = detail::make_pair_plan(raw, config, K, A);

  const RowMatrix& x = raw.vectors();
  const RowMatrix y = x * P.values().transpose();
  Eigen::VectorXd norms(y.rows());
  RowMatrix z(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    norms(i) = y.row(i).norm();
    if (!(norms(i) > 1e-10)) {
      throw NumericalError("projection collapses description '" + raw.record(static_cast<std::size_t>(i)).id + "'");
    }
    z.row(i) = y.row(i) / norms(i);
  }

  LossAndGradient out;
  RowMatrix dz;
  if (plan.group_means) {
    RowMatrix sums;
    const RowMatrix reps = detail::group_means(z, plan, &sums);
    RowMatrix dreps;
    out.loss = detail::evaluate_plan(reps, plan, config.margin, &dreps);
    dz = RowMatrix::Zero(z.rows(), z.cols());
    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
      const auto gi = static_cast<Eigen::Index>(g);
      const auto r = reps.row(gi);
      const auto dr = dreps.row(gi);
      const Eigen::RowVectorXd ds = (dr - r * r.dot(dr)) / sums.row(gi).norm();
      const double inv_n = 1.0 / static_cast<double>(plan.groups[g].size());
      for (auto i : plan.groups[g]) dz.row(static_cast<Eigen::Index>(i)) += ds * inv_n;
    }
  } else {
    out.loss = detail::evaluate_plan(z, plan, config.margin, &dz);
  }

  RowMatrix dy(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto zi = z.row(i);
    dy.row(i) = (dz.row(i) - zi * zi.dot(dz.row(i))) / norms(i);
  }
  out.gradient = dy.transpose() * x;
  return out;
}

}  // namespace prism
