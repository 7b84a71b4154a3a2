#pragma once

#include <prism/adam.hpp>
#include <prism/embedding_set.hpp>
#include <prism/ld_loss.hpp>
#include <prism/projection.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace prism {

enum class InitKind { identity, identity_plus_noise };

struct TrainConfig {
  double margin = 0.6;
  double learning_rate = 0.1;
  int batch_size = 64;
  int epochs = 1;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Pairing pairing = Pairing::template_matched;
  InitKind init = InitKind::identity;
  double init_sigma = 0.01;  // used by identity_plus_noise
};

struct LossRecord {
  std::int64_t step = 0;
  LossBreakdown loss;

  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

struct TrainReport {
  std::vector<LossRecord> loss_history;
  ProjectionMatrix final_projection;
  std::int64_t steps = 0;
  double wall_time_seconds = 0.0;
};

namespace detail {

inline void check_train_config(const TrainConfig& c, std::size_t num_groups) {
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(c.margin >= 0.0 && c.margin <= 1.0)) throw ConfigError("margin must lie in [0, 1]");
  if (c.batch_size <= 0) throw ConfigError("batch size must be positive");
  if (c.epochs <= 0) throw ConfigError("epochs must be positive");
  if (c.init_sigma < 0.0) throw ConfigError("init sigma must be nonnegative");
  if (c.pairing == Pairing::group_mean && static_cast<std::size_t>(c.batch_size) < num_groups) {
    throw ConfigError("group_mean pairing needs batch size >= number of groups");
  }
}

/// Group-stratified batches for one epoch. Template-matched batches take whole
/// templates (one description per group each); other pairings take an equal
/// slice of every shuffled group.
inline std::vector<std::vector<std::size_t>> epoch_batches(const EmbeddingSet& set, const GroupPartition& groups,
                                                           const TrainConfig& config, std::mt19937_64& rng) {
  const std::size_t per_group = std::max<std::size_t>(1, static_cast<std::size_t>(config.batch_size) / groups.size());
  std::vector<std::vector<std::size_t>> batches;

  if (config.pairing == Pairing::template_matched) {
    // Templates present in every group, in first-appearance order.
    std::vector<std::string> templates;
    std::set<std::string> seen;
    for (const auto& rec : set.records()) {
      if (!rec.template_id) throw DataError("record '" + rec.id + "' has no template_id");
      if (seen.insert(*rec.template_id).second) templates.push_back(*rec.template_id);
    }
    std::vector<std::map<std::string, std::vector<std::size_t>>> by_template;
    for (const auto& [label, members] : groups) {
      auto& m = by_template.emplace_back();
      for (auto i : members) m[*set.record(i).template_id].push_back(i);
    }
    std::erase_if(templates, [&](const std::string& t) {
      return std::any_of(by_template.begin(), by_template.end(), [&](const auto& m) { return !m.contains(t); });
    });
    if (templates.empty()) throw DataError("no template is shared by all groups");
    std::shuffle(templates.begin(), templates.end(), rng);
    for (std::size_t start = 0; start < templates.size(); start += per_group) {
      auto& batch = batches.emplace_back();
      const std::size_t stop = std::min(templates.size(), start + per_group);
      for (const auto& m : by_template)
        for (std::size_t t = start; t < stop; ++t)
          for (auto i : m.at(templates[t])) batch.push_back(i);
      std::sort(batch.begin(), batch.end());
    }
    return batches;
  }

  std::vector<std::vector<std::size_t>> shuffled;
  std::size_t largest = 0;
  for (const auto& [label, members] : groups) {
    auto& s = shuffled.emplace_back(members);
    std::shuffle(s.begin(), s.end(), rng);
    largest = std::max(largest, s.size());
  }
  const std::size_t steps = (largest + per_group - 1) / per_group;
  for (std::size_t step = 0; step < steps; ++step) {
    auto& batch = batches.emplace_back();
    for (const auto& s : shuffled) {
      const std::size_t take = std::min(per_group, s.size());
      for (std::size_t k = 0; k < take; ++k) batch.push_back(s[(step * per_group + k) % s.size()]);
    }
    std::sort(batch.begin(), batch.end());
  }
  return batches;
}

}  // namespace detail

/// Learns a dense projection by Adam over the LD loss. Bit-reproducible for a
/// fixed (input, config, seed).
inline TrainReport train_projection(const EmbeddingSet& descriptions, const TrainConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const int K = descriptions.num_classes();
  const int A = descriptions.num_attributes();
  if (K < 2 || A < 2) throw DataError("descriptions need at least 2 classes and 2 attributes in their vocabularies");
  const auto groups = partition_by_group(descriptions);
  for (int a = 0; a < A; ++a)
    for (int y = 0; y < K; ++y)
      if (!groups.contains(GroupLabel{a, y})) {
        throw DataError("descriptions lack group (attribute " + std::to_string(a) + ", class " + std::to_string(y) +
                        ")");
      }
  detail::check_train_config(config, groups.size());

  std::mt19937_64 rng(config.seed);
  const auto dim = descriptions.dim();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(dim, dim);
  if (config.init == InitKind::identity_plus_noise) {
    std::normal_distribution<double> noise(0.0, config.init_sigma);
    for (Eigen::Index c = 0; c < dim; ++c)
      for (Eigen::Index r = 0; r < dim; ++r) P(r, c) += noise(rng);
  }

  Adam adam({config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps}, dim, dim);
  const LossConfig loss_config{config.margin, config.pairing};

  TrainReport report;
  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& rows : detail::epoch_batches(descriptions, groups, config, rng)) {
      const auto batch = descriptions.select(rows);
      const auto result = ld_loss_grad(batch, ProjectionMatrix(P), loss_config, K, A);
      if (!std::isfinite(result.loss.total) || !result.gradient.allFinite()) {
        throw NumericalError("non-finite loss or gradient at step " + std::to_string(step));
      }
      report.loss_history.push_back({step, result.loss});
      adam.step(P, result.gradient);
      if (!P.allFinite()) throw NumericalError("projection became non-finite at step " + std::to_string(step));
      ++step;
    }
  }
  report.final_projection = ProjectionMatrix(P);
  report.steps = step;
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace prism
