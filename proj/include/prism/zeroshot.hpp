#pragma once

#include <prism/embedding_set.hpp>
#include <prism/error.hpp>
#include <prism/projection.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace prism {

struct Prediction {
  std::string id;
  int predicted_class = 0;
  std::optional<int> true_class;
  std::optional<int> attribute;
  std::vector<double> scores;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct PredictionSet {
  int num_classes = 0;
  std::vector<Prediction> predictions;

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

struct ClassifyOptions {
  /// Renormalize images and prompts (after projection, if any) before the
  /// inner product. Off reproduces raw projected inner products.
  bool renormalize = true;
  /// Worker threads for record-parallel scoring; 0 picks hardware concurrency.
  unsigned threads = 1;
};

/// Index of the largest score; ties go to the smaller index.
inline int argmax_score(const std::vector<double>& scores) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(scores.size()); ++k)
    if (scores[static_cast<std::size_t>(k)] > scores[static_cast<std::size_t>(best)]) best = k;
  return best;
}

namespace detail {

inline RowMatrix prompts_by_class(const EmbeddingSet& prompts) {
  const auto K = static_cast<Eigen::Index>(prompts.size());
  if (K < 2) throw DataError("zero-shot classification needs at least 2 class prompts");
  RowMatrix out(K, prompts.dim());
  std::vector<bool> seen(static_cast<std::size_t>(K), false);
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const auto& rec = prompts.record(i);
    if (!rec.class_label || *rec.class_label < 0 || *rec.class_label >= K) {
      throw DataError("class prompt '" + rec.id + "' has no class label in [0, " + std::to_string(K) + ")");
    }
    if (seen[static_cast<std::size_t>(*rec.class_label)]) {
      throw DataError("more than one prompt for class " + std::to_string(*rec.class_label));
    }
    seen[static_cast<std::size_t>(*rec.class_label)] = true;
    out.row(*rec.class_label) = prompts.vector(i);
  }
  return out;
}

inline void renormalize_rows(RowMatrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (!(n > 1e-10)) throw NumericalError(std::string(what) + " row " + std::to_string(i) + " has zero norm");
    m.row(i) /= n;
  }
}

}  // namespace detail

/// Zero-shot prediction by argmax_k <img, prompt_k>, optionally in the space
/// projected by P. Output order follows the image set.
inline PredictionSet classify(const EmbeddingSet& images, const EmbeddingSet& class_prompts,
                              const std::optional<ProjectionMatrix>& P = std::nullopt,
                              const ClassifyOptions& options = {}) {
  if (images.dim() != class_prompts.dim()) throw DataError("image and prompt dims differ");
  RowMatrix text = detail::prompts_by_class(class_prompts);
  RowMatrix img = images.vectors();
  if (P) {
    if (P->dim() != images.dim()) throw DataError("projection dim does not match embedding dim");
    text = text * P->values().transpose();
    img = img * P->values().transpose();
  }
  if (options.renormalize) {
    detail::renormalize_rows(text, "projected class prompt");
    for (Eigen::Index i = 0; i < img.rows(); ++i) {
      const double n = img.row(i).norm();
      if (!(n > 1e-10)) {
        throw NumericalError("projection collapses image '" + images.record(static_cast<std::size_t>(i)).id + "'");
      }
      img.row(i) /= n;
    }
  }

  PredictionSet out;
  out.num_classes = static_cast<int>(text.rows());
  out.predictions.resize(images.size());
  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& p = out.predictions[i];
      const auto& rec = images.record(i);
      p.id = rec.id;
      p.true_class = rec.class_label;
      p.attribute = rec.attribute_label;
      p.scores.resize(static_cast<std::size_t>(text.rows()));
      for (Eigen::Index k = 0; k < text.rows(); ++k) {
        p.scores[static_cast<std::size_t>(k)] = img.row(static_cast<Eigen::Index>(i)).dot(text.row(k));
      }
      p.predicted_class = argmax_score(p.scores);
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, images.size() / 256)));
  if (threads <= 1) {
    score_range(0, images.size());
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (images.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(images.size(), begin + chunk);
      if (begin < end) workers.emplace_back(score_range, begin, end);
    }
  }
  return out;
}

struct GroupAccuracy {
  double accuracy = 0.0;
  std::size_t count = 0;
  std::size_t correct = 0;
};

struct GroupMetrics {
  std::map<GroupLabel, GroupAccuracy> per_group_accuracy;
  double worst_group = 0.0;
  double accuracy = 0.0;
  double gap = 0.0;
  std::optional<double> delta_wg;
  std::optional<double> delta_acc;
};

/// Per-group accuracy, worst-group (over nonempty groups), micro-averaged
/// accuracy and their gap; deltas against `baseline` when given.
inline GroupMetrics group_metrics(const PredictionSet& preds, const std::optional<GroupMetrics>& baseline = std::nullopt) {
  if (preds.predictions.empty()) throw DataError("no predictions to evaluate");
  GroupMetrics m;
  std::size_t correct = 0;
  for (const auto& p : preds.predictions) {
    if (!p.true_class || !p.attribute) throw DataError("prediction '" + p.id + "' lacks true_class or attribute");
    auto& g = m.per_group_accuracy[GroupLabel{*p.attribute, *p.true_class}];
    ++g.count;
    if (p.predicted_class == *p.true_class) {
      ++g.correct;
      ++correct;
    }
  }
  m.worst_group = 1.0;
  for (auto& [label, g] : m.per_group_accuracy) {
    g.accuracy = static_cast<double>(g.correct) / static_cast<double>(g.count);
    m.worst_group = std::min(m.worst_group, g.accuracy);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(preds.predictions.size());
  m.gap = m.accuracy - m.worst_group;
  if (baseline) {
    m.delta_wg = m.worst_group - baseline->worst_group;
    m.delta_acc = m.accuracy - baseline->accuracy;
  }
  return m;
}

// preds.csv: id,true_class,attribute,pred_class,score_0..score_{K-1}
inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_predictions_csv(const PredictionSet& preds, std::ostream& out) {
  out << "id,true_class,attribute,pred_class";
  for (int k = 0; k < preds.num_classes; ++k) out << ",score_" << k;
  out << '\n';
  for (const auto& p : preds.predictions) {
    out << p.id << ',';
    if (p.true_class) out << *p.true_class;
    out << ',';
    if (p.attribute) out << *p.attribute;
    out << ',' << p.predicted_class;
    for (double s : p.scores) out << ',' << format_score(s);
    out << '\n';
  }
}

inline void write_predictions_csv(const PredictionSet& preds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_predictions_csv(preds, out);
}

inline PredictionSet read_predictions_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,true_class,attribute,pred_class", 0) != 0) {
    throw DataError(path.string() + ": not a predictions CSV");
  }
  PredictionSet preds;
  preds.num_classes = static_cast<int>(std::count(line.begin(), line.end(), ',')) - 3;
  if (preds.num_classes < 1) throw DataError(path.string() + ": predictions CSV has no score columns");

  auto parse_int = [&](const std::string& cell, const std::string& id) -> std::optional<int> {
    if (cell.empty()) return std::nullopt;
    try {
      std::size_t used = 0;
      const int v = std::stoi(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      return v;
    } catch (const std::exception&) {
      throw DataError(path.string() + ": record '" + id + "' has a malformed integer '" + cell + "'");
    }
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != static_cast<std::size_t>(4 + preds.num_classes)) {
      throw DataError(path.string() + ": wrong cell count for record '" + (cells.empty() ? "" : cells[0]) + "'");
    }
    Prediction p;
    p.id = cells[0];
    p.true_class = parse_int(cells[1], p.id);
    p.attribute = parse_int(cells[2], p.id);
    const auto pred = parse_int(cells[3], p.id);
    if (!pred) throw DataError(path.string() + ": record '" + p.id + "' has no pred_class");
    p.predicted_class = *pred;
    for (int k = 0; k < preds.num_classes; ++k) {
      try {
        p.scores.push_back(std::stod(cells[static_cast<std::size_t>(4 + k)]));
      } catch (const std::exception&) {
        throw DataError(path.string() + ": record '" + p.id + "' has a malformed score");
      }
    }
    preds.predictions.push_back(std::move(p));
  }
  return preds;
}

inline nlohmann::ordered_json metrics_to_json(const GroupMetrics& m) {
  nlohmann::ordered_json j;
  auto groups = nlohmann::ordered_json::array();
  for (const auto& [label, g] : m.per_group_accuracy) {
    groups.push_back({{"attribute", label.attribute},
                      {"class", label.cls},
                      {"accuracy", g.accuracy},
                      {"count", g.count},
                      {"correct", g.correct}});
  }
  j["per_group_accuracy"] = std::move(groups);
  j["worst_group"] = m.worst_group;
  j["accuracy"] = m.accuracy;
  j["gap"] = m.gap;
  j["delta_wg"] = m.delta_wg ? nlohmann::ordered_json(*m.delta_wg) : nlohmann::ordered_json(nullptr);
  j["delta_acc"] = m.delta_acc ? nlohmann::ordered_json(*m.delta_acc) : nlohmann::ordered_json(nullptr);
  return j;
}

inline GroupMetrics metrics_from_json(const nlohmann::json& j) {
  GroupMetrics m;
  try {
    for (const auto& g : j.at("per_group_accuracy")) {
      GroupAccuracy acc;
      acc.accuracy = g.at("accuracy").get<double>();
      acc.count = g.value("count", std::size_t{0});
      acc.correct = g.value("correct", std::size_t{0});
      m.per_group_accuracy[GroupLabel{g.at("attribute").get<int>(), g.at("class").get<int>()}] = acc;
    }
    m.worst_group = j.at("worst_group").get<double>();
    m.accuracy = j.at("accuracy").get<double>();
    m.gap = j.at("gap").get<double>();
    if (j.contains("delta_wg") && !j.at("delta_wg").is_null()) m.delta_wg = j.at("delta_wg").get<double>();
    if (j.contains("delta_acc") && !j.at("delta_acc").is_null()) m.delta_acc = j.at("delta_acc").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics JSON: ") + e.what());
  }
  return m;
}

}  // namespace prism
