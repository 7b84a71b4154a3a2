#pragma once

// Planted-bias benchmark. With orthonormal core, spurious and text-only
// directions and w = spurious_weight:
//   image (a, y)          normalize((1 - w) core_y + w spu_a + noise)
//   class text y          (1 - c) core_y + c spu_{y mod |A|} + tau text_y
//   class prompt y        normalize(class text y + small noise)
//   description (a, y, t) normalize((1 - w) class text y + w spu_a + offset_t)
//   attribute a           normalize(spu_a + small noise)
// c is the contamination weight (0 when contamination is off) and tau the
// weight of class features that exist only in text. Group sizes are skewed
// toward the class-aligned attribute y mod |A|.

#include <prism/embedding_set.hpp>
#include <prism/error.hpp>
#include <prism/zeroshot.hpp>

#include <json.hpp>

#include <Eigen/QR>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace prism {

struct SynthConfig {
  int dim = 32;
  int num_classes = 2;
  int num_attributes = 2;
  double spurious_weight = 0.6;
  double noise_sigma = 0.05;
  int samples_per_class = 500;
  /// Fraction of each class carrying its class-aligned attribute.
  double correlation = 0.9;
  /// Explicit sizes override samples_per_class/correlation when nonempty.
  std::map<GroupLabel, int> group_sizes;
  std::uint64_t seed = 0;
  int n_descriptions_per_group = 64;
  bool prompt_contamination = true;
  double contamination_weight = 0.45;
  double prompt_noise = 0.01;
  double description_noise = 0.05;
  double attribute_noise = 0.01;
  double text_only_weight = 1.0;
};

struct SynthTruth {
  SynthConfig config;
  Eigen::MatrixXd core;      // dim x K, orthonormal columns
  Eigen::MatrixXd spurious;  // dim x |A|, orthonormal, orthogonal to core
  Eigen::MatrixXd text_only;  // dim x K, orthogonal to both
};

struct SynthBundle {
  EmbeddingSet images;
  EmbeddingSet class_prompts;
  EmbeddingSet descriptions;
  EmbeddingSet attributes;
  SynthTruth truth;
};

inline int aligned_attribute(int cls, int num_attributes) { return cls % num_attributes; }

inline void validate(const SynthConfig& c) {
  if (c.dim <= 0) throw ConfigError("synth dim must be positive");
  if (c.num_classes < 2 || c.num_attributes < 2) throw ConfigError("synth needs >= 2 classes and >= 2 attributes");
  if (2 * c.num_classes + c.num_attributes > c.dim) throw ConfigError("2K + |A| must not exceed dim");
  if (!(c.spurious_weight >= 0.0 && c.spurious_weight < 1.0)) throw ConfigError("spurious_weight must lie in [0, 1)");
  if (!(c.correlation >= 0.0 && c.correlation <= 1.0)) throw ConfigError("correlation must lie in [0, 1]");
  if (!(c.contamination_weight >= 0.0 && c.contamination_weight < 1.0)) {
    throw ConfigError("contamination_weight must lie in [0, 1)");
  }
  if (c.noise_sigma < 0 || c.prompt_noise < 0 || c.description_noise < 0 || c.attribute_noise < 0 ||
      c.text_only_weight < 0) {
    throw ConfigError("noise levels must be nonnegative");
  }
  if (c.samples_per_class < 0 || c.n_descriptions_per_group < 0) throw ConfigError("counts must be nonnegative");
  for (const auto& [g, n] : c.group_sizes) {
    if (n < 0) throw ConfigError("group sizes must be nonnegative");
    if (g.attribute < 0 || g.attribute >= c.num_attributes || g.cls < 0 || g.cls >= c.num_classes) {
      throw ConfigError("group size given for a group outside A x Y");
    }
  }
}

/// Image count per group: explicit override, else the aligned attribute takes
/// round(correlation * samples_per_class) and the rest is split evenly.
inline std::map<GroupLabel, int> resolved_group_sizes(const SynthConfig& c) {
  std::map<GroupLabel, int> sizes;
  for (int y = 0; y < c.num_classes; ++y) {
    const int aligned = aligned_attribute(y, c.num_attributes);
    const int majority = static_cast<int>(std::lround(c.correlation * c.samples_per_class));
    const int rest = c.samples_per_class - majority;
    const int others = c.num_attributes - 1;
    int k = 0;
    for (int a = 0; a < c.num_attributes; ++a) {
      GroupLabel g{a, y};
      if (!c.group_sizes.empty()) {
        auto it = c.group_sizes.find(g);
        sizes[g] = it == c.group_sizes.end() ? 0 : it->second;
      } else if (a == aligned) {
        sizes[g] = majority;
      } else {
        sizes[g] = rest / others + (k < rest % others ? 1 : 0);
        ++k;
      }
    }
  }
  return sizes;
}

namespace detail {

inline Eigen::VectorXd gaussian(Eigen::Index n, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = sigma * dist(rng);
  return v;
}

inline Eigen::RowVectorXd unit(const Eigen::VectorXd& v) {
  const double n = v.norm();
  if (!(n > 1e-12)) throw NumericalError("synthetic vector vanished");
  return (v / n).transpose();
}

}  // namespace detail

/// Seeded, reproducible planted-bias bundle.
inline SynthBundle generate(const SynthConfig& config) {
  validate(config);
  std::mt19937_64 rng(config.seed);
  const int d = config.dim, K = config.num_classes, A = config.num_attributes;

  // Orthonormal directions: Q factor of a Gaussian d x (2K + |A|) matrix.
  Eigen::MatrixXd gauss(d, 2 * K + A);
  for (Eigen::Index c = 0; c < gauss.cols(); ++c) gauss.col(c) = detail::gaussian(d, 1.0, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, 2 * K + A);

  SynthBundle b;
  b.truth.config = config;
  b.truth.core = q.leftCols(K);
  b.truth.spurious = q.middleCols(K, A);
  b.truth.text_only = q.rightCols(K);
  const auto& text_only = b.truth.text_only;
  const auto& core = b.truth.core;
  const auto& spu = b.truth.spurious;
  const double w = config.spurious_weight;

  std::vector<std::string> class_vocab, attribute_vocab;
  for (int y = 0; y < K; ++y) class_vocab.push_back("class" + std::to_string(y));
  for (int a = 0; a < A; ++a) attribute_vocab.push_back("attribute" + std::to_string(a));

  {
    const auto sizes = resolved_group_sizes(config);
    std::size_t total = 0;
    for (const auto& [g, n] : sizes) total += static_cast<std::size_t>(n);
    std::vector<EmbeddingRecord> recs;
    RowMatrix vecs(static_cast<Eigen::Index>(total), d);
    Eigen::Index row = 0;
    for (int y = 0; y < K; ++y) {
      for (int a = 0; a < A; ++a) {
        const int n = sizes.at(GroupLabel{a, y});
        for (int s = 0; s < n; ++s) {
          const Eigen::VectorXd v = (1.0 - w) * core.col(y) + w * spu.col(a) + detail::gaussian(d, config.noise_sigma, rng);
          vecs.row(row++) = detail::unit(v);
          recs.push_back({"img_y" + std::to_string(y) + "_a" + std::to_string(a) + "_" + std::to_string(s), y, a,
                          std::nullopt, std::nullopt});
        }
      }
    }
    b.images = EmbeddingSet(SetKind::image, d, std::move(recs), std::move(vecs), class_vocab, attribute_vocab);
  }

  // Class text direction: the class word carries its aligned spurious
  // direction when contamination is on, in prompts and descriptions alike.
  const double c = config.prompt_contamination ? config.contamination_weight : 0.0;
  Eigen::MatrixXd class_text(d, K);
  for (int y = 0; y < K; ++y) class_text.col(y) = (1.0 - c) * core.col(y) + c * spu.col(aligned_attribute(y, A)) +
                                      config.text_only_weight * text_only.col(y);

  {
    std::vector<EmbeddingRecord> recs;
    RowMatrix vecs(K, d);
    for (int y = 0; y < K; ++y) {
      const Eigen::VectorXd v = class_text.col(y) + detail::gaussian(d, config.prompt_noise, rng);
      vecs.row(y) = detail::unit(v);
      recs.push_back({"prompt_" + std::to_string(y), y, std::nullopt, std::nullopt,
                      "A photo of a " + class_vocab[static_cast<std::size_t>(y)]});
    }
    b.class_prompts = EmbeddingSet(SetKind::class_prompt, d, std::move(recs), std::move(vecs), class_vocab, {});
  }

  {
    const int T = config.n_descriptions_per_group;
    std::vector<Eigen::VectorXd> offsets;
    for (int t = 0; t < T; ++t) offsets.push_back(detail::gaussian(d, config.description_noise, rng));
    std::vector<EmbeddingRecord> recs;
    RowMatrix vecs(static_cast<Eigen::Index>(T) * K * A, d);
    Eigen::Index row = 0;
    for (int y = 0; y < K; ++y) {
      for (int a = 0; a < A; ++a) {
        for (int t = 0; t < T; ++t) {
          const Eigen::VectorXd v = (1.0 - w) * class_text.col(y) + w * spu.col(a) + offsets[static_cast<std::size_t>(t)];
          vecs.row(row++) = detail::unit(v);
          const std::string tid = "t" + std::to_string(t);
          recs.push_back({"desc_y" + std::to_string(y) + "_a" + std::to_string(a) + "_" + tid, y, a, tid,
                          "template " + tid + ": " + class_vocab[static_cast<std::size_t>(y)] + " with " +
                              attribute_vocab[static_cast<std::size_t>(a)]});
        }
      }
    }
    b.descriptions =
        EmbeddingSet(SetKind::scene_description, d, std::move(recs), std::move(vecs), class_vocab, attribute_vocab);
  }

  {
    std::vector<EmbeddingRecord> recs;
    RowMatrix vecs(A, d);
    for (int a = 0; a < A; ++a) {
      vecs.row(a) = detail::unit(spu.col(a) + detail::gaussian(d, config.attribute_noise, rng));
      recs.push_back({"attr_" + std::to_string(a), std::nullopt, a, std::nullopt,
                      attribute_vocab[static_cast<std::size_t>(a)]});
    }
    b.attributes = EmbeddingSet(SetKind::attribute, d, std::move(recs), std::move(vecs), {}, attribute_vocab);
  }
  return b;
}

/// Reference classifier: argmax_y <image, core_y> with the generator's true
/// core directions.
inline PredictionSet oracle_classify(const SynthBundle& bundle) {
  const auto& core = bundle.truth.core;
  if (core.cols() < 2 || core.rows() != bundle.images.dim()) throw DataError("bundle truth does not match images");
  PredictionSet out;
  out.num_classes = static_cast<int>(core.cols());
  for (std::size_t i = 0; i < bundle.images.size(); ++i) {
    const auto& rec = bundle.images.record(i);
    Prediction p{rec.id, 0, rec.class_label, rec.attribute_label, {}};
    const Eigen::RowVectorXd s = bundle.images.vector(i) * core;
    p.scores.assign(s.data(), s.data() + s.size());
    p.predicted_class = argmax_score(p.scores);
    out.predictions.push_back(std::move(p));
  }
  return out;
}

// truth.json / synth config JSON

inline nlohmann::ordered_json to_json(const SynthConfig& c) {
  nlohmann::ordered_json j;
  j["dim"] = c.dim;
  j["num_classes"] = c.num_classes;
  j["num_attributes"] = c.num_attributes;
  j["spurious_weight"] = c.spurious_weight;
  j["noise_sigma"] = c.noise_sigma;
  j["samples_per_class"] = c.samples_per_class;
  j["correlation"] = c.correlation;
  auto sizes = nlohmann::ordered_json::array();
  for (const auto& [g, n] : c.group_sizes) sizes.push_back({{"attribute", g.attribute}, {"class", g.cls}, {"count", n}});
  j["group_sizes"] = std::move(sizes);
  j["seed"] = c.seed;
  j["n_descriptions_per_group"] = c.n_descriptions_per_group;
  j["prompt_contamination"] = c.prompt_contamination;
  j["contamination_weight"] = c.contamination_weight;
  j["prompt_noise"] = c.prompt_noise;
  j["description_noise"] = c.description_noise;
  j["attribute_noise"] = c.attribute_noise;
  j["text_only_weight"] = c.text_only_weight;
  return j;
}

/// Reads the keys present in `j` over `base`; unknown keys are rejected.
inline SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {}) {
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dim") base.dim = v.get<int>();
      else if (key == "num_classes") base.num_classes = v.get<int>();
      else if (key == "num_attributes") base.num_attributes = v.get<int>();
      else if (key == "spurious_weight") base.spurious_weight = v.get<double>();
      else if (key == "noise_sigma") base.noise_sigma = v.get<double>();
      else if (key == "samples_per_class") base.samples_per_class = v.get<int>();
      else if (key == "correlation") base.correlation = v.get<double>();
      else if (key == "seed") base.seed = v.get<std::uint64_t>();
      else if (key == "n_descriptions_per_group") base.n_descriptions_per_group = v.get<int>();
      else if (key == "prompt_contamination") base.prompt_contamination = v.get<bool>();
      else if (key == "contamination_weight") base.contamination_weight = v.get<double>();
      else if (key == "prompt_noise") base.prompt_noise = v.get<double>();
      else if (key == "description_noise") base.description_noise = v.get<double>();
      else if (key == "attribute_noise") base.attribute_noise = v.get<double>();
      else if (key == "text_only_weight") base.text_only_weight = v.get<double>();
      else if (key == "group_sizes") {
        base.group_sizes.clear();
        for (const auto& g : v) {
          base.group_sizes[GroupLabel{g.at("attribute").get<int>(), g.at("class").get<int>()}] = g.at("count").get<int>();
        }
      } else {
        throw ConfigError("unknown synth config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad synth config value: ") + e.what());
  }
  return base;
}

inline nlohmann::ordered_json to_json(const SynthTruth& t) {
  nlohmann::ordered_json j;
  j["config"] = to_json(t.config);
  auto cols = [](const Eigen::MatrixXd& m) {
    auto out = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(std::vector<double>(m.col(c).data(), m.col(c).data() + m.rows()));
    return out;
  };
  j["core_directions"] = cols(t.core);
  j["spurious_directions"] = cols(t.spurious);
  j["text_only_directions"] = cols(t.text_only);
  return j;
}

inline SynthTruth truth_from_json(const nlohmann::json& j) {
  SynthTruth t;
  t.config = synth_config_from_json(j.at("config"));
  auto mat = [&](const nlohmann::json& arr) {
    if (arr.empty()) throw DataError("truth.json: empty direction list");
    const auto rows = static_cast<Eigen::Index>(arr.at(0).size());
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(arr.size()));
    for (std::size_t c = 0; c < arr.size(); ++c) {
      const auto col = arr[c].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(col.size()) != rows) throw DataError("truth.json: ragged direction list");
      for (Eigen::Index r = 0; r < rows; ++r) m(r, static_cast<Eigen::Index>(c)) = col[static_cast<std::size_t>(r)];
    }
    return m;
  };
  try {
    t.core = mat(j.at("core_directions"));
    t.spurious = mat(j.at("spurious_directions"));
    t.text_only = mat(j.at("text_only_directions"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed truth.json: ") + e.what());
  }
  return t;
}

}  // namespace prism
