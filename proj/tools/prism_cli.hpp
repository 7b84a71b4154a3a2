#pragma once

// Command-line pipeline: synth, train, ortho, classify, eval, sweep, validate.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical
// failure. Every subcommand accepts --config FILE.json whose keys are the long
// flag names (dashes or underscores); flags on the command line win over the
// file, the file wins over defaults.

#include <prism/prism.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace prism::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed JSON: " + e.what());
  }
}

inline std::string json_scalar_to_arg(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v.get<double>();
    return ss.str();
  }
  throw UsageError("config key '" + key + "' must be a scalar");
}

/// Applies a JSON overlay to options the user did not set on the command line.
inline void apply_config_overlay(CLI::App& sub, const nlohmann::json& overlay) {
  if (!overlay.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [key, value] : overlay.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    CLI::Option* opt = sub.get_option_no_throw("--" + name);
    if (opt == nullptr || name == "config") throw UsageError("unknown config key '" + key + "'");
    if (opt->count() > 0) continue;
    opt->add_result(json_scalar_to_arg(value, key));
    opt->run_callback();
  }
}

inline void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw UsageError(flag + " is required");
}

inline unsigned thread_cap() {
  const char* env = std::getenv("PRISM_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    return static_cast<unsigned>(std::stoul(env));
  } catch (const std::exception&) {
    throw UsageError("PRISM_THREADS must be a nonnegative integer");
  }
}

/// "lo:hi:step" (inclusive) or "a,b,c".
inline std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  try {
    if (text.find(':') != std::string::npos) {
      std::vector<double> parts;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
      if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0]) throw UsageError("bad range '" + text + "'");
      const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
      // Round to 12 decimals so 0.2 + 2 * 0.2 prints as 0.6.
      for (long i = 0; i <= n; ++i) {
        out.push_back(std::round((parts[0] + static_cast<double>(i) * parts[2]) * 1e12) / 1e12);
      }
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError("cannot parse values '" + text + "'");
  }
  if (out.empty()) throw UsageError("no sweep values given");
  return out;
}

inline std::string percent(double fraction) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(1) << 100.0 * fraction << "%";
  return ss.str();
}

inline void print_metrics_table(const GroupMetrics& m, std::ostream& out) {
  out << "group (attribute,class)  accuracy  count\n";
  for (const auto& [g, acc] : m.per_group_accuracy) {
    out << "  (" << g.attribute << "," << g.cls << ")" << std::setw(22) << percent(acc.accuracy) << std::setw(7)
        << acc.count << "\n";
  }
  out << "WG " << percent(m.worst_group) << "  Acc " << percent(m.accuracy) << "  Gap " << percent(m.gap);
  if (m.delta_wg) out << "  dWG " << percent(*m.delta_wg);
  if (m.delta_acc) out << "  dAcc " << percent(*m.delta_acc);
  out << "\n";
}

inline void print_resolved(const std::string& command, const nlohmann::ordered_json& config, std::ostream& out) {
  out << "resolved config (" << command << "): " << config.dump() << "\n";
}

/// Keeps descriptions whose template is among the first `n` templates in
/// first-appearance order.
inline EmbeddingSet first_templates(const EmbeddingSet& descriptions, int n) {
  std::vector<std::string> order;
  for (const auto& rec : descriptions.records()) {
    if (!rec.template_id) throw DataError("record '" + rec.id + "' has no template_id");
    if (std::find(order.begin(), order.end(), *rec.template_id) == order.end()) order.push_back(*rec.template_id);
  }
  if (n <= 0 || static_cast<std::size_t>(n) > order.size()) {
    throw UsageError("n_descriptions " + std::to_string(n) + " outside 1.." + std::to_string(order.size()));
  }
  order.resize(static_cast<std::size_t>(n));
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < descriptions.size(); ++i) {
    if (std::find(order.begin(), order.end(), *descriptions.record(i).template_id) != order.end()) keep.push_back(i);
  }
  return descriptions.select(keep);
}

// Per-subcommand settings, bound to CLI11 options.

struct SynthArgs {
  SynthConfig config;
  std::string out;
};

struct TrainArgs {
  std::string descriptions;
  std::string out;
  std::string history;
  std::string pairing = "template_matched";
  std::string init = "identity";
  TrainConfig config;
};

struct OrthoArgs {
  std::string attributes;
  std::string out;
  double rank_tol = 1e-8;
};

struct ClassifyArgs {
  std::string images;
  std::string prompts;
  std::string projection;
  std::string out;
  std::string projected_out;
  bool raw_scores = false;
};

struct EvalArgs {
  std::string preds;
  std::string baseline;
  std::string out;
};

struct SweepArgs {
  std::string param;
  std::string values;
  std::string bundle;
  std::string out;
  std::string pairing = "template_matched";
  std::uint64_t synth_seed = 0;
  TrainConfig config;
};

struct ValidateArgs {
  std::string set;
};

inline void add_train_options(CLI::App* sub, TrainConfig& c, std::string& pairing) {
  sub->add_option("--margin", c.margin, "LD loss margin m in [0,1]")->capture_default_str();
  sub->add_option("--lr", c.learning_rate, "Adam learning rate")->capture_default_str();
  sub->add_option("--batch", c.batch_size, "descriptions per step")->capture_default_str();
  sub->add_option("--epochs", c.epochs, "passes over the descriptions")->capture_default_str();
  sub->add_option("--seed", c.seed, "batching / init seed")->capture_default_str();
  sub->add_option("--beta1", c.adam_beta1)->capture_default_str();
  sub->add_option("--beta2", c.adam_beta2)->capture_default_str();
  sub->add_option("--eps", c.adam_eps)->capture_default_str();
  sub->add_option("--pairing", pairing, "template_matched | group_mean | all_pairs")->capture_default_str();
}

inline nlohmann::ordered_json train_config_json(const TrainConfig& c) {
  return {{"margin", c.margin},
          {"lr", c.learning_rate},
          {"batch", c.batch_size},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"beta1", c.adam_beta1},
          {"beta2", c.adam_beta2},
          {"eps", c.adam_eps},
          {"pairing", std::string(to_string(c.pairing))},
          {"init", c.init == InitKind::identity ? "identity" : "identity_plus_noise"},
          {"init_sigma", c.init_sigma}};
}

inline GroupMetrics evaluate_projection(const SynthBundle& bundle, const std::optional<ProjectionMatrix>& P,
                                        unsigned threads) {
  ClassifyOptions opts;
  opts.threads = threads;
  return group_metrics(classify(bundle.images, bundle.class_prompts, P, opts));
}

}  // namespace detail

/// Runs the CLI; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;

  CLI::App app{"Embedding-space debiasing: learned and closed-form projections, zero-shot evaluation"};
  app.require_subcommand(1);
  std::string config_path;

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a planted-bias synthetic bundle");
  {
    auto& c = synth.config;
    synth_cmd->add_option("--config", config_path, "JSON overlay");
    synth_cmd->add_option("--out", synth.out, "output directory");
    synth_cmd->add_option("--dim", c.dim)->capture_default_str();
    synth_cmd->add_option("--num-classes", c.num_classes)->capture_default_str();
    synth_cmd->add_option("--num-attributes", c.num_attributes)->capture_default_str();
    synth_cmd->add_option("--spurious-weight", c.spurious_weight)->capture_default_str();
    synth_cmd->add_option("--noise-sigma", c.noise_sigma)->capture_default_str();
    synth_cmd->add_option("--samples-per-class", c.samples_per_class)->capture_default_str();
    synth_cmd->add_option("--correlation", c.correlation)->capture_default_str();
    synth_cmd->add_option("--seed", c.seed)->capture_default_str();
    synth_cmd->add_option("--n-descriptions-per-group", c.n_descriptions_per_group)->capture_default_str();
    synth_cmd->add_option("--prompt-contamination", c.prompt_contamination)->capture_default_str();
    synth_cmd->add_option("--contamination-weight", c.contamination_weight)->capture_default_str();
    synth_cmd->add_option("--prompt-noise", c.prompt_noise)->capture_default_str();
    synth_cmd->add_option("--description-noise", c.description_noise)->capture_default_str();
    synth_cmd->add_option("--attribute-noise", c.attribute_noise)->capture_default_str();
    synth_cmd->add_option("--text-only-weight", c.text_only_weight)->capture_default_str();
  }

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "learn a projection by LD-loss minimization");
  train_cmd->add_option("--config", config_path, "JSON overlay");
  train_cmd->add_option("--descriptions", train.descriptions, "scene-description EMBF");
  train_cmd->add_option("--out", train.out, "output PRISMP projection");
  train_cmd->add_option("--history", train.history, "optional loss-history CSV");
  train_cmd->add_option("--init", train.init, "identity | identity_plus_noise")->capture_default_str();
  train_cmd->add_option("--init-sigma", train.config.init_sigma)->capture_default_str();
  add_train_options(train_cmd, train.config, train.pairing);

  OrthoArgs ortho;
  auto* ortho_cmd = app.add_subcommand("ortho", "closed-form projector removing attribute directions");
  ortho_cmd->add_option("--config", config_path, "JSON overlay");
  ortho_cmd->add_option("--attributes", ortho.attributes, "attribute EMBF");
  ortho_cmd->add_option("--out", ortho.out, "output PRISMP projection");
  ortho_cmd->add_option("--rank-tol", ortho.rank_tol, "relative rank threshold")->capture_default_str();

  ClassifyArgs cls;
  auto* classify_cmd = app.add_subcommand("classify", "zero-shot classification, optionally projected");
  classify_cmd->add_option("--config", config_path, "JSON overlay");
  classify_cmd->add_option("--images", cls.images, "image EMBF");
  classify_cmd->add_option("--prompts", cls.prompts, "class-prompt EMBF");
  classify_cmd->add_option("--projection", cls.projection, "PRISMP projection");
  classify_cmd->add_flag("--raw-scores", cls.raw_scores, "skip post-projection renormalization");
  classify_cmd->add_option("--out", cls.out, "predictions CSV");
  classify_cmd->add_option("--projected-out", cls.projected_out, "also write projected images as EMBF");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "group metrics from predictions");
  eval_cmd->add_option("--config", config_path, "JSON overlay");
  eval_cmd->add_option("--preds", ev.preds, "predictions CSV");
  eval_cmd->add_option("--baseline", ev.baseline, "baseline metrics JSON for deltas");
  eval_cmd->add_option("--out", ev.out, "metrics JSON");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "train+evaluate over a grid of margin or description counts");
  sweep_cmd->add_option("--config", config_path, "JSON overlay");
  sweep_cmd->add_option("--param", sweep.param, "margin | n_descriptions");
  sweep_cmd->add_option("--values", sweep.values, "lo:hi:step or comma list");
  sweep_cmd->add_option("--bundle", sweep.bundle, "synthetic bundle directory (default: generate)");
  sweep_cmd->add_option("--synth-seed", sweep.synth_seed, "seed for the generated bundle")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "sweep CSV");
  add_train_options(sweep_cmd, sweep.config, sweep.pairing);

  ValidateArgs val;
  auto* validate_cmd = app.add_subcommand("validate", "check an EMBF set or PRISMP projection");
  validate_cmd->add_option("--config", config_path, "JSON overlay");
  validate_cmd->add_option("--set", val.set, "EMBF or PRISMP path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  try {
    if (!config_path.empty()) {
      const auto overlay = read_json_file(config_path);
      if (command == "synth") {
        // Synth files are SynthConfig JSON (same keys as truth.json's config);
        // flags given on the command line are re-applied on top.
        auto config_only = overlay;
        if (config_only.is_object()) config_only.erase("out");
        const SynthConfig from_file = synth_config_from_json(config_only, SynthConfig{});
        SynthConfig merged = from_file;
        auto pick = [&](const char* flag, auto& dst, const auto& src) {
          if (sub->get_option(flag)->count() > 0) dst = src;
        };
        const auto& cmd_line = synth.config;
        pick("--dim", merged.dim, cmd_line.dim);
        pick("--num-classes", merged.num_classes, cmd_line.num_classes);
        pick("--num-attributes", merged.num_attributes, cmd_line.num_attributes);
        pick("--spurious-weight", merged.spurious_weight, cmd_line.spurious_weight);
        pick("--noise-sigma", merged.noise_sigma, cmd_line.noise_sigma);
        pick("--samples-per-class", merged.samples_per_class, cmd_line.samples_per_class);
        pick("--correlation", merged.correlation, cmd_line.correlation);
        pick("--seed", merged.seed, cmd_line.seed);
        pick("--n-descriptions-per-group", merged.n_descriptions_per_group, cmd_line.n_descriptions_per_group);
        pick("--prompt-contamination", merged.prompt_contamination, cmd_line.prompt_contamination);
        pick("--contamination-weight", merged.contamination_weight, cmd_line.contamination_weight);
        pick("--prompt-noise", merged.prompt_noise, cmd_line.prompt_noise);
        pick("--description-noise", merged.description_noise, cmd_line.description_noise);
        pick("--attribute-noise", merged.attribute_noise, cmd_line.attribute_noise);
        pick("--text-only-weight", merged.text_only_weight, cmd_line.text_only_weight);
        synth.config = merged;
        if (overlay.contains("out") && sub->get_option("--out")->count() == 0) {
          synth.out = json_scalar_to_arg(overlay["out"], "out");
        }
      } else {
        apply_config_overlay(*sub, overlay);
      }
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    const unsigned threads = thread_cap();

    if (command == "synth") {
      require(synth.out, "--out");
      auto resolved = to_json(synth.config);
      resolved["out"] = synth.out;
      print_resolved(command, resolved, out);
      const auto bundle = generate(synth.config);
      save_bundle(bundle, synth.out);
      out << "wrote " << bundle.images.size() << " images, " << bundle.class_prompts.size() << " prompts, "
          << bundle.descriptions.size() << " descriptions, " << bundle.attributes.size() << " attributes to "
          << synth.out << "\n";
      return kOk;
    }

    if (command == "train") {
      require(train.descriptions, "--descriptions");
      require(train.out, "--out");
      train.config.pairing = parse_pairing(train.pairing);
      if (train.init == "identity") train.config.init = InitKind::identity;
      else if (train.init == "identity_plus_noise") train.config.init = InitKind::identity_plus_noise;
      else throw UsageError("--init must be identity or identity_plus_noise");
      auto resolved = train_config_json(train.config);
      resolved["descriptions"] = train.descriptions;
      resolved["out"] = train.out;
      resolved["history"] = train.history;
      print_resolved(command, resolved, out);

      const auto descriptions = normalize(load_embedding_set(train.descriptions));
      if (descriptions.kind() != SetKind::scene_description) {
        throw DataError(train.descriptions + ": expected a scene_description set");
      }
      const auto report = train_projection(descriptions, train.config);
      save_projection(report.final_projection, train.out);
      if (!train.history.empty()) {
        std::ofstream h(train.history, std::ios::trunc);
        if (!h) throw DataError("cannot write '" + train.history + "'");
        h << "step,intra_class_term,inter_class_term,total\n" << std::setprecision(17);
        for (const auto& r : report.loss_history) {
          h << r.step << ',' << r.loss.intra_class_term << ',' << r.loss.inter_class_term << ',' << r.loss.total
            << '\n';
        }
      }
      out << "trained " << report.steps << " steps; loss " << report.loss_history.front().loss.total << " -> "
          << report.loss_history.back().loss.total << "; wrote " << train.out << "\n";
      return kOk;
    }

    if (command == "ortho") {
      require(ortho.attributes, "--attributes");
      require(ortho.out, "--out");
      print_resolved(command, {{"attributes", ortho.attributes}, {"out", ortho.out}, {"rank_tol", ortho.rank_tol}},
                     out);
      const auto attrs = normalize(load_embedding_set(ortho.attributes));
      if (attrs.kind() != SetKind::attribute) throw DataError(ortho.attributes + ": expected an attribute set");
      const auto P = orthogonal_projection(AttributeMatrix::from_set(attrs), ortho.rank_tol);
      save_projection(P, ortho.out);
      out << "projector removes " << attrs.size() << " attribute embeddings; wrote " << ortho.out << "\n";
      return kOk;
    }

    if (command == "classify") {
      require(cls.images, "--images");
      require(cls.prompts, "--prompts");
      require(cls.out, "--out");
      print_resolved(command,
                     {{"images", cls.images},
                      {"prompts", cls.prompts},
                      {"projection", cls.projection},
                      {"raw_scores", cls.raw_scores},
                      {"out", cls.out},
                      {"projected_out", cls.projected_out},
                      {"threads", threads}},
                     out);
      const auto images = normalize(load_embedding_set(cls.images));
      const auto prompts = normalize(load_embedding_set(cls.prompts));
      std::optional<ProjectionMatrix> P;
      if (!cls.projection.empty()) P = load_projection(cls.projection);
      ClassifyOptions opts;
      opts.renormalize = !cls.raw_scores;
      opts.threads = threads;
      const auto preds = classify(images, prompts, P, opts);
      write_predictions_csv(preds, fs::path(cls.out));
      if (!cls.projected_out.empty()) {
        save_embedding_set(P ? apply_projection(*P, images, !cls.raw_scores) : images, cls.projected_out);
      }
      out << "classified " << preds.predictions.size() << " images into " << preds.num_classes << " classes; wrote "
          << cls.out << "\n";
      return kOk;
    }

    if (command == "eval") {
      require(ev.preds, "--preds");
      require(ev.out, "--out");
      print_resolved(command, {{"preds", ev.preds}, {"baseline", ev.baseline}, {"out", ev.out}}, out);
      const auto preds = read_predictions_csv(ev.preds);
      std::optional<GroupMetrics> baseline;
      if (!ev.baseline.empty()) baseline = metrics_from_json(read_json_file(ev.baseline));
      const auto metrics = group_metrics(preds, baseline);
      std::ofstream f(ev.out, std::ios::trunc);
      if (!f) throw DataError("cannot write '" + ev.out + "'");
      f << metrics_to_json(metrics).dump(2) << "\n";
      print_metrics_table(metrics, out);
      return kOk;
    }

    if (command == "sweep") {
      if (sweep.param != "margin" && sweep.param != "n_descriptions") {
        throw UsageError("--param must be margin or n_descriptions");
      }
      require(sweep.values, "--values");
      require(sweep.out, "--out");
      sweep.config.pairing = parse_pairing(sweep.pairing);
      const auto values = parse_values(sweep.values);
      auto resolved = train_config_json(sweep.config);
      resolved["param"] = sweep.param;
      resolved["values"] = values;
      resolved["bundle"] = sweep.bundle;
      resolved["synth_seed"] = sweep.synth_seed;
      resolved["out"] = sweep.out;
      print_resolved(command, resolved, out);

      SynthBundle bundle;
      if (sweep.bundle.empty()) {
        SynthConfig sc;
        sc.seed = sweep.synth_seed;
        bundle = generate(sc);
      } else {
        bundle = load_bundle(sweep.bundle);
      }
      const auto vanilla = evaluate_projection(bundle, std::nullopt, threads);

      std::ofstream f(sweep.out, std::ios::trunc);
      if (!f) throw DataError("cannot write '" + sweep.out + "'");
      f << "param,value,worst_group,accuracy,gap,delta_wg,delta_acc,final_loss,steps\n" << std::setprecision(10);
      out << sweep.param << "  WG  Acc  Gap\n";
      for (double v : values) {
        TrainConfig tc = sweep.config;
        EmbeddingSet descriptions = bundle.descriptions;
        if (sweep.param == "margin") {
          tc.margin = v;
        } else {
          const double rounded = std::round(v);
          if (std::abs(v - rounded) > 1e-9) throw UsageError("n_descriptions values must be integers");
          descriptions = first_templates(bundle.descriptions, static_cast<int>(rounded));
        }
        const auto report = train_projection(descriptions, tc);
        const auto m = group_metrics(classify(bundle.images, bundle.class_prompts, report.final_projection,
                                              ClassifyOptions{true, threads}),
                                     vanilla);
        f << sweep.param << ',' << v << ',' << m.worst_group << ',' << m.accuracy << ',' << m.gap << ','
          << *m.delta_wg << ',' << *m.delta_acc << ',' << report.loss_history.back().loss.total << ','
          << report.steps << '\n';
        out << v << "  " << percent(m.worst_group) << "  " << percent(m.accuracy) << "  " << percent(m.gap) << "\n";
      }
      return kOk;
    }

    if (command == "validate") {
      require(val.set, "--set");
      print_resolved(command, {{"set", val.set}}, out);
      const fs::path path(val.set);
      bool is_projection = fs::is_directory(path) && fs::exists(path / kProjectionManifest);
      if (!fs::is_directory(path) && fs::is_regular_file(path) && path.extension() != ".csv") {
        const auto members = ::prism::detail::read_zip(::prism::detail::read_file(path));
        is_projection = members.contains(kProjectionManifest);
      }
      if (is_projection) {
        const auto P = load_projection(path);
        out << "valid PRISMP projection, dim " << P.dim() << "\n";
        return kOk;
      }
      const auto set = load_embedding_set(path);
      double worst = 0.0;
      for (std::size_t i = 0; i < set.size(); ++i) worst = std::max(worst, std::abs(set.vector(i).norm() - 1.0));
      out << "valid EMBF set: kind " << to_string(set.kind()) << ", dim " << set.dim() << ", " << set.size()
          << " records, " << set.num_classes() << " classes, " << set.num_attributes()
          << " attributes; max |norm - 1| = " << worst << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}

}  // namespace prism::cli
