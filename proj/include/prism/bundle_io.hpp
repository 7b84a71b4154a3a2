#pragma once

// A synthetic bundle on disk: images.embf, class_prompts.embf,
// descriptions.embf, attributes.embf and truth.json in one directory.

#include <prism/embf_io.hpp>
#include <prism/synthetic.hpp>

#include <filesystem>
#include <fstream>

namespace prism {

inline void save_bundle(const SynthBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  save_embedding_set(bundle.images, dir / "images.embf");
  save_embedding_set(bundle.class_prompts, dir / "class_prompts.embf");
  save_embedding_set(bundle.descriptions, dir / "descriptions.embf");
  save_embedding_set(bundle.attributes, dir / "attributes.embf");
  std::ofstream out(dir / "truth.json", std::ios::trunc);
  if (!out) throw DataError("cannot write '" + (dir / "truth.json").string() + "'");
  out << to_json(bundle.truth).dump(2) << '\n';
}

/// Loads a saved bundle. Vectors come back f32-rounded and are renormalized.
inline SynthBundle load_bundle(const std::filesystem::path& dir) {
  SynthBundle b;
  b.images = normalize(load_embedding_set(dir / "images.embf"));
  b.class_prompts = normalize(load_embedding_set(dir / "class_prompts.embf"));
  b.descriptions = normalize(load_embedding_set(dir / "descriptions.embf"));
  b.attributes = normalize(load_embedding_set(dir / "attributes.embf"));
  std::ifstream in(dir / "truth.json");
  if (!in) throw DataError("cannot open '" + (dir / "truth.json").string() + "'");
  try {
    b.truth = truth_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed truth.json: ") + e.what());
  }
  return b;
}

}  // namespace prism
