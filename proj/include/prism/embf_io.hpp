#pragma once

// EMBF v1 reader/writer.
//
// Layout: a directory (or zip archive) holding
//   manifest.json  {format:"EMBF", version:1, dim, count, dtype:"f32le", kind,
//                   class_vocab, attribute_vocab, records:[{id, class_label?,
//                   attribute_label?, template_id?, text?}]}
//   payload.bin    count * dim little-endian f32, row-major in record order.

#include <prism/detail/container.hpp>
#include <prism/embedding_set.hpp>

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace prism {

inline constexpr const char* kEmbfManifest = "manifest.json";
inline constexpr const char* kEmbfPayload = "payload.bin";

namespace detail {

inline nlohmann::ordered_json embf_manifest(const EmbeddingSet& set) {
  nlohmann::ordered_json m;
  m["format"] = "EMBF";
  m["version"] = 1;
  m["dim"] = set.dim();
  m["count"] = set.size();
  m["dtype"] = "f32le";
  m["kind"] = std::string(to_string(set.kind()));
  m["class_vocab"] = set.class_vocab();
  m["attribute_vocab"] = set.attribute_vocab();
  auto records = nlohmann::ordered_json::array();
  for (const auto& rec : set.records()) {
    nlohmann::ordered_json r;
    r["id"] = rec.id;
    if (rec.class_label) r["class_label"] = *rec.class_label;
    if (rec.attribute_label) r["attribute_label"] = *rec.attribute_label;
    if (rec.template_id) r["template_id"] = *rec.template_id;
    if (rec.text) r["text"] = *rec.text;
    records.push_back(std::move(r));
  }
  m["records"] = std::move(records);
  return m;
}

inline EmbeddingSet parse_embf(const Bytes& manifest_bytes, const Bytes& payload_bytes) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(to_string(manifest_bytes));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }

  std::vector<EmbeddingRecord> records;
  std::vector<std::string> class_vocab;
  std::vector<std::string> attribute_vocab;
  long long dim = 0;
  long long count = 0;
  SetKind kind{};
  try {
    if (m.at("format").get<std::string>() != "EMBF") throw DataError("malformed manifest: format is not EMBF");
    if (m.at("version").get<int>() != 1) throw DataError("malformed manifest: unsupported version");
    if (m.at("dtype").get<std::string>() != "f32le") throw DataError("malformed manifest: dtype must be f32le");
    dim = m.at("dim").get<long long>();
    count = m.at("count").get<long long>();
    if (dim <= 0) throw DataError("malformed manifest: dim must be positive");
    if (count < 0) throw DataError("malformed manifest: negative count");
    kind = parse_set_kind(m.at("kind").get<std::string>());
    class_vocab = m.value("class_vocab", std::vector<std::string>{});
    attribute_vocab = m.value("attribute_vocab", std::vector<std::string>{});
    const auto& recs = m.at("records");
    if (!recs.is_array() || static_cast<long long>(recs.size()) != count) {
      throw DataError("malformed manifest: records array length differs from count");
    }
    records.reserve(recs.size());
    for (const auto& r : recs) {
      EmbeddingRecord rec;
      rec.id = r.at("id").get<std::string>();
      if (r.contains("class_label")) rec.class_label = r.at("class_label").get<int>();
      if (r.contains("attribute_label")) rec.attribute_label = r.at("attribute_label").get<int>();
      if (r.contains("template_id")) rec.template_id = r.at("template_id").get<std::string>();
      if (r.contains("text")) rec.text = r.at("text").get<std::string>();
      records.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }

  const auto expected = static_cast<std::size_t>(count) * static_cast<std::size_t>(dim) * 4u;
  if (payload_bytes.size() != expected) {
    throw DataError("payload length mismatch: expected " + std::to_string(expected) + " bytes, found " +
                    std::to_string(payload_bytes.size()));
  }
  const auto values = decode_f32le(payload_bytes);
  RowMatrix vectors(count, dim);
  std::copy(values.begin(), values.end(), vectors.data());
  return EmbeddingSet(kind, dim, std::move(records), std::move(vectors), std::move(class_vocab),
                      std::move(attribute_vocab));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool all_indices(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    if (c.empty()) continue;
    int v = 0;
    auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
    if (ec != std::errc{} || p != c.data() + c.size() || v < 0) return false;
  }
  return true;
}

// Maps a label column to indices plus vocabulary. Purely numeric columns are
// taken as indices; otherwise vocabulary is first-appearance order.
inline std::vector<std::optional<int>> index_labels(const std::vector<std::string>& cells,
                                                    std::vector<std::string>& vocab) {
  std::vector<std::optional<int>> out(cells.size());
  if (all_indices(cells)) {
    int max_label = -1;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].empty()) continue;
      out[i] = std::stoi(cells[i]);
      max_label = std::max(max_label, *out[i]);
    }
    for (int k = 0; k <= max_label; ++k) vocab.push_back(std::to_string(k));
    return out;
  }
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].empty()) continue;
    auto [it, inserted] = seen.emplace(cells[i], static_cast<int>(vocab.size()));
    if (inserted) vocab.push_back(cells[i]);
    out[i] = it->second;
  }
  return out;
}

}  // namespace detail

/// Reads and validates an EMBF container (directory or zip). A `.csv` path is
/// routed to import_embedding_csv.
inline EmbeddingSet import_embedding_csv(const std::filesystem::path& path);

inline EmbeddingSet load_embedding_set(const std::filesystem::path& path) {
  if (path.extension() == ".csv" && std::filesystem::is_regular_file(path)) return import_embedding_csv(path);
  auto members = detail::read_container(path, {kEmbfManifest, kEmbfPayload});
  try {
    return detail::parse_embf(members.at(kEmbfManifest), members.at(kEmbfPayload));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

/// Writes `set` as EMBF. Paths ending in `.zip` produce an archive, anything
/// else a directory.
inline void save_embedding_set(const EmbeddingSet& set, const std::filesystem::path& path) {
  const auto manifest = detail::embf_manifest(set).dump(2) + "\n";
  const auto& v = set.vectors();
  auto payload = detail::encode_f32le(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
  detail::write_container(path, {{kEmbfManifest, detail::to_bytes(manifest)}, {kEmbfPayload, std::move(payload)}});
}

/// Hand-written fixture import. Header: id,class,attribute,template,v0..v{d-1}.
/// Empty cells mean "absent". Kind is inferred: template on every row gives
/// scene_description, otherwise both labels give image, class only gives
/// class_prompt, attribute only gives attribute.
inline EmbeddingSet import_embedding_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty CSV");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 5 || header[0] != "id" || header[1] != "class" || header[2] != "attribute" ||
      header[3] != "template") {
    throw DataError(path.string() + ": CSV header must be id,class,attribute,template,v0..");
  }
  const auto dim = static_cast<Eigen::Index>(header.size() - 4);

  std::vector<std::string> ids, classes, attrs, templates;
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    }
    ids.push_back(cells[0]);
    classes.push_back(cells[1]);
    attrs.push_back(cells[2]);
    templates.push_back(cells[3]);
    for (std::size_t c = 4; c < cells.size(); ++c) {
      try {
        values.push_back(std::stod(cells[c]));
      } catch (const std::exception&) {
        throw DataError(path.string() + ": record '" + cells[0] + "' has a non-numeric component " +
                        std::to_string(c - 4));
      }
    }
  }

  std::vector<std::string> class_vocab, attribute_vocab;
  const auto class_idx = detail::index_labels(classes, class_vocab);
  const auto attr_idx = detail::index_labels(attrs, attribute_vocab);

  bool all_template = !ids.empty(), all_class = true, all_attr = true, any_class = false, any_attr = false;
  std::vector<EmbeddingRecord> records(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    records[i].id = ids[i];
    records[i].class_label = class_idx[i];
    records[i].attribute_label = attr_idx[i];
    if (!templates[i].empty()) records[i].template_id = templates[i];
    all_template = all_template && !templates[i].empty();
    all_class = all_class && class_idx[i].has_value();
    all_attr = all_attr && attr_idx[i].has_value();
    any_class = any_class || class_idx[i].has_value();
    any_attr = any_attr || attr_idx[i].has_value();
  }
  SetKind kind = SetKind::image;
  if (all_template) kind = SetKind::scene_description;
  else if (all_class && !any_attr && any_class) kind = SetKind::class_prompt;
  else if (all_attr && !any_class && any_attr) kind = SetKind::attribute;

  RowMatrix vectors(static_cast<Eigen::Index>(ids.size()), dim);
  std::copy(values.begin(), values.end(), vectors.data());
  try {
    return EmbeddingSet(kind, dim, std::move(records), std::move(vectors), std::move(class_vocab),
                        std::move(attribute_vocab));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace prism
