#pragma once

#include <prism/error.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace prism {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class SetKind { class_prompt, scene_description, image, attribute };

inline std::string_view to_string(SetKind kind) {
  switch (kind) {
    case SetKind::class_prompt: return "class_prompt";
    case SetKind::scene_description: return "scene_description";
    case SetKind::image: return "image";
    case SetKind::attribute: return "attribute";
  }
  return "unknown";
}

inline SetKind parse_set_kind(std::string_view name) {
  if (name == "class_prompt") return SetKind::class_prompt;
  if (name == "scene_description") return SetKind::scene_description;
  if (name == "image") return SetKind::image;
  if (name == "attribute") return SetKind::attribute;
  throw DataError("unknown set kind '" + std::string(name) + "'");
}

/// Group identity g = (attribute, class).
struct GroupLabel {
  int attribute = 0;
  int cls = 0;

  friend auto operator<=>(const GroupLabel&, const GroupLabel&) = default;
};

/// Annotations of one embedding; the vector itself lives in the owning set's
/// row-major matrix.
struct EmbeddingRecord {
  std::string id;
  std::optional<int> class_label;
  std::optional<int> attribute_label;
  std::optional<std::string> template_id;
  std::optional<std::string> text;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

/// A dim-consistent, validated collection of annotated embedding vectors.
///
/// Vectors are held in f64; row i of vectors() belongs to records()[i].
/// Instances are immutable: transformations return new sets.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  EmbeddingSet(SetKind kind, Eigen::Index dim, std::vector<EmbeddingRecord> records, RowMatrix vectors,
               std::vector<std::string> class_vocab = {}, std::vector<std::string> attribute_vocab = {})
      : kind_(kind),
        dim_(dim),
        records_(std::move(records)),
        vectors_(std::move(vectors)),
        class_vocab_(std::move(class_vocab)),
        attribute_vocab_(std::move(attribute_vocab)) {
    validate();
  }

  SetKind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const std::vector<EmbeddingRecord>& records() const { return records_; }
  const EmbeddingRecord& record(std::size_t i) const { return records_.at(i); }
  const RowMatrix& vectors() const { return vectors_; }
  auto vector(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)); }

  const std::vector<std::string>& class_vocab() const { return class_vocab_; }
  const std::vector<std::string>& attribute_vocab() const { return attribute_vocab_; }
  int num_classes() const { return static_cast<int>(class_vocab_.size()); }
  int num_attributes() const { return static_cast<int>(attribute_vocab_.size()); }

  /// Same annotations, new vectors (re-validated).
  EmbeddingSet with_vectors(RowMatrix vectors) const {
    return EmbeddingSet(kind_, dim_, records_, std::move(vectors), class_vocab_, attribute_vocab_);
  }

  /// Subset in the given order.
  EmbeddingSet select(const std::vector<std::size_t>& rows) const {
    std::vector<EmbeddingRecord> recs;
    recs.reserve(rows.size());
    RowMatrix vecs(static_cast<Eigen::Index>(rows.size()), dim_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      recs.push_back(records_.at(rows[r]));
      vecs.row(static_cast<Eigen::Index>(r)) = vectors_.row(static_cast<Eigen::Index>(rows[r]));
    }
    return EmbeddingSet(kind_, dim_, std::move(recs), std::move(vecs), class_vocab_, attribute_vocab_);
  }

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
    return a.kind_ == b.kind_ && a.dim_ == b.dim_ && a.records_ == b.records_ &&
           a.class_vocab_ == b.class_vocab_ && a.attribute_vocab_ == b.attribute_vocab_ &&
           a.vectors_.rows() == b.vectors_.rows() && a.vectors_.cols() == b.vectors_.cols() &&
           a.vectors_ == b.vectors_;
  }

 private:
  void validate() const {
    if (dim_ <= 0) throw DataError("embedding set dim must be positive");
    if (vectors_.rows() != static_cast<Eigen::Index>(records_.size()) ||
        (vectors_.rows() > 0 && vectors_.cols() != dim_)) {
      throw DataError("vector matrix shape does not match record count x dim");
    }
    std::unordered_set<std::string_view> ids;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& rec = records_[i];
      if (!ids.insert(rec.id).second) throw DataError("duplicate record id '" + rec.id + "'");
      for (Eigen::Index c = 0; c < dim_; ++c) {
        if (!std::isfinite(vectors_(static_cast<Eigen::Index>(i), c))) {
          throw DataError("non-finite value in record '" + rec.id + "' at component " + std::to_string(c));
        }
      }
      if (rec.class_label && (*rec.class_label < 0 || *rec.class_label >= num_classes())) {
        throw DataError("record '" + rec.id + "': class_label out of vocabulary range");
      }
      if (rec.attribute_label && (*rec.attribute_label < 0 || *rec.attribute_label >= num_attributes())) {
        throw DataError("record '" + rec.id + "': attribute_label out of vocabulary range");
      }
      if (kind_ == SetKind::scene_description && (!rec.class_label || !rec.attribute_label)) {
        throw DataError("scene_description record '" + rec.id + "' needs class_label and attribute_label");
      }
      if (kind_ == SetKind::class_prompt && (!rec.class_label || rec.attribute_label)) {
        throw DataError("class_prompt record '" + rec.id + "' needs class_label and no attribute_label");
      }
    }
  }

  SetKind kind_ = SetKind::image;
  Eigen::Index dim_ = 1;
  std::vector<EmbeddingRecord> records_;
  RowMatrix vectors_;
  std::vector<std::string> class_vocab_;
  std::vector<std::string> attribute_vocab_;
};

/// Rescales every vector to unit Euclidean norm.
inline EmbeddingSet normalize(const EmbeddingSet& set) {
  RowMatrix out = set.vectors();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double n = out.row(i).norm();
    if (!(n > 1e-12)) {
      throw DataError("cannot normalize zero-norm vector of record '" +
                      set.record(static_cast<std::size_t>(i)).id + "'");
    }
    out.row(i) /= n;
  }
  return set.with_vectors(std::move(out));
}

using GroupPartition = std::map<GroupLabel, std::vector<std::size_t>>;

/// Buckets record indices by (attribute, class), indices ascending per bucket.
inline GroupPartition partition_by_group(const EmbeddingSet& set) {
  GroupPartition groups;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& rec = set.record(i);
    if (!rec.class_label || !rec.attribute_label) {
      throw DataError("record '" + rec.id + "' lacks a class or attribute label");
    }
    groups[GroupLabel{*rec.attribute_label, *rec.class_label}].push_back(i);
  }
  return groups;
}

}  // namespace prism
