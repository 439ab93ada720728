#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "taxrewire/taxonomy.hpp"

namespace taxrewire {

using FeatureIndex = std::uint32_t;

struct Feature {
    FeatureIndex index;
    double value;

    bool operator==(const Feature&) const = default;
};

/// Sparse feature vector. Indices are positive and strictly increasing, and
/// no stored value is zero.
class SparseVector {
public:
    SparseVector() = default;
    /// Validates ordering; zero values are dropped.
    explicit SparseVector(std::vector<Feature> entries);
    SparseVector(std::initializer_list<Feature> entries) : SparseVector(std::vector<Feature>(entries)) {}

    std::span<const Feature> entries() const noexcept { return entries_; }
    std::size_t nnz() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    FeatureIndex max_index() const noexcept { return entries_.empty() ? 0 : entries_.back().index; }

    double squared_norm() const;
    double norm() const;
    /// Dot product with a dense vector indexed by feature index; indices past
    /// the end of `dense` contribute nothing.
    double dot(std::span<const double> dense) const;

    bool operator==(const SparseVector&) const = default;

private:
    std::vector<Feature> entries_;
};

double dot(const SparseVector& u, const SparseVector& v);

struct Instance {
    SparseVector features;
    NodeId label;
};

struct Dataset {
    std::vector<Instance> instances;
    /// Largest feature index seen.
    FeatureIndex dimensionality = 0;

    std::size_t size() const noexcept { return instances.size(); }
    bool empty() const noexcept { return instances.empty(); }
    void add(Instance inst);
};

/// SVMlight-style lines: "label idx:val idx:val ...". Blank lines are
/// skipped and '#' starts a comment.
Dataset parse_dataset(std::string_view text);
std::string serialize_dataset(const Dataset& d);

/// Instance count per label.
std::vector<std::pair<NodeId, std::size_t>> label_histogram(const Dataset& d);

/// Inverse document frequencies fitted on a training corpus.
class TfidfModel {
public:
    TfidfModel() = default;
    TfidfModel(std::vector<double> idf, std::size_t documents) : idf_(std::move(idf)), documents_(documents) {}

    /// idf_j = ln(N / df_j) over the given corpus.
    static TfidfModel fit(const Dataset& d);

    /// tf * idf followed by l2 normalization. Features unseen during fitting
    /// or with zero idf are dropped.
    SparseVector transform(const SparseVector& tf) const;
    Dataset transform(const Dataset& d) const;

    std::span<const double> idf() const noexcept { return idf_; }
    std::size_t documents() const noexcept { return documents_; }

private:
    std::vector<double> idf_;
    std::size_t documents_ = 0;
};

/// Fits idf on `d` and transforms it.
Dataset tfidf_normalize(const Dataset& d);

/// Scales a vector to unit l2 norm; empty vectors are returned unchanged.
SparseVector l2_normalize(const SparseVector& v);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// Index form of split_train_validation, for carrying per-instance side data
/// (such as costs) through the same partition.
SplitIndices split_indices(std::size_t n, double ratio, std::uint64_t seed);

/// Seeded shuffle, then the first ceil(ratio * N) instances form the
/// training part.
std::pair<Dataset, Dataset> split_train_validation(const Dataset& d, double ratio, std::uint64_t seed);

} // namespace taxrewire
