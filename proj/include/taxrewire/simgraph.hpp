#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "taxrewire/corpus.hpp"
#include "taxrewire/errors.hpp"
#include "taxrewire/taxonomy.hpp"

namespace taxrewire {

/// Similarity of two leaf classes, a < b.
struct PairScore {
    NodeId a;
    NodeId b;
    double score;

    bool operator==(const PairScore&) const = default;
};

/// Score descending, then (a, b) ascending.
bool pair_order(const PairScore& x, const PairScore& y);

/// Pairs kept for rewiring, in pair_order. Every stored score is >= tau.
class SimilarPairSet {
public:
    SimilarPairSet() = default;
    SimilarPairSet(std::vector<PairScore> pairs, double tau);

    const std::vector<PairScore>& pairs() const noexcept { return pairs_; }
    double tau() const noexcept { return tau_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }

    /// Unordered membership test.
    bool contains(NodeId x, NodeId y) const;

private:
    std::vector<PairScore> pairs_;
    double tau_ = 1.0;
    std::set<std::pair<NodeId, NodeId>> index_;
};

struct CentroidSet {
    std::map<NodeId, SparseVector> centroids;
    /// Requested leaves without a single instance.
    std::vector<NodeId> missing;
};

/// Mean instance vector of every requested leaf class.
CentroidSet class_centroids(const Dataset& d, const std::vector<NodeId>& leaves, Diagnostics* diag = nullptr);

/// u.v / (|u| |v|), or 0 when either vector is zero.
double cosine(const SparseVector& u, const SparseVector& v);

/// Scores every class pair, split over `workers` threads. The result is
/// sorted by pair_order and does not depend on the worker count.
std::vector<PairScore> all_pairs_scores(const std::map<NodeId, SparseVector>& centroids, unsigned workers = 1);

struct TauThreshold {
    double tau;
};
struct TopK {
    std::size_t k;
};
using PairSelection = std::variant<TauThreshold, TopK>;

/// Tau mode keeps scores strictly above tau. Top-k keeps the first k pairs
/// and sets tau to the k-th score.
SimilarPairSet select_pairs(const std::vector<PairScore>& sorted_scores, const PairSelection& mode,
                            Diagnostics* diag = nullptr);

/// Drops stored pairs below the set's own tau.
SimilarPairSet filter_at_tau(const SimilarPairSet& set);

struct Knee {
    /// 1-based rank in the sorted curve.
    std::size_t rank = 1;
    double score = 0.0;
    bool found = false;
};

/// Knee of the rank/score curve: the point farthest from the chord joining
/// the first and last points. Curves with no point off the chord report
/// `found = false` and the top score.
Knee auto_threshold(const std::vector<PairScore>& sorted_scores, Diagnostics* diag = nullptr);

/// "rank,class_a,class_b,score" with a header row.
std::string similarity_curve_csv(const std::vector<PairScore>& sorted_scores);

/// "a b score" lines.
std::string serialize_pair_set(const SimilarPairSet& set);
/// Reads "a b score" lines. Tau is taken from an optional "# tau <value>"
/// line, otherwise the lowest score.
SimilarPairSet parse_pair_set(std::string_view text);

} // namespace taxrewire
