#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "taxrewire/corpus.hpp"
#include "taxrewire/metrics.hpp"
#include "taxrewire/random.hpp"
#include "taxrewire/simgraph.hpp"
#include "taxrewire/taxonomy.hpp"

namespace taxrewire::synth {

/// Balanced tree of the given fanout and depth. Ids are assigned breadth
/// first from 0 (the root), so leaves carry the largest ids.
Taxonomy balanced_tree(std::size_t fanout, std::size_t depth);

/// Random tree with `n_nodes` nodes and scattered ids; every new node hangs
/// under a uniformly chosen existing node.
Taxonomy random_tree(std::size_t n_nodes, Rng& rng);

/// Random similar-pair set over the leaves of `h`: each leaf pair is kept
/// with probability `density` and gets a uniform score in (0, 1).
SimilarPairSet random_pair_set(const Taxonomy& h, double density, Rng& rng);

struct DataConfig {
    std::size_t dims = 200;
    std::size_t instances_min = 30;
    std::size_t instances_max = 30;
    /// Half-width of the uniform per-coordinate noise.
    double noise = 0.1;
    /// Weight of a leaf's own direction in its centroid (the parent's is 1).
    /// Smaller values make siblings harder to tell apart.
    double leaf_weight = 0.6;
};

/// Samples instances for every leaf of `h`. Each node owns a random
/// non-negative unit direction; a leaf centroid mixes the directions along
/// its root path, so classes that share more ancestors are more similar.
/// Instances are centroid + uniform noise in [-noise, noise] per coordinate.
Dataset sample_hierarchical_data(const Taxonomy& h, const DataConfig& cfg, Rng& rng);

struct PlantConfig {
    /// Internal nodes excluding the root; 0 derives it from the shape.
    std::size_t n_internal = 0;
    /// Must be a power of `fanout`.
    std::size_t n_leaves = 27;
    std::size_t fanout = 3;
    std::size_t dims = 200;
    std::size_t instances_per_leaf = 30;
    /// When larger than instances_per_leaf, per-class counts are drawn from
    /// [instances_per_leaf, instances_max] for rare-class scenarios.
    std::size_t instances_max = 0;
    std::size_t n_misplaced = 2;
    double noise = 0.1;
    double leaf_weight = 0.6;
    std::uint64_t seed = 1;
};

struct PlantedData {
    Taxonomy truth;
    Taxonomy corrupted;
    Dataset data;
    /// Leaves moved to a wrong parent in `corrupted`.
    std::vector<NodeId> misplaced;
};

/// Builds the true hierarchy, samples data whose cosine structure follows
/// it, then moves `n_misplaced` leaves under wrong parents.
PlantedData gen_planted(const PlantConfig& cfg);

/// Leaf partition by parent: one sorted group per internal node.
std::vector<std::vector<NodeId>> sibling_groups(const Taxonomy& h);

/// Brute force: materializes both root paths and returns the first node of
/// a's path that also lies on b's.
NodeId oracle_lca(const Taxonomy& h, NodeId a, NodeId b);

/// Brute force: explicit ancestor sets (label included, root excluded).
double oracle_hier_f1(std::span<const EvalPair> pairs, const Taxonomy& h);

} // namespace taxrewire::synth
