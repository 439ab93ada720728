#include "taxrewire/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "taxrewire/errors.hpp"

namespace taxrewire::synth {

Taxonomy balanced_tree(std::size_t fanout, std::size_t depth)
{
    if (fanout < 1) throw ConfigError("fanout must be positive");
    Taxonomy t(0);
    std::vector<NodeId> level{0};
    NodeId next = 1;
    for (std::size_t d = 0; d < depth; ++d) {
        std::vector<NodeId> below;
        for (NodeId p : level)
            for (std::size_t k = 0; k < fanout; ++k) {
                t.add_node(next, p);
                below.push_back(next++);
            }
        level = std::move(below);
    }
    return t;
}

Taxonomy random_tree(std::size_t n_nodes, Rng& rng)
{
    if (n_nodes == 0) throw ConfigError("tree needs at least one node");
    std::set<NodeId> used;
    std::vector<NodeId> ids;
    while (ids.size() < n_nodes) {
        const auto id = static_cast<NodeId>(uniform_index(rng, 4 * n_nodes + 8));
        if (used.insert(id).second) ids.push_back(id);
    }
    Taxonomy t(ids[0]);
    for (std::size_t i = 1; i < ids.size(); ++i) t.add_node(ids[i], ids[uniform_index(rng, i)]);
    return t;
}

SimilarPairSet random_pair_set(const Taxonomy& h, double density, Rng& rng)
{
    const auto leaves = h.leaves();
    std::vector<PairScore> pairs;
    for (std::size_t i = 0; i < leaves.size(); ++i)
        for (std::size_t j = i + 1; j < leaves.size(); ++j) {
            if (uniform01(rng) >= density) continue;
            double s = uniform01(rng);
            while (s == 0.0) s = uniform01(rng);
            pairs.push_back({leaves[i], leaves[j], s});
        }
    std::sort(pairs.begin(), pairs.end(), pair_order);
    const double tau = pairs.empty() ? 1.0 : pairs.back().score;
    return SimilarPairSet(std::move(pairs), tau);
}

namespace {

std::vector<double> random_direction(std::size_t dims, std::size_t support, Rng& rng)
{
    std::vector<double> u(dims + 1, 0.0);
    std::vector<std::size_t> slots(dims);
    for (std::size_t j = 0; j < dims; ++j) slots[j] = j + 1;
    shuffle(slots, rng);
    double norm = 0.0;
    for (std::size_t k = 0; k < support; ++k) {
        const double v = uniform(rng, 0.5, 1.0);
        u[slots[k]] = v;
        norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : u) v /= norm;
    return u;
}

/// Mixing weight of the direction owned by the ancestor at `depth` for a
/// leaf at `leaf_depth`. The parent dominates, so siblings are the closest
/// classes; the leaf's own direction keeps classes apart.
double level_weight(std::size_t depth, std::size_t leaf_depth, double leaf_weight)
{
    if (depth == leaf_depth) return leaf_weight;
    if (depth + 1 == leaf_depth) return 1.0;
    return 0.4;
}

double mean_cosine(const std::vector<std::pair<NodeId, NodeId>>& pairs, const std::map<NodeId, SparseVector>& c)
{
    if (pairs.empty()) return 0.0;
    double s = 0.0;
    for (const auto& [a, b] : pairs) s += cosine(c.at(a), c.at(b));
    return s / static_cast<double>(pairs.size());
}

} // namespace

Dataset sample_hierarchical_data(const Taxonomy& h, const DataConfig& cfg, Rng& rng)
{
    if (cfg.dims < 2) throw ConfigError("dims must be at least 2");
    if (cfg.instances_min == 0 || cfg.instances_max < cfg.instances_min)
        throw ConfigError("invalid per-class instance range");
    if (!(cfg.noise >= 0.0 && cfg.noise < 1.0)) throw ConfigError("noise must lie in [0, 1)");
    if (!(cfg.leaf_weight > 0.0)) throw ConfigError("leaf_weight must be positive");

    const std::size_t support = std::max<std::size_t>(3, cfg.dims / 32);
    std::map<NodeId, std::vector<double>> direction;
    for (NodeId n : h.non_root_nodes()) direction[n] = random_direction(cfg.dims, std::min(support, cfg.dims), rng);

    Dataset d;
    for (NodeId leaf : h.leaves()) {
        if (leaf == h.root()) continue;
        const auto path = h.path_to_root(leaf);
        const std::size_t leaf_depth = path.size() - 1;
        std::vector<double> centroid(cfg.dims + 1, 0.0);
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            const double w = level_weight(leaf_depth - k, leaf_depth, cfg.leaf_weight);
            const auto& u = direction[path[k]];
            for (std::size_t j = 1; j <= cfg.dims; ++j) centroid[j] += w * u[j];
        }
        double norm = 0.0;
        for (double v : centroid) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : centroid) v /= norm;

        const std::size_t count =
            cfg.instances_min + static_cast<std::size_t>(uniform_index(rng, cfg.instances_max - cfg.instances_min + 1));
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<Feature> feats;
            feats.reserve(cfg.dims);
            for (std::size_t j = 1; j <= cfg.dims; ++j) {
                const double v = cfg.noise == 0.0 ? centroid[j] : centroid[j] + uniform(rng, -cfg.noise, cfg.noise);
                feats.push_back({static_cast<FeatureIndex>(j), v});
            }
            d.add({SparseVector(std::move(feats)), leaf});
        }
    }
    d.dimensionality = static_cast<FeatureIndex>(cfg.dims);
    return d;
}

std::vector<std::vector<NodeId>> sibling_groups(const Taxonomy& h)
{
    std::vector<std::vector<NodeId>> groups;
    for (NodeId n : h.nodes()) {
        std::vector<NodeId> g;
        for (NodeId c : h.children(n))
            if (h.is_leaf(c)) g.push_back(c);
        if (!g.empty()) groups.push_back(std::move(g));
    }
    std::sort(groups.begin(), groups.end());
    return groups;
}

PlantedData gen_planted(const PlantConfig& cfg)
{
    if (cfg.fanout < 2) throw ConfigError("fanout must be at least 2");
    std::size_t depth = 0;
    std::size_t width = 1;
    std::size_t internal = 0;
    while (width < cfg.n_leaves) {
        if (depth > 0) internal += width;
        width *= cfg.fanout;
        ++depth;
    }
    if (width != cfg.n_leaves || depth == 0)
        throw ConfigError("n_leaves must be a positive power of fanout (got " + std::to_string(cfg.n_leaves) +
                          " leaves, fanout " + std::to_string(cfg.fanout) + ")");
    if (cfg.n_internal != 0 && cfg.n_internal != internal)
        throw ConfigError("n_internal " + std::to_string(cfg.n_internal) + " is infeasible; this shape has " +
                          std::to_string(internal));
    if (cfg.n_misplaced >= cfg.n_leaves) throw ConfigError("n_misplaced must be smaller than n_leaves");

    Rng rng(cfg.seed);
    PlantedData out{balanced_tree(cfg.fanout, depth), Taxonomy(0), Dataset{}, {}};

    DataConfig dc;
    dc.dims = cfg.dims;
    dc.instances_min = cfg.instances_per_leaf;
    dc.instances_max = std::max(cfg.instances_per_leaf, cfg.instances_max);
    dc.noise = cfg.noise;
    dc.leaf_weight = cfg.leaf_weight;
    out.data = sample_hierarchical_data(out.truth, dc, rng);

    if (cfg.noise <= 0.1 && depth >= 2) {
        const auto centroids = class_centroids(out.data, out.truth.leaves()).centroids;
        std::vector<std::pair<NodeId, NodeId>> within;
        std::vector<std::pair<NodeId, NodeId>> across;
        const auto leaves = out.truth.leaves();
        for (std::size_t i = 0; i < leaves.size(); ++i)
            for (std::size_t j = i + 1; j < leaves.size(); ++j)
                (out.truth.parent(leaves[i]) == out.truth.parent(leaves[j]) ? within : across)
                    .push_back({leaves[i], leaves[j]});
        if (!(mean_cosine(within, centroids) > mean_cosine(across, centroids)))
            throw std::logic_error("planted data lost its sibling structure");
    }

    // Leaf parents are the candidate wrong destinations.
    std::vector<NodeId> parents;
    for (NodeId n : out.truth.nodes())
        if (!out.truth.is_leaf(n) && out.truth.is_leaf(out.truth.children(n).front())) parents.push_back(n);

    Taxonomy corrupted = out.truth;
    if (cfg.n_misplaced > 0 && parents.size() < 2)
        throw ConfigError("misplacing leaves needs at least two leaf parents");
    std::vector<NodeId> leaves = out.truth.leaves();
    std::set<NodeId> moved;
    std::size_t attempts = 0;
    while (moved.size() < cfg.n_misplaced) {
        if (++attempts > 1000 * (cfg.n_misplaced + 1)) throw ConfigError("could not place the requested misplacements");
        const NodeId leaf = leaves[uniform_index(rng, leaves.size())];
        if (moved.count(leaf) != 0) continue;
        const NodeId from = corrupted.parent(leaf);
        // Every parent keeps at least one leaf.
        if (corrupted.children(from).size() < 2) continue;
        const NodeId true_parent = out.truth.parent(leaf);
        std::vector<NodeId> options;
        for (NodeId p : parents)
            if (p != true_parent) options.push_back(p);
        const NodeId to = options[uniform_index(rng, options.size())];
        corrupted.reparent(leaf, to);
        moved.insert(leaf);
        out.misplaced.push_back(leaf);
    }
    std::sort(out.misplaced.begin(), out.misplaced.end());
    out.corrupted = std::move(corrupted);
    return out;
}

NodeId oracle_lca(const Taxonomy& h, NodeId a, NodeId b)
{
    std::vector<NodeId> pa{a};
    while (!h.is_root(pa.back())) pa.push_back(h.parent(pa.back()));
    std::vector<NodeId> pb{b};
    while (!h.is_root(pb.back())) pb.push_back(h.parent(pb.back()));
    for (NodeId x : pa)
        if (std::find(pb.begin(), pb.end(), x) != pb.end()) return x;
    return h.root();
}

double oracle_hier_f1(std::span<const EvalPair> pairs, const Taxonomy& h)
{
    auto ancestors = [&](NodeId n) {
        std::set<NodeId> s;
        for (NodeId cur = n; !h.is_root(cur); cur = h.parent(cur)) s.insert(cur);
        return s;
    };
    std::size_t inter = 0;
    std::size_t pred_total = 0;
    std::size_t truth_total = 0;
    for (const auto& p : pairs) {
        const auto ap = ancestors(p.predicted);
        const auto at = ancestors(p.truth);
        std::vector<NodeId> common;
        std::set_intersection(ap.begin(), ap.end(), at.begin(), at.end(), std::back_inserter(common));
        inter += common.size();
        pred_total += ap.size();
        truth_total += at.size();
    }
    if (pred_total == 0 || truth_total == 0) return 0.0;
    const double hp = static_cast<double>(inter) / static_cast<double>(pred_total);
    const double hr = static_cast<double>(inter) / static_cast<double>(truth_total);
    if (hp + hr == 0.0) return 0.0;
    return 2.0 * hp * hr / (hp + hr);
}

} // namespace taxrewire::synth
