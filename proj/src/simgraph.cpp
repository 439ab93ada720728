#include "taxrewire/simgraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "taxrewire/text.hpp"

namespace taxrewire {

bool pair_order(const PairScore& x, const PairScore& y)
{
    if (x.score != y.score) return x.score > y.score;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
}

SimilarPairSet::SimilarPairSet(std::vector<PairScore> pairs, double tau) : pairs_(std::move(pairs)), tau_(tau)
{
    for (const auto& p : pairs_) index_.emplace(std::min(p.a, p.b), std::max(p.a, p.b));
}

bool SimilarPairSet::contains(NodeId x, NodeId y) const { return index_.count({std::min(x, y), std::max(x, y)}) != 0; }

CentroidSet class_centroids(const Dataset& d, const std::vector<NodeId>& leaves, Diagnostics* diag)
{
    std::map<NodeId, std::vector<const SparseVector*>> members;
    for (NodeId leaf : leaves) members[leaf];
    for (const auto& inst : d.instances) {
        auto it = members.find(inst.label);
        if (it != members.end()) it->second.push_back(&inst.features);
    }

    CentroidSet out;
    std::vector<double> acc(static_cast<std::size_t>(d.dimensionality) + 1, 0.0);
    std::vector<FeatureIndex> touched;
    for (const auto& [leaf, vecs] : members) {
        if (vecs.empty()) {
            out.missing.push_back(leaf);
            warn(diag, "class " + std::to_string(leaf) + " has no instances; excluded from pairing");
            continue;
        }
        for (const auto* v : vecs)
            for (const auto& f : v->entries()) {
                if (acc[f.index] == 0.0) touched.push_back(f.index);
                acc[f.index] += f.value;
            }
        std::sort(touched.begin(), touched.end());
        touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
        const auto n = static_cast<double>(vecs.size());
        std::vector<Feature> entries;
        entries.reserve(touched.size());
        for (FeatureIndex j : touched) {
            entries.push_back({j, acc[j] / n});
            acc[j] = 0.0;
        }
        touched.clear();
        out.centroids.emplace(leaf, SparseVector(std::move(entries)));
    }
    return out;
}

double cosine(const SparseVector& u, const SparseVector& v)
{
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 0.0;
    const double c = dot(u, v) / (nu * nv);
    return std::clamp(c, -1.0, 1.0);
}

std::vector<PairScore> all_pairs_scores(const std::map<NodeId, SparseVector>& centroids, unsigned workers)
{
    if (centroids.size() < 2) throw DataError("need at least 2 classes to score pairs");
    std::vector<NodeId> ids;
    std::vector<const SparseVector*> vecs;
    for (const auto& [id, v] : centroids) {
        ids.push_back(id);
        vecs.push_back(&v);
    }
    const std::size_t n = ids.size();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));

    // Rows are dealt round-robin so each block has a similar number of pairs.
    std::vector<std::vector<PairScore>> blocks(workers);
    auto score_rows = [&](unsigned w) {
        auto& out = blocks[w];
        for (std::size_t i = w; i < n; i += workers)
            for (std::size_t j = i + 1; j < n; ++j) out.push_back({ids[i], ids[j], cosine(*vecs[i], *vecs[j])});
    };
    if (workers == 1) {
        score_rows(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(score_rows, w);
        for (auto& t : pool) t.join();
    }

    std::vector<PairScore> all;
    all.reserve(n * (n - 1) / 2);
    for (auto& b : blocks) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end(), pair_order);
    return all;
}

SimilarPairSet select_pairs(const std::vector<PairScore>& sorted_scores, const PairSelection& mode, Diagnostics* diag)
{
    if (!std::is_sorted(sorted_scores.begin(), sorted_scores.end(), pair_order))
        throw DataError("pair scores must be sorted by descending score");

    if (const auto* t = std::get_if<TauThreshold>(&mode)) {
        if (!(t->tau >= -1.0 && t->tau <= 1.0)) throw ConfigError("tau must lie in [-1, 1]");
        std::vector<PairScore> kept;
        for (const auto& p : sorted_scores) {
            if (!(p.score > t->tau)) break;
            kept.push_back(p);
        }
        return SimilarPairSet(std::move(kept), t->tau);
    }

    std::size_t k = std::get<TopK>(mode).k;
    if (k == 0) throw ConfigError("top-k must be at least 1");
    if (sorted_scores.empty()) throw DataError("no pairs to select from");
    if (k > sorted_scores.size()) {
        warn(diag, "top-k " + std::to_string(k) + " exceeds the " + std::to_string(sorted_scores.size()) +
                       " available pairs; clamped");
        k = sorted_scores.size();
    }
    std::vector<PairScore> kept(sorted_scores.begin(), sorted_scores.begin() + static_cast<std::ptrdiff_t>(k));
    const double tau = kept.back().score;
    return SimilarPairSet(std::move(kept), tau);
}

SimilarPairSet filter_at_tau(const SimilarPairSet& set)
{
    std::vector<PairScore> kept;
    for (const auto& p : set.pairs())
        if (p.score >= set.tau()) kept.push_back(p);
    return SimilarPairSet(std::move(kept), set.tau());
}

Knee auto_threshold(const std::vector<PairScore>& sorted_scores, Diagnostics* diag)
{
    const std::size_t m = sorted_scores.size();
    if (m < 3) throw DataError("need at least 3 pairs to locate a knee");

    const double first = sorted_scores.front().score;
    const double last = sorted_scores.back().score;
    Knee knee{1, first, false};
    if (first == last) {
        warn(diag, "similarity curve is constant; no knee, using the top score");
        return knee;
    }

    // In coordinates scaled to the unit square the chord is y = x, so the
    // perpendicular distance is proportional to |x - y|.
    const double span_x = static_cast<double>(m - 1);
    const double span_y = first - last;
    double best = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const double x = static_cast<double>(r) / span_x;
        const double y = (first - sorted_scores[r].score) / span_y;
        const double dist = std::abs(x - y);
        if (dist > best) {
            best = dist;
            knee.rank = r + 1;
        }
    }
    if (best <= 1e-9) {
        warn(diag, "similarity curve is linear; no knee, using the top score");
        knee.rank = 1;
        return knee;
    }
    knee.score = sorted_scores[knee.rank - 1].score;
    knee.found = true;
    return knee;
}

std::string similarity_curve_csv(const std::vector<PairScore>& sorted_scores)
{
    std::string out = "rank,class_a,class_b,score\n";
    for (std::size_t r = 0; r < sorted_scores.size(); ++r) {
        const auto& p = sorted_scores[r];
        out += std::to_string(r + 1) + ',' + std::to_string(p.a) + ',' + std::to_string(p.b) + ',' +
               text::format_double(p.score) + '\n';
    }
    return out;
}

std::string serialize_pair_set(const SimilarPairSet& set)
{
    std::string out = "# tau " + text::format_double(set.tau()) + '\n';
    for (const auto& p : set.pairs())
        out += std::to_string(p.a) + ' ' + std::to_string(p.b) + ' ' + text::format_double(p.score) + '\n';
    return out;
}

SimilarPairSet parse_pair_set(std::string_view text_in)
{
    std::vector<PairScore> pairs;
    double tau = std::numeric_limits<double>::quiet_NaN();
    const auto lines = text::split_lines(text_in);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto tok = text::split_ws(line.substr(1));
            if (tok.size() == 2 && tok[0] == "tau" && !text::parse_double(tok[1], tau))
                throw ParseError(i + 1, "invalid tau");
            continue;
        }
        const auto tok = text::split_ws(line);
        std::uint64_t a = 0;
        std::uint64_t b = 0;
        double s = 0.0;
        if (tok.size() != 3 || !text::parse_u64(tok[0], a) || !text::parse_u64(tok[1], b) ||
            !text::parse_double(tok[2], s) || a > std::numeric_limits<NodeId>::max() ||
            b > std::numeric_limits<NodeId>::max() || a == b)
            throw ParseError(i + 1, "expected \"a b score\"");
        pairs.push_back({static_cast<NodeId>(std::min(a, b)), static_cast<NodeId>(std::max(a, b)), s});
    }
    std::sort(pairs.begin(), pairs.end(), pair_order);
    if (std::isnan(tau)) tau = pairs.empty() ? 1.0 : pairs.back().score;
    return SimilarPairSet(std::move(pairs), tau);
}

} // namespace taxrewire
