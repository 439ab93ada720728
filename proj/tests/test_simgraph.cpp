#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "taxrewire/errors.hpp"
#include "taxrewire/random.hpp"
#include "taxrewire/simgraph.hpp"

using namespace taxrewire;

namespace {

std::vector<PairScore> curve(const std::vector<double>& scores)
{
    std::vector<PairScore> out;
    NodeId a = 1;
    for (double s : scores) {
        out.push_back({a, static_cast<NodeId>(a + 1000), s});
        ++a;
    }
    return out;
}

/// Rank (1-based) of the largest vertical gap to the chord; perpendicular
/// distance is proportional to it.
std::size_t brute_force_knee(const std::vector<double>& s)
{
    const double m = static_cast<double>(s.size());
    std::size_t best = 1;
    double best_d = 0.0;
    for (std::size_t r = 1; r <= s.size(); ++r) {
        const double chord = s.front() + (s.back() - s.front()) * (static_cast<double>(r) - 1.0) / (m - 1.0);
        const double d = std::abs(s[r - 1] - chord);
        if (d > best_d) {
            best_d = d;
            best = r;
        }
    }
    return best;
}

SparseVector random_sparse(Rng& rng, bool nonneg)
{
    std::vector<Feature> f;
    for (FeatureIndex j = 1; j <= 20; ++j)
        if (uniform01(rng) < 0.4) f.push_back({j, nonneg ? uniform(rng, 0.0, 2.0) : uniform(rng, -1.0, 1.0)});
    return SparseVector(std::move(f));
}

} // namespace

TEST_SUITE("simgraph")
{
    TEST_CASE("centroids")
    {
        Dataset d;
        d.add({SparseVector{{1, 1.0}}, 5});
        d.add({SparseVector{{2, 1.0}}, 5});
        d.add({SparseVector{{3, 2.0}}, 6});
        d.add({SparseVector{{3, 2.0}}, 6});
        d.add({SparseVector{{4, 1.0}}, 7});
        Diagnostics diag;
        const auto c = class_centroids(d, {5, 6, 7, 8}, &diag);
        CHECK(c.centroids.at(5) == SparseVector{{1, 0.5}, {2, 0.5}});
        CHECK(c.centroids.at(6) == SparseVector{{3, 2.0}});
        CHECK(c.centroids.at(7) == SparseVector{{4, 1.0}});
        CHECK(c.missing == std::vector<NodeId>{8});
        CHECK(diag.warnings.size() == 1);
    }

    TEST_CASE("cosine")
    {
        const SparseVector u{{1, 3.0}, {2, 4.0}};
        const SparseVector v{{2, 4.0}};
        CHECK(cosine(u, v) == doctest::Approx(0.8).epsilon(1e-15));
        CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(cosine(u, SparseVector{{3, 1.0}}) == 0.0);
        CHECK(cosine(u, SparseVector{}) == 0.0);
    }

    TEST_CASE("cosine symmetry, scale invariance, range")
    {
        Rng rng(9);
        for (int trial = 0; trial < 200; ++trial) {
            const auto u = random_sparse(rng, trial % 2 == 0);
            const auto v = random_sparse(rng, trial % 2 == 0);
            CHECK(cosine(u, v) == cosine(v, u));
            const double alpha = uniform(rng, 0.1, 10.0);
            std::vector<Feature> scaled(u.entries().begin(), u.entries().end());
            for (auto& f : scaled) f.value *= alpha;
            CHECK(std::abs(cosine(SparseVector(scaled), v) - cosine(u, v)) <= 1e-12);
            if (trial % 2 == 0) {
                CHECK(cosine(u, v) >= 0.0);
                CHECK(cosine(u, v) <= 1.0);
            }
        }
    }

    TEST_CASE("all pairs: counts and worker independence")
    {
        Rng rng(2);
        std::map<NodeId, SparseVector> c;
        for (NodeId n = 0; n < 20; ++n) c[n * 3 + 1] = random_sparse(rng, true);
        const auto serial = all_pairs_scores(c, 1);
        CHECK(serial.size() == 190);
        CHECK(std::is_sorted(serial.begin(), serial.end(), pair_order));
        for (unsigned w : {2u, 3u, 8u}) CHECK(all_pairs_scores(c, w) == serial);

        std::map<NodeId, SparseVector> three{{1, SparseVector{{1, 1.0}}}, {2, SparseVector{{2, 1.0}}},
                                             {3, SparseVector{{1, 1.0}, {2, 1.0}}}};
        CHECK(all_pairs_scores(three).size() == 3);
        std::map<NodeId, SparseVector> one{{1, SparseVector{{1, 1.0}}}};
        CHECK_THROWS_AS(all_pairs_scores(one), DataError);
    }

    TEST_CASE("select by tau and by top-k")
    {
        const auto scores = curve({0.9, 0.8, 0.8, 0.5, 0.1});
        CHECK(select_pairs(scores, TauThreshold{1.0}).empty());
        CHECK(select_pairs(scores, TauThreshold{-1.0}).size() == 5);
        CHECK(select_pairs(scores, TauThreshold{0.8}).size() == 1);
        const auto top = select_pairs(scores, TopK{4});
        CHECK(top.size() == 4);
        CHECK(top.tau() == 0.5);
        CHECK(top.contains(1004, 4));
        CHECK_FALSE(top.contains(5, 1005));

        Diagnostics diag;
        CHECK(select_pairs(scores, TopK{1000}, &diag).size() == 5);
        CHECK(diag.warnings.size() == 1);
        CHECK_THROWS_AS(select_pairs(scores, TopK{0}), ConfigError);
        CHECK_THROWS_AS(select_pairs(scores, TauThreshold{1.5}), ConfigError);
    }

    TEST_CASE("top-k sets tau to the k-th score")
    {
        std::vector<double> s;
        for (int i = 0; i < 1500; ++i) s.push_back(1.0 - i / 2000.0);
        const auto scores = curve(s);
        const auto set = select_pairs(scores, TopK{1000});
        CHECK(set.tau() == scores[999].score);
        CHECK(filter_at_tau(set).size() == 1000);
    }

    TEST_CASE("knee of a step curve")
    {
        const std::vector<double> s{1.0, 0.95, 0.9, 0.2, 0.19, 0.18};
        const auto knee = auto_threshold(curve(s));
        CHECK(knee.found);
        CHECK(knee.rank == brute_force_knee(s));
        CHECK(knee.rank == 4);
        CHECK(knee.score == 0.2);
    }

    TEST_CASE("linear and constant curves have no knee")
    {
        Diagnostics diag;
        const auto linear = auto_threshold(curve({0.5, 0.4, 0.3, 0.2, 0.1}), &diag);
        CHECK_FALSE(linear.found);
        CHECK(linear.rank == 1);
        CHECK(linear.score == 0.5);
        CHECK(diag.warnings.size() == 1);
        const auto flat = auto_threshold(curve({0.3, 0.3, 0.3}));
        CHECK_FALSE(flat.found);
        CHECK(flat.score == 0.3);
        CHECK_THROWS_AS(auto_threshold(curve({0.3, 0.2})), DataError);
    }

    TEST_CASE("two-plateau curves")
    {
        Rng rng(4);
        for (int trial = 0; trial < 50; ++trial) {
            const auto p = 2 + uniform_index(rng, 30);
            const auto q = 2 + uniform_index(rng, 60);
            std::vector<double> s;
            for (std::size_t i = 0; i < p; ++i) s.push_back(0.9 - 0.001 * static_cast<double>(i));
            for (std::size_t i = 0; i < q; ++i) s.push_back(0.2 - 0.001 * static_cast<double>(i));
            const auto knee = auto_threshold(curve(s));
            CHECK(knee.rank == brute_force_knee(s));
            CHECK(knee.rank >= p);
            CHECK(knee.rank <= p + 1);
        }
    }

    TEST_CASE("curve csv and pair set files")
    {
        const auto scores = curve({0.75, 0.5});
        CHECK(similarity_curve_csv(scores) == "rank,class_a,class_b,score\n1,1,1001,0.75\n2,2,1002,0.5\n");
        const auto set = select_pairs(scores, TopK{2});
        const auto text = serialize_pair_set(set);
        const auto back = parse_pair_set(text);
        CHECK(back.pairs() == set.pairs());
        CHECK(back.tau() == set.tau());
        CHECK(parse_pair_set("9 2 0.5\n").pairs().front() == PairScore{2, 9, 0.5});
        CHECK_THROWS_AS(parse_pair_set("1 2\n"), ParseError);
    }
}
