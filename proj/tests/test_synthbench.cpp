#include <doctest.h>

#include "taxrewire/errors.hpp"
#include "taxrewire/rewire.hpp"
#include "taxrewire/synthbench.hpp"

using namespace taxrewire;

TEST_SUITE("synthbench")
{
    TEST_CASE("balanced tree shape")
    {
        const auto t = synth::balanced_tree(10, 3);
        CHECK(t.size() == 1 + 10 + 100 + 1000);
        CHECK(t.leaves().size() == 1000);
        CHECK(t.children(0).size() == 10);
    }

    TEST_CASE("no misplacement keeps the tree")
    {
        synth::PlantConfig cfg;
        cfg.n_misplaced = 0;
        const auto p = synth::gen_planted(cfg);
        CHECK(p.corrupted == p.truth);
        CHECK(p.misplaced.empty());
    }

    TEST_CASE("misplaced leaves change parent but keep every group populated")
    {
        synth::PlantConfig cfg;
        cfg.n_misplaced = 4;
        cfg.seed = 3;
        const auto p = synth::gen_planted(cfg);
        CHECK(p.misplaced.size() == 4);
        for (NodeId l : p.misplaced) CHECK(p.corrupted.parent(l) != p.truth.parent(l));
        CHECK(p.corrupted.leaves() == p.truth.leaves());
        for (NodeId n : p.corrupted.nodes())
            if (!p.corrupted.is_root(n) && !p.truth.is_leaf(n)) CHECK_FALSE(p.corrupted.is_leaf(n));
    }

    TEST_CASE("zero noise gives identical instances per class")
    {
        synth::PlantConfig cfg;
        cfg.noise = 0.0;
        cfg.instances_per_leaf = 3;
        const auto p = synth::gen_planted(cfg);
        for (std::size_t i = 0; i + 1 < p.data.size(); ++i)
            if (p.data.instances[i].label == p.data.instances[i + 1].label)
                CHECK(cosine(p.data.instances[i].features, p.data.instances[i + 1].features) ==
                      doctest::Approx(1.0).epsilon(1e-15));
    }

    TEST_CASE("generation is deterministic")
    {
        synth::PlantConfig cfg;
        cfg.seed = 17;
        const auto a = synth::gen_planted(cfg);
        const auto b = synth::gen_planted(cfg);
        CHECK(serialize_dataset(a.data) == serialize_dataset(b.data));
        CHECK(a.corrupted == b.corrupted);
        cfg.seed = 18;
        CHECK(serialize_dataset(synth::gen_planted(cfg).data) != serialize_dataset(a.data));
    }

    TEST_CASE("invalid configurations")
    {
        synth::PlantConfig cfg;
        cfg.n_leaves = 20;
        CHECK_THROWS_AS(synth::gen_planted(cfg), ConfigError);
        cfg = {};
        cfg.fanout = 1;
        CHECK_THROWS_AS(synth::gen_planted(cfg), ConfigError);
        cfg = {};
        cfg.n_misplaced = 27;
        CHECK_THROWS_AS(synth::gen_planted(cfg), ConfigError);
        cfg = {};
        cfg.n_internal = 5;
        CHECK_THROWS_AS(synth::gen_planted(cfg), ConfigError);
        cfg.n_internal = 12;
        CHECK_NOTHROW(synth::gen_planted(cfg));
    }

    TEST_CASE("rare-class mode draws per-class counts from a range")
    {
        synth::PlantConfig cfg;
        cfg.instances_per_leaf = 2;
        cfg.instances_max = 40;
        const auto p = synth::gen_planted(cfg);
        const auto hist = label_histogram(p.data);
        std::size_t lo = 1000;
        std::size_t hi = 0;
        for (const auto& [l, n] : hist) {
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        CHECK(lo >= 2);
        CHECK(hi <= 40);
        CHECK(lo < hi);
    }

    TEST_CASE("rewiring the planted tree restores its sibling groups")
    {
        synth::PlantConfig cfg;
        cfg.seed = 1;
        const auto p = synth::gen_planted(cfg);
        const auto centroids = class_centroids(p.data, p.corrupted.leaves());
        const auto scores = all_pairs_scores(centroids.centroids);
        const auto r = rewhier(p.corrupted, select_pairs(scores, TauThreshold{0.5}));
        CHECK(synth::sibling_groups(r.modified) == synth::sibling_groups(p.truth));
    }

    TEST_CASE("oracles on a single node")
    {
        const Taxonomy t(3);
        CHECK(synth::oracle_lca(t, 3, 3) == 3);
        CHECK(synth::oracle_hier_f1(std::vector<EvalPair>{{3, 3}}, t) == 0.0);
    }
}
