#include <doctest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "taxrewire/errors.hpp"
#include "taxrewire/random.hpp"
#include "taxrewire/synthbench.hpp"
#include "taxrewire/taxonomy.hpp"

using namespace taxrewire;
using fixtures::A;
using fixtures::B;
using fixtures::C;

TEST_SUITE("taxonomy")
{
    TEST_CASE("parse a small tree")
    {
        const auto t = parse_taxonomy("0 1\n0 2\n1 3\n1 4");
        CHECK(t.root() == 0);
        CHECK(t.leaves() == std::vector<NodeId>{2, 3, 4});
        CHECK(t.size() == 5);
        CHECK(t.parent(3) == 1);
    }

    TEST_CASE("two-node cycle is rejected")
    {
        CHECK_THROWS_AS(parse_taxonomy("0 1\n1 0"), TaxonomyError);
        CHECK_THROWS_AS(parse_taxonomy("3 3"), TaxonomyError);
    }

    TEST_CASE("structural errors")
    {
        CHECK_THROWS_AS(parse_taxonomy("0 1\n2 1"), TaxonomyError);     // two parents
        CHECK_THROWS_AS(parse_taxonomy("0 1\n5 6"), TaxonomyError);     // two roots
        CHECK_THROWS_AS(parse_taxonomy("0 1\n1 2\n2 1"), TaxonomyError); // duplicate parent via cycle
        CHECK_THROWS_AS(parse_taxonomy("0 1\n2 3\n3 2"), TaxonomyError);
        CHECK_THROWS_AS(parse_taxonomy(""), TaxonomyError);
    }

    TEST_CASE("malformed lines carry a line number")
    {
        try {
            parse_taxonomy("0 1\n1 x\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
        CHECK_THROWS_AS(parse_taxonomy("0 1 2\n"), ParseError);
    }

    TEST_CASE("comments and blank lines are skipped")
    {
        const auto t = parse_taxonomy("# header\n\n0 1\r\n0 2\n");
        CHECK(t.leaves() == std::vector<NodeId>{1, 2});
    }

    TEST_CASE("two-branch tree structure")
    {
        const auto t = fixtures::two_branch_tree();
        CHECK(t.root() == A);
        CHECK(t.leaves() == std::vector<NodeId>{3, 4, 5, 6, 7, 8});
        std::vector<NodeId> internal;
        for (NodeId n : t.nodes())
            if (!t.is_leaf(n)) internal.push_back(n);
        CHECK(internal == std::vector<NodeId>{A, B, C});
        CHECK(t.edges().size() == t.size() - 1);
    }

    TEST_CASE("lca")
    {
        const auto t = fixtures::two_branch_tree();
        CHECK(lca(t, 5, 5) == 5);
        CHECK(lca(t, 5, 6) == A);
        CHECK(lca(t, 3, 4) == B);
        CHECK(lca(t, 3, B) == B);
        CHECK_THROWS_AS(lca(t, 3, 99), TaxonomyError);
    }

    TEST_CASE("leaf siblings")
    {
        const auto t = fixtures::two_branch_tree();
        CHECK(leaf_siblings(t, 3).leaves == std::vector<NodeId>{4, 5});
        CHECK(leaf_siblings(t, 3).internal_count == 0);
        CHECK_THROWS_AS(leaf_siblings(t, A), TaxonomyError);

        const auto only = parse_taxonomy("0 1\n1 2");
        CHECK(leaf_siblings(only, 2).leaves.empty());

        // 0 -> {1, 2}, 1 -> {3, 4}: node 2 has one internal and no leaf
        // sibling; node 3 has a single leaf sibling.
        const auto mixed = parse_taxonomy("0 1\n0 2\n0 5\n1 3\n1 4");
        const auto s = leaf_siblings(mixed, 2);
        CHECK(s.leaves == std::vector<NodeId>{5});
        CHECK(s.internal_count == 1);
    }

    TEST_CASE("serialize round trip")
    {
        const auto t = fixtures::two_branch_tree();
        const auto text = serialize_taxonomy(t);
        CHECK(text == "10 11\n10 12\n11 3\n11 4\n11 5\n12 6\n12 7\n12 8\n");
        CHECK(parse_taxonomy(text) == t);
        CHECK(serialize_taxonomy(Taxonomy(4)).empty());
    }

    TEST_CASE("random trees: round trip, edge count, lca against brute force")
    {
        Rng rng(7);
        for (int trial = 0; trial < 40; ++trial) {
            const auto n = 1 + uniform_index(rng, 100);
            const auto t = synth::random_tree(n, rng);
            CHECK(t.edges().size() == t.size() - 1);
            if (t.size() > 1) CHECK(parse_taxonomy(serialize_taxonomy(t)) == t);
            const auto nodes = t.nodes();
            for (NodeId a : nodes) {
                CHECK(t.path_to_root(a).size() <= t.size());
                for (NodeId b : nodes) {
                    const NodeId l = lca(t, a, b);
                    REQUIRE(l == synth::oracle_lca(t, a, b));
                    REQUIRE(l == lca(t, b, a));
                }
            }
        }
    }

    TEST_CASE("mutation helpers keep the tree valid")
    {
        auto t = fixtures::two_branch_tree();
        t.add_node(20, B);
        t.reparent(6, B);
        t.validate();
        CHECK(t.children(B) == std::vector<NodeId>{3, 4, 5, 6, 20});
        CHECK_THROWS_AS(t.reparent(B, 3), TaxonomyError);
        CHECK_THROWS_AS(t.reparent(A, B), TaxonomyError);
        CHECK_THROWS_AS(t.add_node(3, A), TaxonomyError);
        t.remove_node(B);
        t.validate();
        CHECK(t.children(A) == std::vector<NodeId>{3, 4, 5, 6, 12, 20});
        CHECK(t.max_id() == 20);
    }

    TEST_CASE("depth, ancestry and subtree leaves")
    {
        const auto t = fixtures::two_branch_tree();
        CHECK(t.depth(A) == 0);
        CHECK(t.depth(7) == 2);
        CHECK(t.is_ancestor(A, 7));
        CHECK(t.is_ancestor(7, 7));
        CHECK_FALSE(t.is_ancestor(B, 7));
        CHECK(t.subtree_leaves(C) == std::vector<NodeId>{6, 7, 8});
        CHECK(t.path_to_root(4) == std::vector<NodeId>{4, B, A});
    }

    TEST_CASE("fingerprint follows structure")
    {
        const auto t = fixtures::two_branch_tree();
        auto moved = t;
        moved.reparent(6, B);
        CHECK(fingerprint(t) == fingerprint(fixtures::two_branch_tree()));
        CHECK(fingerprint(t) != fingerprint(moved));
    }

    TEST_CASE("name table")
    {
        const auto names = parse_name_table("3 alt.atheism\n4 soc.religion.christian\n");
        CHECK(names.at(3) == "alt.atheism");
        CHECK(names.size() == 2);
        CHECK_THROWS_AS(parse_name_table("x name\n"), ParseError);
    }
}
