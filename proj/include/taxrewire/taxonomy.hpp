#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace taxrewire {

using NodeId = std::uint32_t;

struct Edge {
    NodeId parent;
    NodeId child;
};

/// Rooted tree of class nodes. Leaves are the nodes without children.
///
/// Children are always kept sorted by ascending id, so two taxonomies with
/// the same parent relation compare equal and iterate identically.
/// Read access is safe from multiple threads; mutation is not.
class Taxonomy {
public:
    /// Single-node tree.
    explicit Taxonomy(NodeId root = 0);

    /// Builds and validates a tree from parent-child edges. The root is the
    /// unique node that never appears as a child.
    static Taxonomy from_edges(const std::vector<Edge>& edges);

    NodeId root() const noexcept { return root_; }
    std::size_t size() const noexcept { return children_.size(); }
    bool contains(NodeId n) const { return children_.count(n) != 0; }

    /// Parent of a non-root node.
    NodeId parent(NodeId n) const;
    const std::vector<NodeId>& children(NodeId n) const;
    bool is_leaf(NodeId n) const { return children(n).empty(); }
    bool is_root(NodeId n) const { return n == root_; }

    /// All nodes, ascending.
    std::vector<NodeId> nodes() const;
    std::vector<NodeId> leaves() const;
    /// Non-root nodes, ascending.
    std::vector<NodeId> non_root_nodes() const;
    std::vector<Edge> edges() const;
    NodeId max_id() const;

    /// Number of edges between n and the root.
    std::size_t depth(NodeId n) const;
    /// n, parent(n), ..., root.
    std::vector<NodeId> path_to_root(NodeId n) const;
    /// True when `ancestor` lies on the path from n to the root (inclusive).
    bool is_ancestor(NodeId ancestor, NodeId n) const;
    std::vector<NodeId> subtree_leaves(NodeId n) const;

    /// Adds a fresh node under `parent`.
    void add_node(NodeId id, NodeId parent);
    /// Moves `n` (with its subtree) under `new_parent`.
    void reparent(NodeId n, NodeId new_parent);
    /// Removes a non-root node; its children, if any, move to its parent.
    void remove_node(NodeId n);

    /// Throws TaxonomyError if any tree invariant is violated.
    void validate() const;

    bool operator==(const Taxonomy&) const = default;

private:
    void require(NodeId n) const;
    static void insert_sorted(std::vector<NodeId>& v, NodeId n);
    static void erase_value(std::vector<NodeId>& v, NodeId n);

    NodeId root_;
    std::map<NodeId, NodeId> parent_;
    std::map<NodeId, std::vector<NodeId>> children_;
};

/// Parses "parent child" lines. Blank lines and lines starting with '#' are
/// ignored.
Taxonomy parse_taxonomy(std::string_view edge_text);

/// One "parent child" line per edge, sorted by (parent, child).
std::string serialize_taxonomy(const Taxonomy& t);

/// Deepest common ancestor; a node is its own ancestor.
NodeId lca(const Taxonomy& t, NodeId a, NodeId b);

struct SiblingInfo {
    std::vector<NodeId> leaves;
    std::size_t internal_count = 0;
};

/// Leaf children of parent(n) other than n. Internal siblings are only
/// counted.
SiblingInfo leaf_siblings(const Taxonomy& t, NodeId n);

/// Stable hash of the tree structure, used to bind model files to the
/// hierarchy they were trained on.
std::uint64_t fingerprint(const Taxonomy& t);

/// Maps integer ids to optional display names ("id name" lines).
std::map<NodeId, std::string> parse_name_table(std::string_view text);

} // namespace taxrewire
