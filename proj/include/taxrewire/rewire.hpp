#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "taxrewire/errors.hpp"
#include "taxrewire/simgraph.hpp"
#include "taxrewire/taxonomy.hpp"

namespace taxrewire {

/// The class leaves of a hierarchy. Internal nodes emptied during rewiring
/// are structurally childless but are never classes.
using ClassSet = std::set<NodeId>;

ClassSet class_set(const Taxonomy& h);

/// Outcome of the sibling check for an inconsistent pair (first, second).
struct RewireFlags {
    /// `first` is similar to every leaf sibling of `second`, so it may move
    /// under parent(second).
    bool move_first = true;
    /// `second` is similar to every leaf sibling of `first`.
    bool move_second = true;

    bool operator==(const RewireFlags&) const = default;
};

/// Sibling sets are read from `h` as it is now. Only class leaves are
/// consulted; internal siblings neither set nor clear a flag.
RewireFlags rewire_flags(const Taxonomy& h, const SimilarPairSet& similar, NodeId first, NodeId second,
                         const ClassSet& classes);
RewireFlags rewire_flags(const Taxonomy& h, const SimilarPairSet& similar, NodeId first, NodeId second);

struct NodeCreation {
    NodeId node;
    NodeId parent;
    NodeId first;
    NodeId second;

    bool operator==(const NodeCreation&) const = default;
};

struct LeafRewire {
    NodeId leaf;
    NodeId old_parent;
    NodeId new_parent;

    bool operator==(const LeafRewire&) const = default;
};

/// Removal of `node`; any children are spliced onto `parent`.
struct NodeDeletion {
    NodeId node;
    NodeId parent;

    bool operator==(const NodeDeletion&) const = default;
};

using RewireOp = std::variant<NodeCreation, LeafRewire, NodeDeletion>;

struct RewireStep {
    /// Index of the similar pair that triggered the operation; deletions
    /// carry the pair count.
    std::size_t iteration;
    RewireOp op;

    bool operator==(const RewireStep&) const = default;
};

using RewireLog = std::vector<RewireStep>;

/// Groups `first` and `second` under a fresh node (id = max id + 1) placed
/// below their lowest common ancestor.
Taxonomy node_create(const Taxonomy& h, NodeId first, NodeId second);

/// Moves a leaf under another internal node.
Taxonomy pc_rewire(const Taxonomy& h, NodeId leaf, NodeId new_parent);

/// Removes every non-root, non-class node whose subtree holds no class.
/// Without an explicit class set, the current leaves are the classes.
Taxonomy node_delete_sweep(const Taxonomy& h, const ClassSet& classes);
Taxonomy node_delete_sweep(const Taxonomy& h);

struct RewireOptions {
    /// Also splice out non-class internal nodes left with a single child.
    bool collapse_chains = false;
    /// Validate the tree after every elementary operation.
    bool check_invariants = true;
};

struct RewireResult {
    Taxonomy modified;
    RewireLog log;
};

/// Processes the similar pairs in order, fixing every pair whose members
/// have different parents by node creation or parent-child rewiring, then
/// sweeps away nodes left without classes. `h` is never modified.
RewireResult rewhier(const Taxonomy& h, const SimilarPairSet& similar, const RewireOptions& options = {},
                     Diagnostics* diag = nullptr);

/// Applies a log to `h`; replaying a rewhier log reproduces its output.
Taxonomy replay(const Taxonomy& h, const RewireLog& log);

/// One JSON object per line.
std::string serialize_rewire_log(const RewireLog& log);
/// Lines carrying a "provenance" key are skipped.
RewireLog parse_rewire_log(std::string_view jsonl);

} // namespace taxrewire
