#include "taxrewire/rewire.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "taxrewire/text.hpp"

namespace taxrewire {

namespace {

using json = nlohmann::json;

std::string id_str(NodeId n) { return std::to_string(n); }

void require_class(const Taxonomy& h, const ClassSet& classes, NodeId n)
{
    if (!h.contains(n)) throw TaxonomyError("unknown node " + id_str(n));
    if (classes.count(n) == 0 || !h.is_leaf(n)) throw TaxonomyError("node " + id_str(n) + " is not a leaf class");
}

/// False as soon as one class sibling of `anchor` is not similar to `candidate`.
bool similar_to_all_siblings(const Taxonomy& h, const SimilarPairSet& similar, const ClassSet& classes,
                             NodeId anchor, NodeId candidate)
{
    for (NodeId j : h.children(h.parent(anchor))) {
        if (j == anchor || classes.count(j) == 0) continue;
        if (!similar.contains(j, candidate)) return false;
    }
    return true;
}

void apply_op(Taxonomy& t, const RewireOp& op)
{
    if (const auto* nc = std::get_if<NodeCreation>(&op)) {
        t.add_node(nc->node, nc->parent);
        t.reparent(nc->first, nc->node);
        t.reparent(nc->second, nc->node);
    } else if (const auto* pc = std::get_if<LeafRewire>(&op)) {
        if (t.parent(pc->leaf) != pc->old_parent)
            throw TaxonomyError("rewire of " + id_str(pc->leaf) + ": expected parent " + id_str(pc->old_parent));
        t.reparent(pc->leaf, pc->new_parent);
    } else {
        const auto& nd = std::get<NodeDeletion>(op);
        if (t.parent(nd.node) != nd.parent)
            throw TaxonomyError("deletion of " + id_str(nd.node) + ": expected parent " + id_str(nd.parent));
        t.remove_node(nd.node);
    }
}

NodeCreation make_creation(const Taxonomy& h, NodeId first, NodeId second)
{
    if (h.parent(first) == h.parent(second))
        throw TaxonomyError("nodes " + id_str(first) + " and " + id_str(second) + " already share a parent");
    if (h.max_id() == std::numeric_limits<NodeId>::max()) throw TaxonomyError("node id space exhausted");
    return {h.max_id() + 1, lca(h, first, second), first, second};
}

LeafRewire make_rewire(const Taxonomy& h, NodeId leaf, NodeId new_parent)
{
    if (!h.contains(leaf)) throw TaxonomyError("unknown node " + id_str(leaf));
    if (!h.contains(new_parent)) throw TaxonomyError("unknown node " + id_str(new_parent));
    if (!h.is_leaf(leaf)) throw TaxonomyError("node " + id_str(leaf) + " is not a leaf");
    if (h.is_leaf(new_parent)) throw TaxonomyError("new parent " + id_str(new_parent) + " is a leaf");
    const NodeId old = h.parent(leaf);
    if (old == new_parent) throw TaxonomyError("node " + id_str(leaf) + " is already a child of " + id_str(new_parent));
    // Cannot trigger for a true leaf; kept as a guard on the tree invariant.
    if (h.is_ancestor(leaf, new_parent)) throw TaxonomyError("new parent lies below the moved node");
    return {leaf, old, new_parent};
}

void sweep(Taxonomy& t, const ClassSet& classes, RewireLog* log, std::size_t iteration, bool check)
{
    // has_class[n]: the subtree of n contains at least one class.
    std::map<NodeId, bool> has_class;
    std::vector<std::pair<NodeId, bool>> stack{{t.root(), false}};
    while (!stack.empty()) {
        auto [n, expanded] = stack.back();
        stack.pop_back();
        if (!expanded) {
            stack.push_back({n, true});
            for (NodeId c : t.children(n)) stack.push_back({c, false});
            continue;
        }
        bool any = classes.count(n) != 0;
        for (NodeId c : t.children(n)) any = any || has_class[c];
        has_class[n] = any;
    }

    std::vector<std::pair<std::size_t, NodeId>> doomed;
    for (const auto& [n, any] : has_class)
        if (!any && n != t.root()) doomed.push_back({t.depth(n), n});
    // Deepest first, so every removed node is childless at removal time.
    std::sort(doomed.begin(), doomed.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
    });
    for (const auto& [d, n] : doomed) {
        const NodeDeletion nd{n, t.parent(n)};
        apply_op(t, nd);
        if (check) t.validate();
        if (log != nullptr) log->push_back({iteration, nd});
    }
}

void collapse_chains(Taxonomy& t, const ClassSet& classes, RewireLog* log, std::size_t iteration, bool check)
{
    for (;;) {
        bool changed = false;
        for (NodeId n : t.non_root_nodes()) {
            if (classes.count(n) != 0 || t.children(n).size() != 1) continue;
            const NodeDeletion nd{n, t.parent(n)};
            apply_op(t, nd);
            if (check) t.validate();
            if (log != nullptr) log->push_back({iteration, nd});
            changed = true;
            break;
        }
        if (!changed) return;
    }
}

} // namespace

ClassSet class_set(const Taxonomy& h)
{
    const auto leaves = h.leaves();
    return ClassSet(leaves.begin(), leaves.end());
}

RewireFlags rewire_flags(const Taxonomy& h, const SimilarPairSet& similar, NodeId first, NodeId second,
                         const ClassSet& classes)
{
    require_class(h, classes, first);
    require_class(h, classes, second);
    RewireFlags flags;
    flags.move_second = similar_to_all_siblings(h, similar, classes, first, second);
    flags.move_first = similar_to_all_siblings(h, similar, classes, second, first);
    return flags;
}

RewireFlags rewire_flags(const Taxonomy& h, const SimilarPairSet& similar, NodeId first, NodeId second)
{
    return rewire_flags(h, similar, first, second, class_set(h));
}

Taxonomy node_create(const Taxonomy& h, NodeId first, NodeId second)
{
    const auto classes = class_set(h);
    require_class(h, classes, first);
    require_class(h, classes, second);
    Taxonomy out = h;
    apply_op(out, make_creation(h, first, second));
    return out;
}

Taxonomy pc_rewire(const Taxonomy& h, NodeId leaf, NodeId new_parent)
{
    Taxonomy out = h;
    apply_op(out, make_rewire(h, leaf, new_parent));
    return out;
}

Taxonomy node_delete_sweep(const Taxonomy& h, const ClassSet& classes)
{
    Taxonomy out = h;
    sweep(out, classes, nullptr, 0, false);
    return out;
}

Taxonomy node_delete_sweep(const Taxonomy& h) { return node_delete_sweep(h, class_set(h)); }

RewireResult rewhier(const Taxonomy& h, const SimilarPairSet& similar, const RewireOptions& options, Diagnostics* diag)
{
    const auto& pairs = similar.pairs();
    if (!std::is_sorted(pairs.begin(), pairs.end(), pair_order))
        throw DataError("similar pairs must be sorted by descending score");

    const ClassSet classes = class_set(h);
    Taxonomy work = h;
    RewireLog log;

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const NodeId first = pairs[i].a;
        const NodeId second = pairs[i].b;
        if (!work.contains(first) || !work.contains(second)) {
            warn(diag, "pair (" + id_str(first) + ", " + id_str(second) + ") references a class outside the hierarchy; skipped");
            continue;
        }
        const NodeId p1 = work.parent(first);
        const NodeId p2 = work.parent(second);
        if (p1 == p2) continue;

        const RewireFlags flags = rewire_flags(work, similar, first, second, classes);
        RewireOp op;
        if (!flags.move_first && !flags.move_second)
            op = make_creation(work, first, second);
        else if (flags.move_first)
            op = make_rewire(work, first, p2);
        else
            op = make_rewire(work, second, p1);

        apply_op(work, op);
        log.push_back({i, op});
        if (options.check_invariants) work.validate();
        if (work.parent(first) != work.parent(second))
            throw std::logic_error("pair (" + id_str(first) + ", " + id_str(second) + ") still split after iteration " +
                                   std::to_string(i));
    }

    sweep(work, classes, &log, pairs.size(), options.check_invariants);
    if (options.collapse_chains) collapse_chains(work, classes, &log, pairs.size(), options.check_invariants);
    return {std::move(work), std::move(log)};
}

Taxonomy replay(const Taxonomy& h, const RewireLog& log)
{
    Taxonomy out = h;
    for (const auto& step : log) apply_op(out, step.op);
    return out;
}

std::string serialize_rewire_log(const RewireLog& log)
{
    std::string out;
    for (const auto& step : log) {
        json j;
        j["iter"] = step.iteration;
        if (const auto* nc = std::get_if<NodeCreation>(&step.op)) {
            j["op"] = "NC";
            j["node"] = nc->node;
            j["parent"] = nc->parent;
            j["pair"] = {nc->first, nc->second};
        } else if (const auto* pc = std::get_if<LeafRewire>(&step.op)) {
            j["op"] = "PCRewire";
            j["leaf"] = pc->leaf;
            j["from"] = pc->old_parent;
            j["to"] = pc->new_parent;
        } else {
            const auto& nd = std::get<NodeDeletion>(step.op);
            j["op"] = "ND";
            j["node"] = nd.node;
            j["parent"] = nd.parent;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

RewireLog parse_rewire_log(std::string_view jsonl)
{
    RewireLog log;
    const auto lines = text::split_lines(jsonl);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty()) continue;
        try {
            const auto j = json::parse(line);
            if (j.contains("provenance")) continue;
            const auto iter = j.at("iter").get<std::size_t>();
            const auto kind = j.at("op").get<std::string>();
            if (kind == "NC") {
                const auto& pair = j.at("pair");
                log.push_back({iter, NodeCreation{j.at("node").get<NodeId>(), j.at("parent").get<NodeId>(),
                                                  pair.at(0).get<NodeId>(), pair.at(1).get<NodeId>()}});
            } else if (kind == "PCRewire") {
                log.push_back({iter, LeafRewire{j.at("leaf").get<NodeId>(), j.at("from").get<NodeId>(),
                                                j.at("to").get<NodeId>()}});
            } else if (kind == "ND") {
                log.push_back({iter, NodeDeletion{j.at("node").get<NodeId>(), j.at("parent").get<NodeId>()}});
            } else {
                throw ParseError(i + 1, "unknown operation \"" + kind + "\"");
            }
        } catch (const json::exception& e) {
            throw ParseError(i + 1, std::string("malformed log entry: ") + e.what());
        }
    }
    return log;
}

} // namespace taxrewire
