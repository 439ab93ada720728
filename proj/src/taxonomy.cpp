#include "taxrewire/taxonomy.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "taxrewire/errors.hpp"
#include "taxrewire/text.hpp"

namespace taxrewire {

namespace {

std::string id_str(NodeId n) { return std::to_string(n); }

} // namespace

Taxonomy::Taxonomy(NodeId root) : root_(root) { children_[root]; }

Taxonomy Taxonomy::from_edges(const std::vector<Edge>& edges)
{
    std::map<NodeId, NodeId> parent;
    std::set<NodeId> all;
    for (const auto& e : edges) {
        if (e.parent == e.child) throw TaxonomyError("cycle detected: node " + id_str(e.child) + " is its own parent");
        auto [it, inserted] = parent.emplace(e.child, e.parent);
        if (!inserted)
            throw TaxonomyError("duplicate parent for node " + id_str(e.child) + " (" + id_str(it->second) + " and " +
                                id_str(e.parent) + ")");
        all.insert(e.parent);
        all.insert(e.child);
    }
    if (all.empty()) throw TaxonomyError("no root candidate: empty edge list");

    std::vector<NodeId> roots;
    for (NodeId n : all)
        if (parent.count(n) == 0) roots.push_back(n);
    if (roots.empty()) throw TaxonomyError("cycle detected: no root candidate");
    if (roots.size() > 1) {
        std::string list;
        for (std::size_t i = 0; i < roots.size() && i < 5; ++i) list += (i ? ", " : "") + id_str(roots[i]);
        throw TaxonomyError("multiple root candidates: " + list + (roots.size() > 5 ? ", ..." : ""));
    }

    Taxonomy t(roots.front());
    for (NodeId n : all) t.children_[n];
    for (const auto& [child, par] : parent) {
        t.parent_[child] = par;
        t.children_[par].push_back(child);
    }
    for (auto& [n, kids] : t.children_) std::sort(kids.begin(), kids.end());

    // With one parent per node and a unique root, unreachable nodes must sit
    // on a cycle.
    std::vector<NodeId> stack{t.root_};
    std::size_t reached = 0;
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        ++reached;
        for (NodeId c : t.children_[n]) stack.push_back(c);
    }
    if (reached != t.children_.size()) throw TaxonomyError("cycle detected: some nodes are unreachable from the root");
    return t;
}

void Taxonomy::require(NodeId n) const
{
    if (!contains(n)) throw TaxonomyError("unknown node " + id_str(n));
}

NodeId Taxonomy::parent(NodeId n) const
{
    require(n);
    auto it = parent_.find(n);
    if (it == parent_.end()) throw TaxonomyError("root node " + id_str(n) + " has no parent");
    return it->second;
}

const std::vector<NodeId>& Taxonomy::children(NodeId n) const
{
    auto it = children_.find(n);
    if (it == children_.end()) throw TaxonomyError("unknown node " + id_str(n));
    return it->second;
}

std::vector<NodeId> Taxonomy::nodes() const
{
    std::vector<NodeId> out;
    out.reserve(children_.size());
    for (const auto& [n, kids] : children_) out.push_back(n);
    return out;
}

std::vector<NodeId> Taxonomy::leaves() const
{
    std::vector<NodeId> out;
    for (const auto& [n, kids] : children_)
        if (kids.empty()) out.push_back(n);
    return out;
}

std::vector<NodeId> Taxonomy::non_root_nodes() const
{
    std::vector<NodeId> out;
    out.reserve(parent_.size());
    for (const auto& [n, p] : parent_) out.push_back(n);
    return out;
}

std::vector<Edge> Taxonomy::edges() const
{
    std::vector<Edge> out;
    out.reserve(parent_.size());
    for (const auto& [n, kids] : children_)
        for (NodeId c : kids) out.push_back({n, c});
    return out;
}

NodeId Taxonomy::max_id() const { return children_.rbegin()->first; }

std::size_t Taxonomy::depth(NodeId n) const
{
    require(n);
    std::size_t d = 0;
    for (auto it = parent_.find(n); it != parent_.end(); it = parent_.find(it->second)) ++d;
    return d;
}

std::vector<NodeId> Taxonomy::path_to_root(NodeId n) const
{
    require(n);
    std::vector<NodeId> path{n};
    for (auto it = parent_.find(n); it != parent_.end(); it = parent_.find(it->second)) path.push_back(it->second);
    return path;
}

bool Taxonomy::is_ancestor(NodeId ancestor, NodeId n) const
{
    require(ancestor);
    require(n);
    if (ancestor == n) return true;
    for (auto it = parent_.find(n); it != parent_.end(); it = parent_.find(it->second))
        if (it->second == ancestor) return true;
    return false;
}

std::vector<NodeId> Taxonomy::subtree_leaves(NodeId n) const
{
    require(n);
    std::vector<NodeId> out;
    std::vector<NodeId> stack{n};
    while (!stack.empty()) {
        const NodeId cur = stack.back();
        stack.pop_back();
        const auto& kids = children_.at(cur);
        if (kids.empty()) out.push_back(cur);
        for (NodeId c : kids) stack.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

void Taxonomy::insert_sorted(std::vector<NodeId>& v, NodeId n) { v.insert(std::lower_bound(v.begin(), v.end(), n), n); }

void Taxonomy::erase_value(std::vector<NodeId>& v, NodeId n)
{
    auto it = std::lower_bound(v.begin(), v.end(), n);
    if (it != v.end() && *it == n) v.erase(it);
}

void Taxonomy::add_node(NodeId id, NodeId parent)
{
    require(parent);
    if (contains(id)) throw TaxonomyError("node " + id_str(id) + " already exists");
    children_[id];
    parent_[id] = parent;
    insert_sorted(children_[parent], id);
}

void Taxonomy::reparent(NodeId n, NodeId new_parent)
{
    require(n);
    require(new_parent);
    if (n == root_) throw TaxonomyError("cannot reparent the root");
    if (is_ancestor(n, new_parent))
        throw TaxonomyError("reparenting " + id_str(n) + " under " + id_str(new_parent) + " would create a cycle");
    const NodeId old = parent_.at(n);
    erase_value(children_[old], n);
    insert_sorted(children_[new_parent], n);
    parent_[n] = new_parent;
}

void Taxonomy::remove_node(NodeId n)
{
    require(n);
    if (n == root_) throw TaxonomyError("cannot remove the root");
    const NodeId par = parent_.at(n);
    for (NodeId c : children_.at(n)) {
        parent_[c] = par;
        insert_sorted(children_[par], c);
    }
    erase_value(children_[par], n);
    children_.erase(n);
    parent_.erase(n);
}

void Taxonomy::validate() const
{
    if (!contains(root_)) throw TaxonomyError("root " + id_str(root_) + " missing");
    if (parent_.count(root_) != 0) throw TaxonomyError("root " + id_str(root_) + " has a parent");
    if (parent_.size() + 1 != children_.size()) throw TaxonomyError("every non-root node needs exactly one parent");

    std::size_t child_links = 0;
    for (const auto& [n, kids] : children_) {
        if (!std::is_sorted(kids.begin(), kids.end()) || std::adjacent_find(kids.begin(), kids.end()) != kids.end())
            throw TaxonomyError("children of " + id_str(n) + " not strictly ascending");
        for (NodeId c : kids) {
            auto it = parent_.find(c);
            if (it == parent_.end() || it->second != n)
                throw TaxonomyError("parent/children mismatch at edge " + id_str(n) + " -> " + id_str(c));
        }
        child_links += kids.size();
    }
    if (child_links != parent_.size()) throw TaxonomyError("parent/children link counts differ");

    std::vector<NodeId> stack{root_};
    std::size_t reached = 0;
    while (!stack.empty()) {
        const NodeId n = stack.back();
        stack.pop_back();
        if (++reached > children_.size()) throw TaxonomyError("cycle detected");
        for (NodeId c : children_.at(n)) stack.push_back(c);
    }
    if (reached != children_.size()) throw TaxonomyError("nodes unreachable from the root");
}

Taxonomy parse_taxonomy(std::string_view edge_text)
{
    std::vector<Edge> edges;
    const auto lines = text::split_lines(edge_text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto tok = text::split_ws(line);
        std::uint64_t p = 0;
        std::uint64_t c = 0;
        if (tok.size() != 2 || !text::parse_u64(tok[0], p) || !text::parse_u64(tok[1], c))
            throw ParseError(i + 1, "expected \"parent_id child_id\", got \"" + std::string(line) + "\"");
        constexpr auto max_id = std::numeric_limits<NodeId>::max();
        if (p > max_id || c > max_id) throw ParseError(i + 1, "node id out of range");
        edges.push_back({static_cast<NodeId>(p), static_cast<NodeId>(c)});
    }
    return Taxonomy::from_edges(edges);
}

std::string serialize_taxonomy(const Taxonomy& t)
{
    std::string out;
    for (const auto& e : t.edges()) {
        out += std::to_string(e.parent);
        out += ' ';
        out += std::to_string(e.child);
        out += '\n';
    }
    return out;
}

NodeId lca(const Taxonomy& t, NodeId a, NodeId b)
{
    std::size_t da = t.depth(a);
    std::size_t db = t.depth(b);
    while (da > db) {
        a = t.parent(a);
        --da;
    }
    while (db > da) {
        b = t.parent(b);
        --db;
    }
    while (a != b) {
        a = t.parent(a);
        b = t.parent(b);
    }
    return a;
}

SiblingInfo leaf_siblings(const Taxonomy& t, NodeId n)
{
    SiblingInfo info;
    for (NodeId s : t.children(t.parent(n))) {
        if (s == n) continue;
        if (t.is_leaf(s))
            info.leaves.push_back(s);
        else
            ++info.internal_count;
    }
    return info;
}

std::uint64_t fingerprint(const Taxonomy& t)
{
    return text::fnv1a("root " + std::to_string(t.root()) + "\n" + serialize_taxonomy(t));
}

std::map<NodeId, std::string> parse_name_table(std::string_view text_in)
{
    std::map<NodeId, std::string> names;
    const auto lines = text::split_lines(text_in);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto sp = line.find_first_of(" \t");
        std::uint64_t id = 0;
        if (sp == std::string_view::npos || !text::parse_u64(line.substr(0, sp), id) ||
            id > std::numeric_limits<NodeId>::max())
            throw ParseError(i + 1, "expected \"id name\"");
        names[static_cast<NodeId>(id)] = std::string(text::trim(line.substr(sp + 1)));
    }
    return names;
}

} // namespace taxrewire
