#include "ppset/ast.hpp"

#include <algorithm>
#include <cmath>

#include "ppset/errors.hpp"

namespace ppset {

using nlohmann::json;

AnnotatedAst AnnotatedAst::create(std::string task_id, NodeId root, std::vector<AstNode> nodes) {
    const std::size_t n = nodes.size();
    if (n == 0) throw ValidationError("empty tree: at least one node is required");
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes[i].id != i)
            throw ValidationError("node ids must be dense 0..n-1 in order; position " + std::to_string(i) +
                                  " holds id " + std::to_string(nodes[i].id));
    }
    if (root >= n) throw ValidationError("root id " + std::to_string(root) + " does not exist");

    constexpr NodeId kNone = static_cast<NodeId>(-1);
    std::vector<NodeId> parent(n, kNone);
    std::vector<std::size_t> child_index(n, 0);
    for (const auto& node : nodes) {
        if (!std::isfinite(node.weight))
            throw ValidationError("non-finite weight at node " + std::to_string(node.id));
        if (node.weight < 0.0) throw ValidationError("negative weight at node " + std::to_string(node.id));
        for (std::size_t k = 0; k < node.children.size(); ++k) {
            NodeId c = node.children[k];
            if (c >= n)
                throw ValidationError("node " + std::to_string(node.id) + " references unknown child " +
                                      std::to_string(c));
            if (c == root) throw ValidationError("root " + std::to_string(root) + " cannot be a child");
            if (parent[c] != kNone) throw ValidationError("node " + std::to_string(c) + " has more than one parent");
            parent[c] = node.id;
            child_index[c] = k;
        }
    }

    AnnotatedAst ast;
    ast.preorder_.reserve(n);
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        ast.preorder_.push_back(v);
        const auto& ch = nodes[v].children;
        for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
    }
    // With single parents and a parentless root, reaching fewer than n nodes means a cycle
    // or a detached component.
    if (ast.preorder_.size() != n)
        throw ValidationError("tree is not connected from the root (cycle or orphan node)");

    parent[root] = root;
    ast.task_id_ = std::move(task_id);
    ast.root_ = root;
    ast.parent_ = std::move(parent);
    ast.child_index_ = std::move(child_index);
    ast.pre_index_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) ast.pre_index_[ast.preorder_[i]] = i;
    ast.subtree_size_.assign(n, 1);
    ast.subtree_weight_.assign(n, 0.0);
    for (auto it = ast.preorder_.rbegin(); it != ast.preorder_.rend(); ++it) {
        NodeId v = *it;
        ast.subtree_weight_[v] += nodes[v].weight;
        if (v != root) {
            ast.subtree_size_[ast.parent_[v]] += ast.subtree_size_[v];
            ast.subtree_weight_[ast.parent_[v]] += ast.subtree_weight_[v];
        }
    }
    ast.nodes_ = std::move(nodes);
    return ast;
}

bool AnnotatedAst::is_ancestor_or_self(NodeId anc, NodeId id) const {
    std::size_t a = pre_index_.at(anc);
    std::size_t b = pre_index_.at(id);
    return a <= b && b < a + subtree_size_[anc];
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ParseError(where + ": unknown field '" + key + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

std::size_t as_id(const json& v, const std::string& field) {
    if (!v.is_number_integer()) throw ParseError("field '" + field + "' must be an integer");
    if (v.is_number_unsigned()) return v.get<std::size_t>();
    auto s = v.get<std::int64_t>();
    if (s < 0) throw ParseError("field '" + field + "' must be nonnegative");
    return static_cast<std::size_t>(s);
}

}  // namespace

AnnotatedAst ast_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("ast: expected a JSON object");
    reject_unknown(j, {"task_id", "root", "nodes"}, "ast");
    const auto& task = require(j, "task_id", "ast");
    if (!task.is_string()) throw ParseError("field 'task_id' must be a string");
    NodeId root = as_id(require(j, "root", "ast"), "root");
    const auto& jnodes = require(j, "nodes", "ast");
    if (!jnodes.is_array()) throw ParseError("field 'nodes' must be an array");

    std::vector<AstNode> nodes;
    nodes.reserve(jnodes.size());
    for (std::size_t i = 0; i < jnodes.size(); ++i) {
        const auto& jn = jnodes[i];
        std::string where = "nodes[" + std::to_string(i) + "]";
        if (!jn.is_object()) throw ParseError(where + ": expected an object");
        reject_unknown(jn, {"id", "label", "children", "weight"}, where);
        AstNode node;
        node.id = as_id(require(jn, "id", where), where + ".id");
        const auto& label = require(jn, "label", where);
        if (!label.is_string()) throw ParseError("field '" + where + ".label' must be a string");
        node.label = label.get<std::string>();
        const auto& ch = require(jn, "children", where);
        if (!ch.is_array()) throw ParseError("field '" + where + ".children' must be an array");
        for (const auto& c : ch) node.children.push_back(as_id(c, where + ".children"));
        const auto& w = require(jn, "weight", where);
        if (!w.is_number()) throw ParseError("field '" + where + ".weight' must be a number");
        node.weight = w.get<double>();
        nodes.push_back(std::move(node));
    }
    // The schema does not require nodes to be listed in id order.
    std::vector<AstNode> ordered(nodes.size());
    std::vector<bool> seen(nodes.size(), false);
    for (auto& node : nodes) {
        if (node.id >= nodes.size())
            throw ValidationError("node ids must be dense 0..n-1; found id " + std::to_string(node.id));
        if (seen[node.id]) throw ValidationError("duplicate node id " + std::to_string(node.id));
        seen[node.id] = true;
        NodeId id = node.id;
        ordered[id] = std::move(node);
    }
    return AnnotatedAst::create(task.get<std::string>(), root, std::move(ordered));
}

AnnotatedAst parse_ast_json(std::string_view bytes) {
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    return ast_from_json(j);
}

json ast_to_json(const AnnotatedAst& ast) {
    json nodes = json::array();
    for (const auto& n : ast.nodes()) {
        nodes.push_back({{"id", n.id}, {"label", n.label}, {"children", n.children}, {"weight", n.weight}});
    }
    return {{"task_id", ast.task_id()}, {"root", ast.root()}, {"nodes", std::move(nodes)}};
}

std::string serialize_ast_json(const AnnotatedAst& ast) { return ast_to_json(ast).dump(); }

double total_weight(const AnnotatedAst& ast) {
    double s = 0.0;
    for (const auto& n : ast.nodes()) s += n.weight;
    return s;
}

NodePath node_path(const AnnotatedAst& ast, NodeId id) {
    if (id >= ast.size()) throw std::out_of_range("node_path: unknown node id " + std::to_string(id));
    NodePath path;
    path.root_label = ast.node(ast.root()).label;
    for (NodeId v = id; !ast.is_root(v); v = ast.parent(v)) path.steps.emplace_back(ast.child_index(v), ast.node(v).label);
    std::reverse(path.steps.begin(), path.steps.end());
    return path;
}

std::string canonical_serialization(const AnnotatedAst& ast) {
    // Pre-order token stream: a JSON-quoted label followed by its child count.
    std::string out;
    for (NodeId v : ast.preorder()) {
        const auto& node = ast.node(v);
        out += json(node.label).dump();
        out += '/';
        out += std::to_string(node.children.size());
        out += ' ';
    }
    return out;
}

}  // namespace ppset
