#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ppset {

using NodeId = std::size_t;

struct AstNode {
    NodeId id = 0;
    std::string label;
    std::vector<NodeId> children;
    double weight = 0.0;  // nats: negative log probability given the ancestors

    bool operator==(const AstNode&) const = default;
};

// Root-to-node identity used to match nodes across different trees.
// `root_label` names the root; each step is (child index, child label).
struct NodePath {
    std::string root_label;
    std::vector<std::pair<std::size_t, std::string>> steps;

    bool operator==(const NodePath&) const = default;
    auto operator<=>(const NodePath&) const = default;
};

/**
 * Rooted ordered labeled tree whose nodes carry uncertainty weights.
 *
 * Instances are only obtainable through `create` (or the JSON parser), which
 * validates the tree invariants: dense ids 0..n-1, a single root, every other
 * node reachable with exactly one parent, finite nonnegative weights.  Once
 * built the tree is immutable and safe to share across threads.
 */
class AnnotatedAst {
public:
    static AnnotatedAst create(std::string task_id, NodeId root, std::vector<AstNode> nodes);

    const std::string& task_id() const { return task_id_; }
    NodeId root() const { return root_; }
    std::size_t size() const { return nodes_.size(); }
    const AstNode& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<AstNode>& nodes() const { return nodes_; }

    // Parent of `id`; the root is its own parent.
    NodeId parent(NodeId id) const { return parent_.at(id); }
    bool is_root(NodeId id) const { return id == root_; }
    // Position of `id` among its parent's children (0 for the root).
    std::size_t child_index(NodeId id) const { return child_index_.at(id); }
    // Nodes in pre-order (parents before children, children in order).
    const std::vector<NodeId>& preorder() const { return preorder_; }
    std::size_t subtree_size(NodeId id) const { return subtree_size_.at(id); }
    double subtree_weight(NodeId id) const { return subtree_weight_.at(id); }
    // True when `anc` lies on the path from the root to `id` (inclusive).
    bool is_ancestor_or_self(NodeId anc, NodeId id) const;

    bool operator==(const AnnotatedAst& o) const {
        return task_id_ == o.task_id_ && root_ == o.root_ && nodes_ == o.nodes_;
    }

private:
    AnnotatedAst() = default;

    std::string task_id_;
    NodeId root_ = 0;
    std::vector<AstNode> nodes_;
    std::vector<NodeId> parent_;
    std::vector<std::size_t> child_index_;
    std::vector<NodeId> preorder_;
    std::vector<std::size_t> pre_index_;
    std::vector<std::size_t> subtree_size_;
    std::vector<double> subtree_weight_;
};

AnnotatedAst parse_ast_json(std::string_view bytes);
AnnotatedAst ast_from_json(const nlohmann::json& j);
nlohmann::json ast_to_json(const AnnotatedAst& ast);
std::string serialize_ast_json(const AnnotatedAst& ast);

// Sum of node weights, accumulated in node-id order.
double total_weight(const AnnotatedAst& ast);

NodePath node_path(const AnnotatedAst& ast, NodeId id);

// Shape-and-label fingerprint; weights and task id do not participate.
std::string canonical_serialization(const AnnotatedAst& ast);

}  // namespace ppset
