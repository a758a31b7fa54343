#pragma once

#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include "ppset/ast.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) { return std::string(PPSET_FIXTURES) + "/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline ppset::AnnotatedAst tiny() { return ppset::parse_ast_json(slurp(fixture("tiny.json"))); }

// Builds a tree from (label, weight, children) triples indexed by id; node 0 is the root.
struct NodeDef {
    std::string label;
    double weight;
    std::vector<ppset::NodeId> children;
};

inline ppset::AnnotatedAst tree(const std::string& task, const std::vector<NodeDef>& defs) {
    std::vector<ppset::AstNode> nodes;
    for (ppset::NodeId i = 0; i < defs.size(); ++i)
        nodes.push_back(ppset::AstNode{i, defs[i].label, defs[i].children, defs[i].weight});
    return ppset::AnnotatedAst::create(task, 0, std::move(nodes));
}

}  // namespace testutil
