#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "filtration.hpp"

namespace mhpf {

// {"nodes": [{"id", "members", "birth", "death", "parent", "children"}], "root"}
// Members are trajectory ids; an unbounded death and a missing parent are null.

inline nlohmann::json to_json(const ClusterTree& tree)
{
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes()) {
        nlohmann::json members = nlohmann::json::array();
        for (std::size_t leaf : n.members) {
            members.push_back(tree.leaf_labels()[leaf]);
        }
        nlohmann::json children = nlohmann::json::array();
        for (NodeId c : n.children) {
            children.push_back(index(c));
        }
        nodes.push_back({
            {"id", index(n.id)},
            {"members", std::move(members)},
            {"birth", n.birth},
            {"death", n.death == unbounded ? nlohmann::json(nullptr) : nlohmann::json(n.death)},
            {"parent", n.parent ? nlohmann::json(index(*n.parent)) : nlohmann::json(nullptr)},
            {"children", std::move(children)},
        });
    }
    return {{"nodes", std::move(nodes)}, {"root", index(tree.root())}};
}

inline ClusterTree tree_from_json(const nlohmann::json& j)
{
    try {
        const auto& jnodes = j.at("nodes");
        std::vector<ClusterNode> nodes;
        std::vector<std::string> labels;
        for (const auto& jn : jnodes) {
            ClusterNode n;
            n.id = node_id(jn.at("id").get<std::size_t>());
            n.birth = jn.at("birth").get<double>();
            n.death = jn.at("death").is_null() ? unbounded : jn.at("death").get<double>();
            if (!jn.at("parent").is_null()) {
                n.parent = node_id(jn.at("parent").get<std::size_t>());
            }
            for (const auto& c : jn.at("children")) {
                n.children.push_back(node_id(c.get<std::size_t>()));
            }
            const auto& members = jn.at("members");
            if (n.children.empty()) {
                if (members.size() != 1) {
                    throw invalid_input("leaf node must list exactly one member");
                }
                labels.push_back(members.front().get<std::string>());
                n.members = {index(n.id)};
            }
            nodes.push_back(std::move(n));
        }
        // internal members are recomputed from children, then checked by the tree
        for (auto& n : nodes) {
            if (!n.children.empty()) {
                for (NodeId c : n.children) {
                    if (index(c) >= nodes.size()) {
                        throw invalid_input("child id out of range");
                    }
                    const auto& cm = nodes[index(c)].members;
                    n.members.insert(n.members.end(), cm.begin(), cm.end());
                }
                std::sort(n.members.begin(), n.members.end());
            }
        }
        ClusterTree tree(std::move(nodes), std::move(labels));
        for (const auto& n : tree.nodes()) {
            std::vector<std::string> listed = jnodes.at(index(n.id)).at("members").get<std::vector<std::string>>();
            std::vector<std::string> derived;
            for (std::size_t leaf : n.members) {
                derived.push_back(tree.leaf_labels()[leaf]);
            }
            std::sort(listed.begin(), listed.end());
            std::sort(derived.begin(), derived.end());
            if (listed != derived) {
                throw invalid_input("node " + std::to_string(index(n.id)) + " lists members inconsistent with its children");
            }
        }
        if (index(tree.root()) != j.at("root").get<std::size_t>()) {
            throw invalid_input("declared root does not match parent links");
        }
        return tree;
    } catch (const nlohmann::json::exception& e) {
        throw invalid_input(std::string("malformed tree document: ") + e.what());
    }
}

} // namespace mhpf
