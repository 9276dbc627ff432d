#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace gauntlet::cart {

struct Sample {
    std::vector<double> x;
    int y = 0; // 0 benign, 1 malicious
};

struct Node {
    bool leaf = true;
    int label = 0;
    int feature = -1;
    double threshold = 0.0; // go left iff x[feature] <= threshold
    int left = -1;
    int right = -1;
};

/// Binary classification tree, Gini-grown, depth-capped. All tie-breaks are
/// deterministic: lowest feature index first, then lowest threshold, and the
/// caller is expected to order features lexicographically by id.
struct Tree {
    std::vector<Node> nodes; // nodes[0] is the root
    std::vector<std::string> feature_names;

    int predict(const std::vector<double>& x) const;
};

Tree train_tree(const std::vector<Sample>& samples, const std::vector<std::string>& feature_names,
                int max_depth = 8);

nlohmann::json tree_to_json(const Tree& t);
Tree tree_from_json(const nlohmann::json& j);

} // namespace gauntlet::cart
