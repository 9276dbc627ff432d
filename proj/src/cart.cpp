#include "gauntlet/cart.hpp"

#include "gauntlet/errors.hpp"

#include <algorithm>
#include <set>

namespace gauntlet::cart {

namespace {

double gini(int n_pos, int n) {
    if (n == 0)
        return 0.0;
    double p = static_cast<double>(n_pos) / n;
    return 2.0 * p * (1.0 - p);
}

int majority_label(const std::vector<Sample>& samples, const std::vector<int>& idx) {
    int pos = 0;
    for (int i : idx)
        pos += samples[i].y;
    // tie goes to benign
    return 2 * pos > static_cast<int>(idx.size()) ? 1 : 0;
}

struct Split {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

Split best_split(const std::vector<Sample>& samples, const std::vector<int>& idx,
                 size_t n_features) {
    Split best;
    const int n = static_cast<int>(idx.size());
    int total_pos = 0;
    for (int i : idx)
        total_pos += samples[i].y;
    for (size_t f = 0; f < n_features; ++f) {
        std::vector<std::pair<double, int>> vals;
        vals.reserve(idx.size());
        for (int i : idx)
            vals.emplace_back(samples[i].x[f], samples[i].y);
        std::sort(vals.begin(), vals.end());
        int left_n = 0;
        int left_pos = 0;
        for (int k = 0; k + 1 < n; ++k) {
            ++left_n;
            left_pos += vals[static_cast<size_t>(k)].second;
            double v = vals[static_cast<size_t>(k)].first;
            double next = vals[static_cast<size_t>(k) + 1].first;
            if (v == next)
                continue;
            double threshold = (v + next) / 2.0;
            int right_n = n - left_n;
            int right_pos = total_pos - left_pos;
            double impurity = (left_n * gini(left_pos, left_n) + right_n * gini(right_pos, right_n)) / n;
            // strict improvement keeps the earliest (lexicographically first
            // feature, lowest threshold) candidate on ties
            if (!best.found || impurity < best.impurity) {
                best = {true, static_cast<int>(f), threshold, impurity};
            }
        }
    }
    return best;
}

int grow(Tree& t, const std::vector<Sample>& samples, const std::vector<int>& idx, int depth,
         int max_depth) {
    int node_id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[static_cast<size_t>(node_id)].label = majority_label(samples, idx);

    int pos = 0;
    for (int i : idx)
        pos += samples[i].y;
    bool pure = pos == 0 || pos == static_cast<int>(idx.size());
    if (pure || depth >= max_depth || idx.size() < 2)
        return node_id;

    Split split = best_split(samples, idx, t.feature_names.size());
    if (!split.found)
        return node_id;
    double parent = gini(pos, static_cast<int>(idx.size()));
    if (split.impurity >= parent)
        return node_id;

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
        if (samples[i].x[static_cast<size_t>(split.feature)] <= split.threshold)
            left_idx.push_back(i);
        else
            right_idx.push_back(i);
    }
    int left = grow(t, samples, left_idx, depth + 1, max_depth);
    int right = grow(t, samples, right_idx, depth + 1, max_depth);
    Node& node = t.nodes[static_cast<size_t>(node_id)];
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return node_id;
}

} // namespace

int Tree::predict(const std::vector<double>& x) const {
    if (nodes.empty())
        return 0;
    int cur = 0;
    while (!nodes[static_cast<size_t>(cur)].leaf) {
        const Node& n = nodes[static_cast<size_t>(cur)];
        cur = x[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<size_t>(cur)].label;
}

Tree train_tree(const std::vector<Sample>& samples, const std::vector<std::string>& feature_names,
                int max_depth) {
    if (samples.empty())
        throw Error(ErrorKind::InsufficientData, "cannot train a tree on zero samples");
    for (const auto& s : samples)
        if (s.x.size() != feature_names.size())
            throw Error(ErrorKind::InvalidSpec, "sample arity does not match feature names");
    Tree t;
    t.feature_names = feature_names;
    std::vector<int> idx(samples.size());
    for (size_t i = 0; i < samples.size(); ++i)
        idx[i] = static_cast<int>(i);
    grow(t, samples, idx, 0, max_depth);
    return t;
}

nlohmann::json tree_to_json(const Tree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
        nodes.push_back({{"leaf", n.leaf},
                         {"label", n.label},
                         {"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right}});
    }
    return {{"feature_names", t.feature_names}, {"nodes", nodes}};
}

Tree tree_from_json(const nlohmann::json& j) {
    Tree t;
    t.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& n : j.at("nodes")) {
        Node node;
        node.leaf = n.at("leaf").get<bool>();
        node.label = n.at("label").get<int>();
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        t.nodes.push_back(node);
    }
    return t;
}

} // namespace gauntlet::cart
