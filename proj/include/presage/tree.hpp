#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "presage/error.hpp"
#include "presage/time.hpp"

namespace presage {

// ---------------------------------------------------------------------------
// Categorical dataset over a declared attribute schema.

struct Attribute {
    std::string name;
    std::vector<std::string> domain;  // declared values; row values index into this
};

struct AttributeSchema {
    std::vector<Attribute> attrs;

    std::size_t size() const { return attrs.size(); }

    int value_index(std::size_t attr, const std::string& value) const {
        const auto& dom = attrs[attr].domain;
        auto it = std::find(dom.begin(), dom.end(), value);
        require(it != dom.end(), Errc::invalid_argument,
                "value '" + value + "' outside domain of attribute " + attrs[attr].name);
        return static_cast<int>(it - dom.begin());
    }

    bool operator==(const AttributeSchema&) const = default;
};

inline bool operator==(const Attribute& a, const Attribute& b) {
    return a.name == b.name && a.domain == b.domain;
}

struct DataRow {
    std::vector<int> values;  // one per schema attribute
    int target = 0;
};

struct Dataset {
    AttributeSchema schema;
    std::size_t target_arity = 2;
    std::vector<DataRow> rows;

    void validate() const {
        require(target_arity >= 2, Errc::invalid_argument, "target arity must be >= 2");
        for (const auto& row : rows) {
            require(row.values.size() == schema.size(), Errc::invalid_argument,
                    "row width does not match schema");
            for (std::size_t a = 0; a < row.values.size(); ++a)
                require(row.values[a] >= 0 &&
                            row.values[a] < static_cast<int>(schema.attrs[a].domain.size()),
                        Errc::invalid_argument, "row value outside declared domain");
            require(row.target >= 0 && row.target < static_cast<int>(target_arity),
                    Errc::invalid_argument, "target outside declared arity");
        }
    }
};

// ---------------------------------------------------------------------------
// Dirichlet-multinomial leaf score:
//   log[ G(a)/G(a+n) * prod_k G(a_k+n_k)/G(a_k) ],  a_k = alpha_total/K.

inline double leaf_score(std::span<const std::int64_t> counts, double alpha_total) {
    require(alpha_total > 0.0, Errc::invalid_argument, "alpha_total must be positive");
    require(!counts.empty(), Errc::invalid_argument, "leaf score needs class counts");
    double alpha_k = alpha_total / static_cast<double>(counts.size());
    std::int64_t n = 0;
    double score = 0.0;
    for (std::int64_t c : counts) {
        require(c >= 0, Errc::invalid_argument, "negative class count");
        n += c;
        score += std::lgamma(alpha_k + static_cast<double>(c)) - std::lgamma(alpha_k);
    }
    score += std::lgamma(alpha_total) - std::lgamma(alpha_total + static_cast<double>(n));
    return score;
}

// ---------------------------------------------------------------------------
// Decision tree: internal nodes split on one categorical attribute with one
// child per declared value; leaves hold class counts.

struct TreeNode {
    int split_attr = -1;                 // -1 for leaves
    std::vector<int> children;           // child node index per attribute value
    std::vector<std::int64_t> counts;    // class counts of rows routed here

    bool is_leaf() const { return split_attr < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    AttributeSchema schema;
    std::size_t target_arity = 2;
    double alpha_total = 2.0;
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    bool operator==(const DecisionTree&) const = default;

    const TreeNode& route(std::span<const int> values) const {
        require(values.size() == schema.size(), Errc::invalid_argument,
                "attribute vector does not match schema");
        for (std::size_t a = 0; a < values.size(); ++a)
            require(values[a] >= 0 &&
                        values[a] < static_cast<int>(schema.attrs[a].domain.size()),
                    Errc::invalid_argument, "attribute value outside declared domain");
        std::size_t at = 0;
        while (!nodes[at].is_leaf())
            at = static_cast<std::size_t>(
                nodes[at].children[static_cast<std::size_t>(values[nodes[at].split_attr])]);
        return nodes[at];
    }

    double total_score() const {
        double s = 0.0;
        for (const auto& n : nodes)
            if (n.is_leaf()) s += leaf_score(n.counts, alpha_total);
        return s;
    }
};

namespace detail {

struct GrowConfig {
    double alpha_total = 2.0;
    std::size_t min_leaf = 5;
};

inline std::vector<std::int64_t> tally(const Dataset& data, std::span<const std::size_t> rows) {
    std::vector<std::int64_t> counts(data.target_arity, 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(data.rows[r].target)];
    return counts;
}

// Best single split at a node, or nullopt when no admissible split strictly
// beats the leaf score. Ties break toward the earliest attribute in schema
// order.
inline std::optional<std::pair<std::size_t, double>> best_split(
    const Dataset& data, std::span<const std::size_t> rows, const std::vector<bool>& used,
    const GrowConfig& cfg) {
    double base = leaf_score(tally(data, rows), cfg.alpha_total);
    std::optional<std::pair<std::size_t, double>> best;
    for (std::size_t a = 0; a < data.schema.size(); ++a) {
        if (used[a]) continue;
        std::size_t arity = data.schema.attrs[a].domain.size();
        if (arity < 2) continue;
        std::vector<std::vector<std::int64_t>> child_counts(
            arity, std::vector<std::int64_t>(data.target_arity, 0));
        std::vector<std::size_t> child_sizes(arity, 0);
        for (std::size_t r : rows) {
            auto v = static_cast<std::size_t>(data.rows[r].values[a]);
            ++child_counts[v][static_cast<std::size_t>(data.rows[r].target)];
            ++child_sizes[v];
        }
        bool admissible = true;
        for (std::size_t v = 0; v < arity; ++v)
            if (child_sizes[v] < cfg.min_leaf) {
                admissible = false;
                break;
            }
        if (!admissible) continue;
        double sum = 0.0;
        for (const auto& cc : child_counts) sum += leaf_score(cc, cfg.alpha_total);
        if (sum > base && (!best || sum > best->second)) best = {a, sum};
    }
    return best;
}

inline int grow(const Dataset& data, std::vector<std::size_t> rows, std::vector<bool> used,
                const GrowConfig& cfg, std::vector<TreeNode>& nodes) {
    int self = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[static_cast<std::size_t>(self)].counts = tally(data, rows);

    auto split = best_split(data, rows, used, cfg);
    if (!split) return self;

    std::size_t attr = split->first;
    std::size_t arity = data.schema.attrs[attr].domain.size();
    std::vector<std::vector<std::size_t>> partition(arity);
    for (std::size_t r : rows) partition[static_cast<std::size_t>(data.rows[r].values[attr])].push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    used[attr] = true;
    nodes[static_cast<std::size_t>(self)].split_attr = static_cast<int>(attr);
    nodes[static_cast<std::size_t>(self)].children.resize(arity, -1);
    for (std::size_t v = 0; v < arity; ++v) {
        int child = grow(data, std::move(partition[v]), used, cfg, nodes);
        nodes[static_cast<std::size_t>(self)].children[v] = child;
    }
    return self;
}

}  // namespace detail

// Greedy top-down growth under the Bayesian score: split only when the best
// child-score sum strictly exceeds the node's own leaf score and every child
// receives at least `min_leaf` rows.
inline DecisionTree learn_tree(const Dataset& data, double alpha_total, std::size_t min_leaf) {
    data.validate();
    require(!data.rows.empty(), Errc::invalid_argument, "cannot learn from an empty dataset");
    require(alpha_total > 0.0, Errc::invalid_argument, "alpha_total must be positive");

    DecisionTree tree;
    tree.schema = data.schema;
    tree.target_arity = data.target_arity;
    tree.alpha_total = alpha_total;

    std::vector<std::size_t> all(data.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    detail::grow(data, std::move(all), std::vector<bool>(data.schema.size(), false),
                 {alpha_total, min_leaf}, tree.nodes);
    return tree;
}

// Posterior-smoothed class distribution at the routed leaf:
// p_k = (n_k + alpha_k) / (n + alpha_total).
inline std::vector<double> predict_distribution(const DecisionTree& tree,
                                                std::span<const int> values) {
    const TreeNode& leaf = tree.route(values);
    double alpha_k = tree.alpha_total / static_cast<double>(tree.target_arity);
    std::int64_t n = 0;
    for (std::int64_t c : leaf.counts) n += c;
    std::vector<double> p(tree.target_arity);
    for (std::size_t k = 0; k < p.size(); ++k)
        p[k] = (static_cast<double>(leaf.counts[k]) + alpha_k) /
               (static_cast<double>(n) + tree.alpha_total);
    return p;
}

struct HoldoutMetrics {
    double accuracy = 0.0;
    double mean_log_loss = 0.0;
    std::size_t n = 0;
};

inline HoldoutMetrics evaluate_holdout(const DecisionTree& tree, const Dataset& holdout) {
    require(!holdout.rows.empty(), Errc::invalid_argument, "empty holdout set");
    require(holdout.schema == tree.schema && holdout.target_arity == tree.target_arity,
            Errc::invalid_argument, "holdout schema does not match tree");
    std::size_t correct = 0;
    double loss = 0.0;
    for (const auto& row : holdout.rows) {
        auto p = predict_distribution(tree, row.values);
        std::size_t argmax = 0;
        for (std::size_t k = 1; k < p.size(); ++k)
            if (p[k] > p[argmax]) argmax = k;  // ties keep the lowest class index
        if (static_cast<int>(argmax) == row.target) ++correct;
        loss += -std::log(p[static_cast<std::size_t>(row.target)]);
    }
    HoldoutMetrics m;
    m.n = holdout.rows.size();
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
    m.mean_log_loss = loss / static_cast<double>(m.n);
    return m;
}

// ---------------------------------------------------------------------------
// Duration binning: half-open bins [0,e1), [e1,e2), ..., plus a final open
// bin beyond the last edge.

struct DurationBinning {
    std::vector<std::int64_t> edges_min;  // strictly increasing, first > 0

    void validate() const {
        require(!edges_min.empty(), Errc::invalid_config, "binning needs at least one edge");
        require(edges_min.front() > 0, Errc::invalid_config, "first bin edge must be positive");
        for (std::size_t i = 1; i < edges_min.size(); ++i)
            require(edges_min[i] > edges_min[i - 1], Errc::invalid_config,
                    "bin edges must strictly increase");
    }

    std::size_t num_bins() const { return edges_min.size() + 1; }

    std::size_t bin_of(Duration wait) const {
        std::size_t i = 0;
        while (i < edges_min.size() && wait.seconds >= edges_min[i] * 60) ++i;
        return i;
    }
};

inline std::size_t bin_duration(Duration wait, const DurationBinning& binning) {
    return binning.bin_of(wait);
}

// ---------------------------------------------------------------------------
// Line-record model file: a header line followed by one line per node.

inline void serialize_tree(const DecisionTree& tree, std::ostream& out) {
    nlohmann::json schema = nlohmann::json::array();
    for (const auto& a : tree.schema.attrs)
        schema.push_back({{"name", a.name}, {"domain", a.domain}});
    out << nlohmann::json{{"record", "tree_header"},
                          {"target_arity", tree.target_arity},
                          {"alpha_total", tree.alpha_total},
                          {"schema", schema},
                          {"nodes", tree.nodes.size()}}
               .dump()
        << '\n';
    for (const auto& n : tree.nodes)
        out << nlohmann::json{{"record", "tree_node"},
                              {"split", n.split_attr},
                              {"children", n.children},
                              {"counts", n.counts}}
                   .dump()
            << '\n';
}

inline DecisionTree deserialize_tree(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), Errc::parse_error, "empty model file");
    nlohmann::json header = nlohmann::json::parse(line);
    require(header.value("record", "") == "tree_header", Errc::parse_error,
            "model file does not start with a tree header");

    DecisionTree tree;
    tree.target_arity = header.at("target_arity").get<std::size_t>();
    tree.alpha_total = header.at("alpha_total").get<double>();
    for (const auto& a : header.at("schema")) {
        tree.schema.attrs.push_back(
            {a.at("name").get<std::string>(), a.at("domain").get<std::vector<std::string>>()});
    }
    std::size_t n_nodes = header.at("nodes").get<std::size_t>();
    for (std::size_t i = 0; i < n_nodes; ++i) {
        require(static_cast<bool>(std::getline(in, line)), Errc::parse_error,
                "model file truncated");
        nlohmann::json j = nlohmann::json::parse(line);
        TreeNode node;
        node.split_attr = j.at("split").get<int>();
        node.children = j.at("children").get<std::vector<int>>();
        node.counts = j.at("counts").get<std::vector<std::int64_t>>();
        tree.nodes.push_back(std::move(node));
    }
    return tree;
}

}  // namespace presage
