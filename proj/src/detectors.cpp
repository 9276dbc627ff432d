#include "gauntlet/detectors.hpp"

#include "gauntlet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gauntlet::detectors {

namespace {

std::string short_name(const std::string& constant) {
    const std::string prefix = "android.permission.";
    if (constant.rfind(prefix, 0) == 0)
        return constant.substr(prefix.size());
    return constant;
}

std::set<std::string> short_names(const std::set<std::string>& perms) {
    std::set<std::string> out;
    for (const auto& p : perms)
        out.insert(short_name(p));
    return out;
}

using Aliases = std::vector<std::string>;

bool has_any(const std::set<std::string>& perms, const Aliases& aliases) {
    return std::any_of(aliases.begin(), aliases.end(),
                       [&](const std::string& a) { return perms.count(a) > 0; });
}

// Security rules 1..9; spelling variants of the same label are accepted.
const std::vector<std::vector<Aliases>> kKirinRules = {
    {{"SET_DEBUG_APP"}},
    {{"PHONE_STATE", "READ_PHONE_STATE"}, {"RECORD_AUDIO"}, {"INTERNET"}},
    {{"PROCESS_OUTGOING_CALL", "PROCESS_OUTGOING_CALLS"}, {"RECORD_AUDIO"}, {"INTERNET"}},
    {{"ACCESS_FINE_LOCATION"}, {"INTERNET"}, {"RECEIVE_BOOT_COMPLETE", "RECEIVE_BOOT_COMPLETED"}},
    {{"ACCESS_COARSE_LOCATION"},
     {"INTERNET"},
     {"RECEIVE_BOOT_COMPLETE", "RECEIVE_BOOT_COMPLETED"}},
    {{"RECEIVE_SMS"}, {"WRITE_SMS"}},
    {{"SEND_SMS"}, {"WRITE_SMS"}},
    {{"INSTALL_SHORTCUT"}, {"UNINSTALL_SHORTCUT"}},
    {{"SET_PREFERRED_APPLICATION", "SET_PREFERRED_APPLICATIONS"}},
};

constexpr const char* kCallAction = "android.intent.action.CALL";

void require_both_labels(const std::vector<bundle::Bundle>& train) {
    bool benign = false;
    bool malicious = false;
    for (const auto& b : train) {
        if (b.label == bundle::Label::Malicious)
            malicious = true;
        else
            benign = true;
    }
    if (!benign || !malicious)
        throw Error(ErrorKind::DegenerateTraining, "training set holds a single class");
}

std::set<std::string> perm_set(const bundle::Bundle& b, const DataTables& tables) {
    auto perms = features::legacy_permissions(b, tables);
    return {perms.begin(), perms.end()};
}

std::vector<double> famous_vector(const std::set<std::string>& perms,
                                  const std::map<std::string, double>& emsp,
                                  const std::vector<std::string>& universe) {
    std::vector<double> x;
    x.reserve(universe.size() + 1);
    double ms = 0.0;
    for (const auto& p : universe) {
        double v = 0.0;
        if (perms.count(p)) {
            auto it = emsp.find(p);
            v = it == emsp.end() ? 0.0 : it->second;
            ms += v;
        }
        x.push_back(v);
    }
    x.push_back(ms);
    return x;
}

double entropy(int pos, int n) {
    if (n == 0 || pos == 0 || pos == n)
        return 0.0;
    double p = static_cast<double>(pos) / n;
    return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

size_t nearest_centroid(const std::vector<std::vector<double>>& centroids,
                        const std::vector<double>& x) {
    size_t best = 0;
    double best_d = sq_dist(centroids[0], x);
    for (size_t c = 1; c < centroids.size(); ++c) {
        double d = sq_dist(centroids[c], x);
        if (d < best_d) { // strict: ties keep the lower index
            best_d = d;
            best = c;
        }
    }
    return best;
}

nlohmann::json weights_to_json(const std::map<std::string, double>& w) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : w)
        j[k] = v;
    return j;
}

std::map<std::string, double> weights_from_json(const nlohmann::json& j) {
    std::map<std::string, double> w;
    for (auto it = j.begin(); it != j.end(); ++it)
        w[it.key()] = it.value().get<double>();
    return w;
}

void check_format_version(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw Error(ErrorKind::ParseError, "unsupported model format version");
}

} // namespace

// ---------------------------------------------------------------- Kirin

KirinVerdict kirin_classify(const std::set<std::string>& perms,
                            const std::set<std::string>& intent_actions) {
    std::set<std::string> p = short_names(perms);
    KirinVerdict v;
    for (size_t i = 0; i < kKirinRules.size(); ++i) {
        bool hit = std::all_of(kKirinRules[i].begin(), kKirinRules[i].end(),
                               [&](const Aliases& a) { return has_any(p, a); });
        if (i + 1 == 9)
            hit = hit && intent_actions.count(kCallAction) > 0;
        if (hit)
            v.triggered_rules.push_back(static_cast<int>(i) + 1);
    }
    v.malicious = !v.triggered_rules.empty();
    return v;
}

KirinVerdict kirin_classify(const bundle::Bundle& b, const DataTables& tables) {
    auto actions = b.manifest_doc.intent_actions();
    return kirin_classify(perm_set(b, tables), {actions.begin(), actions.end()});
}

// ---------------------------------------------------------------- Drebin

DrebinModel drebin_train(const std::vector<bundle::Bundle>& train, uint64_t seed,
                         const DataTables& tables) {
    require_both_labels(train);

    std::map<std::string, size_t> feature_index;
    std::vector<std::vector<size_t>> rows; // feature indices per bundle
    std::vector<int> labels;               // +1 malicious, -1 benign
    for (const auto& b : train) {
        std::vector<size_t> row;
        for (const auto& obs : features::drebin_observations(b, tables)) {
            auto [it, inserted] = feature_index.try_emplace(obs.feature, feature_index.size());
            row.push_back(it->second);
        }
        rows.push_back(std::move(row));
        labels.push_back(b.label == bundle::Label::Malicious ? 1 : -1);
    }

    std::vector<double> w(feature_index.size(), 0.0);
    const int epochs = 60;
    const double lambda = 1e-4;
    std::mt19937_64 rng(seed);
    std::vector<size_t> order(rows.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double lr = 0.5 / (1.0 + epoch);
        for (size_t i : order) {
            double score = 0.0;
            for (size_t f : rows[i])
                score += w[f];
            for (double& wf : w)
                wf *= (1.0 - lr * lambda);
            if (labels[i] * score < 1.0) {
                for (size_t f : rows[i])
                    w[f] += lr * labels[i];
            }
        }
    }

    DrebinModel m;
    for (const auto& [feature, idx] : feature_index)
        if (w[idx] != 0.0)
            m.weights[feature] = w[idx];

    double max_benign = 0.0;
    bool seen_benign = false;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (labels[i] == 1)
            continue;
        double score = 0.0;
        for (size_t f : rows[i])
            score += w[f];
        if (!seen_benign || score > max_benign)
            max_benign = score;
        seen_benign = true;
    }
    m.threshold = max_benign;
    return m;
}

DrebinReport drebin_classify(const DrebinModel& m, const bundle::Bundle& b,
                             const DataTables& tables) {
    DrebinReport r;
    r.original_label = b.label == bundle::Label::Malicious ? 1 : -1;
    r.observations = features::drebin_observations(b, tables);
    for (auto& obs : r.observations) {
        auto it = m.weights.find(obs.feature);
        obs.weight = it == m.weights.end() ? 0.0 : it->second;
        r.score += obs.weight;
    }
    r.predicted_label = r.score > m.threshold ? 1 : -1;
    return r;
}

nlohmann::json drebin_report_to_json(const DrebinReport& r) {
    static const features::DrebinCategory kCategories[] = {
        features::DrebinCategory::IntentActionList,
        features::DrebinCategory::ServiceList,
        features::DrebinCategory::ActivityList,
        features::DrebinCategory::BroadcastReceiverList,
        features::DrebinCategory::RequestedPermissionList,
        features::DrebinCategory::SuspiciousApiList,
        features::DrebinCategory::RestrictedApiList,
        features::DrebinCategory::UsedPermissionsList,
        features::DrebinCategory::URLDomainList,
    };
    nlohmann::json j;
    j["original label"] = r.original_label;
    j["predicted label"] = r.predicted_label;
    j["score"] = r.score;
    for (auto cat : kCategories) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& obs : r.observations)
            if (obs.category == cat)
                arr.push_back({obs.feature, obs.weight});
        j[features::to_string(cat)] = arr;
    }
    return j;
}

nlohmann::json drebin_model_to_json(const DrebinModel& m) {
    return {{"format_version", 1},
            {"kind", "drebin"},
            {"weights", weights_to_json(m.weights)},
            {"threshold", m.threshold}};
}

DrebinModel drebin_model_from_json(const nlohmann::json& j) {
    check_format_version(j);
    DrebinModel m;
    m.weights = weights_from_json(j.at("weights"));
    m.threshold = j.at("threshold").get<double>();
    return m;
}

// ---------------------------------------------------------------- FAMOUS

FamousModel famous_train(const std::vector<bundle::Bundle>& train, const DataTables& tables) {
    require_both_labels(train);
    const auto& universe = tables.permission_universe();

    int n_mal = 0;
    int n_ben = 0;
    std::map<std::string, int> pum, pub;
    std::vector<std::set<std::string>> perm_sets;
    for (const auto& b : train) {
        auto perms = perm_set(b, tables);
        bool malicious = b.label == bundle::Label::Malicious;
        (malicious ? n_mal : n_ben)++;
        for (const auto& p : perms)
            (malicious ? pum[p] : pub[p])++;
        perm_sets.push_back(std::move(perms));
    }

    FamousModel m;
    for (const auto& p : universe) {
        double msp = static_cast<double>(pum[p]) / n_mal;
        double bsp = static_cast<double>(pub[p]) / n_ben;
        m.emsp[p] = msp - bsp;
    }

    std::vector<cart::Sample> samples;
    for (size_t i = 0; i < train.size(); ++i) {
        cart::Sample s;
        s.x = famous_vector(perm_sets[i], m.emsp, universe);
        s.y = train[i].label == bundle::Label::Malicious ? 1 : 0;
        samples.push_back(std::move(s));
    }
    std::vector<std::string> names = universe;
    names.push_back("MS");
    m.classifier = cart::train_tree(samples, names, 8);
    return m;
}

bool famous_classify(const FamousModel& m, const bundle::Bundle& b, const DataTables& tables) {
    std::vector<std::string> universe(m.classifier.feature_names.begin(),
                                      m.classifier.feature_names.end() - 1);
    auto x = famous_vector(perm_set(b, tables), m.emsp, universe);
    return m.classifier.predict(x) == 1;
}

nlohmann::json famous_model_to_json(const FamousModel& m) {
    return {{"format_version", 1},
            {"kind", "famous"},
            {"emsp", weights_to_json(m.emsp)},
            {"classifier", cart::tree_to_json(m.classifier)}};
}

FamousModel famous_model_from_json(const nlohmann::json& j) {
    check_format_version(j);
    FamousModel m;
    m.emsp = weights_from_json(j.at("emsp"));
    m.classifier = cart::tree_from_json(j.at("classifier"));
    return m;
}

// ---------------------------------------------------------------- PB-AMD

PbamdModel pbamd_train(const std::vector<bundle::Bundle>& train, uint64_t seed, int n_features,
                       const DataTables& tables) {
    require_both_labels(train);
    const auto& universe = tables.permission_universe();

    std::vector<std::set<std::string>> perm_sets;
    std::vector<int> labels;
    int total_pos = 0;
    for (const auto& b : train) {
        perm_sets.push_back(perm_set(b, tables));
        int y = b.label == bundle::Label::Malicious ? 1 : 0;
        labels.push_back(y);
        total_pos += y;
    }
    const int n = static_cast<int>(train.size());

    // information gain per binary permission feature
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& p : universe) {
        int with = 0;
        int with_pos = 0;
        for (int i = 0; i < n; ++i) {
            if (perm_sets[static_cast<size_t>(i)].count(p)) {
                ++with;
                with_pos += labels[static_cast<size_t>(i)];
            }
        }
        int without = n - with;
        int without_pos = total_pos - with_pos;
        double gain = entropy(total_pos, n) -
                      (static_cast<double>(with) / n) * entropy(with_pos, with) -
                      (static_cast<double>(without) / n) * entropy(without_pos, without);
        ranked.emplace_back(-gain, p); // lexicographic tie-break via pair order
    }
    std::sort(ranked.begin(), ranked.end());

    PbamdModel m;
    for (const auto& [neg_gain, p] : ranked) {
        if (static_cast<int>(m.selected_features.size()) >= n_features)
            break;
        m.selected_features.push_back(p);
    }

    std::vector<std::vector<double>> points;
    for (const auto& perms : perm_sets) {
        std::vector<double> x;
        x.reserve(m.selected_features.size());
        for (const auto& p : m.selected_features)
            x.push_back(perms.count(p) ? 1.0 : 0.0);
        points.push_back(std::move(x));
    }

    // k = 2, farthest-point init from a seeded uniform pick
    std::mt19937_64 rng(seed);
    size_t first = std::uniform_int_distribution<size_t>(0, points.size() - 1)(rng);
    size_t second = 0;
    double best_d = -1.0;
    for (size_t i = 0; i < points.size(); ++i) {
        double d = sq_dist(points[first], points[i]);
        if (d > best_d) {
            best_d = d;
            second = i;
        }
    }
    m.centroids = {points[first], points[second]};

    std::vector<size_t> assign(points.size(), 0);
    for (int iter = 0; iter < 50; ++iter) {
        bool changed = false;
        for (size_t i = 0; i < points.size(); ++i) {
            size_t c = nearest_centroid(m.centroids, points[i]);
            if (c != assign[i]) {
                assign[i] = c;
                changed = true;
            }
        }
        for (size_t c = 0; c < 2; ++c) {
            std::vector<double> mean(m.selected_features.size(), 0.0);
            int count = 0;
            for (size_t i = 0; i < points.size(); ++i) {
                if (assign[i] != c)
                    continue;
                ++count;
                for (size_t f = 0; f < mean.size(); ++f)
                    mean[f] += points[i][f];
            }
            if (count == 0)
                continue; // empty cluster keeps its old centroid
            for (double& v : mean)
                v /= count;
            m.centroids[c] = std::move(mean);
        }
        if (!changed && iter > 0)
            break;
    }

    for (size_t c = 0; c < 2; ++c) {
        std::vector<cart::Sample> samples;
        for (size_t i = 0; i < points.size(); ++i)
            if (assign[i] == c)
                samples.push_back({points[i], labels[i]});
        if (samples.empty()) {
            // degenerate cluster: fall back to a tree over everything
            for (size_t i = 0; i < points.size(); ++i)
                samples.push_back({points[i], labels[i]});
        }
        m.trees.push_back(cart::train_tree(samples, m.selected_features, 8));
    }
    return m;
}

bool pbamd_classify(const PbamdModel& m, const bundle::Bundle& b, const DataTables& tables) {
    auto perms = perm_set(b, tables);
    std::vector<double> x;
    x.reserve(m.selected_features.size());
    for (const auto& p : m.selected_features)
        x.push_back(perms.count(p) ? 1.0 : 0.0);
    size_t c = nearest_centroid(m.centroids, x);
    return m.trees[c].predict(x) == 1;
}

nlohmann::json pbamd_model_to_json(const PbamdModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees)
        trees.push_back(cart::tree_to_json(t));
    return {{"format_version", 1},
            {"kind", "pbamd"},
            {"selected_features", m.selected_features},
            {"centroids", m.centroids},
            {"trees", trees}};
}

PbamdModel pbamd_model_from_json(const nlohmann::json& j) {
    check_format_version(j);
    PbamdModel m;
    m.selected_features = j.at("selected_features").get<std::vector<std::string>>();
    m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    for (const auto& t : j.at("trees"))
        m.trees.push_back(cart::tree_from_json(t));
    return m;
}

// ---------------------------------------------------------------- facade

namespace {

class KirinDetector final : public Detector {
public:
    const std::string& name() const override {
        static const std::string n = "kirin";
        return n;
    }
    void train(const std::vector<bundle::Bundle>&) override {}
    bool classify(const bundle::Bundle& b) const override {
        return kirin_classify(b).malicious;
    }
};

class DrebinDetector final : public Detector {
public:
    explicit DrebinDetector(uint64_t seed) : seed_(seed) {}
    const std::string& name() const override {
        static const std::string n = "drebin";
        return n;
    }
    void train(const std::vector<bundle::Bundle>& train) override {
        model_ = drebin_train(train, seed_);
        trained_ = true;
    }
    bool classify(const bundle::Bundle& b) const override {
        if (!trained_)
            throw Error(ErrorKind::DegenerateTraining, "drebin used before training");
        return drebin_classify(model_, b).predicted_label == 1;
    }
    const DrebinModel& model() const { return model_; }

private:
    uint64_t seed_;
    bool trained_ = false;
    DrebinModel model_;
};

class FamousDetector final : public Detector {
public:
    const std::string& name() const override {
        static const std::string n = "famous";
        return n;
    }
    void train(const std::vector<bundle::Bundle>& train) override {
        model_ = famous_train(train);
        trained_ = true;
    }
    bool classify(const bundle::Bundle& b) const override {
        if (!trained_)
            throw Error(ErrorKind::DegenerateTraining, "famous used before training");
        return famous_classify(model_, b);
    }

private:
    bool trained_ = false;
    FamousModel model_;
};

class PbamdDetector final : public Detector {
public:
    explicit PbamdDetector(uint64_t seed) : seed_(seed) {}
    const std::string& name() const override {
        static const std::string n = "pbamd";
        return n;
    }
    void train(const std::vector<bundle::Bundle>& train) override {
        model_ = pbamd_train(train, seed_);
        trained_ = true;
    }
    bool classify(const bundle::Bundle& b) const override {
        if (!trained_)
            throw Error(ErrorKind::DegenerateTraining, "pbamd used before training");
        return pbamd_classify(model_, b);
    }

private:
    uint64_t seed_;
    bool trained_ = false;
    PbamdModel model_;
};

} // namespace

std::unique_ptr<Detector> make_detector(const std::string& name, uint64_t seed) {
    if (name == "kirin")
        return std::make_unique<KirinDetector>();
    if (name == "drebin")
        return std::make_unique<DrebinDetector>(seed);
    if (name == "famous")
        return std::make_unique<FamousDetector>();
    if (name == "pbamd")
        return std::make_unique<PbamdDetector>(seed);
    throw Error(ErrorKind::NotFound, "unknown detector: " + name);
}

std::vector<std::string> detector_names() { return {"kirin", "drebin", "famous", "pbamd"}; }

} // namespace gauntlet::detectors
