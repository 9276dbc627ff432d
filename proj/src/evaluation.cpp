#include "gauntlet/evaluation.hpp"

#include "gauntlet/errors.hpp"
#include "gauntlet/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <thread>

namespace gauntlet::evaluation {

namespace {

uint64_t bundle_seed(uint64_t base, const std::string& id) {
    return base ^ std::stoull(util::fnv1a_hex(id), nullptr, 16);
}

std::set<std::string> requested_permissions(const bundle::Bundle& b) {
    std::set<std::string> out;
    for (const auto* p : b.manifest_doc.permissions())
        out.insert(p->name);
    return out;
}

attacks::AttackOutcome apply_attack(const std::string& name, const bundle::Bundle& b,
                                    const detectors::DrebinModel& surrogate,
                                    const std::vector<std::vector<std::string>>& families,
                                    uint64_t seed) {
    if (name == "original") {
        attacks::AttackOutcome out;
        out.bundle = b;
        return out;
    }
    if (name == "mb1")
        return attacks::mb1(b, detectors::drebin_classify(surrogate, b), bundle_seed(seed, b.id));
    if (name == "mb2")
        return attacks::mb2(b, detectors::drebin_classify(surrogate, b));
    if (name == "mb3")
        return attacks::mb3(b, families, bundle_seed(seed, b.id));
    if (name == "mb4")
        return attacks::mb4(b);
    if (name == "sb")
        return attacks::sb(b, detectors::drebin_classify(surrogate, b));
    if (name == "combined")
        return attacks::combined(b, detectors::drebin_classify(surrogate, b),
                                 bundle_seed(seed, b.id));
    throw Error(ErrorKind::NotFound, "unknown attack: " + name);
}

template <typename Fn>
void parallel_for(size_t n, int jobs, Fn fn) {
    if (jobs <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    size_t workers = std::min<size_t>(static_cast<size_t>(jobs), n);
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (size_t i = w; i < n; i += workers)
                fn(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs)
        s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2)
        return 0.0;
    double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

} // namespace

double detection_rate(const detectors::Detector& d, const std::vector<bundle::Bundle>& bundles) {
    if (bundles.empty())
        throw Error(ErrorKind::EmptyTestSet, "detection rate over an empty set");
    int hits = 0;
    for (const auto& b : bundles)
        hits += d.classify(b) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(bundles.size());
}

EvasionReport run_experiment(detectors::Detector& d, const std::string& attack_name,
                             const std::vector<bundle::Bundle>& train,
                             const std::vector<bundle::Bundle>& test, uint64_t seed, int jobs) {
    if (test.empty())
        throw Error(ErrorKind::EmptyTestSet, "experiment needs a non-empty test set");
    d.train(train);

    attacks::AttackTuple tuple =
        attack_name == "original" ? attacks::AttackTuple{} : attacks::attack_tuple(attack_name);
    detectors::DrebinModel surrogate;
    std::vector<std::vector<std::string>> families;
    if (attack_name != "original" && attack_name != "mb4") {
        if (tuple.attacker_model == attacks::AttackerModel::DA)
            families = top_benign_families(train);
        else
            surrogate = detectors::drebin_train(train, seed);
    }

    EvasionReport report;
    report.detector_name = d.name();
    report.attack_name = attack_name;
    report.per_bundle.resize(test.size());

    parallel_for(test.size(), jobs, [&](size_t i) {
        const bundle::Bundle& b = test[i];
        BundleVerdict v;
        v.id = b.id;
        v.initial = d.classify(b);
        auto outcome = apply_attack(attack_name, b, surrogate, families, seed);
        if (outcome.bundle) {
            v.final_verdict = d.classify(*outcome.bundle);
        } else {
            v.errored = true;
        }
        report.per_bundle[i] = std::move(v);
    });

    int initial_hits = 0;
    int final_hits = 0;
    int ok = 0;
    for (const auto& v : report.per_bundle) {
        initial_hits += v.initial ? 1 : 0;
        if (v.errored) {
            ++report.n_errors;
            continue;
        }
        ++ok;
        final_hits += v.final_verdict ? 1 : 0;
    }
    report.initial_detection_rate =
        static_cast<double>(initial_hits) / static_cast<double>(test.size());
    report.final_detection_rate = ok == 0 ? 0.0 : static_cast<double>(final_hits) / ok;
    return report;
}

std::vector<PermissionFamily> permission_families(const std::vector<bundle::Bundle>& bundles,
                                                  int max_size, double min_support) {
    if (max_size < 1)
        throw Error(ErrorKind::InvalidSpec, "max_size must be at least 1");
    std::vector<std::set<std::string>> sets;
    int n_benign = 0;
    int n_malicious = 0;
    std::set<std::string> universe;
    std::vector<bool> malicious;
    for (const auto& b : bundles) {
        auto perms = requested_permissions(b);
        universe.insert(perms.begin(), perms.end());
        bool mal = b.label == bundle::Label::Malicious;
        (mal ? n_malicious : n_benign)++;
        malicious.push_back(mal);
        sets.push_back(std::move(perms));
    }
    const int n = static_cast<int>(bundles.size());
    if (n == 0)
        return {};
    std::vector<std::string> perms(universe.begin(), universe.end());

    std::vector<PermissionFamily> out;
    std::vector<std::string> stack;
    // candidate bundle indices shrink monotonically down the DFS; support is
    // anti-monotone in the member set, so a failing prefix prunes its subtree
    std::function<void(size_t, const std::vector<int>&)> dfs = [&](size_t next,
                                                                   const std::vector<int>& cand) {
        for (size_t p = next; p < perms.size(); ++p) {
            std::vector<int> narrowed;
            for (int i : cand)
                if (sets[static_cast<size_t>(i)].count(perms[p]))
                    narrowed.push_back(i);
            double support = static_cast<double>(narrowed.size()) / n;
            if (support < min_support)
                continue;
            stack.push_back(perms[p]);
            PermissionFamily fam;
            fam.members = stack;
            int mal_hits = 0;
            for (int i : narrowed)
                mal_hits += malicious[static_cast<size_t>(i)] ? 1 : 0;
            int ben_hits = static_cast<int>(narrowed.size()) - mal_hits;
            fam.support_benign = n_benign == 0 ? 0.0 : static_cast<double>(ben_hits) / n_benign;
            fam.support_malicious =
                n_malicious == 0 ? 0.0 : static_cast<double>(mal_hits) / n_malicious;
            out.push_back(fam);
            if (static_cast<int>(stack.size()) < max_size)
                dfs(p + 1, narrowed);
            stack.pop_back();
        }
    };
    std::vector<int> all(sets.size());
    for (size_t i = 0; i < sets.size(); ++i)
        all[i] = static_cast<int>(i);
    dfs(0, all);

    auto overall = [&](const PermissionFamily& f) {
        return (f.support_benign * n_benign + f.support_malicious * n_malicious) / n;
    };
    std::stable_sort(out.begin(), out.end(), [&](const PermissionFamily& a,
                                                 const PermissionFamily& b) {
        double sa = overall(a);
        double sb = overall(b);
        if (sa != sb)
            return sa > sb;
        if (a.members.size() != b.members.size())
            return a.members.size() < b.members.size();
        return a.members < b.members;
    });
    return out;
}

std::vector<std::vector<std::string>> top_benign_families(const std::vector<bundle::Bundle>& train,
                                                          int k) {
    std::vector<bundle::Bundle> benign;
    for (const auto& b : train)
        if (b.label == bundle::Label::Benign)
            benign.push_back(b);
    auto families = permission_families(benign);
    std::vector<std::vector<std::string>> out;
    for (const auto& f : families) {
        if (static_cast<int>(out.size()) >= k)
            break;
        out.push_back(f.members);
    }
    return out;
}

ProtectionStats protection_stats(const std::vector<bundle::Bundle>& bundles) {
    static const ProtectionLevel kTieOrder[] = {ProtectionLevel::Normal, ProtectionLevel::Dangerous,
                                                ProtectionLevel::Signature,
                                                ProtectionLevel::Special, ProtectionLevel::Unknown};
    const auto& tables = DataTables::bundled();
    ProtectionStats stats;
    std::map<ProtectionLevel, int> general_counts;
    std::map<ProtectionLevel, int> dominant_counts;
    int n_requests = 0;
    int n_bundles = 0;
    for (const auto& b : bundles) {
        std::map<ProtectionLevel, int> local;
        for (const auto* p : b.manifest_doc.permissions()) {
            ProtectionLevel level = tables.protection_level(p->name);
            ++general_counts[level];
            ++local[level];
            ++n_requests;
        }
        if (local.empty())
            continue;
        ++n_bundles;
        ProtectionLevel best = ProtectionLevel::Unknown;
        int best_count = -1;
        for (ProtectionLevel level : kTieOrder) {
            auto it = local.find(level);
            if (it != local.end() && it->second > best_count) {
                best = level;
                best_count = it->second;
            }
        }
        ++dominant_counts[best];
    }
    for (const auto& [level, count] : general_counts)
        stats.general[level] = static_cast<double>(count) / n_requests;
    for (const auto& [level, count] : dominant_counts)
        stats.dominant[level] = static_cast<double>(count) / n_bundles;
    return stats;
}

MaliciousnessResult
maliciousness_compare(const std::vector<const detectors::Detector*>& scanners,
                      const bundle::Bundle& original, const bundle::Bundle& attacked) {
    MaliciousnessResult r;
    for (const auto* s : scanners) {
        r.original_count += s->classify(original) ? 1 : 0;
        r.attacked_count += s->classify(attacked) ? 1 : 0;
    }
    if (r.attacked_count < r.original_count)
        r.verdict = MaliciousnessVerdict::Lower;
    else if (r.attacked_count == r.original_count)
        r.verdict = MaliciousnessVerdict::Equal;
    else
        r.verdict = MaliciousnessVerdict::Higher;
    r.passed = r.verdict != MaliciousnessVerdict::Higher;
    return r;
}

EvaluationResult evaluate_corpus(const std::vector<bundle::Bundle>& corpus,
                                 const bundle::SplitPlan& plan, const ExperimentOptions& opts) {
    auto [train, test] = bundle::split_dataset(corpus, plan);

    std::vector<std::string> cases = opts.cases;
    if (cases.empty()) {
        cases = {"original"};
        for (const auto& a : attacks::attack_names())
            cases.push_back(a);
    }
    std::vector<std::string> names =
        opts.detectors.empty() ? detectors::detector_names() : opts.detectors;

    nlohmann::json report;
    report["config"] = {{"seed", opts.seed},
                        {"strict_functionality", opts.strict_functionality},
                        {"n_splits", opts.n_splits},
                        {"cases", cases},
                        {"detectors", names},
                        {"split_plan",
                         {{"spatial_ratio", plan.spatial_ratio},
                          {"train_fraction", plan.train_fraction},
                          {"temporal", plan.temporal}}},
                        {"n_train", train.size()},
                        {"n_test", test.size()}};

    nlohmann::json matrix = nlohmann::json::object();
    for (const auto& det_name : names) {
        auto d = detectors::make_detector(det_name, opts.seed);
        for (const auto& c : cases) {
            auto r = run_experiment(*d, c, train, test, opts.seed, opts.jobs);
            nlohmann::json cell = {{"initial", r.initial_detection_rate},
                                   {"final", r.final_detection_rate},
                                   {"n_errors", r.n_errors}};
            nlohmann::json verdicts = nlohmann::json::array();
            for (const auto& v : r.per_bundle)
                verdicts.push_back(
                    {{"id", v.id}, {"initial", v.initial}, {"final", v.final_verdict},
                     {"errored", v.errored}});
            cell["per_bundle"] = verdicts;
            matrix[c][det_name] = cell;
        }
    }
    report["matrix"] = matrix;

    // functionality proxy, attacker inputs shared across attacks
    detectors::DrebinModel surrogate = detectors::drebin_train(train, opts.seed);
    auto families = top_benign_families(train);
    nlohmann::json functionality = nlohmann::json::object();
    for (const auto& c : cases) {
        if (c == "original")
            continue;
        int passed = 0;
        int ok = 0;
        for (const auto& b : test) {
            auto outcome = apply_attack(c, b, surrogate, families, opts.seed);
            if (!outcome.bundle)
                continue;
            ++ok;
            passed +=
                attacks::validate_functionality(*outcome.bundle, opts.strict_functionality)
                        .functional
                    ? 1
                    : 0;
        }
        functionality[c] = ok == 0 ? 0.0 : static_cast<double>(passed) / ok;
    }
    report["functionality_pass_rate"] = functionality;

    if (opts.n_splits > 1) {
        std::vector<bundle::Bundle> benign;
        std::vector<bundle::Bundle> malicious;
        for (const auto& b : corpus)
            (b.label == bundle::Label::Malicious ? malicious : benign).push_back(b);
        std::mt19937_64 rng(opts.seed);
        std::shuffle(malicious.begin(), malicious.end(), rng);
        nlohmann::json splits = nlohmann::json::object();
        std::map<std::string, std::map<std::string, std::vector<double>>> finals;
        for (int s = 0; s < opts.n_splits; ++s) {
            std::vector<bundle::Bundle> split_test;
            std::vector<bundle::Bundle> split_train = benign;
            for (size_t i = 0; i < malicious.size(); ++i) {
                if (static_cast<int>(i) % opts.n_splits == s)
                    split_test.push_back(malicious[i]);
                else
                    split_train.push_back(malicious[i]);
            }
            for (const auto& det_name : names) {
                auto d = detectors::make_detector(det_name, opts.seed + static_cast<uint64_t>(s));
                for (const auto& c : cases) {
                    auto r = run_experiment(*d, c, split_train, split_test,
                                            opts.seed + static_cast<uint64_t>(s), opts.jobs);
                    finals[c][det_name].push_back(r.final_detection_rate);
                }
            }
        }
        for (const auto& [c, per_det] : finals)
            for (const auto& [det_name, xs] : per_det)
                splits[c][det_name] = {{"mean", mean_of(xs)}, {"std", std_of(xs)}};
        report["splits"] = splits;
    }

    std::string csv = "case";
    for (const auto& det_name : names)
        csv += "," + det_name;
    csv += "\n";
    for (const auto& c : cases) {
        csv += c;
        for (const auto& det_name : names) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.3f",
                          matrix[c][det_name]["final"].get<double>());
            csv += buf;
        }
        csv += "\n";
    }
    return {std::move(report), std::move(csv)};
}

} // namespace gauntlet::evaluation
