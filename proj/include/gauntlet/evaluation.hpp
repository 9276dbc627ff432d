#pragma once

#include "gauntlet/attacks.hpp"
#include "gauntlet/bundle.hpp"
#include "gauntlet/detectors.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gauntlet::evaluation {

struct BundleVerdict {
    std::string id;
    bool initial = false;
    bool final_verdict = false;
    bool errored = false;
};

struct EvasionReport {
    std::string detector_name;
    std::string attack_name;
    double initial_detection_rate = 0.0;
    double final_detection_rate = 0.0; // evasion robustness
    std::vector<BundleVerdict> per_bundle;
    int n_errors = 0;
};

/// Fraction of bundles the trained detector flags malicious.
/// Throws EmptyTestSet on an empty list.
double detection_rate(const detectors::Detector& d, const std::vector<bundle::Bundle>& bundles);

/// Trains on `train`, attacks every test bundle with the named attack
/// ("original" is the identity), and reports initial vs final rates over the
/// non-errored bundles. MA attacks consume per-bundle Drebin reports from a
/// surrogate model trained on `train`; DA consumes the benign permission
/// families; ZK consumes nothing.
EvasionReport run_experiment(detectors::Detector& d, const std::string& attack_name,
                             const std::vector<bundle::Bundle>& train,
                             const std::vector<bundle::Bundle>& test, uint64_t seed, int jobs = 1);

struct PermissionFamily {
    std::vector<std::string> members; // sorted, non-empty
    double support_benign = 0.0;
    double support_malicious = 0.0;
};

/// All permission subsets of size <= max_size whose support among the given
/// bundles reaches min_support; sorted by support desc, size asc, then
/// lexicographic members. Support-pruned DFS, equivalent to brute force.
std::vector<PermissionFamily> permission_families(const std::vector<bundle::Bundle>& bundles,
                                                  int max_size = 3, double min_support = 0.05);

/// Top-k benign families as raw member sets (the MB3 attacker input).
std::vector<std::vector<std::string>> top_benign_families(const std::vector<bundle::Bundle>& train,
                                                          int k = 3);

struct ProtectionStats {
    std::map<ProtectionLevel, double> general;  // per permission request
    std::map<ProtectionLevel, double> dominant; // per bundle
};

ProtectionStats protection_stats(const std::vector<bundle::Bundle>& bundles);

enum class MaliciousnessVerdict { Lower, Equal, Higher };

struct MaliciousnessResult {
    int original_count = 0;
    int attacked_count = 0;
    MaliciousnessVerdict verdict = MaliciousnessVerdict::Equal;
    bool passed = false; // Lower/Equal pass the maliciousness test
};

MaliciousnessResult
maliciousness_compare(const std::vector<const detectors::Detector*>& scanners,
                      const bundle::Bundle& original, const bundle::Bundle& attacked);

struct ExperimentOptions {
    uint64_t seed = 7;
    int jobs = 1;
    bool strict_functionality = true;
    int n_splits = 1; // >1 re-runs over seeded malicious splits, adding mean/std
    std::vector<std::string> cases;     // empty = original + all attacks
    std::vector<std::string> detectors; // empty = all four
};

struct EvaluationResult {
    nlohmann::json report;
    std::string csv; // rate matrix, detectors as columns
};

/// The full rate matrix (cases x detectors) plus functionality-proxy pass
/// rates, computed off one temporal/spatial split of the corpus.
EvaluationResult evaluate_corpus(const std::vector<bundle::Bundle>& corpus,
                                 const bundle::SplitPlan& plan, const ExperimentOptions& opts);

} // namespace gauntlet::evaluation
