#pragma once

#include "gauntlet/manifest.hpp"
#include "gauntlet/smali.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace gauntlet::bundle {

enum class Label { Benign, Malicious, Unknown };

const char* to_string(Label label);
Label label_from_string(const std::string& s);

/// One app in its depackaged textual form: manifest + smali + any XInclude
/// target files, with id/label/timestamp carried in meta.json.
struct Bundle {
    std::string id;
    Label label = Label::Unknown;
    int64_t timestamp = 0;
    manifest::ManifestDoc manifest_doc;
    smali::SmaliProgram smali_program;
    std::map<std::string, std::string> include_files; // bundle-relative path -> XML text
};

struct FamilyProfile {
    std::vector<std::string> permissions;
    double probability = 0.0;
};

struct CorpusSpec {
    int n_benign = 0;
    int n_malicious = 0;
    std::vector<std::string> permission_pool;
    std::vector<FamilyProfile> benign_family_profile;
    std::vector<FamilyProfile> malicious_family_profile;
    double kirin_trigger_rate = 0.0;
    double suspicious_api_rate = 0.0;
    double url_rate = 0.0;
    uint64_t seed = 0;
};

struct SplitPlan {
    double spatial_ratio = 0.9;
    double train_fraction = 0.8;
    bool temporal = true;
};

Bundle load_bundle(const std::string& dir);
void save_bundle(const Bundle& b, const std::string& dir);

std::vector<Bundle> generate_corpus(const CorpusSpec& spec);

std::pair<std::vector<Bundle>, std::vector<Bundle>> split_dataset(const std::vector<Bundle>& corpus,
                                                                  const SplitPlan& plan);

bool semantically_equal(const Bundle& a, const Bundle& b);

/// The seed-fixed 900 benign / 100 malicious corpus used throughout the
/// evaluation (kirin_trigger_rate = 1.0).
CorpusSpec reference_spec();

} // namespace gauntlet::bundle
