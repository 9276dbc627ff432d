#pragma once

#include "gauntlet/bundle.hpp"
#include "gauntlet/cart.hpp"
#include "gauntlet/features.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace gauntlet::detectors {

// ---------------------------------------------------------------- Kirin

struct KirinVerdict {
    bool malicious = false;
    std::vector<int> triggered_rules; // rule ids 1..9, ascending
};

KirinVerdict kirin_classify(const std::set<std::string>& perms,
                            const std::set<std::string>& intent_actions);

KirinVerdict kirin_classify(const bundle::Bundle& b,
                            const DataTables& tables = DataTables::bundled());

// ---------------------------------------------------------------- Drebin

struct DrebinModel {
    std::map<std::string, double> weights; // FeatureId -> Ws
    double threshold = 0.0;                // max benign training score
};

struct DrebinReport {
    int original_label = -1;  // -1 benign, 1 malicious
    int predicted_label = -1; // 1 iff score > threshold
    std::vector<features::DrebinObservation> observations;
    double score = 0.0;
};

/// Linear max-margin weights via seeded hinge-loss subgradient descent;
/// threshold = max score over benign training bundles.
/// Throws DegenerateTraining when only one label is present.
DrebinModel drebin_train(const std::vector<bundle::Bundle>& train, uint64_t seed = 13,
                         const DataTables& tables = DataTables::bundled());

DrebinReport drebin_classify(const DrebinModel& m, const bundle::Bundle& b,
                             const DataTables& tables = DataTables::bundled());

nlohmann::json drebin_report_to_json(const DrebinReport& r);

nlohmann::json drebin_model_to_json(const DrebinModel& m);
DrebinModel drebin_model_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- FAMOUS

struct FamousModel {
    std::map<std::string, double> emsp; // permission -> MSP - BSP
    cart::Tree classifier;              // over (EMSP_1..EMSP_n, MS)
};

FamousModel famous_train(const std::vector<bundle::Bundle>& train,
                         const DataTables& tables = DataTables::bundled());

bool famous_classify(const FamousModel& m, const bundle::Bundle& b,
                     const DataTables& tables = DataTables::bundled());

nlohmann::json famous_model_to_json(const FamousModel& m);
FamousModel famous_model_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- PB-AMD

struct PbamdModel {
    std::vector<std::string> selected_features;   // top-N permissions by IG
    std::vector<std::vector<double>> centroids;   // exactly 2
    std::vector<cart::Tree> trees;                // one per cluster
};

PbamdModel pbamd_train(const std::vector<bundle::Bundle>& train, uint64_t seed = 13,
                       int n_features = 100,
                       const DataTables& tables = DataTables::bundled());

bool pbamd_classify(const PbamdModel& m, const bundle::Bundle& b,
                    const DataTables& tables = DataTables::bundled());

nlohmann::json pbamd_model_to_json(const PbamdModel& m);
PbamdModel pbamd_model_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------- uniform view

/// Uniform train/classify facade over the four systems, used by the
/// evaluation harness.
class Detector {
public:
    virtual ~Detector() = default;
    virtual const std::string& name() const = 0;
    virtual void train(const std::vector<bundle::Bundle>& train) = 0;
    virtual bool classify(const bundle::Bundle& b) const = 0;
};

/// name in {kirin, drebin, famous, pbamd}; throws NotFound otherwise.
std::unique_ptr<Detector> make_detector(const std::string& name, uint64_t seed = 13);

std::vector<std::string> detector_names();

} // namespace gauntlet::detectors
