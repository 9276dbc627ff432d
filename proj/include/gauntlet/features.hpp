#pragma once

#include "gauntlet/bundle.hpp"
#include "gauntlet/data_tables.hpp"

#include <map>
#include <string>
#include <vector>

namespace gauntlet::features {

/// Sparse named feature counts. Feature ids are namespaced strings:
/// perm:, comp:activity:, comp:service:, comp:receiver:, comp:provider:,
/// intent:, api:, susapi:, restapi:, usedperm:, url:.
struct FeatureVector {
    std::map<std::string, int> entries;

    bool has(const std::string& id) const { return entries.count(id) > 0; }
    void add(const std::string& id) { ++entries[id]; }
};

enum class DrebinCategory {
    IntentActionList,
    ServiceList,
    ActivityList,
    BroadcastReceiverList,
    RequestedPermissionList,
    SuspiciousApiList,
    RestrictedApiList,
    UsedPermissionsList,
    URLDomainList,
};

const char* to_string(DrebinCategory c);

struct DrebinObservation {
    std::string feature; // namespaced FeatureId
    DrebinCategory category = DrebinCategory::RequestedPermissionList;
    double weight = 0.0; // assigned by a trained model; 0 before training
};

/// The legacy extractor: only uses-permission tags whose
/// constant is in the bundled table are visible. sdk-23 tags, group
/// constants and include files are all skipped.
FeatureVector extract_legacy(const bundle::Bundle& b,
                             const DataTables& tables = DataTables::bundled());

/// Legacy permission constants as a flat list (the detector input).
std::vector<std::string> legacy_permissions(const bundle::Bundle& b,
                                            const DataTables& tables = DataTables::bundled());

/// Full-fidelity ground truth: all three tag kinds, group constants expanded
/// to members, include files resolved, plus comp:/api:/url: features.
/// Throws Error(UnresolvedInclude) on a dangling include reference.
FeatureVector extract_full(const bundle::Bundle& b,
                           const DataTables& tables = DataTables::bundled());

std::vector<DrebinObservation> drebin_observations(const bundle::Bundle& b,
                                                   const DataTables& tables =
                                                       DataTables::bundled());

/// Host part of a URL literal: scheme and path stripped.
std::string url_domain(const std::string& url);

} // namespace gauntlet::features
