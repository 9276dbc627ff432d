#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gauntlet {

enum class ProtectionLevel { Normal, Dangerous, Signature, Special, Unknown };

const char* to_string(ProtectionLevel level);

struct PermissionInfo {
    ProtectionLevel level = ProtectionLevel::Unknown;
    std::optional<std::string> group; // superior group constant, if any
};

/// Bundled reference data: the per-permission table, the group membership
/// table, the suspicious-API list and the API-to-permission map. Loaded from
/// JSON files in a data directory; GAUNTLET_DATA_DIR overrides the built-in
/// location.
class DataTables {
public:
    static const DataTables& bundled();
    static DataTables load(const std::string& dir);

    /// nullptr for constants not in the table (they map to Unknown, no group).
    const PermissionInfo* permission(const std::string& constant) const;

    ProtectionLevel protection_level(const std::string& constant) const;

    std::optional<std::string> group_of(const std::string& constant) const;

    /// Member permissions of a group constant; empty if not a known group.
    std::vector<std::string> group_members(const std::string& group_constant) const;

    bool is_group_constant(const std::string& constant) const;

    bool is_suspicious_api(const std::string& method_name) const;

    /// Permission guarding an API method name, if mapped.
    std::optional<std::string> api_permission(const std::string& method_name) const;

    /// API method names mapped to the given permission.
    std::vector<std::string> apis_for_permission(const std::string& permission) const;

    /// All table constants in a fixed lexicographic order (the FAMOUS/PB-AMD
    /// feature universe).
    const std::vector<std::string>& permission_universe() const { return universe_; }

private:
    std::map<std::string, PermissionInfo> permissions_;
    std::map<std::string, std::vector<std::string>> groups_;
    std::set<std::string> suspicious_apis_;
    std::map<std::string, std::string> api_to_permission_;
    std::vector<std::string> universe_;
};

} // namespace gauntlet
