#include "gauntlet/data_tables.hpp"

#include "gauntlet/errors.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>

#ifndef GAUNTLET_BUNDLED_DATA_DIR
#define GAUNTLET_BUNDLED_DATA_DIR "data"
#endif

namespace gauntlet {

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::MissingFile, "cannot open data file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, path + ": " + e.what());
    }
    return j;
}

ProtectionLevel parse_level(const std::string& s) {
    if (s == "normal")
        return ProtectionLevel::Normal;
    if (s == "dangerous")
        return ProtectionLevel::Dangerous;
    if (s == "signature")
        return ProtectionLevel::Signature;
    if (s == "special")
        return ProtectionLevel::Special;
    return ProtectionLevel::Unknown;
}

} // namespace

const char* to_string(ProtectionLevel level) {
    switch (level) {
    case ProtectionLevel::Normal: return "normal";
    case ProtectionLevel::Dangerous: return "dangerous";
    case ProtectionLevel::Signature: return "signature";
    case ProtectionLevel::Special: return "special";
    case ProtectionLevel::Unknown: return "unknown";
    }
    return "unknown";
}

DataTables DataTables::load(const std::string& dir) {
    DataTables t;
    auto perms = read_json(dir + "/permission_table.json");
    for (const auto& [constant, entry] : perms.at("permissions").items()) {
        PermissionInfo info;
        info.level = parse_level(entry.at("protection_level").get<std::string>());
        if (entry.contains("group"))
            info.group = entry.at("group").get<std::string>();
        t.permissions_[constant] = info;
    }
    for (const auto& [constant, info] : t.permissions_) {
        t.universe_.push_back(constant);
        if (info.group)
            t.groups_[*info.group].push_back(constant);
    }

    auto sus = read_json(dir + "/suspicious_apis.json");
    for (const auto& name : sus.at("suspicious_apis"))
        t.suspicious_apis_.insert(name.get<std::string>());

    auto api = read_json(dir + "/api_permission_map.json");
    for (const auto& [method, perm] : api.at("api_permissions").items())
        t.api_to_permission_[method] = perm.get<std::string>();

    return t;
}

const DataTables& DataTables::bundled() {
    static DataTables tables = [] {
        const char* env = std::getenv("GAUNTLET_DATA_DIR");
        return load(env ? env : GAUNTLET_BUNDLED_DATA_DIR);
    }();
    return tables;
}

const PermissionInfo* DataTables::permission(const std::string& constant) const {
    auto it = permissions_.find(constant);
    return it == permissions_.end() ? nullptr : &it->second;
}

ProtectionLevel DataTables::protection_level(const std::string& constant) const {
    const auto* info = permission(constant);
    return info ? info->level : ProtectionLevel::Unknown;
}

std::optional<std::string> DataTables::group_of(const std::string& constant) const {
    const auto* info = permission(constant);
    return info ? info->group : std::nullopt;
}

std::vector<std::string> DataTables::group_members(const std::string& group_constant) const {
    auto it = groups_.find(group_constant);
    return it == groups_.end() ? std::vector<std::string>{} : it->second;
}

bool DataTables::is_group_constant(const std::string& constant) const {
    return groups_.count(constant) > 0;
}

bool DataTables::is_suspicious_api(const std::string& method_name) const {
    return suspicious_apis_.count(method_name) > 0;
}

std::optional<std::string> DataTables::api_permission(const std::string& method_name) const {
    auto it = api_to_permission_.find(method_name);
    if (it == api_to_permission_.end())
        return std::nullopt;
    return it->second;
}

std::vector<std::string> DataTables::apis_for_permission(const std::string& permission) const {
    std::vector<std::string> out;
    for (const auto& [method, perm] : api_to_permission_)
        if (perm == permission)
            out.push_back(method);
    return out;
}

} // namespace gauntlet
