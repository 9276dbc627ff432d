#include "gauntlet/features.hpp"

#include "gauntlet/errors.hpp"
#include "gauntlet/util.hpp"

#include <algorithm>
#include <regex>

namespace gauntlet::features {

namespace {

const std::regex kSchemeRe(R"(^([A-Za-z][A-Za-z0-9+.-]*)://(.*)$)");

std::string comp_prefix(manifest::ComponentKind kind) {
    switch (kind) {
    case manifest::ComponentKind::Activity: return "comp:activity:";
    case manifest::ComponentKind::Service: return "comp:service:";
    case manifest::ComponentKind::Receiver: return "comp:receiver:";
    case manifest::ComponentKind::Provider: return "comp:provider:";
    }
    return "comp:";
}

/// Permission constants visible to the legacy extractor: uses-permission tags
/// whose constant appears in the per-permission table, nothing else.
std::vector<std::string> legacy_perm_set(const manifest::ManifestDoc& doc,
                                         const DataTables& tables) {
    std::vector<std::string> out;
    for (const auto* p : doc.permissions()) {
        if (p->tag_kind != manifest::TagKind::UsesPermission)
            continue;
        if (!tables.permission(p->name))
            continue;
        if (std::find(out.begin(), out.end(), p->name) == out.end())
            out.push_back(p->name);
    }
    return out;
}

void add_component_features(const manifest::ManifestDoc& doc, FeatureVector& fv) {
    for (const auto* c : doc.components())
        fv.add(comp_prefix(c->kind) + c->name);
    for (const auto& action : doc.intent_actions())
        fv.add("intent:" + action);
}

void add_smali_features(const smali::SmaliProgram& p, FeatureVector& fv) {
    for (const auto& [path, file] : p.files) {
        for (const auto& s : file.statements) {
            if (s.kind == smali::StatementKind::Invoke) {
                fv.add("api:" + s.method.method_name);
            } else if (s.kind == smali::StatementKind::ConstString) {
                std::smatch m;
                if (std::regex_match(s.literal, m, kSchemeRe))
                    fv.add("url:" + url_domain(s.literal));
            }
        }
    }
}

/// An include file holds exactly one element: a permission tag or a component.
void fold_include(const std::string& path, const std::string& text, const DataTables& tables,
                  FeatureVector& fv) {
    xml::Element el;
    try {
        el = xml::parse(text);
    } catch (const Error&) {
        throw Error(ErrorKind::UnresolvedInclude, "include file " + path + " is not valid XML");
    }
    if (el.name == "uses-permission" || el.name == "uses-permission-sdk-23" ||
        el.name == "permission") {
        const std::string* attr = el.attr("android:name");
        if (!attr)
            return;
        const std::string& name = *attr;
        if (tables.is_group_constant(name)) {
            for (const auto& member : tables.group_members(name))
                fv.add("perm:" + member);
        } else {
            fv.add("perm:" + name);
        }
        return;
    }
    static const std::map<std::string, manifest::ComponentKind> kKinds = {
        {"activity", manifest::ComponentKind::Activity},
        {"service", manifest::ComponentKind::Service},
        {"receiver", manifest::ComponentKind::Receiver},
        {"provider", manifest::ComponentKind::Provider},
    };
    auto it = kKinds.find(el.name);
    if (it == kKinds.end())
        return;
    const std::string* comp_name = el.attr("android:name");
    fv.add(comp_prefix(it->second) + (comp_name ? *comp_name : std::string()));
    for (const auto& child : el.children) {
        if (child.name != "intent-filter")
            continue;
        for (const auto& action : child.children) {
            const std::string* action_name = action.attr("android:name");
            if (action.name == "action" && action_name && !action_name->empty())
                fv.add("intent:" + *action_name);
        }
    }
}

} // namespace

const char* to_string(DrebinCategory c) {
    switch (c) {
    case DrebinCategory::IntentActionList: return "IntentActionList";
    case DrebinCategory::ServiceList: return "ServiceList";
    case DrebinCategory::ActivityList: return "ActivityList";
    case DrebinCategory::BroadcastReceiverList: return "BroadcastReceiverList";
    case DrebinCategory::RequestedPermissionList: return "RequestedPermissionList";
    case DrebinCategory::SuspiciousApiList: return "SuspiciousApiList";
    case DrebinCategory::RestrictedApiList: return "RestrictedApiList";
    case DrebinCategory::UsedPermissionsList: return "UsedPermissionsList";
    case DrebinCategory::URLDomainList: return "URLDomainList";
    }
    return "?";
}

FeatureVector extract_legacy(const bundle::Bundle& b, const DataTables& tables) {
    FeatureVector fv;
    for (const auto& perm : legacy_perm_set(b.manifest_doc, tables))
        fv.add("perm:" + perm);
    add_component_features(b.manifest_doc, fv);
    add_smali_features(b.smali_program, fv);
    return fv;
}

std::vector<std::string> legacy_permissions(const bundle::Bundle& b, const DataTables& tables) {
    return legacy_perm_set(b.manifest_doc, tables);
}

FeatureVector extract_full(const bundle::Bundle& b, const DataTables& tables) {
    FeatureVector fv;
    for (const auto* p : b.manifest_doc.permissions()) {
        if (tables.is_group_constant(p->name)) {
            for (const auto& member : tables.group_members(p->name))
                fv.add("perm:" + member);
        } else {
            fv.add("perm:" + p->name);
        }
    }
    add_component_features(b.manifest_doc, fv);
    for (const auto* inc : b.manifest_doc.includes()) {
        auto it = b.include_files.find(inc->href);
        if (it == b.include_files.end())
            throw Error(ErrorKind::UnresolvedInclude, "missing include file " + inc->href);
        fold_include(inc->href, it->second, tables, fv);
    }
    add_smali_features(b.smali_program, fv);
    return fv;
}

std::vector<DrebinObservation> drebin_observations(const bundle::Bundle& b,
                                                   const DataTables& tables) {
    std::vector<DrebinObservation> obs;
    auto seen = [&](const std::string& feature) {
        return std::any_of(obs.begin(), obs.end(),
                           [&](const DrebinObservation& o) { return o.feature == feature; });
    };
    auto push = [&](const std::string& feature, DrebinCategory cat) {
        if (!seen(feature))
            obs.push_back({feature, cat, 0.0});
    };

    for (const auto& action : b.manifest_doc.intent_actions())
        push("intent:" + action, DrebinCategory::IntentActionList);
    for (const auto* c : b.manifest_doc.components()) {
        switch (c->kind) {
        case manifest::ComponentKind::Activity:
            push(comp_prefix(c->kind) + c->name, DrebinCategory::ActivityList);
            break;
        case manifest::ComponentKind::Service:
            push(comp_prefix(c->kind) + c->name, DrebinCategory::ServiceList);
            break;
        case manifest::ComponentKind::Receiver:
            push(comp_prefix(c->kind) + c->name, DrebinCategory::BroadcastReceiverList);
            break;
        case manifest::ComponentKind::Provider:
            break; // no provider report category
        }
    }

    std::vector<std::string> requested = legacy_perm_set(b.manifest_doc, tables);
    for (const auto& perm : requested)
        push("perm:" + perm, DrebinCategory::RequestedPermissionList);

    for (const auto& [path, file] : b.smali_program.files) {
        for (const auto& s : file.statements) {
            if (s.kind == smali::StatementKind::Invoke) {
                const std::string& name = s.method.method_name;
                if (tables.is_suspicious_api(name))
                    push("susapi:" + name, DrebinCategory::SuspiciousApiList);
                if (auto perm = tables.api_permission(name)) {
                    bool have = std::find(requested.begin(), requested.end(), *perm) !=
                                requested.end();
                    if (have)
                        push("usedperm:" + *perm, DrebinCategory::UsedPermissionsList);
                    else
                        push("restapi:" + name, DrebinCategory::RestrictedApiList);
                }
            } else if (s.kind == smali::StatementKind::ConstString) {
                std::smatch m;
                if (std::regex_match(s.literal, m, kSchemeRe))
                    push("url:" + url_domain(s.literal), DrebinCategory::URLDomainList);
            }
        }
    }
    return obs;
}

std::string url_domain(const std::string& url) {
    std::smatch m;
    std::string rest = url;
    if (std::regex_match(url, m, kSchemeRe))
        rest = m[2];
    size_t slash = rest.find('/');
    if (slash != std::string::npos)
        rest = rest.substr(0, slash);
    size_t colon = rest.find(':');
    if (colon != std::string::npos)
        rest = rest.substr(0, colon);
    return rest;
}

} // namespace gauntlet::features
