#include "gauntlet/attacks.hpp"

#include "gauntlet/errors.hpp"
#include "gauntlet/util.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>

namespace gauntlet::attacks {

namespace {

using features::DrebinCategory;

bool manifest_side(DrebinCategory c) {
    switch (c) {
    case DrebinCategory::IntentActionList:
    case DrebinCategory::ServiceList:
    case DrebinCategory::ActivityList:
    case DrebinCategory::BroadcastReceiverList:
    case DrebinCategory::RequestedPermissionList:
        return true;
    default:
        return false;
    }
}

bool strip_prefix(const std::string& s, const std::string& prefix, std::string& rest) {
    if (s.rfind(prefix, 0) != 0)
        return false;
    rest = s.substr(prefix.size());
    return true;
}

std::optional<manifest::ComponentKind> component_kind_of(const std::string& feature,
                                                         std::string& name) {
    if (strip_prefix(feature, "comp:activity:", name))
        return manifest::ComponentKind::Activity;
    if (strip_prefix(feature, "comp:service:", name))
        return manifest::ComponentKind::Service;
    if (strip_prefix(feature, "comp:receiver:", name))
        return manifest::ComponentKind::Receiver;
    if (strip_prefix(feature, "comp:provider:", name))
        return manifest::ComponentKind::Provider;
    return std::nullopt;
}

bool doc_has_component(const manifest::ManifestDoc& doc, manifest::ComponentKind kind,
                       const std::string& name) {
    for (const auto* c : doc.components())
        if (c->kind == kind && c->name == name)
            return true;
    return false;
}

bool doc_has_permission(const manifest::ManifestDoc& doc, const manifest::PermissionRequest& p) {
    for (const auto* q : doc.permissions())
        if (*q == p)
            return true;
    return false;
}

class Audit {
public:
    explicit Audit(std::vector<AuditEntry>& out) : out_(out) {}

    void manifest_edit(const std::string& kind, const std::string& location,
                       const manifest::ManifestDoc& before, const manifest::ManifestDoc& after) {
        out_.push_back({kind, location, util::fnv1a_hex(manifest::serialize_manifest(before)),
                        util::fnv1a_hex(manifest::serialize_manifest(after))});
    }

    void smali_edit(const std::string& kind, const std::string& path,
                    const smali::SmaliFile& before, const smali::SmaliFile& after) {
        out_.push_back({kind, path, util::fnv1a_hex(smali::serialize_smali(before)),
                        util::fnv1a_hex(smali::serialize_smali(after))});
    }

private:
    std::vector<AuditEntry>& out_;
};

/// Extract one target into an include file, recording the new file.
void extract_into(bundle::Bundle& b, const manifest::IncludeTarget& target) {
    auto result = manifest::extract_to_include(b.manifest_doc, target);
    b.manifest_doc = std::move(result.doc);
    b.include_files[result.include_path] = result.include_xml;
}

std::string fresh_pocket_name(const bundle::Bundle& b, int& counter) {
    std::set<std::string> used;
    for (const auto* md : b.manifest_doc.metadata())
        used.insert(md->name);
    for (;;) {
        std::string name = "pocket_" + std::to_string(counter++);
        if (!used.count(name))
            return name;
    }
}

/// Search strings that identify an observation's smali footprint.
std::vector<std::string> observation_strings(const features::DrebinObservation& obs,
                                             const DataTables& tables) {
    std::string rest;
    if (strip_prefix(obs.feature, "susapi:", rest) || strip_prefix(obs.feature, "restapi:", rest))
        return {rest};
    if (strip_prefix(obs.feature, "usedperm:", rest))
        return tables.apis_for_permission(rest);
    if (strip_prefix(obs.feature, "url:", rest))
        return {rest};
    return {};
}

void pocket_encoded_literals(bundle::Bundle& b, const std::string& path,
                             const std::string& encoded, const std::string& pocket, Audit& audit) {
    smali::SmaliFile& file = b.smali_program.files[path];
    for (size_t i = file.statements.size(); i-- > 0;) {
        const auto& s = file.statements[i];
        if (s.kind == smali::StatementKind::ConstString && s.literal == encoded) {
            smali::SmaliFile before = file;
            file = smali::pocket_fetch_code(std::move(file), i, pocket);
            audit.smali_edit("pocket", path, before, file);
        }
    }
}

void apply_sb_observation(bundle::Bundle& b, const features::DrebinObservation& obs,
                          int& pocket_counter, Audit& audit, const DataTables& tables) {
    auto strings = observation_strings(obs, tables);
    if (strings.empty())
        return;
    for (;;) {
        auto targets = smali::find_targets(b.smali_program, strings);
        if (targets.empty())
            break;
        const smali::Target& t = targets.front();
        smali::SmaliFile& file = b.smali_program.files[t.path];
        if (t.kind == smali::TargetKind::ApiCall) {
            const std::string method = file.statements[t.index].method.method_name;
            const std::string encoded = util::base64_encode(method);
            smali::SmaliFile before = file;
            file = smali::reflect_call(std::move(file), t.index, encoded);
            audit.smali_edit("reflect", t.path, before, file);
            std::string pocket = fresh_pocket_name(b, pocket_counter);
            pocket_encoded_literals(b, t.path, encoded, pocket, audit);
            manifest::ManifestDoc doc_before = b.manifest_doc;
            b.manifest_doc = manifest::insert_pocket(std::move(b.manifest_doc), pocket, encoded);
            audit.manifest_edit("pocket", obs.feature, doc_before, b.manifest_doc);
        } else {
            std::string encoded;
            smali::SmaliFile before = file;
            file = smali::encode_string(std::move(file), t.index, &encoded);
            audit.smali_edit("encode", t.path, before, file);
            std::string pocket = fresh_pocket_name(b, pocket_counter);
            smali::SmaliFile mid = file;
            file = smali::pocket_fetch_code(std::move(file), t.index, pocket);
            audit.smali_edit("pocket", t.path, mid, file);
            manifest::ManifestDoc doc_before = b.manifest_doc;
            b.manifest_doc = manifest::insert_pocket(std::move(b.manifest_doc), pocket, encoded);
            audit.manifest_edit("pocket", obs.feature, doc_before, b.manifest_doc);
        }
    }
}

AttackOutcome run_guarded(const bundle::Bundle& b,
                          const std::function<void(bundle::Bundle&, Audit&)>& body) {
    AttackOutcome out;
    Audit audit(out.audit);
    try {
        bundle::Bundle work = b;
        body(work, audit);
        out.bundle = std::move(work);
    } catch (const Error& e) {
        out.audit.clear();
        out.error = e.what();
    }
    return out;
}

void mb1_body(bundle::Bundle& work, Audit& audit, const detectors::DrebinReport& report,
              uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coin(0, 1);
    for (const auto& obs : report.observations) {
        if (obs.weight <= 0.0)
            continue;
        std::string rest;
        if (auto kind = component_kind_of(obs.feature, rest)) {
            if (!doc_has_component(work.manifest_doc, *kind, rest))
                continue;
            manifest::Component c;
            c.kind = *kind;
            c.name = rest;
            manifest::ManifestDoc before = work.manifest_doc;
            extract_into(work, c);
            audit.manifest_edit("xinclude", obs.feature, before, work.manifest_doc);
        } else if (strip_prefix(obs.feature, "intent:", rest)) {
            // actions live on components; conceal the owning component
            for (const auto* c : work.manifest_doc.components()) {
                if (std::find(c->intent_actions.begin(), c->intent_actions.end(), rest) ==
                    c->intent_actions.end())
                    continue;
                manifest::Component target = *c;
                manifest::ManifestDoc before = work.manifest_doc;
                extract_into(work, target);
                audit.manifest_edit("xinclude", obs.feature, before, work.manifest_doc);
                break;
            }
        } else if (strip_prefix(obs.feature, "perm:", rest)) {
            manifest::PermissionRequest p{manifest::TagKind::UsesPermission, rest};
            if (!doc_has_permission(work.manifest_doc, p))
                continue;
            manifest::ManifestDoc before = work.manifest_doc;
            if (coin(rng) == 0) {
                try {
                    work.manifest_doc = manifest::to_group(std::move(work.manifest_doc), p);
                    audit.manifest_edit("to_group", obs.feature, before, work.manifest_doc);
                    continue;
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::NoGroupDefined)
                        throw;
                    work.manifest_doc = std::move(before);
                    before = work.manifest_doc;
                }
            }
            extract_into(work, p);
            audit.manifest_edit("xinclude", obs.feature, before, work.manifest_doc);
        }
    }
}

detectors::DrebinReport filter_report(const detectors::DrebinReport& report, bool want_manifest) {
    detectors::DrebinReport out = report;
    out.observations.clear();
    for (const auto& obs : report.observations)
        if (manifest_side(obs.category) == want_manifest)
            out.observations.push_back(obs);
    return out;
}

} // namespace

const char* to_string(AttackerModel am) {
    switch (am) {
    case AttackerModel::MA: return "MA";
    case AttackerModel::DA: return "DA";
    case AttackerModel::ZK: return "ZK";
    }
    return "?";
}

AttackTuple attack_tuple(const std::string& attack_name) {
    if (attack_name == "mb1" || attack_name == "mb2")
        return {AttackerModel::MA, false, true};
    if (attack_name == "mb3")
        return {AttackerModel::DA, false, true};
    if (attack_name == "mb4")
        return {AttackerModel::ZK, false, true};
    if (attack_name == "sb")
        return {AttackerModel::MA, true, false};
    if (attack_name == "combined")
        return {AttackerModel::MA, true, true};
    throw Error(ErrorKind::NotFound, "unknown attack: " + attack_name);
}

std::vector<std::string> attack_names() { return {"mb1", "mb2", "mb3", "mb4", "sb", "combined"}; }

AttackOutcome mb1(const bundle::Bundle& b, const detectors::DrebinReport& report, uint64_t seed) {
    return run_guarded(b, [&](bundle::Bundle& work, Audit& audit) {
        mb1_body(work, audit, report, seed);
    });
}

AttackOutcome mb2(const bundle::Bundle& b, const detectors::DrebinReport& report) {
    return run_guarded(b, [&](bundle::Bundle& work, Audit& audit) {
        for (const auto& obs : report.observations) {
            if (obs.weight <= 0.0 || obs.category != DrebinCategory::RequestedPermissionList)
                continue;
            std::string rest;
            if (!strip_prefix(obs.feature, "perm:", rest))
                continue;
            manifest::PermissionRequest p{manifest::TagKind::UsesPermission, rest};
            if (!doc_has_permission(work.manifest_doc, p))
                continue;
            manifest::ManifestDoc before = work.manifest_doc;
            work.manifest_doc = manifest::to_sdk23(std::move(work.manifest_doc), p);
            audit.manifest_edit("sdk23", obs.feature, before, work.manifest_doc);
        }
    });
}

AttackOutcome mb3(const bundle::Bundle& b, const std::vector<std::vector<std::string>>& families,
                  uint64_t seed) {
    return run_guarded(b, [&](bundle::Bundle& work, Audit& audit) {
        if (families.empty())
            throw Error(ErrorKind::ManipulationError, "no benign families to mimic");
        std::mt19937_64 rng(seed);
        size_t pick = std::uniform_int_distribution<size_t>(0, families.size() - 1)(rng);
        std::set<std::string> family(families[pick].begin(), families[pick].end());

        std::vector<manifest::PermissionRequest> snapshot;
        for (const auto* p : work.manifest_doc.permissions())
            if (p->tag_kind == manifest::TagKind::UsesPermission && !family.count(p->name))
                snapshot.push_back(*p);
        for (const auto& p : snapshot) {
            manifest::ManifestDoc before = work.manifest_doc;
            work.manifest_doc = manifest::to_sdk23(std::move(work.manifest_doc), p);
            audit.manifest_edit("sdk23", "perm:" + p.name, before, work.manifest_doc);
        }
    });
}

AttackOutcome mb4(const bundle::Bundle& b) {
    return run_guarded(b, [&](bundle::Bundle& work, Audit& audit) {
        std::vector<manifest::PermissionRequest> snapshot;
        for (const auto* p : work.manifest_doc.permissions())
            if (p->tag_kind == manifest::TagKind::UsesPermission)
                snapshot.push_back(*p);
        for (const auto& p : snapshot) {
            manifest::ManifestDoc before = work.manifest_doc;
            work.manifest_doc = manifest::to_sdk23(std::move(work.manifest_doc), p);
            audit.manifest_edit("sdk23", "perm:" + p.name, before, work.manifest_doc);
        }
    });
}

AttackOutcome sb(const bundle::Bundle& b, const detectors::DrebinReport& report) {
    return run_guarded(b, [&](bundle::Bundle& work, Audit& audit) {
        const auto& tables = DataTables::bundled();
        int pocket_counter = 0;
        for (const auto& obs : report.observations) {
            if (obs.weight <= 0.0 || manifest_side(obs.category))
                continue;
            apply_sb_observation(work, obs, pocket_counter, audit, tables);
        }
    });
}

AttackOutcome combined(const bundle::Bundle& b, const detectors::DrebinReport& report,
                       uint64_t seed) {
    AttackOutcome smali_half = sb(b, filter_report(report, false));
    if (!smali_half.bundle)
        return smali_half;
    AttackOutcome out = mb1(*smali_half.bundle, filter_report(report, true), seed);
    out.audit.insert(out.audit.begin(), smali_half.audit.begin(), smali_half.audit.end());
    return out;
}

FunctionalityVerdict validate_functionality(const bundle::Bundle& b, bool strict) {
    try {
        manifest::parse_manifest(manifest::serialize_manifest(b.manifest_doc));
    } catch (const Error&) {
        return {false, "ManifestError"};
    }

    auto includes = b.manifest_doc.includes();
    for (const auto* inc : includes)
        if (!b.include_files.count(inc->href))
            return {false, "UnresolvedInclude"};
    if (strict && !includes.empty())
        return {false, "XIncludeIgnored"};

    std::set<std::string> pockets;
    for (const auto* md : b.manifest_doc.metadata())
        pockets.insert(md->name);
    for (const auto& [path, file] : b.smali_program.files) {
        for (size_t i = 0; i < file.statements.size(); ++i) {
            const auto& s = file.statements[i];
            if (s.kind != smali::StatementKind::Invoke ||
                s.method.class_descriptor != smali::kPocketFetchClass ||
                s.method.method_name != smali::kPocketFetchMethod)
                continue;
            bool resolved = false;
            const std::string& reg = s.registers.empty() ? std::string() : s.registers.front();
            for (size_t k = i; k-- > 0;) {
                const auto& prev = file.statements[k];
                if (prev.kind == smali::StatementKind::ConstString && prev.reg == reg) {
                    resolved = pockets.count(prev.literal) > 0;
                    break;
                }
            }
            if (!resolved)
                return {false, "DanglingPocket"};
        }
    }
    return {true, ""};
}

} // namespace gauntlet::attacks
