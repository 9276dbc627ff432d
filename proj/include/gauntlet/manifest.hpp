#pragma once

#include "gauntlet/data_tables.hpp"
#include "gauntlet/xml.hpp"

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gauntlet::manifest {

enum class TagKind { UsesPermission, UsesPermissionSdk23, CustomPermission };

struct PermissionRequest {
    TagKind tag_kind = TagKind::UsesPermission;
    std::string name; // dotted constant, e.g. android.permission.READ_SMS

    bool operator==(const PermissionRequest&) const = default;
};

enum class ComponentKind { Activity, Service, Receiver, Provider };

const char* to_string(ComponentKind kind);

struct Component {
    ComponentKind kind = ComponentKind::Activity;
    std::string name;
    std::vector<std::string> intent_actions;
    /// Original child elements, kept verbatim when the component came from
    /// parsed XML. Empty for programmatically built components, in which case
    /// serialization synthesizes an intent-filter from intent_actions.
    std::vector<xml::Element> raw_children;
};

struct MetaDataEntry {
    std::string name;
    std::string value;

    bool operator==(const MetaDataEntry&) const = default;
};

struct IncludeRef {
    std::string href; // relative to the bundle root
    std::string replaced_description;
};

struct OpaqueNode {
    xml::Element element;
};

using Item = std::variant<PermissionRequest, Component, MetaDataEntry, IncludeRef, OpaqueNode>;

/// Ordered model of AndroidManifest.xml. Permission tags live among
/// `top_items`; components and meta-data live among `app_items` (inside
/// <application>). Includes may appear in either list. Unknown elements are
/// preserved as OpaqueNode in their original position.
struct ManifestDoc {
    std::string package_name;
    std::vector<std::pair<std::string, std::string>> root_attrs;
    std::vector<Item> top_items;
    bool has_application = false;
    std::vector<std::pair<std::string, std::string>> application_attrs;
    std::vector<Item> app_items;

    std::vector<const PermissionRequest*> permissions() const;
    std::vector<const Component*> components() const;
    std::vector<const MetaDataEntry*> metadata() const;
    std::vector<const IncludeRef*> includes() const;

    std::vector<std::string> intent_actions() const;
};

ManifestDoc parse_manifest(const std::string& text);

std::string serialize_manifest(const ManifestDoc& doc);

/// Renames the matching uses-permission tag to uses-permission-sdk-23.
ManifestDoc to_sdk23(ManifestDoc doc, const PermissionRequest& p);

/// Replaces the permission constant with its superior group constant.
ManifestDoc to_group(ManifestDoc doc, const PermissionRequest& p,
                     const DataTables& tables = DataTables::bundled());

using IncludeTarget = std::variant<PermissionRequest, Component>;

struct ExtractionResult {
    ManifestDoc doc;
    std::string include_path; // relative path of the new include file
    std::string include_xml;  // exactly the removed element
};

/// Cuts the target element out of the document, leaving an xi:include at its
/// former position. Generated include paths never collide within a document.
ExtractionResult extract_to_include(ManifestDoc doc, const IncludeTarget& target);

/// Adds a meta-data pocket; a colliding name gets the smallest free `_k` suffix.
ManifestDoc insert_pocket(ManifestDoc doc, const std::string& name, const std::string& value);

/// Semantic document equality: package, permissions, components (kind, name,
/// actions), metadata, include hrefs.
bool semantically_equal(const ManifestDoc& a, const ManifestDoc& b);

} // namespace gauntlet::manifest
