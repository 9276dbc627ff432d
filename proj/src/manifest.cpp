#include "gauntlet/manifest.hpp"

#include "gauntlet/errors.hpp"

#include <algorithm>
#include <set>

namespace gauntlet::manifest {

namespace {

constexpr const char* kAndroidNs = "http://schemas.android.com/apk/res/android";
constexpr const char* kXIncludeNs = "http://www.w3.org/2001/XInclude";

bool is_include_tag(const std::string& name) {
    return name == "xi:include" || name == "include";
}

std::string attr_or(const xml::Element& el, const char* key, const std::string& fallback = "") {
    const std::string* v = el.attr(key);
    return v ? *v : fallback;
}

std::string android_name(const xml::Element& el) {
    if (const std::string* v = el.attr("android:name"))
        return *v;
    return attr_or(el, "name");
}

bool component_kind_of(const std::string& tag, ComponentKind& out) {
    if (tag == "activity")
        out = ComponentKind::Activity;
    else if (tag == "service")
        out = ComponentKind::Service;
    else if (tag == "receiver")
        out = ComponentKind::Receiver;
    else if (tag == "provider")
        out = ComponentKind::Provider;
    else
        return false;
    return true;
}

Component parse_component(const xml::Element& el, ComponentKind kind) {
    Component c;
    c.kind = kind;
    c.name = android_name(el);
    c.raw_children = el.children;
    for (const auto& child : el.children) {
        if (child.name != "intent-filter")
            continue;
        for (const auto& inner : child.children)
            if (inner.name == "action")
                c.intent_actions.push_back(android_name(inner));
    }
    return c;
}

Item parse_item(const xml::Element& el) {
    if (el.name == "uses-permission")
        return PermissionRequest{TagKind::UsesPermission, android_name(el)};
    if (el.name == "uses-permission-sdk-23")
        return PermissionRequest{TagKind::UsesPermissionSdk23, android_name(el)};
    if (el.name == "permission")
        return PermissionRequest{TagKind::CustomPermission, android_name(el)};
    if (el.name == "meta-data")
        return MetaDataEntry{android_name(el), attr_or(el, "android:value", attr_or(el, "value"))};
    if (is_include_tag(el.name))
        return IncludeRef{attr_or(el, "href"), ""};
    ComponentKind kind;
    if (component_kind_of(el.name, kind))
        return parse_component(el, kind);
    return OpaqueNode{el};
}

xml::Element permission_element(const PermissionRequest& p) {
    xml::Element el;
    switch (p.tag_kind) {
    case TagKind::UsesPermission: el.name = "uses-permission"; break;
    case TagKind::UsesPermissionSdk23: el.name = "uses-permission-sdk-23"; break;
    case TagKind::CustomPermission: el.name = "permission"; break;
    }
    el.set_attr("android:name", p.name);
    return el;
}

xml::Element component_element(const Component& c) {
    xml::Element el;
    el.name = to_string(c.kind);
    el.set_attr("android:name", c.name);
    if (!c.raw_children.empty()) {
        el.children = c.raw_children;
    } else if (!c.intent_actions.empty()) {
        xml::Element filter;
        filter.name = "intent-filter";
        for (const auto& action : c.intent_actions) {
            xml::Element a;
            a.name = "action";
            a.set_attr("android:name", action);
            filter.children.push_back(std::move(a));
        }
        el.children.push_back(std::move(filter));
    }
    return el;
}

xml::Element item_element(const Item& item) {
    return std::visit(
        [](const auto& v) -> xml::Element {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PermissionRequest>) {
                return permission_element(v);
            } else if constexpr (std::is_same_v<T, Component>) {
                return component_element(v);
            } else if constexpr (std::is_same_v<T, MetaDataEntry>) {
                xml::Element el;
                el.name = "meta-data";
                el.set_attr("android:name", v.name);
                el.set_attr("android:value", v.value);
                return el;
            } else if constexpr (std::is_same_v<T, IncludeRef>) {
                xml::Element el;
                el.name = "xi:include";
                el.set_attr("href", v.href);
                return el;
            } else {
                return v.element;
            }
        },
        item);
}

template <typename T>
void collect(const std::vector<Item>& items, std::vector<const T*>& out) {
    for (const auto& item : items)
        if (const T* v = std::get_if<T>(&item))
            out.push_back(v);
}

/// Position of the matching permission item, or npos.
size_t find_permission(const std::vector<Item>& items, const PermissionRequest& p) {
    for (size_t i = 0; i < items.size(); ++i) {
        const auto* pr = std::get_if<PermissionRequest>(&items[i]);
        if (pr && pr->tag_kind == p.tag_kind && pr->name == p.name)
            return i;
    }
    return std::string::npos;
}

} // namespace

const char* to_string(ComponentKind kind) {
    switch (kind) {
    case ComponentKind::Activity: return "activity";
    case ComponentKind::Service: return "service";
    case ComponentKind::Receiver: return "receiver";
    case ComponentKind::Provider: return "provider";
    }
    return "activity";
}

std::vector<const PermissionRequest*> ManifestDoc::permissions() const {
    std::vector<const PermissionRequest*> out;
    collect(top_items, out);
    collect(app_items, out);
    return out;
}

std::vector<const Component*> ManifestDoc::components() const {
    std::vector<const Component*> out;
    collect(top_items, out);
    collect(app_items, out);
    return out;
}

std::vector<const MetaDataEntry*> ManifestDoc::metadata() const {
    std::vector<const MetaDataEntry*> out;
    collect(top_items, out);
    collect(app_items, out);
    return out;
}

std::vector<const IncludeRef*> ManifestDoc::includes() const {
    std::vector<const IncludeRef*> out;
    collect(top_items, out);
    collect(app_items, out);
    return out;
}

std::vector<std::string> ManifestDoc::intent_actions() const {
    std::vector<std::string> out;
    for (const Component* c : components())
        out.insert(out.end(), c->intent_actions.begin(), c->intent_actions.end());
    return out;
}

ManifestDoc parse_manifest(const std::string& text) {
    xml::Element root = xml::parse(text);
    if (root.name != "manifest")
        throw Error(ErrorKind::NoManifestRoot,
                    "expected <manifest> root element, found <" + root.name + ">");
    ManifestDoc doc;
    doc.root_attrs = root.attrs;
    doc.package_name = attr_or(root, "package");
    for (const auto& child : root.children) {
        if (child.name == "application") {
            doc.has_application = true;
            doc.application_attrs = child.attrs;
            for (const auto& inner : child.children)
                doc.app_items.push_back(parse_item(inner));
        } else {
            doc.top_items.push_back(parse_item(child));
        }
    }
    return doc;
}

std::string serialize_manifest(const ManifestDoc& doc) {
    xml::Element root;
    root.name = "manifest";
    root.attrs = doc.root_attrs;
    if (!root.attr("xmlns:android"))
        root.set_attr("xmlns:android", kAndroidNs);
    if (!doc.includes().empty() && !root.attr("xmlns:xi"))
        root.set_attr("xmlns:xi", kXIncludeNs);
    root.set_attr("package", doc.package_name);
    for (const auto& item : doc.top_items)
        root.children.push_back(item_element(item));
    if (doc.has_application || !doc.app_items.empty()) {
        xml::Element app;
        app.name = "application";
        app.attrs = doc.application_attrs;
        for (const auto& item : doc.app_items)
            app.children.push_back(item_element(item));
        root.children.push_back(std::move(app));
    }
    return xml::serialize(root);
}

ManifestDoc to_sdk23(ManifestDoc doc, const PermissionRequest& p) {
    if (p.tag_kind != TagKind::UsesPermission)
        throw Error(ErrorKind::NotFound,
                    "to_sdk23 applies only to uses-permission tags: " + p.name);
    size_t pos = find_permission(doc.top_items, p);
    if (pos != std::string::npos) {
        std::get<PermissionRequest>(doc.top_items[pos]).tag_kind = TagKind::UsesPermissionSdk23;
        return doc;
    }
    pos = find_permission(doc.app_items, p);
    if (pos != std::string::npos) {
        std::get<PermissionRequest>(doc.app_items[pos]).tag_kind = TagKind::UsesPermissionSdk23;
        return doc;
    }
    throw Error(ErrorKind::NotFound, "permission tag not found: " + p.name);
}

ManifestDoc to_group(ManifestDoc doc, const PermissionRequest& p, const DataTables& tables) {
    auto group = tables.group_of(p.name);
    if (!group)
        throw Error(ErrorKind::NoGroupDefined, "no superior group for " + p.name);
    size_t pos = find_permission(doc.top_items, p);
    std::vector<Item>* items = &doc.top_items;
    if (pos == std::string::npos) {
        pos = find_permission(doc.app_items, p);
        items = &doc.app_items;
    }
    if (pos == std::string::npos)
        throw Error(ErrorKind::NotFound, "permission tag not found: " + p.name);
    std::get<PermissionRequest>((*items)[pos]).name = *group;
    return doc;
}

ExtractionResult extract_to_include(ManifestDoc doc, const IncludeTarget& target) {
    std::set<std::string> used;
    for (const IncludeRef* inc : doc.includes())
        used.insert(inc->href);

    auto matches = [&](const Item& item) {
        if (const auto* p = std::get_if<PermissionRequest>(&target)) {
            const auto* pr = std::get_if<PermissionRequest>(&item);
            return pr && pr->tag_kind == p->tag_kind && pr->name == p->name;
        }
        const auto& c = std::get<Component>(target);
        const auto* comp = std::get_if<Component>(&item);
        return comp && comp->kind == c.kind && comp->name == c.name;
    };

    for (std::vector<Item>* items : {&doc.top_items, &doc.app_items}) {
        for (size_t i = 0; i < items->size(); ++i) {
            if (!matches((*items)[i]))
                continue;
            int k = 0;
            std::string path;
            do {
                path = "includes/inc_" + std::to_string(k) + ".xml";
                ++k;
            } while (used.count(path));

            xml::Element extracted = item_element((*items)[i]);
            std::string description = extracted.name + " " + android_name(extracted);
            (*items)[i] = IncludeRef{path, description};
            ExtractionResult result;
            result.include_path = path;
            result.include_xml = xml::serialize(extracted);
            result.doc = std::move(doc);
            return result;
        }
    }
    throw Error(ErrorKind::NotFound, "extraction target not present in manifest");
}

ManifestDoc insert_pocket(ManifestDoc doc, const std::string& name, const std::string& value) {
    std::set<std::string> names;
    for (const MetaDataEntry* m : doc.metadata())
        names.insert(m->name);
    std::string unique = name;
    int k = 0;
    while (names.count(unique)) {
        unique = name + "_" + std::to_string(k);
        ++k;
    }
    doc.has_application = true;
    doc.app_items.push_back(MetaDataEntry{unique, value});
    return doc;
}

bool semantically_equal(const ManifestDoc& a, const ManifestDoc& b) {
    if (a.package_name != b.package_name)
        return false;
    auto perms = [](const ManifestDoc& d) {
        std::vector<std::pair<int, std::string>> v;
        for (const auto* p : d.permissions())
            v.emplace_back(static_cast<int>(p->tag_kind), p->name);
        return v;
    };
    auto comps = [](const ManifestDoc& d) {
        std::vector<std::tuple<int, std::string, std::vector<std::string>>> v;
        for (const auto* c : d.components())
            v.emplace_back(static_cast<int>(c->kind), c->name, c->intent_actions);
        return v;
    };
    auto metas = [](const ManifestDoc& d) {
        std::vector<std::pair<std::string, std::string>> v;
        for (const auto* m : d.metadata())
            v.emplace_back(m->name, m->value);
        return v;
    };
    auto incs = [](const ManifestDoc& d) {
        std::vector<std::string> v;
        for (const auto* i : d.includes())
            v.push_back(i->href);
        return v;
    };
    return perms(a) == perms(b) && comps(a) == comps(b) && metas(a) == metas(b) &&
           incs(a) == incs(b);
}

} // namespace gauntlet::manifest
