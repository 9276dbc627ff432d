#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gauntlet::xml {

/// Plain ordered-attribute DOM element. Text content other than whitespace is
/// kept in `text` (mixed content is not needed for manifests).
struct Element {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<Element> children;
    std::string text;
    int line = 0;

    const std::string* attr(std::string_view key) const {
        for (const auto& [k, v] : attrs)
            if (k == key)
                return &v;
        return nullptr;
    }

    void set_attr(std::string_view key, std::string value) {
        for (auto& [k, v] : attrs) {
            if (k == key) {
                v = std::move(value);
                return;
            }
        }
        attrs.emplace_back(std::string(key), std::move(value));
    }
};

/// Parses a single-root XML document. Throws Error(XmlSyntaxError) with line
/// and column on malformed input. Comments and the <?xml?> declaration are
/// skipped; entities &amp; &lt; &gt; &quot; &apos; are decoded.
Element parse(std::string_view text);

/// Pretty-prints with 4-space indentation and an XML declaration.
std::string serialize(const Element& root);

std::string serialize_fragment(const Element& el);

} // namespace gauntlet::xml
