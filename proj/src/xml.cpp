#include "gauntlet/xml.hpp"

#include "gauntlet/errors.hpp"
#include "gauntlet/util.hpp"

#include <cctype>
#include <sstream>

namespace gauntlet::xml {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Element parse_document() {
        skip_prolog();
        if (pos_ >= text_.size() || text_[pos_] != '<')
            fail("expected root element");
        Element root = parse_element();
        skip_misc();
        if (pos_ < text_.size())
            fail("trailing content after root element");
        return root;
    }

private:
    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;

    [[noreturn]] void fail(const std::string& msg) {
        int col = 1;
        size_t p = pos_;
        while (p > 0 && text_[p - 1] != '\n') {
            --p;
            ++col;
        }
        throw Error(ErrorKind::XmlSyntaxError, "xml syntax error at line " +
                                                   std::to_string(line_) + ", column " +
                                                   std::to_string(col) + ": " + msg);
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n')
            ++line_;
        return c;
    }

    bool starts_with(std::string_view s) const {
        return text_.substr(pos_, s.size()) == s;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(peek())))
            advance();
    }

    void skip_comment() {
        // pos_ at "<!--"
        pos_ += 4;
        size_t end = text_.find("-->", pos_);
        if (end == std::string_view::npos)
            fail("unterminated comment");
        for (size_t i = pos_; i < end; ++i)
            if (text_[i] == '\n')
                ++line_;
        pos_ = end + 3;
    }

    void skip_misc() {
        while (true) {
            skip_ws();
            if (starts_with("<!--")) {
                skip_comment();
                continue;
            }
            break;
        }
    }

    void skip_prolog() {
        skip_ws();
        if (starts_with("<?")) {
            size_t end = text_.find("?>", pos_);
            if (end == std::string_view::npos)
                fail("unterminated declaration");
            pos_ = end + 2;
        }
        skip_misc();
    }

    std::string parse_name() {
        size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                c == ':' || c == '.')
                advance();
            else
                break;
        }
        if (pos_ == start)
            fail("expected a name");
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string decode_entities(std::string_view raw) {
        std::string out;
        out.reserve(raw.size());
        for (size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out += raw[i];
                continue;
            }
            auto rest = raw.substr(i);
            if (rest.rfind("&amp;", 0) == 0) {
                out += '&';
                i += 4;
            } else if (rest.rfind("&lt;", 0) == 0) {
                out += '<';
                i += 3;
            } else if (rest.rfind("&gt;", 0) == 0) {
                out += '>';
                i += 3;
            } else if (rest.rfind("&quot;", 0) == 0) {
                out += '"';
                i += 5;
            } else if (rest.rfind("&apos;", 0) == 0) {
                out += '\'';
                i += 5;
            } else {
                out += '&';
            }
        }
        return out;
    }

    Element parse_element() {
        Element el;
        el.line = line_;
        advance(); // '<'
        el.name = parse_name();
        while (true) {
            skip_ws();
            char c = peek();
            if (c == '\0')
                fail("unterminated start tag for <" + el.name + ">");
            if (c == '/') {
                advance();
                if (peek() != '>')
                    fail("expected '>' after '/'");
                advance();
                return el;
            }
            if (c == '>') {
                advance();
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (peek() != '=')
                fail("expected '=' after attribute name");
            advance();
            skip_ws();
            char quote = peek();
            if (quote != '"' && quote != '\'')
                fail("expected quoted attribute value");
            advance();
            size_t start = pos_;
            while (pos_ < text_.size() && peek() != quote)
                advance();
            if (pos_ >= text_.size())
                fail("unterminated attribute value");
            std::string value = decode_entities(text_.substr(start, pos_ - start));
            advance();
            el.attrs.emplace_back(std::move(key), std::move(value));
        }
        // children / text
        std::string text;
        while (true) {
            if (pos_ >= text_.size())
                fail("missing closing tag for <" + el.name + ">");
            if (starts_with("<!--")) {
                skip_comment();
                continue;
            }
            if (starts_with("</")) {
                pos_ += 2;
                std::string closing = parse_name();
                if (closing != el.name)
                    fail("mismatched closing tag </" + closing + "> for <" + el.name + ">");
                skip_ws();
                if (peek() != '>')
                    fail("expected '>' in closing tag");
                advance();
                el.text = util::trim(decode_entities(text));
                return el;
            }
            if (peek() == '<') {
                el.children.push_back(parse_element());
                continue;
            }
            text += advance();
        }
    }
};

void encode_into(std::string& out, std::string_view raw, bool in_attr) {
    for (char c : raw) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"':
            out += in_attr ? "&quot;" : "\"";
            break;
        default: out += c;
        }
    }
}

void write_element(std::string& out, const Element& el, int depth) {
    out.append(static_cast<size_t>(depth) * 4, ' ');
    out += '<';
    out += el.name;
    for (const auto& [k, v] : el.attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        encode_into(out, v, true);
        out += '"';
    }
    if (el.children.empty() && el.text.empty()) {
        out += "/>\n";
        return;
    }
    out += '>';
    if (el.children.empty()) {
        encode_into(out, el.text, false);
        out += "</";
        out += el.name;
        out += ">\n";
        return;
    }
    out += '\n';
    for (const auto& child : el.children)
        write_element(out, child, depth + 1);
    if (!el.text.empty()) {
        out.append(static_cast<size_t>(depth + 1) * 4, ' ');
        encode_into(out, el.text, false);
        out += '\n';
    }
    out.append(static_cast<size_t>(depth) * 4, ' ');
    out += "</";
    out += el.name;
    out += ">\n";
}

} // namespace

Element parse(std::string_view text) {
    return Parser(text).parse_document();
}

std::string serialize(const Element& root) {
    std::string out = "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
    write_element(out, root, 0);
    return out;
}

std::string serialize_fragment(const Element& el) {
    std::string out;
    write_element(out, el, 0);
    return out;
}

} // namespace gauntlet::xml
