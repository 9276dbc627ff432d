#include "gauntlet/smali.hpp"

#include "gauntlet/errors.hpp"
#include "gauntlet/util.hpp"

#include <algorithm>
#include <regex>

namespace gauntlet::smali {

const char* kPocketFetchClass = "Lapp/PocketStore;";
const char* kPocketFetchMethod = "fetch";

namespace {

const std::regex kConstStringRe(R"re(^\s*const-string\s+([vp]\d+)\s*,\s*"(.*)"\s*$)re");
const std::regex kInvokeRe(
    R"(^\s*invoke-(virtual|static|direct)\s*\{([^}]*)\}\s*,\s*(L[^;]+;)->([A-Za-z0-9_$<>]+)(\(.*)$)");
const std::regex kClassRe(R"(^\s*\.class\s+(?:[a-z ]*\s)?(L[^;]+;)\s*$)");
const std::regex kVRegRe(R"(\bv(\d+)\b)");

bool valid_register(const std::string& r) {
    if (r.size() < 2 || (r[0] != 'v' && r[0] != 'p'))
        return false;
    return std::all_of(r.begin() + 1, r.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

Statement classify_line(const std::string& line) {
    std::smatch m;
    if (std::regex_match(line, m, kConstStringRe)) {
        Statement s;
        s.kind = StatementKind::ConstString;
        s.raw = line;
        s.reg = m[1];
        s.literal = m[2];
        return s;
    }
    if (std::regex_match(line, m, kInvokeRe)) {
        Statement s;
        s.kind = StatementKind::Invoke;
        s.raw = line;
        s.invoke_kind = m[1] == "virtual" ? InvokeKind::Virtual
                        : m[1] == "static" ? InvokeKind::Static
                                           : InvokeKind::Direct;
        for (auto& reg : util::split(m[2].str(), ',')) {
            std::string trimmed = util::trim(reg);
            if (trimmed.empty())
                continue;
            if (!valid_register(trimmed))
                return make_raw(line); // out-of-subset register syntax
            s.registers.push_back(trimmed);
        }
        s.method.class_descriptor = m[3];
        s.method.method_name = m[4];
        s.method.signature = m[5];
        return s;
    }
    return make_raw(line);
}

/// Smallest local register number above every vN mentioned in the file.
int fresh_register_base(const SmaliFile& f) {
    int max_reg = -1;
    for (const auto& s : f.statements) {
        auto begin = std::sregex_iterator(s.raw.begin(), s.raw.end(), kVRegRe);
        for (auto it = begin; it != std::sregex_iterator(); ++it)
            max_reg = std::max(max_reg, std::stoi((*it)[1]));
    }
    return max_reg + 1;
}

std::vector<Statement> decode_sequence(const std::string& target_reg, const std::string& flag_reg) {
    return {
        make_raw("    const/4 " + flag_reg + ", 0x0"),
        make_invoke(InvokeKind::Static, {target_reg, flag_reg},
                    {"Landroid/util/Base64;", "decode", "(Ljava/lang/String;I)[B"}),
        make_raw("    move-result-object " + target_reg),
    };
}

} // namespace

Statement make_const_string(const std::string& reg, const std::string& literal) {
    Statement s;
    s.kind = StatementKind::ConstString;
    s.reg = reg;
    s.literal = literal;
    s.raw = "    const-string " + reg + ", \"" + literal + "\"";
    return s;
}

Statement make_raw(const std::string& line) {
    Statement s;
    s.kind = StatementKind::Raw;
    s.raw = line;
    return s;
}

Statement make_invoke(InvokeKind kind, const std::vector<std::string>& registers,
                      const MethodRef& method) {
    Statement s;
    s.kind = StatementKind::Invoke;
    s.invoke_kind = kind;
    s.registers = registers;
    s.method = method;
    std::string regs;
    for (size_t i = 0; i < registers.size(); ++i) {
        if (i)
            regs += ", ";
        regs += registers[i];
    }
    const char* kw = kind == InvokeKind::Virtual ? "invoke-virtual"
                     : kind == InvokeKind::Static ? "invoke-static"
                                                  : "invoke-direct";
    s.raw = "    " + std::string(kw) + " {" + regs + "}, " + method.full();
    return s;
}

SmaliFile parse_smali(const std::string& text) {
    SmaliFile f;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        std::string line;
        if (end == std::string::npos) {
            line = text.substr(start);
            start = text.size();
        } else {
            line = text.substr(start, end - start);
            start = end + 1;
        }
        Statement s = classify_line(line);
        if (f.class_descriptor.empty()) {
            std::smatch m;
            if (std::regex_match(line, m, kClassRe))
                f.class_descriptor = m[1];
        }
        f.statements.push_back(std::move(s));
    }
    return f;
}

std::string serialize_smali(const SmaliFile& f) {
    std::string out;
    for (const auto& s : f.statements) {
        out += s.raw;
        out += '\n';
    }
    return out;
}

std::vector<Target> find_targets(const SmaliProgram& p,
                                 const std::vector<std::string>& observations) {
    static const std::regex kSchemeRe(R"(^[A-Za-z][A-Za-z0-9+.-]*://.*)");
    std::vector<Target> targets;
    for (const auto& [path, file] : p.files) {
        for (size_t i = 0; i < file.statements.size(); ++i) {
            const Statement& s = file.statements[i];
            if (s.kind == StatementKind::ConstString) {
                bool hit = std::any_of(observations.begin(), observations.end(),
                                       [&](const std::string& obs) {
                                           return !obs.empty() &&
                                                  s.literal.find(obs) != std::string::npos;
                                       });
                if (!hit)
                    continue;
                TargetKind kind = TargetKind::Other;
                if (util::is_ipv4(s.literal))
                    kind = TargetKind::Ip;
                else if (std::regex_match(s.literal, kSchemeRe))
                    kind = TargetKind::Url;
                targets.push_back({path, i, kind});
            } else if (s.kind == StatementKind::Invoke) {
                bool hit = std::any_of(
                    observations.begin(), observations.end(), [&](const std::string& obs) {
                        return !obs.empty() && (s.method.method_name == obs ||
                                                s.method.full().find(obs) != std::string::npos);
                    });
                if (hit)
                    targets.push_back({path, i, TargetKind::ApiCall});
            }
        }
    }
    return targets;
}

SmaliFile encode_string(SmaliFile f, size_t index, std::string* encoded_out) {
    if (index >= f.statements.size() || f.statements[index].kind != StatementKind::ConstString)
        throw Error(ErrorKind::NotAString, "encode_string target is not a const-string");
    Statement& stmt = f.statements[index];
    std::string payload = stmt.literal;
    if (util::is_ipv4(payload))
        payload = std::to_string(util::ipv4_to_u32(payload));
    std::string encoded = util::base64_encode(payload);
    if (encoded_out)
        *encoded_out = encoded;

    std::string flag_reg = "v" + std::to_string(fresh_register_base(f));
    std::string reg = stmt.reg;
    stmt = make_const_string(reg, encoded);
    auto seq = decode_sequence(reg, flag_reg);
    f.statements.insert(f.statements.begin() + static_cast<ptrdiff_t>(index) + 1, seq.begin(),
                        seq.end());
    return f;
}

SmaliFile reflect_call(SmaliFile f, size_t index, const std::string& encoded_name) {
    if (index >= f.statements.size() || f.statements[index].kind != StatementKind::Invoke)
        throw Error(ErrorKind::NotAnInvoke, "reflect_call target is not an invoke");
    const std::string method_name = f.statements[index].method.method_name;

    int base = fresh_register_base(f);
    std::string r_name = "v" + std::to_string(base);     // decoded method name
    std::string r_method = "v" + std::to_string(base + 1); // Method object
    std::string r_args = "v" + std::to_string(base + 2);   // argument array
    std::string r_flag = "v" + std::to_string(base + 3);

    // Every invoke of the same method gets rewritten so the plaintext name is
    // fully erased from the file.
    for (size_t i = f.statements.size(); i-- > 0;) {
        const Statement& s = f.statements[i];
        if (s.kind != StatementKind::Invoke || s.method.method_name != method_name)
            continue;
        std::string receiver = s.registers.empty() ? "p0" : s.registers[0];
        std::vector<Statement> seq;
        seq.push_back(make_const_string(r_name, encoded_name));
        auto decode = decode_sequence(r_name, r_flag);
        seq.insert(seq.end(), decode.begin(), decode.end());
        seq.push_back(make_invoke(InvokeKind::Static, {r_name},
                                  {"Ljava/lang/String;", "valueOf",
                                   "(Ljava/lang/Object;)Ljava/lang/String;"}));
        seq.push_back(make_raw("    move-result-object " + r_name));
        seq.push_back(make_invoke(InvokeKind::Virtual, {receiver},
                                  {"Ljava/lang/Object;", "getClass", "()Ljava/lang/Class;"}));
        seq.push_back(make_raw("    move-result-object " + r_method));
        seq.push_back(make_raw("    new-array " + r_args + ", " + r_flag + ", [Ljava/lang/Object;"));
        seq.push_back(make_invoke(
            InvokeKind::Virtual, {r_method, r_name, r_args},
            {"Ljava/lang/Class;", "getDeclaredMethod",
             "(Ljava/lang/String;[Ljava/lang/Class;)Ljava/lang/reflect/Method;"}));
        seq.push_back(make_raw("    move-result-object " + r_method));
        seq.push_back(make_invoke(InvokeKind::Virtual, {r_method, receiver, r_args},
                                  {"Ljava/lang/reflect/Method;", "invoke",
                                   "(Ljava/lang/Object;[Ljava/lang/Object;)Ljava/lang/Object;"}));
        f.statements.erase(f.statements.begin() + static_cast<ptrdiff_t>(i));
        f.statements.insert(f.statements.begin() + static_cast<ptrdiff_t>(i), seq.begin(),
                            seq.end());
    }
    return f;
}

SmaliFile pocket_fetch_code(SmaliFile f, size_t index, const std::string& pocket_name) {
    if (index >= f.statements.size() || f.statements[index].kind != StatementKind::ConstString)
        throw Error(ErrorKind::NotAString, "pocket_fetch_code target is not a const-string");
    std::string reg = f.statements[index].reg;
    std::vector<Statement> seq = {
        make_const_string(reg, pocket_name),
        make_invoke(InvokeKind::Static, {reg},
                    {kPocketFetchClass, kPocketFetchMethod,
                     "(Ljava/lang/String;)Ljava/lang/String;"}),
        make_raw("    move-result-object " + reg),
    };
    f.statements.erase(f.statements.begin() + static_cast<ptrdiff_t>(index));
    f.statements.insert(f.statements.begin() + static_cast<ptrdiff_t>(index), seq.begin(),
                        seq.end());
    return f;
}

} // namespace gauntlet::smali
