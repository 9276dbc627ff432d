#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace gauntlet::smali {

struct MethodRef {
    std::string class_descriptor; // Lwap/cash/DownloadActivity;
    std::string method_name;
    std::string signature; // (Ljava/lang/String;)Ljava/lang/Object;

    std::string full() const { return class_descriptor + "->" + method_name + signature; }
};

enum class StatementKind { ConstString, Invoke, Raw };

enum class InvokeKind { Virtual, Static, Direct };

/// One physical line. `raw` is always the exact serialized form; ConstString
/// and Invoke additionally carry parsed fields.
struct Statement {
    StatementKind kind = StatementKind::Raw;
    std::string raw;

    // ConstString
    std::string reg;
    std::string literal;

    // Invoke
    InvokeKind invoke_kind = InvokeKind::Virtual;
    std::vector<std::string> registers;
    MethodRef method;
};

Statement make_const_string(const std::string& reg, const std::string& literal);
Statement make_raw(const std::string& line);
Statement make_invoke(InvokeKind kind, const std::vector<std::string>& registers,
                      const MethodRef& method);

struct SmaliFile {
    std::string class_descriptor;
    std::vector<Statement> statements;
};

struct SmaliProgram {
    std::map<std::string, SmaliFile> files; // relative path -> file
};

/// Total parser: lines outside the subset grammar become Raw and round-trip
/// byte-exactly.
SmaliFile parse_smali(const std::string& text);

std::string serialize_smali(const SmaliFile& f);

enum class TargetKind { Url, ApiCall, Ip, Other };

struct Target {
    std::string path;
    size_t index = 0;
    TargetKind kind = TargetKind::Other;
};

/// Const-strings containing an observation and invokes whose method name or
/// descriptor matches one.
std::vector<Target> find_targets(const SmaliProgram& p,
                                 const std::vector<std::string>& observations);

/// Replaces the literal with its base64 form and appends the decode sequence.
/// Dotted-quad literals are first turned into their 32-bit integer decimal
/// string. Returns the encoded literal through `encoded_out` when non-null.
SmaliFile encode_string(SmaliFile f, size_t index, std::string* encoded_out = nullptr);

/// Replaces every invoke of the targeted method with a reflection sequence;
/// the plaintext method name no longer appears anywhere in the file.
SmaliFile reflect_call(SmaliFile f, size_t index, const std::string& encoded_name);

/// Replaces an encoded const-string with a stub that fetches the value from
/// the named manifest pocket into the original register.
SmaliFile pocket_fetch_code(SmaliFile f, size_t index, const std::string& pocket_name);

/// Descriptor of the pocket retrieval helper; functionality validation keys
/// off invokes of this method.
extern const char* kPocketFetchClass;
extern const char* kPocketFetchMethod;

} // namespace gauntlet::smali
