#pragma once

#include <stdexcept>
#include <string>

namespace gauntlet {

enum class ErrorKind {
    MissingFile,
    ParseError,
    MetaSchemaError,
    IoError,
    InvalidSpec,
    InsufficientData,
    XmlSyntaxError,
    NoManifestRoot,
    NotFound,
    NoGroupDefined,
    NotAString,
    NotAnInvoke,
    UnresolvedInclude,
    DegenerateTraining,
    EmptyTestSet,
    ManipulationError,
};

/// Single exception type for the whole library; `kind` tells callers what failed.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MetaSchemaError: return "MetaSchemaError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::XmlSyntaxError: return "XmlSyntaxError";
    case ErrorKind::NoManifestRoot: return "NoManifestRoot";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::NoGroupDefined: return "NoGroupDefined";
    case ErrorKind::NotAString: return "NotAString";
    case ErrorKind::NotAnInvoke: return "NotAnInvoke";
    case ErrorKind::UnresolvedInclude: return "UnresolvedInclude";
    case ErrorKind::DegenerateTraining: return "DegenerateTraining";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::ManipulationError: return "ManipulationError";
    }
    return "Unknown";
}

} // namespace gauntlet
