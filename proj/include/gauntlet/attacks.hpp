#pragma once

#include "gauntlet/bundle.hpp"
#include "gauntlet/detectors.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gauntlet::attacks {

enum class AttackerModel { MA, DA, ZK };

const char* to_string(AttackerModel am);

struct AttackTuple {
    AttackerModel attacker_model = AttackerModel::MA;
    bool smali_access = false;
    bool manifest_access = false;
};

/// Table of the six attacks: mb1/mb2 = (MA,0,1), mb3 = (DA,0,1),
/// mb4 = (ZK,0,1), sb = (MA,1,0), combined = (MA,1,1).
AttackTuple attack_tuple(const std::string& attack_name);

std::vector<std::string> attack_names();

struct AuditEntry {
    std::string kind;     // to_group | xinclude | sdk23 | encode | reflect | pocket
    std::string location; // feature id or smali path
    std::string before_digest;
    std::string after_digest;
};

struct AttackOutcome {
    std::optional<bundle::Bundle> bundle; // set iff error is empty
    std::vector<AuditEntry> audit;
    std::optional<std::string> error;
};

/// MA manifest attack: positively weighted component observations move into
/// include files; positively weighted permissions flip a seeded coin between
/// group substitution and include extraction.
AttackOutcome mb1(const bundle::Bundle& b, const detectors::DrebinReport& report, uint64_t seed);

/// MA manifest attack: every positively weighted permission request switches
/// to a uses-permission-sdk-23 tag.
AttackOutcome mb2(const bundle::Bundle& b, const detectors::DrebinReport& report);

/// DA manifest attack: mimic a seeded pick among the top benign permission
/// families; every request outside the chosen family goes sdk-23.
AttackOutcome mb3(const bundle::Bundle& b, const std::vector<std::vector<std::string>>& families,
                  uint64_t seed);

/// ZK manifest attack: all uses-permission tags go sdk-23, unconditionally.
AttackOutcome mb4(const bundle::Bundle& b);

/// MA smali attack: encode flagged strings, reflect flagged API calls, stash
/// encoded values in manifest pockets. Never touches permission tags.
AttackOutcome sb(const bundle::Bundle& b, const detectors::DrebinReport& report);

/// Smali-side observations through sb, then manifest-side through mb1.
AttackOutcome combined(const bundle::Bundle& b, const detectors::DrebinReport& report,
                       uint64_t seed);

struct FunctionalityVerdict {
    bool functional = true;
    std::string reason; // XIncludeIgnored | DanglingPocket | UnresolvedInclude | ManifestError
};

/// Structural stand-in for emulator install-and-run: manifest round-trips,
/// includes resolve, pocket fetches have matching manifest entries. Under
/// strict mode any include reference at all fails the bundle.
FunctionalityVerdict validate_functionality(const bundle::Bundle& b, bool strict);

} // namespace gauntlet::attacks
