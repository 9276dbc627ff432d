#include "gauntlet/attacks.hpp"
#include "gauntlet/errors.hpp"
#include "gauntlet/features.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace gauntlet;

namespace {

bundle::Bundle fixture() { return bundle::load_bundle(GAUNTLET_FIXTURES_DIR "/bundle_basic"); }

detectors::DrebinReport flag_all(const bundle::Bundle& b) {
    auto report = detectors::drebin_classify(detectors::DrebinModel{}, b);
    for (auto& o : report.observations)
        o.weight = 1.0;
    return report;
}

detectors::DrebinReport flag_only(const bundle::Bundle& b, const std::string& feature) {
    auto report = detectors::drebin_classify(detectors::DrebinModel{}, b);
    for (auto& o : report.observations)
        o.weight = o.feature == feature ? 1.0 : 0.0;
    return report;
}

std::set<std::string> legacy_perms(const bundle::Bundle& b) {
    auto v = features::legacy_permissions(b);
    return {v.begin(), v.end()};
}

std::set<std::string> full_perms(const bundle::Bundle& b) {
    std::set<std::string> out;
    for (const auto& [id, count] : features::extract_full(b).entries)
        if (id.rfind("perm:", 0) == 0)
            out.insert(id.substr(5));
    return out;
}

} // namespace

TEST_CASE("attack tuples match the table") {
    auto t = attacks::attack_tuple("mb1");
    CHECK(t.attacker_model == attacks::AttackerModel::MA);
    CHECK_FALSE(t.smali_access);
    CHECK(t.manifest_access);
    CHECK(attacks::attack_tuple("mb3").attacker_model == attacks::AttackerModel::DA);
    CHECK(attacks::attack_tuple("mb4").attacker_model == attacks::AttackerModel::ZK);
    CHECK(attacks::attack_tuple("sb").smali_access);
    CHECK_FALSE(attacks::attack_tuple("sb").manifest_access);
    CHECK(attacks::attack_tuple("combined").smali_access);
    CHECK(attacks::attack_tuple("combined").manifest_access);
    CHECK_THROWS_AS(attacks::attack_tuple("mb9"), Error);
}

TEST_CASE("mb1 conceals flagged permissions by group or include") {
    auto b = fixture();
    auto report = flag_only(b, "perm:android.permission.READ_SMS");
    bool saw_group = false;
    bool saw_include = false;
    for (uint64_t seed = 0; seed < 16; ++seed) {
        auto outcome = attacks::mb1(b, report, seed);
        REQUIRE(outcome.bundle);
        CHECK_FALSE(legacy_perms(*outcome.bundle).count("android.permission.READ_SMS"));
        REQUIRE(outcome.audit.size() == 1);
        saw_group = saw_group || outcome.audit[0].kind == "to_group";
        saw_include = saw_include || outcome.audit[0].kind == "xinclude";
        if (outcome.audit[0].kind == "to_group") {
            bool grouped = false;
            for (const auto* p : outcome.bundle->manifest_doc.permissions())
                grouped = grouped || p->name == "android.permission.SMS";
            CHECK(grouped);
        } else {
            CHECK_FALSE(outcome.bundle->include_files.empty());
        }
    }
    CHECK(saw_group);
    CHECK(saw_include);
}

TEST_CASE("mb1 moves flagged components into include files") {
    auto b = fixture();
    auto outcome = attacks::mb1(b, flag_only(b, "comp:receiver:.SmsReceiver"), 1);
    REQUIRE(outcome.bundle);
    CHECK(outcome.bundle->manifest_doc.components().size() == 1);
    CHECK(outcome.bundle->manifest_doc.includes().size() == 1);
    CHECK(outcome.bundle->include_files.size() == 1);
}

TEST_CASE("mb1 with all-zero weights is the identity") {
    auto b = fixture();
    auto report = detectors::drebin_classify(detectors::DrebinModel{}, b);
    auto outcome = attacks::mb1(b, report, 1);
    REQUIRE(outcome.bundle);
    CHECK(outcome.audit.empty());
    CHECK(bundle::semantically_equal(b, *outcome.bundle));
}

TEST_CASE("mb1 falls back to include when no group exists") {
    auto b = fixture();
    auto outcome = attacks::mb1(b, flag_only(b, "perm:android.permission.INTERNET"), 0);
    REQUIRE(outcome.bundle);
    CHECK_FALSE(legacy_perms(*outcome.bundle).count("android.permission.INTERNET"));
    CHECK(full_perms(*outcome.bundle).count("android.permission.INTERNET"));
}

TEST_CASE("mb2 renames exactly the flagged tags") {
    auto b = fixture();
    auto outcome = attacks::mb2(b, flag_only(b, "perm:android.permission.READ_SMS"));
    REQUIRE(outcome.bundle);
    REQUIRE(outcome.audit.size() == 1);
    CHECK(outcome.audit[0].kind == "sdk23");
    auto after = legacy_perms(*outcome.bundle);
    CHECK_FALSE(after.count("android.permission.READ_SMS"));
    CHECK(after.count("android.permission.INTERNET"));
    // full fidelity still sees the permission
    CHECK(full_perms(*outcome.bundle).count("android.permission.READ_SMS"));
}

TEST_CASE("mb3 mimics a family: legacy view becomes family intersect original") {
    auto b = fixture();
    std::vector<std::vector<std::string>> families = {{"android.permission.INTERNET"}};
    auto outcome = attacks::mb3(b, families, 5);
    REQUIRE(outcome.bundle);
    std::set<std::string> expected = {"android.permission.INTERNET"};
    CHECK(legacy_perms(*outcome.bundle) == expected);

    // requesting only family members leaves the bundle unchanged
    auto outcome2 = attacks::mb3(*outcome.bundle, families, 5);
    REQUIRE(outcome2.bundle);
    CHECK(legacy_perms(*outcome2.bundle) == expected);

    CHECK(attacks::mb3(b, {}, 5).error.has_value());
}

TEST_CASE("mb4 blanks the legacy permission view") {
    auto b = fixture();
    auto outcome = attacks::mb4(b);
    REQUIRE(outcome.bundle);
    CHECK(legacy_perms(*outcome.bundle).empty());
    CHECK(full_perms(*outcome.bundle) == full_perms(b));
    CHECK_FALSE(detectors::kirin_classify(*outcome.bundle).malicious);

    // permissionless bundles pass through untouched
    auto again = attacks::mb4(*outcome.bundle);
    REQUIRE(again.bundle);
    CHECK(again.audit.empty());
}

TEST_CASE("every mb attack shrinks the legacy perm set") {
    auto b = fixture();
    auto before = legacy_perms(b);
    auto report = flag_all(b);
    std::vector<attacks::AttackOutcome> outcomes;
    outcomes.push_back(attacks::mb1(b, report, 3));
    outcomes.push_back(attacks::mb2(b, report));
    outcomes.push_back(attacks::mb3(b, {{"android.permission.INTERNET"}}, 3));
    outcomes.push_back(attacks::mb4(b));
    for (const auto& outcome : outcomes) {
        REQUIRE(outcome.bundle);
        auto after = legacy_perms(*outcome.bundle);
        CHECK(std::includes(before.begin(), before.end(), after.begin(), after.end()));
    }
}

TEST_CASE("sb encodes urls, reflects calls, pockets values, spares the manifest perms") {
    auto b = fixture();
    auto outcome = attacks::sb(b, flag_all(b));
    REQUIRE(outcome.bundle);
    CHECK(legacy_perms(*outcome.bundle) == legacy_perms(b));

    std::string all;
    for (const auto& [path, file] : outcome.bundle->smali_program.files)
        all += smali::serialize_smali(file);
    CHECK(all.find("http://abc.com") == std::string::npos);
    CHECK(all.find("sendTextMessage") == std::string::npos);
    CHECK(all.find("getDeclaredMethod") != std::string::npos);

    // the encoded url sits in a manifest pocket
    bool pocketed = false;
    for (const auto* md : outcome.bundle->manifest_doc.metadata())
        pocketed = pocketed || md->value == "aHR0cDovL2FiYy5jb20=";
    CHECK(pocketed);
    CHECK(attacks::validate_functionality(*outcome.bundle, true).functional);
}

TEST_CASE("combined applies sb then mb1 over the split observation sets") {
    auto b = fixture();
    auto outcome = attacks::combined(b, flag_all(b), 3);
    REQUIRE(outcome.bundle);
    CHECK(legacy_perms(*outcome.bundle).empty());
    std::string all;
    for (const auto& [path, file] : outcome.bundle->smali_program.files)
        all += smali::serialize_smali(file);
    CHECK(all.find("http://abc.com") == std::string::npos);

    bool smali_edit = false;
    bool manifest_edit = false;
    for (const auto& e : outcome.audit) {
        smali_edit = smali_edit || e.kind == "encode" || e.kind == "reflect";
        manifest_edit = manifest_edit || e.kind == "xinclude" || e.kind == "to_group";
    }
    CHECK(smali_edit);
    CHECK(manifest_edit);
}

TEST_CASE("attacks are deterministic in bundle, report, seed") {
    auto b = fixture();
    auto report = flag_all(b);
    auto a1 = attacks::mb1(b, report, 9);
    auto a2 = attacks::mb1(b, report, 9);
    REQUIRE(a1.bundle);
    REQUIRE(a2.bundle);
    CHECK(bundle::semantically_equal(*a1.bundle, *a2.bundle));
    auto c1 = attacks::combined(b, report, 9);
    auto c2 = attacks::combined(b, report, 9);
    REQUIRE(c1.bundle);
    CHECK(bundle::semantically_equal(*c1.bundle, *c2.bundle));
}

TEST_CASE("audit digests change exactly when content changes") {
    auto b = fixture();
    auto outcome = attacks::mb2(b, flag_only(b, "perm:android.permission.READ_SMS"));
    REQUIRE(outcome.audit.size() == 1);
    CHECK(outcome.audit[0].before_digest != outcome.audit[0].after_digest);
    CHECK(outcome.audit[0].location == "perm:android.permission.READ_SMS");
}

TEST_CASE("functionality proxy verdicts") {
    auto b = fixture();
    CHECK(attacks::validate_functionality(b, true).functional);

    // include-bearing bundle: fine lax, fatal strict
    auto inc = bundle::load_bundle(GAUNTLET_FIXTURES_DIR "/bundle_includes");
    CHECK(attacks::validate_functionality(inc, false).functional);
    auto strict = attacks::validate_functionality(inc, true);
    CHECK_FALSE(strict.functional);
    CHECK(strict.reason == "XIncludeIgnored");

    // dangling include
    auto broken = inc;
    broken.include_files.clear();
    CHECK(attacks::validate_functionality(broken, false).reason == "UnresolvedInclude");

    // pocket stub without a manifest entry
    auto pocketless = *attacks::sb(b, flag_all(b)).bundle;
    pocketless.manifest_doc = b.manifest_doc;
    auto verdict = attacks::validate_functionality(pocketless, false);
    CHECK_FALSE(verdict.functional);
    CHECK(verdict.reason == "DanglingPocket");
}
