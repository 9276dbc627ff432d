#include "gauntlet/attacks.hpp"
#include "gauntlet/bundle.hpp"
#include "gauntlet/errors.hpp"
#include "gauntlet/features.hpp"

#include <doctest.h>

using namespace gauntlet;

namespace {

bundle::Bundle bundle_from(const std::string& manifest_text, const std::string& smali_text = "") {
    bundle::Bundle b;
    b.id = "t";
    b.label = bundle::Label::Malicious;
    b.manifest_doc = manifest::parse_manifest(manifest_text);
    if (!smali_text.empty())
        b.smali_program.files["a.smali"] = smali::parse_smali(smali_text);
    return b;
}

const char* kHead = R"(<?xml version="1.0"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="com.t">)";

} // namespace

TEST_CASE("legacy extractor sees plain uses-permission tags only") {
    auto b = bundle_from(std::string(kHead) + R"(
    <uses-permission android:name="android.permission.READ_SMS" />
</manifest>)");
    CHECK(features::extract_legacy(b).has("perm:android.permission.READ_SMS"));

    auto sdk23 = bundle_from(std::string(kHead) + R"(
    <uses-permission-sdk-23 android:name="android.permission.READ_SMS" />
</manifest>)");
    CHECK_FALSE(features::extract_legacy(sdk23).has("perm:android.permission.READ_SMS"));

    auto grouped = bundle_from(std::string(kHead) + R"(
    <uses-permission android:name="android.permission.SMS" />
</manifest>)");
    for (const auto& [id, count] : features::extract_legacy(grouped).entries)
        CHECK(id.rfind("perm:", 0) != 0);
}

TEST_CASE("full extractor expands groups and reads all tag kinds") {
    auto b = bundle_from(std::string(kHead) + R"(
    <uses-permission android:name="android.permission.SMS" />
    <uses-permission-sdk-23 android:name="android.permission.CAMERA" />
</manifest>)");
    auto fv = features::extract_full(b);
    CHECK(fv.has("perm:android.permission.READ_SMS"));
    CHECK(fv.has("perm:android.permission.WRITE_SMS"));
    CHECK(fv.has("perm:android.permission.CAMERA"));
}

TEST_CASE("full extractor resolves include files and flags dangling ones") {
    auto b = bundle::load_bundle(GAUNTLET_FIXTURES_DIR "/bundle_includes");
    auto fv = features::extract_full(b);
    CHECK(fv.has("perm:android.permission.SEND_SMS"));

    b.include_files.clear();
    try {
        features::extract_full(b);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnresolvedInclude);
    }
}

TEST_CASE("legacy perm features are a subset of full perm features") {
    auto spec = bundle::reference_spec();
    spec.n_benign = 30;
    spec.n_malicious = 10;
    for (const auto& b : bundle::generate_corpus(spec)) {
        auto legacy = features::extract_legacy(b);
        auto full = features::extract_full(b);
        for (const auto& [id, count] : legacy.entries)
            if (id.rfind("perm:", 0) == 0)
                CHECK(full.has(id));
    }
}

TEST_CASE("drebin observations land in the expected categories") {
    auto b = bundle::load_bundle(GAUNTLET_FIXTURES_DIR "/bundle_basic");
    auto obs = features::drebin_observations(b);
    auto find = [&](const std::string& feature) -> const features::DrebinObservation* {
        for (const auto& o : obs)
            if (o.feature == feature)
                return &o;
        return nullptr;
    };
    REQUIRE(find("susapi:sendTextMessage"));
    CHECK(find("susapi:sendTextMessage")->category == features::DrebinCategory::SuspiciousApiList);
    // READ_PHONE_STATE not requested, so getDeviceId is a restricted call
    REQUIRE(find("restapi:getDeviceId"));
    CHECK(find("restapi:getDeviceId")->category == features::DrebinCategory::RestrictedApiList);
    REQUIRE(find("url:abc.com"));
    CHECK(find("url:abc.com")->category == features::DrebinCategory::URLDomainList);
    REQUIRE(find("perm:android.permission.READ_SMS"));
    REQUIRE(find("comp:activity:.MainActivity"));
    CHECK(find("comp:activity:.MainActivity")->category == features::DrebinCategory::ActivityList);
    for (const auto& o : obs)
        CHECK(o.weight == 0.0);
}

TEST_CASE("an api whose permission is requested counts as used") {
    auto b = bundle_from(std::string(kHead) + R"(
    <uses-permission android:name="android.permission.READ_PHONE_STATE" />
</manifest>)",
                         ".class public La;\n"
                         "    invoke-virtual {p0}, Lt;->getDeviceId()Ljava/lang/String;\n");
    bool used = false;
    bool restricted = false;
    for (const auto& o : features::drebin_observations(b)) {
        used = used || o.feature == "usedperm:android.permission.READ_PHONE_STATE";
        restricted = restricted || o.feature == "restapi:getDeviceId";
    }
    CHECK(used);
    CHECK_FALSE(restricted);
}

TEST_CASE("url_domain strips scheme, path and port") {
    CHECK(features::url_domain("http://abc.com") == "abc.com");
    CHECK(features::url_domain("https://abc.com/x/y?z=1") == "abc.com");
    CHECK(features::url_domain("http://abc.com:8080/p") == "abc.com");
    CHECK(features::url_domain("ftp://h.example") == "h.example");
    CHECK(features::url_domain("100.50.43.22") == "100.50.43.22");
}

TEST_CASE("sb rewrites move api and url observations but leave perms alone") {
    auto b = bundle::load_bundle(GAUNTLET_FIXTURES_DIR "/bundle_basic");
    detectors::DrebinReport report = detectors::drebin_classify(detectors::DrebinModel{}, b);
    for (auto& o : report.observations)
        o.weight = 1.0; // force every observation into the attack
    auto outcome = attacks::sb(b, report);
    REQUIRE(outcome.bundle);
    auto before = features::extract_legacy(b);
    auto after = features::extract_legacy(*outcome.bundle);
    auto perm_only = [](const features::FeatureVector& fv) {
        std::map<std::string, int> out;
        for (const auto& [id, count] : fv.entries)
            if (id.rfind("perm:", 0) == 0)
                out[id] = count;
        return out;
    };
    CHECK(perm_only(before) == perm_only(after));
    CHECK(before.entries != after.entries);
}
