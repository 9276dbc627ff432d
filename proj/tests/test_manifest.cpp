#include "gauntlet/errors.hpp"
#include "gauntlet/manifest.hpp"

#include <doctest.h>

using namespace gauntlet;
using manifest::PermissionRequest;
using manifest::TagKind;

namespace {

const char* kSample = R"(<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="com.sample">
    <uses-permission android:name="android.permission.READ_SMS" />
    <uses-permission android:name="android.permission.INTERNET" />
    <application android:label="S">
        <activity android:name=".Main">
            <intent-filter>
                <action android:name="android.intent.action.MAIN" />
            </intent-filter>
        </activity>
        <receiver android:name=".Boot">
            <intent-filter>
                <action android:name="android.intent.action.BOOT_COMPLETED" />
            </intent-filter>
        </receiver>
        <meta-data android:name="k" android:value="v" />
    </application>
</manifest>
)";

} // namespace

TEST_CASE("parses permissions, components, metadata") {
    auto doc = manifest::parse_manifest(kSample);
    CHECK(doc.package_name == "com.sample");
    REQUIRE(doc.permissions().size() == 2);
    CHECK(doc.permissions()[0]->name == "android.permission.READ_SMS");
    CHECK(doc.permissions()[0]->tag_kind == TagKind::UsesPermission);
    REQUIRE(doc.components().size() == 2);
    CHECK(doc.components()[1]->kind == manifest::ComponentKind::Receiver);
    REQUIRE(doc.metadata().size() == 1);
    CHECK(doc.metadata()[0]->value == "v");
    auto actions = doc.intent_actions();
    CHECK(std::count(actions.begin(), actions.end(), "android.intent.action.MAIN") == 1);
}

TEST_CASE("rejects documents without a manifest root") {
    CHECK_THROWS_AS(manifest::parse_manifest("<application />"), Error);
    try {
        manifest::parse_manifest("<application />");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoManifestRoot);
    }
}

TEST_CASE("serialize then parse is semantically identity") {
    auto doc = manifest::parse_manifest(kSample);
    auto again = manifest::parse_manifest(manifest::serialize_manifest(doc));
    CHECK(manifest::semantically_equal(doc, again));
}

TEST_CASE("to_sdk23 renames exactly the matching tag") {
    auto doc = manifest::parse_manifest(kSample);
    doc = manifest::to_sdk23(std::move(doc),
                             {TagKind::UsesPermission, "android.permission.READ_SMS"});
    REQUIRE(doc.permissions().size() == 2);
    CHECK(doc.permissions()[0]->tag_kind == TagKind::UsesPermissionSdk23);
    CHECK(doc.permissions()[1]->tag_kind == TagKind::UsesPermission);

    CHECK_THROWS_AS(manifest::to_sdk23(std::move(doc),
                                       {TagKind::UsesPermission, "android.permission.READ_SMS"}),
                    Error); // already renamed
}

TEST_CASE("to_group swaps the constant for its superior group") {
    auto doc = manifest::parse_manifest(kSample);
    doc = manifest::to_group(std::move(doc),
                             {TagKind::UsesPermission, "android.permission.READ_SMS"});
    CHECK(doc.permissions()[0]->name == "android.permission.SMS");

    // INTERNET has no group in the bundled table
    try {
        manifest::to_group(std::move(doc), {TagKind::UsesPermission, "android.permission.INTERNET"});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoGroupDefined);
    }
}

TEST_CASE("extract_to_include cuts a permission into a fresh include file") {
    auto doc = manifest::parse_manifest(kSample);
    PermissionRequest p{TagKind::UsesPermission, "android.permission.READ_SMS"};
    auto result = manifest::extract_to_include(std::move(doc), p);
    CHECK(result.include_path == "includes/inc_0.xml");
    CHECK(result.include_xml.find("android.permission.READ_SMS") != std::string::npos);
    CHECK(result.doc.permissions().size() == 1);
    REQUIRE(result.doc.includes().size() == 1);
    CHECK(result.doc.includes()[0]->href == "includes/inc_0.xml");

    auto serialized = manifest::serialize_manifest(result.doc);
    CHECK(serialized.find("xmlns:xi") != std::string::npos);

    // second extraction picks the next free path
    auto result2 = manifest::extract_to_include(
        std::move(result.doc), PermissionRequest{TagKind::UsesPermission,
                                                 "android.permission.INTERNET"});
    CHECK(result2.include_path == "includes/inc_1.xml");
}

TEST_CASE("extract_to_include moves a component with its children") {
    auto doc = manifest::parse_manifest(kSample);
    manifest::Component target;
    target.kind = manifest::ComponentKind::Receiver;
    target.name = ".Boot";
    auto result = manifest::extract_to_include(std::move(doc), target);
    CHECK(result.doc.components().size() == 1);
    CHECK(result.include_xml.find("BOOT_COMPLETED") != std::string::npos);
}

TEST_CASE("insert_pocket dodges name collisions") {
    auto doc = manifest::parse_manifest(kSample);
    doc = manifest::insert_pocket(std::move(doc), "k", "payload");
    REQUIRE(doc.metadata().size() == 2);
    CHECK(doc.metadata()[1]->name == "k_0");
    doc = manifest::insert_pocket(std::move(doc), "fresh", "x");
    CHECK(doc.metadata()[2]->name == "fresh");
}

TEST_CASE("semantic equality ignores formatting but not content") {
    auto a = manifest::parse_manifest(kSample);
    auto b = manifest::parse_manifest(kSample);
    CHECK(manifest::semantically_equal(a, b));
    b = manifest::to_sdk23(std::move(b), {TagKind::UsesPermission, "android.permission.READ_SMS"});
    CHECK_FALSE(manifest::semantically_equal(a, b));
}
