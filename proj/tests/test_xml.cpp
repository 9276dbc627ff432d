#include "gauntlet/errors.hpp"
#include "gauntlet/xml.hpp"

#include <doctest.h>

using namespace gauntlet;

TEST_CASE("parses nested elements with attributes") {
    auto root = xml::parse(R"(<?xml version="1.0"?>
<manifest package="com.a">
    <!-- comment -->
    <uses-permission android:name="android.permission.INTERNET" />
    <application><activity android:name=".Main" /></application>
</manifest>)");
    CHECK(root.name == "manifest");
    REQUIRE(root.attr("package"));
    CHECK(*root.attr("package") == "com.a");
    REQUIRE(root.children.size() == 2);
    CHECK(root.children[0].name == "uses-permission");
    CHECK(root.children[1].children[0].name == "activity");
}

TEST_CASE("decodes the five standard entities") {
    auto root = xml::parse(R"(<e a="&lt;&gt;&amp;&quot;&apos;">&amp;text</e>)");
    CHECK(*root.attr("a") == "<>&\"'");
    CHECK(root.text == "&text");
}

TEST_CASE("serialize then parse preserves structure") {
    xml::Element e;
    e.name = "root";
    e.set_attr("k", "v<&>");
    xml::Element child;
    child.name = "leaf";
    child.set_attr("x", "1");
    e.children.push_back(child);
    auto again = xml::parse(xml::serialize(e));
    CHECK(again.name == "root");
    CHECK(*again.attr("k") == "v<&>");
    REQUIRE(again.children.size() == 1);
    CHECK(*again.children[0].attr("x") == "1");
}

TEST_CASE("syntax errors carry kind and position") {
    CHECK_THROWS_AS(xml::parse("<a><b></a>"), Error);
    CHECK_THROWS_AS(xml::parse("<a"), Error);
    CHECK_THROWS_AS(xml::parse("plain text"), Error);
    try {
        xml::parse("<a>\n<b></a>");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::XmlSyntaxError);
    }
}

TEST_CASE("fragment serialization has no declaration") {
    xml::Element e;
    e.name = "uses-permission";
    e.set_attr("android:name", "android.permission.READ_SMS");
    auto s = xml::serialize_fragment(e);
    CHECK(s.find("<?xml") == std::string::npos);
    CHECK(s.find("uses-permission") != std::string::npos);
}
