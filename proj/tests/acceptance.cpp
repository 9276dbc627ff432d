// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include "gauntlet/attacks.hpp"
#include "gauntlet/detectors.hpp"
#include "gauntlet/evaluation.hpp"
#include "gauntlet/smali.hpp"
#include "gauntlet/util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace gauntlet;

namespace {

int g_failures = 0;

void report(int n, const std::string& name, bool ok) {
    std::printf("criterion %2d [%s]: %s\n", n, name.c_str(), ok ? "pass" : "FAIL");
    if (!ok)
        ++g_failures;
}

bool guarded(const std::function<bool()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "  exception: %s\n", e.what());
        return false;
    }
}

std::set<std::string> P(const std::vector<std::string>& names) {
    std::set<std::string> out;
    for (const auto& n : names)
        out.insert("android.permission." + n);
    return out;
}

bundle::Bundle perm_bundle(const std::string& id, bundle::Label label,
                           const std::vector<std::string>& perms, int64_t ts) {
    std::string xml = R"(<?xml version="1.0"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="com.a">
)";
    for (const auto& p : perms)
        xml += "    <uses-permission android:name=\"" + p + "\" />\n";
    xml += "</manifest>\n";
    bundle::Bundle b;
    b.id = id;
    b.label = label;
    b.timestamp = ts;
    b.manifest_doc = manifest::parse_manifest(xml);
    return b;
}

const char* kPermPool[] = {
    "android.permission.INTERNET",      "android.permission.READ_SMS",
    "android.permission.SEND_SMS",      "android.permission.RECORD_AUDIO",
    "android.permission.CAMERA",        "android.permission.VIBRATE",
    "android.permission.READ_CONTACTS", "android.permission.WAKE_LOCK"};

std::vector<bundle::Bundle> random_perm_corpus(std::mt19937_64& rng, int n_bundles, int n_perms) {
    std::vector<bundle::Bundle> out;
    for (int i = 0; i < n_bundles; ++i) {
        std::vector<std::string> perms;
        for (int p = 0; p < n_perms; ++p)
            if (rng() % 2)
                perms.push_back(kPermPool[p]);
        out.push_back(perm_bundle("b" + std::to_string(i),
                                  rng() % 2 ? bundle::Label::Malicious : bundle::Label::Benign,
                                  perms, i));
    }
    return out;
}

struct KirinCase {
    std::set<std::string> perms;
    std::set<std::string> intents;
    std::vector<int> rules;
};

// Hand-evaluated against the nine rule definitions, aliases included.
const std::vector<KirinCase> kKirinOracle = {
    {P({}), {}, {}},
    {P({"SET_DEBUG_APP"}), {}, {1}},
    {P({"READ_PHONE_STATE", "RECORD_AUDIO", "INTERNET"}), {}, {2}},
    {P({"PHONE_STATE", "RECORD_AUDIO", "INTERNET"}), {}, {2}},
    {P({"READ_PHONE_STATE", "RECORD_AUDIO"}), {}, {}},
    {P({"PROCESS_OUTGOING_CALLS", "RECORD_AUDIO", "INTERNET"}), {}, {3}},
    {P({"PROCESS_OUTGOING_CALL", "RECORD_AUDIO", "INTERNET"}), {}, {3}},
    {P({"ACCESS_FINE_LOCATION", "INTERNET", "RECEIVE_BOOT_COMPLETED"}), {}, {4}},
    {P({"ACCESS_FINE_LOCATION", "INTERNET", "RECEIVE_BOOT_COMPLETE"}), {}, {4}},
    {P({"ACCESS_COARSE_LOCATION", "INTERNET", "RECEIVE_BOOT_COMPLETED"}), {}, {5}},
    {P({"ACCESS_FINE_LOCATION", "ACCESS_COARSE_LOCATION", "INTERNET",
        "RECEIVE_BOOT_COMPLETED"}),
     {},
     {4, 5}},
    {P({"RECEIVE_SMS", "WRITE_SMS"}), {}, {6}},
    {P({"SEND_SMS", "WRITE_SMS"}), {}, {7}},
    {P({"RECEIVE_SMS", "SEND_SMS", "WRITE_SMS"}), {}, {6, 7}},
    {P({"INSTALL_SHORTCUT", "UNINSTALL_SHORTCUT"}), {}, {8}},
    {P({"INSTALL_SHORTCUT"}), {}, {}},
    {P({"SET_PREFERRED_APPLICATIONS"}), {"android.intent.action.CALL"}, {9}},
    {P({"SET_PREFERRED_APPLICATIONS"}), {}, {}},
    {P({"SET_PREFERRED_APPLICATION"}), {"android.intent.action.CALL"}, {9}},
    {P({"SET_PREFERRED_APPLICATIONS"}), {"android.intent.action.MAIN"}, {}},
    {P({"PHONE_STATE", "RECORD_AUDIO", "INTERNET", "SEND_SMS", "WRITE_SMS"}), {}, {2, 7}},
    {P({"INTERNET"}), {}, {}},
    {P({"RECORD_AUDIO", "INTERNET"}), {}, {}},
    {P({"READ_PHONE_STATE", "PROCESS_OUTGOING_CALLS", "RECORD_AUDIO", "INTERNET"}), {}, {2, 3}},
    {P({"SET_DEBUG_APP", "RECEIVE_SMS", "WRITE_SMS"}), {}, {1, 6}},
    {P({"WRITE_SMS"}), {}, {}},
    {P({"RECEIVE_SMS", "SEND_SMS"}), {}, {}},
    {P({"ACCESS_COARSE_LOCATION", "RECEIVE_BOOT_COMPLETED"}), {}, {}},
    {P({"SET_DEBUG_APP", "READ_PHONE_STATE", "RECORD_AUDIO", "INTERNET",
        "PROCESS_OUTGOING_CALLS", "ACCESS_FINE_LOCATION", "ACCESS_COARSE_LOCATION",
        "RECEIVE_BOOT_COMPLETED", "RECEIVE_SMS", "WRITE_SMS", "SEND_SMS", "INSTALL_SHORTCUT",
        "UNINSTALL_SHORTCUT", "SET_PREFERRED_APPLICATIONS"}),
     {"android.intent.action.CALL"},
     {1, 2, 3, 4, 5, 6, 7, 8, 9}},
    {P({"READ_SMS", "CAMERA", "VIBRATE"}), {}, {}},
};

detectors::DrebinReport flag_all(const detectors::DrebinModel& surrogate,
                                 const bundle::Bundle& b) {
    auto report = detectors::drebin_classify(surrogate, b);
    for (auto& o : report.observations)
        o.weight = 1.0;
    return report;
}

} // namespace

int main() {
    // -------- criteria 1, 2, 3, 10: the full rate matrix on the reference corpus
    auto corpus = bundle::generate_corpus(bundle::reference_spec());
    evaluation::ExperimentOptions opts;

    auto t0 = std::chrono::steady_clock::now();
    auto run1 = evaluation::evaluate_corpus(corpus, bundle::SplitPlan{}, opts);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto& matrix = run1.report["matrix"];
    const std::vector<std::string> zero_attacks = {"mb1", "mb2", "mb3", "mb4", "combined"};
    const std::vector<std::string> structural = {"kirin", "famous", "pbamd"};

    bool c1 = seconds < 120.0;
    for (const auto& det : structural)
        for (const auto& atk : zero_attacks)
            c1 = c1 && matrix[atk][det]["final"].get<double>() == 0.0;
    report(1, "manifest attacks zero out the structural detectors", c1);

    bool c2 = true;
    for (const auto& det : structural)
        c2 = c2 && matrix["sb"][det]["final"].get<double>() ==
                       matrix["original"][det]["initial"].get<double>();
    report(2, "smali attack leaves manifest detectors untouched", c2);

    double drebin_orig = matrix["original"]["drebin"]["initial"].get<double>();
    double drebin_mb4 = matrix["mb4"]["drebin"]["final"].get<double>();
    double drebin_sb = matrix["sb"]["drebin"]["final"].get<double>();
    double drebin_comb = matrix["combined"]["drebin"]["final"].get<double>();
    report(3, "drebin degrades partially under mb4, further under combined",
           0.0 < drebin_mb4 && drebin_mb4 < drebin_orig && drebin_comb < drebin_sb);

    // -------- criterion 4: string encoding goldens
    report(4, "string encoding goldens", guarded([] {
               auto f = smali::parse_smali("    const-string v0, \"http://abc.com\"\n"
                                           "    const-string v1, \"100.50.43.22\"\n");
               // encode the higher index first; encoding splices in extra lines
               std::string ip_enc;
               f = smali::encode_string(f, 1, &ip_enc);
               std::string url_enc;
               f = smali::encode_string(f, 0, &url_enc);
               std::string ip_plain;
               return url_enc == "aHR0cDovL2FiYy5jb20=" &&
                      util::base64_decode(ip_enc, ip_plain) && ip_plain == "1681009430";
           }));

    // -------- criterion 5: kirin oracle
    report(5, "kirin matches the 30-case oracle", guarded([] {
               bool ok = kKirinOracle.size() == 30;
               for (const auto& c : kKirinOracle) {
                   auto v = detectors::kirin_classify(c.perms, c.intents);
                   ok = ok && v.triggered_rules == c.rules && v.malicious == !c.rules.empty();
               }
               return ok;
           }));

    // -------- criterion 6: famous scores against an independent recount
    report(6, "famous scores match recounted support ratios", guarded([] {
               std::mt19937_64 rng(41);
               for (int trial = 0; trial < 50; ++trial) {
                   auto train = random_perm_corpus(rng, 8 + static_cast<int>(rng() % 13),
                                                   3 + static_cast<int>(rng() % 6));
                   bool has_b = false;
                   bool has_m = false;
                   for (const auto& b : train) {
                       has_b = has_b || b.label == bundle::Label::Benign;
                       has_m = has_m || b.label == bundle::Label::Malicious;
                   }
                   if (!has_b || !has_m)
                       continue;
                   auto model = detectors::famous_train(train);
                   int n_b = 0;
                   int n_m = 0;
                   std::map<std::string, int> in_b;
                   std::map<std::string, int> in_m;
                   for (const auto& b : train) {
                       (b.label == bundle::Label::Malicious ? n_m : n_b)++;
                       for (const auto* p : b.manifest_doc.permissions())
                           (b.label == bundle::Label::Malicious ? in_m : in_b)[p->name]++;
                   }
                   // the model scores the whole table universe; unseen perms count 0
                   for (const auto& [perm, score] : model.emsp) {
                       double want = static_cast<double>(in_m[perm]) / n_m -
                                     static_cast<double>(in_b[perm]) / n_b;
                       if (score != want)
                           return false;
                       // cross-multiplied rational check, no division
                       double lhs = score * n_m * n_b;
                       double rhs = static_cast<double>(in_m[perm]) * n_b -
                                    static_cast<double>(in_b[perm]) * n_m;
                       if (std::abs(lhs - rhs) > 1e-9 * std::max(1.0, std::abs(rhs)))
                           return false;
                   }
               }
               return true;
           }));

    // -------- criterion 7: family mining vs exhaustive enumeration
    report(7, "family mining equals exhaustive enumeration", guarded([] {
               std::mt19937_64 rng(43);
               for (int trial = 0; trial < 15; ++trial) {
                   int n = 4 + static_cast<int>(rng() % 17);
                   auto corpus = random_perm_corpus(rng, n, 8);
                   auto got = evaluation::permission_families(corpus, 4, 0.05);

                   std::vector<std::set<std::string>> sets;
                   int n_b = 0;
                   int n_m = 0;
                   std::set<std::string> universe;
                   for (const auto& b : corpus) {
                       std::set<std::string> s;
                       for (const auto* p : b.manifest_doc.permissions())
                           s.insert(p->name);
                       universe.insert(s.begin(), s.end());
                       (b.label == bundle::Label::Malicious ? n_m : n_b)++;
                       sets.push_back(std::move(s));
                   }
                   std::vector<std::string> perms(universe.begin(), universe.end());
                   size_t n_expected = 0;
                   for (size_t mask = 1; mask < (1ull << perms.size()); ++mask) {
                       std::vector<std::string> members;
                       for (size_t i = 0; i < perms.size(); ++i)
                           if (mask & (1ull << i))
                               members.push_back(perms[i]);
                       if (members.size() > 4)
                           continue;
                       int hits_b = 0;
                       int hits_m = 0;
                       for (size_t k = 0; k < sets.size(); ++k) {
                           bool contains = std::all_of(
                               members.begin(), members.end(),
                               [&](const std::string& m) { return sets[k].count(m) > 0; });
                           if (contains)
                               (corpus[k].label == bundle::Label::Malicious ? hits_m : hits_b)++;
                       }
                       if (static_cast<double>(hits_b + hits_m) / corpus.size() < 0.05)
                           continue;
                       ++n_expected;
                       bool found = false;
                       for (const auto& f : got) {
                           if (f.members != members)
                               continue;
                           found = (n_b == 0 || f.support_benign ==
                                                    static_cast<double>(hits_b) / n_b) &&
                                   (n_m == 0 || f.support_malicious ==
                                                    static_cast<double>(hits_m) / n_m);
                           break;
                       }
                       if (!found)
                           return false;
                   }
                   if (got.size() != n_expected)
                       return false;
               }
               return true;
           }));

    // -------- criterion 8: functionality proxy on attacked bundles
    report(8, "strict functionality proxy verdicts", guarded([] {
               auto spec = bundle::reference_spec();
               spec.n_benign = 180;
               spec.n_malicious = 20;
               auto corpus = bundle::generate_corpus(spec);
               auto surrogate = detectors::drebin_train(corpus, 13);
               std::vector<bundle::Bundle> benign;
               std::vector<bundle::Bundle> malicious;
               for (const auto& b : corpus)
                   (b.label == bundle::Label::Malicious ? malicious : benign).push_back(b);
               auto families = evaluation::top_benign_families(benign, 3);
               if (families.empty())
                   return false;

               bool saw_xinclude = false;
               for (const auto& b : malicious) {
                   auto rep = flag_all(surrogate, b);
                   for (const attacks::AttackOutcome& out :
                        {attacks::mb2(b, rep), attacks::mb3(b, families, 7), attacks::mb4(b)}) {
                       if (!out.bundle)
                           return false;
                       if (!attacks::validate_functionality(*out.bundle, true).functional)
                           return false;
                   }
                   for (uint64_t seed = 0; seed < 4; ++seed) {
                       auto out = attacks::mb1(b, rep, seed);
                       if (!out.bundle)
                           return false;
                       bool used_include = false;
                       for (const auto& e : out.audit)
                           used_include = used_include || e.kind == "xinclude";
                       auto verdict = attacks::validate_functionality(*out.bundle, true);
                       if (used_include) {
                           saw_xinclude = true;
                           if (verdict.functional || verdict.reason != "XIncludeIgnored")
                               return false;
                       }
                   }
               }
               return saw_xinclude;
           }));

    // -------- criterion 9: bundle round trips
    report(9, "fixture bundles round-trip", guarded([] {
               namespace fs = std::filesystem;
               for (const char* name : {"/bundle_basic", "/bundle_includes"}) {
                   std::string src = std::string(GAUNTLET_FIXTURES_DIR) + name;
                   auto original = bundle::load_bundle(src);
                   fs::path dir = fs::temp_directory_path() / "gauntlet_acceptance_rt";
                   fs::remove_all(dir);
                   bundle::save_bundle(original, dir.string());
                   auto again = bundle::load_bundle(dir.string());
                   fs::remove_all(dir);
                   if (!bundle::semantically_equal(original, again))
                       return false;
                   // smali files serialize byte-identically to their source
                   for (const auto& [path, file] : original.smali_program.files) {
                       std::ifstream in(fs::path(src) / "smali" / path, std::ios::binary);
                       std::string text((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
                       if (smali::serialize_smali(file) != text)
                           return false;
                   }
               }
               return true;
           }));

    // -------- criterion 10: deterministic evaluation report
    report(10, "evaluation report is byte-identical across runs", guarded([&] {
               auto run2 = evaluation::evaluate_corpus(corpus, bundle::SplitPlan{}, opts);
               return run1.report.dump(2) == run2.report.dump(2) && run1.csv == run2.csv;
           }));

    std::printf("%s (%d/10, matrix %.1fs)\n", g_failures == 0 ? "ACCEPTED" : "REJECTED",
                10 - g_failures, seconds);
    return g_failures == 0 ? 0 : 1;
}
