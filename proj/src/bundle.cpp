#include "gauntlet/bundle.hpp"

#include "gauntlet/errors.hpp"
#include "gauntlet/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace gauntlet::bundle {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::IoError, "cannot read " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << content;
}

void validate_spec(const CorpusSpec& spec) {
    auto check_rate = [](double r, const char* what) {
        if (r < 0.0 || r > 1.0)
            throw Error(ErrorKind::InvalidSpec, std::string(what) + " must be in [0,1]");
    };
    if (spec.n_benign <= 0 || spec.n_malicious <= 0)
        throw Error(ErrorKind::InvalidSpec, "bundle counts must be positive");
    if (spec.benign_family_profile.empty() || spec.malicious_family_profile.empty())
        throw Error(ErrorKind::InvalidSpec, "family profiles must be non-empty");
    check_rate(spec.kirin_trigger_rate, "kirin_trigger_rate");
    check_rate(spec.suspicious_api_rate, "suspicious_api_rate");
    check_rate(spec.url_rate, "url_rate");
    for (const auto* profile : {&spec.benign_family_profile, &spec.malicious_family_profile}) {
        for (const auto& fam : *profile) {
            check_rate(fam.probability, "profile probability");
            for (const auto& p : fam.permissions)
                if (std::find(spec.permission_pool.begin(), spec.permission_pool.end(), p) ==
                    spec.permission_pool.end())
                    throw Error(ErrorKind::InvalidSpec,
                                "profile permission not in permission_pool: " + p);
        }
    }
}

const std::vector<FamilyProfile>& pick_profile_list(const CorpusSpec& spec, Label label) {
    return label == Label::Benign ? spec.benign_family_profile : spec.malicious_family_profile;
}

std::vector<std::string> draw_permissions(const CorpusSpec& spec, Label label,
                                          std::mt19937_64& rng) {
    const auto& profiles = pick_profile_list(spec, label);
    if (profiles.empty())
        return {};
    double total = 0.0;
    for (const auto& fam : profiles)
        total += fam.probability;
    std::uniform_real_distribution<double> dist(0.0, total > 0 ? total : 1.0);
    double x = dist(rng);
    double acc = 0.0;
    for (const auto& fam : profiles) {
        acc += fam.probability;
        if (x <= acc)
            return fam.permissions;
    }
    return profiles.back().permissions;
}

smali::SmaliFile build_smali_file(const std::string& class_descriptor,
                                  const std::vector<smali::Statement>& body) {
    smali::SmaliFile f;
    f.class_descriptor = class_descriptor;
    f.statements.push_back(smali::make_raw(".class public " + class_descriptor));
    f.statements.push_back(smali::make_raw(".super Landroid/app/Activity;"));
    f.statements.push_back(smali::make_raw(""));
    f.statements.push_back(
        smali::make_raw(".method protected onCreate(Landroid/os/Bundle;)V"));
    f.statements.push_back(smali::make_raw("    .locals 6"));
    for (const auto& s : body)
        f.statements.push_back(s);
    f.statements.push_back(smali::make_raw("    return-void"));
    f.statements.push_back(smali::make_raw(".end method"));
    return f;
}

// Evenly striped boolean assignment: true for floor(n*rate) of the n indices.
bool striped(int index, double rate) {
    return std::floor((index + 1) * rate) > std::floor(index * rate);
}

Bundle make_bundle(const CorpusSpec& spec, Label label, int index, int global_index,
                   std::mt19937_64& rng) {
    static const char* kMalDomains[] = {"mal-gate0.example.net", "mal-gate1.example.net",
                                        "crypt-drop.example.org", "100.50.43.22"};
    static const char* kBenignDomains[] = {"cdn.example-assets.org", "api.weather.example.com"};

    Bundle b;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", label == Label::Benign ? "ben" : "mal", index);
    b.id = idbuf;
    b.label = label;
    b.timestamp = 1500000000ll + static_cast<int64_t>(global_index) * 86400;

    std::string pkg = std::string("com.example.") + b.id;
    manifest::ManifestDoc& doc = b.manifest_doc;
    doc.package_name = pkg;
    doc.has_application = true;

    std::vector<std::string> perms = draw_permissions(spec, label, rng);
    if (label == Label::Malicious && striped(index, spec.kirin_trigger_rate)) {
        for (const char* p : {"android.permission.RECEIVE_SMS", "android.permission.WRITE_SMS"})
            if (std::find(perms.begin(), perms.end(), p) == perms.end())
                perms.push_back(p);
    }
    for (const auto& p : perms)
        doc.top_items.push_back(manifest::PermissionRequest{manifest::TagKind::UsesPermission, p});

    manifest::Component main_activity;
    main_activity.kind = manifest::ComponentKind::Activity;
    main_activity.name = pkg + ".MainActivity";
    main_activity.intent_actions = {"android.intent.action.MAIN"};
    doc.app_items.push_back(main_activity);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < 0.4) {
        manifest::Component svc;
        svc.kind = manifest::ComponentKind::Service;
        svc.name = pkg + ".SyncService";
        doc.app_items.push_back(svc);
    }
    if (label == Label::Malicious && coin(rng) < 0.5) {
        manifest::Component rcv;
        rcv.kind = manifest::ComponentKind::Receiver;
        rcv.name = pkg + ".BootReceiver";
        rcv.intent_actions = {"android.intent.action.BOOT_COMPLETED"};
        doc.app_items.push_back(rcv);
    }

    std::string descriptor = "L" + pkg + "/MainActivity;";
    std::replace(descriptor.begin(), descriptor.end(), '.', '/');
    std::vector<smali::Statement> body;
    body.push_back(smali::make_const_string("v0", "window"));
    body.push_back(smali::make_invoke(
        smali::InvokeKind::Virtual, {"p0", "v0"},
        {descriptor, "getSystemService", "(Ljava/lang/String;)Ljava/lang/Object;"}));

    bool has_network_perm =
        std::find(perms.begin(), perms.end(), "android.permission.ACCESS_NETWORK_STATE") !=
        perms.end();
    if (has_network_perm) {
        body.push_back(smali::make_invoke(
            smali::InvokeKind::Virtual, {"v1"},
            {"Landroid/net/ConnectivityManager;", "getActiveNetworkInfo",
             "()Landroid/net/NetworkInfo;"}));
    }

    if (label == Label::Benign) {
        if (coin(rng) < 0.3) {
            const char* domain = kBenignDomains[rng() % 2];
            body.push_back(
                smali::make_const_string("v2", std::string("https://") + domain + "/config"));
        }
    } else {
        if (coin(rng) < spec.url_rate) {
            const char* domain = kMalDomains[rng() % 4];
            body.push_back(
                smali::make_const_string("v2", std::string("http://") + domain + "/gate.php"));
        }
        if (coin(rng) < spec.suspicious_api_rate) {
            body.push_back(smali::make_const_string("v3", "premium-number"));
            body.push_back(smali::make_invoke(
                smali::InvokeKind::Virtual, {"v1", "v3", "v4", "v5"},
                {"Landroid/telephony/SmsManager;", "sendTextMessage",
                 "(Ljava/lang/String;Ljava/lang/String;Ljava/lang/String;)V"}));
            if (coin(rng) < 0.5) {
                body.push_back(smali::make_invoke(
                    smali::InvokeKind::Virtual, {"v1"},
                    {"Landroid/telephony/TelephonyManager;", "getDeviceId",
                     "()Ljava/lang/String;"}));
            }
        }
    }

    std::string rel = pkg;
    std::replace(rel.begin(), rel.end(), '.', '/');
    b.smali_program.files[rel + "/MainActivity.smali"] = build_smali_file(descriptor, body);
    return b;
}

} // namespace

const char* to_string(Label label) {
    switch (label) {
    case Label::Benign: return "benign";
    case Label::Malicious: return "malicious";
    case Label::Unknown: return "unknown";
    }
    return "unknown";
}

Label label_from_string(const std::string& s) {
    if (s == "benign")
        return Label::Benign;
    if (s == "malicious")
        return Label::Malicious;
    if (s == "unknown")
        return Label::Unknown;
    throw Error(ErrorKind::MetaSchemaError, "unknown label: " + s);
}

Bundle load_bundle(const std::string& dir) {
    fs::path root(dir);
    fs::path meta_path = root / "meta.json";
    fs::path manifest_path = root / "AndroidManifest.xml";
    if (!fs::exists(meta_path))
        throw Error(ErrorKind::MissingFile, "missing meta.json in " + dir);
    if (!fs::exists(manifest_path))
        throw Error(ErrorKind::MissingFile, "missing AndroidManifest.xml in " + dir);
    if (!fs::exists(root / "smali"))
        throw Error(ErrorKind::MissingFile, "missing smali/ directory in " + dir);

    Bundle b;
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(meta_path));
        b.id = meta.at("id").get<std::string>();
        b.label = label_from_string(meta.at("label").get<std::string>());
        b.timestamp = meta.at("timestamp").get<int64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MetaSchemaError, "meta.json: " + std::string(e.what()));
    }
    if (b.id.empty())
        throw Error(ErrorKind::MetaSchemaError, "meta.json: id must be non-empty");

    try {
        b.manifest_doc = manifest::parse_manifest(read_file(manifest_path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::XmlSyntaxError || e.kind() == ErrorKind::NoManifestRoot)
            throw Error(ErrorKind::ParseError, "AndroidManifest.xml: " + std::string(e.what()));
        throw;
    }

    for (const auto& entry : fs::recursive_directory_iterator(root / "smali")) {
        if (!entry.is_regular_file() || entry.path().extension() != ".smali")
            continue;
        std::string rel = fs::relative(entry.path(), root / "smali").generic_string();
        b.smali_program.files[rel] = smali::parse_smali(read_file(entry.path()));
    }
    if (fs::exists(root / "includes")) {
        for (const auto& entry : fs::directory_iterator(root / "includes")) {
            if (!entry.is_regular_file())
                continue;
            std::string rel = "includes/" + entry.path().filename().string();
            b.include_files[rel] = read_file(entry.path());
        }
    }
    return b;
}

void save_bundle(const Bundle& b, const std::string& dir) {
    fs::path root(dir);
    fs::create_directories(root / "smali");
    nlohmann::json meta = {
        {"id", b.id}, {"label", to_string(b.label)}, {"timestamp", b.timestamp}};
    write_file(root / "meta.json", meta.dump(2) + "\n");
    write_file(root / "AndroidManifest.xml", manifest::serialize_manifest(b.manifest_doc));
    for (const auto& [rel, file] : b.smali_program.files)
        write_file(root / "smali" / rel, smali::serialize_smali(file));
    for (const auto& [rel, content] : b.include_files)
        write_file(root / rel, content);
}

std::vector<Bundle> generate_corpus(const CorpusSpec& spec) {
    validate_spec(spec);
    std::mt19937_64 rng(spec.seed);
    std::vector<Bundle> corpus;
    corpus.reserve(static_cast<size_t>(spec.n_benign + spec.n_malicious));
    int global = 0;
    for (int i = 0; i < spec.n_benign; ++i)
        corpus.push_back(make_bundle(spec, Label::Benign, i, global++, rng));
    for (int i = 0; i < spec.n_malicious; ++i)
        corpus.push_back(make_bundle(spec, Label::Malicious, i, global++, rng));
    return corpus;
}

std::pair<std::vector<Bundle>, std::vector<Bundle>> split_dataset(const std::vector<Bundle>& corpus,
                                                                  const SplitPlan& plan) {
    if (plan.spatial_ratio <= 0.0 || plan.spatial_ratio >= 1.0 || plan.train_fraction <= 0.0 ||
        plan.train_fraction >= 1.0)
        throw Error(ErrorKind::InvalidSpec, "split ratios must lie in (0,1)");

    std::vector<const Bundle*> benign, malicious;
    for (const auto& b : corpus)
        (b.label == Label::Benign ? benign : malicious).push_back(&b);
    if (benign.empty() || malicious.empty())
        throw Error(ErrorKind::InsufficientData, "corpus must contain both labels");

    auto by_time = [](const Bundle* a, const Bundle* b) {
        return std::tie(a->timestamp, a->id) < std::tie(b->timestamp, b->id);
    };
    std::sort(benign.begin(), benign.end(), by_time);
    std::sort(malicious.begin(), malicious.end(), by_time);

    size_t n_test = static_cast<size_t>(
        std::lround((1.0 - plan.train_fraction) * static_cast<double>(malicious.size())));
    n_test = std::clamp<size_t>(n_test, 1, malicious.size() - 1);

    std::vector<const Bundle*> test(malicious.end() - static_cast<ptrdiff_t>(n_test),
                                    malicious.end());
    std::vector<const Bundle*> train_mal(malicious.begin(),
                                         malicious.end() - static_cast<ptrdiff_t>(n_test));

    if (plan.temporal) {
        int64_t cutoff = test.front()->timestamp;
        std::erase_if(benign, [&](const Bundle* b) { return b->timestamp > cutoff; });
        if (benign.empty())
            throw Error(ErrorKind::InsufficientData, "no benign bundles before the test window");
    }

    // Trim the benign side toward the spatial ratio (late bundles first).
    double target = plan.spatial_ratio;
    auto frac = [&] {
        return static_cast<double>(benign.size()) /
               static_cast<double>(benign.size() + train_mal.size());
    };
    while (benign.size() > 1 && frac() > target + 0.02)
        benign.pop_back();
    if (frac() < target - 0.02)
        throw Error(ErrorKind::InsufficientData, "not enough benign bundles for the spatial ratio");

    std::vector<const Bundle*> train = benign;
    train.insert(train.end(), train_mal.begin(), train_mal.end());
    std::sort(train.begin(), train.end(), by_time);

    std::pair<std::vector<Bundle>, std::vector<Bundle>> result;
    for (const Bundle* b : train)
        result.first.push_back(*b);
    for (const Bundle* b : test)
        result.second.push_back(*b);
    return result;
}

bool semantically_equal(const Bundle& a, const Bundle& b) {
    if (a.id != b.id || a.label != b.label || a.timestamp != b.timestamp)
        return false;
    if (!manifest::semantically_equal(a.manifest_doc, b.manifest_doc))
        return false;
    if (a.include_files != b.include_files)
        return false;
    if (a.smali_program.files.size() != b.smali_program.files.size())
        return false;
    for (const auto& [path, file] : a.smali_program.files) {
        auto it = b.smali_program.files.find(path);
        if (it == b.smali_program.files.end())
            return false;
        if (smali::serialize_smali(file) != smali::serialize_smali(it->second))
            return false;
    }
    return true;
}

CorpusSpec reference_spec() {
    CorpusSpec spec;
    spec.n_benign = 900;
    spec.n_malicious = 100;
    spec.seed = 7;
    spec.kirin_trigger_rate = 1.0;
    spec.suspicious_api_rate = 0.6;
    spec.url_rate = 0.5;
    spec.permission_pool = {
        "android.permission.INTERNET",
        "android.permission.ACCESS_NETWORK_STATE",
        "android.permission.VIBRATE",
        "android.permission.WAKE_LOCK",
        "android.permission.READ_PHONE_STATE",
        "android.permission.RECORD_AUDIO",
        "android.permission.SEND_SMS",
        "android.permission.WRITE_SMS",
        "android.permission.RECEIVE_SMS",
        "android.permission.READ_SMS",
        "android.permission.ACCESS_FINE_LOCATION",
    };
    spec.benign_family_profile = {
        {{"android.permission.INTERNET", "android.permission.ACCESS_NETWORK_STATE"}, 0.50},
        {{"android.permission.INTERNET"}, 0.20},
        {{"android.permission.ACCESS_NETWORK_STATE"}, 0.05},
        {{}, 0.05},
        {{"android.permission.INTERNET", "android.permission.ACCESS_NETWORK_STATE",
          "android.permission.VIBRATE", "android.permission.WAKE_LOCK"},
         0.20},
    };
    spec.malicious_family_profile = {
        {{"android.permission.INTERNET", "android.permission.READ_PHONE_STATE"}, 0.45},
        {{"android.permission.INTERNET", "android.permission.READ_PHONE_STATE",
          "android.permission.SEND_SMS"},
         0.30},
        {{"android.permission.INTERNET", "android.permission.READ_PHONE_STATE",
          "android.permission.RECORD_AUDIO"},
         0.15},
        {{"android.permission.INTERNET", "android.permission.READ_SMS",
          "android.permission.ACCESS_FINE_LOCATION"},
         0.10},
    };
    return spec;
}

} // namespace gauntlet::bundle
