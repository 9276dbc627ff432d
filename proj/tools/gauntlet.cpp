#include "gauntlet/attacks.hpp"
#include "gauntlet/bundle.hpp"
#include "gauntlet/detectors.hpp"
#include "gauntlet/errors.hpp"
#include "gauntlet/evaluation.hpp"
#include "gauntlet/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gauntlet;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string corpus;
    std::string out = "out";
    uint64_t seed = 7;
    int jobs = 1;
    bool strict = false;
    std::vector<std::string> cases;
    std::vector<std::string> detector_list;
    json config = json::object();
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--jobs", o.jobs, "worker threads");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_flag("--strict", o.strict, "strict functionality validation");
}

/// Flags override config; config overrides defaults.
void load_config(CLI::App* cmd, CommonOpts& o) {
    if (o.config_path.empty())
        return;
    std::ifstream in(o.config_path);
    if (!in)
        throw Error(ErrorKind::MissingFile, "cannot read config " + o.config_path);
    in >> o.config;
    if (o.config.contains("corpus") && o.corpus.empty())
        o.corpus = o.config["corpus"].get<std::string>();
    if (o.config.contains("seed") && cmd->count("--seed") == 0)
        o.seed = o.config["seed"].get<uint64_t>();
    if (o.config.contains("jobs") && cmd->count("--jobs") == 0)
        o.jobs = o.config["jobs"].get<int>();
    if (o.config.contains("out") && cmd->count("--out") == 0)
        o.out = o.config["out"].get<std::string>();
    if (o.config.contains("strict") && cmd->count("--strict") == 0)
        o.strict = o.config["strict"].get<bool>();
    if (o.config.contains("cases") && o.cases.empty())
        o.cases = o.config["cases"].get<std::vector<std::string>>();
    if (o.config.contains("detectors") && o.detector_list.empty())
        o.detector_list = o.config["detectors"].get<std::vector<std::string>>();
}

bundle::CorpusSpec corpus_spec_from_config(const json& config, uint64_t seed) {
    bundle::CorpusSpec spec = bundle::reference_spec();
    spec.seed = seed;
    if (!config.contains("corpus_spec"))
        return spec;
    const json& j = config["corpus_spec"];
    if (j.contains("n_benign"))
        spec.n_benign = j["n_benign"].get<int>();
    if (j.contains("n_malicious"))
        spec.n_malicious = j["n_malicious"].get<int>();
    if (j.contains("kirin_trigger_rate"))
        spec.kirin_trigger_rate = j["kirin_trigger_rate"].get<double>();
    if (j.contains("suspicious_api_rate"))
        spec.suspicious_api_rate = j["suspicious_api_rate"].get<double>();
    if (j.contains("url_rate"))
        spec.url_rate = j["url_rate"].get<double>();
    if (j.contains("permission_pool"))
        spec.permission_pool = j["permission_pool"].get<std::vector<std::string>>();
    auto profiles = [](const json& arr) {
        std::vector<bundle::FamilyProfile> out;
        for (const auto& p : arr)
            out.push_back({p.at("permissions").get<std::vector<std::string>>(),
                           p.at("probability").get<double>()});
        return out;
    };
    if (j.contains("benign_family_profile"))
        spec.benign_family_profile = profiles(j["benign_family_profile"]);
    if (j.contains("malicious_family_profile"))
        spec.malicious_family_profile = profiles(j["malicious_family_profile"]);
    return spec;
}

bundle::SplitPlan split_plan_from_config(const json& config) {
    bundle::SplitPlan plan;
    if (!config.contains("split_plan"))
        return plan;
    const json& j = config["split_plan"];
    if (j.contains("spatial_ratio"))
        plan.spatial_ratio = j["spatial_ratio"].get<double>();
    if (j.contains("train_fraction"))
        plan.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("temporal"))
        plan.temporal = j["temporal"].get<bool>();
    return plan;
}

std::vector<bundle::Bundle> load_corpus(const std::string& dir) {
    if (!fs::is_directory(dir))
        throw Error(ErrorKind::MissingFile, "corpus directory not found: " + dir);
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory() && fs::exists(e.path() / "meta.json"))
            entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    std::vector<bundle::Bundle> out;
    for (const auto& p : entries)
        out.push_back(bundle::load_bundle(p.string()));
    return out;
}

std::string bundle_digest(const bundle::Bundle& b) {
    std::string blob = manifest::serialize_manifest(b.manifest_doc);
    for (const auto& [path, file] : b.smali_program.files) {
        blob += path;
        blob += smali::serialize_smali(file);
    }
    for (const auto& [path, text] : b.include_files) {
        blob += path;
        blob += text;
    }
    blob += b.id + std::to_string(b.timestamp) + bundle::to_string(b.label);
    return util::fnv1a_hex(blob);
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << content;
}

int cmd_gen_corpus(CommonOpts& o) {
    bundle::CorpusSpec spec = corpus_spec_from_config(o.config, o.seed);
    auto corpus = bundle::generate_corpus(spec);
    json index;
    index["seed"] = spec.seed;
    index["n_benign"] = spec.n_benign;
    index["n_malicious"] = spec.n_malicious;
    json entries = json::array();
    std::string all;
    for (const auto& b : corpus) {
        bundle::save_bundle(b, (fs::path(o.out) / b.id).string());
        std::string digest = bundle_digest(b);
        entries.push_back({{"id", b.id}, {"digest", digest}});
        all += digest;
    }
    index["bundles"] = entries;
    index["digest"] = util::fnv1a_hex(all);
    write_file(fs::path(o.out) / "index.json", index.dump(2) + "\n");
    std::cout << "wrote " << corpus.size() << " bundles to " << o.out << " (digest "
              << index["digest"].get<std::string>() << ")\n";
    return 0;
}

int cmd_train(CommonOpts& o) {
    auto corpus = load_corpus(o.corpus);
    auto [train, test] = bundle::split_dataset(corpus, split_plan_from_config(o.config));
    std::vector<std::string> names =
        o.detector_list.empty() ? detectors::detector_names() : o.detector_list;
    for (const auto& name : names) {
        if (name == "kirin")
            continue; // rule-based, nothing to fit
        json model;
        if (name == "drebin")
            model = detectors::drebin_model_to_json(detectors::drebin_train(train, o.seed));
        else if (name == "famous")
            model = detectors::famous_model_to_json(detectors::famous_train(train));
        else if (name == "pbamd")
            model = detectors::pbamd_model_to_json(detectors::pbamd_train(train, o.seed));
        else
            throw Error(ErrorKind::NotFound, "unknown detector: " + name);
        write_file(fs::path(o.out) / (name + ".json"), model.dump(2) + "\n");
        std::cout << "trained " << name << " on " << train.size() << " bundles\n";
    }
    return 0;
}

int cmd_attack(CommonOpts& o, const std::string& attack_name, const std::string& bundle_path) {
    attacks::attack_tuple(attack_name); // rejects unknown names early
    bundle::Bundle b = bundle::load_bundle(bundle_path);

    detectors::DrebinModel surrogate;
    std::vector<std::vector<std::string>> families;
    if (attack_name != "mb4") {
        if (o.corpus.empty())
            throw Error(ErrorKind::InvalidSpec,
                        "attack " + attack_name + " needs --corpus for the attacker inputs");
        auto corpus = load_corpus(o.corpus);
        auto [train, test] = bundle::split_dataset(corpus, split_plan_from_config(o.config));
        if (attack_name == "mb3")
            families = evaluation::top_benign_families(train);
        else
            surrogate = detectors::drebin_train(train, o.seed);
    }

    attacks::AttackOutcome outcome;
    if (attack_name == "mb1")
        outcome = attacks::mb1(b, detectors::drebin_classify(surrogate, b), o.seed);
    else if (attack_name == "mb2")
        outcome = attacks::mb2(b, detectors::drebin_classify(surrogate, b));
    else if (attack_name == "mb3")
        outcome = attacks::mb3(b, families, o.seed);
    else if (attack_name == "mb4")
        outcome = attacks::mb4(b);
    else if (attack_name == "sb")
        outcome = attacks::sb(b, detectors::drebin_classify(surrogate, b));
    else
        outcome = attacks::combined(b, detectors::drebin_classify(surrogate, b), o.seed);

    if (outcome.error) {
        std::cerr << "manipulation failed: " << *outcome.error << "\n";
        return 1;
    }
    fs::path dir = fs::path(o.out) / (b.id + "_" + attack_name);
    bundle::save_bundle(*outcome.bundle, dir.string());
    json audit = json::array();
    for (const auto& e : outcome.audit)
        audit.push_back({{"kind", e.kind},
                         {"location", e.location},
                         {"before", e.before_digest},
                         {"after", e.after_digest}});
    write_file(dir / "audit.json", audit.dump(2) + "\n");
    auto verdict = attacks::validate_functionality(*outcome.bundle, o.strict);
    std::cout << "attacked bundle written to " << dir.string() << "\n"
              << "functionality: "
              << (verdict.functional ? "Functional" : "NonFunctional(" + verdict.reason + ")")
              << "\n";
    return 0;
}

int cmd_evaluate(CommonOpts& o) {
    auto corpus = load_corpus(o.corpus);
    evaluation::ExperimentOptions opts;
    opts.seed = o.seed;
    opts.jobs = o.jobs;
    opts.strict_functionality = o.strict || !o.config.contains("strict");
    opts.cases = o.cases;
    opts.detectors = o.detector_list;
    if (o.config.contains("n_splits"))
        opts.n_splits = o.config["n_splits"].get<int>();
    auto result = evaluation::evaluate_corpus(corpus, split_plan_from_config(o.config), opts);
    write_file(fs::path(o.out) / "report.json", result.report.dump(2) + "\n");
    write_file(fs::path(o.out) / "matrix.csv", result.csv);
    std::cout << result.csv;
    return 0;
}

int cmd_stats(CommonOpts& o) {
    auto corpus = load_corpus(o.corpus);
    std::vector<bundle::Bundle> benign, malicious;
    for (const auto& b : corpus)
        (b.label == bundle::Label::Malicious ? malicious : benign).push_back(b);

    json out;
    auto families_json = [](const std::vector<evaluation::PermissionFamily>& fams) {
        json arr = json::array();
        for (const auto& f : fams)
            arr.push_back({{"members", f.members},
                           {"support_benign", f.support_benign},
                           {"support_malicious", f.support_malicious}});
        return arr;
    };
    out["benign_families"] = families_json(evaluation::permission_families(benign));
    out["malicious_families"] = families_json(evaluation::permission_families(malicious));

    auto stats_json = [](const evaluation::ProtectionStats& s) {
        json j;
        for (const auto& [level, frac] : s.general)
            j["general"][to_string(level)] = frac;
        for (const auto& [level, frac] : s.dominant)
            j["dominant"][to_string(level)] = frac;
        return j;
    };
    out["protection_benign"] = stats_json(evaluation::protection_stats(benign));
    out["protection_malicious"] = stats_json(evaluation::protection_stats(malicious));
    write_file(fs::path(o.out) / "stats.json", out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_validate(CommonOpts& o, const std::string& bundle_path) {
    bundle::Bundle b = bundle::load_bundle(bundle_path);
    auto verdict = attacks::validate_functionality(b, o.strict);
    if (verdict.functional) {
        std::cout << "Functional\n";
        return 0;
    }
    std::cout << "NonFunctional(" << verdict.reason << ")\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"evasion-attack workbench for permission-based Android malware detectors"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string attack_name;
    std::string bundle_path;

    auto* gen = app.add_subcommand("gen-corpus", "generate a seeded synthetic corpus");
    add_common(gen, o);

    auto* train = app.add_subcommand("train", "train detector models on a corpus split");
    add_common(train, o);
    train->add_option("--corpus", o.corpus, "corpus directory")->required();
    train->add_option("--detectors", o.detector_list, "detector subset")->delimiter(',');

    auto* attack = app.add_subcommand("attack", "apply one attack to one bundle");
    add_common(attack, o);
    attack->add_option("name", attack_name, "mb1|mb2|mb3|mb4|sb|combined")->required();
    attack->add_option("bundle", bundle_path, "bundle directory")->required();
    attack->add_option("--corpus", o.corpus, "corpus for attacker inputs");

    auto* evaluate = app.add_subcommand("evaluate", "run the full case x detector rate matrix");
    add_common(evaluate, o);
    evaluate->add_option("--corpus", o.corpus, "corpus directory");
    evaluate->add_option("--cases", o.cases, "case subset")->delimiter(',');
    evaluate->add_option("--detectors", o.detector_list, "detector subset")->delimiter(',');

    auto* stats = app.add_subcommand("stats", "permission families and protection levels");
    add_common(stats, o);
    stats->add_option("--corpus", o.corpus, "corpus directory")->required();

    auto* validate = app.add_subcommand("validate", "functionality-proxy check of one bundle");
    add_common(validate, o);
    validate->add_option("bundle", bundle_path, "bundle directory")->required();

    CLI11_PARSE(app, argc, argv);

    CLI::App* cmd = app.get_subcommands().front();
    try {
        load_config(cmd, o);
        if (cmd == gen)
            return cmd_gen_corpus(o);
        if (cmd == train)
            return cmd_train(o);
        if (cmd == attack)
            return cmd_attack(o, attack_name, bundle_path);
        if (cmd == evaluate) {
            if (o.corpus.empty())
                throw Error(ErrorKind::MissingFile, "evaluate needs --corpus or a config entry");
            return cmd_evaluate(o);
        }
        if (cmd == stats)
            return cmd_stats(o);
        if (cmd == validate)
            return cmd_validate(o, bundle_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
