#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mulharm/corpus.hpp"
#include "mulharm/error.hpp"
#include "mulharm/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw mulharm::ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw mulharm::ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// A config is one experiment object or {"seed": k, "experiments": [...]}.
std::vector<mulharm::ExperimentConfig> load_configs(const json& doc) {
    std::vector<mulharm::ExperimentConfig> out;
    if (doc.is_object() && doc.contains("experiments")) {
        const auto& list = doc.at("experiments");
        if (!list.is_array() || list.empty()) throw mulharm::ConfigError("'experiments' must be a nonempty array");
        for (json item : list) {
            if (!item.is_object()) throw mulharm::ConfigError("each experiment must be an object");
            if (!item.contains("seed") && doc.contains("seed")) item["seed"] = doc.at("seed");
            out.push_back(mulharm::ExperimentConfig::from_json(item));
        }
        return out;
    }
    out.push_back(mulharm::ExperimentConfig::from_json(doc));
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    const auto configs = load_configs(read_json(config_path));
    fs::create_directories(out_dir);

    json reports = json::array();
    bool all_pass = true;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto rep = mulharm::run_experiment(configs[i]);
        // Several runs of one experiment id would otherwise share table names.
        const std::string prefix = configs.size() > 1 ? std::to_string(i + 1) + "_" : "";
        for (const auto& [name, text] : rep.tables) write_file(fs::path(out_dir) / (prefix + name), text);
        reports.push_back(rep.to_json());
        all_pass = all_pass && rep.pass();
        std::cout << rep.experiment << ": " << (rep.pass() ? "consistent with" : "inconsistent with")
                  << " the bound (" << rep.criteria.size() << " criteria)\n";
        for (const auto& c : rep.criteria)
            std::cout << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << ": " << c.detail << '\n';
    }
    const json doc = {{"schema_version", mulharm::kReportSchemaVersion},
                      {"reports", reports},
                      {"verdict", all_pass ? "pass" : "fail"}};
    write_file(fs::path(out_dir) / "report.json", doc.dump(2) + "\n");
    return all_pass ? kExitPass : kExitFail;
}

int cmd_corpus(const std::string& spec_path, std::uint64_t seed, const std::string& out_path) {
    json doc = read_json(spec_path);
    if (!doc.is_object()) throw mulharm::ConfigError("corpus spec must be an object");
    int n = 1;
    std::size_t N = 64;
    if (doc.contains("grid")) {
        n = doc["grid"].value("n", n);
        N = doc["grid"].value("N", N);
        doc.erase("grid");
    }
    if (n != 1 && n != 2) throw mulharm::ConfigError("grid.n must be 1 or 2");
    if (N < 8 || (N & (N - 1)) != 0) throw mulharm::ConfigError("grid.N must be a power of two >= 8");
    const auto spec = mulharm::CorpusSpec::from_json(doc);
    const mulharm::TorusGrid grid(n, N);
    std::vector<mulharm::CorpusTuple> corpus;
    try {
        corpus = mulharm::generate_corpus(grid, spec, seed);
    } catch (const mulharm::RejectedInput& e) {
        throw mulharm::ConfigError(e.what());
    }

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write " + out_path);
    }
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << "tuple,kind,component,index,x0,x1,re,im\n" << std::setprecision(17);
    for (const auto& t : corpus)
        for (std::size_t c = 0; c < t.components.size(); ++c) {
            const auto& f = t.components[c];
            for (std::size_t i = 0; i < f.size(); ++i) {
                const auto x = grid.point(i);
                out << t.id << ',' << t.kind << ',' << c << ',' << i << ',' << x[0] << ',' << x[1] << ','
                    << f[i].real() << ',' << f[i].imag() << '\n';
            }
        }
    return kExitPass;
}

int cmd_probe(const std::string& symbol, const std::string& params, int n, std::size_t N, int s, int level,
              double p) {
    json cfg = {{"experiment", "E6"},
                {"seed", 0},
                {"grid", {{"n", n}, {"N", N}, {"resolutions", 1}}},
                {"symbol", {{"family", symbol}, {"s", s}}},
                {"probe", {{"level", level}, {"p", p}}}};
    if (!params.empty()) {
        try {
            cfg["symbol"]["params"] = json::parse(params);
        } catch (const json::parse_error& e) {
            throw mulharm::ConfigError(std::string("--params is not valid JSON: ") + e.what());
        }
    }
    const auto rep = mulharm::run_experiment(mulharm::ExperimentConfig::from_json(cfg));
    std::cout << rep.to_json().dump(2) << '\n';
    return rep.pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bilinear multiplier harmonic-analysis verification harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* run = app.add_subcommand("run", "Run the experiments in a JSON config and write report.json plus CSV tables");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();

    std::string spec_path, corpus_out;
    std::uint64_t seed = 0;
    auto* corpus = app.add_subcommand("corpus", "Generate a seeded function corpus as CSV");
    corpus->add_option("--spec", spec_path, "Corpus spec (JSON)")->required()->check(CLI::ExistingFile);
    corpus->add_option("--seed", seed, "Corpus seed")->required();
    corpus->add_option("--out", corpus_out, "CSV file (default: stdout)");

    std::string symbol, params;
    std::size_t N = 256;
    int s = 2, n = 1, level = 4;
    double p = 1.5;
    auto* probe = app.add_subcommand("probe", "Kernel decay probe for one symbol at one resolution");
    probe->add_option("--symbol", symbol, "Builtin symbol family")->required();
    probe->add_option("--N", N, "Points per axis")->required();
    probe->add_option("--s", s, "Smoothness order")->required();
    probe->add_option("--n", n, "Dimension")->capture_default_str();
    probe->add_option("--level", level, "Dyadic level of the cube")->capture_default_str();
    probe->add_option("--p", p, "Integrability exponent, 2n/s < p <= 2")->capture_default_str();
    probe->add_option("--params", params, "Symbol parameters (JSON object)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir);
        if (*corpus) return cmd_corpus(spec_path, seed, corpus_out);
        return cmd_probe(symbol, params, n, N, s, level, p);
    } catch (const mulharm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
}
