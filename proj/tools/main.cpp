// softpou-cli: build, verify and sweep softmax-POU constructions through the
// shared-library C interface. Exit codes: 0 success, 1 check failure,
// 2 invalid config.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "softpou/softpou.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalidConfig = 2;

int exit_code_for(softpou_status status) {
    switch (status) {
    case SOFTPOU_OK: return kExitOk;
    case SOFTPOU_ERR_CHECK_FAILED: return kExitCheckFailed;
    case SOFTPOU_ERR_INTERNAL: return kExitCheckFailed;
    default: return kExitInvalidConfig;
    }
}

struct StringGuard {
    char* s = nullptr;
    ~StringGuard() { softpou_string_free(s); }
    std::string str() const { return s ? std::string(s) : std::string(); }
};

struct TargetGuard {
    softpou_target* t = nullptr;
    ~TargetGuard() { softpou_target_free(t); }
};

struct NetGuard {
    softpou_net* n = nullptr;
    ~NetGuard() { softpou_net_free(n); }
};

struct Config {
    std::string target = "sin1d";
    std::string domain; // optional consistency check, e.g. cube1, circle
    double eps = 0.2;
    std::vector<double> eps_list;
    std::vector<std::uint64_t> n_list;
    std::string mode = "theoretical";
    std::uint64_t seed = 0;
    std::string out;
    std::string params_file, meta_file;
    bool trace_attention = false;
    double noise_sd = 0.1;
    double tolerance = 0.0; // 0 = command default
    int threads = 0;
};

// Number formatting for CSV cells: round-trip precision, locale independent.
std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void apply_config_file(const std::string& path, Config& cfg, const CLI::App& app) {
    const json j = json::parse(std::ifstream(path));
    auto flag_given = [&app](const std::string& name) {
        return app.count(name) > 0;
    };
    // Flags win over the config file.
    if (j.contains("target") && !flag_given("--target")) cfg.target = j["target"];
    if (j.contains("domain") && !flag_given("--domain")) cfg.domain = j["domain"];
    if (j.contains("eps") && !flag_given("--eps")) cfg.eps = j["eps"];
    if (j.contains("eps_list") && !flag_given("--eps-list"))
        cfg.eps_list = j["eps_list"].get<std::vector<double>>();
    if (j.contains("n_list") && !flag_given("--n-list"))
        cfg.n_list = j["n_list"].get<std::vector<std::uint64_t>>();
    if (j.contains("mode") && !flag_given("--mode")) cfg.mode = j["mode"];
    if (j.contains("seed") && !flag_given("--seed")) cfg.seed = j["seed"];
    if (j.contains("out") && !flag_given("--out")) cfg.out = j["out"];
    if (j.contains("noise_sd") && !flag_given("--noise-sd")) cfg.noise_sd = j["noise_sd"];
    if (j.contains("trace_attention") && !flag_given("--trace-attention"))
        cfg.trace_attention = j["trace_attention"];
    if (j.contains("threads") && !flag_given("--threads")) cfg.threads = j["threads"];
}

int make_target(const Config& cfg, TargetGuard& guard) {
    softpou_status st;
    if (cfg.target.rfind("custom:", 0) == 0) {
        const std::string path = cfg.target.substr(7);
        std::ifstream in(path);
        if (!in) {
            std::cerr << "error: cannot open custom target file " << path << "\n";
            return kExitInvalidConfig;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        st = softpou_target_custom(ss.str().c_str(), &guard.t);
    } else {
        st = softpou_target_builtin(cfg.target.c_str(), &guard.t);
    }
    if (st != SOFTPOU_OK) {
        std::cerr << "error: " << softpou_last_error() << "\n";
        return exit_code_for(st);
    }
    if (!cfg.domain.empty()) {
        StringGuard info;
        softpou_target_info(guard.t, &info.s);
        const json j = json::parse(info.str());
        std::string tag;
        if (j["domain"]["type"] == "cube")
            tag = "cube" + std::to_string(j["domain"]["dim"].get<int>());
        else
            tag = j["domain"]["kind"].get<std::string>();
        if (tag != cfg.domain) {
            std::cerr << "error: target '" << cfg.target << "' lives on domain '" << tag
                      << "', not '" << cfg.domain << "'\n";
            return kExitInvalidConfig;
        }
    }
    return kExitOk;
}

std::string checks_csv(const json& checks) {
    std::ostringstream csv;
    csv << "name,measured,limit,pass\n";
    for (const auto& c : checks)
        csv << c["name"].get<std::string>() << "," << fmt(c["measured"].get<double>()) << ","
            << fmt(c["limit"].get<double>()) << "," << (c["pass"].get<bool>() ? 1 : 0) << "\n";
    return csv.str();
}

void print_checks(const json& checks) {
    for (const auto& c : checks)
        std::cout << (c["pass"].get<bool>() ? "[PASS] " : "[FAIL] ")
                  << c["name"].get<std::string>() << "  measured=" << c["measured"].get<double>()
                  << " limit=" << c["limit"].get<double>() << "\n";
}

int cmd_approx(const Config& cfg, bool manifold_alias) {
    TargetGuard target;
    if (int rc = make_target(cfg, target)) return rc;
    if (manifold_alias) {
        StringGuard info;
        softpou_target_info(target.t, &info.s);
        if (json::parse(info.str())["domain"]["type"] != "manifold") {
            std::cerr << "error: manifold-approx requires a manifold-domain target\n";
            return kExitInvalidConfig;
        }
    }
    const int mode = cfg.mode == "calibrated" ? 1 : 0;
    StringGuard report;
    NetGuard net;
    const softpou_status st =
        softpou_run_approx(target.t, cfg.eps, mode, cfg.seed, &report.s, &net.n);
    if (!report.s) {
        std::cerr << "error: " << softpou_last_error() << "\n";
        return exit_code_for(st);
    }
    const json j = json::parse(report.str());
    print_checks(j["checks"]);
    std::cout << "seq_len=" << j["seq_len"] << " param_count=" << j["param_count"]
              << " max_magnitude=" << j["max_magnitude"].get<double>() << "\n";
    if (!cfg.out.empty() && net.n) {
        fs::create_directories(cfg.out);
        StringGuard params_json, meta_json;
        softpou_net_params_json(net.n, &params_json.s);
        softpou_net_meta_json(net.n, &meta_json.s);
        write_file(fs::path(cfg.out) / "params.json", params_json.str());
        write_file(fs::path(cfg.out) / "meta.json", meta_json.str());
        write_file(fs::path(cfg.out) / "report.csv", checks_csv(j["checks"]));
        write_file(fs::path(cfg.out) / "report.json", report.str());
        if (cfg.trace_attention) {
            // Trace at the first covering center recorded in the metadata.
            const json meta = json::parse(meta_json.str());
            const auto x = meta["pou"]["covering"]["centers"][0].get<std::vector<double>>();
            StringGuard trace;
            if (softpou_net_trace_json(net.n, x.data(), x.size(), 1, &trace.s) == SOFTPOU_OK)
                write_file(fs::path(cfg.out) / "trace.json", trace.str());
        }
    }
    if (st != SOFTPOU_OK) std::cerr << "error: " << softpou_last_error() << "\n";
    return exit_code_for(st);
}

int cmd_verify(const Config& cfg) {
    NetGuard net;
    TargetGuard target;
    bool have_target = false;
    if (!cfg.params_file.empty()) {
        std::ifstream pin(cfg.params_file);
        if (!pin) {
            std::cerr << "error: cannot open " << cfg.params_file << "\n";
            return kExitInvalidConfig;
        }
        std::ostringstream pss;
        pss << pin.rdbuf();
        std::string meta_text;
        if (!cfg.meta_file.empty()) {
            std::ifstream min(cfg.meta_file);
            if (!min) {
                std::cerr << "error: cannot open " << cfg.meta_file << "\n";
                return kExitInvalidConfig;
            }
            std::ostringstream mss;
            mss << min.rdbuf();
            meta_text = mss.str();
        } else {
            std::cerr << "error: verify from files needs both --params and --meta\n";
            return kExitInvalidConfig;
        }
        const softpou_status st =
            softpou_net_from_json(pss.str().c_str(), meta_text.c_str(), &net.n);
        if (st != SOFTPOU_OK) {
            std::cerr << "error: " << softpou_last_error() << "\n";
            return exit_code_for(st);
        }
    } else {
        if (int rc = make_target(cfg, target)) return rc;
        have_target = true;
        const int mode = cfg.mode == "calibrated" ? 1 : 0;
        const softpou_status st = softpou_assemble(target.t, cfg.eps, mode, &net.n);
        if (st != SOFTPOU_OK) {
            std::cerr << "error: " << softpou_last_error() << "\n";
            return exit_code_for(st);
        }
    }
    StringGuard report;
    const softpou_status st =
        softpou_run_verify(net.n, have_target ? target.t : nullptr, cfg.seed, &report.s);
    if (report.s) {
        const json j = json::parse(report.str());
        print_checks(j["checks"]);
        if (!cfg.out.empty()) {
            fs::create_directories(cfg.out);
            write_file(fs::path(cfg.out) / "report.csv", checks_csv(j["checks"]));
            write_file(fs::path(cfg.out) / "report.json", report.str());
        }
    }
    if (st != SOFTPOU_OK) std::cerr << "error: " << softpou_last_error() << "\n";
    return exit_code_for(st);
}

int cmd_rates(const Config& cfg) {
    TargetGuard target;
    if (int rc = make_target(cfg, target)) return rc;
    if (cfg.eps_list.size() < 4) {
        std::cerr << "error: rates needs --eps-list with at least 4 decreasing values\n";
        return kExitInvalidConfig;
    }
    const int mode = cfg.mode == "calibrated" ? 1 : 0;
    const double tolerance = cfg.tolerance > 0.0 ? cfg.tolerance : 0.15;
    StringGuard report;
    const softpou_status st = softpou_run_rates(target.t, cfg.eps_list.data(),
                                                cfg.eps_list.size(), mode, tolerance, &report.s);
    if (!report.s) {
        std::cerr << "error: " << softpou_last_error() << "\n";
        return exit_code_for(st);
    }
    const json j = json::parse(report.str());
    std::ostringstream csv;
    csv << "epsilon,count,sup_error,n_total\n";
    for (const auto& p : j["points"])
        csv << fmt(p["x"].get<double>()) << "," << fmt(p["count"].get<double>()) << ","
            << fmt(p["sup_error"].get<double>()) << "," << fmt(p["n_total"].get<double>())
            << "\n";
    std::cout << "slope=" << j["slope"].get<double>()
              << " expected=" << j["expected_slope"].get<double>()
              << " r2=" << j["r2"].get<double>()
              << " pass=" << (j["pass"].get<bool>() ? 1 : 0) << "\n";
    if (!cfg.out.empty()) {
        fs::create_directories(cfg.out);
        write_file(fs::path(cfg.out) / "rate.csv", csv.str());
        write_file(fs::path(cfg.out) / "rates.json", report.str());
    }
    if (st != SOFTPOU_OK) std::cerr << "error: " << softpou_last_error() << "\n";
    return exit_code_for(st);
}

int cmd_generalize(const Config& cfg) {
    TargetGuard target;
    if (int rc = make_target(cfg, target)) return rc;
    if (cfg.n_list.size() < 4) {
        std::cerr << "error: generalize needs --n-list with at least 4 values\n";
        return kExitInvalidConfig;
    }
    const double tolerance = cfg.tolerance > 0.0 ? cfg.tolerance : 0.25;
    StringGuard report;
    const softpou_status st =
        softpou_run_generalize(target.t, cfg.noise_sd, cfg.n_list.data(), cfg.n_list.size(),
                               cfg.seed, tolerance, &report.s);
    if (!report.s) {
        std::cerr << "error: " << softpou_last_error() << "\n";
        return exit_code_for(st);
    }
    const json j = json::parse(report.str());
    std::ostringstream csv;
    csv << "n,mse\n";
    for (const auto& p : j["points"])
        csv << fmt(p["x"].get<double>()) << "," << fmt(p["mse"].get<double>()) << "\n";
    std::cout << "slope=" << j["slope"].get<double>()
              << " expected=" << j["expected_slope"].get<double>()
              << " r2=" << j["r2"].get<double>()
              << " pass=" << (j["pass"].get<bool>() ? 1 : 0) << "\n";
    if (!cfg.out.empty()) {
        fs::create_directories(cfg.out);
        write_file(fs::path(cfg.out) / "rate.csv", csv.str());
        write_file(fs::path(cfg.out) / "generalize.json", report.str());
    }
    if (st != SOFTPOU_OK) std::cerr << "error: " << softpou_last_error() << "\n";
    return exit_code_for(st);
}

int cmd_dump_params(const Config& cfg) {
    NetGuard net;
    if (!cfg.params_file.empty()) {
        std::ifstream in(cfg.params_file);
        if (!in) {
            std::cerr << "error: cannot open " << cfg.params_file << "\n";
            return kExitInvalidConfig;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        std::cout << json::parse(ss.str()).dump(2) << "\n"; // validated pretty print
        return kExitOk;
    }
    TargetGuard target;
    if (int rc = make_target(cfg, target)) return rc;
    const int mode = cfg.mode == "calibrated" ? 1 : 0;
    const softpou_status st = softpou_assemble(target.t, cfg.eps, mode, &net.n);
    if (st != SOFTPOU_OK) {
        std::cerr << "error: " << softpou_last_error() << "\n";
        return exit_code_for(st);
    }
    StringGuard params_json;
    softpou_net_params_json(net.n, &params_json.s);
    if (!cfg.out.empty()) {
        fs::create_directories(cfg.out);
        write_file(fs::path(cfg.out) / "params.json", params_json.str());
    } else {
        std::cout << params_json.str() << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"softmax partition-of-unity approximation toolkit"};
    app.require_subcommand(1);

    Config cfg;
    std::string config_file;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "JSON config file; explicit flags win");
        sub->add_option("--target", cfg.target,
                        "built-in target name or custom:<file.json>");
        sub->add_option("--domain", cfg.domain,
                        "expected domain tag (cube<d>, circle, sphere, flat_torus)");
        sub->add_option("--eps", cfg.eps, "target accuracy");
        sub->add_option("--mode", cfg.mode, "theoretical | calibrated")
            ->check(CLI::IsMember({"theoretical", "calibrated"}));
        sub->add_option("--seed", cfg.seed, "random seed");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--threads", cfg.threads, "worker threads (overrides SOFTPOU_THREADS)");
        sub->add_flag("--trace-attention", cfg.trace_attention,
                      "store attention matrices in trace.json");
    };

    CLI::App* approx = app.add_subcommand("approx", "build a construction and verify it");
    add_common(approx);
    CLI::App* mapprox =
        app.add_subcommand("manifold-approx", "approx for manifold-domain targets");
    add_common(mapprox);
    CLI::App* verify = app.add_subcommand("verify", "run the identity/bound suite");
    add_common(verify);
    verify->add_option("--params", cfg.params_file, "saved params.json to verify");
    verify->add_option("--meta", cfg.meta_file, "saved meta.json matching --params");
    CLI::App* rates = app.add_subcommand("rates", "center-count scaling sweep");
    add_common(rates);
    rates->add_option("--eps-list", cfg.eps_list, "decreasing accuracies (>= 4)");
    rates->add_option("--tolerance", cfg.tolerance, "slope tolerance (default 0.15)");
    CLI::App* generalize =
        app.add_subcommand("generalize", "plug-in regression-rate proxy sweep");
    add_common(generalize);
    generalize->add_option("--n-list", cfg.n_list, "sample sizes (>= 4, each >= 50)");
    generalize->add_option("--noise-sd", cfg.noise_sd, "label noise standard deviation");
    generalize->add_option("--tolerance", cfg.tolerance, "slope tolerance (default 0.25)");
    CLI::App* dump = app.add_subcommand("dump-params", "emit params.json");
    add_common(dump);
    dump->add_option("--params", cfg.params_file, "re-emit an existing params.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalidConfig;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config_file.empty()) apply_config_file(config_file, cfg, *sub);
        if (cfg.threads > 0) softpou_set_threads(cfg.threads);

        if (sub == approx) return cmd_approx(cfg, false);
        if (sub == mapprox) return cmd_approx(cfg, true);
        if (sub == verify) return cmd_verify(cfg);
        if (sub == rates) return cmd_rates(cfg);
        if (sub == generalize) return cmd_generalize(cfg);
        if (sub == dump) return cmd_dump_params(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidConfig;
    }
    return kExitInvalidConfig;
}
