#include "softpou/softpou.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>

#include "softpou/analysis.hpp"
#include "softpou/construction.hpp"
#include "softpou/io.hpp"
#include "softpou/targets.hpp"

#include "parallel.hpp"

using namespace softpou;

struct softpou_target {
    HolderTarget impl;
};

struct softpou_pou {
    PouApproximator impl;
};

struct softpou_net {
    Construction impl;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

softpou_status fail(softpou_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
softpou_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const std::domain_error& e) {
        return fail(SOFTPOU_ERR_PRECONDITION, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(SOFTPOU_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SOFTPOU_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SOFTPOU_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SOFTPOU_ERR_INTERNAL, "unknown error");
    }
}

softpou_status require_arg(bool cond, const char* message) {
    if (cond) return SOFTPOU_OK;
    return fail(SOFTPOU_ERR_INVALID_ARGUMENT, message);
}

json checks_to_json(const std::vector<CheckResult>& checks) {
    json arr = json::array();
    for (const CheckResult& c : checks)
        arr.push_back({{"name", c.name},
                       {"measured", c.measured},
                       {"limit", c.limit},
                       {"pass", c.pass}});
    return arr;
}

json rate_report_to_json(const RateReport& report) {
    json pts = json::array();
    for (const RatePoint& p : report.points) {
        json jp = {{"x", p.x}, {"count", p.count}, {"n_total", p.n_total}};
        if (report.y_name == "mse")
            jp["mse"] = p.mse;
        else
            jp["sup_error"] = p.sup_error;
        pts.push_back(std::move(jp));
    }
    return json{{"x_name", report.x_name},   {"y_name", report.y_name},
                {"points", std::move(pts)},  {"slope", report.slope},
                {"intercept", report.intercept}, {"r2", report.r2},
                {"expected_slope", report.expected_slope},
                {"tolerance", report.tolerance}, {"pass", report.pass}};
}

} // namespace

extern "C" {

const char* softpou_version(void) { return "1.0.0"; }

const char* softpou_last_error(void) { return g_last_error.c_str(); }

void softpou_string_free(char* s) { delete[] s; }

void softpou_set_threads(int n) { set_thread_count(n); }

softpou_status softpou_target_builtin(const char* name, softpou_target** out) {
    if (auto st = require_arg(name && out, "null argument")) return st;
    return guarded([&]() {
        auto handle = new softpou_target{target_by_name(name)};
        *out = handle;
        return SOFTPOU_OK;
    });
}

softpou_status softpou_target_custom(const char* json_text, softpou_target** out) {
    if (auto st = require_arg(json_text && out, "null argument")) return st;
    return guarded([&]() {
        const json j = json::parse(json_text);
        HolderTarget t = make_table_target(
            j.at("points").get<std::vector<std::vector<double>>>(),
            j.at("values").get<std::vector<double>>(), j.at("alpha").get<double>(),
            j.at("C_H").get<double>(), j.at("B").get<double>(),
            domain_from_json(j.at("domain")), j.value("name", std::string("custom")));
        if (!holder_spot_check(t, 200, 1234))
            throw std::domain_error(
                "custom target failed its smoothness certificate spot-check");
        *out = new softpou_target{std::move(t)};
        return SOFTPOU_OK;
    });
}

softpou_status softpou_target_info(const softpou_target* target, char** json_out) {
    if (auto st = require_arg(target && json_out, "null argument")) return st;
    return guarded([&]() {
        json j = {{"name", target->impl.name},
                  {"alpha", target->impl.alpha},
                  {"C_H", target->impl.holder_const},
                  {"B", target->impl.sup_bound},
                  {"domain", domain_to_json(target->impl.domain)}};
        *json_out = dup_string(j.dump(2));
        return SOFTPOU_OK;
    });
}

void softpou_target_free(softpou_target* target) { delete target; }

softpou_status softpou_pou_build(const softpou_target* target, double epsilon, int mode,
                                 softpou_pou** out) {
    if (auto st = require_arg(target && out, "null argument")) return st;
    return guarded([&]() {
        PouConfig cfg{epsilon, mode ? PouMode::calibrated : PouMode::theoretical};
        *out = new softpou_pou{build_pou(target->impl, cfg)};
        return SOFTPOU_OK;
    });
}

softpou_status softpou_pou_eval(const softpou_pou* pou, const double* x, size_t dim,
                                double* out) {
    if (auto st = require_arg(pou && x && out, "null argument")) return st;
    return guarded([&]() {
        *out = pou_eval(pou->impl, std::span<const double>(x, dim));
        return SOFTPOU_OK;
    });
}

softpou_status softpou_pou_weights(const softpou_pou* pou, const double* x, size_t dim,
                                   double* weights, size_t weights_len) {
    if (auto st = require_arg(pou && x && weights, "null argument")) return st;
    return guarded([&]() {
        if (weights_len != pou->impl.covering.count())
            throw std::invalid_argument("weights buffer length must equal the center count");
        const Vector w = pou_weights(pou->impl, std::span<const double>(x, dim));
        std::memcpy(weights, w.data(), w.size() * sizeof(double));
        return SOFTPOU_OK;
    });
}

softpou_status softpou_pou_count(const softpou_pou* pou, size_t* out) {
    if (auto st = require_arg(pou && out, "null argument")) return st;
    *out = pou->impl.covering.count();
    return SOFTPOU_OK;
}

softpou_status softpou_pou_sup_error(const softpou_pou* pou, const softpou_target* target,
                                     size_t n_samples, uint64_t seed, double* out) {
    if (auto st = require_arg(pou && target && out, "null argument")) return st;
    return guarded([&]() {
        Sampler s;
        s.n = n_samples;
        s.seed = seed;
        *out = sup_error([&](std::span<const double> x) { return pou_eval(pou->impl, x); },
                         target->impl, s)
                   .value;
        return SOFTPOU_OK;
    });
}

softpou_status softpou_pou_to_json(const softpou_pou* pou, char** json_out) {
    if (auto st = require_arg(pou && json_out, "null argument")) return st;
    return guarded([&]() {
        *json_out = dup_string(pou_to_json(pou->impl).dump(2));
        return SOFTPOU_OK;
    });
}

void softpou_pou_free(softpou_pou* pou) { delete pou; }

softpou_status softpou_assemble(const softpou_target* target, double epsilon, int mode,
                                softpou_net** out) {
    if (auto st = require_arg(target && out, "null argument")) return st;
    return guarded([&]() {
        PouConfig cfg{epsilon, mode ? PouMode::calibrated : PouMode::theoretical};
        *out = new softpou_net{assemble(target->impl, cfg)};
        return SOFTPOU_OK;
    });
}

softpou_status softpou_net_forward(const softpou_net* net, const double* x, size_t dim,
                                   double* out) {
    if (auto st = require_arg(net && x && out, "null argument")) return st;
    return guarded([&]() {
        *out = forward(net->impl.params, std::span<const double>(x, dim));
        return SOFTPOU_OK;
    });
}

softpou_status softpou_net_param_count(const softpou_net* net, size_t* out) {
    if (auto st = require_arg(net && out, "null argument")) return st;
    *out = count_params(net->impl.params);
    return SOFTPOU_OK;
}

softpou_status softpou_net_max_magnitude(const softpou_net* net, double* out) {
    if (auto st = require_arg(net && out, "null argument")) return st;
    *out = max_magnitude(net->impl.params);
    return SOFTPOU_OK;
}

softpou_status softpou_net_params_json(const softpou_net* net, char** json_out) {
    if (auto st = require_arg(net && json_out, "null argument")) return st;
    return guarded([&]() {
        *json_out = dup_string(params_to_json(net->impl.params).dump());
        return SOFTPOU_OK;
    });
}

softpou_status softpou_net_meta_json(const softpou_net* net, char** json_out) {
    if (auto st = require_arg(net && json_out, "null argument")) return st;
    return guarded([&]() {
        json j = meta_to_json(net->impl.meta);
        j["pou"] = pou_to_json(net->impl.pou);
        *json_out = dup_string(j.dump());
        return SOFTPOU_OK;
    });
}

softpou_status softpou_net_from_json(const char* params_json, const char* meta_json,
                                     softpou_net** out) {
    if (auto st = require_arg(params_json && meta_json && out, "null argument")) return st;
    return guarded([&]() {
        auto net = std::make_unique<softpou_net>();
        net->impl.params = params_from_json(json::parse(params_json));
        const json jm = json::parse(meta_json);
        net->impl.meta = meta_from_json(jm);
        if (jm.contains("pou")) net->impl.pou = pou_from_json(jm.at("pou"));
        *out = net.release();
        return SOFTPOU_OK;
    });
}

softpou_status softpou_net_trace_json(const softpou_net* net, const double* x, size_t dim,
                                      int include_attention, char** json_out) {
    if (auto st = require_arg(net && x && json_out, "null argument")) return st;
    return guarded([&]() {
        ActivationTrace trace;
        forward(net->impl.params, std::span<const double>(x, dim), &trace,
                include_attention != 0);
        auto matrix_json = [](const Matrix& m) {
            json rows = json::array();
            for (std::size_t r = 0; r < m.rows(); ++r) {
                json row = json::array();
                for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
                rows.push_back(std::move(row));
            }
            return rows;
        };
        json j;
        j["z0"] = matrix_json(trace.z0);
        j["output"] = trace.output;
        json blocks = json::array();
        for (const BlockTrace& b : trace.blocks) {
            json jb;
            jb["mha_out"] = matrix_json(b.mha_out);
            jb["ffn_out"] = matrix_json(b.ffn_out);
            if (include_attention) {
                json heads = json::array();
                for (const Matrix& a : b.attention) heads.push_back(matrix_json(a));
                jb["attention"] = std::move(heads);
            }
            blocks.push_back(std::move(jb));
        }
        j["blocks"] = std::move(blocks);
        *json_out = dup_string(j.dump());
        return SOFTPOU_OK;
    });
}

void softpou_net_free(softpou_net* net) { delete net; }

softpou_status softpou_run_verify(const softpou_net* net, const softpou_target* target,
                                  uint64_t seed, char** report_json) {
    if (auto st = require_arg(net && report_json, "null argument")) return st;
    return guarded([&]() {
        VerifyOptions options;
        options.seed = seed;
        const auto checks =
            verify_construction(net->impl, target ? &target->impl : nullptr, options);
        const bool ok = all_pass(checks);
        json j = {{"checks", checks_to_json(checks)}, {"pass", ok}};
        *report_json = dup_string(j.dump(2));
        if (!ok) {
            std::string failed;
            for (const CheckResult& c : checks)
                if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.name;
            return fail(SOFTPOU_ERR_CHECK_FAILED, "verification failed: " + failed);
        }
        return SOFTPOU_OK;
    });
}

softpou_status softpou_run_approx(const softpou_target* target, double epsilon, int mode,
                                  uint64_t seed, char** report_json, softpou_net** net_out) {
    if (auto st = require_arg(target && report_json, "null argument")) return st;
    return guarded([&]() {
        PouConfig cfg{epsilon, mode ? PouMode::calibrated : PouMode::theoretical};
        auto net = std::make_unique<softpou_net>();
        net->impl = assemble(target->impl, cfg);
        VerifyOptions options;
        options.seed = seed;
        options.scan_points = 10000;
        const auto checks = verify_construction(net->impl, &target->impl, options);
        const bool ok = all_pass(checks);
        json j;
        j["epsilon"] = epsilon;
        j["mode"] = mode ? "calibrated" : "theoretical";
        j["target"] = target->impl.name;
        j["param_count"] = count_params(net->impl.params);
        j["max_magnitude"] = max_magnitude(net->impl.params);
        j["seq_len"] = net->impl.meta.seq_len;
        j["checks"] = checks_to_json(checks);
        j["pass"] = ok;
        *report_json = dup_string(j.dump(2));
        if (net_out) *net_out = net.release();
        if (!ok) return fail(SOFTPOU_ERR_CHECK_FAILED, "approximation checks failed");
        return SOFTPOU_OK;
    });
}

softpou_status softpou_run_rates(const softpou_target* target, const double* eps_list,
                                 size_t n_eps, int mode, double tolerance,
                                 char** report_json) {
    if (auto st = require_arg(target && eps_list && report_json, "null argument")) return st;
    return guarded([&]() {
        const RateReport report =
            rate_sweep(target->impl, std::span<const double>(eps_list, n_eps),
                       mode ? PouMode::calibrated : PouMode::theoretical, tolerance);
        *report_json = dup_string(rate_report_to_json(report).dump(2));
        if (!report.pass) return fail(SOFTPOU_ERR_CHECK_FAILED, "rate sweep failed");
        return SOFTPOU_OK;
    });
}

softpou_status softpou_run_generalize(const softpou_target* target, double noise_sd,
                                      const uint64_t* n_list, size_t n_count, uint64_t seed,
                                      double tolerance, char** report_json) {
    if (auto st = require_arg(target && n_list && report_json, "null argument")) return st;
    return guarded([&]() {
        std::vector<std::size_t> sizes(n_list, n_list + n_count);
        const RateReport report =
            generalization_proxy(target->impl, noise_sd, sizes, seed, tolerance);
        *report_json = dup_string(rate_report_to_json(report).dump(2));
        if (!report.pass) return fail(SOFTPOU_ERR_CHECK_FAILED, "proxy rate outside tolerance");
        return SOFTPOU_OK;
    });
}

} // extern "C"
