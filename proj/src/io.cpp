#include "softpou/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace softpou {

namespace {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::invalid_argument(what + ": expected a nested array");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw std::invalid_argument(what + ": ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Vector vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument(what + ": expected an array");
    Vector v;
    v.reserve(j.size());
    for (const auto& x : j) v.push_back(x.get<double>());
    return v;
}

} // namespace

json covering_to_json(const Covering& covering) {
    json j;
    j["kind"] = covering.kind;
    j["radius"] = covering.radius;
    j["count"] = covering.count();
    j["centers"] = covering.centers;
    return j;
}

Covering covering_from_json(const json& j) {
    Covering c;
    c.kind = j.at("kind").get<std::string>();
    c.radius = j.at("radius").get<double>();
    c.centers = j.at("centers").get<std::vector<std::vector<double>>>();
    if (j.contains("count") && j["count"].get<std::size_t>() != c.centers.size())
        throw std::invalid_argument("covering: count does not match centers length");
    return c;
}

json pou_to_json(const PouApproximator& approx) {
    json j;
    j["covering"] = covering_to_json(approx.covering);
    j["values"] = approx.values;
    j["M_g"] = approx.scale;
    return j;
}

PouApproximator pou_from_json(const json& j) {
    PouApproximator p;
    p.covering = covering_from_json(j.at("covering"));
    p.values = j.at("values").get<std::vector<double>>();
    p.scale = j.at("M_g").get<double>();
    p.validate();
    return p;
}

json params_to_json(const TransformerParams& params) {
    json j;
    j["dims"] = {{"d", params.input_dim},
                 {"D", params.embed_dim},
                 {"P", params.seq_len},
                 {"L", params.depth()}};
    j["embedding"] = {{"W_E", matrix_to_json(params.embed_w)}, {"b_E", params.embed_b}};
    j["positional"] = matrix_to_json(params.positional);
    json blocks = json::array();
    for (const EncoderBlock& b : params.blocks) {
        json jb;
        jb["H"] = b.heads.size();
        jb["d_k"] = b.key_dim;
        jb["d_v"] = b.value_dim;
        jb["d_ff"] = b.ffn.w1.rows();
        json heads = json::array();
        for (const AttentionHead& h : b.heads)
            heads.push_back({{"Q", matrix_to_json(h.query)},
                             {"K", matrix_to_json(h.key)},
                             {"V", matrix_to_json(h.value)}});
        jb["heads"] = std::move(heads);
        jb["out_proj"] = matrix_to_json(b.out_proj);
        jb["ffn"] = {{"W1", matrix_to_json(b.ffn.w1)},
                     {"b1", b.ffn.b1},
                     {"W2", matrix_to_json(b.ffn.w2)},
                     {"b2", b.ffn.b2}};
        blocks.push_back(std::move(jb));
    }
    j["blocks"] = std::move(blocks);
    j["readout"] = params.readout;
    return j;
}

TransformerParams params_from_json(const json& j) {
    TransformerParams p;
    const json& dims = j.at("dims");
    p.input_dim = dims.at("d").get<std::size_t>();
    p.embed_dim = dims.at("D").get<std::size_t>();
    p.seq_len = dims.at("P").get<std::size_t>();
    p.embed_w = matrix_from_json(j.at("embedding").at("W_E"), "W_E");
    p.embed_b = vector_from_json(j.at("embedding").at("b_E"), "b_E");
    p.positional = matrix_from_json(j.at("positional"), "positional");
    for (const auto& jb : j.at("blocks")) {
        EncoderBlock b;
        b.key_dim = jb.at("d_k").get<std::size_t>();
        b.value_dim = jb.at("d_v").get<std::size_t>();
        for (const auto& jh : jb.at("heads")) {
            AttentionHead h;
            h.query = matrix_from_json(jh.at("Q"), "Q");
            h.key = matrix_from_json(jh.at("K"), "K");
            h.value = matrix_from_json(jh.at("V"), "V");
            b.heads.push_back(std::move(h));
        }
        b.out_proj = matrix_from_json(jb.at("out_proj"), "out_proj");
        b.ffn.w1 = matrix_from_json(jb.at("ffn").at("W1"), "ffn W1");
        b.ffn.b1 = vector_from_json(jb.at("ffn").at("b1"), "ffn b1");
        b.ffn.w2 = matrix_from_json(jb.at("ffn").at("W2"), "ffn W2");
        b.ffn.b2 = vector_from_json(jb.at("ffn").at("b2"), "ffn b2");
        if (jb.contains("H") && jb["H"].get<std::size_t>() != b.heads.size())
            throw std::invalid_argument("params: head count does not match heads array");
        p.blocks.push_back(std::move(b));
    }
    p.readout = vector_from_json(j.at("readout"), "readout");
    if (j.at("dims").contains("L") && dims.at("L").get<std::size_t>() != p.blocks.size())
        throw std::invalid_argument("params: depth does not match blocks length");
    p.validate();
    return p;
}

json meta_to_json(const ConstructionMeta& meta) {
    json j;
    j["epsilon"] = meta.epsilon;
    j["P"] = meta.seq_len;
    j["input_dim"] = meta.input_dim;
    j["M_g"] = meta.pou_scale;
    j["M"] = meta.attn_scale;
    j["c"] = meta.gap;
    j["eta"] = meta.eta_value;
    j["lambda"] = meta.lambda_value;
    j["leak"] = meta.leak;
    j["mode"] = meta.mode == PouMode::theoretical ? "theoretical" : "calibrated";
    j["bounds"] = {{"B_T", meta.feature_bound_t},
                   {"B_R", meta.feature_bound_r},
                   {"impl_error", meta.impl_error_bound},
                   {"seq_len", meta.seq_len_bound},
                   {"param_count", meta.param_count_bound},
                   {"magnitude", meta.magnitude_bound},
                   {"pou_scale", meta.pou_scale_bound}};
    j["constants"] = {{"C_P", meta.constants.c_p},
                      {"C_M", meta.constants.c_m},
                      {"C_N", meta.constants.c_n},
                      {"C_log", meta.constants.c_log},
                      {"C_mag", meta.constants.c_mag},
                      {"C_B", meta.constants.c_b},
                      {"C_mag_tilde", meta.constants.c_mag_tilde},
                      {"C_manifold", meta.constants.c_manifold}};
    return j;
}

ConstructionMeta meta_from_json(const json& j) {
    ConstructionMeta m;
    m.epsilon = j.at("epsilon").get<double>();
    m.seq_len = j.at("P").get<std::size_t>();
    m.input_dim = j.at("input_dim").get<std::size_t>();
    m.pou_scale = j.at("M_g").get<double>();
    m.attn_scale = j.at("M").get<double>();
    m.gap = j.at("c").get<double>();
    m.eta_value = j.at("eta").get<double>();
    m.lambda_value = j.at("lambda").get<double>();
    m.leak = j.at("leak").get<double>();
    m.mode = j.at("mode").get<std::string>() == "calibrated" ? PouMode::calibrated
                                                             : PouMode::theoretical;
    const json& b = j.at("bounds");
    m.feature_bound_t = b.at("B_T").get<double>();
    m.feature_bound_r = b.at("B_R").get<double>();
    m.impl_error_bound = b.at("impl_error").get<double>();
    m.seq_len_bound = b.at("seq_len").get<double>();
    m.param_count_bound = b.at("param_count").get<double>();
    m.magnitude_bound = b.at("magnitude").get<double>();
    m.pou_scale_bound = b.at("pou_scale").get<double>();
    const json& k = j.at("constants");
    m.constants.c_p = k.at("C_P").get<double>();
    m.constants.c_m = k.at("C_M").get<double>();
    m.constants.c_n = k.at("C_N").get<double>();
    m.constants.c_log = k.at("C_log").get<double>();
    m.constants.c_mag = k.at("C_mag").get<double>();
    m.constants.c_b = k.at("C_B").get<double>();
    m.constants.c_mag_tilde = k.at("C_mag_tilde").get<double>();
    m.constants.c_manifold = k.at("C_manifold").get<double>();
    return m;
}

json domain_to_json(const Domain& domain) {
    json j;
    if (const auto* cube = std::get_if<CubeDomain>(&domain)) {
        j["type"] = "cube";
        j["dim"] = cube->dim;
        return j;
    }
    const auto& spec = std::get<ManifoldSpec>(domain);
    j["type"] = "manifold";
    j["kind"] = to_string(spec.kind);
    j["ambient_dim"] = spec.ambient_dim;
    j["intrinsic_dim"] = spec.intrinsic_dim;
    j["reach"] = spec.reach;
    j["volume"] = spec.volume;
    j["radius"] = spec.radius;
    j["center"] = spec.center;
    if (spec.kind == ManifoldKind::point_cloud) {
        j["cloud"] = spec.cloud;
        j["knn"] = spec.knn;
    }
    return j;
}

Domain domain_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "cube") return CubeDomain{j.at("dim").get<std::size_t>()};
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "circle")
        return ManifoldSpec::circle(j.at("radius").get<double>(),
                                    j.at("center").get<std::vector<double>>());
    if (kind == "sphere")
        return ManifoldSpec::sphere(j.at("radius").get<double>(),
                                    j.at("center").get<std::vector<double>>());
    if (kind == "flat_torus") return ManifoldSpec::flat_torus(j.at("radius").get<double>());
    if (kind == "point_cloud")
        return ManifoldSpec::point_cloud(j.at("cloud").get<std::vector<std::vector<double>>>(),
                                         j.at("intrinsic_dim").get<std::size_t>(),
                                         j.at("reach").get<double>(),
                                         j.value("knn", std::size_t(8)));
    throw std::invalid_argument("domain: unknown manifold kind '" + kind + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing file: " + path);
}

std::string format_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace softpou
