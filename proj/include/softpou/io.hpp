#ifndef SOFTPOU_IO_HPP
#define SOFTPOU_IO_HPP

#include <string>

#include <json.hpp>

#include "softpou/construction.hpp"
#include "softpou/domain.hpp"
#include "softpou/pou.hpp"
#include "softpou/transformer.hpp"

namespace softpou {

using json = nlohmann::json;

// Covering: {kind, radius, count, centers: [[...]]}
json covering_to_json(const Covering& covering);
Covering covering_from_json(const json& j);

// Approximator: {covering, values, M_g}
json pou_to_json(const PouApproximator& approx);
PouApproximator pou_from_json(const json& j);

// Params: {dims: {d, D, P, L}, embedding, positional, blocks, readout};
// tensors as nested row-major arrays of doubles. Loading re-validates every
// shape invariant. Round-trips are bit-exact for finite doubles.
json params_to_json(const TransformerParams& params);
TransformerParams params_from_json(const json& j);

// Meta: {epsilon, P, M_g, M, c, eta, lambda, bounds, constants, ...}.
json meta_to_json(const ConstructionMeta& meta);
ConstructionMeta meta_from_json(const json& j);

json domain_to_json(const Domain& domain);
Domain domain_from_json(const json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Formats a double with round-trip precision; CSV cells use this.
std::string format_double(double v);

} // namespace softpou

#endif
