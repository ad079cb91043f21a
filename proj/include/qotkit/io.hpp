#pragma once

// JSON file formats. Complex numbers are [re, im] pairs; matrices are arrays
// of rows.
//
//   state:   {"kind": "density"|"observable"|"pure", "dims": [...], "data": ...}
//   channel: {"kind": "channel", "dimIn": d, "dimOut": d', "kraus": [matrix, ...]}
//   cost:    [observable state object or bare matrix, ...]

#include <qotkit/classical_ot.hpp>
#include <qotkit/quantum.hpp>
#include <qotkit/verify.hpp>
#include <qotkit/wasserstein1.hpp>

#include <json.hpp>

#include <string>

namespace qot::io {

using nlohmann::json;

json complex_to_json(cplx z);
cplx complex_from_json(const json& j);
json matrix_to_json(const ComplexMatrix& m);
/// Accepts an array of rows, or a flat row-major array of d*d entries.
ComplexMatrix matrix_from_json(const json& j);
json vector_to_json(std::span<const cplx> v);
ComplexVector vector_from_json(const json& j);

struct StateFile {
  std::string kind;  // density, observable, pure
  FactorShape shape;
  ComplexMatrix mat;   // density / observable
  ComplexVector vec;   // pure

  DensityOperator density() const;
  Observable observable() const;
};

StateFile state_from_json(const json& j);
json state_to_json(const StateFile& s);
json density_to_json(const DensityOperator& rho);
json observable_to_json(const Observable& a);
json pure_to_json(const PureState& psi);

KrausChannel channel_from_json(const json& j);
json channel_to_json(const KrausChannel& phi);

std::vector<Observable> cost_from_json(const json& j);
ot::Distribution distribution_from_json(const json& j);
RealMatrix real_matrix_from_json(const json& j);

json report_to_json(const verify::SuiteReport& r);
std::string report_csv(const verify::SuiteReport& r);

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string digest(const json& j);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
void write_text_file(const std::string& path, const std::string& text);

/// Fixed-point text with `decimals` digits after the point, locale independent.
std::string format_fixed(double v, int decimals = 9);

}  // namespace qot::io
