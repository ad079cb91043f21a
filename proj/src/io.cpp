#include <qotkit/io.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qot::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidArgument, what); }

double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  return j.get<double>();
}

std::size_t positive_int(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) bad(std::string(what) + " must be a positive integer");
  return j.get<std::size_t>();
}

FactorShape shape_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("dims must be a non-empty array");
  FactorShape s;
  for (const auto& d : j) s.dims.push_back(positive_int(d, "dims entry"));
  return s;
}

json shape_to_json(const FactorShape& s) { return json(s.dims); }

}  // namespace

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) bad("complex entries must be [re, im] pairs");
  return {number(j[0], "real part"), number(j[1], "imaginary part")};
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("matrix must be a non-empty array");
  const bool nested = j[0].is_array() && !j[0].empty() && (j[0][0].is_array() || j.size() == j[0].size()) &&
                      !(j[0].size() == 2 && j[0][0].is_number() && j.size() != 2);
  if (nested) {
    const std::size_t r = j.size(), c = j[0].size();
    ComplexMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (!j[i].is_array() || j[i].size() != c) bad("matrix rows have different lengths");
      for (std::size_t k = 0; k < c; ++k) m(i, k) = complex_from_json(j[i][k]);
    }
    return m;
  }
  const std::size_t n = j.size();
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) bad("flat matrix data must have a square number of entries");
  ComplexMatrix m(d, d);
  for (std::size_t k = 0; k < n; ++k) m.data()[k] = complex_from_json(j[k]);
  return m;
}

json vector_to_json(std::span<const cplx> v) {
  json a = json::array();
  for (auto z : v) a.push_back(complex_to_json(z));
  return a;
}

ComplexVector vector_from_json(const json& j) {
  if (!j.is_array() || j.empty()) bad("vector must be a non-empty array");
  ComplexVector v;
  for (const auto& z : j) v.push_back(complex_from_json(z));
  return v;
}

DensityOperator StateFile::density() const {
  if (kind == "density") return DensityOperator(mat, shape);
  if (kind == "pure") {
    double norm = 0.0;
    for (auto z : vec) norm += std::norm(z);
    if (std::abs(norm - 1.0) > 1e-9) throw Error(Errc::NotAState, "pure state vector is not normalized");
    return DensityOperator(outer(vec, vec), shape);
  }
  throw Error(Errc::NotAState, "file holds an observable, expected a state");
}

Observable StateFile::observable() const {
  if (kind == "observable" || kind == "density") return Observable(mat, shape);
  if (kind == "pure") return Observable(outer(vec, vec), shape);
  bad("unknown state kind");
}

StateFile state_from_json(const json& j) {
  if (!j.is_object()) bad("state file must be a JSON object");
  StateFile s;
  if (!j.contains("kind") || !j["kind"].is_string()) bad("state file needs a string 'kind'");
  s.kind = j["kind"].get<std::string>();
  if (s.kind != "density" && s.kind != "observable" && s.kind != "pure") bad("unknown state kind '" + s.kind + "'");
  if (!j.contains("data")) bad("state file needs 'data'");
  if (s.kind == "pure") {
    s.vec = vector_from_json(j["data"]);
    s.shape = j.contains("dims") ? shape_from_json(j["dims"]) : FactorShape::single(s.vec.size());
    if (s.shape.total() != s.vec.size()) throw Error(Errc::ShapeMismatch, "dims do not match the vector length");
  } else {
    s.mat = matrix_from_json(j["data"]);
    if (!s.mat.is_square()) throw Error(Errc::ShapeMismatch, "operator data must be square");
    s.shape = j.contains("dims") ? shape_from_json(j["dims"]) : FactorShape::single(s.mat.rows());
    if (s.shape.total() != s.mat.rows()) throw Error(Errc::ShapeMismatch, "dims do not match the matrix dimension");
  }
  return s;
}

json state_to_json(const StateFile& s) {
  json j;
  j["kind"] = s.kind;
  j["dims"] = shape_to_json(s.shape);
  j["data"] = s.kind == "pure" ? vector_to_json(s.vec) : matrix_to_json(s.mat);
  return j;
}

json density_to_json(const DensityOperator& rho) { return state_to_json({"density", rho.shape(), rho.mat(), {}}); }
json observable_to_json(const Observable& a) { return state_to_json({"observable", a.shape(), a.mat(), {}}); }
json pure_to_json(const PureState& psi) { return state_to_json({"pure", psi.shape, {}, psi.vec}); }

KrausChannel channel_from_json(const json& j) {
  if (!j.is_object()) bad("channel file must be a JSON object");
  if (j.value("kind", std::string()) != "channel") bad("channel file needs kind 'channel'");
  if (!j.contains("dimIn") || !j.contains("dimOut") || !j.contains("kraus")) bad("channel file needs dimIn, dimOut, kraus");
  const std::size_t din = positive_int(j["dimIn"], "dimIn");
  const std::size_t dout = positive_int(j["dimOut"], "dimOut");
  if (!j["kraus"].is_array()) bad("kraus must be an array of matrices");
  std::vector<ComplexMatrix> ks;
  for (const auto& k : j["kraus"]) {
    if (!k.is_array() || k.empty() || !k[0].is_array()) bad("Kraus operators must be arrays of rows");
    const std::size_t r = k.size(), c = k[0].size();
    ComplexMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (!k[i].is_array() || k[i].size() != c) bad("Kraus rows have different lengths");
      for (std::size_t q = 0; q < c; ++q) m(i, q) = complex_from_json(k[i][q]);
    }
    ks.push_back(std::move(m));
  }
  return KrausChannel(din, dout, std::move(ks));
}

json channel_to_json(const KrausChannel& phi) {
  json j;
  j["kind"] = "channel";
  j["dimIn"] = phi.dim_in();
  j["dimOut"] = phi.dim_out();
  j["kraus"] = json::array();
  for (const auto& k : phi.kraus()) j["kraus"].push_back(matrix_to_json(k));
  return j;
}

std::vector<Observable> cost_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object()) {
    if (!j.contains("observables")) bad("cost file object needs 'observables'");
    list = &j["observables"];
  }
  if (!list->is_array()) bad("cost file must be a list of observables");
  std::vector<Observable> out;
  for (const auto& o : *list) {
    if (o.is_object())
      out.push_back(state_from_json(o).observable());
    else
      out.push_back(Observable(matrix_from_json(o)));
  }
  return out;
}

ot::Distribution distribution_from_json(const json& j) {
  const json* arr = &j;
  if (j.is_object()) {
    if (!j.contains("probs")) bad("distribution object needs 'probs'");
    arr = &j["probs"];
  }
  if (!arr->is_array()) bad("distribution must be an array of reals");
  std::vector<double> p;
  for (const auto& x : *arr) p.push_back(number(x, "probability"));
  return ot::Distribution(std::move(p));
}

RealMatrix real_matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) bad("metric must be an array of rows");
  const std::size_t r = j.size(), c = j[0].size();
  RealMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (!j[i].is_array() || j[i].size() != c) bad("metric rows have different lengths");
    for (std::size_t k = 0; k < c; ++k) m(i, k) = number(j[i][k], "metric entry");
  }
  return m;
}

json report_to_json(const verify::SuiteReport& r) {
  json j;
  j["command"] = "verify";
  j["suite"] = r.suite;
  j["seed"] = r.seed;
  j["trials"] = r.trials;
  j["status"] = r.passed() ? "pass" : "violations";
  j["value"] = r.violations.size();
  j["worstMargin"] = std::isfinite(r.worstMargin) ? json(r.worstMargin) : json(nullptr);
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = params;
  json stats = json::object();
  for (const auto& [k, v] : r.stats) stats[k] = v;
  j["stats"] = stats;
  json vs = json::array();
  for (const auto& v : r.violations)
    vs.push_back({{"trial", v.trial}, {"seed", v.seed}, {"check", v.check}, {"margin", v.margin},
                  {"inputsDigest", v.inputsDigest}});
  j["violations"] = vs;
  j["inputsDigest"] = digest(params);
  return j;
}

std::string report_csv(const verify::SuiteReport& r) {
  std::ostringstream os;
  os << "trial,seed,check,lhs,rhs,margin\n";
  char buf[64];
  auto num = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  for (const auto& row : r.rows)
    os << row.trial << ',' << row.seed << ',' << row.check << ',' << num(row.lhs) << ',' << num(row.rhs) << ','
       << num(row.margin) << '\n';
  return os.str();
}

std::string digest(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad("cannot write '" + path + "'");
  out << text;
  if (!out) bad("failed writing '" + path + "'");
}

void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::abs(v) < 0.5 * std::pow(10.0, -decimals)) v = 0.0;
  char buf[128];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, decimals);
  return std::string(buf, res.ptr);
}

}  // namespace qot::io
