#include <qotkit/cli.hpp>

#include <qotkit/classical_ot.hpp>
#include <qotkit/io.hpp>
#include <qotkit/quadratic.hpp>
#include <qotkit/verify.hpp>
#include <qotkit/wasserstein1.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

namespace qot::cli {

namespace {

using io::json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t qubit_cap() {
  const char* env = std::getenv("QOTKIT_NMAX");
  if (!env || !*env) return w1::kDefaultMaxQubits;
  std::size_t v = 0;
  const char* end = env + std::char_traits<char>::length(env);
  auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end || v == 0) throw InputError("QOTKIT_NMAX must be a positive integer");
  return v;
}

/// A single power-of-two factor is read as a register of qubits.
FactorShape as_qubits(const FactorShape& s) {
  if (s.dims.size() != 1) return s;
  const std::size_t d = s.dims[0];
  if (d < 2 || (d & (d - 1)) != 0) return s;
  std::size_t n = 0;
  while ((std::size_t{1} << n) < d) ++n;
  return FactorShape::qubits(n);
}

DensityOperator load_state(const std::string& path, json& raw) {
  raw = io::read_json_file(path);
  auto rho = io::state_from_json(raw).density();
  return rho.with_shape(as_qubits(rho.shape()));
}

json decomposition_json(const std::vector<w1::SiteTerm>& terms) {
  json arr = json::array();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    arr.push_back({{"site", i},
                   {"weight", t.weight},
                   {"x", io::matrix_to_json(t.x)},
                   {"plus", io::matrix_to_json(t.plus)},
                   {"minus", io::matrix_to_json(t.minus)}});
  }
  return arr;
}

json solver_json(const conic::SolveSummary& s) {
  return {{"status", std::string(conic::status_name(s.status))},
          {"gap", s.gap},
          {"primalResidual", s.primalResidual},
          {"iterations", s.iterations}};
}

void dump_program(const std::string& path, const conic::ConicProgram& prog) {
  std::ostringstream os;
  conic::write_program_text(os, prog);
  io::write_text_file(path, os.str());
}

struct W1Args {
  std::string a, b, out, dump;
  bool dual = false;
};

int cmd_w1(const W1Args& args, std::ostream& out) {
  json ja, jb;
  const auto rho = load_state(args.a, ja);
  const auto sigma = load_state(args.b, jb);
  w1::W1Options opts;
  opts.maxQubits = qubit_cap();
  if (!args.dump.empty()) {
    w1::qubit_count(rho.shape(), opts.maxQubits);
    dump_program(args.dump, w1::w1_program(rho, sigma));
  }
  const auto primal = w1::w1(rho, sigma, opts);
  out << io::format_fixed(primal.value) << '\n';

  json report{{"command", "w1"},
              {"inputsDigest", io::digest(json{{"a", ja}, {"b", jb}})},
              {"value", primal.value},
              {"status", "ok"},
              {"decomposition", decomposition_json(primal.decomposition)},
              {"solver", json::array({solver_json(primal.solver)})}};
  if (args.dual) {
    const auto dual = w1::w1_dual(rho, sigma, opts);
    const double gap = std::abs(primal.value - dual.value);
    out << "dual " << io::format_fixed(dual.value) << '\n';
    out << "gap " << io::format_fixed(gap) << '\n';
    report["dual"] = dual.value;
    report["gap"] = gap;
    report["witness"] = io::observable_to_json(dual.witness);
    report["solver"].push_back(solver_json(dual.solver));
  }
  if (!args.out.empty()) io::write_json_file(args.out, report);
  return kOk;
}

struct DquadArgs {
  std::string a, b, cost, plan, out, dump;
};

int cmd_dquad(const DquadArgs& args, std::ostream& out) {
  json ja, jb;
  const auto sigma = load_state(args.a, ja);
  const auto rho = load_state(args.b, jb);
  const json jc = io::read_json_file(args.cost);
  const auto cost = quad::cost_operator(io::cost_from_json(jc), sigma.dim());
  if (rho.dim() != sigma.dim()) throw Error(Errc::DimensionMismatch, "states must have the same dimension");
  if (!args.dump.empty()) dump_program(args.dump, quad::dquad_program(sigma, rho, cost));
  const auto res = quad::dquad(sigma, rho, cost);
  out << io::format_fixed(res.valueSquared) << '\n';

  json report{{"command", "dquad"},
              {"value", res.valueSquared},
              {"status", "ok"},
              {"coupling", io::matrix_to_json(res.coupling.state.mat())},
              {"solver", json::array({solver_json(res.solver)})}};
  json inputs{{"a", ja}, {"b", jb}, {"cost", jc}};
  if (!args.plan.empty()) {
    const json jp = io::read_json_file(args.plan);
    const auto phi = io::channel_from_json(jp);
    const double pc = quad::plan_cost(phi, sigma, rho, cost);
    out << "plan " << io::format_fixed(pc) << '\n';
    report["planCost"] = pc;
    inputs["plan"] = jp;
  }
  report["inputsDigest"] = io::digest(inputs);
  if (!args.out.empty()) io::write_json_file(args.out, report);
  return kOk;
}

int cmd_lipschitz(const std::string& obsPath, const std::string& outPath, std::ostream& out) {
  const json jo = io::read_json_file(obsPath);
  auto a = io::state_from_json(jo).observable();
  a = a.with_shape(as_qubits(a.shape()));
  w1::W1Options opts;
  opts.maxQubits = qubit_cap();
  const auto res = w1::lipschitz(a, opts);
  out << io::format_fixed(res.value) << '\n';
  if (!outPath.empty()) {
    json sites = json::array();
    for (std::size_t i = 0; i < res.perSite.size(); ++i)
      sites.push_back({{"site", i}, {"t", res.perSite[i].t}, {"minimizer", io::matrix_to_json(res.perSite[i].minimizer)}});
    json solves = json::array();
    for (const auto& s : res.solver) solves.push_back(solver_json(s));
    io::write_json_file(outPath, {{"command", "lipschitz"},
                                  {"inputsDigest", io::digest(jo)},
                                  {"value", res.value},
                                  {"status", "ok"},
                                  {"perSite", sites},
                                  {"solver", solves}});
  }
  return kOk;
}

int cmd_classical_w1(const std::string& pPath, const std::string& qPath, const std::string& metric,
                     const std::string& outPath, std::ostream& out) {
  const json jp = io::read_json_file(pPath);
  const json jq = io::read_json_file(qPath);
  const auto p = io::distribution_from_json(jp);
  const auto q = io::distribution_from_json(jq);
  json inputs{{"p", jp}, {"q", jq}};
  ot::TransportResult res;
  if (metric == "hamming") {
    res = ot::hamming_w1_full(p, q);
    inputs["metric"] = "hamming";
  } else {
    const json jm = io::read_json_file(metric);
    const auto d = io::real_matrix_from_json(jm);
    ot::check_metric(d);
    res = ot::kantorovich(p, q, d);
    inputs["metric"] = jm;
  }
  out << io::format_fixed(res.value) << '\n';
  if (!outPath.empty()) {
    json plan = json::array();
    for (std::size_t i = 0; i < res.plan.rows(); ++i) {
      json row = json::array();
      for (std::size_t k = 0; k < res.plan.cols(); ++k) row.push_back(res.plan(i, k));
      plan.push_back(std::move(row));
    }
    io::write_json_file(outPath, {{"command", "classical-w1"},
                                  {"inputsDigest", io::digest(inputs)},
                                  {"value", res.value},
                                  {"status", "ok"},
                                  {"plan", plan},
                                  {"solver", json::array({solver_json(res.solver)})}});
  }
  return kOk;
}

int cmd_purify(const std::string& statePath, const std::string& outPath, std::ostream& out) {
  const auto sigma = io::state_from_json(io::read_json_file(statePath)).density();
  const auto psi = purify(sigma);
  io::write_json_file(outPath, io::pure_to_json(psi));
  out << "wrote " << outPath << '\n';
  return kOk;
}

struct VerifyArgs {
  std::string suite, report, csv;
  std::size_t n = 2, trials = 100, costTerms = 2;
  std::uint64_t seed = 1;
  std::optional<std::size_t> dim;
  std::optional<double> tol;
};

int cmd_verify(const VerifyArgs& args, std::ostream& out) {
  const auto& names = verify::suite_names();
  std::vector<std::string> run;
  if (args.suite == "all")
    run = names;
  else if (std::find(names.begin(), names.end(), args.suite) != names.end())
    run = {args.suite};
  else
    throw InputError("unknown suite '" + args.suite + "'");
  if (args.tol && !(*args.tol > 0.0)) throw InputError("--tol must be positive");

  verify::SuiteParams p;
  p.n = args.n;
  p.trials = args.trials;
  p.seed = args.seed;
  p.costTerms = args.costTerms;
  p.tol = args.tol;
  p.w1.maxQubits = qubit_cap();
  if (p.n == 0) throw InputError("--n must be positive");
  if (p.n > p.w1.maxQubits) throw InputError("--n exceeds the qubit cap");
  p.dim = args.dim ? *args.dim : std::min<std::size_t>(std::size_t{1} << std::min<std::size_t>(p.n, 2), 4);
  if (p.dim < 2) throw InputError("--dim must be at least 2");
  if (p.costTerms == 0) throw InputError("--d must be positive");

  std::size_t violations = 0;
  json reports = json::array();
  std::string csv;
  for (const auto& name : run) {
    const auto rep = verify::run_suite(name, p);
    violations += rep.violations.size();
    out << name << " trials=" << rep.trials << " violations=" << rep.violations.size()
        << " worst_margin=" << io::format_fixed(rep.worstMargin) << '\n';
    reports.push_back(io::report_to_json(rep));
    if (!args.csv.empty()) {
      std::string part = io::report_csv(rep);
      if (!csv.empty()) part.erase(0, part.find('\n') + 1);
      csv += part;
    }
  }
  if (!args.report.empty()) {
    json doc = reports.size() == 1 ? reports[0]
                                   : json{{"command", "verify"},
                                          {"suite", "all"},
                                          {"seed", p.seed},
                                          {"trials", p.trials},
                                          {"value", violations},
                                          {"status", violations == 0 ? "pass" : "violations"},
                                          {"inputsDigest", io::digest(reports)},
                                          {"suites", reports}};
    io::write_json_file(args.report, doc);
  }
  if (!args.csv.empty()) io::write_text_file(args.csv, csv);
  return violations == 0 ? kOk : kViolations;
}

int code_for(Errc c) {
  return (c == Errc::SolverFailure || c == Errc::ConvergenceFailure) ? kSolverError : kInputError;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum optimal transport toolkit", "qotkit"};
  app.require_subcommand(1);

  W1Args w1a;
  auto* w1c = app.add_subcommand("w1", "quantum W1 distance between two states");
  w1c->add_option("--a", w1a.a, "first state file")->required();
  w1c->add_option("--b", w1a.b, "second state file")->required();
  w1c->add_flag("--dual", w1a.dual, "also solve the dual and report the gap");
  w1c->add_option("--out", w1a.out, "report file");
  w1c->add_option("--dump-program", w1a.dump, "write the SDP in text form");

  DquadArgs dq;
  auto* dqc = app.add_subcommand("dquad", "squared quadratic-cost distance D^2(a, b)");
  dqc->add_option("--a", dq.a, "sigma state file")->required();
  dqc->add_option("--b", dq.b, "rho state file")->required();
  dqc->add_option("--cost", dq.cost, "cost observables file")->required();
  dqc->add_option("--plan", dq.plan, "channel file evaluated as a transport plan");
  dqc->add_option("--out", dq.out, "report file");
  dqc->add_option("--dump-program", dq.dump, "write the SDP in text form");

  std::string obs, lipOut;
  auto* lc = app.add_subcommand("lipschitz", "quantum Lipschitz constant of an observable");
  lc->add_option("--obs", obs, "observable file")->required();
  lc->add_option("--out", lipOut, "report file");

  std::string pFile, qFile, metric, cwOut;
  auto* cc = app.add_subcommand("classical-w1", "classical W1 between two distributions");
  cc->add_option("--p", pFile, "first distribution")->required();
  cc->add_option("--q", qFile, "second distribution")->required();
  cc->add_option("--metric", metric, "'hamming' or a metric matrix file")->required();
  cc->add_option("--out", cwOut, "report file");

  std::string stateFile, pureOut;
  auto* pc = app.add_subcommand("purify", "canonical purification of a state");
  pc->add_option("--state", stateFile, "state file")->required();
  pc->add_option("--out", pureOut, "output pure state file")->required();

  VerifyArgs va;
  double tol = 0.0;
  std::size_t dim = 0;
  auto* vc = app.add_subcommand("verify", "run randomized inequality suites");
  vc->add_option("--suite", va.suite, "suite name or 'all'")->required();
  vc->add_option("--n", va.n, "number of qubits");
  vc->add_option("--trials", va.trials, "number of trials");
  vc->add_option("--seed", va.seed, "base seed");
  vc->add_option("--report", va.report, "JSON report file");
  vc->add_option("--csv", va.csv, "CSV file with one row per evaluated check");
  auto* tolOpt = vc->add_option("--tol", tol, "tighter tolerance for every check");
  auto* dimOpt = vc->add_option("--dim", dim, "system dimension for the quadratic suite");
  vc->add_option("--d", va.costTerms, "number of cost observables for the quadratic suite");

  std::vector<std::string> argvStore{"qotkit"};
  argvStore.insert(argvStore.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argvStore) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (w1c->parsed()) return cmd_w1(w1a, out);
    if (dqc->parsed()) return cmd_dquad(dq, out);
    if (lc->parsed()) return cmd_lipschitz(obs, lipOut, out);
    if (cc->parsed()) return cmd_classical_w1(pFile, qFile, metric, cwOut, out);
    if (pc->parsed()) return cmd_purify(stateFile, pureOut, out);
    if (vc->parsed()) {
      if (tolOpt->count() > 0) va.tol = tol;
      if (dimOpt->count() > 0) va.dim = dim;
      return cmd_verify(va, out);
    }
    err << "error: no command\n";
    return kInputError;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return code_for(e.code());
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolverError;
  }
}

}  // namespace qot::cli
