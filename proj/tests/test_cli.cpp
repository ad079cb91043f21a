#include <doctest.h>

#include <qotkit/cli.hpp>
#include <qotkit/io.hpp>
#include <qotkit/quadratic.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

using namespace qot;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream o, e;
  Run r;
  r.code = cli::run_cli(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("qotkit_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string file(const std::string& name, const std::string& text) const {
    const auto p = (path_ / name).string();
    std::ofstream(p) << text;
    return p;
  }
  std::string file(const std::string& name, const io::json& j) const { return file(name, j.dump()); }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("w1 between basis strings 000 and 011") {
  TempDir dir;
  const auto a = dir.file("a.json", io::density_to_json(DensityOperator::basis_state(3, 0)));
  const auto b = dir.file("b.json", io::density_to_json(DensityOperator::basis_state(3, 3)));
  const auto r = run({"w1", "--a", a, "--b", b, "--dual", "--out", dir.path("r.json")});
  CHECK(r.code == cli::kOk);
  CHECK(std::abs(std::stod(first_line(r.out)) - 2.0) <= 1e-6);
  CHECK(r.out.find("dual ") != std::string::npos);
  const auto rep = io::read_json_file(dir.path("r.json"));
  CHECK(rep.contains("solver"));
}

TEST_CASE("identical states are at distance zero") {
  TempDir dir;
  const auto a = dir.file("a.json", io::density_to_json(random_state(4, 4, 7).with_shape(FactorShape::qubits(2))));
  const auto r = run({"w1", "--a", a, "--b", a});
  CHECK(r.code == cli::kOk);
  CHECK(std::abs(std::stod(r.out)) <= 1e-6);
}

TEST_CASE("diagonal states agree with the classical distance") {
  TempDir dir;
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4}, q{0.4, 0.4, 0.1, 0.1};
  const auto a = dir.file("a.json", io::density_to_json(DensityOperator(ComplexMatrix::diagonal(p), FactorShape::qubits(2))));
  const auto b = dir.file("b.json", io::density_to_json(DensityOperator(ComplexMatrix::diagonal(q), FactorShape::qubits(2))));
  const auto qr = run({"w1", "--a", a, "--b", b});
  const auto pf = dir.file("p.json", io::json(p)), qf = dir.file("q.json", io::json(q));
  const auto cr = run({"classical-w1", "--p", pf, "--q", qf, "--metric", "hamming"});
  REQUIRE(qr.code == 0);
  REQUIRE(cr.code == 0);
  CHECK(std::abs(std::stod(qr.out) - std::stod(cr.out)) <= 1e-6);
}

TEST_CASE("classical-w1 of uniform against a point mass") {
  TempDir dir;
  const auto u = dir.file("u.json", io::json(std::vector<double>(8, 0.125)));
  const auto d = dir.file("d.json", io::json(std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0}));
  const auto r = run({"classical-w1", "--p", u, "--q", d, "--metric", "hamming"});
  CHECK(r.code == 0);
  CHECK(first_line(r.out) == "1.500000000");
}

TEST_CASE("Lipschitz constant of the identity is zero") {
  TempDir dir;
  const auto f = dir.file("o.json", io::observable_to_json(Observable(ComplexMatrix::identity(4), FactorShape::qubits(2))));
  const auto r = run({"lipschitz", "--obs", f});
  CHECK(r.code == 0);
  CHECK(std::abs(std::stod(r.out)) <= 1e-6);
}

TEST_CASE("purify writes the Bell vector") {
  TempDir dir;
  const auto s = dir.file("s.json", io::density_to_json(DensityOperator::maximally_mixed(2)));
  const auto r = run({"purify", "--state", s, "--out", dir.path("p.json")});
  REQUIRE(r.code == 0);
  const auto st = io::state_from_json(io::read_json_file(dir.path("p.json")));
  CHECK(st.kind == "pure");
  REQUIRE(st.vec.size() == 4);
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(std::abs(st.vec[0]) - h) <= 1e-9);
  CHECK(std::abs(st.vec[1]) <= 1e-9);
  CHECK(std::abs(st.vec[2]) <= 1e-9);
  CHECK(std::abs(st.vec[3] - st.vec[0]) <= 1e-9);
}

TEST_CASE("state files round trip exactly") {
  const auto rho = random_state(4, 3, 21).with_shape(FactorShape::qubits(2));
  const auto j = io::density_to_json(rho);
  const auto back = io::state_from_json(io::json::parse(j.dump())).density();
  CHECK(back.mat() == rho.mat());
  CHECK(back.shape().dims == rho.shape().dims);
  CHECK(io::digest(j) == io::digest(io::density_to_json(back)));
}

TEST_CASE("dquad with the identity plan reports the self cost") {
  TempDir dir;
  Rng rng(4);
  const auto sigma = random_state(2, 2, rng);
  const Observable z(pauli('Z')), x(pauli('X'));
  const auto a = dir.file("a.json", io::density_to_json(sigma));
  const auto c = dir.file("c.json", io::json::array({io::observable_to_json(z), io::observable_to_json(x)}));
  const auto p = dir.file("p.json", io::channel_to_json(KrausChannel::identity(2)));
  const auto r = run({"dquad", "--a", a, "--b", a, "--cost", c, "--plan", p});
  REQUIRE(r.code == 0);
  const double self = quad::self_cost_identity(sigma, quad::cost_operator({z, x}, 2));
  const auto planLine = r.out.substr(r.out.find("plan ") + 5);
  CHECK(std::abs(std::stod(planLine) - self) <= 1e-8);
  CHECK(std::abs(std::stod(first_line(r.out)) - self) <= 1e-6);
}

TEST_CASE("verify writes a parseable report") {
  TempDir dir;
  const auto r = run({"verify", "--suite", "marton", "--n", "2", "--trials", "50", "--seed", "7", "--report",
                      dir.path("rep.json"), "--csv", dir.path("rows.csv")});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("marton trials=50 violations=0") != std::string::npos);
  const auto rep = io::read_json_file(dir.path("rep.json"));
  CHECK(rep["suite"] == "marton");
  CHECK(rep["trials"] == 50);
  CHECK(rep["violations"].empty());
  std::ifstream csv(dir.path("rows.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "trial,seed,check,lhs,rhs,margin");
}

TEST_CASE("input errors exit with code 2") {
  TempDir dir;
  const auto a = dir.file("a.json", io::density_to_json(DensityOperator::basis_state(3, 0)));
  const auto bad = dir.file("bad.json", std::string("{ not json"));
  CHECK(run({"w1", "--a", dir.path("missing.json"), "--b", a}).code == cli::kInputError);
  CHECK(run({"w1", "--a", bad, "--b", a}).code == cli::kInputError);
  CHECK(run({"verify", "--suite", "nope"}).code == cli::kInputError);
  CHECK(run({"verify", "--suite", "marton", "--tol", "-1"}).code == cli::kInputError);
  CHECK(run({}).code == cli::kInputError);
  CHECK(run({"--help"}).code == cli::kOk);

  ::setenv("QOTKIT_NMAX", "abc", 1);
  CHECK(run({"w1", "--a", a, "--b", a}).code == cli::kInputError);
  ::setenv("QOTKIT_NMAX", "2", 1);
  CHECK(run({"w1", "--a", a, "--b", a}).code == cli::kInputError);
  ::unsetenv("QOTKIT_NMAX");
  CHECK(run({"w1", "--a", a, "--b", a}).code == cli::kOk);
}

TEST_CASE("the installed binary runs") {
  const std::string cmd = std::string("\"") + QOTKIT_CLI_PATH + "\" --help > /dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
}
