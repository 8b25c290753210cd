#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "raggio/cli.hpp"
#include "raggio/io.hpp"

using namespace raggio;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(RAGGIO_SOURCE_DIR) + "/data/" + name; }

std::string write_temp(const std::string& name, const std::string& text) {
  const std::string path = "cli_test_" + name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("born from an inline vector") {
  const Outcome o = run({"born", "--psi", "[[0.7071,0],[0.7071,0]]"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out == "probabilities: 0.5 0.5\n");
  const Outcome j = run({"--format", "json", "born", "--psi", "[[0.7071,0],[0.7071,0]]"});
  const auto p = io::parse_json(j.out)["probabilities"].get<std::vector<double>>();
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("schmidt and born from files") {
  Outcome o = run({"schmidt", "--vector", data("singlet_vector.json")});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.find("0.7071068 0.7071068") != std::string::npos);
  CHECK(o.out.find("entangled: yes") != std::string::npos);
  o = run({"schmidt", "--psi", "[[1,0],[0,0],[0,0],[0,0]]", "--algebra", "M2xM2"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.find("entangled: no") != std::string::npos);
  o = run({"born", "--state", data("werner_0.5.json")});
  CHECK(o.out == "probabilities: 0.125 0.375 0.375 0.125\n");
}

TEST_CASE("chsh on the singlet file") {
  const Outcome o = run({"chsh", "--state", data("singlet.json"), "--restarts", "16", "--seed", "7"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.find("chsh value: 2.828427\n") != std::string::npos);
  const Outcome j = run({"--format", "json", "chsh", "--state", data("singlet.json"), "--seed", "7"});
  CHECK(io::parse_json(j.out)["value"].get<double>() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("separability verdicts") {
  Outcome o = run({"separability", "--state", data("werner_0.5.json"), "--seed", "1"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.find("verdict: EntangledPPT") != std::string::npos);
  CHECK(o.out.find("-0.125") != std::string::npos);
  o = run({"separability", "--state", data("m2_d2_classical.json"), "--seed", "1"});
  CHECK(o.out.find("verdict: Separable") != std::string::npos);
}

TEST_CASE("raggio-check") {
  Outcome o = run({"raggio-check", "--a", "M2", "--b", "D2", "--samples", "100", "--seed", "1"});
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out.find("verdict: ConsistentWithTheorem") != std::string::npos);
  o = run({"--format", "json", "raggio-check", "--a", "M2", "--b", "M2", "--samples", "10", "--seed", "1"});
  CHECK(o.code == cli::kExitOk);
  const auto j = io::parse_json(o.out);
  CHECK(j["schema"] == 1);
  CHECK(j["entangled_found"] == true);
  o = run({"raggio-check", "--a", "M8", "--b", "M9", "--samples", "1", "--seed", "1"});
  CHECK(o.code == cli::kExitDomainError);
  CHECK(o.err.find("resource-limit") != std::string::npos);
}

TEST_CASE("verdict exit codes") {
  CHECK(cli::exit_code(TheoremVerdict::ConsistentWithTheorem) == 0);
  CHECK(cli::exit_code(TheoremVerdict::InconsistentWithTheorem) == 3);
}

TEST_CASE("identical arguments give identical output") {
  const std::vector<std::vector<std::string>> cases{
      {"--format", "json", "raggio-check", "--a", "M3", "--b", "M2", "--samples", "12", "--seed", "5"},
      {"chsh", "--state", data("werner_0.5.json"), "--restarts", "5", "--seed", "3"},
      {"--format", "json", "separability", "--state", data("werner_0.5.json"), "--seed", "3"},
  };
  for (const auto& args : cases) {
    const Outcome a = run(args);
    const Outcome b = run(args);
    CHECK(a.code == cli::kExitOk);
    CHECK(a.out == b.out);
  }
  std::vector<std::string> threaded = cases[0];
  threaded.insert(threaded.begin(), {"--threads", "3"});
  CHECK(run(threaded).out == run(cases[0]).out);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"chsh", "--state", data("singlet.json")}).code == cli::kExitUsage);  // missing --seed
  CHECK(run({"born"}).code == cli::kExitUsage);
  CHECK(run({"born", "--psi", "[[1,0]]", "--state", data("singlet.json")}).code == cli::kExitUsage);
  CHECK(run({"raggio-check", "--a", "M2", "--b", "D2", "--samples", "0", "--seed", "1"}).code == cli::kExitUsage);
  CHECK(run({"--format", "yaml", "born", "--psi", "[[1,0]]"}).code == cli::kExitUsage);
  CHECK(run({"separability", "--state", "/nonexistent.json", "--seed", "1"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("domain errors exit with 1 and name the problem") {
  Outcome o = run({"born", "--psi", "[[0,0],[0,0]]"});
  CHECK(o.code == cli::kExitDomainError);
  CHECK(o.err.find("invalid-state") != std::string::npos);

  o = run({"born", "--psi", "[[1,0"});
  CHECK(o.code == cli::kExitDomainError);
  CHECK(o.err.find("malformed JSON") != std::string::npos);

  const std::string bad = write_temp("nonpositive.json", R"({"algebra": "M2xM2", "entries": [
    [0.6,0],[0,0],[0,0],[0.5,0], [0,0],[0.2,0],[0,0],[0,0], [0,0],[0,0],[0.2,0],[0,0], [0.5,0],[0,0],[0,0],[0,0]]})");
  o = run({"chsh", "--state", bad, "--seed", "1"});
  CHECK(o.code == cli::kExitDomainError);
  CHECK(o.err.find("not positive") != std::string::npos);

  const std::string flat = write_temp("flat.json", R"({"algebra": "M4", "entries": [
    [0.25,0],[0,0],[0,0],[0,0], [0,0],[0.25,0],[0,0],[0,0], [0,0],[0,0],[0.25,0],[0,0], [0,0],[0,0],[0,0],[0.25,0]]})");
  o = run({"separability", "--state", flat, "--seed", "1"});
  CHECK(o.code == cli::kExitDomainError);
  CHECK(o.err.find("missing-factorization") != std::string::npos);

  o = run({"raggio-check", "--a", "M2", "--b", "Q2", "--seed", "1"});
  CHECK(o.code == cli::kExitDomainError);
  CHECK(o.err.find("parse") != std::string::npos);
}

TEST_CASE("thread count from the environment") {
  ::setenv("RAGGIO_KIT_THREADS", "2", 1);
  const Outcome o = run({"chsh", "--state", data("singlet.json"), "--seed", "7"});
  ::unsetenv("RAGGIO_KIT_THREADS");
  CHECK(o.code == cli::kExitOk);
  CHECK(o.out == run({"chsh", "--state", data("singlet.json"), "--seed", "7"}).out);
}

}  // TEST_SUITE
