#include "raggio/cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "raggio/io.hpp"

namespace raggio::cli {

namespace {

using io::Json;

enum class Format { Text, Json };

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(7) << x;
  return os.str();
}

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? " " : "") + num(xs[i]);
  return s;
}

int default_threads() {
  if (const char* env = std::getenv("RAGGIO_KIT_THREADS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void emit(std::ostream& out, Format format, const Json& json, const std::string& text) {
  if (format == Format::Json) {
    out << json.dump(2) << '\n';
  } else {
    out << text;
  }
}

PureVector read_vector(const std::string& inline_psi, const std::string& path,
                       const std::string& algebra) {
  Json j = !inline_psi.empty() ? io::parse_json(inline_psi) : io::read_json_file(path);
  if (!algebra.empty()) {
    if (j.is_array()) j = Json{{"psi", j}};
    j["algebra"] = algebra;
  }
  // Hand-typed vectors carry few digits, so they are normalized rather than rejected.
  return io::pure_vector_from_json(j, true);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-dimensional operator algebras, states, entanglement and CHSH tools", "raggio-kit"};
  app.require_subcommand(1, 1);

  std::string format_name = "text";
  app.add_option("--format", format_name, "Report format: text or json")
      ->transform(CLI::IsMember({"text", "json"}, CLI::ignore_case))
      ->capture_default_str();
  int threads = default_threads();
  app.add_option("--threads", threads, "Worker threads (default: RAGGIO_KIT_THREADS or 1)")
      ->check(CLI::PositiveNumber);

  std::string psi, vector_path, state_path, algebra;
  std::uint64_t seed = 0;
  int budget = SeparabilityOptions{}.budget;
  int restarts = ChshOptions{}.restarts;

  auto* born = app.add_subcommand("born", "Born probabilities of a vector state on the diagonal subalgebra");
  auto* born_input = born->add_option_group("input");
  born_input->add_option("--psi", psi, "Inline vector [[re,im],...]");
  born_input->add_option("--vector", vector_path, "Vector file {\"psi\": [...]}")->check(CLI::ExistingFile);
  born_input->add_option("--state", state_path, "State file (diagonal of the density matrix)")
      ->check(CLI::ExistingFile);
  born_input->require_option(1, 1);

  auto* sch = app.add_subcommand("schmidt", "Schmidt coefficients of a bipartite vector state");
  auto* sch_input = sch->add_option_group("input");
  sch_input->add_option("--psi", psi, "Inline vector [[re,im],...]");
  sch_input->add_option("--vector", vector_path, "Vector file")->check(CLI::ExistingFile);
  sch_input->require_option(1, 1);
  sch->add_option("--algebra", algebra, "Bipartite algebra, e.g. M2xM2 (overrides the file)");

  auto* sep = app.add_subcommand("separability", "Decide decomposability of a bipartite state");
  sep->add_option("--state", state_path, "State file")->required()->check(CLI::ExistingFile);
  sep->add_option("--budget", budget, "Product-state search iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sep->add_option("--seed", seed, "Seed for the product-state search")->required();

  auto* chsh = app.add_subcommand("chsh", "Maximize the CHSH functional by see-saw");
  chsh->add_option("--state", state_path, "State file")->required()->check(CLI::ExistingFile);
  chsh->add_option("--restarts", restarts, "Random restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  chsh->add_option("--seed", seed, "Seed for the restarts")->required();

  std::string alg_a, alg_b;
  int samples = 100;
  int dim_cap = 64;
  auto* rc = app.add_subcommand("raggio-check",
                                "Sampled check of the decomposability / commutativity / CHSH equivalence");
  rc->add_option("--a", alg_a, "First algebra, e.g. M2")->required();
  rc->add_option("--b", alg_b, "Second algebra, e.g. D2")->required();
  rc->add_option("--samples", samples, "Random states")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rc->add_option("--seed", seed, "Sampling seed")->required();
  int check_budget = HarnessOptions{}.separability_budget;
  rc->add_option("--budget", check_budget, "Product-state search iterations per state")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rc->add_option("--restarts", restarts, "CHSH restarts per state")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rc->add_option("--dim-cap", dim_cap, "Largest allowed tensor dimension")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const Format format = format_name == "json" ? Format::Json : Format::Text;

  try {
    if (born->parsed()) {
      std::vector<double> p;
      if (!state_path.empty()) {
        p = restrict_to_diagonal(io::state_from_json(io::read_json_file(state_path)));
      } else {
        p = restrict_to_diagonal(read_vector(psi, vector_path, ""));
      }
      emit(out, format, Json{{"probabilities", p}}, "probabilities: " + join(p) + "\n");
      return kExitOk;
    }

    if (sch->parsed()) {
      const PureVector v = read_vector(psi, vector_path, algebra);
      const auto coeffs = schmidt(v);
      const auto ent = is_entangled_pure(v);
      Json j{{"coefficients", coeffs}, {"entangled", ent.entangled}, {"reduced_purity", ent.reduced_purity}};
      emit(out, format, j,
           "schmidt coefficients: " + join(coeffs) + "\nentangled: " + (ent.entangled ? "yes" : "no") +
               "\nreduced purity: " + num(ent.reduced_purity) + "\n");
      return kExitOk;
    }

    if (sep->parsed()) {
      const State s = io::state_from_json(io::read_json_file(state_path));
      SeparabilityOptions options;
      options.budget = budget;
      options.seed = seed;
      const SeparabilityVerdict v = separability_test(s, options);
      std::string text = "verdict: " + std::string(to_string(v.tag)) + "\n";
      std::visit(
          [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, Decomposition>) {
              text += "decomposition terms: " + std::to_string(c.weights.size()) + "\n";
              text += "reconstruction trace distance: " + num(trace_distance(reconstruct(c), s)) + "\n";
            } else if constexpr (std::is_same_v<T, ReducedPurity>) {
              text += "reduced purity: " + num(c.value) + "\n";
            } else if constexpr (std::is_same_v<T, PartialTransposeEigenvalue>) {
              text += "partial transpose min eigenvalue: " + num(c.value) + "\n";
            } else {
              text += "iteration budget: " + std::to_string(c.iterations) + "\n";
            }
          },
          v.certificate);
      emit(out, format, io::to_json(v), text);
      return kExitOk;
    }

    if (chsh->parsed()) {
      const State s = io::state_from_json(io::read_json_file(state_path));
      ChshOptions options;
      options.restarts = restarts;
      options.seed = seed;
      options.threads = threads;
      const ChshResult r = chsh_optimize(s, options);
      emit(out, format, io::to_json(r),
           "chsh value: " + num(r.value) + "\nrestarts: " + std::to_string(r.restarts) +
               "\niterations: " + std::to_string(r.iterations) +
               "\nconverged: " + (r.converged ? "yes" : "no") + "\n");
      return kExitOk;
    }

    if (rc->parsed()) {
      HarnessOptions options;
      options.dimension_cap = dim_cap;
      options.chsh_restarts = restarts;
      options.separability_budget = check_budget;
      options.threads = threads;
      const RaggioReport r = verify_equivalence(parse_algebra(alg_a), parse_algebra(alg_b), samples, seed, options);
      std::string text;
      text += "algebras: " + r.algebra_a.shorthand() + " (" + (r.a_commutative ? "commutative" : "noncommutative") +
              ") x " + r.algebra_b.shorthand() + " (" + (r.b_commutative ? "commutative" : "noncommutative") + ")\n";
      text += "samples: " + std::to_string(r.samples) + " + " + std::to_string(r.injected) + " injected (" +
              r.ensemble + ")\n";
      text += "entangled found: " + std::string(r.entangled_found ? "yes (" + r.entangled_witness + ")" : "no") + "\n";
      text += "max chsh: " + num(r.max_chsh) + " (" + r.max_chsh_witness + ")\n";
      text += "decomposition success rate: " + num(r.decomposition_success_rate) + "\n";
      text += "separable/entangled/undetermined: " + std::to_string(r.separable_count) + "/" +
              std::to_string(r.entangled_count) + "/" + std::to_string(r.undetermined_count) + "\n";
      text += "verdict: " + std::string(to_string(r.verdict)) + "\n";
      text += "seed: " + std::to_string(r.seed) + "\n";
      emit(out, format, io::to_json(r), text);
      return exit_code(r.verdict);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: parse-error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("raggio-kit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace raggio::cli
