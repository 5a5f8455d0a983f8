// nlsbif: verify the edge-bifurcation expansion and scan the direct spectrum.

#include "nlsbif/nlsbif.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <map>

int main(int argc, char** argv) {
  using namespace nlsbif;
  RunConfig cfg;
  std::string format = "json";

  CLI::App app{"Edge bifurcation of the linearized NLS threshold resonance near p = 3"};
  app.require_subcommand(1);

  const std::map<std::string, Command> commands{{"verify", Command::verify},
                                                {"alpha2", Command::alpha2},
                                                {"scan", Command::scan},
                                                {"residual", Command::residual},
                                                {"report", Command::report}};
  const std::map<std::string, std::string> help{
      {"verify", "run the operator and expansion identity suite"},
      {"alpha2", "compute w1, w2, alpha2 and the term-by-term breakdown"},
      {"scan", "direct eigenvalue scan of the gap eigenvalue near z = 1"},
      {"residual", "residual of the truncated expansion in the full equation"},
      {"report", "plot-ready profiles of w0, w1, w2"}};

  for (const auto& [name, cmd] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--domain-length", cfg.L, "half-length L of [-L, L]")->capture_default_str();
    sub->add_option("--grid-points", cfg.N, "number of quadrature nodes")->capture_default_str();
    sub->add_option("--modes", cfg.n_modes, "Fourier modes per component and parity")->capture_default_str();
    sub->add_option("--eps", cfg.eps_list, "eps = p - 3 (repeatable)");
    sub->add_option("--p", cfg.p_list, "nonlinearity power (repeatable, scan only)");
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sub->add_option("--out", cfg.output_path, "output file (default: standard output)");
    sub->add_option("--seed", cfg.seed, "seed for randomized checks")->capture_default_str();
    sub->callback([&cfg, cmd = cmd] { cfg.command = cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsage;
  }
  cfg.output_format = format == "csv" ? OutputFormat::csv : OutputFormat::json;

  try {
    cfg.validate();
    std::ofstream file;
    if (!cfg.output_path.empty()) {
      file.open(cfg.output_path);
      if (!file) throw UsageError("cannot open output file " + cfg.output_path);
    }
    std::ostream& out = cfg.output_path.empty() ? std::cout : file;
    const CommandOutcome res = run_command(cfg, out, &std::cerr);
    if (!res.diagnostic.empty()) std::cerr << res.diagnostic << "\n";
    return res.exit_code;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
