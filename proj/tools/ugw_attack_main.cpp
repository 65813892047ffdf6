// ugw-attack: adversary harness driver. `matrix` runs the full scripted
// attack suite against a staged gateway and prints one verdict line per
// arm; `script FILE` replays a channel scenario written in the one-action-
// per-line grammar (see --help of the subcommand, or the files under
// scenarios/).
//
// Exit 0 means every arm was defended and its liveness control passed.
// Any BREACHED line (an adversarial frame accepted) or failed control
// exits 1 — including scenarios shipped specifically to demonstrate
// documented weaknesses, which are expected to "fail" this way.
//
// --out writes the machine-readable summary alongside the text report.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ugw/adversary.hpp"

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw std::runtime_error("cannot read scenario file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f || !(f << text).flush())
    throw std::runtime_error("cannot write summary file: " + path);
}

int report(const std::vector<ugw::adv::AttackOutcome>& outcomes, bool json,
           bool verbose, const std::string& out_path) {
  std::string summary = ugw::adv::outcomes_json(outcomes);
  if (!out_path.empty()) write_text_file(out_path, summary);
  if (json) {
    std::fputs(summary.c_str(), stdout);
  } else {
    for (const auto& o : outcomes) {
      if (verbose)
        for (const auto& line : o.transcript)
          std::printf("    %s\n", line.c_str());
      std::printf("%s\n", ugw::adv::outcome_line(o).c_str());
    }
  }
  bool clean = true;
  for (const auto& o : outcomes)
    clean = clean && !o.succeeded && o.control_ok;
  return clean ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversary harness: scripted channel attacks against a staged "
               "gateway"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  uint64_t seed = 2026;
  std::string profile_id = "paper160";
  std::string out_path;
  bool json = false;
  bool verbose = false;

  app.add_option("--seed", seed, "seed for the staged runs")
      ->capture_default_str();
  app.add_option("--profile", profile_id, "curve profile (paper160, tiny97)")
      ->capture_default_str();
  app.add_option("--out", out_path, "write the JSON summary to this file");
  app.add_flag("--json", json, "print the JSON summary instead of text");
  app.add_flag("-v,--verbose", verbose, "print per-arm transcripts");

  CLI::App* cmd_matrix = app.add_subcommand(
      "matrix", "run the full attack suite (replay, tamper, theft, "
      "impersonation, key-recovery scans, flood)");

  std::string scenario_path;
  CLI::App* cmd_script = app.add_subcommand(
      "script",
      "replay a channel scenario file: one action per line, from\n"
      "  forward | drop | replay <i> | tamper <field> <bit> |\n"
      "  inject <hex> | delay <seconds>\n"
      "fields: pid t_ki mid z (request), sq ns t_k_new (response)");
  cmd_script->add_option("file", scenario_path, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const ugw::CurveParams& cp = ugw::profile(profile_id);
    if (app.got_subcommand(cmd_matrix)) {
      std::fprintf(stderr,
                   "ugw-attack: running the attack matrix (seed %llu, "
                   "profile %s) -- the key-recovery scans take a while\n",
                   static_cast<unsigned long long>(seed), cp.id.c_str());
      return report(ugw::adv::run_attack_matrix(seed, cp), json, verbose,
                    out_path);
    }
    // script
    auto actions = ugw::adv::parse_script(read_text_file(scenario_path));
    ugw::adv::AttackOutcome outcome = ugw::adv::run_script(seed, actions, cp);
    return report({outcome}, json, /*verbose=*/true, out_path);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "ugw-attack: bad scenario: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ugw-attack: %s\n", e.what());
    return 1;
  }
}
