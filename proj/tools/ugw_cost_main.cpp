// ugw-cost: cost analyzer. `count` traces the primitive operations of one
// login + key agreement, `bits` accounts the public-channel traffic, and
// `bench` times the four primitives. Default output is a text table;
// --json switches to the machine-readable form.
//
// Exit is 0 unless the requested analysis itself fails (bench exits 1 when
// the expected cost ordering point_mul > point_add > max(hash, sym) does
// not hold on this machine).

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "ugw/cost.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cost analyzer: operation counts, traffic bits, primitive "
               "timings"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string profile_id = "paper160";
  uint64_t seed = 1;
  uint64_t iters = 450;
  bool json = false;

  app.add_option("--profile", profile_id, "curve profile (paper160, tiny97)")
      ->capture_default_str();
  app.add_option("--seed", seed, "seed for the staged honest run")
      ->capture_default_str();
  app.add_flag("--json", json, "emit the machine-readable form");

  CLI::App* cmd_count = app.add_subcommand(
      "count", "primitive-operation counts for one login + key agreement");
  CLI::App* cmd_bits =
      app.add_subcommand("bits", "public-channel traffic accounting");
  CLI::App* cmd_bench =
      app.add_subcommand("bench", "median timings of the four primitives");
  cmd_bench->add_option("--iters", iters, "ops per primitive")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    const ugw::CurveParams& cp = ugw::profile(profile_id);
    if (app.got_subcommand(cmd_count)) {
      ugw::cost::OpTrace trace = ugw::cost::count_ops(seed, cp);
      std::fputs(json ? ugw::cost::to_json(trace).c_str()
                      : ugw::cost::format(trace).c_str(),
                 stdout);
    } else if (app.got_subcommand(cmd_bits)) {
      ugw::cost::BitReport report =
          ugw::cost::account_bits(ugw::cost::sample_transcript(seed, cp));
      std::fputs(json ? ugw::cost::to_json(report).c_str()
                      : ugw::cost::format(report).c_str(),
                 stdout);
    } else if (app.got_subcommand(cmd_bench)) {
      ugw::cost::BenchReport report = ugw::cost::bench_primitives(iters, cp);
      std::fputs(json ? ugw::cost::to_json(report).c_str()
                      : ugw::cost::format(report).c_str(),
                 stdout);
      if (!report.ordering_ok) {
        std::fprintf(stderr,
                     "ugw-cost: cost ordering violated (point_mul should "
                     "dominate; try more --iters on a quiet machine)\n");
        return 1;
      }
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ugw-cost: %s\n", e.what());
    return 1;
  }
}
