// Writes the synthetic replay dataset (items, lists, profiles) plus expected.jsonl
// holding each user's expected final list and break position.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "recsim/eval.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic replay-evaluation dataset", "make_replay_dataset"};
  std::string dir;
  std::size_t users = 50;
  std::uint64_t seed = 7;
  app.add_option("--out", dir, "Output directory")->required();
  app.add_option("--users", users, "Number of users");
  app.add_option("--seed", seed, "Seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto synth = recsim::make_synthetic_replay_dataset(users, seed);
    recsim::write_eval_dataset(dir, synth.catalog, synth.dataset());
    std::ofstream out(std::filesystem::path(dir) / "expected.jsonl");
    for (const auto& c : synth.cases) {
      out << recsim::Json{{"user_id", c.user.profile.user_id},
                          {"expected_final", c.expected_final},
                          {"expected_break_position", c.expected_break_position}}
                 .dump()
          << '\n';
    }
    std::cerr << synth.cases.size() << " users written to " << dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
