#include "recsim/cli.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include "CLI11.hpp"
#include "recsim/config.hpp"
#include "recsim/error.hpp"
#include "recsim/eval.hpp"
#include "recsim/population.hpp"
#include "recsim/rewards.hpp"
#include "recsim/service.hpp"
#include "recsim/store.hpp"

namespace recsim {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

// Writes to `path`, or to `fallback` when path is empty or "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error("cannot open output file " + path);
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

struct Loaded {
  RunConfig config;
  CatalogPtr catalog;
  std::vector<UserProfile> profiles;
};

Loaded load(const std::string& config_path, bool need_profiles) {
  Loaded l;
  l.config = load_run_config(config_path);
  l.config.session.chat_client = make_chat_client(l.config);
  l.catalog = std::make_shared<const Catalog>(load_items(l.config.catalog, format_from_path(l.config.catalog)));
  if (need_profiles) {
    if (!l.config.profiles) throw ConfigError("profiles", "required by this subcommand");
    l.profiles = load_profiles(*l.config.profiles);
  }
  return l;
}

std::vector<UserProfile> select_users(const std::vector<UserProfile>& all, const std::vector<std::string>& ids) {
  if (ids.empty()) return all;
  std::vector<UserProfile> out;
  for (const auto& id : ids) {
    auto it = std::find_if(all.begin(), all.end(), [&](const UserProfile& p) { return p.user_id == id; });
    if (it == all.end()) throw ConfigError("user", "unknown user '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Agentic recommender simulation environment", "recsim"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run simulated sessions and write trajectory JSONL");
  std::string sim_config, sim_out, sim_store, sim_mode;
  std::vector<std::uint64_t> sim_seeds;
  std::vector<std::string> sim_users;
  int sim_workers = 0;
  sim->add_option("--config", sim_config, "Run config (JSON)")->required();
  sim->add_option("--seeds", sim_seeds, "Comma-separated seeds (default: config seeds)")->delimiter(',');
  sim->add_option("--user", sim_users, "Restrict to these user ids")->delimiter(',');
  sim->add_option("--mode", sim_mode, "Override session mode");
  sim->add_option("--out", sim_out, "Output JSONL file (default stdout)");
  sim->add_option("--store", sim_store, "Also append to this trajectory store");
  sim->add_option("--workers", sim_workers, "Parallel sessions");

  // replay-eval
  auto* rev = app.add_subcommand("replay-eval", "Dataset-replay evaluation; prints an EvalReport");
  std::string rev_dataset, rev_config, rev_out;
  std::size_t rev_n = 0, rev_synthetic = 0, rev_holdout = 0;
  std::uint64_t rev_seed = 1;
  bool rev_table = false;
  auto* rev_source = rev->add_option_group("source")->require_option(1);
  rev_source->add_option("--dataset", rev_dataset, "Dataset directory");
  rev_source->add_option("--synthetic", rev_synthetic, "Generate a synthetic dataset with this many users instead");
  rev->add_option("--config", rev_config, "Run config for simulator/recommender parameters");
  rev->add_option("--n", rev_n, "Metric cutoff N");
  rev->add_option("--holdout", rev_holdout, "Held-out positives per user (interaction logs)");
  rev->add_option("--seed", rev_seed, "Seed");
  rev->add_flag("--table", rev_table, "Print a text table instead of JSON");
  rev->add_option("--out", rev_out, "Output file (default stdout)");

  // population
  auto* pop = app.add_subcommand("population", "Population simulation with checkpoints");
  std::string pop_config, pop_graph, pop_out;
  std::optional<int> pop_ticks;
  std::vector<int> pop_schedule;
  std::vector<std::uint64_t> pop_seeds;
  std::optional<int> pop_reps;
  std::optional<double> pop_influence, pop_random_graph, pop_activity;
  int pop_workers = 0;
  pop->add_option("--config", pop_config, "Run config (JSON)")->required();
  pop->add_option("--ticks", pop_ticks, "Number of ticks (6 hours each by default)");
  pop->add_option("--schedule", pop_schedule, "Checkpoint tick offsets, e.g. 1,2,4,8,28")->delimiter(',');
  pop->add_option("--seeds", pop_seeds, "Seeds; two or more produce a variance report")->delimiter(',');
  pop->add_option("--repetitions", pop_reps, "Repetitions with seeds first..first+R-1");
  pop->add_option("--influence", pop_influence, "Influence strength");
  pop->add_option("--activity", pop_activity, "Per-tick activity probability");
  pop->add_option("--graph", pop_graph, "Edge-list CSV from,to,weight");
  pop->add_option("--random-graph", pop_random_graph, "Random graph edge probability");
  pop->add_option("--workers", pop_workers, "Parallel user updates");
  pop->add_option("--out", pop_out, "Output file (default stdout)");

  // judge
  auto* jud = app.add_subcommand("judge", "Filter trajectories with a rubric");
  std::string jud_in, jud_rubric, jud_config, jud_retained, jud_rejected;
  jud->add_option("--in", jud_in, "Trajectory JSONL")->required();
  jud->add_option("--rubric", jud_rubric, "Rubric JSON (default: config rubric)");
  jud->add_option("--config", jud_config, "Run config for weights and the LLM endpoint");
  jud->add_option("--retained", jud_retained, "Write retained trajectories here");
  jud->add_option("--rejected", jud_rejected, "Write rejected trajectories here");

  // serve
  auto* srv = app.add_subcommand("serve", "Serve the /v1 HTTP API");
  std::string srv_config, srv_host, srv_store;
  std::optional<int> srv_port;
  srv->add_option("--config", srv_config, "Run config (JSON)")->required();
  srv->add_option("--host", srv_host, "Bind address");
  srv->add_option("--port", srv_port, "Port (0 = ephemeral)");
  srv->add_option("--store", srv_store, "Trajectory store path");

  // export
  auto* exp = app.add_subcommand("export", "Export stored trajectories as JSONL");
  std::string exp_store, exp_mode, exp_user, exp_out;
  exp->add_option("--store", exp_store, "Trajectory store path")->required();
  exp->add_option("--mode", exp_mode, "Only this session mode");
  exp->add_option("--user", exp_user, "Only this user");
  exp->add_option("--out", exp_out, "Output file (default stdout)");

  std::vector<std::string> rev_args(args.rbegin(), args.rend());
  try {
    app.parse(rev_args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return 2;
  }

  try {
    if (*sim) {
      auto l = load(sim_config, true);
      auto& cfg = l.config.session;
      if (!sim_mode.empty()) {
        auto m = parse_session_mode(sim_mode);
        if (!m) throw ConfigError("mode", "unknown mode '" + sim_mode + "'");
        cfg.mode = *m;
        if (cfg.mode == SessionMode::EvalOnly) cfg.max_turns = 1;
      }
      if (sim_workers > 0) cfg.workers = sim_workers;
      const auto seeds = sim_seeds.empty() ? l.config.seeds : sim_seeds;
      const auto users = select_users(l.profiles, sim_users);
      auto batch = run_batch(users, l.catalog, cfg, seeds, seeds.size());
      std::unique_ptr<TrajectoryStore> store;
      if (!sim_store.empty()) store = std::make_unique<TrajectoryStore>(sim_store);
      Output o(sim_out, out);
      for (auto& t : batch.trajectories) {
        t.annotations["reward"] = to_json(compute_trajectory_reward(t, l.config.reward_weights));
        *o << to_jsonl_line(t) << '\n';
        if (store) store->append(t);
      }
      for (const auto& f : batch.failures) err << "session " << f.user_id << "/" << f.seed << " failed: " << f.message << "\n";
      return batch.failures.empty() ? 0 : 1;
    }

    if (*rev) {
      EvalConfig ec;
      if (!rev_config.empty()) {
        auto cfg = load_run_config(rev_config);
        cfg.session.chat_client = make_chat_client(cfg);
        ec.session = cfg.session;
        ec.n = cfg.eval.n;
        ec.workers = cfg.session.workers;
        if (rev_dataset.empty() && cfg.eval.dataset) rev_dataset = cfg.eval.dataset->string();
        if (rev_holdout == 0) rev_holdout = cfg.eval.holdout;
      }
      if (rev_n > 0) ec.n = rev_n;
      ec.seed = rev_seed;
      EvalReport report;
      if (rev_synthetic > 0) {
        const auto synth = make_synthetic_replay_dataset(rev_synthetic, rev_seed);
        report = run_eval(synth.dataset(), synth.catalog, ec);
      } else {
        if (rev_dataset.empty()) throw ConfigError("dataset", "--dataset or --synthetic is required");
        const auto loaded = load_eval_dataset(rev_dataset, rev_holdout == 0 ? 3 : rev_holdout, ec.n);
        report = run_eval(loaded.dataset, loaded.catalog, ec);
      }
      Output o(rev_out, out);
      if (rev_table) {
        *o << format_report_table(report);
      } else {
        *o << to_json(report).dump(2) << '\n';
      }
      return 0;
    }

    if (*pop) {
      auto l = load(pop_config, true);
      auto& ps = l.config.population;
      PopulationRunArgs a;
      a.profiles = l.profiles;
      a.catalog = *l.catalog;
      a.ticks = pop_ticks.value_or(ps.ticks);
      a.schedule.offsets = pop_schedule.empty() ? ps.schedule : pop_schedule;
      if (pop_ticks && pop_schedule.empty()) {
        std::erase_if(a.schedule.offsets, [&](int o) { return o > a.ticks; });
      }
      a.config.session = l.config.session;
      a.config.session.max_turns = ps.session_max_turns;
      if (a.config.session.mode == SessionMode::EvalOnly) a.config.session.max_turns = 1;
      a.config.influence_strength = pop_influence.value_or(ps.influence_strength);
      a.config.activity_probability = pop_activity.value_or(ps.activity_probability);
      a.config.tick_hours = ps.tick_hours;
      a.config.popularity_weight = ps.popularity_weight;
      a.config.injected_boost = ps.injected_boost;
      a.config.workers = pop_workers > 0 ? pop_workers : l.config.session.workers;
      if (ps.injected_items) {
        a.injected_items = load_items(*ps.injected_items, format_from_path(*ps.injected_items)).entries();
      }
      std::vector<std::string> ids;
      for (const auto& p : l.profiles) ids.push_back(p.user_id);
      auto seeds = pop_seeds.empty() ? l.config.seeds : pop_seeds;
      if (pop_reps) {
        if (*pop_reps < 1) throw ConfigError("repetitions", "must be at least 1");
        const auto first = seeds.front();
        seeds.clear();
        for (int r = 0; r < *pop_reps; ++r) seeds.push_back(first + static_cast<std::uint64_t>(r));
      }
      if (!pop_graph.empty()) {
        a.graph = load_graph(pop_graph);
      } else if (pop_random_graph) {
        a.graph = random_graph(ids, *pop_random_graph, seeds.front());
      } else if (ps.graph) {
        a.graph = load_graph(*ps.graph);
      } else {
        a.graph = SocialGraph(ids, {});
      }
      if (a.config.influence_strength < 0.0) throw ConfigError("influence", "must be non-negative");

      Json result;
      const auto first = run_population(a.graph, a.profiles, a.catalog, a.injected_items, a.ticks, a.schedule,
                                        a.config, seeds.front());
      result["report"] = to_json(first);
      if (seeds.size() >= 2) result["variance"] = to_json(rerun_variance(a, seeds));
      Output o(pop_out, out);
      *o << result.dump(2) << '\n';
      if (first.failure_tick) {
        err << "population run failed at tick " << *first.failure_tick << ": " << first.failure_message << "\n";
        return 1;
      }
      return 0;
    }

    if (*jud) {
      RewardWeights weights;
      std::optional<Rubric> rubric;
      std::shared_ptr<ChatClient> client;
      if (!jud_config.empty()) {
        const auto cfg = load_run_config(jud_config);
        weights = cfg.reward_weights;
        if (cfg.rubric) rubric = load_rubric(*cfg.rubric);
        client = make_chat_client(cfg);
      }
      if (!jud_rubric.empty()) rubric = load_rubric(jud_rubric);
      if (!rubric) throw ConfigError("rubric", "--rubric or a config rubric is required");
      std::ifstream in(jud_in);
      if (!in) throw Error("cannot open " + jud_in);
      const auto trajectories = import_trajectories(in, jud_in);
      std::unique_ptr<JudgeBackend> backend;
      if (client) backend = std::make_unique<LlmJudgeBackend>(client);
      const auto result = filter_trajectories(trajectories, *rubric, backend.get(), weights);
      if (!jud_retained.empty()) {
        Output o(jud_retained, out);
        for (const auto& t : result.retained) *o << to_jsonl_line(t) << '\n';
      }
      if (!jud_rejected.empty()) {
        Output o(jud_rejected, out);
        for (const auto& t : result.rejected) *o << to_jsonl_line(t) << '\n';
      }
      Json unjudged = Json::array();
      for (const auto& u : result.unjudged) {
        unjudged.push_back({{"session_id", u.trajectory.session_id}, {"reason", u.reason}});
      }
      out << Json{{"rubric_id", rubric->rubric_id},
                  {"total", trajectories.size()},
                  {"retained", result.retained.size()},
                  {"rejected", result.rejected.size()},
                  {"unjudged", std::move(unjudged)}}
                 .dump(2)
          << '\n';
      return 0;
    }

    if (*srv) {
      auto l = load(srv_config, true);
      TrajectoryStore store(srv_store.empty() ? l.config.service.store : std::filesystem::path(srv_store));
      AnnotatorService service(l.catalog, l.profiles, l.config.session, l.config.reward_weights, store);
      HttpService http(service);
      const auto host = srv_host.empty() ? l.config.service.host : srv_host;
      const int port = srv_port.value_or(l.config.service.port);
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const int bound = http.start(host, port);
      out << "listening on http://" << host << ":" << bound << "/v1 (store " << store.path().string() << ")"
          << std::endl;
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      http.stop();
      return 0;
    }

    if (*exp) {
      if (!std::filesystem::exists(exp_store)) throw Error("no store at " + exp_store);
      TrajectoryStore store(exp_store);
      ExportFilter f;
      if (!exp_mode.empty()) {
        f.mode = parse_session_mode(exp_mode);
        if (!f.mode) throw ConfigError("mode", "unknown mode '" + exp_mode + "'");
      }
      if (!exp_user.empty()) f.user_id = exp_user;
      Output o(exp_out, out);
      const auto n = export_trajectories(store, f, *o);
      err << n << " trajectories exported\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace recsim
