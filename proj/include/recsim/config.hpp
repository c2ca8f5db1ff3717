#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "recsim/llm_client.hpp"
#include "recsim/rewards.hpp"
#include "recsim/session.hpp"

namespace recsim {

struct LlmEndpointConfig {
  ChatClientOptions options;
  std::string api_key_env = "RECSIM_API_KEY";  // overrides options.api_key when set
};

struct PopulationSettings {
  std::optional<std::filesystem::path> graph;           // edge-list CSV; empty graph when unset
  std::optional<std::filesystem::path> injected_items;  // catalog file of new content
  int ticks = 28;
  std::vector<int> schedule = {1, 2, 4, 8, 28};
  double influence_strength = 0.0;
  double activity_probability = 0.5;
  double tick_hours = 6.0;
  double popularity_weight = 0.0;
  double injected_boost = 0.0;
  int session_max_turns = 2;
};

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store = "trajectories.jsonl";
};

struct EvalSettings {
  std::optional<std::filesystem::path> dataset;
  std::size_t n = 10;
  std::size_t holdout = 3;
};

/// Everything a CLI subcommand or the service needs. Relative paths are resolved
/// against the directory of the config file.
struct RunConfig {
  std::filesystem::path catalog;
  std::optional<std::filesystem::path> profiles;
  std::optional<std::filesystem::path> rubric;
  SessionConfig session;
  RewardWeights reward_weights;
  std::vector<std::uint64_t> seeds = {1};
  std::optional<LlmEndpointConfig> llm;  // required by llm simulator/recommender/judge
  PopulationSettings population;
  ServiceSettings service;
  EvalSettings eval;
};

/// Parses and validates; unknown keys and missing referenced files raise ConfigError
/// naming the field. The LLM key is read from the environment variable named by
/// llm.api_key_env.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Builds the chat client when an endpoint is configured and wires it into the session.
std::shared_ptr<ChatClient> make_chat_client(const RunConfig& config);

Json to_json(const SimulatorParams& p);
Json to_json(const RecommenderParams& p);
// Config echo for reports; never includes the API key.
Json to_json(const RunConfig& c);

}  // namespace recsim
