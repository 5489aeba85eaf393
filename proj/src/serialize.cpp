#include "rrl/serialize.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rrl/hash.hpp"

namespace rrl {

nlohmann::ordered_json mdp_to_json(const TabularMdp& mdp) {
  nlohmann::ordered_json j;
  j["num_states"] = mdp.num_states;
  j["num_actions"] = mdp.num_actions;
  j["gamma"] = mdp.gamma;
  j["r_max"] = mdp.r_max;
  j["rewards"] = mdp.rewards;
  j["transitions"] = mdp.transitions;
  j["initial_dist"] = mdp.initial_dist;
  return j;
}

TabularMdp mdp_from_json(const nlohmann::json& j) {
  TabularMdp mdp;
  try {
    if (!j.is_object()) {
      throw std::invalid_argument("MDP JSON: top level must be an object");
    }
    for (const char* key :
         {"num_states", "num_actions", "gamma", "r_max", "rewards",
          "transitions"}) {
      if (!j.contains(key)) {
        throw std::invalid_argument(std::string("MDP JSON: missing key \"") +
                                    key + "\"");
      }
    }
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    mdp.gamma = j.at("gamma").get<double>();
    mdp.r_max = j.at("r_max").get<double>();
    mdp.rewards = j.at("rewards").get<std::vector<std::vector<double>>>();
    mdp.transitions =
        j.at("transitions")
            .get<std::vector<std::vector<std::vector<double>>>>();
    if (j.contains("initial_dist")) {
      mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("MDP JSON: ") + e.what());
  }
  mdp.validate();
  return mdp;
}

TabularMdp parse_mdp(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("MDP JSON: ") + e.what());
  }
  return mdp_from_json(j);
}

TabularMdp load_mdp(const std::string& path) {
  return parse_mdp(read_text_file(path));
}

nlohmann::ordered_json approx_mdp_to_json(const ApproxMdp& approx) {
  nlohmann::ordered_json j = mdp_to_json(to_planning_mdp(approx));
  nlohmann::ordered_json meta;
  meta["epsilon"] = approx.epsilon;
  meta["rho"] = approx.rho;
  meta["delta"] = approx.delta;
  meta["rho_sq"] = approx.rho_sq;
  meta["delta_sq"] = approx.delta_sq;
  meta["m"] = approx.m;
  meta["sample_reuse"] =
      approx.reuse == SampleReuse::shared ? "shared" : "per_entry";
  nlohmann::ordered_json grid;
  grid["tau"] = approx.query_config.tau;
  grid["tau_prime"] = approx.query_config.tau_prime;
  grid["alpha"] = approx.query_config.alpha;
  grid["required_n"] = approx.query_config.required_n();
  meta["query_grid"] = grid;
  meta["p_hat"] = approx.p_hat;
  meta["offsets"] = approx.offsets;
  meta["means"] = approx.means;
  j["metadata"] = meta;
  return j;
}

std::string dump_json(const nlohmann::ordered_json& j) {
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << text;
  out.flush();
  if (!out) {
    throw std::runtime_error("write failed: " + path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw std::runtime_error("read failed: " + path);
  }
  return buf.str();
}

std::uint64_t hash_json(const nlohmann::ordered_json& j) {
  ContentHash h;
  h.mix_string(dump_json(j));
  return h.digest();
}

}  // namespace rrl
