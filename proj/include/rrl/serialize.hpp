#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "rrl/approx_mdp.hpp"
#include "rrl/mdp.hpp"

namespace rrl {

/// Fixed-key-order JSON image of the MDP. Emitting the same MDP twice gives
/// byte-identical text; doubles are printed in shortest round-trip form.
nlohmann::ordered_json mdp_to_json(const TabularMdp& mdp);

/**
 * Parses the standard schema {num_states, num_actions, gamma, r_max,
 * rewards, transitions, initial_dist} (initial_dist may be missing or
 * empty), validates the result, and throws std::invalid_argument describing
 * the first problem found.
 */
TabularMdp mdp_from_json(const nlohmann::json& j);

/// mdp_from_json over raw text; malformed JSON is reported the same way.
TabularMdp parse_mdp(const std::string& text);

/// Reads and parses a file; I/O failures throw std::runtime_error.
TabularMdp load_mdp(const std::string& path);

/**
 * Estimated model in the standard MDP schema plus a "metadata" block. The
 * top-level entries hold the normalized planning view, so any consumer of
 * plain MDP files can load the result; metadata preserves the raw grid
 * estimates (p_hat), per-entry offsets, pre-rounding means, the query grid
 * (tau, tau_prime, alpha, per-query budgets, required_n), the draw count m,
 * and the sample-reuse mode.
 */
nlohmann::ordered_json approx_mdp_to_json(const ApproxMdp& approx);

/// Canonical text form: two-space indent, trailing newline.
std::string dump_json(const nlohmann::ordered_json& j);

/// Writes text to a file, creating or truncating it; throws
/// std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

/// Reads a whole file; throws std::runtime_error on failure.
std::string read_text_file(const std::string& path);

/// Content hash of the canonical text form (stable across runs and
/// platforms for identical values).
std::uint64_t hash_json(const nlohmann::ordered_json& j);

}  // namespace rrl
