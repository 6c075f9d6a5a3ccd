#pragma once

#include <string>

#include "lindyn/chain.hpp"
#include "lindyn/shadowing.hpp"

namespace lindyn {

/// Declarative config parsing (JSON documents; see README for the schema).
SpaceSpec space_from_json_text(const std::string& text);
OperatorDescriptor operator_from_json_text(const std::string& text);
std::string space_to_json_text(const SpaceSpec& s);
std::string operator_to_json_text(const OperatorDescriptor& t);

struct ExperimentConfig {
    std::string command;  // classify | chain | shadow | chaos | invariance-suite | demo-entire
    OperatorDescriptor op;
    std::uint64_t seed{1};
    std::int64_t budget_terms{1'000'000};
    std::string params_json;  // command parameters, raw JSON object
    std::string canonical;    // canonical serialized form (hashed into reports)
};

/// Parses a full experiment document; optional overrides mirror the CLI
/// flags. Throws std::invalid_argument / std::domain_error on bad input.
ExperimentConfig parse_experiment(const std::string& text, std::uint64_t seed_override = 0,
                                  int k_max_override = 0, std::int64_t budget_override = 0);

/// Runs the experiment, writing report.json (plus artifact files) under
/// out_dir. Exit codes: 0 success, 2 validation error, 3 undecided-dominated
/// result, 4 resource budget exceeded.
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// Line-oriented chain serialization: header (operator rendering, delta,
/// length), then one point per line as sparse index:value pairs. Reports
/// reference chains by the FNV-1a hash of this text.
std::string chain_to_text(const Chain& chain, const OperatorDescriptor& T);

/// Pseudotrajectory + certificate footer (eps, window, max_error, residuals).
std::string certificate_to_text(const ShadowCertificate& cert, const OperatorDescriptor& T);

}  // namespace lindyn
