#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "aoicache/config.hpp"
#include "aoicache/dt.hpp"
#include "aoicache/predictor.hpp"
#include "aoicache/strategies.hpp"

namespace aoicache {

/// Generated or ingested catalog and trace for a run configuration.
World make_world(const RunConfig& config);

struct StrategyBundle {
    std::unique_ptr<Predictor> predictor;
    std::unique_ptr<Strategy> strategy;
};

/// Strategy by name with the predictor it needs (null when it needs none).
/// Throws ConfigError for unknown names.
StrategyBundle make_strategy(const std::string& name, const RunConfig& config, const World& world);

/// The command-line front end. Returns 0 on success, 1 on runtime failure and
/// 2 on usage or configuration errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aoicache
