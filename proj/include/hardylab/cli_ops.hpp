#pragma once

#include "hardylab/config.hpp"

#include <cstdint>
#include <string>

namespace hardylab {

/// Weight pair selected by [weights] (validated against [domain]).
WeightPair make_pair_from_config(const WeightsConfig& w, const DomainConfig& d);

/// Piecewise-linear interpolant through (interior-node, coeff) pairs with
/// zero boundary values; used to hand discrete data back as a RadialFn.
RadialFn hat_interpolant(const Mesh& mesh, const Eigen::VectorXd& coeffs);

// Each command reads its sections from cfg, writes CSV files under out_dir,
// prints a short summary to stdout, and returns the process exit status
// (0 = ran to completion, including negative scientific results; for
// check-weights, 0 additionally requires all applicable checks to pass).
int cmd_check_weights(const RunConfig& cfg, const std::string& out_dir,
                      std::uint64_t seed);
int cmd_hardy(const RunConfig& cfg, const std::string& out_dir,
              std::uint64_t seed);
int cmd_solve(const RunConfig& cfg, const std::string& out_dir,
              std::uint64_t seed);
int cmd_sweep_lambda(const RunConfig& cfg, const std::string& out_dir,
                     std::uint64_t seed);

}  // namespace hardylab
