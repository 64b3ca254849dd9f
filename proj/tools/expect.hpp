// SPDX-License-Identifier: Apache-2.0
//
// --expect <metric><op><value> assertions over scenario metrics.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "quicwall/scenario.hpp"

namespace quicwall::tools {

enum class Op { Eq, Ne, Lt, Le, Gt, Ge };

struct Expectation {
  std::string text;
  std::string metric;
  Op op = Op::Eq;
  double value = 0;
};

class ExpectationSyntax : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws ExpectationSyntax for an unknown metric, operator or value.
Expectation parse_expectation(std::string_view text);
// hole_open_duration is compared in seconds.
double metric_value(const std::string& metric, const Metrics& m);
std::string metric_value_str(const std::string& metric, const Metrics& m);
bool holds(const Expectation& e, const Metrics& m);

}  // namespace quicwall::tools
