// SPDX-License-Identifier: Apache-2.0
#include "expect.hpp"

#include <charconv>
#include <sstream>

namespace quicwall::tools {

namespace {

constexpr std::string_view kMetrics[] = {"attacker_accepted", "attacker_dropped", "hole_open_duration"};

}  // namespace

Expectation parse_expectation(std::string_view text) {
  const std::size_t at = text.find_first_of("=!<>");
  if (at == std::string_view::npos || at == 0) {
    throw ExpectationSyntax("expectation '" + std::string(text) + "' is not <metric><op><value>");
  }
  Expectation e;
  e.text = text;
  e.metric = text.substr(0, at);
  bool known = false;
  for (auto m : kMetrics) known = known || m == e.metric;
  if (!known) throw ExpectationSyntax("unknown metric '" + e.metric + "'");

  std::string_view rest = text.substr(at);
  std::size_t op_len = 1;
  if (rest.starts_with(">=")) e.op = Op::Ge, op_len = 2;
  else if (rest.starts_with("<=")) e.op = Op::Le, op_len = 2;
  else if (rest.starts_with("!=")) e.op = Op::Ne, op_len = 2;
  else if (rest.starts_with("==")) e.op = Op::Eq, op_len = 2;
  else if (rest.starts_with("=")) e.op = Op::Eq;
  else if (rest.starts_with(">")) e.op = Op::Gt;
  else if (rest.starts_with("<")) e.op = Op::Lt;
  else throw ExpectationSyntax("bad operator in '" + std::string(text) + "'");

  std::string_view num = rest.substr(op_len);
  if (num.ends_with("s") && e.metric == "hole_open_duration") num.remove_suffix(1);
  auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), e.value);
  if (num.empty() || ec != std::errc{} || end != num.data() + num.size()) {
    throw ExpectationSyntax("bad value in '" + std::string(text) + "'");
  }
  return e;
}

double metric_value(const std::string& metric, const Metrics& m) {
  if (metric == "attacker_accepted") return static_cast<double>(m.attacker_accepted);
  if (metric == "attacker_dropped") return static_cast<double>(m.attacker_dropped);
  return static_cast<double>(m.hole_open_duration.count()) / 1000.0;
}

std::string metric_value_str(const std::string& metric, const Metrics& m) {
  std::ostringstream os;
  os << metric_value(metric, m);
  return os.str();
}

bool holds(const Expectation& e, const Metrics& m) {
  const double v = metric_value(e.metric, m);
  switch (e.op) {
    case Op::Eq: return v == e.value;
    case Op::Ne: return v != e.value;
    case Op::Lt: return v < e.value;
    case Op::Le: return v <= e.value;
    case Op::Gt: return v > e.value;
    case Op::Ge: return v >= e.value;
  }
  return false;
}

}  // namespace quicwall::tools
