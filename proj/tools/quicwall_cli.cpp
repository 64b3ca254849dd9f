// SPDX-License-Identifier: Apache-2.0
//
// quicwall: parse QUIC wire images, replay scenarios and pcaps through the
// trackers and the rule engine.
//
// Exit codes: 0 ok, 1 an --expect assertion failed, 2 usage error,
// 3 bad input (scenario, rules, capture or wire error).
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "expect.hpp"
#include "quicwall/capture.hpp"
#include "quicwall/scenario.hpp"
#include "quicwall/wire.hpp"

namespace {

using namespace quicwall;

constexpr int kExitExpectFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string refusal_footer() {
  std::ostringstream os;
  os << "Tracker refusal reasons (trace field reason=):\n";
  for (Refusal r : kAllRefusals) {
    std::string name(to_string(r));
    os << "  " << name << std::string(name.size() < 19 ? 19 - name.size() : 1, ' ') << describe(r) << '\n';
  }
  os << "Rule-engine reasons: rule (matched an ACCEPT rule), policy (chain default DROP).\n"
     << "Exit codes: 0 ok, 1 --expect failed, 2 usage error, 3 bad input.";
  return os.str();
}

// Options shared by simulate and track.
struct RunFlags {
  std::string tracker;
  std::string mode;
  std::int64_t ttl_udp = 30;
  std::string rules;
  std::string format = "table";
  std::vector<std::string> expects;
  bool events = false;
  bool advance_to_end = false;

  CLI::Option* tracker_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* ttl_opt = nullptr;

  void attach(CLI::App& cmd) {
    tracker_opt = cmd.add_option("--tracker", tracker, "Tracker for UDP traffic")
                      ->check(CLI::IsMember({"tcp", "udp", "quic"}));
    mode_opt = cmd.add_option("--mode", mode, "QUIC tracker mode")->check(CLI::IsMember({"strict", "fallback"}));
    ttl_opt = cmd.add_option("--ttl-udp", ttl_udp, "UDP/QUIC entry TTL in seconds")
                  ->check(CLI::PositiveNumber)
                  ->capture_default_str();
    cmd.add_option("--rules", rules, "iptables-save ruleset (default: built-in HTTPS/HTTP3 server rules)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--format", format, "Trace output")->check(CLI::IsMember({"table", "records"}))->capture_default_str();
    cmd.add_option("--expect", expects,
                   "Assertion <metric><op><value>; metrics attacker_accepted, attacker_dropped, "
                   "hole_open_duration (seconds), ops = != < <= > >=")
        ->take_all();
    cmd.add_flag("--events", events, "Print the conntrack event log");
    cmd.add_flag("--advance-to-end", advance_to_end, "Sweep until every entry expired after the last step");
  }

  // Flags (or config) override whatever the scenario itself specifies.
  void apply(Scenario& s) const {
    if (tracker_opt->count()) s.tracker = *tracker_from_string(tracker);
    if (mode_opt->count()) s.config.quic.mode = mode == "strict" ? QuicMode::StrictDcid : QuicMode::TupleFallback;
    if (ttl_opt->count()) s.config.ttl.set_udp(std::chrono::seconds{ttl_udp});
    if (!rules.empty()) {
      try {
        s.ruleset = load_rules(slurp(rules));
      } catch (const RuleError& e) {
        throw InputError(rules + ": " + e.what());
      }
    }
  }

  std::vector<tools::Expectation> parsed_expects() const {
    std::vector<tools::Expectation> out;
    for (const auto& text : expects) out.push_back(tools::parse_expectation(text));
    return out;
  }

  OutputFormat output_format() const { return format == "records" ? OutputFormat::Records : OutputFormat::Table; }
};

int report(const Trace& trace, const RunFlags& flags, const std::vector<tools::Expectation>& expects,
           bool dump_table) {
  write_trace(std::cout, trace, flags.output_format());
  const Metrics m = metrics(trace);
  write_metrics(std::cout, m);
  if (flags.events) write_events(std::cout, trace);
  if (dump_table) write_table(std::cout, trace.final_table);

  int rc = 0;
  for (const auto& e : expects) {
    if (!tools::holds(e, m)) {
      std::cerr << "expectation failed: " << e.text << " (actual " << tools::metric_value_str(e.metric, m) << ")\n";
      rc = kExitExpectFailed;
    }
  }
  return rc;
}

int cmd_parse(const std::string& input, std::optional<std::size_t> dcid_len) {
  std::string text = input;
  if (input == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    text = ss.str();
  } else if (std::filesystem::is_regular_file(input)) {
    text = slurp(input);
  }

  Bytes datagram;
  try {
    datagram = from_hex(text);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: input is not hex: " << e.what() << '\n';
    return kExitUsage;
  }

  ParseContext ctx;
  ctx.default_dcid_length = dcid_len;
  std::vector<QuicHeader> headers;
  try {
    headers = parse_datagram(datagram, ctx);
  } catch (const WireError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }

  std::cout << "datagram " << datagram.size() << " bytes, " << headers.size() << " packet(s)\n";
  for (std::size_t i = 0; i < headers.size(); ++i) {
    const QuicHeader& h = headers[i];
    std::cout << "packet " << i << ": " << to_string(h.variant) << '\n';
    std::cout << "  offset=" << h.packet.offset << " length=" << h.packet.length << '\n';
    if (is_long(h.variant)) {
      std::ostringstream v;
      v << std::hex << h.version;
      std::cout << "  version=0x" << v.str() << '\n';
    }
    if (h.dcid_ambiguous) {
      std::cout << "  dcid=? (length unknown, pass --dcid-len)\n";
    } else {
      std::cout << "  dcid=" << (h.dcid.empty() ? "-" : h.dcid.hex()) << " dcid_len=" << h.dcid.size() << '\n';
    }
    if (is_long(h.variant)) {
      std::cout << "  scid=" << (h.scid.empty() ? "-" : h.scid.hex()) << " scid_len=" << h.scid.size() << '\n';
    }
    std::cout << "  payload=" << h.payload.length << " bytes\n";
  }

  const ShapeReport shape = stateless_reset_shape(datagram);
  if (shape.looks_like_reset()) {
    std::cout << "shape: plausible stateless reset / short packet";
    if (shape.token_window) std::cout << " token_window=" << to_hex(*shape.token_window);
    std::cout << '\n';
  } else if (shape.plausible_short_header) {
    std::cout << "shape: short header, too short for a stateless reset (" << datagram.size() << " < "
              << kMinStatelessResetLength << " bytes)\n";
  } else {
    std::cout << "shape: not a stateless reset (long header form)\n";
  }
  return 0;
}

int cmd_simulate(const std::string& target, const RunFlags& flags, const std::string& attacker_dcid,
                 std::uint64_t seed, const std::string& export_pcap, const std::string& export_script) {
  auto expects = flags.parsed_expects();
  Scenario s;
  if (is_builtin(target)) {
    BuiltinOptions opts;
    opts.attacker_dcid = *attacker_dcid_from_string(attacker_dcid);
    opts.seed = seed;
    s = builtin(target, opts);
  } else if (std::filesystem::is_regular_file(target)) {
    s = parse_scenario(slurp(target));
  } else {
    throw InputError("'" + target + "' is neither a builtin scenario nor a file");
  }
  flags.apply(s);

  Trace trace = run(s, RunOptions{.advance_to_end = flags.advance_to_end});
  if (!export_pcap.empty()) {
    auto packets = packets_of(s);
    write_pcap_file(export_pcap, packets);
  }
  if (!export_script.empty()) {
    std::ofstream out(export_script);
    if (!out) throw InputError("cannot write " + export_script);
    out << to_script(s);
  }
  return report(trace, flags, expects, false);
}

int cmd_track(const std::string& pcap, const RunFlags& flags, const std::string& server) {
  auto expects = flags.parsed_expects();
  Ipv4Address server_ip;
  try {
    server_ip = Ipv4Address::parse(server);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: --server: " << e.what() << '\n';
    return kExitUsage;
  }
  Capture capture = read_pcap_file(pcap);
  Scenario s = scenario_from_capture(capture, server_ip, TrackerKind::UDP, std::filesystem::path(pcap).stem().string());
  flags.apply(s);
  Trace trace = run(s, RunOptions{.advance_to_end = flags.advance_to_end});
  std::cout << "capture packets=" << capture.packets.size() << " skipped=" << capture.skipped
            << " fragments=" << capture.fragments << '\n';
  return report(trace, flags, expects, true);
}

int cmd_rules_check(const std::string& file) {
  const std::string text = file.empty() ? std::string(kDefaultRules) : slurp(file);
  Ruleset rs;
  try {
    rs = load_rules(text);
  } catch (const RuleError& e) {
    std::cerr << (file.empty() ? "<builtin>" : file) << ": " << e.what() << '\n';
    return kExitInput;
  }
  for (const auto& [chain, policy] : rs.policies) std::cout << ':' << to_string(chain) << ' ' << policy << '\n';
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    std::cout << '[' << i << "] line " << rs.rules[i].line << ": " << to_string(rs.rules[i]) << '\n';
  }
  std::cout << "ok rules=" << rs.rules.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quicwall: userspace QUIC/TCP/UDP connection tracking and firewall simulation"};
  app.require_subcommand(1);
  app.footer(refusal_footer());
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.get_formatter()->column_width(34);

  std::string parse_input;
  std::optional<std::size_t> dcid_len;
  auto* parse = app.add_subcommand("parse", "Break a hex-dumped UDP payload into QUIC headers");
  parse->add_option("input", parse_input, "Hex text, a file holding hex text, or - for stdin")->required();
  parse->add_option("--dcid-len", dcid_len, "DCID length for short headers")->check(CLI::Range(0, 20));

  RunFlags sim_flags;
  std::string target, attacker_dcid = "random", export_pcap, export_script;
  std::uint64_t seed = 0x5eed;
  std::string builtin_list;
  for (auto name : builtin_names()) builtin_list += (builtin_list.empty() ? "" : ", ") + std::string(name);
  auto* simulate = app.add_subcommand("simulate", "Run a builtin scenario or scenario file");
  simulate->add_option("scenario", target, "Builtin (" + builtin_list + ") or scenario file")->required();
  sim_flags.attach(*simulate);
  simulate->add_option("--attacker-dcid", attacker_dcid, "Attacker DCID strategy for builtins")
      ->check(CLI::IsMember({"random", "fixed", "copy"}))
      ->capture_default_str();
  simulate->add_option("--seed", seed, "Seed for synthesized bytes in builtins")->capture_default_str();
  simulate->add_option("--export-pcap", export_pcap, "Write the scenario's packets as a pcap");
  simulate->add_option("--export-script", export_script, "Write the scenario as a script");

  RunFlags track_flags;
  std::string pcap, server = kServerIp.str();
  auto* track = app.add_subcommand("track", "Replay a classic pcap through a tracker");
  track->add_option("pcap", pcap, "Capture file")->required();
  track_flags.attach(*track);
  track->add_option("--server", server, "Server address; other hosts are treated as the client")
      ->capture_default_str();

  std::string rules_file;
  auto* rules = app.add_subcommand("rules", "Ruleset tools");
  rules->require_subcommand(1);
  auto* check = rules->add_subcommand("check", "Load a ruleset and print what was understood");
  check->add_option("file", rules_file, "iptables-save file (default: built-in ruleset)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*parse) return cmd_parse(parse_input, dcid_len);
    if (*simulate) return cmd_simulate(target, sim_flags, attacker_dcid, seed, export_pcap, export_script);
    if (*track) return cmd_track(pcap, track_flags, server);
    if (*check) return cmd_rules_check(rules_file);
  } catch (const tools::ExpectationSyntax& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioError& e) {
    std::cerr << "ScenarioError: " << e.what() << '\n';
    return kExitInput;
  } catch (const CaptureError& e) {
    std::cerr << "CaptureError: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitUsage;
}
