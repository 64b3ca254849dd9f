// SPDX-License-Identifier: Apache-2.0
//
// Hand-written transition-table models of the TCP and UDP trackers, and
// exhaustive drivers comparing them against the real implementation.
#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "quicwall/conntable.hpp"
#include "quicwall/tcp_tracker.hpp"
#include "quicwall/tracker.hpp"

namespace quicwall::testkit {

// What one step is expected to do.
struct Expected {
  CtState state = CtState::NONE;
  std::optional<Refusal> refusal;
  CtClass classification = CtClass::INVALID;
  std::optional<EventKind> event;
  // Entry after the step, if one is live.
  struct Entry {
    CtState state;
    bool unreplied;
    bool assured;
    Millis expiry;
  };
  std::optional<Entry> entry;
};

class TcpOracle {
 public:
  // `forward` is client -> server on the wire.
  Expected step(TcpFlags flags, bool forward, Millis now);

 private:
  std::optional<Expected::Entry> entry_;
};

class UdpOracle {
 public:
  // Sweep at `now`, then the datagram. Returns the number of entries the
  // sweep destroys (0 or 1) through `swept`.
  Expected step(bool forward, Millis now, std::size_t& swept);

 private:
  std::optional<Expected::Entry> entry_;
};

struct OracleReport {
  std::size_t sequences = 0;
  std::size_t steps = 0;
  std::size_t mismatches = 0;
  std::string first_mismatch;
  double seconds = 0;
};

// Every sequence of length 1..max_len over the 32 symbols (16 flag sets x 2
// directions), each step 1 ms after the previous one.
OracleReport check_tcp_exhaustive(int max_len);

// Every sequence of length 1..max_len over direction x inter-packet gap
// {1 s, 30 s, 31 s}; the 30 s gap lands exactly on the expiry boundary.
OracleReport check_udp_exhaustive(int max_len);

}  // namespace quicwall::testkit
