// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "quicwall/quic_tracker.hpp"
#include "quicwall/scenario.hpp"
#include "quicwall/tcp_tracker.hpp"
#include "quicwall/udp_tracker.hpp"
#include "quicwall/wire.hpp"

using namespace quicwall;

namespace {

const FiveTuple kFlow{Proto::UDP, Ipv4Address::parse("192.168.79.132"), Ipv4Address::parse("192.168.79.128"), 50000,
                      443};

ConnectionId cid(std::uint8_t fill) { return ConnectionId(Bytes(8, fill)); }

Bytes initial_datagram() {
  Bytes d = build_long_header(HeaderVariant::LongInitial, kQuicDraft29, cid(0xd1), cid(0xc1), Bytes(1200, 0));
  return d;
}

void BM_ParseInitial(benchmark::State& state) {
  const Bytes d = initial_datagram();
  const ParseContext ctx;
  for (auto _ : state) benchmark::DoNotOptimize(parse_datagram(d, ctx));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * d.size()));
}
BENCHMARK(BM_ParseInitial);

void BM_ParseCoalesced(benchmark::State& state) {
  Bytes d = build_long_header(HeaderVariant::LongInitial, kQuicDraft29, cid(0xd1), cid(0xc1), Bytes(200, 0));
  const Bytes hs = build_long_header(HeaderVariant::LongHandshake, kQuicDraft29, cid(0xd1), cid(0xc1), Bytes(300, 0));
  const Bytes sh = build_short_header(cid(0xd1), Bytes(100, 0));
  d.insert(d.end(), hs.begin(), hs.end());
  d.insert(d.end(), sh.begin(), sh.end());
  ParseContext ctx;
  ctx.default_dcid_length = 8;
  for (auto _ : state) benchmark::DoNotOptimize(parse_datagram(d, ctx));
}
BENCHMARK(BM_ParseCoalesced);

void BM_TcpHandshakeAndClose(benchmark::State& state) {
  const FiveTuple tcp{Proto::TCP, kFlow.src_ip, kFlow.dst_ip, kFlow.src_port, kFlow.dst_port};
  const FiveTuple back = tcp.reversed();
  for (auto _ : state) {
    ConnTable t;
    tcp_step(t, tcp, {.syn = true}, Direction::Original, Millis{0});
    tcp_step(t, back, {.syn = true, .ack = true}, Direction::Reply, Millis{1});
    tcp_step(t, tcp, {.ack = true}, Direction::Original, Millis{2});
    tcp_step(t, tcp, {.ack = true, .fin = true}, Direction::Original, Millis{3});
    tcp_step(t, back, {.ack = true, .fin = true}, Direction::Reply, Millis{4});
    benchmark::DoNotOptimize(tcp_step(t, tcp, {.ack = true}, Direction::Original, Millis{5}));
  }
}
BENCHMARK(BM_TcpHandshakeAndClose);

void BM_UdpRefresh(benchmark::State& state) {
  ConnTable t;
  udp_step(t, kFlow, Direction::Original, Millis{0});
  Millis now{0};
  for (auto _ : state) {
    now += Millis{1};
    benchmark::DoNotOptimize(udp_step(t, kFlow.reversed(), Direction::Reply, now));
  }
}
BENCHMARK(BM_UdpRefresh);

void BM_QuicShortHeaderStrict(benchmark::State& state) {
  ConnTable t;
  const QuicTrackerConfig cfg;
  const Bytes init = initial_datagram();
  auto h = parse_datagram(init, quic_parse_context(t, kFlow, cfg), kFlow);
  quic_step(t, kFlow, h, Direction::Original, Millis{0}, cfg);
  const Bytes reply = build_long_header(HeaderVariant::LongInitial, kQuicDraft29, cid(0xc1), cid(0x5e), Bytes(100, 0));
  h = parse_datagram(reply, quic_parse_context(t, kFlow.reversed(), cfg), kFlow.reversed());
  quic_step(t, kFlow.reversed(), h, Direction::Reply, Millis{1}, cfg);

  const Bytes data = build_short_header(cid(0xc1), Bytes(60, 0));
  Millis now{1};
  for (auto _ : state) {
    now += Millis{1};
    auto headers = parse_datagram(data, quic_parse_context(t, kFlow.reversed(), cfg), kFlow.reversed());
    benchmark::DoNotOptimize(quic_step(t, kFlow.reversed(), headers, Direction::Reply, now, cfg));
  }
}
BENCHMARK(BM_QuicShortHeaderStrict);

void BM_ScenarioHolePunch(benchmark::State& state) {
  Scenario s = builtin("udp_hole_punch");
  s.tracker = state.range(0) ? TrackerKind::QUIC : TrackerKind::UDP;
  for (auto _ : state) benchmark::DoNotOptimize(run(s));
}
BENCHMARK(BM_ScenarioHolePunch)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
