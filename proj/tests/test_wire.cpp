// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "quicwall/wire.hpp"
#include "testkit/properties.hpp"

using namespace quicwall;

namespace {

ConnectionId cid(std::string_view hex) { return ConnectionId::from_hex(hex); }

Bytes counting(std::size_t n) {
  Bytes b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(i);
  return b;
}

WireErrc parse_error(ByteView bytes, const ParseContext& ctx = {}) {
  try {
    parse_datagram(bytes, ctx);
  } catch (const WireError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no WireError for " << to_hex(bytes);
  return WireErrc::EmptyPayload;
}

}  // namespace

TEST(Bytes, HexIsWhitespaceInsensitive) {
  EXPECT_EQ(from_hex("c0 ff\n00\t1d"), (Bytes{0xc0, 0xff, 0x00, 0x1d}));
  EXPECT_EQ(to_hex(Bytes{0xab, 0x01}), "ab01");
  EXPECT_THROW(from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

TEST(ConnectionId, LimitsAndEquality) {
  EXPECT_TRUE(ConnectionId{}.empty());
  EXPECT_EQ(cid("0102"), cid("0102"));
  EXPECT_NE(cid("0102"), cid("010203"));
  EXPECT_NE(ConnectionId{}, cid("00"));
  EXPECT_NO_THROW(ConnectionId(Bytes(20, 1)));
  try {
    ConnectionId(Bytes(21, 1));
    FAIL() << "21-byte connection ID accepted";
  } catch (const WireError& e) {
    EXPECT_EQ(e.code(), WireErrc::OversizedConnectionId);
  }
}

TEST(Wire, InitialByteLayout) {
  const auto dcid = cid("0001020304050607"), scid = cid("a0a1a2a3a4a5a6a7");
  const Bytes payload{0xde, 0xad, 0xbe, 0xef};
  Bytes b = build_long_header(HeaderVariant::LongInitial, kQuicDraft29, dcid, scid, payload);
  const Bytes want = from_hex("c0 ff00001d 08 0001020304050607 08 a0a1a2a3a4a5a6a7 00 04 deadbeef");
  EXPECT_EQ(b, want);
  EXPECT_EQ(b[0] & 0xc0, 0xc0);
  EXPECT_EQ((b[0] >> 4) & 0x03, 0);

  auto hs = parse_datagram(b, {});
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_EQ(hs[0].variant, HeaderVariant::LongInitial);
  EXPECT_EQ(hs[0].version, kQuicDraft29);
  EXPECT_EQ(hs[0].dcid, dcid);
  EXPECT_EQ(hs[0].scid, scid);
  EXPECT_EQ(hs[0].payload, (Span{b.size() - 4, 4}));
}

TEST(Wire, LongTypeBits) {
  const auto d = cid("01"), s = cid("02");
  EXPECT_EQ(build_long_header(HeaderVariant::LongZeroRtt, kQuicDraft29, d, s, {})[0], 0xd0);
  EXPECT_EQ(build_long_header(HeaderVariant::LongHandshake, kQuicDraft29, d, s, {})[0], 0xe0);
  EXPECT_EQ(build_long_header(HeaderVariant::LongRetry, kQuicDraft29, d, s, Bytes(16))[0], 0xf0);
  Bytes vn = build_long_header(HeaderVariant::VersionNegotiation, kQuicDraft29, d, s, from_hex("ff00001d"));
  EXPECT_EQ(Bytes(vn.begin() + 1, vn.begin() + 5), Bytes(4, 0));
  EXPECT_THROW(build_long_header(HeaderVariant::Short, kQuicDraft29, d, s, {}), std::invalid_argument);
}

TEST(Wire, ShortHeaderExamples) {
  Bytes b = build_short_header(cid("0102030405"), Bytes(16, 0x77));
  EXPECT_EQ(b.size(), 22u);
  EXPECT_GE(b[0], 0x40);
  EXPECT_LE(b[0], 0x7f);
  EXPECT_EQ(build_short_header({}, Bytes{0x01}).size(), 2u);

  ParseContext ctx;
  ctx.default_dcid_length = 5;
  auto hs = parse_datagram(b, ctx);
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_EQ(hs[0].variant, HeaderVariant::Short);
  EXPECT_EQ(hs[0].dcid, cid("0102030405"));
  EXPECT_FALSE(hs[0].dcid_ambiguous);
}

TEST(Wire, WrongDcidLengthGivesDifferentId) {
  Bytes b = build_short_header(cid("0102030405060708"), counting(24));
  ParseContext right, wrong;
  right.default_dcid_length = 8;
  wrong.default_dcid_length = 4;
  auto a = parse_datagram(b, right), c = parse_datagram(b, wrong);
  EXPECT_EQ(a[0].dcid, cid("0102030405060708"));
  EXPECT_EQ(c[0].dcid, cid("01020304"));
  EXPECT_NE(a[0].dcid, c[0].dcid);
}

TEST(Wire, ShortHeaderWithoutContextIsAmbiguous) {
  auto hs = parse_datagram(build_short_header(cid("aabb"), Bytes(8)), {});
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_TRUE(hs[0].dcid_ambiguous);
  EXPECT_TRUE(hs[0].dcid.empty());
}

TEST(Wire, DirectedContextPicksLength) {
  const FiveTuple flow{Proto::UDP, Ipv4Address{1}, Ipv4Address{2}, 1000, 443};
  ParseContext ctx;
  ctx.default_dcid_length = 2;
  ctx.expected_dcid_lengths[flow] = 4;
  Bytes b = build_short_header(cid("01020304"), Bytes(8));
  EXPECT_EQ(parse_datagram(b, ctx, flow)[0].dcid.size(), 4u);
  EXPECT_EQ(parse_datagram(b, ctx, flow.reversed())[0].dcid.size(), 2u);
}

TEST(Wire, Coalesced) {
  Bytes a = build_long_header(HeaderVariant::LongInitial, kQuicDraft29, cid("11"), cid("22"), Bytes(30));
  Bytes h = build_long_header(HeaderVariant::LongHandshake, kQuicDraft29, cid("11"), cid("22"), Bytes(70));
  Bytes s = build_short_header(cid("11"), Bytes(10));
  Bytes all = a;
  all.insert(all.end(), h.begin(), h.end());
  all.insert(all.end(), s.begin(), s.end());
  ParseContext ctx;
  ctx.default_dcid_length = 1;
  auto hs = parse_datagram(all, ctx);
  ASSERT_EQ(hs.size(), 3u);
  EXPECT_EQ(hs[0].variant, HeaderVariant::LongInitial);
  EXPECT_EQ(hs[1].variant, HeaderVariant::LongHandshake);
  EXPECT_EQ(hs[2].variant, HeaderVariant::Short);
  EXPECT_EQ(hs[1].packet.offset, a.size());
  EXPECT_EQ(hs[2].packet.offset, a.size() + h.size());
}

TEST(Wire, Errors) {
  EXPECT_EQ(parse_error(Bytes{}), WireErrc::EmptyPayload);
  // Fixed bit clear on a long header with a real version.
  EXPECT_EQ(parse_error(from_hex("80 ff00001d 00 00 00 00")), WireErrc::MalformedHeader);
  // Fixed bit clear on a short header.
  EXPECT_EQ(parse_error(from_hex("00 0102")), WireErrc::MalformedHeader);
  EXPECT_EQ(parse_error(from_hex("c0 00000001 00 00 00 00")), WireErrc::UnsupportedVersion);
  // Length field points past the end.
  EXPECT_EQ(parse_error(from_hex("c0 ff00001d 00 00 00 10 aa")), WireErrc::MalformedHeader);
  // DCID length 21.
  EXPECT_EQ(parse_error(from_hex("c0 ff00001d 15")), WireErrc::MalformedHeader);
  // Retry with a short integrity tag, empty VN list.
  EXPECT_EQ(parse_error(from_hex("f0 ff00001d 00 00 0102")), WireErrc::MalformedHeader);
  EXPECT_EQ(parse_error(from_hex("80 00000000 00 00")), WireErrc::MalformedHeader);
  EXPECT_EQ(parse_error(from_hex("80 00000000 00 00 ff0000")), WireErrc::MalformedHeader);
  ParseContext too_long;
  too_long.default_dcid_length = 8;
  EXPECT_EQ(parse_error(from_hex("40 0102"), too_long), WireErrc::MalformedHeader);
}

TEST(Wire, VersionNegotiationIgnoresFixedBit) {
  auto hs = parse_datagram(from_hex("80 00000000 01 aa 00 ff00001d"), {});
  ASSERT_EQ(hs.size(), 1u);
  EXPECT_EQ(hs[0].variant, HeaderVariant::VersionNegotiation);
  EXPECT_EQ(hs[0].dcid, cid("aa"));
}

TEST(Wire, AcceptedVersionSetIsConfigurable) {
  Bytes b = build_long_header(HeaderVariant::LongInitial, 0x00000001, cid("01"), cid("02"), {});
  EXPECT_EQ(parse_error(b), WireErrc::UnsupportedVersion);
  ParseContext ctx;
  ctx.accepted_versions.insert(0x00000001);
  EXPECT_EQ(parse_datagram(b, ctx)[0].version, 1u);
}

TEST(Wire, Varints) {
  for (std::uint64_t v : {0ull, 63ull, 64ull, 16383ull, 16384ull, 1073741823ull, 1073741824ull}) {
    Bytes b;
    append_varint(b, v);
    EXPECT_EQ(b.size(), varint_size(v)) << v;
  }
  Bytes b;
  append_varint(b, 494878333);
  EXPECT_EQ(b, from_hex("9d7f3e7d"));
  EXPECT_THROW(append_varint(b, 1ull << 62), std::out_of_range);
}

TEST(ResetShape, Examples) {
  Bytes twenty_one(21, 0xaa);
  twenty_one[0] = 0x45;
  auto s = stateless_reset_shape(twenty_one);
  EXPECT_TRUE(s.plausible_short_header);
  EXPECT_TRUE(s.meets_min_length);
  ASSERT_TRUE(s.token_window.has_value());

  Bytes twenty(twenty_one.begin(), twenty_one.end() - 1);
  EXPECT_FALSE(stateless_reset_shape(twenty).meets_min_length);
  EXPECT_FALSE(stateless_reset_shape(Bytes{}).plausible_short_header);

  std::mt19937_64 rng(7);
  Bytes random_payload(16);
  for (auto& x : random_payload) x = static_cast<std::uint8_t>(rng());
  EXPECT_TRUE(stateless_reset_shape(build_short_header(cid("0102030405"), random_payload)).looks_like_reset());
}

TEST(WireProperties, Roundtrip) {
  auto r = testkit::codec_roundtrip(1000, 1);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(WireProperties, Coalesced) {
  auto r = testkit::codec_coalesced(1000, 2);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(WireProperties, Fuzz) {
  auto r = testkit::codec_fuzz(10000, 3);
  EXPECT_TRUE(r.ok()) << r.first_failure;
}

TEST(WireProperties, ResetShapedPacketsParseAsShort) {
  auto r = testkit::reset_indistinguishable(1000, 4);
  EXPECT_TRUE(r.ok()) << r.first_failure;
  auto s = testkit::reset_shape_exact(5000, 5);
  EXPECT_TRUE(s.ok()) << s.first_failure;
}
