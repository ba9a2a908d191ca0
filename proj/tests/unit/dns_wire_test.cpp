// Copyright 2026 The Flame Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <gtest/gtest.h>

#include "flame/dns/message.hpp"
#include "flame/errors.hpp"
#include "flame/geo/geodomain.hpp"

namespace flame::dns {
namespace {

TEST(DnsWireTest, QueryRoundtrip) {
  const auto wire = encode_query("5.flame.test", rtype::kTxt);
  const DnsMessage m = decode_message(wire);
  EXPECT_FALSE(m.qr);
  EXPECT_TRUE(m.rd);
  ASSERT_EQ(m.questions.size(), 1u);
  EXPECT_EQ(m.questions[0], (Question{"5.flame.test", rtype::kTxt, kClassIn}));
  EXPECT_EQ(encode_message(m), wire);
}

TEST(DnsWireTest, LabelLimit) {
  EXPECT_THROW(encode_query(std::string(64, 'a') + ".flame.test", rtype::kTxt),
               ValidationError);
  EXPECT_NO_THROW(encode_query(std::string(63, 'a') + ".flame.test", rtype::kTxt));
}

TEST(DnsWireTest, FullMessageRoundtrip) {
  DnsMessage m;
  m.id = 0xbeef;
  m.qr = true;
  m.aa = true;
  m.rd = true;
  m.rcode = Rcode::kNxDomain;
  m.questions.push_back({"1.3.5.flame.test", rtype::kTxt, kClassIn});
  m.answers.push_back(ResourceRecord::txt(
      "1.3.5.flame.test", 300, {"flame1 MCNAME https://a.example.edu", "x"}));
  m.authority.push_back(ResourceRecord::soa(
      "flame.test", 60,
      {"ns1.flame.test", "hostmaster.flame.test", 7, 3600, 600, 86400, 60}));
  ResourceRecord a;
  a.owner = "ns1.flame.test";
  a.type = rtype::kA;
  a.ttl = 10;
  a.rdata = OpaqueData{127, 0, 0, 1};
  m.additional.push_back(a);
  EXPECT_EQ(decode_message(encode_message(m)), m);
}

TEST(DnsWireTest, RandomGeoDomainsRoundtrip) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  for (int i = 0; i < 1000; ++i) {
    const cells::Point p = cells::Point(n(rng), n(rng), n(rng)).normalized();
    const auto cell = cells::CellId::from_point(p).parent(
        std::uniform_int_distribution<int>(0, 30)(rng));
    const std::string name = geo::GeoDomain(cell, "flame.test").to_string();
    const DnsMessage q = make_query(name, rtype::kTxt, static_cast<std::uint16_t>(i));
    EXPECT_EQ(decode_message(encode_message(q)), q);
  }
}

// Response assembled by hand per RFC 1035 4.1.4: the answer owner is a
// pointer to the question name at offset 12, and the SOA mname points into
// the middle of it.
TEST(DnsWireTest, CompressionPointersDecode) {
  const std::vector<std::uint8_t> wire = {
      0x12, 0x34, 0x84, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00,
      // offset 12: 1.5.flame.test
      0x01, '1', 0x01, '5', 0x05, 'f', 'l', 'a', 'm', 'e', 0x04, 't', 'e', 's',
      't', 0x00,
      0x00, 0x10, 0x00, 0x01,
      // answer: owner = pointer to 12
      0xc0, 0x0c, 0x00, 0x10, 0x00, 0x01, 0x00, 0x00, 0x01, 0x2c, 0x00, 0x06,
      0x05, 'h', 'e', 'l', 'l', 'o',
      // authority: owner = pointer to "flame.test" at offset 16
      0xc0, 0x10, 0x00, 0x06, 0x00, 0x01, 0x00, 0x00, 0x00, 0x3c, 0x00, 0x1b,
      // mname: "ns" + pointer to 16
      0x02, 'n', 's', 0xc0, 0x10,
      // rname: pointer to 16
      0xc0, 0x10,
      0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x0e, 0x10, 0x00, 0x00, 0x02, 0x58,
      0x00, 0x01, 0x51, 0x80, 0x00, 0x00, 0x00, 0x3c};
  const DnsMessage m = decode_message(wire);
  EXPECT_EQ(m.id, 0x1234);
  EXPECT_TRUE(m.qr);
  EXPECT_TRUE(m.aa);
  ASSERT_EQ(m.answers.size(), 1u);
  EXPECT_EQ(m.answers[0].owner, "1.5.flame.test");
  EXPECT_EQ(std::get<TxtData>(m.answers[0].rdata), TxtData{"hello"});
  ASSERT_EQ(m.authority.size(), 1u);
  EXPECT_EQ(m.authority[0].owner, "flame.test");
  const auto& soa = std::get<SoaData>(m.authority[0].rdata);
  EXPECT_EQ(soa.mname, "ns.flame.test");
  EXPECT_EQ(soa.rname, "flame.test");
  EXPECT_EQ(soa.serial, 1u);
  EXPECT_EQ(soa.minimum, 60u);
}

TEST(DnsWireTest, LoopingAndForwardPointersRejected) {
  std::vector<std::uint8_t> loop = {0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0,
                                    0xc0, 0x0c, 0x00, 0x10, 0x00, 0x01};
  EXPECT_THROW(decode_message(loop), ParseError);
  std::vector<std::uint8_t> forward = {0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0,
                                       0xc0, 0x0e, 0x01, 'a', 0x00, 0x00, 0x10, 0x00, 0x01};
  EXPECT_THROW(decode_message(forward), ParseError);
  EXPECT_THROW(decode_message(std::vector<std::uint8_t>{1, 2, 3}), ParseError);
  auto truncated = encode_query("5.flame.test", rtype::kTxt);
  truncated.pop_back();
  EXPECT_THROW(decode_message(truncated), ParseError);
}

TEST(DnsWireTest, FuzzNeverCrashes) {
  std::mt19937_64 rng(22);
  const auto seed = encode_message([] {
    DnsMessage m = make_query("1.3.5.flame.test", rtype::kTxt, 9);
    m.answers.push_back(ResourceRecord::txt("1.3.5.flame.test", 5, {"abc"}));
    return m;
  }());
  int parsed = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<std::uint8_t> wire;
    if (i % 2 == 0) {
      wire.resize(std::uniform_int_distribution<int>(0, 80)(rng));
      for (auto& b : wire) b = static_cast<std::uint8_t>(rng());
    } else {
      wire = seed;
      const int flips = std::uniform_int_distribution<int>(1, 4)(rng);
      for (int f = 0; f < flips; ++f) {
        wire[rng() % wire.size()] = static_cast<std::uint8_t>(rng());
      }
      if (rng() % 4 == 0) wire.resize(rng() % wire.size());
    }
    try {
      decode_message(wire);
      ++parsed;
    } catch (const ParseError&) {
    }
  }
  EXPECT_GT(parsed, 0);
}

}  // namespace
}  // namespace flame::dns
