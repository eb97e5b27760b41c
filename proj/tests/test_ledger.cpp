#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "veilsum/errors.hpp"
#include "veilsum/hash.hpp"
#include "veilsum/ledger.hpp"
#include "veilsum/payloads.hpp"

using namespace veilsum;
using namespace veilsum::ledger;

static SessionId sid(std::uint8_t fill) {
    SessionId s{};
    s.fill(fill);
    return s;
}

static Bytes abort_payload(const std::string& reason) {
    return payloads::Abort{reason}.encode();
}

TEST_CASE("append assigns dense heights starting at zero") {
    Ledger chain;
    CHECK(chain.append(RecordKind::SessionAborted, sid(1), "relayer", abort_payload("a"), 1) == 0);
    CHECK(chain.append(RecordKind::SessionAborted, sid(1), "relayer", abort_payload("b"), 2) == 1);
    CHECK(chain.height() == 2);
    CHECK(chain.at(0).height == 0);
    CHECK(chain.at(1).height == 1);
}

TEST_CASE("append rejects malformed payloads and leaves the ledger unchanged") {
    Ledger chain;
    Bytes garbage = {0xde, 0xad};
    CHECK_THROWS_AS(chain.append(RecordKind::SessionManifest, sid(2), "x", garbage, 1),
                    MalformedData);
    CHECK(chain.height() == 0);
}

TEST_CASE("appended payloads read back byte-identical") {
    Ledger chain;
    payloads::Abort ab{"because"};
    Bytes payload = ab.encode();
    std::uint64_t h = chain.append(RecordKind::SessionAborted, sid(3), "relayer", payload, 7);
    CHECK(chain.at(h).payload == payload);
    CHECK(chain.at(h).logical_time == 7);
    CHECK(chain.at(h).author == "relayer");
}

TEST_CASE("query filters by session and kind in height order") {
    Ledger chain;
    for (int i = 0; i < 3; ++i)
        chain.append(RecordKind::SessionAborted, sid(4), "relayer", abort_payload("x"), i);
    chain.append(RecordKind::SessionAborted, sid(5), "relayer", abort_payload("y"), 3);

    SUBCASE("unknown session yields an empty list") {
        CHECK(chain.query(sid(9)).empty());
    }
    SUBCASE("kind filter returns exactly the matching records") {
        auto got = chain.query(sid(4), RecordKind::SessionAborted);
        REQUIRE(got.size() == 3);
        CHECK(got[0]->height < got[1]->height);
        CHECK(got[1]->height < got[2]->height);
    }
    SUBCASE("omitted kind returns all kinds for the session") {
        CHECK(chain.query(sid(4)).size() == 3);
        CHECK(chain.query(sid(5)).size() == 1);
    }
}

TEST_CASE("poll partitions the stream without duplicates or gaps") {
    Ledger chain;
    for (int i = 0; i < 5; ++i)
        chain.append(RecordKind::SessionAborted, sid(6), "relayer", abort_payload("r"), i);

    CHECK(chain.poll(chain.height()).empty());
    CHECK(chain.poll(0).size() == 5);

    std::vector<std::uint64_t> seen;
    std::uint64_t cursor = 0;
    int extra = 0;
    while (cursor < chain.height() && extra < 10) {
        auto batch = chain.poll(cursor);
        for (const Record* rec : batch) seen.push_back(rec->height);
        cursor = seen.back() + 1;
        chain.append(RecordKind::SessionAborted, sid(6), "relayer", abort_payload("s"),
                     100 + cursor);
        extra++;
    }
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == i);
}

TEST_CASE("records are immutable once appended") {
    Ledger chain;
    chain.append(RecordKind::SessionAborted, sid(7), "relayer", abort_payload("k"), 1);
    Digest32 before = sha256(to_bytes(chain.at(0).dump_line()));
    chain.append(RecordKind::SessionAborted, sid(7), "relayer", abort_payload("m"), 2);
    chain.append(RecordKind::SessionAborted, sid(8), "relayer", abort_payload("n"), 3);
    Digest32 after = sha256(to_bytes(chain.at(0).dump_line()));
    CHECK(before == after);
}

TEST_CASE("dump lines roundtrip through parse") {
    Ledger chain;
    chain.append(RecordKind::SessionAborted, sid(9), "relayer", abort_payload("zz"), 42);
    std::string line = chain.at(0).dump_line();
    Record back = Record::parse_line(line);
    CHECK(back.height == 0);
    CHECK(back.kind == RecordKind::SessionAborted);
    CHECK(back.session_id == sid(9));
    CHECK(back.author == "relayer");
    CHECK(back.payload == abort_payload("zz"));
    CHECK(back.logical_time == 42);
    CHECK(back.dump_line() == line);

    CHECK_THROWS_AS(Record::parse_line("not json"), MalformedData);
    CHECK_THROWS_AS(Record::parse_line("{\"height\":0}"), MalformedData);
}

TEST_CASE("kind names roundtrip") {
    for (int k = 0; k <= static_cast<int>(RecordKind::ServiceDecision); ++k) {
        auto kind = static_cast<RecordKind>(k);
        auto back = kind_from_name(kind_name(kind));
        REQUIRE(back.has_value());
        CHECK(*back == kind);
    }
    CHECK_FALSE(kind_from_name("NotAKind").has_value());
}

TEST_CASE("payload codecs reject truncation and trailing bytes") {
    payloads::Manifest m;
    m.caddr_token = {1, 2, 3};
    m.expected = {{"bank-a", "acct-1"}, {"bank-b", "acct-2"}};
    Bytes wire = m.encode();

    payloads::Manifest back = payloads::Manifest::decode(wire);
    CHECK(back.caddr_token == m.caddr_token);
    CHECK(back.expected == m.expected);

    Bytes truncated(wire.begin(), wire.end() - 1);
    CHECK_THROWS_AS(payloads::Manifest::decode(truncated), MalformedData);
    Bytes extended = wire;
    extended.push_back(0);
    CHECK_THROWS_AS(payloads::Manifest::decode(extended), MalformedData);
}
