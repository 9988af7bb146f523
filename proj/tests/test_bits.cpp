#include <doctest.h>

#include <set>

#include "avowqc/bits.hpp"
#include "avowqc/errors.hpp"
#include "avowqc/rng.hpp"

using namespace avowqc;

TEST_CASE("bit string construction and element access") {
    BitString b(5);
    CHECK(b.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(b.bit(i) == 0);
    b.set_bit(2, 1);
    CHECK(b.bit(2) == 1);
    b.flip_bit(2);
    CHECK(b.bit(2) == 0);
    b.push_back(1);
    CHECK(b.size() == 6);
    CHECK(b.bit(5) == 1);
    CHECK(BitString(3, 1) == BitString::from_string("111"));
    CHECK_THROWS(b.bit(99));
}

TEST_CASE("hex encoding is most-significant-bit first") {
    CHECK(BitString::from_string("10100111").to_hex() == "a7");
    CHECK(BitString::from_hex("a7") == BitString::from_string("10100111"));
    // A final partial nibble is padded on the right.
    CHECK(BitString::from_string("101").to_hex() == "a");
    CHECK(BitString::from_hex("a").slice(0, 3) == BitString::from_string("101"));
    CHECK(BitString().to_hex().empty());
    CHECK(BitString::from_hex("").empty());
    CHECK(BitString::from_hex("FF") == BitString::from_string("11111111"));
    CHECK_THROWS_AS(BitString::from_hex("0g"), ParseError);
    CHECK_THROWS_AS(BitString::from_string("012"), ParseError);
}

TEST_CASE("integers append and read back most-significant-bit first") {
    BitString b;
    b.append_uint(0b1011, 4);
    CHECK(b == BitString::from_string("1011"));
    b.append_uint(0, 2);
    CHECK(b == BitString::from_string("101100"));
    CHECK(b.read_uint(0, 4) == 0b1011);
    CHECK(b.read_uint(2, 3) == 0b110);

    BitString wide;
    wide.append_uint(UINT64_MAX, 64);
    CHECK(wide.size() == 64);
    CHECK(wide.read_uint(0, 64) == UINT64_MAX);
    wide = BitString();
    wide.append_uint(0x123456789ABCDEFULL, 64);
    CHECK(wide.read_uint(0, 64) == 0x123456789ABCDEFULL);
    CHECK_THROWS(wide.read_uint(60, 8));
}

TEST_CASE("slice, xor, append and hamming distance") {
    BitString a = BitString::from_string("110010");
    CHECK(a.slice(1, 3) == BitString::from_string("100"));
    CHECK(a.slice(0, 6) == a);
    CHECK(a.slice(6, 0).empty());
    CHECK_THROWS(a.slice(4, 3));

    BitString b = BitString::from_string("101010");
    CHECK((a ^ b) == BitString::from_string("011000"));
    CHECK((a ^ a) == BitString(6, 0));
    CHECK_THROWS_AS(a ^ BitString(5), DimensionError);
    CHECK(a.hamming_distance(b) == 2);
    CHECK(a.hamming_distance(a) == 0);

    BitString c = a;
    c.append(b);
    CHECK(c.size() == 12);
    CHECK(c.slice(6, 6) == b);
}

TEST_CASE("byte packing left-pads to whole bytes") {
    CHECK(BitString::from_string("1").to_bytes_left_padded() == std::vector<uint8_t>{0x01});
    CHECK(BitString::from_string("10100111").to_bytes_left_padded() == std::vector<uint8_t>{0xA7});
    // 9 bits gain 7 leading zero bits: 0000000_1 01000111.
    CHECK(BitString::from_string("101000111").to_bytes_left_padded() == std::vector<uint8_t>{0x01, 0x47});
    CHECK(BitString().to_bytes_left_padded().empty());
}

TEST_CASE("random bit strings are seed-deterministic and balanced") {
    CounterRng r1(17), r2(17), r3(18);
    BitString a = BitString::random(r1, 4096);
    BitString b = BitString::random(r2, 4096);
    BitString c = BitString::random(r3, 4096);
    CHECK(a == b);
    CHECK(a != c);
    std::size_t ones = a.hamming_distance(BitString(4096, 0));
    CHECK(ones > 1850);  // 0.5 +/- ~5 sigma
    CHECK(ones < 2250);
}

TEST_CASE("counter generator is reproducible and well-ranged") {
    CounterRng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    for (int i = 0; i < 1000; ++i) {
        double d = a.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
        uint64_t v = a.next_below(7);
        CHECK(v < 7);
        int bit = a.next_bit();
        CHECK((bit == 0 || bit == 1));
    }
    CHECK(a.draws() > 0);
}

TEST_CASE("next_below covers the full range without obvious bias") {
    CounterRng r(5);
    std::vector<int> counts(5, 0);
    for (int i = 0; i < 5000; ++i) ++counts[r.next_below(5)];
    for (int k = 0; k < 5; ++k) {
        CHECK(counts[k] > 800);  // expectation 1000
        CHECK(counts[k] < 1200);
    }
}

TEST_CASE("seed derivation separates labels and indices") {
    std::set<uint64_t> seen;
    for (uint64_t i = 0; i < 100; ++i) {
        seen.insert(derive_seed(42, "alpha", i));
        seen.insert(derive_seed(42, "beta", i));
    }
    CHECK(seen.size() == 200);
    CHECK(derive_seed(42, "alpha", 0) == derive_seed(42, "alpha", 0));
    CHECK(derive_seed(42, "alpha") != derive_seed(43, "alpha"));
}
