#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "avowqc/rng.hpp"

namespace avowqc {

// Ordered sequence of classical bits. Bit 0 is the first (leftmost) bit of
// the string; hex encoding is most-significant-bit first with the final
// nibble zero-padded on the right.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t length, int fill = 0) : bits_(length, static_cast<uint8_t>(fill & 1)) {}

    static BitString from_hex(const std::string& hex);
    static BitString from_string(const std::string& zeros_and_ones);
    static BitString random(CounterRng& rng, std::size_t length);

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }

    int bit(std::size_t i) const { return bits_.at(i); }
    void set_bit(std::size_t i, int v) { bits_.at(i) = static_cast<uint8_t>(v & 1); }
    void flip_bit(std::size_t i) { bits_.at(i) ^= 1; }

    void push_back(int v) { bits_.push_back(static_cast<uint8_t>(v & 1)); }
    void append(const BitString& other);
    // Appends `nbits` bits of `value`, most significant first.
    void append_uint(uint64_t value, int nbits);
    // Reads `nbits` bits starting at `pos`, most significant first.
    uint64_t read_uint(std::size_t pos, int nbits) const;

    BitString slice(std::size_t pos, std::size_t length) const;

    BitString operator^(const BitString& other) const;
    bool operator==(const BitString& other) const = default;

    std::size_t hamming_distance(const BitString& other) const;

    std::string to_hex() const;
    std::string to_string() const;

    // Packs into bytes, zero bits prepended so the total is a whole number
    // of bytes; first bit of the padded string lands in the high bit of
    // byte 0. This left-aligned big-endian packing is the wire rule used by
    // the hash framing.
    std::vector<uint8_t> to_bytes_left_padded() const;

private:
    std::vector<uint8_t> bits_;  // one 0/1 value per element
};

}  // namespace avowqc
